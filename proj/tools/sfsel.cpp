/*
 * Copyright 2026 The sfsel Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "sfs/sfs.hpp"

namespace {

using sfs::Errc;
using sfs::Error;

// Writes every file to a temporary sibling first and renames only once all
// of them are complete, so a failure never leaves partial outputs behind.
class AtomicOutputs {
 public:
  void add(const std::string& path, const std::function<void(std::ostream&)>& fill) {
    const std::string tmp = path + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(Errc::Io, "cannot write " + path);
      fill(out);
      out.flush();
      if (!out) {
        out.close();
        std::remove(tmp.c_str());
        throw Error(Errc::Io, "failed writing " + path);
      }
    }
    pending_.emplace_back(tmp, path);
  }

  void commit() {
    for (const auto& [tmp, path] : pending_) std::filesystem::rename(tmp, path);
    pending_.clear();
  }

  ~AtomicOutputs() {
    for (const auto& [tmp, path] : pending_) std::remove(tmp.c_str());
  }

 private:
  std::vector<std::pair<std::string, std::string>> pending_;
};

struct SchemaFlags {
  std::string log;
  sfs::CsvSchema schema;
  std::string order_mode = "auto";

  void attach(CLI::App* app) {
    app->add_option("--log", log, "Event log CSV")->required();
    app->add_option("--case-col", schema.case_col, "Case id column")->required();
    app->add_option("--activity-col", schema.activity_col, "Activity column")->required();
    app->add_option("--time-col,--order-col", schema.order_col, "Timestamp or sequence column")->required();
    app->add_option("--attr-col", schema.attribute_cols, "Case attribute column (repeatable)");
    app->add_option("--order-mode", order_mode, "auto, timestamp or integer")
        ->check(CLI::IsMember({"auto", "timestamp", "integer"}));
  }

  sfs::EventLog load() {
    schema.order_mode = sfs::parse_order_mode(order_mode);
    std::ifstream in(log);
    if (!in) throw Error(Errc::Io, "cannot open " + log);
    return sfs::read_log(in, schema);
  }
};

sfs::FeatureMatrix load_features(const std::string& prefix) { return sfs::load_feature_matrix(prefix); }

int cmd_extract(SchemaFlags& flags, const std::string& types, const std::string& out) {
  const auto kinds = sfs::KindSet::parse(types);
  if (kinds.empty()) throw Error(Errc::EmptyKinds, "--types selects no feature kinds");
  const auto log = flags.load();
  const auto m = sfs::extract(log, kinds);
  AtomicOutputs files;
  files.add(sfs::features_header_path(out), [&](std::ostream& o) { o << sfs::feature_header_json(m).dump(2) << '\n'; });
  files.add(sfs::features_values_path(out), [&](std::ostream& o) { sfs::write_feature_values(o, m); });
  files.commit();
  std::cerr << "extracted " << m.n_features() << " features over " << m.n_cases() << " cases\n";
  return 0;
}

int cmd_label(SchemaFlags& flags, const std::string& duration, const std::string& attribute, const std::string& equals,
              const std::string& out) {
  if (duration.empty() == attribute.empty()) {
    throw Error(Errc::InvalidArgument, "give exactly one of --duration or --attribute");
  }
  if (!attribute.empty() && equals.empty()) throw Error(Errc::InvalidArgument, "--attribute needs --equals");
  const auto threshold = duration.empty() ? sfs::Nanos{0} : sfs::parse_duration(duration);
  const auto log = flags.load();
  const auto labels = duration.empty() ? sfs::label_by_attribute(log, attribute, equals)
                                       : sfs::label_by_duration(log, threshold);
  std::vector<std::string> ids;
  for (const auto& c : log.cases()) ids.push_back(c.id);
  AtomicOutputs files;
  files.add(out, [&](std::ostream& o) { sfs::write_labels(o, ids, labels); });
  files.commit();
  std::cerr << labels.positive_count() << " positive, " << labels.negative_count() << " negative\n";
  return 0;
}

struct SelectFlags {
  std::string features, labels, algorithm = "fisher", out;
  std::size_t k = 10;
  std::uint64_t seed = 0;
  unsigned mi_bins = sfs::kDefaultMiBins;
  bool omit_timings = false;
};

int cmd_select(const SelectFlags& f) {
  const auto spec = sfs::AlgorithmSpec::parse(f.algorithm);
  if (f.k == 0) throw Error(Errc::InvalidArgument, "--k must be at least 1");
  const auto m = load_features(f.features);
  const auto labels = sfs::align_labels(sfs::load_labels(f.labels), m.case_ids());
  if (f.k > m.n_features()) {
    std::cerr << "warning: k=" << f.k << " exceeds the " << m.n_features() << " available features\n";
  }
  sfs::SelectionParams params;
  params.mi_bins = f.mi_bins;
  const sfs::SelectionRequest req{m, labels, f.k, f.seed, spec, params};
  const auto res = sfs::select(req);
  const auto json = sfs::selection_json(res, m, spec, f.k, f.seed, !f.omit_timings);
  if (f.out.empty()) {
    std::cout << json.dump(2) << '\n';
  } else {
    AtomicOutputs files;
    files.add(f.out, [&](std::ostream& o) { o << json.dump(2) << '\n'; });
    files.commit();
    for (auto j : res.selected) std::cout << m.feature_name(j) << '\n';
  }
  return 0;
}

struct EvaluateFlags {
  std::string features, labels, selection, out;
  double train_fraction = 0.25;
  std::uint64_t seed = 0;
  sfs::GbmConfig gbm;
  bool omit_timings = false;
};

int cmd_evaluate(EvaluateFlags& f) {
  f.gbm.validate();
  const auto m = load_features(f.features);
  const auto labels = sfs::align_labels(sfs::load_labels(f.labels), m.case_ids());
  std::vector<std::size_t> cols;
  if (f.selection.empty()) {
    for (std::size_t j = 0; j < m.n_features(); ++j) cols.push_back(j);
  } else {
    std::ifstream in(f.selection);
    if (!in) throw Error(Errc::Io, "cannot open " + f.selection);
    nlohmann::json sel;
    try {
      in >> sel;
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::Format, f.selection + " is not valid JSON: " + e.what());
    }
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t j = 0; j < m.n_features(); ++j) index.emplace(m.feature_name(j), j);
    if (!sel.contains("selected") || !sel["selected"].is_array()) {
      throw Error(Errc::Format, f.selection + " has no 'selected' list");
    }
    for (const auto& name : sel["selected"]) {
      auto it = index.find(name.get<std::string>());
      if (it == index.end()) throw Error(Errc::MissingFeature, "feature '" + name.get<std::string>() + "' not in matrix");
      cols.push_back(it->second);
    }
  }
  const auto split = sfs::split_train_test(m.n_cases(), f.train_fraction, f.seed);
  const auto x = m.select_columns(cols);
  auto cfg = f.gbm;
  cfg.seed = f.seed;
  const auto train_labels = labels.subset(split.train);
  const auto start = std::chrono::steady_clock::now();
  const auto model = sfs::train_gbm(x.select_rows(split.train), train_labels, cfg);
  const auto train_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start);
  const auto metrics = sfs::evaluate(model, x.select_rows(split.test), labels.subset(split.test));
  nlohmann::json json{{"accuracy", metrics.accuracy},
                      {"confusion",
                       {{"tp", metrics.confusion.tp},
                        {"fp", metrics.confusion.fp},
                        {"fn", metrics.confusion.fn},
                        {"tn", metrics.confusion.tn}}},
                      {"n_train", split.train.size()},
                      {"n_test", split.test.size()},
                      {"features", x.feature_names()}};
  if (!f.omit_timings) {
    json["train_ns"] = train_ns.count();
    json["predict_ns"] = std::chrono::duration_cast<std::chrono::nanoseconds>(metrics.predict_elapsed).count();
  }
  if (f.out.empty()) {
    std::cout << json.dump(2) << '\n';
  } else {
    AtomicOutputs files;
    files.add(f.out, [&](std::ostream& o) { o << json.dump(2) << '\n'; });
    files.commit();
    std::cout << "accuracy " << metrics.accuracy << '\n';
  }
  return 0;
}

int cmd_bench(const std::string& config_path, const std::string& out, std::size_t jobs, bool omit_timings) {
  auto cfg = sfs::load_experiment_config(config_path);
  if (omit_timings) cfg.timings = false;
  std::size_t done = 0;
  const std::size_t total =
      cfg.datasets.size() * cfg.scenarios.size() * cfg.combos.size() * (1 + cfg.ks.size() * cfg.algorithms.size());
  const auto report = sfs::run_experiment(cfg, jobs, [&](const sfs::RunRecord& r, std::chrono::milliseconds ms) {
    ++done;
    std::cerr << '[' << done << '/' << total << "] " << r.dataset << ' ' << r.scenario << ' ' << r.combo << " k=" << r.k
              << ' ' << r.algorithm << ' ' << r.status << ' ' << ms.count() << " ms\n";
  });
  AtomicOutputs files;
  files.add(out + ".csv", [&](std::ostream& o) { sfs::write_report_csv(o, report, cfg.timings); });
  files.add(out + ".json", [&](std::ostream& o) { o << sfs::report_json(report, cfg.timings).dump(2) << '\n'; });
  files.commit();
  std::size_t failed = 0;
  for (const auto& r : report.records) failed += !r.ok();
  std::cerr << report.records.size() << " records, " << failed << " skipped or failed\n";
  return 0;
}

struct SynthFlags {
  sfs::SyntheticSpec spec;
  std::string rule = "2gram";
  std::string out, labels_out;
};

int cmd_synth(SynthFlags& f) {
  f.spec.rule = sfs::parse_planted_rule(f.rule);
  const auto syn = sfs::generate_synthetic_log(f.spec);
  AtomicOutputs files;
  files.add(f.out, [&](std::ostream& o) { sfs::write_canonical_csv(o, syn.log); });
  if (!f.labels_out.empty()) {
    std::vector<std::string> ids;
    for (const auto& c : syn.log.cases()) ids.push_back(c.id);
    files.add(f.labels_out, [&](std::ostream& o) { sfs::write_labels(o, ids, syn.labels); });
  }
  files.commit();
  std::cerr << "planted " << sfs::feature_name(syn.planted_feature, syn.log) << " in "
            << std::count(syn.planted.begin(), syn.planted.end(), 1) << " of " << syn.log.size() << " cases\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structural feature extraction and selection for event logs"};
  app.require_subcommand(1);

  SchemaFlags extract_schema;
  std::string types = "activity", extract_out;
  auto* extract = app.add_subcommand("extract", "Extract a feature matrix from an event log");
  extract_schema.attach(extract);
  extract->add_option("--types", types, "Feature kinds, e.g. activity,sf,2gram,order or all");
  extract->add_option("--out", extract_out, "Output prefix (<out>.header.json, <out>.values.csv)")->required();

  SchemaFlags label_schema;
  std::string duration, attribute, equals, label_out;
  auto* label = app.add_subcommand("label", "Derive binary case labels");
  label_schema.attach(label);
  label->add_option("--duration", duration, "Positive when case duration exceeds this (7d, 168h, 20w)");
  label->add_option("--attribute", attribute, "Positive when this case attribute ...");
  label->add_option("--equals", equals, "... equals this value");
  label->add_option("--out", label_out, "Label CSV")->required();

  SelectFlags sel;
  auto* select = app.add_subcommand("select", "Select k features");
  select->add_option("--features", sel.features, "Feature matrix prefix")->required();
  select->add_option("--labels", sel.labels, "Label CSV")->required();
  select->add_option("--algorithm", sel.algorithm,
                     "random, fisher, cluster, clust_importance, clust_fisher, mrmr, mrmr_classic, clust_mrmr, lasso, "
                     "recursive");
  select->add_option("--k", sel.k, "Number of features");
  select->add_option("--seed", sel.seed, "Random seed");
  select->add_option("--mi-bins", sel.mi_bins, "Discretization bins for mutual information")->check(CLI::PositiveNumber);
  select->add_option("--out", sel.out, "Selection JSON (stdout when omitted)");
  select->add_flag("--omit-timings", sel.omit_timings, "Leave elapsed time out of the JSON");

  EvaluateFlags ev;
  auto* evaluate = app.add_subcommand("evaluate", "Train and test the classifier on selected features");
  evaluate->add_option("--features", ev.features, "Feature matrix prefix")->required();
  evaluate->add_option("--labels", ev.labels, "Label CSV")->required();
  evaluate->add_option("--selection", ev.selection, "Selection JSON; all features when omitted");
  evaluate->add_option("--train-fraction", ev.train_fraction, "Share of cases used for training");
  evaluate->add_option("--seed", ev.seed, "Split and model seed");
  evaluate->add_option("--rounds", ev.gbm.rounds, "Boosting rounds");
  evaluate->add_option("--learning-rate", ev.gbm.learning_rate, "Shrinkage");
  evaluate->add_option("--max-depth", ev.gbm.max_depth, "Tree depth");
  evaluate->add_option("--min-leaf", ev.gbm.min_leaf, "Minimum rows per leaf");
  evaluate->add_option("--out", ev.out, "Metrics JSON (stdout when omitted)");
  evaluate->add_flag("--omit-timings", ev.omit_timings, "Leave elapsed time out of the JSON");

  std::string config, bench_out;
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  bool bench_omit = false;
  auto* bench = app.add_subcommand("bench", "Run an experiment grid");
  bench->add_option("--config", config, "Experiment JSON")->required();
  bench->add_option("--out", bench_out, "Report prefix (<out>.csv, <out>.json)")->required();
  bench->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  bench->add_flag("--omit-timings", bench_omit, "Leave timing columns empty");

  SynthFlags syn;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic log with a planted rule");
  synth->add_option("--cases", syn.spec.n_cases, "Number of cases");
  synth->add_option("--alphabet", syn.spec.alphabet_size, "Number of activities");
  synth->add_option("--min-length", syn.spec.min_length, "Shortest trace");
  synth->add_option("--max-length", syn.spec.max_length, "Longest trace");
  synth->add_option("--rule", syn.rule, "2gram, order or activity");
  synth->add_option("--from", syn.spec.rule_from, "First activity index of the rule");
  synth->add_option("--to", syn.spec.rule_to, "Second activity index of the rule");
  synth->add_option("--plant-rate", syn.spec.plant_rate, "Share of cases carrying the rule");
  synth->add_option("--noise", syn.spec.noise, "Label flip rate");
  synth->add_option("--seed", syn.spec.seed, "Random seed");
  synth->add_option("--out", syn.out, "Log CSV")->required();
  synth->add_option("--labels-out", syn.labels_out, "Also write the labels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (extract->parsed()) return cmd_extract(extract_schema, types, extract_out);
    if (label->parsed()) return cmd_label(label_schema, duration, attribute, equals, label_out);
    if (select->parsed()) return cmd_select(sel);
    if (evaluate->parsed()) return cmd_evaluate(ev);
    if (bench->parsed()) return cmd_bench(config, bench_out, jobs, bench_omit);
    if (synth->parsed()) return cmd_synth(syn);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return sfs::is_data_condition(e.code()) ? 3 : 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: Io: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
