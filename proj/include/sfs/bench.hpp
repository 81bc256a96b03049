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

#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "sfs/csv.hpp"
#include "sfs/error.hpp"
#include "sfs/eventlog.hpp"
#include "sfs/features.hpp"
#include "sfs/gbm.hpp"
#include "sfs/metrics.hpp"
#include "sfs/rng.hpp"
#include "sfs/selection.hpp"
#include "sfs/selection_io.hpp"
#include "sfs/timeutil.hpp"

namespace sfs {

// Synthetic logs

enum class PlantedRule { TwoGram, Order, Activity };

inline std::string_view planted_rule_name(PlantedRule r) {
  switch (r) {
    case PlantedRule::TwoGram: return "2gram";
    case PlantedRule::Order: return "order";
    case PlantedRule::Activity: return "activity";
  }
  return "?";
}

inline PlantedRule parse_planted_rule(std::string_view s) {
  if (s == "2gram" || s == "transition" || s == "2g") return PlantedRule::TwoGram;
  if (s == "order" || s == "ord") return PlantedRule::Order;
  if (s == "activity" || s == "act") return PlantedRule::Activity;
  throw Error(Errc::InvalidArgument, "unknown planted rule '" + std::string(s) + "'");
}

struct SyntheticSpec {
  std::size_t n_cases = 2000;
  std::size_t alphabet_size = 10;
  std::size_t min_length = 4;
  std::size_t max_length = 12;
  PlantedRule rule = PlantedRule::TwoGram;
  std::size_t rule_from = 0;  // activity indices a00, a01, ...
  std::size_t rule_to = 1;
  double plant_rate = 0.5;  // share of cases carrying the rule
  double noise = 0.05;      // label flip rate
  std::uint64_t seed = 1;

  void validate() const {
    if (alphabet_size < 3) throw Error(Errc::InvalidArgument, "alphabet must have at least 3 activities");
    if (alphabet_size > 1000) throw Error(Errc::InvalidArgument, "alphabet must have at most 1000 activities");
    if (!(noise >= 0.0 && noise < 0.5)) throw Error(Errc::InvalidArgument, "noise must be in [0, 0.5)");
    if (!(plant_rate > 0.0 && plant_rate < 1.0)) throw Error(Errc::InvalidArgument, "plant rate must be in (0, 1)");
    if (min_length < 2 || max_length < min_length) throw Error(Errc::InvalidArgument, "need 2 <= min_length <= max_length");
    if (rule_from >= alphabet_size || rule_to >= alphabet_size) {
      throw Error(Errc::InvalidArgument, "planted rule activities must lie in the alphabet");
    }
    if (rule != PlantedRule::Activity && rule_from == rule_to) {
      throw Error(Errc::InvalidArgument, "planted pair needs two different activities");
    }
    if (n_cases == 0) throw Error(Errc::InvalidArgument, "n_cases must be positive");
  }
};

struct SyntheticLog {
  EventLog log;
  LabelVector labels;
  std::vector<std::uint8_t> planted;  // rule presence per case, before noise
  FeatureDescriptor planted_feature;
};

inline std::string synthetic_activity_name(std::size_t i, std::size_t alphabet_size) {
  const int width = alphabet_size <= 100 ? 2 : 3;
  char buf[32];
  std::snprintf(buf, sizeof buf, "a%0*zu", width, i);
  return buf;
}

namespace detail {

// Uniform random trace over `alpha` symbols in which `a` is never directly
// followed by `b`.
inline std::vector<ActivityId> trace_without_pair(Rng& rng, std::size_t len, std::size_t alpha, ActivityId a,
                                                  ActivityId b) {
  std::vector<ActivityId> t;
  t.reserve(len + 2);
  while (t.size() < len) {
    auto s = static_cast<ActivityId>(rng.below(alpha));
    if (!t.empty() && t.back() == a && s == b) continue;
    t.push_back(s);
  }
  return t;
}

inline bool order_holds(const std::vector<ActivityId>& t, ActivityId a, ActivityId b) {
  auto fa = std::find(t.begin(), t.end(), a), fb = std::find(t.begin(), t.end(), b);
  return fa != t.end() && fb != t.end() && fa < fb;
}

}  // namespace detail

// Traces are uniform random activity strings. The planted rule is made to
// hold in a seeded share of cases and to be absent elsewhere; for 2-gram
// and activity rules a carrying trace holds exactly one occurrence, so the
// planted feature column equals the rule presence. Labels are the presence
// with seeded flips at the noise rate, and are also written as the case
// attribute `label` ("yes"/"no").
inline SyntheticLog generate_synthetic_log(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t alpha = spec.alphabet_size;
  const auto a = static_cast<ActivityId>(spec.rule_from);
  const auto b = static_cast<ActivityId>(spec.rule_to);
  std::vector<std::string> alphabet;
  for (std::size_t i = 0; i < alpha; ++i) alphabet.push_back(synthetic_activity_name(i, alpha));

  // 2020-01-01T00:00:00Z
  constexpr std::int64_t kEpoch2020 = 1577836800LL * 1000000000LL;
  constexpr std::int64_t kMinute = 60LL * 1000000000LL;

  SyntheticLog out;
  std::vector<Case> cases;
  std::vector<std::uint8_t> labels;
  cases.reserve(spec.n_cases);
  std::int64_t clock = kEpoch2020;
  for (std::size_t i = 0; i < spec.n_cases; ++i) {
    const bool plant = rng.bernoulli(spec.plant_rate);
    const auto len = spec.min_length + static_cast<std::size_t>(rng.below(spec.max_length - spec.min_length + 1));
    std::vector<ActivityId> trace;
    switch (spec.rule) {
      case PlantedRule::TwoGram: {
        if (plant) {
          trace = detail::trace_without_pair(rng, len - 2, alpha, a, b);
          const auto at = static_cast<std::ptrdiff_t>(rng.below(trace.size() + 1));
          trace.insert(trace.begin() + at, {a, b});
        } else {
          trace = detail::trace_without_pair(rng, len, alpha, a, b);
        }
        break;
      }
      case PlantedRule::Activity: {
        const std::size_t body = plant ? len - 1 : len;
        while (trace.size() < body) {
          auto s = static_cast<ActivityId>(rng.below(alpha));
          if (s != a) trace.push_back(s);
        }
        if (plant) trace.insert(trace.begin() + static_cast<std::ptrdiff_t>(rng.below(trace.size() + 1)), a);
        break;
      }
      case PlantedRule::Order: {
        for (int attempt = 0;; ++attempt) {
          trace.clear();
          for (std::size_t t = 0; t < len; ++t) trace.push_back(static_cast<ActivityId>(rng.below(alpha)));
          if (detail::order_holds(trace, a, b) == plant) break;
          if (attempt > 10000) throw Error(Errc::InvalidArgument, "cannot realise the planted order rule");
        }
        break;
      }
    }
    const bool flip = rng.bernoulli(spec.noise);
    const bool label = plant != flip;
    Case c;
    char id[32];
    std::snprintf(id, sizeof id, "c%05zu", i);
    c.id = id;
    c.trace = std::move(trace);
    c.start_time = clock;
    std::int64_t span = 0;
    for (std::size_t e = 1; e < c.trace.size(); ++e) span += (1 + static_cast<std::int64_t>(rng.below(60))) * kMinute;
    c.end_time = clock + span;
    c.attributes["label"] = label ? "yes" : "no";
    clock += (1 + static_cast<std::int64_t>(rng.below(30))) * kMinute;
    cases.push_back(std::move(c));
    out.planted.push_back(plant);
    labels.push_back(label);
  }
  out.log = EventLog(std::move(alphabet), std::move(cases), true);
  out.labels = LabelVector(std::move(labels));
  switch (spec.rule) {
    case PlantedRule::TwoGram: out.planted_feature = FeatureDescriptor::two_gram(a, b); break;
    case PlantedRule::Order: out.planted_feature = FeatureDescriptor::order(a, b); break;
    case PlantedRule::Activity: out.planted_feature = FeatureDescriptor::activity(a); break;
  }
  return out;
}

inline SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
  SyntheticSpec s;
  s.n_cases = j.value("n_cases", s.n_cases);
  s.alphabet_size = j.value("alphabet", s.alphabet_size);
  s.min_length = j.value("min_length", s.min_length);
  s.max_length = j.value("max_length", s.max_length);
  s.rule = parse_planted_rule(j.value("rule", std::string(planted_rule_name(s.rule))));
  s.rule_from = j.value("from", s.rule_from);
  s.rule_to = j.value("to", s.rule_to);
  s.plant_rate = j.value("plant_rate", s.plant_rate);
  s.noise = j.value("noise", s.noise);
  s.seed = j.value("seed", s.seed);
  s.validate();
  return s;
}

// Combination presets

// Activity with every subset of {starter+finisher, 2gram, order}, then
// 2gram, order and 2gram+order alone.
inline std::vector<KindSet> default_combos() {
  using K = FeatureKind;
  const KindSet act{K::Activity};
  const KindSet sf{K::Starter, K::Finisher};
  const KindSet tg{K::TwoGram};
  const KindSet od{K::Order};
  auto join = [](std::initializer_list<KindSet> parts) {
    KindSet s;
    for (auto p : parts)
      for (auto k : p.kinds()) s.insert(k);
    return s;
  };
  return {act,
          join({act, sf}),
          join({act, tg}),
          join({act, od}),
          join({act, sf, tg}),
          join({act, sf, od}),
          join({act, tg, od}),
          join({act, sf, tg, od}),
          tg,
          od,
          join({tg, od})};
}

// Experiment configuration

struct DatasetSpec {
  std::string name;
  std::optional<std::string> log_path;
  CsvSchema schema;
  std::optional<SyntheticSpec> synthetic;
  std::optional<std::size_t> sample;
};

struct ScenarioSpec {
  std::string name;
  std::optional<Nanos> duration;  // label = case duration > threshold
  std::string attribute;           // otherwise label = attribute == equals
  std::string equals;
};

struct ExperimentConfig {
  std::vector<DatasetSpec> datasets;
  std::vector<ScenarioSpec> scenarios;
  std::vector<KindSet> combos;
  std::vector<std::size_t> ks;
  std::vector<AlgorithmSpec> algorithms;
  std::uint64_t master_seed = 0;
  double train_fraction = 0.25;
  GbmConfig gbm{};
  unsigned mi_bins = kDefaultMiBins;
  SelectionParams selection{};
  bool timings = true;

  void validate() const {
    if (datasets.empty()) throw Error(Errc::InvalidArgument, "config lists no datasets");
    if (scenarios.empty()) throw Error(Errc::InvalidArgument, "config lists no scenarios");
    if (combos.empty()) throw Error(Errc::InvalidArgument, "config lists no combos");
    if (ks.empty()) throw Error(Errc::InvalidArgument, "config lists no k values");
    if (algorithms.empty()) throw Error(Errc::InvalidArgument, "config lists no algorithms");
    for (auto k : ks)
      if (k == 0) throw Error(Errc::InvalidArgument, "k values must be positive");
    for (const auto& c : combos)
      if (c.empty()) throw Error(Errc::EmptyKinds, "a combo has no feature kinds");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
      throw Error(Errc::InvalidArgument, "train_fraction must be in (0, 1)");
    if (mi_bins == 0) throw Error(Errc::InvalidArgument, "mi_bins must be positive");
    gbm.validate();
    std::unordered_set<std::string> names;
    for (const auto& d : datasets) {
      if (!names.insert(d.name).second) throw Error(Errc::InvalidArgument, "duplicate dataset name '" + d.name + "'");
      if (!d.log_path && !d.synthetic) throw Error(Errc::InvalidArgument, "dataset '" + d.name + "' has no source");
    }
    names.clear();
    for (const auto& s : scenarios)
      if (!names.insert(s.name).second) throw Error(Errc::InvalidArgument, "duplicate scenario name '" + s.name + "'");
  }
};

inline OrderKeyMode parse_order_mode(const std::string& s) {
  if (s == "auto") return OrderKeyMode::Auto;
  if (s == "timestamp") return OrderKeyMode::Timestamp;
  if (s == "integer") return OrderKeyMode::Integer;
  throw Error(Errc::InvalidArgument, "unknown order mode '" + s + "'");
}

// Relative log paths resolve against `base_dir`.
inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                                    const std::filesystem::path& base_dir = {}) {
  ExperimentConfig cfg;
  try {
    for (const auto& d : j.at("datasets")) {
      DatasetSpec ds;
      ds.name = d.at("name").get<std::string>();
      if (d.contains("synthetic")) {
        ds.synthetic = synthetic_spec_from_json(d.at("synthetic"));
      } else {
        auto p = std::filesystem::path(d.at("log").get<std::string>());
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        ds.log_path = p.string();
        ds.schema.case_col = d.value("case_col", ds.schema.case_col);
        ds.schema.activity_col = d.value("activity_col", ds.schema.activity_col);
        ds.schema.order_col = d.value("order_col", ds.schema.order_col);
        ds.schema.attribute_cols = d.value("attribute_cols", std::vector<std::string>{});
        ds.schema.order_mode = parse_order_mode(d.value("order_mode", std::string("auto")));
      }
      if (d.contains("sample")) ds.sample = d.at("sample").get<std::size_t>();
      cfg.datasets.push_back(std::move(ds));
    }
    for (const auto& s : j.at("scenarios")) {
      ScenarioSpec sc;
      sc.name = s.at("name").get<std::string>();
      if (s.contains("duration")) {
        sc.duration = parse_duration(s.at("duration").get<std::string>());
      } else {
        sc.attribute = s.at("attribute").get<std::string>();
        sc.equals = s.at("equals").get<std::string>();
      }
      cfg.scenarios.push_back(std::move(sc));
    }
    const auto& combos = j.at("combos");
    if (combos.is_string() && combos.get<std::string>() == "default") {
      cfg.combos = default_combos();
    } else {
      for (const auto& c : combos) cfg.combos.push_back(KindSet::parse(c.get<std::string>()));
    }
    cfg.ks = j.at("ks").get<std::vector<std::size_t>>();
    for (const auto& a : j.at("algorithms")) cfg.algorithms.push_back(AlgorithmSpec::parse(a.get<std::string>()));
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    cfg.train_fraction = j.value("train_fraction", cfg.train_fraction);
    cfg.mi_bins = j.value("mi_bins", cfg.mi_bins);
    cfg.selection.mi_bins = cfg.mi_bins;
    cfg.timings = j.value("timings", cfg.timings);
    if (j.contains("gbm")) {
      const auto& g = j.at("gbm");
      cfg.gbm.rounds = g.value("rounds", cfg.gbm.rounds);
      cfg.gbm.learning_rate = g.value("learning_rate", cfg.gbm.learning_rate);
      cfg.gbm.max_depth = g.value("max_depth", cfg.gbm.max_depth);
      cfg.gbm.min_leaf = g.value("min_leaf", cfg.gbm.min_leaf);
    }
    cfg.selection.importance_gbm = cfg.gbm;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Format, std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Format, path + " is not valid JSON: " + e.what());
  }
  return experiment_config_from_json(j, std::filesystem::path(path).parent_path());
}

// Reports

struct RunRecord {
  std::string dataset;
  std::string scenario;
  std::string combo;
  std::size_t k = 0;  // 0 for the None baseline
  std::string algorithm;
  std::uint64_t seed = 0;
  std::size_t n_features = 0;
  std::size_t n_after_dedup = 0;
  std::vector<std::string> selected;
  std::vector<double> scores;
  std::chrono::nanoseconds select_elapsed{0};
  std::chrono::nanoseconds train_elapsed{0};
  std::chrono::nanoseconds eval_elapsed{0};
  double accuracy = 0.0;
  ConfusionMatrix confusion;
  std::optional<MiCoverage> mi;
  std::string status = "ok";
  std::vector<double> random_accuracies;  // the three Random sub-runs

  bool ok() const { return status == "ok"; }
};

struct Report {
  std::vector<RunRecord> records;
};

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols{
      "dataset",     "scenario", "combo", "k",  "algorithm",        "seed",          "n_features",
      "n_after_dedup", "accuracy", "tp",  "fp", "fn",               "tn",            "mi_vs_predictors",
      "mi_vs_outcome", "select_ns", "train_ns", "eval_ns", "selected_features", "status"};
  return cols;
}

inline void write_report_csv(std::ostream& out, const Report& report, bool timings = true) {
  csv::write_row(out, report_columns());
  for (const auto& r : report.records) {
    const bool ok = r.ok();
    auto ns = [&](std::chrono::nanoseconds d) { return ok && timings ? std::to_string(d.count()) : std::string{}; };
    std::vector<std::string> row{r.dataset,
                                 r.scenario,
                                 r.combo,
                                 std::to_string(r.k),
                                 r.algorithm,
                                 std::to_string(r.seed),
                                 std::to_string(r.n_features),
                                 std::to_string(r.n_after_dedup),
                                 ok ? format_double(r.accuracy) : "",
                                 ok ? std::to_string(r.confusion.tp) : "",
                                 ok ? std::to_string(r.confusion.fp) : "",
                                 ok ? std::to_string(r.confusion.fn) : "",
                                 ok ? std::to_string(r.confusion.tn) : "",
                                 r.mi ? format_double(r.mi->vs_predictors) : "",
                                 r.mi ? format_double(r.mi->vs_outcome) : "",
                                 ns(r.select_elapsed),
                                 ns(r.train_elapsed),
                                 ns(r.eval_elapsed),
                                 nlohmann::json(r.selected).dump(),
                                 r.status};
    csv::write_row(out, row);
  }
}

inline nlohmann::json report_json(const Report& report, bool timings = true) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : report.records) {
    nlohmann::json scores = nlohmann::json::array();
    for (double s : r.scores) scores.push_back(score_json(s));
    nlohmann::json j{{"dataset", r.dataset},
                     {"scenario", r.scenario},
                     {"combo", r.combo},
                     {"k", r.k},
                     {"algorithm", r.algorithm},
                     {"seed", r.seed},
                     {"n_features", r.n_features},
                     {"n_after_dedup", r.n_after_dedup},
                     {"status", r.status},
                     {"selected_features", r.selected},
                     {"scores", scores}};
    if (r.ok()) {
      j["accuracy"] = r.accuracy;
      j["confusion"] = {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"fn", r.confusion.fn}, {"tn", r.confusion.tn}};
      if (timings) {
        j["select_ns"] = r.select_elapsed.count();
        j["train_ns"] = r.train_elapsed.count();
        j["eval_ns"] = r.eval_elapsed.count();
      }
    }
    if (r.mi) {
      j["mi_coverage"] = {{"vs_predictors", r.mi->vs_predictors}, {"vs_outcome", r.mi->vs_outcome}, {"bins", r.mi->bins}};
    }
    if (!r.random_accuracies.empty()) j["diagnostics"] = {{"random_accuracies", r.random_accuracies}};
    records.push_back(std::move(j));
  }
  return {{"records", records}};
}

// Running

namespace detail {

// Everything one (dataset, scenario, combo) group shares across its cells.
struct CellGroup {
  std::string dataset, scenario, combo;
  std::string skip_reason;  // non-empty when the group cannot run
  std::size_t n_features = 0;
  FeatureMatrix train, test;  // deduplicated on the training rows
  LabelVector train_labels, test_labels;
};

struct CellTask {
  std::size_t group;
  std::size_t k;                          // 0 for None
  std::optional<AlgorithmSpec> algorithm;  // empty for None
};

inline std::uint64_t cell_seed(std::uint64_t master, const std::string& identity) {
  return mix_seed(master, fnv1a(identity));
}

inline std::string skip_status(const std::exception& e) {
  if (auto* err = dynamic_cast<const Error*>(&e)) {
    if (is_data_condition(err->code()) || err->code() == Errc::InvalidArgument) return std::string("skipped: ") + e.what();
  }
  return std::string("error: ") + e.what();
}

struct LeakError : std::logic_error {
  using std::logic_error::logic_error;
};

inline void check_disjoint(const FeatureMatrix& train, const FeatureMatrix& test) {
  std::unordered_set<std::string> ids(train.case_ids().begin(), train.case_ids().end());
  for (const auto& id : test.case_ids()) {
    if (ids.count(id)) throw LeakError("test case '" + id + "' reached a training stage");
  }
}

struct PipelineOutcome {
  std::vector<std::size_t> selected;
  std::vector<double> scores;
  std::chrono::nanoseconds select_elapsed{0}, train_elapsed{0}, eval_elapsed{0};
  EvalMetrics metrics;
  std::optional<MiCoverage> mi;
};

inline PipelineOutcome run_pipeline(const CellGroup& g, const ExperimentConfig& cfg, std::size_t k,
                                    const std::optional<AlgorithmSpec>& algorithm, std::uint64_t seed) {
  PipelineOutcome out;
  check_disjoint(g.train, g.test);
  if (algorithm) {
    SelectionRequest req{g.train, g.train_labels, k, seed, *algorithm, cfg.selection};
    auto res = select(req);
    out.selected = std::move(res.selected);
    out.scores = std::move(res.scores);
    out.select_elapsed = res.elapsed;
  } else {
    out.selected.resize(g.train.n_features());
    std::iota(out.selected.begin(), out.selected.end(), std::size_t{0});
  }
  auto gcfg = cfg.gbm;
  gcfg.seed = seed;
  const auto train_x = g.train.select_columns(out.selected);
  const auto test_x = g.test.select_columns(out.selected);
  Stopwatch train_clock;
  const auto model = train_gbm(train_x, g.train_labels, gcfg);
  out.train_elapsed = train_clock.elapsed();
  out.metrics = evaluate(model, test_x, g.test_labels);
  out.eval_elapsed = out.metrics.predict_elapsed;
  if (!out.selected.empty()) out.mi = mi_coverage(out.selected, g.test, g.test_labels, cfg.mi_bins);
  return out;
}

inline EventLog load_dataset(const DatasetSpec& d, std::uint64_t master_seed) {
  EventLog log;
  if (d.synthetic) {
    log = generate_synthetic_log(*d.synthetic).log;
  } else {
    std::ifstream in(*d.log_path);
    if (!in) throw Error(Errc::Io, "cannot open " + *d.log_path);
    log = read_log(in, d.schema);
  }
  if (d.sample) {
    if (*d.sample > log.size()) {
      throw Error(Errc::InvalidArgument, "dataset '" + d.name + "' sample " + std::to_string(*d.sample) +
                                             " exceeds its " + std::to_string(log.size()) + " cases");
    }
    const auto idx = sample_cases(log.size(), *d.sample, cell_seed(master_seed, "sample|" + d.name));
    log = log.subset(idx);
  }
  return log;
}

inline CellGroup prepare_group(const EventLog& log, const DatasetSpec& d, const ScenarioSpec& s, KindSet combo,
                               const ExperimentConfig& cfg) {
  CellGroup g;
  g.dataset = d.name;
  g.scenario = s.name;
  g.combo = combo.name();
  try {
    const auto labels = s.duration ? label_by_duration(log, *s.duration) : label_by_attribute(log, s.attribute, s.equals);
    if (!labels.has_both_classes()) throw Error(Errc::SingleClassLabels, "scenario '" + s.name + "' yields one class");
    const auto x = extract(log, combo);
    g.n_features = x.n_features();
    const auto split = split_train_test(
        log.size(), cfg.train_fraction, cell_seed(cfg.master_seed, "split|" + g.dataset + "|" + g.scenario + "|" + g.combo));
    g.train_labels = labels.subset(split.train);
    g.test_labels = labels.subset(split.test);
    if (!g.train_labels.has_both_classes()) {
      throw Error(Errc::SingleClassLabels, "training rows of scenario '" + s.name + "' hold one class");
    }
    auto [train, map] = dedup(x.select_rows(split.train));
    g.train = std::move(train);
    g.test = x.select_rows(split.test).select_columns(map.survivors);
  } catch (const std::exception& e) {
    g.skip_reason = skip_status(e);
  }
  return g;
}

}  // namespace detail

using ProgressFn = std::function<void(const RunRecord&, std::chrono::milliseconds)>;

// Runs every cell; records are in canonical order (dataset, scenario,
// combo, then None followed by k x algorithm) whatever the job count.
inline Report run_experiment(const ExperimentConfig& cfg, std::size_t jobs = 1, const ProgressFn& progress = {}) {
  cfg.validate();
  std::vector<detail::CellGroup> groups;
  std::vector<detail::CellTask> tasks;
  for (const auto& d : cfg.datasets) {
    const auto log = detail::load_dataset(d, cfg.master_seed);
    for (const auto& s : cfg.scenarios) {
      for (auto combo : cfg.combos) {
        groups.push_back(detail::prepare_group(log, d, s, combo, cfg));
        const std::size_t gi = groups.size() - 1;
        tasks.push_back({gi, 0, std::nullopt});
        for (auto k : cfg.ks)
          for (const auto& a : cfg.algorithms) tasks.push_back({gi, k, a});
      }
    }
  }

  Report report;
  report.records.resize(tasks.size());
  std::mutex progress_mutex;
  auto run_task = [&](std::size_t t) {
    const auto& task = tasks[t];
    const auto& g = groups[task.group];
    RunRecord& r = report.records[t];
    r.dataset = g.dataset;
    r.scenario = g.scenario;
    r.combo = g.combo;
    r.k = task.k;
    r.algorithm = task.algorithm ? task.algorithm->label() : "None";
    r.seed = detail::cell_seed(cfg.master_seed, r.dataset + "|" + r.scenario + "|" + r.combo + "|" +
                                                    std::to_string(r.k) + "|" + r.algorithm);
    r.n_features = g.n_features;
    r.n_after_dedup = g.train.n_features();
    detail::Stopwatch clock;
    if (!g.skip_reason.empty()) {
      r.status = g.skip_reason;
    } else {
      try {
        detail::PipelineOutcome best;
        if (task.algorithm && task.algorithm->algorithm == Algorithm::Random) {
          std::vector<detail::PipelineOutcome> runs;
          for (std::uint64_t i = 0; i < 3; ++i) runs.push_back(detail::run_pipeline(g, cfg, r.k, task.algorithm, r.seed + i));
          std::vector<std::size_t> order{0, 1, 2};
          std::stable_sort(order.begin(), order.end(),
                           [&](auto a, auto b) { return runs[a].metrics.accuracy < runs[b].metrics.accuracy; });
          for (const auto& run : runs) r.random_accuracies.push_back(run.metrics.accuracy);
          best = std::move(runs[order[1]]);
        } else {
          best = detail::run_pipeline(g, cfg, r.k, task.algorithm, r.seed);
        }
        for (auto j : best.selected) r.selected.push_back(g.train.feature_name(j));
        r.scores = std::move(best.scores);
        r.select_elapsed = best.select_elapsed;
        r.train_elapsed = best.train_elapsed;
        r.eval_elapsed = best.eval_elapsed;
        r.accuracy = best.metrics.accuracy;
        r.confusion = best.metrics.confusion;
        r.mi = best.mi;
      } catch (const detail::LeakError&) {
        throw;
      } catch (const std::exception& e) {
        RunRecord blank;
        blank.dataset = r.dataset;
        blank.scenario = r.scenario;
        blank.combo = r.combo;
        blank.k = r.k;
        blank.algorithm = r.algorithm;
        blank.seed = r.seed;
        blank.n_features = r.n_features;
        blank.n_after_dedup = r.n_after_dedup;
        blank.status = detail::skip_status(e);
        r = std::move(blank);
      }
    }
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(r, std::chrono::duration_cast<std::chrono::milliseconds>(clock.elapsed()));
    }
  };

  jobs = std::max<std::size_t>(1, std::min(jobs, tasks.size()));
  if (jobs == 1) {
    for (std::size_t t = 0; t < tasks.size(); ++t) run_task(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t t; (t = next.fetch_add(1)) < tasks.size();) {
          try {
            run_task(t);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& w : workers) w.join();
    if (failure) std::rethrow_exception(failure);
  }
  return report;
}

}  // namespace sfs
