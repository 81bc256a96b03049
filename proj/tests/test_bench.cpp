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

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "sfs/bench.hpp"
#include "test_util.hpp"

namespace {

sfs::ExperimentConfig small_config(std::uint64_t seed) {
  sfs::ExperimentConfig cfg;
  sfs::DatasetSpec ds;
  ds.name = "syn";
  sfs::SyntheticSpec spec;
  spec.n_cases = 300;
  spec.alphabet_size = 6;
  spec.seed = 21;
  ds.synthetic = spec;
  cfg.datasets.push_back(ds);
  sfs::ScenarioSpec sc;
  sc.name = "label";
  sc.attribute = "label";
  sc.equals = "yes";
  cfg.scenarios.push_back(sc);
  cfg.combos = {sfs::KindSet::parse("2gram"), sfs::KindSet::parse("activity")};
  cfg.ks = {2, 4};
  cfg.algorithms = {sfs::AlgorithmSpec::parse("random"), sfs::AlgorithmSpec::parse("fisher"),
                    sfs::AlgorithmSpec::parse("cluster")};
  cfg.master_seed = seed;
  cfg.timings = false;
  return cfg;
}

TEST(Synthetic, ShapeAndNoiseRate) {
  sfs::SyntheticSpec spec;
  spec.n_cases = 4000;
  spec.seed = 5;
  const auto syn = sfs::generate_synthetic_log(spec);
  ASSERT_EQ(syn.log.size(), 4000u);
  EXPECT_EQ(syn.log.alphabet().size(), 10u);
  EXPECT_EQ(syn.log.alphabet()[0], "a00");
  std::size_t flips = 0, planted = 0;
  for (std::size_t i = 0; i < syn.log.size(); ++i) {
    const auto len = syn.log.cases()[i].trace.size();
    EXPECT_GE(len, spec.min_length);
    EXPECT_LE(len, spec.max_length + 2);
    flips += syn.labels[i] != (syn.planted[i] != 0);
    planted += syn.planted[i];
  }
  EXPECT_NEAR(static_cast<double>(flips) / 4000.0, 0.05, 0.02);
  EXPECT_NEAR(static_cast<double>(planted) / 4000.0, 0.5, 0.05);
}

TEST(Synthetic, PlantedFeatureMatchesPlantedFlag) {
  for (auto rule : {sfs::PlantedRule::TwoGram, sfs::PlantedRule::Order, sfs::PlantedRule::Activity}) {
    sfs::SyntheticSpec spec;
    spec.n_cases = 500;
    spec.rule = rule;
    spec.rule_from = 2;
    spec.rule_to = 4;
    spec.seed = 9;
    const auto syn = sfs::generate_synthetic_log(spec);
    const auto m = sfs::extract(syn.log, sfs::KindSet::parse("all"));
    const auto& ds = m.descriptors();
    const auto it = std::find(ds.begin(), ds.end(), syn.planted_feature);
    ASSERT_NE(it, ds.end());
    const auto j = static_cast<std::size_t>(it - ds.begin());
    for (std::size_t i = 0; i < m.n_cases(); ++i) EXPECT_EQ(m.at(i, j) > 0, syn.planted[i] != 0) << i;
  }
}

TEST(Synthetic, ValidatesSpec) {
  sfs::SyntheticSpec spec;
  spec.alphabet_size = 2;
  EXPECT_THROW(sfs::generate_synthetic_log(spec), sfs::Error);
  spec.alphabet_size = 5;
  spec.rule_to = spec.rule_from;
  EXPECT_THROW(sfs::generate_synthetic_log(spec), sfs::Error);
}

TEST(Combos, DefaultPreset) {
  const auto combos = sfs::default_combos();
  EXPECT_EQ(combos.size(), 11u);
  std::set<std::string> names;
  for (const auto& c : combos) names.insert(c.name());
  EXPECT_EQ(names.size(), 11u);
  EXPECT_TRUE(names.count("activity+sf+2gram+order"));
}

TEST(Bench, EnumeratesNoneThenCells) {
  const auto report = sfs::run_experiment(small_config(1));
  // 2 combos x (None + 2 ks x 3 algorithms).
  ASSERT_EQ(report.records.size(), 14u);
  EXPECT_EQ(report.records[0].algorithm, "None");
  EXPECT_EQ(report.records[0].k, 0u);
  EXPECT_EQ(report.records[1].algorithm, "Random");
  EXPECT_EQ(report.records[1].k, 2u);
  EXPECT_EQ(report.records[7].algorithm, "None");
  for (const auto& r : report.records) EXPECT_TRUE(r.ok()) << r.status;
}

TEST(Bench, RandomIsMedianOfThreeRuns) {
  const auto report = sfs::run_experiment(small_config(2));
  for (const auto& r : report.records) {
    if (r.algorithm != "Random") continue;
    ASSERT_EQ(r.random_accuracies.size(), 3u);
    auto sorted = r.random_accuracies;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(r.accuracy, sorted[1]);
  }
}

TEST(Bench, DeterministicAcrossJobCounts) {
  const auto cfg = small_config(3);
  std::ostringstream a, b;
  sfs::write_report_csv(a, sfs::run_experiment(cfg, 1), false);
  sfs::write_report_csv(b, sfs::run_experiment(cfg, 3), false);
  EXPECT_EQ(a.str(), b.str());
  std::ostringstream c;
  sfs::write_report_csv(c, sfs::run_experiment(small_config(4), 1), false);
  EXPECT_NE(a.str(), c.str());
}

TEST(Bench, CsvShape) {
  const auto report = sfs::run_experiment(small_config(5));
  std::ostringstream out;
  sfs::write_report_csv(out, report, false);
  std::istringstream in(out.str());
  sfs::csv::Reader reader(in);
  std::vector<std::string> row;
  ASSERT_TRUE(reader.next(row));
  EXPECT_EQ(row, sfs::report_columns());
  EXPECT_EQ(row.back(), "status");
  std::size_t lines = 0;
  while (reader.next(row)) {
    ++lines;
    EXPECT_EQ(row.size(), sfs::report_columns().size());
  }
  EXPECT_EQ(lines, report.records.size());
}

TEST(Bench, SingleClassScenarioIsSkippedNotFatal) {
  auto cfg = small_config(6);
  cfg.scenarios[0].equals = "maybe";
  const auto report = sfs::run_experiment(cfg);
  ASSERT_FALSE(report.records.empty());
  for (const auto& r : report.records) EXPECT_EQ(r.status.rfind("skipped", 0), 0u) << r.status;
}

TEST(Bench, ConfigFromJson) {
  const auto j = nlohmann::json::parse(R"({
    "datasets": [{"name": "s", "synthetic": {"n_cases": 100, "alphabet": 4, "seed": 2}}],
    "scenarios": [{"name": "long", "duration": "6m"}],
    "combos": "default", "ks": [3], "algorithms": ["fisher", "mRMREns5"], "master_seed": 9})");
  const auto cfg = sfs::experiment_config_from_json(j, ".");
  EXPECT_EQ(cfg.combos.size(), 11u);
  EXPECT_EQ(cfg.algorithms[1].label(), "mRMREns5");
  EXPECT_EQ(cfg.master_seed, 9u);
  ASSERT_TRUE(cfg.scenarios[0].duration.has_value());
  auto bad = j;
  bad["ks"] = nlohmann::json::array({0});
  EXPECT_THROW(sfs::experiment_config_from_json(bad, ".").validate(), sfs::Error);
}

TEST(Bench, LeakCheck) {
  const auto m = sfs::extract(sfs_test::log_from_traces({{"a"}, {"b"}, {"a", "b"}}), sfs::KindSet::parse("activity"));
  const auto train = m.select_rows(std::vector<std::size_t>{0, 1});
  EXPECT_NO_THROW(sfs::detail::check_disjoint(train, m.select_rows(std::vector<std::size_t>{2})));
  EXPECT_THROW(sfs::detail::check_disjoint(train, m.select_rows(std::vector<std::size_t>{1, 2})), std::logic_error);
}

}  // namespace
