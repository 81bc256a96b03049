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

// Seeded property checks over randomly generated logs and matrices.

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "sfs/sfs.hpp"
#include "test_util.hpp"

namespace {

constexpr int kTrials = 25;

std::vector<sfs::EventRecord> random_events(sfs::Rng& rng, std::size_t cases) {
  std::vector<sfs::EventRecord> events;
  for (std::size_t c = 0; c < cases; ++c) {
    const auto len = 1 + rng.below(8);
    for (std::uint64_t e = 0; e < len; ++e) {
      sfs::EventRecord ev;
      ev.case_id = "k" + std::to_string(c);
      ev.activity = std::string(1, static_cast<char>('p' + rng.below(6)));
      ev.order = {static_cast<std::int64_t>(rng.below(5)) * 1000000000LL, true};
      events.push_back(ev);
    }
  }
  // Interleave cases.
  rng.shuffle(events.begin(), events.end());
  return events;
}

struct Problem {
  sfs::FeatureMatrix m;
  sfs::LabelVector y;
};

Problem random_problem(sfs::Rng& rng, std::size_t cases, std::size_t features) {
  std::vector<std::vector<std::uint32_t>> cols(features, std::vector<std::uint32_t>(cases));
  std::vector<std::uint8_t> y(cases);
  for (auto& v : y) v = static_cast<std::uint8_t>(rng.below(2));
  y[0] = 0;
  y[1] = 1;
  for (auto& c : cols) {
    const auto range = 1 + rng.below(5);
    for (std::size_t i = 0; i < cases; ++i) c[i] = static_cast<std::uint32_t>(rng.below(range) + (y[i] && rng.bernoulli(0.3)));
  }
  return {sfs_test::dense(cols), sfs::LabelVector(y)};
}

TEST(EventLogProperties, BuildIsPermutationOfInput) {
  sfs::Rng rng(1);
  for (int t = 0; t < kTrials; ++t) {
    const auto events = random_events(rng, 1 + rng.below(20));
    const auto log = sfs::build_log(events);
    std::multiset<std::pair<std::string, std::string>> in, out;
    for (const auto& e : events) in.insert({e.case_id, e.activity});
    std::set<std::string> ids;
    for (const auto& c : log.cases()) {
      EXPECT_TRUE(ids.insert(c.id).second);
      EXPECT_GE(c.trace.size(), 1u);
      for (auto a : c.trace) {
        ASSERT_LT(a, log.alphabet().size());
        out.insert({c.id, log.alphabet()[a]});
      }
    }
    EXPECT_EQ(in, out);
    EXPECT_TRUE(std::is_sorted(log.alphabet().begin(), log.alphabet().end()));
  }
}

TEST(EventLogProperties, CanonicalCsvRoundTrip) {
  sfs::Rng rng(2);
  for (int t = 0; t < kTrials; ++t) {
    const auto log = sfs::build_log(random_events(rng, 1 + rng.below(20)));
    std::ostringstream out;
    sfs::write_canonical_csv(out, log);
    std::istringstream in(out.str());
    EXPECT_EQ(sfs::read_log(in, sfs::canonical_schema(log)), log);
  }
}

TEST(EventLogProperties, DurationLabelsMonotone) {
  sfs::Rng rng(3);
  const auto log = sfs::build_log(random_events(rng, 50));
  auto prev = sfs::label_by_duration(log, std::chrono::seconds{0});
  for (int s = 1; s <= 5; ++s) {
    const auto cur = sfs::label_by_duration(log, std::chrono::seconds{s});
    for (std::size_t i = 0; i < cur.size(); ++i) EXPECT_TRUE(!cur[i] || prev[i]);
    prev = cur;
  }
}

TEST(FeatureProperties, PerCaseSumsAndFlags) {
  sfs::Rng rng(4);
  for (int t = 0; t < kTrials; ++t) {
    const auto log = sfs::build_log(random_events(rng, 1 + rng.below(30)));
    const auto m = sfs::extract(log, sfs::KindSet::parse("all"));
    std::vector<std::uint64_t> grams(log.size()), acts(log.size()), st(log.size()), fi(log.size());
    std::map<std::pair<sfs::ActivityId, sfs::ActivityId>, std::size_t> order;
    for (std::size_t j = 0; j < m.n_features(); ++j) {
      const auto& d = m.descriptor(j);
      const auto col = m.column(j);
      for (std::size_t k = 0; k < col.nnz(); ++k) {
        const auto r = col.rows[k];
        const auto v = col.values[k];
        EXPECT_GT(v, 0u);
        if (d.kind == sfs::FeatureKind::TwoGram) grams[r] += v;
        if (d.kind == sfs::FeatureKind::Activity) acts[r] += v;
        if (d.kind == sfs::FeatureKind::Starter) st[r] += v;
        if (d.kind == sfs::FeatureKind::Finisher) fi[r] += v;
        if (d.kind != sfs::FeatureKind::Activity && d.kind != sfs::FeatureKind::TwoGram) {
          EXPECT_EQ(v, 1u);
        }
      }
      if (d.kind == sfs::FeatureKind::Order) {
        EXPECT_NE(d.from, d.to);
        order[{d.from, d.to}] = j;
      }
    }
    for (std::size_t i = 0; i < log.size(); ++i) {
      const auto len = log.cases()[i].trace.size();
      EXPECT_EQ(grams[i], len + 1);
      EXPECT_EQ(acts[i], len);
      EXPECT_EQ(st[i], 1u);
      EXPECT_EQ(fi[i], 1u);
    }
    for (const auto& [pair, j] : order) {
      auto rev = order.find({pair.second, pair.first});
      if (rev == order.end()) continue;
      for (std::size_t i = 0; i < log.size(); ++i) EXPECT_LE(m.at(i, j) + m.at(i, rev->second), 1u);
    }
    EXPECT_EQ(sfs::extract(log, sfs::KindSet::parse("all")), m);
  }
}

TEST(FeatureProperties, DedupPreservesReachableColumns) {
  sfs::Rng rng(5);
  for (int t = 0; t < kTrials; ++t) {
    const auto log = sfs::build_log(random_events(rng, 2 + rng.below(10)));
    const auto m = sfs::extract(log, sfs::KindSet::parse("all"));
    const auto [out, map] = sfs::dedup(m);
    for (std::size_t j = 0; j < m.n_features(); ++j) {
      const auto r = map.representative[j];
      EXPECT_EQ(map.representative[r], r);
      EXPECT_LE(r, j);
      EXPECT_EQ(m.dense_column(j), out.dense_column(map.output_index(j)));
    }
    for (auto s : map.survivors) EXPECT_TRUE(map.is_survivor(s));
  }
}

TEST(SelectionProperties, UniqueValidDeterministic) {
  sfs::Rng rng(6);
  const char* names[] = {"random", "fisher", "cluster", "clust_importance", "clust_fisher",
                         "mrmr", "clust_mrmr", "lasso", "rec2s"};
  for (int t = 0; t < 6; ++t) {
    const auto p = random_problem(rng, 40 + rng.below(60), 3 + rng.below(30));
    const std::size_t k = 1 + rng.below(8);
    for (auto name : names) {
      const sfs::SelectionRequest req{p.m, p.y, k, static_cast<std::uint64_t>(t), sfs::AlgorithmSpec::parse(name)};
      const auto a = sfs::select(req);
      const auto b = sfs::select(req);
      EXPECT_EQ(a.selected, b.selected) << name;
      EXPECT_LE(a.selected.size(), k) << name;
      EXPECT_EQ(a.scores.size(), a.selected.size()) << name;
      std::set<std::size_t> uniq(a.selected.begin(), a.selected.end());
      EXPECT_EQ(uniq.size(), a.selected.size()) << name;
      for (auto s : a.selected) EXPECT_LT(s, p.m.n_features()) << name;
    }
  }
}

TEST(SelectionProperties, MrmrWithOneFeatureIsArgmaxRelevance) {
  sfs::Rng rng(7);
  for (int t = 0; t < kTrials; ++t) {
    const auto p = random_problem(rng, 30 + rng.below(50), 2 + rng.below(15));
    const auto res = sfs::select_mrmr(sfs::SelectionRequest{p.m, p.y, 1, 0}, 1);
    const auto y = sfs::discretize(p.y.values());
    std::size_t best = 0;
    double best_mi = -1.0;
    for (std::size_t j = 0; j < p.m.n_features(); ++j) {
      const double mi = sfs::mutual_information(sfs::discretize(p.m.dense_column(j), 4), y);
      if (mi > best_mi) {
        best_mi = mi;
        best = j;
      }
    }
    ASSERT_EQ(res.selected.size(), 1u);
    EXPECT_EQ(res.selected[0], best);
  }
}

TEST(SelectionProperties, ClusterInvariantToCaseOrder) {
  sfs::Rng rng(8);
  for (int t = 0; t < 10; ++t) {
    const auto p = random_problem(rng, 30, 20);
    std::vector<std::size_t> perm(30);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm.begin(), perm.end());
    const auto shuffled = p.m.select_rows(perm);
    const auto ys = p.y.subset(perm);
    const auto a = sfs::select(sfs::SelectionRequest{p.m, p.y, 4, 3, sfs::AlgorithmSpec::parse("cluster")});
    const auto b = sfs::select(sfs::SelectionRequest{shuffled, ys, 4, 3, sfs::AlgorithmSpec::parse("cluster")});
    EXPECT_EQ(std::set<std::size_t>(a.selected.begin(), a.selected.end()),
              std::set<std::size_t>(b.selected.begin(), b.selected.end()));
  }
}

TEST(SelectionProperties, KMeansWithDistinctColumnCountIsExact) {
  sfs::Rng rng(9);
  for (int t = 0; t < kTrials; ++t) {
    const auto p = random_problem(rng, 6, 3 + rng.below(10));
    const auto [d, map] = sfs::dedup(p.m);
    const auto r = sfs::kmeans(d, d.n_features(), static_cast<std::uint64_t>(t));
    EXPECT_EQ(r.distortion, 0.0);
    std::set<std::size_t> reps(r.representative.begin(), r.representative.end());
    EXPECT_EQ(reps.size(), d.n_features());
  }
}

TEST(SelectionProperties, MutualInformationNonNegativeAndSymmetric) {
  sfs::Rng rng(10);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.below(80);
    std::vector<double> x(n), y(n);
    for (auto& v : x) v = static_cast<double>(rng.below(1 + rng.below(10)));
    for (auto& v : y) v = static_cast<double>(rng.below(1 + rng.below(10)));
    const double a = sfs::mutual_information(x, y);
    EXPECT_GE(a, -1e-12);
    EXPECT_EQ(a, sfs::mutual_information(y, x));
  }
}

TEST(GbmProperties, ProbabilitiesInsideUnitInterval) {
  sfs::Rng rng(11);
  for (int t = 0; t < 5; ++t) {
    const auto p = random_problem(rng, 100, 5);
    sfs::GbmConfig cfg;
    cfg.rounds = 300;
    cfg.learning_rate = 1.0;
    const auto model = sfs::train_gbm(p.m, p.y, cfg);
    for (double pr : sfs::predict(model, p.m)) {
      EXPECT_GT(pr, 0.0);
      EXPECT_LT(pr, 1.0);
    }
    for (const auto& tree : model.trees) EXPECT_LE(tree.leaf_count(), 8u);
  }
}

TEST(GbmProperties, ZeroRoundsGivesMajorityRate) {
  sfs::Rng rng(12);
  const auto p = random_problem(rng, 90, 4);
  sfs::GbmConfig cfg;
  cfg.rounds = 0;
  const auto model = sfs::train_gbm(p.m, p.y, cfg);
  const auto acc = sfs::evaluate(model, p.m, p.y).accuracy;
  const double pos = static_cast<double>(p.y.positive_count()) / 90.0;
  EXPECT_DOUBLE_EQ(acc, std::max(pos, 1.0 - pos));
}

TEST(MetricsProperties, CoverageMonotoneInSelection) {
  sfs::Rng rng(13);
  for (int t = 0; t < 10; ++t) {
    const auto p = random_problem(rng, 60, 12);
    std::vector<std::size_t> sel;
    sfs::MiCoverage prev;
    for (std::size_t j = 0; j < 12; ++j) {
      sel.push_back((j * 5) % 12);
      const auto cur = sfs::mi_coverage(sel, p.m, p.y);
      EXPECT_GE(cur.vs_predictors, prev.vs_predictors - 1e-12);
      EXPECT_GE(cur.vs_outcome, prev.vs_outcome);
      EXPECT_LE(cur.vs_outcome, 1.0 + 1e-12);
      prev = cur;
    }
  }
}

TEST(BenchProperties, CellsRespectKAndNoneBoundsOutcomeCoverage) {
  sfs::ExperimentConfig cfg;
  sfs::DatasetSpec ds;
  ds.name = "syn";
  sfs::SyntheticSpec spec;
  spec.n_cases = 240;
  spec.alphabet_size = 5;
  spec.seed = 4;
  ds.synthetic = spec;
  cfg.datasets.push_back(ds);
  sfs::ScenarioSpec sc;
  sc.name = "label";
  sc.attribute = "label";
  sc.equals = "yes";
  cfg.scenarios.push_back(sc);
  cfg.combos = {sfs::KindSet::parse("activity,2gram"), sfs::KindSet::parse("order")};
  cfg.ks = {1, 3};
  for (auto a : {"random", "fisher", "cluster", "clust_fisher", "mrmr", "clust_mrmr"})
    cfg.algorithms.push_back(sfs::AlgorithmSpec::parse(a));
  cfg.timings = false;
  const auto report = sfs::run_experiment(cfg, 2);
  std::set<std::string> keys;
  std::map<std::string, double> none_outcome;
  for (const auto& r : report.records) {
    ASSERT_TRUE(r.ok()) << r.status;
    EXPECT_TRUE(keys.insert(r.dataset + "|" + r.scenario + "|" + r.combo + "|" + std::to_string(r.k) + "|" + r.algorithm)
                    .second);
    ASSERT_TRUE(r.mi.has_value());
    const auto group = r.dataset + "|" + r.scenario + "|" + r.combo;
    if (r.algorithm == "None") {
      none_outcome[group] = r.mi->vs_outcome;
      EXPECT_EQ(r.selected.size(), r.n_after_dedup);
      continue;
    }
    EXPECT_LE(r.selected.size(), r.k);
    EXPECT_LE(r.mi->vs_outcome, none_outcome.at(group) + 1e-12);
    EXPECT_EQ(r.confusion.total(), r.confusion.tp + r.confusion.fp + r.confusion.fn + r.confusion.tn);
  }
}

}  // namespace
