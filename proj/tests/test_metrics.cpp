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

#include "sfs/metrics.hpp"
#include "test_util.hpp"

namespace {

// Coverage computed literally, every pair included.
sfs::MiCoverage literal(const std::vector<std::size_t>& sel, const sfs::FeatureMatrix& m, const sfs::LabelVector& y) {
  sfs::MiCoverage out;
  std::vector<double> yd(y.values().begin(), y.values().end());
  for (auto a : sel) out.vs_outcome = std::max(out.vs_outcome, sfs::mutual_information(m.dense_column(a), yd));
  double total = 0.0;
  for (std::size_t b = 0; b < m.n_features(); ++b) {
    double best = 0.0;
    for (auto a : sel) best = std::max(best, sfs::mutual_information(m.dense_column(a), m.dense_column(b)));
    total += best;
  }
  out.vs_predictors = total / static_cast<double>(m.n_features());
  return out;
}

TEST(MiCoverage, MatchesLiteralDefinition) {
  sfs::Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 10 + rng.below(60), f = 2 + rng.below(10);
    std::vector<std::vector<std::uint32_t>> cols(f, std::vector<std::uint32_t>(n));
    for (auto& c : cols)
      for (auto& v : c) v = static_cast<std::uint32_t>(rng.below(1 + rng.below(6)));
    std::vector<std::uint8_t> yv(n);
    for (auto& v : yv) v = static_cast<std::uint8_t>(rng.below(2));
    const auto m = sfs_test::dense(cols);
    const sfs::LabelVector y(yv);
    std::vector<std::size_t> sel{rng.below(f)};
    if (f > 2) sel.push_back((sel[0] + 1) % f);
    const auto got = sfs::mi_coverage(sel, m, y);
    const auto want = literal(sel, m, y);
    EXPECT_NEAR(got.vs_outcome, want.vs_outcome, 1e-12);
    EXPECT_NEAR(got.vs_predictors, want.vs_predictors, 1e-12);
  }
}

TEST(MiCoverage, SelectingEverythingGivesMeanEntropy) {
  const auto m = sfs_test::dense({{0, 0, 1, 1}, {0, 1, 0, 1}});
  const sfs::LabelVector y({0, 0, 1, 1});
  const std::vector<std::size_t> all{0, 1};
  const auto c = sfs::mi_coverage(all, m, y);
  EXPECT_DOUBLE_EQ(c.vs_predictors, 1.0);
  EXPECT_DOUBLE_EQ(c.vs_outcome, 1.0);
}

TEST(MiCoverage, Errors) {
  const auto m = sfs_test::dense({{0, 1}});
  const sfs::LabelVector y({0, 1});
  try {
    sfs::mi_coverage(std::vector<std::size_t>{}, m, y);
    FAIL();
  } catch (const sfs::Error& e) {
    EXPECT_EQ(e.code(), sfs::Errc::EmptySelection);
  }
  EXPECT_THROW(sfs::mi_coverage(std::vector<std::size_t>{3}, m, y), sfs::Error);
}

}  // namespace
