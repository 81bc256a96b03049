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

#include <cmath>

#include "sfs/mutual_information.hpp"
#include "sfs/rng.hpp"

namespace {

TEST(Discretize, FewDistinctValuesKeepOneBucketEach) {
  const std::vector<double> x{5, 1, 5, 9};
  const auto d = sfs::discretize(x, 4);
  EXPECT_EQ(d.levels, 3u);
  EXPECT_EQ(d.codes, (std::vector<std::uint16_t>{1, 0, 1, 2}));
}

TEST(Discretize, EqualFrequencyWithoutSplittingTies) {
  const std::vector<double> x{0, 1, 2, 3, 4, 5, 6, 7};
  const auto d = sfs::discretize(x, 4);
  EXPECT_EQ(d.codes, (std::vector<std::uint16_t>{0, 0, 1, 1, 2, 2, 3, 3}));
  const std::vector<double> tied{0, 0, 0, 0, 0, 1, 2, 3, 4, 5};
  const auto t = sfs::discretize(tied, 4);
  for (std::size_t i = 1; i < 5; ++i) EXPECT_EQ(t.codes[i], t.codes[0]);
  EXPECT_THROW(sfs::discretize(x, 0), sfs::Error);
}

TEST(MutualInformation, HandComputedValues) {
  // Perfectly dependent binary columns with p = 1/2: one bit.
  const std::vector<double> a{0, 0, 1, 1}, b{1, 1, 0, 0};
  EXPECT_DOUBLE_EQ(sfs::mutual_information(a, b), 1.0);
  // Product distribution.
  const std::vector<double> c{0, 1, 0, 1};
  EXPECT_EQ(sfs::mutual_information(a, c), 0.0);
  // x = {0,0,0,1}, y = {0,0,1,1}: I = H(y) - H(y|x) = 1 - 3/4 * H(2/3, 1/3).
  const std::vector<double> x{0, 0, 0, 1}, y{0, 0, 1, 1};
  const double h = -(2.0 / 3) * std::log2(2.0 / 3) - (1.0 / 3) * std::log2(1.0 / 3);
  EXPECT_NEAR(sfs::mutual_information(x, y), 1.0 - 0.75 * h, 1e-12);
}

TEST(MutualInformation, ConstantColumnCarriesNothing) {
  const std::vector<double> k{3, 3, 3, 3}, y{0, 1, 0, 1};
  EXPECT_EQ(sfs::mutual_information(k, y), 0.0);
}

TEST(MutualInformation, SelfInformationIsEntropy) {
  sfs::Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x(2 + rng.below(200));
    for (auto& v : x) v = static_cast<double>(rng.below(9));
    const auto d = sfs::discretize(x, 4);
    EXPECT_NEAR(sfs::mutual_information(d, d), sfs::entropy(d), 1e-9);
  }
}

TEST(MutualInformation, ExactlySymmetric) {
  sfs::Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 2 + rng.below(100);
    std::vector<double> x(n), y(n);
    for (auto& v : x) v = static_cast<double>(rng.below(7));
    for (auto& v : y) v = static_cast<double>(rng.below(3));
    EXPECT_EQ(sfs::mutual_information(x, y), sfs::mutual_information(y, x));
  }
}

TEST(MutualInformation, MillerMadowAddsBias) {
  // Two levels each, two occupied joint cells: correction is 1 / (2 n ln 2).
  const std::vector<double> x{0, 1, 0, 1, 0, 1, 0, 1};
  const double plain = sfs::mutual_information(x, x, 4, false);
  const double corrected = sfs::mutual_information(x, x, 4, true);
  EXPECT_DOUBLE_EQ(plain, 1.0);
  EXPECT_DOUBLE_EQ(corrected, 1.0 + 1.0 / (2.0 * 8.0 * std::log(2.0)));
}

TEST(MutualInformation, RejectsBadInput) {
  const std::vector<double> a{1, 2}, b{1};
  EXPECT_THROW(sfs::mutual_information(a, b), sfs::Error);
  EXPECT_THROW(sfs::mutual_information(b, b), sfs::Error);
}

}  // namespace
