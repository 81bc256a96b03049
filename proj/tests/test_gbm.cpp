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

#include "sfs/gbm.hpp"
#include "test_util.hpp"

namespace {

struct Data {
  sfs::FeatureMatrix m;
  sfs::LabelVector y;
};

// Label = (col0 >= 2) xor (col1 == 1); col2 is noise.
Data interaction(std::size_t n, std::uint64_t seed) {
  sfs::Rng rng(seed);
  std::vector<std::vector<std::uint32_t>> cols(3, std::vector<std::uint32_t>(n));
  std::vector<std::uint8_t> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    cols[0][i] = static_cast<std::uint32_t>(rng.below(4));
    cols[1][i] = static_cast<std::uint32_t>(rng.below(2));
    cols[2][i] = static_cast<std::uint32_t>(rng.below(6));
    y[i] = (cols[0][i] >= 2) != (cols[1][i] == 1);
  }
  return {sfs_test::dense(cols), sfs::LabelVector(y)};
}

TEST(Split, SizesAndDisjointness) {
  const auto s = sfs::split_train_test(100, 0.25, 3);
  EXPECT_EQ(s.train.size(), 25u);
  EXPECT_EQ(s.test.size(), 75u);
  std::vector<std::size_t> all = s.train;
  all.insert(all.end(), s.test.begin(), s.test.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
  EXPECT_EQ(s.train, sfs::split_train_test(100, 0.25, 3).train);
  EXPECT_THROW(sfs::split_train_test(1, 0.5, 0), sfs::Error);
  EXPECT_THROW(sfs::split_train_test(10, 1.0, 0), sfs::Error);
}

TEST(Gbm, LearnsInteraction) {
  const auto d = interaction(600, 1);
  const auto model = sfs::train_gbm(d.m, d.y);
  EXPECT_EQ(sfs::evaluate(model, d.m, d.y).accuracy, 1.0);
  const auto test = interaction(300, 2);
  EXPECT_EQ(sfs::evaluate(model, test.m, test.y).accuracy, 1.0);
}

TEST(Gbm, TrainingLossNeverIncreases) {
  const auto d = interaction(300, 3);
  const auto model = sfs::train_gbm(d.m, d.y);
  ASSERT_EQ(model.train_loss.size(), 101u);
  for (std::size_t r = 1; r < model.train_loss.size(); ++r) EXPECT_LE(model.train_loss[r], model.train_loss[r - 1]);
}

TEST(Gbm, NoFeaturesPredictsPrior) {
  const auto d = interaction(100, 4);
  const auto none = d.m.select_columns(std::vector<std::size_t>{});
  const auto model = sfs::train_gbm(none, d.y);
  const auto prob = sfs::predict(model, none);
  const double rate = static_cast<double>(d.y.positive_count()) / 100.0;
  for (double p : prob) EXPECT_NEAR(p, rate, 1e-12);
}

TEST(Gbm, Deterministic) {
  const auto d = interaction(200, 5);
  EXPECT_EQ(sfs::to_json(sfs::train_gbm(d.m, d.y)), sfs::to_json(sfs::train_gbm(d.m, d.y)));
}

TEST(Gbm, RejectsBadInput) {
  const auto d = interaction(50, 6);
  const sfs::LabelVector one_class(std::vector<std::uint8_t>(50, 1));
  EXPECT_THROW(sfs::train_gbm(d.m, one_class), sfs::Error);
  sfs::GbmConfig bad;
  bad.learning_rate = 0.0;
  EXPECT_THROW(sfs::train_gbm(d.m, d.y, bad), sfs::Error);
}

TEST(Gbm, PredictionNeedsTrainedFeatures) {
  const auto d = interaction(200, 7);
  const auto model = sfs::train_gbm(d.m, d.y);
  const auto missing = d.m.select_columns(std::vector<std::size_t>{2});
  try {
    sfs::predict(model, missing);
    FAIL();
  } catch (const sfs::Error& e) {
    EXPECT_EQ(e.code(), sfs::Errc::MissingFeature);
  }
}

TEST(Gbm, ConfusionCounts) {
  const std::vector<double> prob{0.9, 0.2, 0.6, 0.1};
  const auto m = sfs::score_predictions(prob, sfs::LabelVector({1, 1, 0, 0}));
  EXPECT_EQ(m.confusion.tp, 1u);
  EXPECT_EQ(m.confusion.fn, 1u);
  EXPECT_EQ(m.confusion.fp, 1u);
  EXPECT_EQ(m.confusion.tn, 1u);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.5);
}

TEST(PermutationImportance, InformativeOverNoise) {
  const auto d = interaction(600, 8);
  const auto model = sfs::train_gbm(d.m, d.y);
  const auto imp = sfs::permutation_importance(model, d.m, d.y, 3);
  EXPECT_GT(imp[0], 0.1);
  EXPECT_GT(imp[1], 0.1);
  EXPECT_LT(imp[2], imp[0]);
  const auto used = model.used_features();
  for (std::size_t f = 0; f < imp.size(); ++f)
    if (std::find(used.begin(), used.end(), f) == used.end()) {
      EXPECT_EQ(imp[f], 0.0);
    }
}

}  // namespace
