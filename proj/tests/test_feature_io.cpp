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

#include <sstream>

#include "sfs/feature_io.hpp"
#include "sfs/label_io.hpp"
#include "test_util.hpp"

namespace {

sfs::FeatureMatrix sample_matrix() {
  return sfs::extract(sfs_test::log_from_traces({{"a", "b"}, {"b", "b", "c"}, {"c"}}), sfs::KindSet::parse("all"));
}

TEST(FeatureIo, RoundTrip) {
  const auto m = sample_matrix();
  std::ostringstream header, values;
  header << sfs::feature_header_json(m).dump();
  sfs::write_feature_values(values, m);
  std::istringstream hin(header.str()), vin(values.str());
  EXPECT_EQ(sfs::read_feature_matrix(hin, vin), m);
}

TEST(FeatureIo, ValuesHeaderCarriesNames) {
  const auto m = sample_matrix();
  std::ostringstream values;
  sfs::write_feature_values(values, m);
  const auto first = values.str().substr(0, values.str().find('\n'));
  EXPECT_EQ(first.rfind("case_id,act:a,", 0), 0u);
}

TEST(FeatureIo, RejectsWrongFormatTag) {
  std::istringstream hin(R"({"format":"other"})"), vin("case_id\n");
  try {
    sfs::read_feature_matrix(hin, vin);
    FAIL();
  } catch (const sfs::Error& e) {
    EXPECT_EQ(e.code(), sfs::Errc::Format);
  }
}

TEST(FeatureIo, RejectsMismatchedValues) {
  const auto m = sample_matrix();
  std::istringstream hin(sfs::feature_header_json(m).dump()), vin("case_id,act:a\nc0,1\n");
  EXPECT_THROW(sfs::read_feature_matrix(hin, vin), sfs::Error);
}

TEST(LabelIo, RoundTripAndAlign) {
  std::ostringstream out;
  const std::vector<std::string> ids{"x", "y", "z"};
  sfs::write_labels(out, ids, sfs::LabelVector({1, 0, 1}));
  std::istringstream in(out.str());
  const auto file = sfs::read_labels(in);
  EXPECT_EQ(file.case_ids, ids);
  const auto aligned = sfs::align_labels(file, std::vector<std::string>{"z", "y"});
  EXPECT_EQ(aligned, sfs::LabelVector({1, 0}));
  try {
    sfs::align_labels(file, std::vector<std::string>{"w"});
    FAIL();
  } catch (const sfs::Error& e) {
    EXPECT_EQ(e.code(), sfs::Errc::LengthMismatch);
  }
}

}  // namespace
