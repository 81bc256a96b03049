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

#include "sfs/csv.hpp"
#include "sfs/timeutil.hpp"

namespace {

std::vector<std::vector<std::string>> read_all(const std::string& text) {
  std::istringstream in(text);
  sfs::csv::Reader reader(in);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  while (reader.next(row)) rows.push_back(row);
  return rows;
}

TEST(Csv, PlainAndQuotedFields) {
  const auto rows = read_all("a,b,c\n1,\"x,y\",\"he said \"\"hi\"\"\"\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1][1], "x,y");
  EXPECT_EQ(rows[1][2], "he said \"hi\"");
}

TEST(Csv, CrLfAndMissingFinalNewline) {
  const auto rows = read_all("a,b\r\n1,2");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0][1], "b");
  EXPECT_EQ(rows[1][1], "2");
}

TEST(Csv, QuotedNewlineStaysInField) {
  const auto rows = read_all("a\n\"x\ny\"\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1][0], "x\ny");
}

TEST(Csv, WriteRoundTrip) {
  std::ostringstream out;
  const std::vector<std::string> fields{"plain", "with,comma", "quote\"d", ""};
  sfs::csv::write_row(out, fields);
  const auto rows = read_all(out.str());
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0], fields);
}

TEST(Time, ParsesIsoForms) {
  const auto base = sfs::parse_iso8601("2020-01-01T00:00:00Z");
  ASSERT_TRUE(base.has_value());
  EXPECT_EQ(*base, 1577836800LL * 1000000000LL);
  EXPECT_EQ(sfs::parse_iso8601("2020-01-01 00:00:01"), *base + 1000000000LL);
  EXPECT_EQ(sfs::parse_iso8601("2020-01-01T01:00:00+01:00"), *base);
  EXPECT_EQ(sfs::parse_iso8601("2020-01-01T00:00:00.5Z"), *base + 500000000LL);
}

TEST(Time, RejectsGarbage) {
  EXPECT_FALSE(sfs::parse_iso8601("yesterday").has_value());
  EXPECT_FALSE(sfs::parse_iso8601("2020-13-01T00:00:00").has_value());
}

TEST(Time, FormatRoundTrip) {
  const auto t = sfs::parse_iso8601("2013-05-06T07:08:09Z");
  ASSERT_TRUE(t.has_value());
  EXPECT_EQ(sfs::parse_iso8601(sfs::format_iso8601(*t)), t);
}

TEST(Duration, Units) {
  using namespace std::chrono;
  EXPECT_EQ(sfs::parse_duration("90"), seconds{90});
  EXPECT_EQ(sfs::parse_duration("5m"), minutes{5});
  EXPECT_EQ(sfs::parse_duration("2w"), hours{24 * 14});
  EXPECT_THROW(sfs::parse_duration("3y"), sfs::Error);
  EXPECT_THROW(sfs::parse_duration(""), sfs::Error);
}

}  // namespace
