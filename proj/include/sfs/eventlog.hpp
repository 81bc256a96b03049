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
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sfs/csv.hpp"
#include "sfs/error.hpp"
#include "sfs/rng.hpp"
#include "sfs/timeutil.hpp"

namespace sfs {

using ActivityId = std::uint32_t;

// Virtual start/end activities live outside any alphabet range.
inline constexpr ActivityId kVirtualStart = 0xFFFFFFFEu;
inline constexpr ActivityId kVirtualEnd = 0xFFFFFFFFu;

using AttributeMap = std::map<std::string, std::string>;

// Either a timestamp (ns since epoch) or a plain sequence number.
struct OrderKey {
  std::int64_t value = 0;
  bool temporal = false;

  friend bool operator==(const OrderKey&, const OrderKey&) = default;
};

enum class OrderKeyMode { Auto, Timestamp, Integer };

struct EventRecord {
  std::string case_id;
  std::string activity;
  OrderKey order;
  AttributeMap attributes;
};

struct CsvSchema {
  std::string case_col = "CaseId";
  std::string activity_col = "Activity";
  std::string order_col = "Timestamp";
  std::vector<std::string> attribute_cols;
  OrderKeyMode order_mode = OrderKeyMode::Auto;
};

struct Case {
  std::string id;
  std::vector<ActivityId> trace;
  std::optional<std::int64_t> start_time;
  std::optional<std::int64_t> end_time;
  AttributeMap attributes;

  friend bool operator==(const Case&, const Case&) = default;
};

class EventLog {
 public:
  EventLog() = default;
  EventLog(std::vector<std::string> alphabet, std::vector<Case> cases, bool temporal)
      : alphabet_(std::move(alphabet)), cases_(std::move(cases)), temporal_(temporal) {}

  const std::vector<std::string>& alphabet() const noexcept { return alphabet_; }
  const std::vector<Case>& cases() const noexcept { return cases_; }
  std::size_t size() const noexcept { return cases_.size(); }
  bool empty() const noexcept { return cases_.empty(); }
  bool temporal() const noexcept { return temporal_; }

  const std::string& activity_name(ActivityId id) const {
    static const std::string kStart = "S";
    static const std::string kEnd = "E";
    if (id == kVirtualStart) return kStart;
    if (id == kVirtualEnd) return kEnd;
    return alphabet_.at(id);
  }

  // Case subset in the given order; the alphabet is kept unchanged.
  EventLog subset(std::span<const std::size_t> case_indices) const {
    std::vector<Case> picked;
    picked.reserve(case_indices.size());
    for (auto i : case_indices) picked.push_back(cases_.at(i));
    return EventLog(alphabet_, std::move(picked), temporal_);
  }

  friend bool operator==(const EventLog&, const EventLog&) = default;

 private:
  std::vector<std::string> alphabet_;
  std::vector<Case> cases_;
  bool temporal_ = false;
};

// One boolean outcome per case, aligned to EventLog case order.
class LabelVector {
 public:
  LabelVector() = default;
  explicit LabelVector(std::vector<std::uint8_t> values) : values_(std::move(values)) {
    for (auto& v : values_) v = v ? 1 : 0;
    positive_count_ = static_cast<std::size_t>(std::count(values_.begin(), values_.end(), 1));
  }

  std::size_t size() const noexcept { return values_.size(); }
  std::size_t positive_count() const noexcept { return positive_count_; }
  std::size_t negative_count() const noexcept { return values_.size() - positive_count_; }
  bool operator[](std::size_t i) const { return values_[i] != 0; }
  std::span<const std::uint8_t> values() const noexcept { return values_; }
  bool has_both_classes() const noexcept { return positive_count_ > 0 && positive_count_ < values_.size(); }

  LabelVector subset(std::span<const std::size_t> rows) const {
    std::vector<std::uint8_t> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(values_.at(r));
    return LabelVector(std::move(out));
  }

  friend bool operator==(const LabelVector&, const LabelVector&) = default;

 private:
  std::vector<std::uint8_t> values_;
  std::size_t positive_count_ = 0;
};

namespace detail {

inline std::optional<std::int64_t> parse_integer_key(std::string_view s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<OrderKey> parse_order_key(std::string_view s, OrderKeyMode mode) {
  if (mode != OrderKeyMode::Timestamp) {
    if (auto v = parse_integer_key(s)) return OrderKey{*v, false};
    if (mode == OrderKeyMode::Integer) return std::nullopt;
  }
  if (auto t = parse_iso8601(s)) return OrderKey{*t, true};
  return std::nullopt;
}

inline std::size_t find_column(const std::vector<std::string>& header, const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw Error(Errc::MissingColumn, "column '" + name + "' not in header");
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace detail

// Reads one EventRecord per data row, in file order. Row numbers in errors
// are 1-based and count data rows only (the header is row 0).
inline std::vector<EventRecord> parse_csv(std::istream& in, const CsvSchema& schema) {
  csv::Reader reader(in);
  std::vector<std::string> header;
  if (!reader.next(header)) {
    throw Error(Errc::Format, "missing header row");
  }
  if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);

  const auto case_idx = detail::find_column(header, schema.case_col);
  const auto act_idx = detail::find_column(header, schema.activity_col);
  const auto order_idx = detail::find_column(header, schema.order_col);
  std::vector<std::size_t> attr_idx;
  for (const auto& name : schema.attribute_cols) attr_idx.push_back(detail::find_column(header, name));

  std::vector<EventRecord> events;
  std::vector<std::string> row;
  std::size_t row_no = 0;
  std::optional<bool> temporal;
  while (reader.next(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    ++row_no;
    if (row.size() != header.size()) {
      throw Error(Errc::Format, "row " + std::to_string(row_no) + " has " + std::to_string(row.size()) +
                                    " fields, header has " + std::to_string(header.size()));
    }
    auto require = [&](std::size_t idx) -> std::string& {
      if (row[idx].empty()) {
        throw Error(Errc::EmptyField, "row " + std::to_string(row_no) + ", column '" + header[idx] + "'");
      }
      return row[idx];
    };
    EventRecord ev;
    ev.case_id = std::move(require(case_idx));
    ev.activity = std::move(require(act_idx));
    auto key = detail::parse_order_key(require(order_idx), schema.order_mode);
    if (!key || (temporal && *temporal != key->temporal)) {
      throw Error(Errc::BadOrderKey, "row " + std::to_string(row_no) + ": '" + row[order_idx] + "'");
    }
    temporal = key->temporal;
    ev.order = *key;
    for (std::size_t a = 0; a < attr_idx.size(); ++a) {
      ev.attributes[schema.attribute_cols[a]] = row[attr_idx[a]];
    }
    events.push_back(std::move(ev));
  }
  return events;
}

// Groups events into cases (first-appearance order) with traces stably
// sorted by order key. Later non-empty attribute values overwrite earlier
// ones within a case; empty values are not stored.
inline EventLog build_log(std::span<const EventRecord> events) {
  std::vector<std::string> alphabet;
  {
    std::vector<std::string> labels;
    labels.reserve(events.size());
    for (const auto& ev : events) labels.push_back(ev.activity);
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    alphabet = std::move(labels);
  }
  std::unordered_map<std::string_view, ActivityId> activity_index;
  for (std::size_t i = 0; i < alphabet.size(); ++i) activity_index.emplace(alphabet[i], static_cast<ActivityId>(i));

  std::unordered_map<std::string_view, std::size_t> case_index;
  std::vector<std::vector<std::size_t>> members;
  std::vector<Case> cases;
  for (std::size_t i = 0; i < events.size(); ++i) {
    auto [it, inserted] = case_index.try_emplace(events[i].case_id, cases.size());
    if (inserted) {
      Case c;
      c.id = events[i].case_id;
      cases.push_back(std::move(c));
      members.emplace_back();
    }
    members[it->second].push_back(i);
  }

  bool temporal = !events.empty() && events.front().order.temporal;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    auto& ids = members[c];
    std::stable_sort(ids.begin(), ids.end(),
                     [&](std::size_t a, std::size_t b) { return events[a].order.value < events[b].order.value; });
    auto& cs = cases[c];
    cs.trace.reserve(ids.size());
    for (auto i : ids) {
      const auto& ev = events[i];
      cs.trace.push_back(activity_index.at(ev.activity));
      for (const auto& [k, v] : ev.attributes) {
        if (!v.empty()) cs.attributes[k] = v;
      }
    }
    if (temporal) {
      cs.start_time = events[ids.front()].order.value;
      cs.end_time = events[ids.back()].order.value;
    }
  }
  return EventLog(std::move(alphabet), std::move(cases), temporal);
}

inline EventLog read_log(std::istream& in, const CsvSchema& schema) {
  const auto events = parse_csv(in, schema);
  return build_log(events);
}

// Schema matching write_canonical_csv's output for `log`.
inline CsvSchema canonical_schema(const EventLog& log) {
  CsvSchema schema;
  schema.case_col = "case";
  schema.activity_col = "activity";
  schema.order_col = "order";
  std::map<std::string, int> keys;
  for (const auto& c : log.cases())
    for (const auto& [k, v] : c.attributes) keys[k];
  for (const auto& [k, v] : keys) schema.attribute_cols.push_back(k);
  schema.order_mode = log.temporal() ? OrderKeyMode::Timestamp : OrderKeyMode::Integer;
  return schema;
}

// Emits one row per trace event. Temporal logs get the case start time on
// every event but the last, which carries the end time; this reproduces
// the same EventLog when read back through canonical_schema(log).
inline void write_canonical_csv(std::ostream& out, const EventLog& log) {
  const auto schema = canonical_schema(log);
  std::vector<std::string> row{schema.case_col, schema.activity_col, schema.order_col};
  row.insert(row.end(), schema.attribute_cols.begin(), schema.attribute_cols.end());
  csv::write_row(out, row);
  for (const auto& c : log.cases()) {
    for (std::size_t i = 0; i < c.trace.size(); ++i) {
      row.clear();
      row.push_back(c.id);
      row.push_back(log.alphabet()[c.trace[i]]);
      if (log.temporal()) {
        const bool last = i + 1 == c.trace.size();
        row.push_back(format_iso8601(last ? *c.end_time : *c.start_time));
      } else {
        row.push_back(std::to_string(i));
      }
      for (const auto& key : schema.attribute_cols) {
        auto it = c.attributes.find(key);
        row.push_back(it == c.attributes.end() ? std::string{} : it->second);
      }
      csv::write_row(out, row);
    }
  }
}

inline LabelVector label_by_duration(const EventLog& log, Nanos threshold) {
  if (!log.temporal()) throw Error(Errc::NonTemporalOrderKey, "duration labels need timestamp order keys");
  std::vector<std::uint8_t> values;
  values.reserve(log.size());
  for (const auto& c : log.cases()) values.push_back(*c.end_time - *c.start_time > threshold.count());
  return LabelVector(std::move(values));
}

inline LabelVector label_by_attribute(const EventLog& log, const std::string& attr, const std::string& value) {
  std::vector<std::uint8_t> values;
  values.reserve(log.size());
  for (const auto& c : log.cases()) {
    auto it = c.attributes.find(attr);
    values.push_back(it != c.attributes.end() && it->second == value);
  }
  return LabelVector(std::move(values));
}

// Seeded sample of `n` cases without replacement, kept in original order.
inline std::vector<std::size_t> sample_cases(std::size_t total, std::size_t n, std::uint64_t seed) {
  if (n > total) throw Error(Errc::InvalidArgument, "sample size exceeds log size");
  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(idx.begin(), idx.end());
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace sfs
