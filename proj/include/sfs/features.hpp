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
#include <array>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sfs/error.hpp"
#include "sfs/eventlog.hpp"
#include "sfs/rng.hpp"

namespace sfs {

// Declaration order is the canonical column order.
enum class FeatureKind : std::uint8_t { Activity = 0, Starter, Finisher, TwoGram, Order };

inline constexpr std::array<FeatureKind, 5> kAllKinds{FeatureKind::Activity, FeatureKind::Starter,
                                                      FeatureKind::Finisher, FeatureKind::TwoGram,
                                                      FeatureKind::Order};

inline std::string_view kind_name(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Activity: return "activity";
    case FeatureKind::Starter: return "starter";
    case FeatureKind::Finisher: return "finisher";
    case FeatureKind::TwoGram: return "2gram";
    case FeatureKind::Order: return "order";
  }
  return "?";
}

// Small bit set over FeatureKind.
class KindSet {
 public:
  constexpr KindSet() = default;
  constexpr KindSet(std::initializer_list<FeatureKind> kinds) {
    for (auto k : kinds) insert(k);
  }

  constexpr void insert(FeatureKind k) { bits_ |= bit(k); }
  constexpr bool contains(FeatureKind k) const { return (bits_ & bit(k)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint8_t bits() const { return bits_; }

  std::vector<FeatureKind> kinds() const {
    std::vector<FeatureKind> out;
    for (auto k : kAllKinds)
      if (contains(k)) out.push_back(k);
    return out;
  }

  // "activity+sf+2gram+order" style name; starter and finisher together
  // print as "sf".
  std::string name() const {
    std::string out;
    auto add = [&](std::string_view part) {
      if (!out.empty()) out += '+';
      out += part;
    };
    if (contains(FeatureKind::Activity)) add("activity");
    if (contains(FeatureKind::Starter) && contains(FeatureKind::Finisher)) {
      add("sf");
    } else {
      if (contains(FeatureKind::Starter)) add("starter");
      if (contains(FeatureKind::Finisher)) add("finisher");
    }
    if (contains(FeatureKind::TwoGram)) add("2gram");
    if (contains(FeatureKind::Order)) add("order");
    return out.empty() ? "none" : out;
  }

  // Parses a comma or plus separated list: activity, starter, finisher, sf,
  // 2gram, order, all. "none" yields the empty set.
  static KindSet parse(std::string_view text) {
    KindSet set;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      auto end = text.find_first_of(",+", pos);
      if (end == std::string_view::npos) end = text.size();
      const auto tok = text.substr(pos, end - pos);
      if (tok == "activity" || tok == "act") {
        set.insert(FeatureKind::Activity);
      } else if (tok == "starter" || tok == "start") {
        set.insert(FeatureKind::Starter);
      } else if (tok == "finisher" || tok == "end") {
        set.insert(FeatureKind::Finisher);
      } else if (tok == "sf") {
        set.insert(FeatureKind::Starter);
        set.insert(FeatureKind::Finisher);
      } else if (tok == "2gram" || tok == "2g" || tok == "transition") {
        set.insert(FeatureKind::TwoGram);
      } else if (tok == "order" || tok == "ord") {
        set.insert(FeatureKind::Order);
      } else if (tok == "all") {
        for (auto k : kAllKinds) set.insert(k);
      } else if (tok == "none" || tok.empty()) {
      } else {
        throw Error(Errc::InvalidArgument, "unknown feature type '" + std::string(tok) + "'");
      }
      pos = end + 1;
    }
    return set;
  }

  friend constexpr bool operator==(KindSet, KindSet) = default;

 private:
  static constexpr std::uint8_t bit(FeatureKind k) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(k)); }
  std::uint8_t bits_ = 0;
};

// `from`/`to` are activity ids or the virtual S/E sentinels. Activity
// features carry their activity in both fields.
struct FeatureDescriptor {
  FeatureKind kind = FeatureKind::Activity;
  ActivityId from = 0;
  ActivityId to = 0;

  static FeatureDescriptor activity(ActivityId a) { return {FeatureKind::Activity, a, a}; }
  static FeatureDescriptor starter(ActivityId a) { return {FeatureKind::Starter, kVirtualStart, a}; }
  static FeatureDescriptor finisher(ActivityId b) { return {FeatureKind::Finisher, b, kVirtualEnd}; }
  static FeatureDescriptor two_gram(ActivityId a, ActivityId b) { return {FeatureKind::TwoGram, a, b}; }
  static FeatureDescriptor order(ActivityId a, ActivityId b) { return {FeatureKind::Order, a, b}; }

  friend bool operator==(const FeatureDescriptor&, const FeatureDescriptor&) = default;
};

namespace detail {

// S sorts before every activity and E after.
inline std::int64_t symbol_rank(ActivityId id) {
  if (id == kVirtualStart) return -1;
  if (id == kVirtualEnd) return std::int64_t{1} << 33;
  return id;
}

}  // namespace detail

inline bool canonical_less(const FeatureDescriptor& a, const FeatureDescriptor& b) {
  if (a.kind != b.kind) return a.kind < b.kind;
  const auto af = detail::symbol_rank(a.from), bf = detail::symbol_rank(b.from);
  if (af != bf) return af < bf;
  return detail::symbol_rank(a.to) < detail::symbol_rank(b.to);
}

inline std::string symbol_name(ActivityId id, std::span<const std::string> alphabet) {
  if (id == kVirtualStart) return "S";
  if (id == kVirtualEnd) return "E";
  return alphabet[id];
}

// act:a, 2g:S>a, start:a, end:b, ord:a->b
inline std::string feature_name(const FeatureDescriptor& d, std::span<const std::string> alphabet) {
  switch (d.kind) {
    case FeatureKind::Activity: return "act:" + symbol_name(d.from, alphabet);
    case FeatureKind::Starter: return "start:" + symbol_name(d.to, alphabet);
    case FeatureKind::Finisher: return "end:" + symbol_name(d.from, alphabet);
    case FeatureKind::TwoGram: return "2g:" + symbol_name(d.from, alphabet) + ">" + symbol_name(d.to, alphabet);
    case FeatureKind::Order: return "ord:" + symbol_name(d.from, alphabet) + "->" + symbol_name(d.to, alphabet);
  }
  return "?";
}

inline std::string feature_name(const FeatureDescriptor& d, const EventLog& log) {
  return feature_name(d, log.alphabet());
}

// Case x feature matrix of non-negative integer counts, stored column-major
// and sparse (only non-zero cells). Row indices inside a column ascend.
class FeatureMatrix {
 public:
  struct Column {
    std::span<const std::uint32_t> rows;
    std::span<const std::uint32_t> values;
    std::size_t nnz() const noexcept { return rows.size(); }
  };

  FeatureMatrix() = default;

  std::size_t n_cases() const noexcept { return n_cases_; }
  std::size_t n_features() const noexcept { return descriptors_.size(); }
  std::size_t nnz() const noexcept { return rows_.size(); }
  const std::vector<FeatureDescriptor>& descriptors() const noexcept { return descriptors_; }
  const FeatureDescriptor& descriptor(std::size_t j) const { return descriptors_.at(j); }
  const std::vector<std::string>& alphabet() const noexcept { return alphabet_; }
  const std::vector<std::string>& case_ids() const noexcept { return case_ids_; }
  KindSet kinds() const noexcept { return kinds_; }

  Column column(std::size_t j) const {
    const auto b = col_ptr_[j], e = col_ptr_[j + 1];
    return {std::span(rows_).subspan(b, e - b), std::span(values_).subspan(b, e - b)};
  }

  std::uint32_t at(std::size_t row, std::size_t j) const {
    const auto col = column(j);
    auto it = std::lower_bound(col.rows.begin(), col.rows.end(), static_cast<std::uint32_t>(row));
    if (it == col.rows.end() || *it != row) return 0;
    return col.values[static_cast<std::size_t>(it - col.rows.begin())];
  }

  std::vector<double> dense_column(std::size_t j) const {
    std::vector<double> out(n_cases_, 0.0);
    const auto col = column(j);
    for (std::size_t t = 0; t < col.nnz(); ++t) out[col.rows[t]] = col.values[t];
    return out;
  }

  std::string feature_name(std::size_t j) const { return sfs::feature_name(descriptors_.at(j), alphabet_); }

  std::vector<std::string> feature_names() const {
    std::vector<std::string> out;
    out.reserve(n_features());
    for (std::size_t j = 0; j < n_features(); ++j) out.push_back(feature_name(j));
    return out;
  }

  FeatureMatrix select_columns(std::span<const std::size_t> cols) const {
    FeatureMatrix out;
    out.n_cases_ = n_cases_;
    out.alphabet_ = alphabet_;
    out.case_ids_ = case_ids_;
    out.kinds_ = kinds_;
    out.col_ptr_.reserve(cols.size() + 1);
    out.col_ptr_.assign(1, 0);
    for (auto j : cols) {
      const auto col = column(j);
      out.descriptors_.push_back(descriptors_.at(j));
      out.rows_.insert(out.rows_.end(), col.rows.begin(), col.rows.end());
      out.values_.insert(out.values_.end(), col.values.begin(), col.values.end());
      out.col_ptr_.push_back(out.rows_.size());
    }
    return out;
  }

  // Rows are renumbered to their position in `rows`, which need not be sorted.
  FeatureMatrix select_rows(std::span<const std::size_t> rows) const {
    std::vector<std::int64_t> remap(n_cases_, -1);
    for (std::size_t i = 0; i < rows.size(); ++i) remap.at(rows[i]) = static_cast<std::int64_t>(i);
    FeatureMatrix out;
    out.n_cases_ = rows.size();
    out.alphabet_ = alphabet_;
    out.descriptors_ = descriptors_;
    out.kinds_ = kinds_;
    if (!case_ids_.empty()) {
      for (auto r : rows) out.case_ids_.push_back(case_ids_[r]);
    }
    const bool sorted = std::is_sorted(rows.begin(), rows.end());
    out.col_ptr_.reserve(col_ptr_.size());
    out.col_ptr_.assign(1, 0);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> scratch;
    for (std::size_t j = 0; j < n_features(); ++j) {
      const auto col = column(j);
      scratch.clear();
      for (std::size_t t = 0; t < col.nnz(); ++t) {
        const auto m = remap[col.rows[t]];
        if (m >= 0) scratch.emplace_back(static_cast<std::uint32_t>(m), col.values[t]);
      }
      if (!sorted) std::sort(scratch.begin(), scratch.end());
      for (auto [r, v] : scratch) {
        out.rows_.push_back(r);
        out.values_.push_back(v);
      }
      out.col_ptr_.push_back(out.rows_.size());
    }
    return out;
  }

  // Builds a matrix from dense column-major values. Zero cells are dropped.
  static FeatureMatrix from_dense(std::size_t n_cases, std::vector<FeatureDescriptor> descriptors,
                                  const std::vector<std::vector<std::uint32_t>>& columns,
                                  std::vector<std::string> alphabet = {}, std::vector<std::string> case_ids = {}) {
    if (columns.size() != descriptors.size()) {
      throw Error(Errc::LengthMismatch, "descriptor count does not match column count");
    }
    FeatureMatrix out;
    out.n_cases_ = n_cases;
    out.descriptors_ = std::move(descriptors);
    out.alphabet_ = std::move(alphabet);
    out.case_ids_ = std::move(case_ids);
    out.col_ptr_.assign(1, 0);
    for (const auto& col : columns) {
      if (col.size() != n_cases) throw Error(Errc::LengthMismatch, "column length does not match case count");
      for (std::size_t i = 0; i < n_cases; ++i) {
        if (col[i] != 0) {
          out.rows_.push_back(static_cast<std::uint32_t>(i));
          out.values_.push_back(col[i]);
        }
      }
      out.col_ptr_.push_back(out.rows_.size());
    }
    for (const auto& d : out.descriptors_) out.kinds_.insert(d.kind);
    return out;
  }

  // Test helper: anonymous features act:f0..f{n-1} over a matching alphabet.
  static FeatureMatrix from_dense(const std::vector<std::vector<std::uint32_t>>& columns) {
    const std::size_t n = columns.empty() ? 0 : columns.front().size();
    std::vector<FeatureDescriptor> desc;
    std::vector<std::string> alphabet;
    for (std::size_t j = 0; j < columns.size(); ++j) {
      desc.push_back(FeatureDescriptor::activity(static_cast<ActivityId>(j)));
      alphabet.push_back("f" + std::to_string(j));
    }
    return from_dense(n, std::move(desc), columns, std::move(alphabet));
  }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  friend class FeatureMatrixBuilder;

  std::size_t n_cases_ = 0;
  std::vector<FeatureDescriptor> descriptors_;
  std::vector<std::size_t> col_ptr_{0};
  std::vector<std::uint32_t> rows_;
  std::vector<std::uint32_t> values_;
  std::vector<std::string> alphabet_;
  std::vector<std::string> case_ids_;
  KindSet kinds_;
};

// Appends columns one at a time; rows inside a column must ascend.
class FeatureMatrixBuilder {
 public:
  FeatureMatrixBuilder(std::size_t n_cases, std::vector<std::string> alphabet, std::vector<std::string> case_ids,
                       KindSet kinds) {
    m_.n_cases_ = n_cases;
    m_.alphabet_ = std::move(alphabet);
    m_.case_ids_ = std::move(case_ids);
    m_.kinds_ = kinds;
  }

  void add_column(const FeatureDescriptor& d, std::span<const std::uint32_t> rows,
                  std::span<const std::uint32_t> values) {
    m_.descriptors_.push_back(d);
    m_.rows_.insert(m_.rows_.end(), rows.begin(), rows.end());
    m_.values_.insert(m_.values_.end(), values.begin(), values.end());
    m_.col_ptr_.push_back(m_.rows_.size());
  }

  FeatureMatrix build() && { return std::move(m_); }

 private:
  FeatureMatrix m_;
};

namespace detail {

struct DescriptorHash {
  std::size_t operator()(const FeatureDescriptor& d) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(d.kind);
    h = h * 0x9E3779B97F4A7C15ULL ^ d.from;
    h = h * 0x9E3779B97F4A7C15ULL ^ d.to;
    return static_cast<std::size_t>(mix_seed(h));
  }
};

}  // namespace detail

// Structural features of the requested kinds. Only features observed in at
// least one case are instantiated, in canonical descriptor order.
//   Activity   occurrences of the activity in the trace
//   TwoGram    occurrences of the adjacent pair in <S, t1..tn, E>
//   Starter    1 iff the trace starts with a
//   Finisher   1 iff the trace ends with b
//   Order      1 iff both occur and the first a precedes the first b
inline FeatureMatrix extract(const EventLog& log, KindSet kinds) {
  if (kinds.empty()) throw Error(Errc::EmptyKinds, "no feature types requested");

  // Per-case sparse entries keyed by descriptor, in discovery order.
  std::unordered_map<FeatureDescriptor, std::vector<std::pair<std::uint32_t, std::uint32_t>>,
                     detail::DescriptorHash>
      cells;
  std::unordered_map<FeatureDescriptor, std::uint32_t, detail::DescriptorHash> counts;
  std::vector<ActivityId> distinct;
  std::vector<std::size_t> first_pos(log.alphabet().size(), SIZE_MAX);

  const auto& cases = log.cases();
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    const auto row = static_cast<std::uint32_t>(ci);
    const auto& trace = cases[ci].trace;
    counts.clear();
    if (kinds.contains(FeatureKind::Activity)) {
      for (auto a : trace) ++counts[FeatureDescriptor::activity(a)];
    }
    if (!trace.empty()) {
      if (kinds.contains(FeatureKind::Starter)) counts[FeatureDescriptor::starter(trace.front())] = 1;
      if (kinds.contains(FeatureKind::Finisher)) counts[FeatureDescriptor::finisher(trace.back())] = 1;
    }
    if (kinds.contains(FeatureKind::TwoGram)) {
      ActivityId prev = kVirtualStart;
      for (auto a : trace) {
        ++counts[FeatureDescriptor::two_gram(prev, a)];
        prev = a;
      }
      ++counts[FeatureDescriptor::two_gram(prev, kVirtualEnd)];
    }
    if (kinds.contains(FeatureKind::Order)) {
      distinct.clear();
      for (std::size_t p = 0; p < trace.size(); ++p) {
        if (first_pos[trace[p]] == SIZE_MAX) {
          first_pos[trace[p]] = p;
          distinct.push_back(trace[p]);
        }
      }
      // `distinct` lists activities by first occurrence, so i < j means
      // distinct[i] first-precedes distinct[j].
      for (std::size_t i = 0; i < distinct.size(); ++i)
        for (std::size_t j = i + 1; j < distinct.size(); ++j)
          counts[FeatureDescriptor::order(distinct[i], distinct[j])] = 1;
      for (auto a : distinct) first_pos[a] = SIZE_MAX;
    }
    for (const auto& [d, v] : counts) cells[d].emplace_back(row, v);
  }

  std::vector<FeatureDescriptor> order;
  order.reserve(cells.size());
  for (const auto& [d, _] : cells) order.push_back(d);
  std::sort(order.begin(), order.end(), canonical_less);

  std::vector<std::string> case_ids;
  case_ids.reserve(cases.size());
  for (const auto& c : cases) case_ids.push_back(c.id);

  FeatureMatrixBuilder builder(cases.size(), log.alphabet(), std::move(case_ids), kinds);
  std::vector<std::uint32_t> rows, values;
  for (const auto& d : order) {
    const auto& entries = cells.at(d);
    rows.clear();
    values.clear();
    for (auto [r, v] : entries) {
      rows.push_back(r);
      values.push_back(v);
    }
    builder.add_column(d, rows, values);
  }
  return std::move(builder).build();
}

// Maps every original column to the surviving column of its duplicate
// class. Both fields use original column indices.
struct DedupMap {
  std::vector<std::size_t> representative;  // per original column
  std::vector<std::size_t> survivors;       // original index of each output column, ascending

  bool is_survivor(std::size_t j) const { return representative.at(j) == j; }

  // Position of `representative[j]` among the output columns.
  std::size_t output_index(std::size_t j) const {
    const auto r = representative.at(j);
    return static_cast<std::size_t>(std::lower_bound(survivors.begin(), survivors.end(), r) - survivors.begin());
  }
};

namespace detail {

inline std::uint64_t column_hash(const FeatureMatrix::Column& col) {
  std::uint64_t h = 0x84222325CBF29CE4ULL ^ col.nnz();
  for (std::size_t t = 0; t < col.nnz(); ++t) {
    h = mix_seed(h ^ (static_cast<std::uint64_t>(col.rows[t]) << 32 | col.values[t]));
  }
  return h;
}

inline bool columns_equal(const FeatureMatrix::Column& a, const FeatureMatrix::Column& b) {
  return std::equal(a.rows.begin(), a.rows.end(), b.rows.begin(), b.rows.end()) &&
         std::equal(a.values.begin(), a.values.end(), b.values.begin(), b.values.end());
}

}  // namespace detail

// Duplicate classes of identical value vectors. The lowest-index column of
// each class survives; survivor order is preserved.
inline DedupMap find_duplicates(const FeatureMatrix& m) {
  DedupMap map;
  map.representative.resize(m.n_features());
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
  for (std::size_t j = 0; j < m.n_features(); ++j) {
    const auto col = m.column(j);
    auto& bucket = buckets[detail::column_hash(col)];
    std::size_t rep = j;
    for (auto s : bucket) {
      if (detail::columns_equal(m.column(s), col)) {
        rep = s;
        break;
      }
    }
    map.representative[j] = rep;
    if (rep == j) {
      bucket.push_back(j);
      map.survivors.push_back(j);
    }
  }
  return map;
}

inline std::pair<FeatureMatrix, DedupMap> dedup(const FeatureMatrix& m) {
  auto map = find_duplicates(m);
  auto out = m.select_columns(map.survivors);
  return {std::move(out), std::move(map)};
}

}  // namespace sfs
