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

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "sfs/csv.hpp"
#include "sfs/error.hpp"
#include "sfs/features.hpp"

namespace sfs {

// On-disk layout: `<prefix>.header.json` describes the columns and cases,
// `<prefix>.values.csv` holds the dense grid with a `case_id` column first
// and one column per feature named by feature_name.
inline constexpr std::string_view kFeatureFormat = "sfsel-features";

namespace detail {

inline nlohmann::json symbol_json(ActivityId id, const std::vector<std::string>& alphabet) {
  if (id == kVirtualStart) return "S";
  if (id == kVirtualEnd) return "E";
  return alphabet.at(id);
}

inline FeatureKind parse_kind(const std::string& name) {
  for (auto k : kAllKinds)
    if (kind_name(k) == name) return k;
  throw Error(Errc::Format, "unknown feature kind '" + name + "'");
}

}  // namespace detail

inline nlohmann::json feature_header_json(const FeatureMatrix& m) {
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t j = 0; j < m.n_features(); ++j) {
    const auto& d = m.descriptor(j);
    nlohmann::json f{{"name", m.feature_name(j)}, {"kind", kind_name(d.kind)}};
    if (d.kind == FeatureKind::Activity) {
      f["activity"] = m.alphabet().at(d.from);
    } else {
      f["from"] = detail::symbol_json(d.from, m.alphabet());
      f["to"] = detail::symbol_json(d.to, m.alphabet());
    }
    features.push_back(std::move(f));
  }
  nlohmann::json kinds = nlohmann::json::array();
  for (auto k : m.kinds().kinds()) kinds.push_back(kind_name(k));
  return {{"format", kFeatureFormat}, {"version", 1},        {"n_cases", m.n_cases()},
          {"kinds", kinds},           {"alphabet", m.alphabet()}, {"case_ids", m.case_ids()},
          {"features", features}};
}

inline void write_feature_values(std::ostream& out, const FeatureMatrix& m) {
  std::vector<std::string> row{"case_id"};
  for (std::size_t j = 0; j < m.n_features(); ++j) row.push_back(m.feature_name(j));
  csv::write_row(out, row);

  // Row-major emission from column-major storage: walk every column cursor
  // in step with the case index.
  std::vector<std::size_t> cursor(m.n_features(), 0);
  std::string line;
  for (std::size_t i = 0; i < m.n_cases(); ++i) {
    line.clear();
    const std::string id = i < m.case_ids().size() ? m.case_ids()[i] : std::to_string(i);
    if (csv::needs_quoting(id)) {
      std::ostringstream q;
      csv::write_field(q, id);
      line += q.str();
    } else {
      line += id;
    }
    for (std::size_t j = 0; j < m.n_features(); ++j) {
      const auto col = m.column(j);
      std::uint32_t v = 0;
      if (cursor[j] < col.nnz() && col.rows[cursor[j]] == i) v = col.values[cursor[j]++];
      line += ',';
      line += std::to_string(v);
    }
    line += '\n';
    out << line;
  }
}

inline FeatureMatrix read_feature_matrix(std::istream& header_in, std::istream& values_in) {
  nlohmann::json h;
  try {
    header_in >> h;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Format, std::string("feature header is not valid JSON: ") + e.what());
  }
  if (!h.is_object() || h.value("format", "") != kFeatureFormat) {
    throw Error(Errc::Format, "feature header has wrong format tag");
  }
  try {
    const auto n_cases = h.at("n_cases").get<std::size_t>();
    auto alphabet = h.at("alphabet").get<std::vector<std::string>>();
    auto case_ids = h.at("case_ids").get<std::vector<std::string>>();
    if (case_ids.size() != n_cases) throw Error(Errc::Format, "case_ids length differs from n_cases");

    std::unordered_map<std::string, ActivityId> index;
    for (std::size_t i = 0; i < alphabet.size(); ++i) index.emplace(alphabet[i], static_cast<ActivityId>(i));
    auto symbol = [&](const nlohmann::json& v) -> ActivityId {
      const auto s = v.get<std::string>();
      if (auto it = index.find(s); it != index.end()) return it->second;
      if (s == "S") return kVirtualStart;
      if (s == "E") return kVirtualEnd;
      throw Error(Errc::Format, "symbol '" + s + "' not in alphabet");
    };

    KindSet kinds;
    for (const auto& k : h.at("kinds")) kinds.insert(detail::parse_kind(k.get<std::string>()));

    std::vector<FeatureDescriptor> descriptors;
    std::vector<std::string> names;
    for (const auto& f : h.at("features")) {
      FeatureDescriptor d;
      d.kind = detail::parse_kind(f.at("kind").get<std::string>());
      if (d.kind == FeatureKind::Activity) {
        d.from = d.to = symbol(f.at("activity"));
      } else {
        d.from = symbol(f.at("from"));
        d.to = symbol(f.at("to"));
      }
      descriptors.push_back(d);
      names.push_back(f.at("name").get<std::string>());
    }

    csv::Reader reader(values_in);
    std::vector<std::string> row;
    if (!reader.next(row)) throw Error(Errc::Format, "values grid is empty");
    if (row.size() != descriptors.size() + 1 || row[0] != "case_id") {
      throw Error(Errc::Format, "values header has " + std::to_string(row.size()) + " columns, expected " +
                                    std::to_string(descriptors.size() + 1));
    }
    for (std::size_t j = 0; j < names.size(); ++j) {
      if (row[j + 1] != names[j]) throw Error(Errc::Format, "values column " + std::to_string(j + 1) +
                                                                " is '" + row[j + 1] + "', header says '" +
                                                                names[j] + "'");
    }
    std::vector<std::vector<std::uint32_t>> columns(descriptors.size(), std::vector<std::uint32_t>(n_cases));
    std::size_t i = 0;
    while (reader.next(row)) {
      if (row.size() == 1 && row[0].empty()) continue;
      if (i >= n_cases) throw Error(Errc::Format, "values grid has more rows than n_cases");
      if (row.size() != descriptors.size() + 1) {
        throw Error(Errc::Format, "values row " + std::to_string(i + 1) + " has wrong field count");
      }
      if (row[0] != case_ids[i]) {
        throw Error(Errc::Format, "values row " + std::to_string(i + 1) + " case '" + row[0] +
                                      "' differs from header '" + case_ids[i] + "'");
      }
      for (std::size_t j = 0; j < descriptors.size(); ++j) {
        const auto& cell = row[j + 1];
        std::uint32_t v = 0;
        auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
          throw Error(Errc::Format, "values row " + std::to_string(i + 1) + " column " + std::to_string(j + 1) +
                                        ": '" + cell + "' is not a non-negative integer");
        }
        columns[j][i] = v;
      }
      ++i;
    }
    if (i != n_cases) throw Error(Errc::Format, "values grid has " + std::to_string(i) + " rows, expected " +
                                                    std::to_string(n_cases));
    FeatureMatrixBuilder builder(n_cases, std::move(alphabet), std::move(case_ids), kinds);
    std::vector<std::uint32_t> rows, values;
    for (std::size_t j = 0; j < descriptors.size(); ++j) {
      rows.clear();
      values.clear();
      for (std::size_t r = 0; r < n_cases; ++r) {
        if (columns[j][r] != 0) {
          rows.push_back(static_cast<std::uint32_t>(r));
          values.push_back(columns[j][r]);
        }
      }
      builder.add_column(descriptors[j], rows, values);
    }
    return std::move(builder).build();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Format, std::string("feature header: ") + e.what());
  }
}

inline std::string features_header_path(const std::string& prefix) { return prefix + ".header.json"; }
inline std::string features_values_path(const std::string& prefix) { return prefix + ".values.csv"; }

inline FeatureMatrix load_feature_matrix(const std::string& prefix) {
  std::ifstream h(features_header_path(prefix));
  if (!h) throw Error(Errc::Io, "cannot open " + features_header_path(prefix));
  std::ifstream v(features_values_path(prefix));
  if (!v) throw Error(Errc::Io, "cannot open " + features_values_path(prefix));
  return read_feature_matrix(h, v);
}

}  // namespace sfs
