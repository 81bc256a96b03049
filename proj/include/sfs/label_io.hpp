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

#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "sfs/csv.hpp"
#include "sfs/error.hpp"
#include "sfs/eventlog.hpp"

namespace sfs {

// Label files are CSV with header `case_id,label` and 0/1 values.
inline void write_labels(std::ostream& out, const std::vector<std::string>& case_ids, const LabelVector& labels) {
  if (case_ids.size() != labels.size()) throw Error(Errc::LengthMismatch, "case ids do not match labels");
  csv::write_row(out, {"case_id", "label"});
  for (std::size_t i = 0; i < labels.size(); ++i) csv::write_row(out, {case_ids[i], labels[i] ? "1" : "0"});
}

struct LabelFile {
  std::vector<std::string> case_ids;
  LabelVector labels;
};

inline LabelFile read_labels(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> row;
  if (!reader.next(row) || row.size() != 2 || row[0] != "case_id" || row[1] != "label") {
    throw Error(Errc::Format, "label file must start with header 'case_id,label'");
  }
  LabelFile out;
  std::vector<std::uint8_t> values;
  std::size_t line = 1;
  while (reader.next(row)) {
    ++line;
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != 2 || (row[1] != "0" && row[1] != "1")) {
      throw Error(Errc::Format, "label file row " + std::to_string(line) + " is not 'case_id,0|1'");
    }
    out.case_ids.push_back(row[0]);
    values.push_back(row[1] == "1");
  }
  out.labels = LabelVector(std::move(values));
  return out;
}

inline LabelFile load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path);
  return read_labels(in);
}

// Reorders `file` to follow `case_ids`; every id must be labelled.
inline LabelVector align_labels(const LabelFile& file, const std::vector<std::string>& case_ids) {
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < file.case_ids.size(); ++i) pos.emplace(file.case_ids[i], i);
  std::vector<std::uint8_t> values;
  values.reserve(case_ids.size());
  for (const auto& id : case_ids) {
    auto it = pos.find(id);
    if (it == pos.end()) throw Error(Errc::LengthMismatch, "case '" + id + "' has no label");
    values.push_back(file.labels[it->second]);
  }
  return LabelVector(std::move(values));
}

}  // namespace sfs
