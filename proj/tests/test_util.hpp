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

#include <string>
#include <vector>

#include "sfs/sfs.hpp"

namespace sfs_test {

// Log with integer order keys; trace c gets case id "c<c>".
inline sfs::EventLog log_from_traces(const std::vector<std::vector<std::string>>& traces) {
  std::vector<sfs::EventRecord> events;
  for (std::size_t c = 0; c < traces.size(); ++c) {
    for (std::size_t i = 0; i < traces[c].size(); ++i) {
      sfs::EventRecord e;
      e.case_id = "c" + std::to_string(c);
      e.activity = traces[c][i];
      e.order = {static_cast<std::int64_t>(i), false};
      events.push_back(std::move(e));
    }
  }
  return sfs::build_log(events);
}

inline sfs::FeatureMatrix dense(const std::vector<std::vector<std::uint32_t>>& columns) {
  return sfs::FeatureMatrix::from_dense(columns);
}

}  // namespace sfs_test
