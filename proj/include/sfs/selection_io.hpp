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

#include <cmath>
#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "sfs/features.hpp"
#include "sfs/selection.hpp"

namespace sfs {

// Non-finite scores are written as the strings "inf" / "-inf".
inline nlohmann::json score_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline nlohmann::json selection_json(const SelectionResult& res, const FeatureMatrix& m, const AlgorithmSpec& spec,
                                     std::size_t k, std::uint64_t seed, bool with_elapsed = true) {
  nlohmann::json names = nlohmann::json::array(), indices = nlohmann::json::array(),
                 scores = nlohmann::json::array();
  for (std::size_t t = 0; t < res.selected.size(); ++t) {
    names.push_back(m.feature_name(res.selected[t]));
    indices.push_back(res.selected[t]);
    scores.push_back(score_json(res.scores.at(t)));
  }
  nlohmann::json out{{"algorithm", spec.label()}, {"k", k},           {"seed", seed},
                     {"n_features", m.n_features()}, {"selected", names}, {"indices", indices},
                     {"scores", scores}};
  if (with_elapsed) out["elapsed_ns"] = res.elapsed.count();
  if (res.cluster_map) {
    nlohmann::json map = nlohmann::json::object();
    for (std::size_t j = 0; j < res.cluster_map->size(); ++j)
      map[m.feature_name(j)] = m.feature_name((*res.cluster_map)[j]);
    out["cluster_map"] = std::move(map);
  }
  return out;
}

}  // namespace sfs
