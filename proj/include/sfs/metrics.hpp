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
#include <span>
#include <vector>

#include "sfs/error.hpp"
#include "sfs/eventlog.hpp"
#include "sfs/features.hpp"
#include "sfs/mutual_information.hpp"

namespace sfs {

struct MiCoverage {
  double vs_predictors = 0.0;
  double vs_outcome = 0.0;
  unsigned bins = kDefaultMiBins;
};

// vs_predictors: mean over every column b of max over selected a of I(a;b).
// vs_outcome: max over selected a of I(a;y).
// For a selected b the inner max is I(b;b) = H(b), which bounds I(a;b) for
// every a, so the other pairs are not evaluated.
inline MiCoverage mi_coverage(std::span<const std::size_t> selected, const FeatureMatrix& m, const LabelVector& labels,
                              unsigned bins = kDefaultMiBins, bool miller_madow = false) {
  if (selected.empty()) throw Error(Errc::EmptySelection, "coverage needs at least one selected feature");
  if (labels.size() != m.n_cases()) throw Error(Errc::LengthMismatch, "labels do not match rows");
  const std::size_t n = m.n_features();
  for (auto a : selected)
    if (a >= n) throw Error(Errc::InvalidArgument, "selected index " + std::to_string(a) + " out of range");

  std::vector<DiscreteColumn> cols(n);
  for (std::size_t j = 0; j < n; ++j) cols[j] = discretize(m.dense_column(j), bins);
  const auto y = discretize(labels.values());
  std::vector<char> in_set(n, 0);
  for (auto a : selected) in_set[a] = 1;

  MiScratch scratch;
  MiCoverage out;
  out.bins = bins;
  for (auto a : selected) out.vs_outcome = std::max(out.vs_outcome, mutual_information(cols[a], y, miller_madow, scratch));
  if (n == 0) return out;
  double total = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    double best = 0.0;
    if (in_set[b]) {
      best = mutual_information(cols[b], cols[b], miller_madow, scratch);
    } else {
      for (auto a : selected) best = std::max(best, mutual_information(cols[a], cols[b], miller_madow, scratch));
    }
    total += best;
  }
  out.vs_predictors = total / static_cast<double>(n);
  return out;
}

}  // namespace sfs
