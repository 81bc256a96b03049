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
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "sfs/error.hpp"

namespace sfs {

// A column reduced to bucket codes 0..levels-1.
struct DiscreteColumn {
  std::vector<std::uint16_t> codes;
  std::uint32_t levels = 0;

  std::size_t size() const noexcept { return codes.size(); }
};

inline constexpr unsigned kDefaultMiBins = 4;

// Equal-frequency discretization into min(bins, distinct values) buckets.
// Columns with at most `bins` distinct values (booleans in particular) keep
// one bucket per value. Otherwise a run of equal values starting at sorted
// rank r goes to bucket floor(r * bins / n); ties never straddle buckets.
// Codes are renumbered densely in value order.
inline DiscreteColumn discretize(std::span<const double> values, unsigned bins) {
  if (bins == 0) throw Error(Errc::InvalidArgument, "bins must be positive");
  const std::size_t n = values.size();
  DiscreteColumn out;
  out.codes.assign(n, 0);
  if (n == 0) return out;

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });

  std::size_t distinct = 1;
  for (std::size_t t = 1; t < n; ++t)
    if (values[order[t]] != values[order[t - 1]]) ++distinct;

  const bool identity = distinct <= bins;
  std::uint32_t code = 0;
  std::size_t last_bucket = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const bool new_run = t > 0 && values[order[t]] != values[order[t - 1]];
    if (new_run) {
      if (identity) {
        ++code;
      } else {
        const std::size_t bucket = t * bins / n;
        if (bucket != last_bucket) {
          ++code;
          last_bucket = bucket;
        }
      }
    }
    out.codes[order[t]] = static_cast<std::uint16_t>(code);
  }
  out.levels = code + 1;
  return out;
}

inline DiscreteColumn discretize(std::span<const std::uint8_t> labels) {
  DiscreteColumn out;
  out.codes.assign(labels.begin(), labels.end());
  out.levels = 2;
  return out;
}

namespace detail {

// Sums non-negative-or-negative terms in a canonical order so that the
// result does not depend on which column came first.
inline double canonical_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

}  // namespace detail

// Reusable buffers for repeated estimates.
struct MiScratch {
  std::vector<std::uint32_t> joint, cx, cy;
  std::vector<double> terms;
};

// Plug-in estimate in bits. Symmetric bit-for-bit: each term
// c_uv * log2(n c_uv / (c_u c_v)) is computed from exact integer products and
// the terms are summed in sorted order. Miller-Madow adds
// (levels_x + levels_y - cells_xy - 1) / (2 n ln 2) using occupied levels.
inline double mutual_information(const DiscreteColumn& x, const DiscreteColumn& y, bool miller_madow,
                                 MiScratch& scratch) {
  if (x.size() != y.size()) throw Error(Errc::LengthMismatch, "columns differ in length");
  const std::size_t n = x.size();
  if (n == 0) return 0.0;
  const std::size_t lx = x.levels, ly = y.levels;
  auto& joint = scratch.joint;
  auto& cx = scratch.cx;
  auto& cy = scratch.cy;
  joint.assign(lx * ly, 0);
  cx.assign(lx, 0);
  cy.assign(ly, 0);
  const auto* xc = x.codes.data();
  const auto* yc = y.codes.data();
  for (std::size_t i = 0; i < n; ++i) ++joint[xc[i] * ly + yc[i]];
  for (std::size_t u = 0; u < lx; ++u)
    for (std::size_t v = 0; v < ly; ++v) {
      cx[u] += joint[u * ly + v];
      cy[v] += joint[u * ly + v];
    }
  const double dn = static_cast<double>(n);
  auto& terms = scratch.terms;
  terms.clear();
  std::size_t cells = 0;
  for (std::size_t u = 0; u < lx; ++u) {
    for (std::size_t v = 0; v < ly; ++v) {
      const auto c = joint[u * ly + v];
      if (c == 0) continue;
      ++cells;
      const double cuv = c;
      const double denom = static_cast<double>(cx[u]) * static_cast<double>(cy[v]);
      terms.push_back(cuv * std::log2(dn * cuv / denom));
    }
  }
  double mi = detail::canonical_sum(terms) / dn;
  if (miller_madow) {
    const auto occupied = [](const std::vector<std::uint32_t>& c) {
      return static_cast<double>(std::count_if(c.begin(), c.end(), [](auto v) { return v > 0; }));
    };
    mi += (occupied(cx) + occupied(cy) - static_cast<double>(cells) - 1.0) / (2.0 * dn * std::log(2.0));
  }
  return mi < 0.0 ? 0.0 : mi;
}

inline double mutual_information(const DiscreteColumn& x, const DiscreteColumn& y, bool miller_madow = false) {
  MiScratch scratch;
  return mutual_information(x, y, miller_madow, scratch);
}

inline double mutual_information(std::span<const double> x, std::span<const double> y,
                                 unsigned bins = kDefaultMiBins, bool miller_madow = false) {
  if (x.size() != y.size()) throw Error(Errc::LengthMismatch, "columns differ in length");
  if (x.size() < 2) throw Error(Errc::InvalidArgument, "mutual information needs at least two rows");
  return mutual_information(discretize(x, bins), discretize(y, bins), miller_madow);
}

// Plug-in entropy in bits.
inline double entropy(const DiscreteColumn& x) {
  const std::size_t n = x.size();
  if (n == 0) return 0.0;
  std::vector<std::uint32_t> counts(x.levels, 0);
  for (auto c : x.codes) ++counts[c];
  std::vector<double> terms;
  const double dn = static_cast<double>(n);
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = c / dn;
    terms.push_back(-p * std::log2(p));
  }
  return detail::canonical_sum(terms);
}

}  // namespace sfs
