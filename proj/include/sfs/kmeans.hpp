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
#include <cstdint>
#include <limits>
#include <vector>

#include "sfs/error.hpp"
#include "sfs/features.hpp"
#include "sfs/rng.hpp"

namespace sfs {

struct KMeansOptions {
  std::size_t max_iterations = 100;
};

struct KMeansResult {
  std::vector<std::size_t> assignment;      // cluster of each point
  std::vector<std::vector<double>> centroids;
  std::vector<std::size_t> representative;  // per cluster: member nearest the centroid
  std::vector<double> representative_distance;
  std::size_t iterations = 0;
  bool converged = false;
  double distortion = 0.0;  // sum of squared distances to assigned centroids
};

namespace detail {

// Squared Euclidean distance between sparse point `col` (squared norm
// `col_norm`) and the mean of `m` points whose coordinate sums are `sums`
// with squared norm `sums_norm`. Inputs are integers, so the numerator is
// exact and the result does not depend on the order of coordinates.
inline double sparse_mean_sq_distance(const FeatureMatrix::Column& col, double col_norm,
                                      const std::vector<double>& sums, double sums_norm, double m) {
  double dot = 0.0;
  for (std::size_t t = 0; t < col.nnz(); ++t) dot += static_cast<double>(col.values[t]) * sums[col.rows[t]];
  const double num = m * m * col_norm - 2.0 * m * dot + sums_norm;
  return num > 0.0 ? num / (m * m) : 0.0;
}

inline double sq_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace detail

// Lloyd's k-means over the columns of `points` (each column is a point in
// n_cases-dimensional space), seeded with k-means++. Ties in assignment go
// to the lower cluster index; an emptied cluster is re-seeded with the
// point farthest from its current centroid. Stops when assignments no
// longer change or after max_iterations.
inline KMeansResult kmeans(const FeatureMatrix& points, std::size_t k, std::uint64_t seed,
                           const KMeansOptions& options = {}) {
  const std::size_t n = points.n_features();
  if (k == 0 || k > n) throw Error(Errc::InvalidArgument, "k-means needs 1 <= k <= number of points");

  std::vector<double> norms(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto col = points.column(j);
    double s = 0.0;
    for (auto v : col.values) s += static_cast<double>(v) * v;
    norms[j] = s;
  }

  KMeansResult res;
  Rng rng(seed);

  // k-means++ seeding.
  std::vector<std::size_t> seeds;
  seeds.reserve(k);
  seeds.push_back(rng.below(n));
  std::vector<double> best_d(n, std::numeric_limits<double>::infinity());
  {
    auto update = [&](std::size_t s) {
      const auto c = points.dense_column(s);
      const double cn = norms[s];
      for (std::size_t j = 0; j < n; ++j) {
        const double d = j == s ? 0.0 : detail::sparse_mean_sq_distance(points.column(j), norms[j], c, cn, 1.0);
        best_d[j] = std::min(best_d[j], d);
      }
    };
    update(seeds.back());
    while (seeds.size() < k) {
      double total = 0.0;
      for (double d : best_d) total += d;
      std::size_t pick = n;
      if (total > 0.0) {
        const double target = rng.uniform() * total;
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          if (best_d[j] <= 0.0) continue;
          acc += best_d[j];
          if (acc > target) {
            pick = j;
            break;
          }
        }
        if (pick == n) {
          for (std::size_t j = n; j-- > 0;)
            if (best_d[j] > 0.0) {
              pick = j;
              break;
            }
        }
      } else {
        // Every remaining point coincides with a seed; take the first unused.
        std::vector<char> used(n, 0);
        for (auto s : seeds) used[s] = 1;
        pick = static_cast<std::size_t>(std::find(used.begin(), used.end(), 0) - used.begin());
      }
      seeds.push_back(pick);
      update(pick);
    }
  }

  res.centroids.reserve(k);
  for (auto s : seeds) res.centroids.push_back(points.dense_column(s));
  // Centroids hold coordinate sums until the end; `counts` are their sizes.
  std::vector<double> c_norms(k), counts(k, 1.0);
  for (std::size_t c = 0; c < k; ++c) c_norms[c] = detail::sq_norm(res.centroids[c]);

  res.assignment.assign(n, SIZE_MAX);
  std::vector<double> dist(n, 0.0);
  std::vector<std::size_t> sizes(k);
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    bool changed = false;
    for (std::size_t j = 0; j < n; ++j) {
      const auto col = points.column(j);
      std::size_t best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = detail::sparse_mean_sq_distance(col, norms[j], res.centroids[c], c_norms[c], counts[c]);
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      dist[j] = bd;
      if (res.assignment[j] != best) {
        res.assignment[j] = best;
        changed = true;
      }
    }
    res.iterations = it + 1;

    std::fill(sizes.begin(), sizes.end(), 0);
    for (auto a : res.assignment) ++sizes[a];
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] != 0) continue;
      // Farthest point from its centroid, never the sole member of its cluster.
      std::size_t far = n;
      for (std::size_t j = 0; j < n; ++j) {
        if (sizes[res.assignment[j]] <= 1) continue;
        if (far == n || dist[j] > dist[far]) far = j;
      }
      if (far == n) break;
      --sizes[res.assignment[far]];
      res.assignment[far] = c;
      sizes[c] = 1;
      dist[far] = 0.0;
      changed = true;
    }

    if (!changed) {
      res.converged = true;
      break;
    }

    for (auto& cen : res.centroids) std::fill(cen.begin(), cen.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const auto col = points.column(j);
      auto& cen = res.centroids[res.assignment[j]];
      for (std::size_t t = 0; t < col.nnz(); ++t) cen[col.rows[t]] += col.values[t];
    }
    for (std::size_t c = 0; c < k; ++c) {
      counts[c] = static_cast<double>(sizes[c]);
      c_norms[c] = detail::sq_norm(res.centroids[c]);
    }
  }

  res.representative.assign(k, SIZE_MAX);
  res.representative_distance.assign(k, std::numeric_limits<double>::infinity());
  res.distortion = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const auto c = res.assignment[j];
    const double d = detail::sparse_mean_sq_distance(points.column(j), norms[j], res.centroids[c], c_norms[c], counts[c]);
    res.distortion += d;
    if (d < res.representative_distance[c]) {
      res.representative_distance[c] = d;
      res.representative[c] = j;
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    const double inv = 1.0 / counts[c];
    for (auto& v : res.centroids[c]) v *= inv;
  }
  return res;
}

}  // namespace sfs
