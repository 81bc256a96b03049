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
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "sfs/error.hpp"
#include "sfs/eventlog.hpp"
#include "sfs/features.hpp"
#include "sfs/rng.hpp"

namespace sfs {

struct LassoConfig {
  std::size_t runs = 10;
  std::size_t n_lambda = 50;
  double lambda_min_ratio = 1e-2;  // two decades below lambda_max
  std::size_t folds = 5;
  std::size_t max_sweeps = 10000;
  double tolerance = 1e-7;
};

// Coefficients live on the standardized scale x_j / sd_j. Centering is left
// implicit: with an unpenalized intercept it only shifts the intercept, so
// the penalized slopes are the same as for centered columns.
struct LassoFit {
  double intercept = 0.0;
  std::vector<double> beta;

  std::size_t active_count() const {
    return static_cast<std::size_t>(std::count_if(beta.begin(), beta.end(), [](double b) { return b != 0.0; }));
  }
};

// L1-penalized logistic regression, minimizing
//   (1/n) sum_i logloss(y_i, b0 + sum_j beta_j x_ij / sd_j) + lambda * |beta|_1
// by iteratively reweighted least squares with cyclic coordinate descent
// and an active-set inner loop.
class LogisticLasso {
 public:
  LogisticLasso(const FeatureMatrix& x, const LabelVector& y) : x_(x), y_(y.values().begin(), y.values().end()) {
    if (y.size() != x.n_cases()) throw Error(Errc::LengthMismatch, "labels do not match rows");
    n_ = x.n_cases();
    positives_ = y.positive_count();
    const std::size_t p = x.n_features();
    inv_sd_.assign(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
      const auto col = x.column(j);
      double s = 0.0, s2 = 0.0;
      for (auto v : col.values) {
        s += v;
        s2 += static_cast<double>(v) * v;
      }
      const double mean = s / static_cast<double>(n_);
      const double var = s2 / static_cast<double>(n_) - mean * mean;
      if (var > 1e-12) inv_sd_[j] = 1.0 / std::sqrt(var);
    }
  }

  std::size_t n_features() const noexcept { return inv_sd_.size(); }
  const std::vector<double>& inverse_sd() const noexcept { return inv_sd_; }

  // Smallest lambda at which every slope is zero.
  double lambda_max() const {
    const double ybar = static_cast<double>(positives_) / static_cast<double>(n_);
    double best = 0.0;
    for (std::size_t j = 0; j < n_features(); ++j) {
      if (inv_sd_[j] == 0.0) continue;
      const auto col = x_.column(j);
      // sum_i x_ij (y_i - ybar); the centering term vanishes because
      // sum_i (y_i - ybar) = 0.
      double g = 0.0;
      for (std::size_t t = 0; t < col.nnz(); ++t) g += col.values[t] * ((y_[col.rows[t]] ? 1.0 : 0.0) - ybar);
      best = std::max(best, std::abs(g) * inv_sd_[j] / static_cast<double>(n_));
    }
    return best;
  }

  // Geometric grid from lambda_max down by `ratio` in `count` points.
  static std::vector<double> lambda_grid(double lambda_max, std::size_t count, double ratio) {
    std::vector<double> grid(count);
    if (count == 1) {
      grid[0] = lambda_max;
      return grid;
    }
    for (std::size_t i = 0; i < count; ++i)
      grid[i] = lambda_max * std::pow(ratio, static_cast<double>(i) / static_cast<double>(count - 1));
    return grid;
  }

  // Fits along a decreasing lambda sequence with warm starts.
  std::vector<LassoFit> path(std::span<const double> lambdas, const LassoConfig& cfg) const {
    std::vector<LassoFit> fits;
    fits.reserve(lambdas.size());
    LassoFit cur;
    cur.beta.assign(n_features(), 0.0);
    const double rate = std::clamp(static_cast<double>(positives_) / static_cast<double>(n_), 1e-5, 1.0 - 1e-5);
    cur.intercept = std::log(rate / (1.0 - rate));
    const bool degenerate = positives_ == 0 || positives_ == n_;
    for (double lambda : lambdas) {
      if (!degenerate) fit_at(lambda, cur, cfg);
      fits.push_back(cur);
    }
    return fits;
  }

  // Linear predictor of `fit` on rows of `x`, which must share this
  // problem's columns.
  std::vector<double> margin(const LassoFit& fit, const FeatureMatrix& x) const {
    std::vector<double> eta(x.n_cases(), fit.intercept);
    for (std::size_t j = 0; j < n_features(); ++j) {
      if (fit.beta[j] == 0.0) continue;
      const double b = fit.beta[j] * inv_sd_[j];
      const auto col = x.column(j);
      for (std::size_t t = 0; t < col.nnz(); ++t) eta[col.rows[t]] += b * col.values[t];
    }
    return eta;
  }

 private:
  void fit_at(double lambda, LassoFit& f, const LassoConfig& cfg) const {
    const std::size_t p = n_features();
    const double dn = static_cast<double>(n_);
    std::vector<double> eta = margin(f, x_);
    std::vector<double> w(n_), r(n_), xwx(p);
    std::size_t sweeps = 0;
    for (std::size_t outer = 0; outer < 200; ++outer) {
      double wsum = 0.0;
      for (std::size_t i = 0; i < n_; ++i) {
        const double pr = 1.0 / (1.0 + std::exp(-std::clamp(eta[i], -30.0, 30.0)));
        w[i] = std::max(pr * (1.0 - pr), 1e-5);
        r[i] = ((y_[i] ? 1.0 : 0.0) - pr) / w[i];
        wsum += w[i];
      }
      for (std::size_t j = 0; j < p; ++j) {
        xwx[j] = 0.0;
        if (inv_sd_[j] == 0.0) continue;
        const auto col = x_.column(j);
        double s = 0.0;
        for (std::size_t t = 0; t < col.nnz(); ++t) {
          const double v = col.values[t] * inv_sd_[j];
          s += w[col.rows[t]] * v * v;
        }
        xwx[j] = s / dn;
      }
      const double b0_old = f.intercept;
      const std::vector<double> beta_old = f.beta;

      bool full = true;
      for (;;) {
        if (++sweeps > cfg.max_sweeps) {
          throw Error(Errc::NoConvergence, "coordinate descent exceeded " + std::to_string(cfg.max_sweeps) + " sweeps");
        }
        double max_delta = 0.0;
        double wr = 0.0;
        for (std::size_t i = 0; i < n_; ++i) wr += w[i] * r[i];
        const double d0 = wr / wsum;
        if (d0 != 0.0) {
          f.intercept += d0;
          for (auto& ri : r) ri -= d0;
          max_delta = std::abs(d0);
        }
        for (std::size_t j = 0; j < p; ++j) {
          if (xwx[j] <= 0.0) continue;
          if (!full && f.beta[j] == 0.0) continue;
          const auto col = x_.column(j);
          const double sd_inv = inv_sd_[j];
          double g = 0.0;
          for (std::size_t t = 0; t < col.nnz(); ++t) g += w[col.rows[t]] * col.values[t] * sd_inv * r[col.rows[t]];
          g = g / dn + xwx[j] * f.beta[j];
          const double shrunk = std::abs(g) > lambda ? (g > 0 ? g - lambda : g + lambda) : 0.0;
          const double nb = shrunk / xwx[j];
          const double delta = nb - f.beta[j];
          if (delta == 0.0) continue;
          for (std::size_t t = 0; t < col.nnz(); ++t) r[col.rows[t]] -= delta * col.values[t] * sd_inv;
          f.beta[j] = nb;
          max_delta = std::max(max_delta, std::abs(delta));
        }
        if (max_delta < cfg.tolerance) {
          if (full) break;
          full = true;
        } else if (full) {
          full = false;
        }
      }

      eta = margin(f, x_);
      double change = std::abs(f.intercept - b0_old);
      for (std::size_t j = 0; j < p; ++j) change = std::max(change, std::abs(f.beta[j] - beta_old[j]));
      if (change < cfg.tolerance) return;
    }
    throw Error(Errc::NoConvergence, "reweighting did not settle at lambda " + std::to_string(lambda));
  }

  const FeatureMatrix& x_;
  std::vector<std::uint8_t> y_;
  std::size_t n_ = 0;
  std::size_t positives_ = 0;
  std::vector<double> inv_sd_;
};

// Mean binomial deviance -2/n * sum log-likelihood.
inline double binomial_deviance(std::span<const double> margin, std::span<const std::uint8_t> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < margin.size(); ++i) {
    const double pr = std::clamp(1.0 / (1.0 + std::exp(-margin[i])), 1e-15, 1.0 - 1e-15);
    s += y[i] ? std::log(pr) : std::log(1.0 - pr);
  }
  return margin.empty() ? 0.0 : -2.0 * s / static_cast<double>(margin.size());
}

struct LassoCvResult {
  std::vector<double> mean_deviance;
  std::vector<double> standard_error;
  std::size_t index_min = 0;
  std::size_t index_1se = 0;
};

// K-fold cross-validated deviance along `lambdas` with seeded fold
// assignment. index_1se is the largest lambda whose mean deviance is within
// one standard error of the minimum.
inline LassoCvResult cross_validate(const FeatureMatrix& x, const LabelVector& y, std::span<const double> lambdas,
                                    std::uint64_t seed, const LassoConfig& cfg) {
  const std::size_t n = x.n_cases();
  const std::size_t k = std::min(cfg.folds, n);
  if (k < 2) throw Error(Errc::InvalidArgument, "cross-validation needs at least two folds");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(perm.begin(), perm.end());
  std::vector<std::size_t> fold_of(n);
  for (std::size_t t = 0; t < n; ++t) fold_of[perm[t]] = t % k;

  std::vector<std::vector<double>> dev(k, std::vector<double>(lambdas.size()));
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> fit_rows, held_rows;
    for (std::size_t i = 0; i < n; ++i) (fold_of[i] == f ? held_rows : fit_rows).push_back(i);
    const auto fit_x = x.select_rows(fit_rows);
    const auto held_x = x.select_rows(held_rows);
    const auto fit_y = y.subset(fit_rows);
    const auto held_y = y.subset(held_rows);
    LogisticLasso problem(fit_x, fit_y);
    const auto fits = problem.path(lambdas, cfg);
    for (std::size_t l = 0; l < lambdas.size(); ++l) {
      dev[f][l] = binomial_deviance(problem.margin(fits[l], held_x), held_y.values());
    }
  }

  LassoCvResult res;
  res.mean_deviance.assign(lambdas.size(), 0.0);
  res.standard_error.assign(lambdas.size(), 0.0);
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    double m = 0.0;
    for (std::size_t f = 0; f < k; ++f) m += dev[f][l];
    m /= static_cast<double>(k);
    double v = 0.0;
    for (std::size_t f = 0; f < k; ++f) v += (dev[f][l] - m) * (dev[f][l] - m);
    v /= static_cast<double>(k - 1);
    res.mean_deviance[l] = m;
    res.standard_error[l] = std::sqrt(v / static_cast<double>(k));
  }
  for (std::size_t l = 1; l < lambdas.size(); ++l)
    if (res.mean_deviance[l] < res.mean_deviance[res.index_min]) res.index_min = l;
  const double limit = res.mean_deviance[res.index_min] + res.standard_error[res.index_min];
  res.index_1se = res.index_min;
  for (std::size_t l = 0; l <= res.index_min; ++l) {
    if (res.mean_deviance[l] <= limit) {
      res.index_1se = l;
      break;
    }
  }
  return res;
}

}  // namespace sfs
