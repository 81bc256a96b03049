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
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "sfs/error.hpp"
#include "sfs/eventlog.hpp"
#include "sfs/features.hpp"
#include "sfs/gbm.hpp"
#include "sfs/kmeans.hpp"
#include "sfs/lasso.hpp"
#include "sfs/mutual_information.hpp"
#include "sfs/rng.hpp"

namespace sfs {

enum class Algorithm { Random, Fisher, Cluster, ClustImportance, ClustFisher, Mrmr, ClustMrmr, LassoVote, Recursive };

inline constexpr std::size_t kMrmrMaxFeatures = 46340;

struct AlgorithmSpec {
  Algorithm algorithm = Algorithm::Fisher;
  std::size_t mrmr_solutions = 5;  // Mrmr only; ClustMrmr always uses 5
  std::size_t recursive_steps = 2;

  bool supervised() const noexcept { return algorithm != Algorithm::Random && algorithm != Algorithm::Cluster; }

  std::string label() const {
    switch (algorithm) {
      case Algorithm::Random: return "Random";
      case Algorithm::Fisher: return "Fisher";
      case Algorithm::Cluster: return "Cluster";
      case Algorithm::ClustImportance: return "ClustImportance";
      case Algorithm::ClustFisher: return "ClustFisher";
      case Algorithm::Mrmr: return "mRMREns" + std::to_string(mrmr_solutions);
      case Algorithm::ClustMrmr: return "ClustmRMR";
      case Algorithm::LassoVote: return "LASSO";
      case Algorithm::Recursive: return "Rec" + std::to_string(recursive_steps) + "S";
    }
    return "?";
  }

  // Accepts labels as printed by label() and a few lowercase aliases:
  // random, fisher, cluster, clust_importance, clust_fisher, mrmr (ensemble
  // of 5), mrmr_classic (one solution), mrmr_ens<c>, clust_mrmr, lasso,
  // recursive, rec<steps>s.
  static AlgorithmSpec parse(std::string_view text) {
    std::string s;
    for (char c : text) {
      if (c == '-' || c == '_' || c == ' ') continue;
      s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    auto trailing_number = [&](std::string_view prefix, std::string_view suffix) -> std::optional<std::size_t> {
      if (s.size() <= prefix.size() + suffix.size()) return std::nullopt;
      if (s.compare(0, prefix.size(), prefix) != 0) return std::nullopt;
      if (s.compare(s.size() - suffix.size(), suffix.size(), suffix) != 0) return std::nullopt;
      const auto digits = s.substr(prefix.size(), s.size() - prefix.size() - suffix.size());
      if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }))
        return std::nullopt;
      const auto v = std::stoul(digits);
      if (v == 0) return std::nullopt;
      return v;
    };
    AlgorithmSpec spec;
    if (s == "random") {
      spec.algorithm = Algorithm::Random;
    } else if (s == "fisher") {
      spec.algorithm = Algorithm::Fisher;
    } else if (s == "cluster") {
      spec.algorithm = Algorithm::Cluster;
    } else if (s == "clustimportance") {
      spec.algorithm = Algorithm::ClustImportance;
    } else if (s == "clustfisher") {
      spec.algorithm = Algorithm::ClustFisher;
    } else if (s == "mrmr") {
      spec.algorithm = Algorithm::Mrmr;
    } else if (s == "mrmrclassic") {
      spec.algorithm = Algorithm::Mrmr;
      spec.mrmr_solutions = 1;
    } else if (auto c = trailing_number("mrmrens", "")) {
      spec.algorithm = Algorithm::Mrmr;
      spec.mrmr_solutions = *c;
    } else if (s == "clustmrmr") {
      spec.algorithm = Algorithm::ClustMrmr;
    } else if (s == "lasso" || s == "lassovote" || s == "lasso1se") {
      spec.algorithm = Algorithm::LassoVote;
    } else if (s == "recursive") {
      spec.algorithm = Algorithm::Recursive;
    } else if (auto st = trailing_number("rec", "s")) {
      spec.algorithm = Algorithm::Recursive;
      spec.recursive_steps = *st;
    } else {
      throw Error(Errc::InvalidArgument, "unknown algorithm '" + std::string(text) + "'");
    }
    return spec;
  }

  friend bool operator==(const AlgorithmSpec&, const AlgorithmSpec&) = default;
};

struct SelectionParams {
  unsigned mi_bins = kDefaultMiBins;
  bool miller_madow = false;
  GbmConfig importance_gbm{};
  std::size_t importance_repeats = 3;
  double importance_holdout = 0.3;
  LassoConfig lasso{};
  KMeansOptions kmeans{};
};

struct SelectionRequest {
  const FeatureMatrix& matrix;
  const LabelVector& labels;
  std::size_t k = 10;
  std::uint64_t seed = 0;
  AlgorithmSpec algorithm{};
  SelectionParams params{};
};

struct SelectionResult {
  std::vector<std::size_t> selected;
  std::vector<double> scores;  // aligned with selected
  std::optional<std::vector<std::size_t>> cluster_map;  // over all input features
  std::chrono::nanoseconds elapsed{0};
};

namespace detail {

inline void check_request(const FeatureMatrix& m, const LabelVector& y, std::size_t k, bool supervised) {
  if (k == 0) throw Error(Errc::InvalidArgument, "k must be at least 1");
  if (y.size() != m.n_cases()) {
    throw Error(Errc::LengthMismatch, "labels have " + std::to_string(y.size()) + " entries, matrix has " +
                                          std::to_string(m.n_cases()) + " cases");
  }
  if (supervised && !y.has_both_classes()) throw Error(Errc::SingleClassLabels, "both classes must be present");
}

// Indices sorted by score descending, ties to the lower index.
inline std::vector<std::size_t> rank_by_score(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
  return order;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  std::chrono::nanoseconds elapsed() const {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start_);
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

// Random

inline SelectionResult select_random(const SelectionRequest& req) {
  detail::Stopwatch clock;
  detail::check_request(req.matrix, req.labels, req.k, false);
  const std::size_t n = req.matrix.n_features();
  const std::size_t k = std::min(req.k, n);
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  Rng rng(req.seed);
  SelectionResult res;
  for (std::size_t t = 0; t < k; ++t) {
    const auto pick = t + static_cast<std::size_t>(rng.below(n - t));
    std::swap(pool[t], pool[pick]);
    res.selected.push_back(pool[t]);
  }
  res.scores.assign(k, 0.0);
  res.elapsed = clock.elapsed();
  return res;
}

// Fisher

// Two-class Fisher score with population variances. A class whose values
// are all equal has variance exactly 0, so perfect separators reach the
// infinity sentinel without rounding noise.
inline double fisher_score(std::span<const double> x, std::span<const std::uint8_t> y) {
  if (x.size() != y.size()) throw Error(Errc::LengthMismatch, "column and labels differ in length");
  double n_c[2] = {0, 0}, sum[2] = {0, 0};
  double lo[2] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  double hi[2] = {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int c = y[i] ? 1 : 0;
    n_c[c] += 1;
    sum[c] += x[i];
    lo[c] = std::min(lo[c], x[i]);
    hi[c] = std::max(hi[c], x[i]);
  }
  if (n_c[0] == 0 || n_c[1] == 0) throw Error(Errc::SingleClassLabels, "both classes must be present");
  if (std::min(lo[0], lo[1]) == std::max(hi[0], hi[1])) return 0.0;
  const double mu[2] = {sum[0] / n_c[0], sum[1] / n_c[1]};
  double var[2] = {0, 0};
  for (int c = 0; c < 2; ++c) {
    if (lo[c] == hi[c]) continue;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if ((y[i] ? 1 : 0) != c) continue;
      ss += (x[i] - mu[c]) * (x[i] - mu[c]);
    }
    var[c] = ss / n_c[c];
  }
  // sum_c n_c (mu_c - mu)^2 equals n0 n1 (mu0 - mu1)^2 / n.
  const double diff = mu[0] - mu[1];
  const double num = n_c[0] * n_c[1] * diff * diff / (n_c[0] + n_c[1]);
  const double den = n_c[0] * var[0] + n_c[1] * var[1];
  if (den == 0.0) return num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return num / den;
}

inline std::vector<double> fisher_scores(const FeatureMatrix& m, const LabelVector& y) {
  if (y.size() != m.n_cases()) throw Error(Errc::LengthMismatch, "labels do not match rows");
  if (!y.has_both_classes()) throw Error(Errc::SingleClassLabels, "both classes must be present");
  const auto yv = y.values();
  const double n_c[2] = {static_cast<double>(y.negative_count()), static_cast<double>(y.positive_count())};
  std::vector<double> out(m.n_features());
  for (std::size_t j = 0; j < m.n_features(); ++j) {
    // Same quantities as fisher_score, read from the non-zeros only; the
    // implicit zeros of each class are added back in closed form.
    const auto col = m.column(j);
    double sum[2] = {0, 0}, nz[2] = {0, 0};
    double lo[2] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    double hi[2] = {0, 0};
    for (std::size_t t = 0; t < col.nnz(); ++t) {
      const int c = yv[col.rows[t]] ? 1 : 0;
      const double v = col.values[t];
      sum[c] += v;
      nz[c] += 1;
      lo[c] = std::min(lo[c], v);
      hi[c] = std::max(hi[c], v);
    }
    for (int c = 0; c < 2; ++c)
      if (nz[c] < n_c[c]) lo[c] = 0.0;
    if (std::min(lo[0], lo[1]) == std::max(hi[0], hi[1])) {
      out[j] = 0.0;
      continue;
    }
    const double mu[2] = {sum[0] / n_c[0], sum[1] / n_c[1]};
    double ss[2] = {0, 0};
    for (int c = 0; c < 2; ++c) ss[c] = lo[c] == hi[c] ? 0.0 : (n_c[c] - nz[c]) * mu[c] * mu[c];
    for (std::size_t t = 0; t < col.nnz(); ++t) {
      const int c = yv[col.rows[t]] ? 1 : 0;
      if (lo[c] == hi[c]) continue;
      const double d = col.values[t] - mu[c];
      ss[c] += d * d;
    }
    const double diff = mu[0] - mu[1];
    const double num = n_c[0] * n_c[1] * diff * diff / (n_c[0] + n_c[1]);
    const double den = ss[0] + ss[1];
    out[j] = den == 0.0 ? (num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0) : num / den;
  }
  return out;
}

namespace detail {

inline SelectionResult fisher_top_k(const FeatureMatrix& m, const LabelVector& y, std::size_t k) {
  const auto scores = fisher_scores(m, y);
  const auto order = rank_by_score(scores);
  SelectionResult res;
  for (std::size_t t = 0; t < std::min(k, order.size()); ++t) {
    res.selected.push_back(order[t]);
    res.scores.push_back(scores[order[t]]);
  }
  return res;
}

}  // namespace detail

inline SelectionResult select_fisher(const SelectionRequest& req) {
  detail::Stopwatch clock;
  detail::check_request(req.matrix, req.labels, req.k, true);
  auto res = detail::fisher_top_k(req.matrix, req.labels, req.k);
  res.elapsed = clock.elapsed();
  return res;
}

// Clustering

namespace detail {

struct ClusterStage {
  std::vector<std::size_t> representatives;  // original indices, ascending
  std::vector<double> distance;              // Euclidean distance to centroid, aligned
  std::vector<std::size_t> map;              // every original column -> its representative
};

inline ClusterStage cluster_stage(const FeatureMatrix& m, std::size_t k, std::uint64_t seed,
                                  const KMeansOptions& options) {
  ClusterStage out;
  if (m.n_features() == 0) return out;
  auto [distinct, dmap] = dedup(m);
  const std::size_t kk = std::min(k, distinct.n_features());
  const auto km = kmeans(distinct, kk, seed, options);

  std::vector<std::size_t> rep_of_cluster(kk);
  std::vector<std::pair<std::size_t, double>> reps;
  for (std::size_t c = 0; c < kk; ++c) {
    rep_of_cluster[c] = dmap.survivors[km.representative[c]];
    reps.emplace_back(rep_of_cluster[c], std::sqrt(km.representative_distance[c]));
  }
  std::sort(reps.begin(), reps.end());
  for (auto [r, d] : reps) {
    out.representatives.push_back(r);
    out.distance.push_back(d);
  }
  out.map.resize(m.n_features());
  for (std::size_t j = 0; j < m.n_features(); ++j) {
    out.map[j] = rep_of_cluster[km.assignment[dmap.output_index(j)]];
  }
  return out;
}

inline double column_sq_distance(const FeatureMatrix& m, std::size_t a, std::size_t b) {
  const auto ca = m.column(a), cb = m.column(b);
  double s = 0.0;
  std::size_t i = 0, t = 0;
  while (i < ca.nnz() || t < cb.nnz()) {
    if (t == cb.nnz() || (i < ca.nnz() && ca.rows[i] < cb.rows[t])) {
      s += static_cast<double>(ca.values[i]) * ca.values[i];
      ++i;
    } else if (i == ca.nnz() || cb.rows[t] < ca.rows[i]) {
      s += static_cast<double>(cb.values[t]) * cb.values[t];
      ++t;
    } else {
      const double d = static_cast<double>(ca.values[i]) - static_cast<double>(cb.values[t]);
      s += d * d;
      ++i;
      ++t;
    }
  }
  return s;
}

// Points every column of a cluster map at a finally selected column: kept
// representatives stay, dropped ones go to the selected column nearest to
// them (ties to the lower index).
inline std::vector<std::size_t> remap_to_selected(const FeatureMatrix& m, const std::vector<std::size_t>& map,
                                                  std::span<const std::size_t> selected) {
  std::vector<std::size_t> sorted_sel(selected.begin(), selected.end());
  std::sort(sorted_sel.begin(), sorted_sel.end());
  std::vector<std::size_t> target(m.n_features(), SIZE_MAX);
  for (auto s : sorted_sel) target[s] = s;
  std::vector<std::size_t> out(map.size());
  for (std::size_t j = 0; j < map.size(); ++j) {
    const auto r = map[j];
    if (target[r] == SIZE_MAX) {
      double best = std::numeric_limits<double>::infinity();
      for (auto s : sorted_sel) {
        const double d = column_sq_distance(m, r, s);
        if (d < best) {
          best = d;
          target[r] = s;
        }
      }
    }
    out[j] = target[r];
  }
  return out;
}

}  // namespace detail

// Unsupervised: labels are only checked for length.
inline SelectionResult select_cluster(const SelectionRequest& req) {
  detail::Stopwatch clock;
  detail::check_request(req.matrix, req.labels, req.k, false);
  auto stage = detail::cluster_stage(req.matrix, req.k, req.seed, req.params.kmeans);
  SelectionResult res;
  res.selected = std::move(stage.representatives);
  for (double d : stage.distance) res.scores.push_back(d == 0.0 ? 0.0 : -d);
  res.cluster_map = std::move(stage.map);
  res.elapsed = clock.elapsed();
  return res;
}

// Importance

namespace detail {

// Permutation importance of `cols` on an internal GBM trained on part of
// the rows and scored on the held-out rest. Aligned with `cols`.
inline std::vector<double> importance_scores(const FeatureMatrix& m, const LabelVector& y,
                                             std::span<const std::size_t> cols, std::uint64_t seed,
                                             const SelectionParams& p) {
  const auto sub = m.select_columns(cols);
  const auto split = split_train_test(m.n_cases(), 1.0 - p.importance_holdout, mix_seed(seed, 0x1F));
  const auto fit_y = y.subset(split.train);
  const auto held_y = y.subset(split.test);
  if (!fit_y.has_both_classes()) {
    throw Error(Errc::SingleClassLabels, "importance fitting rows hold a single class");
  }
  auto cfg = p.importance_gbm;
  cfg.seed = mix_seed(seed, 0x2F);
  const auto model = train_gbm(sub.select_rows(split.train), fit_y, cfg);
  return permutation_importance(model, sub.select_rows(split.test), held_y, mix_seed(seed, 0x3F),
                                p.importance_repeats);
}

// Candidates ordered by importance descending; ties keep candidate order.
inline std::pair<std::vector<std::size_t>, std::vector<double>> rank_by_importance(
    const FeatureMatrix& m, const LabelVector& y, std::span<const std::size_t> cols, std::uint64_t seed,
    const SelectionParams& p) {
  const auto imp = importance_scores(m, y, cols, seed, p);
  const auto order = rank_by_score(imp);
  std::vector<std::size_t> ranked;
  std::vector<double> scores;
  for (auto t : order) {
    ranked.push_back(cols[t]);
    scores.push_back(imp[t]);
  }
  return {ranked, scores};
}

}  // namespace detail

inline std::size_t clust_importance_stage_size(std::size_t n_features, std::size_t k) {
  return std::max(k, (n_features + 3) / 4);
}

inline SelectionResult select_clust_importance(const SelectionRequest& req) {
  detail::Stopwatch clock;
  detail::check_request(req.matrix, req.labels, req.k, true);
  const auto& m = req.matrix;
  const std::size_t n = m.n_features();
  SelectionResult res;
  std::vector<std::size_t> survivors;
  std::optional<detail::ClusterStage> stage;
  const std::size_t kk = clust_importance_stage_size(n, req.k);
  if (kk < n) {
    stage = detail::cluster_stage(m, kk, req.seed, req.params.kmeans);
    survivors = stage->representatives;
  } else {
    survivors.resize(n);
    std::iota(survivors.begin(), survivors.end(), std::size_t{0});
  }
  if (!survivors.empty()) {
    auto [ranked, scores] = detail::rank_by_importance(m, req.labels, survivors, req.seed, req.params);
    for (std::size_t t = 0; t < std::min(req.k, ranked.size()); ++t) {
      res.selected.push_back(ranked[t]);
      res.scores.push_back(scores[t]);
    }
  }
  if (stage) res.cluster_map = detail::remap_to_selected(m, stage->map, res.selected);
  res.elapsed = clock.elapsed();
  return res;
}

// mRMR

namespace detail {

inline DiscreteColumn discretize_rows(const std::vector<double>& column, std::span<const std::size_t> rows,
                                      unsigned bins) {
  std::vector<double> v(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) v[i] = column[rows[i]];
  return discretize(v, bins);
}

inline DiscreteColumn label_column(const LabelVector& y, std::span<const std::size_t> rows) {
  DiscreteColumn out;
  out.levels = 2;
  out.codes.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out.codes[i] = y[rows[i]] ? 1 : 0;
  return out;
}

// Classic MID greedy: relevance minus mean redundancy with the picks so far,
// ties to the lower index.
inline std::vector<std::size_t> mrmr_greedy(const std::vector<DiscreteColumn>& cols, const DiscreteColumn& y,
                                            std::size_t k, bool miller_madow,
                                            std::vector<double>* relevance_out = nullptr) {
  const std::size_t n = cols.size();
  k = std::min(k, n);
  MiScratch scratch;
  std::vector<double> relevance(n), redundancy(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) relevance[j] = mutual_information(cols[j], y, miller_madow, scratch);
  std::vector<char> taken(n, 0);
  std::vector<std::size_t> picked;
  while (picked.size() < k) {
    std::size_t best = n;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (taken[j]) continue;
      const double score =
          picked.empty() ? relevance[j] : relevance[j] - redundancy[j] / static_cast<double>(picked.size());
      if (best == n || score > best_score) {
        best = j;
        best_score = score;
      }
    }
    taken[best] = 1;
    picked.push_back(best);
    if (picked.size() == k) break;
    for (std::size_t j = 0; j < n; ++j) {
      if (!taken[j]) redundancy[j] += mutual_information(cols[j], cols[best], miller_madow, scratch);
    }
  }
  if (relevance_out) *relevance_out = std::move(relevance);
  return picked;
}

inline SelectionResult mrmr_select(const FeatureMatrix& m, const LabelVector& y, std::size_t k, std::uint64_t seed,
                                   std::size_t solutions, const SelectionParams& p) {
  if (solutions == 0) throw Error(Errc::InvalidArgument, "mRMR needs at least one solution");
  const std::size_t n = m.n_features();
  if (n > kMrmrMaxFeatures) {
    throw Error(Errc::InvalidArgument, "mRMR supports at most " + std::to_string(kMrmrMaxFeatures) +
                                           " features, got " + std::to_string(n));
  }
  const std::size_t rows = m.n_cases();
  std::vector<std::size_t> all_rows(rows);
  std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});
  std::vector<std::vector<double>> dense(n);
  for (std::size_t j = 0; j < n; ++j) dense[j] = m.dense_column(j);

  auto columns_for = [&](std::span<const std::size_t> r) {
    std::vector<DiscreteColumn> cols(n);
    for (std::size_t j = 0; j < n; ++j) cols[j] = discretize_rows(dense[j], r, p.mi_bins);
    return cols;
  };

  const auto full_cols = columns_for(all_rows);
  const auto full_y = label_column(y, all_rows);
  std::vector<double> relevance;
  SelectionResult res;
  if (solutions == 1) {
    res.selected = mrmr_greedy(full_cols, full_y, k, p.miller_madow, &relevance);
  } else {
    MiScratch scratch;
    relevance.resize(n);
    for (std::size_t j = 0; j < n; ++j) relevance[j] = mutual_information(full_cols[j], full_y, p.miller_madow, scratch);
    std::vector<std::size_t> freq(n, 0), rank_sum(n, 0);
    std::vector<std::size_t> sample(rows);
    for (std::size_t run = 0; run < solutions; ++run) {
      Rng rng(mix_seed(seed, run));
      for (auto& s : sample) s = static_cast<std::size_t>(rng.below(rows));
      const auto picks = mrmr_greedy(columns_for(sample), label_column(y, sample), k, p.miller_madow);
      for (std::size_t r = 0; r < picks.size(); ++r) {
        ++freq[picks[r]];
        rank_sum[picks[r]] += r;
      }
    }
    std::vector<std::size_t> seen;
    for (std::size_t j = 0; j < n; ++j)
      if (freq[j] > 0) seen.push_back(j);
    // Mean ranks compared exactly by cross-multiplication.
    std::stable_sort(seen.begin(), seen.end(), [&](auto a, auto b) {
      if (freq[a] != freq[b]) return freq[a] > freq[b];
      return rank_sum[a] * freq[b] < rank_sum[b] * freq[a];
    });
    seen.resize(std::min(seen.size(), k));
    res.selected = std::move(seen);
  }
  for (auto j : res.selected) res.scores.push_back(relevance[j]);
  return res;
}

}  // namespace detail

inline SelectionResult select_mrmr(const SelectionRequest& req, std::size_t solutions) {
  detail::Stopwatch clock;
  detail::check_request(req.matrix, req.labels, req.k, true);
  auto res = detail::mrmr_select(req.matrix, req.labels, req.k, req.seed, solutions, req.params);
  res.elapsed = clock.elapsed();
  return res;
}

inline SelectionResult select_mrmr(const SelectionRequest& req) {
  return select_mrmr(req, req.algorithm.mrmr_solutions);
}

// Hybrids: cluster down to 2k, then a supervised pick of k. With at most 2k
// features the clustering step is skipped.

namespace detail {

template <typename Stage2>
SelectionResult cluster_then(const SelectionRequest& req, Stage2&& stage2) {
  const auto& m = req.matrix;
  if (m.n_features() <= 2 * req.k) return stage2(m);
  auto stage = cluster_stage(m, 2 * req.k, req.seed, req.params.kmeans);
  const auto sub = m.select_columns(stage.representatives);
  auto inner = stage2(sub);
  SelectionResult res;
  for (std::size_t t = 0; t < inner.selected.size(); ++t) {
    res.selected.push_back(stage.representatives[inner.selected[t]]);
    res.scores.push_back(inner.scores[t]);
  }
  res.cluster_map = remap_to_selected(m, stage.map, res.selected);
  return res;
}

}  // namespace detail

inline SelectionResult select_clust_fisher(const SelectionRequest& req) {
  detail::Stopwatch clock;
  detail::check_request(req.matrix, req.labels, req.k, true);
  auto res = detail::cluster_then(req, [&](const FeatureMatrix& m) { return detail::fisher_top_k(m, req.labels, req.k); });
  res.elapsed = clock.elapsed();
  return res;
}

inline SelectionResult select_clust_mrmr(const SelectionRequest& req) {
  detail::Stopwatch clock;
  detail::check_request(req.matrix, req.labels, req.k, true);
  auto res = detail::cluster_then(
      req, [&](const FeatureMatrix& m) { return detail::mrmr_select(m, req.labels, req.k, req.seed, 5, req.params); });
  res.elapsed = clock.elapsed();
  return res;
}

// LASSO vote

struct LassoVoteDetail {
  std::vector<double> lambdas;
  std::vector<std::size_t> chosen_index;  // lambda.1se index per run
  std::vector<std::size_t> votes;         // per feature
};

inline SelectionResult select_lasso_vote(const SelectionRequest& req, LassoVoteDetail* detail_out = nullptr) {
  detail::Stopwatch clock;
  detail::check_request(req.matrix, req.labels, req.k, true);
  const auto& cfg = req.params.lasso;
  const auto& m = req.matrix;
  const std::size_t n = m.n_features();
  LogisticLasso problem(m, req.labels);
  const double lmax = problem.lambda_max();
  SelectionResult res;
  LassoVoteDetail info;
  info.votes.assign(n, 0);
  if (lmax > 0.0) {
    info.lambdas = LogisticLasso::lambda_grid(lmax, cfg.n_lambda, cfg.lambda_min_ratio);
    const auto path = problem.path(info.lambdas, cfg);
    std::vector<double> abs_sum(n, 0.0);
    for (std::size_t run = 0; run < cfg.runs; ++run) {
      const auto cv = cross_validate(m, req.labels, info.lambdas, mix_seed(req.seed, run), cfg);
      info.chosen_index.push_back(cv.index_1se);
      const auto& fit = path[cv.index_1se];
      for (std::size_t j = 0; j < n; ++j) {
        if (fit.beta[j] == 0.0) continue;
        ++info.votes[j];
        abs_sum[j] += std::abs(fit.beta[j]);
      }
    }
    std::vector<std::size_t> voted;
    for (std::size_t j = 0; j < n; ++j)
      if (info.votes[j] > 0) voted.push_back(j);
    std::stable_sort(voted.begin(), voted.end(), [&](auto a, auto b) {
      if (info.votes[a] != info.votes[b]) return info.votes[a] > info.votes[b];
      return abs_sum[a] / static_cast<double>(info.votes[a]) > abs_sum[b] / static_cast<double>(info.votes[b]);
    });
    for (std::size_t t = 0; t < std::min(req.k, voted.size()); ++t) {
      res.selected.push_back(voted[t]);
      res.scores.push_back(static_cast<double>(info.votes[voted[t]]));
    }
  }
  if (detail_out) *detail_out = std::move(info);
  res.elapsed = clock.elapsed();
  return res;
}

// Recursive elimination

// Subset sizes after each round: ceil(n (k/n)^(r/steps)), strictly
// decreasing, ending at k.
inline std::vector<std::size_t> recursive_schedule(std::size_t n, std::size_t k, std::size_t steps) {
  if (steps == 0) throw Error(Errc::InvalidArgument, "recursive selection needs at least one step");
  if (n <= k) return {n};
  std::vector<std::size_t> sizes;
  std::size_t prev = n;
  for (std::size_t r = 1; r < steps; ++r) {
    const double raw = static_cast<double>(n) *
                       std::pow(static_cast<double>(k) / static_cast<double>(n),
                                static_cast<double>(r) / static_cast<double>(steps));
    auto s = static_cast<std::size_t>(std::ceil(raw - 1e-9));
    s = std::min(s, prev - 1);
    if (s <= k) break;
    sizes.push_back(s);
    prev = s;
  }
  sizes.push_back(k);
  return sizes;
}

inline SelectionResult select_recursive(const SelectionRequest& req, std::size_t steps) {
  detail::Stopwatch clock;
  detail::check_request(req.matrix, req.labels, req.k, true);
  const auto& m = req.matrix;
  std::vector<std::size_t> current(m.n_features());
  std::iota(current.begin(), current.end(), std::size_t{0});
  SelectionResult res;
  if (current.empty()) {
    res.elapsed = clock.elapsed();
    return res;
  }
  const auto sizes = recursive_schedule(m.n_features(), req.k, steps);
  std::vector<std::size_t> ranked;
  std::vector<double> scores;
  for (std::size_t round = 0; round < sizes.size(); ++round) {
    std::tie(ranked, scores) = detail::rank_by_importance(m, req.labels, current, mix_seed(req.seed, round), req.params);
    ranked.resize(sizes[round]);
    scores.resize(sizes[round]);
    current = ranked;
    std::sort(current.begin(), current.end());
  }
  res.selected = std::move(ranked);
  res.scores = std::move(scores);
  res.elapsed = clock.elapsed();
  return res;
}

inline SelectionResult select_recursive(const SelectionRequest& req) {
  return select_recursive(req, req.algorithm.recursive_steps);
}

inline SelectionResult select(const SelectionRequest& req) {
  switch (req.algorithm.algorithm) {
    case Algorithm::Random: return select_random(req);
    case Algorithm::Fisher: return select_fisher(req);
    case Algorithm::Cluster: return select_cluster(req);
    case Algorithm::ClustImportance: return select_clust_importance(req);
    case Algorithm::ClustFisher: return select_clust_fisher(req);
    case Algorithm::Mrmr: return select_mrmr(req);
    case Algorithm::ClustMrmr: return select_clust_mrmr(req);
    case Algorithm::LassoVote: return select_lasso_vote(req);
    case Algorithm::Recursive: return select_recursive(req);
  }
  throw Error(Errc::InvalidArgument, "unknown algorithm");
}

}  // namespace sfs
