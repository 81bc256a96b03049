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
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "sfs/error.hpp"
#include "sfs/eventlog.hpp"
#include "sfs/features.hpp"
#include "sfs/rng.hpp"

namespace sfs {

struct GbmConfig {
  std::size_t rounds = 100;
  double learning_rate = 0.1;
  std::size_t max_depth = 3;
  std::size_t min_leaf = 5;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(learning_rate > 0.0 && learning_rate <= 1.0))
      throw Error(Errc::InvalidArgument, "learning_rate must be in (0, 1]");
    if (max_depth == 0) throw Error(Errc::InvalidArgument, "max_depth must be positive");
    if (min_leaf == 0) throw Error(Errc::InvalidArgument, "min_leaf must be positive");
  }
};

// Internal nodes send rows with value < threshold left.
struct TreeNode {
  std::int32_t feature = -1;  // index into GbmModel::features; -1 for leaves
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;

  bool is_leaf() const noexcept { return feature < 0; }
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  template <class ValueOf>
  double eval(ValueOf&& value_of) const {
    std::size_t at = 0;
    while (!nodes[at].is_leaf()) {
      const auto& n = nodes[at];
      at = static_cast<std::size_t>(value_of(static_cast<std::size_t>(n.feature)) < n.threshold ? n.left : n.right);
    }
    return nodes[at].value;
  }

  std::size_t leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](auto& n) { return n.is_leaf(); }));
  }
};

struct GbmModel {
  double base_score = 0.0;
  double learning_rate = 0.1;
  std::vector<FeatureDescriptor> features;  // columns the model was trained on
  std::vector<std::string> feature_names;
  std::vector<RegressionTree> trees;
  std::vector<double> train_loss;  // mean logistic loss before round 1 and after each round

  // Sorted indices (into `features`) referenced by at least one split.
  std::vector<std::size_t> used_features() const {
    std::vector<char> used(features.size(), 0);
    for (const auto& t : trees)
      for (const auto& n : t.nodes)
        if (!n.is_leaf()) used[static_cast<std::size_t>(n.feature)] = 1;
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < used.size(); ++j)
      if (used[j]) out.push_back(j);
    return out;
  }
};

struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::size_t total() const noexcept { return tp + fp + fn + tn; }
};

struct EvalMetrics {
  double accuracy = 0.0;
  ConfusionMatrix confusion;
  std::chrono::nanoseconds train_elapsed{0};
  std::chrono::nanoseconds predict_elapsed{0};
};

struct TrainTestSplit {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

// Seeded uniform split; the training side gets round(fraction * n) rows.
inline TrainTestSplit split_train_test(std::size_t n, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw Error(Errc::InvalidArgument, "train fraction must be in (0, 1)");
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (n < 2 || n_train == 0 || n_train >= n) {
    throw Error(Errc::DegenerateSplit, std::to_string(n) + " rows at fraction " + std::to_string(train_fraction));
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(idx.begin(), idx.end());
  TrainTestSplit s;
  s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

inline double sigmoid(double margin) {
  // Clamped so probabilities stay strictly inside (0, 1) in double precision.
  margin = std::clamp(margin, -30.0, 30.0);
  return 1.0 / (1.0 + std::exp(-margin));
}

namespace detail {

inline double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

inline double mean_logistic_loss(std::span<const double> margin, std::span<const std::uint8_t> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < margin.size(); ++i) s += y[i] ? softplus(-margin[i]) : softplus(margin[i]);
  return margin.empty() ? 0.0 : s / static_cast<double>(margin.size());
}

// Mean logistic loss that also stores exp(-|margin_i|) in `e`, from which
// both the loss term and the probability of row i follow.
inline double logistic_loss_terms(std::span<const double> margin, std::span<const std::uint8_t> y,
                                  std::vector<double>& e) {
  double s = 0.0;
  for (std::size_t i = 0; i < margin.size(); ++i) {
    const double m = y[i] ? -margin[i] : margin[i];
    e[i] = std::exp(-std::abs(m));
    s += std::max(m, 0.0) + std::log1p(e[i]);
  }
  return margin.empty() ? 0.0 : s / static_cast<double>(margin.size());
}

// sigmoid(margin) given e = exp(-|margin|), clamped like sigmoid().
inline double probability_from(double margin, double e) {
  constexpr double kFloor = 9.357622968840175e-14;  // exp(-30)
  e = std::max(e, kFloor);
  return margin >= 0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
}

// Training column in bin form: sorted distinct values over the training
// rows, with a bin index per stored non-zero.
struct BinnedColumn {
  std::vector<std::uint32_t> distinct;
  std::vector<std::uint32_t> nz_bin;
  bool has_zero = false;
};

inline BinnedColumn bin_column(const FeatureMatrix::Column& col, std::size_t n_rows) {
  BinnedColumn b;
  b.has_zero = col.nnz() < n_rows;
  b.distinct.assign(col.values.begin(), col.values.end());
  if (b.has_zero) b.distinct.push_back(0);
  std::sort(b.distinct.begin(), b.distinct.end());
  b.distinct.erase(std::unique(b.distinct.begin(), b.distinct.end()), b.distinct.end());
  b.nz_bin.reserve(col.nnz());
  for (auto v : col.values) {
    b.nz_bin.push_back(static_cast<std::uint32_t>(std::lower_bound(b.distinct.begin(), b.distinct.end(), v) -
                                                  b.distinct.begin()));
  }
  return b;
}

struct SplitChoice {
  double gain = 0.0;
  std::int32_t feature = -1;
  double threshold = 0.0;
};

inline RegressionTree grow_tree(const FeatureMatrix& x, const std::vector<BinnedColumn>& bins,
                                std::span<const double> residual, std::span<const double> hessian,
                                const GbmConfig& cfg, std::vector<std::int32_t>& node_of) {
  const std::size_t n = x.n_cases();
  RegressionTree tree;
  tree.nodes.push_back(TreeNode{});
  std::fill(node_of.begin(), node_of.end(), 0);
  std::vector<std::int32_t> frontier{0};
  std::vector<std::int32_t> slot_of_node;
  std::vector<std::int32_t> row_slot(n);
  std::vector<double> acc_r;
  std::vector<std::uint32_t> acc_c;

  for (std::size_t depth = 0; depth < cfg.max_depth && !frontier.empty(); ++depth) {
    const std::size_t slots = frontier.size();
    slot_of_node.assign(tree.nodes.size(), -1);
    for (std::size_t s = 0; s < slots; ++s) slot_of_node[static_cast<std::size_t>(frontier[s])] = static_cast<std::int32_t>(s);
    std::vector<double> tot_r(slots, 0.0);
    std::vector<std::size_t> tot_c(slots, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto s = slot_of_node[static_cast<std::size_t>(node_of[i])];
      row_slot[i] = s;
      if (s >= 0) {
        tot_r[static_cast<std::size_t>(s)] += residual[i];
        ++tot_c[static_cast<std::size_t>(s)];
      }
    }
    std::vector<SplitChoice> best(slots);

    for (std::size_t j = 0; j < x.n_features(); ++j) {
      const auto& b = bins[j];
      const std::size_t nb = b.distinct.size();
      if (nb < 2) continue;
      acc_r.assign(slots * nb, 0.0);
      acc_c.assign(slots * nb, 0);
      const auto col = x.column(j);
      for (std::size_t t = 0; t < col.nnz(); ++t) {
        const auto s = row_slot[col.rows[t]];
        if (s < 0) continue;
        const auto cell = static_cast<std::size_t>(s) * nb + b.nz_bin[t];
        acc_r[cell] += residual[col.rows[t]];
        ++acc_c[cell];
      }
      for (std::size_t s = 0; s < slots; ++s) {
        const std::size_t nn = tot_c[s];
        if (nn < 2 * cfg.min_leaf) continue;
        double* r = acc_r.data() + s * nb;
        std::uint32_t* c = acc_c.data() + s * nb;
        if (b.has_zero) {
          double rr = tot_r[s];
          std::size_t cc = nn;
          for (std::size_t q = 1; q < nb; ++q) {
            rr -= r[q];
            cc -= c[q];
          }
          r[0] = rr;
          c[0] = static_cast<std::uint32_t>(cc);
        }
        const double parent = tot_r[s] * tot_r[s] / static_cast<double>(nn);
        double left_r = 0.0;
        std::size_t left_c = 0;
        std::size_t prev = nb;  // last non-empty bin
        for (std::size_t q = 0; q < nb; ++q) {
          if (c[q] == 0) continue;
          if (prev != nb && left_c >= cfg.min_leaf && nn - left_c >= cfg.min_leaf) {
            const double right_r = tot_r[s] - left_r;
            const double gain = left_r * left_r / static_cast<double>(left_c) +
                                right_r * right_r / static_cast<double>(nn - left_c) - parent;
            if (gain > best[s].gain && gain > 1e-12) {
              best[s] = {gain, static_cast<std::int32_t>(j),
                         (static_cast<double>(b.distinct[prev]) + static_cast<double>(b.distinct[q])) / 2.0};
            }
          }
          left_r += r[q];
          left_c += c[q];
          prev = q;
        }
      }
    }

    std::vector<std::int32_t> next;
    std::vector<std::int32_t> left_of(slots, -1);
    for (std::size_t s = 0; s < slots; ++s) {
      if (best[s].feature < 0) continue;
      const auto node = frontier[s];
      const auto left = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.push_back(TreeNode{});
      tree.nodes.push_back(TreeNode{});
      auto& nd = tree.nodes[static_cast<std::size_t>(node)];
      nd.feature = best[s].feature;
      nd.threshold = best[s].threshold;
      nd.left = left;
      nd.right = left + 1;
      next.push_back(left);
      next.push_back(left + 1);
      left_of[s] = left;
    }
    // Rows of split nodes go left, then the column scan moves rows at or
    // above the threshold to the right child.
    for (std::size_t i = 0; i < n; ++i) {
      const auto s = row_slot[i];
      if (s >= 0 && left_of[static_cast<std::size_t>(s)] >= 0) node_of[i] = left_of[static_cast<std::size_t>(s)];
    }
    for (std::size_t s = 0; s < slots; ++s) {
      if (best[s].feature < 0) continue;
      const auto left = left_of[s];
      const auto col = x.column(static_cast<std::size_t>(best[s].feature));
      for (std::size_t t = 0; t < col.nnz(); ++t) {
        const auto i = col.rows[t];
        if (row_slot[i] == static_cast<std::int32_t>(s) && col.values[t] >= best[s].threshold) node_of[i] = left + 1;
      }
    }
    frontier = std::move(next);
  }

  // Newton leaf values.
  std::vector<double> sum_r(tree.nodes.size(), 0.0), sum_h(tree.nodes.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    sum_r[static_cast<std::size_t>(node_of[i])] += residual[i];
    sum_h[static_cast<std::size_t>(node_of[i])] += hessian[i];
  }
  for (std::size_t q = 0; q < tree.nodes.size(); ++q) {
    if (tree.nodes[q].is_leaf()) tree.nodes[q].value = sum_h[q] > 1e-12 ? sum_r[q] / sum_h[q] : 0.0;
  }
  return tree;
}

}  // namespace detail

// Logistic-loss gradient boosting on all columns of `train`. Each round fits
// a depth-limited least-squares tree to the residuals y - p, sets leaf
// values by a Newton step and adds them scaled by the learning rate. If a
// round would raise the training loss its leaf values are halved until it
// does not.
inline GbmModel train_gbm(const FeatureMatrix& train, const LabelVector& labels, const GbmConfig& cfg = {}) {
  cfg.validate();
  if (labels.size() != train.n_cases()) throw Error(Errc::LengthMismatch, "labels do not match training rows");
  if (!labels.has_both_classes()) throw Error(Errc::SingleClassLabels, "training labels contain one class");
  const std::size_t n = train.n_cases();
  const auto y = labels.values();

  GbmModel model;
  model.learning_rate = cfg.learning_rate;
  model.features = train.descriptors();
  model.feature_names = train.feature_names();
  const double rate = static_cast<double>(labels.positive_count()) / static_cast<double>(n);
  model.base_score = std::log(rate / (1.0 - rate));

  std::vector<detail::BinnedColumn> bins;
  bins.reserve(train.n_features());
  for (std::size_t j = 0; j < train.n_features(); ++j) bins.push_back(detail::bin_column(train.column(j), n));

  std::vector<double> margin(n, model.base_score), trial(n), residual(n), hessian(n);
  std::vector<double> e(n), trial_e(n);
  std::vector<std::int32_t> node_of(n, 0);
  double loss = detail::logistic_loss_terms(margin, y, e);
  model.train_loss.push_back(loss);

  // Without features the prior is the whole model.
  const std::size_t rounds = train.n_features() == 0 ? 0 : cfg.rounds;
  for (std::size_t round = 0; round < rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = detail::probability_from(margin[i], e[i]);
      residual[i] = (y[i] ? 1.0 : 0.0) - p;
      hessian[i] = p * (1.0 - p);
    }
    auto tree = detail::grow_tree(train, bins, residual, hessian, cfg, node_of);
    double new_loss = loss;
    for (int attempt = 0; attempt < 40; ++attempt) {
      for (std::size_t i = 0; i < n; ++i)
        trial[i] = margin[i] + cfg.learning_rate * tree.nodes[static_cast<std::size_t>(node_of[i])].value;
      new_loss = detail::logistic_loss_terms(trial, y, trial_e);
      if (new_loss <= loss) break;
      for (auto& nd : tree.nodes)
        if (nd.is_leaf()) nd.value *= 0.5;
    }
    if (new_loss > loss) {
      for (auto& nd : tree.nodes)
        if (nd.is_leaf()) nd.value = 0.0;
      new_loss = loss;
    } else {
      margin.swap(trial);
      e.swap(trial_e);
    }
    loss = new_loss;
    model.train_loss.push_back(loss);
    model.trees.push_back(std::move(tree));
  }
  return model;
}

namespace detail {

// Dense values of the model's used features, looked up by descriptor.
// Unused features get an empty vector.
inline std::vector<std::vector<double>> model_inputs(const GbmModel& model, const FeatureMatrix& rows) {
  std::unordered_map<FeatureDescriptor, std::size_t, DescriptorHash> where;
  for (std::size_t j = 0; j < rows.n_features(); ++j) where.try_emplace(rows.descriptor(j), j);
  std::vector<std::vector<double>> cols(model.features.size());
  for (auto f : model.used_features()) {
    auto it = where.find(model.features[f]);
    if (it == where.end()) {
      throw Error(Errc::MissingFeature, "rows lack feature '" +
                                            (f < model.feature_names.size() ? model.feature_names[f] : std::to_string(f)) +
                                            "'");
    }
    cols[f] = rows.dense_column(it->second);
  }
  return cols;
}

inline std::vector<double> predict_inputs(const GbmModel& model, const std::vector<std::vector<double>>& cols,
                                          std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double m = model.base_score;
    for (const auto& t : model.trees) m += model.learning_rate * t.eval([&](std::size_t f) { return cols[f][i]; });
    out[i] = sigmoid(m);
  }
  return out;
}

inline double accuracy_at_half(std::span<const double> prob, std::span<const std::uint8_t> y) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < prob.size(); ++i) hits += (prob[i] >= 0.5) == (y[i] != 0);
  return prob.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(prob.size());
}

}  // namespace detail

// Positive-class probabilities for every row of `rows`.
inline std::vector<double> predict(const GbmModel& model, const FeatureMatrix& rows) {
  const auto cols = detail::model_inputs(model, rows);
  return detail::predict_inputs(model, cols, rows.n_cases());
}

// Confusion counts and accuracy from probabilities at the 0.5 threshold.
inline EvalMetrics score_predictions(std::span<const double> prob, const LabelVector& labels) {
  if (prob.size() != labels.size()) throw Error(Errc::LengthMismatch, "predictions do not match labels");
  EvalMetrics m;
  for (std::size_t i = 0; i < prob.size(); ++i) {
    const bool p = prob[i] >= 0.5;
    const bool t = labels[i];
    if (p && t) ++m.confusion.tp;
    else if (p && !t) ++m.confusion.fp;
    else if (!p && t) ++m.confusion.fn;
    else ++m.confusion.tn;
  }
  m.accuracy = prob.empty() ? 0.0
                            : static_cast<double>(m.confusion.tp + m.confusion.tn) / static_cast<double>(prob.size());
  return m;
}

inline EvalMetrics evaluate(const GbmModel& model, const FeatureMatrix& test, const LabelVector& labels) {
  const auto start = std::chrono::steady_clock::now();
  const auto prob = predict(model, test);
  auto m = score_predictions(prob, labels);
  m.predict_elapsed = std::chrono::steady_clock::now() - start;
  return m;
}

// Mean drop in accuracy when one feature's column is shuffled across
// `rows`, over `repeats` seeded shuffles. Indexed like model.features.
// Features no tree splits on score exactly 0.
inline std::vector<double> permutation_importance(const GbmModel& model, const FeatureMatrix& rows,
                                                  const LabelVector& labels, std::uint64_t seed,
                                                  std::size_t repeats = 3) {
  if (labels.size() != rows.n_cases()) throw Error(Errc::LengthMismatch, "labels do not match rows");
  auto cols = detail::model_inputs(model, rows);
  const std::size_t n = rows.n_cases();
  const double baseline = detail::accuracy_at_half(detail::predict_inputs(model, cols, n), labels.values());
  std::vector<double> importance(model.features.size(), 0.0);
  for (auto f : model.used_features()) {
    const auto original = cols[f];
    double drop = 0.0;
    for (std::size_t r = 0; r < repeats; ++r) {
      Rng rng(mix_seed(seed, f * 1000003ULL + r));
      cols[f] = original;
      rng.shuffle(cols[f].begin(), cols[f].end());
      drop += baseline - detail::accuracy_at_half(detail::predict_inputs(model, cols, n), labels.values());
    }
    cols[f] = original;
    importance[f] = repeats ? drop / static_cast<double>(repeats) : 0.0;
  }
  return importance;
}

inline nlohmann::json to_json(const GbmModel& model) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : model.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : t.nodes) {
      if (n.is_leaf()) {
        nodes.push_back({{"leaf", n.value}});
      } else {
        nodes.push_back({{"feature", model.feature_names.at(static_cast<std::size_t>(n.feature))},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right}});
      }
    }
    trees.push_back(std::move(nodes));
  }
  return {{"base_score", model.base_score},
          {"learning_rate", model.learning_rate},
          {"features", model.feature_names},
          {"trees", trees}};
}

}  // namespace sfs
