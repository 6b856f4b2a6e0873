#include "efgraph/evaluation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <unordered_set>

#include "efgraph/embedding.hpp"
#include "efgraph/error.hpp"
#include "union_find.hpp"

namespace efg {

namespace {

constexpr std::array<std::string_view, 3> kSchemaNames = {"kfold", "monte_carlo", "connected_monte_carlo"};
constexpr std::array<std::string_view, 2> kPolicyNames = {"uniform", "scale_free"};

template <class T>
void shuffle(std::vector<T>& values, Rng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) std::swap(values[i - 1], values[rng.below(i)]);
}

std::vector<std::uint64_t> identity(std::uint64_t n) {
  std::vector<std::uint64_t> v(n);
  std::iota(v.begin(), v.end(), std::uint64_t{0});
  return v;
}

std::uint64_t test_share(std::uint64_t size, double train_fraction) {
  const auto train = static_cast<std::uint64_t>(std::llround(train_fraction * static_cast<double>(size)));
  return size - std::min(train, size);
}

constexpr std::uint64_t kFoldStream = 0x666f6c64;

}  // namespace

std::string_view to_string(HoldoutSchema schema) noexcept { return kSchemaNames[static_cast<std::size_t>(schema)]; }

HoldoutSchema parse_holdout_schema(std::string_view name) {
  for (std::size_t i = 0; i < kSchemaNames.size(); ++i) {
    if (kSchemaNames[i] == name) return static_cast<HoldoutSchema>(i);
  }
  fail(ErrorKind::kConfig, "unknown holdout schema '" + std::string(name) + "'");
}

std::string_view to_string(NegativePolicy policy) noexcept { return kPolicyNames[static_cast<std::size_t>(policy)]; }

NegativePolicy parse_negative_policy(std::string_view name) {
  for (std::size_t i = 0; i < kPolicyNames.size(); ++i) {
    if (kPolicyNames[i] == name) return static_cast<NegativePolicy>(i);
  }
  fail(ErrorKind::kConfig, "unknown negative policy '" + std::string(name) + "'");
}

void HoldoutSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) fail(ErrorKind::kConfig, "train fraction must be in (0, 1)");
  if (repeats == 0) fail(ErrorKind::kConfig, "repeats must be at least 1");
  if (schema == HoldoutSchema::kKFold && repeats < 2) fail(ErrorKind::kConfig, "kfold needs at least 2 folds");
  if (!(unbalance_ratio > 0.0) || !std::isfinite(unbalance_ratio)) {
    fail(ErrorKind::kConfig, "unbalance ratio must be positive");
  }
}

EdgeTable unique_edges(const Graph& g) {
  EdgeTable table;
  for (std::uint64_t e = 0; e < g.edge_count(); ++e) {
    const auto [a, b] = g.edge(e);
    if (!g.directed() && a > b) continue;
    table.edges.emplace_back(a, b);
    if (g.weighted()) table.weights.push_back(g.weight(e));
    if (g.has_edge_types()) table.types.push_back(g.edge_type(e));
  }
  return table;
}

EdgeSplit split_edges(const Graph& g, const HoldoutSpec& spec, std::uint64_t repeat) {
  spec.validate();
  const EdgeTable table = unique_edges(g);
  const std::uint64_t m = table.edges.size();
  std::vector<bool> is_test(m, false);
  EdgeSplit split;
  split.repeat = repeat;

  const auto group_of = [&](std::uint64_t i) -> std::uint32_t {
    return spec.stratify && !table.types.empty() ? table.types[i] : 0;
  };

  if (spec.schema == HoldoutSchema::kKFold) {
    if (repeat >= spec.repeats) fail(ErrorKind::kRange, "fold " + std::to_string(repeat) + " out of range");
    Rng rng(derive_seed(spec.seed, kFoldStream));
    std::vector<std::uint64_t> order = identity(m);
    shuffle(order, rng);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint64_t x, std::uint64_t y) { return group_of(x) < group_of(y); });
    for (std::uint64_t i = 0; i < m; ++i) is_test[order[i]] = i % spec.repeats == repeat;
  } else {
    Rng rng(derive_seed(spec.seed, repeat + 1));
    if (spec.schema == HoldoutSchema::kConnectedMonteCarlo) {
      std::vector<std::uint64_t> order = identity(m);
      shuffle(order, rng);
      detail::DisjointSets forest(g.node_count());
      std::vector<std::uint64_t> rest;
      for (const std::uint64_t i : order) {
        if (!forest.unite(table.edges[i].first, table.edges[i].second)) rest.push_back(i);
      }
      const std::uint64_t wanted = test_share(m, spec.train_fraction);
      if (rest.size() < wanted) {
        if (spec.strict) {
          fail(ErrorKind::kInfeasible, "spanning forest needs " + std::to_string(m - rest.size()) +
                                           " training edges but the train fraction allows " +
                                           std::to_string(m - wanted));
        }
        split.forest_exceeds_budget = true;
      }
      for (std::uint64_t i = 0; i < std::min<std::uint64_t>(wanted, rest.size()); ++i) is_test[rest[i]] = true;
    } else {
      std::map<std::uint32_t, std::vector<std::uint64_t>> groups;
      for (std::uint64_t i = 0; i < m; ++i) groups[group_of(i)].push_back(i);
      for (auto& [group, members] : groups) {
        shuffle(members, rng);
        const std::uint64_t wanted = test_share(members.size(), spec.train_fraction);
        for (std::uint64_t i = 0; i < wanted; ++i) is_test[members[i]] = true;
      }
    }
  }

  std::vector<float> train_weights;
  std::vector<std::uint32_t> train_types;
  for (std::uint64_t i = 0; i < m; ++i) {
    if (is_test[i]) {
      split.test_edges.push_back(table.edges[i]);
      continue;
    }
    split.train_edges.push_back(table.edges[i]);
    if (!table.weights.empty()) train_weights.push_back(table.weights[i]);
    if (!table.types.empty()) train_types.push_back(table.types[i]);
  }
  split.train = g.with_edges(split.train_edges, train_weights, train_types);
  return split;
}

NodeSplit split_nodes(std::span<const std::int32_t> labels, const HoldoutSpec& spec, std::uint64_t repeat) {
  spec.validate();
  std::map<std::int32_t, std::vector<NodeId>> groups;
  for (std::uint64_t v = 0; v < labels.size(); ++v) {
    if (labels[v] != kNoLabel) groups[labels[v]].push_back(static_cast<NodeId>(v));
  }
  NodeSplit split;
  if (spec.schema == HoldoutSchema::kKFold) {
    if (repeat >= spec.repeats) fail(ErrorKind::kRange, "fold " + std::to_string(repeat) + " out of range");
    Rng rng(derive_seed(spec.seed, kFoldStream));
    std::uint64_t position = 0;
    for (auto& [label, members] : groups) {
      shuffle(members, rng);
      for (const NodeId v : members) (position++ % spec.repeats == repeat ? split.test : split.train).push_back(v);
    }
  } else {
    Rng rng(derive_seed(spec.seed, repeat + 1));
    for (auto& [label, members] : groups) {
      shuffle(members, rng);
      const std::uint64_t wanted = test_share(members.size(), spec.train_fraction);
      split.test.insert(split.test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(wanted));
      split.train.insert(split.train.end(), members.begin() + static_cast<std::ptrdiff_t>(wanted), members.end());
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::uint64_t pair_key(NodeId a, NodeId b, bool directed) noexcept {
  if (!directed && a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

std::uint64_t non_edge_count(const Graph& g) noexcept {
  const std::uint64_t n = g.node_count();
  const std::uint64_t loops = g.self_loop_count();
  const std::uint64_t existing = g.directed() ? g.edge_count() - loops : (g.edge_count() - loops) / 2;
  const std::uint64_t pairs = n == 0 ? 0 : (g.directed() ? n * (n - 1) : n * (n - 1) / 2);
  return pairs - existing;
}

EdgeList sample_negative_edges(const Graph& g, std::uint64_t count, NegativePolicy policy, Rng& rng,
                               const std::vector<std::uint64_t>* exclude) {
  EdgeList out;
  if (count == 0) return out;
  const std::uint64_t n = g.node_count();
  const bool directed = g.directed();
  std::unordered_set<std::uint64_t> taken;
  std::uint64_t excluded = 0;
  if (exclude != nullptr) {
    for (const std::uint64_t key : *exclude) {
      const auto a = static_cast<NodeId>(key >> 32);
      const auto b = static_cast<NodeId>(key & 0xffffffffU);
      if (a >= n || b >= n || a == b) continue;
      const std::uint64_t canonical = pair_key(a, b, directed);
      if (taken.insert(canonical).second && !g.has_edge(a, b)) ++excluded;
    }
  }
  const std::uint64_t loops = g.self_loop_count();
  const std::uint64_t existing = directed ? g.edge_count() - loops : (g.edge_count() - loops) / 2;
  const auto nn = static_cast<unsigned __int128>(n);
  const unsigned __int128 all_pairs = directed ? nn * (nn - (n > 0 ? 1 : 0)) : nn * (nn - (n > 0 ? 1 : 0)) / 2;
  const unsigned __int128 available = all_pairs - existing - excluded;
  if (count > available) {
    fail(ErrorKind::kInfeasible, "requested " + std::to_string(count) + " negative edges but only " +
                                     std::to_string(static_cast<std::uint64_t>(available)) + " non-edges exist");
  }
  const auto accept = [&](NodeId a, NodeId b) {
    if (a == b) return;
    if (!directed && a > b) std::swap(a, b);
    const std::uint64_t key = pair_key(a, b, directed);
    if (taken.contains(key) || g.has_edge(a, b)) return;
    taken.insert(key);
    out.emplace_back(a, b);
  };

  if (policy == NegativePolicy::kUniform && 2 * static_cast<unsigned __int128>(count) > available) {
    // dense request: enumerate every candidate and draw without replacement
    EdgeList candidates;
    for (NodeId a = 0; a < n; ++a) {
      for (NodeId b = directed ? 0 : a + 1; b < n; ++b) {
        if (a == b || taken.contains(pair_key(a, b, directed)) || g.has_edge(a, b)) continue;
        candidates.emplace_back(a, b);
      }
    }
    for (std::uint64_t i = 0; i < count; ++i) {
      std::swap(candidates[i], candidates[i + rng.below(candidates.size() - i)]);
      out.push_back(candidates[i]);
    }
    return out;
  }

  const std::uint64_t max_attempts = 1000 * count + 1000000;
  for (std::uint64_t attempt = 0; out.size() < count; ++attempt) {
    if (attempt == max_attempts) {
      fail(ErrorKind::kInfeasible, "could not draw " + std::to_string(count) + " " +
                                       std::string(to_string(policy)) + " negative edges");
    }
    if (policy == NegativePolicy::kUniform) {
      accept(static_cast<NodeId>(rng.below(n)), static_cast<NodeId>(rng.below(n)));
    } else {
      accept(scale_free_negative_sample(g, rng), scale_free_negative_sample(g, rng));
    }
  }
  return out;
}

namespace {

struct ClassCounts {
  std::uint64_t positives = 0;
  std::uint64_t negatives = 0;
};

ClassCounts check_ranking_input(std::span<const std::uint8_t> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) fail(ErrorKind::kShape, "labels and scores differ in length");
  ClassCounts c;
  for (const auto l : labels) (l != 0 ? c.positives : c.negatives) += 1;
  if (c.positives == 0 || c.negatives == 0) {
    fail(ErrorKind::kDegenerate, "ranking metrics need both classes");
  }
  return c;
}

std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

double auroc(std::span<const std::uint8_t> labels, std::span<const double> scores) {
  const ClassCounts c = check_ranking_input(labels, scores);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double positive_rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] != 0) positive_rank_sum += mid_rank;
    }
    i = j;
  }
  const auto p = static_cast<double>(c.positives);
  const auto n = static_cast<double>(c.negatives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

double auroc_trapezoid(std::span<const std::uint8_t> labels, std::span<const double> scores) {
  const ClassCounts c = check_ranking_input(labels, scores);
  const auto order = descending_order(scores);
  double area = 0.0;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const std::uint64_t tp_before = tp;
    const std::uint64_t fp_before = fp;
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] != 0 ? tp : fp) += 1;
      ++j;
    }
    area += static_cast<double>(fp - fp_before) * static_cast<double>(tp + tp_before) / 2.0;
    i = j;
  }
  return area / (static_cast<double>(c.positives) * static_cast<double>(c.negatives));
}

double auprc(std::span<const std::uint8_t> labels, std::span<const double> scores) {
  const ClassCounts c = check_ranking_input(labels, scores);
  const auto order = descending_order(scores);
  double area = 0.0;
  double previous_recall = 0.0;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] != 0 ? tp : fp) += 1;
      ++j;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(c.positives);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    area += (recall - previous_recall) * precision;
    previous_recall = recall;
    i = j;
  }
  return area;
}

MetricRow compute_metrics(std::span<const std::uint8_t> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) fail(ErrorKind::kShape, "labels and scores differ in length");
  MetricRow r;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = scores[i] >= kDecisionThreshold;
    if (labels[i] != 0) {
      (predicted ? r.true_positives : r.false_negatives) += 1;
    } else {
      (predicted ? r.false_positives : r.true_negatives) += 1;
    }
  }
  const auto tp = static_cast<double>(r.true_positives);
  const auto fp = static_cast<double>(r.false_positives);
  const auto tn = static_cast<double>(r.true_negatives);
  const auto fn = static_cast<double>(r.false_negatives);
  const double positives = tp + fn;
  const double negatives = tn + fp;
  const auto ratio = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };

  r.degenerate = positives == 0.0 || negatives == 0.0;
  r.accuracy = ratio(tp + tn, positives + negatives);
  r.recall = ratio(tp, positives);
  r.miss_rate = ratio(fn, positives);
  r.precision = ratio(tp, tp + fp);
  const double specificity = ratio(tn, negatives);
  const double npv = ratio(tn, tn + fn);
  if (positives > 0.0 && negatives > 0.0) {
    r.balanced_accuracy = (r.recall + specificity) / 2.0;
  } else {
    r.balanced_accuracy = positives > 0.0 ? r.recall : specificity;
  }
  r.f1 = ratio(2.0 * tp, 2.0 * tp + fp + fn);
  r.markedness = tp + fp > 0.0 && tn + fn > 0.0 ? r.precision + npv - 1.0 : 0.0;
  if (tp == 0.0 || fp == 0.0 || tn == 0.0 || fn == 0.0) {
    r.diagnostic_odds_ratio = ((tp + 0.5) * (tn + 0.5)) / ((fp + 0.5) * (fn + 0.5));
  } else {
    r.diagnostic_odds_ratio = (tp * tn) / (fp * fn);
  }
  const double denominator = std::sqrt((tp + fp) * positives * negatives * (tn + fn));
  r.mcc = denominator > 0.0 ? (tp * tn - fp * fn) / denominator : 0.0;
  if (!r.degenerate) {
    r.auroc = auroc(labels, scores);
    r.auprc = auprc(labels, scores);
  }
  return r;
}

Nadam::Nadam(std::size_t size, const NadamConfig& cfg) : cfg_(cfg), m_(size, 0.0), v_(size, 0.0) {}

void Nadam::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) fail(ErrorKind::kShape, "Nadam parameter size mismatch");
  ++t_;
  const double b1 = cfg_.beta1;
  const double b2 = cfg_.beta2;
  const double b1_t = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double b1_next = 1.0 - std::pow(b1, static_cast<double>(t_ + 1));
  const double b2_t = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
    const double m_hat = b1 * m_[i] / b1_next + (1.0 - b1) * grad[i] / b1_t;
    const double v_hat = v_[i] / b2_t;
    params[i] -= cfg_.learning_rate * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
  }
}

namespace {

double sigmoid(double z) noexcept { return 1.0 / (1.0 + std::exp(-z)); }

void check_classifier(const ClassifierConfig& cfg) {
  if (cfg.epochs == 0 || cfg.minibatch == 0) fail(ErrorKind::kConfig, "classifier epochs and minibatch must be positive");
  if (!(cfg.optimizer.learning_rate > 0.0)) fail(ErrorKind::kConfig, "classifier learning rate must be positive");
}

void check_weights(std::span<const double> weights, std::uint64_t epoch) {
  for (const double w : weights) {
    if (!std::isfinite(w)) fail(ErrorKind::kDivergence, "classifier diverged at epoch " + std::to_string(epoch + 1));
  }
}

/// Streams every batch in minibatch slices; fn(batch, first_row, rows).
template <class Fn>
void for_each_minibatch(FeatureSource& features, std::uint64_t minibatch, Fn&& fn) {
  features.reset();
  FeatureBatch batch;
  while (features.next(batch)) {
    for (std::uint64_t start = 0; start < batch.rows; start += minibatch) {
      fn(batch, start, std::min(minibatch, batch.rows - start));
    }
  }
}

}  // namespace

Perceptron::Perceptron(std::uint64_t dim) : weights_(dim + 1, 0.0) {}

double Perceptron::predict(std::span<const float> x) const noexcept {
  double z = weights_.back();
  for (std::size_t i = 0; i < x.size(); ++i) z += weights_[i] * x[i];
  return sigmoid(z);
}

void Perceptron::fit(FeatureSource& features, std::span<const std::uint8_t> labels, const ClassifierConfig& cfg) {
  check_classifier(cfg);
  const std::uint64_t dim = weights_.size() - 1;
  if (features.feature_dim() != dim) fail(ErrorKind::kShape, "feature dimension does not match the classifier");
  if (labels.size() != features.size()) fail(ErrorKind::kShape, "label count does not match the feature rows");
  Nadam optimizer(weights_.size(), cfg.optimizer);
  std::vector<double> grad(weights_.size());
  for (std::uint64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for_each_minibatch(features, cfg.minibatch, [&](const FeatureBatch& batch, std::uint64_t start, std::uint64_t rows) {
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::uint64_t r = start; r < start + rows; ++r) {
        const auto x = batch.row(r);
        const double error = predict(x) - static_cast<double>(labels[batch.first + r] != 0);
        for (std::size_t i = 0; i < dim; ++i) grad[i] += error * x[i];
        grad[dim] += error;
      }
      for (double& g : grad) g /= static_cast<double>(rows);
      optimizer.step(weights_, grad);
    });
    check_weights(weights_, epoch);
  }
}

std::vector<double> Perceptron::predict(FeatureSource& features) const {
  std::vector<double> scores;
  scores.reserve(features.size());
  features.reset();
  FeatureBatch batch;
  while (features.next(batch)) {
    for (std::uint64_t r = 0; r < batch.rows; ++r) scores.push_back(predict(batch.row(r)));
  }
  return scores;
}

MulticlassPerceptron::MulticlassPerceptron(std::uint64_t dim, std::uint64_t classes, bool softmax)
    : dim_(dim), classes_(classes), softmax_(softmax), weights_(classes * (dim + 1), 0.0) {
  if (classes == 0) fail(ErrorKind::kConfig, "classifier needs at least one class");
}

void MulticlassPerceptron::predict(std::span<const float> x, std::span<double> out) const noexcept {
  const std::uint64_t stride = dim_ + 1;
  for (std::uint64_t k = 0; k < classes_; ++k) {
    const double* w = weights_.data() + k * stride;
    double z = w[dim_];
    for (std::uint64_t i = 0; i < dim_; ++i) z += w[i] * x[i];
    out[k] = z;
  }
  if (softmax_) {
    const double peak = *std::max_element(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(classes_));
    double total = 0.0;
    for (std::uint64_t k = 0; k < classes_; ++k) {
      out[k] = std::exp(out[k] - peak);
      total += out[k];
    }
    for (std::uint64_t k = 0; k < classes_; ++k) out[k] /= total;
  } else {
    for (std::uint64_t k = 0; k < classes_; ++k) out[k] = sigmoid(out[k]);
  }
}

void MulticlassPerceptron::fit(FeatureSource& features, std::span<const std::int32_t> labels,
                               const ClassifierConfig& cfg) {
  check_classifier(cfg);
  if (features.feature_dim() != dim_) fail(ErrorKind::kShape, "feature dimension does not match the classifier");
  if (labels.size() != features.size()) fail(ErrorKind::kShape, "label count does not match the feature rows");
  for (const auto l : labels) {
    if (l < 0 || static_cast<std::uint64_t>(l) >= classes_) fail(ErrorKind::kRange, "label out of range");
  }
  const std::uint64_t stride = dim_ + 1;
  Nadam optimizer(weights_.size(), cfg.optimizer);
  std::vector<double> grad(weights_.size());
  std::vector<double> probs(classes_);
  for (std::uint64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for_each_minibatch(features, cfg.minibatch, [&](const FeatureBatch& batch, std::uint64_t start, std::uint64_t rows) {
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::uint64_t r = start; r < start + rows; ++r) {
        const auto x = batch.row(r);
        predict(x, probs);
        const auto label = static_cast<std::uint64_t>(labels[batch.first + r]);
        for (std::uint64_t k = 0; k < classes_; ++k) {
          const double error = probs[k] - (k == label ? 1.0 : 0.0);
          double* g = grad.data() + k * stride;
          for (std::uint64_t i = 0; i < dim_; ++i) g[i] += error * x[i];
          g[dim_] += error;
        }
      }
      for (double& g : grad) g /= static_cast<double>(rows);
      optimizer.step(weights_, grad);
    });
    check_weights(weights_, epoch);
  }
}

}  // namespace efg
