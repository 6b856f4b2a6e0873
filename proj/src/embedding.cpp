#include "efgraph/embedding.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>

#include "efgraph/error.hpp"
#include "efgraph/parallel.hpp"
#include "serialize.hpp"

namespace efg {

bool EmbeddingMatrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

void TrainConfig::validate() const {
  if (dim == 0) fail(ErrorKind::kConfig, "embedding dimension must be at least 1");
  if (epochs == 0) fail(ErrorKind::kConfig, "epochs must be at least 1");
  if (window_size == 0) fail(ErrorKind::kConfig, "window size must be at least 1");
  if (negatives == 0) fail(ErrorKind::kConfig, "negatives per positive must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail(ErrorKind::kConfig, "learning rate must be positive");
  if (!std::isfinite(margin)) fail(ErrorKind::kConfig, "margin must be finite");
}

NodeId scale_free_negative_sample(const Graph& g, Rng& rng) {
  if (g.edge_count() == 0) fail(ErrorKind::kConfig, "scale-free sampling needs at least one edge");
  return g.source(rng.below(g.edge_count()));
}

namespace {

template <bool kShared>
inline float load(const float* p) noexcept {
  if constexpr (kShared) {
    return std::atomic_ref<float>(*const_cast<float*>(p)).load(std::memory_order_relaxed);
  } else {
    return *p;
  }
}

template <bool kShared>
inline void store(float* p, float v) noexcept {
  if constexpr (kShared) {
    std::atomic_ref<float>(*p).store(v, std::memory_order_relaxed);
  } else {
    *p = v;
  }
}

double softplus(double x) noexcept { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

/// Logistic step on one output row; accumulates the input gradient in `grad`.
template <bool kShared>
double logistic_update(const float* h, float* target, float label, float lr, float* grad, std::size_t dim) noexcept {
  float dot = 0.0F;
  for (std::size_t i = 0; i < dim; ++i) dot += h[i] * load<kShared>(target + i);
  const double sigma = 1.0 / (1.0 + std::exp(-static_cast<double>(dot)));
  const auto g = static_cast<float>((label - sigma) * lr);
  for (std::size_t i = 0; i < dim; ++i) {
    const float t = load<kShared>(target + i);
    grad[i] += g * t;
    store<kShared>(target + i, t + g * h[i]);
  }
  return label > 0.0F ? softplus(-dot) : softplus(dot);
}

template <bool kShared>
void add_to_row(float* row, const float* delta, std::size_t dim) noexcept {
  for (std::size_t i = 0; i < dim; ++i) store<kShared>(row + i, load<kShared>(row + i) + delta[i]);
}

template <bool kShared>
void load_row(const float* row, float* out, std::size_t dim) noexcept {
  for (std::size_t i = 0; i < dim; ++i) out[i] = load<kShared>(row + i);
}

void init_uniform(EmbeddingMatrix& m, Rng& rng, double scale) {
  float* data = m.data();
  for (std::uint64_t i = 0; i < m.rows() * m.dim(); ++i) data[i] = static_cast<float>((rng.uniform() * 2.0 - 1.0) * scale);
}

double decayed_rate(double initial, std::uint64_t done, std::uint64_t total) noexcept {
  const double progress = total == 0 ? 0.0 : static_cast<double>(done) / static_cast<double>(total);
  return initial * std::max(1e-4, 1.0 - progress);
}

void check_finite(const TrainResult& r, std::uint64_t epoch, double loss) {
  if (!std::isfinite(loss) || !r.embedding.all_finite() || !r.context.all_finite()) {
    fail(ErrorKind::kDivergence, "training diverged at epoch " + std::to_string(epoch + 1));
  }
}

struct Tally {
  double loss = 0.0;
  std::uint64_t positives = 0;
  std::uint64_t windows = 0;
  std::uint64_t updates = 0;

  void merge(const Tally& o) noexcept {
    loss += o.loss;
    positives += o.positives;
    windows += o.windows;
    updates += o.updates;
  }
};

enum class WalkModel : std::uint8_t { kSkipGram, kCbow };

template <bool kShared>
class WindowTrainer {
 public:
  WindowTrainer(const Graph& g, const TrainConfig& cfg, EmbeddingMatrix& in, EmbeddingMatrix& out)
      : g_(g), cfg_(cfg), in_(in), out_(out), h_(cfg.dim), grad_(cfg.dim) {}

  /// Trains every window of `walk`; `first_window` is the global index of
  /// position 0 for the learning-rate schedule.
  void walk(WalkModel model, std::span<const NodeId> walk, std::uint64_t first_window, std::uint64_t total, Rng& rng,
            const TrainHooks* hooks, Tally& tally) {
    const std::size_t w = cfg_.window_size;
    for (std::size_t i = 0; i < walk.size(); ++i) {
      contexts_.clear();
      negatives_.clear();
      const std::size_t lo = i > w ? i - w : 0;
      const std::size_t hi = std::min(walk.size(), i + w + 1);
      for (std::size_t j = lo; j < hi; ++j) {
        if (j != i) contexts_.push_back(walk[j]);
      }
      if (contexts_.empty()) continue;
      const auto lr = static_cast<float>(decayed_rate(cfg_.learning_rate, first_window + i, total));
      const std::uint64_t updates =
          model == WalkModel::kSkipGram ? skipgram(walk[i], lr, rng, tally) : cbow(walk[i], lr, rng, tally);
      ++tally.windows;
      tally.updates += updates;
      if (hooks != nullptr && hooks->on_window) {
        hooks->on_window(WindowEvent{walk[i], contexts_, negatives_, updates, &in_, &out_});
      }
    }
  }

  /// One positive pair (input row `source`, output row `target`) plus negatives.
  void pair(NodeId source, NodeId target, float lr, Rng& rng, Tally& tally) {
    const std::size_t d = cfg_.dim;
    float* input = in_.row(source).data();
    load_row<kShared>(input, h_.data(), d);
    std::fill(grad_.begin(), grad_.end(), 0.0F);
    tally.loss += logistic_update<kShared>(h_.data(), out_.row(target).data(), 1.0F, lr, grad_.data(), d);
    for (std::uint64_t k = 0; k < cfg_.negatives; ++k) {
      const NodeId n = scale_free_negative_sample(g_, rng);
      if (n == target) continue;
      negatives_.push_back(n);
      tally.loss += logistic_update<kShared>(h_.data(), out_.row(n).data(), 0.0F, lr, grad_.data(), d);
    }
    add_to_row<kShared>(input, grad_.data(), d);
    ++tally.positives;
  }

  std::vector<NodeId>& negatives() noexcept { return negatives_; }

 private:
  std::uint64_t skipgram(NodeId center, float lr, Rng& rng, Tally& tally) {
    for (const NodeId context : contexts_) pair(center, context, lr, rng, tally);
    return contexts_.size();
  }

  std::uint64_t cbow(NodeId center, float lr, Rng& rng, Tally& tally) {
    const std::size_t d = cfg_.dim;
    std::fill(h_.begin(), h_.end(), 0.0F);
    for (const NodeId context : contexts_) {
      const float* row = in_.row(context).data();
      for (std::size_t i = 0; i < d; ++i) h_[i] += load<kShared>(row + i);
    }
    const float scale = 1.0F / static_cast<float>(contexts_.size());
    for (float& v : h_) v *= scale;
    std::fill(grad_.begin(), grad_.end(), 0.0F);
    tally.loss += logistic_update<kShared>(h_.data(), out_.row(center).data(), 1.0F, lr, grad_.data(), d);
    for (std::uint64_t k = 0; k < cfg_.negatives; ++k) {
      const NodeId n = scale_free_negative_sample(g_, rng);
      if (n == center) continue;
      negatives_.push_back(n);
      tally.loss += logistic_update<kShared>(h_.data(), out_.row(n).data(), 0.0F, lr, grad_.data(), d);
    }
    for (const NodeId context : contexts_) add_to_row<kShared>(in_.row(context).data(), grad_.data(), d);
    ++tally.positives;
    return 1;
  }

  const Graph& g_;
  const TrainConfig& cfg_;
  EmbeddingMatrix& in_;
  EmbeddingMatrix& out_;
  std::vector<float> h_;
  std::vector<float> grad_;
  std::vector<NodeId> contexts_;
  std::vector<NodeId> negatives_;
};

constexpr std::uint64_t kInitStream = 0x696e6974;

TrainResult train_walk_model(const Graph& g, const WalkConfig& walks, const TrainConfig& cfg, const TrainHooks& hooks,
                             WalkModel model) {
  cfg.validate();
  walks.validate();
  if (g.edge_count() == 0) fail(ErrorKind::kConfig, "cannot train on a graph without edges");
  const std::uint64_t n = g.node_count();
  TrainResult result;
  result.embedding = EmbeddingMatrix(n, cfg.dim);
  result.context = EmbeddingMatrix(n, cfg.dim);
  Rng init(derive_seed(cfg.seed, kInitStream));
  init_uniform(result.embedding, init, 0.5 / static_cast<double>(cfg.dim));

  const std::uint64_t total = cfg.epochs * walks.iterations * n * walks.walk_length;
  std::uint64_t done = 0;
  for (std::uint64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    WalkConfig epoch_walks = walks;
    epoch_walks.seed = derive_seed(walks.seed, epoch);
    WalkStream stream(g, epoch_walks);
    WalkBatch batch;
    Tally epoch_tally;
    std::uint64_t batch_index = 0;
    while (stream.next(batch)) {
      const auto run_rows = [&]<bool kShared>(std::uint64_t begin, std::uint64_t end, Tally& tally) {
        WindowTrainer<kShared> trainer(g, cfg, result.embedding, result.context);
        Rng rng(derive_seed(cfg.seed, epoch + 1, (batch_index << 32) + begin));
        for (std::uint64_t row = begin; row < end; ++row) {
          trainer.walk(model, batch.row(row), done + batch.offsets[row], total, rng, kShared ? nullptr : &hooks,
                       tally);
        }
      };
      if (cfg.threads <= 1) {
        run_rows.template operator()<false>(0, batch.rows(), epoch_tally);
      } else {
        std::mutex merge_mutex;
        parallel_chunks(batch.rows(), cfg.threads, [&](std::uint64_t begin, std::uint64_t end) {
          Tally local;
          run_rows.template operator()<true>(begin, end, local);
          std::lock_guard lock(merge_mutex);
          epoch_tally.merge(local);
        });
      }
      done += batch.nodes.size();
      ++batch_index;
    }
    const double mean = epoch_tally.positives == 0 ? 0.0 : epoch_tally.loss / static_cast<double>(epoch_tally.positives);
    check_finite(result, epoch, mean);
    result.epoch_loss.push_back(mean);
    result.windows += epoch_tally.windows;
    result.updates += epoch_tally.updates;
    if (hooks.on_epoch) hooks.on_epoch(epoch + 1, mean);
  }
  return result;
}

/// Edge positions drawn uniformly, or weight-proportionally on weighted graphs.
class EdgeSampler {
 public:
  explicit EdgeSampler(const Graph& g) : g_(g) {
    if (g.weighted()) {
      cumulative_.resize(g.edge_count());
      double total = 0.0;
      const auto weights = g.weights();
      for (std::uint64_t e = 0; e < g.edge_count(); ++e) {
        total += static_cast<double>(weights[e]);
        cumulative_[e] = total;
      }
    }
  }

  std::uint64_t operator()(Rng& rng) const noexcept {
    if (cumulative_.empty()) return rng.below(g_.edge_count());
    return sample_cumulative(cumulative_, rng);
  }

 private:
  const Graph& g_;
  std::vector<double> cumulative_;
};

template <class Fn>
Tally run_samples(std::uint64_t samples, unsigned threads, std::uint64_t seed, std::uint64_t epoch, Fn&& fn) {
  Tally tally;
  if (threads <= 1) {
    Rng rng(derive_seed(seed, epoch + 1, 0));
    fn.template operator()<false>(0, samples, rng, tally);
    return tally;
  }
  std::mutex merge_mutex;
  parallel_chunks(samples, threads, [&](std::uint64_t begin, std::uint64_t end) {
    Tally local;
    Rng rng(derive_seed(seed, epoch + 1, begin));
    fn.template operator()<true>(begin, end, rng, local);
    std::lock_guard lock(merge_mutex);
    tally.merge(local);
  });
  return tally;
}

template <class T>
T transe_kernel(const T* h, const T* r, const T* t, const T* hc, const T* tc, std::size_t d, T margin, T* gh, T* gr,
                T* gt, T* ghc, T* gtc) {
  T positive = 0;
  T negative = 0;
  for (std::size_t i = 0; i < d; ++i) {
    const T a = h[i] + r[i] - t[i];
    const T b = hc[i] + r[i] - tc[i];
    positive += a * a;
    negative += b * b;
  }
  const T loss = margin + positive - negative;
  const bool active = loss > 0;
  if (gh != nullptr) {
    // each feature's gradient depends only on that feature
    for (std::size_t i = 0; i < d; ++i) {
      const T a = active ? 2 * (h[i] + r[i] - t[i]) : T{0};
      const T b = active ? 2 * (hc[i] + r[i] - tc[i]) : T{0};
      gh[i] = a;
      gt[i] = -a;
      gr[i] = a - b;
      ghc[i] = -b;
      gtc[i] = b;
    }
  }
  return active ? loss : T{0};
}

void check_transe_shapes(std::span<const double> h, std::span<const double> r, std::span<const double> t,
                         std::span<const double> hc, std::span<const double> tc) {
  const std::size_t d = h.size();
  if (r.size() != d || t.size() != d || hc.size() != d || tc.size() != d) {
    fail(ErrorKind::kShape, "TransE vectors must share one dimension");
  }
}

void normalize_rows(EmbeddingMatrix& m) {
  for (std::uint64_t i = 0; i < m.rows(); ++i) {
    auto row = m.row(i);
    double norm = 0.0;
    for (const float v : row) norm += static_cast<double>(v) * v;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (float& v : row) v = static_cast<float>(v / norm);
    }
  }
}

}  // namespace

TrainResult train_skipgram(const Graph& g, const WalkConfig& walks, const TrainConfig& cfg, const TrainHooks& hooks) {
  return train_walk_model(g, walks, cfg, hooks, WalkModel::kSkipGram);
}

TrainResult train_cbow(const Graph& g, const WalkConfig& walks, const TrainConfig& cfg, const TrainHooks& hooks) {
  return train_walk_model(g, walks, cfg, hooks, WalkModel::kCbow);
}

TrainResult train_line(const Graph& g, LineOrder order, const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  if (g.edge_count() == 0) fail(ErrorKind::kConfig, "LINE needs at least one edge");
  const std::uint64_t n = g.node_count();
  TrainResult result;
  result.embedding = EmbeddingMatrix(n, cfg.dim);
  Rng init(derive_seed(cfg.seed, kInitStream));
  init_uniform(result.embedding, init, 0.5 / static_cast<double>(cfg.dim));
  const bool second = order == LineOrder::kSecond;
  if (second) result.context = EmbeddingMatrix(n, cfg.dim);
  EmbeddingMatrix& targets = second ? result.context : result.embedding;

  const EdgeSampler sampler(g);
  const std::uint64_t samples = g.edge_count();
  const std::uint64_t total = cfg.epochs * samples;
  for (std::uint64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::uint64_t base = epoch * samples;
    const Tally tally = run_samples(
        samples, cfg.threads, cfg.seed, epoch,
        [&]<bool kShared>(std::uint64_t begin, std::uint64_t end, Rng& rng, Tally& local) {
          WindowTrainer<kShared> trainer(g, cfg, result.embedding, targets);
          for (std::uint64_t s = begin; s < end; ++s) {
            const auto [a, b] = g.edge(sampler(rng));
            const auto lr = static_cast<float>(decayed_rate(cfg.learning_rate, base + s, total));
            trainer.negatives().clear();
            trainer.pair(a, b, lr, rng, local);
            ++local.windows;
            local.updates += 1;
            if (!kShared && hooks.on_window) {
              const NodeId context = b;
              hooks.on_window(WindowEvent{a, {&context, 1}, trainer.negatives(), 1, &result.embedding,
                                          second ? &result.context : &result.embedding});
            }
          }
        });
    const double mean = tally.loss / static_cast<double>(std::max<std::uint64_t>(tally.positives, 1));
    check_finite(result, epoch, mean);
    result.epoch_loss.push_back(mean);
    result.windows += tally.windows;
    result.updates += tally.updates;
    if (hooks.on_epoch) hooks.on_epoch(epoch + 1, mean);
  }
  return result;
}

double transe_loss(std::span<const double> h, std::span<const double> r, std::span<const double> t,
                   std::span<const double> h_corrupt, std::span<const double> t_corrupt, double margin) {
  check_transe_shapes(h, r, t, h_corrupt, t_corrupt);
  return transe_kernel<double>(h.data(), r.data(), t.data(), h_corrupt.data(), t_corrupt.data(), h.size(), margin,
                               nullptr, nullptr, nullptr, nullptr, nullptr);
}

double transe_loss_gradient(std::span<const double> h, std::span<const double> r, std::span<const double> t,
                            std::span<const double> h_corrupt, std::span<const double> t_corrupt, double margin,
                            TransEGradient& grad) {
  check_transe_shapes(h, r, t, h_corrupt, t_corrupt);
  const std::size_t d = h.size();
  grad.h.resize(d);
  grad.r.resize(d);
  grad.t.resize(d);
  grad.h_corrupt.resize(d);
  grad.t_corrupt.resize(d);
  return transe_kernel<double>(h.data(), r.data(), t.data(), h_corrupt.data(), t_corrupt.data(), d, margin,
                               grad.h.data(), grad.r.data(), grad.t.data(), grad.h_corrupt.data(),
                               grad.t_corrupt.data());
}

TrainResult train_transe(const Graph& g, const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  if (!g.has_edge_types()) fail(ErrorKind::kConfig, "TransE needs a graph with edge types");
  if (g.edge_count() == 0) fail(ErrorKind::kConfig, "TransE needs at least one edge");
  const std::uint64_t n = g.node_count();
  const std::uint64_t relations = g.edge_type_names().size();
  const std::size_t d = cfg.dim;
  TrainResult result;
  result.embedding = EmbeddingMatrix(n, d);
  result.context = EmbeddingMatrix(relations, d);
  Rng init(derive_seed(cfg.seed, kInitStream));
  const double bound = 6.0 / std::sqrt(static_cast<double>(d));
  init_uniform(result.embedding, init, bound);
  init_uniform(result.context, init, bound);
  normalize_rows(result.context);

  const std::uint64_t samples = g.edge_count();
  const std::uint64_t total = cfg.epochs * samples;
  const auto margin = static_cast<float>(cfg.margin);
  for (std::uint64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    normalize_rows(result.embedding);
    const std::uint64_t base = epoch * samples;
    const Tally tally = run_samples(
        samples, cfg.threads, cfg.seed, epoch,
        [&]<bool kShared>(std::uint64_t begin, std::uint64_t end, Rng& rng, Tally& local) {
          std::vector<float> buffers(10 * d);
          float* h = buffers.data();
          float* r = h + d;
          float* t = r + d;
          float* hc = t + d;
          float* tc = hc + d;
          float* gh = tc + d;
          float* gr = gh + d;
          float* gt = gr + d;
          float* ghc = gt + d;
          float* gtc = ghc + d;
          std::vector<NodeId> corrupted;
          for (std::uint64_t s = begin; s < end; ++s) {
            const std::uint64_t e = rng.below(samples);
            const auto [head, tail] = g.edge(e);
            const std::uint32_t type = g.edge_type(e);
            if (type == kNoEdgeType) fail(ErrorKind::kConfig, "edge without a type in a typed graph");
            const auto lr = static_cast<float>(decayed_rate(cfg.learning_rate, base + s, total));
            corrupted.clear();
            for (std::uint64_t k = 0; k < cfg.negatives; ++k) {
              const bool corrupt_head = rng.coin();
              const auto other = static_cast<NodeId>(rng.below(n));
              const NodeId head_c = corrupt_head ? other : head;
              const NodeId tail_c = corrupt_head ? tail : other;
              corrupted.push_back(other);
              load_row<kShared>(result.embedding.row(head).data(), h, d);
              load_row<kShared>(result.context.row(type).data(), r, d);
              load_row<kShared>(result.embedding.row(tail).data(), t, d);
              load_row<kShared>(result.embedding.row(head_c).data(), hc, d);
              load_row<kShared>(result.embedding.row(tail_c).data(), tc, d);
              const float loss = transe_kernel<float>(h, r, t, hc, tc, d, margin, gh, gr, gt, ghc, gtc);
              local.loss += loss;
              ++local.positives;
              ++local.updates;
              if (loss <= 0.0F) continue;
              for (std::size_t i = 0; i < d; ++i) {
                gh[i] *= -lr;
                gr[i] *= -lr;
                gt[i] *= -lr;
                ghc[i] *= -lr;
                gtc[i] *= -lr;
              }
              add_to_row<kShared>(result.embedding.row(head).data(), gh, d);
              add_to_row<kShared>(result.context.row(type).data(), gr, d);
              add_to_row<kShared>(result.embedding.row(tail).data(), gt, d);
              add_to_row<kShared>(result.embedding.row(head_c).data(), ghc, d);
              add_to_row<kShared>(result.embedding.row(tail_c).data(), gtc, d);
            }
            ++local.windows;
            if (!kShared && hooks.on_window) {
              const NodeId context = tail;
              hooks.on_window(WindowEvent{head, {&context, 1}, corrupted, cfg.negatives, &result.embedding,
                                          &result.context});
            }
          }
        });
    const double mean = tally.loss / static_cast<double>(std::max<std::uint64_t>(tally.positives, 1));
    check_finite(result, epoch, mean);
    result.epoch_loss.push_back(mean);
    result.windows += tally.windows;
    result.updates += tally.updates;
    if (hooks.on_epoch) hooks.on_epoch(epoch + 1, mean);
  }
  return result;
}

std::string_view to_string(EmbeddingMethod method) noexcept {
  switch (method) {
    case EmbeddingMethod::kSkipGram:
      return "skipgram";
    case EmbeddingMethod::kCbow:
      return "cbow";
    case EmbeddingMethod::kLineFirst:
      return "line1";
    case EmbeddingMethod::kLineSecond:
      return "line2";
    case EmbeddingMethod::kTransE:
      return "transe";
  }
  return "unknown";
}

EmbeddingMethod parse_embedding_method(std::string_view name) {
  for (const auto m : {EmbeddingMethod::kSkipGram, EmbeddingMethod::kCbow, EmbeddingMethod::kLineFirst,
                       EmbeddingMethod::kLineSecond, EmbeddingMethod::kTransE}) {
    if (to_string(m) == name) return m;
  }
  fail(ErrorKind::kConfig, "unknown embedding method '" + std::string(name) + "'");
}

TrainResult train_embedding(const Graph& g, const EmbedConfig& cfg, const TrainHooks& hooks) {
  switch (cfg.method) {
    case EmbeddingMethod::kSkipGram:
      return train_skipgram(g, cfg.walks, cfg.train, hooks);
    case EmbeddingMethod::kCbow:
      return train_cbow(g, cfg.walks, cfg.train, hooks);
    case EmbeddingMethod::kLineFirst:
      return train_line(g, LineOrder::kFirst, cfg.train, hooks);
    case EmbeddingMethod::kLineSecond:
      return train_line(g, LineOrder::kSecond, cfg.train, hooks);
    case EmbeddingMethod::kTransE:
      return train_transe(g, cfg.train, hooks);
  }
  fail(ErrorKind::kConfig, "unknown embedding method");
}

std::vector<std::string> node_names(const Graph& g) {
  std::vector<std::string> names(g.node_count());
  for (std::uint64_t i = 0; i < names.size(); ++i) names[i] = g.node_name(static_cast<NodeId>(i));
  return names;
}

namespace {

std::string row_name(std::span<const std::string> names, std::uint64_t i) {
  return names.empty() ? std::to_string(i) : names[i];
}

void check_names(const EmbeddingMatrix& m, std::span<const std::string> names) {
  if (!names.empty() && names.size() != m.rows()) fail(ErrorKind::kShape, "name count does not match row count");
}

}  // namespace

void write_embedding_text(std::ostream& out, const EmbeddingMatrix& m, std::span<const std::string> names) {
  check_names(m, names);
  out << m.rows() << ' ' << m.dim() << '\n';
  std::ostringstream line;
  line.precision(9);
  for (std::uint64_t i = 0; i < m.rows(); ++i) {
    line.str({});
    line << row_name(names, i);
    for (const float v : m.row(i)) line << ' ' << v;
    line << '\n';
    out << line.str();
  }
  if (!out) fail(ErrorKind::kIo, "failed to write embedding");
}

EmbeddingMatrix read_embedding_text(std::istream& in, std::vector<std::string>* names) {
  std::uint64_t rows = 0;
  std::uint64_t dim = 0;
  if (!(in >> rows >> dim)) fail(ErrorKind::kParse, "missing embedding header");
  EmbeddingMatrix m(rows, dim);
  if (names != nullptr) names->assign(rows, {});
  std::string name;
  for (std::uint64_t i = 0; i < rows; ++i) {
    if (!(in >> name)) fail(ErrorKind::kParse, "missing embedding row " + std::to_string(i));
    if (names != nullptr) (*names)[i] = name;
    for (float& v : m.row(i)) {
      if (!(in >> v)) fail(ErrorKind::kParse, "bad value in embedding row " + std::to_string(i));
    }
  }
  return m;
}

void write_embedding_binary(std::ostream& out, const EmbeddingMatrix& m, std::span<const std::string> names) {
  check_names(m, names);
  io::write_u64(out, m.rows());
  io::write_u64(out, m.dim());
  for (std::uint64_t i = 0; i < m.rows(); ++i) {
    const std::string name = row_name(names, i);
    const auto length = static_cast<std::uint32_t>(name.size());
    out.write(reinterpret_cast<const char*>(&length), sizeof length);
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    out.write(reinterpret_cast<const char*>(m.row(i).data()), static_cast<std::streamsize>(m.dim() * sizeof(float)));
  }
  if (!out) fail(ErrorKind::kIo, "failed to write embedding");
}

EmbeddingMatrix read_embedding_binary(std::istream& in, std::vector<std::string>* names) {
  const std::uint64_t rows = io::read_u64(in);
  const std::uint64_t dim = io::read_u64(in);
  if (rows > (1ULL << 32) || dim > (1ULL << 24)) fail(ErrorKind::kIo, "corrupt embedding header");
  EmbeddingMatrix m(rows, dim);
  if (names != nullptr) names->assign(rows, {});
  for (std::uint64_t i = 0; i < rows; ++i) {
    std::uint32_t length = 0;
    if (!in.read(reinterpret_cast<char*>(&length), sizeof length)) fail(ErrorKind::kIo, "truncated embedding");
    std::string name(length, '\0');
    if (!in.read(name.data(), length)) fail(ErrorKind::kIo, "truncated embedding");
    if (names != nullptr) (*names)[i] = std::move(name);
    if (!in.read(reinterpret_cast<char*>(m.row(i).data()), static_cast<std::streamsize>(dim * sizeof(float)))) {
      fail(ErrorKind::kIo, "truncated embedding");
    }
  }
  return m;
}

}  // namespace efg
