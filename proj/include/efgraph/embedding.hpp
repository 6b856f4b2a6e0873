#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "efgraph/graph.hpp"
#include "efgraph/random.hpp"
#include "efgraph/walks.hpp"

namespace efg {

/// Row-major rows x dim float matrix.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::uint64_t rows, std::uint64_t dim) : rows_(rows), dim_(dim), data_(rows * dim, 0.0F) {}

  std::uint64_t rows() const noexcept { return rows_; }
  std::uint64_t dim() const noexcept { return dim_; }
  std::span<float> row(std::uint64_t i) noexcept { return {data_.data() + i * dim_, dim_}; }
  std::span<const float> row(std::uint64_t i) const noexcept { return {data_.data() + i * dim_, dim_}; }
  float* data() noexcept { return data_.data(); }
  const float* data() const noexcept { return data_.data(); }
  std::span<const float> values() const noexcept { return data_; }

  bool all_finite() const noexcept;

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::uint64_t rows_ = 0;
  std::uint64_t dim_ = 0;
  std::vector<float> data_;
};

struct TrainConfig {
  std::uint64_t dim = 100;
  std::uint64_t epochs = 1;
  /// Decays linearly to 1e-4 of this value over the whole run.
  double learning_rate = 0.025;
  /// Context positions on each side of the center node.
  std::uint64_t window_size = 4;
  std::uint64_t negatives = 5;
  /// TransE margin.
  double margin = 1.0;
  std::uint64_t seed = 42;
  /// 1 is the deterministic single-threaded mode; more threads update the
  /// shared matrices without locks.
  unsigned threads = 1;

  /// Throws kConfig on dim, window, negatives or epochs of zero, or a
  /// non-positive learning rate.
  void validate() const;
};

/// Node v with probability deg(v) / |E|: a uniform edge position mapped to
/// its source. Throws kConfig on a graph without edges.
NodeId scale_free_negative_sample(const Graph& g, Rng& rng);

/// One training window, reported before the next one starts.
struct WindowEvent {
  NodeId center;
  std::span<const NodeId> contexts;
  std::span<const NodeId> negatives;
  /// Gradient steps taken for this window.
  std::uint64_t updates;
  const EmbeddingMatrix* input;
  const EmbeddingMatrix* output;
};

struct TrainHooks {
  /// Only called in the single-threaded mode.
  std::function<void(const WindowEvent&)> on_window;
  std::function<void(std::uint64_t epoch, double mean_loss)> on_epoch;
};

struct TrainResult {
  /// Node embedding (first layer, or the source layer for LINE).
  EmbeddingMatrix embedding;
  /// Second layer; empty for first-order LINE. Relation vectors for TransE.
  EmbeddingMatrix context;
  std::vector<double> epoch_loss;
  std::uint64_t windows = 0;
  std::uint64_t updates = 0;
};

/// Negative-sampling SkipGram over walks regenerated every epoch.
/// Throws kDivergence naming the epoch if any weight stops being finite.
TrainResult train_skipgram(const Graph& g, const WalkConfig& walks, const TrainConfig& cfg,
                           const TrainHooks& hooks = {});
/// Negative-sampling CBOW: one update per window from the mean context.
TrainResult train_cbow(const Graph& g, const WalkConfig& walks, const TrainConfig& cfg, const TrainHooks& hooks = {});

enum class LineOrder : std::uint8_t { kFirst = 1, kSecond = 2 };

/// Samples |E| edges per epoch (weight-proportional on weighted graphs).
TrainResult train_line(const Graph& g, LineOrder order, const TrainConfig& cfg, const TrainHooks& hooks = {});

/// Margin loss ReLU[margin + |h + r - t|^2 - |h' + r - t'|^2].
double transe_loss(std::span<const double> h, std::span<const double> r, std::span<const double> t,
                   std::span<const double> h_corrupt, std::span<const double> t_corrupt, double margin);

/// Loss plus its gradient with respect to each argument. Gradients are
/// overwritten (zero for a satisfied margin).
struct TransEGradient {
  std::vector<double> h;
  std::vector<double> r;
  std::vector<double> t;
  std::vector<double> h_corrupt;
  std::vector<double> t_corrupt;
};
double transe_loss_gradient(std::span<const double> h, std::span<const double> r, std::span<const double> t,
                            std::span<const double> h_corrupt, std::span<const double> t_corrupt, double margin,
                            TransEGradient& grad);

/// Entity embedding plus relation embedding (one row per edge type).
/// Throws kConfig when the graph has no edge types.
TrainResult train_transe(const Graph& g, const TrainConfig& cfg, const TrainHooks& hooks = {});

enum class EmbeddingMethod : std::uint8_t { kSkipGram, kCbow, kLineFirst, kLineSecond, kTransE };

std::string_view to_string(EmbeddingMethod method) noexcept;
/// Accepts skipgram, cbow, line1, line2, transe.
EmbeddingMethod parse_embedding_method(std::string_view name);

struct EmbedConfig {
  EmbeddingMethod method = EmbeddingMethod::kSkipGram;
  WalkConfig walks;
  TrainConfig train;
};

/// Dispatches to the trainer for `cfg.method`.
TrainResult train_embedding(const Graph& g, const EmbedConfig& cfg, const TrainHooks& hooks = {});

/// Header "rows dim", then one line per row: name followed by dim values.
/// Empty `names` writes decimal row IDs.
void write_embedding_text(std::ostream& out, const EmbeddingMatrix& m, std::span<const std::string> names = {});
EmbeddingMatrix read_embedding_text(std::istream& in, std::vector<std::string>* names = nullptr);

/// u64 rows, u64 dim, then per row: u32 name length, name bytes, dim float32.
void write_embedding_binary(std::ostream& out, const EmbeddingMatrix& m, std::span<const std::string> names = {});
EmbeddingMatrix read_embedding_binary(std::istream& in, std::vector<std::string>* names = nullptr);

/// Node names of `g` in ID order.
std::vector<std::string> node_names(const Graph& g);

}  // namespace efg
