#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "efgraph/embedding.hpp"
#include "efgraph/graph.hpp"

namespace efg {

enum class EdgeOperator : std::uint8_t {
  kConcatenation,
  kHadamard,
  kMean,
  kSum,
  kSubtraction,
  kL1,
  kL2,
  kCosineDistance,
};

std::string_view to_string(EdgeOperator op) noexcept;
/// Accepts concatenation, hadamard, mean, sum, subtraction, l1, l2, cosine.
EdgeOperator parse_edge_operator(std::string_view name);

/// 2d for concatenation, 1 for cosine distance, d otherwise.
std::uint64_t output_dimension(EdgeOperator op, std::uint64_t dim) noexcept;

/// Writes op(u, v) into `out` (size output_dimension). Throws kShape on a
/// dimension mismatch and kDegenerate for the cosine of a zero vector.
void edge_embed(EdgeOperator op, std::span<const float> u, std::span<const float> v, std::span<float> out);
std::vector<float> edge_embed(EdgeOperator op, std::span<const float> u, std::span<const float> v);

using EdgeList = std::vector<std::pair<NodeId, NodeId>>;

/// Row-major features for a contiguous slice of the edge subset.
struct FeatureBatch {
  std::uint64_t first = 0;
  std::uint64_t rows = 0;
  std::uint64_t dim = 0;
  std::vector<float> values;

  std::span<const float> row(std::uint64_t i) const noexcept { return {values.data() + i * dim, dim}; }
};

inline constexpr std::uint64_t kDefaultFeatureBatch = std::uint64_t{1} << 14;

/// Restartable sequence of feature batches.
class FeatureSource {
 public:
  virtual ~FeatureSource() = default;
  virtual bool next(FeatureBatch& batch) = 0;
  virtual void reset() noexcept = 0;
  virtual std::uint64_t feature_dim() const noexcept = 0;
  /// Total rows over one pass.
  virtual std::uint64_t size() const noexcept = 0;
};

/// Computes edge features batch by batch; only one batch is alive at a time.
/// Neither the embedding nor the edge list is copied.
class EdgeFeatureStream final : public FeatureSource {
 public:
  EdgeFeatureStream(const EmbeddingMatrix& embedding, EdgeOperator op, std::span<const std::pair<NodeId, NodeId>> edges,
                    std::uint64_t batch_size = kDefaultFeatureBatch);

  /// Throws kRange when an edge names a node outside the embedding.
  bool next(FeatureBatch& batch) override;
  void reset() noexcept override { cursor_ = 0; }
  std::uint64_t feature_dim() const noexcept override { return output_dimension(op_, embedding_->dim()); }
  std::uint64_t size() const noexcept override { return edges_.size(); }
  std::uint64_t batch_size() const noexcept { return batch_size_; }

 private:
  const EmbeddingMatrix* embedding_;
  EdgeOperator op_;
  std::span<const std::pair<NodeId, NodeId>> edges_;
  std::uint64_t batch_size_;
  std::uint64_t cursor_ = 0;
};

/// Selected rows of a matrix used directly as features (node classification).
class RowFeatureSource final : public FeatureSource {
 public:
  RowFeatureSource(const EmbeddingMatrix& matrix, std::span<const NodeId> rows,
                   std::uint64_t batch_size = kDefaultFeatureBatch);

  bool next(FeatureBatch& batch) override;
  void reset() noexcept override { cursor_ = 0; }
  std::uint64_t feature_dim() const noexcept override { return matrix_->dim(); }
  std::uint64_t size() const noexcept override { return rows_.size(); }

 private:
  const EmbeddingMatrix* matrix_;
  std::span<const NodeId> rows_;
  std::uint64_t batch_size_;
  std::uint64_t cursor_ = 0;
};

}  // namespace efg
