#include "efgraph/edge_features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "efgraph/error.hpp"

namespace efg {

namespace {

constexpr std::array<std::string_view, 8> kOperatorNames = {
    "concatenation", "hadamard", "mean", "sum", "subtraction", "l1", "l2", "cosine",
};

}  // namespace

std::string_view to_string(EdgeOperator op) noexcept { return kOperatorNames[static_cast<std::size_t>(op)]; }

EdgeOperator parse_edge_operator(std::string_view name) {
  for (std::size_t i = 0; i < kOperatorNames.size(); ++i) {
    if (kOperatorNames[i] == name) return static_cast<EdgeOperator>(i);
  }
  fail(ErrorKind::kConfig, "unknown edge operator '" + std::string(name) + "'");
}

std::uint64_t output_dimension(EdgeOperator op, std::uint64_t dim) noexcept {
  switch (op) {
    case EdgeOperator::kConcatenation:
      return 2 * dim;
    case EdgeOperator::kCosineDistance:
      return 1;
    default:
      return dim;
  }
}

void edge_embed(EdgeOperator op, std::span<const float> u, std::span<const float> v, std::span<float> out) {
  const std::size_t d = u.size();
  if (v.size() != d) {
    fail(ErrorKind::kShape, "edge operands have dimensions " + std::to_string(d) + " and " + std::to_string(v.size()));
  }
  if (out.size() != output_dimension(op, d)) fail(ErrorKind::kShape, "edge feature buffer has the wrong size");
  switch (op) {
    case EdgeOperator::kConcatenation:
      for (std::size_t i = 0; i < d; ++i) {
        out[i] = u[i];
        out[d + i] = v[i];
      }
      break;
    case EdgeOperator::kHadamard:
      for (std::size_t i = 0; i < d; ++i) out[i] = u[i] * v[i];
      break;
    case EdgeOperator::kMean:
      for (std::size_t i = 0; i < d; ++i) out[i] = (u[i] + v[i]) / 2.0F;
      break;
    case EdgeOperator::kSum:
      for (std::size_t i = 0; i < d; ++i) out[i] = u[i] + v[i];
      break;
    case EdgeOperator::kSubtraction:
      for (std::size_t i = 0; i < d; ++i) out[i] = u[i] - v[i];
      break;
    case EdgeOperator::kL1:
      for (std::size_t i = 0; i < d; ++i) out[i] = std::fabs(u[i] - v[i]);
      break;
    case EdgeOperator::kL2:
      for (std::size_t i = 0; i < d; ++i) {
        const float diff = u[i] - v[i];
        out[i] = diff * diff;
      }
      break;
    case EdgeOperator::kCosineDistance: {
      double dot = 0.0;
      double uu = 0.0;
      double vv = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        dot += static_cast<double>(u[i]) * v[i];
        uu += static_cast<double>(u[i]) * u[i];
        vv += static_cast<double>(v[i]) * v[i];
      }
      if (uu == 0.0 || vv == 0.0) fail(ErrorKind::kDegenerate, "cosine distance of a zero vector is undefined");
      out[0] = static_cast<float>(1.0 - dot / (std::sqrt(uu) * std::sqrt(vv)));
      break;
    }
  }
}

std::vector<float> edge_embed(EdgeOperator op, std::span<const float> u, std::span<const float> v) {
  std::vector<float> out(output_dimension(op, u.size()));
  edge_embed(op, u, v, out);
  return out;
}

EdgeFeatureStream::EdgeFeatureStream(const EmbeddingMatrix& embedding, EdgeOperator op,
                                     std::span<const std::pair<NodeId, NodeId>> edges, std::uint64_t batch_size)
    : embedding_(&embedding), op_(op), edges_(edges), batch_size_(batch_size) {
  if (batch_size == 0) fail(ErrorKind::kConfig, "feature batch size must be positive");
}

bool EdgeFeatureStream::next(FeatureBatch& batch) {
  if (cursor_ >= edges_.size()) return false;
  const std::uint64_t rows = std::min<std::uint64_t>(batch_size_, edges_.size() - cursor_);
  const std::uint64_t dim = feature_dim();
  batch.first = cursor_;
  batch.rows = rows;
  batch.dim = dim;
  batch.values.resize(rows * dim);
  for (std::uint64_t i = 0; i < rows; ++i) {
    const auto [a, b] = edges_[cursor_ + i];
    if (a >= embedding_->rows() || b >= embedding_->rows()) {
      fail(ErrorKind::kRange, "edge (" + std::to_string(a) + ", " + std::to_string(b) + ") references an unknown node");
    }
    edge_embed(op_, embedding_->row(a), embedding_->row(b), {batch.values.data() + i * dim, dim});
  }
  cursor_ += rows;
  return true;
}

RowFeatureSource::RowFeatureSource(const EmbeddingMatrix& matrix, std::span<const NodeId> rows,
                                   std::uint64_t batch_size)
    : matrix_(&matrix), rows_(rows), batch_size_(batch_size) {
  if (batch_size == 0) fail(ErrorKind::kConfig, "feature batch size must be positive");
}

bool RowFeatureSource::next(FeatureBatch& batch) {
  if (cursor_ >= rows_.size()) return false;
  const std::uint64_t rows = std::min<std::uint64_t>(batch_size_, rows_.size() - cursor_);
  const std::uint64_t dim = matrix_->dim();
  batch.first = cursor_;
  batch.rows = rows;
  batch.dim = dim;
  batch.values.resize(rows * dim);
  for (std::uint64_t i = 0; i < rows; ++i) {
    const NodeId id = rows_[cursor_ + i];
    if (id >= matrix_->rows()) fail(ErrorKind::kRange, "row " + std::to_string(id) + " out of range");
    const auto src = matrix_->row(id);
    std::copy(src.begin(), src.end(), batch.values.begin() + static_cast<std::ptrdiff_t>(i * dim));
  }
  cursor_ += rows;
  return true;
}

}  // namespace efg
