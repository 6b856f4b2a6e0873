#include "efgraph/error.hpp"

namespace efg {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kValue: return "value error";
    case ErrorKind::kDuplicate: return "duplicate error";
    case ErrorKind::kRange: return "range error";
    case ErrorKind::kOrder: return "order error";
    case ErrorKind::kBound: return "bound error";
    case ErrorKind::kIo: return "i/o error";
    case ErrorKind::kConfig: return "configuration error";
    case ErrorKind::kDistribution: return "distribution error";
    case ErrorKind::kInfeasible: return "infeasible request";
    case ErrorKind::kDivergence: return "divergence";
    case ErrorKind::kDegenerate: return "degenerate input";
    case ErrorKind::kContract: return "contract violation";
    case ErrorKind::kShape: return "shape error";
  }
  return "unknown error";
}

}  // namespace efg
