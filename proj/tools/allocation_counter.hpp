#pragma once

#include <cstdint>

namespace efg::alloc {

/// Live bytes handed out by the global operator new right now.
std::uint64_t current_bytes() noexcept;
/// Highest live byte count since the last reset_peak().
std::uint64_t peak_bytes() noexcept;
/// Allocations performed since process start.
std::uint64_t allocation_count() noexcept;
void reset_peak() noexcept;

}  // namespace efg::alloc
