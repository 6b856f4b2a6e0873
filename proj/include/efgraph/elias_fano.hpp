#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace efg {

/// Bits held by each component of an EliasFano sequence.
struct EliasFanoBits {
  std::uint64_t low = 0;
  std::uint64_t high = 0;
  std::uint64_t index = 0;  ///< both quantum position indexes

  std::uint64_t payload() const noexcept { return low + high; }
  std::uint64_t total() const noexcept { return low + high + index; }
};

/// Where a select started scanning the high bits and where it stopped.
struct SelectTrace {
  std::uint64_t scan_start = 0;  ///< index entry (or 0) the scan started from
  std::uint64_t position = 0;    ///< position of the located one
  std::uint64_t span_end = 0;    ///< next index entry, or end of the high bits
};

/// Quasi-succinct monotone sequence.
///
/// Every value is split into `low_bit_width()` low bits, packed contiguously,
/// and a high part stored as inverted-unary gaps (gap zeros, then a one).
/// Positions of every q-th one and every q-th zero are kept in two packed
/// indexes so select scans never cross more than one quantum span.
///
/// rank(m) counts values strictly lower than m.
class EliasFano {
 public:
  static constexpr std::uint64_t kDefaultQuantum = 1024;

  EliasFano() = default;

  /// Throws kOrder if `values` is not non-decreasing and kBound if a value
  /// exceeds `universe`.
  static EliasFano build(std::span<const std::uint64_t> values, std::uint64_t universe,
                         std::uint64_t quantum = kDefaultQuantum);

  std::uint64_t size() const noexcept { return n_; }
  bool empty() const noexcept { return n_ == 0; }
  std::uint64_t universe() const noexcept { return universe_; }
  std::uint64_t quantum() const noexcept { return quantum_; }
  unsigned low_bit_width() const noexcept { return low_width_; }
  std::uint64_t high_bit_length() const noexcept { return high_len_; }

  /// Number of stored values strictly lower than `m`.
  std::uint64_t rank(std::uint64_t m) const noexcept;

  /// The i-th smallest value; throws kRange when i >= size().
  std::uint64_t select(std::uint64_t i) const;
  std::uint64_t select_unchecked(std::uint64_t i) const noexcept;

  /// Instrumented select1 on the high bits, for verifying the scan bound.
  SelectTrace trace_select(std::uint64_t i) const;

  /// Decodes values [begin, end) sequentially into `out`, which must hold
  /// end - begin entries. One select, then a forward scan.
  void decode(std::uint64_t begin, std::uint64_t end, std::uint64_t* out) const noexcept;

  template <class Fn>
  void for_each(std::uint64_t begin, std::uint64_t end, Fn&& fn) const {
    if (begin >= end) return;
    std::uint64_t pos = select1(begin);
    std::uint64_t high = pos - begin;
    for (std::uint64_t i = begin;;) {
      fn(i, (high << low_width_) | low(i));
      if (++i == end) break;
      const std::uint64_t next = next_one(pos + 1);
      high += next - pos - 1;
      pos = next;
    }
  }

  EliasFanoBits bit_size() const noexcept;

  /// Little-endian, 64-bit words: header (magic, n, u, q, low width, high
  /// length, index counts, index width) followed by the packed arrays.
  void write(std::ostream& out) const;
  static EliasFano read(std::istream& in);

  friend bool operator==(const EliasFano&, const EliasFano&) = default;

 private:
  std::uint64_t low(std::uint64_t i) const noexcept;
  bool high_bit(std::uint64_t pos) const noexcept {
    return (high_[pos >> 6] >> (pos & 63)) & 1U;
  }
  std::uint64_t select1(std::uint64_t i) const noexcept;
  std::uint64_t select0(std::uint64_t k) const noexcept;
  std::uint64_t next_one(std::uint64_t pos) const noexcept;
  std::uint64_t index_entry(const std::vector<std::uint64_t>& index, std::uint64_t j) const noexcept;
  void build_indexes();

  std::uint64_t n_ = 0;
  std::uint64_t universe_ = 0;
  std::uint64_t quantum_ = kDefaultQuantum;
  unsigned low_width_ = 0;
  unsigned index_width_ = 1;
  std::uint64_t high_len_ = 0;
  std::uint64_t last_ = 0;
  std::uint64_t ones_entries_ = 0;
  std::uint64_t zeros_entries_ = 0;
  std::vector<std::uint64_t> low_;
  std::vector<std::uint64_t> high_;
  std::vector<std::uint64_t> ones_index_;   // position of one number j*q, j >= 1
  std::vector<std::uint64_t> zeros_index_;  // position of zero number j*q, j >= 1
};

namespace bits {

std::uint64_t packed_get(const std::uint64_t* words, unsigned width, std::uint64_t i) noexcept;
void packed_set(std::uint64_t* words, unsigned width, std::uint64_t i, std::uint64_t value) noexcept;

/// Position (0..63) of the r-th set bit of `word`; r < popcount(word).
unsigned select_in_word(std::uint64_t word, unsigned r) noexcept;

/// floor(log2(u / n)) with the n == 0 and u <= n guards (both give 0).
unsigned low_width_for(std::uint64_t n, std::uint64_t u) noexcept;

/// Smallest c >= 0 with n * 2^c >= u; equals ceil(log2(u / n)) for u >= n >= 1.
unsigned ceil_log2_ratio(std::uint64_t n, std::uint64_t u) noexcept;

}  // namespace bits

}  // namespace efg
