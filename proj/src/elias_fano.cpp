#include "efgraph/elias_fano.hpp"

#include <bit>
#include <istream>
#include <ostream>
#include <string>

#include "efgraph/error.hpp"
#include "serialize.hpp"

namespace efg {
namespace bits {

std::uint64_t packed_get(const std::uint64_t* words, unsigned width, std::uint64_t i) noexcept {
  if (width == 0) return 0;
  const std::uint64_t bit = i * width;
  const std::uint64_t word = bit >> 6;
  const unsigned shift = bit & 63;
  const std::uint64_t mask = width == 64 ? ~0ULL : ((1ULL << width) - 1);
  std::uint64_t value = words[word] >> shift;
  if (shift + width > 64) value |= words[word + 1] << (64 - shift);
  return value & mask;
}

void packed_set(std::uint64_t* words, unsigned width, std::uint64_t i, std::uint64_t value) noexcept {
  if (width == 0) return;
  const std::uint64_t bit = i * width;
  const std::uint64_t word = bit >> 6;
  const unsigned shift = bit & 63;
  const std::uint64_t mask = width == 64 ? ~0ULL : ((1ULL << width) - 1);
  value &= mask;
  words[word] = (words[word] & ~(mask << shift)) | (value << shift);
  if (shift + width > 64) {
    const unsigned spill = 64 - shift;
    words[word + 1] = (words[word + 1] & ~(mask >> spill)) | (value >> spill);
  }
}

unsigned select_in_word(std::uint64_t word, unsigned r) noexcept {
  // skip whole bytes first, then clear the remaining lower set bits
  unsigned base = 0;
  for (;;) {
    const auto c = static_cast<unsigned>(std::popcount(word & 0xffU));
    if (r < c) break;
    r -= c;
    word >>= 8;
    base += 8;
  }
  for (; r > 0; --r) word &= word - 1;
  return base + static_cast<unsigned>(std::countr_zero(word));
}

unsigned low_width_for(std::uint64_t n, std::uint64_t u) noexcept {
  if (n == 0 || u <= n) return 0;
  return static_cast<unsigned>(std::bit_width(u / n) - 1);
}

unsigned ceil_log2_ratio(std::uint64_t n, std::uint64_t u) noexcept {
  unsigned c = 0;
  while (c < 64 && (static_cast<__uint128_t>(n) << c) < u) ++c;
  return c;
}

}  // namespace bits

namespace {

constexpr std::uint64_t kMagic = 0x3146454850524745ULL;  // "EGRPHEF1"

std::uint64_t words_for(std::uint64_t bit_count) { return (bit_count + 63) / 64; }

}  // namespace

EliasFano EliasFano::build(std::span<const std::uint64_t> values, std::uint64_t universe,
                           std::uint64_t quantum) {
  if (quantum == 0) fail(ErrorKind::kConfig, "elias-fano quantum must be positive");
  EliasFano ef;
  ef.n_ = values.size();
  ef.universe_ = universe;
  ef.quantum_ = quantum;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > universe) {
      fail(ErrorKind::kBound, "value " + std::to_string(values[i]) + " at position " + std::to_string(i) +
                                  " exceeds universe " + std::to_string(universe));
    }
    if (i > 0 && values[i] < values[i - 1]) {
      fail(ErrorKind::kOrder, "values are not sorted at position " + std::to_string(i));
    }
  }
  ef.low_width_ = bits::low_width_for(ef.n_, universe);
  if (ef.n_ == 0) {
    ef.build_indexes();
    return ef;
  }
  ef.last_ = values.back();
  ef.high_len_ = ef.n_ + (ef.last_ >> ef.low_width_);
  ef.low_.assign(words_for(ef.n_ * ef.low_width_) + 1, 0);
  ef.high_.assign(words_for(ef.high_len_) + 1, 0);
  const std::uint64_t mask = ef.low_width_ == 0 ? 0 : ((1ULL << ef.low_width_) - 1);
  for (std::uint64_t i = 0; i < ef.n_; ++i) {
    const std::uint64_t v = values[i];
    bits::packed_set(ef.low_.data(), ef.low_width_, i, v & mask);
    const std::uint64_t pos = (v >> ef.low_width_) + i;
    ef.high_[pos >> 6] |= 1ULL << (pos & 63);
  }
  ef.build_indexes();
  return ef;
}

void EliasFano::build_indexes() {
  index_width_ = std::max<unsigned>(1, static_cast<unsigned>(std::bit_width(high_len_)));
  const std::uint64_t zeros = high_len_ - n_;
  ones_entries_ = n_ == 0 ? 0 : (n_ - 1) / quantum_;
  zeros_entries_ = zeros == 0 ? 0 : (zeros - 1) / quantum_;
  ones_index_.assign(words_for(ones_entries_ * index_width_) + 1, 0);
  zeros_index_.assign(words_for(zeros_entries_ * index_width_) + 1, 0);
  std::uint64_t ones_seen = 0;
  std::uint64_t zeros_seen = 0;
  for (std::uint64_t pos = 0; pos < high_len_; ++pos) {
    if (high_bit(pos)) {
      if (ones_seen > 0 && ones_seen % quantum_ == 0) {
        bits::packed_set(ones_index_.data(), index_width_, ones_seen / quantum_ - 1, pos);
      }
      ++ones_seen;
    } else {
      if (zeros_seen > 0 && zeros_seen % quantum_ == 0) {
        bits::packed_set(zeros_index_.data(), index_width_, zeros_seen / quantum_ - 1, pos);
      }
      ++zeros_seen;
    }
  }
}

std::uint64_t EliasFano::low(std::uint64_t i) const noexcept {
  return bits::packed_get(low_.data(), low_width_, i);
}

std::uint64_t EliasFano::index_entry(const std::vector<std::uint64_t>& index, std::uint64_t j) const noexcept {
  return bits::packed_get(index.data(), index_width_, j);
}

std::uint64_t EliasFano::select1(std::uint64_t i) const noexcept {
  const std::uint64_t j = i / quantum_;
  std::uint64_t pos = 0;
  std::uint64_t remaining = i;
  if (j > 0) {
    pos = index_entry(ones_index_, j - 1);
    remaining = i - j * quantum_;
  }
  std::uint64_t word_idx = pos >> 6;
  std::uint64_t word = high_[word_idx] & (~0ULL << (pos & 63));
  for (;;) {
    const auto c = static_cast<std::uint64_t>(std::popcount(word));
    if (remaining < c) break;
    remaining -= c;
    word = high_[++word_idx];
  }
  return (word_idx << 6) + bits::select_in_word(word, static_cast<unsigned>(remaining));
}

std::uint64_t EliasFano::select0(std::uint64_t k) const noexcept {
  const std::uint64_t j = k / quantum_;
  std::uint64_t pos = 0;
  std::uint64_t remaining = k;
  if (j > 0) {
    pos = index_entry(zeros_index_, j - 1);
    remaining = k - j * quantum_;
  }
  std::uint64_t word_idx = pos >> 6;
  std::uint64_t word = ~high_[word_idx] & (~0ULL << (pos & 63));
  for (;;) {
    const auto c = static_cast<std::uint64_t>(std::popcount(word));
    if (remaining < c) break;
    remaining -= c;
    word = ~high_[++word_idx];
  }
  return (word_idx << 6) + bits::select_in_word(word, static_cast<unsigned>(remaining));
}

std::uint64_t EliasFano::next_one(std::uint64_t pos) const noexcept {
  std::uint64_t word_idx = pos >> 6;
  std::uint64_t word = high_[word_idx] & (~0ULL << (pos & 63));
  while (word == 0) word = high_[++word_idx];
  return (word_idx << 6) + static_cast<std::uint64_t>(std::countr_zero(word));
}

std::uint64_t EliasFano::rank(std::uint64_t m) const noexcept {
  if (n_ == 0 || m == 0) return 0;
  if (m > last_) return n_;
  const std::uint64_t high_m = m >> low_width_;
  const std::uint64_t low_m = low_width_ == 0 ? 0 : (m & ((1ULL << low_width_) - 1));
  std::uint64_t pos = 0;
  std::uint64_t idx = 0;
  if (high_m > 0) {
    const std::uint64_t zero_pos = select0(high_m - 1);
    pos = zero_pos + 1;
    idx = zero_pos - (high_m - 1);
  }
  // values sharing the high part of m: ones until the next zero
  while (pos < high_len_ && high_bit(pos)) {
    if (low(idx) >= low_m) break;
    ++idx;
    ++pos;
  }
  return idx;
}

std::uint64_t EliasFano::select_unchecked(std::uint64_t i) const noexcept {
  const std::uint64_t pos = select1(i);
  return ((pos - i) << low_width_) | low(i);
}

std::uint64_t EliasFano::select(std::uint64_t i) const {
  if (i >= n_) {
    fail(ErrorKind::kRange, "select index " + std::to_string(i) + " out of range for size " + std::to_string(n_));
  }
  return select_unchecked(i);
}

SelectTrace EliasFano::trace_select(std::uint64_t i) const {
  if (i >= n_) {
    fail(ErrorKind::kRange, "select index " + std::to_string(i) + " out of range for size " + std::to_string(n_));
  }
  const std::uint64_t j = i / quantum_;
  SelectTrace trace;
  trace.scan_start = j == 0 ? 0 : index_entry(ones_index_, j - 1);
  trace.span_end = j < ones_entries_ ? index_entry(ones_index_, j) : high_len_;
  trace.position = select1(i);
  return trace;
}

void EliasFano::decode(std::uint64_t begin, std::uint64_t end, std::uint64_t* out) const noexcept {
  for_each(begin, end, [&](std::uint64_t i, std::uint64_t v) { out[i - begin] = v; });
}

EliasFanoBits EliasFano::bit_size() const noexcept {
  EliasFanoBits b;
  b.low = n_ * low_width_;
  b.high = high_len_;
  b.index = (ones_entries_ + zeros_entries_) * index_width_;
  return b;
}

void EliasFano::write(std::ostream& out) const {
  io::write_u64(out, kMagic);
  io::write_u64(out, n_);
  io::write_u64(out, universe_);
  io::write_u64(out, quantum_);
  io::write_u64(out, low_width_);
  io::write_u64(out, high_len_);
  io::write_u64(out, index_width_);
  io::write_u64(out, ones_entries_);
  io::write_u64(out, zeros_entries_);
  io::write_words(out, low_);
  io::write_words(out, high_);
  io::write_words(out, ones_index_);
  io::write_words(out, zeros_index_);
}

EliasFano EliasFano::read(std::istream& in) {
  if (io::read_u64(in) != kMagic) fail(ErrorKind::kIo, "not an elias-fano stream");
  EliasFano ef;
  ef.n_ = io::read_u64(in);
  ef.universe_ = io::read_u64(in);
  ef.quantum_ = io::read_u64(in);
  ef.low_width_ = static_cast<unsigned>(io::read_u64(in));
  ef.high_len_ = io::read_u64(in);
  ef.index_width_ = static_cast<unsigned>(io::read_u64(in));
  ef.ones_entries_ = io::read_u64(in);
  ef.zeros_entries_ = io::read_u64(in);
  if (ef.quantum_ == 0 || ef.low_width_ > 63 || ef.index_width_ == 0 || ef.index_width_ > 64 ||
      ef.high_len_ < ef.n_) {
    fail(ErrorKind::kIo, "corrupt elias-fano header");
  }
  ef.low_ = io::read_words(in, words_for(ef.n_ * ef.low_width_) + 1);
  ef.high_ = io::read_words(in, words_for(ef.high_len_) + 1);
  ef.ones_index_ = io::read_words(in, words_for(ef.ones_entries_ * ef.index_width_) + 1);
  ef.zeros_index_ = io::read_words(in, words_for(ef.zeros_entries_ * ef.index_width_) + 1);
  if (ef.n_ > 0) ef.last_ = ef.select_unchecked(ef.n_ - 1);
  return ef;
}

}  // namespace efg
