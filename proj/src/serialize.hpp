#pragma once

// Little-endian word I/O shared by the binary formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "efgraph/error.hpp"

namespace efg::io {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

inline void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) fail(ErrorKind::kIo, "unexpected end of binary stream");
  return v;
}

inline void write_words(std::ostream& out, const std::vector<std::uint64_t>& words) {
  write_u64(out, words.size());
  out.write(reinterpret_cast<const char*>(words.data()), static_cast<std::streamsize>(words.size() * 8));
}

inline std::vector<std::uint64_t> read_words(std::istream& in, std::uint64_t expected) {
  const std::uint64_t count = read_u64(in);
  if (count != expected) fail(ErrorKind::kIo, "binary array length mismatch");
  std::vector<std::uint64_t> words(count);
  if (!in.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(count * 8))) {
    fail(ErrorKind::kIo, "unexpected end of binary stream");
  }
  return words;
}

template <class T>
void write_pod_array(std::ostream& out, const std::vector<T>& values) {
  write_u64(out, values.size());
  const std::size_t bytes = values.size() * sizeof(T);
  out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(bytes));
  // pad to a 64-bit boundary
  static const char zeros[8] = {};
  if (bytes % 8 != 0) out.write(zeros, static_cast<std::streamsize>(8 - bytes % 8));
}

template <class T>
std::vector<T> read_pod_array(std::istream& in) {
  const std::uint64_t count = read_u64(in);
  if (count > (1ULL << 40)) fail(ErrorKind::kIo, "corrupt array length");
  std::vector<T> values(count);
  const std::size_t bytes = count * sizeof(T);
  if (!in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(bytes))) {
    fail(ErrorKind::kIo, "unexpected end of binary stream");
  }
  if (bytes % 8 != 0) in.ignore(static_cast<std::streamsize>(8 - bytes % 8));
  return values;
}

inline void write_string(std::ostream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
  static const char zeros[8] = {};
  if (s.size() % 8 != 0) out.write(zeros, static_cast<std::streamsize>(8 - s.size() % 8));
}

inline std::string read_string(std::istream& in) {
  const std::uint64_t size = read_u64(in);
  if (size > (1ULL << 32)) fail(ErrorKind::kIo, "corrupt string length");
  std::string s(size, '\0');
  if (!in.read(s.data(), static_cast<std::streamsize>(size))) fail(ErrorKind::kIo, "unexpected end of binary stream");
  if (size % 8 != 0) in.ignore(static_cast<std::streamsize>(8 - size % 8));
  return s;
}

}  // namespace efg::io
