#pragma once

// Little-endian primitives and whole-file helpers shared by the file formats.

#include "dreamer/types.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace dreamer::binary {

using Bytes = std::vector<std::uint8_t>;

template <typename UInt>
void put_le(Bytes& out, UInt value) {
  for (std::size_t i = 0; i < sizeof(UInt); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

inline void put_f32(Bytes& out, float v) { put_le(out, std::bit_cast<std::uint32_t>(v)); }
inline void put_f64(Bytes& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

/// Bounds-checked little-endian reader over a byte span.
class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes, std::string what = "file")
      : bytes_(bytes), what_(std::move(what)) {}

  template <typename UInt>
  UInt get() {
    need(sizeof(UInt));
    UInt v = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<UInt>(bytes_[pos_ + i]) << (8 * i);
    pos_ += sizeof(UInt);
    return v;
  }
  float get_f32() { return std::bit_cast<float>(get<std::uint32_t>()); }
  double get_f64() { return std::bit_cast<double>(get<std::uint64_t>()); }

  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  void seek(std::size_t pos) {
    if (pos > bytes_.size()) throw FormatError(what_ + ": offset past end of data");
    pos_ = pos;
  }
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError(what_ + ": truncated");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::string what_;
};

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
inline void write_file(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace dreamer::binary
