#pragma once

// Little-endian byte buffer helpers shared by the binary containers.

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eventflux/error.hpp"

namespace eventflux::detail {

class ByteWriter {
 public:
  void put_magic(std::string_view magic) {
    out_.insert(out_.end(), magic.begin(), magic.end());
  }
  void put_u8(std::uint8_t v) { out_.push_back(v); }
  void put_u16(std::uint16_t v) { put_le(v); }
  void put_u32(std::uint32_t v) { put_le(v); }
  void put_u64(std::uint64_t v) { put_le(v); }
  void put_i64(std::int64_t v) { put_le(static_cast<std::uint64_t>(v)); }
  void put_f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_le(bits);
  }
  void put_string(std::string_view s) {
    put_u32(static_cast<std::uint32_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void reserve(std::size_t n) { out_.reserve(n); }

  std::vector<std::uint8_t> take() && { return std::move(out_); }

 private:
  template <typename U>
  void put_le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  std::vector<std::uint8_t> out_;
};

/// Reads fixed-width little-endian fields; any overrun throws `kind` with the
/// offset and the name of the field being read.
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, std::string_view container,
             ErrorKind kind = ErrorKind::Format)
      : bytes_(bytes), container_(container), kind_(kind) {}

  bool expect_magic(std::string_view magic) const {
    return bytes_.size() >= magic.size() &&
           std::memcmp(bytes_.data(), magic.data(), magic.size()) == 0;
  }
  void skip(std::size_t n, std::string_view what) {
    need(n, what);
    pos_ += n;
  }
  std::uint8_t u8(std::string_view what) { return get_le<std::uint8_t>(what); }
  std::uint16_t u16(std::string_view what) { return get_le<std::uint16_t>(what); }
  std::uint32_t u32(std::string_view what) { return get_le<std::uint32_t>(what); }
  std::uint64_t u64(std::string_view what) { return get_le<std::uint64_t>(what); }
  std::int64_t i64(std::string_view what) { return static_cast<std::int64_t>(u64(what)); }
  float f32(std::string_view what) {
    const std::uint32_t bits = u32(what);
    float v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  std::string string(std::string_view what) {
    const std::uint32_t n = u32(what);
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  std::size_t position() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, std::string_view what) const {
    if (remaining() < n)
      throw Error(kind_, std::string(container_) + ": truncated while reading " + std::string(what) +
                             " at offset " + std::to_string(pos_));
  }
  template <typename U>
  U get_le(std::string_view what) {
    need(sizeof(U), what);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(U{bytes_[pos_ + i]} << (8 * i));
    pos_ += sizeof(U);
    return v;
  }

  std::span<const std::uint8_t> bytes_;
  std::string_view container_;
  ErrorKind kind_;
  std::size_t pos_ = 0;
};

}  // namespace eventflux::detail
