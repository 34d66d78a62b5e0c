#pragma once

#include "pulsehr/error.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

namespace pulsehr::models::detail {

/// Little-endian append-only encoder.
class ByteWriter {
public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { put(v); }
  void u32(std::uint32_t v) { put(v); }
  void u64(std::uint64_t v) { put(v); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }
  void f64s(std::span<const double> vs) {
    for (double v : vs)
      f64(v);
  }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }

  /// Appends `section` prefixed by its u32 length.
  void section(const ByteWriter& section) {
    u32(static_cast<std::uint32_t>(section.out_.size()));
    bytes(section.out_);
  }

  const std::vector<std::uint8_t>& data() const noexcept { return out_; }
  std::vector<std::uint8_t> take() { return std::move(out_); }

private:
  template <class T> void put(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i)
      out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  std::vector<std::uint8_t> out_;
};

/// Bounds-checked little-endian decoder; overruns throw TruncatedPayload.
class ByteReader {
public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() { return get<std::uint8_t>(); }
  std::uint16_t u16() { return get<std::uint16_t>(); }
  std::uint32_t u32() { return get<std::uint32_t>(); }
  std::uint64_t u64() { return get<std::uint64_t>(); }
  double f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
  std::vector<double> f64s(std::size_t n) {
    need(n, sizeof(double));
    std::vector<double> out(n);
    for (auto& v : out)
      v = f64();
    return out;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n, 1);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  /// Reads a u32 length prefix and returns a reader over that section.
  ByteReader section() { return ByteReader(take(u32())); }

  std::size_t remaining() const noexcept { return in_.size() - pos_; }

private:
  void need(std::size_t count, std::size_t width) const {
    if (width != 0 && count > remaining() / width)
      throw Error(ErrorCode::TruncatedPayload,
                  "need " + std::to_string(count * width) + " bytes at offset " +
                      std::to_string(pos_) + ", have " + std::to_string(remaining()));
  }

  template <class T> T get() {
    need(1, sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      v = static_cast<T>(v | static_cast<T>(static_cast<T>(in_[pos_ + i]) << (8 * i)));
    pos_ += sizeof(T);
    return v;
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

} // namespace pulsehr::models::detail
