#pragma once

// Little-endian encoding helpers shared by the chunk file format and the
// dispatcher/worker wire protocol.

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

namespace ssvd::detail {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T byteswap_if_big(T v) noexcept {
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

class ByteWriter {
 public:
  template <typename T>
  void put(T v) {
    static_assert(std::is_arithmetic_v<T>);
    v = byteswap_if_big(v);
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  template <typename T>
  void put_array(std::span<const T> values) {
    if constexpr (std::endian::native == std::endian::little) {
      const auto* p = reinterpret_cast<const std::uint8_t*>(values.data());
      bytes_.insert(bytes_.end(), p, p + values.size_bytes());
    } else {
      for (T v : values) put(v);
    }
  }
  void put_bytes(std::span<const std::uint8_t> b) { bytes_.insert(bytes_.end(), b.begin(), b.end()); }

  std::vector<std::uint8_t>& bytes() noexcept { return bytes_; }
  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

/// Bounds-checked reader. `Fail` is called as fail(message, offset) and must throw.
template <typename Fail>
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, Fail fail, std::uint64_t base_offset = 0)
      : bytes_(bytes), fail_(fail), base_(base_offset) {}

  template <typename T>
  T get(const char* what) {
    static_assert(std::is_arithmetic_v<T>);
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return byteswap_if_big(v);
  }
  /// Reads `count` values into `out`; checks the size before allocating.
  template <typename T, typename Vec>
  void get_array(Vec& out, std::uint64_t count, const char* what) {
    if (count > remaining() / sizeof(T)) fail_(std::string(what) + ": length exceeds available bytes", offset());
    out.resize(static_cast<std::size_t>(count));
    std::memcpy(out.data(), bytes_.data() + pos_, static_cast<std::size_t>(count) * sizeof(T));
    pos_ += static_cast<std::size_t>(count) * sizeof(T);
    if constexpr (std::endian::native == std::endian::big)
      for (auto& v : out) v = byteswap_if_big(v);
  }
  std::span<const std::uint8_t> get_bytes(std::size_t count, const char* what) {
    need(count, what);
    auto s = bytes_.subspan(pos_, count);
    pos_ += count;
    return s;
  }

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
  std::uint64_t offset() const noexcept { return base_ + pos_; }

 private:
  void need(std::size_t n, const char* what) {
    if (remaining() < n) fail_(std::string("truncated input while reading ") + what, offset());
  }

  std::span<const std::uint8_t> bytes_;
  Fail fail_;
  std::uint64_t base_;
  std::size_t pos_ = 0;
};

}  // namespace ssvd::detail
