#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

#include "martsia/bytes.hpp"

namespace martsia {

/// Source of randomness consumed by key generation, encryption and the
/// ceremony. Implementations need not be thread-safe.
class Rng {
 public:
  virtual ~Rng() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;

  template <std::size_t N>
  std::array<std::uint8_t, N> draw() {
    std::array<std::uint8_t, N> out{};
    fill(out);
    return out;
  }
  Bytes draw(std::size_t n) {
    Bytes out(n);
    fill(out);
    return out;
  }
};

/// Operating-system CSPRNG (OpenSSL RAND_bytes).
class SystemRng final : public Rng {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

/// Deterministic generator: SHA-256(seed || counter) blocks. For tests and
/// reproducible fixtures only.
class SeededRng final : public Rng {
 public:
  explicit SeededRng(std::uint64_t seed);
  explicit SeededRng(ByteView seed);
  void fill(std::span<std::uint8_t> out) override;

 private:
  void refill();

  std::array<std::uint8_t, 32> seed_{};
  std::uint64_t counter_ = 0;
  std::array<std::uint8_t, 32> block_{};
  std::size_t used_ = 32;
};

}  // namespace martsia
