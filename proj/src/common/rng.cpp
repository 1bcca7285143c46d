#include "martsia/rng.hpp"

#include <openssl/rand.h>

#include <algorithm>

#include "martsia/crypto/hash.hpp"
#include "martsia/error.hpp"

namespace martsia {

void SystemRng::fill(std::span<std::uint8_t> out) {
  if (out.empty()) return;
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
    fail(Errc::IoError, "system randomness unavailable");
  }
}

SeededRng::SeededRng(std::uint64_t seed) {
  ByteWriter w;
  w.str("martsia/seeded-rng").u64(seed);
  seed_ = crypto::hash256(w.data()).bytes;
}

SeededRng::SeededRng(ByteView seed) {
  seed_ = crypto::hash256({as_bytes("martsia/seeded-rng"), seed}).bytes;
}

void SeededRng::refill() {
  ByteWriter w;
  w.raw(seed_).u64(counter_++);
  block_ = crypto::hash256(w.data()).bytes;
  used_ = 0;
}

void SeededRng::fill(std::span<std::uint8_t> out) {
  std::size_t pos = 0;
  while (pos < out.size()) {
    if (used_ == block_.size()) refill();
    std::size_t n = std::min(out.size() - pos, block_.size() - used_);
    std::copy_n(block_.begin() + static_cast<std::ptrdiff_t>(used_), n,
                out.begin() + static_cast<std::ptrdiff_t>(pos));
    used_ += n;
    pos += n;
  }
}

}  // namespace martsia
