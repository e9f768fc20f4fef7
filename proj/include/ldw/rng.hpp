#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace ldw {

// Counter-based generator. Draws are a pure function of (seed, stream, draw
// position), so any replicate can be regenerated independently on any thread
// or platform. Bump kRngVersion whenever the mapping from (seed, stream) to
// output bits changes.
inline constexpr std::string_view kRngVersion = "philox4x32-10/box-muller/1";

struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  // Ten rounds of Philox-4x32 (Salmon et al., 2011).
  static Counter block(Counter counter, Key key);
};

class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  double normal();
  // +1 or -1 with probability 1/2 each, one random bit per draw.
  int rademacher();
  bool bernoulli(double p) { return uniform() < p; }

 private:
  void refill();

  Philox4x32::Key key_{};
  Philox4x32::Counter counter_{};
  Philox4x32::Counter buffer_{};
  int used_ = 4;
  std::uint64_t bits_ = 0;
  int bits_left_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

// Stream id for (replicate, role) pairs inside one estimator. Roles separate
// the independent copies that product-of-expectation terms need.
inline constexpr std::uint64_t stream_id(std::uint64_t replicate, std::uint32_t role) {
  return (replicate << 4) | (role & 0xFu);
}

// Stream id mixed from an arbitrary tuple of labels (splitmix64 chain).
std::uint64_t derive_stream(std::initializer_list<std::uint64_t> labels);

}  // namespace ldw
