#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace slump {

// Counter-based Philox4x32-10 stream. The (seed, stream) pair is the key and
// counter prefix, so any two streams are independent and each draw is a pure
// function of (seed, stream, position).
class RngStream {
 public:
  static constexpr const char* kAlgorithm = "philox4x32-10";

  explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_index() const { return stream_; }
  std::uint64_t position() const { return position_; }

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Unbiased integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  double normal();

  // Seed for an independent child stream; does not advance this stream.
  std::uint64_t derive_seed(std::uint64_t index) const;

  // One raw Philox block for the given key and 128-bit counter.
  static std::array<std::uint32_t, 4> block(std::uint64_t key, std::uint64_t ctr_hi, std::uint64_t ctr_lo);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t position_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;
};

// Fisher-Yates permutation of [0, n) drawn from rng.
std::vector<std::size_t> permutation(std::size_t n, RngStream& rng);

}  // namespace slump
