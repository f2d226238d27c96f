// Reproducible random number streams.
//
// A stream is identified by a (seed, stream_id) pair and generates an
// identical draw sequence on every run and platform for the same build.
// The generator is a splitmix64 chain with a per-stream increment derived
// from the stream id, so distinct stream ids give statistically
// independent sequences without jump-ahead bookkeeping.  Streams are
// plain value types: copy one to fork its draw sequence, or use
// split_stream to derive child streams with fresh ids.

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace nmh {

namespace detail {

// Finalizer from the splitmix64 reference implementation.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an odd, well-mixed per-stream increment (the "gamma" trick from
// splittable PRNG designs).
inline std::uint64_t mix_gamma(std::uint64_t z) {
  z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdULL;
  z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ULL;
  z = (z ^ (z >> 33)) | 1ULL;
  // Require enough bit transitions; weak gammas make lattice artifacts.
  int transitions = __builtin_popcountll(z ^ (z >> 1));
  return (transitions < 24) ? z ^ 0xaaaaaaaaaaaaaaaaULL : z;
}

}  // namespace detail

class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed),
        stream_id_(stream_id),
        state_(detail::mix64(seed ^ detail::mix64(stream_id))),
        gamma_(detail::mix_gamma(detail::mix64(stream_id) + seed)) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() {
    state_ += gamma_;
    return detail::mix64(state_);
  }

  // Uniform on [0,1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0,1]; safe to pass to log().
  double uniform01_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Box-Muller, one normal per call (fixed draw count of two uniforms).
  double normal(double mean = 0.0, double sd = 1.0) {
    double u1 = uniform01_pos();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sd * r * std::cos(6.283185307179586476925286766559 * u2);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Uniform integer in [0, n).  n must be positive.
  std::uint64_t uniform_below(std::uint64_t n) {
    // Rejection-free 128-bit multiply trick; bias < 2^-64, irrelevant here.
    return static_cast<std::uint64_t>(
        (static_cast<__uint128_t>(next_u64()) * n) >> 64);
  }

  // Derives k child streams with distinct ids.  Pure function of
  // (seed, stream_id): does not consume draws and never depends on how far
  // this stream has advanced.
  std::vector<RngStream> split(int k) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_;
  std::uint64_t gamma_;
};

inline std::vector<RngStream> RngStream::split(int k) const {
  std::vector<RngStream> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    std::uint64_t child_id = detail::mix64(
        stream_id_ + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(i + 1));
    out.emplace_back(seed_, child_id);
  }
  return out;
}

inline std::vector<RngStream> split_stream(const RngStream& rng, int k) {
  return rng.split(k);
}

}  // namespace nmh
