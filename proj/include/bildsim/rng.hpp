#pragma once

// Counter-based random streams.
//
// Every random quantity in bildsim is a pure function of (seed, domain,
// stream id, draw index). A stream is the Philox4x32-10 block cipher keyed by
// (seed, domain) and evaluated on the counter (stream id, block index), so
// any sample or trajectory can be regenerated independently of the order in
// which workers process them.

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>

namespace bildsim::rng {

/// Philox4x32 with 10 rounds (Salmon et al., Random123).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(Key key) : key_(key) {}

  Counter operator()(Counter counter) const;

 private:
  Key key_;
};

/// Domains keep streams of different subsystems disjoint for the same seed.
enum class Domain : std::uint32_t {
  field_samples = 1,
  hidden_variables = 2,
  quantum_outcomes = 3,
  brownian_noise = 4,
  brownian_initial = 5,
  test_fixtures = 6,
};

/// Sequential view over one counter-based stream.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, Domain domain, std::uint64_t stream_id);

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  /// Standard normal via Box-Muller; the second variate is cached.
  double normal();
  /// Circular complex Gaussian with E|z|^2 = 1 (real and imaginary parts
  /// independent N(0, 1/2)).
  std::complex<double> circular_normal();

 private:
  void refill();

  Philox4x32 cipher_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  Philox4x32::Counter buffer_{};
  int words_left_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// 0 means "all hardware threads".
unsigned resolve_threads(unsigned requested);

/// Runs body(begin, end) over a static partition of [0, count). The partition
/// only affects scheduling; callers index their randomness by element, so the
/// results do not depend on the number of threads.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace bildsim::rng
