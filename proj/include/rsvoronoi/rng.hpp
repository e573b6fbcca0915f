#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace rsv {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Purpose tags used as the first element of stream paths.
namespace stream_tag {
inline constexpr std::uint64_t kThinning = 0x7468696e;    // retention marks
inline constexpr std::uint64_t kData = 0x64617461;        // simulated data replicates
inline constexpr std::uint64_t kEstimator = 0x65737469;   // estimator seeds per replicate
inline constexpr std::uint64_t kOracle = 0x6f72636c;      // Monte Carlo oracles
inline constexpr std::uint64_t kJitter = 0x6a697474;
}  // namespace stream_tag

/// Counter-based random stream addressed by (master seed, index path).
///
/// Output is a pure function of (seed, path, counter): there is no hidden state
/// beyond the sequential counter used by operator(), so streams can be created
/// independently on any thread and still reproduce bit-for-bit.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> path = {});

  RngStream child(std::uint64_t index) const;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return id_; }

  std::uint64_t bits_at(std::uint64_t counter) const;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform_at(std::uint64_t counter) const;

  result_type operator()() { return bits_at(counter_++); }
  double uniform() { return uniform_at(counter_++); }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

 private:
  RngStream(std::uint64_t seed, std::uint64_t id) : seed_(seed), id_(id) {}

  std::uint64_t seed_;
  std::uint64_t id_ = 0;
  std::uint64_t counter_ = 0;
};

/// A 64-bit seed derived from (seed, path); used to hand sub-tasks their own master seed.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

}  // namespace rsv
