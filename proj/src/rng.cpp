#include "rsvoronoi/rng.hpp"

namespace rsv {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

// Path hashing uses a tweaked key so stream ids never alias draw blocks.
constexpr std::uint32_t kPathTweak = 0x5bd1e995u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

inline std::array<std::uint32_t, 2> split(std::uint64_t v) {
  return {static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(v >> 32)};
}

inline std::uint64_t join(std::uint32_t lo, std::uint32_t hi) {
  return static_cast<std::uint64_t>(lo) | (static_cast<std::uint64_t>(hi) << 32);
}

std::uint64_t hash_path_step(std::uint64_t seed, std::uint64_t id, std::uint64_t index) {
  const auto i = split(id);
  const auto k = split(index);
  auto key = split(seed);
  key[0] ^= kPathTweak;
  const auto out = philox4x32_10({i[0], i[1], k[0], k[1]}, key);
  return join(out[0], out[1]);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

RngStream::RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) : seed_(seed) {
  for (std::uint64_t index : path) id_ = hash_path_step(seed_, id_, index);
}

RngStream RngStream::child(std::uint64_t index) const {
  return RngStream(seed_, hash_path_step(seed_, id_, index));
}

std::uint64_t RngStream::bits_at(std::uint64_t counter) const {
  const auto c = split(counter);
  const auto s = split(id_);
  const auto out = philox4x32_10({c[0], c[1], s[0], s[1]}, split(seed_));
  return join(out[0], out[1]);
}

double RngStream::uniform_at(std::uint64_t counter) const {
  return static_cast<double>(bits_at(counter) >> 11) * 0x1.0p-53;
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  return RngStream(seed, path).bits_at(~std::uint64_t{0});
}

}  // namespace rsv
