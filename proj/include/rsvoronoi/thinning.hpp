#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rsvoronoi/errors.hpp"
#include "rsvoronoi/geometry.hpp"
#include "rsvoronoi/rng.hpp"

namespace rsv {

// Independent thinning. Point i of a pattern is retained at level p iff its
// retention mark u_i = stream.uniform_at(i) is below p. Marks depend only on
// (seed, replicate, point index), so
//   - thinnings at different p from the same stream are nested, and
//   - dropping point i from the input leaves every other point's fate unchanged,
// which is the coupling the leave-one-out criterion relies on.

/// Stream carrying the retention marks of thinning replicate `replicate`.
inline RngStream thinning_stream(std::uint64_t seed, std::uint64_t replicate) {
  return RngStream(seed, {stream_tag::kThinning, replicate});
}

inline void check_probability(double p) {
  if (!(p > 0.0 && p <= 1.0))
    throw Error(Errc::InvalidProbability, "retention probability " + std::to_string(p) + " not in (0, 1]");
}

inline std::vector<std::size_t> retained_indices(std::size_t n, double p, const RngStream& stream) {
  check_probability(p);
  std::vector<std::size_t> kept;
  kept.reserve(static_cast<std::size_t>(std::ceil(p * static_cast<double>(n))) + 8);
  for (std::size_t i = 0; i < n; ++i)
    if (stream.uniform_at(i) < p) kept.push_back(i);
  return kept;
}

template <class T>
std::vector<T> p_thin(std::span<const T> points, double p, const RngStream& stream) {
  std::vector<T> out;
  for (std::size_t i : retained_indices(points.size(), p, stream)) out.push_back(points[i]);
  return out;
}

inline PointPattern p_thin(const PointPattern& pattern, double p, const RngStream& stream) {
  const auto kept = retained_indices(pattern.size(), p, stream);
  return pattern.subset(kept);
}

inline void check_decreasing(std::span<const double> p_desc) {
  if (p_desc.empty()) throw Error(Errc::InvalidSequence, "probability sequence is empty");
  for (std::size_t j = 0; j < p_desc.size(); ++j) {
    if (!(p_desc[j] > 0.0 && p_desc[j] <= 1.0))
      throw Error(Errc::InvalidSequence, "probability " + std::to_string(p_desc[j]) + " not in (0, 1]");
    if (j > 0 && !(p_desc[j] < p_desc[j - 1]))
      throw Error(Errc::InvalidSequence, "probabilities must be strictly decreasing");
  }
}

/// Index sets (X_{p_k}, ..., X_{p_1}) for strictly decreasing p_desc. Each set
/// is obtained from its predecessor by keeping the points whose rescaled mark
/// u_i / p_{j} falls below p_{j-1} / p_{j}, i.e. a p_{j-1}/p_{j}-thinning.
inline std::vector<std::vector<std::size_t>> nested_retained_indices(std::size_t n,
                                                                     std::span<const double> p_desc,
                                                                     const RngStream& stream) {
  check_decreasing(p_desc);
  std::vector<std::vector<std::size_t>> chain;
  chain.reserve(p_desc.size());
  chain.push_back(retained_indices(n, p_desc[0], stream));
  for (std::size_t j = 1; j < p_desc.size(); ++j) {
    std::vector<std::size_t> next;
    for (std::size_t i : chain.back())
      if (stream.uniform_at(i) < p_desc[j]) next.push_back(i);
    chain.push_back(std::move(next));
  }
  return chain;
}

inline std::vector<PointPattern> nested_thin(const PointPattern& pattern, std::span<const double> p_desc,
                                             const RngStream& stream) {
  std::vector<PointPattern> out;
  for (const auto& kept : nested_retained_indices(pattern.size(), p_desc, stream))
    out.push_back(pattern.subset(kept));
  return out;
}

/// Location-dependent retention p_fn(x) in [0, 1]; throws RetentionOutOfRange.
template <class T, class Fn>
std::vector<std::size_t> function_retained_indices(std::span<const T> points, Fn&& p_fn,
                                                   const RngStream& stream) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double p = p_fn(points[i]);
    if (!(p >= 0.0 && p <= 1.0))
      throw Error(Errc::RetentionOutOfRange,
                  "retention " + std::to_string(p) + " at point " + std::to_string(i));
    if (stream.uniform_at(i) < p) kept.push_back(i);
  }
  return kept;
}

template <class Fn>
PointPattern function_thin(const PointPattern& pattern, Fn&& p_fn, const RngStream& stream) {
  const auto kept = function_retained_indices(pattern.points(), p_fn, stream);
  return pattern.subset(kept);
}

}  // namespace rsv
