#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "rsvoronoi/geometry.hpp"

namespace rsv {

using SpatialFn = std::function<double(Point2)>;

/// A named closed-form function together with an upper bound on the window
/// [0,1]² (for log-type functions: an upper bound on exp(f)).
struct BuiltinFn {
  std::string name;
  SpatialFn fn;
  double bound;
};

/// builtin:sin16        |10 + 90 sin(16x)|                         bound 100
/// builtin:log40sin20   log(40 |sin(20x)|)                          bound 40 (of exp)
/// builtin:ssi-retention piecewise |x - c| retention                bound 0.3134
/// The "builtin:" prefix is optional. Throws ConfigMismatch for unknown names.
const BuiltinFn& builtin(std::string_view name);
std::vector<std::string> builtin_names();

/// Homogeneous Poisson process on the window.
PointPattern sim_hpp(double rho, const PlanarWindow& window, std::uint64_t seed);

/// Inhomogeneous Poisson process by thinning HPP(rho_max) with rho_fn/rho_max.
/// Throws DominatingIntensityViolated.
PointPattern sim_ipp(const SpatialFn& rho_fn, double rho_max, const PlanarWindow& window,
                     std::uint64_t seed);

struct LgcpParams {
  SpatialFn mean_fn;           // mean of the Gaussian field (log scale)
  double mean_exp_max = 1.0;   // upper bound of exp(mean_fn) on the window
  double variance = 0.0;
  double scale = 1.0;          // exponential covariance range
  int cov_grid = 64;
};

/// Log-Gaussian Cox process. The zero-mean part of the Gaussian field lives on
/// a cov_grid² lattice over the bounding box with covariance
/// variance·exp(-d/scale) between cell centres; the covariance factor is
/// computed once per simulator. The mean function enters pointwise.
class LgcpSimulator {
 public:
  /// Throws ConfigMismatch for bad parameters, CovarianceNotFactorizable.
  LgcpSimulator(LgcpParams params, PlanarWindow window);
  ~LgcpSimulator();
  LgcpSimulator(LgcpSimulator&&) noexcept;
  LgcpSimulator& operator=(LgcpSimulator&&) noexcept;

  int lattice() const noexcept { return params_.cov_grid; }
  /// Centre of lattice cell (row-major, row 0 south).
  Point2 lattice_center(std::size_t cell) const;
  /// Diagonal jitter that made the covariance factorizable.
  double jitter() const noexcept { return jitter_; }

  /// Zero-mean Gaussian field values at the lattice cells.
  std::vector<double> sample_field(std::uint64_t seed) const;
  PointPattern sample(std::uint64_t seed) const;

 private:
  struct Factor;
  LgcpParams params_;
  PlanarWindow window_;
  std::unique_ptr<Factor> factor_;
  double jitter_ = 0.0;
};

PointPattern sim_lgcp(const LgcpParams& params, const PlanarWindow& window, std::uint64_t seed);

struct SsiResult {
  PointPattern pattern;     // after thinning
  std::size_t accepted;     // hard-core points before thinning
  std::size_t attempts;
  bool saturated;           // fewer than n points fitted within max_attempts
};

/// Simple sequential inhibition with n points at pairwise distance >= r,
/// followed by independent thinning with p_fn. max_attempts = 0 means 10^4·n.
/// Throws ConfigMismatch for n = 0 or r < 0, RetentionOutOfRange.
SsiResult sim_ssi_thinned(std::size_t n, double r, const SpatialFn& p_fn, const PlanarWindow& window,
                          std::uint64_t seed, std::size_t max_attempts = 0);

enum class ModelKind { Hpp, Ipp, Lgcp, SsiThinned };

/// One of the four simulation models with its parameters.
struct ModelSpec {
  ModelKind kind = ModelKind::Hpp;
  std::string function = "";  // builtin name for ipp / lgcp / ssi-thinned
  double rho = 60.0;          // hpp
  double rho_max = 0.0;       // ipp; 0 means the builtin's bound
  double variance = 2.0;      // lgcp
  double scale = 0.1;         // lgcp
  int cov_grid = 64;          // lgcp
  std::size_t n = 450;        // ssi
  double r = 0.03;            // ssi
  std::size_t max_attempts = 0;

  /// "hpp", "ipp[:builtin:sin16]", "lgcp[:builtin:log40sin20]",
  /// "ssi-thinned[:builtin:ssi-retention]". Throws ConfigMismatch.
  static ModelSpec parse(std::string_view text);
  std::string describe() const;
};

/// Draws patterns from a model; LGCP factorization is shared across draws.
class ModelSampler {
 public:
  ModelSampler(const ModelSpec& spec, const PlanarWindow& window);

  const ModelSpec& spec() const noexcept { return spec_; }
  PointPattern sample(std::uint64_t seed) const;
  /// The model's intensity function.
  SpatialFn true_intensity() const;

 private:
  ModelSpec spec_;
  PlanarWindow window_;
  std::shared_ptr<const LgcpSimulator> lgcp_;
};

}  // namespace rsv
