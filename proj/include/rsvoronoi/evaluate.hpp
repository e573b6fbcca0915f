#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rsvoronoi/geometry.hpp"
#include "rsvoronoi/simulate.hpp"

namespace rsv {

struct SweepEntry {
  double p = 1.0;
  std::size_t m = 1;

  friend bool operator==(const SweepEntry&, const SweepEntry&) = default;
};

/// "p=0.1:1.0:0.1,m=200" or "p=0.2,0.5,m=1,200": comma-separated values, a
/// bare value extends the preceding key, a:b:step is an inclusive range.
/// Rows are ordered p-major. Throws ParseError.
std::vector<SweepEntry> parse_sweep(std::string_view text);

struct SweepResult {
  SweepEntry entry;
  std::vector<double> bias;      // mean estimate - true intensity, per pixel
  std::vector<double> variance;  // sample variance (n - 1), per pixel
  double iab = 0.0;
  double isb = 0.0;
  double iv = 0.0;
  double mise = 0.0;
};

struct EvalReport {
  std::string model;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  RasterGrid grid;
  std::vector<SweepResult> rows;
  double wall_seconds = 0.0;
};

/// Per-replicate seeds: replicate r uses derive_seed(seed, {r}).
std::vector<std::uint64_t> replicate_seeds(std::uint64_t seed, std::size_t replicates);

/// Draws one data pattern from a replicate's data seed.
using PatternSource = std::function<PointPattern(std::uint64_t data_seed)>;
/// Optional replacement for the resample-smoothed estimator (test hook).
using FieldHook =
    std::function<std::vector<double>(const PointPattern&, const SweepEntry&, std::uint64_t estimator_seed)>;

/// Simulates one pattern per replicate seed, estimates it once per sweep entry
/// and accumulates per-pixel moments in replicate order. Every sweep entry
/// sees the same patterns and the same estimator seed per replicate.
/// Throws ConfigMismatch (fewer than 2 replicates, true_rho not finite and
/// non-negative at some pixel centre).
EvalReport run_experiment(const PatternSource& source, const SpatialFn& true_rho,
                          std::span<const SweepEntry> sweep, std::span<const std::uint64_t> seeds,
                          const RasterGrid& grid, const FieldHook& hook = {});

EvalReport run_experiment(const ModelSpec& model, const PlanarWindow& window,
                          std::span<const SweepEntry> sweep, std::size_t replicates, const RasterGrid& grid,
                          std::uint64_t seed);

/// Raster file names of sweep row `index`.
std::string bias_raster_name(std::size_t index, const SweepEntry& e);
std::string variance_raster_name(std::size_t index, const SweepEntry& e);

/// Writes dir/report.csv (p,m,IAB,ISB,IV,MISE at 6 significant digits) and a
/// bias/variance ESRI ASCII raster pair per row. Throws IoError.
void write_report(const EvalReport& report, const std::filesystem::path& dir);

}  // namespace rsv
