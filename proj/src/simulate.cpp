#include "rsvoronoi/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "rsvoronoi/errors.hpp"
#include "rsvoronoi/rng.hpp"
#include "rsvoronoi/thinning.hpp"

namespace rsv {
namespace {

double ssi_retention(Point2 u) {
  const double x = u.x;
  if (x < 1.0 / 3.0) return std::abs(x - 0.02);
  if (x < 2.0 / 3.0) return std::abs(x - 0.5);
  return std::abs(x - 0.95);
}

const std::vector<BuiltinFn>& registry() {
  static const std::vector<BuiltinFn> fns = {
      {"builtin:sin16", [](Point2 u) { return std::abs(10.0 + 90.0 * std::sin(16.0 * u.x)); }, 100.0},
      {"builtin:log40sin20", [](Point2 u) { return std::log(40.0 * std::abs(std::sin(20.0 * u.x))); }, 40.0},
      {"builtin:ssi-retention", ssi_retention, 1.0 / 3.0 - 0.02 + 1e-12},
  };
  return fns;
}

std::vector<Point2> uniform_in_box(const PlanarWindow& w, double rho, RngStream& rng) {
  std::poisson_distribution<long long> count(rho * w.width() * w.height());
  const long long n = count(rng);
  std::vector<Point2> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    const double x = w.xmin() + w.width() * rng.uniform();
    const double y = w.ymin() + w.height() * rng.uniform();
    const Point2 p{x, y};
    if (w.is_rectangle() || w.contains(p)) pts.push_back(p);
  }
  return pts;
}

void check_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw Error(Errc::ConfigMismatch, std::string(what) + " must be positive and finite");
}

}  // namespace

const BuiltinFn& builtin(std::string_view name) {
  std::string key(name);
  if (key.rfind("builtin:", 0) != 0) key = "builtin:" + key;
  for (const auto& f : registry())
    if (f.name == key) return f;
  throw Error(Errc::ConfigMismatch, "unknown built-in function '" + std::string(name) + "'");
}

std::vector<std::string> builtin_names() {
  std::vector<std::string> out;
  for (const auto& f : registry()) out.push_back(f.name);
  return out;
}

PointPattern sim_hpp(double rho, const PlanarWindow& window, std::uint64_t seed) {
  check_positive(rho, "intensity");
  RngStream rng(seed, {stream_tag::kData});
  return PointPattern(uniform_in_box(window, rho, rng), window);
}

PointPattern sim_ipp(const SpatialFn& rho_fn, double rho_max, const PlanarWindow& window,
                     std::uint64_t seed) {
  check_positive(rho_max, "dominating intensity");
  RngStream rng(seed, {stream_tag::kData});
  const auto candidates = uniform_in_box(window, rho_max, rng);
  const RngStream marks(seed, {stream_tag::kData, 1});
  std::vector<Point2> kept;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double rho = rho_fn(candidates[i]);
    if (rho > rho_max)
      throw Error(Errc::DominatingIntensityViolated,
                  "intensity " + std::to_string(rho) + " exceeds the bound " + std::to_string(rho_max));
    if (!(rho >= 0.0)) throw Error(Errc::RetentionOutOfRange, "intensity function is negative or undefined");
    if (marks.uniform_at(i) * rho_max < rho) kept.push_back(candidates[i]);
  }
  return PointPattern(std::move(kept), window);
}

// ---------------------------------------------------------------------------

struct LgcpSimulator::Factor {
  Eigen::MatrixXd lower;
};

LgcpSimulator::LgcpSimulator(LgcpParams params, PlanarWindow window)
    : params_(std::move(params)), window_(std::move(window)) {
  if (!(params_.variance >= 0.0) || !std::isfinite(params_.variance))
    throw Error(Errc::ConfigMismatch, "field variance must be >= 0");
  check_positive(params_.scale, "correlation scale");
  check_positive(params_.mean_exp_max, "mean bound");
  if (params_.cov_grid < 16) throw Error(Errc::ConfigMismatch, "covariance lattice must be at least 16");
  if (params_.variance == 0.0) return;

  const int g = params_.cov_grid;
  const Eigen::Index size = static_cast<Eigen::Index>(g) * g;
  Eigen::MatrixXd cov(size, size);
  for (Eigen::Index a = 0; a < size; ++a) {
    const Point2 pa = lattice_center(static_cast<std::size_t>(a));
    for (Eigen::Index b = 0; b <= a; ++b) {
      const Point2 pb = lattice_center(static_cast<std::size_t>(b));
      const double c = params_.variance * std::exp(-std::hypot(pa.x - pb.x, pa.y - pb.y) / params_.scale);
      cov(a, b) = c;
      cov(b, a) = c;
    }
  }
  for (double jitter = 1e-10; jitter <= 1e-2 * params_.variance; jitter *= 100.0) {
    Eigen::MatrixXd trial = cov;
    trial.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(trial);
    if (llt.info() == Eigen::Success) {
      factor_ = std::make_unique<Factor>();
      factor_->lower = llt.matrixL();
      jitter_ = jitter;
      return;
    }
  }
  throw Error(Errc::CovarianceNotFactorizable, "covariance matrix is not positive definite even with jitter");
}

LgcpSimulator::~LgcpSimulator() = default;
LgcpSimulator::LgcpSimulator(LgcpSimulator&&) noexcept = default;
LgcpSimulator& LgcpSimulator::operator=(LgcpSimulator&&) noexcept = default;

Point2 LgcpSimulator::lattice_center(std::size_t cell) const {
  const auto g = static_cast<std::size_t>(params_.cov_grid);
  const double dx = window_.width() / static_cast<double>(g);
  const double dy = window_.height() / static_cast<double>(g);
  return {window_.xmin() + (static_cast<double>(cell % g) + 0.5) * dx,
          window_.ymin() + (static_cast<double>(cell / g) + 0.5) * dy};
}

std::vector<double> LgcpSimulator::sample_field(std::uint64_t seed) const {
  const auto size = static_cast<std::size_t>(params_.cov_grid) * params_.cov_grid;
  std::vector<double> out(size, 0.0);
  if (!factor_) return out;
  RngStream rng(seed, {stream_tag::kData, 0});
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(static_cast<Eigen::Index>(size));
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  const Eigen::VectorXd f = factor_->lower.triangularView<Eigen::Lower>() * z;
  for (std::size_t i = 0; i < size; ++i) out[i] = f[static_cast<Eigen::Index>(i)];
  return out;
}

PointPattern LgcpSimulator::sample(std::uint64_t seed) const {
  const auto field = sample_field(seed);
  const auto g = static_cast<std::size_t>(params_.cov_grid);
  const double dx = window_.width() / static_cast<double>(g);
  const double dy = window_.height() / static_cast<double>(g);
  RngStream rng(seed, {stream_tag::kData, 1});
  std::vector<Point2> pts;
  for (std::size_t c = 0; c < field.size(); ++c) {
    const double lambda = params_.mean_exp_max * std::exp(field[c]) * dx * dy;
    std::poisson_distribution<long long> count(lambda);
    const long long k = lambda > 0.0 ? count(rng) : 0;
    const double x0 = window_.xmin() + static_cast<double>(c % g) * dx;
    const double y0 = window_.ymin() + static_cast<double>(c / g) * dy;
    for (long long i = 0; i < k; ++i) {
      const Point2 u{x0 + dx * rng.uniform(), y0 + dy * rng.uniform()};
      const double ratio = std::exp(params_.mean_fn(u)) / params_.mean_exp_max;
      const double mark = rng.uniform();
      if (!window_.is_rectangle() && !window_.contains(u)) continue;
      if (ratio > 1.0)
        throw Error(Errc::DominatingIntensityViolated, "exp(mean) exceeds its bound at a sampled point");
      if (mark < ratio) pts.push_back(u);
    }
  }
  return PointPattern(std::move(pts), window_);
}

PointPattern sim_lgcp(const LgcpParams& params, const PlanarWindow& window, std::uint64_t seed) {
  return LgcpSimulator(params, window).sample(seed);
}

// ---------------------------------------------------------------------------

SsiResult sim_ssi_thinned(std::size_t n, double r, const SpatialFn& p_fn, const PlanarWindow& window,
                          std::uint64_t seed, std::size_t max_attempts) {
  if (n == 0) throw Error(Errc::ConfigMismatch, "SSI needs n >= 1");
  if (!(r >= 0.0) || !std::isfinite(r)) throw Error(Errc::ConfigMismatch, "inhibition distance must be >= 0");
  if (max_attempts == 0) max_attempts = 10000 * n;

  // Bucket grid with cells of side >= r so that conflicts lie in the 3×3 block.
  const double side = r > 0.0 ? std::max(r, std::max(window.width(), window.height()) / 4096.0) : 1.0;
  const int bx = std::max(1, static_cast<int>(std::floor(window.width() / side)));
  const int by = std::max(1, static_cast<int>(std::floor(window.height() / side)));
  const double cw = window.width() / bx, ch = window.height() / by;
  std::vector<std::vector<std::uint32_t>> buckets(r > 0.0 ? static_cast<std::size_t>(bx) * by : 0);
  const double r2 = r * r;

  RngStream rng(seed, {stream_tag::kData});
  std::vector<Point2> accepted;
  accepted.reserve(n);
  std::size_t attempts = 0;
  while (accepted.size() < n && attempts < max_attempts) {
    ++attempts;
    const Point2 u{window.xmin() + window.width() * rng.uniform(), window.ymin() + window.height() * rng.uniform()};
    if (!window.is_rectangle() && !window.contains(u)) continue;
    if (r > 0.0) {
      const int ix = std::clamp(static_cast<int>((u.x - window.xmin()) / cw), 0, bx - 1);
      const int iy = std::clamp(static_cast<int>((u.y - window.ymin()) / ch), 0, by - 1);
      bool ok = true;
      for (int yy = std::max(0, iy - 1); ok && yy <= std::min(by - 1, iy + 1); ++yy)
        for (int xx = std::max(0, ix - 1); ok && xx <= std::min(bx - 1, ix + 1); ++xx)
          for (std::uint32_t j : buckets[static_cast<std::size_t>(yy) * bx + xx]) {
            const double ddx = accepted[j].x - u.x, ddy = accepted[j].y - u.y;
            if (ddx * ddx + ddy * ddy < r2) {
              ok = false;
              break;
            }
          }
      if (!ok) continue;
      buckets[static_cast<std::size_t>(iy) * bx + ix].push_back(static_cast<std::uint32_t>(accepted.size()));
    }
    accepted.push_back(u);
  }

  const std::size_t count = accepted.size();
  const RngStream marks(seed, {stream_tag::kData, 1});
  const auto kept = function_retained_indices(std::span<const Point2>(accepted), p_fn, marks);
  std::vector<Point2> out;
  out.reserve(kept.size());
  for (std::size_t i : kept) out.push_back(accepted[i]);
  return {PointPattern(std::move(out), window), count, attempts, count < n};
}

// ---------------------------------------------------------------------------

ModelSpec ModelSpec::parse(std::string_view text) {
  ModelSpec spec;
  const auto colon = text.find(':');
  const std::string head(text.substr(0, colon));
  const std::string tail = colon == std::string_view::npos ? "" : std::string(text.substr(colon + 1));
  if (head == "hpp") {
    spec.kind = ModelKind::Hpp;
    if (!tail.empty()) throw Error(Errc::ConfigMismatch, "hpp takes no function");
    return spec;
  }
  if (head == "ipp") {
    spec.kind = ModelKind::Ipp;
    spec.function = tail.empty() ? "builtin:sin16" : tail;
  } else if (head == "lgcp") {
    spec.kind = ModelKind::Lgcp;
    spec.function = tail.empty() ? "builtin:log40sin20" : tail;
  } else if (head == "ssi-thinned" || head == "ssi") {
    spec.kind = ModelKind::SsiThinned;
    spec.function = tail.empty() ? "builtin:ssi-retention" : tail;
  } else {
    throw Error(Errc::ConfigMismatch, "unknown model '" + std::string(text) + "'");
  }
  spec.function = builtin(spec.function).name;
  return spec;
}

std::string ModelSpec::describe() const {
  switch (kind) {
    case ModelKind::Hpp:
      return "hpp";
    case ModelKind::Ipp:
      return "ipp:" + function;
    case ModelKind::Lgcp:
      return "lgcp:" + function;
    case ModelKind::SsiThinned:
      return "ssi-thinned:" + function;
  }
  return "";
}

ModelSampler::ModelSampler(const ModelSpec& spec, const PlanarWindow& window) : spec_(spec), window_(window) {
  switch (spec_.kind) {
    case ModelKind::Hpp:
      check_positive(spec_.rho, "intensity");
      break;
    case ModelKind::Ipp:
      if (spec_.rho_max == 0.0) spec_.rho_max = builtin(spec_.function).bound;
      check_positive(spec_.rho_max, "dominating intensity");
      break;
    case ModelKind::Lgcp: {
      const auto& f = builtin(spec_.function);
      lgcp_ = std::make_shared<const LgcpSimulator>(
          LgcpParams{f.fn, f.bound, spec_.variance, spec_.scale, spec_.cov_grid}, window_);
      break;
    }
    case ModelKind::SsiThinned:
      builtin(spec_.function);
      if (spec_.n == 0) throw Error(Errc::ConfigMismatch, "SSI needs n >= 1");
      break;
  }
}

PointPattern ModelSampler::sample(std::uint64_t seed) const {
  switch (spec_.kind) {
    case ModelKind::Hpp:
      return sim_hpp(spec_.rho, window_, seed);
    case ModelKind::Ipp:
      return sim_ipp(builtin(spec_.function).fn, spec_.rho_max, window_, seed);
    case ModelKind::Lgcp:
      return lgcp_->sample(seed);
    case ModelKind::SsiThinned:
      return sim_ssi_thinned(spec_.n, spec_.r, builtin(spec_.function).fn, window_, seed, spec_.max_attempts)
          .pattern;
  }
  throw Error(Errc::ConfigMismatch, "unknown model");
}

SpatialFn ModelSampler::true_intensity() const {
  switch (spec_.kind) {
    case ModelKind::Hpp: {
      const double rho = spec_.rho;
      return [rho](Point2) { return rho; };
    }
    case ModelKind::Ipp:
      return builtin(spec_.function).fn;
    case ModelKind::Lgcp: {
      const SpatialFn mean = builtin(spec_.function).fn;
      const double half = 0.5 * spec_.variance;
      return [mean, half](Point2 u) { return std::exp(mean(u) + half); };
    }
    case ModelKind::SsiThinned: {
      const SpatialFn p = builtin(spec_.function).fn;
      const double rate = static_cast<double>(spec_.n) / window_.area();
      return [p, rate](Point2 u) { return rate * p(u); };
    }
  }
  return {};
}

}  // namespace rsv
