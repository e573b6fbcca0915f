#include "rsvoronoi/evaluate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include <omp.h>

#include "rsvoronoi/errors.hpp"
#include "rsvoronoi/estimator.hpp"
#include "rsvoronoi/io.hpp"
#include "rsvoronoi/rng.hpp"

namespace rsv {
namespace {

std::vector<double> expand_values(const std::vector<std::string>& items, const std::string& key) {
  std::vector<double> out;
  for (const auto& item : items) {
    std::vector<double> parts;
    std::size_t start = 0;
    while (true) {
      const auto pos = item.find(':', start);
      const std::string tok = item.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != tok.size()) throw Error(Errc::ParseError, "sweep: bad value '" + tok + "' for " + key);
      parts.push_back(v);
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (parts.size() == 1) {
      out.push_back(parts[0]);
    } else if (parts.size() == 3 && parts[2] > 0.0 && parts[1] >= parts[0]) {
      const auto steps = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
      for (long k = 0; k <= steps; ++k) {
        // Snap to the step's decimal resolution so 0.1:1.0:0.1 yields 0.3, not 0.30000000000000004.
        const double v = parts[0] + static_cast<double>(k) * parts[2];
        out.push_back(std::round(v * 1e12) / 1e12);
      }
    } else {
      throw Error(Errc::ParseError, "sweep: range must be start:stop:step with step > 0");
    }
  }
  return out;
}

}  // namespace

std::vector<SweepEntry> parse_sweep(std::string_view text) {
  std::vector<std::string> p_items, m_items;
  std::vector<std::string>* current = nullptr;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find(',', start);
    std::string tok(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    start = pos == std::string_view::npos ? text.size() + 1 : pos + 1;
    tok.erase(std::remove(tok.begin(), tok.end(), ' '), tok.end());
    if (tok.empty()) continue;
    if (tok.rfind("p=", 0) == 0) {
      current = &p_items;
      tok = tok.substr(2);
    } else if (tok.rfind("m=", 0) == 0) {
      current = &m_items;
      tok = tok.substr(2);
    }
    if (current == nullptr) throw Error(Errc::ParseError, "sweep: expected p= or m= before '" + tok + "'");
    current->push_back(tok);
  }
  if (p_items.empty() || m_items.empty()) throw Error(Errc::ParseError, "sweep needs both p= and m= values");

  const auto ps = expand_values(p_items, "p");
  const auto ms = expand_values(m_items, "m");
  std::vector<SweepEntry> out;
  for (double p : ps) {
    if (!(p > 0.0 && p <= 1.0)) throw Error(Errc::InvalidProbability, "sweep p " + std::to_string(p) + " not in (0, 1]");
    for (double m : ms) {
      if (!(m >= 1.0) || m != std::floor(m)) throw Error(Errc::InvalidM, "sweep m must be a positive integer");
      out.push_back({p, static_cast<std::size_t>(m)});
    }
  }
  return out;
}

std::vector<std::uint64_t> replicate_seeds(std::uint64_t seed, std::size_t replicates) {
  std::vector<std::uint64_t> out(replicates);
  for (std::size_t r = 0; r < replicates; ++r) out[r] = derive_seed(seed, {r});
  return out;
}

EvalReport run_experiment(const PatternSource& source, const SpatialFn& true_rho,
                          std::span<const SweepEntry> sweep, std::span<const std::uint64_t> seeds,
                          const RasterGrid& grid, const FieldHook& hook) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t R = seeds.size();
  if (R < 2) throw Error(Errc::ConfigMismatch, "an experiment needs at least 2 replicates");
  for (const auto& e : sweep) EstimatorConfig{e.p, e.m, 0}.validate();

  const std::size_t cells = grid.size();
  const auto measure = grid.measures();
  std::vector<double> truth(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    truth[c] = true_rho(grid.center(c));
    if (measure[c] > 0.0 && !(std::isfinite(truth[c]) && truth[c] >= 0.0))
      throw Error(Errc::ConfigMismatch, "true intensity is undefined at pixel " + std::to_string(c));
  }

  const std::size_t E = sweep.size();
  std::vector<std::vector<double>> mean(E, std::vector<double>(cells, 0.0));
  std::vector<std::vector<double>> m2(E, std::vector<double>(cells, 0.0));
  std::size_t count = 0;

  auto replicate_fields = [&](std::size_t r, std::vector<std::vector<double>>& out) {
    const std::uint64_t data_seed = derive_seed(seeds[r], {stream_tag::kData});
    const std::uint64_t est_seed = derive_seed(seeds[r], {stream_tag::kEstimator});
    const PointPattern pattern = source(data_seed);
    const PlanarDomain domain(pattern.window(), grid);
    for (std::size_t e = 0; e < E; ++e) {
      if (hook) {
        out[e] = hook(pattern, sweep[e], est_seed);
      } else {
        out[e] = resample_smoothed_estimate(domain, pattern.points(), EstimatorConfig{sweep[e].p, sweep[e].m, est_seed})
                     .value;
      }
      if (out[e].size() != cells) throw Error(Errc::ConfigMismatch, "estimate has the wrong number of cells");
    }
  };
  auto accumulate = [&](const std::vector<std::vector<double>>& fields) {
    ++count;
    const double n = static_cast<double>(count);
    for (std::size_t e = 0; e < E; ++e)
      for (std::size_t c = 0; c < cells; ++c) {
        const double x = fields[e][c];
        const double delta = x - mean[e][c];
        mean[e][c] += delta / n;
        m2[e][c] += delta * (x - mean[e][c]);
      }
  };

  const int threads = omp_in_parallel() ? 1 : omp_get_max_threads();
  const std::size_t block = std::max<std::size_t>(1, static_cast<std::size_t>(threads));
  std::vector<std::vector<std::vector<double>>> buffers(block, std::vector<std::vector<double>>(E));
  for (std::size_t start = 0; start < R; start += block) {
    const auto len = static_cast<std::ptrdiff_t>(std::min(block, R - start));
    if (len == 1) {
      replicate_fields(start, buffers[0]);
    } else {
      // Exceptions must not cross the parallel region boundary.
      std::vector<std::exception_ptr> errors(static_cast<std::size_t>(len));
#pragma omp parallel for schedule(dynamic)
      for (std::ptrdiff_t b = 0; b < len; ++b) {
        try {
          replicate_fields(start + static_cast<std::size_t>(b), buffers[static_cast<std::size_t>(b)]);
        } catch (...) {
          errors[static_cast<std::size_t>(b)] = std::current_exception();
        }
      }
      for (const auto& err : errors)
        if (err) std::rethrow_exception(err);
    }
    for (std::ptrdiff_t b = 0; b < len; ++b) accumulate(buffers[static_cast<std::size_t>(b)]);
  }

  EvalReport report{"", R, 0, grid, {}, 0.0};
  const double denom = static_cast<double>(R - 1);
  for (std::size_t e = 0; e < E; ++e) {
    SweepResult row;
    row.entry = sweep[e];
    row.bias.resize(cells);
    row.variance.resize(cells);
    for (std::size_t c = 0; c < cells; ++c) {
      row.bias[c] = mean[e][c] - truth[c];
      row.variance[c] = m2[e][c] / denom;
      row.iab += std::abs(row.bias[c]) * measure[c];
      row.isb += row.bias[c] * row.bias[c] * measure[c];
      row.iv += row.variance[c] * measure[c];
    }
    row.mise = row.iv + row.isb;
    report.rows.push_back(std::move(row));
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

EvalReport run_experiment(const ModelSpec& model, const PlanarWindow& window,
                          std::span<const SweepEntry> sweep, std::size_t replicates, const RasterGrid& grid,
                          std::uint64_t seed) {
  const ModelSampler sampler(model, window);
  const auto seeds = replicate_seeds(seed, replicates);
  EvalReport report = run_experiment([&](std::uint64_t s) { return sampler.sample(s); }, sampler.true_intensity(),
                                     sweep, seeds, grid);
  report.model = model.describe();
  report.seed = seed;
  return report;
}

std::string bias_raster_name(std::size_t index, const SweepEntry& e) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "bias_%02zu_p%g_m%zu.asc", index, e.p, e.m);
  return buf;
}

std::string variance_raster_name(std::size_t index, const SweepEntry& e) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "variance_%02zu_p%g_m%zu.asc", index, e.p, e.m);
  return buf;
}

void write_report(const EvalReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + dir.string());
  std::string csv = "p,m,IAB,ISB,IV,MISE\n";
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& row = report.rows[i];
    csv += io::format_number(row.entry.p, true) + "," + std::to_string(row.entry.m) + "," +
           io::format_number(row.iab, true) + "," + io::format_number(row.isb, true) + "," +
           io::format_number(row.iv, true) + "," + io::format_number(row.mise, true) + "\n";
    io::write_file_atomic(dir / bias_raster_name(i, row.entry), io::ascii_grid(report.grid, row.bias));
    io::write_file_atomic(dir / variance_raster_name(i, row.entry), io::ascii_grid(report.grid, row.variance));
  }
  io::write_file_atomic(dir / "report.csv", csv);
}

}  // namespace rsv
