#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "rsvoronoi/errors.hpp"
#include "rsvoronoi/estimator.hpp"
#include "rsvoronoi/evaluate.hpp"
#include "rsvoronoi/geometry.hpp"
#include "rsvoronoi/io.hpp"
#include "rsvoronoi/network.hpp"
#include "rsvoronoi/selection.hpp"
#include "rsvoronoi/simulate.hpp"

namespace fs = std::filesystem;
using namespace rsv;

namespace {

struct Options {
  // domain
  std::string window = "0,0,1,1";
  std::string polygon;
  std::string network;
  double snap_tol = std::numeric_limits<double>::infinity();
  double lixel = 0.0;
  bool edge_correct = false;
  int grid = 128;
  // data
  std::string pattern;
  std::string locations;
  bool jitter = false;
  // estimator / selector
  double p = 1.0;
  std::size_t m = 1;
  std::size_t cv_m = 200;
  std::string p_seq;
  std::string p_grid = "0.10,0.13,0.18,0.24,0.33,0.44,0.59,0.80";
  bool include_integral = false;
  // models
  std::string model = "hpp";
  double rho = 60.0;
  double rho_max = 0.0;
  double variance = 2.0;
  double scale = 0.1;
  int cov_grid = 64;
  std::size_t n = 450;
  double r = 0.03;
  std::size_t max_attempts = 0;
  // evaluation
  std::string sweep = "p=0.2,m=200";
  std::size_t replicates = 500;
  // run
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out;
};

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && item[used] == ' ') ++used;
    if (used == 0 || used != item.size())
      throw Error(Errc::ParseError, std::string(what) + ": cannot parse '" + item + "'");
    out.push_back(v);
  }
  return out;
}

PlanarWindow make_window(const Options& o) {
  if (!o.polygon.empty()) return PlanarWindow::polygon(io::read_points_csv(o.polygon));
  const auto v = parse_list(o.window, "--window");
  if (v.size() != 4) throw Error(Errc::ParseError, "--window expects xmin,ymin,xmax,ymax");
  return PlanarWindow::rectangle(v[0], v[1], v[2], v[3]);
}

PointPattern load_planar_pattern(const Options& o, const PlanarWindow& window) {
  auto pts = io::read_points_csv(o.pattern);
  if (o.jitter) {
    const auto moved = jitter_duplicates(pts, window, o.seed);
    if (moved > 0) std::cerr << "jittered " << moved << " duplicate point(s)\n";
  }
  return PointPattern(std::move(pts), window);
}

std::vector<NetworkLocation> load_network_pattern(const Options& o, const LinearNetwork& net) {
  std::vector<NetworkLocation> locs;
  if (!o.locations.empty()) {
    locs = io::read_locations_csv(o.locations);
  } else if (!o.pattern.empty()) {
    const auto xy = io::read_points_csv(o.pattern);
    locs = snap_points(net, xy, o.snap_tol);
  } else {
    throw Error(Errc::ConfigMismatch, "a network run needs --locations or --pattern");
  }
  for (std::size_t i = 0; i < locs.size(); ++i)
    if (!net.valid(locs[i]))
      throw Error(Errc::PointOutsideDomain, "location " + std::to_string(i) + " is not on the network");
  auto sorted = locs;
  std::sort(sorted.begin(), sorted.end(), [](const NetworkLocation& a, const NetworkLocation& b) {
    return a.segment < b.segment || (a.segment == b.segment && a.offset < b.offset);
  });
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw Error(Errc::DuplicatePoint, "network pattern contains repeated locations");
  return locs;
}

LixelGrid make_lixels(const Options& o, const LinearNetwork& net) {
  return o.lixel > 0.0 ? LixelGrid::build(net, o.lixel) : LixelGrid::build(net);
}

/// Records every option of the subcommand except --threads; wall time is left
/// out so that repeated runs produce identical files.
void write_meta(const fs::path& file, const CLI::App& sub) {
  nlohmann::json meta;
  meta["command"] = sub.get_name();
  nlohmann::json opts = nlohmann::json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_name();
    if (name == "--help" || name == "--threads" || name.empty()) continue;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      opts[name] = res.empty() ? "true" : res.back();
    } else {
      opts[name] = opt->get_default_str();
    }
  }
  meta["options"] = opts;
  meta["output"] = file.filename().string();
  io::write_file_atomic(fs::path(file.string() + ".meta.json"), meta.dump(2) + "\n");
}

void write_output(const std::string& path, const std::string& content, const CLI::App& sub) {
  io::write_file_atomic(path, content);
  write_meta(path, sub);
}

void print_mass(std::size_t points, double integral) {
  std::printf("points %zu\nintegral %.10g\n", points, integral);
}

// ---------------------------------------------------------------------------

int cmd_estimate(const Options& o, const CLI::App& sub) {
  std::vector<double> p_seq;
  if (!o.p_seq.empty()) p_seq = parse_list(o.p_seq, "--p-seq");
  const EstimatorConfig cfg{o.p, o.m, o.seed};
  if (p_seq.empty()) cfg.validate();

  if (!o.network.empty()) {
    const LinearNetwork base = io::read_network_json(o.network);
    const auto locs = load_network_pattern(o, base);
    const LinearNetwork net = o.edge_correct ? edge_corrected_extension(base, locs) : base;
    const NetworkDomain domain(net, make_lixels(o, net));
    const IntensityField field = p_seq.empty()
                                     ? resample_smoothed_estimate(domain, std::span<const NetworkLocation>(locs), cfg)
                                     : sequential_estimate(domain, std::span<const NetworkLocation>(locs), p_seq, o.seed);
    // Only lixels of the original segments are reported.
    const std::size_t keep = domain.lixels().first(base.segment_count());
    const LixelGrid base_lixels = o.lixel > 0.0 ? LixelGrid::build(base, o.lixel) : LixelGrid::build(base, net.total_length() / 1000.0);
    std::span<const double> values(field.value.data(), keep);
    double integral = 0.0;
    for (std::size_t c = 0; c < keep; ++c) integral += field.value[c] * field.measure[c];
    if (!o.out.empty()) write_output(o.out, io::network_field_csv(base_lixels, values), sub);
    print_mass(locs.size(), integral);
    return 0;
  }

  const PlanarWindow window = make_window(o);
  const PointPattern pattern = load_planar_pattern(o, window);
  const RasterGrid grid = RasterGrid::square_pixels(window, o.grid);
  const IntensityField field = p_seq.empty() ? resample_smoothed_estimate(pattern, cfg, grid)
                                             : sequential_estimate(pattern, p_seq, o.seed, grid);
  if (!o.out.empty()) write_output(o.out, io::ascii_grid(grid, field.value), sub);
  print_mass(pattern.size(), integrate_field(field));
  return 0;
}

ModelSpec model_from(const Options& o) {
  ModelSpec spec = ModelSpec::parse(o.model);
  spec.rho = o.rho;
  spec.rho_max = o.rho_max;
  spec.variance = o.variance;
  spec.scale = o.scale;
  spec.cov_grid = o.cov_grid;
  spec.n = o.n;
  spec.r = o.r;
  spec.max_attempts = o.max_attempts;
  return spec;
}

int cmd_simulate(const Options& o, const CLI::App& sub) {
  const PlanarWindow window = make_window(o);
  const ModelSpec spec = model_from(o);
  PointPattern pattern = [&] {
    if (spec.kind != ModelKind::SsiThinned) return ModelSampler(spec, window).sample(o.seed);
    const auto res = sim_ssi_thinned(spec.n, spec.r, builtin(spec.function).fn, window, o.seed, spec.max_attempts);
    if (res.saturated)
      std::cerr << "warning: only " << res.accepted << " of " << spec.n << " inhibition points fitted after "
                << res.attempts << " proposals\n";
    return res.pattern;
  }();
  if (!o.out.empty()) write_output(o.out, io::points_csv(pattern.points()), sub);
  std::printf("model %s\npoints %zu\n", spec.describe().c_str(), pattern.size());
  return 0;
}

int cmd_select_p(const Options& o, const CLI::App& sub) {
  const PGrid grid(parse_list(o.p_grid, "--p-grid"));
  CvResult res;
  if (!o.network.empty()) {
    const LinearNetwork net = io::read_network_json(o.network);
    const auto locs = load_network_pattern(o, net);
    const NetworkDomain domain(net, make_lixels(o, net));
    res = select_p(domain, std::span<const NetworkLocation>(locs), grid, o.cv_m, o.seed, o.include_integral);
  } else {
    const PlanarWindow window = make_window(o);
    const PointPattern pattern = load_planar_pattern(o, window);
    res = select_p(pattern, grid, o.cv_m, o.seed, o.include_integral, RasterGrid::square_pixels(window, o.grid));
  }
  std::string table = "p,cv\n";
  for (std::size_t k = 0; k < res.p.size(); ++k)
    table += io::format_number(res.p[k], true) + "," + io::format_number(res.score[k]) + "\n";
  std::printf("%-8s %s\n", "p", "CV");
  for (std::size_t k = 0; k < res.p.size(); ++k)
    std::printf("%-8g %.10g%s\n", res.p[k], res.score[k], k == res.selected_index ? "  *" : "");
  std::printf("selected p %g (m = %zu, integral term %s)\n", res.selected_p, res.m,
              res.integral_included ? "included" : "excluded");
  if (res.advisory)
    std::printf("advisory: selected p exceeds %g; consider the rule-of-thumb range [0.1, 0.3]\n", kAdvisoryCutoff);
  if (!o.out.empty()) write_output(o.out, table, sub);
  return 0;
}

int cmd_evaluate(const Options& o, const CLI::App& sub) {
  const PlanarWindow window = make_window(o);
  const ModelSpec spec = model_from(o);
  const auto sweep = parse_sweep(o.sweep);
  const RasterGrid grid = RasterGrid::square_pixels(window, o.grid);
  const EvalReport report = run_experiment(spec, window, sweep, o.replicates, grid, o.seed);
  std::printf("%-6s %-5s %12s %12s %12s %12s\n", "p", "m", "IAB", "ISB", "IV", "MISE");
  for (const auto& row : report.rows)
    std::printf("%-6g %-5zu %12.6g %12.6g %12.6g %12.6g\n", row.entry.p, row.entry.m, row.iab, row.isb, row.iv,
                row.mise);
  std::fprintf(stderr, "wall time %.1f s\n", report.wall_seconds);
  if (!o.out.empty()) {
    const fs::path dir(o.out);
    write_report(report, dir);
    write_meta(dir / "report.csv", sub);
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
      write_meta(dir / bias_raster_name(i, report.rows[i].entry), sub);
      write_meta(dir / variance_raster_name(i, report.rows[i].entry), sub);
    }
  }
  return 0;
}

void add_domain(CLI::App* sub, Options& o, bool network) {
  sub->add_option("--window", o.window, "Rectangle xmin,ymin,xmax,ymax")->capture_default_str();
  sub->add_option("--polygon", o.polygon, "Polygon window CSV (x,y per vertex)");
  sub->add_option("--grid", o.grid, "Pixels along the longer side of the window")
      ->capture_default_str()
      ->check(CLI::Range(1, 1 << 14));
  if (!network) return;
  sub->add_option("--network", o.network, "Linear network JSON {vertices, edges}");
  sub->add_option("--snap-tol", o.snap_tol, "Maximum distance when snapping --pattern points to the network");
  sub->add_option("--lixel", o.lixel, "Maximum lixel length (default: total length / 1000)");
}

void add_model(CLI::App* sub, Options& o) {
  sub->add_option("--model", o.model, "hpp | ipp[:fn] | lgcp[:fn] | ssi-thinned[:fn]")->capture_default_str();
  sub->add_option("--rho", o.rho, "hpp intensity")->capture_default_str();
  sub->add_option("--rho-max", o.rho_max, "ipp dominating intensity (default: built-in bound)");
  sub->add_option("--variance", o.variance, "lgcp field variance")->capture_default_str();
  sub->add_option("--scale", o.scale, "lgcp correlation scale")->capture_default_str();
  sub->add_option("--cov-grid", o.cov_grid, "lgcp covariance lattice size")->capture_default_str();
  sub->add_option("--n", o.n, "ssi point count before thinning")->capture_default_str();
  sub->add_option("--r", o.r, "ssi inhibition distance")->capture_default_str();
  sub->add_option("--max-attempts", o.max_attempts, "ssi proposal budget (default 10^4 n)");
}

void add_run(CLI::App* sub, Options& o) {
  sub->add_option("--seed", o.seed, "Master seed")->capture_default_str();
  sub->add_option("--threads", o.threads, "Worker threads (0: OpenMP default)")->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Resample-smoothed Voronoi intensity estimation"};
  app.require_subcommand(1);

  auto* est = app.add_subcommand("estimate", "Estimate an intensity field from a pattern");
  add_domain(est, o, true);
  est->add_option("--pattern", o.pattern, "Points CSV (x,y)");
  est->add_option("--locations", o.locations, "Network locations CSV (segment,offset)");
  est->add_option("--p", o.p, "Retention probability")->capture_default_str();
  est->add_option("--m", o.m, "Number of thinnings")->capture_default_str();
  est->add_option("--p-seq", o.p_seq, "Comma-separated per-thinning probabilities (sequential variant)");
  est->add_flag("--edge-correct", o.edge_correct, "Extend boundary vertices of the network before estimating");
  est->add_flag("--jitter", o.jitter, "Nudge duplicate points apart instead of failing");
  est->add_option("--out", o.out, "Field output (.asc grid for windows, CSV for networks)");
  add_run(est, o);

  auto* sim = app.add_subcommand("simulate", "Simulate a point pattern");
  sim->add_option("--window", o.window, "Rectangle xmin,ymin,xmax,ymax")->capture_default_str();
  sim->add_option("--polygon", o.polygon, "Polygon window CSV (x,y per vertex)");
  add_model(sim, o);
  sim->add_option("--out", o.out, "Points CSV output");
  add_run(sim, o);

  auto* sel = app.add_subcommand("select-p", "Choose p by leave-one-out cross-validation");
  add_domain(sel, o, true);
  sel->add_option("--pattern", o.pattern, "Points CSV (x,y)");
  sel->add_option("--locations", o.locations, "Network locations CSV (segment,offset)");
  sel->add_option("--m", o.cv_m, "Number of thinnings")->capture_default_str();
  sel->add_option("--p-grid", o.p_grid, "Increasing candidate probabilities")->capture_default_str();
  sel->add_flag("--include-integral", o.include_integral, "Subtract the integral term");
  sel->add_flag("--jitter", o.jitter, "Nudge duplicate points apart instead of failing");
  sel->add_option("--out", o.out, "CSV of (p, cv)");
  add_run(sel, o);

  auto* ev = app.add_subcommand("evaluate", "Bias/variance study over simulated replicates");
  add_domain(ev, o, false);
  add_model(ev, o);
  ev->add_option("--sweep", o.sweep, "e.g. p=0.1:1.0:0.1,m=200")->capture_default_str();
  ev->add_option("--replicates", o.replicates, "Simulated data sets")->capture_default_str();
  ev->add_option("--out", o.out, "Output directory");
  add_run(ev, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (o.threads > 0) omp_set_num_threads(o.threads);

  try {
    if (est->parsed()) return cmd_estimate(o, *est);
    if (sim->parsed()) return cmd_simulate(o, *sim);
    if (sel->parsed()) return cmd_select_p(o, *sel);
    if (ev->parsed()) return cmd_evaluate(o, *ev);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(classify(e.code()));
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return static_cast<int>(ErrorClass::Internal);
  }
  return 4;
}
