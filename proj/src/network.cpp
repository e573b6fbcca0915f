#include "rsvoronoi/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <string>

#include "rsvoronoi/errors.hpp"

namespace rsv {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Label {
  double dist = kInf;
  std::int32_t site = std::numeric_limits<std::int32_t>::max();
};

inline bool closer(const Label& a, const Label& b) {
  return a.dist < b.dist || (a.dist == b.dist && a.site < b.site);
}

struct HeapItem {
  Label label;
  std::size_t vertex;
  bool operator>(const HeapItem& o) const { return closer(o.label, label); }
};
using MinHeap = std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<>>;

void run_dijkstra(const LinearNetwork& net, std::vector<Label>& labels, MinHeap& heap) {
  while (!heap.empty()) {
    const HeapItem top = heap.top();
    heap.pop();
    const Label& current = labels[top.vertex];
    if (current.dist != top.label.dist || current.site != top.label.site) continue;
    for (const auto& inc : net.incident(top.vertex)) {
      const Label cand{top.label.dist + net.segments()[inc.segment].length, top.label.site};
      if (closer(cand, labels[inc.neighbour])) {
        labels[inc.neighbour] = cand;
        heap.push({cand, inc.neighbour});
      }
    }
  }
}

void seed(std::vector<Label>& labels, MinHeap& heap, std::size_t vertex, Label cand) {
  if (closer(cand, labels[vertex])) {
    labels[vertex] = cand;
    heap.push({cand, vertex});
  }
}

// Multi-source Dijkstra: nearest site (and its distance) for every vertex.
// `skip` excludes one site index from the sources.
std::vector<Label> nearest_site_labels(const LinearNetwork& net,
                                       std::span<const NetworkLocation> sites,
                                       std::size_t skip = std::numeric_limits<std::size_t>::max()) {
  std::vector<Label> labels(net.vertex_count());
  MinHeap heap;
  for (std::size_t g = 0; g < sites.size(); ++g) {
    if (g == skip) continue;
    const Segment& s = net.segments()[sites[g].segment];
    const auto id = static_cast<std::int32_t>(g);
    seed(labels, heap, s.from, {sites[g].offset, id});
    seed(labels, heap, s.to, {s.length - sites[g].offset, id});
  }
  run_dijkstra(net, labels, heap);
  return labels;
}

std::vector<std::vector<std::int32_t>> sites_by_segment(const LinearNetwork& net,
                                                        std::span<const NetworkLocation> sites,
                                                        std::size_t skip = std::numeric_limits<std::size_t>::max()) {
  std::vector<std::vector<std::int32_t>> out(net.segment_count());
  for (std::size_t g = 0; g < sites.size(); ++g)
    if (g != skip) out[sites[g].segment].push_back(static_cast<std::int32_t>(g));
  return out;
}

Label locate(const LinearNetwork& net, const std::vector<Label>& labels,
             const std::vector<std::vector<std::int32_t>>& by_segment,
             std::span<const NetworkLocation> sites, NetworkLocation q) {
  const Segment& s = net.segments()[q.segment];
  Label best{labels[s.from].dist + q.offset, labels[s.from].site};
  const Label via_to{labels[s.to].dist + (s.length - q.offset), labels[s.to].site};
  if (closer(via_to, best)) best = via_to;
  for (std::int32_t g : by_segment[q.segment]) {
    const Label direct{std::abs(q.offset - sites[g].offset), g};
    if (closer(direct, best)) best = direct;
  }
  return best;
}

std::vector<double> distances_from_vertex(const LinearNetwork& net, std::size_t vertex) {
  std::vector<Label> labels(net.vertex_count());
  MinHeap heap;
  seed(labels, heap, vertex, {0.0, 0});
  run_dijkstra(net, labels, heap);
  std::vector<double> d(labels.size());
  for (std::size_t v = 0; v < d.size(); ++v) d[v] = labels[v].dist;
  return d;
}

double distance_via_vertices(const LinearNetwork& net, const std::vector<double>& d, NetworkLocation x) {
  const Segment& s = net.segments()[x.segment];
  return std::min(d[s.from] + x.offset, d[s.to] + (s.length - x.offset));
}

}  // namespace

// ---------------------------------------------------------------------------

LinearNetwork::LinearNetwork(std::vector<Point2> vertices,
                             std::vector<std::pair<std::size_t, std::size_t>> edges)
    : vertices_(std::move(vertices)) {
  adjacency_.resize(vertices_.size());
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [i, j] = edges[e];
    if (i >= vertices_.size() || j >= vertices_.size())
      throw Error(Errc::InvalidDomain, "edge " + std::to_string(e) + " references a missing vertex");
    if (i == j) throw Error(Errc::InvalidDomain, "edge " + std::to_string(e) + " is a loop");
    if (!seen.insert({std::min(i, j), std::max(i, j)}).second)
      throw Error(Errc::InvalidDomain, "edge " + std::to_string(e) + " duplicates an earlier edge");
    const double len = std::hypot(vertices_[j].x - vertices_[i].x, vertices_[j].y - vertices_[i].y);
    if (!(len > 0.0))
      throw Error(Errc::InvalidDomain, "edge " + std::to_string(e) + " has zero length");
    segments_.push_back({i, j, len});
    adjacency_[i].push_back({j, e});
    adjacency_[j].push_back({i, e});
    total_length_ += len;
  }
  if (segments_.empty()) throw Error(Errc::InvalidDomain, "network has no segments");

  // Connectivity over the vertices touched by segments; isolated vertices are an error too.
  std::vector<char> reached(vertices_.size(), 0);
  std::vector<std::size_t> stack{0};
  reached[0] = 1;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (const auto& inc : adjacency_[v])
      if (!reached[inc.neighbour]) {
        reached[inc.neighbour] = 1;
        stack.push_back(inc.neighbour);
      }
  }
  if (std::find(reached.begin(), reached.end(), 0) != reached.end())
    throw Error(Errc::DisconnectedNetwork, "network graph is not connected");
}

Point2 LinearNetwork::position(NetworkLocation loc) const {
  const Segment& s = segments_.at(loc.segment);
  const double t = loc.offset / s.length;
  const Point2 a = vertices_[s.from], b = vertices_[s.to];
  return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
}

std::vector<double> vertex_distances(const LinearNetwork& net, NetworkLocation source) {
  if (!net.valid(source)) throw Error(Errc::LocationOutsideDomain, "source location is not on the network");
  std::vector<Label> labels(net.vertex_count());
  MinHeap heap;
  const Segment& s = net.segments()[source.segment];
  seed(labels, heap, s.from, {source.offset, 0});
  seed(labels, heap, s.to, {s.length - source.offset, 0});
  run_dijkstra(net, labels, heap);
  std::vector<double> d(labels.size());
  for (std::size_t v = 0; v < d.size(); ++v) d[v] = labels[v].dist;
  return d;
}

double shortest_path_distance(const LinearNetwork& net, NetworkLocation a, NetworkLocation b) {
  if (!net.valid(a) || !net.valid(b))
    throw Error(Errc::LocationOutsideDomain, "location is not on the network");
  if (a == b) return 0.0;
  const auto d = vertex_distances(net, a);
  double best = distance_via_vertices(net, d, b);
  if (a.segment == b.segment) best = std::min(best, std::abs(a.offset - b.offset));
  if (!std::isfinite(best)) throw Error(Errc::DisconnectedNetwork, "no path between locations");
  return best;
}

std::vector<NetworkLocation> snap_points(const LinearNetwork& net, std::span<const Point2> xy,
                                         double tol) {
  if (!(tol >= 0.0)) throw Error(Errc::ConfigMismatch, "snap tolerance must be >= 0");
  std::vector<NetworkLocation> out;
  out.reserve(xy.size());
  for (std::size_t i = 0; i < xy.size(); ++i) {
    const Point2 p = xy[i];
    double best = kInf;
    NetworkLocation loc;
    for (std::size_t e = 0; e < net.segment_count(); ++e) {
      const Segment& s = net.segments()[e];
      const Point2 a = net.vertices()[s.from], b = net.vertices()[s.to];
      const double vx = b.x - a.x, vy = b.y - a.y;
      const double t = std::clamp(((p.x - a.x) * vx + (p.y - a.y) * vy) / (vx * vx + vy * vy), 0.0, 1.0);
      const double d = std::hypot(a.x + t * vx - p.x, a.y + t * vy - p.y);
      if (d < best) {
        best = d;
        loc = {e, std::clamp(t * s.length, 0.0, s.length)};
      }
    }
    if (best > tol)
      throw Error(Errc::SnapToleranceExceeded, "point " + std::to_string(i) + " is " +
                                                   std::to_string(best) + " from the network");
    out.push_back(loc);
  }
  return out;
}

// ---------------------------------------------------------------------------

LixelGrid LixelGrid::build(const LinearNetwork& net, double max_length) {
  if (!(max_length > 0.0)) throw Error(Errc::InvalidDomain, "lixel length must be positive");
  LixelGrid g;
  g.first_.reserve(net.segment_count() + 1);
  for (std::size_t e = 0; e < net.segment_count(); ++e) {
    g.first_.push_back(g.measure_.size());
    const double len = net.segments()[e].length;
    const auto k = static_cast<std::size_t>(std::max(1.0, std::ceil(len / max_length - 1e-12)));
    const double piece = len / static_cast<double>(k);
    for (std::size_t j = 0; j < k; ++j) {
      g.midpoint_.push_back({e, (static_cast<double>(j) + 0.5) * piece});
      g.measure_.push_back(piece);
    }
  }
  g.first_.push_back(g.measure_.size());
  g.total_ = std::accumulate(g.measure_.begin(), g.measure_.end(), 0.0);
  return g;
}

std::size_t LixelGrid::lixel_of(NetworkLocation loc) const {
  const std::size_t lo = first_.at(loc.segment), hi = first_.at(loc.segment + 1);
  const double piece = measure_[lo];
  const auto j = static_cast<std::size_t>(std::max(0.0, std::floor(loc.offset / piece)));
  return lo + std::min(j, hi - lo - 1);
}

Tessellation network_cell_measures(const LinearNetwork& net, std::span<const NetworkLocation> pattern,
                                   const LixelGrid& lixels) {
  if (pattern.empty()) throw Error(Errc::EmptyPattern, "cannot tessellate an empty pattern");
  Tessellation t;
  NetworkDomain(net, lixels).tessellate(pattern, t);
  return t;
}

std::vector<double> interval_cell_lengths(std::span<const double> offsets, double length) {
  const std::size_t n = offsets.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return offsets[a] < offsets[b] || (offsets[a] == offsets[b] && a < b);
  });
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double left = k == 0 ? 0.0 : 0.5 * (offsets[order[k - 1]] + offsets[order[k]]);
    const double right = k + 1 == n ? length : 0.5 * (offsets[order[k]] + offsets[order[k + 1]]);
    out[order[k]] = right - left;
  }
  return out;
}

LinearNetwork edge_corrected_extension(const LinearNetwork& net,
                                       std::span<const NetworkLocation> pattern) {
  if (pattern.size() < 2) throw Error(Errc::TooFewPoints, "edge correction needs at least 2 points");
  for (const auto& x : pattern)
    if (!net.valid(x)) throw Error(Errc::LocationOutsideDomain, "pattern location is not on the network");

  std::vector<Point2> vertices(net.vertices().begin(), net.vertices().end());
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (const Segment& s : net.segments()) edges.emplace_back(s.from, s.to);

  const std::size_t original_vertices = net.vertex_count();
  for (std::size_t u = 0; u < original_vertices; ++u) {
    if (net.degree(u) != 1) continue;
    const auto du = distances_from_vertex(net, u);
    std::size_t nearest = 0;
    double d_nearest = kInf;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
      const double d = distance_via_vertices(net, du, pattern[i]);
      if (d < d_nearest) {
        d_nearest = d;
        nearest = i;
      }
    }
    const auto dx = vertex_distances(net, pattern[nearest]);
    double gap = kInf;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
      if (i == nearest) continue;
      double d = distance_via_vertices(net, dx, pattern[i]);
      if (pattern[i].segment == pattern[nearest].segment)
        d = std::min(d, std::abs(pattern[i].offset - pattern[nearest].offset));
      gap = std::min(gap, d);
    }
    const double beta = 0.5 * gap - d_nearest;
    if (!(beta > 0.0)) continue;

    const auto& inc = net.incident(u).front();
    const Point2 pu = net.vertices()[u], pw = net.vertices()[inc.neighbour];
    const double norm = std::hypot(pu.x - pw.x, pu.y - pw.y);
    vertices.push_back({pu.x + beta * (pu.x - pw.x) / norm, pu.y + beta * (pu.y - pw.y) / norm});
    edges.emplace_back(u, vertices.size() - 1);
  }
  return LinearNetwork(std::move(vertices), std::move(edges));
}

// ---------------------------------------------------------------------------

void NetworkDomain::tessellate(std::span<const NetworkLocation> sites, Tessellation& out) const {
  out.owner.assign(lixels_.size(), -1);
  out.cell_measure.assign(sites.size(), 0.0);
  if (sites.empty()) return;
  const auto labels = nearest_site_labels(net_, sites);
  const auto by_segment = sites_by_segment(net_, sites);
  const auto mids = lixels_.midpoints();
  const auto m = lixels_.measures();
  for (std::size_t c = 0; c < mids.size(); ++c) {
    const std::int32_t g = locate(net_, labels, by_segment, sites, mids[c]).site;
    out.owner[c] = g;
    out.cell_measure[g] += m[c];
  }
  if (std::find(out.cell_measure.begin(), out.cell_measure.end(), 0.0) == out.cell_measure.end()) return;
  std::vector<std::size_t> home(sites.size());
  for (std::size_t g = 0; g < sites.size(); ++g) home[g] = lixels_.lixel_of(sites[g]);
  detail::claim_home_cells(out, m, home);
}

std::size_t NetworkDomain::nearest(std::span<const NetworkLocation> sites, NetworkLocation q) const {
  const auto labels = nearest_site_labels(net_, sites);
  const auto by_segment = sites_by_segment(net_, sites);
  return static_cast<std::size_t>(locate(net_, labels, by_segment, sites, q).site);
}

std::vector<std::size_t> NetworkDomain::nearest_many(std::span<const NetworkLocation> sites,
                                                     std::span<const NetworkLocation> queries) const {
  std::vector<std::size_t> out(queries.size());
  if (sites.empty() || queries.empty()) return out;
  const auto labels = nearest_site_labels(net_, sites);
  const auto by_segment = sites_by_segment(net_, sites);
  for (std::size_t q = 0; q < queries.size(); ++q)
    out[q] = static_cast<std::size_t>(locate(net_, labels, by_segment, sites, queries[q]).site);
  return out;
}

std::vector<double> NetworkDomain::removal_cell_measures(std::span<const NetworkLocation> sites,
                                                         const Tessellation& tess) const {
  const std::size_t n = sites.size();
  std::vector<double> result(n, 0.0);
  if (n < 2) return result;
  std::vector<std::vector<std::size_t>> owned(n);
  for (std::size_t c = 0; c < tess.owner.size(); ++c) owned[tess.owner[c]].push_back(c);
  const auto mids = lixels_.midpoints();
  const auto m = lixels_.measures();
  for (std::size_t k = 0; k < n; ++k) {
    const auto labels = nearest_site_labels(net_, sites, k);
    const auto by_segment = sites_by_segment(net_, sites, k);
    const std::int32_t heir = locate(net_, labels, by_segment, sites, sites[k]).site;
    double gained = 0.0;
    for (std::size_t c : owned[k])
      if (locate(net_, labels, by_segment, sites, mids[c]).site == heir) gained += m[c];
    result[k] = tess.cell_measure[heir] + gained;
  }
  return result;
}

}  // namespace rsv
