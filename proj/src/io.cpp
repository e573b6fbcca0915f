#include "rsvoronoi/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "json.hpp"

#include "rsvoronoi/errors.hpp"

namespace rsv::io {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_size(std::string_view s, std::size_t& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Calls row(fields, line_number) for every non-empty line; the first line may
// be a header, recognised by a non-numeric first field.
template <class Row>
void for_each_row(std::string_view text, std::size_t columns, Row&& row) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  bool first = true;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    const auto line = trim(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    ++line_no;
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line, ',');
    double probe;
    if (first && !parse_double(fields[0], probe)) {
      first = false;
      continue;
    }
    first = false;
    if (fields.size() != columns)
      throw Error(Errc::ParseError, "line " + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                                        " fields, got " + std::to_string(fields.size()));
    row(fields, line_no);
  }
}

[[noreturn]] void bad_field(std::size_t line_no, std::string_view field) {
  throw Error(Errc::ParseError, "line " + std::to_string(line_no) + ": cannot parse '" + std::string(field) + "'");
}

}  // namespace

std::string format_number(double v, bool short_form) {
  char buf[64];
  if (short_form) {
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
  }
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(Errc::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(Errc::IoError, "cannot move output into place at " + path.string());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Point2> parse_points_csv(std::string_view text) {
  std::vector<Point2> pts;
  for_each_row(text, 2, [&](const std::vector<std::string_view>& f, std::size_t line) {
    Point2 p;
    if (!parse_double(f[0], p.x)) bad_field(line, f[0]);
    if (!parse_double(f[1], p.y)) bad_field(line, f[1]);
    pts.push_back(p);
  });
  return pts;
}

std::vector<Point2> read_points_csv(const fs::path& path) { return parse_points_csv(read_file(path)); }

std::string points_csv(std::span<const Point2> points) {
  std::string out = "x,y\n";
  for (const auto& p : points) out += format_number(p.x) + "," + format_number(p.y) + "\n";
  return out;
}

LinearNetwork parse_network_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("network JSON: ") + e.what());
  }
  std::vector<Point2> vertices;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  try {
    for (const auto& v : doc.at("vertices")) {
      if (!v.is_array() || v.size() != 2) throw Error(Errc::ParseError, "vertex must be [x, y]");
      vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
    }
    for (const auto& e : doc.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw Error(Errc::ParseError, "edge must be [i, j]");
      edges.emplace_back(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("network JSON: ") + e.what());
  }
  return LinearNetwork(std::move(vertices), std::move(edges));
}

LinearNetwork read_network_json(const fs::path& path) { return parse_network_json(read_file(path)); }

std::string network_json(const LinearNetwork& net) {
  nlohmann::json doc;
  doc["vertices"] = nlohmann::json::array();
  for (const auto& v : net.vertices()) doc["vertices"].push_back({v.x, v.y});
  doc["edges"] = nlohmann::json::array();
  for (const auto& s : net.segments()) doc["edges"].push_back({s.from, s.to});
  return doc.dump() + "\n";
}

std::vector<NetworkLocation> parse_locations_csv(std::string_view text) {
  std::vector<NetworkLocation> out;
  for_each_row(text, 2, [&](const std::vector<std::string_view>& f, std::size_t line) {
    NetworkLocation loc;
    if (!parse_size(f[0], loc.segment)) bad_field(line, f[0]);
    if (!parse_double(f[1], loc.offset)) bad_field(line, f[1]);
    out.push_back(loc);
  });
  return out;
}

std::vector<NetworkLocation> read_locations_csv(const fs::path& path) {
  return parse_locations_csv(read_file(path));
}

std::string locations_csv(std::span<const NetworkLocation> locations) {
  std::string out = "segment,offset\n";
  for (const auto& l : locations) out += std::to_string(l.segment) + "," + format_number(l.offset) + "\n";
  return out;
}

std::string ascii_grid(const RasterGrid& grid, std::span<const double> values) {
  std::string out;
  out += "ncols " + std::to_string(grid.nx()) + "\n";
  out += "nrows " + std::to_string(grid.ny()) + "\n";
  out += "xllcorner " + format_number(grid.x0()) + "\n";
  out += "yllcorner " + format_number(grid.y0()) + "\n";
  if (std::abs(grid.dx() - grid.dy()) <= 1e-12 * grid.dx()) {
    out += "cellsize " + format_number(grid.dx()) + "\n";
  } else {
    out += "dx " + format_number(grid.dx()) + "\n";
    out += "dy " + format_number(grid.dy()) + "\n";
  }
  out += "NODATA_value -9999\n";
  const auto measure = grid.measures();
  const auto nx = static_cast<std::size_t>(grid.nx());
  for (int r = grid.ny() - 1; r >= 0; --r) {
    for (std::size_t c = 0; c < nx; ++c) {
      const std::size_t cell = static_cast<std::size_t>(r) * nx + c;
      if (c > 0) out += ' ';
      out += measure[cell] > 0.0 ? format_number(values[cell]) : "-9999";
    }
    out += '\n';
  }
  return out;
}

AsciiGrid parse_ascii_grid(std::string_view text) {
  AsciiGrid g;
  std::istringstream in{std::string(text)};
  std::string key;
  int header = 0;
  while (header < 6 && in >> key) {
    std::string value;
    in >> value;
    double v;
    if (!parse_double(value, v)) throw Error(Errc::ParseError, "ASCII grid header '" + key + "' is not numeric");
    if (key == "ncols") g.ncols = static_cast<int>(v);
    else if (key == "nrows") g.nrows = static_cast<int>(v);
    else if (key == "xllcorner") g.xllcorner = v;
    else if (key == "yllcorner") g.yllcorner = v;
    else if (key == "cellsize" || key == "dx") g.cellsize = v;
    else if (key == "dy") continue;
    else if (key == "NODATA_value") g.nodata = v;
    else throw Error(Errc::ParseError, "unknown ASCII grid header '" + key + "'");
    ++header;
  }
  std::string token;
  while (in >> token) {
    double v;
    if (!parse_double(token, v)) throw Error(Errc::ParseError, "ASCII grid value '" + token + "' is not numeric");
    g.values.push_back(v);
  }
  if (g.values.size() != static_cast<std::size_t>(g.ncols) * static_cast<std::size_t>(g.nrows))
    throw Error(Errc::ParseError, "ASCII grid has the wrong number of values");
  return g;
}

std::string network_field_csv(const LixelGrid& lixels, std::span<const double> values) {
  std::string out = "segment,offset,value,measure\n";
  const auto mids = lixels.midpoints();
  const auto measure = lixels.measures();
  for (std::size_t c = 0; c < mids.size(); ++c)
    out += std::to_string(mids[c].segment) + "," + format_number(mids[c].offset) + "," + format_number(values[c]) +
           "," + format_number(measure[c]) + "\n";
  return out;
}

}  // namespace rsv::io
