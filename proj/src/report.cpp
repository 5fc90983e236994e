#include "qcap/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace qcap {

namespace {

std::string format_sig12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// Blue-white-red map over t in [-1, 1].
std::string heat_color(double t) {
  t = std::clamp(t, -1.0, 1.0);
  int r = 255, g = 255, b = 255;
  if (t < 0.0) {
    r = static_cast<int>(std::lround(255.0 * (1.0 + t)));
    g = r;
  } else if (t > 0.0) {
    g = static_cast<int>(std::lround(255.0 * (1.0 - t)));
    b = g;
  }
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string render_json(const ExperimentReport& report, bool include_runtime) {
  nlohmann::json j;
  j["experiment"] = report.name;
  nlohmann::json params(report.params);
  for (const auto& [key, text] : report.params_text) params[key] = text;
  j["params"] = std::move(params);
  j["analytic"] = report.analytic;
  j["numeric"] = report.numeric;
  j["abs_error"] = report.abs_error;
  j["pass"] = report.pass;
  if (include_runtime) j["runtime_ms"] = report.runtime_ms;
  return j.dump(2) + "\n";
}

std::string render_region_csv(const std::vector<RegionPoint>& points) {
  std::string out = "q,p,delta\n";
  for (const RegionPoint& pt : points) {
    out += format_sig12(pt.q);
    out += ',';
    out += format_sig12(pt.p);
    out += ',';
    out += format_sig12(pt.delta);
    out += '\n';
  }
  return out;
}

std::string render_region_svg(const std::vector<RegionPoint>& points, int grid_n) {
  if (grid_n < 2 || points.size() != static_cast<std::size_t>(grid_n) * grid_n) {
    throw std::invalid_argument("render_region_svg: points do not form a grid");
  }
  constexpr double kSide = 512.0;
  const double cell = kSide / static_cast<double>(grid_n);

  double max_abs = 0.0;
  for (const RegionPoint& pt : points) max_abs = std::max(max_abs, std::abs(pt.delta));
  const double scale = max_abs > 0.0 ? max_abs : 1.0;

  auto value_at = [&](int i, int j) { return points[i * grid_n + j].delta; };
  // q runs along x, p along y with p = 0 at the bottom edge.
  auto x_of = [&](double qi) { return qi * cell; };
  auto y_of = [&](double pj) { return kSide - (pj + 1.0) * cell; };

  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"512\" height=\"512\" "
      "viewBox=\"0 0 512 512\">\n";
  for (int i = 0; i < grid_n; ++i) {
    for (int j = 0; j < grid_n; ++j) {
      svg += "<rect x=\"" + format_fixed(x_of(i), 3) + "\" y=\"" + format_fixed(y_of(j), 3) +
             "\" width=\"" + format_fixed(cell, 3) + "\" height=\"" + format_fixed(cell, 3) +
             "\" fill=\"" + heat_color(value_at(i, j) / scale) + "\"/>\n";
    }
  }

  // Zero contour by marching squares on the grid of sample points.
  auto interp = [](double a, double b) { return a / (a - b); };
  std::string contour;
  for (int i = 0; i + 1 < grid_n; ++i) {
    for (int j = 0; j + 1 < grid_n; ++j) {
      const double v00 = value_at(i, j), v10 = value_at(i + 1, j);
      const double v01 = value_at(i, j + 1), v11 = value_at(i + 1, j + 1);
      std::vector<std::pair<double, double>> crossings;  // (di, dj) in cell units
      if ((v00 > 0) != (v10 > 0)) crossings.push_back({interp(v00, v10), 0.0});
      if ((v01 > 0) != (v11 > 0)) crossings.push_back({interp(v01, v11), 1.0});
      if ((v00 > 0) != (v01 > 0)) crossings.push_back({0.0, interp(v00, v01)});
      if ((v10 > 0) != (v11 > 0)) crossings.push_back({1.0, interp(v10, v11)});
      if (crossings.size() < 2) continue;
      // Sample points sit at cell centers of the heatmap.
      const double cx0 = x_of(i + crossings[0].first) + cell / 2.0;
      const double cy0 = y_of(j + crossings[0].second) + cell / 2.0;
      const double cx1 = x_of(i + crossings[1].first) + cell / 2.0;
      const double cy1 = y_of(j + crossings[1].second) + cell / 2.0;
      contour += "<line x1=\"" + format_fixed(cx0, 3) + "\" y1=\"" + format_fixed(cy0, 3) +
                 "\" x2=\"" + format_fixed(cx1, 3) + "\" y2=\"" + format_fixed(cy1, 3) +
                 "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    }
  }
  svg += contour;
  svg += "</svg>\n";
  return svg;
}

void write_text_atomic(const std::string& path, const std::string& payload) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    }
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) {
      throw std::runtime_error("short write to " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    throw std::runtime_error("cannot rename " + tmp.string() + ": " + ec.message());
  }
}

}  // namespace qcap
