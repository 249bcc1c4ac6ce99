#pragma once
//
// Static plot rendering from a result bundle: a trajectory picture (per-agent
// colored paths over the region layout) and an edge-distance picture (one
// curve per maintained link, with the communication radius drawn as a hard
// ceiling).  Everything is read back from the bundle's files — the renderer
// works on any bundle regardless of which process produced it.
//
// The output is plain hand-assembled SVG: deterministic, dependency-free,
// and small enough to diff.
//

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ltlswarm/errors.hpp"
#include "ltlswarm/geometry.hpp"
#include "ltlswarm/world.hpp"

namespace ltlswarm {

namespace plotdetail {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (first) {
      table.header = std::move(cells);
      first = false;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  if (first) throw ValidationError("empty file " + path.string());
  return table;
}

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// A fixed qualitative palette, cycled by agent index.
inline const char* agent_color(int index) {
  static const char* kPalette[] = {"#e41a1c", "#377eb8", "#4daf4a", "#984ea3",
                                   "#ff7f00", "#a65628", "#f781bf", "#999999"};
  return kPalette[index % 8];
}

// Affine map from data space to pixel space (y flipped: SVG grows downward).
struct Frame {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0; // data bounds
  double left = 50.0, top = 20.0, width = 540.0, height = 540.0;

  double px(double x) const { return left + (x - x0) / (x1 - x0) * width; }
  double py(double y) const { return top + (y1 - y) / (y1 - y0) * height; }
};

inline void draw_axes(std::string& svg, const Frame& f, const std::string& x_label,
                      const std::string& y_label) {
  svg += "<rect x=\"" + num(f.left) + "\" y=\"" + num(f.top) + "\" width=\"" + num(f.width) +
         "\" height=\"" + num(f.height) + "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    double fx = f.x0 + (f.x1 - f.x0) * i / 4.0;
    double fy = f.y0 + (f.y1 - f.y0) * i / 4.0;
    svg += "<text x=\"" + num(f.px(fx)) + "\" y=\"" + num(f.top + f.height + 16.0) +
           "\" font-size=\"11\" text-anchor=\"middle\" fill=\"#333\">" + num(fx) + "</text>\n";
    svg += "<text x=\"" + num(f.left - 6.0) + "\" y=\"" + num(f.py(fy) + 4.0) +
           "\" font-size=\"11\" text-anchor=\"end\" fill=\"#333\">" + num(fy) + "</text>\n";
  }
  svg += "<text x=\"" + num(f.left + f.width / 2.0) + "\" y=\"" +
         num(f.top + f.height + 34.0) + "\" font-size=\"12\" text-anchor=\"middle\" "
         "fill=\"#333\">" + x_label + "</text>\n";
  svg += "<text x=\"14\" y=\"" + num(f.top + f.height / 2.0) +
         "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#333\" transform=\"rotate(-90 14 " +
         num(f.top + f.height / 2.0) + ")\">" + y_label + "</text>\n";
}

} // namespace plotdetail

// Paths of all agents over the mission's region layout.
inline std::string render_trajectory_svg(const Scenario& sc,
                                         const std::map<int, std::vector<Vec2>>& paths) {
  using plotdetail::num;
  plotdetail::Frame f;
  f.x0 = sc.global.workspace_min.x;
  f.x1 = sc.global.workspace_max.x;
  f.y0 = sc.global.workspace_min.y;
  f.y1 = sc.global.workspace_max.y;
  // keep the world aspect ratio inside a 540x540 canvas
  const double extent_x = f.x1 - f.x0, extent_y = f.y1 - f.y0;
  if (extent_x > extent_y)
    f.height = f.width * extent_y / extent_x;
  else
    f.width = f.height * extent_x / extent_y;

  const double total_w = f.left + f.width + 150.0;
  const double total_h = f.top + f.height + 46.0;
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(total_w) +
                    "\" height=\"" + num(total_h) + "\" viewBox=\"0 0 " + num(total_w) + " " +
                    num(total_h) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  plotdetail::draw_axes(svg, f, "x [m]", "y [m]");

  for (const AgentSpec& a : sc.agents)
    for (const Region& reg : a.regions) {
      double rx = (f.px(reg.center.x + reg.radius) - f.px(reg.center.x - reg.radius)) / 2.0;
      svg += "<circle cx=\"" + num(f.px(reg.center.x)) + "\" cy=\"" + num(f.py(reg.center.y)) +
             "\" r=\"" + num(rx) +
             "\" fill=\"#8888ff\" fill-opacity=\"0.08\" stroke=\"#7777aa\" "
             "stroke-dasharray=\"4 3\"/>\n";
      svg += "<text x=\"" + num(f.px(reg.center.x)) + "\" y=\"" + num(f.py(reg.center.y)) +
             "\" font-size=\"10\" text-anchor=\"middle\" fill=\"#555577\">" + reg.id +
             "</text>\n";
    }

  int index = 0;
  for (const auto& [agent, path] : paths) {
    const char* color = plotdetail::agent_color(index);
    if (!path.empty()) {
      std::string points;
      for (const Vec2& p : path)
        points += num(f.px(p.x)) + "," + num(f.py(p.y)) + " ";
      svg += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + color +
             "\" stroke-width=\"1.5\"/>\n";
      svg += "<circle cx=\"" + num(f.px(path.front().x)) + "\" cy=\"" +
             num(f.py(path.front().y)) + "\" r=\"4\" fill=\"" + color + "\"/>\n";
      svg += "<circle cx=\"" + num(f.px(path.back().x)) + "\" cy=\"" + num(f.py(path.back().y)) +
             "\" r=\"5\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    }
    svg += "<text x=\"" + num(f.left + f.width + 14.0) + "\" y=\"" +
           num(f.top + 14.0 + 18.0 * index) + "\" font-size=\"12\" fill=\"" + color +
           "\">agent " + std::to_string(agent) + "</text>\n";
    ++index;
  }
  svg += "</svg>\n";
  return svg;
}

// Distance history of every maintained link, with the communication radius
// drawn as a dashed ceiling.
inline std::string render_edge_distance_svg(
    double comm_radius, const std::map<std::pair<int, int>, std::vector<Vec2>>& linked_series) {
  using plotdetail::num;
  // series store (t, distance) pairs in Vec2 for reuse of the point type
  double t_max = 1.0, d_max = comm_radius;
  for (const auto& [pair, pts] : linked_series)
    for (const Vec2& p : pts) {
      t_max = std::max(t_max, p.x);
      d_max = std::max(d_max, p.y);
    }
  plotdetail::Frame f;
  f.x0 = 0.0;
  f.x1 = t_max;
  f.y0 = 0.0;
  f.y1 = d_max * 1.12;
  f.width = 660.0;
  f.height = 330.0;

  const double total_w = f.left + f.width + 110.0;
  const double total_h = f.top + f.height + 46.0;
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(total_w) +
                    "\" height=\"" + num(total_h) + "\" viewBox=\"0 0 " + num(total_w) + " " +
                    num(total_h) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  plotdetail::draw_axes(svg, f, "t [s]", "link length [m]");

  svg += "<line x1=\"" + num(f.px(f.x0)) + "\" y1=\"" + num(f.py(comm_radius)) + "\" x2=\"" +
         num(f.px(f.x1)) + "\" y2=\"" + num(f.py(comm_radius)) +
         "\" stroke=\"#cc2222\" stroke-dasharray=\"6 4\"/>\n";
  svg += "<text x=\"" + num(f.left + f.width + 8.0) + "\" y=\"" + num(f.py(comm_radius) + 4.0) +
         "\" font-size=\"11\" fill=\"#cc2222\">r = " + num(comm_radius) + "</text>\n";

  int index = 0;
  for (const auto& [pair, pts] : linked_series) {
    const char* color = plotdetail::agent_color(index);
    if (!pts.empty()) {
      std::string points;
      for (const Vec2& p : pts) points += num(f.px(p.x)) + "," + num(f.py(p.y)) + " ";
      svg += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + color +
             "\" stroke-width=\"1.3\"/>\n";
    }
    svg += "<text x=\"" + num(f.left + f.width + 8.0) + "\" y=\"" +
           num(f.top + 14.0 + 16.0 * index) + "\" font-size=\"11\" fill=\"" + color + "\">" +
           std::to_string(pair.first) + "&#8211;" + std::to_string(pair.second) + "</text>\n";
    ++index;
  }
  svg += "</svg>\n";
  return svg;
}

struct PlotFiles {
  std::filesystem::path trajectory;
  std::filesystem::path edge_distance;
};

// Read a bundle directory and render both pictures into `out_dir` (defaults
// to the bundle itself).  Throws ValidationError on a missing or malformed
// bundle; an empty run yields empty-axes pictures.
inline PlotFiles render_plots(const std::filesystem::path& bundle_dir,
                              const std::filesystem::path& out_dir = {}) {
  namespace fs = std::filesystem;
  const fs::path out = out_dir.empty() ? bundle_dir : out_dir;

  Scenario sc = load_scenario((bundle_dir / "scenario.json").string());
  plotdetail::CsvTable traces = plotdetail::read_csv(bundle_dir / "traces.csv");
  plotdetail::CsvTable edges = plotdetail::read_csv(bundle_dir / "edges.csv");
  if (traces.header != std::vector<std::string>{"t", "agent", "x", "y", "b"})
    throw ValidationError("traces.csv has an unexpected header");
  if (edges.header != std::vector<std::string>{"t", "i", "j", "distance", "linked"})
    throw ValidationError("edges.csv has an unexpected header");

  std::map<int, std::vector<Vec2>> paths;
  for (const AgentSpec& a : sc.agents) paths[a.id]; // legend lists every agent
  for (const std::vector<std::string>& row : traces.rows) {
    if (row.size() != 5) throw ValidationError("traces.csv has a malformed row");
    paths[std::stoi(row[1])].push_back(Vec2{std::stod(row[2]), std::stod(row[3])});
  }

  std::map<std::pair<int, int>, std::vector<Vec2>> linked_series;
  for (const std::vector<std::string>& row : edges.rows) {
    if (row.size() != 5) throw ValidationError("edges.csv has a malformed row");
    if (row[4] == "1")
      linked_series[{std::stoi(row[1]), std::stoi(row[2])}].push_back(
          Vec2{std::stod(row[0]), std::stod(row[3])});
  }

  fs::create_directories(out);
  PlotFiles files{out / "trajectory.svg", out / "edge_distances.svg"};
  {
    std::ofstream svg(files.trajectory, std::ios::binary);
    if (!svg) throw ValidationError("cannot write " + files.trajectory.string());
    svg << render_trajectory_svg(sc, paths);
  }
  {
    std::ofstream svg(files.edge_distance, std::ios::binary);
    if (!svg) throw ValidationError("cannot write " + files.edge_distance.string());
    svg << render_edge_distance_svg(sc.global.comm_radius, linked_series);
  }
  return files;
}

} // namespace ltlswarm
