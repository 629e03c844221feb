#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ctxnav/core/errors.hpp"
#include "ctxnav/core/json.hpp"
#include "ctxnav/harness/episode.hpp"
#include "ctxnav/mapping/grid.hpp"
#include "ctxnav/mapping/instances.hpp"

namespace ctxnav::harness {

struct RenderFiles {
  std::vector<std::string> graymaps;
  std::string svg;
  std::string sidecar;
};

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  // Avoid "-0.000" so equal geometry always prints the same way.
  if (std::string_view(buf) == "-0.000") return "0.000";
  return buf;
}

inline void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

/// Binary PGM with north up: row 0 is the largest y.
template <class Shade>
std::string pgm(const mapping::GridStack& g, Shade&& shade) {
  std::string s = "P5\n" + std::to_string(g.width()) + " " + std::to_string(g.height()) + "\n255\n";
  s.reserve(s.size() + g.size());
  for (int y = g.height() - 1; y >= 0; --y) {
    for (int x = 0; x < g.width(); ++x) s.push_back(static_cast<char>(shade(mapping::Cell{x, y})));
  }
  return s;
}

inline int room_count(const mapping::GridStack& g) {
  int n = 0;
  for (int r : g.room) n = std::max(n, r + 1);
  return n;
}

inline constexpr std::array<const char*, 8> kRoomTints = {"#8dd3c7", "#ffffb3", "#bebada", "#fb8072",
                                                          "#80b1d3", "#fdb462", "#b3de69", "#fccde5"};

}  // namespace detail

/// Writes occupancy.pgm, walls.pgm, rooms.pgm, value.pgm, overlay.svg and
/// render.json into `out_dir` (created if missing). Output depends only on
/// the arguments.
inline RenderFiles export_map_render(const mapping::GridStack& g, const EpisodeResult& r,
                                     const std::vector<mapping::InstanceRecord>& instances,
                                     const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw IoError("cannot create output directory '" + out_dir + "'");
  if (g.size() == 0) throw DomainError("export_map_render: empty grid");

  RenderFiles files;
  const int rooms = detail::room_count(g);
  auto put = [&](const std::string& name, const std::string& bytes) {
    const std::string p = out_dir + "/" + name;
    detail::write_bytes(p, bytes);
    files.graymaps.push_back(p);
  };
  put("occupancy.pgm", detail::pgm(g, [&](mapping::Cell c) {
        switch (g.occ(c)) {
          case mapping::Occupancy::free: return 255;
          case mapping::Occupancy::occupied: return 0;
          default: return 128;
        }
      }));
  put("walls.pgm", detail::pgm(g, [&](mapping::Cell c) { return g.is_wall(c) ? 0 : 255; }));
  put("rooms.pgm", detail::pgm(g, [&](mapping::Cell c) {
        const int k = g.room_of(c);
        return k < 0 ? 0 : 255 * (k + 1) / (rooms + 1);
      }));
  put("value.pgm", detail::pgm(g, [&](mapping::Cell c) {
        const std::size_t i = g.index(c);
        if (g.confidence[i] <= 0.0f) return 0;
        return static_cast<int>(std::lround(255.0 * std::clamp(static_cast<double>(g.value[i]), 0.0, 1.0)));
      }));

  // SVG in meters scaled to pixels, y flipped.
  const double px = 200.0;
  const Vec2 lo = g.min_corner(), hi = g.max_corner();
  const double cell = g.resolution() * px;
  auto sx = [&](double x) { return detail::fmt((x - lo.x) * px); };
  auto sy = [&](double y) { return detail::fmt((hi.y - y) * px); };
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::fmt((hi.x - lo.x) * px) << "\" height=\""
      << detail::fmt((hi.y - lo.y) * px) << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"#d9d9d9\"/>\n";

  // Row runs of equal style keep the file small.
  auto layer = [&](const char* id, auto&& style) {
    svg << "<g id=\"" << id << "\">\n";
    for (int y = 0; y < g.height(); ++y) {
      int x = 0;
      while (x < g.width()) {
        const std::string st = style(mapping::Cell{x, y});
        int e = x + 1;
        while (e < g.width() && style(mapping::Cell{e, y}) == st) ++e;
        if (!st.empty()) {
          const Vec2 c0 = g.center_of({x, y});
          svg << "<rect x=\"" << sx(c0.x - 0.5 * g.resolution()) << "\" y=\"" << sy(c0.y + 0.5 * g.resolution())
              << "\" width=\"" << detail::fmt((e - x) * cell) << "\" height=\"" << detail::fmt(cell) << "\" " << st
              << "/>\n";
        }
        x = e;
      }
    }
    svg << "</g>\n";
  };
  layer("rooms", [&](mapping::Cell c) -> std::string {
    const int k = g.room_of(c);
    if (k >= 0) return std::string("fill=\"") + detail::kRoomTints[static_cast<std::size_t>(k) % 8] + "\"";
    return g.occ(c) == mapping::Occupancy::free ? "fill=\"#ffffff\"" : "";
  });
  layer("value", [&](mapping::Cell c) -> std::string {
    const std::size_t i = g.index(c);
    if (g.confidence[i] <= 0.0f || g.value[i] <= 0.0f) return "";
    const int q = std::clamp(static_cast<int>(g.value[i] * 8.0f), 0, 7);
    return "fill=\"#ff3300\" fill-opacity=\"" + detail::fmt(0.08 * (q + 1)) + "\"";
  });
  layer("obstacles", [&](mapping::Cell c) -> std::string {
    return g.occ(c) == mapping::Occupancy::occupied && !g.is_wall(c) ? "fill=\"#7f7f7f\"" : "";
  });
  layer("walls", [&](mapping::Cell c) -> std::string { return g.is_wall(c) ? "fill=\"#000000\"" : ""; });

  svg << "<g id=\"instances\" font-family=\"sans-serif\" font-size=\"14\">\n";
  for (const auto& inst : instances) {
    if (inst.points.empty()) continue;
    svg << "<rect x=\"" << sx(inst.bbox_min.x) << "\" y=\"" << sy(inst.bbox_max.y) << "\" width=\""
        << detail::fmt((inst.bbox_max.x - inst.bbox_min.x) * px) << "\" height=\""
        << detail::fmt((inst.bbox_max.y - inst.bbox_min.y) * px)
        << "\" fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << sx(inst.bbox_min.x) << "\" y=\"" << sy(inst.bbox_max.y) << "\" dy=\"-3\" fill=\"#1f4e9c\">"
        << inst.category << " #" << inst.id << "</text>\n";
  }
  svg << "</g>\n";

  if (r.trajectory.size() >= 2) {
    svg << "<polyline id=\"trajectory\" fill=\"none\" stroke=\"#0070c0\" stroke-width=\"3\" points=\"";
    for (std::size_t i = 0; i < r.trajectory.size(); ++i) {
      if (i) svg << ' ';
      svg << sx(r.trajectory[i].position.x) << ',' << sy(r.trajectory[i].position.y);
    }
    svg << "\"/>\n";
  }
  // The marker sits on the final pose; without a trajectory there is nothing to place it on.
  std::optional<Vec2> stop;
  if (!r.trajectory.empty()) stop = r.trajectory.back().position;
  if (stop) {
    const std::string verdict(to_string(r.verdict));
    svg << "<g id=\"stop\"><circle cx=\"" << sx(stop->x) << "\" cy=\"" << sy(stop->y)
        << "\" r=\"8\" fill=\"#c00000\" stroke=\"#ffffff\" stroke-width=\"2\"/>"
        << "<text x=\"" << sx(stop->x) << "\" y=\"" << sy(stop->y)
        << "\" dx=\"10\" dy=\"-10\" font-family=\"sans-serif\" font-size=\"16\" fill=\"#c00000\">" << verdict
        << "</text></g>\n";
  }
  svg << "</svg>\n";
  files.svg = out_dir + "/overlay.svg";
  detail::write_bytes(files.svg, svg.str());

  OrderedJson side;
  side["id"] = r.id;
  side["verdict"] = to_string(r.verdict);
  side["success"] = r.success ? 1 : 0;
  side["steps"] = r.steps;
  side["path_length"] = r.path_length;
  side["grid"] = {{"origin", {lo.x, lo.y}},
                  {"resolution", g.resolution()},
                  {"width", g.width()},
                  {"height", g.height()}};
  side["rooms"] = rooms;
  OrderedJson insts = OrderedJson::array();
  for (const auto& inst : instances) {
    insts.push_back({{"id", inst.id},
                     {"category", inst.category},
                     {"center", {inst.center.x, inst.center.y}},
                     {"room", mapping::instance_room(g, inst)}});
  }
  side["instances"] = std::move(insts);
  if (stop) side["stop"] = {stop->x, stop->y};
  OrderedJson names = OrderedJson::array();
  for (const auto& p : files.graymaps) names.push_back(fs::path(p).filename().string());
  names.push_back("overlay.svg");
  side["files"] = std::move(names);
  files.sidecar = out_dir + "/render.json";
  write_text_file(files.sidecar, side);
  return files;
}

}  // namespace ctxnav::harness
