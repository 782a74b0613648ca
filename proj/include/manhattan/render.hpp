#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "manhattan/configuration.hpp"
#include "manhattan/enhancement.hpp"
#include "manhattan/events.hpp"
#include "manhattan/geometry.hpp"
#include "manhattan/tracer.hpp"

namespace manhattan {

enum class Layer { lattice, mirrors, trajectory, circuit_witness, pattern_matches, regions };

inline const char* layer_name(Layer l) {
  switch (l) {
    case Layer::lattice: return "lattice";
    case Layer::mirrors: return "mirrors";
    case Layer::trajectory: return "trajectory";
    case Layer::circuit_witness: return "circuit_witness";
    case Layer::pattern_matches: return "pattern_matches";
    case Layer::regions: return "regions";
  }
  return "?";
}

inline Layer parse_layer(const std::string& s) {
  for (Layer l : {Layer::lattice, Layer::mirrors, Layer::trajectory, Layer::circuit_witness, Layer::pattern_matches,
                  Layer::regions})
    if (s == layer_name(l)) return l;
  throw std::invalid_argument("unknown layer '" + s + "'");
}

struct RenderSpec {
  std::set<Layer> layers{Layer::lattice, Layer::mirrors};
  int scale = 20;  // pixels per unit; even so half-integer points land on whole pixels
  std::map<Layer, std::string> palette{
      {Layer::lattice, "#d8d8d8"},         {Layer::mirrors, "#202020"}, {Layer::trajectory, "#e0701a"},
      {Layer::circuit_witness, "#1f6fd0"}, {Layer::pattern_matches, "#d01f2f"}, {Layer::regions, "#2a9d4a"},
  };
  std::vector<TiltedRegion> regions;
};

struct Overlays {
  std::vector<RayState> trajectory;
  std::vector<WitnessPolyline> witness;
  const Pattern* pattern = nullptr;
};

namespace detail {

class SvgWriter {
 public:
  explicit SvgWriter(int scale) : scale_(scale) {}

  // Doubled coordinates in, pixels out; y flips.
  std::string x(int x2) const { return format_double(x2 * scale_ / 2.0); }
  std::string y(int y2) const { return format_double(-y2 * scale_ / 2.0); }

  void line(std::ostream& out, HalfPoint p, HalfPoint q) const {
    out << "<line x1=\"" << x(p.x2) << "\" y1=\"" << y(p.y2) << "\" x2=\"" << x(q.x2) << "\" y2=\"" << y(q.y2)
        << "\"/>\n";
  }
  void poly(std::ostream& out, const std::vector<HalfPoint>& pts, bool closed) const {
    out << (closed ? "<polygon" : "<polyline") << " points=\"";
    for (std::size_t k = 0; k < pts.size(); ++k) out << (k ? " " : "") << x(pts[k].x2) << "," << y(pts[k].y2);
    out << "\"/>\n";
  }

 private:
  int scale_;
};

inline void edge_line(std::ostream& out, const SvgWriter& w, Site s) {
  auto [p, q] = edge_for_site(s);
  w.line(out, p, q);
}

}  // namespace detail

inline std::string render_svg(const Configuration& c, const Overlays& ov, const RenderSpec& spec) {
  if (spec.scale < 2 || spec.scale % 2) throw std::invalid_argument("render: scale must be an even integer >= 2");
  for (const auto& s : ov.trajectory)
    if (!c.contains(s.site)) throw std::invalid_argument("render: trajectory leaves the configuration extent");
  const int m = c.extent();
  const detail::SvgWriter w(spec.scale);
  const int half = (m + 1) * spec.scale;
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << 2 * half << "\" height=\""
      << 2 * half << "\" viewBox=\"" << -half << " " << -half << " " << 2 * half << " " << 2 * half << "\">\n";
  auto group = [&](Layer l, double width, bool fill = false) {
    out << "<g id=\"" << layer_name(l) << "\" stroke=\"" << spec.palette.at(l) << "\" stroke-width=\""
        << format_double(width) << "\" fill=\"" << (fill ? spec.palette.at(l) : "none") << "\">\n";
  };
  auto on = [&](Layer l) { return spec.layers.count(l) > 0; };

  if (on(Layer::lattice)) {
    group(Layer::lattice, 1);
    for (int b = -m; b <= m; ++b)
      for (int a = -m; a <= m; ++a) detail::edge_line(out, w, {a, b});
    out << "</g>\n";
  }
  if (on(Layer::regions)) {
    group(Layer::regions, 2);
    for (const auto& r : spec.regions) {
      const VertexBox b = lattice_box(r);
      if (b.empty()) continue;
      // Corners of the lattice box, pushed out by half a lattice step.
      auto corner = [](double i, double j) {
        return HalfPoint{int(2 * (i + j) + 1), int(2 * (i - j) + 1)};
      };
      w.poly(out,
             {corner(b.i_lo - 0.5, b.j_lo - 0.5), corner(b.i_hi + 0.5, b.j_lo - 0.5),
              corner(b.i_hi + 0.5, b.j_hi + 0.5), corner(b.i_lo - 0.5, b.j_hi + 0.5)},
             true);
    }
    out << "</g>\n";
  }
  if (on(Layer::mirrors)) {
    group(Layer::mirrors, 3);
    for (int b = -m; b <= m; ++b)
      for (int a = -m; a <= m; ++a)
        if (c.closed({a, b})) detail::edge_line(out, w, {a, b});
    out << "</g>\n";
  }
  if (on(Layer::pattern_matches) && ov.pattern && m >= ov.pattern->radius()) {
    group(Layer::pattern_matches, 4);
    for (Offset t : match_pattern(c, *ov.pattern)) detail::edge_line(out, w, ov.pattern->red() + t);
    out << "</g>\n";
  }
  if (on(Layer::circuit_witness) && !ov.witness.empty()) {
    group(Layer::circuit_witness, 3);
    for (const auto& p : ov.witness) w.poly(out, p.points, p.kind == "circuit");
    out << "</g>\n";
  }
  if (on(Layer::trajectory) && !ov.trajectory.empty()) {
    group(Layer::trajectory, 2);
    std::vector<HalfPoint> pts;
    for (const auto& s : ov.trajectory) pts.push_back({2 * s.site.a, 2 * s.site.b});
    const bool loop = ov.trajectory.size() > 1 &&
                      (ov.trajectory.back().site + unit(ov.trajectory.back().dir)) == ov.trajectory.front().site;
    w.poly(out, pts, loop);
    out << "</g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace manhattan
