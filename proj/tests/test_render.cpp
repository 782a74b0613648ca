#include <gtest/gtest.h>

#include <regex>
#include <sstream>

#include "manhattan/render.hpp"
#include "oracles.hpp"

using namespace manhattan;

namespace {

int count(const std::string& s, const std::string& needle) {
  int n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

// Points of the first polygon inside the group with the given id.
std::vector<std::pair<double, double>> polygon_in(const std::string& svg, const std::string& id) {
  const auto g = svg.find("<g id=\"" + id + "\"");
  if (g == std::string::npos) return {};
  const auto p = svg.find("points=\"", g);
  const auto e = svg.find('"', p + 8);
  std::istringstream in(svg.substr(p + 8, e - p - 8));
  std::vector<std::pair<double, double>> out;
  std::string tok;
  while (in >> tok) {
    const auto comma = tok.find(',');
    out.emplace_back(std::stod(tok.substr(0, comma)), std::stod(tok.substr(comma + 1)));
  }
  return out;
}

Configuration ring(int m, int r) {
  Configuration c(m);
  for (int k = -r; k < r; ++k) {
    c.set_closed(site_between({k, -r}, {k + 1, -r}), true);
    c.set_closed(site_between({k, r}, {k + 1, r}), true);
    c.set_closed(site_between({-r, k}, {-r, k + 1}), true);
    c.set_closed(site_between({r, k}, {r, k + 1}), true);
  }
  return c;
}

}  // namespace

TEST(Render, EmptyLatticeIsByteStable) {
  RenderSpec spec;
  spec.layers = {Layer::lattice};
  const Configuration c(2);
  const std::string svg = render_svg(c, {}, spec);
  EXPECT_EQ(svg, render_svg(Configuration(2), {}, spec));
  EXPECT_EQ(svg.rfind("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\"", 0),
            0u);
  EXPECT_EQ(count(svg, "<line "), 25);
  EXPECT_EQ(count(svg, "<g id="), 1);
  EXPECT_EQ(svg.substr(svg.size() - 7), "</svg>\n");
}

// Each lattice segment is centred at (scale a, -scale b) with slope set by parity.
TEST(Render, SegmentsFollowSiteGeometry) {
  RenderSpec spec;
  spec.layers = {Layer::lattice};
  const std::string svg = render_svg(Configuration(3), {}, spec);
  const std::regex line(R"re(<line x1="(-?[\d.]+)" y1="(-?[\d.]+)" x2="(-?[\d.]+)" y2="(-?[\d.]+)"/>)re");
  std::set<std::pair<int, int>> centres;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), line); it != std::sregex_iterator(); ++it) {
    const double x1 = std::stod((*it)[1]), y1 = std::stod((*it)[2]), x2 = std::stod((*it)[3]), y2 = std::stod((*it)[4]);
    EXPECT_EQ(std::abs(x2 - x1), 20);
    EXPECT_EQ(std::abs(y2 - y1), 20);
    const int a = int(std::lround((x1 + x2) / 40)), b = int(std::lround(-(y1 + y2) / 40));
    centres.insert({a, b});
    // Screen y points down, so a "/" mirror has opposite signs of dx and dy.
    const bool ne = (x2 - x1) * (y2 - y1) < 0;
    EXPECT_EQ(ne, mirror_orientation({a, b}) == Orientation::NE) << a << "," << b;
  }
  EXPECT_EQ(centres.size(), 49u);
}

TEST(Render, MirrorsOnlyForClosedSites) {
  RenderSpec spec;
  spec.layers = {Layer::mirrors};
  Configuration c(3);
  c.set_closed({1, 0}, true);
  c.set_closed({-2, 3}, true);
  const std::string svg = render_svg(c, {}, spec);
  EXPECT_EQ(count(svg, "<line "), 2);
  EXPECT_NE(svg.find("<line x1=\"10\" y1=\"-10\" x2=\"30\" y2=\"10\"/>"), std::string::npos);
}

TEST(Render, LoopTrajectoryIsUnitSquare) {
  const Configuration c = Configuration::all_closed(3);
  Overlays ov;
  ov.trajectory = trace(c).states;
  RenderSpec spec;
  spec.layers = {Layer::trajectory};
  const std::string svg = render_svg(c, ov, spec);
  EXPECT_NE(svg.find("<polygon points=\"0,0 20,0 20,20 0,20\"/>"), std::string::npos);
  const auto pts = polygon_in(svg, "trajectory");
  ASSERT_EQ(pts.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) {
    const auto [x1, y1] = pts[k];
    const auto [x2, y2] = pts[(k + 1) % 4];
    EXPECT_EQ(std::abs(x2 - x1) + std::abs(y2 - y1), 20);
  }
}

TEST(Render, OpenTrajectoryIsPolyline) {
  const Configuration c(4);
  Overlays ov;
  ov.trajectory = trace(c).states;
  RenderSpec spec;
  spec.layers = {Layer::trajectory};
  const std::string svg = render_svg(c, ov, spec);
  EXPECT_NE(svg.find("<polyline points=\"0,0 20,0 40,0 60,0 80,0\"/>"), std::string::npos);
}

TEST(Render, CircuitWitnessWinds) {
  const int n = 4;
  const Configuration c = ring(required_extent(VertexBox::centred(n)), n / 2 + 1);
  const EventResult r = surrounding_circuit_exact(c, n);
  ASSERT_TRUE(r.holds);
  std::istringstream in(witness_to_string(EventKind::circuit, n, r));
  Overlays ov;
  ov.witness = read_witness(in).polylines;
  RenderSpec spec;
  spec.layers = {Layer::circuit_witness};
  const std::string svg = render_svg(c, ov, spec);
  const auto pts = polygon_in(svg, "circuit_witness");
  ASSERT_EQ(pts.size(), r.path.size());
  std::vector<HalfPoint> back;
  for (auto [x, y] : pts) back.push_back({int(std::lround(x / 10)), int(std::lround(-y / 10))});
  EXPECT_EQ(std::abs(oracle::angle_winding(back)), 1);
}

TEST(Render, PatternMatchesAndRegions) {
  const Pattern g("p", {0, 0}, {{1, 0}}, {});
  Configuration c(3);
  c.set_closed({1, 0}, true);
  c.set_closed({3, 2}, true);
  Overlays ov;
  ov.pattern = &g;
  RenderSpec spec;
  spec.layers = {Layer::pattern_matches, Layer::regions};
  spec.regions = {{RegionKind::Q, 2}};
  const std::string svg = render_svg(c, ov, spec);
  EXPECT_EQ(count(svg, "<line "), int(match_pattern(c, g).size()));
  EXPECT_EQ(count(svg, "<polygon "), 1);
  EXPECT_NE(svg.find("id=\"regions\""), std::string::npos);
}

TEST(Render, Errors) {
  RenderSpec spec;
  spec.scale = 15;
  EXPECT_THROW(render_svg(Configuration(2), {}, spec), std::invalid_argument);
  spec.scale = 20;
  Overlays ov;
  ov.trajectory = trace(Configuration(6)).states;
  EXPECT_THROW(render_svg(Configuration(2), ov, spec), std::invalid_argument);
  EXPECT_THROW(parse_layer("nope"), std::invalid_argument);
  EXPECT_EQ(parse_layer("circuit_witness"), Layer::circuit_witness);
}
