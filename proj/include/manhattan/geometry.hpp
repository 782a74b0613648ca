#pragma once

#include <array>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace manhattan {

// Integer lattice point. Every site is the midpoint of exactly one edge of the
// tilted lattice, so a site doubles as the key of that edge (and its mirror).
struct Site {
  int a = 0;
  int b = 0;

  friend constexpr bool operator==(Site, Site) = default;
  friend constexpr auto operator<=>(Site, Site) = default;
  friend constexpr Site operator+(Site s, Site t) { return {s.a + t.a, s.b + t.b}; }
  friend constexpr Site operator-(Site s, Site t) { return {s.a - t.a, s.b - t.b}; }
};

using Offset = Site;

struct SiteHash {
  std::size_t operator()(Site s) const noexcept {
    return std::hash<std::uint64_t>{}((std::uint64_t(std::uint32_t(s.a)) << 32) |
                                      std::uint32_t(s.b));
  }
};

// Point with half-integer coordinates, stored doubled so arithmetic is exact.
struct HalfPoint {
  int x2 = 0;
  int y2 = 0;

  constexpr double x() const { return x2 / 2.0; }
  constexpr double y() const { return y2 / 2.0; }

  friend constexpr bool operator==(HalfPoint, HalfPoint) = default;
  friend constexpr auto operator<=>(HalfPoint, HalfPoint) = default;
};

// A vertex of the tilted lattice: (x+1/2, y+1/2) with x, y integers and x-y even.
using TiltedVertex = HalfPoint;

enum class Orientation : std::uint8_t { NE, NW };
enum class Direction : std::uint8_t { E = 0, N = 1, W = 2, S = 3 };

inline constexpr std::array<Direction, 4> kDirections{Direction::E, Direction::N, Direction::W,
                                                      Direction::S};

constexpr Site unit(Direction d) {
  switch (d) {
    case Direction::E: return {1, 0};
    case Direction::N: return {0, 1};
    case Direction::W: return {-1, 0};
    case Direction::S: return {0, -1};
  }
  return {0, 0};
}

constexpr Direction opposite(Direction d) {
  return static_cast<Direction>((static_cast<int>(d) + 2) & 3);
}

constexpr char direction_char(Direction d) {
  constexpr std::string_view names = "ENWS";
  return names[static_cast<int>(d)];
}

inline Direction parse_direction(std::string_view s) {
  if (s == "E") return Direction::E;
  if (s == "N") return Direction::N;
  if (s == "W") return Direction::W;
  if (s == "S") return Direction::S;
  throw std::invalid_argument("unknown direction '" + std::string(s) + "'");
}

constexpr const char* orientation_name(Orientation m) { return m == Orientation::NE ? "NE" : "NW"; }

// Floor division and modulo for possibly negative operands.
constexpr int floor_div(int x, int d) {
  int q = x / d;
  return (x % d != 0 && ((x < 0) != (d < 0))) ? q - 1 : q;
}
constexpr int ceil_div(int x, int d) { return -floor_div(-x, d); }
constexpr bool is_even(int x) { return (x & 1) == 0; }

constexpr bool is_tilted_vertex(HalfPoint p) {
  // (x2-1)/2 and (y2-1)/2 must be integers with even difference.
  if (is_even(p.x2) || is_even(p.y2)) return false;
  return is_even((p.x2 - p.y2) / 2);
}

// "/" when a-b is even, "\" otherwise.
constexpr Orientation mirror_orientation(Site s) {
  return is_even(s.a - s.b) ? Orientation::NE : Orientation::NW;
}

// Endpoints of the tilted edge with midpoint s, ordered by x.
constexpr std::pair<TiltedVertex, TiltedVertex> edge_for_site(Site s) {
  if (mirror_orientation(s) == Orientation::NE)
    return {{2 * s.a - 1, 2 * s.b - 1}, {2 * s.a + 1, 2 * s.b + 1}};
  return {{2 * s.a - 1, 2 * s.b + 1}, {2 * s.a + 1, 2 * s.b - 1}};
}

constexpr Site site_for_edge(TiltedVertex u, TiltedVertex v) { return {(u.x2 + v.x2) / 4, (u.y2 + v.y2) / 4}; }

constexpr Direction reflect(Direction d, Orientation m) {
  if (m == Orientation::NE) {
    constexpr std::array<Direction, 4> t{Direction::N, Direction::E, Direction::S, Direction::W};
    return t[static_cast<int>(d)];
  }
  constexpr std::array<Direction, 4> t{Direction::S, Direction::W, Direction::N, Direction::E};
  return t[static_cast<int>(d)];
}

// Street orientation of the Manhattan lattice seen by a ray that starts at the
// origin heading east: rows with even y run east, columns with even x run north.
constexpr bool manhattan_consistent(Site from, Direction d) {
  switch (d) {
    case Direction::E: return is_even(from.b);
    case Direction::W: return !is_even(from.b);
    case Direction::N: return is_even(from.a);
    case Direction::S: return !is_even(from.a);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Rotated lattice coordinates.
//
// With i = (x+y-1)/2 and j = (x-y)/2 the tilted lattice is the square lattice
// Z^2: NE edges join (i,j)-(i+1,j), NW edges join (i,j)-(i,j+1). The centre
// (1/2,1/2) is (0,0).
// ---------------------------------------------------------------------------
struct LatticeVertex {
  int i = 0;
  int j = 0;

  friend constexpr bool operator==(LatticeVertex, LatticeVertex) = default;
  friend constexpr auto operator<=>(LatticeVertex, LatticeVertex) = default;
};

constexpr TiltedVertex to_tilted(LatticeVertex v) {
  return {2 * (v.i + v.j) + 1, 2 * (v.i - v.j) + 1};
}

constexpr LatticeVertex to_lattice(TiltedVertex t) {
  return {(t.x2 + t.y2 - 2) / 4, (t.x2 - t.y2) / 4};
}

// Site of the edge from v to its +i neighbour.
constexpr Site site_of_i_edge(LatticeVertex v) { return {v.i + v.j + 1, v.i - v.j + 1}; }
// Site of the edge from v to its +j neighbour.
constexpr Site site_of_j_edge(LatticeVertex v) { return {v.i + v.j + 1, v.i - v.j}; }

// Site of the edge joining two adjacent lattice vertices.
constexpr Site site_between(LatticeVertex u, LatticeVertex v) {
  if (u.j == v.j) return site_of_i_edge({std::min(u.i, v.i), u.j});
  return site_of_j_edge({u.i, std::min(u.j, v.j)});
}

constexpr std::pair<LatticeVertex, LatticeVertex> lattice_edge(Site s) {
  if (mirror_orientation(s) == Orientation::NE) {
    LatticeVertex lo{(s.a + s.b - 2) / 2, (s.a - s.b) / 2};
    return {lo, {lo.i + 1, lo.j}};
  }
  LatticeVertex lo{(s.a + s.b - 1) / 2, floor_div(s.a - s.b - 1, 2)};
  return {lo, {lo.i, lo.j + 1}};
}

constexpr int chebyshev(LatticeVertex v) { return std::max(std::abs(v.i), std::abs(v.j)); }

// Axis-aligned box of lattice vertices, inclusive on both ends.
struct VertexBox {
  int i_lo = 0, i_hi = -1, j_lo = 0, j_hi = -1;

  constexpr bool empty() const { return i_lo > i_hi || j_lo > j_hi; }
  constexpr bool contains(LatticeVertex v) const {
    return v.i >= i_lo && v.i <= i_hi && v.j >= j_lo && v.j <= j_hi;
  }
  constexpr int width() const { return i_hi - i_lo + 1; }
  constexpr int height() const { return j_hi - j_lo + 1; }
  constexpr std::size_t size() const { return empty() ? 0 : std::size_t(width()) * height(); }
  constexpr std::size_t index(LatticeVertex v) const {
    return std::size_t(v.j - j_lo) * width() + (v.i - i_lo);
  }
  constexpr LatticeVertex at(std::size_t k) const {
    return {i_lo + int(k % std::size_t(width())), j_lo + int(k / std::size_t(width()))};
  }
  static constexpr VertexBox centred(int r) { return {-r, r, -r, r}; }
};

// Smallest extent M such that every edge with both endpoints in the box has
// its site inside [-M, M]^2.
constexpr int required_extent(const VertexBox& box) {
  int m = 0;
  auto take = [&](Site s) { m = std::max({m, std::abs(s.a), std::abs(s.b)}); };
  for (int i : {box.i_lo, box.i_hi - 1})
    for (int j : {box.j_lo, box.j_hi})
      if (box.width() > 1) take(site_of_i_edge({i, j}));
  for (int i : {box.i_lo, box.i_hi})
    for (int j : {box.j_lo, box.j_hi - 1})
      if (box.height() > 1) take(site_of_j_edge({i, j}));
  return m;
}

// ---------------------------------------------------------------------------
// Tilted regions
// ---------------------------------------------------------------------------
enum class RegionKind : std::uint8_t { Q, T, T1, T2, T3, T4 };

struct TiltedRegion {
  RegionKind kind = RegionKind::Q;
  int n = 1;
};

inline std::string region_name(RegionKind k) {
  switch (k) {
    case RegionKind::Q: return "Q";
    case RegionKind::T: return "T";
    case RegionKind::T1: return "T1";
    case RegionKind::T2: return "T2";
    case RegionKind::T3: return "T3";
    case RegionKind::T4: return "T4";
  }
  return "?";
}

// Membership by the defining inequalities on real coordinates, so tilted
// vertices, sites and trajectory points share one predicate.
constexpr bool region_contains(TiltedRegion r, double x, double y) {
  const double s = x + y - 1;
  const double d = x - y;
  const double n = r.n;
  auto abs = [](double v) { return v < 0 ? -v : v; };
  switch (r.kind) {
    case RegionKind::Q: return abs(s) <= n && abs(d) <= n;
    case RegionKind::T: return 1 <= s && s <= n && abs(d) <= 2 * n;
    case RegionKind::T1: return n + 1 <= s && s <= 2 * n && abs(d) <= 2 * n;
    case RegionKind::T2: return -2 * n <= s && s <= -n - 1 && abs(d) <= 2 * n;
    case RegionKind::T3: return n + 1 <= d && d <= 2 * n && abs(s) <= 2 * n;
    case RegionKind::T4: return -2 * n <= d && d <= -n - 1 && abs(s) <= 2 * n;
  }
  return false;
}

inline bool region_contains(TiltedRegion r, HalfPoint p) { return region_contains(r, p.x(), p.y()); }
inline bool region_contains(TiltedRegion r, Site s) { return region_contains(r, double(s.a), double(s.b)); }

// Smallest m with the integer point inside Q_m.
constexpr int q_radius(Site s) { return std::max(std::abs(s.a + s.b - 1), std::abs(s.a - s.b)); }

// Tilted vertices of a region as a box of lattice vertices.
constexpr VertexBox lattice_box(TiltedRegion r) {
  const int n = r.n;
  switch (r.kind) {
    case RegionKind::Q: return VertexBox::centred(n / 2);
    case RegionKind::T: return {1, n / 2, -n, n};
    case RegionKind::T1: return {ceil_div(n + 1, 2), n, -n, n};
    case RegionKind::T2: return {-n, floor_div(-n - 1, 2), -n, n};
    case RegionKind::T3: return {-n, n, ceil_div(n + 1, 2), n};
    case RegionKind::T4: return {-n, n, -n, floor_div(-n - 1, 2)};
  }
  return {};
}

// An edge is inside Q_k when both endpoints are.
constexpr bool edge_inside_q(Site s, int k) {
  auto [u, v] = lattice_edge(s);
  const VertexBox q = VertexBox::centred(k / 2);
  return q.contains(u) && q.contains(v);
}

}  // namespace manhattan
