#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <cstdint>
#include <deque>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "manhattan/configuration.hpp"
#include "manhattan/geometry.hpp"
#include "manhattan/text_io.hpp"

namespace manhattan {

// Tilted vertices joined when the edge between them is closed. Works in
// rotated lattice coordinates; edges whose site lies outside the extent read
// as open.
class ClosedGraphView {
 public:
  explicit ClosedGraphView(const Configuration& c) : c_(&c) {}

  const Configuration& configuration() const { return *c_; }

  bool closed_edge(LatticeVertex u, LatticeVertex v) const { return c_->closed_or_open(site_between(u, v)); }

  // Neighbours in lexicographic (i, j) order.
  static std::array<LatticeVertex, 4> neighbours(LatticeVertex u) {
    return {{{u.i - 1, u.j}, {u.i, u.j - 1}, {u.i, u.j + 1}, {u.i + 1, u.j}}};
  }

  template <typename F>
  void for_each_closed_neighbour(LatticeVertex u, F&& f) const {
    for (const auto& v : neighbours(u))
      if (closed_edge(u, v)) f(v);
  }

 private:
  const Configuration* c_;
};

enum class EventKind : std::uint8_t { closure, radial, crossing, circuit, circuit4 };

inline const char* event_name(EventKind k) {
  switch (k) {
    case EventKind::closure: return "E";
    case EventKind::radial: return "A";
    case EventKind::crossing: return "Aprime";
    case EventKind::circuit: return "Acirc";
    case EventKind::circuit4: return "Acirc4";
  }
  return "?";
}

inline EventKind parse_event(const std::string& s) {
  if (s == "E") return EventKind::closure;
  if (s == "A") return EventKind::radial;
  if (s == "Aprime") return EventKind::crossing;
  if (s == "Acirc") return EventKind::circuit;
  if (s == "Acirc4") return EventKind::circuit4;
  throw std::invalid_argument("unknown event '" + s + "' (expected E, A, Aprime, Acirc or Acirc4)");
}

struct EventResult {
  bool holds = false;
  // Path of closed adjacencies, or a circuit (last vertex joins the first).
  std::vector<LatticeVertex> path;
  bool is_circuit = false;
  // Four-rectangle detector: one crossing per rectangle.
  std::vector<std::vector<LatticeVertex>> parts;
  // Exact circuit detector, when it fails: lower-left corners of faces on an
  // open dual path from the centre to outside Q_2n.
  std::vector<LatticeVertex> dual_faces;
};

namespace detail {

inline void require_extent(const Configuration& c, int needed, const char* who) {
  if (c.extent() < needed)
    throw std::invalid_argument(std::string(who) + ": extent " + std::to_string(c.extent()) +
                                " too small, need >= " + std::to_string(needed));
}

// Breadth-first search inside `box` over closed edges accepted by `edge_ok`,
// from every vertex with is_source to the first vertex with is_target.
template <typename Source, typename Target, typename EdgeOk>
std::optional<std::vector<LatticeVertex>> bfs_path(const ClosedGraphView& g, const VertexBox& box, Source is_source,
                                                   Target is_target, EdgeOk edge_ok) {
  std::vector<std::int64_t> parent(box.size(), -2);  // -2 unvisited, -1 root
  std::deque<LatticeVertex> queue;
  auto path_to = [&](LatticeVertex v) {
    std::vector<LatticeVertex> out;
    for (std::int64_t k = std::int64_t(box.index(v)); k >= 0; k = parent[std::size_t(k)]) out.push_back(box.at(std::size_t(k)));
    return std::vector<LatticeVertex>(out.rbegin(), out.rend());
  };
  for (int i = box.i_lo; i <= box.i_hi; ++i)
    for (int j = box.j_lo; j <= box.j_hi; ++j) {
      const LatticeVertex v{i, j};
      if (!is_source(v)) continue;
      parent[box.index(v)] = -1;
      if (is_target(v)) return path_to(v);
      queue.push_back(v);
    }
  while (!queue.empty()) {
    const LatticeVertex u = queue.front();
    queue.pop_front();
    std::optional<LatticeVertex> hit;
    g.for_each_closed_neighbour(u, [&](LatticeVertex v) {
      if (hit || !box.contains(v) || !edge_ok(u, v)) return;
      auto& pv = parent[box.index(v)];
      if (pv != -2) return;
      pv = std::int64_t(box.index(u));
      if (is_target(v))
        hit = v;
      else
        queue.push_back(v);
    });
    if (hit) return path_to(*hit);
  }
  return std::nullopt;
}

}  // namespace detail

// A_n: the centre (1/2,1/2) joined by closed edges to a vertex outside Q_n.
inline EventResult radial_closed_path(const Configuration& c, int n) {
  if (n < 1) throw std::invalid_argument("radial_closed_path: n must be >= 1");
  const int h = n / 2;
  detail::require_extent(c, 2 * h + 1, "radial_closed_path");
  const VertexBox q = VertexBox::centred(h);
  const VertexBox box = VertexBox::centred(h + 1);
  ClosedGraphView g(c);
  auto path = detail::bfs_path(
      g, box, [](LatticeVertex v) { return v == LatticeVertex{0, 0}; }, [&](LatticeVertex v) { return !q.contains(v); },
      [&](LatticeVertex u, LatticeVertex v) { return q.contains(u) || q.contains(v); });
  EventResult r;
  if (path) {
    r.holds = true;
    r.path = std::move(*path);
  }
  return r;
}

// Crossing of a tilted rectangle in its long direction: T, T1, T2 between
// their two j-sides; T3, T4 between their two i-sides.
inline EventResult rect_crossing(const Configuration& c, int n, RegionKind which) {
  if (n < 1) throw std::invalid_argument("rect_crossing: n must be >= 1");
  if (which == RegionKind::Q) throw std::invalid_argument("rect_crossing: Q is not a rectangle");
  const VertexBox box = lattice_box({which, n});
  EventResult r;
  if (box.empty()) return r;
  detail::require_extent(c, required_extent(box), "rect_crossing");
  const bool along_j = which == RegionKind::T || which == RegionKind::T1 || which == RegionKind::T2;
  ClosedGraphView g(c);
  auto path = detail::bfs_path(
      g, box, [&](LatticeVertex v) { return along_j ? v.j == box.j_lo : v.i == box.i_lo; },
      [&](LatticeVertex v) { return along_j ? v.j == box.j_hi : v.i == box.i_hi; },
      [](LatticeVertex, LatticeVertex) { return true; });
  if (path) {
    r.holds = true;
    r.path = std::move(*path);
  }
  return r;
}

// Signed crossings of the cut from the centre: the segment (0,0)-(0,1/2)
// followed by the ray j = 1/2, i >= 0. Only edges (i,0)-(i,1) with i > 0 meet it.
// The lattice frame is mirrored relative to (x, y), so j increasing across the
// cut is clockwise in the plane.
constexpr int cut_crossing(LatticeVertex u, LatticeVertex v) {
  if (u.i != v.i || u.i <= 0) return 0;
  if (u.j == 0 && v.j == 1) return -1;
  if (u.j == 1 && v.j == 0) return 1;
  return 0;
}

// Winding number about the centre of a closed lattice walk (last joins first).
inline int winding_about_centre(const std::vector<LatticeVertex>& cycle) {
  int w = 0;
  for (std::size_t k = 0; k < cycle.size(); ++k) w += cut_crossing(cycle[k], cycle[(k + 1) % cycle.size()]);
  return w;
}

// True when consecutive vertices (and last-first, for circuits) are joined by closed edges.
inline bool witness_valid(const Configuration& c, const std::vector<LatticeVertex>& path, bool circuit) {
  if (path.empty()) return false;
  ClosedGraphView g(c);
  const std::size_t edges = circuit ? path.size() : path.size() - 1;
  for (std::size_t k = 0; k < edges; ++k) {
    const auto u = path[k];
    const auto v = path[(k + 1) % path.size()];
    if (std::abs(u.i - v.i) + std::abs(u.j - v.j) != 1 || !g.closed_edge(u, v)) return false;
  }
  return true;
}

namespace detail {

// Splits a closed walk into simple loops and returns the first one that winds
// around the centre.
inline std::vector<LatticeVertex> winding_loop(const std::vector<LatticeVertex>& walk) {
  std::vector<LatticeVertex> stack;
  for (std::size_t k = 0; k <= walk.size(); ++k) {
    const LatticeVertex w = walk[k % walk.size()];
    auto it = std::find(stack.begin(), stack.end(), w);
    if (it == stack.end()) {
      stack.push_back(w);
      continue;
    }
    std::vector<LatticeVertex> loop(it, stack.end());
    if (loop.size() >= 3 && winding_about_centre(loop) != 0) return loop;
    stack.erase(it + 1, stack.end());
  }
  return {};
}

inline std::vector<LatticeVertex> dual_path(const Configuration& c, int n, bool& reached) {
  const int h = n / 2;
  const VertexBox outer = VertexBox::centred(n);
  auto in_annulus = [&](LatticeVertex v) { return outer.contains(v) && chebyshev(v) > h; };
  ClosedGraphView g(c);
  auto blocked = [&](LatticeVertex u, LatticeVertex v) {
    return in_annulus(u) && in_annulus(v) && g.closed_edge(u, v);
  };
  // Faces by lower-left corner; corners in [-n-1, n]^2.
  const VertexBox faces{-n - 1, n, -n - 1, n};
  auto outside = [&](LatticeVertex f) { return f.i < -n || f.i >= n || f.j < -n || f.j >= n; };
  std::vector<std::int64_t> parent(faces.size(), -2);
  std::deque<LatticeVertex> queue;
  for (LatticeVertex f : {LatticeVertex{-1, -1}, LatticeVertex{-1, 0}, LatticeVertex{0, -1}, LatticeVertex{0, 0}}) {
    parent[faces.index(f)] = -1;
    queue.push_back(f);
  }
  reached = false;
  std::int64_t hit = -1;
  while (!queue.empty() && hit < 0) {
    const LatticeVertex f = queue.front();
    queue.pop_front();
    // Neighbour face and the edge separating it from f.
    const std::array<std::pair<LatticeVertex, std::pair<LatticeVertex, LatticeVertex>>, 4> moves{{
        {{f.i - 1, f.j}, {{f.i, f.j}, {f.i, f.j + 1}}},
        {{f.i, f.j - 1}, {{f.i, f.j}, {f.i + 1, f.j}}},
        {{f.i, f.j + 1}, {{f.i, f.j + 1}, {f.i + 1, f.j + 1}}},
        {{f.i + 1, f.j}, {{f.i + 1, f.j}, {f.i + 1, f.j + 1}}},
    }};
    for (const auto& [nf, e] : moves) {
      if (!faces.contains(nf) || blocked(e.first, e.second)) continue;
      auto& p = parent[faces.index(nf)];
      if (p != -2) continue;
      p = std::int64_t(faces.index(f));
      if (outside(nf)) {
        hit = std::int64_t(faces.index(nf));
        break;
      }
      queue.push_back(nf);
    }
  }
  if (hit < 0) return {};
  reached = true;
  std::vector<LatticeVertex> out;
  for (std::int64_t k = hit; k >= 0; k = parent[std::size_t(k)]) out.push_back(faces.at(std::size_t(k)));
  return std::vector<LatticeVertex>(out.rbegin(), out.rend());
}

}  // namespace detail

// A''_n: a circuit of closed edges using vertices of Q_2n \ Q_n that winds
// around the centre. Breadth-first search assigns each vertex its signed cut
// crossing count; a vertex reached with two different counts closes a walk
// with nonzero winding, from which a simple circuit is extracted.
inline EventResult surrounding_circuit_exact(const Configuration& c, int n) {
  if (n < 2) throw std::invalid_argument("surrounding_circuit_exact: n must be >= 2");
  const VertexBox box = VertexBox::centred(n);
  detail::require_extent(c, required_extent(box), "surrounding_circuit_exact");
  const int h = n / 2;
  auto in_annulus = [&](LatticeVertex v) { return box.contains(v) && chebyshev(v) > h; };

  ClosedGraphView g(c);
  std::vector<std::int32_t> count(box.size(), 0);
  std::vector<std::int64_t> parent(box.size(), -2);
  std::deque<LatticeVertex> queue;

  auto tree_path = [&](LatticeVertex v) {
    std::vector<LatticeVertex> out;
    for (std::int64_t k = std::int64_t(box.index(v)); k >= 0; k = parent[std::size_t(k)]) out.push_back(box.at(std::size_t(k)));
    return out;  // v ... root
  };

  EventResult r;
  for (int i = -n; i <= n; ++i)
    for (int j = -n; j <= n; ++j) {
      const LatticeVertex root{i, j};
      if (!in_annulus(root) || parent[box.index(root)] != -2) continue;
      parent[box.index(root)] = -1;
      queue.assign(1, root);
      while (!queue.empty()) {
        const LatticeVertex u = queue.front();
        queue.pop_front();
        for (const auto& v : ClosedGraphView::neighbours(u)) {
          if (!in_annulus(v) || !g.closed_edge(u, v)) continue;
          const std::int32_t expect = count[box.index(u)] + cut_crossing(u, v);
          auto& pv = parent[box.index(v)];
          if (pv == -2) {
            pv = std::int64_t(box.index(u));
            count[box.index(v)] = expect;
            queue.push_back(v);
          } else if (count[box.index(v)] != expect) {
            // root..u, then v..root closes a walk with winding expect - count[v].
            auto up = tree_path(u);
            std::vector<LatticeVertex> walk(up.rbegin(), up.rend());
            auto down = tree_path(v);
            walk.insert(walk.end(), down.begin(), down.end() - 1);
            r.holds = true;
            r.is_circuit = true;
            r.path = detail::winding_loop(walk);
            return r;
          }
        }
      }
    }
  bool reached = false;
  r.dual_faces = detail::dual_path(c, n, reached);
  return r;
}

// Sufficient condition for A''_n: all four rectangles crossed lengthwise.
inline EventResult surrounding_circuit_4rect(const Configuration& c, int n) {
  if (n < 1) throw std::invalid_argument("surrounding_circuit_4rect: n must be >= 1");
  detail::require_extent(c, required_extent(VertexBox::centred(n)), "surrounding_circuit_4rect");
  EventResult r;
  r.holds = true;
  for (RegionKind k : {RegionKind::T1, RegionKind::T2, RegionKind::T3, RegionKind::T4}) {
    EventResult part = rect_crossing(c, n, k);
    if (!part.holds) {
      r.holds = false;
      r.parts.clear();
      return r;
    }
    r.parts.push_back(std::move(part.path));
  }
  return r;
}

// True iff no face path across non-circuit edges leads from the centre to
// outside Q_2n; by planar duality this equals surrounding_circuit_exact.
inline bool dual_crosscheck(const Configuration& c, int n) {
  if (n < 2) throw std::invalid_argument("dual_crosscheck: n must be >= 2");
  detail::require_extent(c, required_extent(VertexBox::centred(n)), "dual_crosscheck");
  bool reached = false;
  detail::dual_path(c, n, reached);
  return !reached;
}

inline EventResult detect(EventKind k, const Configuration& c, int n) {
  switch (k) {
    case EventKind::radial: return radial_closed_path(c, n);
    case EventKind::crossing: return rect_crossing(c, n, RegionKind::T);
    case EventKind::circuit: return surrounding_circuit_exact(c, n);
    case EventKind::circuit4: return surrounding_circuit_4rect(c, n);
    case EventKind::closure: break;
  }
  throw std::invalid_argument("detect: closure is a trajectory event, not a percolation event");
}

// Extent needed by each percolation detector at scale n.
inline int detector_extent(EventKind k, int n) {
  switch (k) {
    case EventKind::closure: return n + 1;
    case EventKind::radial: return 2 * (n / 2) + 1;
    case EventKind::crossing: return required_extent(lattice_box({RegionKind::T, n}));
    case EventKind::circuit:
    case EventKind::circuit4: return required_extent(VertexBox::centred(n));
  }
  return n + 1;
}

namespace detail {
inline void write_half(std::ostream& out, int doubled) {
  if (doubled % 2 == 0)
    out << doubled / 2;
  else
    out << (doubled < 0 ? "-" : "") << std::abs(doubled) / 2 << ".5";
}
}  // namespace detail

// Witness dump: header, then one "u v" tilted-vertex line per vertex.
inline void write_witness(std::ostream& out, EventKind k, int n, const EventResult& r) {
  out << "format manhattan-witness 1\n";
  out << "event " << event_name(k) << "\n";
  out << "n " << n << "\n";
  out << "holds " << (r.holds ? "true" : "false") << "\n";
  auto emit = [&](const char* kind, const std::vector<LatticeVertex>& vs) {
    out << kind << " " << vs.size() << "\n";
    for (const auto& v : vs) {
      const TiltedVertex t = to_tilted(v);
      detail::write_half(out, t.x2);
      out << " ";
      detail::write_half(out, t.y2);
      out << "\n";
    }
  };
  if (!r.path.empty()) emit(r.is_circuit ? "circuit" : "path", r.path);
  for (const auto& p : r.parts) emit("path", p);
  if (!r.dual_faces.empty()) {
    // Face centres are tilted-lattice points too: (i+1/2, j+1/2) in lattice units.
    out << "dual_path " << r.dual_faces.size() << "\n";
    for (const auto& f : r.dual_faces) {
      const int x2 = 2 * (f.i + f.j) + 3, y2 = 2 * (f.i - f.j) + 1;
      detail::write_half(out, x2);
      out << " ";
      detail::write_half(out, y2);
      out << "\n";
    }
  }
}

inline std::string witness_to_string(EventKind k, int n, const EventResult& r) {
  std::ostringstream ss;
  write_witness(ss, k, n, r);
  return ss.str();
}

struct WitnessPolyline {
  std::string kind;  // path, circuit or dual_path
  std::vector<HalfPoint> points;
};

struct WitnessFile {
  std::string event;
  int n = 0;
  bool holds = false;
  std::vector<WitnessPolyline> polylines;
};

inline WitnessFile read_witness(std::istream& in) {
  LineReader reader(in);
  std::vector<std::string_view> tok;
  auto expect = [&](std::string_view key, std::size_t arity) {
    if (!reader.next(tok) || tok[0] != key || tok.size() != arity + 1)
      throw ParseError(reader.line(), "expected '" + std::string(key) + "'");
  };
  auto half = [&](std::string_view v) {
    double x = 0;
    if (!parse_number(v, x) || x * 2 != std::floor(x * 2)) throw ParseError(reader.line(), "bad coordinate");
    return int(x * 2);
  };
  expect("format", 2);
  if (tok[1] != "manhattan-witness" || tok[2] != "1") throw ParseError(reader.line(), "not a witness file");
  WitnessFile f;
  expect("event", 1);
  f.event = std::string(tok[1]);
  expect("n", 1);
  if (!parse_number(tok[1], f.n)) throw ParseError(reader.line(), "bad n");
  expect("holds", 1);
  f.holds = tok[1] == "true";
  while (reader.next(tok)) {
    std::size_t count = 0;
    if (tok.size() != 2 || !(tok[0] == "path" || tok[0] == "circuit" || tok[0] == "dual_path") ||
        !parse_number(tok[1], count))
      throw ParseError(reader.line(), "expected 'path|circuit|dual_path <count>'");
    WitnessPolyline p{std::string(tok[0]), {}};
    for (std::size_t k = 0; k < count; ++k) {
      if (!reader.next(tok) || tok.size() != 2) throw ParseError(reader.line(), "truncated vertex list");
      p.points.push_back({half(tok[0]), half(tok[1])});
    }
    f.polylines.push_back(std::move(p));
  }
  return f;
}

}  // namespace manhattan
