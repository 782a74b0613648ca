#pragma once

// Pattern file format (version 1):
//
//   format manhattan-pattern 1
//   name <identifier>
//   red <a> <b>
//   closed <a> <b>     (any number)
//   open <a> <b>       (any number; the red site is open implicitly)
//
// Coordinates are relative to the pattern anchor.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "manhattan/configuration.hpp"
#include "manhattan/events.hpp"
#include "manhattan/geometry.hpp"
#include "manhattan/philox.hpp"
#include "manhattan/text_io.hpp"
#include "manhattan/tracer.hpp"

namespace manhattan {

inline constexpr int kPatternFormatVersion = 1;

class Pattern {
 public:
  Pattern() = default;
  // red is added to open_sites when missing.
  Pattern(std::string name, Site red, std::vector<Site> closed_sites, std::vector<Site> open_sites)
      : name_(std::move(name)), red_(red), closed_(std::move(closed_sites)), open_(std::move(open_sites)) {
    if (std::find(open_.begin(), open_.end(), red_) == open_.end()) open_.push_back(red_);
    std::sort(closed_.begin(), closed_.end());
    std::sort(open_.begin(), open_.end());
    if (std::adjacent_find(closed_.begin(), closed_.end()) != closed_.end())
      throw std::invalid_argument("pattern: duplicate closed site");
    if (std::adjacent_find(open_.begin(), open_.end()) != open_.end())
      throw std::invalid_argument("pattern: duplicate open site");
    for (Site s : closed_)
      if (std::binary_search(open_.begin(), open_.end(), s))
        throw std::invalid_argument("pattern: site (" + std::to_string(s.a) + "," + std::to_string(s.b) +
                                    ") both closed and open");
    radius_ = 0;
    for (const auto* v : {&closed_, &open_})
      for (Site s : *v) radius_ = std::max({radius_, std::abs(s.a), std::abs(s.b)});
  }

  const std::string& name() const { return name_; }
  Site red() const { return red_; }
  const std::vector<Site>& closed_sites() const { return closed_; }
  const std::vector<Site>& open_sites() const { return open_; }
  int radius() const { return radius_; }
  std::size_t size() const { return closed_.size() + open_.size(); }

  bool requires_closed(Site s) const { return std::binary_search(closed_.begin(), closed_.end(), s); }
  bool requires_open(Site s) const { return std::binary_search(open_.begin(), open_.end(), s); }
  bool constrains(Site s) const { return requires_closed(s) || requires_open(s); }

  // Bounding box of all constrained sites.
  int min_a() const { return bound([](Site s) { return s.a; }, true); }
  int max_a() const { return bound([](Site s) { return s.a; }, false); }
  int min_b() const { return bound([](Site s) { return s.b; }, true); }
  int max_b() const { return bound([](Site s) { return s.b; }, false); }

  friend bool operator==(const Pattern& x, const Pattern& y) {
    return x.red_ == y.red_ && x.closed_ == y.closed_ && x.open_ == y.open_;
  }

 private:
  template <typename F>
  int bound(F f, bool lo) const {
    int v = f(red_);
    for (const auto* vec : {&closed_, &open_})
      for (Site s : *vec) v = lo ? std::min(v, f(s)) : std::max(v, f(s));
    return v;
  }

  std::string name_ = "unnamed";
  Site red_{};
  std::vector<Site> closed_, open_;
  int radius_ = 0;
};

inline void write_pattern(std::ostream& out, const Pattern& g) {
  out << "format manhattan-pattern " << kPatternFormatVersion << "\n";
  out << "name " << g.name() << "\n";
  out << "red " << g.red().a << " " << g.red().b << "\n";
  for (Site s : g.closed_sites()) out << "closed " << s.a << " " << s.b << "\n";
  for (Site s : g.open_sites())
    if (s != g.red()) out << "open " << s.a << " " << s.b << "\n";
}

inline std::string pattern_to_string(const Pattern& g) {
  std::ostringstream ss;
  write_pattern(ss, g);
  return ss.str();
}

inline Pattern read_pattern(std::istream& in) {
  LineReader reader(in);
  std::vector<std::string_view> tok;
  if (!reader.next(tok) || tok.size() != 3 || tok[0] != "format" || tok[1] != "manhattan-pattern")
    throw ParseError(reader.line(), "not a pattern file");
  int version = 0;
  if (!parse_number(tok[2], version) || version != kPatternFormatVersion)
    throw ParseError(reader.line(), "unsupported format version '" + std::string(tok[2]) + "'");
  std::string name = "unnamed";
  std::optional<Site> red;
  std::vector<Site> closed, open;
  auto site = [&]() {
    Site s;
    if (tok.size() != 3 || !parse_number(tok[1], s.a) || !parse_number(tok[2], s.b))
      throw ParseError(reader.line(), "expected '" + std::string(tok[0]) + " <a> <b>'");
    return s;
  };
  while (reader.next(tok)) {
    if (tok[0] == "name") {
      if (tok.size() != 2) throw ParseError(reader.line(), "expected 'name <identifier>'");
      name = std::string(tok[1]);
    } else if (tok[0] == "red") {
      if (red) throw ParseError(reader.line(), "second 'red' line");
      red = site();
    } else if (tok[0] == "closed") {
      closed.push_back(site());
    } else if (tok[0] == "open") {
      open.push_back(site());
    } else {
      throw ParseError(reader.line(), "unknown key '" + std::string(tok[0]) + "'");
    }
  }
  if (!red) throw ParseError(reader.line(), "missing 'red' line");
  try {
    return Pattern(name, *red, closed, open);
  } catch (const std::invalid_argument& e) {
    throw ParseError(reader.line(), e.what());
  }
}

inline Pattern load_pattern(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_pattern(in);
}

inline void save_pattern(const Pattern& g, const std::filesystem::path& path) {
  write_file_atomic(path, pattern_to_string(g));
}

// ---------------------------------------------------------------------------
// Matching and enhancement
// ---------------------------------------------------------------------------

using MatchSet = std::vector<Offset>;

inline bool matches_at(const Configuration& c, const Pattern& g, Offset t) {
  if (c.closed(g.red() + t)) return false;
  for (Site s : g.closed_sites())
    if (!c.closed(s + t)) return false;
  for (Site s : g.open_sites())
    if (c.closed(s + t)) return false;
  return true;
}

// Offsets with even coordinate sum whose copy lies inside the extent and
// matches; excluded_core = k drops copies whose red edge is inside Q_k.
inline MatchSet match_pattern(const Configuration& c, const Pattern& g, std::optional<int> excluded_core = {}) {
  const int m = c.extent();
  if (m < g.radius())
    throw std::invalid_argument("match_pattern: extent " + std::to_string(m) + " below pattern radius " +
                                std::to_string(g.radius()));
  MatchSet out;
  for (int tb = -m - g.min_b(); tb <= m - g.max_b(); ++tb)
    for (int ta = -m - g.min_a(); ta <= m - g.max_a(); ++ta) {
      if (!is_even(ta + tb)) continue;
      const Offset t{ta, tb};
      if (!matches_at(c, g, t)) continue;
      if (excluded_core && edge_inside_q(g.red() + t, *excluded_core)) continue;
      out.push_back(t);
    }
  return out;
}

inline Configuration enhance(const Configuration& c, const Pattern& g, std::optional<int> excluded_core = {}) {
  Configuration out = c;
  for (Offset t : match_pattern(c, g, excluded_core)) out.set_closed(g.red() + t, true);
  out.provenance = Provenance::enhanced;
  return out;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct TranslationReport {
  bool ok = true;
  std::optional<Offset> counterexample;
  std::size_t offsets_checked = 0;  // jointly satisfiable overlapping offsets
};

// Two copies (at 0 and at t) that can coexist must never have the red site of
// one on an open site of the other.
inline TranslationReport check_translation_lemma(const Pattern& g) {
  TranslationReport r;
  const int da = g.max_a() - g.min_a(), db = g.max_b() - g.min_b();
  for (int tb = -db; tb <= db; ++tb)
    for (int ta = -da; ta <= da; ++ta) {
      if ((ta == 0 && tb == 0) || !is_even(ta + tb)) continue;
      const Offset t{ta, tb};
      bool joint = true;
      for (Site s : g.closed_sites())
        if (g.requires_open(s - t) || g.requires_open(s + t)) {
          joint = false;
          break;
        }
      if (!joint) continue;
      ++r.offsets_checked;
      if (g.requires_open(g.red() + t) || g.requires_open(g.red() - t)) {
        r.ok = false;
        r.counterexample = t;
        return r;
      }
    }
  return r;
}

struct DetourTrace {
  Direction entry = Direction::E;
  bool ok = false;
  bool returned = false;
  RayState exit_state{};  // state on return to the red site, or on escape
  int radius = 0;         // largest l-infinity distance from the red site
  std::vector<RayState> states;
  std::vector<Site> unconstrained;  // visited sites the pattern leaves free
  std::string message;
};

struct DetourReport {
  bool ok = false;
  int D = 0;
  std::vector<DetourTrace> entries;      // the two Manhattan arrival directions
  std::vector<DetourTrace> diagnostics;  // the other two
};

inline constexpr int kMaxDetourRadius = 5;

// Arrival directions at s consistent with the Manhattan street orientation.
inline std::array<Direction, 2> arrival_directions(Site s) {
  return {is_even(s.b) ? Direction::E : Direction::W, is_even(s.a) ? Direction::N : Direction::S};
}

inline DetourTrace trace_detour(const Pattern& g, Direction entry) {
  const int w = std::max(1, 4 * g.radius());
  Configuration c(w);
  for (Site s : g.closed_sites()) c.set_closed(s, true);
  const Site red = g.red();
  const Direction want = reflect(entry, mirror_orientation(red));
  DetourTrace d;
  d.entry = entry;
  RayState cur{red, entry};
  d.states.push_back(cur);
  const std::uint64_t budget = 4 * site_count(w);
  for (std::uint64_t k = 0; k < budget; ++k) {
    const StepResult r = step(cur, c);
    if (r.escaped) {
      d.exit_state = r.state;
      d.message = "escaped the window";
      return d;
    }
    cur = r.state;
    if (cur.site == red) {
      d.returned = true;
      d.exit_state = cur;
      if (cur.dir != want) {
        d.message = std::string("returned heading ") + direction_char(cur.dir) + ", expected " + direction_char(want);
        return d;
      }
      if (!d.unconstrained.empty()) {
        d.message = "detour visits sites the pattern does not constrain";
        return d;
      }
      d.ok = true;
      return d;
    }
    d.states.push_back(cur);
    d.radius = std::max({d.radius, std::abs(cur.site.a - red.a), std::abs(cur.site.b - red.b)});
    if (!g.constrains(cur.site) &&
        std::find(d.unconstrained.begin(), d.unconstrained.end(), cur.site) == d.unconstrained.end())
      d.unconstrained.push_back(cur.site);
  }
  d.message = "did not return";
  return d;
}

inline DetourReport check_detour(const Pattern& g) {
  DetourReport r;
  const auto entries = arrival_directions(g.red());
  r.ok = true;
  for (Direction d : kDirections) {
    DetourTrace t = trace_detour(g, d);
    if (d == entries[0] || d == entries[1]) {
      r.ok = r.ok && t.ok;
      r.D = std::max(r.D, t.radius);
      r.entries.push_back(std::move(t));
    } else {
      r.diagnostics.push_back(std::move(t));
    }
  }
  if (r.D > kMaxDetourRadius) r.ok = false;
  return r;
}

struct EssentialReport {
  bool found = false;
  std::optional<Configuration> witness;  // red open; enhancement creates the crossing
  std::uint64_t trials = 0;
  std::string method;  // "arms" or "random"
  int window = 0;
};

namespace detail {

inline LatticeVertex lower_endpoint(Site s) {
  auto [u, v] = lattice_edge(s);
  return to_tilted(u).y2 <= to_tilted(v).y2 ? u : v;
}

// Largest box of lattice vertices centred at v whose edges fit in extent w.
inline VertexBox window_box(LatticeVertex v, int w) {
  for (int h = w; h >= 1; --h) {
    VertexBox b{v.i - h, v.i + h, v.j - h, v.j + h};
    if (required_extent(b) <= w) return b;
  }
  return {v.i, v.i, v.j, v.j};
}

inline bool crosses_box(const Configuration& c, const VertexBox& box) {
  ClosedGraphView g(c);
  auto any = [](LatticeVertex, LatticeVertex) { return true; };
  if (bfs_path(g, box, [&](LatticeVertex v) { return v.i == box.i_lo; },
               [&](LatticeVertex v) { return v.i == box.i_hi; }, any))
    return true;
  return bfs_path(g, box, [&](LatticeVertex v) { return v.j == box.j_lo; },
                  [&](LatticeVertex v) { return v.j == box.j_hi; }, any)
      .has_value();
}

}  // namespace detail

inline int min_essential_window(const Pattern& g) { return 2 * g.radius() + 4; }
inline constexpr std::uint64_t kDefaultEssentialBudget = 2000;

// Looks for a window configuration holding a copy of g at the centre in which
// no closed crossing of the window exists with the red edge open, and one does
// after enhancement. First tries straight closed arms continuing the red edge
// from both endpoints, then independent fills at density 1/2.
inline EssentialReport check_essential(const Pattern& g, int window, std::uint64_t budget = kDefaultEssentialBudget,
                                       std::uint64_t seed = 0) {
  if (window < min_essential_window(g))
    throw std::invalid_argument("check_essential: window must be >= 2R+4 = " + std::to_string(min_essential_window(g)));
  EssentialReport r;
  r.window = window;
  const VertexBox box = detail::window_box(detail::lower_endpoint(g.red()), window);

  Configuration base(window);
  base.provenance = Provenance::explicit_;
  for (Site s : g.closed_sites()) base.set_closed(s, true);

  auto accept = [&](const Configuration& c, const char* method) {
    if (detail::crosses_box(c, box)) return false;
    if (!detail::crosses_box(enhance(c, g), box)) return false;
    r.found = true;
    r.witness = c;
    r.method = method;
    return true;
  };

  if (budget == 0) return r;
  ++r.trials;
  {
    Configuration c = base;
    auto [u, v] = lattice_edge(g.red());
    const LatticeVertex d{v.i - u.i, v.j - u.j};
    bool planted = true;
    auto arm = [&](LatticeVertex from, int sign) {
      for (LatticeVertex x = from;; x = {x.i + sign * d.i, x.j + sign * d.j}) {
        const LatticeVertex y{x.i + sign * d.i, x.j + sign * d.j};
        if (!box.contains(y)) return;
        const Site s = site_between(x, y);
        if (g.requires_open(s)) {
          planted = false;
          return;
        }
        c.set_closed(s, true);
      }
    };
    arm(v, 1);
    arm(u, -1);
    if (planted && accept(c, "arms")) return r;
  }
  while (r.trials < budget) {
    PhiloxStream rng(seed, r.trials);
    ++r.trials;
    Configuration c = base;
    for (int b = -window; b <= window; ++b)
      for (int a = -window; a <= window; ++a)
        if (!g.constrains({a, b}) && rng.next_double() < 0.5) c.set_closed({a, b}, true);
    if (accept(c, "random")) return r;
  }
  return r;
}

struct PatternReport {
  TranslationReport translation;
  EssentialReport essential;
  DetourReport detour;
  bool ok() const { return translation.ok && essential.found && detour.ok; }
};

inline PatternReport check_pattern(const Pattern& g, std::uint64_t essential_budget = kDefaultEssentialBudget,
                                   std::uint64_t seed = 0) {
  PatternReport r;
  r.translation = check_translation_lemma(g);
  r.detour = check_detour(g);
  r.essential = check_essential(g, min_essential_window(g), essential_budget, seed);
  return r;
}

// ---------------------------------------------------------------------------
// Search
// ---------------------------------------------------------------------------

inline constexpr int kMaxSearchRadius = 4;
inline constexpr int kMaxSearchClosed = 12;

struct SearchResult {
  std::vector<Pattern> patterns;  // all checks passed, smallest first
  bool budget_exhausted = false;
  std::uint64_t nodes = 0;       // search nodes expanded
  std::uint64_t candidates = 0;  // patterns whose detours close, before the other checks
};

// Enumerates patterns with red at the origin by following the ray through both
// arrival directions: each newly visited site branches open/closed, so every
// candidate constrains exactly the sites its detours visit. Candidates then go
// through the translation and essentiality checks. budget caps search nodes.
inline SearchResult search_patterns(int r_max, std::uint64_t budget, std::uint64_t essential_budget = 64) {
  if (r_max < 1 || r_max > kMaxSearchRadius)
    throw std::invalid_argument("search_patterns: radius must be in [1, " + std::to_string(kMaxSearchRadius) + "]");
  SearchResult out;
  if (budget == 0) {
    out.budget_exhausted = true;
    return out;
  }
  const Site red{0, 0};
  const auto entries = arrival_directions(red);
  const int side = 2 * r_max + 1;
  enum : std::uint8_t { unknown, open, closed };
  std::vector<std::uint8_t> state(std::size_t(side) * side, unknown);
  auto cell = [&](Site s) -> std::uint8_t& { return state[std::size_t(s.b + r_max) * side + (s.a + r_max)]; };
  auto inside = [&](Site s) { return std::abs(s.a) <= r_max && std::abs(s.b) <= r_max; };
  cell(red) = open;

  std::vector<Pattern> found;
  auto emit = [&]() {
    std::vector<Site> cl, op;
    for (int b = -r_max; b <= r_max; ++b)
      for (int a = -r_max; a <= r_max; ++a) {
        if (cell({a, b}) == closed) cl.push_back({a, b});
        if (cell({a, b}) == open && Site{a, b} != red) op.push_back({a, b});
      }
    ++out.candidates;
    Pattern g("candidate", red, cl, op);
    if (!check_translation_lemma(g).ok) return;
    if (!check_essential(g, min_essential_window(g), essential_budget).found) return;
    found.push_back(std::move(g));
  };

  // Follows the ray from cur; phase 0 runs the first detour, phase 1 the second.
  std::function<void(RayState, int, int)> walk = [&](RayState cur, int phase, int n_closed) {
    for (;;) {
      if (out.nodes >= budget) {
        out.budget_exhausted = true;
        return;
      }
      const Site next = cur.site + unit(cur.dir);
      if (!inside(next)) return;
      if (next == red) {
        if (cur.dir != reflect(entries[phase], mirror_orientation(red))) return;
        if (phase == 1) {
          emit();
          return;
        }
        cur = {red, cur.dir};
        phase = 1;
        continue;
      }
      auto& s = cell(next);
      if (s == unknown) {
        ++out.nodes;
        s = open;
        walk({next, cur.dir}, phase, n_closed);
        if (n_closed < kMaxSearchClosed) {
          s = closed;
          walk({next, reflect(cur.dir, mirror_orientation(next))}, phase, n_closed + 1);
        }
        s = unknown;
        return;
      }
      cur = {next, s == closed ? reflect(cur.dir, mirror_orientation(next)) : cur.dir};
    }
  };
  walk({red, entries[0]}, 0, 0);

  std::sort(found.begin(), found.end(), [](const Pattern& x, const Pattern& y) {
    if (x.closed_sites().size() != y.closed_sites().size()) return x.closed_sites().size() < y.closed_sites().size();
    if (x.size() != y.size()) return x.size() < y.size();
    if (x.radius() != y.radius()) return x.radius() < y.radius();
    if (x.closed_sites() != y.closed_sites()) return x.closed_sites() < y.closed_sites();
    return x.open_sites() < y.open_sites();
  });
  for (std::size_t k = 0; k < found.size(); ++k)
    out.patterns.push_back(Pattern("search-r" + std::to_string(r_max) + "-" + std::to_string(k), found[k].red(),
                                   found[k].closed_sites(), found[k].open_sites()));
  return out;
}

}  // namespace manhattan
