#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
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

// The site just departed (after any interaction there) and the outgoing
// direction.
struct RayState {
  Site site;
  Direction dir = Direction::E;

  friend constexpr bool operator==(RayState, RayState) = default;
};

inline constexpr RayState kOrigin{{0, 0}, Direction::E};

struct StepResult {
  RayState state;  // on escape: the would-be next site, direction unchanged
  bool escaped = false;
};

inline StepResult step(const RayState& s, const Configuration& c) {
  const Site next = s.site + unit(s.dir);
  if (!c.contains(next)) return {{next, s.dir}, true};
  const Direction d = c.closed(next) ? reflect(s.dir, mirror_orientation(next)) : s.dir;
  return {{next, d}, false};
}

enum class TraceStatus : std::uint8_t { closed, escaped, budget_exceeded };

inline const char* status_name(TraceStatus s) {
  switch (s) {
    case TraceStatus::closed: return "closed";
    case TraceStatus::escaped: return "escaped";
    case TraceStatus::budget_exceeded: return "budget_exceeded";
  }
  return "?";
}

inline std::uint64_t default_max_steps(int extent) { return 16 * site_count(extent); }

struct TraceOptions {
  std::optional<std::uint64_t> max_steps;  // default_max_steps(extent) when absent
  bool record_states = true;
  // Assert that no state other than the start repeats (costs 4 bits per site).
  bool check_injectivity = false;
};

class InjectivityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Trajectory {
  RayState start;
  std::vector<RayState> states;  // states[0] == start when recorded
  TraceStatus status = TraceStatus::budget_exceeded;
  std::uint64_t steps = 0;       // step() calls that stayed inside the extent
  RayState exit_state{};         // meaningful when escaped

  // Running metrics over visited sites, start included.
  int min_a = 0, max_a = 0, min_b = 0, max_b = 0;
  int q_containment = 0;  // min m with every visited site in Q_m
  int linf_from_start = 0;

  bool closed() const { return status == TraceStatus::closed; }
  int linf_diameter() const { return std::max(max_a - min_a, max_b - min_b); }
  bool contained_in_q(int m) const { return q_containment <= m; }

  std::vector<Site> visited_sites() const {
    std::vector<Site> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(s.site);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

inline Trajectory trace(const Configuration& c, RayState start = kOrigin, const TraceOptions& opt = {}) {
  if (!c.contains(start.site)) throw std::invalid_argument("trace: start site outside extent");
  const std::uint64_t budget = opt.max_steps.value_or(default_max_steps(c.extent()));
  if (budget < 1) throw std::invalid_argument("trace: max_steps must be >= 1");

  Trajectory t;
  t.start = start;
  t.min_a = t.max_a = start.site.a;
  t.min_b = t.max_b = start.site.b;
  t.q_containment = q_radius(start.site);
  if (opt.record_states) t.states.push_back(start);

  BitGrid seen[4];
  auto mark = [&](const RayState& s) {
    if (!opt.check_injectivity) return;
    auto& g = seen[static_cast<int>(s.dir)];
    if (g.get(s.site))
      throw InjectivityError("state (" + std::to_string(s.site.a) + "," + std::to_string(s.site.b) + "," +
                             direction_char(s.dir) + ") repeated before closure");
    g.set(s.site, true);
  };
  if (opt.check_injectivity)
    for (auto& g : seen) g = BitGrid(c.extent());
  mark(start);

  RayState cur = start;
  while (t.steps < budget) {
    const StepResult r = step(cur, c);
    if (r.escaped) {
      t.status = TraceStatus::escaped;
      t.exit_state = r.state;
      return t;
    }
    ++t.steps;
    cur = r.state;
    if (cur == start) {
      t.status = TraceStatus::closed;
      return t;
    }
    mark(cur);
    const Site s = cur.site;
    t.min_a = std::min(t.min_a, s.a);
    t.max_a = std::max(t.max_a, s.a);
    t.min_b = std::min(t.min_b, s.b);
    t.max_b = std::max(t.max_b, s.b);
    t.q_containment = std::max(t.q_containment, q_radius(s));
    t.linf_from_start = std::max({t.linf_from_start, std::abs(s.a - start.site.a), std::abs(s.b - start.site.b)});
    if (opt.record_states) t.states.push_back(cur);
  }
  t.status = TraceStatus::budget_exceeded;
  return t;
}

struct TrajectoryMetrics {
  int linf_diameter = 0;
  int q_containment = 0;
  bool closed = false;
};

// Recomputes the metrics from the recorded states.
inline TrajectoryMetrics trajectory_metrics(const Trajectory& t) {
  if (t.states.empty()) throw std::invalid_argument("trajectory_metrics: trajectory has no recorded states");
  TrajectoryMetrics m;
  int lo_a = std::numeric_limits<int>::max(), hi_a = std::numeric_limits<int>::min();
  int lo_b = lo_a, hi_b = hi_a;
  for (const auto& s : t.states) {
    lo_a = std::min(lo_a, s.site.a);
    hi_a = std::max(hi_a, s.site.a);
    lo_b = std::min(lo_b, s.site.b);
    hi_b = std::max(hi_b, s.site.b);
    m.q_containment = std::max(m.q_containment, q_radius(s.site));
  }
  m.linf_diameter = std::max(hi_a - lo_a, hi_b - lo_b);
  m.closed = t.closed();
  return m;
}

// Trajectory dump: header lines, then one "a b dir" line per state.
inline void write_trajectory(std::ostream& out, const Trajectory& t) {
  out << "format manhattan-trajectory 1\n";
  out << "status " << status_name(t.status) << "\n";
  out << "start " << t.start.site.a << " " << t.start.site.b << " " << direction_char(t.start.dir) << "\n";
  out << "steps " << t.steps << "\n";
  out << "linf_diameter " << t.linf_diameter() << "\n";
  out << "q_containment " << t.q_containment << "\n";
  out << "states " << t.states.size() << "\n";
  for (const auto& s : t.states) out << s.site.a << " " << s.site.b << " " << direction_char(s.dir) << "\n";
}

inline std::string trajectory_to_string(const Trajectory& t) {
  std::ostringstream ss;
  write_trajectory(ss, t);
  return ss.str();
}

struct TrajectoryFile {
  TraceStatus status = TraceStatus::budget_exceeded;
  RayState start;
  std::uint64_t steps = 0;
  std::vector<RayState> states;
};

inline TrajectoryFile read_trajectory(std::istream& in) {
  LineReader reader(in);
  std::vector<std::string_view> tok;
  auto expect = [&](std::string_view key, std::size_t arity) {
    if (!reader.next(tok) || tok[0] != key || tok.size() != arity + 1)
      throw ParseError(reader.line(), "expected '" + std::string(key) + "'");
  };
  auto state = [&](std::size_t k) {
    RayState s;
    if (!parse_number(tok[k], s.site.a) || !parse_number(tok[k + 1], s.site.b))
      throw ParseError(reader.line(), "bad site");
    try {
      s.dir = parse_direction(tok[k + 2]);
    } catch (const std::exception& e) {
      throw ParseError(reader.line(), e.what());
    }
    return s;
  };
  expect("format", 2);
  if (tok[1] != "manhattan-trajectory" || tok[2] != "1") throw ParseError(reader.line(), "not a trajectory file");
  TrajectoryFile f;
  expect("status", 1);
  if (tok[1] == "closed")
    f.status = TraceStatus::closed;
  else if (tok[1] == "escaped")
    f.status = TraceStatus::escaped;
  else if (tok[1] == "budget_exceeded")
    f.status = TraceStatus::budget_exceeded;
  else
    throw ParseError(reader.line(), "bad status '" + std::string(tok[1]) + "'");
  expect("start", 3);
  f.start = state(1);
  expect("steps", 1);
  if (!parse_number(tok[1], f.steps)) throw ParseError(reader.line(), "bad steps");
  expect("linf_diameter", 1);
  expect("q_containment", 1);
  expect("states", 1);
  std::size_t count = 0;
  if (!parse_number(tok[1], count)) throw ParseError(reader.line(), "bad state count");
  for (std::size_t k = 0; k < count; ++k) {
    if (!reader.next(tok) || tok.size() != 3) throw ParseError(reader.line(), "truncated state list");
    f.states.push_back(state(0));
  }
  return f;
}

}  // namespace manhattan
