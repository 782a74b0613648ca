#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "manhattan/configuration.hpp"
#include "manhattan/enhancement.hpp"
#include "manhattan/events.hpp"
#include "manhattan/text_io.hpp"
#include "manhattan/tracer.hpp"

namespace manhattan {

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
  double lo = 0, hi = 1;
};

inline Interval wilson(std::uint64_t hits, std::uint64_t trials, double z = kZ95) {
  if (trials == 0) throw std::invalid_argument("wilson: no trials");
  if (hits > trials) throw std::invalid_argument("wilson: hits exceed trials");
  const double n = double(trials), k = double(hits), z2 = z * z;
  const double centre = (k + z2 / 2) / (n + z2);
  const double half = z / (n + z2) * std::sqrt(k * (n - k) / n + z2 / 4);
  Interval r{std::max(0.0, centre - half), std::min(1.0, centre + half)};
  // Guard the endpoints against rounding so the interval always holds k/N.
  r.lo = std::min(r.lo, k / n);
  r.hi = std::max(r.hi, k / n);
  if (hits == 0) r.lo = 0;
  if (hits == trials) r.hi = 1;
  return r;
}

// ---------------------------------------------------------------------------
// Parallel sample loop
// ---------------------------------------------------------------------------

inline unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// Runs fn(k) for k in [0, count) on up to `workers` threads. The first
// exception thrown is rethrown after all threads join.
template <typename F>
void parallel_for(std::uint64_t count, unsigned workers, F&& fn) {
  workers = std::max(1u, workers);
  if (workers == 1 || count <= 1) {
    for (std::uint64_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::uint64_t k = next.fetch_add(1);
      if (k >= count) return;
      try {
        fn(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned n = unsigned(std::min<std::uint64_t>(workers, count));
  pool.reserve(n);
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Event estimation
// ---------------------------------------------------------------------------

struct EventSpec {
  EventKind kind = EventKind::crossing;
  bool enhanced = false;

  std::string name() const { return std::string(enhanced ? "enhanced:" : "") + event_name(kind); }
};

struct RunOptions {
  unsigned workers = 1;
  std::uint64_t max_sites = kDefaultMaxSites;
  bool timing = false;  // wall time is nondeterministic, so it is opt-in
};

// Extent that makes the event on [-M, M]^2 agree with the event on the plane;
// enhanced events add room for every copy that can close a relevant site.
inline int event_extent(const EventSpec& e, int n, const Pattern* g) {
  int m = detector_extent(e.kind, n);
  if (e.enhanced) {
    if (!g) throw std::invalid_argument("enhanced event needs a pattern");
    m += 2 * g->radius() + 2;
  }
  return m;
}

// E_n: the ray from the origin closes with every visited site in Q_n.
inline bool closure_event(const Configuration& c, int n) {
  TraceOptions opt;
  opt.record_states = false;
  const Trajectory t = trace(c, kOrigin, opt);
  return t.closed() && t.q_containment <= n;
}

inline bool evaluate_event(const EventSpec& e, const Configuration& omega, int n, const Pattern* g) {
  if (!e.enhanced) return e.kind == EventKind::closure ? closure_event(omega, n) : detect(e.kind, omega, n).holds;
  const Configuration tilde = enhance(omega, *g);
  return e.kind == EventKind::closure ? closure_event(tilde, n) : detect(e.kind, tilde, n).holds;
}

struct EstimationReport {
  std::string event;
  double p = 0;
  int n = 0;
  std::uint64_t trials = 0;
  std::uint64_t hits = 0;
  double estimate = 0;
  Interval ci;
  std::uint64_t seed = 0;
  std::string generator = kGeneratorId;
  int extent = 0;
  std::optional<double> walltime_ms;
};

inline void check_trials(std::uint64_t trials) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
}

inline EstimationReport estimate_event(const EventSpec& e, double p, int n, std::uint64_t trials, std::uint64_t seed,
                                       const Pattern* g = nullptr, const RunOptions& opt = {}) {
  check_probability(p);
  check_trials(trials);
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if ((e.kind == EventKind::circuit || e.kind == EventKind::circuit4) && n < 2)
    throw std::invalid_argument("circuit events need n >= 2");
  const int m = event_extent(e, n, g);
  check_extent(m, opt.max_sites);
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::uint8_t> hit(trials, 0);
  parallel_for(trials, opt.workers, [&](std::uint64_t k) {
    hit[k] = evaluate_event(e, sample(p, m, seed, k, opt.max_sites), n, g);
  });
  EstimationReport r;
  r.event = e.name();
  r.p = p;
  r.n = n;
  r.trials = trials;
  for (auto h : hit) r.hits += h;
  r.estimate = double(r.hits) / double(trials);
  r.ci = wilson(r.hits, trials);
  r.seed = seed;
  r.extent = m;
  if (opt.timing)
    r.walltime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

// ---------------------------------------------------------------------------
// Paired comparison of plain and enhanced crossings
// ---------------------------------------------------------------------------

struct ComparisonReport {
  double p = 0;
  int n = 0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::uint64_t both = 0, plain_only = 0, enhanced_only = 0, neither = 0;
  EstimationReport plain, enhanced;
  double gap = 0;  // enhanced minus plain, per sample
  Interval gap_ci;

  // Samples with the crossing in omega but not in the enhanced field.
  std::uint64_t violations() const { return plain_only; }
};

inline ComparisonReport compare_enhanced(double p, int n, std::uint64_t trials, std::uint64_t seed, const Pattern& g,
                                         const RunOptions& opt = {}) {
  check_probability(p);
  check_trials(trials);
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  const EventSpec plain_spec{EventKind::crossing, false}, enh_spec{EventKind::crossing, true};
  const int m = event_extent(enh_spec, n, &g);
  check_extent(m, opt.max_sites);
  std::vector<std::uint8_t> out(trials, 0);
  parallel_for(trials, opt.workers, [&](std::uint64_t k) {
    const Configuration omega = sample(p, m, seed, k, opt.max_sites);
    const bool a = rect_crossing(omega, n, RegionKind::T).holds;
    const bool b = rect_crossing(enhance(omega, g), n, RegionKind::T).holds;
    out[k] = std::uint8_t(a) | std::uint8_t(b) << 1;
  });
  ComparisonReport r;
  r.p = p;
  r.n = n;
  r.trials = trials;
  r.seed = seed;
  for (auto v : out) {
    if (v == 3) ++r.both;
    if (v == 1) ++r.plain_only;
    if (v == 2) ++r.enhanced_only;
    if (v == 0) ++r.neither;
  }
  auto report = [&](const EventSpec& e, std::uint64_t hits) {
    EstimationReport x;
    x.event = e.name();
    x.p = p;
    x.n = n;
    x.trials = trials;
    x.hits = hits;
    x.estimate = double(hits) / double(trials);
    x.ci = wilson(hits, trials);
    x.seed = seed;
    x.extent = m;
    return x;
  };
  r.plain = report(plain_spec, r.both + r.plain_only);
  r.enhanced = report(enh_spec, r.both + r.enhanced_only);
  const double N = double(trials);
  r.gap = (double(r.enhanced_only) - double(r.plain_only)) / N;
  const double var = std::max(0.0, (double(r.enhanced_only + r.plain_only) / N - r.gap * r.gap) / N);
  const double half = kZ95 * std::sqrt(var);
  r.gap_ci = {r.gap - half, r.gap + half};
  return r;
}

// ---------------------------------------------------------------------------
// Replay of the trapping argument, sample by sample
// ---------------------------------------------------------------------------

inline constexpr int kCoreRadius = 100;

struct VerificationRecord {
  std::uint64_t sample = 0;
  bool circuit = false;  // enhanced field has a circuit around Q_n inside Q_2n
  // Evaluated only when circuit holds.
  bool closed = false;            // L(omega) closed
  bool contained = false;         // L(omega) inside Q_{2n+2D}
  bool hybrid_contained = false;  // L(omega_0) closed and inside Q_2n
  bool circuit4 = false;          // four-rectangle detector on the enhanced field
  int q_containment = 0;
  int hybrid_q_containment = 0;
  std::string diagnostics;

  bool pass() const { return !circuit || (closed && contained); }
  bool replay_ok() const { return pass() && (!circuit || hybrid_contained) && (!circuit4 || circuit); }
};

struct VerificationSummary {
  double p = 0;
  int n = 0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  int extent = 0;
  int D = 0;
  std::uint64_t circuits = 0;
  std::uint64_t passes = 0;        // circuit samples with a full replay
  std::uint64_t rect4_violations = 0;
  std::vector<VerificationRecord> records;

  std::optional<double> pass_rate() const {
    if (circuits == 0) return std::nullopt;
    return double(passes) / double(circuits);
  }
  bool all_pass() const { return passes == circuits && rect4_violations == 0; }
};

inline int verification_extent(int n, int detour_radius, const Pattern& g) {
  return std::max(2 * n + 2 * detour_radius + g.radius() + 2,
                  required_extent(VertexBox::centred(n)) + 2 * g.radius() + 2);
}

inline VerificationSummary verify_theorem(double p, int n, std::uint64_t trials, std::uint64_t seed, const Pattern& g,
                                          int detour_radius, const RunOptions& opt = {}) {
  check_probability(p);
  check_trials(trials);
  if (n <= kCoreRadius) throw std::invalid_argument("verify needs n > " + std::to_string(kCoreRadius));
  if (detour_radius < 0) throw std::invalid_argument("detour radius must be >= 0");
  VerificationSummary s;
  s.p = p;
  s.n = n;
  s.trials = trials;
  s.seed = seed;
  s.D = detour_radius;
  s.extent = verification_extent(n, detour_radius, g);
  check_extent(s.extent, opt.max_sites);
  s.records.resize(trials);
  parallel_for(trials, opt.workers, [&](std::uint64_t k) {
    VerificationRecord& rec = s.records[k];
    rec.sample = k;
    const Configuration omega = sample(p, s.extent, seed, k, opt.max_sites);
    const Configuration tilde = enhance(omega, g);
    rec.circuit = surrounding_circuit_exact(tilde, n).holds;
    rec.circuit4 = surrounding_circuit_4rect(tilde, n).holds;
    if (!rec.circuit) {
      if (rec.circuit4) rec.diagnostics = "four-rectangle crossing without exact circuit";
      return;
    }
    TraceOptions topt;
    topt.record_states = false;
    const Trajectory t = trace(omega, kOrigin, topt);
    rec.closed = t.closed();
    rec.q_containment = t.q_containment;
    rec.contained = t.closed() && t.q_containment <= 2 * n + 2 * detour_radius;
    const Configuration omega0 = hybrid(omega, tilde, kCoreRadius);
    const Trajectory t0 = trace(omega0, kOrigin, topt);
    rec.hybrid_q_containment = t0.q_containment;
    rec.hybrid_contained = t0.closed() && t0.q_containment <= 2 * n;
    std::ostringstream d;
    if (!rec.closed) d << "L(omega) " << status_name(t.status) << "; ";
    if (!rec.contained) d << "L(omega) reaches Q_" << t.q_containment << "; ";
    if (!rec.hybrid_contained) d << "L(omega_0) " << status_name(t0.status) << " reaching Q_" << t0.q_containment << "; ";
    rec.diagnostics = d.str();
    if (!rec.diagnostics.empty())
      rec.diagnostics += "reproduce with seed " + std::to_string(seed) + " stream " + std::to_string(k) + " n " +
                         std::to_string(n);
  });
  for (const auto& r : s.records) {
    if (r.circuit4 && !r.circuit) ++s.rect4_violations;
    if (!r.circuit) continue;
    ++s.circuits;
    if (r.replay_ok()) ++s.passes;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Decay fit
// ---------------------------------------------------------------------------

struct DecayFit {
  std::vector<std::pair<int, double>> points;  // (n, 1 - estimate) actually used
  double c_hat = 0;
  double intercept = 0;
  double r2 = 0;
  bool degenerate = false;  // some estimate was exactly 1 and got dropped
  std::vector<int> dropped;
};

// Least squares of log(1 - estimate) against n; c_hat is minus the slope.
inline DecayFit fit_decay(const std::vector<std::pair<int, double>>& series) {
  DecayFit f;
  for (auto [n, est] : series) {
    if (!(est >= 0 && est <= 1)) throw std::invalid_argument("fit_decay: estimate outside [0,1]");
    if (est >= 1) {
      f.degenerate = true;
      f.dropped.push_back(n);
      continue;
    }
    f.points.emplace_back(n, 1 - est);
  }
  if (f.points.size() < 3)
    throw std::invalid_argument("fit_decay: " + std::to_string(f.points.size()) + " usable point(s), need >= 3");
  const double k = double(f.points.size());
  double sx = 0, sy = 0;
  for (auto [n, q] : f.points) {
    sx += n;
    sy += std::log(q);
  }
  const double mx = sx / k, my = sy / k;
  double sxx = 0, sxy = 0, syy = 0;
  for (auto [n, q] : f.points) {
    const double dx = n - mx, dy = std::log(q) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0) throw std::invalid_argument("fit_decay: all points share one n");
  const double slope = sxy / sxx;
  f.c_hat = -slope;
  f.intercept = my - slope * mx;
  f.r2 = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

inline DecayFit fit_decay(const std::vector<EstimationReport>& series) {
  std::vector<std::pair<int, double>> pts;
  for (const auto& r : series) pts.emplace_back(r.n, r.estimate);
  return fit_decay(pts);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline constexpr const char* kEstimatesHeader = "event,p,n,N,hits,estimate,ci_lo,ci_hi,seed,generator,walltime_ms";
inline constexpr const char* kVerificationHeader = "sample,circuit,closed,contained,hybrid_contained,pass";
inline constexpr const char* kFitsHeader = "c_hat,intercept,r2,points_used";

inline void write_estimate_row(std::ostream& out, const EstimationReport& r) {
  out << r.event << "," << format_double(r.p) << "," << r.n << "," << r.trials << "," << r.hits << ","
      << format_double(r.estimate) << "," << format_double(r.ci.lo) << "," << format_double(r.ci.hi) << ","
      << r.seed << "," << r.generator << "," << (r.walltime_ms ? format_double(*r.walltime_ms) : "NA") << "\n";
}

inline std::string estimates_csv(const std::vector<EstimationReport>& rows) {
  std::ostringstream ss;
  ss << kEstimatesHeader << "\n";
  for (const auto& r : rows) write_estimate_row(ss, r);
  return ss.str();
}

inline std::string verification_csv(const VerificationSummary& s) {
  std::ostringstream ss;
  ss << kVerificationHeader << "\n";
  auto flag = [&](bool evaluated, bool v) { return evaluated ? (v ? "1" : "0") : "NA"; };
  for (const auto& r : s.records)
    ss << r.sample << "," << (r.circuit ? 1 : 0) << "," << flag(r.circuit, r.closed) << ","
       << flag(r.circuit, r.contained) << "," << flag(r.circuit, r.hybrid_contained) << ","
       << (r.pass() ? 1 : 0) << "\n";
  return ss.str();
}

inline std::string fits_csv(const DecayFit& f) {
  std::ostringstream ss;
  ss << kFitsHeader << "\n";
  ss << format_double(f.c_hat) << "," << format_double(f.intercept) << "," << format_double(f.r2) << ","
     << f.points.size() << "\n";
  return ss.str();
}

}  // namespace manhattan
