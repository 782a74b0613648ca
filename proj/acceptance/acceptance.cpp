// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "manhattan/manhattan.hpp"
#include "oracles.hpp"

using namespace manhattan;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool ok = false;
  std::string detail;
};

Pattern shipped() { return load_pattern(fs::path(MANHATTAN_DATA_DIR) / "patterns" / "default.pattern"); }

// 1. The p = 1 orbit.
Verdict orbit() {
  const Configuration c = Configuration::all_closed(8);
  const auto t0 = Clock::now();
  const Trajectory t = trace(c);
  const double ms = seconds_since(t0) * 1e3;
  const std::vector<Site> want{{0, 0}, {1, 0}, {1, -1}, {0, -1}};
  std::vector<Site> got;
  for (const auto& s : t.states) got.push_back(s.site);
  const bool ok = t.closed() && t.steps == 4 && got == want && ms < 1.0;
  std::ostringstream d;
  d << "status " << status_name(t.status) << " steps " << t.steps << " sites "
    << (got == want ? "{(0,0),(1,0),(1,-1),(0,-1)}" : "unexpected") << " time " << ms << " ms";
  return {ok, d.str()};
}

// 2. Detectors against brute force, and the exact circuit against the dual search.
Verdict oracles() {
  const auto t0 = Clock::now();
  std::uint64_t configs = 0, checks = 0, mismatches = 0;
  const double ps[] = {0.3, 0.5, 0.6, 0.7};
  for (std::uint64_t k = 0; k < 500; ++k) {
    const int n = 2 + int(k % 3);
    const double p = ps[(k / 3) % 4];
    const int m = std::max({detector_extent(EventKind::crossing, n), detector_extent(EventKind::circuit, n),
                            detector_extent(EventKind::radial, n)}) +
                  1;
    const Configuration c = sample(p, m, 2024, k);
    ++configs;
    auto agree = [&](bool a, bool b) {
      ++checks;
      mismatches += a != b;
    };
    agree(radial_closed_path(c, n).holds, oracle::radial(c, n));
    for (RegionKind r : {RegionKind::T, RegionKind::T1, RegionKind::T2, RegionKind::T3, RegionKind::T4})
      agree(rect_crossing(c, n, r).holds, oracle::crossing(c, n, r));
    agree(surrounding_circuit_exact(c, n).holds, oracle::circuit_by_enumeration(c, n));
  }
  std::uint64_t dual_mismatches = 0;
  const int m8 = detector_extent(EventKind::circuit, 8);
  for (std::uint64_t k = 0; k < 10000; ++k) {
    const Configuration c = sample(0.5, m8, 77, k);
    dual_mismatches += surrounding_circuit_exact(c, 8).holds != dual_crosscheck(c, 8);
  }
  const double s = seconds_since(t0);
  std::ostringstream d;
  d << configs << " brute-force configs, " << checks << " detector checks, " << mismatches
    << " mismatches; exact vs dual on 10000 samples (p=0.5, n=8): " << dual_mismatches << " mismatches; " << s
    << " s";
  return {mismatches == 0 && dual_mismatches == 0 && s < 60, d.str()};
}

// 3. Four rectangle crossings imply the exact circuit.
Verdict four_rectangles() {
  const int n = 32;
  const int m = detector_extent(EventKind::circuit, n);
  std::ostringstream d;
  std::uint64_t total = 0;
  for (double p : {0.4, 0.5, 0.6}) {
    std::vector<std::uint8_t> v(10000, 0), c4(10000, 0);
    parallel_for(10000, default_workers(), [&](std::uint64_t k) {
      const Configuration c = sample(p, m, 303, k);
      c4[k] = surrounding_circuit_4rect(c, n).holds;
      v[k] = c4[k] && !surrounding_circuit_exact(c, n).holds;
    });
    std::uint64_t bad = 0, hits = 0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      bad += v[k];
      hits += c4[k];
    }
    total += bad;
    d << "p=" << p << ": " << hits << " four-rectangle hits, " << bad << " violations; ";
  }
  return {total == 0, d.str() + "n=32, 10000 samples per p"};
}

// 4. Enhancement never destroys a crossing; paired gap with its interval.
Verdict enhancement_monotone(const Pattern& g) {
  RunOptions opt;
  opt.workers = default_workers();
  const ComparisonReport r = compare_enhanced(0.5, 64, 10000, 404, g, opt);
  std::ostringstream d;
  d << "p=0.5 n=64 N=10000: plain " << r.plain.estimate << ", enhanced " << r.enhanced.estimate << ", violations "
    << r.violations() << ", gap " << r.gap << " 95% CI [" << r.gap_ci.lo << ", " << r.gap_ci.hi << "]";
  return {r.violations() == 0 && r.gap >= 0, d.str()};
}

// 5. Proof replay at n = 128.
Verdict replay(const Pattern& g) {
  const auto t0 = Clock::now();
  const DetourReport det = check_detour(g);
  RunOptions opt;
  opt.workers = default_workers();
  bool ok = det.ok;
  std::uint64_t circuits = 0;
  std::ostringstream d;
  for (double p : {0.45, 0.50, 0.55}) {
    const VerificationSummary s = verify_theorem(p, 128, 500, 505, g, det.D, opt);
    std::uint64_t implication_holds = 0;
    for (const auto& r : s.records) implication_holds += !r.circuit || r.replay_ok();
    circuits += s.circuits;
    ok = ok && implication_holds == s.trials && s.rect4_violations == 0;
    d << "p=" << p << ": " << s.circuits << "/" << s.trials << " with circuit, conditional pass rate "
      << (s.pass_rate() ? format_double(*s.pass_rate()) : std::string("vacuous (no circuits)")) << "; ";
  }
  const double secs = seconds_since(t0);
  ok = ok && circuits > 0 && secs < 600;
  d << "D=" << det.D << ", " << secs << " s";
  return {ok, d.str()};
}

// Reference closure fractions from the first validated run (p=0.6, N=10000, seed 606).
constexpr std::array<int, 4> kClosureN{8, 16, 32, 64};
constexpr std::array<double, 4> kClosureReference{0.5869, 0.8551, 0.9859, 0.9999};

// 6. Supercritical closure.
Verdict closure() {
  RunOptions opt;
  opt.workers = default_workers();
  std::vector<EstimationReport> rows;
  for (int n : kClosureN) rows.push_back(estimate_event({EventKind::closure, false}, 0.6, n, 10000, 606, nullptr, opt));
  bool ok = true;
  std::ostringstream d;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (k && rows[k].estimate < rows[k - 1].estimate) ok = false;
    const double q = rows[k].estimate, r = kClosureReference[k], N = double(rows[k].trials);
    const double se = std::sqrt(q * (1 - q) / N + r * (1 - r) / N);
    const bool in_band = std::abs(q - r) <= 3 * se + 1e-12;
    ok = ok && in_band;
    d << "n=" << rows[k].n << " " << q << (in_band ? "" : " (outside reference band)") << "; ";
  }
  try {
    const DecayFit f = fit_decay(rows);
    ok = ok && f.c_hat > 0;
    d << "c_hat " << f.c_hat << " from " << f.points.size() << " points";
    if (f.degenerate) d << " (dropped estimates of 1 at n=" << f.dropped.front() << ")";
  } catch (const std::invalid_argument& e) {
    ok = false;
    d << "fit failed: " << e.what();
  }
  return {ok, d.str()};
}

// 7. The shipped pattern passes all three checks.
Verdict pattern_validity(const Pattern& g) {
  const auto t0 = Clock::now();
  const PatternReport r = check_pattern(g);
  const double s = seconds_since(t0);
  bool entries_ok = r.detour.entries.size() == 2;
  for (const auto& e : r.detour.entries) entries_ok = entries_ok && e.ok && e.radius <= kMaxDetourRadius;
  std::ostringstream d;
  d << "translation " << (r.translation.ok ? "pass" : "fail") << " (" << r.translation.offsets_checked
    << " offsets), detour " << (r.detour.ok ? "pass" : "fail") << " D=" << r.detour.D << ", essential "
    << (r.essential.found ? "witness" : "none") << " after " << r.essential.trials << " trial(s); " << s << " s";
  return {r.ok() && entries_ok && s < 60, d.str()};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MANHATTAN_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 8. Byte-identical CSV for any worker count.
Verdict reproducible() {
  const fs::path dir = MANHATTAN_WORK_DIR;
  fs::create_directories(dir);
  bool ok = true;
  std::ostringstream d;
  const std::vector<std::pair<std::string, std::string>> jobs{
      {"estimate", "estimate --event Acirc --p 0.5 --p 0.6 --n 8 --n 16 --trials 500 --seed 808"},
      {"estimate-enhanced", "estimate --event Aprime --enhanced --pattern default --p 0.5 --n 16 --trials 500 --seed 808"},
      {"verify", "verify --p 0.55 --n 128 --trials 20 --seed 808 --pattern default"},
  };
  for (const auto& [name, args] : jobs) {
    std::string first;
    bool same = true;
    for (int w : {1, 4, 16}) {
      const fs::path out = dir / (name + "-w" + std::to_string(w) + ".csv");
      fs::remove(out);
      const int code = run_cli(args + " --workers " + std::to_string(w) + " --csv " + out.string());
      const std::string csv = slurp(out);
      if (code != 0 || csv.empty()) same = false;
      if (first.empty()) first = csv;
      same = same && csv == first;
    }
    ok = ok && same;
    d << name << " " << (same ? "identical" : "DIFFERENT") << " (" << std::count(first.begin(), first.end(), '\n')
      << " lines); ";
  }
  return {ok, d.str() + "workers 1, 4, 16"};
}

// 9. Shared uniforms: detectors monotone across p.
Verdict coupling() {
  const int n = 8;
  const int m = std::max({detector_extent(EventKind::radial, n), detector_extent(EventKind::crossing, n),
                          detector_extent(EventKind::circuit, n)});
  std::vector<std::uint32_t> bad(1000, 0);
  parallel_for(1000, default_workers(), [&](std::uint64_t k) {
    const UniformField f = uniforms(m, 909, k);
    std::vector<bool> prev;
    for (double p : {0.3, 0.5, 0.7}) {
      const Configuration c = threshold(f, p);
      std::vector<bool> now{radial_closed_path(c, n).holds, surrounding_circuit_exact(c, n).holds,
                            surrounding_circuit_4rect(c, n).holds, dual_crosscheck(c, n)};
      for (RegionKind r : {RegionKind::T, RegionKind::T1, RegionKind::T2, RegionKind::T3, RegionKind::T4})
        now.push_back(rect_crossing(c, n, r).holds);
      for (std::size_t i = 0; i < prev.size(); ++i) bad[k] += prev[i] && !now[i];
      prev = now;
    }
  });
  std::uint64_t total = 0;
  for (auto b : bad) total += b;
  std::ostringstream d;
  d << "1000 triples at p=0.3/0.5/0.7, n=8, 9 detectors: " << total << " violations";
  return {total == 0, d.str()};
}

}  // namespace

int main() {
  const Pattern g = shipped();
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"p=1 orbit", orbit},
      {"detector oracle equivalence", oracles},
      {"four rectangles imply circuit", four_rectangles},
      {"enhancement monotonicity", [&] { return enhancement_monotone(g); }},
      {"proof replay", [&] { return replay(g); }},
      {"supercritical closure", closure},
      {"pattern validity", [&] { return pattern_validity(g); }},
      {"reproducibility", reproducible},
      {"coupling monotonicity", coupling},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failed += !v.ok;
    std::cout << "criterion " << k + 1 << " " << (v.ok ? "PASS" : "FAIL") << " " << criteria[k].first << ": "
              << v.detail << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << "\n";
  return failed ? 1 : 0;
}
