#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <random>

#include "manhattan/montecarlo.hpp"

using namespace manhattan;

namespace {
Pattern shipped() { return load_pattern(std::filesystem::path(MANHATTAN_DATA_DIR) / "patterns" / "default.pattern"); }
}  // namespace

TEST(Wilson, KnownValues) {
  const Interval a = wilson(0, 10);
  EXPECT_EQ(a.lo, 0.0);
  EXPECT_NEAR(a.hi, 0.2775327998628892, 1e-12);
  const Interval b = wilson(5, 10);
  EXPECT_NEAR(b.lo, 0.2365931, 1e-6);
  EXPECT_NEAR(b.hi, 0.7634069, 1e-6);
  const Interval c = wilson(10, 10);
  EXPECT_EQ(c.hi, 1.0);
  EXPECT_THROW(wilson(1, 0), std::invalid_argument);
  EXPECT_THROW(wilson(11, 10), std::invalid_argument);
}

// Coverage of the nominal 95% interval over independent binomial draws.
TEST(Wilson, CoverageNearNominal) {
  std::mt19937_64 rng(12345);
  const double p = 0.3;
  const std::uint64_t n = 200;
  std::binomial_distribution<std::uint64_t> draw(n, p);
  int covered = 0;
  const int reps = 1000;
  for (int k = 0; k < reps; ++k) {
    const Interval ci = wilson(draw(rng), n);
    covered += ci.lo <= p && p <= ci.hi;
  }
  const double rate = double(covered) / reps;
  EXPECT_GE(rate, 0.93);
  EXPECT_LE(rate, 0.97);
}

TEST(ParallelFor, EveryIndexOnceAndErrorsPropagate) {
  for (unsigned w : {1u, 3u, 16u}) {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(1000, w, [&](std::uint64_t k) { hits[k]++; });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
  EXPECT_THROW(parallel_for(100, 4,
                            [](std::uint64_t k) {
                              if (k == 37) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
  parallel_for(0, 4, [](std::uint64_t) { FAIL(); });
}

TEST(Estimate, ExtremeProbabilities) {
  const EstimationReport one = estimate_event({EventKind::closure, false}, 1.0, 4, 50, 1);
  EXPECT_EQ(one.estimate, 1.0);
  EXPECT_EQ(one.hits, 50u);
  const EstimationReport zero = estimate_event({EventKind::crossing, false}, 0.0, 4, 50, 1);
  EXPECT_EQ(zero.estimate, 0.0);
  EXPECT_EQ(zero.ci.lo, 0.0);
  EXPECT_EQ(zero.event, "Aprime");
  EXPECT_EQ(zero.generator, kGeneratorId);
  const EstimationReport circ = estimate_event({EventKind::circuit, false}, 1.0, 4, 10, 1);
  EXPECT_EQ(circ.estimate, 1.0);
}

TEST(Estimate, Errors) {
  EXPECT_THROW(estimate_event({EventKind::crossing, false}, 1.5, 4, 10, 1), std::invalid_argument);
  EXPECT_THROW(estimate_event({EventKind::crossing, false}, 0.5, 4, 0, 1), std::invalid_argument);
  EXPECT_THROW(estimate_event({EventKind::crossing, true}, 0.5, 4, 10, 1), std::invalid_argument);
  EXPECT_THROW(estimate_event({EventKind::circuit, false}, 0.5, 1, 10, 1), std::invalid_argument);
  RunOptions opt;
  opt.max_sites = 100;
  EXPECT_THROW(estimate_event({EventKind::crossing, false}, 0.5, 40, 10, 1, nullptr, opt), ResourceLimitError);
}

TEST(Estimate, IndependentOfWorkerCount) {
  const Pattern g = shipped();
  for (EventSpec e : {EventSpec{EventKind::closure, false}, EventSpec{EventKind::crossing, true},
                      EventSpec{EventKind::circuit, false}}) {
    std::string first;
    for (unsigned w : {1u, 4u, 16u}) {
      RunOptions opt;
      opt.workers = w;
      const std::string csv = estimates_csv({estimate_event(e, 0.55, 6, 300, 99, &g, opt)});
      if (first.empty()) first = csv;
      EXPECT_EQ(csv, first) << e.name() << " workers " << w;
    }
  }
}

TEST(Estimate, TimingIsOptIn) {
  const EstimationReport r = estimate_event({EventKind::closure, false}, 0.5, 4, 10, 1);
  EXPECT_FALSE(r.walltime_ms);
  EXPECT_NE(estimates_csv({r}).find(",NA\n"), std::string::npos);
  RunOptions opt;
  opt.timing = true;
  EXPECT_TRUE(estimate_event({EventKind::closure, false}, 0.5, 4, 10, 1, nullptr, opt).walltime_ms);
}

TEST(Estimate, CsvRow) {
  EstimationReport r;
  r.event = "Aprime";
  r.p = 0.5;
  r.n = 8;
  r.trials = 10;
  r.hits = 5;
  r.estimate = 0.5;
  r.ci = wilson(5, 10);
  r.seed = 3;
  const std::string csv = estimates_csv({r});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kEstimatesHeader);
  EXPECT_EQ(csv.substr(csv.find('\n') + 1, 18), "Aprime,0.5,8,10,5,");
  EXPECT_NE(csv.find(",3,philox4x32-10/site-v1,NA\n"), std::string::npos);
}

// Shared uniforms: raising p only closes edges, so every detector is monotone.
TEST(Coupling, DetectorsMonotoneInP) {
  const int n = 5;
  const int m = std::max({detector_extent(EventKind::radial, n), detector_extent(EventKind::crossing, n),
                          detector_extent(EventKind::circuit, n), detector_extent(EventKind::circuit4, n)});
  for (std::uint64_t k = 0; k < 200; ++k) {
    bool prev[4] = {false, false, false, false};
    for (double p : {0.3, 0.5, 0.7}) {
      const Configuration c = sample(p, m, 4, k);
      const bool now[4] = {detect(EventKind::radial, c, n).holds, detect(EventKind::crossing, c, n).holds,
                           detect(EventKind::circuit, c, n).holds, detect(EventKind::circuit4, c, n).holds};
      for (int d = 0; d < 4; ++d) {
        EXPECT_TRUE(!prev[d] || now[d]) << "detector " << d << " sample " << k;
        prev[d] = now[d];
      }
    }
  }
}

TEST(Compare, EnhancementNeverLosesCrossings) {
  const Pattern g = shipped();
  const ComparisonReport r = compare_enhanced(0.5, 8, 400, 21, g);
  EXPECT_EQ(r.violations(), 0u);
  EXPECT_EQ(r.both + r.plain_only + r.enhanced_only + r.neither, 400u);
  EXPECT_GE(r.gap, 0.0);
  EXPECT_LE(r.gap_ci.lo, r.gap);
  EXPECT_GE(r.gap_ci.hi, r.gap);
  EXPECT_GE(r.enhanced.estimate, r.plain.estimate);
  RunOptions opt;
  opt.workers = 8;
  const ComparisonReport q = compare_enhanced(0.5, 8, 400, 21, g, opt);
  EXPECT_EQ(q.both, r.both);
  EXPECT_EQ(q.enhanced_only, r.enhanced_only);
}

TEST(Verify, AllClosedPasses) {
  const Pattern g = shipped();
  const int D = check_detour(g).D;
  const VerificationSummary s = verify_theorem(1.0, 101, 3, 7, g, D);
  EXPECT_EQ(s.circuits, 3u);
  EXPECT_EQ(s.passes, 3u);
  EXPECT_TRUE(s.all_pass());
  ASSERT_TRUE(s.pass_rate());
  EXPECT_EQ(*s.pass_rate(), 1.0);
  for (const auto& r : s.records) {
    EXPECT_TRUE(r.closed);
    EXPECT_EQ(r.q_containment, 2);
    EXPECT_TRUE(r.diagnostics.empty());
  }
}

TEST(Verify, AllOpenIsVacuous) {
  const Pattern g = shipped();
  const VerificationSummary s = verify_theorem(0.0, 101, 4, 7, g, 5);
  EXPECT_EQ(s.circuits, 0u);
  EXPECT_FALSE(s.pass_rate());
  EXPECT_TRUE(s.all_pass());
  const std::string csv = verification_csv(s);
  EXPECT_EQ(csv, std::string(kVerificationHeader) + "\n0,0,NA,NA,NA,1\n1,0,NA,NA,NA,1\n2,0,NA,NA,NA,1\n3,0,NA,NA,NA,1\n");
}

TEST(Verify, Guards) {
  const Pattern g = shipped();
  EXPECT_THROW(verify_theorem(0.5, 100, 1, 1, g, 5), std::invalid_argument);
  EXPECT_THROW(verify_theorem(0.5, 128, 1, 1, g, -1), std::invalid_argument);
  EXPECT_GE(verification_extent(128, 5, g), 2 * 128 + 10 + g.radius());
}

TEST(Verify, RecordPassLogic) {
  VerificationRecord r;
  EXPECT_TRUE(r.pass());
  r.circuit = true;
  EXPECT_FALSE(r.pass());
  r.closed = r.contained = true;
  EXPECT_TRUE(r.pass());
  EXPECT_FALSE(r.replay_ok());
  r.hybrid_contained = true;
  EXPECT_TRUE(r.replay_ok());
}

TEST(Fit, ExactExponential) {
  std::vector<std::pair<int, double>> pts;
  for (int n : {8, 16, 32, 64}) pts.emplace_back(n, 1 - std::exp(-0.2 * n));
  const DecayFit f = fit_decay(pts);
  EXPECT_NEAR(f.c_hat, 0.2, 1e-9);
  EXPECT_NEAR(f.intercept, 0.0, 1e-9);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
  EXPECT_FALSE(f.degenerate);
  EXPECT_EQ(f.points.size(), 4u);
}

TEST(Fit, DegenerateAndTooFewPoints) {
  EXPECT_THROW(fit_decay(std::vector<std::pair<int, double>>{{8, 1.0}, {16, 1.0}, {32, 1.0}, {64, 1.0}}),
               std::invalid_argument);
  const DecayFit f = fit_decay(std::vector<std::pair<int, double>>{{8, 0.5}, {16, 0.75}, {32, 0.9}, {64, 1.0}});
  EXPECT_TRUE(f.degenerate);
  EXPECT_EQ(f.dropped, std::vector<int>{64});
  EXPECT_GT(f.c_hat, 0);
  EXPECT_THROW(fit_decay(std::vector<std::pair<int, double>>{{8, 0.5}, {16, 1.2}, {32, 0.9}}), std::invalid_argument);
  EXPECT_NE(fits_csv(f).find(kFitsHeader), std::string::npos);
}
