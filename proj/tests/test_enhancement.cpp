#include <gtest/gtest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "manhattan/enhancement.hpp"
#include "manhattan/events.hpp"

using namespace manhattan;

namespace {

Pattern shipped() { return load_pattern(std::filesystem::path(MANHATTAN_DATA_DIR) / "patterns" / "default.pattern"); }

void plant(Configuration& c, const Pattern& g, Offset t) {
  for (Site s : g.closed_sites()) c.set_closed(s + t, true);
  for (Site s : g.open_sites()) c.set_closed(s + t, false);
}

// Every offset in range, checked site by site.
std::set<Offset> brute_matches(const Configuration& c, const Pattern& g) {
  std::set<Offset> out;
  const int m = c.extent();
  for (int ta = -2 * m; ta <= 2 * m; ++ta)
    for (int tb = -2 * m; tb <= 2 * m; ++tb) {
      if ((ta + tb) % 2 != 0) continue;
      bool ok = true;
      for (const auto* v : {&g.closed_sites(), &g.open_sites()})
        for (Site s : *v) {
          const Site u{s.a + ta, s.b + tb};
          if (std::abs(u.a) > m || std::abs(u.b) > m) ok = false;
        }
      if (!ok) continue;
      for (Site s : g.closed_sites()) ok = ok && c.closed({s.a + ta, s.b + tb});
      for (Site s : g.open_sites()) ok = ok && !c.closed({s.a + ta, s.b + tb});
      if (ok) out.insert({ta, tb});
    }
  return out;
}

std::set<Site> diff(const Configuration& x, const Configuration& y) {
  std::set<Site> out;
  for (int a = -x.extent(); a <= x.extent(); ++a)
    for (int b = -x.extent(); b <= x.extent(); ++b)
      if (x.closed({a, b}) != y.closed({a, b})) out.insert({a, b});
  return out;
}

}  // namespace

TEST(Pattern, RedIsOpenAndSetsDisjoint) {
  const Pattern g("p", {0, 0}, {{1, 0}}, {});
  EXPECT_TRUE(g.requires_open({0, 0}));
  EXPECT_EQ(g.radius(), 1);
  EXPECT_THROW(Pattern("p", {0, 0}, {{0, 0}}, {}), std::invalid_argument);
  EXPECT_THROW(Pattern("p", {0, 0}, {{1, 0}}, {{1, 0}}), std::invalid_argument);
  EXPECT_THROW(Pattern("p", {0, 0}, {{1, 0}, {1, 0}}, {}), std::invalid_argument);
}

TEST(PatternIo, RoundTripAndErrors) {
  const Pattern g = shipped();
  EXPECT_EQ(g.name(), "default");
  std::istringstream in(pattern_to_string(g));
  const Pattern back = read_pattern(in);
  EXPECT_EQ(back, g);
  EXPECT_EQ(back.name(), g.name());
  std::istringstream bad("format manhattan-pattern 1\nname x\nclosed 1 0\n");
  EXPECT_THROW(read_pattern(bad), ParseError);
  std::istringstream wrong("format manhattan-pattern 9\n");
  EXPECT_THROW(read_pattern(wrong), ParseError);
  const auto dir = std::filesystem::temp_directory_path() / "manhattan_pattern_io";
  std::filesystem::create_directories(dir);
  save_pattern(g, dir / "g.pattern");
  EXPECT_EQ(load_pattern(dir / "g.pattern"), g);
}

TEST(Match, PlantedCopy) {
  const Pattern g = shipped();
  Configuration c(12);
  plant(c, g, {4, 2});
  EXPECT_EQ(match_pattern(c, g), (MatchSet{Offset{4, 2}}));
  const Configuration e = enhance(c, g);
  EXPECT_EQ(e.provenance, Provenance::enhanced);
  EXPECT_EQ(diff(c, e), (std::set<Site>{g.red() + Offset{4, 2}}));
}

TEST(Match, AllOpenAndNoMatch) {
  const Pattern g = shipped();
  const Configuration c(9);
  EXPECT_TRUE(match_pattern(c, g).empty());
  EXPECT_EQ(diff(c, enhance(c, g)), std::set<Site>{});
  EXPECT_THROW(match_pattern(Configuration(2), g), std::invalid_argument);
}

TEST(Match, CopiesStraddlingTheBoundaryAreIgnored) {
  const Pattern g = shipped();
  Configuration c(8);
  plant(c, g, {6, 0});
  for (Offset t : match_pattern(c, g)) EXPECT_LE(t.a + g.max_a(), 8);
}

// Overlapping compatible copies: all found, and enhancement flips exactly their reds.
TEST(Match, OverlappingCopiesAgainstBruteForce) {
  const Pattern g = shipped();
  int overlapping = 0;
  for (int ta = -4; ta <= 4; ++ta)
    for (int tb = -4; tb <= 4; ++tb) {
      if ((ta + tb) % 2 != 0 || (ta == 0 && tb == 0)) continue;
      Configuration c(10);
      plant(c, g, {0, 0});
      bool compatible = true;
      for (Site s : g.closed_sites())
        if (g.requires_open(s + Offset{ta, tb}) || g.requires_open(s - Offset{ta, tb})) compatible = false;
      if (!compatible) continue;
      plant(c, g, {ta, tb});
      ++overlapping;
      const MatchSet m = match_pattern(c, g);
      EXPECT_EQ(std::set<Offset>(m.begin(), m.end()), brute_matches(c, g));
      EXPECT_TRUE(std::count(m.begin(), m.end(), Offset{0, 0}));
      EXPECT_TRUE(std::count(m.begin(), m.end(), Offset{ta, tb}));
      std::set<Site> reds;
      for (Offset t : m) reds.insert(g.red() + t);
      EXPECT_EQ(diff(c, enhance(c, g)), reds);
    }
  EXPECT_GT(overlapping, 0);
}

TEST(Match, RandomConfigurationsAgainstBruteForce) {
  const Pattern g("small", {0, 0}, {{1, 0}, {0, 1}}, {{-1, 0}});
  for (std::uint64_t k = 0; k < 200; ++k) {
    const Configuration c = sample(0.5, 6, 31, k);
    const MatchSet m = match_pattern(c, g);
    EXPECT_EQ(std::set<Offset>(m.begin(), m.end()), brute_matches(c, g));
    for (Offset t : m) EXPECT_EQ((t.a + t.b) % 2, 0);
  }
}

TEST(Match, ExcludedCore) {
  const Pattern g = shipped();
  Configuration c(30);
  plant(c, g, {0, 0});
  plant(c, g, {20, 0});
  EXPECT_EQ(match_pattern(c, g).size(), 2u);
  EXPECT_EQ(match_pattern(c, g, 5), (MatchSet{Offset{20, 0}}));
  EXPECT_EQ(diff(c, enhance(c, g, 5)), (std::set<Site>{g.red() + Offset{20, 0}}));
}

TEST(Enhance, OnlyClosesRedSitesAndIsDeterministic) {
  const Pattern g = shipped();
  for (double p : {0.3, 0.5, 0.7})
    for (std::uint64_t k = 0; k < 100; ++k) {
      const Configuration c = sample(p, 16, 5, k);
      const Configuration e = enhance(c, g);
      EXPECT_EQ(e, enhance(c, g));
      std::set<Site> reds;
      for (Offset t : match_pattern(c, g)) reds.insert(g.red() + t);
      EXPECT_EQ(diff(c, e), reds);
      for (Site s : reds) {
        EXPECT_FALSE(c.closed(s));
        EXPECT_TRUE(e.closed(s));
      }
    }
}

TEST(Enhance, DetectorsAreMonotone) {
  const Pattern g = shipped();
  const int n = 6;
  const int m = std::max(required_extent(VertexBox::centred(n)), required_extent(lattice_box({RegionKind::T, n})));
  for (std::uint64_t k = 0; k < 300; ++k) {
    const Configuration c = sample(0.5, m, 8, k);
    const Configuration e = enhance(c, g);
    if (radial_closed_path(c, n).holds) {
      EXPECT_TRUE(radial_closed_path(e, n).holds);
    }
    if (rect_crossing(c, n, RegionKind::T).holds) {
      EXPECT_TRUE(rect_crossing(e, n, RegionKind::T).holds);
    }
    if (surrounding_circuit_exact(c, n).holds) {
      EXPECT_TRUE(surrounding_circuit_exact(e, n).holds);
    }
    if (surrounding_circuit_4rect(c, n).holds) {
      EXPECT_TRUE(surrounding_circuit_4rect(e, n).holds);
    }
  }
}

TEST(Translation, ShippedPasses) {
  const TranslationReport r = check_translation_lemma(shipped());
  EXPECT_TRUE(r.ok);
  EXPECT_FALSE(r.counterexample);
  EXPECT_GT(r.offsets_checked, 0u);
}

TEST(Translation, AdversarialPatternFails) {
  const Pattern g("adversarial", {1, 1}, {{0, 0}}, {{1, 1}, {2, 0}});
  const TranslationReport r = check_translation_lemma(g);
  ASSERT_FALSE(r.ok);
  ASSERT_TRUE(r.counterexample);
  const Offset t = *r.counterexample;
  EXPECT_TRUE((t == Offset{1, -1} || t == Offset{-1, 1}));
  // The two copies coexist, and the red of one sits on an open site of the other.
  Configuration c(6);
  plant(c, g, {0, 0});
  plant(c, g, t);
  EXPECT_TRUE(matches_at(c, g, {0, 0}));
  EXPECT_TRUE(matches_at(c, g, t));
  EXPECT_TRUE(g.requires_open(g.red() + t) || g.requires_open(g.red() - t));
}

TEST(Translation, RedOnlyOpenPasses) {
  EXPECT_TRUE(check_translation_lemma(Pattern("r", {0, 0}, {{1, 0}, {0, -1}, {2, 3}}, {})).ok);
}

TEST(Detour, ShippedReturnsForBothEntries) {
  const Pattern g = shipped();
  const DetourReport r = check_detour(g);
  EXPECT_TRUE(r.ok);
  EXPECT_LE(r.D, kMaxDetourRadius);
  ASSERT_EQ(r.entries.size(), 2u);
  EXPECT_EQ(r.diagnostics.size(), 2u);
  const auto entries = arrival_directions(g.red());
  EXPECT_EQ(entries[0], Direction::E);
  EXPECT_EQ(entries[1], Direction::N);
  for (const DetourTrace& d : r.entries) {
    EXPECT_TRUE(d.ok) << d.message;
    EXPECT_TRUE(d.returned);
    EXPECT_EQ(d.exit_state.site, g.red());
    EXPECT_EQ(d.exit_state.dir, reflect(d.entry, mirror_orientation(g.red())));
    EXPECT_TRUE(d.unconstrained.empty());
    for (const RayState& s : d.states) EXPECT_LE(std::max(std::abs(s.site.a), std::abs(s.site.b)), r.D);
  }
}

TEST(Detour, EmptyPatternFails) {
  const DetourReport r = check_detour(Pattern("empty", {0, 0}, {}, {}));
  EXPECT_FALSE(r.ok);
  for (const DetourTrace& d : r.entries) {
    EXPECT_FALSE(d.ok);
    EXPECT_EQ(d.message, "escaped the window");
  }
}

TEST(Essential, ShippedHasWitness) {
  const Pattern g = shipped();
  const int w = min_essential_window(g);
  EXPECT_EQ(w, 2 * g.radius() + 4);
  const EssentialReport r = check_essential(g, w);
  ASSERT_TRUE(r.found);
  ASSERT_TRUE(r.witness);
  EXPECT_LE(r.trials, kDefaultEssentialBudget);
  // Re-check the witness independently of the search.
  const Configuration& c = *r.witness;
  EXPECT_FALSE(c.closed(g.red()));
  EXPECT_TRUE(matches_at(c, g, {0, 0}));
  const VertexBox box = detail::window_box(detail::lower_endpoint(g.red()), w);
  EXPECT_FALSE(detail::crosses_box(c, box));
  EXPECT_TRUE(detail::crosses_box(enhance(c, g), box));
}

// Red surrounded by open sites on every side: closing an isolated edge joins nothing.
TEST(Essential, IsolatedRedHasNoWitness) {
  std::vector<Site> open;
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b)
      if (a || b) open.push_back({a, b});
  const Pattern g("isolated", {0, 0}, {}, open);
  const EssentialReport r = check_essential(g, min_essential_window(g), 500);
  EXPECT_FALSE(r.found);
  EXPECT_EQ(r.trials, 500u);
}

TEST(Essential, WindowGuard) {
  const Pattern g = shipped();
  EXPECT_THROW(check_essential(g, min_essential_window(g) - 1), std::invalid_argument);
}

TEST(Essential, AllOpenWindowIsNoWitness) {
  const Pattern g = shipped();
  const Configuration c(min_essential_window(g));
  EXPECT_TRUE(match_pattern(c, g).empty());
  EXPECT_EQ(enhance(c, g).closed_count(), 0u);
}

TEST(Search, Guards) {
  EXPECT_THROW(search_patterns(kMaxSearchRadius + 1, 100), std::invalid_argument);
  EXPECT_THROW(search_patterns(0, 100), std::invalid_argument);
  const SearchResult r = search_patterns(3, 0);
  EXPECT_TRUE(r.patterns.empty());
  EXPECT_TRUE(r.budget_exhausted);
  const SearchResult small = search_patterns(3, 10);
  EXPECT_TRUE(small.budget_exhausted);
}

TEST(Search, RadiusThreeReproducesShippedPattern) {
  const SearchResult r = search_patterns(3, std::uint64_t(1) << 30);
  EXPECT_FALSE(r.budget_exhausted);
  ASSERT_FALSE(r.patterns.empty());
  EXPECT_EQ(r.patterns.front(), shipped());
  EXPECT_EQ(r.patterns.front().name(), "search-r3-0");
  for (std::size_t k = 1; k < r.patterns.size(); ++k)
    EXPECT_LE(r.patterns[k - 1].closed_sites().size(), r.patterns[k].closed_sites().size());
  for (const Pattern& g : r.patterns) {
    EXPECT_TRUE(check_translation_lemma(g).ok);
    EXPECT_TRUE(check_detour(g).ok);
  }
}

TEST(Search, RadiusTwoFindsNothing) {
  const SearchResult r = search_patterns(2, std::uint64_t(1) << 30);
  EXPECT_FALSE(r.budget_exhausted);
  EXPECT_TRUE(r.patterns.empty());
}
