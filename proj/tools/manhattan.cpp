#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "manhattan/manhattan.hpp"

#ifndef MANHATTAN_DATA_DIR
#define MANHATTAN_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using namespace manhattan;

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Pattern resolve_pattern(const std::string& name) {
  if (name == "default") return load_pattern(fs::path(MANHATTAN_DATA_DIR) / "patterns" / "default.pattern");
  return load_pattern(name);
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    write_file_atomic(path, text);
}

TiltedRegion parse_region(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw UsageError("--region: expected KIND:n, got '" + s + "'");
  const std::string kind = s.substr(0, colon);
  int n = 0;
  if (!parse_number(std::string_view(s).substr(colon + 1), n) || n < 1)
    throw UsageError("--region: bad n in '" + s + "'");
  for (RegionKind k : {RegionKind::Q, RegionKind::T, RegionKind::T1, RegionKind::T2, RegionKind::T3, RegionKind::T4})
    if (region_name(k) == kind) return {k, n};
  throw UsageError("--region: unknown kind '" + kind + "'");
}

std::string version_text() {
  std::ostringstream ss;
  ss << "manhattan " << kVersion << "\n";
  ss << "config format " << kConfigFormatVersion << "\n";
  ss << "trajectory format " << kTrajectoryFormatVersion << "\n";
  ss << "pattern format " << kPatternFormatVersion << "\n";
  ss << "witness format " << kWitnessFormatVersion << "\n";
  ss << "generator " << kGeneratorId << "\n";
  return ss.str();
}

std::string detour_text(const DetourTrace& d) {
  std::ostringstream ss;
  ss << "entry " << direction_char(d.entry) << " ok " << (d.ok ? "true" : "false") << " returned "
     << (d.returned ? "true" : "false") << " exit " << d.exit_state.site.a << " " << d.exit_state.site.b << " "
     << direction_char(d.exit_state.dir) << " radius " << d.radius << " steps " << d.states.size();
  if (!d.message.empty()) ss << " (" << d.message << ")";
  return ss.str();
}

std::string pattern_report_text(const Pattern& g, const PatternReport& r) {
  std::ostringstream ss;
  ss << "pattern " << g.name() << " radius " << g.radius() << " closed " << g.closed_sites().size() << " open "
     << g.open_sites().size() << "\n";
  ss << "translation " << (r.translation.ok ? "pass" : "fail") << " offsets_checked " << r.translation.offsets_checked;
  if (r.translation.counterexample)
    ss << " counterexample " << r.translation.counterexample->a << " " << r.translation.counterexample->b;
  ss << "\n";
  ss << "detour " << (r.detour.ok ? "pass" : "fail") << " D " << r.detour.D << "\n";
  for (const auto& d : r.detour.entries) ss << "  " << detour_text(d) << "\n";
  for (const auto& d : r.detour.diagnostics) ss << "  diagnostic " << detour_text(d) << "\n";
  ss << "essential " << (r.essential.found ? "pass" : "not-found") << " window " << r.essential.window << " trials "
     << r.essential.trials;
  if (r.essential.found) ss << " method " << r.essential.method;
  ss << "\n";
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Manhattan pinball toolkit"};
  app.require_subcommand(0, 1);
  bool show_version = false;
  app.add_flag("--version", show_version, "Print format versions and the generator id");

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "Sample a configuration");
  double s_p = 0;
  int s_extent = 0;
  std::uint64_t s_seed = 0, s_stream = 0;
  std::string s_out;
  sample_cmd->add_option("--p", s_p, "Closed probability")->required()->check(CLI::Range(0.0, 1.0));
  sample_cmd->add_option("--extent", s_extent, "Extent M")->required()->check(CLI::PositiveNumber);
  sample_cmd->add_option("--seed", s_seed, "Seed")->required();
  sample_cmd->add_option("--stream", s_stream, "Stream index");
  sample_cmd->add_option("--out", s_out, "Output configuration file")->required();

  // trace
  auto* trace_cmd = app.add_subcommand("trace", "Trace the ray from the origin");
  std::string t_config, t_out, t_svg;
  std::uint64_t t_max_steps = 0;
  trace_cmd->add_option("--config", t_config, "Configuration file")->required()->check(CLI::ExistingFile);
  trace_cmd->add_option("--out", t_out, "Output trajectory file")->required();
  trace_cmd->add_option("--svg", t_svg, "Also render the trajectory");
  trace_cmd->add_option("--max-steps", t_max_steps, "Step budget")->check(CLI::PositiveNumber);

  // enhance
  auto* enhance_cmd = app.add_subcommand("enhance", "Apply the enhancement");
  std::string e_config, e_pattern = "default", e_out, e_diff;
  int e_core = 0;
  enhance_cmd->add_option("--config", e_config, "Configuration file")->required()->check(CLI::ExistingFile);
  enhance_cmd->add_option("--pattern", e_pattern, "Pattern file or 'default'");
  auto* e_core_opt =
      enhance_cmd->add_option("--exclude-core", e_core, "Skip copies whose red edge is inside Q_k")->check(CLI::PositiveNumber);
  enhance_cmd->add_option("--out", e_out, "Output configuration file")->required();
  enhance_cmd->add_option("--diff", e_diff, "Write the changed sites here");

  // event
  auto* event_cmd = app.add_subcommand("event", "Evaluate a percolation event");
  std::string v_config, v_event, v_witness;
  int v_n = 0;
  event_cmd->add_option("--config", v_config, "Configuration file")->required()->check(CLI::ExistingFile);
  event_cmd->add_option("--event", v_event, "A, Aprime, Acirc or Acirc4")
      ->required()
      ->check(CLI::IsMember({"A", "Aprime", "Acirc", "Acirc4"}));
  event_cmd->add_option("--n", v_n, "Scale n")->required()->check(CLI::PositiveNumber);
  event_cmd->add_option("--witness", v_witness, "Witness output file");

  // estimate
  auto* est_cmd = app.add_subcommand("estimate", "Estimate event probabilities");
  std::string m_event, m_csv, m_fit, m_pattern = "default";
  std::vector<double> m_p;
  std::vector<int> m_n;
  std::uint64_t m_trials = 0, m_seed = 0;
  bool m_enhanced = false, m_timing = false;
  unsigned m_workers = 1;
  est_cmd->add_option("--event", m_event, "E, A, Aprime, Acirc or Acirc4")
      ->required()
      ->check(CLI::IsMember({"E", "A", "Aprime", "Acirc", "Acirc4"}));
  est_cmd->add_option("--p", m_p, "Closed probability (repeatable)")->required()->check(CLI::Range(0.0, 1.0));
  est_cmd->add_option("--n", m_n, "Scale n (repeatable)")->required()->check(CLI::PositiveNumber);
  est_cmd->add_option("--trials", m_trials, "Samples per row")->required()->check(CLI::PositiveNumber);
  est_cmd->add_option("--seed", m_seed, "Seed")->required();
  est_cmd->add_flag("--enhanced", m_enhanced, "Evaluate on the enhanced configuration");
  est_cmd->add_option("--pattern", m_pattern, "Pattern for --enhanced");
  est_cmd->add_option("--csv", m_csv, "Output CSV (stdout when absent)");
  est_cmd->add_option("--fit", m_fit, "Also fit the decay over n and write it here");
  est_cmd->add_option("--workers", m_workers, "Worker threads")->check(CLI::PositiveNumber);
  est_cmd->add_flag("--timing", m_timing, "Fill walltime_ms (output is then run-dependent)");

  // verify
  auto* ver_cmd = app.add_subcommand("verify", "Replay the trapping argument per sample");
  double r_p = 0;
  int r_n = 0;
  std::uint64_t r_trials = 0, r_seed = 0;
  std::string r_pattern = "default", r_csv;
  unsigned r_workers = 1;
  ver_cmd->add_option("--p", r_p, "Closed probability")->required()->check(CLI::Range(0.0, 1.0));
  ver_cmd->add_option("--n", r_n, "Scale n (> 100)")->required()->check(CLI::Range(kCoreRadius + 1, 1 << 20));
  ver_cmd->add_option("--trials", r_trials, "Samples")->required()->check(CLI::PositiveNumber);
  ver_cmd->add_option("--seed", r_seed, "Seed")->required();
  ver_cmd->add_option("--pattern", r_pattern, "Pattern file or 'default'");
  ver_cmd->add_option("--csv", r_csv, "Output CSV (stdout when absent)");
  ver_cmd->add_option("--workers", r_workers, "Worker threads")->check(CLI::PositiveNumber);

  // pattern
  auto* pat_cmd = app.add_subcommand("pattern", "Check or search enhancement patterns");
  pat_cmd->require_subcommand(1);
  auto* check_cmd = pat_cmd->add_subcommand("check", "Run the three pattern checks");
  std::string pc_pattern = "default";
  std::uint64_t pc_budget = kDefaultEssentialBudget, pc_seed = 0;
  check_cmd->add_option("--pattern", pc_pattern, "Pattern file or 'default'");
  check_cmd->add_option("--budget", pc_budget, "Essentiality trials");
  check_cmd->add_option("--seed", pc_seed, "Seed for the essentiality search");
  auto* search_cmd = pat_cmd->add_subcommand("search", "Search for valid patterns");
  int ps_radius = 0;
  std::uint64_t ps_budget = 0, ps_ess_budget = 64;
  std::string ps_out;
  search_cmd->add_option("--radius", ps_radius, "Largest pattern radius")->required()->check(CLI::Range(1, kMaxSearchRadius));
  search_cmd->add_option("--budget", ps_budget, "Search node budget")->required();
  search_cmd->add_option("--essential-budget", ps_ess_budget, "Essentiality trials per candidate");
  search_cmd->add_option("--out", ps_out, "Write the smallest pattern here");

  // render
  auto* render_cmd = app.add_subcommand("render", "Render an SVG");
  std::string d_config, d_traj, d_witness, d_pattern, d_out, d_layers = "lattice,mirrors";
  std::vector<std::string> d_regions;
  int d_scale = 20;
  render_cmd->add_option("--config", d_config, "Configuration file")->required()->check(CLI::ExistingFile);
  render_cmd->add_option("--trajectory", d_traj, "Trajectory file")->check(CLI::ExistingFile);
  render_cmd->add_option("--witness", d_witness, "Witness file")->check(CLI::ExistingFile);
  render_cmd->add_option("--pattern", d_pattern, "Pattern for the pattern_matches layer");
  render_cmd->add_option("--layers", d_layers, "Comma-separated layers");
  render_cmd->add_option("--region", d_regions, "Region outline KIND:n (repeatable)");
  render_cmd->add_option("--scale", d_scale, "Pixels per unit (even)");
  render_cmd->add_option("--out", d_out, "Output SVG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (show_version) {
      std::cout << version_text();
      return kOk;
    }

    if (*sample_cmd) {
      save(sample(s_p, s_extent, s_seed, s_stream), s_out);
      return kOk;
    }

    if (*trace_cmd) {
      const Configuration c = load(t_config);
      TraceOptions opt;
      if (t_max_steps) opt.max_steps = t_max_steps;
      const Trajectory t = trace(c, kOrigin, opt);
      write_file_atomic(t_out, trajectory_to_string(t));
      if (!t_svg.empty()) {
        RenderSpec spec;
        spec.layers = {Layer::mirrors, Layer::trajectory};
        Overlays ov;
        ov.trajectory = t.states;
        write_file_atomic(t_svg, render_svg(c, ov, spec));
      }
      std::cout << "status " << status_name(t.status) << " steps " << t.steps << " q_containment "
                << t.q_containment << "\n";
      return kOk;
    }

    if (*enhance_cmd) {
      const Configuration c = load(e_config);
      const Pattern g = resolve_pattern(e_pattern);
      std::optional<int> core;
      if (*e_core_opt) core = e_core;
      const MatchSet matches = match_pattern(c, g, core);
      Configuration out = enhance(c, g, core);
      save(out, e_out);
      if (!e_diff.empty()) {
        std::ostringstream ss;
        ss << "format manhattan-diff 1\nchanged " << matches.size() << "\n";
        std::vector<Site> reds;
        for (Offset t : matches) reds.push_back(g.red() + t);
        std::sort(reds.begin(), reds.end());
        for (Site s : reds) ss << s.a << " " << s.b << "\n";
        write_file_atomic(e_diff, ss.str());
      }
      std::cout << "matches " << matches.size() << "\n";
      return kOk;
    }

    if (*event_cmd) {
      const Configuration c = load(v_config);
      const EventKind k = parse_event(v_event);
      const EventResult r = detect(k, c, v_n);
      std::cout << "event " << v_event << " n " << v_n << " holds " << (r.holds ? "true" : "false") << "\n";
      if (k == EventKind::circuit)
        std::cout << "dual_crosscheck " << (dual_crosscheck(c, v_n) ? "true" : "false") << "\n";
      if (!v_witness.empty()) write_file_atomic(v_witness, witness_to_string(k, v_n, r));
      return kOk;
    }

    if (*est_cmd) {
      const EventSpec e{parse_event(m_event), m_enhanced};
      std::optional<Pattern> g;
      if (m_enhanced) g = resolve_pattern(m_pattern);
      RunOptions opt;
      opt.workers = m_workers;
      opt.timing = m_timing;
      std::vector<EstimationReport> rows;
      for (double p : m_p)
        for (int n : m_n) rows.push_back(estimate_event(e, p, n, m_trials, m_seed, g ? &*g : nullptr, opt));
      emit(m_csv, estimates_csv(rows));
      if (!m_fit.empty()) {
        if (m_p.size() != 1) throw UsageError("--fit: needs exactly one --p");
        emit(m_fit, fits_csv(fit_decay(rows)));
      }
      return kOk;
    }

    if (*ver_cmd) {
      const Pattern g = resolve_pattern(r_pattern);
      const DetourReport d = check_detour(g);
      if (!d.ok) {
        std::cerr << "pattern " << g.name() << " fails the detour check; cannot replay\n";
        return kFailed;
      }
      RunOptions opt;
      opt.workers = r_workers;
      const VerificationSummary s = verify_theorem(r_p, r_n, r_trials, r_seed, g, d.D, opt);
      emit(r_csv, verification_csv(s));
      std::ostream& log = (r_csv.empty() || r_csv == "-") ? std::cerr : std::cout;
      log << "samples " << s.trials << " circuits " << s.circuits << " passes " << s.passes << " pass_rate "
          << (s.pass_rate() ? format_double(*s.pass_rate()) : std::string("vacuous")) << " D " << s.D << " extent "
          << s.extent << " rect4_violations " << s.rect4_violations << "\n";
      for (const auto& rec : s.records)
        if (!rec.replay_ok()) log << "FAIL sample " << rec.sample << ": " << rec.diagnostics << "\n";
      return s.all_pass() ? kOk : kFailed;
    }

    if (*check_cmd) {
      const Pattern g = resolve_pattern(pc_pattern);
      const PatternReport r = check_pattern(g, pc_budget, pc_seed);
      std::cout << pattern_report_text(g, r);
      return r.ok() ? kOk : kFailed;
    }

    if (*search_cmd) {
      const SearchResult r = search_patterns(ps_radius, ps_budget, ps_ess_budget);
      std::cout << "nodes " << r.nodes << " candidates " << r.candidates << " valid " << r.patterns.size()
                << (r.budget_exhausted ? " budget-exhausted (partial)" : "") << "\n";
      for (std::size_t k = 0; k < std::min<std::size_t>(r.patterns.size(), 5); ++k)
        std::cout << r.patterns[k].name() << " closed " << r.patterns[k].closed_sites().size() << " sites "
                  << r.patterns[k].size() << " radius " << r.patterns[k].radius() << "\n";
      if (!ps_out.empty() && !r.patterns.empty()) save_pattern(r.patterns.front(), ps_out);
      return r.patterns.empty() ? kFailed : kOk;
    }

    if (*render_cmd) {
      const Configuration c = load(d_config);
      RenderSpec spec;
      spec.scale = d_scale;
      spec.layers.clear();
      std::stringstream ls(d_layers);
      for (std::string item; std::getline(ls, item, ',');)
        if (!item.empty()) {
          try {
            spec.layers.insert(parse_layer(item));
          } catch (const std::invalid_argument& e) {
            throw UsageError(std::string("--layers: ") + e.what());
          }
        }
      for (const auto& r : d_regions) spec.regions.push_back(parse_region(r));
      Overlays ov;
      if (!d_traj.empty()) {
        std::ifstream in(d_traj);
        ov.trajectory = read_trajectory(in).states;
      }
      if (!d_witness.empty()) {
        std::ifstream in(d_witness);
        ov.witness = read_witness(in).polylines;
      }
      std::optional<Pattern> g;
      if (!d_pattern.empty()) {
        g = resolve_pattern(d_pattern);
        ov.pattern = &*g;
      }
      write_file_atomic(d_out, render_svg(c, ov, spec));
      return kOk;
    }

    std::cerr << app.help();
    return kUsage;
  } catch (const ResourceLimitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
