#include "pctl/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pctl/bifurcation.hpp"
#include "pctl/boundary_system.hpp"
#include "pctl/control_sim.hpp"
#include "pctl/map_model.hpp"
#include "pctl/safeset.hpp"
#include "pctl/serialize.hpp"

namespace pctl {

namespace {

// Usage problems found after parsing (bad map file, inconsistent flags).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string map_source = "asymmetric-tent";
  std::vector<double> q{0.5, 1.0};
  std::optional<double> u_bound;
  std::optional<double> beta;
  std::string format;
  std::string output_path;

  double tol = 1e-10;
  long max_iter = 100000;
  bool no_polish = false;
  bool allow_non_expanding = false;
  double point_tol = kPointTol;
  double gap_tol = kGapTol;
  double locate_tol = 1e-9;
  double jump_factor = 10.0;

  // simulate
  std::string mode = "controlled";
  std::string strategy = "uniform";
  std::uint64_t seed = 1;
  std::size_t n_steps = 200;
  std::optional<double> x0;
  std::vector<double> script;

  // sweep / bifurcate
  std::vector<double> u_range;
  std::vector<double> beta_range{0.0, 0.2, 200};
  unsigned jobs = 0;
  bool include_outside = false;

  // umin
  double umin_tol = 1e-9;
  std::optional<double> beta_to;
  std::size_t n_beta = 9;

  // trace
  std::optional<double> u_from;
  std::optional<double> u_to;
  double du = 1e-4;
  std::size_t check_every = 10;
  bool stop_at_first = false;

  // escape
  std::size_t max_depth = 30;
};

Interval target_of(const RunConfig& c) {
  if (!(c.q[0] < c.q[1])) throw UsageError("--q needs lo < hi");
  return {c.q[0], c.q[1]};
}

double need(const std::optional<double>& v, const char* flag) {
  if (!v) throw UsageError(std::string(flag) + " is required");
  if (!(*v > 0.0)) throw UsageError(std::string(flag) + " must be positive");
  return *v;
}

PiecewiseLinearMap map_of(const RunConfig& c) {
  try {
    return load_map(c.map_source);
  } catch (const std::exception& e) {
    throw UsageError(std::string("cannot load map: ") + e.what());
  }
}

SafeSetOptions safeset_options(const RunConfig& c) {
  SafeSetOptions o;
  o.tol = c.tol;
  o.max_iter = c.max_iter;
  o.polish = !c.no_polish;
  o.allow_non_expanding = c.allow_non_expanding;
  o.point_tol = c.point_tol;
  return o;
}

BifurcationOptions bifurcation_options(const RunConfig& c) {
  BifurcationOptions o;
  o.safeset = safeset_options(c);
  o.point_tol = c.point_tol;
  o.gap_tol = c.gap_tol;
  o.locate_tol = c.locate_tol;
  o.jump_factor = c.jump_factor;
  return o;
}

std::vector<double> grid_of(const std::vector<double>& r, const char* flag) {
  if (r.size() != 3) throw UsageError(std::string(flag) + " takes lo hi n");
  const double n = r[2];
  if (!(n >= 1.0) || n != static_cast<double>(static_cast<std::size_t>(n)))
    throw UsageError(std::string(flag) + ": n must be a positive integer");
  if (!(r[0] < r[1])) throw UsageError(std::string(flag) + ": lo must be below hi");
  return grid_points(r[0], r[1], static_cast<std::size_t>(n));
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw UsageError("cannot open output file " + path);
      os_ = file_.get();
    }
  }
  std::ostream& stream() { return *os_; }
  void json_out(const json& j) { *os_ << j.dump(2) << '\n'; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

void require_format(const RunConfig& c, std::initializer_list<const char*> allowed) {
  if (c.format.empty()) return;
  for (const char* a : allowed)
    if (c.format == a) return;
  throw UsageError("--format " + c.format + " is not available for this command");
}

int cmd_safeset(const RunConfig& c, std::ostream& out, std::ostream& err) {
  require_format(c, {"json"});
  const auto f = map_of(c);
  const ControlParams p{need(c.u_bound, "--u"), need(c.beta, "--beta"), target_of(c)};
  const auto res = maximal_safe_set(f, p, safeset_options(c));
  Output o(c.output_path, out);
  o.json_out(to_json(res));
  if (res.outside_regime) err << "note: U >= beta is outside the partial-control regime\n";
  if (!res.converged) {
    err << "error: sculpting did not converge in " << res.iterations << " iterations\n";
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_simulate(const RunConfig& c, std::ostream& out, std::ostream& err) {
  require_format(c, {"json", "csv"});
  const auto f = map_of(c);
  const Interval q = target_of(c);
  DisturbanceStrategy strategy;
  try {
    strategy.kind = parse_strategy_kind(c.strategy);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  strategy.seed = c.seed;
  strategy.script = c.script;
  if (strategy.kind == DisturbanceStrategy::Kind::Scripted && c.script.size() < c.n_steps)
    throw UsageError("--script needs at least --n values");

  TrajectoryRecord rec;
  try {
    if (c.mode == "uncontrolled") {
      rec = simulate_uncontrolled(f, c.x0.value_or(0.65), c.n_steps, q.lo);
    } else if (c.mode == "perturbed") {
      rec = simulate_perturbed(f, c.x0.value_or(0.65), c.n_steps, need(c.beta, "--beta"), strategy, q.lo);
    } else if (c.mode == "controlled") {
      const ControlParams p{need(c.u_bound, "--u"), need(c.beta, "--beta"), q};
      const auto res = maximal_safe_set(f, p, safeset_options(c));
      if (!res.converged) {
        err << "error: safe-set computation did not converge\n";
        return kExitFailure;
      }
      if (res.safe_set.empty()) {
        err << "error: no safe set exists for these bounds\n";
        return kExitFailure;
      }
      const double x0 = c.x0.value_or(0.5 * (res.safe_set.front().lo + res.safe_set.front().hi));
      if (!res.safe_set.contains(x0, kMergeEps)) throw UsageError("--x0 must lie in the safe set");
      rec = simulate_controlled(f, x0, c.n_steps, p, res.safe_set, strategy);
    } else {
      throw UsageError("--mode must be uncontrolled, perturbed or controlled");
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  Output o(c.output_path, out);
  if (c.format == "json")
    o.json_out(to_json(rec));
  else
    write_trajectory_csv(o.stream(), rec);
  if (rec.domain_exit_step) err << "note: trajectory left the map domain at step " << *rec.domain_exit_step << '\n';
  return kExitOk;
}

int cmd_sweep(const RunConfig& c, std::ostream& out, std::ostream& err) {
  require_format(c, {"csv"});
  const auto f = map_of(c);
  const auto us = grid_of(c.u_range.empty() ? std::vector<double>{0.0, 0.2, 200} : c.u_range, "--u-range");
  const auto bs = grid_of(c.beta_range, "--beta-range");
  SweepOptions so;
  so.safeset = safeset_options(c);
  so.jobs = c.jobs;
  so.include_outside_regime = c.include_outside;
  const auto cells = sweep(f, target_of(c), us, bs, so);
  std::size_t computed = 0, failed = 0;
  for (const auto& cell : cells) {
    computed += cell.computed ? 1 : 0;
    failed += (cell.computed && !cell.error.empty()) ? 1 : 0;
  }
  Output o(c.output_path, out);
  write_sweep_csv(o.stream(), cells);
  if (failed) err << "note: " << failed << " of " << computed << " cells failed (see note column)\n";
  if (computed > 0 && failed == computed) return kExitFailure;
  return kExitOk;
}

int cmd_umin(const RunConfig& c, std::ostream& out, std::ostream&) {
  require_format(c, {"json"});
  const auto f = map_of(c);
  const double beta = need(c.beta, "--beta");
  if (!(c.umin_tol > 0.0)) throw UsageError("--umin-tol must be positive");
  Output o(c.output_path, out);
  if (!c.beta_to) {
    o.json_out(to_json(u_min(f, target_of(c), beta, c.umin_tol, safeset_options(c))));
    return kExitOk;
  }
  // Slope report over [beta, beta_to].
  const auto rep = umin_slope_check(f, target_of(c), beta, *c.beta_to, c.n_beta, c.umin_tol,
                                    bifurcation_options(c));
  json samples = json::array();
  for (const auto& s : rep.samples)
    samples.push_back({{"beta", s.beta},
                       {"u_min", s.u_min ? json(*s.u_min) : json(nullptr)},
                       {"split_flagged", s.split_flagged}});
  json segments = json::array();
  for (const auto& s : rep.segments)
    segments.push_back({{"beta_from", s.beta_from}, {"beta_to", s.beta_to}, {"n_points", s.n_points},
                        {"slope", s.slope}, {"deviation", s.deviation}});
  o.json_out({{"samples", samples}, {"segments", segments}, {"max_deviation", rep.max_deviation}});
  return kExitOk;
}

int cmd_bifurcate(const RunConfig& c, std::ostream& out, std::ostream&) {
  require_format(c, {"json"});
  const auto f = map_of(c);
  const double beta = need(c.beta, "--beta");
  const auto us = grid_of(c.u_range.empty() ? std::vector<double>{0.0, beta, 250} : c.u_range, "--u-range");
  const auto scan = scan_bifurcations(f, target_of(c), beta, us, bifurcation_options(c));
  json events = json::array();
  for (const auto& e : scan.events) events.push_back(to_json(e));
  Output o(c.output_path, out);
  o.json_out(events);
  return kExitOk;
}

int cmd_trace(const RunConfig& c, std::ostream& out, std::ostream& err) {
  require_format(c, {"json"});
  const auto f = map_of(c);
  const double beta = need(c.beta, "--beta");
  const double from = need(c.u_from, "--u-from");
  const double to = need(c.u_to, "--u-to");
  if (!(c.du > 0.0)) throw UsageError("--du must be positive");
  TraceOptions to_opts;
  to_opts.bifurcation = bifurcation_options(c);
  to_opts.check_every = c.check_every;
  to_opts.stop_at_first_event = c.stop_at_first;
  const auto rec = trace_boundaries(f, ControlParams{from, beta, target_of(c)}, from, to, c.du, to_opts);
  Output o(c.output_path, out);
  o.json_out(to_json(rec));
  if (!rec.halted.empty()) err << "note: continuation halted: " << rec.halted << '\n';
  return kExitOk;
}

int cmd_boundary(const RunConfig& c, std::ostream& out, std::ostream& err) {
  require_format(c, {"json"});
  const auto f = map_of(c);
  const ControlParams p{need(c.u_bound, "--u"), need(c.beta, "--beta"), target_of(c)};
  const auto res = maximal_safe_set(f, p, safeset_options(c));
  if (!res.converged || res.safe_set.empty()) {
    err << "error: no converged nonempty safe set\n";
    return kExitFailure;
  }
  const auto sys = build_boundary_system(f, res.safe_set, p);
  const auto jac = jacobian_nonsingular(sys, f);
  const Eigen::VectorXd d = sys.active_derivative(f);
  json j;
  j["points"] = sys.points;
  j["active"] = sys.active;
  j["equations"] = sys.describe();
  j["active_derivative"] = std::vector<double>(d.data(), d.data() + d.size());
  j["jacobian"] = to_json(jac);
  Output o(c.output_path, out);
  o.json_out(j);
  return kExitOk;
}

int cmd_escape(const RunConfig& c, std::ostream& out, std::ostream& err) {
  require_format(c, {"json"});
  const auto f = map_of(c);
  const ControlParams p{need(c.u_bound, "--u"), need(c.beta, "--beta"), target_of(c)};
  if (!c.x0) throw UsageError("--x0 is required");
  const auto res = maximal_safe_set(f, p, safeset_options(c));
  if (!res.converged) {
    err << "error: safe-set computation did not converge\n";
    return kExitFailure;
  }
  EscapeOptions eo;
  eo.max_depth = c.max_depth;
  std::optional<EscapeCertificate> cert;
  try {
    cert = adversarial_escape(f, p, res.safe_set, *c.x0, eo);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  Output o(c.output_path, out);
  if (!cert) {
    o.json_out({{"x0", *c.x0}, {"certificate", nullptr}});
    err << "note: no escape certificate within depth " << c.max_depth << '\n';
    return kExitFailure;
  }
  o.json_out(to_json(*cert));
  return kExitOk;
}

void add_common(CLI::App* app, RunConfig& c, bool bounds) {
  app->add_option("--map", c.map_source, "builtin map name or map JSON file")->capture_default_str();
  app->add_option("--q", c.q, "target interval lo hi")->expected(2)->capture_default_str();
  if (bounds) {
    app->add_option("--u", c.u_bound, "control bound U");
    app->add_option("--beta", c.beta, "disturbance bound beta");
  }
  app->add_option("--format", c.format, "output format (json or csv)");
  app->add_option("-o,--output", c.output_path, "output file (default: stdout)");
  app->add_option("--tol", c.tol, "sculpting convergence tolerance (Hausdorff)")->capture_default_str();
  app->add_option("--max-iter", c.max_iter, "sculpting iteration cap")->capture_default_str();
  app->add_flag("--no-polish", c.no_polish, "skip the exact boundary re-solve");
  app->add_flag("--allow-non-expanding", c.allow_non_expanding, "accept maps with |slope| <= 1");
  app->add_option("--point-tol", c.point_tol, "B1 width tolerance")->capture_default_str();
  app->add_option("--gap-tol", c.gap_tol, "B2 gap tolerance")->capture_default_str();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Partial-control safe sets for piecewise-linear expanding maps"};
  app.require_subcommand(1);
  RunConfig c;

  auto* safeset = app.add_subcommand("safeset", "maximal safe set (JSON)");
  add_common(safeset, c, true);

  auto* simulate = app.add_subcommand("simulate", "trajectory (CSV or JSON)");
  add_common(simulate, c, true);
  simulate->add_option("--mode", c.mode, "uncontrolled | perturbed | controlled")->capture_default_str();
  simulate->add_option("--strategy", c.strategy, "uniform | extremal | adversarial | scripted")
      ->capture_default_str();
  simulate->add_option("--seed", c.seed, "RNG seed")->capture_default_str();
  simulate->add_option("--n", c.n_steps, "number of steps")->capture_default_str();
  simulate->add_option("--x0", c.x0, "initial state");
  simulate->add_option("--script", c.script, "disturbances for --strategy scripted")->delimiter(',');

  auto* sweep_cmd = app.add_subcommand("sweep", "(U, beta) grid of safe sets (CSV)");
  add_common(sweep_cmd, c, false);
  sweep_cmd->add_option("--u-range", c.u_range, "lo hi n (grid lo + k(hi-lo)/n, k = 1..n)")->expected(3);
  sweep_cmd->add_option("--beta-range", c.beta_range, "lo hi n")->expected(3)->capture_default_str();
  sweep_cmd->add_option("--jobs", c.jobs, "worker threads (0: all cores)")->capture_default_str();
  sweep_cmd->add_flag("--include-outside-regime", c.include_outside, "also compute cells with U >= beta");

  auto* umin_cmd = app.add_subcommand("umin", "smallest U with a nonempty safe set (JSON)");
  add_common(umin_cmd, c, true);
  umin_cmd->add_option("--umin-tol", c.umin_tol, "bisection tolerance")->capture_default_str();
  umin_cmd->add_option("--beta-to", c.beta_to, "sweep beta up to this value and fit slopes");
  umin_cmd->add_option("--n-beta", c.n_beta, "samples for --beta-to")->capture_default_str();

  auto* bif = app.add_subcommand("bifurcate", "bifurcation events along a U-line (JSON)");
  add_common(bif, c, true);
  bif->add_option("--u-range", c.u_range, "lo hi n (default 0 beta 250)")->expected(3);
  bif->add_option("--locate-tol", c.locate_tol, "bisection bracket width")->capture_default_str();
  bif->add_option("--jump-factor", c.jump_factor, "Hausdorff jump threshold in U-steps")->capture_default_str();

  auto* trace = app.add_subcommand("trace", "boundary continuation in U (JSON)");
  add_common(trace, c, true);
  trace->add_option("--u-from", c.u_from, "starting U")->required();
  trace->add_option("--u-to", c.u_to, "final U")->required();
  trace->add_option("--du", c.du, "continuation step")->capture_default_str();
  trace->add_option("--check-every", c.check_every, "steps between from-scratch checks")->capture_default_str();
  trace->add_flag("--stop-at-first", c.stop_at_first, "halt at the first bifurcation");
  trace->add_option("--locate-tol", c.locate_tol, "bisection bracket width")->capture_default_str();

  auto* boundary = app.add_subcommand("boundary", "boundary equations, dX/dU and det(J - M) (JSON)");
  add_common(boundary, c, true);

  auto* escape = app.add_subcommand("escape", "adversarial escape certificate for x0 outside S (JSON)");
  add_common(escape, c, true);
  escape->add_option("--x0", c.x0, "initial state in Q \\ S");
  escape->add_option("--max-depth", c.max_depth, "search depth")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    if (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front())
      out << sub->help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (safeset->parsed()) return cmd_safeset(c, out, err);
    if (simulate->parsed()) return cmd_simulate(c, out, err);
    if (sweep_cmd->parsed()) return cmd_sweep(c, out, err);
    if (umin_cmd->parsed()) return cmd_umin(c, out, err);
    if (bif->parsed()) return cmd_bifurcate(c, out, err);
    if (trace->parsed()) return cmd_trace(c, out, err);
    if (boundary->parsed()) return cmd_boundary(c, out, err);
    if (escape->parsed()) return cmd_escape(c, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SafetyBreach& e) {
    err << "SAFETY BREACH: " << e.what() << '\n';
    return kExitBreach;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace pctl
