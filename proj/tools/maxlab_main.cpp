// maxlab: exact evaluation and experiment harness for one-dimensional
// centered maximal operators on piecewise-linear functions.
//
// Exit codes: 0 ok, 1 assertion failure, 2 usage/validation, 3 I/O.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "maxlab/deriv.hpp"
#include "maxlab/errors.hpp"
#include "maxlab/experiments.hpp"
#include "maxlab/oracle.hpp"
#include "maxlab/profile.hpp"
#include "maxlab/util.hpp"

using nlohmann::json;
using namespace maxlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAssertion = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoFailure("read error on '" + path + "'");
  return ss.str();
}

// Atomic: write a temp file next to the target, then rename.
void spill(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    return;
  }
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoFailure("cannot open '" + tmp + "' for writing");
    out << content;
    if (!out) throw IoFailure("write error on '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw IoFailure("cannot rename '" + tmp + "' to '" + path + "'");
}

PiecewiseLinearFn load_function(const std::string& path) {
  return read_function_json(slurp(path));
}

struct GridSpec {
  Rational start, end, step;
};

GridSpec parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  if (parts.size() != 3) throw ValidationError("grid spec must be start:end:step");
  GridSpec g{parse_rational(parts[0]), parse_rational(parts[1]), parse_rational(parts[2])};
  if (sign(g.step) <= 0) throw ValidationError("grid step must be positive");
  if (!(g.start <= g.end)) throw ValidationError("grid start must not exceed end");
  return g;
}

Partition resolve_partition(const PiecewiseLinearFn& f, const std::string& spec) {
  if (spec == "auto") return simple_approximation(f, Rational(1)).partition;
  std::vector<Rational> pts;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      pts.push_back(parse_rational(cur));
      cur.clear();
    }
  };
  for (char c : spec) {
    if (c == ',')
      flush();
    else
      cur.push_back(c);
  }
  flush();
  std::sort(pts.begin(), pts.end());
  return Partition::create(std::move(pts), {});
}

json config_base(const std::string& command) {
  json j;
  j["command"] = command;
  j["threads"] = thread_budget();
  return j;
}

// ---------------------------------------------------------------------------

int cmd_maximal(const std::string& input, const std::string& op_name, const std::string& grid_spec,
                const std::string& interval_spec, const std::string& partition_spec,
                bool exact_columns, const std::string& output) {
  PiecewiseLinearFn f = load_function(input);
  GridSpec g = parse_grid(grid_spec);

  OperatorSpec op;
  const Partition* avoid = nullptr;
  std::optional<Partition> part;
  if (op_name == "M") {
    op = OperatorSpec::centered();
  } else if (op_name == "Muncentered") {
    op = OperatorSpec::uncentered();
  } else if (op_name == "MI") {
    Interval window;
    if (!interval_spec.empty()) {
      auto comma = interval_spec.find(',');
      if (comma == std::string::npos)
        throw ValidationError("--interval expects lo,hi (use 'inf' for an unbounded end)");
      std::string lo = interval_spec.substr(0, comma), hi = interval_spec.substr(comma + 1);
      if (lo != "-inf" && lo != "inf") window.lo = parse_rational(lo);
      if (hi != "inf") window.hi = parse_rational(hi);
    }
    op = OperatorSpec::local(window);
  } else if (op_name == "M1" || op_name == "M2") {
    part = resolve_partition(f, partition_spec.empty() ? "auto" : partition_spec);
    op = op_name == "M1" ? OperatorSpec::short_range(*part) : OperatorSpec::long_range(*part);
    avoid = &*op.partition;
  } else {
    throw ValidationError("unknown operator '" + op_name + "'");
  }

  std::vector<Rational> grid = make_grid(g.start, g.end, g.step, avoid);
  GridProfile prof = profile(f, grid, op);
  std::ostringstream csv;
  prof.to_csv(csv, exact_columns);
  spill(output, csv.str());
  return kExitOk;
}

int cmd_derivative(const std::string& input, const std::string& output) {
  PiecewiseLinearFn f = load_function(input);
  spill(output, write_step_json(f.derivative()));
  return kExitOk;
}

int cmd_approx(const std::string& input, const std::string& eps, bool coarsen,
               const std::string& output) {
  PiecewiseLinearFn f = load_function(input);
  SimpleApproximation a = simple_approximation(f, parse_rational(eps), coarsen);
  json j = config_base("approx");
  j["config"] = {{"input", input}, {"epsilon", eps}, {"coarsen", coarsen}};
  j["g_breakpoints"] = json::array();
  j["g_plateaus"] = json::array();
  for (const auto& b : a.g.breakpoints()) j["g_breakpoints"].push_back(to_fraction_string(b));
  for (const auto& v : a.g.plateaus()) j["g_plateaus"].push_back(to_fraction_string(v));
  j["partition"] = json::array();
  for (const auto& p : a.partition.points()) j["partition"].push_back(to_fraction_string(p));
  j["error"] = to_fraction_string(a.error);
  j["error_double"] = to_double(a.error);
  spill(output, j.dump(2) + "\n");
  return kExitOk;
}

int cmd_perturb(const std::string& input, const std::string& kind, int jj, std::uint64_t seed,
                const std::string& output) {
  PiecewiseLinearFn f = load_function(input);
  Perturbed p = perturbation_sequence(f, parse_perturbation_kind(kind), jj, seed);
  spill(output, write_function_json(p.fn));
  json rep = config_base("perturb");
  rep["config"] = {{"input", input}, {"kind", kind}, {"j", jj}, {"seed", seed}};
  rep["gap_constant"] = to_fraction_string(p.gap_constant);
  rep["sobolev_gap"] = to_fraction_string(p.fn.minus(f).norm_sobolev());
  std::cout << rep.dump(2) << "\n";
  return kExitOk;
}

int cmd_continuity(const std::string& input, const std::string& kind, const std::string& j_spec,
                   const std::string& eps, const std::string& step, std::uint64_t seed,
                   const std::string& out_prefix, bool with_svg) {
  PiecewiseLinearFn f = load_function(input);
  ContinuityConfig cfg;
  cfg.kind = parse_perturbation_kind(kind);
  cfg.epsilon = parse_rational(eps);
  cfg.grid_step = parse_rational(step);
  cfg.seed = seed;
  if (!j_spec.empty()) {
    cfg.j_list.clear();
    std::string cur;
    auto flush = [&] {
      if (cur.empty()) return;
      long v = std::strtol(cur.c_str(), nullptr, 10);
      if (v < 1) throw ValidationError("bad j '" + cur + "'");
      cfg.j_list.push_back(static_cast<int>(v));
      cur.clear();
    };
    for (char c : j_spec) {
      if (c == ',')
        flush();
      else if (std::isdigit(static_cast<unsigned char>(c)))
        cur.push_back(c);
      else
        throw ValidationError("bad j list");
    }
    flush();
    if (cfg.j_list.empty()) throw ValidationError("empty j list");
  }

  ContinuityReport rep = run_continuity(f, cfg);

  json j = config_base("continuity");
  j["config"] = {{"input", input},       {"kind", kind},
                 {"j_list", cfg.j_list}, {"epsilon", to_fraction_string(cfg.epsilon)},
                 {"grid_step", to_fraction_string(cfg.grid_step)}, {"seed", seed}};
  j["delta"] = to_fraction_string(rep.delta);
  j["K"] = to_fraction_string(rep.K);
  j["grid_size"] = rep.grid_size;
  j["j0"] = rep.j0;
  j["decrease_ok"] = rep.decrease_ok;
  j["decrease_ratio"] = rep.decrease_ratio;
  j["stability"] = {{"checked", rep.stability.checked},
                    {"stable", rep.stability.stable},
                    {"tagged", rep.stability.tagged},
                    {"violations", rep.stability.violations}};
  j["rows"] = json::array();
  std::ostringstream csv;
  csv << "j,sobolev_gap,sup_gap,sup_bound,sup_bound_ok,derivative_gap,derivative_gap_region,"
         "m1_gap_region,m2_gap_region,skipped_measure\n";
  for (const auto& r : rep.rows) {
    j["rows"].push_back({{"j", r.j},
                         {"sobolev_gap", to_double(r.sobolev_gap)},
                         {"sup_gap", r.sup_gap},
                         {"sup_bound", to_double(r.sup_bound)},
                         {"sup_bound_ok", r.sup_bound_ok},
                         {"derivative_gap", r.derivative_gap},
                         {"derivative_gap_region", r.derivative_gap_region},
                         {"m1_gap_region", r.m1_gap_region},
                         {"m2_gap_region", r.m2_gap_region},
                         {"skipped_measure", r.skipped_measure}});
    csv << r.j << "," << format_double(to_double(r.sobolev_gap)) << ","
        << format_double(r.sup_gap) << "," << format_double(to_double(r.sup_bound)) << ","
        << (r.sup_bound_ok ? 1 : 0) << "," << format_double(r.derivative_gap) << ","
        << format_double(r.derivative_gap_region) << "," << format_double(r.m1_gap_region) << ","
        << format_double(r.m2_gap_region) << "," << format_double(r.skipped_measure) << "\n";
  }

  spill(out_prefix + ".json", j.dump(2) + "\n");
  spill(out_prefix + ".csv", csv.str());
  if (with_svg) spill(out_prefix + ".svg", continuity_svg(rep));

  bool all_sup_ok = true;
  for (const auto& r : rep.rows) all_sup_ok = all_sup_ok && r.sup_bound_ok;
  if (!rep.decrease_ok || !all_sup_ok) {
    std::cerr << "continuity: decrease_ok=" << rep.decrease_ok << " sup_bounds_ok=" << all_sup_ok
              << "\n";
    return kExitAssertion;
  }
  return kExitOk;
}

int cmd_verify(const std::string& input, const std::string& which, const std::string& eps_s,
               const std::string& delta_s, const std::string& K_s, double c_config,
               const std::string& step_s, const std::string& kind, int jj, std::uint64_t seed,
               const std::string& output) {
  PiecewiseLinearFn f = load_function(input);
  auto eps = [&] { return parse_rational(eps_s); };
  Rational step = parse_rational(step_s);
  json rep = config_base("verify");
  rep["config"] = {{"input", input}, {"which", which},   {"epsilon", eps_s},
                   {"C", c_config},  {"grid_step", step_s}, {"kind", kind},
                   {"j", jj},        {"seed", seed}};
  bool ok = true;

  if (which == "decomposition") {
    Partition part = simple_approximation(f, Rational(1)).partition;
    DecompositionReport r = verify_decomposition(f, part, f.support_lo() - 2, f.support_hi() + 2,
                                                 step);
    ok = r.residual_zero;
    rep["results"] = {{"samples", r.samples},
                      {"x_count", r.x_count},
                      {"y_count", r.y_count},
                      {"z_count", r.z_count},
                      {"x_measure", to_double(r.step) * double(r.x_count)},
                      {"y_measure", to_double(r.step) * double(r.y_count)},
                      {"z_measure", to_double(r.step) * double(r.z_count)},
                      {"skipped", r.skipped},
                      {"residual_zero", r.residual_zero}};
  } else if (which == "m1") {
    Perturbed p = perturbation_sequence(f, parse_perturbation_kind(kind), jj, seed);
    Rational dgap = p.fn.derivative().minus(f.derivative()).l1_norm();
    Rational eff_eps = eps_s == "auto" ? Rational(2 * dgap) : eps();
    M1BoundReport r = verify_m1_bound(p.fn, f, eff_eps, c_config, step);
    ok = r.identity_failures == 0 && (!r.precondition_ok || r.ratio <= 1.0);
    rep["results"] = {{"precondition_ok", r.precondition_ok},
                      {"deriv_gap", to_double(r.deriv_gap)},
                      {"identity_samples", r.identity_samples},
                      {"identity_failures", r.identity_failures},
                      {"lhs", r.lhs},
                      {"bound", r.bound},
                      {"ratio", r.ratio}};
  } else if (which == "m2") {
    Partition part = simple_approximation(f, Rational(1)).partition;
    Rational delta = delta_s == "auto"
                         ? find_near_point_delta(f, part.points(), eps()).delta
                         : parse_rational(delta_s);
    Rational K = K_s == "auto" ? find_tail_bound(f, eps()).K : parse_rational(K_s);
    while (!(K > part.max_abs_point() + delta)) K *= 2;
    M2RegularityReport r = verify_m2_regularity(f, part, delta, K, step);
    ok = r.ok();
    rep["config"]["delta"] = to_fraction_string(delta);
    rep["config"]["K"] = to_fraction_string(K);
    rep["results"] = {{"samples", r.samples},
                      {"radius_violations", r.radius_violations},
                      {"derivative_violations", r.derivative_violations},
                      {"formula_gaps", r.formula_gaps},
                      {"lipschitz_pairs", r.lipschitz_pairs},
                      {"lipschitz_violations", r.lipschitz_violations},
                      {"max_abs_derivative", r.max_abs_derivative},
                      {"derivative_bound", r.derivative_bound},
                      {"lipschitz_bound", r.lipschitz_bound}};
  } else if (which == "luiro") {
    std::vector<Rational> grid = make_grid(f.support_lo() - 2, f.support_hi() + 2, step);
    GridProfile prof = profile(f, grid, OperatorSpec::centered());
    OracleConfig ocfg;
    long considered = 0, within = 0, constant_structure = 0, constant_failures = 0;
    double step_d = to_double(step);
    for (std::size_t i = 1; i + 1 < prof.size(); ++i) {
      const auto& p = prof.points[i];
      if (p.gap || p.kind == RadiusKind::limit_zero) continue;
      double jump = std::fabs(prof.points[i + 1].radius.to_double() -
                              prof.points[i - 1].radius.to_double());
      bool constant = jump <= 10 * step_d && prof.points[i - 1].kind == p.kind &&
                      prof.points[i + 1].kind == p.kind;
      if (jump > 10 * step_d) continue;  // tagged radius jump
      double fd = oracle_derivative(
          [&](double t) {
            // exact engine evaluated off-grid; rounded via rational conversion
            Rational xr(t);
            return maximal(f, xr).to_double();
          },
          to_double(p.x), ocfg);
      ++considered;
      bool pass = std::fabs(p.derivative.to_double() - fd) <= 1e-4;
      if (pass) ++within;
      if (constant) {
        ++constant_structure;
        if (!pass) ++constant_failures;
      }
    }
    double frac = considered > 0 ? double(within) / double(considered) : 1.0;
    ok = frac >= 0.95 && constant_failures == 0;
    rep["results"] = {{"considered", considered},
                      {"within_tolerance", within},
                      {"fraction", frac},
                      {"constant_structure", constant_structure},
                      {"constant_structure_failures", constant_failures},
                      {"fd_step", ocfg.fd_step},
                      {"tolerance", 1e-4}};
  } else if (which == "oracle") {
    OracleConfig ocfg;
    OracleFn view(f);
    std::vector<Rational> grid = make_grid(f.support_lo() - 2, f.support_hi() + 2, step);
    long failures = 0;
    double worst = 0;
    for (const Rational& x : grid) {
      double exact = maximal(f, x).to_double();
      OracleValue o = view.maximal(to_double(x), ocfg);
      double gap = std::fabs(exact - o.value);
      worst = std::max(worst, gap - o.discretization_bound);
      if (gap > 1e-6 + o.discretization_bound) ++failures;
    }
    ok = failures == 0;
    rep["results"] = {{"samples", grid.size()},
                      {"failures", failures},
                      {"worst_overflow", worst},
                      {"radius_step", ocfg.radius_step}};
  } else if (which == "tails") {
    TailBoundResult r = find_tail_bound(f, eps());
    double recheck = tail_variation(f, r.K, 2 * r.grid_points).total();
    ok = recheck < to_double(eps());
    rep["results"] = {{"K", to_fraction_string(r.K)},
                      {"tail_value", r.tail_value},
                      {"recheck_double_density", recheck},
                      {"epsilon", to_double(eps())}};
  } else if (which == "points") {
    Partition part = simple_approximation(f, Rational(1)).partition;
    NearPointResult r = find_near_point_delta(f, part.points(), eps(), 96, true);
    std::vector<double> parts;
    for (const Rational& p : part.points())
      parts.push_back(near_point_variation(f, p, r.delta, 2 * r.samples_per_point));
    double recheck = pairwise_sum(parts);
    ok = recheck < to_double(eps()) && r.diagnostics.exit_bound_violations == 0;
    rep["results"] = {{"delta", to_fraction_string(r.delta)},
                      {"delta_initial", to_fraction_string(r.delta_initial)},
                      {"ell", r.ell},
                      {"variation_sum", r.variation_sum},
                      {"recheck_double_density", recheck},
                      {"samples", r.diagnostics.samples},
                      {"window_exits", r.diagnostics.window_exits},
                      {"exit_bound_violations", r.diagnostics.exit_bound_violations},
                      {"local_ratio_max", r.diagnostics.local_ratio_max}};
  } else {
    throw ValidationError("unknown verification '" + which + "'");
  }

  rep["ok"] = ok;
  spill(output, rep.dump(2) + "\n");
  return ok ? kExitOk : kExitAssertion;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact one-dimensional maximal-operator laboratory"};
  app.require_subcommand(1);

  // maximal
  std::string in_file, op_name = "M", grid_spec, interval_spec, partition_spec, output = "-";
  bool exact_columns = false;
  auto* sc_max = app.add_subcommand("maximal", "profile an operator on a grid (CSV)");
  sc_max->add_option("input", in_file, "function JSON")->required();
  sc_max->add_option("--op", op_name, "M | Muncentered | MI | M1 | M2");
  sc_max->add_option("--grid", grid_spec, "start:end:step")->required();
  sc_max->add_option("--interval", interval_spec, "lo,hi for MI ('-inf'/'inf' allowed)");
  sc_max->add_option("--partition", partition_spec, "comma list or 'auto' (M1/M2)");
  sc_max->add_flag("--exact", exact_columns, "emit exact value/radius columns");
  sc_max->add_option("-o,--output", output, "output path ('-' = stdout)");

  // derivative
  std::string d_in, d_out = "-";
  auto* sc_der = app.add_subcommand("derivative", "emit f' as a step function (JSON)");
  sc_der->add_option("input", d_in, "function JSON")->required();
  sc_der->add_option("-o,--output", d_out, "output path");

  // approx
  std::string a_in, a_eps = "1", a_out = "-";
  bool a_coarsen = false;
  auto* sc_app = app.add_subcommand("approx", "simple approximation of f' and its partition");
  sc_app->add_option("input", a_in, "function JSON")->required();
  sc_app->add_option("--epsilon", a_eps, "L1 budget for the approximation error");
  sc_app->add_flag("--coarsen", a_coarsen, "greedily merge pieces within the budget");
  sc_app->add_option("-o,--output", a_out, "output path");

  // perturb
  std::string p_in, p_kind = "bump", p_out = "-";
  int p_j = 1;
  std::uint64_t p_seed = 0;
  auto* sc_per = app.add_subcommand("perturb", "build the j-th perturbation of f");
  sc_per->add_option("input", p_in, "function JSON")->required();
  sc_per->add_option("--kind", p_kind, "bump | dilation | shift | noise");
  sc_per->add_option("--j", p_j, "sequence index (>= 1)");
  sc_per->add_option("--seed", p_seed, "seed for the noise kind");
  sc_per->add_option("-o,--output", p_out, "output path for the function JSON");

  // continuity
  std::string c_in, c_kind = "bump", c_j, c_eps = "2", c_step = "0.01", c_prefix = "continuity";
  std::uint64_t c_seed = 0;
  bool c_svg = false;
  auto* sc_con = app.add_subcommand("continuity", "derivative-level continuity experiment");
  sc_con->add_option("input", c_in, "function JSON")->required();
  sc_con->add_option("--kind", c_kind, "bump | dilation | shift | noise");
  sc_con->add_option("--j", c_j, "comma list of indices (default 1,2,4,...,64)");
  sc_con->add_option("--epsilon", c_eps, "epsilon for the cutoff/radius selection");
  sc_con->add_option("--step", c_step, "grid step");
  sc_con->add_option("--seed", c_seed, "seed for the noise kind");
  sc_con->add_option("-o,--output", c_prefix, "output prefix (.json/.csv[/.svg])");
  sc_con->add_flag("--svg", c_svg, "also write a gap-vs-j SVG");

  // verify
  std::string v_in, v_which, v_eps = "0.5", v_delta = "auto", v_K = "auto", v_step = "0.05";
  std::string v_kind = "bump";
  double v_c = 100.0;
  int v_j = 8;
  std::uint64_t v_seed = 0;
  std::string v_out = "-";
  auto* sc_ver = app.add_subcommand("verify", "run a named verification, JSON report");
  sc_ver->add_option("input", v_in, "function JSON")->required();
  sc_ver->add_option("--which", v_which, "decomposition | m1 | m2 | luiro | oracle | tails | points")
      ->required();
  sc_ver->add_option("--epsilon", v_eps, "epsilon where applicable ('auto' for m1)");
  sc_ver->add_option("--delta", v_delta, "delta for m2 (or 'auto')");
  sc_ver->add_option("--K", v_K, "cutoff for m2 (or 'auto')");
  sc_ver->add_option("--C", v_c, "configured stand-in for the universal constant");
  sc_ver->add_option("--step", v_step, "grid step");
  sc_ver->add_option("--kind", v_kind, "perturbation kind for m1");
  sc_ver->add_option("--j", v_j, "perturbation index for m1");
  sc_ver->add_option("--seed", v_seed, "seed");
  sc_ver->add_option("-o,--output", v_out, "report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (sc_max->parsed())
      return cmd_maximal(in_file, op_name, grid_spec, interval_spec, partition_spec, exact_columns,
                         output);
    if (sc_der->parsed()) return cmd_derivative(d_in, d_out);
    if (sc_app->parsed()) return cmd_approx(a_in, a_eps, a_coarsen, a_out);
    if (sc_per->parsed()) return cmd_perturb(p_in, p_kind, p_j, p_seed, p_out);
    if (sc_con->parsed())
      return cmd_continuity(c_in, c_kind, c_j, c_eps, c_step, c_seed, c_prefix, c_svg);
    if (sc_ver->parsed())
      return cmd_verify(v_in, v_which, v_eps, v_delta, v_K, v_c, v_step, v_kind, v_j, v_seed,
                        v_out);
  } catch (const IoFailure& e) {
    std::cerr << "maxlab: " << e.what() << "\n";
    return kExitIo;
  } catch (const ValidationError& e) {
    std::cerr << "maxlab: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DegenerateConstraint& e) {
    std::cerr << "maxlab: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "maxlab: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
