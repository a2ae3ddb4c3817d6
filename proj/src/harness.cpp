// SPDX-License-Identifier: BSD-3-Clause

#include "multirate/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "multirate/butcher.hpp"
#include "multirate/erk.hpp"

namespace multirate {

namespace {

std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) { return ""; }
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s)
{
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!cur.empty()) { out.push_back(cur); }
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) { out.push_back(cur); }
  return out;
}

double parse_double(const std::string& s, const std::string& key)
{
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) { throw std::invalid_argument(s); }
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for '" + key + "': " + s);
  }
}

int parse_int(const std::string& s, const std::string& key)
{
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) { throw std::invalid_argument(s); }
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad integer value for '" + key + "': " + s);
  }
}

bool parse_bool(const std::string& s, const std::string& key)
{
  if (s == "true" || s == "on" || s == "1") { return true; }
  if (s == "false" || s == "off" || s == "0") { return false; }
  throw ConfigError("bad boolean value for '" + key + "': " + s);
}

std::string format_g17(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

} // namespace

MethodSpec parse_method(const std::string& selector)
{
  MethodSpec spec;
  spec.selector = selector;
  auto suffix_int = [&](const std::string& prefix) {
    const std::string tail = selector.substr(prefix.size());
    return parse_int(tail, selector);
  };

  if (selector.rfind("erk-", 0) == 0) {
    spec.family = MethodSpec::Family::Erk;
    spec.table_name = selector.substr(4);
    lookup_table(spec.table_name); // validate the name now
    return spec;
  }
  if (selector == "sdc") {
    spec.family = MethodSpec::Family::Sdc;
    spec.X = 3;
    spec.sweeps = 4;
    return spec;
  }
  if (selector.rfind("sdc-", 0) == 0) {
    spec.family = MethodSpec::Family::Sdc;
    spec.X = 3;
    spec.sweeps = suffix_int("sdc-");
    return spec;
  }
  if (selector.rfind("mrsdc-", 0) == 0) {
    const std::string xyz = selector.substr(6);
    if (xyz.size() != 3) {
      throw ConfigError("mrsdc selector needs three digits, e.g. mrsdc-338");
    }
    spec.family = MethodSpec::Family::Mrsdc;
    spec.X = xyz[0] - '0';
    spec.Y = xyz[1] - '0';
    spec.Z = xyz[2] - '0';
    spec.sweeps = 4;
    return spec;
  }
  if (selector.rfind("imex-mri3-", 0) == 0) {
    spec.family = MethodSpec::Family::Mri;
    spec.coupling_name = "imex-mri-gark3b";
    spec.fast_table = "kutta3";
    spec.m = suffix_int("imex-mri3-");
    spec.needs_implicit_solver = true;
    return spec;
  }
  if (selector.rfind("imex-mri4-", 0) == 0) {
    spec.family = MethodSpec::Family::Mri;
    spec.coupling_name = "imex-mri-gark4";
    spec.fast_table = "classic-rk4";
    spec.m = suffix_int("imex-mri4-");
    spec.needs_implicit_solver = true;
    return spec;
  }
  if (selector.rfind("mri3-", 0) == 0) {
    spec.family = MethodSpec::Family::Mri;
    spec.coupling_name = "mis-kw3";
    spec.fast_table = "bogacki-shampine3";
    spec.m = suffix_int("mri3-");
    return spec;
  }
  if (selector == "ark-imex") {
    spec.family = MethodSpec::Family::ArkImex;
    spec.needs_implicit_solver = true;
    return spec;
  }
  throw ConfigError("unknown method selector '" + selector + "'");
}

std::vector<std::string> known_method_selectors()
{
  return {"erk-<table>", "sdc",          "sdc-<sweeps>", "mrsdc-XYZ",
          "mri3-<m>",    "imex-mri3-<m>", "imex-mri4-<m>", "ark-imex"};
}

void StudyConfig::validate() const
{
  if (problem_kind != "linear-two-rate" && problem_kind != "brusselator-1d" &&
      problem_kind != "brusselator-2d") {
    throw ConfigError("unknown problem kind '" + problem_kind + "'");
  }
  if (methods.empty()) { throw ConfigError("no methods configured"); }
  for (const auto& m : methods) { parse_method(m); }
  if (h_list.empty()) { throw ConfigError("no step sizes configured"); }
  for (std::size_t i = 1; i < h_list.size(); ++i) {
    if (h_list[i] >= h_list[i - 1]) {
      throw ConfigError("h_list must be strictly decreasing");
    }
  }
  if (tf <= t0) { throw ConfigError("tf must exceed t0"); }
  if (reference_method != "cash-karp5" && reference_method != "analytic") {
    throw ConfigError("reference method must be cash-karp5 or analytic");
  }
  if (reference_method == "analytic" && problem_kind != "linear-two-rate") {
    throw ConfigError("analytic reference requires the linear problem");
  }
}

StudyConfig load_study_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in) { throw ConfigError("cannot open config file: " + path); }

  StudyConfig cfg;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) { line = line.substr(0, hash); }
    line = trim(line);
    if (line.empty()) { continue; }
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string qual = section.empty() ? key : section + "." + key;

    if (qual == "problem.kind") { cfg.problem_kind = value; }
    else if (qual == "problem.n_cells") { cfg.pde.n_cells = parse_int(value, qual); }
    else if (qual == "problem.eps") { cfg.pde.eps = parse_double(value, qual); }
    else if (qual == "problem.rho_d") { cfg.pde.rho_d = parse_double(value, qual); }
    else if (qual == "problem.diffusion") { cfg.pde.diffusion = parse_double(value, qual); }
    else if (qual == "problem.a_vel") { cfg.pde.a_vel = parse_double(value, qual); }
    else if (qual == "problem.length") { cfg.pde.length = parse_double(value, qual); }
    else if (qual == "problem.a_par") { cfg.pde.a_par = parse_double(value, qual); }
    else if (qual == "problem.b_par") { cfg.pde.b_par = parse_double(value, qual); }
    else if (qual == "problem.ic_amplitude") { cfg.pde.ic_amplitude = parse_double(value, qual); }
    else if (qual == "study.methods") { cfg.methods = split_list(value); }
    else if (qual == "study.h_list") {
      cfg.h_list.clear();
      for (const auto& tok : split_list(value)) {
        cfg.h_list.push_back(parse_double(tok, qual));
      }
    }
    else if (qual == "study.t0") { cfg.t0 = parse_double(value, qual); }
    else if (qual == "study.tf") { cfg.tf = parse_double(value, qual); }
    else if (qual == "study.error_component") { cfg.error_component = value; }
    else if (qual == "solver.newton_tol") { cfg.newton_tol = parse_double(value, qual); }
    else if (qual == "solver.gmres_tol") { cfg.gmres_tol = parse_double(value, qual); }
    else if (qual == "solver.newton_max_iters") { cfg.newton_max_iters = parse_int(value, qual); }
    else if (qual == "solver.gmres_max_iters") { cfg.gmres_max_iters = parse_int(value, qual); }
    else if (qual == "solver.precondition") { cfg.precondition = parse_bool(value, qual); }
    else if (qual == "solver.tolerance_table") {
      for (const auto& tok : split_list(value)) {
        const auto colon = tok.find(':');
        if (colon == std::string::npos) {
          throw ConfigError("tolerance_table entries are H:tol pairs");
        }
        cfg.tolerance_table[parse_double(tok.substr(0, colon), qual)] =
            parse_double(tok.substr(colon + 1), qual);
      }
    }
    else if (qual == "reference.method") { cfg.reference_method = value; }
    else if (qual == "reference.h_ref") { cfg.h_ref = parse_double(value, qual); }
    else if (qual == "tolerance-sweep.coarse") { cfg.sweep_tol_coarse = parse_double(value, qual); }
    else if (qual == "tolerance-sweep.fine") { cfg.sweep_tol_fine = parse_double(value, qual); }
    else if (qual == "precond-study.grids") {
      cfg.precond_grids.clear();
      for (const auto& tok : split_list(value)) {
        cfg.precond_grids.push_back(parse_int(tok, qual));
      }
    }
    else if (qual == "precond-study.rho_ds") {
      cfg.precond_rho_ds.clear();
      for (const auto& tok : split_list(value)) {
        cfg.precond_rho_ds.push_back(parse_double(tok, qual));
      }
    }
    else if (qual == "precond-study.steps") { cfg.precond_steps = parse_int(value, qual); }
    else if (qual == "precond-study.method") { cfg.precond_method = value; }
    else if (qual == "output.dir") { cfg.out_dir = value; }
    else if (qual == "output.seed") { cfg.seed = static_cast<unsigned>(parse_int(value, qual)); }
    else if (qual == "output.jobs") { cfg.jobs = parse_int(value, qual); }
    else {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": unknown key '" + qual + "'");
    }
  }
  if (cfg.problem_kind == "brusselator-2d") { cfg.pde.dims = 2; }
  return cfg;
}

ProblemInstance make_problem(const StudyConfig& cfg)
{
  ProblemInstance p;
  if (cfg.problem_kind == "linear-two-rate") {
    p.linear = cfg.linear;
    p.system = cfg.linear.system();
    p.y0 = cfg.linear.y0;
    if (cfg.error_component == "0" || cfg.error_component == "1") {
      p.component_offset = cfg.error_component == "0" ? 0 : 1;
      p.component_count = 1;
    }
    return p;
  }

  BrusselatorPdeConfig pde = cfg.pde;
  pde.dims = cfg.problem_kind == "brusselator-2d" ? 2 : 1;
  pde.validate();
  p.pde = pde;
  p.system = brusselator_system(pde);
  p.y0 = initial_condition(pde);
  const std::size_t cells = pde.cells_total();
  if (cfg.error_component == "u") { p.component_offset = 0; p.component_count = cells; }
  else if (cfg.error_component == "v") { p.component_offset = cells; p.component_count = cells; }
  else if (cfg.error_component == "w") { p.component_offset = 2 * cells; p.component_count = cells; }
  else if (cfg.error_component != "all") {
    throw ConfigError("unknown error component '" + cfg.error_component + "'");
  }

  const GridDescriptor grid = pde.grid();
  const double nu = pde.rho_d * pde.diffusion;
  p.precond_factory = [grid, nu](double gamma_h) {
    return helmholtz_preconditioner(1.0, gamma_h * nu, grid);
  };
  return p;
}

double measure_error(const ProblemInstance& problem, const StateVector& state,
                     const StateVector& reference)
{
  StateVector diff = state;
  axpy_into(diff, -1.0, reference);
  if (problem.component_count == 0) { return max_norm(diff); }
  return max_norm_component(diff, problem.component_offset,
                            problem.component_count);
}

RunOutcome run_method(const MethodSpec& spec, const ProblemInstance& problem,
                      const StudyConfig& cfg, double H,
                      double tolerance_override)
{
  RunOutcome out;
  out.steps = static_cast<long>(std::ceil((cfg.tf - cfg.t0) / H - 1e-12));

  ImplicitStageSolver solver;
  solver.newton.tolerance =
      tolerance_override > 0.0 ? tolerance_override : cfg.newton_tol;
  solver.newton.max_iters = cfg.newton_max_iters;
  solver.gmres.tolerance =
      tolerance_override > 0.0 ? tolerance_override : cfg.gmres_tol;
  solver.gmres.max_iters = cfg.gmres_max_iters;
  if (cfg.precondition && problem.precond_factory) {
    solver.make_preconditioner = problem.precond_factory;
  }

  const auto start = std::chrono::steady_clock::now();
  try {
    switch (spec.family) {
    case MethodSpec::Family::Erk: {
      const ButcherTable table = lookup_table(spec.table_name);
      const PartitionedSystem* sys = &problem.system;
      RhsFn f = [sys](double t, const StateVector& y) {
        return sys->sum_rhs(t, y);
      };
      out.final_state = erk_integrate(table, f, cfg.t0, cfg.tf, H, problem.y0,
                                      &out.counters.n_explicit_evals);
      break;
    }
    case MethodSpec::Family::Sdc: {
      const QuadratureNodes nodes = lobatto_nodes(spec.X);
      const PartitionedSystem* sys = &problem.system;
      RhsFn f = [sys](double t, const StateVector& y) {
        return sys->sum_rhs(t, y);
      };
      out.final_state =
          sdc_integrate(nodes, f, cfg.t0, cfg.tf, H, problem.y0, spec.sweeps,
                        &out.counters.n_explicit_evals);
      break;
    }
    case MethodSpec::Family::Mrsdc: {
      const MrsdcScheme scheme = build_scheme(spec.X, spec.Y, spec.Z, spec.sweeps);
      out.final_state = mrsdc_integrate(scheme, problem.system, cfg.t0, cfg.tf,
                                        H, problem.y0, out.counters);
      break;
    }
    case MethodSpec::Family::Mri: {
      MriMethodConfig mc;
      mc.coupling = register_coupling(spec.coupling_name);
      mc.fast_table = lookup_table(spec.fast_table);
      mc.m = spec.m;
      out.final_state = mri_integrate(mc, problem.system, solver, cfg.t0,
                                      cfg.tf, H, problem.y0, out.counters);
      break;
    }
    case MethodSpec::Family::ArkImex: {
      const ArkPair pair = lookup_ark_pair("ark436-imex-pair");
      out.final_state = ark_imex_integrate(pair, problem.system, solver,
                                           cfg.t0, cfg.tf, H, problem.y0,
                                           out.counters);
      break;
    }
    }
  } catch (const IntegrationError& err) {
    out.diverged = true;
    out.message = err.what();
  }
  const auto stop = std::chrono::steady_clock::now();
  out.wall_seconds = std::chrono::duration<double>(stop - start).count();
  return out;
}

namespace {

double solver_tolerance_for(const StudyConfig& cfg, const MethodSpec& spec,
                            double H)
{
  if (!spec.needs_implicit_solver) { return 0.0; }
  auto it = cfg.tolerance_table.find(H);
  if (it != cfg.tolerance_table.end()) { return it->second; }
  return 0.0; // use configured newton/gmres tolerances
}

StateVector compute_reference(const StudyConfig& cfg,
                              const ProblemInstance& problem)
{
  if (cfg.reference_method == "analytic") {
    return analytic_solution(*problem.linear, cfg.tf - cfg.t0);
  }
  int max_m = 1;
  for (const auto& sel : cfg.methods) {
    max_m = std::max(max_m, parse_method(sel).m);
  }
  const double min_fast_step = cfg.h_list.back() / max_m;
  double h_ref = cfg.h_ref;
  if (h_ref <= 0.0) {
    h_ref = min_fast_step / 10.0;
  } else if (h_ref * 10.0 > min_fast_step * (1.0 + 1e-9)) {
    throw ConfigError("h_ref must be at least 10x below the smallest fast step");
  }
  return reference_solution(problem.system, problem.y0, cfg.t0, cfg.tf, h_ref);
}

RunReport execute_study(const StudyConfig& cfg, bool with_rates)
{
  cfg.validate();
  const ProblemInstance problem = make_problem(cfg);
  const StateVector reference = compute_reference(cfg, problem);

  struct Task {
    MethodSpec spec;
    double H;
    double tolerance;
  };
  std::vector<Task> tasks;
  for (const auto& sel : cfg.methods) {
    const MethodSpec spec = parse_method(sel);
    for (double H : cfg.h_list) {
      tasks.push_back({spec, H, solver_tolerance_for(cfg, spec, H)});
    }
  }

  std::vector<RunRecord> records(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) { return; }
      const Task& task = tasks[i];
      RunOutcome outcome =
          run_method(task.spec, problem, cfg, task.H, task.tolerance);
      RunRecord rec;
      rec.method = task.spec.selector;
      rec.H = task.H;
      rec.tolerance = task.tolerance;
      rec.wall_seconds = outcome.wall_seconds;
      rec.steps = outcome.steps;
      rec.counters = outcome.counters;
      rec.diverged = outcome.diverged;
      rec.note = outcome.message;
      if (!outcome.diverged) {
        rec.error = measure_error(problem, outcome.final_state, reference);
      }
      records[i] = std::move(rec);
    }
  };
  const int jobs = std::max(1, cfg.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) { pool.emplace_back(worker); }
    for (auto& th : pool) { th.join(); }
  }

  RunReport report;
  report.rows = std::move(records);
  if (with_rates) {
    for (const auto& sel : cfg.methods) {
      std::vector<RunRecord*> rows;
      for (auto& r : report.rows) {
        if (r.method == sel) { rows.push_back(&r); }
      }
      std::sort(rows.begin(), rows.end(),
                [](const RunRecord* a, const RunRecord* b) { return a->H > b->H; });
      std::vector<std::pair<double, double>> points;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i]->diverged || !std::isfinite(rows[i]->error) ||
            rows[i]->error <= 0.0) {
          continue;
        }
        points.push_back({rows[i]->H, rows[i]->error});
        if (i > 0 && !rows[i - 1]->diverged &&
            std::isfinite(rows[i - 1]->error) && rows[i - 1]->error > 0.0) {
          rows[i]->rate = std::log(rows[i - 1]->error / rows[i]->error) /
                          std::log(rows[i - 1]->H / rows[i]->H);
        }
      }
      if (points.size() >= 2) {
        report.fitted_slopes[sel] = fitted_slope(points);
      }
    }
  }
  return report;
}

} // namespace

double fitted_slope(const std::vector<std::pair<double, double>>& h_and_error)
{
  std::vector<std::pair<double, double>> pts;
  for (const auto& [h, e] : h_and_error) {
    if (std::isfinite(e) && e > 0.0 && h > 0.0) { pts.push_back({h, e}); }
  }
  if (pts.size() < 2) { return std::numeric_limits<double>::quiet_NaN(); }
  std::sort(pts.begin(), pts.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  // drop the coarsest point when enough remain; it is the most likely
  // to sit outside the asymptotic range
  if (pts.size() >= 4) { pts.erase(pts.begin()); }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [h, e] : pts) {
    const double x = std::log(h), y = std::log(e);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(pts.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

RunReport run_convergence_study(const StudyConfig& cfg)
{
  return execute_study(cfg, /*with_rates=*/true);
}

RunReport run_efficiency_study(const StudyConfig& cfg)
{
  return execute_study(cfg, /*with_rates=*/false);
}

ToleranceSweepReport run_tolerance_sweep(const StudyConfig& cfg)
{
  cfg.validate();
  const ProblemInstance problem = make_problem(cfg);
  const StateVector reference = compute_reference(cfg, problem);

  ToleranceSweepReport report;
  for (const auto& sel : cfg.methods) {
    const MethodSpec spec = parse_method(sel);
    if (!spec.needs_implicit_solver) { continue; } // no solves, nothing to sweep
    for (double H : cfg.h_list) {
      std::vector<double> tols;
      for (double tol = cfg.sweep_tol_coarse; tol >= cfg.sweep_tol_fine * 0.999;
           tol *= 0.1) {
        tols.push_back(tol);
      }
      std::vector<double> errors(tols.size(),
                                 std::numeric_limits<double>::quiet_NaN());
      for (std::size_t i = 0; i < tols.size(); ++i) {
        RunOutcome outcome = run_method(spec, problem, cfg, H, tols[i]);
        if (!outcome.diverged) {
          errors[i] = measure_error(problem, outcome.final_state, reference);
        }
      }
      const double tightest = errors.back();
      std::vector<bool> ok(tols.size(), false);
      for (std::size_t i = 0; i < tols.size(); ++i) {
        if (std::isfinite(errors[i]) && std::isfinite(tightest) &&
            tightest > 0.0) {
          ok[i] = std::fabs(errors[i] - tightest) / tightest < 0.01;
        }
      }
      // coarsest tolerance below which every finer tolerance also holds
      std::size_t selected = tols.size() - 1;
      for (std::size_t i = tols.size(); i-- > 0;) {
        if (!ok[i]) { break; }
        selected = i;
      }
      for (std::size_t i = 0; i < tols.size(); ++i) {
        ToleranceSweepRow row;
        row.method = sel;
        row.H = H;
        row.tolerance = tols[i];
        row.error_vs_tightest =
            std::isfinite(errors[i]) && tightest > 0.0
                ? std::fabs(errors[i] - tightest) / tightest
                : std::numeric_limits<double>::quiet_NaN();
        row.selected = (i == selected);
        report.rows.push_back(row);
      }
    }
  }
  return report;
}

PrecondStudyReport run_preconditioner_study(const StudyConfig& cfg)
{
  if (cfg.problem_kind != "brusselator-1d") {
    throw ConfigError("preconditioner study runs on brusselator-1d");
  }
  const MethodSpec spec = parse_method(cfg.precond_method);
  if (!spec.needs_implicit_solver) {
    throw ConfigError("preconditioner study needs an implicit method");
  }
  const double H = cfg.h_list.empty() ? 0.02 : cfg.h_list.front();

  PrecondStudyReport report;
  for (int grid : cfg.precond_grids) {
    for (double rho : cfg.precond_rho_ds) {
      for (bool precond : {false, true}) {
        StudyConfig local = cfg;
        local.pde.n_cells = grid;
        local.pde.rho_d = rho;
        local.precondition = precond;
        local.t0 = cfg.t0;
        local.tf = cfg.t0 + H * cfg.precond_steps;
        local.methods = {cfg.precond_method};
        local.h_list = {H};
        const ProblemInstance problem = make_problem(local);
        RunOutcome outcome = run_method(spec, problem, local, H);
        PrecondStudyRow row;
        row.grid = grid;
        row.rho_d = rho;
        row.preconditioned = precond;
        row.wall_seconds = outcome.wall_seconds;
        row.nonlinear_iters = outcome.counters.n_nonlinear_iters;
        row.linear_iters = outcome.counters.n_linear_iters;
        row.precond_solves = outcome.counters.n_precond_solves;
        report.rows.push_back(row);
      }
    }
  }
  return report;
}

void RunReport::write_csv(const std::string& path) const
{
  std::ofstream out(path);
  if (!out) { throw ConfigError("cannot open output file: " + path); }
  out << "method,H,tolerance,error,rate,wall_s,steps,diverged,"
         "n_fast_evals,n_implicit_evals,n_explicit_evals,n_implicit_solves,"
         "n_nonlinear_iters,n_linear_iters,n_precond_solves,n_fast_ivps\n";
  for (const auto& r : rows) {
    out << r.method << ',' << format_g17(r.H) << ',' << format_g17(r.tolerance)
        << ',' << format_g17(r.error) << ',' << format_g17(r.rate) << ','
        << format_g17(r.wall_seconds) << ',' << r.steps << ','
        << (r.diverged ? 1 : 0) << ',' << r.counters.n_fast_evals << ','
        << r.counters.n_implicit_evals << ',' << r.counters.n_explicit_evals
        << ',' << r.counters.n_implicit_solves << ','
        << r.counters.n_nonlinear_iters << ',' << r.counters.n_linear_iters
        << ',' << r.counters.n_precond_solves << ',' << r.counters.n_fast_ivps
        << '\n';
  }
}

void RunReport::write_json(const std::string& path, const StudyConfig* cfg) const
{
  nlohmann::json j;
  if (cfg) {
    j["config"] = {{"problem", cfg->problem_kind},
                   {"methods", cfg->methods},
                   {"t0", cfg->t0},
                   {"tf", cfg->tf},
                   {"error_component", cfg->error_component},
                   {"seed", cfg->seed},
                   {"jobs", cfg->jobs}};
  }
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json row;
    row["method"] = r.method;
    row["H"] = r.H;
    row["tolerance"] = r.tolerance;
    row["error"] = std::isfinite(r.error) ? nlohmann::json(r.error)
                                          : nlohmann::json(nullptr);
    row["rate"] = std::isfinite(r.rate) ? nlohmann::json(r.rate)
                                        : nlohmann::json(nullptr);
    row["wall_seconds"] = r.wall_seconds;
    row["steps"] = r.steps;
    row["diverged"] = r.diverged;
    row["note"] = r.note;
    row["counters"] = {{"fast_evals", r.counters.n_fast_evals},
                       {"implicit_evals", r.counters.n_implicit_evals},
                       {"explicit_evals", r.counters.n_explicit_evals},
                       {"implicit_solves", r.counters.n_implicit_solves},
                       {"nonlinear_iters", r.counters.n_nonlinear_iters},
                       {"linear_iters", r.counters.n_linear_iters},
                       {"precond_solves", r.counters.n_precond_solves},
                       {"fast_ivps", r.counters.n_fast_ivps}};
    j["rows"].push_back(row);
  }
  j["fitted_slopes"] = fitted_slopes;
  std::ofstream out(path);
  if (!out) { throw ConfigError("cannot open output file: " + path); }
  out << j.dump(2) << '\n';
}

void ToleranceSweepReport::write_csv(const std::string& path) const
{
  std::ofstream out(path);
  if (!out) { throw ConfigError("cannot open output file: " + path); }
  out << "method,H,tolerance,error_vs_tightest,selected\n";
  for (const auto& r : rows) {
    out << r.method << ',' << format_g17(r.H) << ',' << format_g17(r.tolerance)
        << ',' << format_g17(r.error_vs_tightest) << ','
        << (r.selected ? 1 : 0) << '\n';
  }
}

void PrecondStudyReport::write_csv(const std::string& path) const
{
  std::ofstream out(path);
  if (!out) { throw ConfigError("cannot open output file: " + path); }
  out << "grid,rho_d,preconditioned,wall_s,nonlinear_iters,linear_iters,"
         "precond_solves\n";
  for (const auto& r : rows) {
    out << r.grid << ',' << format_g17(r.rho_d) << ','
        << (r.preconditioned ? 1 : 0) << ',' << format_g17(r.wall_seconds)
        << ',' << r.nonlinear_iters << ',' << r.linear_iters << ','
        << r.precond_solves << '\n';
  }
}

} // namespace multirate

#include <CLI11.hpp>

namespace multirate {

namespace {

StudyConfig load_and_override(const std::string& config_path,
                              const std::string& out_dir,
                              const std::string& methods, unsigned seed,
                              int jobs)
{
  StudyConfig cfg = load_study_config(config_path);
  if (!out_dir.empty()) { cfg.out_dir = out_dir; }
  if (!methods.empty()) { cfg.methods = split_list(methods); }
  if (seed != 0) { cfg.seed = seed; }
  if (jobs != 0) { cfg.jobs = jobs; }
  std::filesystem::create_directories(cfg.out_dir);
  return cfg;
}

void write_summary(const StudyConfig& cfg, const RunReport& report)
{
  report.write_csv(cfg.out_dir + "/study.csv");
  report.write_json(cfg.out_dir + "/summary.json", &cfg);
}

} // namespace

int cli_main(int argc, char** argv)
{
  CLI::App app{"multirate time-integration study driver"};
  app.require_subcommand(1);

  std::string config_path, out_dir, methods;
  unsigned seed = 0;
  int jobs = 0;
  auto add_common = [&](CLI::App* sub, bool config_required = true) {
    auto* opt = sub->add_option("--config", config_path, "study configuration file");
    if (config_required) { opt->required(); }
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--methods", methods, "comma-separated method overrides");
    sub->add_option("--seed", seed, "seed recorded for randomized diagnostics");
    sub->add_option("--jobs", jobs, "concurrent (method, H) runs");
  };

  CLI::App* converge = app.add_subcommand("converge", "convergence-order study");
  add_common(converge);
  CLI::App* efficiency = app.add_subcommand("efficiency", "error-vs-cost study");
  add_common(efficiency);
  CLI::App* tolsweep =
      app.add_subcommand("tolerance-sweep", "solver tolerance selection sweep");
  add_common(tolsweep);
  CLI::App* precond =
      app.add_subcommand("precond-study", "preconditioner scaling study");
  add_common(precond);
  CLI::App* reference =
      app.add_subcommand("reference", "compute and export the reference solution");
  add_common(reference);
  CLI::App* listm = app.add_subcommand("list-methods", "print the method registry");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (listm->parsed()) {
      std::cout << "method selectors:\n";
      for (const auto& s : known_method_selectors()) {
        std::cout << "  " << s << '\n';
      }
      std::cout << "registered tables:\n";
      for (const auto& s : registered_table_names()) {
        std::cout << "  " << s << '\n';
      }
      std::cout << "registered couplings:\n";
      for (const auto& s : registered_coupling_names()) {
        std::cout << "  " << s << '\n';
      }
      return 0;
    }

    const StudyConfig cfg =
        load_and_override(config_path, out_dir, methods, seed, jobs);

    if (converge->parsed()) {
      RunReport report = run_convergence_study(cfg);
      write_summary(cfg, report);
      bool any_ok = false;
      for (const auto& r : report.rows) { any_ok |= !r.diverged; }
      for (const auto& [method, slope] : report.fitted_slopes) {
        std::cout << method << " fitted slope " << slope << '\n';
      }
      return any_ok ? 0 : 1;
    }
    if (efficiency->parsed()) {
      RunReport report = run_efficiency_study(cfg);
      write_summary(cfg, report);
      bool any_ok = false;
      for (const auto& r : report.rows) { any_ok |= !r.diverged; }
      return any_ok ? 0 : 1;
    }
    if (tolsweep->parsed()) {
      ToleranceSweepReport report = run_tolerance_sweep(cfg);
      report.write_csv(cfg.out_dir + "/tolerance_sweep.csv");
      return report.rows.empty() ? 1 : 0;
    }
    if (precond->parsed()) {
      PrecondStudyReport report = run_preconditioner_study(cfg);
      report.write_csv(cfg.out_dir + "/precond_study.csv");
      return report.rows.empty() ? 1 : 0;
    }
    if (reference->parsed()) {
      const ProblemInstance problem = make_problem(cfg);
      const StateVector ref = compute_reference(cfg, problem);
      if (problem.pde) {
        export_state_csv(*problem.pde, ref, cfg.out_dir + "/reference.csv");
      } else {
        std::ofstream out(cfg.out_dir + "/reference.csv");
        out << "component,value\n";
        for (std::size_t i = 0; i < ref.size(); ++i) {
          out << i << ',' << format_g17(ref[i]) << '\n';
        }
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "study failed: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

} // namespace multirate
