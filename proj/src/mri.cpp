// SPDX-License-Identifier: BSD-3-Clause

#include "multirate/mri.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace multirate {

namespace {

constexpr double kConsistencyTol = 1.0e-12;

const char* kind_token(StageKind k)
{
  switch (k) {
  case StageKind::FastIvp: return "fast-ivp";
  case StageKind::ImplicitSolve: return "implicit-solve";
  case StageKind::ExplicitUpdate: return "explicit-update";
  }
  return "?";
}

StageKind kind_from_token(const std::string& tok)
{
  if (tok == "fast-ivp") { return StageKind::FastIvp; }
  if (tok == "implicit-solve") { return StageKind::ImplicitSolve; }
  if (tok == "explicit-update") { return StageKind::ExplicitUpdate; }
  throw ContractError("import_coupling: unknown stage kind '" + tok + "'");
}

std::vector<std::vector<double>> average_matrices(
    const std::vector<std::vector<std::vector<double>>>& mats, int s)
{
  std::vector<std::vector<double>> bar(s, std::vector<double>(s, 0.0));
  for (std::size_t k = 0; k < mats.size(); ++k) {
    const double w = 1.0 / static_cast<double>(k + 1);
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j) bar[i][j] += w * mats[k][i][j];
  }
  return bar;
}

} // namespace

bool MriCoupling::uses_implicit() const
{
  for (const auto& mat : gamma)
    for (const auto& row : mat)
      for (double v : row)
        if (v != 0.0) { return true; }
  return false;
}

bool MriCoupling::is_fully_explicit() const { return !uses_implicit(); }

void MriCoupling::finalize()
{
  const int s = stages;
  if (s < 2 || static_cast<int>(c.size()) != s ||
      static_cast<int>(stage_kind.size()) != s) {
    throw ContractError("MriCoupling " + name + ": inconsistent sizes");
  }
  if (std::fabs(c[0]) > 0.0 || std::fabs(c[s - 1] - 1.0) > kConsistencyTol) {
    throw ContractError("MriCoupling " + name + ": need c[0]=0 and c[s-1]=1");
  }
  for (int i = 1; i < s; ++i) {
    if (c[i] < c[i - 1] - kConsistencyTol) {
      throw ContractError("MriCoupling " + name + ": abscissae decrease");
    }
  }
  auto check_shape = [&](const std::vector<std::vector<std::vector<double>>>& mats,
                         bool implicit_part, const char* label) {
    for (const auto& mat : mats) {
      if (static_cast<int>(mat.size()) != s) {
        throw ContractError("MriCoupling " + name + ": bad " + label + " shape");
      }
      for (int i = 0; i < s; ++i) {
        if (static_cast<int>(mat[i].size()) != s) {
          throw ContractError("MriCoupling " + name + ": bad " + label + " row");
        }
        for (int j = i; j < s; ++j) {
          const bool diag_ok = implicit_part && j == i &&
                               stage_kind[i] == StageKind::ImplicitSolve;
          if (mat[i][j] != 0.0 && !diag_ok) {
            throw ContractError("MriCoupling " + name + ": " + label +
                                " not lower triangular at stage " +
                                std::to_string(i));
          }
        }
      }
    }
  };
  check_shape(gamma, true, "gamma");
  check_shape(omega, false, "omega");

  gbar = average_matrices(gamma, s);
  wbar = average_matrices(omega, s);

  const bool has_gamma = uses_implicit();
  bool has_omega = false;
  for (const auto& mat : omega)
    for (const auto& row : mat)
      for (double v : row)
        if (v != 0.0) { has_omega = true; }

  for (int i = 1; i < s; ++i) {
    const double dc = c[i] - c[i - 1];
    if (stage_kind[i] == StageKind::FastIvp) {
      if (dc <= 0.0) {
        throw ContractError("MriCoupling " + name + ": fast-ivp stage " +
                            std::to_string(i) + " has dc <= 0");
      }
    } else {
      if (dc > kConsistencyTol) {
        throw ContractError("MriCoupling " + name + ": stage " +
                            std::to_string(i) + " solves/updates with dc > 0");
      }
      if (stage_kind[i] == StageKind::ImplicitSolve && gbar[i][i] == 0.0) {
        throw ContractError("MriCoupling " + name + ": implicit stage " +
                            std::to_string(i) + " has zero diagonal");
      }
    }
    // Forcing consistency: the tau-integral of each used family's row
    // reproduces dc_i; higher-degree rows integrate to zero.
    auto check_rows = [&](const std::vector<std::vector<std::vector<double>>>& mats,
                          bool used, const char* label) {
      if (!used) { return; }
      double bar_sum = 0.0;
      for (std::size_t k = 0; k < mats.size(); ++k) {
        double rk = 0.0;
        for (int j = 0; j < s; ++j) { rk += mats[k][i][j]; }
        bar_sum += rk / static_cast<double>(k + 1);
        if (k >= 1 && std::fabs(rk) > kConsistencyTol) {
          throw ContractError("MriCoupling " + name + ": degree-" +
                              std::to_string(k) + " " + label +
                              " row sum nonzero at stage " + std::to_string(i));
        }
      }
      if (std::fabs(bar_sum - dc) > kConsistencyTol) {
        throw ContractError("MriCoupling " + name + ": " + label +
                            " row integral != dc at stage " + std::to_string(i));
      }
    };
    check_rows(gamma, has_gamma, "gamma");
    check_rows(omega, has_omega, "omega");
  }

  fI_referenced.assign(s, false);
  std::vector<bool> fE_referenced(s, false);
  for (const auto& mat : gamma)
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < i; ++j)
        if (mat[i][j] != 0.0) { fI_referenced[j] = true; }
  for (const auto& mat : omega)
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < i; ++j)
        if (mat[i][j] != 0.0) { fE_referenced[j] = true; }

  // Slow explicit evaluation schedule: referenced stages, plus the
  // final stage for fully explicit methods (whose cost tables charge
  // one evaluation per abscissa including the step end).
  eval_explicit_at = fE_referenced;
  if (is_fully_explicit() && has_omega) { eval_explicit_at[s - 1] = true; }
}

namespace {

ButcherTable induced_table(const MriCoupling& cp,
                           const std::vector<std::vector<double>>& bar,
                           TableKind kind, const std::string& suffix)
{
  const int s = cp.stages;
  ButcherTable t;
  t.name = cp.name + suffix;
  t.stages = s;
  t.order = cp.order;
  t.kind = kind;
  t.c = cp.c;
  t.A.assign(s, std::vector<double>(s, 0.0));
  for (int i = 1; i < s; ++i) {
    for (int j = 0; j < s; ++j) { t.A[i][j] = t.A[i - 1][j] + bar[i][j]; }
  }
  t.b = t.A[s - 1];
  return t;
}

} // namespace

ButcherTable MriCoupling::induced_explicit_table() const
{
  return induced_table(*this, wbar, TableKind::Explicit, "-induced-explicit");
}

ButcherTable MriCoupling::induced_implicit_table() const
{
  return induced_table(*this, gbar, TableKind::DiagonallyImplicit,
                       "-induced-implicit");
}

MriCoupling coupling_from_mis(const std::string& name,
                              const ButcherTable& base, int order,
                              bool split_widest_stage)
{
  base.validate();
  const int sb = base.stages;
  MriCoupling cp;
  cp.name = name;
  cp.order = order;
  cp.stages = sb + 1;
  cp.c = base.c;
  cp.c.push_back(1.0);
  cp.stage_kind.assign(cp.stages, StageKind::FastIvp);
  cp.stage_kind[0] = StageKind::ExplicitUpdate;
  cp.omega.assign(1, std::vector<std::vector<double>>(
                         cp.stages, std::vector<double>(cp.stages, 0.0)));
  auto& W = cp.omega[0];
  for (int i = 1; i < sb; ++i) {
    for (int j = 0; j < sb; ++j) { W[i][j] = base.A[i][j] - base.A[i - 1][j]; }
  }
  for (int j = 0; j < sb; ++j) { W[sb][j] = base.b[j] - base.A[sb - 1][j]; }

  if (split_widest_stage) {
    int widest = 1;
    double width = 0.0;
    for (int i = 1; i < cp.stages; ++i) {
      const double dc = cp.c[i] - cp.c[i - 1];
      if (dc > width) {
        width = dc;
        widest = i;
      }
    }
    const double mid = 0.5 * (cp.c[widest - 1] + cp.c[widest]);
    MriCoupling sp;
    sp.name = name;
    sp.order = order;
    sp.stages = cp.stages + 1;
    sp.c.assign(sp.stages, 0.0);
    sp.stage_kind.assign(sp.stages, StageKind::FastIvp);
    sp.stage_kind[0] = StageKind::ExplicitUpdate;
    sp.omega.assign(1, std::vector<std::vector<double>>(
                           sp.stages, std::vector<double>(sp.stages, 0.0)));
    for (int i = 0; i < cp.stages; ++i) {
      const int ti = (i < widest) ? i : i + 1;
      sp.c[ti] = cp.c[i];
      // half the row coefficients per half interval keeps the forcing
      // function identical across the split
      const double scale = (i == widest) ? 0.5 : 1.0;
      for (int j = 0; j < cp.stages; ++j) {
        const int tj = (j < widest) ? j : j + 1;
        sp.omega[0][ti][tj] = scale * cp.omega[0][i][j];
        if (i == widest) { sp.omega[0][ti - 1][tj] = scale * cp.omega[0][i][j]; }
      }
    }
    sp.c[widest] = mid;
    sp.finalize();
    return sp;
  }

  cp.finalize();
  return cp;
}

ForcingPolynomial build_forcing(const MriCoupling& coupling, int stage,
                                const std::vector<StateVector>& fI_history,
                                const std::vector<StateVector>& fE_history)
{
  const int s = coupling.stages;
  if (stage < 1 || stage >= s) {
    throw ContractError("build_forcing: stage out of range");
  }
  const double dc = coupling.c[stage] - coupling.c[stage - 1];
  if (dc <= 0.0) {
    throw ContractError("build_forcing: stage has dc <= 0");
  }
  std::size_t dim = 0;
  for (const auto& v : fI_history) { dim = std::max(dim, v.size()); }
  for (const auto& v : fE_history) { dim = std::max(dim, v.size()); }

  ForcingPolynomial r;
  const int d = coupling.degrees();
  r.coeffs.assign(std::max(d, 1), StateVector(dim));
  auto accumulate = [&](const std::vector<std::vector<std::vector<double>>>& mats,
                        const std::vector<StateVector>& hist, const char* label) {
    for (std::size_t k = 0; k < mats.size(); ++k) {
      for (int j = 0; j < stage; ++j) {
        const double coef = mats[k][stage][j];
        if (coef == 0.0) { continue; }
        if (hist[j].size() != dim) {
          throw IntegrationError(std::string("build_forcing: missing ") +
                                  label + " value at stage " +
                                  std::to_string(j), stage);
        }
        axpy_into(r.coeffs[k], coef / dc, hist[j]);
      }
    }
  };
  accumulate(coupling.gamma, fI_history, "implicit");
  accumulate(coupling.omega, fE_history, "explicit");
  return r;
}

namespace {

// The operator fed through the omega couplings. For IMEX couplings it
// is f_explicit; a fully explicit coupling treats the whole slow scale
// (implicit + explicit callbacks combined) through omega.
RhsFn resolve_slow_explicit(const MriCoupling& coupling,
                            const PartitionedSystem& system)
{
  if (!coupling.is_fully_explicit()) { return system.f_explicit; }
  if (system.f_implicit && system.f_explicit) {
    const PartitionedSystem* sys = &system;
    return [sys](double t, const StateVector& y) { return sys->slow_rhs(t, y); };
  }
  return system.f_explicit ? system.f_explicit : system.f_implicit;
}

} // namespace

StateVector mri_step(const MriMethodConfig& config,
                     const PartitionedSystem& system,
                     const ImplicitStageSolver& solver, double t,
                     const StateVector& y, double H, EvalCounters& counters)
{
  if (H <= 0.0) { throw ContractError("mri_step: H must be positive"); }
  const MriCoupling& cp = config.coupling;
  const int s = cp.stages;

  const bool needs_implicit = cp.uses_implicit();
  if (needs_implicit && !system.f_implicit) {
    throw ContractError("mri_step: coupling needs f_implicit");
  }
  RhsFn slow_explicit = resolve_slow_explicit(cp, system);

  std::vector<StateVector> fI(s), fE(s);
  auto eval_slow_at = [&](int j, const StateVector& Yj) {
    if (slow_explicit && cp.eval_explicit_at[j]) {
      fE[j] = slow_explicit(t + cp.c[j] * H, Yj);
      ++counters.n_explicit_evals;
    }
    if (needs_implicit && cp.fI_referenced[j] &&
        cp.stage_kind[j] != StageKind::ImplicitSolve) {
      fI[j] = system.f_implicit(t + cp.c[j] * H, Yj);
      ++counters.n_implicit_evals;
    }
  };

  StateVector Y = y;
  eval_slow_at(0, Y);

  for (int i = 1; i < s; ++i) {
    const double dc = cp.c[i] - cp.c[i - 1];
    const double t_stage = t + cp.c[i] * H;

    if (cp.stage_kind[i] == StageKind::FastIvp) {
      ForcingPolynomial r = build_forcing(cp, i, fI, fE);
      const double span = dc * H;
      const int n_sub = std::max(
          1L, std::lround(static_cast<double>(config.m) * dc));
      const double t_start = t + cp.c[i - 1] * H;
      RhsFn fast_rhs = [&](double theta, const StateVector& v) {
        const double tau = (theta - t_start) / span;
        StateVector out =
            system.f_fast ? system.f_fast(theta, v) : StateVector(v.size());
        StateVector forcing = r.evaluate(tau);
        axpy_into(out, 1.0, forcing);
        return out;
      };
      std::size_t* fast_counter = system.f_fast ? &counters.n_fast_evals : nullptr;
      const double h_sub = span / n_sub;
      for (int sub = 0; sub < n_sub; ++sub) {
        Y = erk_step(config.fast_table, fast_rhs, t_start + sub * h_sub, Y,
                     h_sub, fast_counter);
      }
      ++counters.n_fast_ivps;
    } else {
      StateVector known = Y;
      for (int j = 0; j < i; ++j) {
        if (cp.gbar[i][j] != 0.0) { axpy_into(known, H * cp.gbar[i][j], fI[j]); }
        if (cp.wbar[i][j] != 0.0) { axpy_into(known, H * cp.wbar[i][j], fE[j]); }
      }
      if (cp.stage_kind[i] == StageKind::ImplicitSolve) {
        if (!all_finite(known)) {
          throw IntegrationError("mri_step: non-finite stage data at stage " +
                                     std::to_string(i),
                                 i);
        }
        StageResidualProblem stage_problem;
        stage_problem.gamma = H * cp.gbar[i][i];
        stage_problem.t_stage = t_stage;
        stage_problem.known = known;
        stage_problem.f_implicit = system.f_implicit;
        stage_problem.jv_implicit = system.jv_implicit;

        Preconditioner precond;
        const Preconditioner* precond_ptr = nullptr;
        if (solver.make_preconditioner) {
          precond = solver.make_preconditioner(stage_problem.gamma);
          precond_ptr = &precond;
        }
        const StateVector* weights =
            solver.weights.size() == y.size() ? &solver.weights : nullptr;
        NewtonResult res = newton_solve(stage_problem, known, solver.newton,
                                        solver.gmres, precond_ptr, weights,
                                        &counters);
        ++counters.n_implicit_solves;
        if (!res.converged) {
          throw IntegrationError(
              "mri_step: nonlinear solve failed at stage " + std::to_string(i) +
                  " (residual " + std::to_string(res.residual_wrms) + " after " +
                  std::to_string(res.iterations) + " iterations)",
              i);
        }
        Y = res.y;
        // converged stage implicit RHS, recovered without another eval
        fI[i] = Y;
        axpy_into(fI[i], -1.0, known);
        for (auto& v : fI[i]) { v /= stage_problem.gamma; }
      } else {
        Y = known;
      }
    }

    if (!all_finite(Y)) {
      throw IntegrationError("mri_step: non-finite state at stage " +
                                 std::to_string(i),
                             i);
    }
    eval_slow_at(i, Y);
  }
  return Y;
}

StateVector ark_imex_step(const ArkPair& pair, const PartitionedSystem& system,
                          const ImplicitStageSolver& solver, double t,
                          const StateVector& y, double H,
                          EvalCounters& counters)
{
  if (H <= 0.0) { throw ContractError("ark_imex_step: H must be positive"); }
  if (!system.f_implicit) {
    throw ContractError("ark_imex_step: f_implicit required");
  }
  const ButcherTable& AE = pair.explicit_table;
  const ButcherTable& AI = pair.implicit_table;
  const int s = AE.stages;

  // single-rate usage: chemistry and advection share the explicit part
  RhsFn combined_explicit = [&system](double tt, const StateVector& yy) {
    StateVector out =
        system.f_fast ? system.f_fast(tt, yy) : StateVector(yy.size());
    if (system.f_explicit) { axpy_into(out, 1.0, system.f_explicit(tt, yy)); }
    return out;
  };

  std::vector<StateVector> fE(s), fI(s);
  fE[0] = combined_explicit(t, y);
  ++counters.n_explicit_evals;
  fI[0] = system.f_implicit(t, y);
  ++counters.n_implicit_evals;

  StateVector Y = y;
  for (int i = 1; i < s; ++i) {
    StateVector known = y;
    for (int j = 0; j < i; ++j) {
      if (AE.A[i][j] != 0.0) { axpy_into(known, H * AE.A[i][j], fE[j]); }
      if (AI.A[i][j] != 0.0) { axpy_into(known, H * AI.A[i][j], fI[j]); }
    }
    const double t_stage = t + AE.c[i] * H;
    if (!all_finite(known)) {
      throw IntegrationError("ark_imex_step: non-finite stage data at stage " +
                                 std::to_string(i),
                             i);
    }

    StageResidualProblem stage_problem;
    stage_problem.gamma = H * AI.A[i][i];
    stage_problem.t_stage = t_stage;
    stage_problem.known = known;
    stage_problem.f_implicit = system.f_implicit;
    stage_problem.jv_implicit = system.jv_implicit;

    Preconditioner precond;
    const Preconditioner* precond_ptr = nullptr;
    if (solver.make_preconditioner) {
      precond = solver.make_preconditioner(stage_problem.gamma);
      precond_ptr = &precond;
    }
    const StateVector* weights =
        solver.weights.size() == y.size() ? &solver.weights : nullptr;
    NewtonResult res = newton_solve(stage_problem, known, solver.newton,
                                    solver.gmres, precond_ptr, weights,
                                    &counters);
    ++counters.n_implicit_solves;
    if (!res.converged) {
      throw IntegrationError(
          "ark_imex_step: nonlinear solve failed at stage " + std::to_string(i),
          i);
    }
    Y = res.y;
    fI[i] = Y;
    axpy_into(fI[i], -1.0, known);
    for (auto& v : fI[i]) { v /= stage_problem.gamma; }
    fE[i] = combined_explicit(t_stage, Y);
    ++counters.n_explicit_evals;
  }

  StateVector out = y;
  for (int j = 0; j < s; ++j) {
    const double b = AE.b[j];
    if (b != 0.0) {
      axpy_into(out, H * b, fE[j]);
      axpy_into(out, H * b, fI[j]);
    }
  }
  if (!all_finite(out)) {
    throw IntegrationError("ark_imex_step: non-finite result", s);
  }
  return out;
}

StateVector mri_integrate(const MriMethodConfig& config,
                          const PartitionedSystem& system,
                          const ImplicitStageSolver& solver, double t0,
                          double tf, double H, const StateVector& y0,
                          EvalCounters& counters)
{
  if (tf <= t0) { throw ContractError("mri_integrate: tf must exceed t0"); }
  const long n_steps = static_cast<long>(std::ceil((tf - t0) / H - 1e-12));
  StateVector y = y0;
  double t = t0;
  for (long i = 0; i < n_steps; ++i) {
    const double step = (i == n_steps - 1) ? (tf - t) : H;
    y = mri_step(config, system, solver, t, y, step, counters);
    t = (i == n_steps - 1) ? tf : t0 + static_cast<double>(i + 1) * H;
  }
  return y;
}

StateVector ark_imex_integrate(const ArkPair& pair,
                               const PartitionedSystem& system,
                               const ImplicitStageSolver& solver, double t0,
                               double tf, double H, const StateVector& y0,
                               EvalCounters& counters)
{
  if (tf <= t0) { throw ContractError("ark_imex_integrate: tf must exceed t0"); }
  const long n_steps = static_cast<long>(std::ceil((tf - t0) / H - 1e-12));
  StateVector y = y0;
  double t = t0;
  for (long i = 0; i < n_steps; ++i) {
    const double step = (i == n_steps - 1) ? (tf - t) : H;
    y = ark_imex_step(pair, system, solver, t, y, step, counters);
    t = (i == n_steps - 1) ? tf : t0 + static_cast<double>(i + 1) * H;
  }
  return y;
}

void export_coupling(const MriCoupling& coupling, std::ostream& out)
{
  out.precision(17);
  out << "mri-coupling v1 " << coupling.name << " s=" << coupling.stages
      << " degrees=" << coupling.degrees() << '\n';
  for (int i = 0; i < coupling.stages; ++i) {
    out << (i ? " " : "") << coupling.c[i];
  }
  out << '\n';
  for (int i = 0; i < coupling.stages; ++i) {
    out << (i ? " " : "") << kind_token(coupling.stage_kind[i]);
  }
  out << '\n';
  auto dump = [&](const std::vector<std::vector<std::vector<double>>>& mats) {
    const int d = coupling.degrees();
    for (int k = 0; k < d; ++k) {
      for (int i = 0; i < coupling.stages; ++i) {
        for (int j = 0; j < coupling.stages; ++j) {
          double v = 0.0;
          if (k < static_cast<int>(mats.size())) { v = mats[k][i][j]; }
          out << (j ? " " : "") << v;
        }
        out << '\n';
      }
    }
  };
  dump(coupling.gamma);
  dump(coupling.omega);
}

MriCoupling import_coupling(std::istream& in)
{
  std::string magic, version, name, s_field, d_field;
  in >> magic >> version >> name >> s_field >> d_field;
  if (magic != "mri-coupling" || version != "v1" ||
      s_field.rfind("s=", 0) != 0 || d_field.rfind("degrees=", 0) != 0) {
    throw ContractError("import_coupling: bad header");
  }
  MriCoupling cp;
  cp.name = name;
  cp.stages = std::stoi(s_field.substr(2));
  const int d = std::stoi(d_field.substr(8));
  if (cp.stages < 2 || d < 1) {
    throw ContractError("import_coupling: bad dimensions");
  }
  cp.c.resize(cp.stages);
  for (int i = 0; i < cp.stages; ++i) { in >> cp.c[i]; }
  cp.stage_kind.resize(cp.stages);
  for (int i = 0; i < cp.stages; ++i) {
    std::string tok;
    in >> tok;
    cp.stage_kind[i] = kind_from_token(tok);
  }
  auto read_mats = [&](std::vector<std::vector<std::vector<double>>>& mats) {
    mats.assign(d, std::vector<std::vector<double>>(
                       cp.stages, std::vector<double>(cp.stages, 0.0)));
    for (int k = 0; k < d; ++k)
      for (int i = 0; i < cp.stages; ++i)
        for (int j = 0; j < cp.stages; ++j) in >> mats[k][i][j];
  };
  read_mats(cp.gamma);
  read_mats(cp.omega);
  if (!in) { throw ContractError("import_coupling: truncated input"); }
  cp.order = 0;
  cp.finalize();
  return cp;
}

} // namespace multirate
