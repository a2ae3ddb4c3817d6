// SPDX-License-Identifier: BSD-3-Clause

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "multirate/harness.hpp"
#include "multirate/models.hpp"
#include "multirate/mri.hpp"
#include "support/oracles.hpp"

using namespace multirate;

namespace {

ImplicitStageSolver tight_solver()
{
  ImplicitStageSolver s;
  s.newton.tolerance = 1e-13;
  s.newton.max_iters = 30;
  s.gmres.tolerance = 1e-13;
  s.gmres.max_iters = 30;
  return s;
}

} // namespace

TEST_CASE("register_coupling")
{
  SUBCASE("mis-kw3 is explicit with fast-ivp stages and degree-0 forcing")
  {
    MriCoupling cp = register_coupling("mis-kw3");
    CHECK(cp.order == 3);
    CHECK(cp.is_fully_explicit());
    CHECK(cp.degrees() == 1);
    int ivps = 0, evals = 0;
    for (int i = 1; i < cp.stages; ++i) {
      CHECK(cp.stage_kind[i] == StageKind::FastIvp);
      ++ivps;
    }
    for (int i = 0; i < cp.stages; ++i) {
      if (cp.eval_explicit_at[i]) { ++evals; }
    }
    CHECK(ivps == 4);
    CHECK(evals == 4);
    CHECK(cp.c.front() == 0.0);
    CHECK(cp.c.back() == 1.0);
  }
  SUBCASE("imex couplings alternate solves and fast IVPs")
  {
    MriCoupling cp = register_coupling("imex-mri-gark3b");
    CHECK(cp.order == 3);
    CHECK(cp.uses_implicit());
    int solves = 0, ivps = 0, evals = 0;
    for (int i = 1; i < cp.stages; ++i) {
      if (cp.stage_kind[i] == StageKind::ImplicitSolve) { ++solves; }
      if (cp.stage_kind[i] == StageKind::FastIvp) { ++ivps; }
    }
    for (int i = 0; i < cp.stages; ++i) {
      if (cp.eval_explicit_at[i]) { ++evals; }
    }
    CHECK(solves == 3);
    CHECK(ivps == 3);
    CHECK(evals == 4);

    MriCoupling cp4 = register_coupling("imex-mri-gark4");
    solves = ivps = evals = 0;
    for (int i = 1; i < cp4.stages; ++i) {
      if (cp4.stage_kind[i] == StageKind::ImplicitSolve) { ++solves; }
      if (cp4.stage_kind[i] == StageKind::FastIvp) { ++ivps; }
    }
    for (int i = 0; i < cp4.stages; ++i) {
      if (cp4.eval_explicit_at[i]) { ++evals; }
    }
    CHECK(solves == 5);
    CHECK(ivps == 5);
    CHECK(evals == 6);
  }
  SUBCASE("unknown name lists the registry")
  {
    CHECK_THROWS_AS(register_coupling("unknown"), ContractError);
  }
}

TEST_CASE("build_forcing")
{
  MriCoupling cp = register_coupling("mis-kw3");
  const int s = cp.stages;

  SUBCASE("zero history gives the zero polynomial")
  {
    std::vector<StateVector> fI(s), fE(s, StateVector(2, 0.0));
    ForcingPolynomial r = build_forcing(cp, 1, fI, fE);
    CHECK(max_norm(r.evaluate(0.3)) == 0.0);
  }
  SUBCASE("single contributing stage gives (omega/dc) * value")
  {
    std::vector<StateVector> fI(s), fE(s, StateVector(1, 0.0));
    fE[0] = StateVector{2.0};
    ForcingPolynomial r = build_forcing(cp, 1, fI, fE);
    const double dc = cp.c[1] - cp.c[0];
    CHECK(r.evaluate(0.5)[0] ==
          doctest::Approx(cp.omega[0][1][0] * 2.0 / dc));
  }
  SUBCASE("constant slow field integrates to H*g over the step")
  {
    // sum over stages of dc_i * integral of r_i equals the full slow
    // increment for a constant field
    const double g = 1.3;
    std::vector<StateVector> fI(s), fE(s, StateVector{g});
    double total = 0.0;
    for (int i = 1; i < s; ++i) {
      const double dc = cp.c[i] - cp.c[i - 1];
      ForcingPolynomial r = build_forcing(cp, i, fI, fE);
      // integrate the polynomial over [0,1] exactly
      double integral = 0.0;
      for (std::size_t k = 0; k < r.coeffs.size(); ++k) {
        integral += r.coeffs[k][0] / static_cast<double>(k + 1);
      }
      total += dc * integral;
    }
    CHECK(total == doctest::Approx(g).epsilon(1e-14));
  }
}

TEST_CASE("mri_step degenerate partitions")
{
  MriMethodConfig mc;
  mc.coupling = register_coupling("mis-kw3");
  mc.fast_table = lookup_table("bogacki-shampine3");
  mc.m = 4;

  PartitionedSystem sys;
  sys.dimension = 2;
  sys.f_fast = [](double, const StateVector& y) { return StateVector(y.size()); };
  sys.f_explicit = [](double, const StateVector& y) {
    return StateVector(y.size());
  };
  EvalCounters counters;
  StateVector y{0.7, -1.3};
  StateVector out = mri_step(mc, sys, tight_solver(), 0.0, y, 0.25, counters);
  CHECK(out == y);
}

TEST_CASE("fast reduction: zero slow parts reproduce the chained inner ERK")
{
  MriMethodConfig mc;
  mc.coupling = register_coupling("mis-kw3");
  mc.fast_table = lookup_table("bogacki-shampine3");
  mc.m = 6;

  LinearTwoRateOde ode = LinearTwoRateOde::default_problem();
  PartitionedSystem sys;
  sys.dimension = 2;
  sys.f_fast = ode.system().f_fast;
  sys.f_explicit = [](double, const StateVector& y) {
    return StateVector(y.size());
  };

  const double H = 0.3;
  EvalCounters counters;
  StateVector via_mri =
      mri_step(mc, sys, tight_solver(), 0.0, ode.y0, H, counters);

  // replay the per-stage substep schedule directly with the inner table
  StateVector y = ode.y0;
  for (int i = 1; i < mc.coupling.stages; ++i) {
    const double dc = mc.coupling.c[i] - mc.coupling.c[i - 1];
    if (dc <= 0.0) { continue; }
    const int n_sub =
        std::max(1L, std::lround(static_cast<double>(mc.m) * dc));
    const double t0 = mc.coupling.c[i - 1] * H;
    const double h = dc * H / n_sub;
    for (int sub = 0; sub < n_sub; ++sub) {
      y = erk_step(mc.fast_table, sys.f_fast, t0 + sub * h, y, h);
    }
  }
  axpy_into(y, -1.0, via_mri);
  CHECK(max_norm(y) <= 1e-14);
}

TEST_CASE("slow reduction: zero fast part reproduces the induced method")
{
  // with f^F = 0 each fast IVP integrates the forcing polynomial
  // exactly, so the step must match the induced additive pair applied
  // directly; 2x2 stages solved in closed form by the oracle
  LinearTwoRateOde ode = LinearTwoRateOde::default_problem();
  const double H = 0.21;

  for (const auto& name : registered_coupling_names()) {
    MriMethodConfig mc;
    mc.coupling = register_coupling(name);
    mc.fast_table = lookup_table("classic-rk4");
    mc.m = 3;

    PartitionedSystem sys;
    sys.dimension = 2;
    sys.f_fast = [](double, const StateVector& y) {
      return StateVector(y.size());
    };
    const bool imex = mc.coupling.uses_implicit();
    Mat2 Mi{}, Me{};
    if (imex) {
      Mi = ode.A_slow_implicit;
      Me = ode.A_slow_explicit;
      sys.f_implicit = ode.system().f_implicit;
      sys.f_explicit = ode.system().f_explicit;
      sys.jv_implicit = ode.system().jv_implicit;
    } else {
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          Me[i][j] = ode.A_slow_implicit[i][j] + ode.A_slow_explicit[i][j];
      sys.f_explicit = [Me](double, const StateVector& y) {
        return StateVector{Me[0][0] * y[0] + Me[0][1] * y[1],
                           Me[1][0] * y[0] + Me[1][1] * y[1]};
      };
    }

    EvalCounters counters;
    StateVector via_mri =
        mri_step(mc, sys, tight_solver(), 0.0, ode.y0, H, counters);

    // direct additive-RK step with the induced tables
    const ButcherTable AE = mc.coupling.induced_explicit_table();
    const ButcherTable AI = mc.coupling.induced_implicit_table();
    const int s = mc.coupling.stages;
    std::vector<StateVector> stages(s);
    auto apply = [](const Mat2& M, const StateVector& y) {
      return StateVector{M[0][0] * y[0] + M[0][1] * y[1],
                         M[1][0] * y[0] + M[1][1] * y[1]};
    };
    for (int i = 0; i < s; ++i) {
      StateVector rhs = ode.y0;
      for (int j = 0; j < i; ++j) {
        if (AE.A[i][j] != 0.0) { axpy_into(rhs, H * AE.A[i][j], apply(Me, stages[j])); }
        if (imex && AI.A[i][j] != 0.0) {
          axpy_into(rhs, H * AI.A[i][j], apply(Mi, stages[j]));
        }
      }
      if (imex && AI.A[i][i] != 0.0) {
        // solve (I - H a_ii Mi) Y = rhs
        const double a = H * AI.A[i][i];
        test_support::Matrix M = {{1.0 - a * Mi[0][0], -a * Mi[0][1]},
                                  {-a * Mi[1][0], 1.0 - a * Mi[1][1]}};
        std::vector<double> sol = test_support::dense_solve(M, {rhs[0], rhs[1]});
        stages[i] = StateVector{sol[0], sol[1]};
      } else {
        stages[i] = rhs;
      }
    }
    StateVector via_ark = stages[s - 1];
    axpy_into(via_ark, -1.0, via_mri);
    INFO(name);
    CHECK(max_norm(via_ark) / max_norm(via_mri) <= 1e-12);
  }
}

TEST_CASE("stage times hit t + c_i H exactly")
{
  MriCoupling cp = register_coupling("mis-kw3");
  MriMethodConfig mc;
  mc.coupling = cp;
  mc.fast_table = lookup_table("bogacki-shampine3");
  mc.m = 2;

  std::vector<double> seen;
  PartitionedSystem sys;
  sys.dimension = 1;
  sys.f_explicit = [&seen](double t, const StateVector& y) {
    seen.push_back(t);
    return StateVector(y.size());
  };
  EvalCounters counters;
  const double t0 = 0.37, H = 0.11;
  mri_step(mc, sys, tight_solver(), t0, StateVector{1.0}, H, counters);

  std::vector<double> expected;
  for (int i = 0; i < cp.stages; ++i) {
    if (cp.eval_explicit_at[i]) { expected.push_back(t0 + cp.c[i] * H); }
  }
  REQUIRE(seen.size() == expected.size());
  for (std::size_t i = 0; i < seen.size(); ++i) {
    CHECK(seen[i] == expected[i]); // bitwise: computed as t + c*H
  }
}

TEST_CASE("per-step operation counts match the method roster")
{
  LinearTwoRateOde ode = LinearTwoRateOde::default_problem();
  PartitionedSystem sys = ode.system();

  SUBCASE("mis-kw3: 4 slow evals and 4 fast IVPs per step")
  {
    // two-way split: whole slow operator treated explicitly
    MriMethodConfig mc;
    mc.coupling = register_coupling("mis-kw3");
    mc.fast_table = lookup_table("bogacki-shampine3");
    mc.m = 4;
    EvalCounters c;
    StateVector y = ode.y0;
    for (int step = 0; step < 3; ++step) {
      EvalCounters before = c;
      y = mri_step(mc, sys, tight_solver(), step * 0.1, y, 0.1, c);
      CHECK(c.n_explicit_evals - before.n_explicit_evals == 4);
      CHECK(c.n_fast_ivps - before.n_fast_ivps == 4);
      CHECK(c.n_implicit_solves - before.n_implicit_solves == 0);
    }
  }
  SUBCASE("imex-mri-gark3b: 4 explicit evals, 3 solves, 3 fast IVPs")
  {
    MriMethodConfig mc;
    mc.coupling = register_coupling("imex-mri-gark3b");
    mc.fast_table = lookup_table("kutta3");
    mc.m = 4;
    EvalCounters c;
    StateVector y = ode.y0;
    for (int step = 0; step < 3; ++step) {
      EvalCounters before = c;
      y = mri_step(mc, sys, tight_solver(), step * 0.1, y, 0.1, c);
      CHECK(c.n_explicit_evals - before.n_explicit_evals == 4);
      CHECK(c.n_implicit_solves - before.n_implicit_solves == 3);
      CHECK(c.n_fast_ivps - before.n_fast_ivps == 3);
    }
  }
  SUBCASE("imex-mri-gark4: 6 explicit evals, 5 solves, 5 fast IVPs")
  {
    MriMethodConfig mc;
    mc.coupling = register_coupling("imex-mri-gark4");
    mc.fast_table = lookup_table("classic-rk4");
    mc.m = 4;
    EvalCounters c;
    StateVector y = ode.y0;
    for (int step = 0; step < 3; ++step) {
      EvalCounters before = c;
      y = mri_step(mc, sys, tight_solver(), step * 0.1, y, 0.1, c);
      CHECK(c.n_explicit_evals - before.n_explicit_evals == 6);
      CHECK(c.n_implicit_solves - before.n_implicit_solves == 5);
      CHECK(c.n_fast_ivps - before.n_fast_ivps == 5);
    }
  }
  SUBCASE("ark-imex: 6 explicit-partition evals and 5 implicit solves")
  {
    ArkPair pair = lookup_ark_pair("ark436-imex-pair");
    EvalCounters c;
    StateVector y = ode.y0;
    for (int step = 0; step < 3; ++step) {
      EvalCounters before = c;
      y = ark_imex_step(pair, sys, tight_solver(), step * 0.05, y, 0.05, c);
      CHECK(c.n_explicit_evals - before.n_explicit_evals == 6);
      CHECK(c.n_implicit_solves - before.n_implicit_solves == 5);
    }
  }
}

TEST_CASE("ark_imex_step reproduces the implicit stability function on lambda y")
{
  const double lambda = -2.4, H = 0.35;
  PartitionedSystem sys;
  sys.dimension = 1;
  sys.f_implicit = [lambda](double, const StateVector& y) {
    return StateVector{lambda * y[0]};
  };
  ArkPair pair = lookup_ark_pair("ark436-imex-pair");
  EvalCounters counters;
  StateVector y =
      ark_imex_step(pair, sys, tight_solver(), 0.0, StateVector{1.0}, H,
                    counters);
  const double R = test_support::stability_function(
      pair.implicit_table.A, pair.implicit_table.b, H * lambda);
  CHECK(y[0] == doctest::Approx(R).epsilon(1e-11));
}

TEST_CASE("empirical order of the registered couplings on the linear oracle")
{
  LinearTwoRateOde ode = LinearTwoRateOde::default_problem();
  PartitionedSystem imex_sys = ode.system();

  // two-way system for the explicit coupling
  PartitionedSystem explicit_sys;
  explicit_sys.dimension = 2;
  explicit_sys.f_fast = imex_sys.f_fast;
  Mat2 Ms{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      Ms[i][j] = ode.A_slow_implicit[i][j] + ode.A_slow_explicit[i][j];
  explicit_sys.f_explicit = [Ms](double, const StateVector& y) {
    return StateVector{Ms[0][0] * y[0] + Ms[0][1] * y[1],
                       Ms[1][0] * y[0] + Ms[1][1] * y[1]};
  };

  StateVector exact = analytic_solution(ode, 1.0);
  struct Case {
    const char* coupling;
    const char* fast;
    double min_slope;
  };
  for (const Case& tc : {Case{"mis-kw3", "bogacki-shampine3", 2.7},
                         Case{"imex-mri-gark3b", "kutta3", 2.7},
                         Case{"imex-mri-gark4", "classic-rk4", 3.6}}) {
    MriMethodConfig mc;
    mc.coupling = register_coupling(tc.coupling);
    mc.fast_table = lookup_table(tc.fast);
    mc.m = 10;
    const PartitionedSystem& sys =
        mc.coupling.uses_implicit() ? imex_sys : explicit_sys;

    std::vector<std::pair<double, double>> points;
    for (double H : {0.2, 0.1, 0.05, 0.025, 0.0125}) {
      EvalCounters counters;
      StateVector y = mri_integrate(mc, sys, tight_solver(), 0.0, 1.0, H,
                                    ode.y0, counters);
      axpy_into(y, -1.0, exact);
      const double err = max_norm(y);
      if (err > 1e-13) { points.push_back({H, err}); }
    }
    const double slope = fitted_slope(points);
    INFO(tc.coupling, " slope ", slope);
    CHECK(slope >= tc.min_slope);
  }
}

TEST_CASE("coupling export/import round trip")
{
  for (const auto& name : registered_coupling_names()) {
    MriCoupling cp = register_coupling(name);
    std::stringstream buf;
    export_coupling(cp, buf);
    MriCoupling back = import_coupling(buf);
    CHECK(back.name == cp.name);
    CHECK(back.stages == cp.stages);
    const int d = cp.degrees();
    REQUIRE(back.degrees() == d);
    for (int i = 0; i < cp.stages; ++i) {
      CHECK(back.c[i] == cp.c[i]); // %.17g round-trips doubles exactly
      CHECK(back.stage_kind[i] == cp.stage_kind[i]);
    }
    for (int k = 0; k < d; ++k) {
      for (int i = 0; i < cp.stages; ++i) {
        for (int j = 0; j < cp.stages; ++j) {
          const double g = k < static_cast<int>(cp.gamma.size())
                               ? cp.gamma[k][i][j] : 0.0;
          const double w = k < static_cast<int>(cp.omega.size())
                               ? cp.omega[k][i][j] : 0.0;
          CHECK(back.gamma[k][i][j] == g);
          CHECK(back.omega[k][i][j] == w);
        }
      }
    }
  }
  std::stringstream bad("not-a-coupling v1 x s=2 degrees=1");
  CHECK_THROWS_AS(import_coupling(bad), ContractError);
}

TEST_CASE("structural violations are rejected at registration")
{
  MriCoupling cp = register_coupling("mis-kw3");
  SUBCASE("decreasing abscissae")
  {
    cp.c[1] = 0.9;
    cp.c[2] = 0.2;
    CHECK_THROWS_AS(cp.finalize(), ContractError);
  }
  SUBCASE("implicit stage with dc > 0")
  {
    cp.stage_kind[2] = StageKind::ImplicitSolve;
    CHECK_THROWS_AS(cp.finalize(), ContractError);
  }
  SUBCASE("row integral must match dc")
  {
    cp.omega[0][1][0] += 0.125;
    CHECK_THROWS_AS(cp.finalize(), ContractError);
  }
}

TEST_CASE("32-step evaluation totals under the once-per-abscissa policy")
{
  // two-way explicit split, 32 slow steps, four fast substeps per step
  LinearTwoRateOde ode = LinearTwoRateOde::default_problem();
  PartitionedSystem sys;
  sys.dimension = 2;
  sys.f_fast = ode.system().f_fast;
  Mat2 Ms{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      Ms[i][j] = ode.A_slow_implicit[i][j] + ode.A_slow_explicit[i][j];
  sys.f_explicit = [Ms](double, const StateVector& y) {
    return StateVector{Ms[0][0] * y[0] + Ms[0][1] * y[1],
                       Ms[1][0] * y[0] + Ms[1][1] * y[1]};
  };

  MriMethodConfig mc;
  mc.coupling = register_coupling("mis-kw3");
  mc.fast_table = lookup_table("bogacki-shampine3");
  mc.m = 4;
  EvalCounters c;
  mri_integrate(mc, sys, ImplicitStageSolver{}, 0.0, 3.2, 0.1, ode.y0, c);

  // 4 slow evaluations and 4 one-substep IVPs of a 3-stage inner method
  CHECK(c.n_explicit_evals == 32 * 4);
  CHECK(c.n_fast_ivps == 32 * 4);
  CHECK(c.n_fast_evals == 32 * 4 * 3);

  // halving H doubles the step count and every counter
  EvalCounters half;
  mri_integrate(mc, sys, ImplicitStageSolver{}, 0.0, 3.2, 0.05, ode.y0, half);
  CHECK(half.n_explicit_evals == 2 * c.n_explicit_evals);
  CHECK(half.n_fast_ivps == 2 * c.n_fast_ivps);
  CHECK(half.n_fast_evals == 2 * c.n_fast_evals);
}

TEST_CASE("build_forcing flags missing slow history as a sequencing error")
{
  MriCoupling cp = register_coupling("mis-kw3");
  std::vector<StateVector> fI(cp.stages), fE(cp.stages); // all empty
  fE[0] = StateVector{1.0};
  // stage 3's forcing references stage 1, which is missing
  CHECK_THROWS_AS(build_forcing(cp, cp.stages - 1, fI, fE), IntegrationError);
}
