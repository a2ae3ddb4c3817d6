// SPDX-License-Identifier: BSD-3-Clause

#include <doctest.h>

#include <cmath>

#include "multirate/harness.hpp"
#include "multirate/models.hpp"
#include "multirate/sdc.hpp"
#include "support/oracles.hpp"

using namespace multirate;

TEST_CASE("lobatto nodes, 3 points")
{
  QuadratureNodes q = lobatto_nodes(3);
  CHECK(q.nodes[0] == 0.0);
  CHECK(q.nodes[1] == doctest::Approx(0.5));
  CHECK(q.nodes[2] == 1.0);
  CHECK(q.weights[0] == doctest::Approx(1.0 / 6.0));
  CHECK(q.weights[1] == doctest::Approx(2.0 / 3.0));
  CHECK(q.weights[2] == doctest::Approx(1.0 / 6.0));
  // hand-computed S rows for the quadratic basis
  CHECK(q.S[0][0] == doctest::Approx(5.0 / 24.0));
  CHECK(q.S[0][1] == doctest::Approx(1.0 / 3.0));
  CHECK(q.S[0][2] == doctest::Approx(-1.0 / 24.0));
  CHECK(q.S[1][0] == doctest::Approx(-1.0 / 24.0));
  CHECK(q.S[1][1] == doctest::Approx(1.0 / 3.0));
  CHECK(q.S[1][2] == doctest::Approx(5.0 / 24.0));
}

TEST_CASE("lobatto nodes, 5 points, against the bisection oracle")
{
  QuadratureNodes q = lobatto_nodes(5);
  std::vector<double> oracle = test_support::lobatto_nodes_by_bisection(5);
  REQUIRE(oracle.size() == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(q.nodes[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
  }
  // symmetry about 1/2 and unit weight sum
  CHECK(q.nodes[1] + q.nodes[3] == doctest::Approx(1.0));
  double wsum = 0.0;
  for (double w : q.weights) { wsum += w; }
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(lobatto_nodes(4), ContractError);
}

TEST_CASE("quadrature exactness")
{
  for (int n : {3, 5}) {
    QuadratureNodes q = lobatto_nodes(n);
    // S row sums integrate constants exactly
    for (int r = 0; r < n - 1; ++r) {
      double row = 0.0;
      for (int j = 0; j < n; ++j) { row += q.S[r][j]; }
      CHECK(std::fabs(row - (q.nodes[r + 1] - q.nodes[r])) <= 1e-14);
    }
    // the interpolatory subinterval rows are exact through degree n-1
    for (int d = 0; d <= n - 1; ++d) {
      for (int r = 0; r < n - 1; ++r) {
        double approx = 0.0;
        for (int j = 0; j < n; ++j) {
          approx += q.S[r][j] * std::pow(q.nodes[j], d);
        }
        const double exact = (std::pow(q.nodes[r + 1], d + 1) -
                              std::pow(q.nodes[r], d + 1)) /
                             (d + 1);
        CHECK(std::fabs(approx - exact) <= 1e-13);
      }
    }
    // the Lobatto weights are exact through degree 2n-3 on [0,1]
    for (int d = 0; d <= 2 * n - 3; ++d) {
      double approx = 0.0;
      for (int j = 0; j < n; ++j) {
        approx += q.weights[j] * std::pow(q.nodes[j], d);
      }
      CHECK(std::fabs(approx - 1.0 / (d + 1)) <= 1e-13);
    }
  }
}

TEST_CASE("scheme construction and the fine-node count formula")
{
  CHECK(build_scheme(3, 3, 2, 4).n_fine == 9);
  CHECK(build_scheme(3, 3, 8, 4).n_fine == 33);
  CHECK(build_scheme(3, 5, 2, 4).n_fine == 17);
  CHECK_THROWS_AS(build_scheme(4, 3, 2, 4), ContractError);
  CHECK_THROWS_AS(build_scheme(3, 3, 0, 4), ContractError);

  // every coarse node coincides with a fine node
  MrsdcScheme s = build_scheme(3, 5, 2, 4);
  for (int p = 0; p < s.X; ++p) {
    bool found = false;
    for (int q = 0; q < s.n_fine; ++q) {
      if (s.coarse_index_of_fine[q] == p) { found = true; }
    }
    CHECK(found);
  }
  // left-closest map is monotone and ties resolve to the coincident node
  for (int q = 0; q < s.n_fine; ++q) {
    const int p = s.coarse_of_fine[q];
    CHECK(s.coarse.nodes[p] <= s.fine_nodes[q] + 1e-12);
    if (p + 1 < s.X) { CHECK(s.fine_nodes[q] < s.coarse.nodes[p + 1] + 1e-12); }
  }
}

TEST_CASE("sweep leaves zero right-hand sides unchanged")
{
  MrsdcScheme scheme = build_scheme(3, 3, 2, 4);
  RhsFn zero = [](double, const StateVector& y) { return StateVector(y.size()); };
  std::vector<StateVector> states(scheme.n_fine, StateVector{1.0, -2.0});
  std::vector<StateVector> fs(scheme.X, StateVector(2, 0.0));
  std::vector<StateVector> ff(scheme.n_fine, StateVector(2, 0.0));
  mrsdc_sweep(scheme, zero, zero, 0.0, 0.5, states, fs, ff);
  for (const auto& s : states) { CHECK(s == StateVector{1.0, -2.0}); }
}

TEST_CASE("one sweep from a constant guess is exact for y' = 1")
{
  QuadratureNodes nodes = lobatto_nodes(3);
  RhsFn f = [](double, const StateVector& y) {
    return StateVector(y.size(), 1.0);
  };
  StateVector y = sdc_step(nodes, f, 0.0, StateVector{0.0}, 0.8, 1);
  CHECK(y[0] == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("single-rate sweep fixes the collocation solution")
{
  // y' = M y on 3-point Lobatto nodes; dense collocation by LU oracle
  const test_support::Matrix M = {{-1.0, 0.6}, {0.2, -0.4}};
  const double H = 0.7;
  QuadratureNodes nodes = lobatto_nodes(3);
  std::vector<double> flat = test_support::collocation_solution(
      nodes.nodes, M, H, {1.0, 0.5});

  RhsFn f = [&M](double, const StateVector& y) {
    return StateVector{M[0][0] * y[0] + M[0][1] * y[1],
                       M[1][0] * y[0] + M[1][1] * y[1]};
  };
  // run one sweep by hand over the collocation node values
  std::vector<StateVector> states(3);
  std::vector<StateVector> cache(3);
  for (int q = 0; q < 3; ++q) {
    states[q] = StateVector{flat[2 * q], flat[2 * q + 1]};
    cache[q] = f(0.0, states[q]);
  }
  const std::vector<StateVector> before = states;
  const std::vector<StateVector> f_old = cache;
  for (int q = 0; q < 2; ++q) {
    const double hq = (nodes.nodes[q + 1] - nodes.nodes[q]) * H;
    StateVector ynew = states[q];
    for (int j = 0; j < 3; ++j) { axpy_into(ynew, H * nodes.S[q][j], f_old[j]); }
    axpy_into(ynew, hq, cache[q]);
    axpy_into(ynew, -hq, f_old[q]);
    states[q + 1] = ynew;
    cache[q + 1] = f(0.0, states[q + 1]);
  }
  for (int q = 0; q < 3; ++q) {
    StateVector d = states[q];
    axpy_into(d, -1.0, before[q]);
    CHECK(max_norm(d) <= 1e-12);
  }
}

TEST_CASE("sdc_step trivial and order ladder")
{
  QuadratureNodes nodes = lobatto_nodes(3);
  SUBCASE("zero field returns y")
  {
    RhsFn f = [](double, const StateVector& y) { return StateVector(y.size()); };
    StateVector y{2.5};
    CHECK(sdc_step(nodes, f, 0.0, y, 0.3, 4) == y);
  }
  SUBCASE("sweep count k gives observed order >= k - 0.3, capped at 4")
  {
    RhsFn f = [](double t, const StateVector& y) {
      return StateVector{-y[0] + std::sin(2.0 * t)};
    };
    // reference by fine classic-rk4... use many sweeps and tiny steps
    StateVector ref = sdc_integrate(nodes, f, 0.0, 1.0, 1.0 / 4096.0,
                                    StateVector{1.0}, 6);
    for (int k = 1; k <= 4; ++k) {
      std::vector<std::pair<double, double>> points;
      for (double H : {0.125, 0.0625, 0.03125, 0.015625, 0.0078125}) {
        StateVector y = sdc_integrate(nodes, f, 0.0, 1.0, H, StateVector{1.0}, k);
        const double err = std::fabs(y[0] - ref[0]);
        if (err > 1e-13) { points.push_back({H, err}); }
      }
      const double slope = fitted_slope(points);
      INFO("sweeps ", k, " slope ", slope);
      CHECK(slope >= k - 0.3);
    }
  }
}

TEST_CASE("mrsdc_step trivial and counters")
{
  MrsdcScheme scheme = build_scheme(3, 3, 2, 4);
  PartitionedSystem sys;
  sys.dimension = 2;
  sys.f_fast = [](double, const StateVector& y) { return StateVector(y.size()); };
  sys.f_explicit = [](double, const StateVector& y) {
    return StateVector(y.size());
  };
  EvalCounters counters;
  StateVector y{1.0, 2.0};
  StateVector out = mrsdc_step(scheme, sys, 0.0, y, 0.4, counters);
  CHECK(out == y);
  // initial fill: fast at 9 fine nodes, slow at 3 coarse nodes; each of
  // 4 sweeps re-evaluates 8 fine nodes and the 2 moving coarse nodes
  CHECK(counters.n_fast_evals == 9 + 4 * 8);
  CHECK(counters.n_explicit_evals == 3 + 4 * 2);
}

TEST_CASE("mrsdc two-rate collocation fixed point")
{
  // linear problem with distinct fast and slow operators
  const test_support::Matrix Mf = {{0.0, 2.0}, {-2.0, 0.0}};
  const test_support::Matrix Ms = {{-0.5, 0.1}, {0.3, -0.2}};
  const double H = 0.4;
  MrsdcScheme scheme = build_scheme(3, 3, 2, 1);

  // dense fixed point of the two-rate sweep: for each subinterval,
  // y_{q+1} = y_q + H (fine row . Mf Y) + H (coarse row . Ms Ycoarse)
  const int nq = scheme.n_fine;
  const int nd = 2 * nq;
  test_support::Matrix A(nd, std::vector<double>(nd, 0.0));
  std::vector<double> rhs(nd, 0.0);
  const std::vector<double> y0 = {1.0, 0.5};
  A[0][0] = 1.0;
  A[1][1] = 1.0;
  rhs[0] = y0[0];
  rhs[1] = y0[1];
  for (int q = 0; q < nq - 1; ++q) {
    for (int a = 0; a < 2; ++a) {
      const int row = (q + 1) * 2 + a;
      A[row][(q + 1) * 2 + a] += 1.0;
      A[row][q * 2 + a] -= 1.0;
      const auto& frow = scheme.fine_row[q];
      const int off = scheme.application_offset[q];
      for (std::size_t j = 0; j < frow.size(); ++j) {
        for (int b = 0; b < 2; ++b) {
          A[row][(off + j) * 2 + b] -= H * frow[j] * Mf[a][b];
        }
      }
      const auto& crow = scheme.coarse_row[q];
      for (std::size_t j = 0; j < crow.size(); ++j) {
        // coarse node j coincides with some fine node
        int fq = -1;
        for (int qq = 0; qq < nq; ++qq) {
          if (scheme.coarse_index_of_fine[qq] == static_cast<int>(j)) { fq = qq; }
        }
        REQUIRE(fq >= 0);
        for (int b = 0; b < 2; ++b) {
          A[row][fq * 2 + b] -= H * crow[j] * Ms[a][b];
        }
      }
    }
  }
  std::vector<double> flat = test_support::dense_solve(A, rhs);

  RhsFn f_slow = [&Ms](double, const StateVector& y) {
    return StateVector{Ms[0][0] * y[0] + Ms[0][1] * y[1],
                       Ms[1][0] * y[0] + Ms[1][1] * y[1]};
  };
  RhsFn f_fast = [&Mf](double, const StateVector& y) {
    return StateVector{Mf[0][0] * y[0] + Mf[0][1] * y[1],
                       Mf[1][0] * y[0] + Mf[1][1] * y[1]};
  };
  std::vector<StateVector> states(nq);
  std::vector<StateVector> ff(nq), fs(scheme.X);
  for (int q = 0; q < nq; ++q) {
    states[q] = StateVector{flat[2 * q], flat[2 * q + 1]};
    ff[q] = f_fast(0.0, states[q]);
  }
  for (int p = 0; p < scheme.X; ++p) {
    int fq = 0;
    for (int qq = 0; qq < nq; ++qq) {
      if (scheme.coarse_index_of_fine[qq] == p) { fq = qq; }
    }
    fs[p] = f_slow(0.0, states[fq]);
  }
  const std::vector<StateVector> before = states;
  mrsdc_sweep(scheme, f_slow, f_fast, 0.0, H, states, fs, ff);
  for (int q = 0; q < nq; ++q) {
    StateVector d = states[q];
    axpy_into(d, -1.0, before[q]);
    CHECK(max_norm(d) <= 1e-12);
  }
}

TEST_CASE("mrsdc-332 reaches fourth order on the linear two-rate problem")
{
  LinearTwoRateOde ode = LinearTwoRateOde::default_problem();
  PartitionedSystem sys = ode.system();
  MrsdcScheme scheme = build_scheme(3, 3, 2, 4);
  StateVector exact = analytic_solution(ode, 1.0);

  std::vector<std::pair<double, double>> points;
  for (double H : {0.2, 0.1, 0.05, 0.025, 0.0125}) {
    EvalCounters counters;
    StateVector y = mrsdc_integrate(scheme, sys, 0.0, 1.0, H, ode.y0, counters);
    axpy_into(y, -1.0, exact);
    const double err = max_norm(y);
    if (err > 1e-13) { points.push_back({H, err}); }
  }
  const double slope = fitted_slope(points);
  INFO("slope ", slope);
  CHECK(slope >= 3.6);
  CHECK(slope <= 4.6);
}

TEST_CASE("sweeps are deterministic")
{
  LinearTwoRateOde ode = LinearTwoRateOde::default_problem();
  PartitionedSystem sys = ode.system();
  MrsdcScheme scheme = build_scheme(3, 3, 2, 4);
  EvalCounters c1, c2;
  StateVector a = mrsdc_integrate(scheme, sys, 0.0, 1.0, 0.05, ode.y0, c1);
  StateVector b = mrsdc_integrate(scheme, sys, 0.0, 1.0, 0.05, ode.y0, c2);
  CHECK(a == b); // bitwise
  CHECK(c1.n_fast_evals == c2.n_fast_evals);
}

TEST_CASE("sweep failure carries the node index")
{
  MrsdcScheme scheme = build_scheme(3, 3, 2, 1);
  RhsFn explode = [](double, const StateVector& y) {
    return StateVector{y[0] * 1e300};
  };
  std::vector<StateVector> states(scheme.n_fine, StateVector{1e300});
  std::vector<StateVector> fs(scheme.X, StateVector{1e300});
  std::vector<StateVector> ff(scheme.n_fine, StateVector{1e300});
  bool threw = false;
  try {
    mrsdc_sweep(scheme, explode, explode, 0.0, 1.0, states, fs, ff);
  } catch (const IntegrationError& e) {
    threw = true;
    CHECK(e.stage_index >= 1);
  }
  CHECK(threw);
}
