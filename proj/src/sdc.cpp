// SPDX-License-Identifier: BSD-3-Clause

#include "multirate/sdc.hpp"

#include <cmath>

namespace multirate {

namespace {

constexpr double kNodeTol = 1.0e-12;

// Monomial coefficients of the Lagrange basis polynomial j over the
// given nodes, then exact integration over [a, b]. Node counts here
// are small (<= 5), so this is well conditioned.
double lagrange_integral(const std::vector<double>& nodes, int j, double a,
                         double b)
{
  const int n = static_cast<int>(nodes.size());
  std::vector<double> poly = {1.0};
  double denom = 1.0;
  for (int m = 0; m < n; ++m) {
    if (m == j) { continue; }
    // multiply by (x - nodes[m])
    std::vector<double> next(poly.size() + 1, 0.0);
    for (std::size_t k = 0; k < poly.size(); ++k) {
      next[k + 1] += poly[k];
      next[k] -= nodes[m] * poly[k];
    }
    poly = std::move(next);
    denom *= nodes[j] - nodes[m];
  }
  double integral = 0.0;
  double bp = b, ap = a;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    integral += poly[k] * (bp - ap) / static_cast<double>(k + 1);
    bp *= b;
    ap *= a;
  }
  return integral / denom;
}

std::vector<std::vector<double>> integration_matrix(
    const std::vector<double>& nodes)
{
  const int n = static_cast<int>(nodes.size());
  std::vector<std::vector<double>> S(n - 1, std::vector<double>(n, 0.0));
  for (int q = 0; q < n - 1; ++q) {
    for (int j = 0; j < n; ++j) {
      S[q][j] = lagrange_integral(nodes, j, nodes[q], nodes[q + 1]);
    }
  }
  return S;
}

} // namespace

QuadratureNodes lobatto_nodes(int n)
{
  QuadratureNodes q;
  q.n = n;
  if (n == 3) {
    q.nodes = {0.0, 0.5, 1.0};
    q.weights = {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0};
  } else if (n == 5) {
    const double r = std::sqrt(3.0 / 7.0);
    q.nodes = {0.0, 0.5 * (1.0 - r), 0.5, 0.5 * (1.0 + r), 1.0};
    q.weights = {1.0 / 20.0, 49.0 / 180.0, 16.0 / 45.0, 49.0 / 180.0,
                 1.0 / 20.0};
  } else {
    throw ContractError("lobatto_nodes: only n = 3 or 5 supported");
  }
  q.S = integration_matrix(q.nodes);
  return q;
}

MrsdcScheme build_scheme(int X, int Y, int Z, int n_sweeps)
{
  if ((X != 3 && X != 5) || (Y != 3 && Y != 5) || Z < 1 || n_sweeps < 1) {
    throw ContractError("build_scheme: need X,Y in {3,5}, Z >= 1, sweeps >= 1");
  }
  MrsdcScheme s;
  s.X = X;
  s.Y = Y;
  s.Z = Z;
  s.n_sweeps = n_sweeps;
  s.coarse = lobatto_nodes(X);
  s.fine_rule = lobatto_nodes(Y);

  // Compose the fine grid, merging duplicate junction nodes.
  std::vector<double> app_start, app_width;
  for (int p = 0; p < X - 1; ++p) {
    const double a0 = s.coarse.nodes[p];
    const double w = (s.coarse.nodes[p + 1] - a0) / Z;
    for (int z = 0; z < Z; ++z) {
      app_start.push_back(a0 + z * w);
      app_width.push_back(w);
    }
  }
  s.fine_nodes.push_back(0.0);
  s.application_offset.clear();
  std::vector<int> app_first_node;
  for (std::size_t a = 0; a < app_start.size(); ++a) {
    app_first_node.push_back(static_cast<int>(s.fine_nodes.size()) - 1);
    for (int j = 1; j < Y; ++j) {
      s.fine_nodes.push_back(app_start[a] + s.fine_rule.nodes[j] * app_width[a]);
    }
  }
  s.n_fine = static_cast<int>(s.fine_nodes.size());

  const int expected = X + (X - 1) * (Z - 1) + (X - 1) * (Y - 2) * Z;
  if (s.n_fine != expected) {
    throw ContractError("build_scheme: fine node count mismatch");
  }

  // subinterval -> containing application, and the quadrature rows
  s.fine_row.assign(s.n_fine - 1, {});
  s.application_offset.assign(s.n_fine - 1, 0);
  s.coarse_row.assign(s.n_fine - 1, {});
  int app = 0;
  for (int q = 0; q < s.n_fine - 1; ++q) {
    while (app + 1 < static_cast<int>(app_start.size()) &&
           s.fine_nodes[q] >= app_start[app + 1] - kNodeTol) {
      ++app;
    }
    const int local = q - app_first_node[app];
    s.fine_row[q].assign(Y, 0.0);
    for (int j = 0; j < Y; ++j) {
      s.fine_row[q][j] = app_width[app] * s.fine_rule.S[local][j];
    }
    s.application_offset[q] = app_first_node[app];
    s.coarse_row[q].assign(X, 0.0);
    for (int j = 0; j < X; ++j) {
      s.coarse_row[q][j] = lagrange_integral(s.coarse.nodes, j,
                                             s.fine_nodes[q],
                                             s.fine_nodes[q + 1]);
    }
  }

  s.coarse_of_fine.assign(s.n_fine, 0);
  s.coarse_index_of_fine.assign(s.n_fine, -1);
  for (int q = 0; q < s.n_fine; ++q) {
    int p = 0;
    for (int j = 0; j < X; ++j) {
      if (s.coarse.nodes[j] <= s.fine_nodes[q] + kNodeTol) { p = j; }
    }
    s.coarse_of_fine[q] = p;
    if (std::fabs(s.coarse.nodes[p] - s.fine_nodes[q]) < kNodeTol) {
      s.coarse_index_of_fine[q] = p;
    }
  }
  return s;
}

void mrsdc_sweep(const MrsdcScheme& scheme, const RhsFn& f_slow,
                 const RhsFn& f_fast, double t_n, double H,
                 std::vector<StateVector>& states,
                 std::vector<StateVector>& f_slow_cache,
                 std::vector<StateVector>& f_fast_cache,
                 std::size_t* slow_counter, std::size_t* fast_counter)
{
  const int nq = scheme.n_fine;
  const std::vector<StateVector> f_fast_old = f_fast_cache;
  const std::vector<StateVector> f_slow_old = f_slow_cache;

  for (int q = 0; q < nq - 1; ++q) {
    const double hq = (scheme.fine_nodes[q + 1] - scheme.fine_nodes[q]) * H;
    const int p = scheme.coarse_of_fine[q];

    StateVector y = states[q];
    // quadrature of the k-th iterate over [t_q, t_{q+1}]
    const auto& frow = scheme.fine_row[q];
    const int off = scheme.application_offset[q];
    for (std::size_t j = 0; j < frow.size(); ++j) {
      if (frow[j] != 0.0) { axpy_into(y, H * frow[j], f_fast_old[off + j]); }
    }
    const auto& crow = scheme.coarse_row[q];
    for (std::size_t j = 0; j < crow.size(); ++j) {
      if (crow[j] != 0.0) { axpy_into(y, H * crow[j], f_slow_old[j]); }
    }
    // forward-Euler correction terms
    axpy_into(y, hq, f_fast_cache[q]);
    axpy_into(y, -hq, f_fast_old[q]);
    axpy_into(y, hq, f_slow_cache[p]);
    axpy_into(y, -hq, f_slow_old[p]);

    if (!all_finite(y)) {
      throw IntegrationError("mrsdc_sweep: non-finite update at node " +
                                 std::to_string(q + 1),
                             q + 1);
    }
    states[q + 1] = std::move(y);

    const double t_next = t_n + scheme.fine_nodes[q + 1] * H;
    f_fast_cache[q + 1] = f_fast(t_next, states[q + 1]);
    if (fast_counter) { ++(*fast_counter); }
    const int cp = scheme.coarse_index_of_fine[q + 1];
    if (cp >= 0) {
      f_slow_cache[cp] = f_slow(t_next, states[q + 1]);
      if (slow_counter) { ++(*slow_counter); }
    }
  }
}

StateVector sdc_step(const QuadratureNodes& nodes, const RhsFn& f_total,
                     double t, const StateVector& y, double H, int n_sweeps,
                     std::size_t* eval_counter)
{
  const int n = nodes.n;
  std::vector<StateVector> states(n, y);
  std::vector<StateVector> f_cache(n);
  for (int q = 0; q < n; ++q) {
    f_cache[q] = f_total(t + nodes.nodes[q] * H, states[q]);
    if (eval_counter) { ++(*eval_counter); }
  }

  for (int sweep = 0; sweep < n_sweeps; ++sweep) {
    const std::vector<StateVector> f_old = f_cache;
    for (int q = 0; q < n - 1; ++q) {
      const double hq = (nodes.nodes[q + 1] - nodes.nodes[q]) * H;
      StateVector ynew = states[q];
      for (int j = 0; j < n; ++j) {
        if (nodes.S[q][j] != 0.0) { axpy_into(ynew, H * nodes.S[q][j], f_old[j]); }
      }
      axpy_into(ynew, hq, f_cache[q]);
      axpy_into(ynew, -hq, f_old[q]);
      if (!all_finite(ynew)) {
        throw IntegrationError("sdc_step: non-finite update at node " +
                                   std::to_string(q + 1),
                               q + 1);
      }
      states[q + 1] = std::move(ynew);
      f_cache[q + 1] = f_total(t + nodes.nodes[q + 1] * H, states[q + 1]);
      if (eval_counter) { ++(*eval_counter); }
    }
  }
  return states.back();
}

StateVector mrsdc_step(const MrsdcScheme& scheme,
                       const PartitionedSystem& system, double t,
                       const StateVector& y, double H, EvalCounters& counters)
{
  RhsFn slow = [&system](double tt, const StateVector& yy) {
    return system.slow_rhs(tt, yy);
  };
  RhsFn fast = [&system](double tt, const StateVector& yy) {
    return system.f_fast ? system.f_fast(tt, yy) : StateVector(yy.size());
  };

  std::vector<StateVector> states(scheme.n_fine, y);
  std::vector<StateVector> f_fast_cache(scheme.n_fine);
  std::vector<StateVector> f_slow_cache(scheme.X);
  for (int q = 0; q < scheme.n_fine; ++q) {
    f_fast_cache[q] = fast(t + scheme.fine_nodes[q] * H, states[q]);
    if (system.f_fast) { ++counters.n_fast_evals; }
  }
  for (int p = 0; p < scheme.X; ++p) {
    f_slow_cache[p] = slow(t + scheme.coarse.nodes[p] * H, y);
    ++counters.n_explicit_evals;
  }

  std::size_t* fast_counter = system.f_fast ? &counters.n_fast_evals : nullptr;
  for (int sweep = 0; sweep < scheme.n_sweeps; ++sweep) {
    mrsdc_sweep(scheme, slow, fast, t, H, states, f_slow_cache, f_fast_cache,
                &counters.n_explicit_evals, fast_counter);
  }
  return states.back();
}

StateVector sdc_integrate(const QuadratureNodes& nodes, const RhsFn& f_total,
                          double t0, double tf, double H,
                          const StateVector& y0, int n_sweeps,
                          std::size_t* eval_counter)
{
  if (tf <= t0) { throw ContractError("sdc_integrate: tf must exceed t0"); }
  const long n_steps = static_cast<long>(std::ceil((tf - t0) / H - 1e-12));
  StateVector y = y0;
  double t = t0;
  for (long i = 0; i < n_steps; ++i) {
    const double step = (i == n_steps - 1) ? (tf - t) : H;
    y = sdc_step(nodes, f_total, t, y, step, n_sweeps, eval_counter);
    t = (i == n_steps - 1) ? tf : t0 + static_cast<double>(i + 1) * H;
  }
  return y;
}

StateVector mrsdc_integrate(const MrsdcScheme& scheme,
                            const PartitionedSystem& system, double t0,
                            double tf, double H, const StateVector& y0,
                            EvalCounters& counters)
{
  if (tf <= t0) { throw ContractError("mrsdc_integrate: tf must exceed t0"); }
  const long n_steps = static_cast<long>(std::ceil((tf - t0) / H - 1e-12));
  StateVector y = y0;
  double t = t0;
  for (long i = 0; i < n_steps; ++i) {
    const double step = (i == n_steps - 1) ? (tf - t) : H;
    y = mrsdc_step(scheme, system, t, y, step, counters);
    t = (i == n_steps - 1) ? tf : t0 + static_cast<double>(i + 1) * H;
  }
  return y;
}

} // namespace multirate
