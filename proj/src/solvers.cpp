// SPDX-License-Identifier: BSD-3-Clause

#include "multirate/solvers.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace multirate {

namespace {

void apply_givens(double cs, double sn, double& a, double& b)
{
  const double t = cs * a + sn * b;
  b = -sn * a + cs * b;
  a = t;
}

void make_givens(double a, double b, double& cs, double& sn)
{
  const double r = std::hypot(a, b);
  if (r == 0.0) {
    cs = 1.0;
    sn = 0.0;
  } else {
    cs = a / r;
    sn = b / r;
  }
}

} // namespace

GmresResult gmres_solve(const MatVecFn& matvec, const StateVector& b,
                        const Preconditioner* precond, const GmresConfig& cfg,
                        EvalCounters* counters)
{
  GmresResult result;
  const std::size_t n = b.size();
  result.x = StateVector(n);
  if (!all_finite(b)) { throw ContractError("gmres_solve: b not finite"); }

  const double target = cfg.safety * cfg.tolerance;
  const double bnorm = two_norm(b);
  if (bnorm == 0.0) {
    result.converged = true;
    return result;
  }

  const int m = cfg.max_iters;
  std::vector<StateVector> V;
  V.reserve(m + 1);
  std::vector<std::vector<double>> H(m + 1, std::vector<double>(m, 0.0));
  std::vector<double> cs(m, 0.0), sn(m, 0.0), g(m + 1, 0.0);

  V.push_back(b);
  for (std::size_t i = 0; i < n; ++i) { V[0][i] /= bnorm; }
  g[0] = bnorm;

  auto preconditioned = [&](const StateVector& v) {
    if (precond && precond->apply) {
      if (counters) { ++counters->n_precond_solves; }
      return precond->apply(v);
    }
    return v;
  };

  int j = 0;
  bool breakdown = false;
  for (; j < m; ++j) {
    StateVector w = matvec(preconditioned(V[j]));
    if (counters) { ++counters->n_linear_iters; }
    // modified Gram-Schmidt
    for (int i = 0; i <= j; ++i) {
      H[i][j] = dot(V[i], w);
      axpy_into(w, -H[i][j], V[i]);
    }
    const double hnorm = two_norm(w);
    H[j + 1][j] = hnorm;

    for (int i = 0; i < j; ++i) { apply_givens(cs[i], sn[i], H[i][j], H[i + 1][j]); }
    make_givens(H[j][j], H[j + 1][j], cs[j], sn[j]);
    apply_givens(cs[j], sn[j], H[j][j], H[j + 1][j]);
    g[j + 1] = 0.0;
    apply_givens(cs[j], sn[j], g[j], g[j + 1]);

    if (hnorm <= 1e-14 * bnorm || !std::isfinite(hnorm)) {
      // Arnoldi breakdown: exact solution lies in the current space
      breakdown = true;
      ++j;
      break;
    }
    V.push_back(w);
    for (std::size_t i = 0; i < n; ++i) { V[j + 1][i] /= hnorm; }

    if (std::fabs(g[j + 1]) <= target) {
      ++j;
      break;
    }
  }

  // back substitution on the j x j triangular system
  std::vector<double> ycoef(j, 0.0);
  for (int i = j - 1; i >= 0; --i) {
    double sum = g[i];
    for (int k2 = i + 1; k2 < j; ++k2) { sum -= H[i][k2] * ycoef[k2]; }
    ycoef[i] = (H[i][i] != 0.0) ? sum / H[i][i] : 0.0;
  }
  StateVector u(n);
  for (int i = 0; i < j; ++i) { axpy_into(u, ycoef[i], V[i]); }
  result.x = preconditioned(u);

  result.iterations = j;
  result.residual_norm = std::fabs(g[j]);
  result.converged = breakdown || result.residual_norm <= target;
  return result;
}

StateVector jacobian_vector(const StageResidualProblem& problem,
                            const StateVector& Y, const StateVector& base_f,
                            const StateVector& v, EvalCounters* counters)
{
  const double vnorm = two_norm(v);
  if (vnorm == 0.0) { return StateVector(v.size()); }
  if (problem.gamma == 0.0) { return v; }

  StateVector jv(v.size());
  if (problem.jv_implicit) {
    jv = problem.jv_implicit(problem.t_stage, Y, v);
  } else {
    // forward difference with roundoff-scaled perturbation
    const double eps = std::numeric_limits<double>::epsilon();
    StateVector ones(Y.size(), 1.0);
    const double ymag = wrms_norm(Y, ones);
    const double sigma = std::sqrt(eps) * (1.0 + ymag) / vnorm;
    StateVector yp = Y;
    axpy_into(yp, sigma, v);
    StateVector fp = problem.f_implicit(problem.t_stage, yp);
    if (counters) { ++counters->n_implicit_evals; }
    jv = fp;
    axpy_into(jv, -1.0, base_f);
    for (std::size_t i = 0; i < jv.size(); ++i) { jv[i] /= sigma; }
  }
  StateVector out = v;
  axpy_into(out, -problem.gamma, jv);
  return out;
}

NewtonResult newton_solve(const StageResidualProblem& problem,
                          const StateVector& y_guess, const NewtonConfig& cfg,
                          const GmresConfig& linear_cfg,
                          const Preconditioner* precond,
                          const StateVector* weights, EvalCounters* counters)
{
  if (cfg.tolerance <= 0.0 || cfg.safety <= 0.0 || cfg.safety > 1.0) {
    throw ContractError("newton_solve: bad NewtonConfig");
  }
  if (!all_finite(y_guess)) {
    throw ContractError("newton_solve: guess not finite");
  }

  NewtonResult result;
  result.y = y_guess;
  StateVector w = weights ? *weights : StateVector(y_guess.size(), 1.0);
  const double target = cfg.safety * cfg.tolerance;

  StateVector base_f(y_guess.size());
  auto residual = [&](const StateVector& Y) {
    StateVector G = Y;
    if (problem.gamma != 0.0) {
      base_f = problem.f_implicit(problem.t_stage, Y);
      if (counters) { ++counters->n_implicit_evals; }
      axpy_into(G, -problem.gamma, base_f);
    }
    axpy_into(G, -1.0, problem.known);
    return G;
  };

  for (int iter = 0; iter <= cfg.max_iters; ++iter) {
    StateVector G = residual(result.y);
    result.residual_wrms = wrms_norm(G, w);
    if (!std::isfinite(result.residual_wrms)) {
      result.converged = false;
      return result;
    }
    if (result.residual_wrms <= target) {
      result.converged = true;
      return result;
    }
    if (iter == cfg.max_iters) { break; }

    for (std::size_t i = 0; i < G.size(); ++i) { G[i] = -G[i]; }
    MatVecFn matvec = [&](const StateVector& v) {
      return jacobian_vector(problem, result.y, base_f, v, counters);
    };
    GmresResult lin = gmres_solve(matvec, G, precond, linear_cfg, counters);
    result.linear_iterations += lin.iterations;
    if (!lin.converged) {
      result.converged = false;
      return result;
    }
    axpy_into(result.y, 1.0, lin.x);
    ++result.iterations;
    if (counters) { ++counters->n_nonlinear_iters; }
  }
  result.converged = false;
  return result;
}

namespace {

// Solves (alpha I - beta * (z[i-1] - 2 z[i] + z[i+1]) / dx^2) = r on a
// periodic 1D grid: Thomas algorithm plus a Sherman-Morrison rank-one
// correction for the wrap-around entries.
void cyclic_tridiagonal_solve(double diag, double off, std::size_t n,
                              const double* r, double* z)
{
  if (n == 1) {
    z[0] = r[0] / (diag + 2.0 * off);
    return;
  }
  if (n == 2) {
    // wrap couples both neighbors onto the same entry
    const double a = diag, b2 = 2.0 * off;
    const double det = a * a - b2 * b2;
    z[0] = (a * r[0] - b2 * r[1]) / det;
    z[1] = (a * r[1] - b2 * r[0]) / det;
    return;
  }
  // Sherman-Morrison: A = T + u v^T with u = (gamma, 0, .., off*off/gamma)
  // Use the standard choice gamma = -diag.
  const double gamma = -diag;
  std::vector<double> dmod(n, diag), u(n, 0.0), y(n), q(n);
  dmod[0] = diag - gamma;
  dmod[n - 1] = diag - off * off / gamma;
  u[0] = gamma;
  u[n - 1] = off;

  auto thomas = [&](const double* rhs, double* out) {
    std::vector<double> cp(n), dp(n);
    cp[0] = off / dmod[0];
    dp[0] = rhs[0] / dmod[0];
    for (std::size_t i = 1; i < n; ++i) {
      const double m = dmod[i] - off * cp[i - 1];
      cp[i] = off / m;
      dp[i] = (rhs[i] - off * dp[i - 1]) / m;
    }
    out[n - 1] = dp[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) { out[i] = dp[i] - cp[i] * out[i + 1]; }
  };

  thomas(r, y.data());
  thomas(u.data(), q.data());
  // v = (1, 0, ..., off/gamma)
  const double vy = y[0] + (off / gamma) * y[n - 1];
  const double vq = q[0] + (off / gamma) * q[n - 1];
  const double factor = vy / (1.0 + vq);
  for (std::size_t i = 0; i < n; ++i) { z[i] = y[i] - factor * q[i]; }
}

} // namespace

Preconditioner helmholtz_preconditioner(double alpha, double beta,
                                        const GridDescriptor& grid,
                                        int relax_sweeps)
{
  if (alpha == 0.0 && beta == 0.0) {
    throw ContractError("helmholtz_preconditioner: alpha and beta both zero");
  }
  if (alpha <= 0.0 || beta < 0.0) {
    throw ContractError("helmholtz_preconditioner: need alpha > 0, beta >= 0");
  }
  if (grid.dims != 1 && grid.dims != 2) {
    throw ContractError("helmholtz_preconditioner: dims must be 1 or 2");
  }

  Preconditioner p;
  if (beta == 0.0) {
    p.apply = [alpha](const StateVector& r) {
      StateVector z = r;
      for (auto& v : z) { v /= alpha; }
      return z;
    };
    return p;
  }

  const GridDescriptor g = grid;
  if (g.dims == 1) {
    const double off = -beta / (g.dx * g.dx);
    const double diag = alpha + 2.0 * beta / (g.dx * g.dx);
    p.apply = [g, diag, off](const StateVector& r) {
      const std::size_t n = static_cast<std::size_t>(g.n_cells);
      StateVector z(r.size());
      for (int s = 0; s < g.n_species; ++s) {
        cyclic_tridiagonal_solve(diag, off, n, r.data() + s * n,
                                 z.data() + s * n);
      }
      return z;
    };
    return p;
  }

  // 2D: fixed number of symmetric Gauss-Seidel sweeps on the periodic
  // 5-point operator.
  const double w_off = beta / (g.dx * g.dx);
  const double diag = alpha + 4.0 * w_off;
  const int sweeps = relax_sweeps;
  p.apply = [g, w_off, diag, sweeps](const StateVector& r) {
    const int n = g.n_cells;
    const std::size_t cells = static_cast<std::size_t>(n) * n;
    StateVector z(r.size());
    auto idx = [n](int i, int j) {
      return static_cast<std::size_t>(((i + n) % n) * n + ((j + n) % n));
    };
    for (int s = 0; s < g.n_species; ++s) {
      const double* rs = r.data() + s * cells;
      double* zs = z.data() + s * cells;
      auto relax_at = [&](int i, int j) {
        const double nb = zs[idx(i - 1, j)] + zs[idx(i + 1, j)] +
                          zs[idx(i, j - 1)] + zs[idx(i, j + 1)];
        zs[idx(i, j)] = (rs[idx(i, j)] + w_off * nb) / diag;
      };
      for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) relax_at(i, j);
        for (int i = n - 1; i >= 0; --i)
          for (int j = n - 1; j >= 0; --j) relax_at(i, j);
      }
    }
    return z;
  };
  return p;
}

} // namespace multirate
