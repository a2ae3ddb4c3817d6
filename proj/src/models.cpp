// SPDX-License-Identifier: BSD-3-Clause

#include "multirate/models.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

namespace multirate {

namespace {

Mat2 mat_add(const Mat2& a, const Mat2& b)
{
  Mat2 out{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out[i][j] = a[i][j] + b[i][j];
  return out;
}

Mat2 mat_mul(const Mat2& a, const Mat2& b)
{
  Mat2 out{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) out[i][j] += a[i][k] * b[k][j];
  return out;
}

StateVector mat_apply(const Mat2& a, const StateVector& y)
{
  return StateVector{a[0][0] * y[0] + a[0][1] * y[1],
                     a[1][0] * y[0] + a[1][1] * y[1]};
}

double mat_norm(const Mat2& a)
{
  double m = 0.0;
  for (int i = 0; i < 2; ++i) {
    m = std::max(m, std::fabs(a[i][0]) + std::fabs(a[i][1]));
  }
  return m;
}

} // namespace

PartitionedSystem LinearTwoRateOde::system() const
{
  PartitionedSystem sys;
  sys.dimension = 2;
  const Mat2 af = A_fast, asi = A_slow_implicit, ase = A_slow_explicit;
  sys.f_fast = [af](double, const StateVector& y) { return mat_apply(af, y); };
  sys.f_implicit = [asi](double, const StateVector& y) {
    return mat_apply(asi, y);
  };
  sys.f_explicit = [ase](double, const StateVector& y) {
    return mat_apply(ase, y);
  };
  sys.jv_implicit = [asi](double, const StateVector&, const StateVector& v) {
    return mat_apply(asi, v);
  };
  return sys;
}

LinearTwoRateOde LinearTwoRateOde::default_problem()
{
  LinearTwoRateOde ode;
  ode.A_fast = {{{0.0, 4.0}, {-4.0, 0.0}}};
  ode.A_slow_implicit = {{{-1.0, 0.2}, {0.3, -0.7}}};
  ode.A_slow_explicit = {{{0.1, 0.4}, {-0.3, -0.1}}};
  ode.y0 = StateVector{1.0, 0.6};
  return ode;
}

StateVector analytic_solution(const LinearTwoRateOde& ode, double t)
{
  Mat2 a = mat_add(mat_add(ode.A_fast, ode.A_slow_implicit),
                   ode.A_slow_explicit);
  for (auto& row : a)
    for (auto& v : row) v *= t;

  // scale so the Taylor series converges fast, then square back
  int squarings = 0;
  while (mat_norm(a) > 0.25) {
    for (auto& row : a)
      for (auto& v : row) v *= 0.5;
    ++squarings;
  }
  Mat2 result{{{1.0, 0.0}, {0.0, 1.0}}};
  Mat2 term{{{1.0, 0.0}, {0.0, 1.0}}};
  for (int k = 1; k <= 24; ++k) {
    term = mat_mul(term, a);
    for (auto& row : term)
      for (auto& v : row) v /= k;
    result = mat_add(result, term);
    if (mat_norm(term) < 1.0e-20) { break; }
  }
  for (int s = 0; s < squarings; ++s) { result = mat_mul(result, result); }
  return mat_apply(result, ode.y0);
}

void BrusselatorPdeConfig::validate() const
{
  if (n_cells < 8) { throw ContractError("BrusselatorPdeConfig: n_cells >= 8"); }
  if (dims != 1 && dims != 2) {
    throw ContractError("BrusselatorPdeConfig: dims must be 1 or 2");
  }
  if (eps <= 0.0) { throw ContractError("BrusselatorPdeConfig: eps > 0"); }
  if (rho_d < 1.0) { throw ContractError("BrusselatorPdeConfig: rho_d >= 1"); }
}

StateVector rhs_reaction(const BrusselatorPdeConfig& cfg, double,
                         const StateVector& Y)
{
  const std::size_t nc = cfg.cells_total();
  StateVector out(Y.size());
  const double a = cfg.a_par, b = cfg.b_par, eps = cfg.eps;
  for (std::size_t i = 0; i < nc; ++i) {
    const double u = Y[i];
    const double v = Y[nc + i];
    const double w = Y[2 * nc + i];
    out[i] = a - (w + 1.0) * u + u * u * v;
    out[nc + i] = w * u - u * u * v;
    out[2 * nc + i] = (b - w) / eps - w * u;
  }
  return out;
}

StateVector rhs_advection(const BrusselatorPdeConfig& cfg, double,
                          const StateVector& Y)
{
  const std::size_t nc = cfg.cells_total();
  const double dx = cfg.dx();
  const double vel = cfg.a_vel;
  StateVector out(Y.size());

  if (cfg.dims == 1) {
    const int n = cfg.n_cells;
    for (int s = 0; s < 3; ++s) {
      const double* y = Y.data() + s * nc;
      double* o = out.data() + s * nc;
      for (int i = 0; i < n; ++i) {
        const int ip = (i + 1) % n;
        const int im = (i + n - 1) % n;
        // centered fluxes at the two faces, telescoping sum
        const double flux_r = vel * 0.5 * (y[i] + y[ip]);
        const double flux_l = vel * 0.5 * (y[im] + y[i]);
        o[i] = -(flux_r - flux_l) / dx;
      }
    }
    return out;
  }

  const int n = cfg.n_cells;
  auto id = [n](int i, int j) {
    return static_cast<std::size_t>(((i + n) % n) * n + ((j + n) % n));
  };
  for (int s = 0; s < 3; ++s) {
    const double* y = Y.data() + s * nc;
    double* o = out.data() + s * nc;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double fx_r = vel * 0.5 * (y[id(i, j)] + y[id(i + 1, j)]);
        const double fx_l = vel * 0.5 * (y[id(i - 1, j)] + y[id(i, j)]);
        const double fy_r = vel * 0.5 * (y[id(i, j)] + y[id(i, j + 1)]);
        const double fy_l = vel * 0.5 * (y[id(i, j - 1)] + y[id(i, j)]);
        o[id(i, j)] = -((fx_r - fx_l) + (fy_r - fy_l)) / dx;
      }
    }
  }
  return out;
}

StateVector rhs_diffusion(const BrusselatorPdeConfig& cfg, double,
                          const StateVector& Y)
{
  const std::size_t nc = cfg.cells_total();
  const double coef = cfg.rho_d * cfg.diffusion / (cfg.dx() * cfg.dx());
  StateVector out(Y.size());

  if (cfg.dims == 1) {
    const int n = cfg.n_cells;
    for (int s = 0; s < 3; ++s) {
      const double* y = Y.data() + s * nc;
      double* o = out.data() + s * nc;
      for (int i = 0; i < n; ++i) {
        const int ip = (i + 1) % n;
        const int im = (i + n - 1) % n;
        o[i] = coef * (y[im] - 2.0 * y[i] + y[ip]);
      }
    }
    return out;
  }

  const int n = cfg.n_cells;
  auto id = [n](int i, int j) {
    return static_cast<std::size_t>(((i + n) % n) * n + ((j + n) % n));
  };
  for (int s = 0; s < 3; ++s) {
    const double* y = Y.data() + s * nc;
    double* o = out.data() + s * nc;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        o[id(i, j)] = coef * (y[id(i - 1, j)] + y[id(i + 1, j)] +
                              y[id(i, j - 1)] + y[id(i, j + 1)] -
                              4.0 * y[id(i, j)]);
      }
    }
  }
  return out;
}

StateVector jv_diffusion(const BrusselatorPdeConfig& cfg, double t,
                         const StateVector&, const StateVector& V)
{
  // the operator is linear, so the Jacobian action is the operator itself
  return rhs_diffusion(cfg, t, V);
}

StateVector initial_condition(const BrusselatorPdeConfig& cfg)
{
  const std::size_t nc = cfg.cells_total();
  StateVector Y(cfg.dof());
  const double a = cfg.a_par, b = cfg.b_par, amp = cfg.ic_amplitude;
  const double two_pi = 2.0 * std::numbers::pi;
  const int n = cfg.n_cells;
  const double dx = cfg.dx();

  if (cfg.dims == 1) {
    for (int i = 0; i < n; ++i) {
      const double x = (i + 0.5) * dx / cfg.length;
      Y[i] = a + amp * std::sin(two_pi * x);
      Y[nc + i] = b / a + amp * std::cos(two_pi * x);
      Y[2 * nc + i] = b + 0.5 * amp * std::sin(2.0 * two_pi * x);
    }
    return Y;
  }

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double x = (i + 0.5) * dx / cfg.length;
      const double yy = (j + 0.5) * dx / cfg.length;
      const std::size_t c = static_cast<std::size_t>(i) * n + j;
      Y[c] = a + amp * std::sin(two_pi * x) * std::sin(two_pi * yy);
      Y[nc + c] = b / a + amp * std::cos(two_pi * x);
      Y[2 * nc + c] = b + 0.5 * amp * std::sin(2.0 * two_pi * x);
    }
  }
  return Y;
}

PartitionedSystem brusselator_system(const BrusselatorPdeConfig& cfg,
                                     bool include_reaction)
{
  cfg.validate();
  PartitionedSystem sys;
  sys.dimension = cfg.dof();
  const BrusselatorPdeConfig c = cfg;
  if (include_reaction) {
    sys.f_fast = [c](double t, const StateVector& y) {
      return rhs_reaction(c, t, y);
    };
  }
  sys.f_explicit = [c](double t, const StateVector& y) {
    return rhs_advection(c, t, y);
  };
  sys.f_implicit = [c](double t, const StateVector& y) {
    return rhs_diffusion(c, t, y);
  };
  sys.jv_implicit = [c](double t, const StateVector& y, const StateVector& v) {
    return jv_diffusion(c, t, y, v);
  };
  return sys;
}

void export_state_csv(const BrusselatorPdeConfig& cfg, const StateVector& Y,
                      const std::string& path)
{
  std::ofstream out(path);
  if (!out) { throw ContractError("export_state_csv: cannot open " + path); }
  const std::size_t nc = cfg.cells_total();
  out.precision(17);
  if (cfg.dims == 1) {
    out << "cell,x,u,v,w\n";
    for (int i = 0; i < cfg.n_cells; ++i) {
      const double x = (i + 0.5) * cfg.dx();
      out << i << ',' << x << ',' << Y[i] << ',' << Y[nc + i] << ','
          << Y[2 * nc + i] << '\n';
    }
    return;
  }
  out << "cell,x,y,u,v,w\n";
  const int n = cfg.n_cells;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::size_t c = static_cast<std::size_t>(i) * n + j;
      out << c << ',' << (i + 0.5) * cfg.dx() << ',' << (j + 0.5) * cfg.dx()
          << ',' << Y[c] << ',' << Y[nc + c] << ',' << Y[2 * nc + c] << '\n';
    }
  }
}

} // namespace multirate
