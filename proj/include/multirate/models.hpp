// SPDX-License-Identifier: BSD-3-Clause
//
// Desk-scale test problems: a linear two-rate ODE whose exact solution
// is a matrix exponential, and a periodic finite-volume
// advection-diffusion-reaction PDE with stiff three-species surrogate
// chemistry (Brusselator with a relaxation variable).

#ifndef MULTIRATE_MODELS_HPP_
#define MULTIRATE_MODELS_HPP_

#include <array>
#include <string>

#include "multirate/partitioned_system.hpp"
#include "multirate/solvers.hpp"
#include "multirate/state_vector.hpp"

namespace multirate {

using Mat2 = std::array<std::array<double, 2>, 2>;

// y' = (A_fast + A_slow_implicit + A_slow_explicit) y with exact
// solution given by the matrix exponential. Order-verification oracle.
struct LinearTwoRateOde {
  Mat2 A_fast{};
  Mat2 A_slow_implicit{};
  Mat2 A_slow_explicit{};
  StateVector y0{0.0, 0.0};

  PartitionedSystem system() const;

  // A moderately coupled default used by the convergence studies.
  static LinearTwoRateOde default_problem();
};

// exp((A_f + A_si + A_se) t) y0 by scaling-and-squaring Taylor series.
StateVector analytic_solution(const LinearTwoRateOde& ode, double t);

// Periodic advection-diffusion-reaction problem for species (u, v, w):
//   u' = a - (w+1) u + u^2 v        (per cell, fast)
//   v' = w u - u^2 v
//   w' = (b - w)/eps - w u
// plus conservative second-order advection and diffusion. States are
// stored species-major: all u cells, then v, then w.
struct BrusselatorPdeConfig {
  int n_cells = 64;       // cells per side
  int dims = 1;           // 1 or 2
  double length = 1.0;    // domain length [cm]
  double a_vel = 0.1;     // advection velocity [cm/s]
  double diffusion = 1.0e-3; // base diffusion [cm^2/s]
  double rho_d = 1.0e3;   // diffusion multiplier (stiffness knob)
  double eps = 1.0e-2;    // reaction stiffness (small => fast)
  double a_par = 0.6;
  double b_par = 2.0;
  double ic_amplitude = 0.1;

  int n_species() const { return 3; }
  std::size_t cells_total() const
  {
    std::size_t c = static_cast<std::size_t>(n_cells);
    return dims == 2 ? c * c : c;
  }
  std::size_t dof() const { return cells_total() * 3; }
  double dx() const { return length / n_cells; }

  GridDescriptor grid() const
  {
    return GridDescriptor{dims, n_cells, dx(), 3};
  }

  void validate() const;
};

StateVector rhs_reaction(const BrusselatorPdeConfig& cfg, double t,
                         const StateVector& Y);
StateVector rhs_advection(const BrusselatorPdeConfig& cfg, double t,
                          const StateVector& Y);
StateVector rhs_diffusion(const BrusselatorPdeConfig& cfg, double t,
                          const StateVector& Y);
StateVector jv_diffusion(const BrusselatorPdeConfig& cfg, double t,
                         const StateVector& Y, const StateVector& V);

StateVector initial_condition(const BrusselatorPdeConfig& cfg);

// Partitioned view: fast = reaction, implicit = diffusion (with exact
// Jacobian action), explicit = advection. include_reaction=false turns
// the fast partition off (used by conservation tests).
PartitionedSystem brusselator_system(const BrusselatorPdeConfig& cfg,
                                     bool include_reaction = true);

// Writes "cell,x[,y],u,v,w" rows for external plotting.
void export_state_csv(const BrusselatorPdeConfig& cfg, const StateVector& Y,
                      const std::string& path);

} // namespace multirate

#endif // MULTIRATE_MODELS_HPP_
