// SPDX-License-Identifier: BSD-3-Clause
//
// Nonlinear and linear solvers for implicit slow stages: Newton
// iteration with matrix-free GMRES and a shifted-Laplacian
// preconditioner for periodic grids.

#ifndef MULTIRATE_SOLVERS_HPP_
#define MULTIRATE_SOLVERS_HPP_

#include <cstddef>
#include <functional>
#include <optional>

#include "multirate/partitioned_system.hpp"
#include "multirate/state_vector.hpp"

namespace multirate {

struct NewtonConfig {
  double tolerance = 1.0e-10; // absolute, WRMS norm
  int max_iters = 10;
  double safety = 0.1;
};

struct GmresConfig {
  double tolerance = 1.0e-10; // absolute, 2-norm
  int max_iters = 100;        // also the Krylov dimension (no restart)
  double safety = 0.05;
};

// Residual G(Y) = Y - gamma * f_implicit(t_stage, Y) - known for one
// diagonally-implicit stage, gamma = H * a_ii. The Jacobian of G is
// I - gamma * J.
struct StageResidualProblem {
  double gamma = 0.0;
  double t_stage = 0.0;
  StateVector known;
  RhsFn f_implicit;
  JvFn jv_implicit; // optional; finite differences otherwise
};

using MatVecFn = std::function<StateVector(const StateVector&)>;
using ApplyFn = std::function<StateVector(const StateVector&)>;

// Preconditioner as an apply-operator. An empty apply means identity.
struct Preconditioner {
  ApplyFn apply;
};

struct GmresResult {
  StateVector x;
  int iterations = 0;
  double residual_norm = 0.0;
  bool converged = false;
};

struct NewtonResult {
  StateVector y;
  int iterations = 0;
  double residual_wrms = 0.0;
  bool converged = false;
  int linear_iterations = 0;
};

// Right-preconditioned GMRES with modified Gram-Schmidt. Stops when
// the 2-norm residual drops below safety * tolerance; an Arnoldi
// breakdown means the exact solution was found. Nonconvergence is
// reported in the result, not thrown.
GmresResult gmres_solve(const MatVecFn& matvec, const StateVector& b,
                        const Preconditioner* precond, const GmresConfig& cfg,
                        EvalCounters* counters = nullptr);

// Action of the stage Jacobian I - gamma*J on v. Uses the supplied
// jv_implicit when present, otherwise a roundoff-scaled forward
// difference around Y. base_f must be f_implicit(t_stage, Y).
StateVector jacobian_vector(const StageResidualProblem& problem,
                            const StateVector& Y, const StateVector& base_f,
                            const StateVector& v,
                            EvalCounters* counters = nullptr);

// Newton iteration on G(Y) = 0, one GMRES solve per iteration.
// Converges when wrms_norm(G, weights) <= safety * tolerance.
NewtonResult newton_solve(const StageResidualProblem& problem,
                          const StateVector& y_guess, const NewtonConfig& cfg,
                          const GmresConfig& linear_cfg,
                          const Preconditioner* precond = nullptr,
                          const StateVector* weights = nullptr,
                          EvalCounters* counters = nullptr);

// Periodic grid descriptor for the shifted-Laplacian preconditioner.
struct GridDescriptor {
  int dims = 1;       // 1 or 2
  int n_cells = 0;    // cells per side
  double dx = 0.0;
  int n_species = 1;  // component-major layout: species block, then cells
};

// Builds an apply-operator solving (alpha I - beta lap_h) z = r per
// species on the periodic grid: exact cyclic tridiagonal solve in 1D,
// a fixed number of symmetric Gauss-Seidel sweeps in 2D.
Preconditioner helmholtz_preconditioner(double alpha, double beta,
                                        const GridDescriptor& grid,
                                        int relax_sweeps = 4);

} // namespace multirate

#endif // MULTIRATE_SOLVERS_HPP_
