// SPDX-License-Identifier: BSD-3-Clause
//
// Single-rate and multirate spectral deferred corrections on
// Gauss-Lobatto node hierarchies: node/quadrature construction, the
// explicit forward-Euler correction sweep, and the step drivers.

#ifndef MULTIRATE_SDC_HPP_
#define MULTIRATE_SDC_HPP_

#include <vector>

#include "multirate/partitioned_system.hpp"
#include "multirate/state_vector.hpp"

namespace multirate {

// Lobatto nodes on [0,1] with both endpoints, weights summing to 1,
// and the (n-1) x n integration matrix S with
//   S[q][j] = integral over [node_q, node_{q+1}] of Lagrange basis j.
struct QuadratureNodes {
  int n = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<std::vector<double>> S;
};

// n in {3, 5}.
QuadratureNodes lobatto_nodes(int n);

// MRSDC-XYZ node hierarchy: X coarse Lobatto nodes; each coarse
// subinterval carries a Y-node Lobatto quadrature applied Z times.
// Coarse nodes always coincide with fine nodes.
struct MrsdcScheme {
  int X = 0, Y = 0, Z = 0;
  int n_sweeps = 0;
  QuadratureNodes coarse;
  QuadratureNodes fine_rule; // the Y-node rule

  int n_fine = 0;
  std::vector<double> fine_nodes;         // in [0,1]
  std::vector<int> coarse_of_fine;        // p(q): coarse node left of q
  std::vector<int> coarse_index_of_fine;  // >=0 where coincident, else -1

  // Per fine subinterval [q, q+1]: quadrature rows over cached values.
  // fine_row[q][j] weights the fine-rule node j of the application
  // containing the subinterval; application_offset[q] maps those local
  // indices into the global fine grid. coarse_row[q][j] weights coarse
  // node j (integral of the coarse Lagrange interpolant).
  std::vector<std::vector<double>> fine_row;
  std::vector<int> application_offset;
  std::vector<std::vector<double>> coarse_row;
};

MrsdcScheme build_scheme(int X, int Y, int Z, int n_sweeps);

// One correction sweep of the two-rate forward-Euler update. states,
// f_slow_cache (coarse-node indexed) and f_fast_cache (fine-node
// indexed) hold iteration k and are updated in place to k+1.
// Evaluation counts go to the provided counters when non-null.
void mrsdc_sweep(const MrsdcScheme& scheme, const RhsFn& f_slow,
                 const RhsFn& f_fast, double t_n, double H,
                 std::vector<StateVector>& states,
                 std::vector<StateVector>& f_slow_cache,
                 std::vector<StateVector>& f_fast_cache,
                 std::size_t* slow_counter = nullptr,
                 std::size_t* fast_counter = nullptr);

// Single-rate explicit SDC step on the X-node rule: initial guess is
// y at all nodes, n_sweeps correction sweeps, returns the final node.
StateVector sdc_step(const QuadratureNodes& nodes, const RhsFn& f_total,
                     double t, const StateVector& y, double H, int n_sweeps,
                     std::size_t* eval_counter = nullptr);

// Multirate step: slow = f_implicit + f_explicit treated explicitly on
// the coarse nodes, fast = f_fast on the fine nodes.
StateVector mrsdc_step(const MrsdcScheme& scheme,
                       const PartitionedSystem& system, double t,
                       const StateVector& y, double H,
                       EvalCounters& counters);

StateVector sdc_integrate(const QuadratureNodes& nodes, const RhsFn& f_total,
                          double t0, double tf, double H,
                          const StateVector& y0, int n_sweeps,
                          std::size_t* eval_counter = nullptr);

StateVector mrsdc_integrate(const MrsdcScheme& scheme,
                            const PartitionedSystem& system, double t0,
                            double tf, double H, const StateVector& y0,
                            EvalCounters& counters);

} // namespace multirate

#endif // MULTIRATE_SDC_HPP_
