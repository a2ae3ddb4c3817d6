// SPDX-License-Identifier: BSD-3-Clause
//
// Infinitesimal multirate stepping: explicit MIS-type and
// solve-decoupled IMEX multirate methods driven by coupling tables,
// with an explicit Runge-Kutta inner integrator for the modified fast
// IVPs, plus the single-rate additive (ARK-IMEX) step.

#ifndef MULTIRATE_MRI_HPP_
#define MULTIRATE_MRI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "multirate/butcher.hpp"
#include "multirate/erk.hpp"
#include "multirate/partitioned_system.hpp"
#include "multirate/solvers.hpp"
#include "multirate/state_vector.hpp"

namespace multirate {

enum class StageKind { FastIvp, ImplicitSolve, ExplicitUpdate };

// Coupling-coefficient tables defining one multirate method. Stage 0
// is the trivial copy Y_1 = y_n; stages 1..s-1 are executed in order.
// gamma[k] couples implicit slow RHS values into the tau^k term of the
// forcing polynomial, omega[k] couples explicit slow RHS values.
// Coefficients are normalized so the forcing for stage i is
//   r_i(tau) = (1/dc_i) sum_k tau^k sum_j (gamma[k][i][j] fI_j
//                                          + omega[k][i][j] fE_j).
struct MriCoupling {
  std::string name;
  int stages = 0;
  std::vector<double> c;             // abscissae, c[0]=0, c[s-1]=1
  std::vector<StageKind> stage_kind; // per stage; entry 0 is a no-op update
  std::vector<std::vector<std::vector<double>>> gamma; // per degree, s x s
  std::vector<std::vector<std::vector<double>>> omega;
  int order = 0;

  // Derived at registration/import:
  std::vector<std::vector<double>> gbar; // sum_k gamma[k]/(k+1)
  std::vector<std::vector<double>> wbar;
  std::vector<bool> eval_explicit_at;   // slow explicit eval schedule
  std::vector<bool> fI_referenced;      // columns referenced by gamma

  int degrees() const { return static_cast<int>(std::max(gamma.size(), omega.size())); }
  bool uses_implicit() const;
  bool is_fully_explicit() const;

  // Recomputes derived data and checks the structural invariants:
  // abscissa ordering, solve stages only at dc=0, triangularity, and
  // the row-sum consistency of the forcing coefficients. Throws on
  // violation.
  void finalize();

  // Induced single-rate tables obtained by integrating the coupling
  // coefficients: with the fast partition zero, the multirate step
  // reduces exactly to this additive pair.
  ButcherTable induced_explicit_table() const;
  ButcherTable induced_implicit_table() const;
};

struct MriMethodConfig {
  MriCoupling coupling;
  ButcherTable fast_table; // explicit
  int m = 1;               // fast substeps per unit slow step
};

// Solver bundle for diagonally-implicit slow stages.
struct ImplicitStageSolver {
  NewtonConfig newton;
  GmresConfig gmres;
  // Builds a preconditioner for I - gamma_h * J given gamma_h = H*a_ii;
  // empty means unpreconditioned.
  std::function<Preconditioner(double gamma_h)> make_preconditioner;
  StateVector weights; // empty => all ones
};

// Coupling registry: mis-kw3, imex-mri-gark3b, imex-mri-gark4.
MriCoupling register_coupling(const std::string& name);
std::vector<std::string> registered_coupling_names();

// Builds the coupling for an explicit MIS method from its base table:
// row i of omega[0] is the difference of consecutive base rows, the
// final row is b minus the last base row. split_widest_stage chops the
// widest stage interval in half (two chained IVPs with identical
// forcing), which leaves the method unchanged but matches the
// per-step fast-IVP accounting used in the cost tables.
MriCoupling coupling_from_mis(const std::string& name,
                              const ButcherTable& base, int order,
                              bool split_widest_stage = false);

// Forcing polynomial r_i(tau) on tau in [0,1] as coefficient vectors.
struct ForcingPolynomial {
  std::vector<StateVector> coeffs; // coeffs[k] multiplies tau^k

  StateVector evaluate(double tau) const
  {
    StateVector out = coeffs.empty() ? StateVector() : coeffs.back();
    for (int k = static_cast<int>(coeffs.size()) - 2; k >= 0; --k) {
      for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = out[i] * tau + coeffs[k][i];
      }
    }
    return out;
  }
};

// Assembles r_i for stage i from the stored slow RHS stage values.
// Entries of the histories may be empty when never referenced.
ForcingPolynomial build_forcing(const MriCoupling& coupling, int stage,
                                const std::vector<StateVector>& fI_history,
                                const std::vector<StateVector>& fE_history);

// One slow step t -> t+H of the multirate method.
StateVector mri_step(const MriMethodConfig& config,
                     const PartitionedSystem& system,
                     const ImplicitStageSolver& solver, double t,
                     const StateVector& y, double H, EvalCounters& counters);

// One step of the single-rate additive pair; the explicit partition is
// f_fast + f_explicit combined, the implicit partition is f_implicit.
StateVector ark_imex_step(const ArkPair& pair, const PartitionedSystem& system,
                          const ImplicitStageSolver& solver, double t,
                          const StateVector& y, double H,
                          EvalCounters& counters);

StateVector mri_integrate(const MriMethodConfig& config,
                          const PartitionedSystem& system,
                          const ImplicitStageSolver& solver, double t0,
                          double tf, double H, const StateVector& y0,
                          EvalCounters& counters);

StateVector ark_imex_integrate(const ArkPair& pair,
                               const PartitionedSystem& system,
                               const ImplicitStageSolver& solver, double t0,
                               double tf, double H, const StateVector& y0,
                               EvalCounters& counters);

// Plain-text audit format:
//   mri-coupling v1 <name> s=<s> degrees=<d>
//   c row, stage-kind row, then gamma and omega matrices row-major.
void export_coupling(const MriCoupling& coupling, std::ostream& out);
MriCoupling import_coupling(std::istream& in);

} // namespace multirate

#endif // MULTIRATE_MRI_HPP_
