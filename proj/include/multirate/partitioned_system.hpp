// SPDX-License-Identifier: BSD-3-Clause
//
// Problem definition shared by all integrators: the right-hand side
// split into fast / implicit-slow / explicit-slow callbacks, plus the
// evaluation and iteration counters used for cost accounting.

#ifndef MULTIRATE_PARTITIONED_SYSTEM_HPP_
#define MULTIRATE_PARTITIONED_SYSTEM_HPP_

#include <cstddef>
#include <functional>

#include "multirate/state_vector.hpp"

namespace multirate {

using RhsFn = std::function<StateVector(double t, const StateVector& y)>;
using JvFn  = std::function<StateVector(double t, const StateVector& y,
                                        const StateVector& v)>;

// An ODE y' = f_fast + f_implicit + f_explicit. Any callback may be
// absent (nullptr); at least one must be present. The two-way split
// y' = f^F + f^S is the special case with a single slow callback.
// Callbacks must be pure: same inputs, same outputs.
struct PartitionedSystem {
  std::size_t dimension = 0;
  RhsFn f_fast;
  RhsFn f_implicit;
  RhsFn f_explicit;
  JvFn jv_implicit; // action of d(f_implicit)/dy on a vector, optional

  void validate() const
  {
    if (dimension == 0) {
      throw ContractError("PartitionedSystem: dimension must be positive");
    }
    if (!f_fast && !f_implicit && !f_explicit) {
      throw ContractError("PartitionedSystem: at least one partition required");
    }
  }

  // Unsplit right-hand side, used for reference solutions.
  StateVector sum_rhs(double t, const StateVector& y) const
  {
    StateVector out(dimension);
    if (f_fast) { axpy_into(out, 1.0, f_fast(t, y)); }
    if (f_implicit) { axpy_into(out, 1.0, f_implicit(t, y)); }
    if (f_explicit) { axpy_into(out, 1.0, f_explicit(t, y)); }
    return out;
  }

  // Slow part only (implicit + explicit), as used by the multirate SDC
  // sweeps where the whole slow scale is stepped explicitly.
  StateVector slow_rhs(double t, const StateVector& y) const
  {
    StateVector out(dimension);
    if (f_implicit) { axpy_into(out, 1.0, f_implicit(t, y)); }
    if (f_explicit) { axpy_into(out, 1.0, f_explicit(t, y)); }
    return out;
  }
};

// Instrumented evaluation counts for one run. Incremented by the
// integrators (never by user callbacks), so totals reflect logical
// method evaluations. Monotone within a run; reset only at run start.
struct EvalCounters {
  std::size_t n_fast_evals = 0;
  std::size_t n_implicit_evals = 0;
  std::size_t n_explicit_evals = 0;
  std::size_t n_implicit_solves = 0;
  std::size_t n_nonlinear_iters = 0;
  std::size_t n_linear_iters = 0;
  std::size_t n_precond_solves = 0;
  std::size_t n_fast_ivps = 0;

  void reset() { *this = EvalCounters{}; }

  std::size_t slow_evals() const { return n_implicit_evals + n_explicit_evals; }
};

} // namespace multirate

#endif // MULTIRATE_PARTITIONED_SYSTEM_HPP_
