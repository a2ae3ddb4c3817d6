// SPDX-License-Identifier: BSD-3-Clause
//
// Single-rate explicit Runge-Kutta stepping. This is the inner engine
// for the multirate fast IVPs and the generator of reference solutions.

#ifndef MULTIRATE_ERK_HPP_
#define MULTIRATE_ERK_HPP_

#include <cstddef>
#include <map>
#include <string>

#include "multirate/butcher.hpp"
#include "multirate/partitioned_system.hpp"
#include "multirate/state_vector.hpp"

namespace multirate {

// One explicit RK step of size h. Exactly table.stages evaluations of
// f; each is counted into *eval_counter when provided. Throws
// IntegrationError with the offending stage index if a stage value is
// not finite.
StateVector erk_step(const ButcherTable& table, const RhsFn& f, double t,
                     const StateVector& y, double h,
                     std::size_t* eval_counter = nullptr);

// Constant-step integration from t0 to tf; the final step is
// shortened so the trajectory lands exactly on tf. Step count is
// ceil((tf - t0) / h).
StateVector erk_integrate(const ButcherTable& table, const RhsFn& f, double t0,
                          double tf, double h, const StateVector& y0,
                          std::size_t* eval_counter = nullptr);

// Cache for reference solutions, keyed by a caller-supplied string
// identifying (problem, tf, h_ref).
class ReferenceCache {
public:
  const StateVector* find(const std::string& key) const
  {
    auto it = cache_.find(key);
    return it == cache_.end() ? nullptr : &it->second;
  }
  void store(const std::string& key, StateVector value)
  {
    cache_[key] = std::move(value);
  }

private:
  std::map<std::string, StateVector> cache_;
};

// Integrates the unsplit sum of all partitions with cash-karp5 at step
// h_ref. h_ref should be at least 10x smaller than the smallest step
// under study. When a cache and key are given, the result is reused
// across runs.
StateVector reference_solution(const PartitionedSystem& problem,
                               const StateVector& y0, double t0, double tf,
                               double h_ref, ReferenceCache* cache = nullptr,
                               const std::string& cache_key = {});

} // namespace multirate

#endif // MULTIRATE_ERK_HPP_
