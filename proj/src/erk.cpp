// SPDX-License-Identifier: BSD-3-Clause

#include "multirate/erk.hpp"

#include <cmath>

namespace multirate {

StateVector erk_step(const ButcherTable& table, const RhsFn& f, double t,
                     const StateVector& y, double h, std::size_t* eval_counter)
{
  if (h <= 0.0) { throw ContractError("erk_step: h must be positive"); }
  if (table.kind != TableKind::Explicit) {
    throw ContractError("erk_step: table must be explicit");
  }
  const int s = table.stages;
  std::vector<StateVector> k(s);
  StateVector stage(y.size());
  for (int i = 0; i < s; ++i) {
    stage = y;
    for (int j = 0; j < i; ++j) {
      if (table.A[i][j] != 0.0) { axpy_into(stage, h * table.A[i][j], k[j]); }
    }
    if (!all_finite(stage)) {
      throw IntegrationError("erk_step: non-finite stage value", i);
    }
    k[i] = f(t + table.c[i] * h, stage);
    if (eval_counter) { ++(*eval_counter); }
  }
  StateVector out = y;
  for (int i = 0; i < s; ++i) {
    if (table.b[i] != 0.0) { axpy_into(out, h * table.b[i], k[i]); }
  }
  if (!all_finite(out)) {
    throw IntegrationError("erk_step: non-finite result", s);
  }
  return out;
}

StateVector erk_integrate(const ButcherTable& table, const RhsFn& f, double t0,
                          double tf, double h, const StateVector& y0,
                          std::size_t* eval_counter)
{
  if (tf <= t0) { throw ContractError("erk_integrate: tf must exceed t0"); }
  if (h <= 0.0) { throw ContractError("erk_integrate: h must be positive"); }
  const double span = tf - t0;
  const long n_steps = static_cast<long>(std::ceil(span / h - 1e-12));
  StateVector y = y0;
  double t = t0;
  for (long i = 0; i < n_steps; ++i) {
    const double remaining = tf - t;
    const double step = (i == n_steps - 1) ? remaining : h;
    y = erk_step(table, f, t, y, step, eval_counter);
    t = (i == n_steps - 1) ? tf : t0 + static_cast<double>(i + 1) * h;
  }
  return y;
}

StateVector reference_solution(const PartitionedSystem& problem,
                               const StateVector& y0, double t0, double tf,
                               double h_ref, ReferenceCache* cache,
                               const std::string& cache_key)
{
  if (cache && !cache_key.empty()) {
    if (const StateVector* hit = cache->find(cache_key)) { return *hit; }
  }
  problem.validate();
  static const ButcherTable table = lookup_table("cash-karp5");
  RhsFn f = [&problem](double t, const StateVector& y) {
    return problem.sum_rhs(t, y);
  };
  StateVector result = erk_integrate(table, f, t0, tf, h_ref, y0);
  if (cache && !cache_key.empty()) { cache->store(cache_key, result); }
  return result;
}

} // namespace multirate
