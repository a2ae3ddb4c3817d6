// SPDX-License-Identifier: BSD-3-Clause
//
// Dense state vector and the small set of vector operations every
// integrator in this library is written against: linear combinations,
// elementwise products, and the WRMS / max norms used by the solvers
// and the error measurement.

#ifndef MULTIRATE_STATE_VECTOR_HPP_
#define MULTIRATE_STATE_VECTOR_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace multirate {

// Thrown when an operation's preconditions are violated (length
// mismatches, empty vectors, bad configuration values).
class ContractError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Raised by integrators when a step cannot be completed (non-finite
// stage values, nonlinear solver failure). Carries the stage index
// where the failure occurred, or -1 when not stage-specific.
class IntegrationError : public std::runtime_error {
public:
  IntegrationError(const std::string& what, int stage = -1)
      : std::runtime_error(what), stage_index(stage)
  {}
  int stage_index;
};

// Fixed-length vector of 64-bit reals. The length is set at
// construction and never changes; all binary operations require equal
// lengths.
class StateVector {
public:
  StateVector() = default;
  explicit StateVector(std::size_t n, double value = 0.0) : data_(n, value) {}
  StateVector(std::initializer_list<double> init) : data_(init) {}

  std::size_t size() const { return data_.size(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  void fill(double value) { data_.assign(data_.size(), value); }

  bool operator==(const StateVector&) const = default;

private:
  std::vector<double> data_;
};

inline void require_same_length(const StateVector& a, const StateVector& b,
                                const char* op)
{
  if (a.size() != b.size()) {
    throw ContractError(std::string(op) + ": length mismatch (" +
                        std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()) + ")");
  }
}

// Returns sum_k coefficients[k] * vectors[k].
inline StateVector axpy_combination(std::span<const double> coefficients,
                                    std::span<const StateVector* const> vectors)
{
  if (coefficients.empty() || coefficients.size() != vectors.size()) {
    throw ContractError("axpy_combination: coefficient/vector count mismatch");
  }
  const std::size_t n = vectors[0]->size();
  StateVector out(n);
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    require_same_length(*vectors[0], *vectors[k], "axpy_combination");
    const double c = coefficients[k];
    const StateVector& v = *vectors[k];
    for (std::size_t i = 0; i < n; ++i) { out[i] += c * v[i]; }
  }
  return out;
}

inline StateVector axpy_combination(std::initializer_list<double> coefficients,
                                    std::initializer_list<const StateVector*> vectors)
{
  std::vector<double> c(coefficients);
  std::vector<const StateVector*> v(vectors);
  return axpy_combination(std::span<const double>(c),
                          std::span<const StateVector* const>(v));
}

// In-place y += a * x, the workhorse update inside stage loops.
inline void axpy_into(StateVector& y, double a, const StateVector& x)
{
  require_same_length(y, x, "axpy_into");
  for (std::size_t i = 0; i < y.size(); ++i) { y[i] += a * x[i]; }
}

inline StateVector elementwise_product(const StateVector& x, const StateVector& y)
{
  require_same_length(x, y, "elementwise_product");
  StateVector z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) { z[i] = x[i] * y[i]; }
  return z;
}

// sqrt((1/N) sum_i (x[i] * w[i])^2)
inline double wrms_norm(const StateVector& x, const StateVector& weights)
{
  require_same_length(x, weights, "wrms_norm");
  if (x.size() == 0) { throw ContractError("wrms_norm: empty vector"); }
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xw = x[i] * weights[i];
    sum += xw * xw;
  }
  return std::sqrt(sum / static_cast<double>(x.size()));
}

inline double two_norm(const StateVector& x)
{
  double sum = 0.0;
  for (double v : x) { sum += v * v; }
  return std::sqrt(sum);
}

inline double dot(const StateVector& x, const StateVector& y)
{
  require_same_length(x, y, "dot");
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) { sum += x[i] * y[i]; }
  return sum;
}

inline double max_norm(const StateVector& x)
{
  if (x.size() == 0) { throw ContractError("max_norm: empty vector"); }
  double m = 0.0;
  for (double v : x) { m = std::max(m, std::fabs(v)); }
  return m;
}

// Max norm restricted to entries [offset, offset + count). Used to
// measure error on a single solution component of a multi-species
// state stored in component-major order.
inline double max_norm_component(const StateVector& x, std::size_t offset,
                                 std::size_t count)
{
  if (count == 0 || offset + count > x.size()) {
    throw ContractError("max_norm_component: bad slice");
  }
  double m = 0.0;
  for (std::size_t i = offset; i < offset + count; ++i) {
    m = std::max(m, std::fabs(x[i]));
  }
  return m;
}

inline bool all_finite(const StateVector& x)
{
  for (double v : x) {
    if (!std::isfinite(v)) { return false; }
  }
  return true;
}

} // namespace multirate

#endif // MULTIRATE_STATE_VECTOR_HPP_
