// SPDX-License-Identifier: BSD-3-Clause

#include <doctest.h>

#include <random>

#include "multirate/partitioned_system.hpp"
#include "multirate/state_vector.hpp"

using namespace multirate;

TEST_CASE("axpy_combination basics")
{
  StateVector v{1.0, -2.0, 3.0};

  SUBCASE("identity")
  {
    StateVector out = axpy_combination({1.0}, {&v});
    CHECK(out == v);
  }
  SUBCASE("cancellation")
  {
    StateVector out = axpy_combination({1.0, -1.0}, {&v, &v});
    for (double x : out) { CHECK(x == 0.0); }
  }
  SUBCASE("hand evaluation")
  {
    StateVector e1{1.0, 0.0}, e2{0.0, 1.0};
    StateVector out = axpy_combination({2.0, 3.0}, {&e1, &e2});
    CHECK(out[0] == doctest::Approx(2.0));
    CHECK(out[1] == doctest::Approx(3.0));
  }
  SUBCASE("length mismatch throws")
  {
    StateVector w{1.0, 2.0};
    CHECK_THROWS_AS(axpy_combination({1.0, 1.0}, {&v, &w}), ContractError);
  }
}

TEST_CASE("axpy_combination matches entrywise formula on random vectors")
{
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> dist(-5.0, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng() % 8;
    StateVector a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = dist(rng);
      b[i] = dist(rng);
    }
    const double alpha = dist(rng), beta = dist(rng);
    StateVector out = axpy_combination({alpha, beta}, {&a, &b});
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(out[i] == doctest::Approx(alpha * a[i] + beta * b[i]).epsilon(1e-14));
    }
  }
}

TEST_CASE("elementwise_product")
{
  StateVector x{1.0, 2.0, 3.0}, y{4.0, 5.0, 6.0};
  StateVector z = elementwise_product(x, y);
  CHECK(z == StateVector{4.0, 10.0, 18.0});

  StateVector ones(3, 1.0), zeros(3, 0.0);
  CHECK(elementwise_product(ones, y) == y);
  CHECK(elementwise_product(zeros, y) == zeros);

  // commutative to machine precision
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    StateVector a(5), b(5);
    for (int i = 0; i < 5; ++i) {
      a[i] = dist(rng);
      b[i] = dist(rng);
    }
    CHECK(elementwise_product(a, b) == elementwise_product(b, a));
  }
}

TEST_CASE("wrms_norm")
{
  StateVector ones(4, 1.0);
  CHECK(wrms_norm(StateVector(4, 0.0), ones) == 0.0);
  CHECK(wrms_norm(ones, ones) == doctest::Approx(1.0));

  StateVector x{3.0, 4.0}, w{1.0, 1.0};
  CHECK(wrms_norm(x, w) == doctest::Approx(std::sqrt(25.0 / 2.0)));

  CHECK_THROWS_AS(wrms_norm(StateVector(), StateVector()), ContractError);

  // zero iff every weighted entry is zero
  StateVector masked{5.0, 7.0};
  StateVector wz{0.0, 0.0};
  CHECK(wrms_norm(masked, wz) == 0.0);
  StateVector wpartial{0.0, 1.0};
  CHECK(wrms_norm(masked, wpartial) > 0.0);
}

TEST_CASE("max norms")
{
  CHECK(max_norm(StateVector(3, 0.0)) == 0.0);
  CHECK(max_norm(StateVector{-5.0, 2.0}) == 5.0);
  CHECK_THROWS_AS(max_norm(StateVector()), ContractError);

  // component-major slices: u entries then v entries
  StateVector x{0.1, -0.3, 9.0, 9.0};
  CHECK(max_norm_component(x, 0, 2) == doctest::Approx(0.3));
  CHECK(max_norm_component(x, 2, 2) == doctest::Approx(9.0));
  CHECK_THROWS_AS(max_norm_component(x, 3, 2), ContractError);
}

TEST_CASE("PartitionedSystem validation and sums")
{
  PartitionedSystem sys;
  sys.dimension = 2;
  CHECK_THROWS_AS(sys.validate(), ContractError);

  sys.f_fast = [](double, const StateVector& y) {
    return StateVector{y[1], -y[0]};
  };
  sys.f_explicit = [](double, const StateVector& y) {
    return StateVector{2.0 * y[0], 0.0};
  };
  sys.validate();

  StateVector y{1.0, 2.0};
  StateVector sum = sys.sum_rhs(0.0, y);
  CHECK(sum[0] == doctest::Approx(2.0 + 2.0));
  CHECK(sum[1] == doctest::Approx(-1.0));

  StateVector slow = sys.slow_rhs(0.0, y);
  CHECK(slow[0] == doctest::Approx(2.0));
  CHECK(slow[1] == 0.0);
}

TEST_CASE("EvalCounters reset")
{
  EvalCounters c;
  c.n_fast_evals = 7;
  c.n_implicit_solves = 3;
  c.reset();
  CHECK(c.n_fast_evals == 0);
  CHECK(c.n_implicit_solves == 0);
  CHECK(c.slow_evals() == 0);
}
