// SPDX-License-Identifier: BSD-3-Clause
//
// Butcher table catalog for the single-rate methods used in this
// library, with programmatic verification of the rooted-tree order
// conditions through order four.

#ifndef MULTIRATE_BUTCHER_HPP_
#define MULTIRATE_BUTCHER_HPP_

#include <string>
#include <vector>

namespace multirate {

enum class TableKind { Explicit, DiagonallyImplicit };

struct ButcherTable {
  std::string name;
  int stages = 0;
  std::vector<std::vector<double>> A; // stages x stages, lower triangular
  std::vector<double> b;              // weights
  std::vector<double> c;              // abscissae
  int order = 0;                      // claimed order
  TableKind kind = TableKind::Explicit;

  // Structural checks: triangularity matching `kind`, row-sum
  // consistency c_i = sum_j A_ij, sum(b) = 1. Throws on violation.
  void validate() const;
};

// Additively coupled pair sharing abscissae and stage count. The
// implicit table is an ESDIRK (trivial first stage), the explicit
// table is strictly lower triangular.
struct ArkPair {
  std::string name;
  ButcherTable explicit_table;
  ButcherTable implicit_table;
  int order = 0;

  void validate() const;
};

struct OrderConditionResult {
  bool pass = false;
  // One residual per condition, orders 1..p in the order listed in
  // `condition_names`.
  std::vector<double> residuals;
  std::vector<std::string> condition_names;
  double max_residual = 0.0;
};

// Evaluates all rooted-tree order conditions through order p <= 4
// (1: sum b = 1; 2: b.c = 1/2; 3: b.c^2 = 1/3, b.A.c = 1/6;
//  4: b.c^3 = 1/4, (b*c).A.c = 1/8, b.A.c^2 = 1/12, b.A.A.c = 1/24).
// Passes iff every residual is <= 1e-13.
OrderConditionResult verify_order_conditions(const ButcherTable& table, int p);

// Additive coupling conditions for an ARK pair through order p <= 4:
// each table's own conditions plus the mixed conditions b.A^x.c,
// (b*c).A^x.c, b.A^x.c^2 and b.A^x.A^y.c over both tables.
OrderConditionResult verify_ark_pair_order_conditions(const ArkPair& pair, int p);

// Known method identifiers:
//   heun2, kutta3, bogacki-shampine3, zonneveld4, classic-rk4,
//   cash-karp5, rk4-6stage-lowstorage  (single tables)
//   ark436-imex-pair, knoth-wolke3     (pair / MIS base table)
bool is_ark_pair_name(const std::string& name);
ButcherTable lookup_table(const std::string& name);
ArkPair lookup_ark_pair(const std::string& name);
std::vector<std::string> registered_table_names();

// Builds a Butcher table from Williamson 2N low-storage coefficients:
//   d_i = alpha_i d_{i-1} + h f(y_{i-1}),  y_i = y_{i-1} + beta_i d_i.
ButcherTable table_from_low_storage(const std::string& name,
                                    const std::vector<double>& alpha,
                                    const std::vector<double>& beta, int order);

} // namespace multirate

#endif // MULTIRATE_BUTCHER_HPP_
