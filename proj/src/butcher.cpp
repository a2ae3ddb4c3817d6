// SPDX-License-Identifier: BSD-3-Clause

#include "multirate/butcher.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "multirate/state_vector.hpp"

namespace multirate {

namespace {

constexpr double kResidualTol = 1.0e-13;
constexpr double kRowSumTol = 1.0e-14;

std::vector<double> mat_vec(const std::vector<std::vector<double>>& A,
                            const std::vector<double>& x)
{
  std::vector<double> y(A.size(), 0.0);
  for (std::size_t i = 0; i < A.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) { y[i] += A[i][j] * x[j]; }
  }
  return y;
}

double dot(const std::vector<double>& a, const std::vector<double>& b)
{
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) { s += a[i] * b[i]; }
  return s;
}

std::vector<double> pow_vec(const std::vector<double>& c, int p)
{
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) { out[i] = std::pow(c[i], p); }
  return out;
}

std::vector<double> hadamard(const std::vector<double>& a,
                             const std::vector<double>& b)
{
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) { out[i] = a[i] * b[i]; }
  return out;
}

} // namespace

void ButcherTable::validate() const
{
  if (stages <= 0 || static_cast<int>(A.size()) != stages ||
      static_cast<int>(b.size()) != stages ||
      static_cast<int>(c.size()) != stages) {
    throw ContractError("ButcherTable " + name + ": inconsistent sizes");
  }
  bool has_diagonal = false;
  for (int i = 0; i < stages; ++i) {
    if (static_cast<int>(A[i].size()) != stages) {
      throw ContractError("ButcherTable " + name + ": A is not square");
    }
    for (int j = i + 1; j < stages; ++j) {
      if (A[i][j] != 0.0) {
        throw ContractError("ButcherTable " + name + ": A not lower triangular");
      }
    }
    if (A[i][i] != 0.0) { has_diagonal = true; }
    if (kind == TableKind::Explicit && A[i][i] != 0.0) {
      throw ContractError("ButcherTable " + name +
                          ": explicit table has nonzero diagonal");
    }
    double row = 0.0;
    for (int j = 0; j <= i; ++j) { row += A[i][j]; }
    if (std::fabs(row - c[i]) > kRowSumTol) {
      throw ContractError("ButcherTable " + name + ": row sum != c at stage " +
                          std::to_string(i));
    }
  }
  if (kind == TableKind::DiagonallyImplicit && !has_diagonal) {
    throw ContractError("ButcherTable " + name +
                        ": diagonally-implicit table has all-zero diagonal");
  }
  double bsum = 0.0;
  for (double w : b) { bsum += w; }
  if (std::fabs(bsum - 1.0) > kRowSumTol) {
    throw ContractError("ButcherTable " + name + ": sum(b) != 1");
  }
}

void ArkPair::validate() const
{
  explicit_table.validate();
  implicit_table.validate();
  if (explicit_table.stages != implicit_table.stages) {
    throw ContractError("ArkPair " + name + ": stage count mismatch");
  }
  for (int i = 0; i < explicit_table.stages; ++i) {
    if (std::fabs(explicit_table.c[i] - implicit_table.c[i]) > kRowSumTol) {
      throw ContractError("ArkPair " + name + ": abscissae differ at stage " +
                          std::to_string(i));
    }
  }
}

OrderConditionResult verify_order_conditions(const ButcherTable& table, int p)
{
  if (p < 1 || p > 4) {
    throw ContractError("verify_order_conditions: p must be in 1..4");
  }
  const auto& A = table.A;
  const auto& b = table.b;
  const auto& c = table.c;

  OrderConditionResult r;
  auto add = [&r](const std::string& cname, double value, double target) {
    r.condition_names.push_back(cname);
    r.residuals.push_back(value - target);
  };

  double bsum = 0.0;
  for (double w : b) { bsum += w; }
  add("sum(b)=1", bsum, 1.0);
  if (p >= 2) { add("b.c=1/2", dot(b, c), 0.5); }
  if (p >= 3) {
    add("b.c^2=1/3", dot(b, pow_vec(c, 2)), 1.0 / 3.0);
    add("b.A.c=1/6", dot(b, mat_vec(A, c)), 1.0 / 6.0);
  }
  if (p >= 4) {
    add("b.c^3=1/4", dot(b, pow_vec(c, 3)), 0.25);
    add("(b*c).A.c=1/8", dot(hadamard(b, c), mat_vec(A, c)), 0.125);
    add("b.A.c^2=1/12", dot(b, mat_vec(A, pow_vec(c, 2))), 1.0 / 12.0);
    add("b.A.A.c=1/24", dot(b, mat_vec(A, mat_vec(A, c))), 1.0 / 24.0);
  }

  r.max_residual = 0.0;
  for (double res : r.residuals) {
    r.max_residual = std::max(r.max_residual, std::fabs(res));
  }
  r.pass = r.max_residual <= kResidualTol;
  return r;
}

OrderConditionResult verify_ark_pair_order_conditions(const ArkPair& pair, int p)
{
  OrderConditionResult r;
  auto merge = [&r](const OrderConditionResult& part, const std::string& tag) {
    for (std::size_t i = 0; i < part.residuals.size(); ++i) {
      r.condition_names.push_back(tag + ":" + part.condition_names[i]);
      r.residuals.push_back(part.residuals[i]);
    }
  };
  merge(verify_order_conditions(pair.explicit_table, p), "E");
  merge(verify_order_conditions(pair.implicit_table, p), "I");

  // Mixed coupling conditions over both tables. b and c are shared.
  const auto& b = pair.implicit_table.b;
  const auto& c = pair.implicit_table.c;
  const std::vector<std::vector<double>>* tables[2] = {&pair.explicit_table.A,
                                                       &pair.implicit_table.A};
  const char* tag[2] = {"E", "I"};
  auto add = [&r](const std::string& cname, double value, double target) {
    r.condition_names.push_back(cname);
    r.residuals.push_back(value - target);
  };
  if (p >= 3) {
    for (int x = 0; x < 2; ++x) {
      add(std::string("b.A") + tag[x] + ".c=1/6",
          dot(b, mat_vec(*tables[x], c)), 1.0 / 6.0);
    }
  }
  if (p >= 4) {
    for (int x = 0; x < 2; ++x) {
      add(std::string("(b*c).A") + tag[x] + ".c=1/8",
          dot(hadamard(b, c), mat_vec(*tables[x], c)), 0.125);
      add(std::string("b.A") + tag[x] + ".c^2=1/12",
          dot(b, mat_vec(*tables[x], pow_vec(c, 2))), 1.0 / 12.0);
      for (int y = 0; y < 2; ++y) {
        add(std::string("b.A") + tag[x] + ".A" + tag[y] + ".c=1/24",
            dot(b, mat_vec(*tables[x], mat_vec(*tables[y], c))), 1.0 / 24.0);
      }
    }
  }

  r.max_residual = 0.0;
  for (double res : r.residuals) {
    r.max_residual = std::max(r.max_residual, std::fabs(res));
  }
  r.pass = r.max_residual <= kResidualTol;
  return r;
}

ButcherTable table_from_low_storage(const std::string& name,
                                    const std::vector<double>& alpha,
                                    const std::vector<double>& beta, int order)
{
  const int s = static_cast<int>(beta.size());
  if (static_cast<int>(alpha.size()) != s) {
    throw ContractError("table_from_low_storage: alpha/beta size mismatch");
  }
  // Accumulated coefficient of k_j in y_i, built stage by stage.
  std::vector<std::vector<double>> y_coeff(s + 1, std::vector<double>(s, 0.0));
  std::vector<double> d_coeff(s, 0.0);
  for (int i = 1; i <= s; ++i) {
    for (int j = 0; j < s; ++j) { d_coeff[j] *= alpha[i - 1]; }
    d_coeff[i - 1] += 1.0; // + h f(y_{i-1})
    y_coeff[i] = y_coeff[i - 1];
    for (int j = 0; j < s; ++j) { y_coeff[i][j] += beta[i - 1] * d_coeff[j]; }
  }

  ButcherTable t;
  t.name = name;
  t.stages = s;
  t.order = order;
  t.kind = TableKind::Explicit;
  t.A.assign(s, std::vector<double>(s, 0.0));
  t.c.assign(s, 0.0);
  for (int i = 0; i < s; ++i) {
    t.A[i] = y_coeff[i]; // stage i evaluates f at y_{i-1}
    for (int j = 0; j < s; ++j) { t.c[i] += t.A[i][j]; }
  }
  t.b = y_coeff[s];
  return t;
}

namespace {

ButcherTable make_heun2()
{
  ButcherTable t;
  t.name = "heun2";
  t.stages = 2;
  t.order = 2;
  t.kind = TableKind::Explicit;
  t.A = {{0, 0}, {1, 0}};
  t.b = {0.5, 0.5};
  t.c = {0, 1};
  return t;
}

ButcherTable make_kutta3()
{
  ButcherTable t;
  t.name = "kutta3";
  t.stages = 3;
  t.order = 3;
  t.kind = TableKind::Explicit;
  t.A = {{0, 0, 0}, {0.5, 0, 0}, {-1, 2, 0}};
  t.b = {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0};
  t.c = {0, 0.5, 1};
  return t;
}

// Third-order part of the Bogacki-Shampine 3(2) pair. The fourth
// stage exists only for the second-order embedding, which is not
// registered here, so the table is the bare three-stage method.
ButcherTable make_bogacki_shampine3()
{
  ButcherTable t;
  t.name = "bogacki-shampine3";
  t.stages = 3;
  t.order = 3;
  t.kind = TableKind::Explicit;
  t.A = {{0, 0, 0}, {0.5, 0, 0}, {0, 0.75, 0}};
  t.b = {2.0 / 9.0, 1.0 / 3.0, 4.0 / 9.0};
  t.c = {0, 0.5, 0.75};
  return t;
}

// Zonneveld 4(3). The fifth stage carries zero weight in the
// fourth-order solution and exists for the (unregistered) embedding;
// it is kept so evaluation counts match the five-stage method.
ButcherTable make_zonneveld4()
{
  ButcherTable t;
  t.name = "zonneveld4";
  t.stages = 5;
  t.order = 4;
  t.kind = TableKind::Explicit;
  t.A = {{0, 0, 0, 0, 0},
         {0.5, 0, 0, 0, 0},
         {0, 0.5, 0, 0, 0},
         {0, 0, 1, 0, 0},
         {5.0 / 32.0, 7.0 / 32.0, 13.0 / 32.0, -1.0 / 32.0, 0}};
  t.b = {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0, 0};
  t.c = {0, 0.5, 0.5, 1, 0.75};
  return t;
}

ButcherTable make_classic_rk4()
{
  ButcherTable t;
  t.name = "classic-rk4";
  t.stages = 4;
  t.order = 4;
  t.kind = TableKind::Explicit;
  t.A = {{0, 0, 0, 0}, {0.5, 0, 0, 0}, {0, 0.5, 0, 0}, {0, 0, 1, 0}};
  t.b = {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0};
  t.c = {0, 0.5, 0.5, 1};
  return t;
}

ButcherTable make_cash_karp5()
{
  ButcherTable t;
  t.name = "cash-karp5";
  t.stages = 6;
  t.order = 5;
  t.kind = TableKind::Explicit;
  t.A = {{0, 0, 0, 0, 0, 0},
         {1.0 / 5.0, 0, 0, 0, 0, 0},
         {3.0 / 40.0, 9.0 / 40.0, 0, 0, 0, 0},
         {3.0 / 10.0, -9.0 / 10.0, 6.0 / 5.0, 0, 0, 0},
         {-11.0 / 54.0, 5.0 / 2.0, -70.0 / 27.0, 35.0 / 27.0, 0, 0},
         {1631.0 / 55296.0, 175.0 / 512.0, 575.0 / 13824.0,
          44275.0 / 110592.0, 253.0 / 4096.0, 0}};
  t.b = {37.0 / 378.0, 0, 250.0 / 621.0, 125.0 / 594.0, 0, 512.0 / 1771.0};
  t.c = {0, 1.0 / 5.0, 3.0 / 10.0, 3.0 / 5.0, 1, 7.0 / 8.0};
  return t;
}

// Six-stage fourth-order scheme in Williamson 2N low-storage form.
// Coefficients solve the eight order-four conditions for the 2N
// structure; see tests for the algebraic and empirical verification.
ButcherTable make_rk4_6stage_lowstorage()
{
  const std::vector<double> alpha = {
      0.0,
      -0.43693510718281692,
      -2.0716803848878147,
      2.7997067661023740,
      -0.96235567640786113,
      -1.1269500816992417};
  const std::vector<double> beta = {
      0.14348756634698168,
      0.49376119907142541,
      -0.30258939611000901,
      0.40217988348259470,
      0.47741403540363953,
      0.17978332708098069};
  return table_from_low_storage("rk4-6stage-lowstorage", alpha, beta, 4);
}

// Knoth-Wolke third-order method, the base table for the explicit
// MIS/MRI scheme.
ButcherTable make_knoth_wolke3()
{
  ButcherTable t;
  t.name = "knoth-wolke3";
  t.stages = 3;
  t.order = 3;
  t.kind = TableKind::Explicit;
  t.A = {{0, 0, 0},
         {1.0 / 3.0, 0, 0},
         {-3.0 / 16.0, 15.0 / 16.0, 0}};
  t.b = {1.0 / 6.0, 3.0 / 10.0, 8.0 / 15.0};
  t.c = {0, 1.0 / 3.0, 3.0 / 4.0};
  return t;
}

// ARK4(3)6L[2]SA additive pair: six-stage, fourth-order, ESDIRK
// implicit part with diagonal 1/4 and a companion explicit table.
ArkPair make_ark436()
{
  ArkPair p;
  p.name = "ark436-imex-pair";
  p.order = 4;

  ButcherTable& e = p.explicit_table;
  e.name = "ark436-explicit";
  e.stages = 6;
  e.order = 4;
  e.kind = TableKind::Explicit;
  e.c = {0, 0.5, 83.0 / 250.0, 31.0 / 50.0, 17.0 / 20.0, 1.0};
  e.A.assign(6, std::vector<double>(6, 0.0));
  e.A[1][0] = 0.5;
  e.A[2][0] = 13861.0 / 62500.0;
  e.A[2][1] = 6889.0 / 62500.0;
  e.A[3][0] = -116923316275.0 / 2393684061468.0;
  e.A[3][1] = -2731218467317.0 / 15368042101831.0;
  e.A[3][2] = 9408046702089.0 / 11113171139209.0;
  e.A[4][0] = -451086348788.0 / 2902428689909.0;
  e.A[4][1] = -2682348792572.0 / 7519795681897.0;
  e.A[4][2] = 12662868775082.0 / 11960479115383.0;
  e.A[4][3] = 3355817975965.0 / 11060851509271.0;
  e.A[5][0] = 647845179188.0 / 3216320057751.0;
  e.A[5][1] = 73281519250.0 / 8382639484533.0;
  e.A[5][2] = 552539513391.0 / 3454668386233.0;
  e.A[5][3] = 3354512671639.0 / 8306763924573.0;
  e.A[5][4] = 4040.0 / 17871.0;
  e.b = {82889.0 / 524892.0, 0.0, 15625.0 / 83664.0, 69875.0 / 102672.0,
         -2260.0 / 8211.0, 0.25};

  ButcherTable& im = p.implicit_table;
  im.name = "ark436-implicit";
  im.stages = 6;
  im.order = 4;
  im.kind = TableKind::DiagonallyImplicit;
  im.c = e.c;
  im.A.assign(6, std::vector<double>(6, 0.0));
  im.A[1][0] = 0.25;
  im.A[1][1] = 0.25;
  im.A[2][0] = 8611.0 / 62500.0;
  im.A[2][1] = -1743.0 / 31250.0;
  im.A[2][2] = 0.25;
  im.A[3][0] = 5012029.0 / 34652500.0;
  im.A[3][1] = -654441.0 / 2922500.0;
  im.A[3][2] = 174375.0 / 388108.0;
  im.A[3][3] = 0.25;
  im.A[4][0] = 15267082809.0 / 155376265600.0;
  im.A[4][1] = -71443401.0 / 120774400.0;
  im.A[4][2] = 730878875.0 / 902184768.0;
  im.A[4][3] = 2285395.0 / 8070912.0;
  im.A[4][4] = 0.25;
  im.A[5][0] = 82889.0 / 524892.0;
  im.A[5][1] = 0.0;
  im.A[5][2] = 15625.0 / 83664.0;
  im.A[5][3] = 69875.0 / 102672.0;
  im.A[5][4] = -2260.0 / 8211.0;
  im.A[5][5] = 0.25;
  im.b = e.b;

  return p;
}

} // namespace

bool is_ark_pair_name(const std::string& name)
{
  return name == "ark436-imex-pair";
}

ButcherTable lookup_table(const std::string& name)
{
  ButcherTable t;
  if (name == "heun2") { t = make_heun2(); }
  else if (name == "kutta3") { t = make_kutta3(); }
  else if (name == "bogacki-shampine3") { t = make_bogacki_shampine3(); }
  else if (name == "zonneveld4") { t = make_zonneveld4(); }
  else if (name == "classic-rk4") { t = make_classic_rk4(); }
  else if (name == "cash-karp5") { t = make_cash_karp5(); }
  else if (name == "rk4-6stage-lowstorage") { t = make_rk4_6stage_lowstorage(); }
  else if (name == "knoth-wolke3") { t = make_knoth_wolke3(); }
  else {
    std::string known;
    for (const auto& n : registered_table_names()) { known += " " + n; }
    throw ContractError("lookup_table: unknown method '" + name +
                        "'; valid names:" + known);
  }
  t.validate();
  return t;
}

ArkPair lookup_ark_pair(const std::string& name)
{
  if (name != "ark436-imex-pair") {
    throw ContractError("lookup_ark_pair: unknown pair '" + name +
                        "'; valid names: ark436-imex-pair");
  }
  ArkPair p = make_ark436();
  p.validate();
  return p;
}

std::vector<std::string> registered_table_names()
{
  return {"heun2",       "kutta3",     "bogacki-shampine3",
          "zonneveld4",  "classic-rk4", "cash-karp5",
          "rk4-6stage-lowstorage", "knoth-wolke3", "ark436-imex-pair"};
}

} // namespace multirate
