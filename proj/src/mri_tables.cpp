// SPDX-License-Identifier: BSD-3-Clause
//
// Registered multirate coupling tables.

#include <vector>

#include "mri_table_builders.hpp"
#include "multirate/butcher.hpp"
#include "multirate/mri.hpp"

namespace multirate {

namespace detail {

namespace {

// Fills one coupling row at the given columns: the leading column
// absorbs the row-sum constraint, the remaining entries come from the
// parameter stream.
struct ParamStream {
  const std::vector<double>& p;
  std::size_t next = 0;
  double take()
  {
    if (next >= p.size()) {
      throw ContractError("coupling builder: parameter vector too short");
    }
    return p[next++];
  }
};

void fill_constrained_row(std::vector<double>& row,
                          const std::vector<int>& cols, double row_sum,
                          ParamStream& ps)
{
  double partial = 0.0;
  for (std::size_t k = 1; k < cols.size(); ++k) {
    row[cols[k]] = ps.take();
    partial += row[cols[k]];
  }
  row[cols[0]] = row_sum - partial;
}

} // namespace

MriCoupling build_imex_gark3_structure(const std::vector<double>& p)
{
  MriCoupling cp;
  cp.name = "imex-mri-gark3b";
  cp.order = 3;
  cp.stages = 7;
  const double th = 1.0 / 3.0;
  cp.c = {0.0, th, th, 2.0 * th, 2.0 * th, 1.0, 1.0};
  cp.stage_kind = {StageKind::ExplicitUpdate, StageKind::FastIvp,
                   StageKind::ImplicitSolve,  StageKind::FastIvp,
                   StageKind::ImplicitSolve,  StageKind::FastIvp,
                   StageKind::ImplicitSolve};
  cp.gamma.assign(1, std::vector<std::vector<double>>(
                         7, std::vector<double>(7, 0.0)));
  cp.omega.assign(1, std::vector<std::vector<double>>(
                         7, std::vector<double>(7, 0.0)));
  auto& G = cp.gamma[0];
  auto& W = cp.omega[0];

  ParamStream ps{p};
  const double diag = ps.take(); // shared implicit diagonal

  // gamma: implicit slow couplings, columns at the solve stages plus
  // the step start
  G[1][0] = th;
  G[2][2] = diag;
  G[2][0] = -diag;
  fill_constrained_row(G[3], {0, 2}, th, ps);
  G[4][4] = diag;
  fill_constrained_row(G[4], {0, 2}, -diag, ps);
  fill_constrained_row(G[5], {0, 2, 4}, th, ps);
  G[6][6] = diag;
  fill_constrained_row(G[6], {0, 2, 4}, -diag, ps);

  // omega: explicit slow couplings, one referenced column per abscissa
  W[1][0] = th;
  fill_constrained_row(W[3], {0, 2}, th, ps);
  fill_constrained_row(W[4], {0, 2}, 0.0, ps);
  fill_constrained_row(W[5], {0, 2, 4}, th, ps);
  fill_constrained_row(W[6], {0, 2, 4, 5}, 0.0, ps);

  if (ps.next != p.size()) {
    throw ContractError("imex-gark3 builder: parameter count mismatch");
  }
  cp.finalize();
  return cp;
}

int imex_gark3_parameter_count() { return 14; }

MriCoupling build_imex_gark4_structure(const std::vector<double>& p)
{
  MriCoupling cp;
  cp.name = "imex-mri-gark4";
  cp.order = 4;
  cp.stages = 11;
  cp.c = {0.0, 0.5, 0.5, 0.625, 0.625, 0.75, 0.75, 0.875, 0.875, 1.0, 1.0};
  cp.stage_kind.assign(11, StageKind::FastIvp);
  cp.stage_kind[0] = StageKind::ExplicitUpdate;
  for (int i = 2; i < 11; i += 2) { cp.stage_kind[i] = StageKind::ImplicitSolve; }
  cp.gamma.assign(2, std::vector<std::vector<double>>(
                         11, std::vector<double>(11, 0.0)));
  cp.omega.assign(2, std::vector<std::vector<double>>(
                         11, std::vector<double>(11, 0.0)));
  auto& G0 = cp.gamma[0];
  auto& G1 = cp.gamma[1];
  auto& W0 = cp.omega[0];
  auto& W1 = cp.omega[1];

  const std::vector<double> dc = {0.0, 0.5, 0.0, 0.125, 0.0, 0.125,
                                  0.0, 0.125, 0.0, 0.125, 0.0};
  ParamStream ps{p};
  const double diag = ps.take();

  // gamma columns: the step start and the solve stages
  auto gamma_cols = [](int row) {
    std::vector<int> cols = {0};
    for (int j = 2; j < row; j += 2) { cols.push_back(j); }
    return cols;
  };
  G0[1][0] = dc[1];
  for (int i = 2; i < 11; ++i) {
    std::vector<int> cols = gamma_cols(i);
    if (cp.stage_kind[i] == StageKind::ImplicitSolve) {
      G0[i][i] = diag;
      fill_constrained_row(G0[i], cols, -diag, ps);
    } else {
      fill_constrained_row(G0[i], cols, dc[i], ps);
      // linear-in-tau forcing terms, zero row sum
      if (cols.size() > 1) { fill_constrained_row(G1[i], cols, 0.0, ps); }
    }
  }

  // omega columns: step start, post-solve stages, and the last IVP result
  auto omega_cols = [](int row) {
    std::vector<int> cols = {0};
    for (int j = 2; j < row && j <= 8; j += 2) { cols.push_back(j); }
    if (row == 10) { cols.push_back(9); }
    return cols;
  };
  W0[1][0] = dc[1];
  for (int i = 2; i < 11; ++i) {
    std::vector<int> cols = omega_cols(i);
    const double rs = (cp.stage_kind[i] == StageKind::FastIvp) ? dc[i] : 0.0;
    if (cols.size() == 1 && rs == 0.0) { continue; }
    fill_constrained_row(W0[i], cols, rs, ps);
    if (cp.stage_kind[i] == StageKind::FastIvp && cols.size() > 1) {
      fill_constrained_row(W1[i], cols, 0.0, ps);
    }
  }

  if (ps.next != p.size()) {
    throw ContractError("imex-gark4 builder: parameter count mismatch (used " +
                        std::to_string(ps.next) + " of " +
                        std::to_string(p.size()) + ")");
  }
  cp.finalize();
  return cp;
}

int imex_gark4_parameter_count()
{
  // diag + gamma0 rows (0+1+1+2+2+3+3+4+4) + gamma1 ivp rows (1+2+3+4)
  //      + omega0 rows (0+1+1+2+2+3+3+4+5) + omega1 ivp rows (1+2+3+4)
  return 1 + 20 + 10 + 21 + 10;
}

} // namespace detail

namespace {

// Frozen parameter vectors for the IMEX couplings. The values solve
// the order conditions of the solve-decoupled coupling structure; see
// the registry tests for the algebraic and empirical verification.
const std::vector<double>& imex_gark3_params()
{
  static const std::vector<double> p = {
      0.39797156034834225,   0.2766091875083434,   -0.18175948771783931,
      0.31813084495424637,   -0.48410595741516826, 0.38296257595193434,
      -0.35778028397820089,  0.66096417801337648,  -0.44254981898775314,
      0.55637581688664917,   0.67291564352436362,  -0.086525832785747325,
      -0.61117998665088857,  0.2294214477088416};
  return p;
}

const std::vector<double>& imex_gark4_params()
{
  static const std::vector<double> p = {
      0.29847193662693694, 0.8897293427664642, 0.54871445497792193,
      -1.7048375512400959, 0.98963850083938132, 0.11715925127708941,
      0.52043869443702029, -0.027596847735154559, -0.4995519369517547,
      -0.69383813976672526, 0.62649454605234756, 0.66299523257848825,
      -1.676553607176406, 0.72469923286283333, -0.078471413921114522,
      -0.35539480883256597, -1.1879515045759497, -0.48283319482907811,
      1.6208780662980922, 0.66775884777610839, 0.62747802023841748,
      0.10839922403757078, -0.41224549909376923, -1.2499659547001511,
      -0.77992342918813762, 0.17386537024448637, 0.39831975865602876,
      0.16216727959369551, 0.069403888136764638, -0.03881780463001596,
      -0.44997353273126767, 0.99578903140758446, 0.67872398919204768,
      0.39549740638842684, -1.2631400351444177, 0.069646628168817143,
      -0.5061821632978678, -0.0018719195581745264, -0.052236323732823532,
      0.13507280626492146, 0.55885062855893097, 0.21659734089666594,
      -1.1033359382936203, -0.083685762178699996, -0.20455147599565907,
      0.06165098779698535, -0.43913648427277219, -0.26320165074481561,
      1.465093766442217, 0.45077108190518583, 0.29207612735827693,
      -0.008127860401470146, -0.10707041996019596, -0.7057066360562656,
      -0.52046500187563371, -0.18893464671544996, 0.35079379390353849,
      0.17543973156200332, 0.069163224768091378, -0.066736168620268349,
      -0.43483606946730358, 0.29910811716642027};
  return p;
}

} // namespace

MriCoupling register_coupling(const std::string& name)
{
  if (name == "mis-kw3") {
    // Explicit MIS method over the Knoth-Wolke base table. The widest
    // stage interval is split in half so each step evolves four fast
    // IVPs and evaluates the slow RHS at four abscissae, matching the
    // per-step operation counts reported for this method.
    return coupling_from_mis("mis-kw3", lookup_table("knoth-wolke3"), 3,
                             /*split_widest_stage=*/true);
  }
  if (name == "imex-mri-gark3b") {
    return detail::build_imex_gark3_structure(imex_gark3_params());
  }
  if (name == "imex-mri-gark4") {
    return detail::build_imex_gark4_structure(imex_gark4_params());
  }
  throw ContractError("register_coupling: unknown name '" + name +
                      "'; valid names: mis-kw3 imex-mri-gark3b imex-mri-gark4");
}

std::vector<std::string> registered_coupling_names()
{
  return {"mis-kw3", "imex-mri-gark3b", "imex-mri-gark4"};
}

} // namespace multirate
