// SPDX-License-Identifier: BSD-3-Clause
//
// Internal: parameterized builders for the solve-decoupled IMEX
// coupling structures. The free parameters fill the coupling entries
// left open after the row-sum consistency constraints are eliminated;
// the frozen parameter vectors live in mri_tables.cpp.

#ifndef MULTIRATE_SRC_MRI_TABLE_BUILDERS_HPP_
#define MULTIRATE_SRC_MRI_TABLE_BUILDERS_HPP_

#include <vector>

#include "multirate/mri.hpp"

namespace multirate::detail {

// Three implicit solves / three fast IVPs over abscissae
// (0, 1/3, 1/3, 2/3, 2/3, 1, 1); degree-0 forcing. 14 parameters.
MriCoupling build_imex_gark3_structure(const std::vector<double>& p);
int imex_gark3_parameter_count();

// Five implicit solves / five fast IVPs over abscissae
// (0, 1/2, 1/2, 5/8, 5/8, 3/4, 3/4, 7/8, 7/8, 1, 1); degree-1 forcing
// on the fast-IVP rows. 62 parameters.
MriCoupling build_imex_gark4_structure(const std::vector<double>& p);
int imex_gark4_parameter_count();

} // namespace multirate::detail

#endif // MULTIRATE_SRC_MRI_TABLE_BUILDERS_HPP_
