// SPDX-License-Identifier: BSD-3-Clause

#include "multirate/harness.hpp"

int main(int argc, char** argv) { return multirate::cli_main(argc, argv); }
