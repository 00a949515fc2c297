// Output helpers: CSV formatting, MatrixMarket export, run log.
#pragma once

#include "masmodal/solver.hpp"

#include <fstream>
#include <string>

namespace masmodal {

/// Frequencies and other reals at 6 significant digits.
std::string fmt6(double v);
/// Full-precision round-trippable real.
std::string fmt17(double v);

std::ofstream open_output(const std::string& path); // throws on failure

/// Symmetric sparse matrix in MatrixMarket coordinate format (lower triangle).
void write_matrix_market(const std::string& path, const SpMat& a);

/// Line-oriented machine-readable solver report.
void write_run_log(const std::string& path, const std::vector<IncrementReport>& reports);

} // namespace masmodal
