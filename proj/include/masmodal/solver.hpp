// Incremental Newton-Raphson equilibrium solver with the analytic tangent.
#pragma once

#include "masmodal/assembly.hpp"

#include <string>
#include <vector>

namespace masmodal {

struct SolverSettings {
    double rel_tol = 1e-8;   // of the current external-load norm
    double abs_tol = 1.0;    // N, residual floor
    int max_iterations = 50; // Newton iterations per increment
    bool line_search = true; // backtracking halving
    int max_halvings = 8;
};

struct IncrementReport {
    int step = 0;
    int increment = 0;
    int iterations = 0;
    double residual = 0.0;
    double load_norm = 0.0;
    bool converged = false;
    bool regularized = false; // diagonal regularization was needed
    std::vector<double> residual_history;
    std::vector<double> energy_history; // potential energy per accepted iterate
};

struct SolveResult {
    bool ok = false;
    std::vector<EquilibriumState> states; // one per accepted increment
    std::vector<IncrementReport> reports;
    std::string message;
};

/// Solve the staged load case; one converged state per increment. On
/// non-convergence the result carries the increments solved so far and
/// ok = false with a diagnostic message.
SolveResult solve_equilibrium(const Model& model, const LoadCase& load_case,
                              const SolverSettings& settings);

/// Newton continuation from a converged state to a new total load vector.
/// Path independence of the nonlinear-elastic law makes the result agree
/// with a from-scratch solve of the same total load.
struct ContinueResult {
    bool ok = false;
    EquilibriumState state;
    IncrementReport report;
    std::string message;
};
ContinueResult continue_from(const Model& model, const EquilibriumState& base,
                             const Vec& f_total, const SolverSettings& settings);

} // namespace masmodal
