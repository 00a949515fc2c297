// Constrained generalized eigen-solution (shift-invert Lanczos with a dense
// fallback), the prestressed modal pipeline, and modal diagnostics.
#pragma once

#include "masmodal/solver.hpp"

#include <string>
#include <vector>

namespace masmodal {

struct EigenOptions {
    int n_modes = 6;
    double shift = 0.0; // omega^2 shift for the shift-invert operator
    double tol = 1e-10; // Ritz residual tolerance
    enum class Method { Auto, Dense, Lanczos };
    Method method = Method::Auto;
    int dense_threshold = 200; // Auto: dense at or below this many free dofs
    unsigned seed = 20240901u; // deterministic Lanczos start vector
};

struct ModalResult {
    int n_modes = 0;
    Vec frequencies;          // Hz, ascending
    Vec omega;                // rad/s
    Vec lambda;               // omega^2
    Eigen::MatrixXd shapes;   // full dof space, mass-normalized columns
    Vec residuals;            // ||K q - lambda M q|| / ||K q|| on the reduced pair
    std::vector<bool> near_zero; // zero-energy (collapse) modes, reported honestly
};

/// n_modes smallest eigenpairs of (K, M) under the constraint reduction.
/// Throws std::invalid_argument when n_modes exceeds the free dof count.
ModalResult solve_eigen(const SpMat& k, const SpMat& m, const Reduction& red,
                        const EigenOptions& opts);

Reduction identity_reduction(int n);

struct PrestressedModal {
    bool ok = false;
    std::string message;
    ModalResult linear;                // step 1, elastic K
    std::vector<ModalResult> damaged;  // step 3 about each converged increment
    SolveResult solve;                 // step 2 trace
};

/// Steps 1-3 about the converged states of the load case: linear modal, the
/// nonlinear equilibrium path, and a damaged modal result per increment.
PrestressedModal prestressed_modal(const Model& model, const LoadCase& load_case,
                                   const SolverSettings& solver_settings,
                                   const EigenOptions& eigen_options);

/// Mass-weighted modal assurance criterion, in [0, 1]; scale and sign
/// invariant in both arguments. Throws on zero vectors.
double mac_m(const Vec& phi_a, const Vec& phi_b, const SpMat& m);

struct ModeTracking {
    Eigen::MatrixXd mac;          // mac(i, j) = MAC-M(linear_i, damaged_j)
    std::vector<int> permutation; // greedy best damaged match per linear mode
};
ModeTracking mode_tracking(const ModalResult& linear, const ModalResult& damaged,
                           const SpMat& m);

struct EffectiveModalMass {
    Vec gamma;         // (phi . M r)^2 per mode, kg
    Vec percent;       // of total translational mass r^T M r
    double total_mass; // r^T M r with the full rigid-translation influence
};
/// Effective modal masses for a global translation direction (Dof::Ux/Uy).
EffectiveModalMass effective_modal_mass(const ModalResult& result, const SpMat& m,
                                        const DofMap& dofs, Dof direction);

} // namespace masmodal
