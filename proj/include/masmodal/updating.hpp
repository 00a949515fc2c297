// Grid-search (E, rho) model updating against target frequencies, for linear
// and damaged modal models.
#pragma once

#include "masmodal/modal.hpp"

namespace masmodal {

struct UpdateSpec {
    std::vector<double> targets; // Hz, positive ascending
    double e_min = 0.0, e_max = 0.0, e_step = 0.0;       // Pa
    double rho_min = 0.0, rho_max = 0.0, rho_step = 0.0; // kg/m^3
    enum class Mode { Linear, Damaged };
    Mode mode = Mode::Linear;
    std::string load_case; // damaged mode: staged loads (e.g. self-weight)

    void validate() const; // throws std::invalid_argument
    std::vector<double> e_values() const;
    std::vector<double> rho_values() const;
};

/// The model with every masonry material's (E, rho) replaced; Poisson's
/// ratio and non-masonry materials are kept.
Model with_material(const Model& model, double young, double rho);

struct UpdatePoint {
    double young = 0.0, rho = 0.0;
    double objective = 0.0; // Hz^2
    bool converged = false;
    Vec frequencies;
};

struct UpdateResult {
    std::vector<double> e_values, rho_values;
    std::vector<UpdatePoint> points; // E-major: index = ie * n_rho + irho
    int argmin = -1;                 // index into points, -1 when all failed
    UpdateSpec::Mode mode = UpdateSpec::Mode::Linear;
    const UpdatePoint& best() const { return points.at(argmin); }
};

/// Sum of squared frequency errors over the first |targets| modes at the
/// given material point. Damaged mode runs the full prestressed pipeline on
/// the spec's load case. converged=false flags solver failure (objective is
/// then meaningless and the point is excluded from argmin).
UpdatePoint evaluate_objective(const Model& model, double young, double rho,
                               const UpdateSpec& spec, const SolverSettings& solver);

/// Exhaustive deterministic grid search; ties broken by smaller E, then
/// smaller rho. Grid points are evaluated concurrently when threads > 1.
UpdateResult grid_search(const Model& model, const UpdateSpec& spec,
                         const SolverSettings& solver, int threads = 1);

} // namespace masmodal
