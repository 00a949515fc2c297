// Global assembly (mass, elastic and tangent stiffness, internal forces,
// consistent loads), constraint reduction and per-state records.
#pragma once

#include "masmodal/elements.hpp"

#include <Eigen/Sparse>
#include <optional>
#include <string>

namespace masmodal {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

/// Explicit elimination of fixed dofs and master-slave ties: u = R q with q
/// the retained dofs. Reduced operators R^T A R stay symmetric (positive)
/// definite.
struct Reduction {
    SpMat r;               // n_full x n_reduced
    int n_full = 0;
    int n_reduced = 0;
    std::vector<int> retained; // full-dof index of each reduced coordinate

    SpMat reduce(const SpMat& a) const;
    Vec reduce_vec(const Vec& f) const { return r.transpose() * f; }
    Vec expand(const Vec& q) const { return r * q; }
};

/// Build the reduction from the model's constraint set. Throws on dependent
/// constraint rows (duplicate slaves, slave used as master, fixed slaves) and
/// when no free dofs remain.
Reduction make_reduction(const Model& model);

/// Reduced symmetric pair (K_red, M_red) per the constraint set.
std::pair<SpMat, SpMat> reduce_system(const SpMat& k, const SpMat& m, const Reduction& red);

SpMat assemble_mass(const Model& model);
SpMat assemble_elastic_stiffness(const Model& model);

/// Tangent stiffness and internal force vector at displacement u (shared
/// element sweep; either output may be null).
void assemble_response(const Model& model, const Vec& u, SpMat* k_tangent, Vec* f_internal);
Vec internal_forces(const Model& model, const Vec& u);

/// Consistent load vector of one load step (nodal + line + self-weight).
Vec step_load_vector(const Model& model, const LoadStep& step);

struct EquilibriumState {
    Vec u;                                   // full-space displacements
    SpMat k_tangent;                         // damaged stiffness at u
    std::vector<Eigen::MatrixXd> element_elastic;
    std::vector<Eigen::MatrixXd> element_tangent;
    std::vector<std::vector<BeamSectionState>> beam_points;  // per element
    std::vector<std::vector<QuadPointState>> quad_points;
    std::vector<std::optional<TrussState>> truss_points;
    double residual_norm = 0.0;
    double load_norm = 0.0;
    int newton_iterations = 0;
    int step = 0;
    int increment = 0;
    std::string label;
};

/// Evaluate the full state record at u (tangent matrix, element matrices,
/// integration-point records).
EquilibriumState make_state(const Model& model, const Vec& u);

SpMat assemble_tangent_stiffness(const Model& model, const EquilibriumState& state);

/// Per-element Frobenius distance ||K~_e - K_e||, indexed like model.elements.
Vec element_stiffness_distance(const EquilibriumState& state);

/// Per-section cracked area ratio A_f/A of a fiber-beam model; throws if the
/// model has no beam elements.
struct CrackedSection {
    int element = 0;
    int gauss = 0;
    double x = 0.0, y = 0.0; // section position in global coordinates
    double ratio = 0.0;
};
std::vector<CrackedSection> cracked_area_profile(const Model& model,
                                                 const EquilibriumState& state);

} // namespace masmodal
