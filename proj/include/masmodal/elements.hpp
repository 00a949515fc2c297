// Element kernels: shear-flexible plane-frame fiber beam, 4-node plane-stress
// quad, axial truss. Local matrices, consistent loads and state-dependent
// (tangent, internal force) responses.
#pragma once

#include "masmodal/model.hpp"

#include <Eigen/Dense>
#include <vector>

namespace masmodal {

struct BeamSectionState {
    double x = 0.0;                 // position along the axis
    double axial_strain = 0.0;      // centroid strain
    double curvature = 0.0;
    double shear_strain = 0.0;
    double axial_force = 0.0;       // N
    double moment = 0.0;            // M
    double shear_force = 0.0;       // V
    double cracked_ratio = 0.0;     // A_f / A
    std::vector<double> fiber_strain;
    std::vector<double> fiber_stress;
    std::vector<uint8_t> fiber_cracked;
};

/// 2-node plane-frame element: interdependent (shear-flexible) transverse
/// interpolation, linear axial, midpoint fiber layers with their own second
/// moments (so the uncracked section recovers EA, EI exactly), elastic shear
/// over the currently uncracked area. Consistent translational mass, no
/// rotary inertia. Local dofs (u1, v1, th1, u2, v2, th2).
class BeamKernel {
public:
    BeamKernel(const Model& model, const Element& e);

    int ndof() const { return 6; }
    Eigen::Matrix<double, 6, 6> elastic_stiffness() const;
    Eigen::Matrix<double, 6, 6> mass() const;
    /// Consistent nodal forces of a uniform global line load (N/m).
    Eigen::Matrix<double, 6, 1> line_load(double qx, double qy) const;
    Eigen::Matrix<double, 6, 1> self_weight(double gravity) const;

    void response(const Eigen::Matrix<double, 6, 1>& u_global,
                  Eigen::Matrix<double, 6, 6>* k_tangent,
                  Eigen::Matrix<double, 6, 1>* f_internal,
                  std::vector<BeamSectionState>* records) const;

    double length() const { return length_; }
    int gauss_count() const { return static_cast<int>(gauss_x_.size()); }
    double gauss_x(int g) const { return gauss_x_[g]; }

private:
    Eigen::Matrix<double, 6, 1> to_local(const Eigen::Matrix<double, 6, 1>& ug) const;
    void shape_b(double x, Eigen::Matrix<double, 6, 1>* bu,
                 Eigen::Matrix<double, 6, 1>* bb,
                 Eigen::Matrix<double, 6, 1>* bs) const;
    void shape_n(double x, Eigen::Matrix<double, 6, 1>* nu,
                 Eigen::Matrix<double, 6, 1>* nv) const;

    const Material* mat_;
    const FiberSection* sec_;
    bool masonry_ = true;
    double length_ = 0.0, cos_ = 1.0, sin_ = 0.0;
    double area_ = 0.0, inertia_ = 0.0;
    double young_ = 0.0, shear_mod_ = 0.0, ks_ = 0.0, phi_ = 0.0, mu_shape_ = 0.0;
    double rho_ = 0.0;
    std::vector<double> fiber_y_, fiber_a_, fiber_i_;
    std::vector<double> gauss_x_, gauss_w_;
};

struct QuadPointState {
    double x = 0.0, y = 0.0;        // gauss point position
    SymTensor3 strain;              // embedded 3D strain (solved e33)
    SymTensor3 stress;
    SymTensor3 fracture;
    RegionTag region;
};

/// 4-node isoparametric plane-stress quad, 2x2 Gauss, consistent mass.
class QuadKernel {
public:
    QuadKernel(const Model& model, const Element& e);

    int ndof() const { return 8; }
    Eigen::Matrix<double, 8, 8> elastic_stiffness() const;
    Eigen::Matrix<double, 8, 8> mass() const;
    Eigen::Matrix<double, 8, 1> self_weight(double gravity) const;

    void response(const Eigen::Matrix<double, 8, 1>& u,
                  Eigen::Matrix<double, 8, 8>* k_tangent,
                  Eigen::Matrix<double, 8, 1>* f_internal,
                  std::vector<QuadPointState>* records) const;

private:
    struct GaussData {
        Eigen::Matrix<double, 3, 8> b;
        Eigen::Matrix<double, 2, 4> shape; // N_i at the point (row repeated per dof dir)
        double weight = 0.0;               // w * detJ
        double x = 0.0, y = 0.0;
    };
    Eigen::Matrix3d elastic_d() const;

    const Material* mat_;
    bool masonry_ = true;
    double thickness_ = 0.0, rho_ = 0.0;
    std::array<GaussData, 4> gauss_;
};

struct TrussState {
    double strain = 0.0;
    double stress = 0.0;
    bool cracked = false;
};

/// Axial-only 2-node bar with lumped mass.
class TrussKernel {
public:
    TrussKernel(const Model& model, const Element& e);

    int ndof() const { return 4; }
    Eigen::Matrix<double, 4, 4> elastic_stiffness() const;
    Eigen::Matrix<double, 4, 4> mass() const;
    Eigen::Matrix<double, 4, 1> self_weight(double gravity) const;

    void response(const Eigen::Matrix<double, 4, 1>& u,
                  Eigen::Matrix<double, 4, 4>* k_tangent,
                  Eigen::Matrix<double, 4, 1>* f_internal,
                  TrussState* record) const;

private:
    const Material* mat_;
    bool masonry_ = true;
    double length_ = 0.0, area_ = 0.0, rho_ = 0.0, young_ = 0.0;
    Eigen::Matrix<double, 4, 1> dir_; // (-c, -s, c, s)
};

/// Global dof indices of an element's local vector, in kernel order.
std::vector<int> element_dofs(const Model& model, const Element& e);

} // namespace masmodal
