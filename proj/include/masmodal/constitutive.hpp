// Masonry-like (no-tension) material law: region classification, explicit
// stress, fracture strain and analytic tangent, plus the 1D fiber and the
// plane-stress restrictions used by the elements.
#pragma once

#include "masmodal/tensor.hpp"

#include <Eigen/Dense>

namespace masmodal {

/// Isotropic elastic constants. mu > 0, lambda >= 0, rho > 0 enforced.
class MaterialParams {
public:
    MaterialParams(double mu, double lambda, double rho);

    static MaterialParams from_lame(double mu, double lambda, double rho) {
        return MaterialParams(mu, lambda, rho);
    }
    static MaterialParams from_young(double young, double poisson, double rho);

    double mu() const { return mu_; }
    double lambda() const { return lambda_; }
    double rho() const { return rho_; }
    double alpha() const { return lambda_ / mu_; }                 // lambda/mu
    double young() const;                                          // E
    double poisson() const;                                        // nu
    double shear() const { return mu_; }                           // G

private:
    double mu_, lambda_, rho_;
};

enum class Region { V0 = 0, V1 = 1, V2 = 2, V3 = 3 };

struct RegionTag {
    Region region = Region::V3;
    bool boundary = false; // some classifying test within tol_region of zero
};

struct ConstitutiveResponse {
    SymTensor3 stress;          // T, negative semidefinite
    SymTensor3 fracture_strain; // E^f, positive semidefinite
    Tangent4 tangent;           // D_E T(E)
    RegionTag region;
};

/// C = 2 mu I_Sym + lambda I (x) I.
Tangent4 elastic_tensor(const MaterialParams& params);

RegionTag classify_region(const SymTensor3& strain, const MaterialParams& params);
SymTensor3 stress(const SymTensor3& strain, const MaterialParams& params);
SymTensor3 fracture_strain(const SymTensor3& strain, const MaterialParams& params);
Tangent4 tangent(const SymTensor3& strain, const MaterialParams& params);

/// All four responses from a single spectral decomposition / classification.
ConstitutiveResponse respond(const SymTensor3& strain, const MaterialParams& params);

struct UniaxialResponse {
    double stress = 0.0;  // sigma <= 0
    double tangent = 0.0; // young or 0
    bool cracked = false;
};

/// 1D fiber restriction: sigma = E*eps for eps <= 0, else 0. At eps = 0 the
/// compression-side tangent is returned (matches the V3-preferred tie-break).
UniaxialResponse uniaxial_respond(double eps, const MaterialParams& params);

struct PlaneStressResponse {
    Eigen::Vector3d stress;        // (s11, s22, s12)
    Eigen::Matrix3d tangent;       // on engineering strain (e11, e22, g12)
    Eigen::Vector3d fracture;      // in-plane tensor components (ef11, ef22, ef12)
    double fracture_33 = 0.0;      // out-of-plane fracture strain
    double e33 = 0.0;              // solved out-of-plane strain, T33 = 0
    RegionTag region;
};

/// Plane-stress restriction of the 3D law: solves for the out-of-plane strain
/// e33 such that T33 = 0 (smallest such e33, so no spurious out-of-plane
/// cracking), then condenses the 33 row/column of the 3D tangent.
/// Input is the engineering in-plane strain (e11, e22, g12).
PlaneStressResponse plane_stress_respond(const Eigen::Vector3d& eng_strain,
                                         const MaterialParams& params);

} // namespace masmodal
