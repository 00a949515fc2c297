#include "masmodal/constitutive.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace masmodal {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;

double region_tol(const SymTensor3& e) { return 1e-10 * (1.0 + e.norm()); }

struct Classified {
    RegionTag tag;
    double t0 = 0.0; // e1
    double t1 = 0.0; // alpha e1 + 2(1+alpha) e2
    double t2 = 0.0; // 2 e3 + alpha tr E
};

// Tie-break within tol_region prefers the higher region index (stiffer
// tangent); the stress is continuous across the boundaries so the returned
// stress is unaffected to first order.
Classified classify(const SpectralDecomp& sd, const SymTensor3& e,
                    const MaterialParams& p) {
    const double a = p.alpha();
    const double e1 = sd.eigenvalues[0];
    const double e2 = sd.eigenvalues[1];
    const double e3 = sd.eigenvalues[2];
    Classified c;
    c.t0 = e1;
    c.t1 = a * e1 + 2.0 * (1.0 + a) * e2;
    c.t2 = 2.0 * e3 + a * (e1 + e2 + e3);
    const double tol = region_tol(e);
    if (c.t2 <= tol) c.tag.region = Region::V3;
    else if (c.t1 <= tol) c.tag.region = Region::V2;
    else if (c.t0 <= tol) c.tag.region = Region::V1;
    else c.tag.region = Region::V0;
    c.tag.boundary = std::abs(c.t0) <= tol || std::abs(c.t1) <= tol ||
                     std::abs(c.t2) <= tol;
    return c;
}

SymTensor3 stress_impl(const SpectralDecomp& sd, const Classified& c,
                       const SymTensor3& e, const MaterialParams& p) {
    const double a = p.alpha();
    const double e1 = sd.eigenvalues[0];
    const double e2 = sd.eigenvalues[1];
    switch (c.tag.region) {
        case Region::V0:
            return SymTensor3::zero();
        case Region::V1:
            return p.young() * e1 * sd.O11();
        case Region::V2: {
            const double f = 2.0 * p.mu() / (2.0 + a);
            return f * ((2.0 * (1.0 + a) * e1 + a * e2) * sd.O11() +
                        (a * e1 + 2.0 * (1.0 + a) * e2) * sd.O22());
        }
        case Region::V3:
            return elastic_tensor(p).apply(e);
    }
    return SymTensor3::zero();
}

SymTensor3 fracture_impl(const SpectralDecomp& sd, const Classified& c,
                         const SymTensor3& e, const MaterialParams& p) {
    const double a = p.alpha();
    const double e1 = sd.eigenvalues[0];
    const double e2 = sd.eigenvalues[1];
    const double e3 = sd.eigenvalues[2];
    switch (c.tag.region) {
        case Region::V0:
            return e;
        case Region::V1: {
            const double s = a / (2.0 * (1.0 + a)) * e1;
            return (e2 + s) * sd.O22() + (e3 + s) * sd.O33();
        }
        case Region::V2:
            return (e3 + a / (2.0 + a) * (e1 + e2)) * sd.O33();
        case Region::V3:
            return SymTensor3::zero();
    }
    return SymTensor3::zero();
}

Tangent4 tangent_impl(const SpectralDecomp& sd, const Classified& c,
                      const SymTensor3& e, const MaterialParams& p) {
    const double a = p.alpha();
    const double e1 = sd.eigenvalues[0];
    const double e2 = sd.eigenvalues[1];
    const double e3 = sd.eigenvalues[2];
    // The derivative is defined on region interiors; at boundary-flagged
    // strains the denominators are guarded and the tie-broken region is used.
    const double guard = 1e-12 * (1.0 + e.norm());
    switch (c.tag.region) {
        case Region::V0:
            return Tangent4::zero();
        case Region::V1: {
            const double d12 = std::max(e2 - e1, guard);
            const double d13 = std::max(e3 - e1, guard);
            Tangent4 d = Tangent4::outer(sd.O11(), sd.O11());
            d += (-e1 / d12) * Tangent4::outer(sd.O12(), sd.O12());
            d += (-e1 / d13) * Tangent4::outer(sd.O13(), sd.O13());
            return p.young() * d;
        }
        case Region::V2: {
            const double f = 2.0 * p.mu() / (2.0 + a);
            const double d13 = std::max(e3 - e1, guard);
            const double d23 = std::max(e3 - e2, guard);
            const SymTensor3 sum = (sd.O11() + sd.O22()) * (1.0 / kSqrt2);
            const SymTensor3 dif = (sd.O11() - sd.O22()) * (1.0 / kSqrt2);
            Tangent4 d = 2.0 * p.mu() * Tangent4::outer(sd.O12(), sd.O12());
            d += (-f * (2.0 * (1.0 + a) * e1 + a * e2) / d13) *
                 Tangent4::outer(sd.O13(), sd.O13());
            d += (-f * (a * e1 + 2.0 * (1.0 + a) * e2) / d23) *
                 Tangent4::outer(sd.O23(), sd.O23());
            d += (f * (2.0 + 3.0 * a)) * Tangent4::outer(sum, sum);
            d += (2.0 * p.mu()) * Tangent4::outer(dif, dif);
            return d;
        }
        case Region::V3:
            return elastic_tensor(p);
    }
    return Tangent4::zero();
}

} // namespace

MaterialParams::MaterialParams(double mu, double lambda, double rho)
    : mu_(mu), lambda_(lambda), rho_(rho) {
    if (!(mu > 0.0) || !(lambda >= 0.0))
        throw std::invalid_argument("MaterialParams: require mu > 0 and lambda >= 0");
    if (!(rho > 0.0))
        throw std::invalid_argument("MaterialParams: require rho > 0");
}

MaterialParams MaterialParams::from_young(double young, double poisson, double rho) {
    if (!(young > 0.0) || !(poisson >= 0.0) || !(poisson < 0.5))
        throw std::invalid_argument("MaterialParams: require E > 0 and 0 <= nu < 0.5");
    const double mu = young / (2.0 * (1.0 + poisson));
    const double lambda = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
    return MaterialParams(mu, lambda, rho);
}

double MaterialParams::young() const {
    return mu_ * (2.0 * mu_ + 3.0 * lambda_) / (mu_ + lambda_);
}

double MaterialParams::poisson() const {
    return lambda_ / (2.0 * (lambda_ + mu_));
}

Tangent4 elastic_tensor(const MaterialParams& params) {
    const SymTensor3 id = SymTensor3::identity();
    Tangent4 c = 2.0 * params.mu() * Tangent4::identity_sym();
    c += params.lambda() * Tangent4::outer(id, id);
    return c;
}

RegionTag classify_region(const SymTensor3& strain, const MaterialParams& params) {
    return classify(spectral_decompose(strain), strain, params).tag;
}

SymTensor3 stress(const SymTensor3& strain, const MaterialParams& params) {
    const SpectralDecomp sd = spectral_decompose(strain);
    return stress_impl(sd, classify(sd, strain, params), strain, params);
}

SymTensor3 fracture_strain(const SymTensor3& strain, const MaterialParams& params) {
    const SpectralDecomp sd = spectral_decompose(strain);
    return fracture_impl(sd, classify(sd, strain, params), strain, params);
}

Tangent4 tangent(const SymTensor3& strain, const MaterialParams& params) {
    const SpectralDecomp sd = spectral_decompose(strain);
    return tangent_impl(sd, classify(sd, strain, params), strain, params);
}

ConstitutiveResponse respond(const SymTensor3& strain, const MaterialParams& params) {
    const SpectralDecomp sd = spectral_decompose(strain);
    const Classified c = classify(sd, strain, params);
    ConstitutiveResponse r;
    r.region = c.tag;
    r.stress = stress_impl(sd, c, strain, params);
    r.fracture_strain = fracture_impl(sd, c, strain, params);
    r.tangent = tangent_impl(sd, c, strain, params);
    return r;
}

UniaxialResponse uniaxial_respond(double eps, const MaterialParams& params) {
    UniaxialResponse r;
    if (eps > 0.0) {
        r.stress = 0.0;
        r.tangent = 0.0;
        r.cracked = true;
    } else {
        r.stress = params.young() * eps;
        r.tangent = params.young();
        r.cracked = false;
    }
    return r;
}

namespace {

SymTensor3 embed_plane(const Eigen::Vector3d& eng, double e33) {
    return SymTensor3::from_components(eng[0], eng[1], e33, 0.5 * eng[2], 0.0, 0.0);
}

double t33_of(const SymTensor3& strain, const MaterialParams& p) {
    return stress(strain, p)(2, 2);
}

} // namespace

PlaneStressResponse plane_stress_respond(const Eigen::Vector3d& eng_strain,
                                         const MaterialParams& params) {
    if (!eng_strain.allFinite())
        throw std::invalid_argument("plane_stress_respond: non-finite strain");

    const double scale = 1.0 + eng_strain.cwiseAbs().maxCoeff();

    // g(e33) = T33 is continuous, piecewise linear, non-decreasing in e33 and
    // never positive (T is NSD); the zero set is a right half-line. We want
    // its left edge: Newton on the current linear piece, bisection keeps a
    // bracket [lo, hi] with g(lo) < 0 <= g(hi) + gtol.
    double lo = -scale, hi = scale;
    while (t33_of(embed_plane(eng_strain, lo), params) >= 0.0 && lo > -1e8) lo *= 2.0;
    while (t33_of(embed_plane(eng_strain, hi), params) < 0.0 && hi < 1e8) hi *= 2.0;

    const double gtol = 1e-13 * params.young() * scale;
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const SymTensor3 e3d = embed_plane(eng_strain, x);
        const double g = t33_of(e3d, params);
        const bool at_root = g >= -gtol;
        if (at_root) hi = x; else lo = x;
        if (hi - lo <= 1e-12 * scale) break;
        double xn = 0.5 * (lo + hi);
        if (!at_root) {
            const double slope = tangent(e3d, params).matrix()(2, 2);
            if (slope > 0.0) {
                const double newton = x - g / slope;
                if (newton > lo && newton < hi) xn = newton;
            }
        }
        x = xn;
    }

    const SymTensor3 e3d = embed_plane(eng_strain, hi);
    const ConstitutiveResponse r = respond(e3d, params);

    PlaneStressResponse out;
    out.e33 = hi;
    out.region = r.region;
    out.stress = Eigen::Vector3d(r.stress(0, 0), r.stress(1, 1), r.stress(0, 1));
    out.fracture = Eigen::Vector3d(r.fracture_strain(0, 0), r.fracture_strain(1, 1),
                                   r.fracture_strain(0, 1));
    out.fracture_33 = r.fracture_strain(2, 2);

    // Static condensation of the 33 component. In the scaled 6-vector basis
    // the in-plane block is rows/cols (0,1,3) and the 33 row is 2; the mixed
    // shears (4,5) never couple to them for in-plane strain states.
    const Mat6& d = r.tangent.matrix();
    Eigen::Matrix3d a;
    Eigen::Vector3d b;
    const int idx[3] = {0, 1, 3};
    for (int i = 0; i < 3; ++i) {
        b[i] = d(idx[i], 2);
        for (int j = 0; j < 3; ++j) a(i, j) = d(idx[i], idx[j]);
    }
    const double d33 = d(2, 2);
    if (d33 > 1e-12 * params.young()) a -= (b * b.transpose()) / d33;

    // scaled tensor components -> engineering strain/stress convention
    const Eigen::DiagonalMatrix<double, 3> s(1.0, 1.0, 1.0 / kSqrt2);
    out.tangent = s * a * s;
    return out;
}

} // namespace masmodal
