#include "masmodal/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace masmodal {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2 = 0.7071067811865476;
constexpr double kPi = 3.141592653589793238462643383279502884;
} // namespace

SymTensor3 SymTensor3::identity() {
    Vec6 v;
    v << 1.0, 1.0, 1.0, 0.0, 0.0, 0.0;
    return SymTensor3{v};
}

SymTensor3 SymTensor3::from_components(double xx, double yy, double zz,
                                       double xy, double xz, double yz) {
    Vec6 v;
    v << xx, yy, zz, kSqrt2 * xy, kSqrt2 * xz, kSqrt2 * yz;
    return SymTensor3{v};
}

SymTensor3 SymTensor3::from_matrix(const Eigen::Matrix3d& m) {
    return from_components(m(0, 0), m(1, 1), m(2, 2),
                           0.5 * (m(0, 1) + m(1, 0)),
                           0.5 * (m(0, 2) + m(2, 0)),
                           0.5 * (m(1, 2) + m(2, 1)));
}

double SymTensor3::operator()(int i, int j) const {
    if (i == j) return v_[i];
    const int k = i + j; // (0,1)->1: idx 3, (0,2)->2: idx 4, (1,2)->3: idx 5
    return kInvSqrt2 * v_[2 + k];
}

Eigen::Matrix3d SymTensor3::matrix() const {
    Eigen::Matrix3d m;
    m(0, 0) = v_[0];
    m(1, 1) = v_[1];
    m(2, 2) = v_[2];
    m(0, 1) = m(1, 0) = kInvSqrt2 * v_[3];
    m(0, 2) = m(2, 0) = kInvSqrt2 * v_[4];
    m(1, 2) = m(2, 1) = kInvSqrt2 * v_[5];
    return m;
}

SymTensor3 dyad(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    const Eigen::Matrix3d sym = 0.5 * (a * b.transpose() + b * a.transpose());
    const double cross = a.cross(b).norm();
    const double scale = (cross <= 1e-14 * a.norm() * b.norm()) ? 1.0 : kSqrt2;
    return SymTensor3::from_matrix(sym) * scale;
}

namespace {

// Analytic eigenvalues of a symmetric 3x3 matrix (trigonometric form of the
// characteristic cubic), ascending order.
std::array<double, 3> analytic_eigenvalues(const Eigen::Matrix3d& a) {
    const double m = a.trace() / 3.0;
    Eigen::Matrix3d k = a;
    k.diagonal().array() -= m;
    const double p2 = k.squaredNorm() / 6.0;
    if (p2 <= 0.0) return {m, m, m};
    const double p = std::sqrt(p2);
    const double det = k.determinant();
    double r = det / (2.0 * p * p * p);
    r = std::clamp(r, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    const double e3 = m + 2.0 * p * std::cos(phi);
    const double e1 = m + 2.0 * p * std::cos(phi + 2.0 * kPi / 3.0);
    const double e2 = 3.0 * m - e1 - e3;
    return {e1, e2, e3};
}

// Cyclic Jacobi sweeps; always converges for symmetric input and delivers an
// orthonormal frame regardless of eigenvalue multiplicity.
void jacobi_eigen(Eigen::Matrix3d a, std::array<double, 3>& eval,
                  Eigen::Matrix3d& evec) {
    evec.setIdentity();
    for (int sweep = 0; sweep < 50; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < 3; ++p)
            for (int q = p + 1; q < 3; ++q) off += a(p, q) * a(p, q);
        if (off <= 1e-60 * a.squaredNorm() || off == 0.0) break;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (a(p, q) == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                Eigen::Matrix3d g = Eigen::Matrix3d::Identity();
                g(p, p) = c; g(q, q) = c; g(p, q) = s; g(q, p) = -s;
                a = g.transpose() * a * g;
                a(p, q) = a(q, p) = 0.0;
                evec = evec * g;
            }
        }
    }
    for (int i = 0; i < 3; ++i) eval[i] = a(i, i);
    // insertion sort ascending, carrying columns along
    for (int i = 1; i < 3; ++i) {
        for (int j = i; j > 0 && eval[j - 1] > eval[j]; --j) {
            std::swap(eval[j - 1], eval[j]);
            evec.col(j - 1).swap(evec.col(j));
        }
    }
}

void fix_sign(Eigen::Vector3d& q) {
    for (int i = 0; i < 3; ++i) {
        if (std::abs(q[i]) > 1e-12) {
            if (q[i] < 0.0) q = -q;
            return;
        }
    }
}

} // namespace

SpectralDecomp spectral_decompose(const SymTensor3& e) {
    if (!e.finite()) throw std::invalid_argument("spectral_decompose: non-finite input");

    SpectralDecomp out;
    const Eigen::Matrix3d a = e.matrix();
    const double scale = a.cwiseAbs().maxCoeff();

    std::array<double, 3> eval{0.0, 0.0, 0.0};
    Eigen::Matrix3d evec = Eigen::Matrix3d::Identity();

    if (scale > 0.0) {
        eval = analytic_eigenvalues(a);
        const double gap_lo = eval[1] - eval[0];
        const double gap_hi = eval[2] - eval[1];
        bool ok = std::min(gap_lo, gap_hi) > 1e-6 * scale;
        if (ok) {
            // Eigenvector of lambda_i as the strongest cross product of two
            // rows of (A - lambda_i I); fall back to Jacobi if any is weak.
            for (int i = 0; i < 3 && ok; ++i) {
                Eigen::Matrix3d k = a;
                k.diagonal().array() -= eval[i];
                Eigen::Vector3d best = Eigen::Vector3d::Zero();
                double best_n = 0.0;
                for (int r = 0; r < 3; ++r) {
                    const Eigen::Vector3d c =
                        k.row(r).transpose().cross(k.row((r + 1) % 3).transpose());
                    const double n = c.norm();
                    if (n > best_n) { best_n = n; best = c; }
                }
                if (best_n <= 1e-12 * scale * scale) { ok = false; break; }
                evec.col(i) = best / best_n;
            }
            if (ok) {
                // re-orthonormalize exactly so the dyad basis is orthonormal
                evec.col(1) -= evec.col(0) * evec.col(0).dot(evec.col(1));
                evec.col(1).normalize();
                evec.col(2) = evec.col(0).cross(evec.col(1));
            }
        }
        if (!ok) jacobi_eigen(a, eval, evec);
    }

    for (int i = 0; i < 3; ++i) {
        Eigen::Vector3d q = evec.col(i);
        fix_sign(q);
        out.eigenvectors[i] = q;
        // Rayleigh quotient sharpens the analytic eigenvalue to round-off.
        out.eigenvalues[i] = scale > 0.0 ? q.dot(a * q) : 0.0;
    }
    // guard the ordering against Rayleigh-quotient round-off
    for (int i = 1; i < 3; ++i) {
        for (int j = i; j > 0 && out.eigenvalues[j - 1] > out.eigenvalues[j]; --j) {
            std::swap(out.eigenvalues[j - 1], out.eigenvalues[j]);
            std::swap(out.eigenvectors[j - 1], out.eigenvectors[j]);
        }
    }

    const auto& q = out.eigenvectors;
    out.basis[0] = dyad(q[0], q[0]);
    out.basis[1] = dyad(q[1], q[1]);
    out.basis[2] = dyad(q[2], q[2]);
    out.basis[3] = dyad(q[0], q[1]);
    out.basis[4] = dyad(q[0], q[2]);
    out.basis[5] = dyad(q[1], q[2]);
    return out;
}

} // namespace masmodal
