// Symmetric second- and fourth-order tensor algebra on an orthonormal
// 6-vector basis of Sym, plus the 3x3 spectral decomposition used by the
// material law.
#pragma once

#include <Eigen/Dense>
#include <array>

namespace masmodal {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Symmetric 3x3 tensor stored as an orthonormal 6-vector
/// (a11, a22, a33, sqrt(2) a12, sqrt(2) a13, sqrt(2) a23), so that the
/// tensor scalar product A:B equals the plain dot product of the vectors.
class SymTensor3 {
public:
    SymTensor3() { v_.setZero(); }
    explicit SymTensor3(const Vec6& v) : v_(v) {}

    static SymTensor3 zero() { return SymTensor3{}; }
    static SymTensor3 identity();
    /// Build from physical tensor components (no scaling applied by caller).
    static SymTensor3 from_components(double xx, double yy, double zz,
                                      double xy, double xz, double yz);
    static SymTensor3 from_matrix(const Eigen::Matrix3d& m);

    /// Physical component a_ij (symmetric access, i,j in 0..2).
    double operator()(int i, int j) const;
    Eigen::Matrix3d matrix() const;

    const Vec6& vec() const { return v_; }
    Vec6& vec() { return v_; }

    double trace() const { return v_[0] + v_[1] + v_[2]; }
    double dot(const SymTensor3& o) const { return v_.dot(o.v_); }
    double norm() const { return v_.norm(); }
    bool finite() const { return v_.allFinite(); }

    SymTensor3 operator+(const SymTensor3& o) const { return SymTensor3{v_ + o.v_}; }
    SymTensor3 operator-(const SymTensor3& o) const { return SymTensor3{v_ - o.v_}; }
    SymTensor3 operator*(double s) const { return SymTensor3{v_ * s}; }
    SymTensor3 operator-() const { return SymTensor3{-v_}; }
    SymTensor3& operator+=(const SymTensor3& o) { v_ += o.v_; return *this; }
    SymTensor3& operator-=(const SymTensor3& o) { v_ -= o.v_; return *this; }

private:
    Vec6 v_;
};

inline SymTensor3 operator*(double s, const SymTensor3& t) { return t * s; }

/// Symmetric fourth-order tensor on Sym, stored as a symmetric 6x6 matrix
/// acting on SymTensor3 6-vectors.
class Tangent4 {
public:
    Tangent4() { m_.setZero(); }
    explicit Tangent4(const Mat6& m) : m_(m) {}

    static Tangent4 zero() { return Tangent4{}; }
    /// Fourth-order identity on Sym; the 6x6 identity in this basis.
    static Tangent4 identity_sym() { return Tangent4{Mat6::Identity()}; }
    /// A (x) B, defined by (A (x) B)[H] = (B:H) A.
    static Tangent4 outer(const SymTensor3& a, const SymTensor3& b) {
        return Tangent4{a.vec() * b.vec().transpose()};
    }

    SymTensor3 apply(const SymTensor3& h) const { return SymTensor3{m_ * h.vec()}; }

    const Mat6& matrix() const { return m_; }
    Mat6& matrix() { return m_; }

    Tangent4 operator+(const Tangent4& o) const { return Tangent4{m_ + o.m_}; }
    Tangent4 operator-(const Tangent4& o) const { return Tangent4{m_ - o.m_}; }
    Tangent4 operator*(double s) const { return Tangent4{m_ * s}; }
    Tangent4& operator+=(const Tangent4& o) { m_ += o.m_; return *this; }

private:
    Mat6 m_;
};

inline Tangent4 operator*(double s, const Tangent4& t) { return t * s; }

inline SymTensor3 apply(const Tangent4& d, const SymTensor3& h) { return d.apply(h); }

/// Ordered spectral decomposition of a symmetric 3x3 tensor together with
/// the orthonormal dyad basis O_ij of Sym built from the eigenvectors.
struct SpectralDecomp {
    std::array<double, 3> eigenvalues{};           // ascending e1 <= e2 <= e3
    std::array<Eigen::Vector3d, 3> eigenvectors{}; // orthonormal q1, q2, q3
    // O[0]=O11, O[1]=O22, O[2]=O33, O[3]=O12, O[4]=O13, O[5]=O23
    std::array<SymTensor3, 6> basis{};

    const SymTensor3& O11() const { return basis[0]; }
    const SymTensor3& O22() const { return basis[1]; }
    const SymTensor3& O33() const { return basis[2]; }
    const SymTensor3& O12() const { return basis[3]; }
    const SymTensor3& O13() const { return basis[4]; }
    const SymTensor3& O23() const { return basis[5]; }
};

/// Eigen-decompose a symmetric tensor. Closed-form eigenvalues with a cyclic
/// Jacobi fallback when the spectrum is nearly degenerate; deterministic sign
/// convention (first nonzero component of each eigenvector is positive).
/// Throws std::invalid_argument on non-finite input.
SpectralDecomp spectral_decompose(const SymTensor3& e);

/// Symmetrized dyad scaled per the O_ij basis: a ~ b gives (a(x)b + b(x)a)/sqrt(2),
/// a parallel to b gives the plain sym(a(x)b), so orthonormal unit vectors map
/// to unit-norm basis tensors.
SymTensor3 dyad(const Eigen::Vector3d& a, const Eigen::Vector3d& b);

} // namespace masmodal
