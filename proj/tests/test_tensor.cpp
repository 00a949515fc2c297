#include "masmodal/tensor.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace masmodal;

namespace {
const Eigen::Vector3d ex(1, 0, 0), ey(0, 1, 0), ez(0, 0, 1);
}

TEST_CASE("6-vector round trip and scalar product") {
    std::mt19937 rng(42);
    for (int it = 0; it < 2000; ++it) {
        const Eigen::Matrix3d a = oracles::random_sym3(rng);
        const Eigen::Matrix3d b = oracles::random_sym3(rng);
        const SymTensor3 ta = SymTensor3::from_matrix(a);
        const SymTensor3 tb = SymTensor3::from_matrix(b);

        CHECK((ta.matrix() - a).cwiseAbs().maxCoeff() <=
              1e-14 * a.cwiseAbs().maxCoeff() + 1e-300);

        const double dot_mat = (a.transpose() * b).trace();
        const double dot_vec = ta.dot(tb);
        CHECK(std::abs(dot_mat - dot_vec) <= 1e-12 * ta.norm() * tb.norm());
    }
}

TEST_CASE("spectral decomposition: zero tensor") {
    const SpectralDecomp sd = spectral_decompose(SymTensor3::zero());
    for (int i = 0; i < 3; ++i) CHECK(sd.eigenvalues[i] == 0.0);
    SymTensor3 rec;
    for (int i = 0; i < 3; ++i) rec += sd.eigenvalues[i] * sd.basis[i];
    CHECK(rec.norm() == 0.0);
    // frame still orthonormal
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(std::abs(sd.eigenvectors[i].dot(sd.eigenvectors[j]) - (i == j ? 1 : 0)) <=
                  1e-12);
}

TEST_CASE("spectral decomposition: diagonal tensor ordering") {
    const SymTensor3 e = SymTensor3::from_components(3, 1, 2, 0, 0, 0);
    const SpectralDecomp sd = spectral_decompose(e);
    CHECK(sd.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sd.eigenvalues[1] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(sd.eigenvalues[2] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(sd.eigenvectors[0].isApprox(ey, 1e-12));
    CHECK(sd.eigenvectors[1].isApprox(ez, 1e-12));
    CHECK(sd.eigenvectors[2].isApprox(ex, 1e-12));
}

TEST_CASE("spectral decomposition: non-finite input rejected") {
    SymTensor3 e = SymTensor3::identity();
    e.vec()[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(spectral_decompose(e), std::invalid_argument);
}

TEST_CASE("spectral decomposition invariants against dense oracle") {
    std::mt19937 rng(7);
    int degenerate_checked = 0;
    for (int it = 0; it < 20000; ++it) {
        Eigen::Matrix3d a;
        if (it % 10 == 3) {
            // near-degenerate spectra: two close eigenvalues in a random frame
            std::uniform_real_distribution<double> u(-1.0, 1.0);
            Eigen::Matrix3d q =
                Eigen::Quaterniond(u(rng), u(rng), u(rng), u(rng)).normalized().toRotationMatrix();
            Eigen::Vector3d ev(u(rng), 0.0, u(rng));
            ev[1] = ev[0] + 1e-12 * u(rng);
            a = q * ev.asDiagonal() * q.transpose();
            a = 0.5 * (a + a.transpose());
            ++degenerate_checked;
        } else {
            a = oracles::random_sym3(rng);
        }
        const SymTensor3 e = SymTensor3::from_matrix(a);
        const SpectralDecomp sd = spectral_decompose(e);
        const double scale = std::max(e.norm(), 1e-30);

        CHECK(sd.eigenvalues[0] <= sd.eigenvalues[1]);
        CHECK(sd.eigenvalues[1] <= sd.eigenvalues[2]);

        // orthonormal eigenvectors
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j)
                CHECK(std::abs(sd.eigenvectors[i].dot(sd.eigenvectors[j]) - (i == j ? 1 : 0)) <=
                      1e-12);

        // reconstruction
        Eigen::Matrix3d rec = Eigen::Matrix3d::Zero();
        for (int i = 0; i < 3; ++i)
            rec += sd.eigenvalues[i] * sd.eigenvectors[i] * sd.eigenvectors[i].transpose();
        CHECK((rec - a).norm() <= 1e-12 * scale);

        // eigenvalues against the dense oracle
        const Eigen::Vector3d ev = oracles::sym3_eigenvalues(a);
        for (int i = 0; i < 3; ++i)
            CHECK(std::abs(sd.eigenvalues[i] - ev[i]) <= 1e-12 * scale);

        // O_ij basis orthonormal under the Sym scalar product
        for (int i = 0; i < 6; ++i)
            for (int j = i; j < 6; ++j)
                CHECK(std::abs(sd.basis[i].dot(sd.basis[j]) - (i == j ? 1 : 0)) <= 1e-12);

        // sign convention: first nonzero component positive
        for (int i = 0; i < 3; ++i) {
            for (int c = 0; c < 3; ++c) {
                if (std::abs(sd.eigenvectors[i][c]) > 1e-12) {
                    CHECK(sd.eigenvectors[i][c] > 0.0);
                    break;
                }
            }
        }
    }
    CHECK(degenerate_checked > 0);
}

TEST_CASE("decompose-reconstruct is idempotent on eigenvalues") {
    std::mt19937 rng(11);
    for (int it = 0; it < 2000; ++it) {
        const Eigen::Matrix3d a = oracles::random_sym3(rng);
        const SpectralDecomp sd = spectral_decompose(SymTensor3::from_matrix(a));
        SymTensor3 rec;
        for (int i = 0; i < 3; ++i) rec += sd.eigenvalues[i] * sd.basis[i];
        const SpectralDecomp sd2 = spectral_decompose(rec);
        const double scale = std::max(rec.norm(), 1e-30);
        for (int i = 0; i < 3; ++i)
            CHECK(std::abs(sd.eigenvalues[i] - sd2.eigenvalues[i]) <= 1e-12 * scale);
    }
}

TEST_CASE("PSD inputs have nonnegative eigenvalues") {
    std::mt19937 rng(13);
    for (int it = 0; it < 2000; ++it) {
        const Eigen::Matrix3d g = oracles::random_sym3(rng);
        const Eigen::Matrix3d a = g * g.transpose(); // PSD
        const SymTensor3 e = SymTensor3::from_matrix(a);
        const SpectralDecomp sd = spectral_decompose(e);
        CHECK(sd.eigenvalues[0] >= -1e-12 * e.norm());
    }
}

TEST_CASE("dyad basis tensors") {
    const SymTensor3 o11 = dyad(ex, ex);
    CHECK(o11.norm() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(o11(0, 0) == doctest::Approx(1.0));

    const SymTensor3 o12 = dyad(ex, ey);
    CHECK(o12.dot(o12) == doctest::Approx(1.0).epsilon(1e-15));
    // the paper's 1/sqrt(2) scaling: off-diagonal physical component
    CHECK(o12(0, 1) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));

    CHECK(std::abs(o11.dot(o12)) <= 1e-15);
}

TEST_CASE("fourth-order apply: identity, null, outer") {
    std::mt19937 rng(17);
    for (int it = 0; it < 500; ++it) {
        const SymTensor3 h = SymTensor3::from_matrix(oracles::random_sym3(rng));
        CHECK((Tangent4::identity_sym().apply(h) - h).norm() <= 1e-15 * h.norm());
        CHECK(Tangent4::zero().apply(h).norm() == 0.0);

        const SymTensor3 a = SymTensor3::from_matrix(oracles::random_sym3(rng));
        const SymTensor3 b = SymTensor3::from_matrix(oracles::random_sym3(rng));
        const SymTensor3 lhs = Tangent4::outer(a, b).apply(h);
        // componentwise 3x3 computation of (B:H) A
        const double bh = (b.matrix().transpose() * h.matrix()).trace();
        const Eigen::Matrix3d rhs = bh * a.matrix();
        CHECK((lhs.matrix() - rhs).norm() <= 1e-12 * a.norm() * b.norm() * h.norm());

        // linearity of apply
        const double al = 2.75;
        CHECK((Tangent4::outer(a, b).apply(h * al) - Tangent4::outer(a, b).apply(h) * al)
                  .norm() <= 1e-12 * a.norm() * b.norm() * h.norm());
    }
}
