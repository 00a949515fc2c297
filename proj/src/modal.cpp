#include "masmodal/modal.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace masmodal {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Shifted operator (K - sigma M) x = b with an LDLT try and a pivoted LU
// fallback (the shifted matrix is indefinite for interior shifts).
class ShiftedSolver {
public:
    bool compute(const SpMat& k, const SpMat& m, double sigma) {
        SpMat a = k;
        if (sigma != 0.0) a = k - sigma * m;
        a.makeCompressed();
        ldlt_.compute(a);
        use_lu_ = false;
        if (ldlt_.info() == Eigen::Success && probe_ok(a)) return true;
        lu_.compute(a);
        use_lu_ = true;
        return lu_.info() == Eigen::Success && probe_ok(a);
    }

    Vec solve(const Vec& b) const {
        if (use_lu_) return lu_.solve(b);
        return ldlt_.solve(b);
    }

private:
    bool probe_ok(const SpMat& a) {
        Vec b = Vec::Ones(a.rows());
        Vec x = solve(b);
        if (!x.allFinite()) return false;
        const double rel = (a * x - b).norm() / b.norm();
        return rel < 1e-8;
    }

    Eigen::SimplicialLDLT<SpMat> ldlt_;
    Eigen::SparseLU<SpMat> lu_;
    bool use_lu_ = false;
};

void apply_sign_convention(Eigen::MatrixXd& shapes) {
    for (int c = 0; c < shapes.cols(); ++c) {
        int imax = 0;
        shapes.col(c).cwiseAbs().maxCoeff(&imax);
        if (shapes(imax, c) < 0.0) shapes.col(c) = -shapes.col(c);
    }
}

Vec compute_residuals(const SpMat& k_red, const SpMat& m_red, const Eigen::MatrixXd& q,
                      const Vec& lambda) {
    Vec res(q.cols());
    for (int i = 0; i < q.cols(); ++i) {
        const Vec kq = k_red * q.col(i);
        const Vec r = kq - lambda[i] * (m_red * q.col(i));
        const double den = kq.norm();
        res[i] = den > 0.0 ? r.norm() / den : r.norm();
    }
    return res;
}

// Lambda scale used to flag zero-energy modes.
double lambda_scale(const SpMat& k_red, const SpMat& m_red) {
    double kmax = 0.0, mmax = 0.0;
    for (int i = 0; i < k_red.rows(); ++i) {
        kmax = std::max(kmax, std::abs(k_red.coeff(i, i)));
        mmax = std::max(mmax, std::abs(m_red.coeff(i, i)));
    }
    return mmax > 0.0 ? kmax / mmax : 1.0;
}

// One inverse-iteration step per unconverged mode sharpens dense-path
// eigenvectors to round-off residuals; skipped for zero-energy modes where
// the shifted matrix is genuinely singular.
void polish(const SpMat& k_red, const SpMat& m_red, Eigen::MatrixXd* q, Vec* lambda) {
    Vec res = compute_residuals(k_red, m_red, *q, *lambda);
    const double scale = lambda_scale(k_red, m_red);
    Eigen::MatrixXd kd, md;
    for (int i = 0; i < q->cols(); ++i) {
        if (res[i] <= 1e-10) continue;
        if ((*lambda)[i] <= 1e-12 * scale) continue;
        if (kd.size() == 0) {
            kd = Eigen::MatrixXd(k_red);
            md = Eigen::MatrixXd(m_red);
        }
        for (int pass = 0; pass < 2 && res[i] > 1e-12; ++pass) {
            const Eigen::PartialPivLU<Eigen::MatrixXd> lu(kd - (*lambda)[i] * md);
            Vec x = lu.solve(md * q->col(i));
            if (!x.allFinite()) break;
            const double mn = std::sqrt(x.dot(md * x));
            if (!(mn > 0.0) || !std::isfinite(mn)) break;
            x /= mn;
            const double rq = x.dot(kd * x) / x.dot(md * x);
            const Vec r_new = kd * x - rq * (md * x);
            const double den = (kd * x).norm();
            const double rn = den > 0.0 ? r_new.norm() / den : r_new.norm();
            if (rn < res[i]) {
                q->col(i) = x;
                (*lambda)[i] = rq;
                res[i] = rn;
            } else {
                break;
            }
        }
    }
}

ModalResult finalize(const SpMat& k_red, const SpMat& m_red, const Reduction& red,
                     Eigen::MatrixXd q, Vec lambda) {
    polish(k_red, m_red, &q, &lambda);
    ModalResult out;
    out.n_modes = static_cast<int>(lambda.size());
    out.lambda = lambda;
    out.omega.resize(lambda.size());
    out.frequencies.resize(lambda.size());
    const double scale = lambda_scale(k_red, m_red);
    out.near_zero.resize(lambda.size());
    for (int i = 0; i < lambda.size(); ++i) {
        const double l = std::max(lambda[i], 0.0);
        out.omega[i] = std::sqrt(l);
        out.frequencies[i] = out.omega[i] / kTwoPi;
        out.near_zero[i] = lambda[i] <= 1e-12 * scale;
    }
    out.residuals = compute_residuals(k_red, m_red, q, lambda);

    // exact mass normalization on the reduced pair
    Eigen::MatrixXd qn = q;
    for (int i = 0; i < qn.cols(); ++i) {
        const double mn = std::sqrt(qn.col(i).dot(m_red * qn.col(i)));
        if (mn > 0.0) qn.col(i) /= mn;
    }
    out.shapes = red.r * qn;
    apply_sign_convention(out.shapes);
    return out;
}

ModalResult solve_dense(const SpMat& k_red, const SpMat& m_red, const Reduction& red,
                        int n_modes) {
    const Eigen::MatrixXd kd = Eigen::MatrixXd(k_red);
    const Eigen::MatrixXd md = Eigen::MatrixXd(m_red);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(kd, md);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("solve_eigen: dense generalized eigensolver failed");
    const Vec lambda = es.eigenvalues().head(n_modes);
    const Eigen::MatrixXd q = es.eigenvectors().leftCols(n_modes);
    return finalize(k_red, m_red, red, q, lambda);
}

ModalResult solve_lanczos(const SpMat& k_red, const SpMat& m_red, const Reduction& red,
                          const EigenOptions& opts) {
    const int n = static_cast<int>(k_red.rows());
    const int k = opts.n_modes;

    double sigma = opts.shift;
    ShiftedSolver solver;
    const double lscale = lambda_scale(k_red, m_red);
    for (int attempt = 0; attempt < 4; ++attempt) {
        if (solver.compute(k_red, m_red, sigma)) break;
        // singular shift (sigma at an eigenvalue, or PSD K with sigma = 0)
        sigma -= std::max(1e-6 * lscale, 1e-12);
        if (attempt == 3)
            throw std::runtime_error("solve_eigen: shifted factorization failed");
    }

    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);

    int m = std::min(n, std::max(2 * k + 16, 32));
    int cap = std::min(n, m + 1);
    Eigen::MatrixXd v(n, cap), mv(n, cap);
    Vec alpha = Vec::Zero(n), beta = Vec::Zero(n); // beta[j]: T(j+1, j)
    int na = 0; // columns with alpha computed
    int nv = 0; // basis vectors stored

    {
        Vec v0(n);
        for (int i = 0; i < n; ++i) v0[i] = unif(rng);
        const Vec mv0 = m_red * v0;
        const double nrm = std::sqrt(v0.dot(mv0));
        v.col(0) = v0 / nrm;
        mv.col(0) = mv0 / nrm;
        nv = 1;
    }

    Eigen::MatrixXd q; // converged Ritz vectors (reduced space)
    Vec lambda;

    while (true) {
        while (na < m) {
            const int j = na; // v.col(j) exists: nv == min(j + 1, n)
            Vec w = solver.solve(mv.col(j));
            // two-pass classical Gram-Schmidt in the M-inner product
            const Vec h1 = mv.leftCols(nv).transpose() * w;
            w -= v.leftCols(nv) * h1;
            const Vec h2 = mv.leftCols(nv).transpose() * w;
            w -= v.leftCols(nv) * h2;
            alpha[j] = h1[j] + h2[j];
            na = j + 1;
            if (nv >= n) continue; // full space: nothing left to store
            Vec mw = m_red * w;
            const double b = std::sqrt(std::max(w.dot(mw), 0.0));
            if (b > 1e-13 * (std::abs(alpha[j]) + 1.0) && b > 0.0) {
                beta[j] = b;
                v.col(nv) = w / b;
                mv.col(nv) = mw / b;
                ++nv;
            } else {
                // invariant subspace; restart with a fresh orthogonal vector
                Vec r(n);
                for (int i = 0; i < n; ++i) r[i] = unif(rng);
                Vec hr = mv.leftCols(nv).transpose() * r;
                r -= v.leftCols(nv) * hr;
                hr = mv.leftCols(nv).transpose() * r;
                r -= v.leftCols(nv) * hr;
                const Vec mr = m_red * r;
                const double rn = std::sqrt(std::max(r.dot(mr), 0.0));
                if (rn <= 0.0) break;
                beta[j] = 0.0;
                v.col(nv) = r / rn;
                mv.col(nv) = mr / rn;
                ++nv;
            }
        }

        // Ritz pairs of the tridiagonal projection over the processed columns
        const int nt = na;
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(nt, nt);
        for (int i = 0; i < nt; ++i) {
            t(i, i) = alpha[i];
            if (i + 1 < nt) t(i, i + 1) = t(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        const Vec theta = es.eigenvalues();
        const Eigen::MatrixXd s = es.eigenvectors();

        std::vector<std::pair<double, int>> cand; // (lambda, column)
        for (int i = 0; i < theta.size(); ++i) {
            if (theta[i] == 0.0) continue;
            cand.emplace_back(sigma + 1.0 / theta[i], i);
        }
        std::sort(cand.begin(), cand.end());
        const int take = std::min(k, static_cast<int>(cand.size()));
        q.resize(n, take);
        lambda.resize(take);
        for (int i = 0; i < take; ++i) {
            lambda[i] = cand[i].first;
            q.col(i) = v.leftCols(nt) * s.col(cand[i].second);
        }
        const Vec res = compute_residuals(k_red, m_red, q, lambda);
        const bool ok = take == k && res.size() > 0 && res.maxCoeff() <= opts.tol;
        if (ok || na >= n || nv <= na) break;
        m = std::min(n, m + std::max(k, 16));
        cap = std::min(n, m + 1);
        v.conservativeResize(n, cap);
        mv.conservativeResize(n, cap);
    }

    if (static_cast<int>(lambda.size()) < k)
        throw std::runtime_error("solve_eigen: Lanczos failed to deliver requested modes");
    return finalize(k_red, m_red, red, q, lambda);
}

} // namespace

Reduction identity_reduction(int n) {
    Reduction red;
    red.n_full = n;
    red.n_reduced = n;
    red.retained.resize(n);
    red.r.resize(n, n);
    red.r.setIdentity();
    for (int i = 0; i < n; ++i) red.retained[i] = i;
    return red;
}

ModalResult solve_eigen(const SpMat& k, const SpMat& m, const Reduction& red,
                        const EigenOptions& opts) {
    if (opts.n_modes <= 0)
        throw std::invalid_argument("solve_eigen: n_modes must be positive");
    if (opts.n_modes > red.n_reduced)
        throw std::invalid_argument("solve_eigen: n_modes exceeds free dof count");

    const SpMat k_red = red.reduce(k);
    const SpMat m_red = red.reduce(m);

    const bool dense = opts.method == EigenOptions::Method::Dense ||
                       (opts.method == EigenOptions::Method::Auto &&
                        red.n_reduced <= opts.dense_threshold) ||
                       red.n_reduced < std::max(8, opts.n_modes + 2);
    if (dense) return solve_dense(k_red, m_red, red, opts.n_modes);
    return solve_lanczos(k_red, m_red, red, opts);
}

PrestressedModal prestressed_modal(const Model& model, const LoadCase& load_case,
                                   const SolverSettings& solver_settings,
                                   const EigenOptions& eigen_options) {
    PrestressedModal out;
    const SpMat k = assemble_elastic_stiffness(model);
    const SpMat m = assemble_mass(model);
    const Reduction red = make_reduction(model);

    out.linear = solve_eigen(k, m, red, eigen_options);
    out.solve = solve_equilibrium(model, load_case, solver_settings);
    // damaged results for every converged increment, even on a partial solve
    out.damaged.reserve(out.solve.states.size());
    for (const auto& st : out.solve.states)
        out.damaged.push_back(solve_eigen(st.k_tangent, m, red, eigen_options));
    out.ok = out.solve.ok;
    out.message = out.solve.message;
    return out;
}

double mac_m(const Vec& phi_a, const Vec& phi_b, const SpMat& m) {
    const double na = phi_a.dot(m * phi_a);
    const double nb = phi_b.dot(m * phi_b);
    if (!(na > 0.0) || !(nb > 0.0))
        throw std::invalid_argument("mac_m: zero mode vector");
    return std::abs(phi_a.dot(m * phi_b)) / (std::sqrt(na) * std::sqrt(nb));
}

ModeTracking mode_tracking(const ModalResult& linear, const ModalResult& damaged,
                           const SpMat& m) {
    ModeTracking out;
    const int ni = linear.n_modes, nj = damaged.n_modes;
    out.mac.resize(ni, nj);
    for (int i = 0; i < ni; ++i)
        for (int j = 0; j < nj; ++j)
            out.mac(i, j) = mac_m(linear.shapes.col(i), damaged.shapes.col(j), m);

    out.permutation.assign(ni, -1);
    std::vector<bool> row_used(ni, false), col_used(nj, false);
    for (int pick = 0; pick < std::min(ni, nj); ++pick) {
        double best = -1.0;
        int bi = -1, bj = -1;
        for (int i = 0; i < ni; ++i) {
            if (row_used[i]) continue;
            for (int j = 0; j < nj; ++j) {
                if (col_used[j]) continue;
                if (out.mac(i, j) > best) { best = out.mac(i, j); bi = i; bj = j; }
            }
        }
        row_used[bi] = true;
        col_used[bj] = true;
        out.permutation[bi] = bj;
    }
    return out;
}

EffectiveModalMass effective_modal_mass(const ModalResult& result, const SpMat& m,
                                        const DofMap& dofs, Dof direction) {
    if (direction != Dof::Ux && direction != Dof::Uy)
        throw std::invalid_argument("effective_modal_mass: direction must be a translation");
    const int n = static_cast<int>(m.rows());
    Vec r = Vec::Zero(n);
    for (const auto& idx : dofs.index) {
        const int d = idx[static_cast<int>(direction)];
        if (d >= 0) r[d] = 1.0;
    }
    EffectiveModalMass out;
    const Vec mr = m * r;
    out.total_mass = r.dot(mr);
    out.gamma.resize(result.n_modes);
    out.percent.resize(result.n_modes);
    for (int i = 0; i < result.n_modes; ++i) {
        const double p = result.shapes.col(i).dot(mr);
        out.gamma[i] = p * p;
        out.percent[i] = 100.0 * out.gamma[i] / out.total_mass;
    }
    return out;
}

} // namespace masmodal
