#include "masmodal/solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <limits>

#include <cmath>
#include <sstream>

namespace masmodal {

namespace {

struct NewtonOutcome {
    bool converged = false;
    bool regularized = false;
    Vec u;
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> history;
    std::vector<double> energies;
    std::string message;
};

// Factor the reduced tangent; unpivoted LDLT first, then a pivoted LU, then
// a regularized LDLT (flagged). The solve quality is probed explicitly since
// heavily cracked tangents can defeat the unpivoted factorization silently.
class TangentSolver {
public:
    bool compute(SpMat k_red, bool* regularized) {
        ldlt_.compute(k_red);
        use_lu_ = false;
        if (ldlt_.info() == Eigen::Success && probe_ok(k_red)) return true;
        lu_.compute(k_red);
        use_lu_ = true;
        if (lu_.info() == Eigen::Success && probe_ok(k_red)) return true;
        double dmax = 0.0;
        for (int i = 0; i < k_red.rows(); ++i)
            dmax = std::max(dmax, std::abs(k_red.coeff(i, i)));
        SpMat eye(k_red.rows(), k_red.cols());
        eye.setIdentity();
        k_red = k_red + (1e-12 * dmax) * eye;
        *regularized = true;
        use_lu_ = false;
        ldlt_.compute(k_red);
        return ldlt_.info() == Eigen::Success && probe_ok(k_red, 1e-4);
    }

    Vec solve(const Vec& b) const {
        if (use_lu_) return lu_.solve(b);
        return ldlt_.solve(b);
    }

private:
    bool probe_ok(const SpMat& a, double tol = 1e-8) {
        const Vec b = Vec::Ones(a.rows());
        const Vec x = solve(b);
        return x.allFinite() && (a * x - b).norm() <= tol * b.norm();
    }

    Eigen::SimplicialLDLT<SpMat> ldlt_;
    Eigen::SparseLU<SpMat> lu_;
    bool use_lu_ = false;
};

// One Newton solve toward the total load f_full, starting from u0. The law is
// hyperelastic with a convex potential, so a backtracking search on the
// potential energy (exactly u.f_int/2 - f.u for this homogeneous law) makes
// the damped iteration globally convergent; convergence is still judged on
// the force residual alone.
NewtonOutcome newton_solve(const Model& model, const Reduction& red, const Vec& f_full,
                           const Vec& u0, const SolverSettings& s) {
    NewtonOutcome out;
    const Vec f_red = red.reduce_vec(f_full);
    const double tol = std::max(s.rel_tol * f_red.norm(), s.abs_tol);

    Vec q(red.n_reduced);
    for (int i = 0; i < red.n_reduced; ++i) q[i] = u0[red.retained[i]];
    Vec u = red.expand(q);

    const auto energy = [&](const Vec& u_full, const Vec& fint, const Vec& q_red) {
        return 0.5 * u_full.dot(fint) - f_red.dot(q_red);
    };

    Vec fint = internal_forces(model, u);
    Vec r = f_red - red.reduce_vec(fint);
    double rnorm = r.norm();
    double pi = energy(u, fint, q);
    out.history.push_back(rnorm);
    out.energies.push_back(pi);

    for (int it = 0; it < s.max_iterations; ++it) {
        if (rnorm <= tol) {
            out.converged = true;
            break;
        }
        SpMat kt;
        assemble_response(model, u, &kt, nullptr);

        TangentSolver solver;
        bool reg = false;
        if (!solver.compute(red.reduce(kt), &reg)) {
            out.message = "tangent factorization failed at iteration " + std::to_string(it);
            break;
        }
        out.regularized = out.regularized || reg;
        const Vec dq = solver.solve(r);
        if (!dq.allFinite()) {
            out.message = "tangent solve produced non-finite step at iteration " + std::to_string(it);
            break;
        }

        const double slope = -r.dot(dq); // dPi/dalpha at 0; <= 0 for PSD tangents
        double alpha = 1.0;
        Vec q_best, u_best, fint_best, r_best;
        double pi_best = std::numeric_limits<double>::infinity(), rn_best = rnorm;
        const int tries = s.line_search ? s.max_halvings + 1 : 1;
        for (int h = 0; h < tries; ++h) {
            const Vec q_try = q + alpha * dq;
            const Vec u_try = red.expand(q_try);
            const Vec fint_try = internal_forces(model, u_try);
            const Vec r_try = f_red - red.reduce_vec(fint_try);
            const double pi_try = energy(u_try, fint_try, q_try);
            if (pi_try < pi_best) {
                pi_best = pi_try;
                q_best = q_try;
                u_best = u_try;
                fint_best = fint_try;
                r_best = r_try;
                rn_best = r_try.norm();
            }
            // Armijo on the energy
            if (!s.line_search || pi_try <= pi + 1e-4 * alpha * slope) break;
            alpha *= 0.5;
        }
        q = q_best;
        u = u_best;
        fint = fint_best;
        r = r_best;
        rnorm = rn_best;
        pi = pi_best;
        out.history.push_back(rnorm);
        out.energies.push_back(pi);
        out.iterations = it + 1;
    }
    out.converged = out.converged || rnorm <= tol;
    out.u = u;
    out.residual = rnorm;
    if (!out.converged && out.message.empty()) {
        std::ostringstream ss;
        ss << "no convergence in " << s.max_iterations << " iterations, residual " << rnorm;
        out.message = ss.str();
    }
    return out;
}

} // namespace

SolveResult solve_equilibrium(const Model& model, const LoadCase& load_case,
                              const SolverSettings& settings) {
    SolveResult result;
    const Reduction red = make_reduction(model);

    Vec u = Vec::Zero(model.dofs.count);
    Vec f_base = Vec::Zero(model.dofs.count);
    for (size_t is = 0; is < load_case.steps.size(); ++is) {
        const LoadStep& step = load_case.steps[is];
        const Vec f_step = step_load_vector(model, step);
        for (int inc = 1; inc <= step.increments; ++inc) {
            const Vec f_target = f_base + (static_cast<double>(inc) / step.increments) * f_step;
            NewtonOutcome nw = newton_solve(model, red, f_target, u, settings);

            IncrementReport rep;
            rep.step = static_cast<int>(is);
            rep.increment = inc;
            rep.iterations = nw.iterations;
            rep.residual = nw.residual;
            rep.load_norm = red.reduce_vec(f_target).norm();
            rep.converged = nw.converged;
            rep.regularized = nw.regularized;
            rep.residual_history = nw.history;
            rep.energy_history = nw.energies;
            result.reports.push_back(rep);

            if (!nw.converged) {
                std::ostringstream ss;
                ss << "step " << is << " increment " << inc << ": " << nw.message;
                result.message = ss.str();
                result.ok = false;
                return result;
            }
            u = nw.u;
            EquilibriumState st = make_state(model, u);
            st.residual_norm = nw.residual;
            st.load_norm = rep.load_norm;
            st.newton_iterations = nw.iterations;
            st.step = rep.step;
            st.increment = inc;
            {
                std::ostringstream ss;
                ss << "step" << is << "_inc" << inc;
                st.label = ss.str();
            }
            result.states.push_back(std::move(st));
        }
        f_base += f_step;
    }
    result.ok = true;
    return result;
}

ContinueResult continue_from(const Model& model, const EquilibriumState& base,
                             const Vec& f_total, const SolverSettings& settings) {
    ContinueResult out;
    const Reduction red = make_reduction(model);
    NewtonOutcome nw = newton_solve(model, red, f_total, base.u, settings);
    out.report.iterations = nw.iterations;
    out.report.residual = nw.residual;
    out.report.load_norm = red.reduce_vec(f_total).norm();
    out.report.converged = nw.converged;
    out.report.regularized = nw.regularized;
    out.report.residual_history = nw.history;
    out.report.energy_history = nw.energies;
    if (!nw.converged) {
        out.ok = false;
        out.message = nw.message;
        return out;
    }
    out.state = make_state(model, nw.u);
    out.state.residual_norm = nw.residual;
    out.state.load_norm = out.report.load_norm;
    out.state.newton_iterations = nw.iterations;
    out.ok = true;
    return out;
}

} // namespace masmodal
