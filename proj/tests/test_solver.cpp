#include "masmodal/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace masmodal;

namespace {

std::string models_dir() { return MASMODAL_MODELS_DIR; }

const SolverSettings kSettings;

double stored_elastic_energy(const Model& m, const EquilibriumState& st) {
    // complementarity makes T:E = T:(E - Ef), so the stored energy is half
    // the internal virtual work of the converged displacement
    return 0.5 * st.u.dot(internal_forces(m, st.u));
}

} // namespace

TEST_CASE("zero load case: zero displacements, tangent equals elastic") {
    Model m = load_model_file(models_dir() + "/beam60.json");
    LoadCase zero;
    zero.name = "zero";
    LoadStep step;
    step.increments = 1;
    zero.steps.push_back(step);

    const SolveResult res = solve_equilibrium(m, zero, kSettings);
    REQUIRE(res.ok);
    CHECK(res.states.back().u.norm() == 0.0);
    const SpMat k = assemble_elastic_stiffness(m);
    CHECK((Eigen::MatrixXd(res.states.back().k_tangent) - Eigen::MatrixXd(k)).norm() == 0.0);
}

TEST_CASE("force-controlled pure tension has no equilibrium and is reported") {
    // a no-tension bar cannot balance a tensile end force; the solver must
    // fail honestly with a diagnostic and the last residual in the report
    const char* json = R"({
      "name":"bar","nodes":[{"id":0,"x":0,"y":0},{"id":1,"x":1,"y":0}],
      "materials":[{"id":1,"model":"masonry","young":3e9,"poisson":0.2,"density":1800}],
      "sections":[{"id":1,"type":"bar","area":0.01}],
      "elements":[{"id":0,"type":"truss","nodes":[0,1],"material":1,"section":1}],
      "constraints":{"fixed":[{"node":0,"dofs":["ux","uy"]},{"node":1,"dofs":["uy"]}]},
      "load_cases":[{"name":"pull","steps":[{"nodal":[{"node":1,"fx":1000}]}]}]
    })";
    const Model m = load_model_string(json);
    SolverSettings s = kSettings;
    s.max_iterations = 10;
    const SolveResult res = solve_equilibrium(m, m.load_cases[0], s);
    CHECK(!res.ok);
    CHECK(!res.message.empty());
    REQUIRE(!res.reports.empty());
    CHECK(res.reports.back().residual > 0.0);
    CHECK(!res.reports.back().converged);
}

TEST_CASE("beam60 staged run: first crack appears at midspan") {
    const Model m = load_model_file(models_dir() + "/beam60.json");
    const SolveResult res = solve_equilibrium(m, m.load_case("table"), kSettings);
    REQUIRE(res.ok);
    REQUIRE(res.states.size() == 8); // axial, 9000, then 6 increments to 15750

    // at 9000 N the fiber discretization still shows no crack
    const auto& at9000 = res.states[1];
    double max_ratio = 0.0;
    for (const auto& el : at9000.beam_points)
        for (const auto& gp : el) max_ratio = std::max(max_ratio, gp.cracked_ratio);
    CHECK(max_ratio == 0.0);

    // at 10125 N the first cracks exist, in a zone centered at midspan
    const auto& at10125 = res.states[2];
    double w_sum = 0.0, wx_sum = 0.0, x_min = 1e30, x_max = -1e30;
    for (size_t e = 0; e < at10125.beam_points.size(); ++e) {
        const Element& el = m.elements[e];
        const double x0 = m.nodes[el.nodes[0]].x;
        for (const auto& gp : at10125.beam_points[e]) {
            if (gp.cracked_ratio <= 0.0) continue;
            const double x = x0 + gp.x;
            w_sum += gp.cracked_ratio;
            wx_sum += gp.cracked_ratio * x;
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
        }
    }
    REQUIRE(w_sum > 0.0);
    CHECK(std::abs(wx_sum / w_sum - 3.0) <= 0.15); // centroid at midspan
    CHECK(x_min <= 3.0);
    CHECK(x_max >= 3.0);
    // uniform load, w = 1687.5 N/m: the outermost fiber row cracks where the
    // bending moment exceeds 7.02 kNm, i.e. x in (1.97, 4.03)
    CHECK(x_min >= 1.9);
    CHECK(x_max <= 4.1);

    // cracked fibers carry zero stress and keep their (fracture) strain
    for (const auto& el : res.states.back().beam_points)
        for (const auto& gp : el)
            for (size_t f = 0; f < gp.fiber_cracked.size(); ++f)
                if (gp.fiber_cracked[f]) {
                    CHECK(gp.fiber_stress[f] == 0.0);
                    CHECK(gp.fiber_strain[f] > 0.0);
                }
}

TEST_CASE("energy line search: accepted iterates never raise the potential") {
    // the law is hyperelastic with a convex potential, so the damped Newton
    // iteration is monotone in the energy (the residual itself may wander
    // while the crack pattern settles)
    for (const char* model : {"/beam60.json", "/tower.json"}) {
        const Model m = load_model_file(models_dir() + model);
        const SolveResult res = solve_equilibrium(m, m.load_cases[0], kSettings);
        REQUIRE(res.ok);
        for (const auto& rep : res.reports) {
            for (size_t i = 1; i < rep.energy_history.size(); ++i) {
                const double scale = std::abs(rep.energy_history[i - 1]) + 1.0;
                CHECK(rep.energy_history[i] <= rep.energy_history[i - 1] + 1e-12 * scale);
            }
        }
    }
}

TEST_CASE("path independence: staged vs one-shot displacements") {
    const Model m = load_model_file(models_dir() + "/beam60.json");
    const SolveResult staged = solve_equilibrium(m, m.load_case("table"), kSettings);
    const SolveResult oneshot = solve_equilibrium(m, m.load_case("oneshot"), kSettings);
    REQUIRE(staged.ok);
    REQUIRE(oneshot.ok);
    const Vec& us = staged.states.back().u;
    const Vec& uo = oneshot.states.back().u;
    CHECK((us - uo).norm() <= 1e-6 * us.norm());
}

TEST_CASE("continue_from: idempotent on the same load, agrees with from-scratch") {
    const Model m = load_model_file(models_dir() + "/beam60.json");
    const LoadCase& lc = m.load_case("table");
    const SolveResult res = solve_equilibrium(m, lc, kSettings);
    REQUIRE(res.ok);

    // total load of the staged case
    Vec f_total = Vec::Zero(m.dofs.count);
    for (const auto& step : lc.steps) f_total += step_load_vector(m, step);

    // re-apply the same load: no further iterations, unchanged state
    const ContinueResult again = continue_from(m, res.states.back(), f_total, kSettings);
    REQUIRE(again.ok);
    CHECK(again.report.iterations == 0);
    CHECK((again.state.u - res.states.back().u).norm() == 0.0);

    // continue from the 9000 N state straight to the final load
    const ContinueResult jump = continue_from(m, res.states[1], f_total, kSettings);
    REQUIRE(jump.ok);
    CHECK((jump.state.u - res.states.back().u).norm() <= 1e-6 * res.states.back().u.norm());
}

TEST_CASE("external work bounds the stored elastic energy") {
    const Model m = load_model_file(models_dir() + "/beam60.json");
    const LoadCase& lc = m.load_case("table");
    const SolveResult res = solve_equilibrium(m, lc, kSettings);
    REQUIRE(res.ok);

    Vec f_total = Vec::Zero(m.dofs.count);
    for (const auto& step : lc.steps) f_total += step_load_vector(m, step);

    const EquilibriumState& st = res.states.back();
    const double w_ext = f_total.dot(st.u);
    const double stored = stored_elastic_energy(m, st);
    CHECK(stored >= 0.0);
    CHECK(w_ext >= stored * (1.0 - 1e-6));
}

TEST_CASE("quad model: self-weight solve converges and stays path independent") {
    const Model m = load_model_file(models_dir() + "/tower.json");
    // a displacement comparison at 1e-6 needs residuals beyond the default
    // 1 N floor
    SolverSettings tight = kSettings;
    tight.abs_tol = 1e-4;
    const SolveResult two = solve_equilibrium(m, m.load_case("selfweight"), tight);
    REQUIRE(two.ok);

    LoadCase one = m.load_case("selfweight");
    one.steps[0].increments = 1;
    const SolveResult oneinc = solve_equilibrium(m, one, tight);
    REQUIRE(oneinc.ok);
    CHECK((two.states.back().u - oneinc.states.back().u).norm() <=
          1e-6 * oneinc.states.back().u.norm());

    // self-weight must crack the asymmetric tower (the updating direction
    // check depends on it)
    int cracked_points = 0;
    for (const auto& el : two.states.back().quad_points)
        for (const auto& gp : el)
            if (gp.region.region != Region::V3 && gp.fracture.norm() > 0.0) ++cracked_points;
    CHECK(cracked_points > 5);
}
