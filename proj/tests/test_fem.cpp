#include "masmodal/assembly.hpp"

#include "masmodal/io.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cstdio>
#include <random>
#include <set>
#include <sstream>

using namespace masmodal;

namespace {

std::string models_dir() { return MASMODAL_MODELS_DIR; }

// one horizontal fiber beam, pinned nowhere
std::string single_beam_json(double length = 0.1, double width = 0.4, double height = 1.0,
                             const char* extra_constraints = "") {
    std::ostringstream ss;
    ss << R"({
      "name": "one_beam",
      "nodes": [{"id":0,"x":0,"y":0},{"id":1,"x":)" << length << R"(,"y":0}],
      "materials": [{"id":1,"model":"masonry","young":3e9,"poisson":0.2,"density":1800}],
      "sections": [{"id":1,"type":"rect_fiber","width":)"
       << width << R"(,"height":)" << height << R"(,"fibers":20}],
      "elements": [{"id":0,"type":"beam","nodes":[0,1],"material":1,"section":1}],
      "constraints": {)" << extra_constraints << R"(},
      "load_cases": []
    })";
    return ss.str();
}

std::string unit_quad_json() {
    return R"({
      "name": "one_quad",
      "nodes": [{"id":0,"x":0,"y":0},{"id":1,"x":1,"y":0},
                {"id":2,"x":1,"y":1},{"id":3,"x":0,"y":1}],
      "materials": [{"id":1,"model":"linear","young":1.0,"poisson":0.25,"density":1}],
      "sections": [{"id":1,"type":"solid","thickness":1}],
      "elements": [{"id":0,"type":"quad","nodes":[0,1,2,3],"material":1,"section":1}],
      "load_cases": []
    })";
}

Vec full_vector(const Model& m, double vx, double vy, double vr) {
    Vec v = Vec::Zero(m.dofs.count);
    for (const auto& n : m.nodes) {
        if (m.dofs.has(n.id, Dof::Ux)) v[m.dofs.at(n.id, Dof::Ux)] = vx;
        if (m.dofs.has(n.id, Dof::Uy)) v[m.dofs.at(n.id, Dof::Uy)] = vy;
        if (m.dofs.has(n.id, Dof::Rz)) v[m.dofs.at(n.id, Dof::Rz)] = vr;
    }
    return v;
}

} // namespace

TEST_CASE("load_model: beam60 example file") {
    const Model m = load_model_file(models_dir() + "/beam60.json");
    CHECK(m.nodes.size() == 61);
    CHECK(m.elements.size() == 60);
    CHECK(m.dofs.count == 183);
    CHECK(m.constraints.fixed.size() == 3);
}

TEST_CASE("load_model: schema violations") {
    CHECK_THROWS_WITH_AS(load_model_string(R"({"name":"x","nodes":[{"id":0,"x":0,"y":0}]})"),
                         doctest::Contains("no elements"), std::runtime_error);

    // clockwise quad -> negative Jacobian
    const std::string cw = R"({
      "name": "bad", "nodes": [{"id":0,"x":0,"y":0},{"id":1,"x":1,"y":0},
        {"id":2,"x":1,"y":1},{"id":3,"x":0,"y":1}],
      "materials": [{"id":1,"model":"linear","young":1,"poisson":0.2,"density":1}],
      "sections": [{"id":1,"type":"solid","thickness":1}],
      "elements": [{"id":0,"type":"quad","nodes":[0,3,2,1],"material":1,"section":1}]
    })";
    CHECK_THROWS_WITH_AS(load_model_string(cw), doctest::Contains("negative Jacobian"),
                         std::runtime_error);

    // dangling node reference
    const std::string dangling = R"({
      "name": "bad", "nodes": [{"id":0,"x":0,"y":0},{"id":1,"x":1,"y":0}],
      "materials": [{"id":1,"model":"linear","young":1,"poisson":0.2,"density":1}],
      "sections": [{"id":1,"type":"bar","area":1}],
      "elements": [{"id":0,"type":"truss","nodes":[0,7],"material":1,"section":1}]
    })";
    CHECK_THROWS_WITH_AS(load_model_string(dangling), doctest::Contains("unknown node"),
                         std::runtime_error);

    // fiber count below the minimum
    CHECK_THROWS_WITH_AS(
        load_model_string(R"({
          "name":"bad","nodes":[{"id":0,"x":0,"y":0},{"id":1,"x":1,"y":0}],
          "materials":[{"id":1,"model":"masonry","young":1,"poisson":0.2,"density":1}],
          "sections":[{"id":1,"type":"rect_fiber","width":1,"height":1,"fibers":4}],
          "elements":[{"id":0,"type":"beam","nodes":[0,1],"material":1,"section":1}]})"),
        doctest::Contains("at least 8 fibers"), std::runtime_error);
}

TEST_CASE("mass: single beam, beam60 and unit quad totals") {
    // rho A L = 1800 * 0.4 * 0.1 = 72 kg per translation direction
    const Model one = load_model_string(single_beam_json());
    const SpMat m1 = assemble_mass(one);
    for (Dof d : {Dof::Ux, Dof::Uy}) {
        const Vec r = full_vector(one, d == Dof::Ux, d == Dof::Uy, 0);
        CHECK(r.dot(m1 * r) == doctest::Approx(72.0).epsilon(1e-9));
    }

    const Model b60 = load_model_file(models_dir() + "/beam60.json");
    const SpMat m60 = assemble_mass(b60);
    const Vec ry = full_vector(b60, 0, 1, 0);
    CHECK(ry.dot(m60 * ry) == doctest::Approx(4320.0).epsilon(1e-9));

    const Model q = load_model_string(unit_quad_json());
    const SpMat mq = assemble_mass(q);
    const Vec rx = full_vector(q, 1, 0, 0);
    CHECK(rx.dot(mq * rx) == doctest::Approx(1.0).epsilon(1e-12));

    // consistent mass is positive definite
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int it = 0; it < 50; ++it) {
        Vec x(m60.rows());
        for (int i = 0; i < x.size(); ++i) x[i] = u(rng);
        CHECK(x.dot(m60 * x) > 0.0);
    }
}

TEST_CASE("elastic stiffness: cantilever tip deflection (shear-flexible closed form)") {
    // one element, clamped at node 0, tip load P: w = PL^3/3EI + PL/(ks G A)
    const double L = 2.0, b = 0.3, h = 0.5, p = 1e4;
    std::ostringstream ss;
    ss << R"({"name":"cant","nodes":[{"id":0,"x":0,"y":0},{"id":1,"x":)" << L << R"(,"y":0}],
      "materials":[{"id":1,"model":"linear","young":3e9,"poisson":0.2,"density":1800}],
      "sections":[{"id":1,"type":"rect_fiber","width":)" << b << R"(,"height":)" << h
       << R"(,"fibers":24}],
      "elements":[{"id":0,"type":"beam","nodes":[0,1],"material":1,"section":1}],
      "constraints":{"fixed":[{"node":0,"dofs":["ux","uy","rz"]}]},
      "load_cases":[{"name":"tip","steps":[{"nodal":[{"node":1,"fy":)" << -p << R"(}]}]}]})";
    const Model m = load_model_string(ss.str());
    const SpMat k = assemble_elastic_stiffness(m);
    const Reduction red = make_reduction(m);
    const SpMat k_red = red.reduce(k);
    const Vec f_red = red.reduce_vec(step_load_vector(m, m.load_cases[0].steps[0]));
    const Eigen::MatrixXd kd(k_red);
    const Vec q = kd.ldlt().solve(f_red);
    const Vec u = red.expand(q);

    const double young = 3e9, nu = 0.2;
    const double inertia = b * h * h * h / 12.0, area = b * h;
    const double g = young / (2 * (1 + nu));
    const double ks = 10.0 * (1 + nu) / (12.0 + 11.0 * nu);
    const double w_expect = p * L * L * L / (3 * young * inertia) + p * L / (ks * g * area);
    CHECK(-u[m.dofs.at(1, Dof::Uy)] == doctest::Approx(w_expect).epsilon(1e-9));
}

TEST_CASE("quad patch test: constant strain reproduced exactly") {
    // 2x2 patch with an interior node, boundary displacements from a linear
    // field; interior node must follow the same field
    const std::string patch = R"({
      "name":"patch",
      "nodes":[{"id":0,"x":0,"y":0},{"id":1,"x":0.6,"y":0},{"id":2,"x":1,"y":0},
               {"id":3,"x":0,"y":0.45},{"id":4,"x":0.55,"y":0.52},{"id":5,"x":1,"y":0.5},
               {"id":6,"x":0,"y":1},{"id":7,"x":0.4,"y":1},{"id":8,"x":1,"y":1}],
      "materials":[{"id":1,"model":"linear","young":5e7,"poisson":0.3,"density":1}],
      "sections":[{"id":1,"type":"solid","thickness":0.7}],
      "elements":[
        {"id":0,"type":"quad","nodes":[0,1,4,3],"material":1,"section":1},
        {"id":1,"type":"quad","nodes":[1,2,5,4],"material":1,"section":1},
        {"id":2,"type":"quad","nodes":[3,4,7,6],"material":1,"section":1},
        {"id":3,"type":"quad","nodes":[4,5,8,7],"material":1,"section":1}]
    })";
    const Model m = load_model_string(patch);
    const auto field_u = [](double x, double y) { return 1e-3 * (2 * x + 0.5 * y); };
    const auto field_v = [](double x, double y) { return 1e-3 * (0.3 * x - 1.2 * y); };

    const SpMat k = assemble_elastic_stiffness(m);
    // prescribe the field on all boundary nodes, solve for the interior one
    Vec u = Vec::Zero(m.dofs.count);
    for (const auto& n : m.nodes) {
        u[m.dofs.at(n.id, Dof::Ux)] = field_u(n.x, n.y);
        u[m.dofs.at(n.id, Dof::Uy)] = field_v(n.x, n.y);
    }
    const Vec f = k * u;
    // interior node 4: residual of the patch equation must vanish
    CHECK(std::abs(f[m.dofs.at(4, Dof::Ux)]) <= 1e-10 * f.cwiseAbs().maxCoeff());
    CHECK(std::abs(f[m.dofs.at(4, Dof::Uy)]) <= 1e-10 * f.cwiseAbs().maxCoeff());
}

TEST_CASE("stiffness kernel: rigid-body modes before constraints") {
    for (const std::string& path : {models_dir() + "/beam60.json", models_dir() + "/tower.json"}) {
        const Model m = load_model_file(path);
        const SpMat k = assemble_elastic_stiffness(m);
        const double knorm = Eigen::MatrixXd(k).cwiseAbs().maxCoeff();

        const Vec tx = full_vector(m, 1, 0, 0);
        const Vec ty = full_vector(m, 0, 1, 0);
        CHECK((k * tx).cwiseAbs().maxCoeff() <= 1e-8 * knorm);
        CHECK((k * ty).cwiseAbs().maxCoeff() <= 1e-8 * knorm);

        // rigid rotation about the origin
        Vec rot = Vec::Zero(m.dofs.count);
        for (const auto& n : m.nodes) {
            rot[m.dofs.at(n.id, Dof::Ux)] = -n.y;
            rot[m.dofs.at(n.id, Dof::Uy)] = n.x;
            if (m.dofs.has(n.id, Dof::Rz)) rot[m.dofs.at(n.id, Dof::Rz)] = 1.0;
        }
        CHECK((k * rot).cwiseAbs().maxCoeff() <= 1e-8 * knorm * (1 + rot.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("tangent stiffness equals elastic at zero load") {
    for (const std::string& path :
         {models_dir() + "/beam60.json", models_dir() + "/arch.json"}) {
        const Model m = load_model_file(path);
        const SpMat k = assemble_elastic_stiffness(m);
        const EquilibriumState st = make_state(m, Vec::Zero(m.dofs.count));
        const double diff = (Eigen::MatrixXd(st.k_tangent) - Eigen::MatrixXd(k)).norm();
        CHECK(diff <= 1e-9 * Eigen::MatrixXd(k).norm());
    }
}

TEST_CASE("internal forces: zero, elastic consistency, compression, cracked tension") {
    const Model m = load_model_string(single_beam_json(2.0, 0.4, 1.0));
    CHECK(internal_forces(m, Vec::Zero(m.dofs.count)).norm() == 0.0);

    // axial shortening: N = E A eps
    Vec u = Vec::Zero(m.dofs.count);
    u[m.dofs.at(1, Dof::Ux)] = -2e-3; // eps = -1e-3
    const Vec f = internal_forces(m, u);
    CHECK(f[m.dofs.at(1, Dof::Ux)] == doctest::Approx(3e9 * 0.4 * -1e-3).epsilon(1e-12));

    // elastic-range displacement: internal forces equal K u
    const SpMat k = assemble_elastic_stiffness(m);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> amp(-1e-5, 1e-5);
    Vec ue(m.dofs.count);
    for (int i = 0; i < ue.size(); ++i) ue[i] = amp(rng);
    // push everything into compression so the whole section stays elastic
    ue[m.dofs.at(1, Dof::Ux)] = -0.01;
    const Vec fe = internal_forces(m, ue);
    CHECK((fe - k * ue).norm() <= 1e-9 * (k * ue).norm());

    // pure tension: fully cracked, zero internal force
    Vec ut = Vec::Zero(m.dofs.count);
    ut[m.dofs.at(1, Dof::Ux)] = 2e-3;
    CHECK(internal_forces(m, ut).norm() <= 1e-12 * 3e9 * 0.4 * 1e-3);
}

TEST_CASE("assembly: element scatter linearity and determinism") {
    const Model m = load_model_file(models_dir() + "/tower.json");
    const SpMat k1 = assemble_elastic_stiffness(m);
    const SpMat k2 = assemble_elastic_stiffness(m);
    // bit-identical on the same model
    REQUIRE(k1.nonZeros() == k2.nonZeros());
    for (int c = 0; c < k1.outerSize(); ++c) {
        SpMat::InnerIterator a(k1, c), b(k2, c);
        for (; a; ++a, ++b) {
            CHECK(a.row() == b.row());
            CHECK(a.value() == b.value());
        }
    }

    // element-by-element scatter sums to the assembled matrix
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(m.dofs.count, m.dofs.count);
    for (const auto& e : m.elements) {
        const auto dofs = element_dofs(m, e);
        const Eigen::MatrixXd ke = QuadKernel(m, e).elastic_stiffness();
        for (size_t i = 0; i < dofs.size(); ++i)
            for (size_t j = 0; j < dofs.size(); ++j) sum(dofs[i], dofs[j]) += ke(i, j);
    }
    CHECK((sum - Eigen::MatrixXd(k1)).norm() <= 1e-12 * sum.norm());
}

TEST_CASE("reduce_system: fixed dofs, ties vs merged mesh, no-free-dofs error") {
    // fixed-only: reduction equals row/column deletion
    const Model cant = load_model_string(
        single_beam_json(1.0, 0.4, 1.0, R"("fixed":[{"node":0,"dofs":["ux","uy","rz"]}])"));
    const Reduction red = make_reduction(cant);
    CHECK(red.n_reduced == 3);
    const SpMat k = assemble_elastic_stiffness(cant);
    const SpMat k_red = red.reduce(k);
    const Eigen::MatrixXd kd(k);
    CHECK((Eigen::MatrixXd(k_red) - kd.bottomRightCorner(3, 3)).norm() <= 1e-14 * kd.norm());

    // all dofs fixed -> error
    const Model allfix = load_model_string(single_beam_json(
        1.0, 0.4, 1.0,
        R"("fixed":[{"node":0,"dofs":["ux","uy","rz"]},{"node":1,"dofs":["ux","uy","rz"]}])"));
    CHECK_THROWS_WITH_AS(make_reduction(allfix), doctest::Contains("no free dofs"),
                         std::runtime_error);

    // dependent rows: slave constrained twice
    const Model dep = load_model_string(single_beam_json(
        1.0, 0.4, 1.0,
        R"("fixed":[{"node":1,"dofs":["ux"]}],
           "ties":[{"slave":{"node":1,"dof":"ux"},"terms":[{"node":0,"dof":"ux","coeff":1.0}]}])"));
    CHECK_THROWS_WITH_AS(make_reduction(dep), doctest::Contains("dependent"),
                         std::runtime_error);
}

TEST_CASE("equal-displacement tie matches the merged mesh (eigen oracle)") {
    // two collinear beams either sharing the middle node, or with a duplicate
    // middle node tied in all three dofs
    const char* merged = R"({
      "name":"merged",
      "nodes":[{"id":0,"x":0,"y":0},{"id":1,"x":1,"y":0},{"id":2,"x":2,"y":0}],
      "materials":[{"id":1,"model":"linear","young":3e9,"poisson":0.2,"density":1800}],
      "sections":[{"id":1,"type":"rect_fiber","width":0.4,"height":1,"fibers":8}],
      "elements":[{"id":0,"type":"beam","nodes":[0,1],"material":1,"section":1},
                  {"id":1,"type":"beam","nodes":[1,2],"material":1,"section":1}],
      "constraints":{"fixed":[{"node":0,"dofs":["ux","uy"]},{"node":2,"dofs":["uy"]}]}
    })";
    const char* tied = R"({
      "name":"tied",
      "nodes":[{"id":0,"x":0,"y":0},{"id":1,"x":1,"y":0},{"id":2,"x":2,"y":0},
               {"id":3,"x":1,"y":0}],
      "materials":[{"id":1,"model":"linear","young":3e9,"poisson":0.2,"density":1800}],
      "sections":[{"id":1,"type":"rect_fiber","width":0.4,"height":1,"fibers":8}],
      "elements":[{"id":0,"type":"beam","nodes":[0,1],"material":1,"section":1},
                  {"id":1,"type":"beam","nodes":[3,2],"material":1,"section":1}],
      "constraints":{"fixed":[{"node":0,"dofs":["ux","uy"]},{"node":2,"dofs":["uy"]}],
        "ties":[
          {"slave":{"node":3,"dof":"ux"},"terms":[{"node":1,"dof":"ux","coeff":1.0}]},
          {"slave":{"node":3,"dof":"uy"},"terms":[{"node":1,"dof":"uy","coeff":1.0}]},
          {"slave":{"node":3,"dof":"rz"},"terms":[{"node":1,"dof":"rz","coeff":1.0}]}]}
    })";
    const Model m1 = load_model_string(merged);
    const Model m2 = load_model_string(tied);
    const Reduction r1 = make_reduction(m1);
    const Reduction r2 = make_reduction(m2);
    const auto [k1, mm1] = reduce_system(assemble_elastic_stiffness(m1), assemble_mass(m1), r1);
    const auto [k2, mm2] = reduce_system(assemble_elastic_stiffness(m2), assemble_mass(m2), r2);
    const Eigen::VectorXd ev1 = oracles::dense_gen_eigenvalues(Eigen::MatrixXd(k1),
                                                               Eigen::MatrixXd(mm1));
    const Eigen::VectorXd ev2 = oracles::dense_gen_eigenvalues(Eigen::MatrixXd(k2),
                                                               Eigen::MatrixXd(mm2));
    REQUIRE(ev1.size() == ev2.size());
    for (int i = 0; i < ev1.size(); ++i)
        CHECK(ev2[i] == doctest::Approx(ev1[i]).epsilon(1e-10));

    // tied shapes satisfy the constraint rows exactly
    const Vec q = Vec::Ones(r2.n_reduced);
    const Vec u = r2.expand(q);
    CHECK(u[m2.dofs.at(3, Dof::Ux)] == u[m2.dofs.at(1, Dof::Ux)]);
}

TEST_CASE("element stiffness distance: undamaged zero, fully cracked = ||K_e||") {
    const Model m = load_model_string(single_beam_json(1.0, 0.4, 1.0));

    const EquilibriumState undamaged = make_state(m, Vec::Zero(m.dofs.count));
    CHECK(element_stiffness_distance(undamaged)[0] == 0.0);

    Vec u = Vec::Zero(m.dofs.count);
    u[m.dofs.at(1, Dof::Ux)] = 1e-2; // pure tension, all fibers cracked
    const EquilibriumState cracked = make_state(m, u);
    const double de = element_stiffness_distance(cracked)[0];
    CHECK(de == doctest::Approx(undamaged.element_elastic[0].norm()).epsilon(1e-12));
    CHECK(cracked.element_tangent[0].norm() == 0.0);

    // cracked-area profile: ratio 1 at every section of the stretched element
    for (const auto& cs : cracked_area_profile(m, cracked)) CHECK(cs.ratio == 1.0);
    for (const auto& cs : cracked_area_profile(m, undamaged)) CHECK(cs.ratio == 0.0);

    // the profile is a fiber-beam diagnostic: quad-only models are rejected
    const Model quad_only = load_model_file(models_dir() + "/tower.json");
    const EquilibriumState qs = make_state(quad_only, Vec::Zero(quad_only.dofs.count));
    CHECK_THROWS_WITH_AS(cracked_area_profile(quad_only, qs),
                         doctest::Contains("no beam elements"), std::runtime_error);
}

TEST_CASE("matrix market export round-trips through a text parse") {
    const Model m = load_model_string(single_beam_json());
    const SpMat k = assemble_elastic_stiffness(m);
    const std::string path = "/tmp/masmodal_test_k.mtx";
    write_matrix_market(path, k);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "%%MatrixMarket matrix coordinate real symmetric");
    int rows, cols;
    long nnz;
    in >> rows >> cols >> nnz;
    CHECK(rows == m.dofs.count);
    CHECK(cols == m.dofs.count);
    double maxdiff = 0.0;
    for (long i = 0; i < nnz; ++i) {
        int r, c;
        double v;
        in >> r >> c >> v;
        maxdiff = std::max(maxdiff, std::abs(v - k.coeff(r - 1, c - 1)));
    }
    CHECK(maxdiff == 0.0);
    std::remove(path.c_str());
}

TEST_CASE("stiffness distance colocates with fracture in the loaded arch") {
    // quarter-span concentrated load on the arch: among the (uniformly sized)
    // arch elements, the largest stiffness distances and the largest fracture
    // strains pick out the same elements
    const Model m = load_model_file(models_dir() + "/arch.json");
    LoadCase lc = m.load_case("selfweight");
    LoadStep step;
    int load_node = 0;
    double best = 1e300;
    for (const auto& n : m.nodes) {
        const double d = (n.x + 1.2857) * (n.x + 1.2857) + (n.y - 5.4055) * (n.y - 5.4055);
        if (d < best) { best = d; load_node = n.id; }
    }
    step.nodal.push_back({load_node, 0.0, -3200.0, 0.0});
    lc.steps.push_back(step);
    const SolveResult res = solve_equilibrium(m, lc, SolverSettings{});
    REQUIRE(res.ok);
    const EquilibriumState& st = res.states.back();
    const Vec de = element_stiffness_distance(st);

    const int n_arch = 64; // arch quads precede the pier quads in the model
    std::vector<std::pair<double, int>> de_rank, ef_rank;
    for (int e = 0; e < n_arch; ++e) {
        double mx = 0.0;
        for (const auto& gp : st.quad_points[e]) mx = std::max(mx, gp.fracture.norm());
        de_rank.emplace_back(de[e], e);
        ef_rank.emplace_back(mx, e);
    }
    std::sort(de_rank.rbegin(), de_rank.rend());
    std::sort(ef_rank.rbegin(), ef_rank.rend());
    std::set<int> top_ef;
    for (int i = 0; i < 8; ++i) top_ef.insert(ef_rank[i].second);
    int overlap = 0;
    for (int i = 0; i < 8; ++i) overlap += top_ef.count(de_rank[i].second);
    CHECK(overlap >= 5);
}
