#include "masmodal/cli_runner.hpp"

#include "masmodal/io.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace masmodal {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "1.0.0";

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    }
};

void write_manifest(const RunConfig& c, const std::string& out_dir, double elapsed_ms) {
    json j;
    j["version"] = kVersion;
    j["command"] = c.command;
    j["model"] = c.model_path;
    j["out"] = out_dir;
    j["modes"] = c.n_modes;
    j["tol"] = c.tol;
    j["increments"] = c.increments;
    j["load_case"] = c.load_case;
    j["positions"] = c.positions;
    j["loads"] = c.loads;
    j["spec"] = c.spec_path;
    j["threads"] = c.threads;
    j["elapsed_ms"] = elapsed_ms;
    std::ofstream out = open_output(out_dir + "/manifest.json");
    out << j.dump(2) << "\n";
}

SolverSettings settings_from(const RunConfig& c) {
    SolverSettings s;
    s.rel_tol = c.tol;
    return s;
}

LoadCase pick_load_case(const Model& model, const RunConfig& c) {
    LoadCase lc = model.load_case(c.load_case);
    if (c.increments > 0 && !lc.steps.empty()) lc.steps.back().increments = c.increments;
    return lc;
}

std::string dof_headers(const Model& model) {
    (void)model;
    return "ux,uy,rz";
}

void write_displacements(const Model& model, const Vec& u, const std::string& path) {
    std::ofstream out = open_output(path);
    out << "node,x,y," << dof_headers(model) << "\n";
    for (const auto& n : model.nodes) {
        out << n.id << "," << fmt6(n.x) << "," << fmt6(n.y);
        for (Dof d : {Dof::Ux, Dof::Uy, Dof::Rz}) {
            const int idx = model.dofs.at(n.id, d);
            out << "," << (idx >= 0 ? fmt17(u[idx]) : std::string("0"));
        }
        out << "\n";
    }
}

void write_point_records(const Model& model, const EquilibriumState& st,
                         const std::string& out_dir) {
    bool any_beam = false, any_quad = false, any_truss = false;
    for (const auto& e : model.elements) {
        any_beam |= e.type == ElementType::Beam;
        any_quad |= e.type == ElementType::Quad;
        any_truss |= e.type == ElementType::Truss;
    }
    if (any_beam) {
        std::ofstream out = open_output(out_dir + "/beam_sections.csv");
        out << "element,gauss,x,y,axial_strain,curvature,shear_strain,axial_force,moment,"
               "shear_force,cracked_ratio\n";
        for (size_t i = 0; i < model.elements.size(); ++i) {
            const Element& e = model.elements[i];
            if (e.type != ElementType::Beam) continue;
            const Node& a = model.nodes[e.nodes[0]];
            const Node& b = model.nodes[e.nodes[1]];
            const double len = std::hypot(b.x - a.x, b.y - a.y);
            for (size_t g = 0; g < st.beam_points[i].size(); ++g) {
                const auto& s = st.beam_points[i][g];
                const double gx = a.x + (b.x - a.x) * s.x / len;
                const double gy = a.y + (b.y - a.y) * s.x / len;
                out << e.id << "," << g << "," << fmt6(gx) << "," << fmt6(gy) << ","
                    << fmt6(s.axial_strain) << "," << fmt6(s.curvature) << ","
                    << fmt6(s.shear_strain) << "," << fmt6(s.axial_force) << ","
                    << fmt6(s.moment) << "," << fmt6(s.shear_force) << ","
                    << fmt6(s.cracked_ratio) << "\n";
            }
        }
    }
    if (any_quad) {
        std::ofstream out = open_output(out_dir + "/quad_points.csv");
        out << "element,gauss,x,y,exx,eyy,exy,e33,sxx,syy,sxy,efxx,efyy,efxy,ef33,region,"
               "boundary\n";
        for (size_t i = 0; i < model.elements.size(); ++i) {
            const Element& e = model.elements[i];
            if (e.type != ElementType::Quad) continue;
            for (size_t g = 0; g < st.quad_points[i].size(); ++g) {
                const auto& p = st.quad_points[i][g];
                out << e.id << "," << g << "," << fmt6(p.x) << "," << fmt6(p.y) << ","
                    << fmt6(p.strain(0, 0)) << "," << fmt6(p.strain(1, 1)) << ","
                    << fmt6(p.strain(0, 1)) << "," << fmt6(p.strain(2, 2)) << ","
                    << fmt6(p.stress(0, 0)) << "," << fmt6(p.stress(1, 1)) << ","
                    << fmt6(p.stress(0, 1)) << "," << fmt6(p.fracture(0, 0)) << ","
                    << fmt6(p.fracture(1, 1)) << "," << fmt6(p.fracture(0, 1)) << ","
                    << fmt6(p.fracture(2, 2)) << ",V" << static_cast<int>(p.region.region)
                    << "," << (p.region.boundary ? 1 : 0) << "\n";
            }
        }
    }
    if (any_truss) {
        std::ofstream out = open_output(out_dir + "/truss_points.csv");
        out << "element,strain,stress,cracked\n";
        for (size_t i = 0; i < model.elements.size(); ++i) {
            if (model.elements[i].type != ElementType::Truss) continue;
            const auto& t = *st.truss_points[i];
            out << model.elements[i].id << "," << fmt6(t.strain) << "," << fmt6(t.stress)
                << "," << (t.cracked ? 1 : 0) << "\n";
        }
    }
}

void write_cracked_profile(const Model& model, const EquilibriumState& st,
                           const std::string& path) {
    bool any_beam = false;
    for (const auto& e : model.elements) any_beam |= e.type == ElementType::Beam;
    if (!any_beam) return;
    const auto prof = cracked_area_profile(model, st);
    std::ofstream out = open_output(path);
    out << "element,gauss,x,y,cracked_area_ratio\n";
    for (const auto& cs : prof)
        out << cs.element << "," << cs.gauss << "," << fmt6(cs.x) << "," << fmt6(cs.y) << ","
            << fmt6(cs.ratio) << "\n";
}

void write_stiffness_distance(const Model& model, const EquilibriumState& st,
                              const std::string& path) {
    const Vec d = element_stiffness_distance(st);
    std::ofstream out = open_output(path);
    out << "element,d_e\n";
    for (size_t i = 0; i < model.elements.size(); ++i)
        out << model.elements[i].id << "," << fmt6(d[static_cast<int>(i)]) << "\n";
}

void write_modal_csv(const Model& model, const ModalResult& r, const SpMat& m,
                     const std::string& freq_path, const std::string& shapes_path) {
    const EffectiveModalMass ex = effective_modal_mass(r, m, model.dofs, Dof::Ux);
    const EffectiveModalMass ey = effective_modal_mass(r, m, model.dofs, Dof::Uy);
    {
        std::ofstream out = open_output(freq_path);
        out << "mode,frequency_hz,omega_rad_s,eff_mass_x_pct,eff_mass_y_pct,residual,"
               "near_zero\n";
        for (int i = 0; i < r.n_modes; ++i)
            out << (i + 1) << "," << fmt6(r.frequencies[i]) << "," << fmt6(r.omega[i]) << ","
                << fmt6(ex.percent[i]) << "," << fmt6(ey.percent[i]) << ","
                << fmt6(r.residuals[i]) << "," << (r.near_zero[i] ? 1 : 0) << "\n";
    }
    {
        std::ofstream out = open_output(shapes_path);
        out << "mode,node,x,y,ux,uy,rz\n";
        for (int c = 0; c < r.n_modes; ++c)
            for (const auto& n : model.nodes) {
                out << (c + 1) << "," << n.id << "," << fmt6(n.x) << "," << fmt6(n.y);
                for (Dof d : {Dof::Ux, Dof::Uy, Dof::Rz}) {
                    const int idx = model.dofs.at(n.id, d);
                    out << "," << (idx >= 0 ? fmt6(r.shapes(idx, c)) : std::string("0"));
                }
                out << "\n";
            }
    }
}

void write_mac_csv(const ModeTracking& tr, const std::string& path) {
    std::ofstream out = open_output(path);
    out << "linear_mode";
    for (int j = 0; j < tr.mac.cols(); ++j) out << ",damaged_" << (j + 1);
    out << ",best_match\n";
    for (int i = 0; i < tr.mac.rows(); ++i) {
        out << (i + 1);
        for (int j = 0; j < tr.mac.cols(); ++j) out << "," << fmt6(tr.mac(i, j));
        out << "," << (tr.permutation[i] + 1) << "\n";
    }
}

int parse_position(const Model& model, const std::string& token) {
    const auto colon = token.find(':');
    if (colon == std::string::npos) {
        const int id = std::stoi(token);
        if (id < 0 || id >= static_cast<int>(model.nodes.size()))
            throw std::runtime_error("sweep position: unknown node id " + token);
        return id;
    }
    const double x = std::stod(token.substr(0, colon));
    const double y = std::stod(token.substr(colon + 1));
    int best = 0;
    double best_d = std::numeric_limits<double>::max();
    for (const auto& n : model.nodes) {
        const double d = (n.x - x) * (n.x - x) + (n.y - y) * (n.y - y);
        if (d < best_d) { best_d = d; best = n.id; }
    }
    return best;
}

int cmd_static(const RunConfig& c, const Model& model) {
    const SolverSettings settings = settings_from(c);
    const LoadCase lc = pick_load_case(model, c);
    const SolveResult res = solve_equilibrium(model, lc, settings);
    write_run_log(c.out_dir + "/run.log", res.reports);
    if (!res.ok) {
        std::cerr << "static: " << res.message << "\n";
        return 1;
    }
    const EquilibriumState& st = res.states.back();
    write_displacements(model, st.u, c.out_dir + "/displacements.csv");
    write_point_records(model, st, c.out_dir);
    write_cracked_profile(model, st, c.out_dir + "/cracked_profile.csv");
    write_stiffness_distance(model, st, c.out_dir + "/stiffness_distance.csv");
    if (c.export_matrices) {
        write_matrix_market(c.out_dir + "/K.mtx", assemble_elastic_stiffness(model));
        write_matrix_market(c.out_dir + "/M.mtx", assemble_mass(model));
        write_matrix_market(c.out_dir + "/Ktilde.mtx", st.k_tangent);
    }
    return 0;
}

int cmd_modal(const RunConfig& c, const Model& model) {
    const SpMat k = assemble_elastic_stiffness(model);
    const SpMat m = assemble_mass(model);
    EigenOptions eo;
    eo.n_modes = c.n_modes;
    const ModalResult r = solve_eigen(k, m, make_reduction(model), eo);
    write_modal_csv(model, r, m, c.out_dir + "/frequencies.csv", c.out_dir + "/modes.csv");
    if (c.export_matrices) {
        write_matrix_market(c.out_dir + "/K.mtx", k);
        write_matrix_market(c.out_dir + "/M.mtx", m);
    }
    return 0;
}

int cmd_nlmodal(const RunConfig& c, const Model& model) {
    const SolverSettings settings = settings_from(c);
    const LoadCase lc = pick_load_case(model, c);
    EigenOptions eo;
    eo.n_modes = c.n_modes;
    const PrestressedModal pm = prestressed_modal(model, lc, settings, eo);
    write_run_log(c.out_dir + "/run.log", pm.solve.reports);
    const SpMat m = assemble_mass(model);

    write_modal_csv(model, pm.linear, m, c.out_dir + "/frequencies_linear.csv",
                    c.out_dir + "/modes_linear.csv");
    if (!pm.ok) {
        std::cerr << "nlmodal: " << pm.message << "\n";
        return 1;
    }
    {
        std::ofstream out = open_output(c.out_dir + "/frequencies_damaged.csv");
        out << "state,step,increment,load_norm";
        for (int i = 0; i < c.n_modes; ++i) out << ",f" << (i + 1) << "_hz";
        out << "\n";
        for (size_t s = 0; s < pm.damaged.size(); ++s) {
            const auto& st = pm.solve.states[s];
            out << st.label << "," << st.step << "," << st.increment << ","
                << fmt6(st.load_norm);
            for (int i = 0; i < c.n_modes; ++i) out << "," << fmt6(pm.damaged[s].frequencies[i]);
            out << "\n";
        }
    }
    {
        std::ofstream out = open_output(c.out_dir + "/frequency_ratios.csv");
        out << "state,step,increment";
        for (int i = 0; i < c.n_modes; ++i) out << ",f" << (i + 1) << "_ratio";
        out << "\n";
        for (size_t s = 0; s < pm.damaged.size(); ++s) {
            const auto& st = pm.solve.states[s];
            out << st.label << "," << st.step << "," << st.increment;
            for (int i = 0; i < c.n_modes; ++i)
                out << "," << fmt6(pm.damaged[s].frequencies[i] / pm.linear.frequencies[i]);
            out << "\n";
        }
    }
    const ModalResult& final_damaged = pm.damaged.back();
    write_modal_csv(model, final_damaged, m, c.out_dir + "/frequencies_damaged_final.csv",
                    c.out_dir + "/modes_damaged_final.csv");
    write_mac_csv(mode_tracking(pm.linear, final_damaged, m), c.out_dir + "/macm.csv");
    const EquilibriumState& st = pm.solve.states.back();
    write_cracked_profile(model, st, c.out_dir + "/cracked_profile.csv");
    write_stiffness_distance(model, st, c.out_dir + "/stiffness_distance.csv");
    if (c.export_matrices) {
        write_matrix_market(c.out_dir + "/K.mtx", assemble_elastic_stiffness(model));
        write_matrix_market(c.out_dir + "/M.mtx", m);
        write_matrix_market(c.out_dir + "/Ktilde.mtx", st.k_tangent);
    }
    return 0;
}

int cmd_sweep(const RunConfig& c, const Model& model) {
    if (c.positions.empty()) {
        std::cerr << "sweep: --positions required\n";
        return 2;
    }
    if (c.loads.empty()) {
        std::cerr << "sweep: --loads required\n";
        return 2;
    }
    std::vector<int> nodes;
    for (const auto& p : c.positions) nodes.push_back(parse_position(model, p));

    const SolverSettings settings = settings_from(c);
    const LoadCase base = pick_load_case(model, c);

    struct Row {
        int node = 0;
        double p_total = 0.0;
        bool converged = false;
        Vec freqs;
    };
    std::vector<std::vector<Row>> rows(nodes.size());
    std::atomic<int> next{0};
    std::atomic<bool> all_ok{true};

    auto run_position = [&](size_t ip) {
        const int node = nodes[ip];
        LoadCase lc = base;
        double prev = 0.0;
        for (const double p : c.loads) {
            LoadStep step;
            step.increments = 1;
            step.nodal.push_back({node, 0.0, -(p - prev), 0.0});
            lc.steps.push_back(step);
            prev = p;
        }
        EigenOptions eo;
        eo.n_modes = c.n_modes;
        const PrestressedModal pm = prestressed_modal(model, lc, settings, eo);
        const size_t base_states = [&] {
            size_t n = 0;
            for (const auto& s : base.steps) n += s.increments;
            return n;
        }();
        auto& out_rows = rows[ip];
        for (size_t il = 0; il < c.loads.size(); ++il) {
            Row row;
            row.node = node;
            row.p_total = c.loads[il];
            const size_t idx = base_states + il;
            if (idx < pm.damaged.size()) {
                row.converged = true;
                row.freqs = pm.damaged[idx].frequencies;
            }
            if (!row.converged) all_ok = false;
            out_rows.push_back(row);
        }
    };

    const int nthreads = std::max(1, std::min(c.threads, static_cast<int>(nodes.size())));
    if (nthreads == 1) {
        for (size_t i = 0; i < nodes.size(); ++i) run_position(i);
    } else {
        auto worker = [&]() {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= static_cast<int>(nodes.size())) break;
                run_position(i);
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::ofstream out = open_output(c.out_dir + "/sweep.csv");
    out << "position,node,x,y,p_total,converged";
    for (int i = 0; i < c.n_modes; ++i) out << ",f" << (i + 1) << "_hz";
    out << "\n";
    for (size_t ip = 0; ip < nodes.size(); ++ip) {
        for (const auto& row : rows[ip]) {
            const Node& n = model.nodes[row.node];
            out << (ip + 1) << "," << row.node << "," << fmt6(n.x) << "," << fmt6(n.y) << ","
                << fmt6(row.p_total) << "," << (row.converged ? 1 : 0);
            for (int i = 0; i < c.n_modes; ++i)
                out << "," << (row.converged ? fmt6(row.freqs[i]) : std::string("nan"));
            out << "\n";
        }
    }
    return all_ok ? 0 : 1;
}

int cmd_update(const RunConfig& c, const Model& model) {
    if (c.spec_path.empty()) {
        std::cerr << "update: --spec required\n";
        return 2;
    }
    std::ifstream in(c.spec_path);
    if (!in) {
        std::cerr << "update: cannot open spec file '" << c.spec_path << "'\n";
        return 2;
    }
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        std::cerr << "update: invalid spec JSON: " << e.what() << "\n";
        return 2;
    }
    UpdateSpec spec;
    try {
        for (const auto& t : j.at("targets")) spec.targets.push_back(t.get<double>());
        spec.e_min = j.at("young").at("min").get<double>();
        spec.e_max = j.at("young").at("max").get<double>();
        spec.e_step = j.at("young").at("step").get<double>();
        spec.rho_min = j.at("density").at("min").get<double>();
        spec.rho_max = j.at("density").at("max").get<double>();
        spec.rho_step = j.at("density").at("step").get<double>();
        const std::string mode = j.value("mode", "linear");
        if (mode == "linear") spec.mode = UpdateSpec::Mode::Linear;
        else if (mode == "damaged") spec.mode = UpdateSpec::Mode::Damaged;
        else throw std::runtime_error("mode must be linear or damaged");
        spec.load_case = j.value("load_case", std::string());
        spec.validate();
    } catch (const std::exception& e) {
        std::cerr << "update: bad spec: " << e.what() << "\n";
        return 2;
    }

    const UpdateResult res = grid_search(model, spec, settings_from(c), c.threads);

    {
        std::ofstream out = open_output(c.out_dir + "/surface.csv");
        out << "young,density,converged,objective_hz2";
        for (size_t i = 0; i < spec.targets.size(); ++i) out << ",f" << (i + 1) << "_hz";
        out << "\n";
        for (const auto& pt : res.points) {
            out << fmt6(pt.young) << "," << fmt6(pt.rho) << "," << (pt.converged ? 1 : 0)
                << "," << (pt.converged ? fmt17(pt.objective) : std::string("nan"));
            for (size_t i = 0; i < spec.targets.size(); ++i)
                out << ","
                    << (pt.converged ? fmt6(pt.frequencies[static_cast<int>(i)])
                                     : std::string("nan"));
            out << "\n";
        }
    }
    {
        const UpdatePoint& best = res.best();
        json out;
        out["young"] = best.young;
        out["density"] = best.rho;
        out["objective_hz2"] = best.objective;
        out["mode"] = res.mode == UpdateSpec::Mode::Linear ? "linear" : "damaged";
        std::vector<double> f(best.frequencies.data(),
                              best.frequencies.data() + best.frequencies.size());
        out["frequencies_hz"] = f;
        std::ofstream os = open_output(c.out_dir + "/argmin.json");
        os << out.dump(2) << "\n";
    }
    return 0;
}

} // namespace

int run_command(const RunConfig& config) {
    Timer timer;
    if (config.command != "static" && config.command != "modal" &&
        config.command != "nlmodal" && config.command != "sweep" &&
        config.command != "update") {
        std::cerr << "unknown command '" << config.command << "'\n";
        return 2;
    }
    if (config.n_modes <= 0) {
        std::cerr << "--modes must be positive\n";
        return 2;
    }
    if (!fs::exists(config.model_path)) {
        std::cerr << "model file not found: " << config.model_path << "\n";
        return 2;
    }
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);

    Model model;
    try {
        model = load_model_file(config.model_path);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    int code = 0;
    try {
        if (config.command == "static") code = cmd_static(config, model);
        else if (config.command == "modal") code = cmd_modal(config, model);
        else if (config.command == "nlmodal") code = cmd_nlmodal(config, model);
        else if (config.command == "sweep") code = cmd_sweep(config, model);
        else code = cmd_update(config, model);
    } catch (const std::exception& e) {
        std::cerr << config.command << ": " << e.what() << "\n";
        code = 1;
    }
    write_manifest(config, config.out_dir, timer.ms());
    return code;
}

} // namespace masmodal
