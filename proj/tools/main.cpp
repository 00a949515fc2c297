// Command-line front end: static solve, linear modal, prestressed (damaged)
// modal, load-position sweeps and (E, rho) model updating.
#include "masmodal/cli_runner.hpp"

#include <CLI11.hpp>

#include <string>
#include <vector>

int main(int argc, char** argv) {
    CLI::App app{"masmodal - modal analysis of masonry structures with a no-tension material"};
    app.require_subcommand(1);

    masmodal::RunConfig cfg;
    std::string positions_csv, loads_csv;

    auto add_common = [&](CLI::App* cmd, bool needs_modes) {
        cmd->add_option("--model", cfg.model_path, "model JSON file")->required();
        cmd->add_option("--out", cfg.out_dir, "output directory (created if missing)");
        if (needs_modes) cmd->add_option("--modes", cfg.n_modes, "number of modes");
        cmd->add_option("--tol", cfg.tol, "solver relative residual tolerance");
        cmd->add_option("--increments", cfg.increments,
                        "override the last load step's increment count");
        cmd->add_option("--case", cfg.load_case, "load case name (default: first)");
        cmd->add_option("--threads", cfg.threads, "worker threads for sweep/update");
        cmd->add_flag("--export-matrices", cfg.export_matrices,
                      "write K/M (and Ktilde) in MatrixMarket format");
    };

    CLI::App* c_static = app.add_subcommand("static", "nonlinear equilibrium solve");
    add_common(c_static, false);

    CLI::App* c_modal = app.add_subcommand("modal", "linear elastic modal analysis");
    add_common(c_modal, true);

    CLI::App* c_nlmodal =
        app.add_subcommand("nlmodal", "prestressed (damaged) modal analysis per increment");
    add_common(c_nlmodal, true);

    CLI::App* c_sweep = app.add_subcommand("sweep", "frequency vs. load position sweep");
    add_common(c_sweep, true);
    c_sweep->add_option("--positions", positions_csv,
                        "comma list of node ids or x:y coordinates")->required();
    c_sweep->add_option("--loads", loads_csv,
                        "comma list of total concentrated loads (N, applied downward)")
        ->required();

    CLI::App* c_update = app.add_subcommand("update", "(E, rho) grid-search model updating");
    add_common(c_update, false);
    c_update->add_option("--spec", cfg.spec_path, "update spec JSON file")->required();

    CLI11_PARSE(app, argc, argv);

    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        for (char ch : s) {
            if (ch == ',') {
                if (!cur.empty()) out.push_back(cur);
                cur.clear();
            } else {
                cur += ch;
            }
        }
        if (!cur.empty()) out.push_back(cur);
        return out;
    };

    cfg.command = app.get_subcommands().front()->get_name();
    cfg.positions = split(positions_csv);
    for (const auto& tok : split(loads_csv)) cfg.loads.push_back(std::stod(tok));

    return masmodal::run_command(cfg);
}
