// Subcommand drivers behind the command-line front end. Everything returns a
// process exit code: 0 success, 1 computation failed, 2 usage/input error.
#pragma once

#include "masmodal/updating.hpp"

#include <string>
#include <vector>

namespace masmodal {

struct RunConfig {
    std::string command;       // static | modal | nlmodal | sweep | update
    std::string model_path;
    std::string out_dir = ".";
    int n_modes = 6;
    double tol = 1e-8;         // solver relative residual tolerance
    int increments = 0;        // >0 overrides the last load step's increments
    std::string load_case;     // empty = first load case in the model
    std::vector<std::string> positions; // node ids or "x:y" coordinates
    std::vector<double> loads; // sweep: concentrated load magnitudes (N, downward)
    std::string spec_path;     // update: spec file
    int threads = 1;
    bool export_matrices = false;
};

int run_command(const RunConfig& config);

} // namespace masmodal
