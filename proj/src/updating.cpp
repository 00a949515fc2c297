#include "masmodal/updating.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace masmodal {

namespace {

std::vector<double> axis_values(double lo, double hi, double step) {
    std::vector<double> v;
    const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
    v.reserve(n);
    for (int i = 0; i < n; ++i) v.push_back(lo + i * step);
    return v;
}

} // namespace

void UpdateSpec::validate() const {
    if (targets.empty()) throw std::invalid_argument("update spec: empty target list");
    for (size_t i = 0; i < targets.size(); ++i) {
        if (!(targets[i] > 0.0))
            throw std::invalid_argument("update spec: targets must be positive");
        if (i > 0 && targets[i] < targets[i - 1])
            throw std::invalid_argument("update spec: targets must be ascending");
    }
    if (!(e_step > 0.0) || !(rho_step > 0.0))
        throw std::invalid_argument("update spec: steps must be positive");
    if (!(e_max >= e_min) || !(rho_max >= rho_min))
        throw std::invalid_argument("update spec: empty parameter range");
}

std::vector<double> UpdateSpec::e_values() const { return axis_values(e_min, e_max, e_step); }
std::vector<double> UpdateSpec::rho_values() const {
    return axis_values(rho_min, rho_max, rho_step);
}

Model with_material(const Model& model, double young, double rho) {
    Model m = model;
    for (auto& mat : m.materials) {
        if (mat.model != MaterialModel::Masonry) continue;
        mat.young = young;
        mat.density = rho;
    }
    return m;
}

UpdatePoint evaluate_objective(const Model& model, double young, double rho,
                               const UpdateSpec& spec, const SolverSettings& solver) {
    UpdatePoint pt;
    pt.young = young;
    pt.rho = rho;

    const Model m = with_material(model, young, rho);
    EigenOptions eo;
    eo.n_modes = static_cast<int>(spec.targets.size());

    try {
        Vec freqs;
        if (spec.mode == UpdateSpec::Mode::Linear) {
            const SpMat k = assemble_elastic_stiffness(m);
            const SpMat mm = assemble_mass(m);
            freqs = solve_eigen(k, mm, make_reduction(m), eo).frequencies;
        } else {
            const PrestressedModal pm =
                prestressed_modal(m, m.load_case(spec.load_case), solver, eo);
            if (!pm.ok || pm.damaged.empty()) return pt; // flagged, not converged
            freqs = pm.damaged.back().frequencies;
        }
        pt.frequencies = freqs;
        double obj = 0.0;
        for (size_t i = 0; i < spec.targets.size(); ++i) {
            const double d = freqs[static_cast<int>(i)] - spec.targets[i];
            obj += d * d;
        }
        pt.objective = obj;
        pt.converged = true;
    } catch (const std::exception&) {
        pt.converged = false;
    }
    return pt;
}

UpdateResult grid_search(const Model& model, const UpdateSpec& spec,
                         const SolverSettings& solver, int threads) {
    spec.validate();
    UpdateResult out;
    out.mode = spec.mode;
    out.e_values = spec.e_values();
    out.rho_values = spec.rho_values();
    const int ne = static_cast<int>(out.e_values.size());
    const int nr = static_cast<int>(out.rho_values.size());
    out.points.resize(static_cast<size_t>(ne) * nr);

    std::atomic<int> next{0};
    auto worker = [&]() {
        while (true) {
            const int idx = next.fetch_add(1);
            if (idx >= ne * nr) break;
            const int ie = idx / nr, ir = idx % nr;
            out.points[idx] =
                evaluate_objective(model, out.e_values[ie], out.rho_values[ir], spec, solver);
        }
    };
    const int nthreads = std::max(1, std::min<int>(threads, ne * nr));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // argmin over converged points in (E, rho) scan order: strict improvement
    // keeps the smaller-E / smaller-rho tie-break
    out.argmin = -1;
    for (int i = 0; i < ne * nr; ++i) {
        if (!out.points[i].converged) continue;
        if (out.argmin < 0 || out.points[i].objective < out.points[out.argmin].objective)
            out.argmin = i;
    }
    if (out.argmin < 0) throw std::runtime_error("grid_search: all grid points failed");
    return out;
}

} // namespace masmodal
