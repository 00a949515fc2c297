#include "masmodal/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace masmodal {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void scatter(const Eigen::MatrixXd& ke, const std::vector<int>& dofs, Triplets* out) {
    const int n = static_cast<int>(dofs.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (ke(i, j) != 0.0) out->emplace_back(dofs[i], dofs[j], ke(i, j));
}

template <typename F>
void for_each_element(const Model& model, F&& f) {
    for (size_t idx = 0; idx < model.elements.size(); ++idx) f(idx, model.elements[idx]);
}

Eigen::VectorXd gather(const Vec& u, const std::vector<int>& dofs) {
    Eigen::VectorXd ue(dofs.size());
    for (size_t i = 0; i < dofs.size(); ++i) ue[i] = u[dofs[i]];
    return ue;
}

} // namespace

SpMat Reduction::reduce(const SpMat& a) const {
    SpMat out = r.transpose() * a * r;
    out.makeCompressed();
    return out;
}

Reduction make_reduction(const Model& model) {
    const int n = model.dofs.count;

    std::vector<int> kind(n, 0); // 0 retained, 1 fixed, 2 slave
    for (const auto& f : model.constraints.fixed) {
        const int d = model.dofs.at(f.node, f.dof);
        kind[d] = 1;
    }
    for (const auto& t : model.constraints.ties) {
        const int d = model.dofs.at(t.slave_node, t.slave_dof);
        if (kind[d] != 0)
            throw std::runtime_error("constraints: dependent constraint rows (dof " +
                                     std::to_string(d) + " constrained twice)");
        kind[d] = 2;
    }
    for (const auto& t : model.constraints.ties)
        for (const auto& term : t.terms) {
            const int d = model.dofs.at(term.node, term.dof);
            if (kind[d] != 0)
                throw std::runtime_error(
                    "constraints: dependent constraint rows (tie master is itself constrained)");
        }

    Reduction red;
    red.n_full = n;
    std::vector<int> to_reduced(n, -1);
    for (int i = 0; i < n; ++i)
        if (kind[i] == 0) {
            to_reduced[i] = red.n_reduced++;
            red.retained.push_back(i);
        }
    if (red.n_reduced == 0) throw std::runtime_error("constraints: no free dofs");

    Triplets trip;
    for (int i = 0; i < n; ++i)
        if (kind[i] == 0) trip.emplace_back(i, to_reduced[i], 1.0);
    for (const auto& t : model.constraints.ties) {
        const int slave = model.dofs.at(t.slave_node, t.slave_dof);
        for (const auto& term : t.terms) {
            const int master = model.dofs.at(term.node, term.dof);
            trip.emplace_back(slave, to_reduced[master], term.coeff);
        }
    }
    red.r.resize(n, red.n_reduced);
    red.r.setFromTriplets(trip.begin(), trip.end());
    red.r.makeCompressed();
    return red;
}

std::pair<SpMat, SpMat> reduce_system(const SpMat& k, const SpMat& m, const Reduction& red) {
    return {red.reduce(k), red.reduce(m)};
}

SpMat assemble_mass(const Model& model) {
    Triplets trip;
    for_each_element(model, [&](size_t, const Element& e) {
        const std::vector<int> dofs = element_dofs(model, e);
        if (e.type == ElementType::Beam) {
            scatter(BeamKernel(model, e).mass(), dofs, &trip);
        } else if (e.type == ElementType::Quad) {
            scatter(QuadKernel(model, e).mass(), dofs, &trip);
        } else {
            scatter(TrussKernel(model, e).mass(), dofs, &trip);
        }
    });
    SpMat m(model.dofs.count, model.dofs.count);
    m.setFromTriplets(trip.begin(), trip.end());
    m.makeCompressed();
    return m;
}

SpMat assemble_elastic_stiffness(const Model& model) {
    Triplets trip;
    for_each_element(model, [&](size_t, const Element& e) {
        const std::vector<int> dofs = element_dofs(model, e);
        if (e.type == ElementType::Beam) {
            scatter(BeamKernel(model, e).elastic_stiffness(), dofs, &trip);
        } else if (e.type == ElementType::Quad) {
            scatter(QuadKernel(model, e).elastic_stiffness(), dofs, &trip);
        } else {
            scatter(TrussKernel(model, e).elastic_stiffness(), dofs, &trip);
        }
    });
    SpMat k(model.dofs.count, model.dofs.count);
    k.setFromTriplets(trip.begin(), trip.end());
    k.makeCompressed();
    return k;
}

void assemble_response(const Model& model, const Vec& u, SpMat* k_tangent, Vec* f_internal) {
    Triplets trip;
    Vec f = Vec::Zero(model.dofs.count);
    for_each_element(model, [&](size_t, const Element& e) {
        const std::vector<int> dofs = element_dofs(model, e);
        if (e.type == ElementType::Beam) {
            const BeamKernel kern(model, e);
            Eigen::Matrix<double, 6, 6> ke;
            Eigen::Matrix<double, 6, 1> fe;
            kern.response(gather(u, dofs), k_tangent ? &ke : nullptr, &fe, nullptr);
            if (k_tangent) scatter(ke, dofs, &trip);
            for (size_t i = 0; i < dofs.size(); ++i) f[dofs[i]] += fe[i];
        } else if (e.type == ElementType::Quad) {
            const QuadKernel kern(model, e);
            Eigen::Matrix<double, 8, 8> ke;
            Eigen::Matrix<double, 8, 1> fe;
            kern.response(gather(u, dofs), k_tangent ? &ke : nullptr, &fe, nullptr);
            if (k_tangent) scatter(ke, dofs, &trip);
            for (size_t i = 0; i < dofs.size(); ++i) f[dofs[i]] += fe[i];
        } else {
            const TrussKernel kern(model, e);
            Eigen::Matrix<double, 4, 4> ke;
            Eigen::Matrix<double, 4, 1> fe;
            kern.response(gather(u, dofs), k_tangent ? &ke : nullptr, &fe, nullptr);
            if (k_tangent) scatter(ke, dofs, &trip);
            for (size_t i = 0; i < dofs.size(); ++i) f[dofs[i]] += fe[i];
        }
    });
    if (k_tangent) {
        k_tangent->resize(model.dofs.count, model.dofs.count);
        k_tangent->setFromTriplets(trip.begin(), trip.end());
        k_tangent->makeCompressed();
    }
    if (f_internal) *f_internal = std::move(f);
}

Vec internal_forces(const Model& model, const Vec& u) {
    Vec f;
    assemble_response(model, u, nullptr, &f);
    return f;
}

Vec step_load_vector(const Model& model, const LoadStep& step) {
    Vec f = Vec::Zero(model.dofs.count);
    for (const auto& nl : step.nodal) {
        f[model.dofs.at(nl.node, Dof::Ux)] += nl.fx;
        f[model.dofs.at(nl.node, Dof::Uy)] += nl.fy;
        if (nl.mz != 0.0) {
            const int d = model.dofs.at(nl.node, Dof::Rz);
            if (d < 0) throw std::runtime_error("moment load on node without rotation dof");
            f[d] += nl.mz;
        }
    }
    for (const auto& ll : step.line) {
        std::set<int> wanted(ll.elements.begin(), ll.elements.end());
        for_each_element(model, [&](size_t, const Element& e) {
            if (!ll.all_elements && wanted.find(e.id) == wanted.end()) return;
            if (e.type != ElementType::Beam)
                throw std::runtime_error("line loads are only supported on beam elements");
            const auto fe = BeamKernel(model, e).line_load(ll.qx, ll.qy);
            const std::vector<int> dofs = element_dofs(model, e);
            for (size_t i = 0; i < dofs.size(); ++i) f[dofs[i]] += fe[i];
        });
    }
    if (step.self_weight) {
        for_each_element(model, [&](size_t, const Element& e) {
            const std::vector<int> dofs = element_dofs(model, e);
            if (e.type == ElementType::Beam) {
                const auto fe = BeamKernel(model, e).self_weight(model.gravity);
                for (size_t i = 0; i < dofs.size(); ++i) f[dofs[i]] += fe[i];
            } else if (e.type == ElementType::Quad) {
                const auto fe = QuadKernel(model, e).self_weight(model.gravity);
                for (size_t i = 0; i < dofs.size(); ++i) f[dofs[i]] += fe[i];
            } else {
                const auto fe = TrussKernel(model, e).self_weight(model.gravity);
                for (size_t i = 0; i < dofs.size(); ++i) f[dofs[i]] += fe[i];
            }
        });
    }
    return f;
}

EquilibriumState make_state(const Model& model, const Vec& u) {
    EquilibriumState st;
    st.u = u;
    const size_t ne = model.elements.size();
    st.element_elastic.resize(ne);
    st.element_tangent.resize(ne);
    st.beam_points.resize(ne);
    st.quad_points.resize(ne);
    st.truss_points.resize(ne);

    Triplets trip;
    for_each_element(model, [&](size_t idx, const Element& e) {
        const std::vector<int> dofs = element_dofs(model, e);
        if (e.type == ElementType::Beam) {
            const BeamKernel kern(model, e);
            Eigen::Matrix<double, 6, 6> ke;
            kern.response(gather(u, dofs), &ke, nullptr, &st.beam_points[idx]);
            st.element_elastic[idx] = kern.elastic_stiffness();
            st.element_tangent[idx] = ke;
            scatter(ke, dofs, &trip);
        } else if (e.type == ElementType::Quad) {
            const QuadKernel kern(model, e);
            Eigen::Matrix<double, 8, 8> ke;
            kern.response(gather(u, dofs), &ke, nullptr, &st.quad_points[idx]);
            st.element_elastic[idx] = kern.elastic_stiffness();
            st.element_tangent[idx] = ke;
            scatter(ke, dofs, &trip);
        } else {
            const TrussKernel kern(model, e);
            Eigen::Matrix<double, 4, 4> ke;
            TrussState ts;
            kern.response(gather(u, dofs), &ke, nullptr, &ts);
            st.truss_points[idx] = ts;
            st.element_elastic[idx] = kern.elastic_stiffness();
            st.element_tangent[idx] = ke;
            scatter(ke, dofs, &trip);
        }
    });
    st.k_tangent.resize(model.dofs.count, model.dofs.count);
    st.k_tangent.setFromTriplets(trip.begin(), trip.end());
    st.k_tangent.makeCompressed();
    return st;
}

SpMat assemble_tangent_stiffness(const Model& model, const EquilibriumState& state) {
    SpMat k;
    assemble_response(model, state.u, &k, nullptr);
    return k;
}

Vec element_stiffness_distance(const EquilibriumState& state) {
    const size_t ne = state.element_elastic.size();
    Vec d(ne);
    for (size_t i = 0; i < ne; ++i)
        d[i] = (state.element_tangent[i] - state.element_elastic[i]).norm();
    return d;
}

std::vector<CrackedSection> cracked_area_profile(const Model& model,
                                                 const EquilibriumState& state) {
    std::vector<CrackedSection> out;
    for (size_t idx = 0; idx < model.elements.size(); ++idx) {
        const Element& e = model.elements[idx];
        if (e.type != ElementType::Beam) continue;
        const Node& a = model.nodes[e.nodes[0]];
        const Node& b = model.nodes[e.nodes[1]];
        const double len = std::hypot(b.x - a.x, b.y - a.y);
        for (size_t g = 0; g < state.beam_points[idx].size(); ++g) {
            const BeamSectionState& ss = state.beam_points[idx][g];
            CrackedSection cs;
            cs.element = e.id;
            cs.gauss = static_cast<int>(g);
            cs.x = a.x + (b.x - a.x) * ss.x / len;
            cs.y = a.y + (b.y - a.y) * ss.x / len;
            cs.ratio = ss.cracked_ratio;
            out.push_back(cs);
        }
    }
    if (out.empty()) throw std::runtime_error("cracked_area_profile: model has no beam elements");
    return out;
}

} // namespace masmodal
