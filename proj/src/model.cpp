#include "masmodal/model.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace masmodal {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) {
    throw std::runtime_error("model: " + msg);
}

Dof parse_dof(const std::string& s) {
    if (s == "ux") return Dof::Ux;
    if (s == "uy") return Dof::Uy;
    if (s == "rz") return Dof::Rz;
    fail("unknown dof name '" + s + "'");
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (j.contains(key)) return j.at(key).get<T>();
    return fallback;
}

// Bilinear quad Jacobian determinant at (xi, eta).
double quad_detj(const std::array<const Node*, 4>& n, double xi, double eta) {
    const double dN[4][2] = {
        {-0.25 * (1 - eta), -0.25 * (1 - xi)},
        {0.25 * (1 - eta), -0.25 * (1 + xi)},
        {0.25 * (1 + eta), 0.25 * (1 + xi)},
        {-0.25 * (1 + eta), 0.25 * (1 - xi)},
    };
    double j11 = 0, j12 = 0, j21 = 0, j22 = 0;
    for (int i = 0; i < 4; ++i) {
        j11 += dN[i][0] * n[i]->x;
        j12 += dN[i][0] * n[i]->y;
        j21 += dN[i][1] * n[i]->x;
        j22 += dN[i][1] * n[i]->y;
    }
    return j11 * j22 - j12 * j21;
}

} // namespace

const Material& Model::material(int id) const {
    for (const auto& m : materials)
        if (m.id == id) return m;
    fail("unknown material id " + std::to_string(id));
}

const FiberSection& Model::fiber_section(int id) const {
    for (const auto& s : fiber_sections)
        if (s.id == id) return s;
    fail("unknown fiber section id " + std::to_string(id));
}

const SolidSection& Model::solid_section(int id) const {
    for (const auto& s : solid_sections)
        if (s.id == id) return s;
    fail("unknown solid section id " + std::to_string(id));
}

const BarSection& Model::bar_section(int id) const {
    for (const auto& s : bar_sections)
        if (s.id == id) return s;
    fail("unknown bar section id " + std::to_string(id));
}

const LoadCase& Model::load_case(const std::string& name) const {
    if (name.empty() && !load_cases.empty()) return load_cases.front();
    for (const auto& lc : load_cases)
        if (lc.name == name) return lc;
    fail("unknown load case '" + name + "'");
}

Model load_model_string(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const std::exception& e) {
        fail(std::string("invalid JSON: ") + e.what());
    }

    Model m;
    m.name = get_or<std::string>(doc, "name", "unnamed");

    if (!doc.contains("nodes") || doc["nodes"].empty()) fail("no nodes");
    for (const auto& jn : doc["nodes"]) {
        Node n;
        n.id = jn.at("id").get<int>();
        n.x = jn.at("x").get<double>();
        n.y = jn.at("y").get<double>();
        m.nodes.push_back(n);
    }
    std::sort(m.nodes.begin(), m.nodes.end(),
              [](const Node& a, const Node& b) { return a.id < b.id; });
    for (size_t i = 0; i < m.nodes.size(); ++i)
        if (m.nodes[i].id != static_cast<int>(i))
            fail("node ids must be dense 0..n-1 (missing or duplicate id " +
                 std::to_string(i) + ")");

    for (const auto& jm : doc.value("materials", json::array())) {
        Material mat;
        mat.id = jm.at("id").get<int>();
        const std::string kind = get_or<std::string>(jm, "model", "masonry");
        if (kind == "masonry") mat.model = MaterialModel::Masonry;
        else if (kind == "linear") mat.model = MaterialModel::Linear;
        else fail("unknown material model '" + kind + "'");
        mat.young = jm.at("young").get<double>();
        mat.poisson = jm.at("poisson").get<double>();
        mat.density = jm.at("density").get<double>();
        mat.params(); // validates
        m.materials.push_back(mat);
    }

    for (const auto& js : doc.value("sections", json::array())) {
        const std::string type = js.at("type").get<std::string>();
        if (type == "rect_fiber") {
            FiberSection s;
            s.id = js.at("id").get<int>();
            s.width = js.at("width").get<double>();
            s.height = js.at("height").get<double>();
            s.fibers = get_or<int>(js, "fibers", 20);
            s.gauss_points = get_or<int>(js, "gauss_points", 3);
            s.shear_factor = get_or<double>(js, "shear_factor", 0.0);
            if (!(s.width > 0.0) || !(s.height > 0.0)) fail("fiber section needs positive width/height");
            if (s.fibers < 8) fail("fiber section needs at least 8 fibers");
            if (s.gauss_points < 2 || s.gauss_points > 5) fail("beam gauss_points must be 2..5");
            m.fiber_sections.push_back(s);
        } else if (type == "solid") {
            SolidSection s;
            s.id = js.at("id").get<int>();
            s.thickness = js.at("thickness").get<double>();
            if (!(s.thickness > 0.0)) fail("solid section needs positive thickness");
            m.solid_sections.push_back(s);
        } else if (type == "bar") {
            BarSection s;
            s.id = js.at("id").get<int>();
            s.area = js.at("area").get<double>();
            if (!(s.area > 0.0)) fail("bar section needs positive area");
            m.bar_sections.push_back(s);
        } else {
            fail("unknown section type '" + type + "'");
        }
    }

    if (!doc.contains("elements") || doc["elements"].empty()) fail("no elements");
    std::set<int> element_ids;
    const int n_nodes = static_cast<int>(m.nodes.size());
    for (const auto& je : doc["elements"]) {
        Element e;
        e.id = je.at("id").get<int>();
        if (!element_ids.insert(e.id).second)
            fail("duplicate element id " + std::to_string(e.id));
        const std::string type = je.at("type").get<std::string>();
        if (type == "beam") e.type = ElementType::Beam;
        else if (type == "quad") e.type = ElementType::Quad;
        else if (type == "truss") e.type = ElementType::Truss;
        else fail("unknown element type '" + type + "'");
        const auto& jn = je.at("nodes");
        if (static_cast<int>(jn.size()) != e.node_count())
            fail("element " + std::to_string(e.id) + " needs " +
                 std::to_string(e.node_count()) + " nodes");
        for (int i = 0; i < e.node_count(); ++i) {
            e.nodes[i] = jn[i].get<int>();
            if (e.nodes[i] < 0 || e.nodes[i] >= n_nodes)
                fail("element " + std::to_string(e.id) + " references unknown node " +
                     std::to_string(e.nodes[i]));
        }
        e.material = je.at("material").get<int>();
        e.section = je.at("section").get<int>();
        m.elements.push_back(e);
    }

    // geometry checks and section/material references
    for (const auto& e : m.elements) {
        m.material(e.material);
        if (e.type == ElementType::Beam || e.type == ElementType::Truss) {
            const Node& a = m.nodes[e.nodes[0]];
            const Node& b = m.nodes[e.nodes[1]];
            const double len = std::hypot(b.x - a.x, b.y - a.y);
            if (!(len > 0.0)) fail("element " + std::to_string(e.id) + " has zero length");
            if (e.type == ElementType::Beam) m.fiber_section(e.section);
            else m.bar_section(e.section);
        } else {
            m.solid_section(e.section);
            std::array<const Node*, 4> n{};
            for (int i = 0; i < 4; ++i) n[i] = &m.nodes[e.nodes[i]];
            const double g = 1.0 / std::sqrt(3.0);
            const double pts[6][2] = {{-g, -g}, {g, -g}, {g, g}, {-g, g}, {-1, -1}, {1, 1}};
            for (const auto& p : pts)
                if (!(quad_detj(n, p[0], p[1]) > 0.0))
                    fail("element " + std::to_string(e.id) +
                         " has negative Jacobian (check node winding)");
        }
    }

    if (doc.contains("constraints")) {
        const auto& jc = doc["constraints"];
        for (const auto& jf : jc.value("fixed", json::array())) {
            const int node = jf.at("node").get<int>();
            if (node < 0 || node >= n_nodes) fail("fixed constraint on unknown node");
            for (const auto& jd : jf.at("dofs"))
                m.constraints.fixed.push_back({node, parse_dof(jd.get<std::string>())});
        }
        for (const auto& jt : jc.value("ties", json::array())) {
            Tie t;
            t.slave_node = jt.at("slave").at("node").get<int>();
            t.slave_dof = parse_dof(jt.at("slave").at("dof").get<std::string>());
            if (t.slave_node < 0 || t.slave_node >= n_nodes) fail("tie on unknown node");
            for (const auto& jterm : jt.at("terms")) {
                TieTerm term;
                term.node = jterm.at("node").get<int>();
                term.dof = parse_dof(jterm.at("dof").get<std::string>());
                term.coeff = jterm.at("coeff").get<double>();
                if (term.node < 0 || term.node >= n_nodes) fail("tie master on unknown node");
                t.terms.push_back(term);
            }
            if (t.terms.empty()) fail("tie without master terms");
            m.constraints.ties.push_back(t);
        }
    }

    for (const auto& jlc : doc.value("load_cases", json::array())) {
        LoadCase lc;
        lc.name = get_or<std::string>(jlc, "name", "default");
        for (const auto& jstep : jlc.at("steps")) {
            LoadStep step;
            step.increments = get_or<int>(jstep, "increments", 1);
            if (step.increments < 1) fail("load step increments must be >= 1");
            step.self_weight = get_or<bool>(jstep, "self_weight", false);
            for (const auto& jl : jstep.value("nodal", json::array())) {
                NodalLoad nl;
                nl.node = jl.at("node").get<int>();
                if (nl.node < 0 || nl.node >= n_nodes) fail("nodal load on unknown node");
                nl.fx = get_or<double>(jl, "fx", 0.0);
                nl.fy = get_or<double>(jl, "fy", 0.0);
                nl.mz = get_or<double>(jl, "mz", 0.0);
                step.nodal.push_back(nl);
            }
            for (const auto& jl : jstep.value("line", json::array())) {
                LineLoad ll;
                if (jl.at("elements").is_string()) {
                    if (jl.at("elements").get<std::string>() != "all")
                        fail("line load elements must be a list or \"all\"");
                    ll.all_elements = true;
                } else {
                    for (const auto& je : jl.at("elements")) ll.elements.push_back(je.get<int>());
                }
                ll.qx = get_or<double>(jl, "qx", 0.0);
                ll.qy = get_or<double>(jl, "qy", 0.0);
                step.line.push_back(ll);
            }
            lc.steps.push_back(step);
        }
        m.load_cases.push_back(lc);
    }

    m.gravity = get_or<double>(doc, "gravity", 9.81);

    // dof numbering: node-major, (ux, uy, rz); rz only where a beam attaches
    std::vector<bool> needs_rz(n_nodes, false), attached(n_nodes, false);
    for (const auto& e : m.elements) {
        for (int i = 0; i < e.node_count(); ++i) attached[e.nodes[i]] = true;
        if (e.type == ElementType::Beam) {
            needs_rz[e.nodes[0]] = true;
            needs_rz[e.nodes[1]] = true;
        }
    }
    for (int i = 0; i < n_nodes; ++i)
        if (!attached[i]) fail("node " + std::to_string(i) + " not referenced by any element");

    m.dofs.index.assign(n_nodes, {-1, -1, -1});
    int next = 0;
    for (int i = 0; i < n_nodes; ++i) {
        m.dofs.index[i][0] = next++;
        m.dofs.index[i][1] = next++;
        if (needs_rz[i]) m.dofs.index[i][2] = next++;
    }
    m.dofs.count = next;

    // constraint dofs must exist
    for (const auto& f : m.constraints.fixed)
        if (!m.dofs.has(f.node, f.dof)) fail("fixed constraint on inactive dof");
    for (const auto& t : m.constraints.ties) {
        if (!m.dofs.has(t.slave_node, t.slave_dof)) fail("tie slave on inactive dof");
        for (const auto& term : t.terms)
            if (!m.dofs.has(term.node, term.dof)) fail("tie master on inactive dof");
    }

    return m;
}

Model load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open model file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_model_string(ss.str());
}

} // namespace masmodal
