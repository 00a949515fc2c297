// Model document: nodes, sections, materials, elements, constraints and
// staged load cases, loaded from a single JSON file (SI units).
#pragma once

#include "masmodal/constitutive.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace masmodal {

enum class Dof { Ux = 0, Uy = 1, Rz = 2 };

struct Node {
    int id = 0;
    double x = 0.0, y = 0.0;
};

enum class MaterialModel { Masonry, Linear };

struct Material {
    int id = 0;
    MaterialModel model = MaterialModel::Masonry;
    double young = 0.0, poisson = 0.0, density = 0.0;
    MaterialParams params() const { return MaterialParams::from_young(young, poisson, density); }
};

/// Rectangular fiber cross-section for plane-frame beams. shear_factor <= 0
/// selects the Cowper value 10(1+nu)/(12+11nu).
struct FiberSection {
    int id = 0;
    double width = 0.0;   // out-of-plane
    double height = 0.0;  // in-plane depth
    int fibers = 20;
    int gauss_points = 3;
    double shear_factor = 0.0;
};

struct SolidSection {
    int id = 0;
    double thickness = 0.0;
};

struct BarSection {
    int id = 0;
    double area = 0.0;
};

enum class ElementType { Beam, Quad, Truss };

struct Element {
    int id = 0;
    ElementType type = ElementType::Beam;
    std::array<int, 4> nodes{{-1, -1, -1, -1}};
    int material = 0;
    int section = 0;
    int node_count() const { return type == ElementType::Quad ? 4 : 2; }
};

struct FixedDof {
    int node = 0;
    Dof dof = Dof::Ux;
};

struct TieTerm {
    int node = 0;
    Dof dof = Dof::Ux;
    double coeff = 0.0;
};

/// Linear master-slave row: slave dof = sum of coeff * master dof.
struct Tie {
    int slave_node = 0;
    Dof slave_dof = Dof::Ux;
    std::vector<TieTerm> terms;
};

struct ConstraintSet {
    std::vector<FixedDof> fixed;
    std::vector<Tie> ties;
};

struct NodalLoad {
    int node = 0;
    double fx = 0.0, fy = 0.0, mz = 0.0;
};

struct LineLoad {
    bool all_elements = false;
    std::vector<int> elements;
    double qx = 0.0, qy = 0.0; // N/m, global directions
};

struct LoadStep {
    int increments = 1;
    std::vector<NodalLoad> nodal;
    std::vector<LineLoad> line;
    bool self_weight = false;
};

struct LoadCase {
    std::string name;
    std::vector<LoadStep> steps;
};

/// Node-major dof numbering in (ux, uy, rz) order; rz only on beam nodes.
struct DofMap {
    std::vector<std::array<int, 3>> index;
    int count = 0;
    int at(int node, Dof d) const { return index[node][static_cast<int>(d)]; }
    bool has(int node, Dof d) const { return at(node, d) >= 0; }
};

struct Model {
    std::string name;
    std::vector<Node> nodes;
    std::vector<Material> materials;
    std::vector<FiberSection> fiber_sections;
    std::vector<SolidSection> solid_sections;
    std::vector<BarSection> bar_sections;
    std::vector<Element> elements;
    ConstraintSet constraints;
    std::vector<LoadCase> load_cases;
    DofMap dofs;

    const Material& material(int id) const;
    const FiberSection& fiber_section(int id) const;
    const SolidSection& solid_section(int id) const;
    const BarSection& bar_section(int id) const;
    const LoadCase& load_case(const std::string& name) const;
    double gravity = 9.81;
};

/// Parse and validate a model document. Throws std::runtime_error with a
/// diagnostic on schema violations, dangling node ids, singular element
/// geometry (negative quad Jacobian, zero length), empty element lists.
Model load_model_file(const std::string& path);
Model load_model_string(const std::string& json_text);

} // namespace masmodal
