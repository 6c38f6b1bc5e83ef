#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "jshm/common.hpp"

namespace jshm {

/// Linear elastic isotropic material. SI units.
struct Material {
    double elastic_modulus = 0.0;  // Pa
    double density = 0.0;          // kg/m^3
    double poisson_ratio = 0.0;

    double shear_modulus() const { return elastic_modulus / (2.0 * (1.0 + poisson_ratio)); }

    void validate() const {
        if (!(elastic_modulus > 0.0)) throw ConfigError("material: elastic modulus must be > 0");
        if (!(density > 0.0)) throw ConfigError("material: density must be > 0");
        if (!(poisson_ratio >= 0.0 && poisson_ratio < 0.5))
            throw ConfigError("material: poisson ratio must be in [0, 0.5)");
    }
};

/// Circular hollow section. SI units.
struct PipeSection {
    double outer_diameter = 0.0;  // m
    double inner_diameter = 0.0;  // m

    void validate() const {
        if (!(inner_diameter > 0.0 && inner_diameter < outer_diameter))
            throw ConfigError("section: need 0 < inner diameter < outer diameter");
    }
};

struct SectionProperties {
    double area = 0.0;              // m^2
    double bending_inertia = 0.0;   // m^4, equal about both bending axes
    double torsion_constant = 0.0;  // m^4
};

/// Annulus closed forms; the solid-rod limit is the inner diameter -> 0 case.
inline SectionProperties section_properties(const PipeSection& s) {
    if (s.inner_diameter < 0.0 || s.inner_diameter >= s.outer_diameter || s.outer_diameter <= 0.0)
        throw ConfigError("section_properties: invalid pipe section");
    const double do2 = s.outer_diameter * s.outer_diameter;
    const double di2 = s.inner_diameter * s.inner_diameter;
    SectionProperties p;
    p.area = std::numbers::pi / 4.0 * (do2 - di2);
    p.bending_inertia = std::numbers::pi / 64.0 * (do2 * do2 - di2 * di2);
    p.torsion_constant = 2.0 * p.bending_inertia;
    return p;
}

/// Two-node frame member; node ids are 0-based internally.
struct ElementRef {
    int node_a = -1;
    int node_b = -1;
    int material_id = 0;
    int section_id = 0;
};

/// Per-element stiffness knockdown factors, one in [0, 1) per element;
/// 0 = undamaged. Applied to stiffness only, never to mass.
struct DamageVector {
    Eigen::VectorXd alpha;

    DamageVector() = default;
    explicit DamageVector(Eigen::Index n) : alpha(Eigen::VectorXd::Zero(n)) {}
    explicit DamageVector(Eigen::VectorXd a) : alpha(std::move(a)) {}

    static DamageVector zeros(Eigen::Index n) { return DamageVector(n); }

    Eigen::Index size() const { return alpha.size(); }

    void validate() const {
        for (Eigen::Index i = 0; i < alpha.size(); ++i)
            if (!(alpha[i] >= 0.0 && alpha[i] < 1.0))
                throw ConfigError("damage vector: every ratio must lie in [0, 1)");
    }
};

/// Frame model: geometry, topology, boundary conditions and the free-DOF map.
///
/// DOF convention: 6 per node (ux, uy, uz, rx, ry, rz); fixed nodes have all
/// six clamped. dof_of(node, d) is the free-DOF index or -1 when clamped.
class JacketModel {
public:
    std::vector<Eigen::Vector3d> nodes;
    std::vector<ElementRef> elements;
    std::vector<Material> materials;
    std::vector<PipeSection> sections;
    std::vector<int> fixed_nodes;             // sorted node ids
    std::vector<int> candidate_sensor_nodes;  // ordered node ids

    void finalize() {
        const int nn = static_cast<int>(nodes.size());
        if (nn == 0) throw ConfigError("model: no nodes");
        if (materials.empty() || sections.empty())
            throw ConfigError("model: need at least one material and one section");
        for (const auto& m : materials) m.validate();
        for (const auto& s : sections) s.validate();
        std::set<int> fixed(fixed_nodes.begin(), fixed_nodes.end());
        for (int f : fixed)
            if (f < 0 || f >= nn) throw ConfigError("model: fixed node id out of range");
        for (const auto& e : elements) {
            if (e.node_a < 0 || e.node_a >= nn || e.node_b < 0 || e.node_b >= nn)
                throw ConfigError("model: element references missing node");
            if (e.node_a == e.node_b) throw ConfigError("model: zero-length element");
            if ((nodes[e.node_b] - nodes[e.node_a]).norm() <= 0.0)
                throw ConfigError("model: element length must be > 0");
            if (e.material_id < 0 || e.material_id >= static_cast<int>(materials.size()) ||
                e.section_id < 0 || e.section_id >= static_cast<int>(sections.size()))
                throw ConfigError("model: element references missing material/section");
        }
        dof_map_.assign(nn, {-1, -1, -1, -1, -1, -1});
        row_to_node_dof_.clear();
        int next = 0;
        for (int n = 0; n < nn; ++n) {
            if (fixed.count(n)) continue;
            for (int d = 0; d < 6; ++d) {
                dof_map_[n][d] = next++;
                row_to_node_dof_.push_back({n, d});
            }
        }
        n_free_dofs_ = next;
        if (n_free_dofs_ == 0) throw ConfigError("model: fully constrained, no free DOFs");
        if (candidate_sensor_nodes.empty())
            throw ConfigError("model: candidate sensor node list is empty");
        std::set<int> seen;
        for (int c : candidate_sensor_nodes) {
            if (c < 0 || c >= nn || fixed.count(c))
                throw ConfigError("model: candidate sensor node must be a free node");
            if (!seen.insert(c).second) throw ConfigError("model: duplicate candidate sensor node");
        }
        fixed_nodes.assign(fixed.begin(), fixed.end());
        finalized_ = true;
    }

    bool finalized() const { return finalized_; }
    int n_free_dofs() const { return n_free_dofs_; }

    int dof_of(int node, int local_dof) const { return dof_map_[node][local_dof]; }

    /// (node, local dof) of a free-DOF row index.
    std::pair<int, int> node_dof_of_row(int row) const { return row_to_node_dof_[row]; }

    double element_length(int e) const {
        return (nodes[elements[e].node_b] - nodes[elements[e].node_a]).norm();
    }

private:
    std::vector<std::array<int, 6>> dof_map_;
    std::vector<std::pair<int, int>> row_to_node_dof_;
    int n_free_dofs_ = 0;
    bool finalized_ = false;
};

/// Geometry overrides for the default platform generator.
struct JacketConfig {
    std::array<double, 4> deck_side_lengths{10.97, 8.53, 6.10, 3.66};  // m, bottom -> top
    std::array<double, 4> deck_elevations{0.0, 3.05, 6.10, 9.14};      // m
    Material material{210e9, 7850.0, 0.3};
    PipeSection section{0.178, 0.1602};
    std::vector<int> fixed_nodes{0, 1, 2, 3};
    // empty -> all free nodes in ascending id order
    std::vector<int> candidate_sensor_nodes{};
};

namespace detail {

/// Bracing layout of the default platform, 36 members total:
///   - 12 leg segments, one per corner per bay;
///   - 8 horizontal deck braces (decks 1 and 2);
///   - 15 face diagonals: one per face on the bottom bay, and per upper bay
///     X pairs on faces 1..3 with face 0 left open;
///   - 1 plan diagonal across the top deck.
/// Face f of a bay joins corner f to corner (f+1)%4; a "single" diagonal
/// rises corner f -> corner (f+1)%4 when (bay+f) is even and the mirrored
/// way otherwise, which alternates orientation around the structure. The
/// layout was calibrated so the undamaged modal ordering reproduces the
/// reference platform: one soft sway mode, then a near-degenerate pair.
struct BraceTable {
    // diagonals_per_face[bay][face]: 0 = open, 1 = single, 2 = X pair
    std::array<std::array<int, 4>, 3> diagonals_per_face;
    std::array<bool, 4> deck_horizontals;  // per deck 0..3
    std::array<bool, 3> plan_diagonals;    // per deck 1..3
};

inline const BraceTable& default_braces() {
    static const BraceTable t{
        {{{1, 1, 1, 1}, {0, 2, 1, 2}, {0, 2, 2, 2}}},
        {false, true, true, false},
        {false, false, true},
    };
    return t;
}

}  // namespace detail

/// Default 16-node / 36-element platform; see JacketConfig for overrides.
/// Node ids: deck-major bottom to top, counter-clockwise within each deck
/// starting at the (+x, +y) corner. Elements are ordered legs, then deck
/// horizontals, then face diagonals, then plan diagonals, each group sorted
/// by (min node id, max node id).
inline JacketModel build_default_jacket(const JacketConfig& config = {}) {
    for (int i = 0; i < 3; ++i)
        if (!(config.deck_elevations[i] < config.deck_elevations[i + 1]))
            throw ConfigError("jacket config: deck elevations must be strictly increasing");
    for (double s : config.deck_side_lengths)
        if (!(s > 0.0)) throw ConfigError("jacket config: deck side lengths must be > 0");

    JacketModel m;
    for (int deck = 0; deck < 4; ++deck) {
        const double h = config.deck_side_lengths[deck] / 2.0;
        const double z = config.deck_elevations[deck];
        m.nodes.emplace_back(h, h, z);
        m.nodes.emplace_back(-h, h, z);
        m.nodes.emplace_back(-h, -h, z);
        m.nodes.emplace_back(h, -h, z);
    }
    m.materials = {config.material};
    m.sections = {config.section};

    auto sorted_pair = [](int a, int b) { return std::pair{std::min(a, b), std::max(a, b)}; };
    std::vector<std::pair<int, int>> legs, horizontals, diagonals, plans;
    for (int bay = 0; bay < 3; ++bay)
        for (int c = 0; c < 4; ++c) legs.push_back(sorted_pair(4 * bay + c, 4 * (bay + 1) + c));

    const auto& braces = detail::default_braces();
    for (int deck = 0; deck < 4; ++deck) {
        if (!braces.deck_horizontals[deck]) continue;
        const int b = 4 * deck;
        for (int c = 0; c < 4; ++c) horizontals.push_back(sorted_pair(b + c, b + (c + 1) % 4));
    }
    for (int bay = 0; bay < 3; ++bay) {
        for (int f = 0; f < 4; ++f) {
            const int g = (f + 1) % 4;
            const int lo = 4 * bay, hi = 4 * (bay + 1);
            const int n = braces.diagonals_per_face[bay][f];
            const bool rising = (bay + f) % 2 == 0;
            if (n >= 1) diagonals.push_back(rising ? sorted_pair(lo + f, hi + g) : sorted_pair(lo + g, hi + f));
            if (n == 2) diagonals.push_back(rising ? sorted_pair(lo + g, hi + f) : sorted_pair(lo + f, hi + g));
        }
    }
    for (int deck = 1; deck < 4; ++deck)
        if (braces.plan_diagonals[deck - 1]) plans.push_back(sorted_pair(4 * deck, 4 * deck + 2));

    for (auto* group : {&legs, &horizontals, &diagonals, &plans}) {
        std::sort(group->begin(), group->end());
        for (auto [a, b] : *group) m.elements.push_back({a, b, 0, 0});
    }

    m.fixed_nodes = config.fixed_nodes;
    if (config.candidate_sensor_nodes.empty()) {
        std::set<int> fixed(config.fixed_nodes.begin(), config.fixed_nodes.end());
        for (int n = 0; n < static_cast<int>(m.nodes.size()); ++n)
            if (!fixed.count(n)) m.candidate_sensor_nodes.push_back(n);
    } else {
        m.candidate_sensor_nodes = config.candidate_sensor_nodes;
    }
    m.finalize();
    return m;
}

}  // namespace jshm
