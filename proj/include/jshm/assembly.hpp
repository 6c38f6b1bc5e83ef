#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "jshm/common.hpp"
#include "jshm/element.hpp"
#include "jshm/model.hpp"

namespace jshm {

/// Assembled free-DOF system matrices.
struct GlobalMatrices {
    Eigen::MatrixXd stiffness;
    Eigen::MatrixXd mass;
};

/// Undamaged element matrices plus scatter indices, computed once per model.
/// Re-assembly for a new damage vector is then a scaled scatter-add, which
/// is what makes sampling-heavy callers (MCMC) cheap. Immutable after
/// construction and safe to share across threads.
class ElementStash {
public:
    explicit ElementStash(const JacketModel& model) : n_dofs_(model.n_free_dofs()) {
        const int ne = static_cast<int>(model.elements.size());
        stiffness_.reserve(ne);
        mass_.reserve(ne);
        scatter_.reserve(ne);
        for (int e = 0; e < ne; ++e) {
            ElementMatrices em = element_matrices(model, e, 0.0);
            stiffness_.push_back(em.stiffness);
            mass_.push_back(em.mass);
            std::array<int, 12> rows{};
            const ElementRef& ref = model.elements[e];
            for (int d = 0; d < 6; ++d) {
                rows[d] = model.dof_of(ref.node_a, d);
                rows[6 + d] = model.dof_of(ref.node_b, d);
            }
            scatter_.push_back(rows);
        }
    }

    int n_dofs() const { return n_dofs_; }
    int n_elements() const { return static_cast<int>(stiffness_.size()); }
    const Matrix12d& element_stiffness(int e) const { return stiffness_[e]; }
    const Matrix12d& element_mass(int e) const { return mass_[e]; }

    /// K(alpha): each element contributes (1 - alpha_e) times its undamaged block.
    void assemble_stiffness(const Eigen::VectorXd& alpha, Eigen::MatrixXd& K) const {
        if (alpha.size() != n_elements())
            throw ConfigError("assemble: damage length must equal element count");
        K.setZero(n_dofs_, n_dofs_);
        for (int e = 0; e < n_elements(); ++e) {
            const double scale = 1.0 - alpha[e];
            const auto& rows = scatter_[e];
            const Matrix12d& ke = stiffness_[e];
            for (int a = 0; a < 12; ++a) {
                const int ra = rows[a];
                if (ra < 0) continue;
                for (int b = 0; b < 12; ++b) {
                    const int rb = rows[b];
                    if (rb >= 0) K(ra, rb) += scale * ke(a, b);
                }
            }
        }
    }

    void assemble_mass(Eigen::MatrixXd& M) const {
        M.setZero(n_dofs_, n_dofs_);
        for (int e = 0; e < n_elements(); ++e) {
            const auto& rows = scatter_[e];
            const Matrix12d& me = mass_[e];
            for (int a = 0; a < 12; ++a) {
                const int ra = rows[a];
                if (ra < 0) continue;
                for (int b = 0; b < 12; ++b) {
                    const int rb = rows[b];
                    if (rb >= 0) M(ra, rb) += me(a, b);
                }
            }
        }
    }

private:
    int n_dofs_;
    std::vector<Matrix12d> stiffness_;
    std::vector<Matrix12d> mass_;
    std::vector<std::array<int, 12>> scatter_;
};

/// Assemble constrained global matrices for a damage state.
inline GlobalMatrices assemble_global(const JacketModel& model, const DamageVector& damage) {
    if (damage.size() != static_cast<Eigen::Index>(model.elements.size()))
        throw ConfigError("assemble_global: damage length must equal element count");
    damage.validate();
    ElementStash stash(model);
    GlobalMatrices g;
    stash.assemble_stiffness(damage.alpha, g.stiffness);
    stash.assemble_mass(g.mass);
    return g;
}

inline GlobalMatrices assemble_global(const JacketModel& model) {
    return assemble_global(model, DamageVector::zeros(model.elements.size()));
}

}  // namespace jshm
