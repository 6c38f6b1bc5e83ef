#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "jshm/common.hpp"
#include "jshm/modal.hpp"
#include "jshm/model.hpp"
#include "jshm/selection.hpp"

namespace jshm {

enum class Criterion { Efi, Ke, Evp, Ie };

inline const char* criterion_name(Criterion c) {
    switch (c) {
        case Criterion::Efi: return "efi";
        case Criterion::Ke: return "ke";
        case Criterion::Evp: return "evp";
        case Criterion::Ie: return "ie";
    }
    return "?";
}

inline Criterion criterion_from_name(const std::string& s) {
    if (s == "efi") return Criterion::Efi;
    if (s == "ke") return Criterion::Ke;
    if (s == "evp") return Criterion::Evp;
    if (s == "ie") return Criterion::Ie;
    throw ConfigError("unknown criterion '" + s + "' (expected efi|ke|evp|ie)");
}

inline const std::vector<Criterion>& all_criteria() {
    static const std::vector<Criterion> cs{Criterion::Efi, Criterion::Ke, Criterion::Evp,
                                           Criterion::Ie};
    return cs;
}

/// Per-candidate-node tables derived from full-model mass-normalized modes.
/// Criteria evaluate in O(selected nodes) against these tables. Immutable
/// after construction; shared freely across evaluation threads.
class CriterionContext {
public:
    CriterionContext(const JacketModel& model, const ModalData& modal, const Eigen::MatrixXd& mass)
        : n_modes_(static_cast<int>(modal.n_modes())) {
        if (modal.normalization != Normalization::MassNormalized)
            throw ConfigError("criterion context: modal data must be mass-normalized");
        const int nc = static_cast<int>(model.candidate_sensor_nodes.size());
        const Eigen::MatrixXd mphi = mass * modal.shapes;
        Eigen::VectorXd omega2(n_modes_);
        for (int m = 0; m < n_modes_; ++m) {
            const double w = 2.0 * std::numbers::pi * modal.frequencies_hz[m];
            omega2[m] = w * w;
        }

        amplitude_.resize(nc, n_modes_);
        ke_node_mode_.resize(nc, n_modes_);
        node_rows_.resize(nc);
        gram_.assign(nc, Eigen::MatrixXd::Zero(n_modes_, n_modes_));
        evp_node_.resize(nc);
        ke_node_total_.resize(nc);

        std::unordered_map<long long, int> row_of;
        for (std::size_t r = 0; r < modal.dof_index.size(); ++r) {
            const auto [node, dof] = modal.dof_index[r];
            row_of[static_cast<long long>(node) * 8 + dof] = static_cast<int>(r);
        }
        for (int i = 0; i < nc; ++i) {
            const int node = model.candidate_sensor_nodes[i];
            Eigen::Matrix<double, 3, Eigen::Dynamic> rows(3, n_modes_);
            Eigen::Matrix<double, 3, Eigen::Dynamic> mrows(3, n_modes_);
            for (int d = 0; d < 3; ++d) {
                const auto it = row_of.find(static_cast<long long>(node) * 8 + d);
                if (it == row_of.end())
                    throw ConfigError("criterion context: modal data lacks node translations");
                node_rows_[i][d] = it->second;
                rows.row(d) = modal.shapes.row(it->second);
                mrows.row(d) = mphi.row(it->second);
            }
            amplitude_.row(i) = rows.colwise().norm();
            ke_node_mode_.row(i) =
                (rows.cwiseProduct(mrows).colwise().sum().array() * omega2.transpose().array())
                    .matrix();
            gram_[i] = rows.transpose() * rows;
            evp_node_[i] = amplitude_.row(i).prod();
            ke_node_total_[i] = ke_node_mode_.row(i).sum();
        }
    }

    int n_candidates() const { return static_cast<int>(evp_node_.size()); }
    int n_modes() const { return n_modes_; }
    /// a_{i,n}: Euclidean amplitude of candidate i's translations in mode n.
    const Eigen::MatrixXd& amplitude_table() const { return amplitude_; }
    const Eigen::MatrixXd& ke_node_mode() const { return ke_node_mode_; }
    const Eigen::VectorXd& ke_node_total() const { return ke_node_total_; }
    const Eigen::VectorXd& evp_node() const { return evp_node_; }
    const Eigen::MatrixXd& gram(int candidate) const { return gram_[candidate]; }

private:
    int n_modes_;
    Eigen::MatrixXd amplitude_;     // nc x n_modes
    Eigen::MatrixXd ke_node_mode_;  // nc x n_modes
    Eigen::VectorXd ke_node_total_;
    Eigen::VectorXd evp_node_;
    std::vector<std::array<int, 3>> node_rows_;
    std::vector<Eigen::MatrixXd> gram_;  // per candidate: Phi_i^T Phi_i (n_modes x n_modes)
};

namespace detail {

inline void require_nonempty(const SensorSelection& sel, const CriterionContext& ctx) {
    if (static_cast<int>(sel.bits.size()) != ctx.n_candidates())
        throw ConfigError("criterion: selection length mismatch");
    if (sel.empty()) throw ConfigError("criterion: empty selection");
}

}  // namespace detail

/// Fisher-information objective: log det of the selected-rows Gram matrix,
/// or -inf when the selection cannot resolve all target modes.
inline double efi_value(const SensorSelection& sel, const CriterionContext& ctx) {
    detail::require_nonempty(sel, ctx);
    Eigen::MatrixXd fim = Eigen::MatrixXd::Zero(ctx.n_modes(), ctx.n_modes());
    for (int i = 0; i < ctx.n_candidates(); ++i)
        if (sel.bits[i]) fim += ctx.gram(i);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fim, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    if (ev[0] <= 1e-12 * std::max(ev[ev.size() - 1], 0.0))
        return -std::numeric_limits<double>::infinity();
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) logdet += std::log(ev[i]);
    return logdet;
}

/// Leverage of each selected DOF row: diag of Phi (Phi^T Phi)^-1 Phi^T over
/// the selected rows. Sums to n_modes when the Gram matrix is full rank.
inline Eigen::VectorXd efi_projection_diagonal(const SensorSelection& sel,
                                               const CriterionContext& ctx,
                                               const ModalData& modal,
                                               const JacketModel& model) {
    detail::require_nonempty(sel, ctx);
    ModalData r = restrict_to_sensors(modal, sel, model);
    // restrict_to_sensors normalizes columns; undo to keep Eq. 1 rows
    Eigen::MatrixXd rows(r.shapes.rows(), r.shapes.cols());
    {
        int k = 0;
        std::unordered_map<long long, int> row_of;
        for (std::size_t rr = 0; rr < modal.dof_index.size(); ++rr) {
            const auto [node, dof] = modal.dof_index[rr];
            row_of[static_cast<long long>(node) * 8 + dof] = static_cast<int>(rr);
        }
        for (const auto& [node, dof] : r.dof_index)
            rows.row(k++) = modal.shapes.row(row_of.at(static_cast<long long>(node) * 8 + dof));
    }
    const Eigen::MatrixXd fim = rows.transpose() * rows;
    const Eigen::MatrixXd inv = fim.ldlt().solve(Eigen::MatrixXd::Identity(fim.rows(), fim.cols()));
    return ((rows * inv).cwiseProduct(rows)).rowwise().sum();
}

/// Modal kinetic energy captured by the selected nodes, summed over modes.
inline double ke_value(const SensorSelection& sel, const CriterionContext& ctx) {
    detail::require_nonempty(sel, ctx);
    double total = 0.0;
    for (int i = 0; i < ctx.n_candidates(); ++i)
        if (sel.bits[i]) total += ctx.ke_node_total()[i];
    return total;
}

/// Eigenvalue vector product: per-node product of modal amplitudes, summed
/// over the selection.
inline double evp_value(const SensorSelection& sel, const CriterionContext& ctx) {
    detail::require_nonempty(sel, ctx);
    double total = 0.0;
    for (int i = 0; i < ctx.n_candidates(); ++i)
        if (sel.bits[i]) total += ctx.evp_node()[i];
    return total;
}

/// Negated Shannon entropy of the KE-proportional distribution over selected
/// nodes, so that larger J means a more certain (lower-entropy) layout.
inline double ie_value(const SensorSelection& sel, const CriterionContext& ctx) {
    detail::require_nonempty(sel, ctx);
    double total = 0.0;
    for (int i = 0; i < ctx.n_candidates(); ++i)
        if (sel.bits[i]) total += ctx.ke_node_total()[i];
    if (!(total > 0.0)) throw NumericalError("ie: selection has zero total kinetic energy");
    double j = 0.0;
    for (int i = 0; i < ctx.n_candidates(); ++i) {
        if (!sel.bits[i]) continue;
        const double p = ctx.ke_node_total()[i] / total;
        if (p > 0.0) j += p * std::log(p);
    }
    return j;  // = -IE
}

inline double criterion_value(Criterion c, const SensorSelection& sel,
                              const CriterionContext& ctx) {
    switch (c) {
        case Criterion::Efi: return efi_value(sel, ctx);
        case Criterion::Ke: return ke_value(sel, ctx);
        case Criterion::Evp: return evp_value(sel, ctx);
        case Criterion::Ie: return ie_value(sel, ctx);
    }
    throw ConfigError("criterion_value: bad criterion");
}

}  // namespace jshm
