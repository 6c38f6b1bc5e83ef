#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "jshm/assembly.hpp"
#include "jshm/common.hpp"
#include "jshm/model.hpp"
#include "jshm/rng.hpp"
#include "jshm/selection.hpp"

namespace jshm {

enum class Normalization { MassNormalized, UnitNorm };

/// Frequencies plus mode-shape columns over an explicit DOF row index.
struct ModalData {
    Eigen::VectorXd frequencies_hz;               // ascending
    Eigen::MatrixXd shapes;                       // n_rows x n_modes
    std::vector<std::pair<int, int>> dof_index;   // row -> (node, local dof)
    Normalization normalization = Normalization::MassNormalized;

    Eigen::Index n_modes() const { return frequencies_hz.size(); }
    Eigen::Index n_rows() const { return shapes.rows(); }
};

namespace detail {

/// Fix per-mode sign: the largest-magnitude entry of each column is positive.
inline void fix_shape_signs(Eigen::MatrixXd& shapes) {
    for (Eigen::Index j = 0; j < shapes.cols(); ++j) {
        Eigen::Index imax = 0;
        shapes.col(j).cwiseAbs().maxCoeff(&imax);
        if (shapes(imax, j) < 0.0) shapes.col(j) = -shapes.col(j);
    }
}

inline void check_residuals(const Eigen::MatrixXd& K, const Eigen::MatrixXd& M,
                            const Eigen::VectorXd& omega2, const Eigen::MatrixXd& phi,
                            double tol = 1e-6) {
    for (Eigen::Index j = 0; j < omega2.size(); ++j) {
        const Eigen::VectorXd kphi = K * phi.col(j);
        const double res = (kphi - omega2[j] * (M * phi.col(j))).norm();
        if (res > tol * kphi.norm())
            throw NumericalError("solve_modes: residual bound violated for mode " +
                                 std::to_string(j + 1));
    }
}

}  // namespace detail

/// Smallest n_modes solutions of K phi = omega^2 M phi, mass-normalized,
/// via Cholesky reduction of M to a standard symmetric problem.
inline ModalData solve_modes(const GlobalMatrices& g, int n_modes) {
    const Eigen::Index n = g.stiffness.rows();
    if (n_modes < 1 || n_modes > n)
        throw ConfigError("solve_modes: mode count must lie in [1, n_free_dofs]");
    Eigen::LLT<Eigen::MatrixXd> llt(g.mass);
    if (llt.info() != Eigen::Success)
        throw NumericalError("solve_modes: mass matrix is not positive definite");
    // S = L^-1 K L^-T
    Eigen::MatrixXd S = llt.matrixL().solve(g.stiffness);
    S = llt.matrixL().solve(S.transpose()).eval();
    S = 0.5 * (S + S.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    if (es.info() != Eigen::Success)
        throw NumericalError("solve_modes: eigensolver failed to converge");

    ModalData out;
    out.frequencies_hz.resize(n_modes);
    out.shapes = llt.matrixU().solve(es.eigenvectors().leftCols(n_modes));
    for (int j = 0; j < n_modes; ++j) {
        const double w2 = std::max(es.eigenvalues()[j], 0.0);
        out.frequencies_hz[j] = std::sqrt(w2) / (2.0 * std::numbers::pi);
    }
    detail::fix_shape_signs(out.shapes);
    detail::check_residuals(g.stiffness, g.mass, es.eigenvalues().head(n_modes), out.shapes);
    out.normalization = Normalization::MassNormalized;
    return out;
}

/// solve_modes with the model's row index attached.
inline ModalData solve_modes(const JacketModel& model, const GlobalMatrices& g, int n_modes) {
    ModalData out = solve_modes(g, n_modes);
    out.dof_index.resize(model.n_free_dofs());
    for (int r = 0; r < model.n_free_dofs(); ++r) out.dof_index[r] = model.node_dof_of_row(r);
    return out;
}

/// Modal assurance criterion: |a.b|^2 / (|a|^2 |b|^2), in [0, 1].
inline double mac(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) throw ConfigError("mac: vector lengths differ");
    const double na = a.squaredNorm(), nb = b.squaredNorm();
    if (na <= 0.0 || nb <= 0.0) throw ConfigError("mac: zero vector");
    const double d = a.dot(b);
    return std::min(1.0, (d * d) / (na * nb));
}

struct ModePairing {
    std::vector<int> permutation;  // permutation[i] = computed column paired with reference mode i
    bool warning = false;          // set when some best MAC < 0.5
};

/// Greedy max-MAC assignment of computed modes to reference modes, guarding
/// against mode swaps between close frequencies.
inline ModePairing pair_modes(const ModalData& reference, const ModalData& computed) {
    if (reference.n_rows() != computed.n_rows())
        throw ConfigError("pair_modes: row counts differ");
    if (computed.n_modes() < reference.n_modes())
        throw ConfigError("pair_modes: computed data has fewer modes than reference");
    ModePairing out;
    std::vector<bool> used(computed.n_modes(), false);
    for (Eigen::Index i = 0; i < reference.n_modes(); ++i) {
        double best = -1.0;
        int best_j = -1;
        for (Eigen::Index j = 0; j < computed.n_modes(); ++j) {
            if (used[j]) continue;
            const double m = mac(reference.shapes.col(i), computed.shapes.col(j));
            if (m > best) {
                best = m;
                best_j = static_cast<int>(j);
            }
        }
        used[best_j] = true;
        out.permutation.push_back(best_j);
        if (best < 0.5) out.warning = true;
    }
    return out;
}

/// Multiplicative measurement noise on frequencies and shape entries,
/// f -> f (1 + y eps), phi -> phi (1 + y eta) with fresh standard normals.
/// Columns are re-normalized to unit length afterwards. Draw order is
/// frequencies first, then shape entries column by column.
inline ModalData add_noise(const ModalData& modal, double eps_freq, double eta_shape,
                           std::uint64_t rng_seed) {
    if (eps_freq < 0.0 || eta_shape < 0.0)
        throw ConfigError("add_noise: noise levels must be >= 0");
    Rng rng(rng_seed);
    ModalData out = modal;
    for (Eigen::Index p = 0; p < out.frequencies_hz.size(); ++p)
        out.frequencies_hz[p] *= 1.0 + rng.normal() * eps_freq;
    for (Eigen::Index q = 0; q < out.shapes.cols(); ++q) {
        for (Eigen::Index p = 0; p < out.shapes.rows(); ++p)
            out.shapes(p, q) *= 1.0 + rng.normal() * eta_shape;
        const double norm = out.shapes.col(q).norm();
        if (norm > 0.0) out.shapes.col(q) /= norm;
    }
    out.normalization = Normalization::UnitNorm;
    return out;
}

/// Keep the three translational DOF rows of each selected candidate node;
/// columns are re-normalized to unit length.
inline ModalData restrict_to_sensors(const ModalData& modal, const SensorSelection& selection,
                                     const JacketModel& model) {
    if (selection.bits.size() != model.candidate_sensor_nodes.size())
        throw ConfigError("restrict_to_sensors: selection length mismatch");
    if (selection.empty()) throw ConfigError("restrict_to_sensors: empty selection");

    std::unordered_map<long long, int> row_of;
    row_of.reserve(modal.dof_index.size());
    for (std::size_t r = 0; r < modal.dof_index.size(); ++r) {
        const auto [node, dof] = modal.dof_index[r];
        row_of[static_cast<long long>(node) * 8 + dof] = static_cast<int>(r);
    }

    ModalData out;
    out.frequencies_hz = modal.frequencies_hz;
    out.normalization = Normalization::UnitNorm;
    std::vector<int> rows;
    for (std::size_t i = 0; i < selection.bits.size(); ++i) {
        if (!selection.bits[i]) continue;
        const int node = model.candidate_sensor_nodes[i];
        for (int d = 0; d < 3; ++d) {
            const auto it = row_of.find(static_cast<long long>(node) * 8 + d);
            if (it == row_of.end())
                throw ConfigError("restrict_to_sensors: modal data lacks node translations");
            rows.push_back(it->second);
            out.dof_index.emplace_back(node, d);
        }
    }
    out.shapes.resize(static_cast<Eigen::Index>(rows.size()), modal.shapes.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) out.shapes.row(r) = modal.shapes.row(rows[r]);
    for (Eigen::Index q = 0; q < out.shapes.cols(); ++q) {
        const double norm = out.shapes.col(q).norm();
        if (norm > 0.0) out.shapes.col(q) /= norm;
    }
    return out;
}

/// Repeated eigensolves over varying damage with fixed mass: warm-started
/// block inverse iteration with Rayleigh-Ritz extraction, a Sturm-count
/// verification, and a dense fallback. Meets the same 1e-6 relative
/// residual bound as solve_modes. One instance per thread; the warm-start
/// cache is mutable state.
class FastModalSolver {
public:
    FastModalSolver(const ElementStash& stash, int n_modes)
        : stash_(stash), n_modes_(n_modes), n_(stash.n_dofs()) {
        if (n_modes_ < 1 || n_modes_ > n_) throw ConfigError("FastModalSolver: bad mode count");
        stash_.assemble_mass(M_);
        K_.resize(n_, n_);
        shift_.resize(n_, n_);
    }

    /// Frequencies (Hz) and mass-normalized shapes for damage state alpha.
    /// Shape signs are unspecified; callers needing the sign convention
    /// should use solve_modes.
    void solve(const Eigen::VectorXd& alpha, Eigen::VectorXd& frequencies_hz,
               Eigen::MatrixXd& shapes) {
        stash_.assemble_stiffness(alpha, K_);
        if (warm_ && try_warm_reanalysis(frequencies_hz, shapes)) return;
        ++dense_solves_;
        dense_solve(frequencies_hz, shapes);
    }

    const Eigen::MatrixXd& mass() const { return M_; }
    long long dense_solve_count() const { return dense_solves_; }
    long long refactor_count() const { return refactor_count_; }

private:
    int sturm_count_below(double sigma) {
        shift_ = K_ - sigma * M_;
        ldlt_.compute(shift_);
        if (ldlt_.info() != Eigen::Success) return -1;
        int below = 0;
        for (Eigen::Index i = 0; i < n_; ++i)
            if (ldlt_.vectorD()[i] < 0.0) ++below;
        return below;
    }

    struct ClusterFactor {
        double sigma = 0.0;
        Eigen::LDLT<Eigen::MatrixXd> factor;
        bool valid = false;
    };

    bool refresh_factor(ClusterFactor& cf, double sigma) {
        shift_ = K_ - sigma * M_;
        cf.factor.compute(shift_);
        cf.sigma = sigma;
        cf.valid = cf.factor.info() == Eigen::Success;
        ++refactor_count_;
        return cf.valid;
    }

    /// Residual-correction iteration per warm eigenvalue cluster with cached
    /// shifted factorizations (a fresh factor makes the step exact
    /// shift-invert inverse iteration; a stale one still preconditions),
    /// then global verification: per-mode residual bound, bounded cross-
    /// cluster mass coupling, and a Sturm count certifying the block is the
    /// complete set of lowest modes.
    bool try_warm_reanalysis(Eigen::VectorXd& frequencies_hz, Eigen::MatrixXd& shapes) {
        const double tol = 1e-6;  // relative eigen residual, as in solve_modes
        const int m = n_modes_;
        Eigen::VectorXd theta(m);
        X_.resize(n_, m);
        factors_.resize(static_cast<std::size_t>(m));

        int a = 0;
        while (a < m) {
            int b = a;  // cluster [a, b]: warm eigenvalues within 8%
            while (b + 1 < m && warm_theta_[b + 1] < warm_theta_[b] * 1.08) ++b;
            const int s = b - a + 1;
            const double target =
                s == 1 ? warm_theta_[a] * (1.0 - 1e-4) : 0.5 * (warm_theta_[a] + warm_theta_[b]);
            ClusterFactor& cf = factors_[static_cast<std::size_t>(a)];
            if (!cf.valid || std::abs(cf.sigma - target) > 0.03 * target)
                if (!refresh_factor(cf, target)) return false;

            Eigen::MatrixXd B = cache_.middleCols(a, s);
            Eigen::MatrixXd KB(n_, s), MB(n_, s), R(n_, s);
            Eigen::VectorXd lam(s);
            bool cluster_ok = false;
            bool refactored_now = false;
            for (int it = 0; it < 10 && !cluster_ok; ++it) {
                KB.noalias() = K_ * B;
                MB.noalias() = M_ * B;
                if (s == 1) {
                    lam[0] = B.col(0).dot(KB.col(0)) / B.col(0).dot(MB.col(0));
                } else {
                    Eigen::MatrixXd ar = B.transpose() * KB;
                    Eigen::MatrixXd br = B.transpose() * MB;
                    ar = 0.5 * (ar + ar.transpose()).eval();
                    br = 0.5 * (br + br.transpose()).eval();
                    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> rr(ar, br);
                    if (rr.info() != Eigen::Success) return false;
                    lam = rr.eigenvalues();
                    B = (B * rr.eigenvectors()).eval();
                    KB = (KB * rr.eigenvectors()).eval();
                    MB = (MB * rr.eigenvectors()).eval();
                }
                cluster_ok = true;
                for (int j = 0; j < s; ++j) {
                    R.col(j) = KB.col(j) - lam[j] * MB.col(j);
                    if (!(lam[j] > 0.0) || R.col(j).norm() > tol * KB.col(j).norm())
                        cluster_ok = false;
                }
                if (cluster_ok) break;
                if (it == 2 && !refactored_now) {
                    // slow convergence: the cached shift has gone stale
                    if (!refresh_factor(cf, s == 1 ? lam[0] * (1.0 - 1e-4)
                                                   : 0.5 * (lam[0] + lam[s - 1])))
                        return false;
                    refactored_now = true;
                }
                B -= cf.factor.solve(R);
                // M-orthonormalize the corrected block
                Eigen::MatrixXd br = B.transpose() * (M_ * B);
                Eigen::LLT<Eigen::MatrixXd> chol(0.5 * (br + br.transpose()));
                if (chol.info() != Eigen::Success) return false;
                B = chol.matrixU().solve<Eigen::OnTheRight>(B);
            }
            if (!cluster_ok) return false;
            for (int j = 0; j < s; ++j) {
                theta[a + j] = lam[j];
                const double scale = std::sqrt(B.col(j).dot(MB.col(j)));
                if (!(scale > 0.0)) return false;
                B.col(j) /= scale;
            }
            X_.middleCols(a, s) = B;
            a = b + 1;
        }

        // ascending order across clusters
        for (int j = 1; j < m; ++j)
            if (!(theta[j] >= theta[j - 1])) return false;
        // cross-cluster duplicates show up as off-diagonal mass coupling of
        // order one; legitimate coupling is bounded by residual/gap
        Eigen::MatrixXd gram = X_.transpose() * (M_ * X_);
        gram.diagonal().array() -= 1.0;
        if (gram.cwiseAbs().maxCoeff() > 1e-2) return false;
        // the block must be exactly the m lowest eigenvalues
        const int below = sturm_count_below(theta[m - 1] * (1.0 + 1e-8));
        if (below != m) return false;

        warm_theta_ = theta;
        cache_ = X_;
        extract(theta, X_, frequencies_hz, shapes);
        return true;
    }

    void dense_solve(Eigen::VectorXd& frequencies_hz, Eigen::MatrixXd& shapes) {
        Eigen::LLT<Eigen::MatrixXd> llt(M_);
        if (llt.info() != Eigen::Success)
            throw NumericalError("FastModalSolver: mass matrix is not positive definite");
        Eigen::MatrixXd S = llt.matrixL().solve(K_);
        S = llt.matrixL().solve(S.transpose()).eval();
        S = 0.5 * (S + S.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
        if (es.info() != Eigen::Success)
            throw NumericalError("FastModalSolver: dense eigensolver failed");
        cache_ = llt.matrixU().solve(es.eigenvectors().leftCols(n_modes_));
        warm_theta_ = es.eigenvalues().head(n_modes_);
        warm_ = true;
        extract(warm_theta_, cache_, frequencies_hz, shapes);
    }

    void extract(const Eigen::VectorXd& theta, const Eigen::MatrixXd& X,
                 Eigen::VectorXd& frequencies_hz, Eigen::MatrixXd& shapes) const {
        frequencies_hz.resize(n_modes_);
        for (int j = 0; j < n_modes_; ++j)
            frequencies_hz[j] = std::sqrt(std::max(theta[j], 0.0)) / (2.0 * std::numbers::pi);
        shapes = X.leftCols(n_modes_);
    }

    const ElementStash& stash_;
    int n_modes_;
    Eigen::Index n_;
    Eigen::MatrixXd M_;
    Eigen::MatrixXd K_;
    Eigen::MatrixXd cache_;       // last converged shapes, n x n_modes
    Eigen::VectorXd warm_theta_;  // last converged eigenvalues
    Eigen::MatrixXd X_, shift_;
    Eigen::LDLT<Eigen::MatrixXd> ldlt_;
    std::vector<ClusterFactor> factors_;
    bool warm_ = false;
    long long dense_solves_ = 0;
    long long refactor_count_ = 0;
};

}  // namespace jshm
