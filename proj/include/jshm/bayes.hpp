#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "jshm/assembly.hpp"
#include "jshm/common.hpp"
#include "jshm/criteria.hpp"
#include "jshm/modal.hpp"
#include "jshm/model.hpp"
#include "jshm/parallel.hpp"
#include "jshm/rng.hpp"
#include "jshm/selection.hpp"

namespace jshm {

/// Deterministic seed derivation for independent sub-streams (splitmix64).
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t x = base + 0x9E3779B97F4A7C15ull * (a + 1) + 0xBF58476D1CE4E5B9ull * (b + 1);
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
}

/// Inverse problem: which per-element stiffness losses explain the measured
/// sensor-restricted modal data. Prior: independent uniform on [0, alpha_max]
/// per estimated element.
struct IdentificationProblem {
    JacketModel model;
    ModalData measured;  // sensor-restricted, unit-norm columns
    SensorSelection selection;
    std::vector<int> estimated_elements;  // 0-based element indices
    double alpha_max = 0.95;

    void validate() const {
        if (measured.normalization != Normalization::UnitNorm)
            throw ConfigError("identification: measured data must be unit-norm");
        if (estimated_elements.empty())
            throw ConfigError("identification: no estimated elements");
        for (int e : estimated_elements)
            if (e < 0 || e >= static_cast<int>(model.elements.size()))
                throw ConfigError("identification: estimated element out of range");
        if (!(alpha_max > 0.0 && alpha_max < 1.0))
            throw ConfigError("identification: alpha_max must lie in (0, 1)");
    }

    static std::vector<int> all_elements(const JacketModel& m) {
        std::vector<int> v(m.elements.size());
        std::iota(v.begin(), v.end(), 0);
        return v;
    }
};

/// Forward-model misfit evaluator; owns mutable solver state, one per thread.
class PosteriorEvaluator {
public:
    explicit PosteriorEvaluator(const IdentificationProblem& problem)
        : problem_(problem),
          stash_(problem.model),
          solver_(stash_, static_cast<int>(problem.measured.n_modes())),
          full_alpha_(Eigen::VectorXd::Zero(problem.model.elements.size())) {
        problem_.validate();
        for (std::size_t i = 0; i < problem_.selection.bits.size(); ++i) {
            if (!problem_.selection.bits[i]) continue;
            const int node = problem_.model.candidate_sensor_nodes[i];
            for (int d = 0; d < 3; ++d) sensor_rows_.push_back(problem_.model.dof_of(node, d));
        }
        if (static_cast<Eigen::Index>(sensor_rows_.size()) != problem_.measured.n_rows())
            throw ConfigError("identification: measured rows do not match the selection");
    }

    int n_params() const { return static_cast<int>(problem_.estimated_elements.size()); }
    double alpha_max() const { return problem_.alpha_max; }
    const IdentificationProblem& problem() const { return problem_; }

    /// Eq. (8)-(9) log posterior up to a constant: -J/2, with J summing the
    /// squared relative frequency error (measured-frequency denominator) and
    /// the MAC complement per measured mode; -inf outside the prior box or
    /// on forward-model failure.
    double log_posterior(const Eigen::VectorXd& alpha_params) {
        if (alpha_params.size() != n_params())
            throw ConfigError("log_posterior: parameter count mismatch");
        for (Eigen::Index i = 0; i < alpha_params.size(); ++i)
            if (!(alpha_params[i] >= 0.0 && alpha_params[i] <= problem_.alpha_max))
                return -std::numeric_limits<double>::infinity();
        try {
            return -0.5 * misfit(alpha_params);
        } catch (const NumericalError&) {
            return -std::numeric_limits<double>::infinity();
        }
    }

    /// J(A) of Eq. (9).
    double misfit(const Eigen::VectorXd& alpha_params) {
        expand(alpha_params);
        solver_.solve(full_alpha_, freqs_, shapes_);
        const int nm = static_cast<int>(problem_.measured.n_modes());
        // restrict to sensor rows and unit-normalize
        restricted_.resize(static_cast<Eigen::Index>(sensor_rows_.size()), nm);
        for (std::size_t r = 0; r < sensor_rows_.size(); ++r)
            restricted_.row(static_cast<Eigen::Index>(r)) = shapes_.row(sensor_rows_[r]);
        for (int m = 0; m < nm; ++m) {
            const double norm = restricted_.col(m).norm();
            if (norm > 0.0) restricted_.col(m) /= norm;
        }
        // greedy max-MAC pairing of computed modes to measured modes
        const Eigen::MatrixXd& meas = problem_.measured.shapes;
        double j = 0.0;
        std::array<bool, 64> used{};
        for (int i = 0; i < nm; ++i) {
            double best = -1.0;
            int best_m = 0;
            for (int m = 0; m < nm; ++m) {
                if (used[static_cast<std::size_t>(m)]) continue;
                const double dot = meas.col(i).dot(restricted_.col(m));
                const double macv = dot * dot;
                if (macv > best) {
                    best = macv;
                    best_m = m;
                }
            }
            used[static_cast<std::size_t>(best_m)] = true;
            const double fm = problem_.measured.frequencies_hz[i];
            const double fa = freqs_[best_m];
            const double ferr = (fm - fa) / fm;
            j += ferr * ferr + (1.0 - std::min(best, 1.0));
        }
        return j;
    }

private:
    void expand(const Eigen::VectorXd& alpha_params) {
        full_alpha_.setZero();
        for (int i = 0; i < n_params(); ++i)
            full_alpha_[problem_.estimated_elements[static_cast<std::size_t>(i)]] =
                alpha_params[i];
    }

    IdentificationProblem problem_;
    ElementStash stash_;
    FastModalSolver solver_;
    Eigen::VectorXd full_alpha_;
    std::vector<int> sensor_rows_;
    Eigen::VectorXd freqs_;
    Eigen::MatrixXd shapes_;
    Eigen::MatrixXd restricted_;
};

inline double log_posterior(const Eigen::VectorXd& alpha_params,
                            const IdentificationProblem& problem) {
    PosteriorEvaluator ev(problem);
    return ev.log_posterior(alpha_params);
}

struct McmcParams {
    int n_iterations = 15000;  // full component sweeps
    int burn_in = 5000;        // adaptation confined to these sweeps
    double target_acceptance = 0.3;
    double initial_scale = 0.05;
    std::uint64_t seed = 1;

    void validate() const {
        if (n_iterations <= burn_in || burn_in < 0)
            throw ConfigError("mcmc: need n_iterations > burn_in >= 0");
        if (!(initial_scale > 0.0)) throw ConfigError("mcmc: bad initial proposal scale");
        if (!(target_acceptance > 0.0 && target_acceptance < 1.0))
            throw ConfigError("mcmc: target acceptance must lie in (0, 1)");
    }
};

/// Post-burn-in samples of a component-wise random-walk Metropolis chain.
struct DamageChain {
    Eigen::MatrixXd samples;  // kept sweeps x n_params
    int burn_in = 0;
    double acceptance_rate = 0.0;       // post burn-in component acceptances
    Eigen::VectorXd proposal_scales;    // frozen per-parameter stds
    std::vector<int> accepted_per_sweep;  // post burn-in, 0..n_params

    Eigen::Index n_kept() const { return samples.rows(); }
    Eigen::Index n_params() const { return samples.cols(); }
};

namespace detail {

/// Reflect into [lo, hi]; the fold keeps the proposal density symmetric.
inline double reflect(double x, double lo, double hi) {
    const double span = hi - lo;
    double y = std::fmod(x - lo, 2.0 * span);
    if (y < 0.0) y += 2.0 * span;
    if (y > span) y = 2.0 * span - y;
    return lo + y;
}

}  // namespace detail

/// Component-wise Gaussian random-walk Metropolis-Hastings in a box prior.
/// Proposal stds adapt toward the target acceptance during burn-in only and
/// stay frozen afterwards, so the retained sweeps target the exact posterior.
inline DamageChain mh_sample(const std::function<double(const Eigen::VectorXd&)>& log_density,
                             int n_params, double lower, double upper, const McmcParams& params) {
    params.validate();
    if (n_params <= 0 || !(upper > lower)) throw ConfigError("mh_sample: bad parameter box");
    Rng rng(params.seed);

    Eigen::VectorXd state(n_params);
    for (int i = 0; i < n_params; ++i) state[i] = rng.uniform(lower, upper);
    double current_lp = log_density(state);

    Eigen::VectorXd scales = Eigen::VectorXd::Constant(n_params, params.initial_scale);
    const int kept = params.n_iterations - params.burn_in;
    DamageChain chain;
    chain.samples.resize(kept, n_params);
    chain.burn_in = params.burn_in;
    chain.accepted_per_sweep.reserve(static_cast<std::size_t>(kept));

    long long accepted_post = 0;
    Eigen::VectorXd proposal = state;
    for (int sweep = 0; sweep < params.n_iterations; ++sweep) {
        const bool adapting = sweep < params.burn_in;
        int accepted_here = 0;
        for (int p = 0; p < n_params; ++p) {
            proposal = state;
            proposal[p] = detail::reflect(state[p] + scales[p] * rng.normal(), lower, upper);
            const double lp = log_density(proposal);
            const bool accept = std::log(rng.uniform() + 1e-300) < lp - current_lp;
            if (accept) {
                state[p] = proposal[p];
                current_lp = lp;
                ++accepted_here;
            }
            if (adapting) {
                const double rate = std::pow(static_cast<double>(sweep + 1), -0.6);
                scales[p] *= std::exp(rate * ((accept ? 1.0 : 0.0) - params.target_acceptance));
                scales[p] = std::clamp(scales[p], 1e-6 * (upper - lower), upper - lower);
            }
        }
        if (!adapting) {
            chain.samples.row(sweep - params.burn_in) = state;
            chain.accepted_per_sweep.push_back(accepted_here);
            accepted_post += accepted_here;
        }
    }
    chain.acceptance_rate =
        static_cast<double>(accepted_post) / (static_cast<double>(kept) * n_params);
    chain.proposal_scales = scales;
    return chain;
}

/// MH over the identification posterior.
inline DamageChain mh_sample(const IdentificationProblem& problem, const McmcParams& params) {
    PosteriorEvaluator ev(problem);
    return mh_sample([&ev](const Eigen::VectorXd& a) { return ev.log_posterior(a); },
                     ev.n_params(), 0.0, problem.alpha_max, params);
}

struct KdeCurve {
    Eigen::VectorXd grid;
    Eigen::VectorXd density;
};

struct PosteriorSummary {
    Eigen::VectorXd mean;
    Eigen::VectorXd ci_low;   // 2.5th percentile
    Eigen::VectorXd ci_high;  // 97.5th percentile
    std::vector<KdeCurve> kde;
    bool short_chain_warning = false;
};

namespace detail {

inline double percentile(std::vector<double>& sorted, double q) {
    const std::size_t m = sorted.size();
    if (m == 1) return sorted[0];
    const double pos = q * static_cast<double>(m - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= m) return sorted[m - 1];
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace detail

/// Mean, empirical 95% credible interval and a Silverman-bandwidth Gaussian
/// KDE per parameter on a 256-point grid spanning [min - 3h, max + 3h].
inline PosteriorSummary posterior_summary(const DamageChain& chain) {
    const Eigen::Index m = chain.n_kept();
    const Eigen::Index d = chain.n_params();
    if (m == 0) throw ConfigError("posterior_summary: empty chain");
    PosteriorSummary out;
    out.short_chain_warning = m < 100;
    out.mean.resize(d);
    out.ci_low.resize(d);
    out.ci_high.resize(d);
    out.kde.resize(static_cast<std::size_t>(d));

    constexpr int kGrid = 256;
    std::vector<double> col(static_cast<std::size_t>(m));
    for (Eigen::Index p = 0; p < d; ++p) {
        for (Eigen::Index i = 0; i < m; ++i) col[static_cast<std::size_t>(i)] = chain.samples(i, p);
        const double mean = chain.samples.col(p).mean();
        out.mean[p] = mean;
        std::sort(col.begin(), col.end());
        out.ci_low[p] = detail::percentile(col, 0.025);
        out.ci_high[p] = detail::percentile(col, 0.975);

        const double sd =
            m > 1 ? std::sqrt((chain.samples.col(p).array() - mean).square().sum() /
                              static_cast<double>(m - 1))
                  : 0.0;
        const double iqr = detail::percentile(col, 0.75) - detail::percentile(col, 0.25);
        double h = 0.9 * std::min(sd, iqr / 1.34) * std::pow(static_cast<double>(m), -0.2);
        if (!(h > 0.0)) h = std::max(1e-9, 1e-9 * std::abs(mean));

        auto& curve = out.kde[static_cast<std::size_t>(p)];
        curve.grid.resize(kGrid);
        curve.density.resize(kGrid);
        const double lo = col.front() - 3.0 * h, hi = col.back() + 3.0 * h;
        const double step = (hi - lo) / (kGrid - 1);
        const double inv = 1.0 / (static_cast<double>(m) * h * std::sqrt(2.0 * M_PI));
        for (int g = 0; g < kGrid; ++g) {
            const double x = lo + g * step;
            double dens = 0.0;
            for (double v : col) {
                const double z = (x - v) / h;
                dens += std::exp(-0.5 * z * z);
            }
            curve.grid[g] = x;
            curve.density[g] = dens * inv;
        }
    }
    return out;
}

/// Synthetic measurement for a truth damage state: exact modes, restricted
/// to the selection, then multiplicative noise per the measurement model.
inline ModalData synthesize_measurement(const JacketModel& model, const DamageVector& truth,
                                        const SensorSelection& selection, int n_modes,
                                        double eps_freq, double eta_shape, std::uint64_t seed) {
    const GlobalMatrices g = assemble_global(model, truth);
    const ModalData full = solve_modes(model, g, n_modes);
    const ModalData restricted = restrict_to_sensors(full, selection, model);
    return add_noise(restricted, eps_freq, eta_shape, seed);
}

struct NoiseStudyRow {
    double level = 0.0;
    int replicate = 0;
    int element = 0;  // 0-based element index
    double abs_error = 0.0;
};

struct NoiseStudyResult {
    std::vector<NoiseStudyRow> rows;
    std::vector<double> levels;
    std::vector<double> level_mean_error;  // mean abs error over replicates and elements
    // noisy measured frequencies per (level, replicate), for plotting
    std::vector<std::tuple<double, int, Eigen::VectorXd>> noisy_frequencies;
};

/// Noise robustness sweep: regenerate the noisy measurement and rerun the
/// chain for every level x replicate; errors are |posterior mean - truth|
/// at the damaged elements. Replicates run concurrently.
inline NoiseStudyResult run_noise_study(const JacketModel& model, const DamageVector& truth,
                                        const SensorSelection& selection,
                                        const std::vector<int>& estimated_elements, int n_modes,
                                        const McmcParams& mcmc, const std::vector<double>& levels,
                                        int replicates, double alpha_max = 0.95,
                                        unsigned n_threads = 0) {
    if (replicates <= 0) throw ConfigError("noise study: replicates must be positive");
    for (double l : levels)
        if (l < 0.0) throw ConfigError("noise study: negative noise level");
    std::vector<int> damaged;
    for (Eigen::Index e = 0; e < truth.size(); ++e)
        if (truth.alpha[e] > 0.0) damaged.push_back(static_cast<int>(e));
    if (damaged.empty()) throw ConfigError("noise study: truth scenario has no damage");

    const std::size_t n_tasks = levels.size() * static_cast<std::size_t>(replicates);
    std::vector<std::vector<NoiseStudyRow>> task_rows(n_tasks);
    std::vector<Eigen::VectorXd> task_freqs(n_tasks);
    if (n_threads == 0) n_threads = default_thread_count();

    parallel_for_index(n_tasks, n_threads, [&](std::size_t t) {
        const std::size_t li = t / static_cast<std::size_t>(replicates);
        const int rep = static_cast<int>(t % static_cast<std::size_t>(replicates));
        const double level = levels[li];
        const std::uint64_t noise_seed = mix_seed(mcmc.seed, li, static_cast<std::uint64_t>(rep));
        IdentificationProblem prob;
        prob.model = model;
        prob.selection = selection;
        prob.estimated_elements = estimated_elements;
        prob.alpha_max = alpha_max;
        prob.measured =
            synthesize_measurement(model, truth, selection, n_modes, level, level, noise_seed);
        McmcParams chain_params = mcmc;
        chain_params.seed = mix_seed(mcmc.seed, li + 101, static_cast<std::uint64_t>(rep) + 17);
        const DamageChain chain = mh_sample(prob, chain_params);
        const PosteriorSummary summary = posterior_summary(chain);
        task_freqs[t] = prob.measured.frequencies_hz;
        for (int e : damaged) {
            const auto it =
                std::find(estimated_elements.begin(), estimated_elements.end(), e);
            if (it == estimated_elements.end())
                throw ConfigError("noise study: damaged element not in the estimated set");
            const Eigen::Index pi = it - estimated_elements.begin();
            task_rows[t].push_back(
                {level, rep, e, std::abs(summary.mean[pi] - truth.alpha[e])});
        }
    });

    NoiseStudyResult out;
    out.levels = levels;
    out.level_mean_error.assign(levels.size(), 0.0);
    std::vector<int> level_counts(levels.size(), 0);
    for (std::size_t t = 0; t < n_tasks; ++t) {
        const std::size_t li = t / static_cast<std::size_t>(replicates);
        const int rep = static_cast<int>(t % static_cast<std::size_t>(replicates));
        out.noisy_frequencies.emplace_back(levels[li], rep, task_freqs[t]);
        for (const auto& row : task_rows[t]) {
            out.rows.push_back(row);
            out.level_mean_error[li] += row.abs_error;
            ++level_counts[li];
        }
    }
    for (std::size_t li = 0; li < levels.size(); ++li)
        if (level_counts[li] > 0) out.level_mean_error[li] /= level_counts[li];
    return out;
}

}  // namespace jshm
