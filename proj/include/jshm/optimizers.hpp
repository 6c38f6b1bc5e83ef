#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "jshm/common.hpp"
#include "jshm/criteria.hpp"
#include "jshm/lichtenberg.hpp"
#include "jshm/pareto.hpp"
#include "jshm/rng.hpp"
#include "jshm/selection.hpp"

namespace jshm {

/// Objective: J(selection), to be maximized alongside minimizing count.
using SelectionObjective = std::function<double(const SensorSelection&)>;

inline SelectionObjective make_objective(Criterion c, const CriterionContext& ctx) {
    return [c, &ctx](const SensorSelection& s) { return criterion_value(c, s, ctx); };
}

/// V-shaped transfer: bit i set with probability |tanh(x_i)|. An all-zero
/// outcome is repaired by setting one uniformly random bit, since the
/// objectives are undefined on the empty selection.
inline SensorSelection binarize(const Eigen::VectorXd& position, Rng& rng) {
    SensorSelection s(static_cast<std::size_t>(position.size()));
    for (Eigen::Index i = 0; i < position.size(); ++i)
        if (rng.uniform() < std::abs(std::tanh(position[i]))) s.bits[static_cast<std::size_t>(i)] = 1;
    if (s.empty()) s.bits[rng.index(s.bits.size())] = 1;
    return s;
}

struct Nsga2Params {
    int pop = 200;
    int generations = 100;
    double crossover_prob = 0.8;
    double mutation_prob = 0.6;
    double mutation_strength = 0.1;
    std::uint64_t seed = 1;

    void validate() const {
        if (pop <= 1 || generations < 0) throw ConfigError("nsga2 params: bad counts");
        if (crossover_prob < 0 || crossover_prob > 1 || mutation_prob < 0 || mutation_prob > 1)
            throw ConfigError("nsga2 params: probabilities must lie in [0, 1]");
        if (mutation_strength < 0) throw ConfigError("nsga2 params: bad mutation strength");
    }
};

namespace detail {

/// Continuous coordinates live in [-W, W]; selections re-enter the search as
/// saturated patterns W*bits so that nearby samples stay Hamming-local.
inline constexpr double kMolaDomainHalfWidth = 1.5;

inline Eigen::VectorXd canonical_position(const SensorSelection& s, double w) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(s.bits.size()));
    for (std::size_t i = 0; i < s.bits.size(); ++i)
        x[static_cast<Eigen::Index>(i)] = s.bits[i] ? w : 0.0;
    return x;
}

}  // namespace detail

/// Bi-objective Lichtenberg search over sensor subsets. The figure is built
/// once (switching factor 0) and re-scaled, rotated and translated to a
/// trigger selection each iteration; sampled cluster points map to the
/// n-dimensional space through their normalized polar radius along a fresh
/// random direction.
inline ParetoFront mola_optimize(const SelectionObjective& objective, int n_candidates,
                                 const MolaParams& params) {
    params.validate();
    if (n_candidates <= 0) throw ConfigError("mola: no candidates");
    Rng rng(params.seed);
    const LichtenbergFigure fig = build_lichtenberg_figure(params, rng);

    const double w = detail::kMolaDomainHalfWidth;
    const double diagonal = 2.0 * w * std::sqrt(static_cast<double>(n_candidates));
    ParetoArchive archive;

    auto evaluate_sel = [&](const Eigen::VectorXd& position) {
        SensorSelection s = binarize(position, rng);
        const double j = objective(s);
        const int c = s.count();
        archive.insert({std::move(s), c, j});
    };

    Eigen::VectorXd position(n_candidates);
    for (int p = 0; p < params.pop; ++p) {
        for (int i = 0; i < n_candidates; ++i) position[i] = rng.uniform(-w, w);
        evaluate_sel(position);
    }

    const int n_local = static_cast<int>(std::lround(params.refinement * params.pop));
    for (int it = 0; it < params.n_iterations; ++it) {
        const auto& entries = archive.entries();
        const Eigen::VectorXd trigger =
            detail::canonical_position(entries[rng.index(entries.size())].selection, w);
        const double scale_draw = 1.0 - rng.uniform();  // (0, 1]
        const double angle = rng.uniform(0.0, 2.0 * M_PI);
        const double ca = std::cos(angle), sa = std::sin(angle);
        for (int p = 0; p < params.pop; ++p) {
            const auto [px, py] = fig.points[rng.index(fig.points.size())];
            const double rx = ca * px - sa * py;
            const double ry = sa * px + ca * py;
            const double rnorm = std::hypot(rx, ry) / fig.radius;
            const double reach =
                rnorm * scale_draw * diagonal * (p < n_local ? params.refinement : 1.0);
            Eigen::VectorXd dir(n_candidates);
            double norm2 = 0.0;
            do {
                for (int i = 0; i < n_candidates; ++i) dir[i] = rng.normal();
                norm2 = dir.squaredNorm();
            } while (!(norm2 > 0.0));
            position = trigger + (reach / std::sqrt(norm2)) * dir;
            for (int i = 0; i < n_candidates; ++i) position[i] = std::clamp(position[i], -w, w);
            evaluate_sel(position);
        }
    }
    return archive.front();
}

inline ParetoFront mola_optimize(Criterion c, const CriterionContext& ctx,
                                 const MolaParams& params) {
    return mola_optimize(make_objective(c, ctx), ctx.n_candidates(), params);
}

namespace detail {

struct Nsga2Individual {
    Eigen::VectorXd genes;  // in [0, 1]^n
    int count = 0;
    double j = -std::numeric_limits<double>::infinity();
    SensorSelection selection;
    int rank = 0;
    double crowding = 0.0;
};

/// Fast non-dominated sort on (minimize count, maximize J).
inline void nondominated_sort(std::vector<Nsga2Individual>& pop) {
    const std::size_t n = pop.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<int> dom_count(n, 0);
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            if (i == k) continue;
            if (dominates(pop[i].count, pop[i].j, pop[k].count, pop[k].j))
                dominated[i].push_back(k);
            else if (dominates(pop[k].count, pop[k].j, pop[i].count, pop[i].j))
                ++dom_count[i];
        }
        if (dom_count[i] == 0) {
            pop[i].rank = 0;
            current.push_back(i);
        }
    }
    int rank = 0;
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t i : current)
            for (std::size_t k : dominated[i])
                if (--dom_count[k] == 0) {
                    pop[k].rank = rank + 1;
                    next.push_back(k);
                }
        ++rank;
        current = std::move(next);
    }
}

inline void assign_crowding(std::vector<Nsga2Individual>& pop) {
    std::vector<std::vector<std::size_t>> byrank;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        if (static_cast<std::size_t>(pop[i].rank) >= byrank.size())
            byrank.resize(static_cast<std::size_t>(pop[i].rank) + 1);
        byrank[static_cast<std::size_t>(pop[i].rank)].push_back(i);
    }
    for (auto& idx : byrank) {
        if (idx.empty()) continue;
        for (std::size_t i : idx) pop[i].crowding = 0.0;
        if (idx.size() <= 2) {
            for (std::size_t i : idx) pop[i].crowding = std::numeric_limits<double>::infinity();
            continue;
        }
        for (int obj = 0; obj < 2; ++obj) {
            auto val = [&](std::size_t i) {
                return obj == 0 ? static_cast<double>(pop[i].count) : pop[i].j;
            };
            std::sort(idx.begin(), idx.end(),
                      [&](std::size_t a, std::size_t b) { return val(a) < val(b); });
            const double lo = val(idx.front()), hi = val(idx.back());
            pop[idx.front()].crowding = pop[idx.back()].crowding =
                std::numeric_limits<double>::infinity();
            if (!(hi > lo)) continue;
            for (std::size_t r = 1; r + 1 < idx.size(); ++r)
                pop[idx[r]].crowding += (val(idx[r + 1]) - val(idx[r - 1])) / (hi - lo);
        }
    }
}

}  // namespace detail

/// NSGA-II on continuous genes in [0,1]^n with scattered crossover and
/// Gaussian mutation; genes map to centered coordinates 2g - 1 before the
/// v-shaped binarization.
inline ParetoFront nsga2_optimize(const SelectionObjective& objective, int n_candidates,
                                  const Nsga2Params& params) {
    params.validate();
    if (n_candidates <= 0) throw ConfigError("nsga2: no candidates");
    Rng rng(params.seed);
    using detail::Nsga2Individual;

    auto evaluate = [&](Nsga2Individual& ind) {
        Eigen::VectorXd centered = 2.0 * ind.genes.array() - 1.0;
        ind.selection = binarize(centered, rng);
        ind.count = ind.selection.count();
        ind.j = objective(ind.selection);
    };

    std::vector<Nsga2Individual> pop(static_cast<std::size_t>(params.pop));
    for (auto& ind : pop) {
        ind.genes.resize(n_candidates);
        for (int i = 0; i < n_candidates; ++i) ind.genes[i] = rng.uniform();
        evaluate(ind);
    }
    detail::nondominated_sort(pop);
    detail::assign_crowding(pop);

    auto better = [](const Nsga2Individual& a, const Nsga2Individual& b) {
        return a.rank < b.rank || (a.rank == b.rank && a.crowding > b.crowding);
    };
    auto tournament = [&]() -> const Nsga2Individual& {
        const auto& a = pop[rng.index(pop.size())];
        const auto& b = pop[rng.index(pop.size())];
        return better(a, b) ? a : b;
    };

    for (int gen = 0; gen < params.generations; ++gen) {
        std::vector<Nsga2Individual> offspring;
        offspring.reserve(pop.size());
        while (offspring.size() < pop.size()) {
            Nsga2Individual c1, c2;
            c1.genes = tournament().genes;
            c2.genes = tournament().genes;
            if (rng.uniform() < params.crossover_prob) {
                for (int i = 0; i < n_candidates; ++i)
                    if (rng.uniform() < 0.5) std::swap(c1.genes[i], c2.genes[i]);
            }
            for (auto* c : {&c1, &c2}) {
                for (int i = 0; i < n_candidates; ++i)
                    if (rng.uniform() < params.mutation_prob)
                        c->genes[i] = std::clamp(
                            c->genes[i] + params.mutation_strength * rng.normal(), 0.0, 1.0);
                evaluate(*c);
                if (offspring.size() < pop.size()) offspring.push_back(std::move(*c));
            }
        }
        pop.insert(pop.end(), std::make_move_iterator(offspring.begin()),
                   std::make_move_iterator(offspring.end()));
        detail::nondominated_sort(pop);
        detail::assign_crowding(pop);
        std::stable_sort(pop.begin(), pop.end(), better);
        pop.resize(static_cast<std::size_t>(params.pop));
    }

    ParetoArchive archive;
    for (const auto& ind : pop)
        if (ind.rank == 0) archive.insert({ind.selection, ind.count, ind.j});
    return archive.front();
}

inline ParetoFront nsga2_optimize(Criterion c, const CriterionContext& ctx,
                                  const Nsga2Params& params) {
    return nsga2_optimize(make_objective(c, ctx), ctx.n_candidates(), params);
}

/// Exact oracle: enumerate every nonempty subset and keep, per sensor count,
/// the maximal-J selection (lexicographically smallest bitstring on ties),
/// filtered to mutual non-domination. Refuses more than 20 candidates.
inline ParetoFront exhaustive_front(const SelectionObjective& objective, int n_candidates) {
    if (n_candidates <= 0) throw ConfigError("exhaustive: no candidates");
    if (n_candidates > 20)
        throw ConfigError("exhaustive: refusing to enumerate more than 20 candidates");
    ParetoArchive archive(1u << 20);
    const std::uint32_t total = (1u << n_candidates) - 1u;
    for (std::uint32_t mask = 1; mask <= total; ++mask) {
        SensorSelection s = SensorSelection::from_mask(static_cast<std::size_t>(n_candidates), mask);
        const double j = objective(s);
        if (!std::isfinite(j)) continue;
        const int c = s.count();
        archive.insert({std::move(s), c, j});
    }
    return archive.front();
}

inline ParetoFront exhaustive_front(Criterion c, const CriterionContext& ctx) {
    return exhaustive_front(make_objective(c, ctx), ctx.n_candidates());
}

}  // namespace jshm
