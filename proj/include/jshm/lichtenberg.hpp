#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "jshm/common.hpp"
#include "jshm/rng.hpp"

namespace jshm {

/// Control parameters of the multi-objective Lichtenberg optimizer.
struct MolaParams {
    int pop = 100;              // evaluation points fired per iteration
    int np_particles = 900;     // DLA cluster size (excluding the seed)
    int creation_radius = 100;  // grid radius cap of the figure
    double stickiness = 1.0;    // probability of sticking when adjacent
    int switching = 0;          // figure regeneration mode; only 0 supported
    double refinement = 0.5;    // fraction of points fired from a shrunk copy
    int n_iterations = 50;
    std::uint64_t seed = 1;

    void validate() const {
        if (pop <= 0 || np_particles <= 0 || creation_radius <= 0 || n_iterations < 0)
            throw ConfigError("mola params: counts must be positive");
        if (stickiness <= 0.0 || stickiness > 1.0)
            throw ConfigError("mola params: stickiness must lie in (0, 1]");
        if (refinement < 0.0 || refinement > 1.0)
            throw ConfigError("mola params: refinement must lie in [0, 1]");
        if (switching != 0)
            throw ConfigError("mola params: only switching factor 0 is supported");
    }
};

/// Diffusion-limited-aggregation cluster on the integer grid.
struct LichtenbergFigure {
    std::vector<std::pair<int, int>> points;  // contains the origin
    double radius = 1.0;                      // max point norm, >= 1 for scaling
};

/// Grow a DLA cluster: walkers spawn on a circle just outside the current
/// cluster, take 8-neighborhood random steps, and freeze next to the cluster
/// with the given stickiness. Walkers straying past twice the creation
/// radius respawn; particles never freeze outside the creation radius.
inline LichtenbergFigure build_lichtenberg_figure(int np_particles, int creation_radius,
                                                  double stickiness, Rng& rng) {
    if (np_particles <= 0 || creation_radius <= 0)
        throw ConfigError("lichtenberg: particle count and radius must be positive");
    const int rc = creation_radius;
    const int half = 2 * rc + 2;
    const int dim = 2 * half + 1;
    std::vector<std::uint8_t> occupied(static_cast<std::size_t>(dim) * dim, 0);
    auto at = [&](int x, int y) -> std::uint8_t& {
        return occupied[static_cast<std::size_t>(y + half) * dim + (x + half)];
    };

    LichtenbergFigure fig;
    fig.points.reserve(static_cast<std::size_t>(np_particles) + 1);
    fig.points.emplace_back(0, 0);
    at(0, 0) = 1;
    double radius = 0.0;

    const int step_dx[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
    const int step_dy[8] = {-1, 0, 1, -1, 1, -1, 0, 1};
    auto adjacent = [&](int x, int y) {
        for (int k = 0; k < 8; ++k)
            if (at(x + step_dx[k], y + step_dy[k])) return true;
        return false;
    };
    auto spawn = [&](int& x, int& y) {
        const double r = std::min(static_cast<double>(rc), radius + 5.0);
        const double th = rng.uniform(0.0, 2.0 * M_PI);
        x = static_cast<int>(std::lround(r * std::cos(th)));
        y = static_cast<int>(std::lround(r * std::sin(th)));
    };

    while (static_cast<int>(fig.points.size()) < np_particles + 1) {
        int x, y;
        spawn(x, y);
        while (true) {
            if (!at(x, y) && adjacent(x, y) && std::hypot(x, y) <= rc &&
                rng.uniform() < stickiness) {
                at(x, y) = 1;
                fig.points.emplace_back(x, y);
                radius = std::max(radius, std::hypot(x, y));
                break;
            }
            const int k = static_cast<int>(rng.index(8));
            x += step_dx[k];
            y += step_dy[k];
            if (std::hypot(x, y) > 2.0 * rc) spawn(x, y);
        }
    }
    fig.radius = std::max(radius, 1.0);
    return fig;
}

inline LichtenbergFigure build_lichtenberg_figure(const MolaParams& params, Rng& rng) {
    params.validate();
    return build_lichtenberg_figure(params.np_particles, params.creation_radius,
                                    params.stickiness, rng);
}

}  // namespace jshm
