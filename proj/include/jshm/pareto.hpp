#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "jshm/common.hpp"
#include "jshm/selection.hpp"

namespace jshm {

struct FrontEntry {
    SensorSelection selection;
    int count = 0;
    double j = 0.0;
};

/// a dominates b in (minimize count, maximize J).
inline bool dominates(int count_a, double j_a, int count_b, double j_b) {
    return count_a <= count_b && j_a >= j_b && (count_a < count_b || j_a > j_b);
}

inline bool dominates(const FrontEntry& a, const FrontEntry& b) {
    return dominates(a.count, a.j, b.count, b.j);
}

/// Mutually non-dominated entries, at most one per sensor count, sorted by
/// count ascending.
struct ParetoFront {
    std::vector<FrontEntry> entries;

    bool valid() const {
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (i + 1 < entries.size() && entries[i].count >= entries[i + 1].count) return false;
            for (std::size_t k = 0; k < entries.size(); ++k)
                if (k != i && dominates(entries[k], entries[i])) return false;
        }
        return true;
    }
};

/// Non-dominated archive with deterministic tie handling: an entry equal in
/// (count, J) to an existing one replaces it only if its bitstring is
/// lexicographically smaller, which makes the archive content independent of
/// insertion order. Capacity truncation drops the most crowded entries.
class ParetoArchive {
public:
    explicit ParetoArchive(std::size_t capacity = 100) : capacity_(capacity) {}

    void insert(FrontEntry e) {
        if (!std::isfinite(e.j)) return;
        for (const auto& kept : entries_)
            if (dominates(kept, e)) return;
        std::vector<FrontEntry> next;
        next.reserve(entries_.size() + 1);
        bool place = true;
        for (auto& kept : entries_) {
            if (dominates(e, kept)) continue;
            if (kept.count == e.count && kept.j == e.j) {
                if (e.selection.bits < kept.selection.bits) continue;  // e replaces kept
                place = false;
            }
            next.push_back(std::move(kept));
        }
        if (place) next.push_back(std::move(e));
        std::sort(next.begin(), next.end(),
                  [](const FrontEntry& a, const FrontEntry& b) { return a.count < b.count; });
        entries_ = std::move(next);
        if (entries_.size() > capacity_) truncate();
    }

    const std::vector<FrontEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    ParetoFront front() const {
        ParetoFront f;
        f.entries = entries_;
        return f;
    }

private:
    void truncate() {
        while (entries_.size() > capacity_) {
            const std::vector<double> cd = crowding_distances();
            std::size_t drop = 0;
            double worst = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < entries_.size(); ++i)
                if (cd[i] < worst) {
                    worst = cd[i];
                    drop = i;
                }
            entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(drop));
        }
    }

    std::vector<double> crowding_distances() const {
        const std::size_t n = entries_.size();
        std::vector<double> d(n, 0.0);
        if (n <= 2) return std::vector<double>(n, std::numeric_limits<double>::infinity());
        // entries are count-sorted and J is strictly increasing along the front
        for (int obj = 0; obj < 2; ++obj) {
            auto val = [&](std::size_t i) {
                return obj == 0 ? static_cast<double>(entries_[i].count) : entries_[i].j;
            };
            const double lo = val(0), hi = val(n - 1);
            d[0] = d[n - 1] = std::numeric_limits<double>::infinity();
            if (!(hi > lo)) continue;
            for (std::size_t i = 1; i + 1 < n; ++i) d[i] += (val(i + 1) - val(i - 1)) / (hi - lo);
        }
        return d;
    }

    std::size_t capacity_;
    std::vector<FrontEntry> entries_;
};

/// Area dominated by a bi-objective front after normalizing both objectives
/// to [0, 1] over the union of the given fronts; reference point (1.1, 1.1).
/// Sensor count is minimized as-is, J is maximized and mapped to 1 - J_norm.
inline double hypervolume(const ParetoFront& front, const std::vector<ParetoFront>& compared) {
    if (front.entries.empty()) return 0.0;

    double cmin = std::numeric_limits<double>::infinity(), cmax = -cmin;
    double jmin = cmin, jmax = -cmin;
    auto absorb = [&](const ParetoFront& f) {
        for (const auto& e : f.entries) {
            cmin = std::min(cmin, static_cast<double>(e.count));
            cmax = std::max(cmax, static_cast<double>(e.count));
            jmin = std::min(jmin, e.j);
            jmax = std::max(jmax, e.j);
        }
    };
    absorb(front);
    for (const auto& f : compared) absorb(f);

    const double ref = 1.1;
    std::vector<std::pair<double, double>> pts;  // (x, y) both minimized
    for (const auto& e : front.entries) {
        const double x = cmax > cmin ? (e.count - cmin) / (cmax - cmin) : 0.5;
        const double y = jmax > jmin ? 1.0 - (e.j - jmin) / (jmax - jmin) : 0.5;
        pts.emplace_back(x, y);
    }
    std::sort(pts.begin(), pts.end());
    // staircase sweep over the non-dominated subset
    double area = 0.0;
    double prev_y = ref;
    for (const auto& [x, y] : pts) {
        if (y >= prev_y) continue;  // dominated in this sweep
        area += (ref - x) * (prev_y - y);
        prev_y = y;
    }
    return area;
}

}  // namespace jshm
