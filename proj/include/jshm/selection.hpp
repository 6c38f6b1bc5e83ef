#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jshm/common.hpp"

namespace jshm {

/// Binary subset of the ordered candidate sensor node list.
struct SensorSelection {
    std::vector<std::uint8_t> bits;  // one per candidate, 1 = sensor placed

    SensorSelection() = default;
    explicit SensorSelection(std::size_t n_candidates) : bits(n_candidates, 0) {}

    static SensorSelection all(std::size_t n_candidates) {
        SensorSelection s(n_candidates);
        std::fill(s.bits.begin(), s.bits.end(), std::uint8_t{1});
        return s;
    }

    static SensorSelection from_indices(std::size_t n_candidates, const std::vector<int>& idx) {
        SensorSelection s(n_candidates);
        for (int i : idx) {
            if (i < 0 || static_cast<std::size_t>(i) >= n_candidates)
                throw ConfigError("sensor selection: candidate index out of range");
            s.bits[static_cast<std::size_t>(i)] = 1;
        }
        return s;
    }

    static SensorSelection from_mask(std::size_t n_candidates, std::uint32_t mask) {
        SensorSelection s(n_candidates);
        for (std::size_t i = 0; i < n_candidates; ++i) s.bits[i] = (mask >> i) & 1u;
        return s;
    }

    int count() const {
        int c = 0;
        for (auto b : bits) c += b;
        return c;
    }

    bool empty() const { return count() == 0; }

    std::vector<int> selected_indices() const {
        std::vector<int> out;
        for (std::size_t i = 0; i < bits.size(); ++i)
            if (bits[i]) out.push_back(static_cast<int>(i));
        return out;
    }

    /// e.g. "010110000000", candidate order left to right.
    std::string bitstring() const {
        std::string s(bits.size(), '0');
        for (std::size_t i = 0; i < bits.size(); ++i)
            if (bits[i]) s[i] = '1';
        return s;
    }

    friend bool operator==(const SensorSelection&, const SensorSelection&) = default;
};

}  // namespace jshm
