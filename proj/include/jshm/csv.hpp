#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <cstdint>

#include "jshm/bayes.hpp"
#include "jshm/criteria.hpp"
#include "jshm/lichtenberg.hpp"
#include "jshm/modal.hpp"
#include "jshm/pareto.hpp"

namespace jshm {
namespace csv {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

/// One row per mode: index, frequency, then one column per DOF row.
/// Column names use 1-based node ids and ux/uy/uz/rx/ry/rz.
inline std::string modal_data(const ModalData& modal) {
    static const char* dof_names[6] = {"ux", "uy", "uz", "rx", "ry", "rz"};
    std::ostringstream out;
    out << "mode,frequency_hz";
    for (const auto& [node, dof] : modal.dof_index)
        out << ",n" << node + 1 << "_" << dof_names[dof];
    out << "\n";
    for (Eigen::Index m = 0; m < modal.n_modes(); ++m) {
        out << m + 1 << "," << num(modal.frequencies_hz[m]);
        for (Eigen::Index r = 0; r < modal.n_rows(); ++r) out << "," << num(modal.shapes(r, m));
        out << "\n";
    }
    return out.str();
}

inline std::string front(const ParetoFront& f) {
    std::ostringstream out;
    out << "count,j,selection\n";
    for (const auto& e : f.entries)
        out << e.count << "," << num(e.j) << "," << e.selection.bitstring() << "\n";
    return out.str();
}

struct HypervolumeRow {
    std::string criterion;
    std::string algorithm;
    std::uint64_t seed = 0;
    double hv = 0.0;
};

inline std::string hypervolume_report(const std::vector<HypervolumeRow>& rows) {
    std::ostringstream out;
    out << "criterion,algorithm,seed,hypervolume\n";
    for (const auto& r : rows)
        out << r.criterion << "," << r.algorithm << "," << r.seed << "," << num(r.hv) << "\n";
    return out.str();
}

inline std::string lichtenberg_points(const LichtenbergFigure& fig) {
    std::ostringstream out;
    out << "x,y\n";
    for (const auto& [x, y] : fig.points) out << x << "," << y << "\n";
    return out.str();
}

/// Batch of criterion evaluations, one row per (selection, criterion).
struct CriterionRow {
    std::string selection;
    int count = 0;
    std::string criterion;
    double j = 0.0;
};

inline std::string criterion_batch(const std::vector<CriterionRow>& rows) {
    std::ostringstream out;
    out << "selection,count,criterion,j\n";
    for (const auto& r : rows)
        out << r.selection << "," << r.count << "," << r.criterion << "," << num(r.j) << "\n";
    return out.str();
}

/// Kept sweeps with 1-based element columns and the per-sweep acceptance count.
inline std::string chain(const DamageChain& ch, const std::vector<int>& element_ids) {
    std::ostringstream out;
    out << "iteration";
    for (int e : element_ids) out << ",alpha_" << e + 1;
    out << ",accepted\n";
    for (Eigen::Index i = 0; i < ch.n_kept(); ++i) {
        out << ch.burn_in + static_cast<int>(i) + 1;
        for (Eigen::Index p = 0; p < ch.n_params(); ++p) out << "," << num(ch.samples(i, p));
        out << ","
            << (i < static_cast<Eigen::Index>(ch.accepted_per_sweep.size())
                    ? ch.accepted_per_sweep[static_cast<std::size_t>(i)]
                    : 0)
            << "\n";
    }
    return out.str();
}

inline std::string summary(const PosteriorSummary& s, const std::vector<int>& element_ids) {
    std::ostringstream out;
    out << "element,mean,ci_low,ci_high\n";
    for (Eigen::Index p = 0; p < s.mean.size(); ++p)
        out << element_ids[static_cast<std::size_t>(p)] + 1 << "," << num(s.mean[p]) << ","
            << num(s.ci_low[p]) << "," << num(s.ci_high[p]) << "\n";
    return out.str();
}

inline std::string kde(const PosteriorSummary& s, const std::vector<int>& element_ids) {
    std::ostringstream out;
    out << "element,grid,density\n";
    for (std::size_t p = 0; p < s.kde.size(); ++p)
        for (Eigen::Index g = 0; g < s.kde[p].grid.size(); ++g)
            out << element_ids[p] + 1 << "," << num(s.kde[p].grid[g]) << ","
                << num(s.kde[p].density[g]) << "\n";
    return out.str();
}

inline std::string noise_errors(const NoiseStudyResult& r) {
    std::ostringstream out;
    out << "noise_level,replicate,element,abs_error\n";
    for (const auto& row : r.rows)
        out << num(row.level) << "," << row.replicate + 1 << "," << row.element + 1 << ","
            << num(row.abs_error) << "\n";
    return out.str();
}

inline std::string noise_frequencies(const NoiseStudyResult& r) {
    std::ostringstream out;
    out << "noise_level,replicate,mode,frequency_hz\n";
    for (const auto& [level, rep, freqs] : r.noisy_frequencies)
        for (Eigen::Index m = 0; m < freqs.size(); ++m)
            out << num(level) << "," << rep + 1 << "," << m + 1 << "," << num(freqs[m]) << "\n";
    return out.str();
}

}  // namespace csv
}  // namespace jshm
