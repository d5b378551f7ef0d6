#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "strainsplit/assign.hpp"
#include "strainsplit/hypothesis.hpp"

namespace strainsplit {

/// sqrt(mean((t - e)^2)) over major-strain proportions.
double rmse(std::span<const double> true_major, std::span<const double> estimated_major);

struct RocCurve {
    std::vector<std::pair<double, double>> points;  ///< (fpr, tpr) from (0,0) to (1,1)
    std::vector<double> thresholds;                 ///< score cut for each point after the first
    double auc = 0.0;
};

/// Sweeps the distinct scores downward; equal scores form a single
/// threshold step. Throws std::invalid_argument unless both classes occur.
RocCurve roc_auc(std::span<const double> scores, std::span<const Call> labels);

struct ConfusionMatrix {
    std::vector<std::vector<std::uint64_t>> counts;  ///< rows true strain, columns assigned strain

    std::uint64_t total() const;
    std::uint64_t correct() const;
    double accuracy() const;
};

/// Only assigned reads are counted. A read assigned without provenance throws.
ConfusionMatrix confusion_matrix(std::span<const StrainAssignment> assignments,
                                 const std::map<std::string, int>& provenance, int n_strains);

std::size_t consensus_mismatches(const std::string& consensus, const std::string& true_genome,
                                 std::span<const std::int64_t> positions);

struct PanelRecord {
    std::string sample_id;
    Call true_label = Call::Pure;
    std::vector<double> true_proportions;  ///< descending
    int snp_distance = 0;                  ///< pairwise SNP distance label of the panel cell
    double lr_statistic = 0.0;
    Call call = Call::Pure;
    std::vector<double> estimated_proportions;  ///< descending; empty unless called mixed
};

struct AlphaCell {
    int snp_distance = 0;
    double major_proportion = 0.0;
    /// Smallest alpha calling every mixed sample of the cell mixed while every
    /// pure sample at the same distance stays pure; 1 when none exists.
    double alpha = 1.0;
    double log10_alpha = 0.0;
    bool attainable = false;
    std::size_t n_mixed = 0;
    std::size_t n_pure = 0;
};

/// One cell per (distance, major proportion) among the mixed records, sorted
/// by distance then proportion. Proportions are matched at 1e-6.
std::vector<AlphaCell> alpha_calibration(std::span<const PanelRecord> records);

struct MonotonicityResult {
    std::size_t pairs = 0;
    std::size_t satisfied = 0;
    double fraction() const { return pairs == 0 ? 1.0 : static_cast<double>(satisfied) / pairs; }
};

/// Adjacent grid pairs: alpha non-increasing in distance at fixed proportion,
/// non-decreasing in proportion at fixed distance. Equal alphas satisfy both.
MonotonicityResult alpha_monotonicity(std::span<const AlphaCell> cells);

}  // namespace strainsplit
