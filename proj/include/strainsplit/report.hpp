#pragma once

#include <optional>
#include <string>
#include <vector>

#include "strainsplit/evaluate.hpp"
#include "strainsplit/hypothesis.hpp"
#include "strainsplit/mixture.hpp"
#include "strainsplit/simulate.hpp"

namespace strainsplit {

inline constexpr int kReportSchemaVersion = 1;

struct Report {
    int schema_version = kReportSchemaVersion;
    std::string sample_id;
    Call call = Call::Pure;
    double lr_statistic = 0;
    double threshold_c = 0;
    double alpha = 0;
    double epsilon0 = 0;
    double epsilon1 = 0;
    double p_mle = 0;
    std::string model_family;
    int n_strains = 0;
    std::vector<double> em_proportions;                ///< descending; empty unless estimated
    std::vector<MixtureComponent> component_table;     ///< fitted components, descending mean
    double mean_depth = 0;
    std::size_t n_reads = 0;
    std::size_t n_filtered_sites = 0;
    std::size_t n_variant_sites = 0;
    std::size_t n_assigned_reads = 0;
    std::optional<double> mate_consistency;
    std::vector<std::string> warnings;

    friend bool operator==(const Report&, const Report&) = default;
};

/// Pretty-printed JSON. Throws std::domain_error on a non-finite number.
std::string report_to_json(const Report& report);
/// Throws ParseError on malformed or schema-incompatible input.
Report report_from_json(const std::string& text);

struct TruthFile {
    SyntheticSpec spec;
    GroundTruth truth;
    friend bool operator==(const TruthFile& a, const TruthFile& b) {
        return a.truth == b.truth && a.spec.ref_length == b.spec.ref_length && a.spec.n_strains == b.spec.n_strains &&
               a.spec.snps_per_strain == b.spec.snps_per_strain && a.spec.proportions == b.spec.proportions &&
               a.spec.depth == b.spec.depth && a.spec.read_length == b.spec.read_length &&
               a.spec.error_rate == b.spec.error_rate && a.spec.seed == b.spec.seed;
    }
};

std::string truth_to_json(const TruthFile& truth);
TruthFile truth_from_json(const std::string& text);

/// Spec fields only, for spec files passed to the simulate command.
SyntheticSpec spec_from_json(const std::string& text);

struct SampleEvaluation {
    PanelRecord record;
    std::optional<ConfusionMatrix> confusion;
    std::vector<std::size_t> consensus_mismatches;  ///< per strain, when consensus files exist
};

struct EvaluationSummary {
    std::vector<SampleEvaluation> samples;
    std::optional<double> rmse;
    std::optional<double> max_deviation;
    std::vector<std::string> rmse_samples;
    std::vector<std::string> excluded_from_rmse;  ///< mixed samples called pure or without estimates
    std::optional<RocCurve> roc;
    std::vector<AlphaCell> alpha_grid;
    MonotonicityResult monotonicity;
    std::vector<std::string> warnings;
};

std::string evaluation_to_json(const EvaluationSummary& summary);

}  // namespace strainsplit
