#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "strainsplit/assign.hpp"
#include "strainsplit/hypothesis.hpp"
#include "strainsplit/mixture.hpp"
#include "strainsplit/report.hpp"
#include "strainsplit/types.hpp"

namespace strainsplit {

enum class AssignRule { Map, GaussianVote, Binomial };

std::string to_string(AssignRule rule);
AssignRule assign_rule_from_string(const std::string& text);

struct RunConfig {
    double alpha = 0.05;
    FilterConfig filter;
    int n_strains = 2;
    MixtureFamily family = MixtureFamily::Gaussian;
    PairingMode pairing = PairingMode::Complement;
    AssignRule rule = AssignRule::Map;
    std::optional<std::string> regions_path;
    std::string output_dir = ".";
    std::uint64_t seed = 0;
    unsigned threads = 1;

    void validate() const;
};

struct Analysis {
    SampleProfile profile;
    HypothesisResult test;
    std::optional<FrequencyObservations> observations;
    std::optional<MixtureModel> model;
    std::optional<ProportionEstimate> estimate;
    Report report;
};

/// Pileup, filters, likelihood-ratio call and, for a mixed call, the mixture
/// fit and proportions. Empty regions mean the whole reference.
Analysis analyze_sample(std::span<const AlignedRead> reads, std::int64_t ref_length, std::vector<Interval> regions,
                        const RunConfig& config, const std::string& sample_id);

struct Separation {
    Analysis analysis;
    std::vector<StrainAssignment> assignments;  ///< variant-bearing reads, input order
    std::vector<std::vector<AlignedRead>> strain_reads;
    std::vector<std::string> consensus;
};

/// A pure call (or a mixed call without a usable proportion estimate) yields
/// a single strain holding every read.
Separation separate_sample(std::span<const AlignedRead> reads, const std::string& reference,
                           std::vector<Interval> regions, const RunConfig& config, const std::string& sample_id);

/// Strain-level model used for read assignment: one component per strain,
/// mean 100 * proportion.
MixtureModel strain_model(const ProportionEstimate& estimate, MixtureFamily family);

void write_assignments_tsv(std::ostream& out, std::span<const StrainAssignment> assignments, int n_strains);

struct AssignmentRow {
    std::string read_id;
    std::optional<int> strain;
};
std::vector<AssignmentRow> read_assignments_tsv(std::istream& in);

/// Builds the evaluation over a set of sample directories holding truth.json
/// and report.json, plus assignments.tsv and consensus FASTA when present.
EvaluationSummary evaluate_panel(const std::string& panel_dir);

// File-level commands. Each writes into config.output_dir.
Report cmd_detect(const RunConfig& config, const std::string& sam_path, const std::string& ref_path,
                  const std::string& sample_id = "");
Report cmd_separate(const RunConfig& config, const std::string& sam_path, const std::string& ref_path,
                    const std::string& sample_id = "");
void cmd_simulate(const SyntheticSpec& spec, const std::string& output_dir);
EvaluationSummary cmd_evaluate(const std::string& panel_dir, const std::string& output_dir);

}  // namespace strainsplit
