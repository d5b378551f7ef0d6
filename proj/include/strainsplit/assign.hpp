#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "strainsplit/mixture.hpp"
#include "strainsplit/types.hpp"

namespace strainsplit {

struct ReadSiteEvidence {
    std::int64_t position = 0;
    std::uint32_t support = 0;  ///< pileup count of the base this read carries
    std::uint32_t depth = 0;

    double percent() const { return 100.0 * support / depth; }
    friend bool operator==(const ReadSiteEvidence&, const ReadSiteEvidence&) = default;
};

struct ReadVariantProfile {
    std::string read_id;
    std::vector<ReadSiteEvidence> sites;  ///< strictly increasing positions
};

/// Dense lookup from reference position to variable site.
class VariantSites {
public:
    VariantSites(std::span<const SiteFeature> variable_sites, std::int64_t ref_length);

    const SiteFeature* at(std::int64_t position) const {
        if (position < 0 || position >= static_cast<std::int64_t>(slot_.size())) return nullptr;
        const auto s = slot_[static_cast<std::size_t>(position)];
        return s < 0 ? nullptr : &sites_[static_cast<std::size_t>(s)];
    }
    std::size_t size() const { return sites_.size(); }
    std::span<const SiteFeature> sites() const { return sites_; }

private:
    std::vector<SiteFeature> sites_;
    std::vector<std::int32_t> slot_;
};

/// Filtered sites whose second allele reaches the noise threshold.
std::vector<SiteFeature> select_variable_sites(const SampleProfile& profile, double noise_threshold);

/// Variable sites the read covers with an aligned A/C/G/T base, or nullopt when
/// it covers none or has map quality 0.
std::optional<ReadVariantProfile> read_variant_profile(const AlignedRead& read, const VariantSites& sites);

enum class StrainSide { Major, Minor };

/// Unweighted vote: major iff sum(2x - d) >= 0.
StrainSide assign_binomial(const ReadVariantProfile& profile);
/// Depth-normalized vote: major iff sum(2x/d - 1) >= 0.
StrainSide assign_gaussian_vote(const ReadVariantProfile& profile);

struct StrainAssignment {
    std::size_t read_index = 0;  ///< position of the read in the input list
    std::string read_id;
    std::optional<int> strain;           ///< nullopt when unassigned
    std::vector<double> log_scores;      ///< log w_k + sum log f, when computed
    std::vector<double> posterior;       ///< softmax of log_scores
    bool underflow = false;
};

/// Naive Bayes MAP over the model's components, with the means normalized by
/// their sum (sigmas scaled alike) before evaluation. Ties within 1e-9 in log
/// score go to the larger mean. When every score underflows, falls back to
/// the largest-weight component and sets underflow.
StrainAssignment assign_map(const ReadVariantProfile& profile, const MixtureModel& model);

/// Strain k output: reads assigned to k plus every unassigned read, input order.
std::vector<std::vector<AlignedRead>> partition_reads(std::span<const AlignedRead> reads,
                                                      std::span<const StrainAssignment> assignments,
                                                      int n_strains);

/// Per-position majority base; uncovered positions and ties involving the
/// reference base keep the reference base.
std::string consensus_sequence(std::span<const AlignedRead> strain_reads, const std::string& reference);

/// Fraction of read pairs with both mates assigned that received the same
/// strain; nullopt when no such pair exists.
std::optional<double> mate_consistency(std::span<const StrainAssignment> assignments);

}  // namespace strainsplit
