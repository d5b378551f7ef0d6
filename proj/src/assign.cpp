#include "strainsplit/assign.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "strainsplit/pileup.hpp"

namespace strainsplit {

VariantSites::VariantSites(std::span<const SiteFeature> variable_sites, std::int64_t ref_length)
    : sites_(variable_sites.begin(), variable_sites.end()), slot_(static_cast<std::size_t>(ref_length), -1) {
    for (std::size_t i = 0; i < sites_.size(); ++i) {
        const auto pos = sites_[i].position;
        if (pos < 0 || pos >= ref_length) throw std::out_of_range("variable site outside the reference");
        slot_[static_cast<std::size_t>(pos)] = static_cast<std::int32_t>(i);
    }
}

std::vector<SiteFeature> select_variable_sites(const SampleProfile& profile, double noise_threshold) {
    std::vector<SiteFeature> out;
    for (const auto& site : profile.filtered_sites) {
        if (is_variable_site(site, noise_threshold)) out.push_back(site);
    }
    return out;
}

std::optional<ReadVariantProfile> read_variant_profile(const AlignedRead& read, const VariantSites& sites) {
    if (read.map_quality == 0 || sites.size() == 0) return std::nullopt;
    ReadVariantProfile profile;
    profile.read_id = read.read_id;
    std::int64_t ref_pos = read.ref_start;
    std::size_t read_pos = 0;
    for (const auto& op : read.cigar) {
        if (op.kind == CigarKind::Match) {
            for (std::uint32_t i = 0; i < op.length; ++i) {
                const auto* site = sites.at(ref_pos + i);
                if (site == nullptr) continue;
                const auto b = base_index(read.bases[read_pos + i]);
                if (!b) continue;
                const auto support = site->counts[static_cast<std::size_t>(*b)];
                if (support == 0) continue;
                profile.sites.push_back({site->position, support, site->depth});
            }
        }
        if (op.consumes_read()) read_pos += op.length;
        if (op.consumes_reference()) ref_pos += op.length;
    }
    if (profile.sites.empty()) return std::nullopt;
    return profile;
}

StrainSide assign_binomial(const ReadVariantProfile& profile) {
    std::int64_t vote = 0;
    for (const auto& s : profile.sites) vote += 2 * static_cast<std::int64_t>(s.support) - s.depth;
    return vote >= 0 ? StrainSide::Major : StrainSide::Minor;
}

StrainSide assign_gaussian_vote(const ReadVariantProfile& profile) {
    // Sum of (2x - d) / d. Non-zero sums are at least 1 / prod(d) in magnitude,
    // far above the rounding noise absorbed here.
    double vote = 0.0;
    for (const auto& s : profile.sites) vote += (2.0 * s.support - s.depth) / s.depth;
    const double slack = 1e-12 * static_cast<double>(profile.sites.size());
    return vote >= -slack ? StrainSide::Major : StrainSide::Minor;
}

StrainAssignment assign_map(const ReadVariantProfile& profile, const MixtureModel& model) {
    if (model.components.empty()) throw std::invalid_argument("model has no components");
    StrainAssignment out;
    out.read_id = profile.read_id;
    const std::size_t K = model.K();

    double mean_total = 0.0;
    for (const auto& c : model.components) mean_total += c.mean;
    const double scale = mean_total > 0.0 ? 100.0 / mean_total : 1.0;

    out.log_scores.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        MixtureComponent c = model.components[k];
        c.mean *= scale;
        c.sigma *= scale;
        double score = std::log(c.weight);
        for (const auto& s : profile.sites) score += component_log_density(model.family, c, s.percent(), s.depth);
        out.log_scores[k] = score;
    }

    const double peak = *std::max_element(out.log_scores.begin(), out.log_scores.end());
    if (!std::isfinite(peak)) {
        out.underflow = true;
        std::size_t heaviest = 0;
        for (std::size_t k = 1; k < K; ++k) {
            if (model.components[k].weight > model.components[heaviest].weight) heaviest = k;
        }
        out.strain = static_cast<int>(heaviest);
        out.posterior.assign(K, 0.0);
        out.posterior[heaviest] = 1.0;
        return out;
    }

    std::size_t best = K;
    for (std::size_t k = 0; k < K; ++k) {
        if (out.log_scores[k] < peak - 1e-9) continue;
        if (best == K || model.components[k].mean > model.components[best].mean) best = k;
    }
    out.strain = static_cast<int>(best);

    double total = 0.0;
    out.posterior.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        out.posterior[k] = std::exp(out.log_scores[k] - peak);
        total += out.posterior[k];
    }
    for (auto& p : out.posterior) p /= total;
    return out;
}

std::vector<std::vector<AlignedRead>> partition_reads(std::span<const AlignedRead> reads,
                                                      std::span<const StrainAssignment> assignments,
                                                      int n_strains) {
    if (n_strains < 1) throw std::invalid_argument("n_strains must be >= 1");
    std::vector<int> label(reads.size(), -1);
    for (const auto& a : assignments) {
        if (a.read_index >= reads.size()) throw std::out_of_range("assignment refers to a read past the input");
        if (!a.strain) continue;
        if (*a.strain < 0 || *a.strain >= n_strains) throw std::out_of_range("assigned strain index out of range");
        label[a.read_index] = *a.strain;
    }
    std::vector<std::vector<AlignedRead>> out(static_cast<std::size_t>(n_strains));
    for (std::size_t i = 0; i < reads.size(); ++i) {
        if (label[i] < 0) {
            for (auto& strain : out) strain.push_back(reads[i]);
        } else {
            out[static_cast<std::size_t>(label[i])].push_back(reads[i]);
        }
    }
    return out;
}

std::string consensus_sequence(std::span<const AlignedRead> strain_reads, const std::string& reference) {
    PileupCounter counter(static_cast<std::int64_t>(reference.size()));
    for (const auto& read : strain_reads) counter.add(read);
    std::string consensus = reference;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const auto& c = counter.counts_at(static_cast<std::int64_t>(i));
        const auto top = *std::max_element(c.begin(), c.end());
        if (top == 0) continue;
        const auto ref = base_index(reference[i]);
        if (ref && c[static_cast<std::size_t>(*ref)] == top) continue;
        for (std::size_t b = 0; b < 4; ++b) {
            if (c[b] == top) {
                consensus[i] = kBases[b];
                break;
            }
        }
    }
    return consensus;
}

std::optional<double> mate_consistency(std::span<const StrainAssignment> assignments) {
    std::map<std::string, std::vector<int>> by_name;
    for (const auto& a : assignments) {
        if (a.strain) by_name[a.read_id].push_back(*a.strain);
    }
    std::size_t pairs = 0, agree = 0;
    for (const auto& [name, labels] : by_name) {
        if (labels.size() < 2) continue;
        ++pairs;
        if (std::all_of(labels.begin(), labels.end(), [&](int s) { return s == labels.front(); })) ++agree;
    }
    if (pairs == 0) return std::nullopt;
    return static_cast<double>(agree) / static_cast<double>(pairs);
}

}  // namespace strainsplit
