#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "strainsplit/types.hpp"

namespace strainsplit {

/// Per-position base tally over a single reference contig. Partial counters
/// built over disjoint read subsets merge associatively into the same total.
class PileupCounter {
public:
    explicit PileupCounter(std::int64_t ref_length);

    /// Walks the read's CIGAR. Insertions and soft clips consume read bases
    /// only; deletions consume reference only; N bases are not counted.
    void add(const AlignedRead& read);
    PileupCounter& merge(const PileupCounter& other);

    std::int64_t ref_length() const { return static_cast<std::int64_t>(counts_.size()); }
    const std::array<std::uint32_t, 4>& counts_at(std::int64_t position) const { return counts_.at(position); }

    /// One feature per position with depth > 0, ascending.
    std::vector<SiteFeature> features() const;

private:
    std::vector<std::array<std::uint32_t, 4>> counts_;
};

SiteFeature make_site(std::int64_t position, const std::array<std::uint32_t, 4>& counts);

/// Pileup over all reads. threads > 1 splits the reads into contiguous
/// chunks; the merged output is identical to the single-threaded one.
std::vector<SiteFeature> build_feature_vectors(std::span<const AlignedRead> reads, std::int64_t ref_length,
                                               unsigned threads = 1);

/// Restricts sites to regions, drops sites below kappa * mean_depth and
/// sites whose second allele lies strictly between 0 and the noise threshold.
SampleProfile filter_profile(std::vector<SiteFeature> sites, std::vector<Interval> regions,
                             const FilterConfig& config);

/// Fixed header: position A C G T depth. Positions are written 1-based.
void write_site_tsv(std::ostream& out, std::span<const SiteFeature> sites);

}  // namespace strainsplit
