#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace strainsplit {

/// Nucleotides in the fixed order used for tie-breaking everywhere: A < C < G < T.
inline constexpr std::array<char, 4> kBases{'A', 'C', 'G', 'T'};

/// Index of a nucleotide in kBases, or nullopt for N and anything else.
constexpr std::optional<int> base_index(char c) {
    switch (c) {
        case 'A': case 'a': return 0;
        case 'C': case 'c': return 1;
        case 'G': case 'g': return 2;
        case 'T': case 't': return 3;
        default: return std::nullopt;
    }
}

enum class CigarKind : std::uint8_t { Match, Insertion, Deletion, SoftClip, HardClip };

struct CigarOp {
    CigarKind kind = CigarKind::Match;
    std::uint32_t length = 0;

    bool consumes_read() const {
        return kind == CigarKind::Match || kind == CigarKind::Insertion || kind == CigarKind::SoftClip;
    }
    bool consumes_reference() const {
        return kind == CigarKind::Match || kind == CigarKind::Deletion;
    }
    friend bool operator==(const CigarOp&, const CigarOp&) = default;
};

enum class Mate : std::uint8_t { First, Second };

/// One aligned read. The SAM passthrough fields keep records writable
/// without loss when reads are partitioned per strain.
struct AlignedRead {
    std::string read_id;
    Mate mate = Mate::First;
    std::int64_t ref_start = 0;  ///< 0-based leftmost aligned reference position
    std::vector<CigarOp> cigar;
    std::string bases;
    std::vector<std::uint8_t> base_qualities;  ///< Phred scores, parallel to bases
    int map_quality = 0;
    bool is_mapped = true;
    bool mate_is_mapped = true;

    std::uint16_t flag = 0;
    std::string ref_name = "*";
    std::string mate_ref_name = "*";
    std::int64_t mate_position = 0;  ///< 1-based as in SAM, 0 when absent
    std::int64_t template_length = 0;
    bool has_qualities = true;  ///< false when the SAM QUAL column was '*'
    std::string tags;           ///< optional columns, tab-joined, verbatim

    /// Exclusive end of the reference span covered by the alignment.
    std::int64_t ref_end() const {
        std::int64_t end = ref_start;
        for (const auto& op : cigar) {
            if (op.consumes_reference()) end += op.length;
        }
        return end;
    }

    friend bool operator==(const AlignedRead&, const AlignedRead&) = default;
};

/// Half-open 0-based reference interval [begin, end).
struct Interval {
    std::int64_t begin = 0;
    std::int64_t end = 0;

    bool contains(std::int64_t pos) const { return pos >= begin && pos < end; }
    std::int64_t length() const { return end - begin; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Per-position feature vector: base percentages plus depth.
struct SiteFeature {
    std::int64_t position = 0;
    std::array<std::uint32_t, 4> counts{};
    std::array<double, 4> percent{};
    std::uint32_t depth = 0;

    /// Percentage of the second most frequent base (0 for monoallelic sites).
    double second_percent() const;

    friend bool operator==(const SiteFeature&, const SiteFeature&) = default;
};

struct FilterConfig {
    double kappa = 0.70;           ///< depth filter as a fraction of mean depth
    double noise_threshold = 10.0; ///< minimum allele percentage for a processed variant
    int min_map_quality = 1;
    bool depth_filter = true;

    void validate() const;
};

struct SampleProfile {
    std::vector<SiteFeature> sites;           ///< all covered positions, ascending
    double mean_depth = 0.0;                  ///< over sites inside regions, before depth filtering
    std::vector<SiteFeature> filtered_sites;  ///< after region, depth and noise filters
    std::vector<Interval> regions;
};

/// Malformed input. Carries the 1-based line number when one applies.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    explicit ParseError(const std::string& what) : std::runtime_error(what), line_(0) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

}  // namespace strainsplit
