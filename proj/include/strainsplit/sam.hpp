#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "strainsplit/types.hpp"

namespace strainsplit {

struct SamHeader {
    std::vector<std::string> lines;  ///< verbatim '@' lines, written back on output
    std::string ref_name;            ///< first @SQ SN
    std::int64_t ref_length = 0;     ///< first @SQ LN, 0 when absent
};

struct SamData {
    SamHeader header;
    std::vector<AlignedRead> reads;  ///< records that passed the mapping filters, input order
    std::size_t records = 0;         ///< alignment records seen
    std::size_t excluded = 0;        ///< records dropped by the filters
};

std::vector<CigarOp> parse_cigar(std::string_view text);
std::string format_cigar(std::span<const CigarOp> cigar);

/// Reads the SAM text subset: header lines plus 11 mandatory columns per record.
/// Keeps a record only when it and its mate are mapped, it is neither secondary,
/// QC-failed nor a duplicate, and its mapping quality is at least min_map_quality.
/// Throws ParseError naming the offending line.
SamData parse_alignment(std::istream& in, int min_map_quality = 1);
SamData parse_alignment_file(const std::string& path, int min_map_quality = 1);

void write_sam_record(std::ostream& out, const AlignedRead& read);
void write_sam(std::ostream& out, const SamHeader& header, std::span<const AlignedRead> reads);

/// Minimal header for a single reference contig.
SamHeader make_header(const std::string& ref_name, std::int64_t ref_length);

}  // namespace strainsplit
