#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "strainsplit/types.hpp"

namespace strainsplit {

/// Reads GFF3 feature lines (columns 4-5, 1-based inclusive) into sorted,
/// merged, half-open 0-based intervals. Comment lines are skipped and the
/// embedded ##FASTA section, when present, ends the feature table.
std::vector<Interval> parse_regions(std::istream& in);
std::vector<Interval> parse_regions_file(const std::string& path);

/// Sorts and merges overlapping intervals.
std::vector<Interval> merge_intervals(std::vector<Interval> intervals);

bool in_regions(std::span<const Interval> sorted_regions, std::int64_t position);

}  // namespace strainsplit
