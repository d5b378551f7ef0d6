#include "strainsplit/regions.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>

namespace strainsplit {

namespace {

std::int64_t parse_coordinate(std::string_view text, std::size_t line_no, const char* column) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
        throw ParseError(line_no, std::string("non-integer ") + column + " coordinate '" + std::string(text) + "'");
    }
    if (value < 1) throw ParseError(line_no, std::string(column) + " coordinate must be >= 1");
    return value;
}

}  // namespace

std::vector<Interval> merge_intervals(std::vector<Interval> intervals) {
    std::sort(intervals.begin(), intervals.end(),
              [](const Interval& a, const Interval& b) { return a.begin < b.begin || (a.begin == b.begin && a.end < b.end); });
    std::vector<Interval> merged;
    for (const auto& interval : intervals) {
        if (!merged.empty() && interval.begin < merged.back().end) {
            merged.back().end = std::max(merged.back().end, interval.end);
        } else {
            merged.push_back(interval);
        }
    }
    return merged;
}

std::vector<Interval> parse_regions(std::istream& in) {
    std::vector<Interval> intervals;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.starts_with("##FASTA")) break;
        if (line.empty() || line.front() == '#') continue;

        std::vector<std::string_view> fields;
        std::string_view rest(line);
        for (int i = 0; i < 5; ++i) {
            const auto tab = rest.find('\t');
            fields.push_back(rest.substr(0, tab));
            if (tab == std::string_view::npos) break;
            rest.remove_prefix(tab + 1);
        }
        if (fields.size() < 5) throw ParseError(line_no, "expected at least 5 tab-separated GFF columns");

        const auto start = parse_coordinate(fields[3], line_no, "start");
        const auto end = parse_coordinate(fields[4], line_no, "end");
        if (start > end) throw ParseError(line_no, "start > end");
        intervals.push_back({start - 1, end});
    }
    return merge_intervals(std::move(intervals));
}

std::vector<Interval> parse_regions_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open regions file '" + path + "'");
    return parse_regions(in);
}

bool in_regions(std::span<const Interval> sorted_regions, std::int64_t position) {
    auto it = std::upper_bound(sorted_regions.begin(), sorted_regions.end(), position,
                               [](std::int64_t pos, const Interval& iv) { return pos < iv.begin; });
    if (it == sorted_regions.begin()) return false;
    return std::prev(it)->contains(position);
}

}  // namespace strainsplit
