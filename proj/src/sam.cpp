#include "strainsplit/sam.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

namespace strainsplit {

namespace {

constexpr std::uint16_t kFlagPaired = 0x1;
constexpr std::uint16_t kFlagUnmapped = 0x4;
constexpr std::uint16_t kFlagMateUnmapped = 0x8;
constexpr std::uint16_t kFlagSecondMate = 0x80;
constexpr std::uint16_t kFlagSecondary = 0x100;
constexpr std::uint16_t kFlagQcFail = 0x200;
constexpr std::uint16_t kFlagDuplicate = 0x400;

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return fields;
}

template <typename Int>
bool parse_int(std::string_view text, Int& value) {
    if (text.empty()) return false;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    return ec == std::errc() && ptr == last;
}

void parse_header_line(std::string_view line, SamHeader& header) {
    header.lines.emplace_back(line);
    if (!line.starts_with("@SQ") || !header.ref_name.empty()) return;
    for (auto field : split_tabs(line)) {
        if (field.starts_with("SN:")) {
            header.ref_name = std::string(field.substr(3));
        } else if (field.starts_with("LN:")) {
            std::int64_t length = 0;
            if (parse_int(field.substr(3), length)) header.ref_length = length;
        }
    }
}

}  // namespace

std::vector<CigarOp> parse_cigar(std::string_view text) {
    std::vector<CigarOp> ops;
    if (text == "*") return ops;
    std::uint64_t length = 0;
    bool have_digits = false;
    for (char c : text) {
        if (c >= '0' && c <= '9') {
            length = length * 10 + static_cast<std::uint64_t>(c - '0');
            have_digits = true;
            continue;
        }
        if (!have_digits) throw ParseError("CIGAR operation '" + std::string(1, c) + "' without length");
        CigarKind kind;
        switch (c) {
            case 'M': case '=': case 'X': kind = CigarKind::Match; break;
            case 'I': kind = CigarKind::Insertion; break;
            case 'D': kind = CigarKind::Deletion; break;
            case 'S': kind = CigarKind::SoftClip; break;
            case 'H': kind = CigarKind::HardClip; break;
            default: throw ParseError("unknown CIGAR operation '" + std::string(1, c) + "'");
        }
        ops.push_back({kind, static_cast<std::uint32_t>(length)});
        length = 0;
        have_digits = false;
    }
    if (have_digits) throw ParseError("CIGAR ends with a dangling length");
    return ops;
}

std::string format_cigar(std::span<const CigarOp> cigar) {
    if (cigar.empty()) return "*";
    std::string out;
    for (const auto& op : cigar) {
        out += std::to_string(op.length);
        switch (op.kind) {
            case CigarKind::Match: out += 'M'; break;
            case CigarKind::Insertion: out += 'I'; break;
            case CigarKind::Deletion: out += 'D'; break;
            case CigarKind::SoftClip: out += 'S'; break;
            case CigarKind::HardClip: out += 'H'; break;
        }
    }
    return out;
}

SamData parse_alignment(std::istream& in, int min_map_quality) {
    SamData data;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '@') {
            parse_header_line(line, data.header);
            continue;
        }
        ++data.records;
        const auto fields = split_tabs(line);
        if (fields.size() < 11) {
            throw ParseError(line_no, "expected at least 11 tab-separated columns, found " +
                                          std::to_string(fields.size()));
        }
        AlignedRead read;
        read.read_id = std::string(fields[0]);
        if (!parse_int(fields[1], read.flag)) throw ParseError(line_no, "invalid FLAG '" + std::string(fields[1]) + "'");
        read.ref_name = std::string(fields[2]);
        std::int64_t pos = 0;
        if (!parse_int(fields[3], pos) || pos < 0) throw ParseError(line_no, "invalid POS '" + std::string(fields[3]) + "'");
        if (!parse_int(fields[4], read.map_quality) || read.map_quality < 0) {
            throw ParseError(line_no, "invalid MAPQ '" + std::string(fields[4]) + "'");
        }
        try {
            read.cigar = parse_cigar(fields[5]);
        } catch (const ParseError& e) {
            throw ParseError(line_no, e.what());
        }
        read.mate_ref_name = std::string(fields[6]);
        if (!parse_int(fields[7], read.mate_position)) throw ParseError(line_no, "invalid PNEXT '" + std::string(fields[7]) + "'");
        if (!parse_int(fields[8], read.template_length)) throw ParseError(line_no, "invalid TLEN '" + std::string(fields[8]) + "'");
        if (fields[9] != "*") read.bases = std::string(fields[9]);
        if (fields[10] == "*") {
            read.has_qualities = false;
            read.base_qualities.assign(read.bases.size(), 0);
        } else {
            if (fields[10].size() != read.bases.size()) {
                throw ParseError(line_no, "SEQ and QUAL lengths differ");
            }
            read.base_qualities.reserve(fields[10].size());
            for (char q : fields[10]) {
                if (q < 33 || q > 126) throw ParseError(line_no, "QUAL character out of range");
                read.base_qualities.push_back(static_cast<std::uint8_t>(q - 33));
            }
        }
        for (std::size_t i = 11; i < fields.size(); ++i) {
            if (i > 11) read.tags += '\t';
            read.tags += fields[i];
        }

        read.mate = (read.flag & kFlagSecondMate) ? Mate::Second : Mate::First;
        read.is_mapped = !(read.flag & kFlagUnmapped);
        read.mate_is_mapped = !((read.flag & kFlagPaired) && (read.flag & kFlagMateUnmapped));
        read.ref_start = pos > 0 ? pos - 1 : 0;

        if (read.is_mapped) {
            if (read.cigar.empty()) throw ParseError(line_no, "mapped record without CIGAR");
            std::uint64_t read_length = 0;
            for (const auto& op : read.cigar) {
                if (op.consumes_read()) read_length += op.length;
            }
            if (read_length != read.bases.size()) {
                throw ParseError(line_no, "CIGAR read length " + std::to_string(read_length) +
                                              " does not match SEQ length " + std::to_string(read.bases.size()));
            }
        }

        const bool keep = read.is_mapped && read.mate_is_mapped && read.map_quality >= min_map_quality &&
                          !(read.flag & (kFlagSecondary | kFlagQcFail | kFlagDuplicate));
        if (keep) {
            data.reads.push_back(std::move(read));
        } else {
            ++data.excluded;
        }
    }
    return data;
}

SamData parse_alignment_file(const std::string& path, int min_map_quality) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open alignment file '" + path + "'");
    return parse_alignment(in, min_map_quality);
}

void write_sam_record(std::ostream& out, const AlignedRead& read) {
    out << read.read_id << '\t' << read.flag << '\t' << read.ref_name << '\t'
        << (read.is_mapped ? read.ref_start + 1 : 0) << '\t' << read.map_quality << '\t'
        << format_cigar(read.cigar) << '\t' << read.mate_ref_name << '\t' << read.mate_position << '\t'
        << read.template_length << '\t' << (read.bases.empty() ? "*" : read.bases) << '\t';
    if (!read.has_qualities || read.bases.empty()) {
        out << '*';
    } else {
        for (auto q : read.base_qualities) out << static_cast<char>(q + 33);
    }
    if (!read.tags.empty()) out << '\t' << read.tags;
    out << '\n';
}

void write_sam(std::ostream& out, const SamHeader& header, std::span<const AlignedRead> reads) {
    for (const auto& line : header.lines) out << line << '\n';
    for (const auto& read : reads) write_sam_record(out, read);
}

SamHeader make_header(const std::string& ref_name, std::int64_t ref_length) {
    SamHeader header;
    header.ref_name = ref_name;
    header.ref_length = ref_length;
    header.lines.push_back("@HD\tVN:1.6\tSO:unsorted");
    header.lines.push_back("@SQ\tSN:" + ref_name + "\tLN:" + std::to_string(ref_length));
    return header;
}

}  // namespace strainsplit
