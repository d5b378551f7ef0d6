#include "strainsplit/fasta.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "strainsplit/types.hpp"

namespace strainsplit {

std::vector<FastaRecord> read_fasta(std::istream& in) {
    std::vector<FastaRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '>') {
            auto name = line.substr(1);
            if (auto space = name.find_first_of(" \t"); space != std::string::npos) name.resize(space);
            records.push_back({std::move(name), {}});
            continue;
        }
        if (records.empty()) throw ParseError(line_no, "sequence data before the first '>' header");
        for (char c : line) {
            if (std::isspace(static_cast<unsigned char>(c))) continue;
            records.back().sequence += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        }
    }
    return records;
}

std::vector<FastaRecord> read_fasta_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open FASTA file '" + path + "'");
    return read_fasta(in);
}

void write_fasta(std::ostream& out, const std::vector<FastaRecord>& records, std::size_t line_width) {
    for (const auto& record : records) {
        out << '>' << record.name << '\n';
        for (std::size_t i = 0; i < record.sequence.size(); i += line_width) {
            out << record.sequence.substr(i, line_width) << '\n';
        }
    }
}

void write_fasta_file(const std::string& path, const std::vector<FastaRecord>& records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write FASTA file '" + path + "'");
    write_fasta(out, records);
}

}  // namespace strainsplit
