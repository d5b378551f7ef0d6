#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace strainsplit {

struct FastaRecord {
    std::string name;
    std::string sequence;
};

std::vector<FastaRecord> read_fasta(std::istream& in);
std::vector<FastaRecord> read_fasta_file(const std::string& path);

/// Writes records wrapped at line_width bases per line.
void write_fasta(std::ostream& out, const std::vector<FastaRecord>& records, std::size_t line_width = 70);
void write_fasta_file(const std::string& path, const std::vector<FastaRecord>& records);

}  // namespace strainsplit
