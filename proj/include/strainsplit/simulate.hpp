#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "strainsplit/types.hpp"

namespace strainsplit {

struct SyntheticSpec {
    std::int64_t ref_length = 50'000;
    int n_strains = 2;
    int snps_per_strain = 100;
    std::vector<double> proportions{0.7, 0.3};
    double depth = 100.0;
    int read_length = 150;
    double error_rate = 0.02;  ///< per-base substitution probability
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument describing the first violated constraint.
    void validate() const;
};

struct Snp {
    std::int64_t position = 0;  ///< 0-based
    char ref = 'N';
    char alt = 'N';
    friend bool operator==(const Snp&, const Snp&) = default;
};

struct GroundTruth {
    std::string reference;
    std::vector<std::string> strain_genomes;
    std::vector<std::vector<Snp>> snps;  ///< per strain, ascending position
    std::vector<double> proportions;
    std::map<std::string, int> read_provenance;

    /// Positions where at least one strain departs from the reference, ascending.
    std::vector<std::int64_t> variant_positions() const;
    friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

std::string generate_reference(std::int64_t length, std::uint64_t seed);

struct MutatedStrain {
    std::string genome;
    std::vector<Snp> snps;
};

/// n_snps distinct positions, uniform over the reference minus `excluded`,
/// each replaced by a uniformly chosen different base.
MutatedStrain mutate_strain(const std::string& reference, int n_snps, std::uint64_t seed,
                            std::span<const std::int64_t> excluded = {});

struct SimulatedReads {
    std::vector<AlignedRead> reads;
    std::map<std::string, int> read_provenance;
};

/// round(depth * ref_length / read_length) reads. Each read picks its strain
/// from the proportions and its start uniformly from
/// [-(read_length - 1), ref_length - 1], clipped to the reference, so coverage
/// stays flat up to both ends. Reads come out aligned at their true positions.
SimulatedReads simulate_reads(const GroundTruth& truth, const SyntheticSpec& spec);

struct SimulatedSample {
    GroundTruth truth;
    std::vector<AlignedRead> reads;
};

/// Reference, strains with disjoint SNP sets, and reads, all derived from spec.seed.
SimulatedSample make_sample(const SyntheticSpec& spec);

inline constexpr const char* kSimulatedContig = "ref";

}  // namespace strainsplit
