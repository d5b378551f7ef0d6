#include "strainsplit/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "strainsplit/random.hpp"

namespace strainsplit {

namespace {

constexpr std::uint64_t kReferenceStream = 0;
constexpr std::uint64_t kStrainStream = 1;
constexpr std::uint64_t kReadStream = 100;
constexpr std::uint8_t kPlaceholderQuality = 30;

char substitute(Rng& rng, char base) {
    const auto b = base_index(base).value_or(0);
    return kBases[static_cast<std::size_t>((b + 1 + static_cast<int>(rng.below(3))) % 4)];
}

}  // namespace

void SyntheticSpec::validate() const {
    if (ref_length <= 0) throw std::invalid_argument("ref_length must be positive");
    if (n_strains < 1 || n_strains > 3) throw std::invalid_argument("n_strains must be 1, 2 or 3");
    if (snps_per_strain < 1) throw std::invalid_argument("snps_per_strain must be >= 1");
    if (static_cast<std::int64_t>(snps_per_strain) * n_strains > ref_length)
        throw std::invalid_argument("more SNPs than reference positions");
    if (static_cast<int>(proportions.size()) != n_strains)
        throw std::invalid_argument("proportions must have one entry per strain");
    double total = 0.0;
    for (double p : proportions) {
        if (!(p >= 0.0)) throw std::invalid_argument("proportions must be non-negative");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("proportions must sum to 1");
    if (!(depth > 0.0)) throw std::invalid_argument("depth must be positive");
    if (read_length < 1 || read_length > ref_length)
        throw std::invalid_argument("read_length must be in [1, ref_length]");
    if (!(error_rate >= 0.0 && error_rate <= 1.0)) throw std::invalid_argument("error_rate must be in [0, 1]");
}

std::vector<std::int64_t> GroundTruth::variant_positions() const {
    std::set<std::int64_t> positions;
    for (const auto& strain : snps) {
        for (const auto& s : strain) positions.insert(s.position);
    }
    return {positions.begin(), positions.end()};
}

std::string generate_reference(std::int64_t length, std::uint64_t seed) {
    if (length <= 0) throw std::invalid_argument("reference length must be positive");
    Rng rng(seed);
    std::string seq(static_cast<std::size_t>(length), 'A');
    for (auto& c : seq) c = kBases[rng.below(4)];
    return seq;
}

MutatedStrain mutate_strain(const std::string& reference, int n_snps, std::uint64_t seed,
                            std::span<const std::int64_t> excluded) {
    const auto length = static_cast<std::int64_t>(reference.size());
    std::vector<bool> taken(reference.size(), false);
    std::int64_t available = length;
    for (auto pos : excluded) {
        if (pos >= 0 && pos < length && !taken[static_cast<std::size_t>(pos)]) {
            taken[static_cast<std::size_t>(pos)] = true;
            --available;
        }
    }
    if (n_snps < 0 || n_snps > available) throw std::invalid_argument("n_snps exceeds available positions");

    Rng rng(seed);
    MutatedStrain out{reference, {}};
    out.snps.reserve(static_cast<std::size_t>(n_snps));
    while (static_cast<int>(out.snps.size()) < n_snps) {
        const auto pos = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(length)));
        if (taken[static_cast<std::size_t>(pos)]) continue;
        taken[static_cast<std::size_t>(pos)] = true;
        const char ref = reference[static_cast<std::size_t>(pos)];
        const char alt = substitute(rng, ref);
        out.genome[static_cast<std::size_t>(pos)] = alt;
        out.snps.push_back({pos, ref, alt});
    }
    std::sort(out.snps.begin(), out.snps.end(), [](const Snp& a, const Snp& b) { return a.position < b.position; });
    return out;
}

SimulatedReads simulate_reads(const GroundTruth& truth, const SyntheticSpec& spec) {
    spec.validate();
    if (truth.strain_genomes.size() != static_cast<std::size_t>(spec.n_strains))
        throw std::invalid_argument("ground truth strain count differs from spec");

    const std::int64_t L = spec.ref_length;
    const std::int64_t len = spec.read_length;
    const auto n_reads = static_cast<std::int64_t>(std::llround(spec.depth * static_cast<double>(L) / len));
    const auto span = static_cast<std::uint64_t>(L + len - 1);

    std::vector<double> cumulative(spec.proportions.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < cumulative.size(); ++k) cumulative[k] = acc += spec.proportions[k];
    cumulative.back() = 1.0;

    Rng rng(mix_seed(spec.seed, kReadStream));
    SimulatedReads out;
    out.reads.reserve(static_cast<std::size_t>(n_reads));
    char name[32];
    for (std::int64_t r = 0; r < n_reads; ++r) {
        const double u = rng.uniform();
        int strain = 0;
        while (u >= cumulative[static_cast<std::size_t>(strain)]) ++strain;
        const auto& genome = truth.strain_genomes[static_cast<std::size_t>(strain)];

        const std::int64_t raw_start = static_cast<std::int64_t>(rng.below(span)) - (len - 1);
        const std::int64_t begin = std::max<std::int64_t>(raw_start, 0);
        const std::int64_t end = std::min<std::int64_t>(raw_start + len, L);

        AlignedRead read;
        std::snprintf(name, sizeof name, "sim%07lld", static_cast<long long>(r));
        read.read_id = name;
        read.ref_start = begin;
        read.cigar = {{CigarKind::Match, static_cast<std::uint32_t>(end - begin)}};
        read.bases = genome.substr(static_cast<std::size_t>(begin), static_cast<std::size_t>(end - begin));
        for (auto& b : read.bases) {
            if (rng.uniform() < spec.error_rate) b = substitute(rng, b);
        }
        read.base_qualities.assign(read.bases.size(), kPlaceholderQuality);
        read.map_quality = 60;
        read.flag = 0x1 | 0x2 | 0x40;
        read.ref_name = kSimulatedContig;
        read.mate_ref_name = "=";
        read.mate_position = begin + 1;
        out.read_provenance.emplace(read.read_id, strain);
        out.reads.push_back(std::move(read));
    }
    return out;
}

SimulatedSample make_sample(const SyntheticSpec& spec) {
    spec.validate();
    SimulatedSample sample;
    auto& truth = sample.truth;
    truth.reference = generate_reference(spec.ref_length, mix_seed(spec.seed, kReferenceStream));
    truth.proportions = spec.proportions;
    std::vector<std::int64_t> used;
    for (int k = 0; k < spec.n_strains; ++k) {
        auto strain = mutate_strain(truth.reference, spec.snps_per_strain,
                                    mix_seed(spec.seed, kStrainStream + static_cast<std::uint64_t>(k)), used);
        for (const auto& s : strain.snps) used.push_back(s.position);
        truth.strain_genomes.push_back(std::move(strain.genome));
        truth.snps.push_back(std::move(strain.snps));
    }
    auto reads = simulate_reads(truth, spec);
    truth.read_provenance = std::move(reads.read_provenance);
    sample.reads = std::move(reads.reads);
    return sample;
}

}  // namespace strainsplit
