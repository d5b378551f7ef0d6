#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "helpers.hpp"
#include "strainsplit/assign.hpp"
#include "strainsplit/mixture.hpp"
#include "strainsplit/pileup.hpp"
#include "strainsplit/random.hpp"
#include "strainsplit/simulate.hpp"

using namespace strainsplit;
using testing_helpers::matched_read;
using testing_helpers::site;

namespace {

ReadVariantProfile profile(std::initializer_list<std::pair<std::uint32_t, std::uint32_t>> evidence) {
    ReadVariantProfile p{"r", {}};
    std::int64_t pos = 0;
    for (auto [x, d] : evidence) p.sites.push_back({pos++, x, d});
    return p;
}

MixtureModel gaussian_model(std::vector<MixtureComponent> c) {
    MixtureModel m;
    m.family = MixtureFamily::Gaussian;
    m.components = std::move(c);
    return m;
}

struct SampleSites {
    SimulatedSample sample;
    std::vector<SiteFeature> variable;
};

SampleSites sample_with_sites(double major, std::uint64_t seed, std::int64_t length = 10000) {
    SyntheticSpec spec;
    spec.ref_length = length;
    spec.snps_per_strain = 40;
    spec.proportions = {major, 1 - major};
    spec.seed = seed;
    SampleSites s{make_sample(spec), {}};
    const auto prof = filter_profile(build_feature_vectors(s.sample.reads, length), {{0, length}}, FilterConfig{});
    s.variable = select_variable_sites(prof, FilterConfig{}.noise_threshold);
    return s;
}

}  // namespace

TEST(VariantProfile, WitnessProfile) {
    const std::vector<SiteFeature> sites{site(2, 5, 1, 0, 0), site(7, 7, 0, 2, 0)};
    const VariantSites index(sites, 10);
    const auto p = read_variant_profile(matched_read("w", 0, "CCACCCCGCC"), index);
    ASSERT_TRUE(p.has_value());
    EXPECT_EQ(p->sites, (std::vector<ReadSiteEvidence>{{2, 5, 6}, {7, 2, 9}}));
    EXPECT_EQ(assign_binomial(*p), StrainSide::Minor);
    EXPECT_EQ(assign_gaussian_vote(*p), StrainSide::Major);
}

TEST(VariantProfile, NoOverlapOrZeroMapq) {
    const std::vector<SiteFeature> sites{site(2, 5, 1, 0, 0)};
    const VariantSites index(sites, 20);
    EXPECT_FALSE(read_variant_profile(matched_read("a", 5, "ACGTACGT"), index).has_value());
    EXPECT_FALSE(read_variant_profile(matched_read("b", 0, "AAAA", 0), index).has_value());
    // An N or a base no read at the site supports is skipped.
    EXPECT_FALSE(read_variant_profile(matched_read("c", 0, "AANA"), index).has_value());
    EXPECT_FALSE(read_variant_profile(matched_read("d", 0, "AATA"), index).has_value());
}

TEST(VariantProfile, MatchesBruteForceOverlap) {
    const auto s = sample_with_sites(0.7, 41);
    ASSERT_FALSE(s.variable.empty());
    const VariantSites index(s.variable, s.sample.truth.reference.size());
    for (const auto& read : s.sample.reads) {
        std::vector<ReadSiteEvidence> expected;
        for (const auto& v : s.variable) {
            if (v.position < read.ref_start || v.position >= read.ref_end()) continue;
            const auto b = base_index(read.bases[static_cast<std::size_t>(v.position - read.ref_start)]);
            if (!b || v.counts[*b] == 0) continue;
            expected.push_back({v.position, v.counts[*b], v.depth});
        }
        const auto got = read_variant_profile(read, index);
        if (expected.empty()) {
            EXPECT_FALSE(got.has_value()) << read.read_id;
        } else {
            ASSERT_TRUE(got.has_value()) << read.read_id;
            EXPECT_EQ(got->sites, expected) << read.read_id;
        }
    }
}

TEST(Votes, Examples) {
    EXPECT_EQ(assign_binomial(profile({{5, 6}, {2, 9}})), StrainSide::Minor);
    EXPECT_EQ(assign_gaussian_vote(profile({{5, 6}, {2, 9}})), StrainSide::Major);
    EXPECT_EQ(assign_binomial(profile({{7, 7}})), StrainSide::Major);
    EXPECT_EQ(assign_binomial(profile({{3, 8}, {5, 8}})), StrainSide::Major);
    EXPECT_EQ(assign_gaussian_vote(profile({{5, 10}})), StrainSide::Major);
    EXPECT_EQ(assign_gaussian_vote(profile({{1, 3}, {2, 3}})), StrainSide::Major);
}

TEST(Votes, EquivalentUnderUniformDepth) {
    Rng rng(1);
    for (int t = 0; t < 5000; ++t) {
        const auto d = static_cast<std::uint32_t>(1 + rng.below(120));
        ReadVariantProfile p{"r", {}};
        const auto n = 1 + rng.below(6);
        for (std::uint64_t i = 0; i < n; ++i)
            p.sites.push_back({static_cast<std::int64_t>(i), static_cast<std::uint32_t>(1 + rng.below(d)), d});
        EXPECT_EQ(assign_binomial(p), assign_gaussian_vote(p));
    }
}

TEST(Votes, BinomialInvariantToSiteOrder) {
    Rng rng(2);
    for (int t = 0; t < 1000; ++t) {
        ReadVariantProfile p{"r", {}};
        for (int i = 0; i < 5; ++i) {
            const auto d = static_cast<std::uint32_t>(1 + rng.below(50));
            p.sites.push_back({i, static_cast<std::uint32_t>(1 + rng.below(d)), d});
        }
        auto q = p;
        std::reverse(q.sites.begin(), q.sites.end());
        EXPECT_EQ(assign_binomial(p), assign_binomial(q));
        EXPECT_EQ(assign_gaussian_vote(p), assign_gaussian_vote(q));
    }
}

TEST(Map, DensityPeaksAtMean) {
    const auto m = gaussian_model({{70, 8, 0.5}, {30, 8, 0.5}});
    const auto a = assign_map(profile({{70, 100}}), m);
    ASSERT_TRUE(a.strain.has_value());
    EXPECT_EQ(*a.strain, 0);
    EXPECT_NEAR(std::accumulate(a.posterior.begin(), a.posterior.end(), 0.0), 1.0, 1e-9);
    EXPECT_EQ(*assign_map(profile({{30, 100}}), m).strain, 1);
    // Equidistant from both means goes to the larger one.
    EXPECT_EQ(*assign_map(profile({{50, 100}}), m).strain, 0);
}

TEST(Map, MatchesVoteUnderEqualVariance) {
    const auto s = sample_with_sites(0.7, 42);
    const VariantSites index(s.variable, s.sample.truth.reference.size());
    const auto m = gaussian_model({{70, 9, 0.5}, {30, 9, 0.5}});
    std::size_t compared = 0;
    for (const auto& read : s.sample.reads) {
        const auto p = read_variant_profile(read, index);
        if (!p) continue;
        ++compared;
        const bool major = assign_gaussian_vote(*p) == StrainSide::Major;
        EXPECT_EQ(*assign_map(*p, m).strain == 0, major) << read.read_id;
    }
    EXPECT_GT(compared, 100u);
}

TEST(Map, WeightScalingInvariant) {
    Rng rng(3);
    const auto m = gaussian_model({{65, 7, 0.6}, {35, 10, 0.4}});
    auto scaled = m;
    for (auto& c : scaled.components) c.weight *= 7.5;
    for (int t = 0; t < 500; ++t) {
        ReadVariantProfile p{"r", {}};
        for (int i = 0; i < 3; ++i) {
            const auto d = static_cast<std::uint32_t>(20 + rng.below(100));
            p.sites.push_back({i, static_cast<std::uint32_t>(1 + rng.below(d)), d});
        }
        EXPECT_EQ(assign_map(p, m).strain, assign_map(p, scaled).strain);
    }
}

TEST(Map, UnderflowFallsBackToHeaviestComponent) {
    const auto m = gaussian_model({{70, 1e-300, 0.3}, {30, 1e-300, 0.7}});
    const auto a = assign_map(profile({{50, 100}}), m);
    EXPECT_TRUE(a.underflow);
    ASSERT_TRUE(a.strain.has_value());
    EXPECT_EQ(*a.strain, 1);
}

TEST(Partition, UnassignedReadsGoEverywhere) {
    std::vector<AlignedRead> reads;
    for (int i = 0; i < 5; ++i) reads.push_back(matched_read("r" + std::to_string(i), i, "ACGT"));
    const auto none = partition_reads(reads, {}, 2);
    ASSERT_EQ(none.size(), 2u);
    EXPECT_EQ(none[0], reads);
    EXPECT_EQ(none[1], reads);

    std::vector<StrainAssignment> as(3);
    as[0].read_index = 0, as[0].strain = 0;
    as[1].read_index = 2, as[1].strain = 1;
    as[2].read_index = 3;
    const auto parts = partition_reads(reads, as, 2);
    std::set<std::string> a, b;
    for (const auto& r : parts[0]) a.insert(r.read_id);
    for (const auto& r : parts[1]) b.insert(r.read_id);
    EXPECT_EQ(a, (std::set<std::string>{"r0", "r1", "r3", "r4"}));
    EXPECT_EQ(b, (std::set<std::string>{"r1", "r2", "r3", "r4"}));
    EXPECT_EQ(parts[0].front().read_id, "r0");
}

TEST(Partition, ConservesSimulatedReads) {
    const auto s = sample_with_sites(0.7, 43);
    const VariantSites index(s.variable, s.sample.truth.reference.size());
    std::vector<StrainAssignment> as;
    for (std::size_t i = 0; i < s.sample.reads.size(); ++i) {
        const auto p = read_variant_profile(s.sample.reads[i], index);
        if (!p) continue;
        StrainAssignment a;
        a.read_index = i;
        a.read_id = s.sample.reads[i].read_id;
        a.strain = assign_gaussian_vote(*p) == StrainSide::Major ? 0 : 1;
        as.push_back(a);
    }
    const auto parts = partition_reads(s.sample.reads, as, 2);
    std::multiset<std::string> all, both;
    std::set<std::string> in0, in1;
    for (const auto& r : parts[0]) in0.insert(r.read_id);
    for (const auto& r : parts[1]) in1.insert(r.read_id);
    for (const auto& r : s.sample.reads) {
        EXPECT_TRUE(in0.count(r.read_id) || in1.count(r.read_id));
    }
    std::size_t shared = 0;
    for (const auto& id : in0) shared += in1.count(id);
    EXPECT_EQ(shared, s.sample.reads.size() - as.size());
    EXPECT_EQ(parts[0].size() + parts[1].size(), s.sample.reads.size() + shared);

    // Reads carrying a strain's private allele follow that strain.
    std::size_t correct = 0;
    for (const auto& a : as) correct += s.sample.truth.read_provenance.at(a.read_id) == *a.strain;
    EXPECT_GT(static_cast<double>(correct) / as.size(), 0.9);
}

TEST(Consensus, ReferenceAllelesAndTies) {
    const std::string ref = "ACGTACGTAC";
    EXPECT_EQ(consensus_sequence(std::vector<AlignedRead>{}, ref), ref);
    std::vector<AlignedRead> reads{matched_read("a", 0, "ACGTACGTAC"), matched_read("b", 2, "GTACG")};
    EXPECT_EQ(consensus_sequence(reads, ref), ref);

    reads = {matched_read("a", 3, "A"), matched_read("b", 3, "A"), matched_read("c", 5, "G"), matched_read("d", 5, "C")};
    auto expect = ref;
    expect[3] = 'A';
    EXPECT_EQ(consensus_sequence(reads, ref), expect);  // position 5 is a C/G tie including the reference C
}

TEST(Consensus, SeparableSampleRecoversGenomes) {
    const auto s = sample_with_sites(0.7, 44);
    const VariantSites index(s.variable, s.sample.truth.reference.size());
    std::vector<StrainAssignment> as;
    for (std::size_t i = 0; i < s.sample.reads.size(); ++i) {
        const auto p = read_variant_profile(s.sample.reads[i], index);
        if (!p) continue;
        as.push_back({i, s.sample.reads[i].read_id, assign_gaussian_vote(*p) == StrainSide::Major ? 0 : 1, {}, {}, false});
    }
    const auto parts = partition_reads(s.sample.reads, as, 2);
    for (int k = 0; k < 2; ++k) {
        const auto cons = consensus_sequence(parts[k], s.sample.truth.reference);
        std::size_t mismatch = 0;
        for (auto pos : s.sample.truth.variant_positions()) mismatch += cons[pos] != s.sample.truth.strain_genomes[k][pos];
        EXPECT_EQ(mismatch, 0u) << k;
    }
}

TEST(MateConsistency, Fractions) {
    std::vector<StrainAssignment> as{{0, "p", 0, {}, {}, false}, {1, "p", 0, {}, {}, false},
                                     {2, "q", 0, {}, {}, false}, {3, "q", 1, {}, {}, false},
                                     {4, "s", 1, {}, {}, false}};
    EXPECT_DOUBLE_EQ(*mate_consistency(as), 0.5);
    EXPECT_FALSE(mate_consistency(std::span(as).subspan(4)).has_value());
}
