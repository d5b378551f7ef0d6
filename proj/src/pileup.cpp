#include "strainsplit/pileup.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <thread>

#include "strainsplit/regions.hpp"

namespace strainsplit {

double SiteFeature::second_percent() const {
    auto sorted = percent;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    return sorted[1];
}

void FilterConfig::validate() const {
    if (!(kappa > 0.0 && kappa <= 1.0)) throw std::invalid_argument("kappa must lie in (0, 1]");
    if (!(noise_threshold >= 0.0 && noise_threshold < 50.0)) {
        throw std::invalid_argument("noise threshold must lie in [0, 50)");
    }
    if (min_map_quality < 0) throw std::invalid_argument("minimum map quality must be >= 0");
}

PileupCounter::PileupCounter(std::int64_t ref_length) {
    if (ref_length < 0) throw std::invalid_argument("reference length must be >= 0");
    counts_.assign(static_cast<std::size_t>(ref_length), {});
}

void PileupCounter::add(const AlignedRead& read) {
    if (read.ref_start < 0 || read.ref_end() > ref_length()) {
        throw std::out_of_range("read '" + read.read_id + "' extends past the reference end");
    }
    std::int64_t ref_pos = read.ref_start;
    std::size_t read_pos = 0;
    for (const auto& op : read.cigar) {
        switch (op.kind) {
            case CigarKind::Match:
                for (std::uint32_t i = 0; i < op.length; ++i) {
                    if (auto b = base_index(read.bases[read_pos + i])) {
                        ++counts_[static_cast<std::size_t>(ref_pos + i)][static_cast<std::size_t>(*b)];
                    }
                }
                ref_pos += op.length;
                read_pos += op.length;
                break;
            case CigarKind::Insertion:
            case CigarKind::SoftClip:
                read_pos += op.length;
                break;
            case CigarKind::Deletion:
                ref_pos += op.length;
                break;
            case CigarKind::HardClip:
                break;
        }
    }
}

PileupCounter& PileupCounter::merge(const PileupCounter& other) {
    if (other.counts_.size() != counts_.size()) throw std::invalid_argument("pileup reference lengths differ");
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        for (std::size_t b = 0; b < 4; ++b) counts_[i][b] += other.counts_[i][b];
    }
    return *this;
}

SiteFeature make_site(std::int64_t position, const std::array<std::uint32_t, 4>& counts) {
    SiteFeature site;
    site.position = position;
    site.counts = counts;
    for (auto c : counts) site.depth += c;
    if (site.depth > 0) {
        for (std::size_t b = 0; b < 4; ++b) site.percent[b] = 100.0 * counts[b] / site.depth;
    }
    return site;
}

std::vector<SiteFeature> PileupCounter::features() const {
    std::vector<SiteFeature> sites;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        const auto& c = counts_[i];
        if (c[0] + c[1] + c[2] + c[3] == 0) continue;
        sites.push_back(make_site(static_cast<std::int64_t>(i), c));
    }
    return sites;
}

std::vector<SiteFeature> build_feature_vectors(std::span<const AlignedRead> reads, std::int64_t ref_length,
                                               unsigned threads) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(reads.size() / 1024 + 1)));
    if (threads == 1) {
        PileupCounter counter(ref_length);
        for (const auto& read : reads) counter.add(read);
        return counter.features();
    }
    std::vector<PileupCounter> partial(threads, PileupCounter(ref_length));
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> workers;
    const std::size_t chunk = (reads.size() + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        workers.emplace_back([&, t] {
            try {
                const auto begin = std::min(reads.size(), t * chunk);
                const auto end = std::min(reads.size(), begin + chunk);
                for (auto i = begin; i < end; ++i) partial[t].add(reads[i]);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    for (unsigned t = 1; t < threads; ++t) partial[0].merge(partial[t]);
    return partial[0].features();
}

SampleProfile filter_profile(std::vector<SiteFeature> sites, std::vector<Interval> regions,
                             const FilterConfig& config) {
    config.validate();
    if (regions.empty()) throw std::invalid_argument("at least one region interval is required");
    SampleProfile profile;
    profile.regions = merge_intervals(std::move(regions));
    profile.sites = std::move(sites);

    std::vector<const SiteFeature*> inside;
    double depth_sum = 0.0;
    for (const auto& site : profile.sites) {
        if (!in_regions(profile.regions, site.position)) continue;
        inside.push_back(&site);
        depth_sum += site.depth;
    }
    profile.mean_depth = inside.empty() ? 0.0 : depth_sum / static_cast<double>(inside.size());
    const double min_depth = config.depth_filter ? config.kappa * profile.mean_depth : 0.0;

    for (const auto* site : inside) {
        if (site->depth == 0 || site->depth < min_depth) continue;
        const double second = site->second_percent();
        if (second > 0.0 && second < config.noise_threshold) continue;
        profile.filtered_sites.push_back(*site);
    }
    return profile;
}

void write_site_tsv(std::ostream& out, std::span<const SiteFeature> sites) {
    out << "position\tA\tC\tG\tT\tdepth\n";
    char buffer[160];
    for (const auto& s : sites) {
        std::snprintf(buffer, sizeof buffer, "%lld\t%.6g\t%.6g\t%.6g\t%.6g\t%u\n",
                      static_cast<long long>(s.position + 1), s.percent[0], s.percent[1], s.percent[2],
                      s.percent[3], s.depth);
        out << buffer;
    }
}

}  // namespace strainsplit
