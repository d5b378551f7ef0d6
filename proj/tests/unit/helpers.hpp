#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "strainsplit/pileup.hpp"
#include "strainsplit/types.hpp"

namespace testing_helpers {

inline std::string fixture(const std::string& name) { return std::string(STRAINSPLIT_FIXTURES) + "/" + name; }

inline strainsplit::AlignedRead matched_read(const std::string& id, std::int64_t start, const std::string& bases,
                                             int mapq = 60) {
    strainsplit::AlignedRead r;
    r.read_id = id;
    r.ref_start = start;
    r.cigar = {{strainsplit::CigarKind::Match, static_cast<std::uint32_t>(bases.size())}};
    r.bases = bases;
    r.base_qualities.assign(bases.size(), 30);
    r.map_quality = mapq;
    r.ref_name = "ref";
    return r;
}

inline strainsplit::SiteFeature site(std::int64_t pos, std::uint32_t a, std::uint32_t c, std::uint32_t g,
                                     std::uint32_t t) {
    return strainsplit::make_site(pos, {a, c, g, t});
}

inline strainsplit::SampleProfile profile_of(std::vector<strainsplit::SiteFeature> sites) {
    strainsplit::SampleProfile p;
    p.sites = sites;
    p.filtered_sites = std::move(sites);
    return p;
}

}  // namespace testing_helpers
