#include "strainsplit/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace strainsplit {

double rmse(std::span<const double> true_major, std::span<const double> estimated_major) {
    if (true_major.empty()) throw std::invalid_argument("rmse of an empty set");
    if (true_major.size() != estimated_major.size()) throw std::invalid_argument("rmse inputs differ in length");
    double sum = 0.0;
    for (std::size_t i = 0; i < true_major.size(); ++i) {
        const double d = true_major[i] - estimated_major[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(true_major.size()));
}

RocCurve roc_auc(std::span<const double> scores, std::span<const Call> labels) {
    if (scores.size() != labels.size()) throw std::invalid_argument("scores and labels differ in length");
    const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Call::Mixed));
    const auto negatives = labels.size() - positives;
    if (positives == 0 || negatives == 0) throw std::invalid_argument("ROC needs both pure and mixed samples");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve curve;
    curve.points.emplace_back(0.0, 0.0);
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double cut = scores[order[i]];
        while (i < order.size() && scores[order[i]] == cut) {
            (labels[order[i]] == Call::Mixed ? tp : fp) += 1;
            ++i;
        }
        const double fpr = static_cast<double>(fp) / negatives;
        const double tpr = static_cast<double>(tp) / positives;
        const auto [x0, y0] = curve.points.back();
        curve.auc += (fpr - x0) * (tpr + y0) / 2.0;
        curve.points.emplace_back(fpr, tpr);
        curve.thresholds.push_back(cut);
    }
    return curve;
}

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t t = 0;
    for (const auto& row : counts) t = std::accumulate(row.begin(), row.end(), t);
    return t;
}

std::uint64_t ConfusionMatrix::correct() const {
    std::uint64_t c = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) c += counts[i][i];
    return c;
}

double ConfusionMatrix::accuracy() const {
    const auto t = total();
    return t == 0 ? 0.0 : static_cast<double>(correct()) / static_cast<double>(t);
}

ConfusionMatrix confusion_matrix(std::span<const StrainAssignment> assignments,
                                 const std::map<std::string, int>& provenance, int n_strains) {
    if (n_strains < 1) throw std::invalid_argument("n_strains must be >= 1");
    const auto n = static_cast<std::size_t>(n_strains);
    ConfusionMatrix m{std::vector<std::vector<std::uint64_t>>(n, std::vector<std::uint64_t>(n, 0))};
    for (const auto& a : assignments) {
        if (!a.strain) continue;
        const auto it = provenance.find(a.read_id);
        if (it == provenance.end()) throw std::invalid_argument("no provenance for read " + a.read_id);
        const auto row = static_cast<std::size_t>(it->second);
        const auto col = static_cast<std::size_t>(*a.strain);
        if (row >= n || col >= n) throw std::out_of_range("strain index outside the confusion matrix");
        ++m.counts[row][col];
    }
    return m;
}

std::size_t consensus_mismatches(const std::string& consensus, const std::string& true_genome,
                                 std::span<const std::int64_t> positions) {
    if (consensus.size() != true_genome.size()) throw std::invalid_argument("consensus and genome differ in length");
    std::size_t mismatches = 0;
    for (auto pos : positions) {
        if (pos < 0 || pos >= static_cast<std::int64_t>(consensus.size()))
            throw std::out_of_range("position outside the genome");
        if (consensus[static_cast<std::size_t>(pos)] != true_genome[static_cast<std::size_t>(pos)]) ++mismatches;
    }
    return mismatches;
}

std::vector<AlphaCell> alpha_calibration(std::span<const PanelRecord> records) {
    // Detection at alpha means lr >= c(alpha), i.e. p-value <= alpha; p-values
    // are compared on the log scale so deep-tail cells stay ordered.
    std::map<int, double> pure_floor;  // smallest log p among pure samples per distance
    std::map<int, std::size_t> pure_count;
    for (const auto& r : records) {
        if (r.true_label != Call::Pure) continue;
        const double lp = chi2_log_sf(r.lr_statistic);
        auto [it, inserted] = pure_floor.emplace(r.snp_distance, lp);
        if (!inserted) it->second = std::min(it->second, lp);
        ++pure_count[r.snp_distance];
    }

    std::vector<AlphaCell> cells;
    std::vector<double> cell_max_log_p;
    for (const auto& r : records) {
        if (r.true_label != Call::Mixed || r.true_proportions.empty()) continue;
        const double major = r.true_proportions.front();
        const double lp = chi2_log_sf(r.lr_statistic);
        auto it = std::find_if(cells.begin(), cells.end(), [&](const AlphaCell& c) {
            return c.snp_distance == r.snp_distance && std::abs(c.major_proportion - major) < 1e-6;
        });
        if (it == cells.end()) {
            cells.push_back({r.snp_distance, major, 1.0, 0.0, false, 1, 0});
            cell_max_log_p.push_back(lp);
        } else {
            ++it->n_mixed;
            auto& m = cell_max_log_p[static_cast<std::size_t>(it - cells.begin())];
            m = std::max(m, lp);
        }
    }

    for (std::size_t i = 0; i < cells.size(); ++i) {
        auto& c = cells[i];
        const auto floor = pure_floor.find(c.snp_distance);
        c.n_pure = floor == pure_floor.end() ? 0 : pure_count[c.snp_distance];
        const double pure_min = floor == pure_floor.end() ? 0.0 : floor->second;
        c.attainable = cell_max_log_p[i] < pure_min;
        const double ln_alpha = c.attainable ? cell_max_log_p[i] : 0.0;
        c.log10_alpha = ln_alpha / std::log(10.0);
        c.alpha = std::exp(ln_alpha);
    }
    std::sort(cells.begin(), cells.end(), [](const AlphaCell& a, const AlphaCell& b) {
        return a.snp_distance != b.snp_distance ? a.snp_distance < b.snp_distance
                                                : a.major_proportion < b.major_proportion;
    });
    return cells;
}

MonotonicityResult alpha_monotonicity(std::span<const AlphaCell> cells) {
    std::vector<int> distances;
    std::vector<double> proportions;
    for (const auto& c : cells) {
        distances.push_back(c.snp_distance);
        proportions.push_back(c.major_proportion);
    }
    std::sort(distances.begin(), distances.end());
    distances.erase(std::unique(distances.begin(), distances.end()), distances.end());
    std::sort(proportions.begin(), proportions.end());
    proportions.erase(std::unique(proportions.begin(), proportions.end(),
                                  [](double a, double b) { return std::abs(a - b) < 1e-6; }),
                      proportions.end());

    auto find = [&](int d, double p) -> const AlphaCell* {
        for (const auto& c : cells) {
            if (c.snp_distance == d && std::abs(c.major_proportion - p) < 1e-6) return &c;
        }
        return nullptr;
    };

    MonotonicityResult result;
    for (double p : proportions) {
        for (std::size_t i = 0; i + 1 < distances.size(); ++i) {
            const auto* a = find(distances[i], p);
            const auto* b = find(distances[i + 1], p);
            if (a == nullptr || b == nullptr) continue;
            ++result.pairs;
            if (b->log10_alpha <= a->log10_alpha) ++result.satisfied;
        }
    }
    for (int d : distances) {
        for (std::size_t i = 0; i + 1 < proportions.size(); ++i) {
            const auto* a = find(d, proportions[i]);
            const auto* b = find(d, proportions[i + 1]);
            if (a == nullptr || b == nullptr) continue;
            ++result.pairs;
            if (b->log10_alpha >= a->log10_alpha) ++result.satisfied;
        }
    }
    return result;
}

}  // namespace strainsplit
