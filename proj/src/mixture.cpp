#include "strainsplit/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <set>

#include "strainsplit/random.hpp"

namespace strainsplit {

namespace {

constexpr double kMinSigma = 1e-3;
constexpr double kMinWeight = 1e-6;
constexpr double kPairingTolerance = 15.0;

double log_choose(double n, double k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double xlog(double count, double prob) { return count == 0.0 ? 0.0 : count * std::log(prob); }

double binomial_count(double value, std::uint32_t depth) {
    return std::clamp(std::round(value * depth / 100.0), 0.0, static_cast<double>(depth));
}

double binomial_sigma(double mean, double depth) {
    const double m = mean / 100.0;
    return depth > 0.0 ? 100.0 * std::sqrt(std::max(0.0, m * (1.0 - m)) / depth) : 0.0;
}

void sort_components(std::vector<MixtureComponent>& components) {
    std::stable_sort(components.begin(), components.end(),
                     [](const MixtureComponent& a, const MixtureComponent& b) { return a.mean > b.mean; });
}

/// E-step. Fills resp (N x K) and returns the mixture log-likelihood.
double expectation(const FrequencyObservations& obs, const std::vector<MixtureComponent>& comps,
                   MixtureFamily family, std::vector<double>& resp) {
    const std::size_t K = comps.size();
    resp.resize(obs.size() * K);
    std::vector<double> logp(K);
    double total = 0.0;
    for (std::size_t n = 0; n < obs.size(); ++n) {
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < K; ++k) {
            logp[k] = std::log(comps[k].weight) + component_log_density(family, comps[k], obs.values[n], obs.depths[n]);
            peak = std::max(peak, logp[k]);
        }
        if (!std::isfinite(peak)) throw ComponentCollapse();
        double s = 0.0;
        for (std::size_t k = 0; k < K; ++k) s += std::exp(logp[k] - peak);
        total += peak + std::log(s);
        for (std::size_t k = 0; k < K; ++k) resp[n * K + k] = std::exp(logp[k] - peak) / s;
    }
    return total;
}

void maximization(const FrequencyObservations& obs, std::vector<MixtureComponent>& comps, MixtureFamily family,
                  const std::vector<double>& resp) {
    const std::size_t K = comps.size();
    const double N = static_cast<double>(obs.size());
    for (std::size_t k = 0; k < K; ++k) {
        double nk = 0.0, sum_x = 0.0, sum_c = 0.0, sum_d = 0.0;
        for (std::size_t n = 0; n < obs.size(); ++n) {
            const double r = resp[n * K + k];
            nk += r;
            sum_x += r * obs.values[n];
            sum_c += r * binomial_count(obs.values[n], obs.depths[n]);
            sum_d += r * obs.depths[n];
        }
        auto& c = comps[k];
        c.weight = nk / N;
        if (!(nk > 0.0)) throw ComponentCollapse();
        if (family == MixtureFamily::Gaussian) {
            c.mean = sum_x / nk;
            double sum_sq = 0.0;
            for (std::size_t n = 0; n < obs.size(); ++n) {
                const double dx = obs.values[n] - c.mean;
                sum_sq += resp[n * K + k] * dx * dx;
            }
            c.sigma = std::sqrt(sum_sq / nk);
        } else {
            c.mean = sum_d > 0.0 ? 100.0 * sum_c / sum_d : 0.0;
            c.sigma = binomial_sigma(c.mean, sum_d / nk);
        }
        if (K > 1 && (c.sigma < kMinSigma || c.weight < kMinWeight)) throw ComponentCollapse();
    }
}

MixtureModel fit_single(const FrequencyObservations& obs, MixtureFamily family) {
    MixtureModel model;
    model.family = family;
    const double N = static_cast<double>(obs.size());
    MixtureComponent c;
    c.weight = 1.0;
    if (family == MixtureFamily::Gaussian) {
        c.mean = std::accumulate(obs.values.begin(), obs.values.end(), 0.0) / N;
        double ss = 0.0;
        for (double x : obs.values) ss += (x - c.mean) * (x - c.mean);
        c.sigma = std::sqrt(ss / N);
    } else {
        double sum_c = 0.0, sum_d = 0.0;
        for (std::size_t n = 0; n < obs.size(); ++n) {
            sum_c += binomial_count(obs.values[n], obs.depths[n]);
            sum_d += obs.depths[n];
        }
        c.mean = sum_d > 0.0 ? 100.0 * sum_c / sum_d : 0.0;
        c.sigma = binomial_sigma(c.mean, sum_d / N);
    }
    model.components = {c};
    model.iterations = 1;
    if (c.sigma > 0.0) {
        model.log_likelihood = mixture_log_likelihood(obs, model);
        model.log_likelihood_trace = {model.log_likelihood};
    }
    return model;
}

std::vector<MixtureComponent> initial_components(const FrequencyObservations& obs, int K, MixtureFamily family,
                                                 std::uint64_t seed) {
    std::vector<double> sorted = obs.values;
    std::sort(sorted.begin(), sorted.end());
    const double range = sorted.back() - sorted.front();
    const double N = static_cast<double>(sorted.size());
    const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / N;
    double ss = 0.0;
    for (double x : sorted) ss += (x - mean) * (x - mean);
    const double spread = std::max(std::sqrt(ss / N) / K, 1.0);
    const double mean_depth =
        std::accumulate(obs.depths.begin(), obs.depths.end(), 0.0) / static_cast<double>(obs.depths.size());

    Rng rng(seed);
    std::vector<MixtureComponent> comps(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        const double q = (k + 0.5) / K * (N - 1.0);
        const auto lo = static_cast<std::size_t>(std::floor(q));
        const auto hi = std::min(lo + 1, sorted.size() - 1);
        const double frac = q - std::floor(q);
        double mu = sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
        mu += (2.0 * rng.uniform() - 1.0) * 0.01 * (range + 1.0);
        mu = std::clamp(mu, 0.5, 99.5);
        auto& c = comps[static_cast<std::size_t>(k)];
        c.mean = mu;
        c.weight = 1.0 / K;
        c.sigma = family == MixtureFamily::Gaussian ? spread : binomial_sigma(mu, mean_depth);
    }
    return comps;
}

}  // namespace

bool is_variable_site(const SiteFeature& site, double noise_threshold) {
    const double second = site.second_percent();
    return second > 0.0 && second >= noise_threshold;
}

FrequencyObservations build_observations(const SampleProfile& profile, const FilterConfig& config) {
    FrequencyObservations obs;
    for (const auto& site : profile.filtered_sites) {
        if (!is_variable_site(site, config.noise_threshold)) continue;
        for (std::size_t b = 0; b < 4; ++b) {
            const double p = site.percent[b];
            if (p > 0.0 && p >= config.noise_threshold && p <= 100.0 - config.noise_threshold && p < 100.0) {
                obs.values.push_back(p);
                obs.site_index.push_back(site.position);
                obs.depths.push_back(site.depth);
            }
        }
    }
    if (obs.values.empty()) throw NoVariantEvidence();
    return obs;
}

std::string to_string(MixtureFamily family) { return family == MixtureFamily::Binomial ? "binomial" : "gaussian"; }

MixtureFamily family_from_string(const std::string& text) {
    if (text == "binomial") return MixtureFamily::Binomial;
    if (text == "gaussian") return MixtureFamily::Gaussian;
    throw std::invalid_argument("unknown model family '" + text + "'");
}

std::string to_string(PairingMode mode) { return mode == PairingMode::Direct ? "direct" : "complement"; }

double component_log_density(MixtureFamily family, const MixtureComponent& c, double value, std::uint32_t depth) {
    if (family == MixtureFamily::Gaussian) {
        const double z = (value - c.mean) / c.sigma;
        return -0.5 * z * z - std::log(c.sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
    }
    const double d = depth;
    const double count = binomial_count(value, depth);
    const double m = std::clamp(c.mean / 100.0, 0.0, 1.0);
    return log_choose(d, count) + xlog(count, m) + xlog(d - count, 1.0 - m);
}

double mixture_log_likelihood(const FrequencyObservations& obs, const MixtureModel& model) {
    std::vector<double> resp;
    return expectation(obs, model.components, model.family, resp);
}

std::vector<std::vector<double>> responsibilities(const FrequencyObservations& obs, const MixtureModel& model) {
    std::vector<double> flat;
    expectation(obs, model.components, model.family, flat);
    const std::size_t K = model.K();
    std::vector<std::vector<double>> out(obs.size(), std::vector<double>(K));
    for (std::size_t n = 0; n < obs.size(); ++n) {
        for (std::size_t k = 0; k < K; ++k) out[n][k] = flat[n * K + k];
    }
    return out;
}

MixtureModel em_fit_from(const FrequencyObservations& obs, std::vector<MixtureComponent> comps,
                         MixtureFamily family, const EmOptions& options) {
    if (obs.size() == 0) throw std::invalid_argument("no observations to fit");
    if (comps.empty()) throw std::invalid_argument("at least one component is required");
    MixtureModel model;
    model.family = family;
    std::vector<double> resp;
    double ll = expectation(obs, comps, family, resp);
    model.log_likelihood_trace.push_back(ll);
    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        maximization(obs, comps, family, resp);
        const double next = expectation(obs, comps, family, resp);
        model.log_likelihood_trace.push_back(next);
        model.iterations = iter;
        const double gain = next - ll;
        ll = next;
        if (gain < options.tolerance) break;
    }
    sort_components(comps);
    model.components = std::move(comps);
    model.log_likelihood = ll;
    return model;
}

MixtureModel em_fit(const FrequencyObservations& obs, int K, MixtureFamily family, const EmOptions& options) {
    if (K < 1) throw std::invalid_argument("K must be >= 1");
    if (obs.size() == 0) throw std::invalid_argument("no observations to fit");
    const std::set<double> distinct(obs.values.begin(), obs.values.end());
    if (distinct.size() < static_cast<std::size_t>(K)) {
        throw std::invalid_argument("need at least K distinct observation values");
    }
    if (K == 1) return fit_single(obs, family);

    for (int attempt = 0; attempt <= options.max_restarts; ++attempt) {
        try {
            auto model = em_fit_from(obs, initial_components(obs, K, family, mix_seed(options.seed, attempt)), family,
                                     options);
            model.restarts = attempt;
            return model;
        } catch (const ComponentCollapse&) {
        }
    }
    throw ComponentCollapse();
}

int complement_component_count(int n_strains) {
    if (n_strains < 1) throw std::invalid_argument("n_strains must be >= 1");
    if (n_strains == 1) return 1;
    return n_strains == 2 ? 2 : 2 * n_strains;
}

namespace {

ProportionEstimate direct_proportions(const MixtureModel& model, int n_strains) {
    ProportionEstimate est;
    est.mode = PairingMode::Direct;
    std::vector<MixtureComponent> chosen = model.components;
    if (chosen.size() > static_cast<std::size_t>(n_strains)) {
        std::stable_sort(chosen.begin(), chosen.end(),
                         [](const MixtureComponent& a, const MixtureComponent& b) { return a.weight > b.weight; });
        chosen.resize(static_cast<std::size_t>(n_strains));
    }
    double total = 0.0, weight_total = 0.0;
    for (const auto& c : chosen) {
        total += c.mean;
        weight_total += c.weight;
    }
    for (auto& c : chosen) {
        est.proportions.push_back(c.mean / total);
        est.strain_components.push_back({100.0 * c.mean / total, c.sigma, c.weight / weight_total});
    }
    return est;
}

void sort_estimate(ProportionEstimate& est) {
    std::vector<std::size_t> order(est.proportions.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return est.proportions[a] > est.proportions[b]; });
    ProportionEstimate sorted = est;
    for (std::size_t i = 0; i < order.size(); ++i) {
        sorted.proportions[i] = est.proportions[order[i]];
        sorted.strain_components[i] = est.strain_components[order[i]];
    }
    est.proportions = std::move(sorted.proportions);
    est.strain_components = std::move(sorted.strain_components);
}

}  // namespace

ProportionEstimate proportions_from_model(const MixtureModel& model, int n_strains, PairingMode mode) {
    if (n_strains < 1) throw std::invalid_argument("n_strains must be >= 1");
    if (model.components.empty()) throw std::invalid_argument("model has no components");
    if (n_strains == 1) {
        ProportionEstimate est;
        est.mode = mode;
        auto best = *std::max_element(model.components.begin(), model.components.end(),
                                      [](const auto& a, const auto& b) { return a.weight < b.weight; });
        est.proportions = {1.0};
        est.strain_components = {{100.0, best.sigma, 1.0}};
        return est;
    }
    if (mode == PairingMode::Direct) {
        auto est = direct_proportions(model, n_strains);
        sort_estimate(est);
        return est;
    }
    if (model.K() != static_cast<std::size_t>(complement_component_count(n_strains))) {
        throw std::invalid_argument("complement pairing for " + std::to_string(n_strains) + " strains needs " +
                                    std::to_string(complement_component_count(n_strains)) + " components");
    }

    // Greedy pairing on |mu_a + mu_b - 100|.
    const auto& comps = model.components;
    std::vector<bool> used(comps.size(), false);
    ProportionEstimate est;
    est.mode = PairingMode::Complement;
    bool pairable = true;
    for (std::size_t round = 0; round < comps.size() / 2; ++round) {
        double best_gap = std::numeric_limits<double>::infinity();
        std::pair<int, int> best{-1, -1};
        for (std::size_t a = 0; a < comps.size(); ++a) {
            if (used[a]) continue;
            for (std::size_t b = a + 1; b < comps.size(); ++b) {
                if (used[b]) continue;
                const double gap = std::abs(comps[a].mean + comps[b].mean - 100.0);
                if (gap < best_gap) {
                    best_gap = gap;
                    best = {static_cast<int>(a), static_cast<int>(b)};
                }
            }
        }
        used[static_cast<std::size_t>(best.first)] = used[static_cast<std::size_t>(best.second)] = true;
        // components are sorted by descending mean, so first holds the larger mean
        est.pairs.push_back(best);
        if (best_gap > kPairingTolerance) pairable = false;
    }
    if (!pairable) {
        auto fallback = direct_proportions(model, n_strains);
        fallback.warnings.push_back("components could not be complement-paired within 15 points of 100; "
                                    "using direct normalization of the component means");
        sort_estimate(fallback);
        return fallback;
    }

    std::vector<double> q;
    for (auto [a, b] : est.pairs) {
        q.push_back(0.5 * (comps[static_cast<std::size_t>(a)].mean + 100.0 - comps[static_cast<std::size_t>(b)].mean));
    }

    std::vector<bool> take_upper(q.size(), true);
    if (n_strains == 2) {
        // one pair carries both strains: q and 100 - q
        const auto [a, b] = est.pairs[0];
        est.proportions = {q[0] / 100.0, 1.0 - q[0] / 100.0};
        est.strain_components = {
            {q[0], comps[static_cast<std::size_t>(a)].sigma, comps[static_cast<std::size_t>(a)].weight},
            {100.0 - q[0], comps[static_cast<std::size_t>(b)].sigma, comps[static_cast<std::size_t>(b)].weight}};
    } else {
        double best_gap = std::numeric_limits<double>::infinity();
        std::uint32_t best_mask = 0;
        for (std::uint32_t mask = 0; mask < (1u << q.size()); ++mask) {
            double total = 0.0;
            for (std::size_t j = 0; j < q.size(); ++j) total += (mask >> j & 1u) ? 100.0 - q[j] : q[j];
            const double gap = std::abs(total - 100.0);
            if (gap < best_gap) {
                best_gap = gap;
                best_mask = mask;
            }
        }
        double total = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j) {
            const bool lower = best_mask >> j & 1u;
            const auto [a, b] = est.pairs[j];
            const auto& source = comps[static_cast<std::size_t>(lower ? b : a)];
            const double value = lower ? 100.0 - q[j] : q[j];
            est.proportions.push_back(value);
            est.strain_components.push_back({value, source.sigma, source.weight});
            total += value;
        }
        for (auto& p : est.proportions) p /= total;
        for (auto& c : est.strain_components) c.mean = 100.0 * c.mean / total;
    }
    double weight_total = 0.0;
    for (const auto& c : est.strain_components) weight_total += c.weight;
    for (auto& c : est.strain_components) c.weight /= weight_total;
    sort_estimate(est);
    return est;
}

void write_histogram_tsv(std::ostream& out, const FrequencyObservations& obs, const MixtureModel& model) {
    out << "position\tvalue\tdepth";
    for (std::size_t k = 0; k < model.K(); ++k) out << "\tresp_" << (k + 1);
    out << '\n';
    const auto resp = responsibilities(obs, model);
    char buffer[64];
    for (std::size_t n = 0; n < obs.size(); ++n) {
        out << (obs.site_index[n] + 1);
        std::snprintf(buffer, sizeof buffer, "\t%.6g\t%u", obs.values[n], obs.depths[n]);
        out << buffer;
        for (double r : resp[n]) {
            std::snprintf(buffer, sizeof buffer, "\t%.6g", r);
            out << buffer;
        }
        out << '\n';
    }
}

}  // namespace strainsplit
