#include "strainsplit/hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace strainsplit {

namespace {

double log_choose(double n, double k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// Neumaier compensated accumulator; summation order is fixed by the caller.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            carry_ += (sum_ - t) + x;
        } else {
            carry_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

void require_epsilon(double epsilon, const char* name) {
    if (!(epsilon > 0.0 && epsilon < 1.0 / 3.0)) {
        throw std::domain_error(std::string(name) + " must lie in the open interval (0, 1/3)");
    }
}

void require_proportion(double p) {
    if (!(p >= 0.5 && p <= 1.0)) throw std::domain_error("p must lie in [0.5, 1]");
}

void require_sites(const SampleProfile& profile) {
    if (profile.filtered_sites.empty()) throw std::invalid_argument("profile has no filtered sites");
}

// 0 * log(0) is taken as 0 so that absent categories contribute nothing.
double xlog(double count, double prob) { return count == 0.0 ? 0.0 : count * std::log(prob); }

}  // namespace

SiteCounts site_counts(const SiteFeature& site) {
    if (site.depth == 0) throw std::invalid_argument("site_counts requires depth > 0");
    std::array<int, 4> order{0, 1, 2, 3};
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return site.counts[static_cast<std::size_t>(a)] > site.counts[static_cast<std::size_t>(b)]; });
    SiteCounts c;
    c.depth = site.depth;
    c.major_base = order[0];
    c.minor_base = order[1];
    c.n_major = site.counts[static_cast<std::size_t>(order[0])];
    c.n_minor = site.counts[static_cast<std::size_t>(order[1])];
    c.n_error = site.depth - c.n_major - c.n_minor;
    c.k_major = c.n_major;
    return c;
}

LikelihoodTotals summarize_sites(std::span<const SiteFeature> sites) {
    LikelihoodTotals t;
    CompensatedSum binomial;
    CompensatedSum trinomial;
    for (const auto& site : sites) {
        if (site.depth == 0) continue;
        const auto c = site_counts(site);
        const double d = c.depth;
        t.depth += d;
        t.n_major += c.n_major;
        t.n_minor += c.n_minor;
        t.n_error += c.n_error;
        binomial.add(log_choose(d, c.k_major));
        trinomial.add(log_choose(d, c.n_major) + log_choose(d - c.n_major, c.n_minor));
        ++t.sites;
    }
    t.log_binomial_coefficients = binomial.value();
    t.log_trinomial_coefficients = trinomial.value();
    return t;
}

double log_likelihood_h0(const LikelihoodTotals& t, double epsilon0) {
    require_epsilon(epsilon0, "epsilon0");
    return t.log_binomial_coefficients + xlog(t.depth - t.n_major, epsilon0) + xlog(t.n_major, 1.0 - 3.0 * epsilon0);
}

double log_likelihood_h0(const SampleProfile& profile, double epsilon0) {
    require_sites(profile);
    return log_likelihood_h0(summarize_sites(profile.filtered_sites), epsilon0);
}

double log_likelihood_h1(const LikelihoodTotals& t, double p, double epsilon1) {
    require_proportion(p);
    require_epsilon(epsilon1, "epsilon1");
    const double major = p * (1.0 - 3.0 * epsilon1) + (1.0 - p) * epsilon1;
    const double minor = (1.0 - p) * (1.0 - 3.0 * epsilon1) + p * epsilon1;
    return t.log_trinomial_coefficients + xlog(t.n_major, major) + xlog(t.n_minor, minor) + xlog(t.n_error, epsilon1);
}

double log_likelihood_h1(const SampleProfile& profile, double p, double epsilon1) {
    require_sites(profile);
    return log_likelihood_h1(summarize_sites(profile.filtered_sites), p, epsilon1);
}

double site_probability_h1(std::uint32_t n_major, std::uint32_t n_minor, std::uint32_t n_error, double p,
                           double epsilon1) {
    LikelihoodTotals t;
    const double d = double(n_major) + n_minor + n_error;
    t.depth = d;
    t.n_major = n_major;
    t.n_minor = n_minor;
    t.n_error = n_error;
    t.log_trinomial_coefficients = log_choose(d, n_major) + log_choose(d - n_major, n_minor);
    return std::exp(log_likelihood_h1(t, p, epsilon1));
}

Evaluation<1> evaluate_h0(const LikelihoodTotals& t, double e) {
    const double errors = t.depth - t.n_major;
    const double k = t.n_major;
    const double q = 1.0 - 3.0 * e;
    Evaluation<1> out;
    out.value = log_likelihood_h0(t, e);
    out.gradient[0] = errors / e - 3.0 * k / q;
    out.hessian[0][0] = -errors / (e * e) - 9.0 * k / (q * q);
    return out;
}

Evaluation<2> evaluate_h1(const LikelihoodTotals& t, double p, double e) {
    const double a = p + e - 4.0 * p * e;  // major-base probability
    const double b = 1.0 - p - 3.0 * e + 4.0 * p * e;
    const double da_dp = 1.0 - 4.0 * e, da_de = 1.0 - 4.0 * p;
    const double db_dp = -da_dp, db_de = 4.0 * p - 3.0;
    const double nM = t.n_major, nm = t.n_minor, ne = t.n_error;

    Evaluation<2> out;
    out.value = log_likelihood_h1(t, p, e);
    out.gradient[0] = nM * da_dp / a + nm * db_dp / b;
    out.gradient[1] = nM * da_de / a + nm * db_de / b + ne / e;
    out.hessian[0][0] = -nM * da_dp * da_dp / (a * a) - nm * db_dp * db_dp / (b * b);
    out.hessian[1][1] = -nM * da_de * da_de / (a * a) - nm * db_de * db_de / (b * b) - ne / (e * e);
    // d2a/dp de = -4, d2b/dp de = +4
    const double cross = nM * (-4.0 / a - da_dp * da_de / (a * a)) + nm * (4.0 / b - db_dp * db_de / (b * b));
    out.hessian[0][1] = cross;
    out.hessian[1][0] = cross;
    return out;
}

H0Fit fit_h0(const LikelihoodTotals& totals, const OptimizerOptions& options) {
    if (totals.sites == 0) throw std::invalid_argument("no sites to fit");
    auto f = [&](const std::array<double, 1>& x) { return evaluate_h0(totals, x[0]); };
    const auto result = maximize_in_box<1>(f, {0.01}, {kEpsilonLower}, {kEpsilonUpper}, options);
    return {result.x[0], result.value};
}

H0Fit fit_h0(const SampleProfile& profile, const OptimizerOptions& options) {
    require_sites(profile);
    return fit_h0(summarize_sites(profile.filtered_sites), options);
}

H1Fit fit_h1(const LikelihoodTotals& totals, const OptimizerOptions& options) {
    if (totals.sites == 0) throw std::invalid_argument("no sites to fit");
    auto f = [&](const std::array<double, 2>& x) { return evaluate_h1(totals, x[0], x[1]); };
    H1Fit best;
    bool have_best = false;
    for (double p0 : {0.55, 0.7, 0.85, 0.95}) {
        const auto r = maximize_in_box<2>(f, {p0, 0.01}, {kProportionLower, kEpsilonLower},
                                          {kProportionUpper, kEpsilonUpper}, options);
        if (!have_best || r.value > best.log_likelihood) {
            best = {r.x[0], r.x[1], r.value};
            have_best = true;
        }
    }
    return best;
}

H1Fit fit_h1(const SampleProfile& profile, const OptimizerOptions& options) {
    require_sites(profile);
    return fit_h1(summarize_sites(profile.filtered_sites), options);
}

double chi2_sf(double x) {
    if (!(x > 0.0)) return 1.0;
    return std::erfc(std::sqrt(0.5 * x));
}

double chi2_log_sf(double x) {
    if (!(x > 0.0)) return 0.0;
    const double z = std::sqrt(0.5 * x);
    if (z < 20.0) return std::log(std::erfc(z));
    // Asymptotic expansion of erfc for large arguments.
    const double r = 1.0 / (2.0 * z * z);
    const double series = 1.0 - r + 3.0 * r * r - 15.0 * r * r * r + 105.0 * r * r * r * r;
    return -z * z - std::log(z) - 0.5 * std::log(std::numbers::pi) + std::log(series);
}

double chi2_quantile(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie in (0, 1)");
    const double target = std::log(alpha);
    double lo = 0.0, hi = 64.0;  // on z = sqrt(c / 2); chi2_log_sf(2 * 64^2) ~ -4100
    for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (chi2_log_sf(2.0 * mid * mid) > target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double z = 0.5 * (lo + hi);
    return 2.0 * z * z;
}

std::string to_string(Call call) { return call == Call::Mixed ? "mixed" : "pure"; }

Call call_from_string(const std::string& text) {
    if (text == "mixed") return Call::Mixed;
    if (text == "pure") return Call::Pure;
    throw std::invalid_argument("unknown call '" + text + "'");
}

HypothesisResult likelihood_ratio_test(const SampleProfile& profile, double alpha, const OptimizerOptions& options) {
    require_sites(profile);
    HypothesisResult result;
    result.alpha = alpha;
    result.threshold_c = chi2_quantile(alpha);
    const auto totals = summarize_sites(profile.filtered_sites);
    const auto h0 = fit_h0(totals, options);
    const auto h1 = fit_h1(totals, options);
    result.epsilon0 = h0.epsilon0;
    result.p = h1.p;
    result.epsilon1 = h1.epsilon1;
    result.log_l0 = h0.log_likelihood;
    result.log_l1 = h1.log_likelihood;
    result.lr_statistic = -2.0 * (h0.log_likelihood - h1.log_likelihood);
    result.call = result.lr_statistic >= result.threshold_c ? Call::Mixed : Call::Pure;
    return result;
}

}  // namespace strainsplit
