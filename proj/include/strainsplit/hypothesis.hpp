#pragma once

#include <span>
#include <string>

#include "strainsplit/optimize.hpp"
#include "strainsplit/types.hpp"

namespace strainsplit {

/// Per-site counts used by the single- and two-strain likelihoods.
struct SiteCounts {
    std::uint32_t depth = 0;
    std::uint32_t k_major = 0;  ///< reads carrying the most frequent base
    std::uint32_t n_major = 0;
    std::uint32_t n_minor = 0;  ///< reads carrying the second most frequent base
    std::uint32_t n_error = 0;  ///< everything else
    int major_base = 0;
    int minor_base = 1;

    friend bool operator==(const SiteCounts&, const SiteCounts&) = default;
};

/// Counts from the raw base tallies. Ties between bases go to the earlier
/// base in A < C < G < T.
SiteCounts site_counts(const SiteFeature& site);

/// Both likelihoods depend on the data only through these totals plus the
/// summed log multinomial coefficients.
struct LikelihoodTotals {
    double depth = 0;
    double n_major = 0;
    double n_minor = 0;
    double n_error = 0;
    double log_binomial_coefficients = 0;   ///< sum of log C(d, k)
    double log_trinomial_coefficients = 0;  ///< sum of log C(d; n_M, n_m, n_e)
    std::size_t sites = 0;
};

LikelihoodTotals summarize_sites(std::span<const SiteFeature> sites);

inline constexpr double kEpsilonLower = 1e-6;
inline constexpr double kEpsilonUpper = 1.0 / 3.0 - 1e-6;
inline constexpr double kProportionLower = 0.5;
inline constexpr double kProportionUpper = 1.0 - 1e-6;

/// Single-strain log-likelihood with per-base error rate epsilon0 in (0, 1/3).
double log_likelihood_h0(const SampleProfile& profile, double epsilon0);
double log_likelihood_h0(const LikelihoodTotals& totals, double epsilon0);

/// Two-strain log-likelihood with major proportion p in [0.5, 1] and error
/// rate epsilon1 in (0, 1/3).
double log_likelihood_h1(const SampleProfile& profile, double p, double epsilon1);
double log_likelihood_h1(const LikelihoodTotals& totals, double p, double epsilon1);

/// Value, gradient and Hessian with respect to epsilon0.
Evaluation<1> evaluate_h0(const LikelihoodTotals& totals, double epsilon0);
/// Value, gradient and Hessian with respect to (p, epsilon1).
Evaluation<2> evaluate_h1(const LikelihoodTotals& totals, double p, double epsilon1);

/// Probability of one site's (n_M, n_m, n_e) partition under the two-strain model.
double site_probability_h1(std::uint32_t n_major, std::uint32_t n_minor, std::uint32_t n_error, double p,
                           double epsilon1);

struct H0Fit {
    double epsilon0 = 0;
    double log_likelihood = 0;
};

struct H1Fit {
    double p = 0;
    double epsilon1 = 0;
    double log_likelihood = 0;
};

H0Fit fit_h0(const SampleProfile& profile, const OptimizerOptions& options = {});
H0Fit fit_h0(const LikelihoodTotals& totals, const OptimizerOptions& options = {});

/// Multi-start bounded maximization from p in {0.55, 0.7, 0.85, 0.95}; the
/// start with the best final likelihood wins (the earliest one on ties).
H1Fit fit_h1(const SampleProfile& profile, const OptimizerOptions& options = {});
H1Fit fit_h1(const LikelihoodTotals& totals, const OptimizerOptions& options = {});

/// Upper tail P(X > x) of chi-square with one degree of freedom.
double chi2_sf(double x);
/// Natural log of chi2_sf, accurate far into the tail where chi2_sf underflows.
double chi2_log_sf(double x);
/// c with P(X > c) = alpha for X ~ chi-square(1).
double chi2_quantile(double alpha);

enum class Call { Pure, Mixed };

std::string to_string(Call call);
Call call_from_string(const std::string& text);

struct HypothesisResult {
    double epsilon0 = 0;
    double p = 0;
    double epsilon1 = 0;
    double log_l0 = 0;
    double log_l1 = 0;
    double lr_statistic = 0;  ///< -2 (logL0 - logL1); may be slightly negative
    double threshold_c = 0;
    double alpha = 0;
    Call call = Call::Pure;
};

/// Mixed iff lr_statistic >= chi2_quantile(alpha).
HypothesisResult likelihood_ratio_test(const SampleProfile& profile, double alpha,
                                       const OptimizerOptions& options = {});

}  // namespace strainsplit
