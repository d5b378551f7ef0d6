#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "strainsplit/types.hpp"

namespace strainsplit {

/// Raised when a sample has no heterogeneous sites to learn from.
class NoVariantEvidence : public std::runtime_error {
public:
    NoVariantEvidence() : std::runtime_error("no variant evidence") {}
};

/// Allele percentages at variable sites, one entry per allele at or above
/// the noise threshold, ordered by position.
struct FrequencyObservations {
    std::vector<double> values;
    std::vector<std::int64_t> site_index;
    std::vector<std::uint32_t> depths;

    std::size_t size() const { return values.size(); }
};

/// A site is variable when its second allele reaches the noise threshold.
bool is_variable_site(const SiteFeature& site, double noise_threshold);

/// Throws NoVariantEvidence when no filtered site is variable.
FrequencyObservations build_observations(const SampleProfile& profile, const FilterConfig& config);

enum class MixtureFamily { Binomial, Gaussian };

std::string to_string(MixtureFamily family);
MixtureFamily family_from_string(const std::string& text);

struct MixtureComponent {
    double mean = 0;   ///< percentage
    double sigma = 0;  ///< percentage; derived from mean and depth for the binomial family
    double weight = 0;
    friend bool operator==(const MixtureComponent&, const MixtureComponent&) = default;
};

struct MixtureModel {
    MixtureFamily family = MixtureFamily::Gaussian;
    std::vector<MixtureComponent> components;  ///< sorted by descending mean
    double log_likelihood = 0;
    std::vector<double> log_likelihood_trace;  ///< after every E-step
    int iterations = 0;
    int restarts = 0;

    std::size_t K() const { return components.size(); }
};

struct EmOptions {
    double tolerance = 1e-6;  ///< absolute log-likelihood improvement
    int max_iterations = 500;
    std::uint64_t seed = 0;
    int max_restarts = 5;
};

/// Component collapse during EM (sigma below 1e-3 or weight below 1e-6).
class ComponentCollapse : public std::runtime_error {
public:
    ComponentCollapse() : std::runtime_error("mixture component collapsed") {}
};

/// log f(value | component). Gaussian: normal density on the percentage.
/// Binomial: Binom(round(value * depth / 100); depth, mean / 100).
double component_log_density(MixtureFamily family, const MixtureComponent& component, double value,
                             std::uint32_t depth);

/// EM from quantile-based starting means jittered by the seed; restarts with a
/// fresh jitter on collapse, up to max_restarts times, then throws
/// ComponentCollapse. K == 1 is solved in closed form.
MixtureModel em_fit(const FrequencyObservations& obs, int K, MixtureFamily family, const EmOptions& options = {});

/// One EM run from explicit starting components. Throws ComponentCollapse.
MixtureModel em_fit_from(const FrequencyObservations& obs, std::vector<MixtureComponent> initial,
                         MixtureFamily family, const EmOptions& options = {});

/// Per-observation responsibilities, rows summing to one.
std::vector<std::vector<double>> responsibilities(const FrequencyObservations& obs, const MixtureModel& model);

double mixture_log_likelihood(const FrequencyObservations& obs, const MixtureModel& model);

/// Components needed for n strains under complement pairing: each strain's
/// private variants produce clusters at q and 100 - q. Two strains share
/// their two clusters, so K = 2; otherwise K = 2n.
int complement_component_count(int n_strains);

enum class PairingMode { Complement, Direct };

std::string to_string(PairingMode mode);

struct ProportionEstimate {
    std::vector<double> proportions;  ///< descending, summing to one
    /// Strain-level component per proportion: mean = 100 * proportion, with
    /// sigma and weight taken from the fitted component it came from.
    std::vector<MixtureComponent> strain_components;
    std::vector<std::pair<int, int>> pairs;  ///< component indices paired as (larger, smaller) mean
    PairingMode mode = PairingMode::Complement;
    std::vector<std::string> warnings;
};

/// Complement mode pairs components greedily by |mu_a + mu_b - 100|; each pair
/// gives q = (mu_a + 100 - mu_b) / 2, and for three or more strains each pair
/// is oriented to q or 100 - q so the proportions sum closest to 100. A pair
/// more than 15 away from 100 falls back to direct mode with a warning.
/// Direct mode normalizes the component means by their sum.
ProportionEstimate proportions_from_model(const MixtureModel& model, int n_strains,
                                          PairingMode mode = PairingMode::Complement);

/// Tab-separated value plus one responsibility column per component.
void write_histogram_tsv(std::ostream& out, const FrequencyObservations& obs, const MixtureModel& model);

}  // namespace strainsplit
