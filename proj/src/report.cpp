#include "strainsplit/report.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace strainsplit {

using Json = nlohmann::ordered_json;

namespace {

void require_finite(const Json& node, const std::string& path) {
    if (node.is_number_float() && !std::isfinite(node.get<double>()))
        throw std::domain_error("non-finite value at " + path);
    if (node.is_object()) {
        for (const auto& [key, value] : node.items()) require_finite(value, path + "." + key);
    } else if (node.is_array()) {
        for (std::size_t i = 0; i < node.size(); ++i) require_finite(node[i], path + "[" + std::to_string(i) + "]");
    }
}

std::string dump(const Json& j) {
    require_finite(j, "$");
    return j.dump(2) + "\n";
}

Json parse(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(e.what());
    }
}

template <class F>
auto guarded(F&& f) {
    try {
        return f();
    } catch (const Json::exception& e) {
        throw ParseError(std::string("unexpected JSON structure: ") + e.what());
    }
}

Json component_json(const MixtureComponent& c) { return {{"mean", c.mean}, {"sigma", c.sigma}, {"weight", c.weight}}; }

Json matrix_json(const ConfusionMatrix& m) { return m.counts; }

}  // namespace

std::string report_to_json(const Report& r) {
    Json j;
    j["schema_version"] = r.schema_version;
    j["sample_id"] = r.sample_id;
    j["call"] = to_string(r.call);
    j["lr_statistic"] = r.lr_statistic;
    j["threshold_c"] = r.threshold_c;
    j["alpha"] = r.alpha;
    j["epsilon0"] = r.epsilon0;
    j["epsilon1"] = r.epsilon1;
    j["p_mle"] = r.p_mle;
    j["model_family"] = r.model_family;
    j["n_strains"] = r.n_strains;
    j["em_proportions"] = r.em_proportions;
    j["component_table"] = Json::array();
    for (const auto& c : r.component_table) j["component_table"].push_back(component_json(c));
    j["mean_depth"] = r.mean_depth;
    j["n_reads"] = r.n_reads;
    j["n_filtered_sites"] = r.n_filtered_sites;
    j["n_variant_sites"] = r.n_variant_sites;
    j["n_assigned_reads"] = r.n_assigned_reads;
    j["mate_consistency"] = r.mate_consistency ? Json(*r.mate_consistency) : Json(nullptr);
    j["warnings"] = r.warnings;
    return dump(j);
}

Report report_from_json(const std::string& text) {
    const Json j = parse(text);
    return guarded([&] {
        Report r;
        r.schema_version = j.at("schema_version").get<int>();
        if (r.schema_version != kReportSchemaVersion)
            throw ParseError("unsupported report schema_version " + std::to_string(r.schema_version));
        r.sample_id = j.at("sample_id").get<std::string>();
        try {
            r.call = call_from_string(j.at("call").get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw ParseError(e.what());
        }
        r.lr_statistic = j.at("lr_statistic").get<double>();
        r.threshold_c = j.at("threshold_c").get<double>();
        r.alpha = j.at("alpha").get<double>();
        r.epsilon0 = j.at("epsilon0").get<double>();
        r.epsilon1 = j.at("epsilon1").get<double>();
        r.p_mle = j.at("p_mle").get<double>();
        r.model_family = j.at("model_family").get<std::string>();
        r.n_strains = j.at("n_strains").get<int>();
        r.em_proportions = j.at("em_proportions").get<std::vector<double>>();
        for (const auto& c : j.at("component_table")) {
            r.component_table.push_back(
                {c.at("mean").get<double>(), c.at("sigma").get<double>(), c.at("weight").get<double>()});
        }
        r.mean_depth = j.at("mean_depth").get<double>();
        r.n_reads = j.at("n_reads").get<std::size_t>();
        r.n_filtered_sites = j.at("n_filtered_sites").get<std::size_t>();
        r.n_variant_sites = j.at("n_variant_sites").get<std::size_t>();
        r.n_assigned_reads = j.at("n_assigned_reads").get<std::size_t>();
        if (j.contains("mate_consistency") && !j["mate_consistency"].is_null())
            r.mate_consistency = j["mate_consistency"].get<double>();
        r.warnings = j.at("warnings").get<std::vector<std::string>>();
        return r;
    });
}

namespace {

Json spec_json(const SyntheticSpec& s) {
    return {{"ref_length", s.ref_length},   {"n_strains", s.n_strains},     {"snps_per_strain", s.snps_per_strain},
            {"proportions", s.proportions}, {"depth", s.depth},             {"read_length", s.read_length},
            {"error_rate", s.error_rate},   {"seed", s.seed}};
}

SyntheticSpec spec_from(const Json& j) {
    SyntheticSpec s;
    s.ref_length = j.value("ref_length", s.ref_length);
    s.n_strains = j.value("n_strains", s.n_strains);
    s.snps_per_strain = j.value("snps_per_strain", s.snps_per_strain);
    s.proportions = j.value("proportions", s.proportions);
    s.depth = j.value("depth", s.depth);
    s.read_length = j.value("read_length", s.read_length);
    s.error_rate = j.value("error_rate", s.error_rate);
    s.seed = j.value("seed", s.seed);
    return s;
}

}  // namespace

std::string truth_to_json(const TruthFile& t) {
    Json j;
    j["schema_version"] = kReportSchemaVersion;
    j["spec"] = spec_json(t.spec);
    j["proportions"] = t.truth.proportions;
    j["reference"] = t.truth.reference;
    j["strain_genomes"] = t.truth.strain_genomes;
    j["snps"] = Json::array();
    for (const auto& strain : t.truth.snps) {
        Json list = Json::array();
        for (const auto& s : strain) list.push_back({s.position, std::string(1, s.ref), std::string(1, s.alt)});
        j["snps"].push_back(std::move(list));
    }
    j["read_provenance"] = Json::object();
    for (const auto& [name, strain] : t.truth.read_provenance) j["read_provenance"][name] = strain;
    return dump(j);
}

TruthFile truth_from_json(const std::string& text) {
    const Json j = parse(text);
    return guarded([&] {
        TruthFile t;
        t.spec = spec_from(j.at("spec"));
        t.truth.proportions = j.at("proportions").get<std::vector<double>>();
        t.truth.reference = j.at("reference").get<std::string>();
        t.truth.strain_genomes = j.at("strain_genomes").get<std::vector<std::string>>();
        for (const auto& strain : j.at("snps")) {
            std::vector<Snp> list;
            for (const auto& s : strain) {
                const auto ref = s.at(1).get<std::string>();
                const auto alt = s.at(2).get<std::string>();
                if (ref.size() != 1 || alt.size() != 1) throw ParseError("SNP alleles must be single bases");
                list.push_back({s.at(0).get<std::int64_t>(), ref[0], alt[0]});
            }
            t.truth.snps.push_back(std::move(list));
        }
        for (const auto& [name, strain] : j.at("read_provenance").items()) t.truth.read_provenance[name] = strain.get<int>();
        return t;
    });
}

SyntheticSpec spec_from_json(const std::string& text) {
    const Json j = parse(text);
    return guarded([&] { return spec_from(j.contains("spec") ? j.at("spec") : j); });
}

std::string evaluation_to_json(const EvaluationSummary& s) {
    Json j;
    j["schema_version"] = kReportSchemaVersion;
    j["n_samples"] = s.samples.size();
    j["rmse"] = s.rmse ? Json(*s.rmse) : Json(nullptr);
    j["max_deviation"] = s.max_deviation ? Json(*s.max_deviation) : Json(nullptr);
    j["rmse_samples"] = s.rmse_samples;
    j["excluded_from_rmse"] = s.excluded_from_rmse;
    j["auc"] = s.roc ? Json(s.roc->auc) : Json(nullptr);

    j["alpha_calibration"] = Json::array();
    for (const auto& c : s.alpha_grid) {
        j["alpha_calibration"].push_back({{"snp_distance", c.snp_distance},
                                          {"major_proportion", c.major_proportion},
                                          {"alpha", c.alpha},
                                          {"log10_alpha", c.log10_alpha},
                                          {"attainable", c.attainable},
                                          {"n_mixed", c.n_mixed},
                                          {"n_pure", c.n_pure}});
    }
    j["alpha_monotonicity"] = {{"pairs", s.monotonicity.pairs},
                               {"satisfied", s.monotonicity.satisfied},
                               {"fraction", s.monotonicity.fraction()}};

    j["samples"] = Json::array();
    for (const auto& e : s.samples) {
        const auto& r = e.record;
        Json item{{"sample_id", r.sample_id},
                  {"true_label", to_string(r.true_label)},
                  {"true_proportions", r.true_proportions},
                  {"snp_distance", r.snp_distance},
                  {"lr_statistic", r.lr_statistic},
                  {"call", to_string(r.call)},
                  {"estimated_proportions", r.estimated_proportions}};
        item["confusion_matrix"] = e.confusion ? matrix_json(*e.confusion) : Json(nullptr);
        item["assignment_accuracy"] = e.confusion && e.confusion->total() > 0 ? Json(e.confusion->accuracy()) : Json(nullptr);
        item["consensus_mismatches"] = e.consensus_mismatches;
        j["samples"].push_back(std::move(item));
    }
    j["warnings"] = s.warnings;
    return dump(j);
}

}  // namespace strainsplit
