#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "strainsplit/assign.hpp"
#include "strainsplit/evaluate.hpp"
#include "strainsplit/hypothesis.hpp"
#include "strainsplit/mixture.hpp"
#include "strainsplit/pileup.hpp"
#include "strainsplit/pipeline.hpp"
#include "strainsplit/report.hpp"
#include "strainsplit/sam.hpp"
#include "strainsplit/simulate.hpp"

namespace py = pybind11;
using namespace strainsplit;

namespace {

ReadVariantProfile make_profile(const std::vector<std::pair<std::uint32_t, std::uint32_t>>& sites) {
    ReadVariantProfile p;
    std::int64_t pos = 0;
    for (auto [x, d] : sites) {
        if (x == 0 || x > d) throw std::invalid_argument("each site needs 0 < x <= d");
        p.sites.push_back({pos++, x, d});
    }
    if (p.sites.empty()) throw std::invalid_argument("profile is empty");
    return p;
}

SampleProfile profile_from(std::vector<SiteFeature> sites, const FilterConfig& filter,
                           std::optional<std::int64_t> ref_length) {
    std::int64_t end = 0;
    for (const auto& s : sites) end = std::max(end, s.position + 1);
    return filter_profile(std::move(sites), {{0, ref_length.value_or(end)}}, filter);
}

FilterConfig filter_config(double kappa, double noise, bool depth_filter) {
    FilterConfig f;
    f.kappa = kappa;
    f.noise_threshold = noise;
    f.depth_filter = depth_filter;
    f.validate();
    return f;
}

RunConfig run_config(double alpha, double kappa, double noise, int strains, const std::string& model,
                     const std::string& pairing, const std::string& rule, std::optional<std::string> regions,
                     const std::string& out, std::uint64_t seed, unsigned threads) {
    RunConfig c;
    c.alpha = alpha;
    c.filter = filter_config(kappa, noise, true);
    c.n_strains = strains;
    c.family = family_from_string(model);
    c.pairing = pairing == "direct" ? PairingMode::Direct : PairingMode::Complement;
    c.rule = assign_rule_from_string(rule);
    c.regions_path = std::move(regions);
    c.output_dir = out;
    c.seed = seed;
    c.threads = threads;
    c.validate();
    return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Mixed-strain detection, proportion estimation and read separation";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<NoVariantEvidence>(m, "NoVariantEvidence", PyExc_RuntimeError);
    py::register_exception<ComponentCollapse>(m, "ComponentCollapse", PyExc_RuntimeError);

    py::class_<AlignedRead>(m, "AlignedRead")
        .def_readonly("read_id", &AlignedRead::read_id)
        .def_readonly("ref_start", &AlignedRead::ref_start)
        .def_readonly("bases", &AlignedRead::bases)
        .def_readonly("map_quality", &AlignedRead::map_quality)
        .def_property_readonly("cigar", [](const AlignedRead& r) { return format_cigar(r.cigar); })
        .def_property_readonly("ref_end", &AlignedRead::ref_end)
        .def("__repr__", [](const AlignedRead& r) {
            return "<AlignedRead " + r.read_id + " @" + std::to_string(r.ref_start) + " " + format_cigar(r.cigar) + ">";
        });

    py::class_<SiteFeature>(m, "SiteFeature")
        .def(py::init([](std::int64_t position, std::array<std::uint32_t, 4> counts) {
                 return make_site(position, counts);
             }),
             py::arg("position"), py::arg("counts"))
        .def_readonly("position", &SiteFeature::position)
        .def_readonly("counts", &SiteFeature::counts)
        .def_readonly("percent", &SiteFeature::percent)
        .def_readonly("depth", &SiteFeature::depth)
        .def("__repr__", [](const SiteFeature& s) {
            std::ostringstream os;
            os << "<SiteFeature " << s.position << " (" << s.percent[0] << ", " << s.percent[1] << ", "
               << s.percent[2] << ", " << s.percent[3] << "; " << s.depth << ")>";
            return os.str();
        });

    m.def("parse_sam", [](const std::string& text, int min_map_quality) {
        std::istringstream in(text);
        return parse_alignment(in, min_map_quality).reads;
    }, py::arg("text"), py::arg("min_map_quality") = 1, "Parse SAM text into the reads that pass the mapping filters.");
    m.def("read_sam", [](const std::string& path, int min_map_quality) {
        return parse_alignment_file(path, min_map_quality).reads;
    }, py::arg("path"), py::arg("min_map_quality") = 1);
    m.def("feature_vectors", [](const std::vector<AlignedRead>& reads, std::int64_t ref_length, unsigned threads) {
        return build_feature_vectors(reads, ref_length, threads);
    }, py::arg("reads"), py::arg("ref_length"), py::arg("threads") = 1);

    py::class_<HypothesisResult>(m, "HypothesisResult")
        .def_readonly("epsilon0", &HypothesisResult::epsilon0)
        .def_readonly("p", &HypothesisResult::p)
        .def_readonly("epsilon1", &HypothesisResult::epsilon1)
        .def_readonly("log_l0", &HypothesisResult::log_l0)
        .def_readonly("log_l1", &HypothesisResult::log_l1)
        .def_readonly("lr_statistic", &HypothesisResult::lr_statistic)
        .def_readonly("threshold_c", &HypothesisResult::threshold_c)
        .def_readonly("alpha", &HypothesisResult::alpha)
        .def_property_readonly("call", [](const HypothesisResult& r) { return to_string(r.call); });

    m.def("likelihood_ratio_test",
          [](std::vector<SiteFeature> sites, double alpha, double kappa, double noise_threshold, bool depth_filter) {
              return likelihood_ratio_test(
                  profile_from(std::move(sites), filter_config(kappa, noise_threshold, depth_filter), std::nullopt),
                  alpha);
          },
          py::arg("sites"), py::arg("alpha") = 0.05, py::arg("kappa") = 0.70, py::arg("noise_threshold") = 10.0,
          py::arg("depth_filter") = true, "Filter the sites and run the pure/mixed likelihood-ratio test.");
    m.def("log_likelihood_h0", [](std::vector<SiteFeature> sites, double epsilon0) {
        SampleProfile p;
        p.filtered_sites = std::move(sites);
        return log_likelihood_h0(p, epsilon0);
    }, py::arg("sites"), py::arg("epsilon0"));
    m.def("log_likelihood_h1", [](std::vector<SiteFeature> sites, double p, double epsilon1) {
        SampleProfile prof;
        prof.filtered_sites = std::move(sites);
        return log_likelihood_h1(prof, p, epsilon1);
    }, py::arg("sites"), py::arg("p"), py::arg("epsilon1"));
    m.def("chi2_quantile", &chi2_quantile, py::arg("alpha"));
    m.def("chi2_sf", &chi2_sf, py::arg("x"));

    py::class_<MixtureComponent>(m, "MixtureComponent")
        .def_readonly("mean", &MixtureComponent::mean)
        .def_readonly("sigma", &MixtureComponent::sigma)
        .def_readonly("weight", &MixtureComponent::weight)
        .def("__repr__", [](const MixtureComponent& c) {
            std::ostringstream os;
            os << "<MixtureComponent mean=" << c.mean << " sigma=" << c.sigma << " weight=" << c.weight << ">";
            return os.str();
        });
    py::class_<MixtureModel>(m, "MixtureModel")
        .def_property_readonly("family", [](const MixtureModel& mm) { return to_string(mm.family); })
        .def_readonly("components", &MixtureModel::components)
        .def_readonly("log_likelihood", &MixtureModel::log_likelihood)
        .def_readonly("log_likelihood_trace", &MixtureModel::log_likelihood_trace)
        .def_readonly("iterations", &MixtureModel::iterations)
        .def_readonly("restarts", &MixtureModel::restarts);

    m.def("em_fit",
          [](const std::vector<double>& values, std::optional<std::vector<std::uint32_t>> depths, int K,
             const std::string& family, std::uint64_t seed) {
              FrequencyObservations obs;
              obs.values = values;
              obs.depths = depths.value_or(std::vector<std::uint32_t>(values.size(), 100));
              if (obs.depths.size() != values.size()) throw std::invalid_argument("depths must match values");
              obs.site_index.resize(values.size());
              EmOptions opt;
              opt.seed = seed;
              return em_fit(obs, K, family_from_string(family), opt);
          },
          py::arg("values"), py::arg("depths") = py::none(), py::arg("K") = 2, py::arg("family") = "gaussian",
          py::arg("seed") = 0, "Fit a K-component mixture to allele percentages.");
    m.def("proportions", [](const MixtureModel& model, int n_strains, const std::string& pairing) {
        return proportions_from_model(model, n_strains,
                                      pairing == "direct" ? PairingMode::Direct : PairingMode::Complement)
            .proportions;
    }, py::arg("model"), py::arg("n_strains") = 2, py::arg("pairing") = "complement");

    m.def("assign_binomial", [](const std::vector<std::pair<std::uint32_t, std::uint32_t>>& sites) {
        return assign_binomial(make_profile(sites)) == StrainSide::Major ? "major" : "minor";
    }, py::arg("sites"), "Vote over (x, d) site pairs by the unweighted rule.");
    m.def("assign_gaussian_vote", [](const std::vector<std::pair<std::uint32_t, std::uint32_t>>& sites) {
        return assign_gaussian_vote(make_profile(sites)) == StrainSide::Major ? "major" : "minor";
    }, py::arg("sites"), "Vote over (x, d) site pairs by the depth-normalized rule.");

    m.def("rmse", [](const std::vector<double>& t, const std::vector<double>& e) { return rmse(t, e); });
    m.def("roc_auc", [](const std::vector<double>& scores, const std::vector<bool>& mixed) {
        std::vector<Call> labels;
        for (bool b : mixed) labels.push_back(b ? Call::Mixed : Call::Pure);
        const auto curve = roc_auc(scores, labels);
        return py::make_tuple(curve.points, curve.auc);
    }, py::arg("scores"), py::arg("mixed"));

    m.def("simulate",
          [](const std::string& out_dir, std::int64_t ref_length, int n_strains, int snps_per_strain,
             std::vector<double> proportions, double depth, int read_length, double error_rate, std::uint64_t seed) {
              SyntheticSpec s;
              s.ref_length = ref_length;
              s.n_strains = n_strains;
              s.snps_per_strain = snps_per_strain;
              s.proportions = std::move(proportions);
              s.depth = depth;
              s.read_length = read_length;
              s.error_rate = error_rate;
              s.seed = seed;
              cmd_simulate(s, out_dir);
          },
          py::arg("out_dir"), py::arg("ref_length") = 50'000, py::arg("n_strains") = 2,
          py::arg("snps_per_strain") = 100, py::arg("proportions") = std::vector<double>{0.7, 0.3},
          py::arg("depth") = 100.0, py::arg("read_length") = 150, py::arg("error_rate") = 0.02, py::arg("seed") = 0,
          "Write reference.fasta, reads.sam and truth.json into out_dir.");

    m.def("_detect",
          [](const std::string& sam, const std::string& ref, const std::string& out, double alpha, double kappa,
             double noise, int strains, const std::string& model, const std::string& pairing,
             std::optional<std::string> regions, std::uint64_t seed, unsigned threads, const std::string& sample_id) {
              return report_to_json(cmd_detect(
                  run_config(alpha, kappa, noise, strains, model, pairing, "map", std::move(regions), out, seed, threads),
                  sam, ref, sample_id));
          },
          py::arg("sam_path"), py::arg("ref_path"), py::arg("out_dir") = ".", py::arg("alpha") = 0.05,
          py::arg("kappa") = 0.70, py::arg("noise_threshold") = 10.0, py::arg("strains") = 2,
          py::arg("model") = "gaussian", py::arg("pairing") = "complement", py::arg("regions") = py::none(),
          py::arg("seed") = 0, py::arg("threads") = 1, py::arg("sample_id") = "");
    m.def("_separate",
          [](const std::string& sam, const std::string& ref, const std::string& out, double alpha, double kappa,
             double noise, int strains, const std::string& model, const std::string& pairing,
             std::optional<std::string> regions, std::uint64_t seed, unsigned threads, const std::string& sample_id,
             const std::string& rule) {
              return report_to_json(cmd_separate(
                  run_config(alpha, kappa, noise, strains, model, pairing, rule, std::move(regions), out, seed, threads),
                  sam, ref, sample_id));
          },
          py::arg("sam_path"), py::arg("ref_path"), py::arg("out_dir") = ".", py::arg("alpha") = 0.05,
          py::arg("kappa") = 0.70, py::arg("noise_threshold") = 10.0, py::arg("strains") = 2,
          py::arg("model") = "gaussian", py::arg("pairing") = "complement", py::arg("regions") = py::none(),
          py::arg("seed") = 0, py::arg("threads") = 1, py::arg("sample_id") = "", py::arg("rule") = "map");
    m.def("_evaluate", [](const std::string& panel, const std::string& out) {
        return evaluation_to_json(cmd_evaluate(panel, out));
    }, py::arg("panel_dir"), py::arg("out_dir") = ".");
}
