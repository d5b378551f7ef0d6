#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "strainsplit/pipeline.hpp"

using namespace strainsplit;

namespace {

struct Flags {
    double alpha = 0.05;
    double kappa = 0.70;
    double noise = 10.0;
    int strains = 2;
    int min_mapq = 1;
    bool no_depth_filter = false;
    std::string model = "gaussian";
    std::string pairing = "complement";
    std::string rule = "map";
    std::string regions;
    std::string out = ".";
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string sample_id;
};

void add_analysis_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--alpha", f.alpha, "significance level of the pure/mixed test")->capture_default_str();
    cmd->add_option("--kappa", f.kappa, "depth filter fraction of the mean depth")->capture_default_str();
    cmd->add_option("--noise-threshold", f.noise, "minimum allele percentage")->capture_default_str();
    cmd->add_option("--strains", f.strains, "number of strains assumed in a mixed sample")
        ->check(CLI::Range(1, 3))
        ->capture_default_str();
    cmd->add_option("--model", f.model, "mixture family")
        ->check(CLI::IsMember({"binomial", "gaussian"}))
        ->capture_default_str();
    cmd->add_option("--pairing", f.pairing, "component-to-strain mapping")
        ->check(CLI::IsMember({"complement", "direct"}))
        ->capture_default_str();
    cmd->add_option("--regions", f.regions, "GFF3 file of analysed regions");
    cmd->add_option("--min-mapq", f.min_mapq, "minimum mapping quality")->capture_default_str();
    cmd->add_flag("--no-depth-filter", f.no_depth_filter, "keep low-depth sites");
    cmd->add_option("--out", f.out, "output directory")->capture_default_str();
    cmd->add_option("--seed", f.seed, "seed for mixture initialization")->capture_default_str();
    cmd->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--sample-id", f.sample_id, "sample name; defaults to the SAM file stem");
}

RunConfig to_config(const Flags& f) {
    RunConfig c;
    c.alpha = f.alpha;
    c.filter.kappa = f.kappa;
    c.filter.noise_threshold = f.noise;
    c.filter.min_map_quality = f.min_mapq;
    c.filter.depth_filter = !f.no_depth_filter;
    c.n_strains = f.strains;
    c.family = family_from_string(f.model);
    c.pairing = f.pairing == "direct" ? PairingMode::Direct : PairingMode::Complement;
    c.rule = assign_rule_from_string(f.rule);
    if (!f.regions.empty()) c.regions_path = f.regions;
    c.output_dir = f.out;
    c.seed = f.seed;
    c.threads = f.threads;
    c.validate();
    return c;
}

void print_summary(const Report& r) {
    std::printf("%s\t%s\tLR=%.6g\tc=%.6g", r.sample_id.c_str(), to_string(r.call).c_str(), r.lr_statistic,
                r.threshold_c);
    if (!r.em_proportions.empty()) {
        std::printf("\tproportions=");
        for (std::size_t i = 0; i < r.em_proportions.size(); ++i)
            std::printf("%s%.4f", i == 0 ? "" : ",", r.em_proportions[i]);
    }
    std::printf("\n");
    for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

std::vector<double> parse_proportions(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) throw std::invalid_argument("bad proportion '" + item + "'");
        values.push_back(v);
    }
    double total = 0.0;
    for (double v : values) total += v;
    // accept percentages as well as fractions
    if (total > 1.5)
        for (double& v : values) v /= total;
    return values;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Detect, quantify and separate mixed strains in aligned sequencing reads"};
    app.footer("Input alignments are SAM text. Convert BAM first, e.g. samtools view -h sample.bam > sample.sam");
    app.require_subcommand(1);

    Flags flags;
    std::string sam_path, ref_path;

    auto* detect = app.add_subcommand("detect", "call pure or mixed and estimate proportions");
    detect->add_option("sam", sam_path, "aligned reads (SAM)")->required()->check(CLI::ExistingFile);
    detect->add_option("reference", ref_path, "reference FASTA")->required()->check(CLI::ExistingFile);
    add_analysis_flags(detect, flags);

    auto* separate = app.add_subcommand("separate", "detect, then split reads per strain");
    separate->add_option("sam", sam_path, "aligned reads (SAM)")->required()->check(CLI::ExistingFile);
    separate->add_option("reference", ref_path, "reference FASTA")->required()->check(CLI::ExistingFile);
    add_analysis_flags(separate, flags);
    separate->add_option("--rule", flags.rule, "read assignment rule")
        ->check(CLI::IsMember({"map", "vote", "binomial"}))
        ->capture_default_str();

    SyntheticSpec spec;
    std::string spec_path, proportions_text;
    std::string sim_out = ".";
    auto* simulate = app.add_subcommand("simulate", "generate a synthetic sample with ground truth");
    simulate->add_option("--spec", spec_path, "JSON spec; flags given explicitly override it")
        ->check(CLI::ExistingFile);
    auto* o_len = simulate->add_option("--ref-length", spec.ref_length, "reference length")->capture_default_str();
    auto* o_n = simulate->add_option("--strains", spec.n_strains, "number of strains")->capture_default_str();
    auto* o_snps = simulate->add_option("--snps", spec.snps_per_strain, "SNPs per strain")->capture_default_str();
    auto* o_props = simulate->add_option("--proportions", proportions_text, "comma-separated strain proportions");
    auto* o_depth = simulate->add_option("--depth", spec.depth, "mean coverage")->capture_default_str();
    auto* o_rlen = simulate->add_option("--read-length", spec.read_length, "read length")->capture_default_str();
    auto* o_err = simulate->add_option("--error-rate", spec.error_rate, "per-base substitution rate")
                      ->capture_default_str();
    auto* o_seed = simulate->add_option("--seed", spec.seed, "random seed")->capture_default_str();
    simulate->add_option("--out", sim_out, "output directory")->capture_default_str();

    std::string panel_dir, eval_out = ".";
    auto* evaluate = app.add_subcommand("evaluate", "score a panel of separated samples against their truth");
    evaluate->add_option("panel", panel_dir, "directory of sample directories")->required()->check(CLI::ExistingDirectory);
    evaluate->add_option("--out", eval_out, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::fprintf(stderr, "error: usage: %s\n", e.what());
        return 2;
    }

    try {
        if (*detect) {
            print_summary(cmd_detect(to_config(flags), sam_path, ref_path, flags.sample_id));
        } else if (*separate) {
            print_summary(cmd_separate(to_config(flags), sam_path, ref_path, flags.sample_id));
        } else if (*simulate) {
            SyntheticSpec s = spec;
            if (!spec_path.empty()) {
                std::ifstream in(spec_path);
                std::stringstream text;
                text << in.rdbuf();
                s = spec_from_json(text.str());
                if (o_len->count() > 0) s.ref_length = spec.ref_length;
                if (o_n->count() > 0) s.n_strains = spec.n_strains;
                if (o_snps->count() > 0) s.snps_per_strain = spec.snps_per_strain;
                if (o_depth->count() > 0) s.depth = spec.depth;
                if (o_rlen->count() > 0) s.read_length = spec.read_length;
                if (o_err->count() > 0) s.error_rate = spec.error_rate;
                if (o_seed->count() > 0) s.seed = spec.seed;
            }
            if (o_props->count() > 0) {
                s.proportions = parse_proportions(proportions_text);
            } else if (spec_path.empty() || o_n->count() > 0) {
                if (static_cast<int>(s.proportions.size()) != s.n_strains) {
                    if (s.n_strains == 1) s.proportions = {1.0};
                    else throw std::invalid_argument("--proportions is required for this strain count");
                }
            }
            try {
                s.validate();
            } catch (const std::invalid_argument& e) {
                std::fprintf(stderr, "error: usage: %s\n", e.what());
                return 2;
            }
            cmd_simulate(s, sim_out);
            std::printf("wrote %s\n", sim_out.c_str());
        } else if (*evaluate) {
            const auto summary = cmd_evaluate(panel_dir, eval_out);
            std::printf("samples=%zu", summary.samples.size());
            if (summary.rmse) std::printf("\trmse=%.4f", *summary.rmse);
            if (summary.roc) std::printf("\tauc=%.4f", summary.roc->auc);
            std::printf("\talpha_monotone=%.3f\n", summary.monotonicity.fraction());
            for (const auto& w : summary.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
