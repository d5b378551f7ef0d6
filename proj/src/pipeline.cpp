#include "strainsplit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "strainsplit/evaluate.hpp"
#include "strainsplit/fasta.hpp"
#include "strainsplit/pileup.hpp"
#include "strainsplit/random.hpp"
#include "strainsplit/regions.hpp"
#include "strainsplit/sam.hpp"
#include "strainsplit/simulate.hpp"

namespace strainsplit {

namespace fs = std::filesystem;

std::string to_string(AssignRule rule) {
    switch (rule) {
        case AssignRule::Map: return "map";
        case AssignRule::GaussianVote: return "vote";
        case AssignRule::Binomial: return "binomial";
    }
    return "map";
}

AssignRule assign_rule_from_string(const std::string& text) {
    if (text == "map") return AssignRule::Map;
    if (text == "vote") return AssignRule::GaussianVote;
    if (text == "binomial") return AssignRule::Binomial;
    throw std::invalid_argument("unknown assignment rule '" + text + "'");
}

void RunConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    if (n_strains < 1 || n_strains > 3) throw std::invalid_argument("strains must be 1, 2 or 3");
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
    filter.validate();
}

Analysis analyze_sample(std::span<const AlignedRead> reads, std::int64_t ref_length, std::vector<Interval> regions,
                        const RunConfig& config, const std::string& sample_id) {
    config.validate();
    if (regions.empty()) regions = {{0, ref_length}};

    Analysis a;
    a.profile = filter_profile(build_feature_vectors(reads, ref_length, config.threads), std::move(regions),
                               config.filter);

    Report& r = a.report;
    r.sample_id = sample_id;
    r.alpha = config.alpha;
    r.threshold_c = chi2_quantile(config.alpha);
    r.model_family = to_string(config.family);
    r.n_strains = config.n_strains;
    r.mean_depth = a.profile.mean_depth;
    r.n_reads = reads.size();
    r.n_filtered_sites = a.profile.filtered_sites.size();
    r.n_variant_sites = static_cast<std::size_t>(
        std::count_if(a.profile.filtered_sites.begin(), a.profile.filtered_sites.end(),
                      [&](const SiteFeature& s) { return is_variable_site(s, config.filter.noise_threshold); }));

    if (a.profile.filtered_sites.empty()) {
        r.call = Call::Pure;
        r.warnings.push_back("no sites passed the filters");
        r.warnings.push_back("no variant evidence");
        return a;
    }

    a.test = likelihood_ratio_test(a.profile, config.alpha);
    r.lr_statistic = a.test.lr_statistic;
    r.epsilon0 = a.test.epsilon0;
    r.epsilon1 = a.test.epsilon1;
    r.p_mle = a.test.p;
    r.call = a.test.call;

    if (r.n_variant_sites == 0) {
        r.call = Call::Pure;
        r.warnings.push_back("no variant evidence");
        return a;
    }
    if (r.call != Call::Mixed) return a;
    if (config.n_strains == 1) {
        r.warnings.push_back("mixed call with a single assumed strain; proportions not estimated");
        return a;
    }

    a.observations = build_observations(a.profile, config.filter);
    const int K = config.pairing == PairingMode::Complement ? complement_component_count(config.n_strains)
                                                            : config.n_strains;
    EmOptions options;
    options.seed = config.seed;
    try {
        a.model = em_fit(*a.observations, K, config.family, options);
        a.estimate = proportions_from_model(*a.model, config.n_strains, config.pairing);
        r.em_proportions = a.estimate->proportions;
        r.component_table = a.model->components;
        r.warnings.insert(r.warnings.end(), a.estimate->warnings.begin(), a.estimate->warnings.end());
    } catch (const ComponentCollapse& e) {
        r.warnings.push_back(std::string("mixture fit failed: ") + e.what());
    } catch (const std::invalid_argument& e) {
        r.warnings.push_back(std::string("mixture fit failed: ") + e.what());
    }
    return a;
}

MixtureModel strain_model(const ProportionEstimate& estimate, MixtureFamily family) {
    MixtureModel m;
    m.family = family;
    m.components = estimate.strain_components;
    return m;
}

namespace {

std::optional<StrainAssignment> assign_one(const AlignedRead& read, std::size_t index, const VariantSites& sites,
                                           const MixtureModel& model, AssignRule rule) {
    auto profile = read_variant_profile(read, sites);
    if (!profile) return std::nullopt;
    StrainAssignment a;
    switch (rule) {
        case AssignRule::Map: a = assign_map(*profile, model); break;
        case AssignRule::GaussianVote:
            a.read_id = profile->read_id;
            a.strain = assign_gaussian_vote(*profile) == StrainSide::Major ? 0 : 1;
            break;
        case AssignRule::Binomial:
            a.read_id = profile->read_id;
            a.strain = assign_binomial(*profile) == StrainSide::Major ? 0 : 1;
            break;
    }
    a.read_index = index;
    return a;
}

}  // namespace

Separation separate_sample(std::span<const AlignedRead> reads, const std::string& reference,
                           std::vector<Interval> regions, const RunConfig& config, const std::string& sample_id) {
    Separation s;
    s.analysis = analyze_sample(reads, static_cast<std::int64_t>(reference.size()), std::move(regions), config,
                                sample_id);
    const auto& est = s.analysis.estimate;
    if (s.analysis.report.call != Call::Mixed || !est || est->proportions.size() < 2) {
        s.strain_reads = {std::vector<AlignedRead>(reads.begin(), reads.end())};
        s.consensus = {consensus_sequence(reads, reference)};
        return s;
    }

    const int n = static_cast<int>(est->proportions.size());
    if (config.rule != AssignRule::Map && n != 2)
        throw std::invalid_argument("the vote and binomial rules need exactly two strains");

    const VariantSites sites(select_variable_sites(s.analysis.profile, config.filter.noise_threshold),
                             static_cast<std::int64_t>(reference.size()));
    const MixtureModel model = strain_model(*est, config.family);

    std::vector<std::optional<StrainAssignment>> slots(reads.size());
    const unsigned workers = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(reads.size())));
    auto run = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) slots[i] = assign_one(reads[i], i, sites, model, config.rule);
    };
    if (workers <= 1) {
        run(0, reads.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (reads.size() + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t b = std::min(reads.size(), w * chunk);
            const std::size_t e = std::min(reads.size(), b + chunk);
            pool.emplace_back(run, b, e);
        }
        for (auto& t : pool) t.join();
    }
    for (auto& slot : slots) {
        if (slot) s.assignments.push_back(std::move(*slot));
    }

    s.strain_reads = partition_reads(reads, s.assignments, n);
    for (const auto& strain : s.strain_reads) s.consensus.push_back(consensus_sequence(strain, reference));

    auto& r = s.analysis.report;
    r.n_assigned_reads = static_cast<std::size_t>(
        std::count_if(s.assignments.begin(), s.assignments.end(), [](const auto& a) { return a.strain.has_value(); }));
    r.mate_consistency = mate_consistency(s.assignments);
    std::size_t underflows = 0;
    for (const auto& a : s.assignments) underflows += a.underflow ? 1 : 0;
    if (underflows > 0)
        r.warnings.push_back(std::to_string(underflows) +
                             " reads underflowed every strain density and went to the heaviest strain");
    return s;
}

void write_assignments_tsv(std::ostream& out, std::span<const StrainAssignment> assignments, int n_strains) {
    out << "read_id\tstrain";
    for (int k = 0; k < n_strains; ++k) out << "\tlog_posterior_" << k;
    out << '\n';
    char buf[32];
    for (const auto& a : assignments) {
        out << a.read_id << '\t';
        if (a.strain) out << *a.strain;
        else out << "NA";
        double norm = -std::numeric_limits<double>::infinity();
        if (!a.log_scores.empty()) {
            const double peak = *std::max_element(a.log_scores.begin(), a.log_scores.end());
            double sum = 0.0;
            for (double v : a.log_scores) sum += std::exp(v - peak);
            norm = peak + std::log(sum);
        }
        for (int k = 0; k < n_strains; ++k) {
            if (static_cast<std::size_t>(k) < a.log_scores.size() && std::isfinite(norm)) {
                std::snprintf(buf, sizeof buf, "%.6g", a.log_scores[static_cast<std::size_t>(k)] - norm);
                out << '\t' << buf;
            } else {
                out << "\tNA";
            }
        }
        out << '\n';
    }
}

std::vector<AssignmentRow> read_assignments_tsv(std::istream& in) {
    std::vector<AssignmentRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 || line.empty()) continue;
        std::istringstream fields(line);
        AssignmentRow row;
        std::string strain;
        if (!std::getline(fields, row.read_id, '\t') || !std::getline(fields, strain, '\t'))
            throw ParseError(line_no, "expected read_id and strain columns");
        if (strain != "NA") {
            try {
                std::size_t used = 0;
                row.strain = std::stoi(strain, &used);
                if (used != strain.size() || *row.strain < 0) throw std::invalid_argument(strain);
            } catch (const std::exception&) {
                throw ParseError(line_no, "invalid strain index '" + strain + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

/// Rank of each truth strain when ordered by descending proportion.
std::vector<int> strain_ranks(const std::vector<double>& proportions) {
    std::vector<int> order(proportions.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return proportions[static_cast<std::size_t>(a)] > proportions[static_cast<std::size_t>(b)];
    });
    std::vector<int> rank(proportions.size());
    for (std::size_t i = 0; i < order.size(); ++i) rank[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
    return rank;
}

struct LoadedInput {
    SamData sam;
    FastaRecord reference;
    std::vector<Interval> regions;
    std::string sample_id;
};

LoadedInput load_input(const RunConfig& config, const std::string& sam_path, const std::string& ref_path,
                       const std::string& sample_id) {
    LoadedInput in;
    in.sam = parse_alignment_file(sam_path, config.filter.min_map_quality);
    auto records = read_fasta_file(ref_path);
    if (records.empty()) throw ParseError("reference FASTA holds no sequence");
    in.reference = std::move(records.front());
    if (in.sam.header.ref_length != 0 &&
        in.sam.header.ref_length != static_cast<std::int64_t>(in.reference.sequence.size())) {
        throw std::invalid_argument("SAM header length " + std::to_string(in.sam.header.ref_length) +
                                    " differs from the reference length " +
                                    std::to_string(in.reference.sequence.size()));
    }
    if (config.regions_path) in.regions = parse_regions_file(*config.regions_path);
    in.sample_id = sample_id.empty() ? fs::path(sam_path).stem().string() : sample_id;
    return in;
}

void write_detect_outputs(const Analysis& a, const fs::path& dir) {
    {
        auto out = open_out(dir / "report.json");
        out << report_to_json(a.report);
    }
    {
        auto out = open_out(dir / "sites.tsv");
        write_site_tsv(out, a.profile.filtered_sites);
    }
    if (a.observations && a.model) {
        auto out = open_out(dir / "histogram.tsv");
        write_histogram_tsv(out, *a.observations, *a.model);
    }
}

}  // namespace

Report cmd_detect(const RunConfig& config, const std::string& sam_path, const std::string& ref_path,
                  const std::string& sample_id) {
    config.validate();
    const auto in = load_input(config, sam_path, ref_path, sample_id);
    const auto analysis = analyze_sample(in.sam.reads, static_cast<std::int64_t>(in.reference.sequence.size()),
                                         in.regions, config, in.sample_id);
    const fs::path dir(config.output_dir);
    fs::create_directories(dir);
    write_detect_outputs(analysis, dir);
    return analysis.report;
}

Report cmd_separate(const RunConfig& config, const std::string& sam_path, const std::string& ref_path,
                    const std::string& sample_id) {
    config.validate();
    const auto in = load_input(config, sam_path, ref_path, sample_id);
    const auto sep = separate_sample(in.sam.reads, in.reference.sequence, in.regions, config, in.sample_id);
    const fs::path dir(config.output_dir);
    fs::create_directories(dir);
    write_detect_outputs(sep.analysis, dir);

    for (std::size_t k = 0; k < sep.strain_reads.size(); ++k) {
        const std::string stem = in.sample_id + ".strain" + std::to_string(k);
        {
            auto out = open_out(dir / (stem + ".sam"));
            write_sam(out, in.sam.header, sep.strain_reads[k]);
        }
        write_fasta_file((dir / (stem + ".fasta")).string(), {{in.sample_id + "_strain" + std::to_string(k),
                                                               sep.consensus[k]}});
    }
    auto out = open_out(dir / "assignments.tsv");
    write_assignments_tsv(out, sep.assignments, static_cast<int>(sep.strain_reads.size()));
    return sep.analysis.report;
}

void cmd_simulate(const SyntheticSpec& spec, const std::string& output_dir) {
    spec.validate();
    const auto sample = make_sample(spec);
    const fs::path dir(output_dir);
    fs::create_directories(dir);
    write_fasta_file((dir / "reference.fasta").string(), {{kSimulatedContig, sample.truth.reference}});
    {
        auto out = open_out(dir / "reads.sam");
        write_sam(out, make_header(kSimulatedContig, spec.ref_length), sample.reads);
    }
    auto out = open_out(dir / "truth.json");
    out << truth_to_json({spec, sample.truth});
}

EvaluationSummary evaluate_panel(const std::string& panel_dir) {
    if (!fs::is_directory(panel_dir)) throw std::invalid_argument("panel directory not found: " + panel_dir);
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(panel_dir)) {
        if (entry.is_directory()) dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());

    EvaluationSummary summary;
    for (const auto& dir : dirs) {
        const auto name = dir.filename().string();
        if (!fs::exists(dir / "truth.json")) {
            summary.warnings.push_back(name + ": missing truth.json, skipped");
            continue;
        }
        if (!fs::exists(dir / "report.json")) {
            summary.warnings.push_back(name + ": missing report.json, skipped");
            continue;
        }
        const auto truth = truth_from_json(slurp(dir / "truth.json"));
        const auto report = report_from_json(slurp(dir / "report.json"));

        SampleEvaluation e;
        auto& rec = e.record;
        rec.sample_id = report.sample_id.empty() ? name : report.sample_id;
        const auto& props = truth.truth.proportions;
        const bool mixed = props.size() > 1 && std::all_of(props.begin(), props.end(), [](double p) { return p > 0; });
        rec.true_label = mixed ? Call::Mixed : Call::Pure;
        rec.true_proportions = props;
        std::sort(rec.true_proportions.begin(), rec.true_proportions.end(), std::greater<>());
        rec.snp_distance = 2 * truth.spec.snps_per_strain;
        rec.lr_statistic = report.lr_statistic;
        rec.call = report.call;
        if (report.call == Call::Mixed) rec.estimated_proportions = report.em_proportions;

        const auto ranks = strain_ranks(props);
        if (mixed && fs::exists(dir / "assignments.tsv")) {
            std::ifstream in(dir / "assignments.tsv");
            const auto rows = read_assignments_tsv(in);
            std::vector<StrainAssignment> assigned;
            int n = static_cast<int>(props.size());
            for (const auto& row : rows) {
                StrainAssignment a;
                a.read_id = row.read_id;
                a.strain = row.strain;
                if (row.strain) n = std::max(n, *row.strain + 1);
                assigned.push_back(std::move(a));
            }
            std::map<std::string, int> provenance;
            for (const auto& [id, strain] : truth.truth.read_provenance)
                provenance[id] = ranks[static_cast<std::size_t>(strain)];
            e.confusion = confusion_matrix(assigned, provenance, n);
        }

        if (mixed) {
            const auto positions = truth.truth.variant_positions();
            std::vector<std::size_t> mismatches;
            for (std::size_t k = 0; k < props.size(); ++k) {
                const auto path = dir / (rec.sample_id + ".strain" + std::to_string(k) + ".fasta");
                if (!fs::exists(path)) break;
                const auto records = read_fasta_file(path.string());
                if (records.empty()) break;
                std::size_t truth_index = 0;
                for (std::size_t t = 0; t < ranks.size(); ++t) {
                    if (ranks[t] == static_cast<int>(k)) truth_index = t;
                }
                mismatches.push_back(
                    consensus_mismatches(records.front().sequence, truth.truth.strain_genomes[truth_index], positions));
            }
            if (mismatches.size() == props.size()) e.consensus_mismatches = std::move(mismatches);
        }
        summary.samples.push_back(std::move(e));
    }

    std::vector<double> t, est;
    std::vector<PanelRecord> records;
    std::vector<double> scores;
    std::vector<Call> labels;
    for (const auto& e : summary.samples) {
        const auto& r = e.record;
        records.push_back(r);
        scores.push_back(r.lr_statistic);
        labels.push_back(r.true_label);
        if (r.true_label != Call::Mixed) continue;
        if (r.call == Call::Mixed && !r.estimated_proportions.empty()) {
            t.push_back(r.true_proportions.front());
            est.push_back(r.estimated_proportions.front());
            summary.rmse_samples.push_back(r.sample_id);
        } else {
            summary.excluded_from_rmse.push_back(r.sample_id);
        }
    }
    if (!t.empty()) {
        summary.rmse = rmse(t, est);
        double worst = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) worst = std::max(worst, std::abs(t[i] - est[i]));
        summary.max_deviation = worst;
    }
    const bool both = std::count(labels.begin(), labels.end(), Call::Mixed) > 0 &&
                      std::count(labels.begin(), labels.end(), Call::Pure) > 0;
    if (both) summary.roc = roc_auc(scores, labels);
    else if (!labels.empty()) summary.warnings.push_back("ROC needs both pure and mixed samples; AUC not computed");
    summary.alpha_grid = alpha_calibration(records);
    summary.monotonicity = alpha_monotonicity(summary.alpha_grid);
    return summary;
}

EvaluationSummary cmd_evaluate(const std::string& panel_dir, const std::string& output_dir) {
    auto summary = evaluate_panel(panel_dir);
    const fs::path dir(output_dir);
    fs::create_directories(dir);
    {
        auto out = open_out(dir / "evaluation.json");
        out << evaluation_to_json(summary);
    }
    char buf[64];
    if (summary.roc) {
        auto out = open_out(dir / "roc_curve.tsv");
        out << "fpr\ttpr\tthreshold\n";
        for (std::size_t i = 0; i < summary.roc->points.size(); ++i) {
            const auto [x, y] = summary.roc->points[i];
            std::snprintf(buf, sizeof buf, "%.6g\t%.6g\t", x, y);
            out << buf;
            if (i == 0) out << "inf\n";
            else {
                std::snprintf(buf, sizeof buf, "%.10g", summary.roc->thresholds[i - 1]);
                out << buf << '\n';
            }
        }
    }
    {
        auto out = open_out(dir / "proportions.tsv");
        out << "sample_id\ttrue_label\tcall\ttrue_major\testimated_major\n";
        for (const auto& e : summary.samples) {
            const auto& r = e.record;
            out << r.sample_id << '\t' << to_string(r.true_label) << '\t' << to_string(r.call) << '\t';
            if (!r.true_proportions.empty()) {
                std::snprintf(buf, sizeof buf, "%.6g", r.true_proportions.front());
                out << buf;
            }
            out << '\t';
            if (r.estimated_proportions.empty()) out << "NA";
            else {
                std::snprintf(buf, sizeof buf, "%.6g", r.estimated_proportions.front());
                out << buf;
            }
            out << '\n';
        }
    }
    for (const auto& e : summary.samples) {
        if (!e.confusion) continue;
        auto out = open_out(dir / ("confusion_" + e.record.sample_id + ".tsv"));
        const auto& counts = e.confusion->counts;
        out << "true";
        for (std::size_t k = 0; k < counts.size(); ++k) out << "\tassigned_" << k;
        out << '\n';
        for (std::size_t i = 0; i < counts.size(); ++i) {
            out << "strain_" << i;
            for (auto c : counts[i]) out << '\t' << c;
            out << '\n';
        }
    }
    return summary;
}

}  // namespace strainsplit
