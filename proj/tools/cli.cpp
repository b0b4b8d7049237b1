#include "cli.hpp"

#include "CLI11.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <iostream>

namespace fvqtl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool needs_dataset(const std::string& cmd) {
    return cmd == "scan" || cmd == "perm" || cmd == "stepwise" || cmd == "profile" || cmd == "fit";
}

template <typename Parse>
void check_parse(const std::string& field, const std::string& value, Parse parse) {
    try {
        parse(value);
    } catch (const std::invalid_argument& e) {
        throw ValidationError(fmt::format("--{}: {}", field, e.what()));
    }
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ValidationError(message);
}

std::optional<double> numeric_penalty(const std::string& text) {
    if (text == "from-perm") return std::nullopt;
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || !std::isfinite(value) || value <= 0.0)
        throw ValidationError(fmt::format("--penalty: expected a positive number or from-perm, got '{}'", text));
    return value;
}

std::string label_of(double value) { return fmt::format("{:g}", value); }

std::string position_key(const std::string& chr, double pos) { return fmt::format("{}:{:g}", chr, pos); }

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    return out;
}

// Writes <file>.meta.json next to an output.
void write_sidecar(const fs::path& file, const RunConfig& config) {
    json meta;
    meta["file"] = file.filename().string();
    meta["command"] = config.command;
    meta["version"] = FVQTL_VERSION;
    meta["seed"] = config.seed;
    meta["step"] = config.step;
    meta["cross"] = config.cross;
    meta["config"] = to_json(config);
    auto out = open_output(fs::path(file.string() + ".meta.json"));
    out << meta.dump() << '\n';
}

void prepare_output_dir(const RunConfig& config) { fs::create_directories(config.out); }

Dataset load_dataset(const RunConfig& config) {
    auto data = read_dataset(config.geno, config.map, config.pheno, parse_cross(config.cross));
    if (config.interpolate) {
        data.pheno = interpolate_missing(data.pheno);
    } else if (data.pheno.has_missing()) {
        throw ValidationError(
            fmt::format("{}: phenotypes contain missing cells; rerun with --interpolate", config.pheno.string()));
    }
    return data;
}

GenoProbs probs_for(const RunConfig& config, const Dataset& data) {
    auto probs = calc_genoprob(data.geno, data.map, data.geno.cross(), GridSpec{config.step}, config.error_prob,
                               resolve_threads(config.threads));
    if (config.dump_probs) {
        for (std::size_t c = 0; c < probs.chromosomes.size(); ++c) {
            const auto path = config.out / fmt::format("genoprob_{}.csv", probs.chromosomes[c].chr);
            write_genoprob_csv(path, probs, c);
            write_sidecar(path, config);
        }
    }
    return probs;
}

void write_lod(const fs::path& path, const SignedLodMatrix& lods) {
    auto out = open_output(path);
    out << "position";
    for (double t : lods.time_labels) out << ',' << label_of(t);
    out << '\n';
    for (const auto& chr : lods.chromosomes) {
        for (std::size_t p = 0; p < chr.grid.size(); ++p) {
            out << position_key(chr.chr, chr.grid[p].pos);
            for (Eigen::Index t = 0; t < chr.lod.cols(); ++t)
                out << ',' << format_number(chr.lod(static_cast<Eigen::Index>(p), t));
            out << '\n';
        }
    }
}

void write_summary(const fs::path& path, const ScanSummary& summary) {
    auto out = open_output(path);
    out << "position,chr,pos,slod,mlod\n";
    for (const auto& chr : summary.chromosomes) {
        for (std::size_t p = 0; p < chr.grid.size(); ++p) {
            const auto i = static_cast<Eigen::Index>(p);
            out << position_key(chr.chr, chr.grid[p].pos) << ',' << chr.chr << ',' << format_number(chr.grid[p].pos)
                << ',' << format_number(chr.slod(i)) << ',' << format_number(chr.mlod(i)) << '\n';
        }
    }
}

// Rows "max,<index>,slod,mlod" for every permutation, then
// "threshold,<alpha>,slod,mlod".
void write_perm(const fs::path& path, const PermutationMaxima& maxima, const std::vector<double>& alphas) {
    auto out = open_output(path);
    out << "kind,key,slod,mlod\n";
    for (std::size_t i = 0; i < maxima.slod.size(); ++i)
        out << "max," << i + 1 << ',' << format_number(maxima.slod[i]) << ',' << format_number(maxima.mlod[i]) << '\n';
    for (double a : alphas)
        out << "threshold," << label_of(a) << ',' << format_number(empirical_threshold(maxima.slod, a)) << ','
            << format_number(empirical_threshold(maxima.mlod, a)) << '\n';
}

json model_to_json(const QtlModel& model) {
    json loci = json::array();
    for (const auto& q : model.loci) loci.push_back({{"chr", q.chr}, {"pos", q.pos}, {"label", q.label()}});
    return {{"stat", std::string(to_string(model.stat))},
            {"penalty", model.penalty},
            {"model_lod", model.model_lod},
            {"plod", model.plod},
            {"n_qtl", model.size()},
            {"loci", loci}};
}

void write_profiles(const fs::path& path, const ProfileCurves& curves) {
    auto out = open_output(path);
    out << "qtl,chr,pos," << to_string(curves.stat) << '\n';
    for (const auto& curve : curves.curves) {
        for (std::size_t p = 0; p < curve.grid.size(); ++p)
            out << curve.qtl.label() << ',' << curve.qtl.chr << ',' << format_number(curve.grid[p].pos) << ','
                << format_number(curve.values(static_cast<Eigen::Index>(p))) << '\n';
    }
}

void write_effects(const fs::path& path, const EffectCurves& effects) {
    auto out = open_output(path);
    out << "time,mu";
    for (const auto& q : effects.loci) out << ",beta_" << q.label();
    if (effects.dominance.size() > 0)
        for (const auto& q : effects.loci) out << ",dom_" << q.label();
    out << ",lod\n";
    for (std::size_t t = 0; t < effects.time_labels.size(); ++t) {
        const auto ti = static_cast<Eigen::Index>(t);
        out << format_number(effects.time_labels[t]) << ',' << format_number(effects.mu(ti));
        for (Eigen::Index j = 0; j < effects.beta.rows(); ++j) out << ',' << format_number(effects.beta(j, ti));
        for (Eigen::Index j = 0; j < effects.dominance.rows(); ++j)
            out << ',' << format_number(effects.dominance(j, ti));
        out << ',' << format_number(effects.lod(ti)) << '\n';
    }
}

void write_json(const fs::path& path, const json& value, const RunConfig& config) {
    auto out = open_output(path);
    out << value.dump(2) << '\n';
    write_sidecar(path, config);
}

// Loci from --loci or --model; each must be a grid position.
QtlModel model_from_config(const RunConfig& config, const GenoProbs& probs, Stat stat) {
    std::vector<std::pair<std::string, double>> wanted;
    if (!config.model.empty()) {
        std::ifstream in(config.model);
        if (!in) throw ValidationError(fmt::format("--model: cannot read {}", config.model.string()));
        json doc;
        try {
            doc = json::parse(in);
            for (const auto& q : doc.at("loci")) wanted.emplace_back(q.at("chr").get<std::string>(), q.at("pos").get<double>());
        } catch (const json::exception& e) {
            throw ValidationError(fmt::format("--model: {}: {}", config.model.string(), e.what()));
        }
    } else {
        for (const auto& text : config.loci) wanted.push_back(parse_locus(text));
    }
    QtlModel model;
    model.stat = stat;
    for (const auto& [chr, pos] : wanted) {
        try {
            model.loci.push_back(locate(probs, chr, pos));
        } catch (const DataError& e) {
            throw ValidationError(fmt::format("locus {}@{:g}: {}", chr, pos, e.what()));
        }
    }
    return model;
}

}  // namespace

json to_json(const RunConfig& c) {
    json j;
    j["command"] = c.command;
    j["geno"] = c.geno.string();
    j["map"] = c.map.string();
    j["pheno"] = c.pheno.string();
    j["cross"] = c.cross;
    j["step"] = c.step;
    j["error_prob"] = c.error_prob;
    j["interpolate"] = c.interpolate;
    j["stat"] = c.stat;
    j["n_perm"] = c.n_perm;
    j["alpha"] = c.alpha;
    j["penalty"] = c.penalty;
    j["max_qtl"] = c.max_qtl;
    j["min_spacing"] = c.min_spacing;
    j["loci"] = c.loci;
    j["model"] = c.model.string();
    j["study"] = c.study;
    j["n"] = c.n;
    j["replicates"] = c.replicates;
    j["n_null"] = c.n_null;
    j["cov"] = c.cov;
    j["c"] = c.c;
    j["noise_sd"] = c.noise_sd;
    j["coding"] = c.coding;
    j["window"] = c.window;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["out"] = c.out.string();
    j["force"] = c.force;
    j["dump_probs"] = c.dump_probs;
    return j;
}

std::pair<std::string, double> parse_locus(const std::string& text) {
    const auto at = text.rfind('@');
    if (at == std::string::npos || at == 0 || at + 1 == text.size())
        throw ValidationError(fmt::format("locus '{}': expected chr@pos", text));
    std::string chr = text.substr(0, at);
    if (chr.size() > 3 && chr.compare(0, 3, "chr") == 0) chr = chr.substr(3);
    const std::string pos_text = text.substr(at + 1);
    std::size_t used = 0;
    double pos = 0.0;
    try {
        pos = std::stod(pos_text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != pos_text.size() || !std::isfinite(pos))
        throw ValidationError(fmt::format("locus '{}': position is not a number", text));
    return {chr, pos};
}

void validate(const RunConfig& c) {
    static const std::vector<std::string> commands{"scan", "perm", "stepwise", "profile", "fit", "simulate", "power"};
    require(std::find(commands.begin(), commands.end(), c.command) != commands.end(),
            fmt::format("unknown command '{}'", c.command));

    require(!c.out.empty(), "--out is required");
    require(c.force || !fs::exists(c.out),
            fmt::format("--out: {} already exists (use --force to overwrite)", c.out.string()));
    require(c.threads >= 0, "--threads must be >= 0");

    if (needs_dataset(c.command)) {
        for (const auto& [flag, path] : {std::pair{"geno", &c.geno}, {"map", &c.map}, {"pheno", &c.pheno}}) {
            require(!path->empty(), fmt::format("--{} is required", flag));
            require(fs::is_regular_file(*path), fmt::format("--{}: {} is not a readable file", flag, path->string()));
        }
        check_parse("cross", c.cross, [](const std::string& s) { parse_cross(s); });
        require(std::isfinite(c.step) && c.step >= 0.0, "--step must be a finite number >= 0");
        require(c.error_prob >= 0.0 && c.error_prob < 1.0, "--error-prob must lie in [0, 1)");
        check_parse("stat", c.stat, [](const std::string& s) { parse_stat(s); });
    }

    if (c.command == "perm" || c.command == "stepwise" || c.command == "power") {
        require(!c.alpha.empty(), "--alpha needs at least one value");
        for (double a : c.alpha) require(a > 0.0 && a <= 1.0, fmt::format("--alpha {} must lie in (0, 1]", a));
    }
    if (c.command == "perm") require(c.n_perm >= 1, "--n-perm must be >= 1");
    if (c.command == "stepwise") {
        if (!numeric_penalty(c.penalty)) require(c.n_perm >= 1, "--n-perm must be >= 1 with --penalty from-perm");
        require(c.max_qtl >= 1, "--max-qtl must be >= 1");
        require(c.min_spacing >= 0.0, "--min-spacing must be >= 0");
    }
    if (c.command == "profile" || c.command == "fit") {
        require(c.loci.empty() != c.model.empty(), "give exactly one of --loci or --model");
        for (const auto& l : c.loci) parse_locus(l);
        if (!c.model.empty())
            require(fs::is_regular_file(c.model), fmt::format("--model: {} is not a readable file", c.model.string()));
    }

    if (c.command == "simulate" || c.command == "power") {
        check_parse("study", c.study, [](const std::string& s) { parse_study(s); });
        check_parse("cov", c.cov, [](const std::string& s) { parse_covariance(s); });
        check_parse("coding", c.coding, [](const std::string& s) { parse_coding(s); });
        require(c.n >= 2, "--n must be >= 2");
        require(std::isfinite(c.c) && c.c >= 0.0, "--c must be >= 0");
        require(std::isfinite(c.noise_sd) && c.noise_sd >= 0.0, "--noise-sd must be >= 0");
    }
    if (c.command == "power") {
        require(c.replicates >= 1, "--replicates must be >= 1");
        require(c.n_null >= 1, "--n-null must be >= 1");
        require(c.window > 0.0, "--window must be > 0");
        require(std::isfinite(c.step) && c.step >= 0.0, "--step must be a finite number >= 0");
        require(c.max_qtl >= 1, "--max-qtl must be >= 1");
        require(c.min_spacing >= 0.0, "--min-spacing must be >= 0");
    }
}

void cmd_scan(const RunConfig& config) {
    prepare_output_dir(config);
    const auto data = load_dataset(config);
    const auto probs = probs_for(config, data);
    const auto lods = scan_hk(probs, data.pheno);
    const auto lod_path = config.out / "lod.csv";
    write_lod(lod_path, lods);
    write_sidecar(lod_path, config);
    const auto summary_path = config.out / "summary.csv";
    write_summary(summary_path, summarize(lods));
    write_sidecar(summary_path, config);
}

void cmd_perm(const RunConfig& config) {
    prepare_output_dir(config);
    const auto data = load_dataset(config);
    const auto probs = probs_for(config, data);
    const auto maxima = permutation_maxima(probs, data.pheno, config.n_perm, config.seed, resolve_threads(config.threads));
    const auto path = config.out / "perm.csv";
    write_perm(path, maxima, config.alpha);
    write_sidecar(path, config);
}

void cmd_stepwise(const RunConfig& config) {
    prepare_output_dir(config);
    const auto data = load_dataset(config);
    const auto probs = probs_for(config, data);
    const Stat stat = parse_stat(config.stat);
    const int threads = resolve_threads(config.threads);

    double penalty = 0.0;
    if (const auto fixed = numeric_penalty(config.penalty)) {
        penalty = *fixed;
    } else {
        const auto maxima = permutation_maxima(probs, data.pheno, config.n_perm, config.seed, threads);
        const auto path = config.out / "perm.csv";
        write_perm(path, maxima, config.alpha);
        write_sidecar(path, config);
        penalty = empirical_threshold(stat == Stat::Slod ? maxima.slod : maxima.mlod, config.alpha.front());
        if (penalty <= 0.0)
            throw std::runtime_error("permutation threshold is 0; the phenotypes carry no signal to penalise against");
    }

    StepwiseOptions options;
    options.max_qtl = config.max_qtl;
    options.min_spacing = config.min_spacing;
    options.threads = threads;
    const auto model = stepwise_search(probs, data.pheno, stat, penalty, options);

    write_json(config.out / "model.json", model_to_json(model), config);
    const auto profiles_path = config.out / "profiles.csv";
    // The null model has nothing to profile; the file keeps its header.
    write_profiles(profiles_path, model.size() > 0 ? profile(probs, data.pheno, model, stat) : ProfileCurves{stat, {}});
    write_sidecar(profiles_path, config);
    const auto effects_path = config.out / "effects.csv";
    write_effects(effects_path, fit_effects(probs, data.pheno, model));
    write_sidecar(effects_path, config);
}

void cmd_profile(const RunConfig& config) {
    prepare_output_dir(config);
    const auto data = load_dataset(config);
    const auto probs = probs_for(config, data);
    const Stat stat = parse_stat(config.stat);
    const auto model = model_from_config(config, probs, stat);
    const auto path = config.out / "profiles.csv";
    write_profiles(path, profile(probs, data.pheno, model, stat));
    write_sidecar(path, config);
}

void cmd_fit(const RunConfig& config) {
    prepare_output_dir(config);
    const auto data = load_dataset(config);
    const auto probs = probs_for(config, data);
    const auto model = model_from_config(config, probs, parse_stat(config.stat));
    const auto path = config.out / "effects.csv";
    write_effects(path, fit_effects(probs, data.pheno, model));
    write_sidecar(path, config);
}

namespace {

PowerConfig power_config(const RunConfig& c) {
    PowerConfig p;
    p.study = parse_study(c.study);
    p.n = c.n;
    p.replicates = c.replicates;
    p.seed = c.seed;
    p.threads = resolve_threads(c.threads);
    p.alpha = c.alpha.front();
    p.grid = GridSpec{c.step};
    p.error_prob = c.error_prob;
    p.null_replicates = c.n_null;
    const auto kind = parse_covariance(c.cov);
    p.covariance = kind == CovarianceKind::Autoregressive   ? CovarianceSpec::autoregressive(c.c)
                   : kind == CovarianceKind::Equicorrelated ? CovarianceSpec::equicorrelated(c.c)
                                                            : CovarianceSpec::unstructured(c.c);
    p.noise_sd = c.noise_sd;
    p.multi_spec.coding = parse_coding(c.coding);
    p.window = c.window;
    p.stepwise.max_qtl = c.max_qtl;
    p.stepwise.min_spacing = c.min_spacing;
    return p;
}

}  // namespace

void cmd_simulate(const RunConfig& config) {
    prepare_output_dir(config);
    const auto p = power_config(config);
    const auto sim = p.study == Study::Single ? sim_single_qtl(p.single_spec, p.covariance, p.n, p.noise_sd, p.seed)
                                              : sim_multi_qtl(p.multi_spec, p.n, p.seed);
    write_dataset(config.out, sim.data);
    for (const char* name : {"map.csv", "geno.csv", "pheno.csv"}) write_sidecar(config.out / name, config);

    json truth;
    truth["study"] = std::string(to_string(p.study));
    truth["cross"] = std::string(to_string(sim.data.geno.cross()));
    truth["qtl"] = json::array();
    for (const auto& q : sim.truth) truth["qtl"].push_back({{"chr", q.chr}, {"pos", q.pos}});
    write_json(config.out / "truth.json", truth, config);
}

void cmd_power(const RunConfig& config) {
    prepare_output_dir(config);
    const auto report = run_power_study(power_config(config));

    const auto csv_path = config.out / "power_report.csv";
    {
        auto out = open_output(csv_path);
        out << "stat,threshold,chr,true_pos,detected,power,mean_pos,se_pos,rmse,fp_loci,fp_replicates,fp_rate\n";
        for (const auto& m : report.methods) {
            for (const auto& q : m.qtl)
                out << to_string(m.stat) << ',' << format_number(m.threshold) << ',' << q.chr << ','
                    << format_number(q.true_pos) << ',' << q.detected << ',' << format_number(q.power) << ','
                    << format_number(q.mean_pos) << ',' << format_number(q.se_pos) << ',' << format_number(q.rmse)
                    << ',' << m.false_positive_loci << ',' << m.false_positive_replicates << ','
                    << format_number(m.false_positive_rate) << '\n';
        }
    }
    write_sidecar(csv_path, config);

    json doc;
    doc["study"] = std::string(to_string(report.study));
    doc["n"] = report.n;
    doc["replicates"] = report.replicates;
    doc["seed"] = report.seed;
    if (report.study == Study::Single) doc["mean_heritability"] = report.mean_heritability;
    doc["methods"] = json::array();
    for (const auto& m : report.methods) {
        json method{{"stat", std::string(to_string(m.stat))},
                    {"threshold", m.threshold},
                    {"false_positive_loci", m.false_positive_loci},
                    {"false_positive_replicates", m.false_positive_replicates},
                    {"false_positive_rate", m.false_positive_rate},
                    {"qtl", json::array()}};
        for (const auto& q : m.qtl)
            method["qtl"].push_back({{"chr", q.chr},
                                     {"true_pos", q.true_pos},
                                     {"detected", q.detected},
                                     {"power", q.power},
                                     {"mean_pos", q.mean_pos},
                                     {"se_pos", q.se_pos},
                                     {"rmse", q.rmse}});
        doc["methods"].push_back(method);
    }
    write_json(config.out / "power_report.json", doc, config);
}

void run(const RunConfig& config) {
    validate(config);
    const auto& c = config.command;
    if (c == "scan") cmd_scan(config);
    else if (c == "perm") cmd_perm(config);
    else if (c == "stepwise") cmd_stepwise(config);
    else if (c == "profile") cmd_profile(config);
    else if (c == "fit") cmd_fit(config);
    else if (c == "simulate") cmd_simulate(config);
    else cmd_power(config);
}

namespace {

void add_common(CLI::App* sub, RunConfig& c) {
    sub->add_option("--out,-o", c.out, "Output directory (must not exist unless --force)")->required();
    sub->add_flag("--force", c.force, "Write into an existing output directory");
    sub->add_option("--seed", c.seed, "Master random seed")->capture_default_str();
    sub->add_option("--threads", c.threads, "Worker threads (0 = all cores)")->capture_default_str();
}

void add_dataset(CLI::App* sub, RunConfig& c) {
    sub->add_option("--geno", c.geno, "Genotype CSV (id,<markers>; A/B/H/-)")->required();
    sub->add_option("--map", c.map, "Marker map CSV (marker,chr,pos)")->required();
    sub->add_option("--pheno", c.pheno, "Phenotype CSV (id,<time labels>)")->required();
    sub->add_option("--cross", c.cross, "Cross type: ril or f2")->capture_default_str();
    sub->add_option("--step", c.step, "Pseudomarker step in cM (0 = markers only)")->capture_default_str();
    sub->add_option("--error-prob", c.error_prob, "Genotyping error probability")->capture_default_str();
    sub->add_flag("--interpolate", c.interpolate, "Fill missing phenotype cells by linear interpolation");
    sub->add_flag("--dump-probs", c.dump_probs, "Also write genotype probabilities per chromosome");
}

void add_loci(CLI::App* sub, RunConfig& c) {
    sub->add_option("--stat", c.stat, "slod or mlod")->capture_default_str();
    sub->add_option("--loci", c.loci, "QTL as chr@pos (repeat or comma-separate)")->delimiter(',');
    sub->add_option("--model", c.model, "model.json from a stepwise run");
}

void add_simulation(CLI::App* sub, RunConfig& c) {
    sub->add_option("--study", c.study, "single or multi")->capture_default_str();
    sub->add_option("--n", c.n, "Individuals per data set")->capture_default_str();
    sub->add_option("--cov", c.cov, "Single-QTL residual covariance: ar, eq or un")->capture_default_str();
    sub->add_option("--c", c.c, "Covariance scale c")->capture_default_str();
    sub->add_option("--noise-sd", c.noise_sd, "Extra white-noise SD (single-QTL study)")->capture_default_str();
    sub->add_option("--coding", c.coding, "Multi-QTL effect coding: plus-minus-one or zero-one")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig config;
    CLI::App app{"QTL mapping for function-valued traits"};
    app.set_version_flag("--version", std::string(FVQTL_VERSION));
    app.require_subcommand(1);

    auto* scan = app.add_subcommand("scan", "Haley-Knott scan of every time point; writes lod.csv and summary.csv");
    add_dataset(scan, config);
    add_common(scan, config);

    auto* perm = app.add_subcommand("perm", "Permutation maxima and thresholds; writes perm.csv");
    add_dataset(perm, config);
    add_common(perm, config);
    perm->add_option("--stat", config.stat, "slod or mlod (both are always reported)")->capture_default_str();
    perm->add_option("--n-perm", config.n_perm, "Number of permutations")->capture_default_str();
    perm->add_option("--alpha", config.alpha, "Significance level(s)")->delimiter(',')->capture_default_str();

    auto* step = app.add_subcommand("stepwise", "Penalized stepwise search; writes model.json, profiles.csv, effects.csv");
    add_dataset(step, config);
    add_common(step, config);
    step->add_option("--stat", config.stat, "slod or mlod")->capture_default_str();
    step->add_option("--penalty", config.penalty, "Penalty per QTL, or from-perm")->capture_default_str();
    step->add_option("--n-perm", config.n_perm, "Permutations for --penalty from-perm")->capture_default_str();
    step->add_option("--alpha", config.alpha, "Significance level for --penalty from-perm")->capture_default_str();
    step->add_option("--max-qtl", config.max_qtl, "Largest model visited")->capture_default_str();
    step->add_option("--min-spacing", config.min_spacing, "Minimum cM between QTL on a chromosome")
        ->capture_default_str();

    auto* prof = app.add_subcommand("profile", "Profile curves of a given model; writes profiles.csv");
    add_dataset(prof, config);
    add_common(prof, config);
    add_loci(prof, config);

    auto* fit = app.add_subcommand("fit", "Per-time effect curves of a given model; writes effects.csv");
    add_dataset(fit, config);
    add_common(fit, config);
    add_loci(fit, config);

    auto* sim = app.add_subcommand("simulate", "Simulate one data set; writes map/geno/pheno CSV and truth.json");
    add_common(sim, config);
    add_simulation(sim, config);

    auto* power = app.add_subcommand("power", "Power study; writes power_report.csv and power_report.json");
    add_common(power, config);
    add_simulation(power, config);
    power->add_option("--replicates", config.replicates, "Simulated data sets")->capture_default_str();
    power->add_option("--n-null", config.n_null, "Null data sets used to set thresholds")->capture_default_str();
    power->add_option("--alpha", config.alpha, "Significance level")->capture_default_str();
    power->add_option("--step", config.step, "Pseudomarker step in cM")->capture_default_str();
    power->add_option("--window", config.window, "Detection window in cM (multi-QTL study)")->capture_default_str();
    power->add_option("--max-qtl", config.max_qtl, "Largest model visited")->capture_default_str();
    power->add_option("--min-spacing", config.min_spacing, "Minimum cM between QTL on a chromosome")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }
    for (auto* sub : app.get_subcommands()) config.command = sub->get_name();

    try {
        run(config);
    } catch (const ValidationError& e) {
        std::cerr << "fvqtl: " << e.what() << '\n';
        return kExitValidation;
    } catch (const DataError& e) {
        std::cerr << "fvqtl: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "fvqtl: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

}  // namespace fvqtl::cli
