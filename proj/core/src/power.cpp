#include "fvqtl/power.hpp"

#include "fvqtl/parallel.hpp"
#include "fvqtl/scan.hpp"

#include <fmt/format.h>

#include <array>
#include <cmath>

namespace fvqtl {

std::string_view to_string(Study study) { return study == Study::Single ? "single" : "multi"; }

Study parse_study(std::string_view text) {
    if (text == "single") return Study::Single;
    if (text == "multi") return Study::Multi;
    throw std::invalid_argument(fmt::format("unknown study '{}' (expected single or multi)", text));
}

namespace {

constexpr std::array<Stat, 2> kStats{Stat::Slod, Stat::Mlod};

SimulatedData simulate(const PowerConfig& config, bool null_model, std::uint64_t seed) {
    if (config.study == Study::Single) {
        const auto spec = null_model ? config.single_spec.without_effect() : config.single_spec;
        return sim_single_qtl(spec, config.covariance, config.n, config.noise_sd, seed);
    }
    const auto spec = null_model ? config.multi_spec.without_effect() : config.multi_spec;
    return sim_multi_qtl(spec, config.n, seed);
}

GenoProbs probs_for(const PowerConfig& config, const SimulatedData& sim) {
    return calc_genoprob(sim.data.geno, sim.data.map, sim.data.geno.cross(), config.grid, config.error_prob);
}

// Per-replicate outcome for one statistic.
struct Outcome {
    std::vector<bool> detected;
    std::vector<double> pos;
    std::size_t false_positives = 0;
};

Outcome single_outcome(const ScanSummary& summary, Stat stat, double threshold) {
    const auto best = genome_max(summary, stat);
    Outcome o;
    o.detected = {best.value >= threshold};
    o.pos = {summary.chromosomes[best.where.chr].grid[best.where.pos].pos};
    return o;
}

Outcome multi_outcome(const QtlModel& model, const std::vector<TrueQtl>& truth, double window) {
    Outcome o;
    o.detected.assign(truth.size(), false);
    o.pos.assign(truth.size(), 0.0);
    std::vector<bool> used(model.loci.size(), false);
    for (std::size_t j = 0; j < truth.size(); ++j) {
        double best_dist = 0.0;
        std::optional<std::size_t> match;
        for (std::size_t m = 0; m < model.loci.size(); ++m) {
            if (used[m] || model.loci[m].chr != truth[j].chr) continue;
            const double dist = std::abs(model.loci[m].pos - truth[j].pos);
            if (dist <= window && (!match || dist < best_dist)) {
                best_dist = dist;
                match = m;
            }
        }
        if (match) {
            used[*match] = true;
            o.detected[j] = true;
            o.pos[j] = model.loci[*match].pos;
        }
    }
    for (bool u : used)
        if (!u) ++o.false_positives;
    return o;
}

}  // namespace

std::pair<double, double> null_thresholds(const PowerConfig& config) {
    if (config.null_replicates < 1) throw std::invalid_argument("null_replicates must be >= 1");
    std::vector<double> slod_max(config.null_replicates), mlod_max(config.null_replicates);
    parallel_for(config.null_replicates, config.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto sim = simulate(config, true, replicate_seed(config.seed, stream::kNullReplicate, i));
            const auto probs = probs_for(config, sim);
            const auto y = center_phenotypes(sim.data.pheno.values());
            const auto [s, m] = HkScanner(probs).genome_max(y.yc, y.rss0);
            slod_max[i] = s;
            mlod_max[i] = m;
        }
    });
    return {empirical_threshold(slod_max, config.alpha), empirical_threshold(mlod_max, config.alpha)};
}

PowerReport run_power_study(const PowerConfig& config) {
    if (config.replicates < 1) throw std::invalid_argument("replicates must be >= 1");
    if (config.n < 2) throw std::invalid_argument("n must be >= 2");

    std::array<double, 2> thresholds{};
    if (config.slod_threshold && config.mlod_threshold) {
        thresholds = {*config.slod_threshold, *config.mlod_threshold};
    } else {
        const auto [s, m] = null_thresholds(config);
        thresholds = {config.slod_threshold.value_or(s), config.mlod_threshold.value_or(m)};
    }

    std::vector<TrueQtl> truth;
    if (config.study == Study::Single) {
        truth.push_back({"1", config.single_spec.qtl_pos});
    } else {
        for (const auto& q : config.multi_spec.qtl) truth.push_back({q.chr, q.pos});
    }

    // outcomes[replicate][stat]
    std::vector<std::array<Outcome, 2>> outcomes(config.replicates);
    parallel_for(config.replicates, config.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto sim = simulate(config, false, replicate_seed(config.seed, stream::kReplicate, i));
            const auto probs = probs_for(config, sim);
            if (config.study == Study::Single) {
                const auto summary = summarize(scan_hk(probs, sim.data.pheno));
                for (std::size_t s = 0; s < 2; ++s) outcomes[i][s] = single_outcome(summary, kStats[s], thresholds[s]);
            } else {
                for (std::size_t s = 0; s < 2; ++s) {
                    const auto model = stepwise_search(probs, sim.data.pheno, kStats[s], thresholds[s], config.stepwise);
                    outcomes[i][s] = multi_outcome(model, sim.truth, config.window);
                }
            }
        }
    });

    PowerReport report;
    report.study = config.study;
    report.n = config.n;
    report.replicates = config.replicates;
    report.seed = config.seed;
    if (config.study == Study::Single)
        report.mean_heritability = heritability_profile(config.single_spec, config.covariance, config.noise_sd).mean;

    const double reps = static_cast<double>(config.replicates);
    for (std::size_t s = 0; s < 2; ++s) {
        MethodPower mp;
        mp.stat = kStats[s];
        mp.threshold = thresholds[s];
        for (std::size_t j = 0; j < truth.size(); ++j) {
            QtlPower qp;
            qp.chr = truth[j].chr;
            qp.true_pos = truth[j].pos;
            double sum = 0.0, sum_sq_err = 0.0;
            for (const auto& o : outcomes) {
                if (!o[s].detected[j]) continue;
                ++qp.detected;
                sum += o[s].pos[j];
                sum_sq_err += (o[s].pos[j] - truth[j].pos) * (o[s].pos[j] - truth[j].pos);
            }
            qp.power = 100.0 * static_cast<double>(qp.detected) / reps;
            if (qp.detected > 0) {
                const double d = static_cast<double>(qp.detected);
                qp.mean_pos = sum / d;
                qp.rmse = std::sqrt(sum_sq_err / d);
                double ss = 0.0;
                for (const auto& o : outcomes)
                    if (o[s].detected[j]) ss += (o[s].pos[j] - qp.mean_pos) * (o[s].pos[j] - qp.mean_pos);
                qp.se_pos = qp.detected > 1 ? std::sqrt(ss / (d - 1.0)) : 0.0;
            }
            mp.qtl.push_back(qp);
        }
        for (const auto& o : outcomes) {
            mp.false_positive_loci += o[s].false_positives;
            if (o[s].false_positives > 0) ++mp.false_positive_replicates;
        }
        mp.false_positive_rate = 100.0 * static_cast<double>(mp.false_positive_replicates) / reps;
        report.methods.push_back(std::move(mp));
    }
    return report;
}

}  // namespace fvqtl
