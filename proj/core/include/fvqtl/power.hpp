#pragma once

// Power / precision / false-positive harness for the simulation studies.
//
// Single-QTL study: a replicate detects the QTL when the genome-wide maximum
// of the statistic reaches a threshold shared by all replicates of the cell;
// the threshold is the 1 - alpha quantile of maxima over null replicates
// (same design, no QTL effect). The position estimate is the argmax.
//
// Multiple-QTL study: stepwise search with the penalty set the same way. A
// true QTL is detected when the chosen model has a locus on its chromosome
// within `window` cM; every unmatched model locus is a false positive.

#include "fvqtl/modelsel.hpp"
#include "fvqtl/sim.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fvqtl {

enum class Study { Single, Multi };

std::string_view to_string(Study study);
Study parse_study(std::string_view text);

struct PowerConfig {
    Study study = Study::Multi;
    std::size_t n = 162;
    std::size_t replicates = 100;
    std::uint64_t seed = 1;
    int threads = 1;
    double alpha = 0.05;
    GridSpec grid{1.0};
    double error_prob = kDefaultErrorProb;
    std::size_t null_replicates = 1000;
    /// Skip null calibration and use these thresholds.
    std::optional<double> slod_threshold;
    std::optional<double> mlod_threshold;

    LogisticQtlSpec single_spec;
    CovarianceSpec covariance;
    double noise_sd = 0.0;

    CubicQtlSpec multi_spec;
    double window = 15.0;
    StepwiseOptions stepwise;
};

struct QtlPower {
    std::string chr;
    double true_pos = 0.0;
    std::size_t detected = 0;
    double power = 0.0;     // percent
    double mean_pos = 0.0;  // over detecting replicates
    /// Spread of the position estimates: standard deviation across
    /// detecting replicates.
    double se_pos = 0.0;
    double rmse = 0.0;
};

struct MethodPower {
    Stat stat = Stat::Slod;
    double threshold = 0.0;
    std::vector<QtlPower> qtl;
    std::size_t false_positive_loci = 0;
    std::size_t false_positive_replicates = 0;
    /// Percent of replicates whose model holds at least one false positive.
    double false_positive_rate = 0.0;
};

struct PowerReport {
    Study study = Study::Multi;
    std::size_t n = 0;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    double mean_heritability = 0.0;  // single-QTL study only
    std::vector<MethodPower> methods;
};

/// Null thresholds (SLOD, MLOD) for the configured design.
std::pair<double, double> null_thresholds(const PowerConfig& config);

PowerReport run_power_study(const PowerConfig& config);

}  // namespace fvqtl
