#pragma once

// The fvqtl command-line front end. Each subcommand reads a RunConfig,
// validates it completely, runs, and writes its outputs plus a one-line
// JSON sidecar (<file>.meta.json) holding the full configuration.

#include "fvqtl/fvqtl.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fvqtl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

/// Bad flag values, unreadable inputs or an existing output directory.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;

    std::filesystem::path geno;
    std::filesystem::path map;
    std::filesystem::path pheno;
    std::string cross = "ril";
    double step = 1.0;
    double error_prob = kDefaultErrorProb;
    bool interpolate = false;

    std::string stat = "slod";
    std::size_t n_perm = 1000;
    std::vector<double> alpha{0.05};
    /// A number or "from-perm".
    std::string penalty = "from-perm";
    std::size_t max_qtl = 10;
    double min_spacing = 5.0;

    /// Loci for profile/fit, as chr@pos; alternatively a model.json.
    std::vector<std::string> loci;
    std::filesystem::path model;

    std::string study = "multi";
    std::size_t n = 162;
    std::size_t replicates = 100;
    std::size_t n_null = 1000;
    std::string cov = "ar";
    double c = 1.0;
    double noise_sd = 0.0;
    std::string coding = "plus-minus-one";
    double window = 15.0;

    std::uint64_t seed = 1;
    int threads = 0;
    std::filesystem::path out;
    bool force = false;
    bool dump_probs = false;
};

nlohmann::json to_json(const RunConfig& config);

/// Checks every field relevant to `config.command`; throws ValidationError.
void validate(const RunConfig& config);

/// Parses "chr@pos" or "chr<name>@pos" into (chromosome, position).
std::pair<std::string, double> parse_locus(const std::string& text);

void cmd_scan(const RunConfig& config);
void cmd_perm(const RunConfig& config);
void cmd_stepwise(const RunConfig& config);
void cmd_profile(const RunConfig& config);
void cmd_fit(const RunConfig& config);
void cmd_simulate(const RunConfig& config);
void cmd_power(const RunConfig& config);

/// Validates and dispatches on config.command.
void run(const RunConfig& config);

/// Full entry point: parses argv, runs, maps failures to exit codes and
/// prints messages on stderr.
int main(int argc, char** argv);

}  // namespace fvqtl::cli
