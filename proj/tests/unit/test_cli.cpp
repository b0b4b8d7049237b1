#include "doctest.h"
#include "test_util.hpp"

#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>

using namespace fvqtl;
using testutil::read_file;
using testutil::TempDir;

namespace {

int run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "fvqtl");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return cli::main(static_cast<int>(argv.size()), argv.data());
}

std::vector<std::string> toy_inputs() {
    const auto toy = testutil::toy_dir();
    return {"--geno", (toy / "geno.csv").string(), "--map", (toy / "map.csv").string(),
            "--pheno", (toy / "pheno.csv").string(), "--cross", "f2"};
}

std::vector<std::string> with(std::vector<std::string> base, std::initializer_list<std::string> extra) {
    base.insert(base.end(), extra);
    return base;
}

std::size_t count_lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

TEST_CASE("scan on the toy data set") {
    TempDir dir;
    const auto out = (dir / "scan").string();
    auto args = toy_inputs();
    args.insert(args.begin(), "scan");
    REQUIRE(run_cli(with(args, {"--out", out, "--step", "0"})) == cli::kExitOk);
    const auto lod = read_file(dir / "scan/lod.csv");
    const auto summary = read_file(dir / "scan/summary.csv");
    // Six markers, ten time points, one header line.
    CHECK(count_lines(lod) == 7);
    CHECK(lod.substr(0, lod.find('\n')) == "position,1,2,3,4,5,6,7,8,9,10");
    CHECK(summary.rfind("position,chr,pos,slod,mlod\n", 0) == 0);
    CHECK(summary.find("\n1:20,1,20.000000,") != std::string::npos);
    const auto meta = nlohmann::json::parse(read_file(dir / "scan/lod.csv.meta.json"));
    CHECK(meta["seed"] == 1);
    CHECK(meta["cross"] == "f2");
    CHECK(meta["step"] == 0.0);
    CHECK(meta["version"] == FVQTL_VERSION);
    CHECK(meta["config"]["command"] == "scan");
}

TEST_CASE("existing output directories are protected") {
    TempDir dir;
    auto args = toy_inputs();
    args.insert(args.begin(), "scan");
    const auto out = dir.path().string();
    CHECK(run_cli(with(args, {"--out", out})) == cli::kExitValidation);
    CHECK(run_cli(with(args, {"--out", out, "--force"})) == cli::kExitOk);
}

TEST_CASE("validation failures exit with 2") {
    TempDir dir;
    auto args = toy_inputs();
    args.insert(args.begin(), "scan");
    CHECK(run_cli(with(args, {"--out", (dir / "a").string(), "--step", "-1"})) == cli::kExitValidation);
    CHECK(run_cli(with(args, {"--out", (dir / "b").string(), "--cross", "bc"})) == cli::kExitValidation);
    CHECK(run_cli({"scan", "--geno", "missing.csv", "--map", "m", "--pheno", "p", "--out", (dir / "c").string()}) ==
          cli::kExitValidation);
    CHECK(run_cli({"bogus"}) == cli::kExitValidation);
    auto step = toy_inputs();
    step.insert(step.begin(), "stepwise");
    CHECK(run_cli(with(step, {"--out", (dir / "d").string(), "--penalty", "zero"})) == cli::kExitValidation);
    // Nothing is written when validation fails.
    CHECK_FALSE(std::filesystem::exists(dir / "a"));
    // A locus off the grid names itself.
    auto fit = toy_inputs();
    fit.insert(fit.begin(), "fit");
    CHECK(run_cli(with(fit, {"--out", (dir / "e").string(), "--loci", "1@33.3"})) == cli::kExitValidation);
}

TEST_CASE("a ril file with heterozygotes is a validation error") {
    TempDir dir;
    const auto toy = testutil::toy_dir();
    CHECK(run_cli({"scan", "--geno", (toy / "geno.csv").string(), "--map", (toy / "map.csv").string(), "--pheno",
                   (toy / "pheno.csv").string(), "--cross", "ril", "--out", (dir / "x").string()}) ==
          cli::kExitValidation);
}

TEST_CASE("perm with one permutation at alpha 1") {
    TempDir dir;
    auto args = toy_inputs();
    args.insert(args.begin(), "perm");
    REQUIRE(run_cli(with(args, {"--out", (dir / "p").string(), "--n-perm", "1", "--alpha", "1.0"})) == cli::kExitOk);
    std::ifstream in(dir / "p/perm.csv");
    std::string header, max_line, thr_line;
    std::getline(in, header);
    std::getline(in, max_line);
    std::getline(in, thr_line);
    CHECK(max_line.substr(0, 6) == "max,1,");
    CHECK(thr_line.substr(0, 12) == "threshold,1,");
    CHECK(max_line.substr(6) == thr_line.substr(12));
}

TEST_CASE("outputs are byte-identical across runs and worker counts") {
    TempDir dir;
    auto args = toy_inputs();
    args.insert(args.begin(), "stepwise");
    REQUIRE(run_cli(with(args, {"--out", (dir / "a").string(), "--n-perm", "50", "--threads", "1"})) == cli::kExitOk);
    REQUIRE(run_cli(with(args, {"--out", (dir / "b").string(), "--n-perm", "50", "--threads", "4"})) == cli::kExitOk);
    for (const char* f : {"perm.csv", "model.json", "profiles.csv", "effects.csv"})
        CHECK(read_file(dir / "a" / f) == read_file(dir / "b" / f));
}

TEST_CASE("stepwise finds two strong QTL") {
    TempDir dir;
    const auto map = GeneticMap::uniform(3, 100.0, 10.0);
    const auto geno = sim_genotypes(map, CrossType::RilSelf, 120, 31);
    std::mt19937_64 rng(32);
    std::normal_distribution<double> z;
    Eigen::MatrixXd y(120, 8);
    for (Eigen::Index i = 0; i < 120; ++i) {
        const double q1 = geno.at(static_cast<std::size_t>(i), 5) == Geno::BB ? 1.0 : 0.0;   // chr1 @ 50
        const double q2 = geno.at(static_cast<std::size_t>(i), 24) == Geno::BB ? 1.0 : 0.0;  // chr3 @ 20
        for (Eigen::Index t = 0; t < 8; ++t) y(i, t) = 2.0 * q1 + 1.5 * q2 + 0.7 * z(rng);
    }
    std::vector<double> times{0, 1, 2, 3, 4, 5, 6, 7};
    write_dataset(dir.path(), {map, geno, PhenotypeMatrix(geno.ids(), times, y)});
    REQUIRE(run_cli({"stepwise", "--geno", (dir / "geno.csv").string(), "--map", (dir / "map.csv").string(), "--pheno",
                     (dir / "pheno.csv").string(), "--n-perm", "100", "--step", "2", "--out",
                     (dir / "sw").string()}) == cli::kExitOk);
    const auto model = nlohmann::json::parse(read_file(dir / "sw/model.json"));
    REQUIRE(model["loci"].size() == 2);
    std::set<std::string> chrs;
    for (const auto& q : model["loci"]) chrs.insert(q["chr"].get<std::string>());
    CHECK(chrs == std::set<std::string>{"1", "3"});
    const auto effects = read_file(dir / "sw/effects.csv");
    CHECK(effects.substr(0, effects.find('\n')).find("time,mu,beta_chr") == 0);

    // fit and profile from the written model reproduce the stepwise outputs.
    const std::vector<std::string> inputs{"--geno", (dir / "geno.csv").string(), "--map", (dir / "map.csv").string(),
                                          "--pheno", (dir / "pheno.csv").string(), "--step", "2"};
    auto fit = inputs;
    fit.insert(fit.begin(), "fit");
    REQUIRE(run_cli(with(fit, {"--model", (dir / "sw/model.json").string(), "--out", (dir / "fit").string()})) ==
            cli::kExitOk);
    CHECK(read_file(dir / "fit/effects.csv") == effects);
    auto prof = inputs;
    prof.insert(prof.begin(), "profile");
    REQUIRE(run_cli(with(prof, {"--model", (dir / "sw/model.json").string(), "--out", (dir / "prof").string()})) ==
            cli::kExitOk);
    CHECK(read_file(dir / "prof/profiles.csv") == read_file(dir / "sw/profiles.csv"));
}

TEST_CASE("simulate and power") {
    TempDir dir;
    REQUIRE(run_cli({"simulate", "--study", "single", "--n", "30", "--seed", "4", "--out", (dir / "s").string()}) ==
            cli::kExitOk);
    for (const char* f : {"map.csv", "geno.csv", "pheno.csv", "truth.json", "pheno.csv.meta.json"})
        CHECK(std::filesystem::exists(dir / "s" / f));
    const auto truth = nlohmann::json::parse(read_file(dir / "s/truth.json"));
    CHECK(truth["qtl"][0]["pos"] == 32.0);

    REQUIRE(run_cli({"power", "--study", "single", "--n", "60", "--replicates", "10", "--n-null", "20", "--out",
                     (dir / "p").string()}) == cli::kExitOk);
    const auto csv = read_file(dir / "p/power_report.csv");
    CHECK(count_lines(csv) == 3);
    const auto report = nlohmann::json::parse(read_file(dir / "p/power_report.json"));
    CHECK(report["methods"].size() == 2);
    CHECK(report["replicates"] == 10);
}
