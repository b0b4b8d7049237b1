#include "doctest.h"
#include "oracles.hpp"

#include "fvqtl/modelsel.hpp"
#include "fvqtl/scan.hpp"
#include "fvqtl/sim.hpp"

#include <cmath>
#include <random>

using namespace fvqtl;

namespace {

// Data with phenotype effect curves at the given (chromosome, marker)
// positions; noise_sd 0 gives a noise-free additive model.
struct TwoQtl {
    GeneticMap map = GeneticMap::uniform(3, 100.0, 10.0);
    GenotypeMatrix geno;
    PhenotypeMatrix pheno;
    GenoProbs probs;

    TwoQtl(CrossType cross, std::size_t n, double noise_sd, std::uint64_t seed) {
        geno = sim_genotypes(map, cross, n, seed);
        std::mt19937_64 rng(seed + 1);
        std::normal_distribution<double> z;
        const std::size_t T = 6;
        Eigen::MatrixXd y(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(T));
        // QTL at the chr1 marker at 30 cM (index 3) and the chr2 marker at 70 cM
        // (index 11 + 7); q counts B alleles / 2.
        for (std::size_t i = 0; i < n; ++i) {
            const double q1 = static_cast<int>(geno.at(i, 3)) / 2.0;
            const double q2 = static_cast<int>(geno.at(i, 18)) / 2.0;
            for (std::size_t t = 0; t < T; ++t) {
                const double s = static_cast<double>(t) / (T - 1.0);
                y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) =
                    1.0 + 2.0 * s * q1 + 1.5 * (1.0 - s) * q2 + noise_sd * z(rng);
            }
        }
        std::vector<double> times;
        for (std::size_t t = 0; t < T; ++t) times.push_back(static_cast<double>(t));
        pheno = PhenotypeMatrix(geno.ids(), times, y);
        probs = calc_genoprob(geno, map, cross, GridSpec{5.0});
    }
};

double aggregate_oracle(const Eigen::RowVectorXd& lod, Stat stat) {
    return stat == Stat::Slod ? lod.cwiseAbs().mean() : lod.cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("plod arithmetic") {
    CHECK(plod(0.0, 0, 3.0) == 0.0);
    CHECK(plod(5.0, 2, 1.85) == doctest::Approx(1.30).epsilon(1e-12));
    CHECK(plod(1.85, 1, 1.85) == 0.0);
    for (std::size_t k = 0; k < 5; ++k) CHECK(plod(4.0, k + 1, 0.7) < plod(4.0, k, 0.7));
}

TEST_CASE("model_lod") {
    const TwoQtl d(CrossType::RilSelf, 80, 0.5, 3);
    const auto lods = scan_hk(d.probs, d.pheno);
    const auto summary = summarize(lods);

    SUBCASE("empty model is 0") {
        CHECK(model_lod(d.probs, d.pheno, {}, Stat::Slod) == 0.0);
    }
    SUBCASE("one locus reduces to the scan") {
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t k = 0; k < summary.chromosomes[c].grid.size(); k += 3) {
                const GridLocus where{c, k};
                const std::vector<GridLocus> one{where};
                const auto i = static_cast<Eigen::Index>(k);
                CHECK(std::abs(model_lod(d.probs, d.pheno, one, Stat::Slod) - summary.chromosomes[c].slod(i)) < 1e-10);
                CHECK(std::abs(model_lod(d.probs, d.pheno, one, Stat::Mlod) - summary.chromosomes[c].mlod(i)) < 1e-10);
            }
    }
    SUBCASE("multi-locus models match a direct refit") {
        for (auto cross : {CrossType::RilSelf, CrossType::F2}) {
            const TwoQtl e(cross, 70, 0.7, 8);
            const std::vector<GridLocus> loci{{0, 6}, {1, 14}, {2, 3}};
            Eigen::MatrixXd X(70, 0);
            for (const auto& l : loci) {
                const auto cols = oracle::columns(e.probs, l.chr, l.pos);
                Eigen::MatrixXd grown(70, X.cols() + cols.cols());
                grown << X, cols;
                X = grown;
            }
            const Eigen::RowVectorXd lod = oracle::ols_lod(X, e.pheno.values());
            for (auto stat : {Stat::Slod, Stat::Mlod})
                CHECK(std::abs(model_lod(e.probs, e.pheno, loci, stat) - aggregate_oracle(lod, stat)) < 1e-8);
        }
    }
    SUBCASE("two strong QTL beat either alone") {
        const TwoQtl e(CrossType::RilSelf, 60, 0.0, 4);
        const std::vector<GridLocus> both{{0, 6}, {1, 14}};
        const double joint = model_lod(e.probs, e.pheno, both, Stat::Slod);
        CHECK(joint > model_lod(e.probs, e.pheno, std::vector<GridLocus>{both[0]}, Stat::Slod));
        CHECK(joint > model_lod(e.probs, e.pheno, std::vector<GridLocus>{both[1]}, Stat::Slod));
    }
    SUBCASE("duplicate loci are rejected") {
        const std::vector<GridLocus> dup{{0, 2}, {0, 2}};
        CHECK_THROWS_AS(model_lod(d.probs, d.pheno, dup, Stat::Slod), std::invalid_argument);
    }
}

TEST_CASE("stepwise search") {
    SUBCASE("penalty must be positive") {
        const TwoQtl d(CrossType::RilSelf, 30, 1.0, 1);
        CHECK_THROWS_AS(stepwise_search(d.probs, d.pheno, Stat::Slod, 0.0), std::invalid_argument);
    }
    SUBCASE("recovers two strong QTL") {
        // SLOD only: here the two effects peak at opposite ends of the time
        // range, so the joint MLOD barely exceeds the chr1 MLOD alone.
        const TwoQtl d(CrossType::RilSelf, 150, 0.6, 11);
        {
            const auto model = stepwise_search(d.probs, d.pheno, Stat::Slod, 1.5);
            REQUIRE(model.size() == 2);
            bool on1 = false, on2 = false;
            for (const auto& q : model.loci) {
                on1 = on1 || (q.chr == "1" && std::abs(q.pos - 30.0) <= 10.0);
                on2 = on2 || (q.chr == "2" && std::abs(q.pos - 70.0) <= 10.0);
            }
            CHECK(on1);
            CHECK(on2);
            CHECK(std::abs(model.plod - (model.model_lod - model.penalty * 2.0)) < 1e-10);
        }
    }
    SUBCASE("soundness: beats the null and every single-locus model") {
        const TwoQtl d(CrossType::F2, 60, 2.0, 5);
        const double penalty = 0.4;
        const auto result = stepwise_path(d.probs, d.pheno, Stat::Slod, penalty, {4, 5.0, 1});
        const auto summary = summarize(scan_hk(d.probs, d.pheno));
        const double best_single = genome_max(summary, Stat::Slod).value - penalty;
        CHECK(result.best.plod >= 0.0);
        CHECK(result.best.plod >= best_single - 1e-10);
        CHECK(result.visited.front().size() == 0);
        CHECK(result.visited.front().plod == 0.0);
        for (const auto& m : result.visited)
            CHECK(std::abs(m.plod - plod(m.model_lod, m.size(), penalty)) < 1e-10);
    }
    SUBCASE("minimum spacing keeps loci apart") {
        const TwoQtl d(CrossType::RilSelf, 80, 0.5, 2);
        const auto result = stepwise_path(d.probs, d.pheno, Stat::Slod, 10.0, {6, 12.0, 1});
        for (const auto& m : result.visited)
            for (std::size_t a = 0; a < m.loci.size(); ++a)
                for (std::size_t b = a + 1; b < m.loci.size(); ++b)
                    if (m.loci[a].chr == m.loci[b].chr) CHECK(std::abs(m.loci[a].pos - m.loci[b].pos) > 12.0);
    }
    SUBCASE("worker count does not change the path") {
        const TwoQtl d(CrossType::F2, 70, 1.0, 6);
        const auto a = stepwise_path(d.probs, d.pheno, Stat::Mlod, 2.0, {5, 5.0, 1});
        const auto b = stepwise_path(d.probs, d.pheno, Stat::Mlod, 2.0, {5, 5.0, 8});
        REQUIRE(a.visited.size() == b.visited.size());
        for (std::size_t i = 0; i < a.visited.size(); ++i) {
            CHECK(a.visited[i].model_lod == b.visited[i].model_lod);
            CHECK(a.visited[i].size() == b.visited[i].size());
        }
    }
    SUBCASE("pure noise mostly selects the null model") {
        const auto map = GeneticMap::uniform(3, 100.0, 10.0);
        std::mt19937_64 rng(404);
        std::normal_distribution<double> z;
        // Penalty: 5% null threshold of the genome-wide SLOD maximum.
        std::vector<double> maxima;
        const auto null_data = [&](std::uint64_t seed) {
            const auto geno = sim_genotypes(map, CrossType::RilSelf, 60, seed);
            Eigen::MatrixXd y(60, 4);
            for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = z(rng);
            return std::pair{calc_genoprob(geno, map, CrossType::RilSelf, GridSpec{5.0}),
                             PhenotypeMatrix(geno.ids(), {0, 1, 2, 3}, y)};
        };
        for (std::uint64_t s = 0; s < 100; ++s) {
            const auto [probs, pheno] = null_data(1000 + s);
            maxima.push_back(genome_max(summarize(scan_hk(probs, pheno)), Stat::Slod).value);
        }
        const double penalty = empirical_threshold(maxima, 0.05);
        int null_chosen = 0;
        for (std::uint64_t s = 0; s < 100; ++s) {
            const auto [probs, pheno] = null_data(5000 + s);
            if (stepwise_search(probs, pheno, Stat::Slod, penalty, {3, 5.0, 1}).size() == 0) ++null_chosen;
        }
        CHECK(null_chosen >= 90);
    }
}

TEST_CASE("profiles") {
    const TwoQtl d(CrossType::RilSelf, 90, 0.5, 9);
    SUBCASE("one-QTL profile equals the scan") {
        const auto summary = summarize(scan_hk(d.probs, d.pheno));
        for (auto stat : {Stat::Slod, Stat::Mlod}) {
            QtlModel m;
            m.loci.push_back(make_locus(d.probs, {1, 10}));
            const auto curves = profile(d.probs, d.pheno, m, stat);
            const auto& expected = stat == Stat::Slod ? summary.chromosomes[1].slod : summary.chromosomes[1].mlod;
            CHECK((curves.curves[0].values - expected).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
    SUBCASE("two-QTL profiles peak at the fitted positions and match drop-one") {
        const TwoQtl e(CrossType::RilSelf, 120, 0.0, 10);
        QtlModel m;
        m.loci = {locate(e.probs, "1", 30.0), locate(e.probs, "2", 70.0)};
        const auto curves = profile(e.probs, e.pheno, m, Stat::Slod);
        const std::vector<GridLocus> both{m.loci[0].grid, m.loci[1].grid};
        const double full = model_lod(e.probs, e.pheno, both, Stat::Slod);
        for (std::size_t j = 0; j < 2; ++j) {
            const auto& c = curves.curves[j];
            Eigen::Index best = 0;
            c.values.maxCoeff(&best);
            CHECK(c.grid[static_cast<std::size_t>(best)].pos == m.loci[j].pos);
            CHECK(c.values.minCoeff() >= 0.0);
            // Drop-one statistic at the fitted position, from per-time RSS.
            const std::vector<GridLocus> rest{both[1 - j]};
            Eigen::MatrixXd Xf(120, 2), Xr(120, 1);
            Xf << oracle::columns(e.probs, both[0].chr, both[0].pos), oracle::columns(e.probs, both[1].chr, both[1].pos);
            Xr << oracle::columns(e.probs, rest[0].chr, rest[0].pos);
            const Eigen::RowVectorXd rf = oracle::ols_rss(Xf, e.pheno.values());
            const Eigen::RowVectorXd rr = oracle::ols_rss(Xr, e.pheno.values());
            double drop = 0.0;
            for (Eigen::Index t = 0; t < rf.size(); ++t) drop += lod_from_rss(120.0, rr(t), rf(t));
            drop /= static_cast<double>(rf.size());
            CHECK(std::abs(c.values(best) - drop) < 1e-8);
        }
        CHECK(full > 0.0);
    }
}

TEST_CASE("effect curves") {
    SUBCASE("empty model gives per-time means") {
        const TwoQtl d(CrossType::RilSelf, 40, 1.0, 12);
        const auto fx = fit_effects(d.probs, d.pheno, QtlModel{});
        CHECK((fx.mu - d.pheno.values().colwise().mean()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(fx.beta.rows() == 0);
    }
    SUBCASE("noise-free exact recovery at a typed marker") {
        const auto map = GeneticMap::uniform(1, 50.0, 10.0);
        const auto geno = sim_genotypes(map, CrossType::RilSelf, 30, 13);
        const auto probs = calc_genoprob(geno, map, CrossType::RilSelf, GridSpec{0.0}, 0.0);
        Eigen::MatrixXd y(30, 3);
        for (Eigen::Index i = 0; i < 30; ++i)
            y.row(i).setConstant(3.0 + 2.0 * (geno.at(static_cast<std::size_t>(i), 2) == Geno::BB ? 1.0 : 0.0));
        QtlModel m;
        m.loci.push_back(locate(probs, "1", 20.0));
        const auto fx = fit_effects(probs, PhenotypeMatrix(geno.ids(), {0, 1, 2}, y), m);
        CHECK((fx.mu.array() - 3.0).abs().maxCoeff() < 1e-10);
        CHECK((fx.beta.array() - 2.0).abs().maxCoeff() < 1e-10);
    }
    SUBCASE("F2 baseline and additive effect") {
        const auto map = GeneticMap::uniform(1, 50.0, 10.0);
        const auto geno = sim_genotypes(map, CrossType::F2, 60, 14);
        const auto probs = calc_genoprob(geno, map, CrossType::F2, GridSpec{0.0}, 0.0);
        Eigen::MatrixXd y(60, 2);
        const double level[3] = {1.0, 2.5, 5.0};  // AA, AB, BB
        for (Eigen::Index i = 0; i < 60; ++i) y.row(i).setConstant(level[static_cast<int>(geno.at(static_cast<std::size_t>(i), 1))]);
        QtlModel m;
        m.loci.push_back(locate(probs, "1", 10.0));
        const auto fx = fit_effects(probs, PhenotypeMatrix(geno.ids(), {0, 1}, y), m);
        CHECK((fx.mu.array() - 1.0).abs().maxCoeff() < 1e-10);
        CHECK((fx.beta.array() - 4.0).abs().maxCoeff() < 1e-10);
        // AB sits 0.5 below the AA/BB midpoint of 3.
        CHECK((fx.dominance.array() + 0.5).abs().maxCoeff() < 1e-10);
    }
    SUBCASE("fitted values reproduce the per-time projection") {
        const TwoQtl d(CrossType::RilSelf, 70, 0.8, 15);
        QtlModel m;
        m.loci = {locate(d.probs, "1", 30.0), locate(d.probs, "3", 50.0)};
        const auto fx = fit_effects(d.probs, d.pheno, m);
        Eigen::MatrixXd X(70, 2);
        X << oracle::columns(d.probs, 0, m.loci[0].grid.pos), oracle::columns(d.probs, 2, m.loci[1].grid.pos);
        const Eigen::MatrixXd coef = oracle::ols_coef(X, d.pheno.values());
        const Eigen::MatrixXd fitted = (X * fx.beta).rowwise() + fx.mu;
        Eigen::MatrixXd Xf(70, 3);
        Xf << Eigen::VectorXd::Ones(70), X;
        CHECK((fitted - Xf * coef).cwiseAbs().maxCoeff() < 1e-8);
        CHECK((fx.lod - oracle::ols_lod(X, d.pheno.values())).cwiseAbs().maxCoeff() < 1e-8);
    }
}
