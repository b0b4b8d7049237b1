#include "doctest.h"
#include "oracles.hpp"

#include "fvqtl/scan.hpp"
#include "fvqtl/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace fvqtl;

namespace {

double max_abs_diff(const SignedLodMatrix& a, const SignedLodMatrix& b) {
    double worst = 0.0;
    for (std::size_t c = 0; c < a.chromosomes.size(); ++c)
        worst = std::max(worst, (a.chromosomes[c].lod - b.chromosomes[c].lod).cwiseAbs().maxCoeff());
    return worst;
}

PhenotypeMatrix transformed(const PhenotypeMatrix& p, double scale, double shift) {
    return PhenotypeMatrix(p.ids(), p.time_labels(), (p.values().array() * scale + shift).matrix());
}

}  // namespace

TEST_CASE("scan matches per-time least squares") {
    std::mt19937_64 rng(77);
    for (int rep = 0; rep < 20; ++rep) {
        const auto cross = rep % 2 == 0 ? CrossType::RilSelf : CrossType::F2;
        const auto inst = oracle::random_instance(rng, cross, 12 + static_cast<std::size_t>(rep % 13),
                                                  2 + static_cast<std::size_t>(rep % 5), 1 + rep % 5, 0.1);
        const auto probs = calc_genoprob(inst.geno, inst.map, cross, GridSpec{2.0});
        const auto lods = scan_hk(probs, inst.pheno);
        const auto& chr = lods.chromosomes[0];
        for (std::size_t k = 0; k < chr.grid.size(); ++k) {
            const auto X = oracle::columns(probs, 0, k);
            const Eigen::RowVectorXd expected = oracle::ols_lod(X, inst.pheno.values());
            const Eigen::MatrixXd coef = oracle::ols_coef(X, inst.pheno.values());
            for (Eigen::Index t = 0; t < expected.size(); ++t) {
                const double got = chr.lod(static_cast<Eigen::Index>(k), t);
                CHECK(std::abs(std::abs(got) - expected(t)) < 1e-8);
                if (expected(t) > 1e-6 && std::abs(coef(1, t)) > 1e-8) CHECK((got < 0) == (coef(1, t) < 0));
            }
        }
    }
}

TEST_CASE("constant phenotype gives zero LOD") {
    const auto map = GeneticMap::uniform(1, 50.0, 10.0);
    const auto geno = sim_genotypes(map, CrossType::RilSelf, 20, 1);
    const auto probs = calc_genoprob(geno, map, CrossType::RilSelf);
    const PhenotypeMatrix p(geno.ids(), {0.0, 1.0}, Eigen::MatrixXd::Constant(20, 2, 4.2));
    const auto lods = scan_hk(probs, p);
    CHECK(lods.chromosomes[0].lod.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("perfect fit is capped with a positive sign") {
    const auto map = GeneticMap::uniform(1, 50.0, 10.0);
    const auto geno = sim_genotypes(map, CrossType::RilSelf, 20, 2);
    const auto probs = calc_genoprob(geno, map, CrossType::RilSelf, GridSpec{0.0}, 0.0);
    const auto& pbb = probs.chromosomes[0].probs[1];
    const PhenotypeMatrix p(geno.ids(), {0.0}, 2.0 * pbb.col(2));
    const auto lods = scan_hk(probs, p);
    CHECK(lods.chromosomes[0].lod(2, 0) == kLodCap);
}

TEST_CASE("sign follows the BB-minus-AA effect") {
    const auto map = GeneticMap::uniform(1, 50.0, 10.0);
    const auto geno = sim_genotypes(map, CrossType::F2, 60, 3);
    const auto probs = calc_genoprob(geno, map, CrossType::F2, GridSpec{0.0});
    std::mt19937_64 rng(5);
    std::normal_distribution<double> z;
    Eigen::MatrixXd y(60, 2);
    for (Eigen::Index i = 0; i < 60; ++i) {
        const double a = static_cast<int>(geno.at(static_cast<std::size_t>(i), 0)) - 1.0;
        y(i, 0) = 3.0 * a + 0.1 * z(rng);
        y(i, 1) = -3.0 * a + 0.1 * z(rng);
    }
    const auto lods = scan_hk(probs, PhenotypeMatrix(geno.ids(), {0.0, 1.0}, y));
    CHECK(lods.chromosomes[0].lod(0, 0) > 3.0);
    CHECK(lods.chromosomes[0].lod(0, 1) < -3.0);
}

TEST_CASE("SLOD and MLOD") {
    SignedLodMatrix m;
    m.time_labels = {0, 1, 2};
    ChromosomeLod c;
    c.chr = "1";
    c.grid = {GridPoint{0.0, "a", 0}, GridPoint{5.0, "b", 1}};
    c.lod.resize(2, 3);
    c.lod << 3, 0, 0, 2, -2, 2;
    m.chromosomes.push_back(c);
    const auto s = slod(m)[0];
    const auto x = mlod(m)[0];
    CHECK(s(0) == doctest::Approx(1.0));
    CHECK(x(0) == 3.0);
    CHECK(s(1) == doctest::Approx(2.0));
    CHECK(x(1) == 2.0);
}

TEST_CASE("invariants on a simulated data set") {
    const CubicQtlSpec spec;
    const auto sim = sim_multi_qtl(spec, 80, 12);
    const auto probs = calc_genoprob(sim.data.geno, sim.data.map, CrossType::RilSelf, GridSpec{2.0});
    const auto lods = scan_hk(probs, sim.data.pheno);

    SUBCASE("MLOD >= SLOD >= 0") {
        const auto summary = summarize(lods);
        for (const auto& c : summary.chromosomes) {
            CHECK(c.slod.minCoeff() >= 0.0);
            CHECK(((c.mlod - c.slod).array() >= -1e-15).all());
        }
    }
    SUBCASE("affine transforms of the phenotype") {
        CHECK(max_abs_diff(lods, scan_hk(probs, transformed(sim.data.pheno, 1.0, 1234.5))) < 1e-8);
        CHECK(max_abs_diff(lods, scan_hk(probs, transformed(sim.data.pheno, 0.01, 0.0))) < 1e-8);
        // A negative scale flips every sign but keeps magnitudes.
        const auto flipped = scan_hk(probs, transformed(sim.data.pheno, -3.0, 7.0));
        for (std::size_t c = 0; c < lods.chromosomes.size(); ++c)
            CHECK((lods.chromosomes[c].lod + flipped.chromosomes[c].lod).cwiseAbs().maxCoeff() < 1e-8);
    }
    SUBCASE("relabelling individuals consistently changes nothing") {
        std::vector<std::size_t> order(80);
        std::iota(order.begin(), order.end(), 0);
        std::mt19937_64 rng(1);
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<std::string> ids;
        std::vector<Geno> codes;
        Eigen::MatrixXd y(80, sim.data.pheno.values().cols());
        for (std::size_t i = 0; i < 80; ++i) {
            ids.push_back(sim.data.geno.ids()[order[i]]);
            for (std::size_t m = 0; m < sim.data.geno.n_markers(); ++m) codes.push_back(sim.data.geno.at(order[i], m));
            y.row(static_cast<Eigen::Index>(i)) = sim.data.pheno.values().row(static_cast<Eigen::Index>(order[i]));
        }
        const GenotypeMatrix geno(CrossType::RilSelf, ids, sim.data.geno.markers(), codes);
        const auto p2 = calc_genoprob(geno, sim.data.map, CrossType::RilSelf, GridSpec{2.0});
        const auto l2 = scan_hk(p2, PhenotypeMatrix(ids, sim.data.pheno.time_labels(), y));
        const auto a = summarize(lods);
        const auto b = summarize(l2);
        for (std::size_t c = 0; c < a.chromosomes.size(); ++c) {
            CHECK((a.chromosomes[c].slod - b.chromosomes[c].slod).cwiseAbs().maxCoeff() < 1e-10);
            CHECK((a.chromosomes[c].mlod - b.chromosomes[c].mlod).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
    SUBCASE("genome maxima agree with the full scan") {
        const HkScanner scanner(probs);
        const auto y = center_phenotypes(sim.data.pheno.values());
        const auto [s, m] = scanner.genome_max(y.yc, y.rss0);
        const auto summary = summarize(lods);
        CHECK(s == doctest::Approx(genome_max(summary, Stat::Slod).value).epsilon(1e-12));
        CHECK(m == doctest::Approx(genome_max(summary, Stat::Mlod).value).epsilon(1e-12));
    }
}

TEST_CASE("missing phenotype cells are rejected") {
    const auto map = GeneticMap::uniform(1, 20.0, 10.0);
    const auto geno = sim_genotypes(map, CrossType::RilSelf, 5, 1);
    const auto probs = calc_genoprob(geno, map, CrossType::RilSelf);
    Eigen::MatrixXd y = Eigen::MatrixXd::Ones(5, 2);
    y(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(scan_hk(probs, PhenotypeMatrix(geno.ids(), {0.0, 1.0}, y)), DataError);
}

TEST_CASE("empirical threshold") {
    const std::vector<double> v{5.0, 1.0, 3.0, 2.0, 4.0};
    CHECK(empirical_threshold(v, 1.0) == 1.0);
    CHECK(empirical_threshold(v, 0.2) == 4.0);   // ceil(0.8 * 5) = 4th smallest
    CHECK(empirical_threshold(v, 0.05) == 5.0);  // ceil(4.75) = 5
    CHECK(empirical_threshold(std::vector<double>{7.5}, 1.0) == 7.5);
}

TEST_CASE("permutations") {
    const CubicQtlSpec spec;
    const auto sim = sim_multi_qtl(spec.without_effect(), 60, 21);
    const auto probs = calc_genoprob(sim.data.geno, sim.data.map, CrossType::RilSelf, GridSpec{2.0});

    SUBCASE("independent of the worker count") {
        const auto a = permutation_maxima(probs, sim.data.pheno, 24, 99, 1);
        const auto b = permutation_maxima(probs, sim.data.pheno, 24, 99, 8);
        CHECK(a.slod == b.slod);
        CHECK(a.mlod == b.mlod);
    }
    SUBCASE("single permutation at alpha 1") {
        const std::vector<double> alphas{1.0};
        const auto r = permutation_threshold(probs, sim.data.pheno, Stat::Slod, 1, alphas, 3);
        REQUIRE(r.maxima.size() == 1);
        CHECK(r.thresholds[0].second == r.maxima[0]);
        CHECK(r.maxima[0] >= 0.0);
    }
    SUBCASE("null threshold is stable across seeds") {
        const std::vector<double> alphas{0.05};
        const auto a = permutation_threshold(probs, sim.data.pheno, Stat::Slod, 200, alphas, 1);
        const auto b = permutation_threshold(probs, sim.data.pheno, Stat::Slod, 200, alphas, 2);
        const double ta = a.thresholds[0].second;
        const double tb = b.thresholds[0].second;
        CHECK(std::abs(ta - tb) <= 0.15 * std::max(ta, tb));
    }
}
