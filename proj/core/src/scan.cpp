#include "fvqtl/scan.hpp"

#include "fvqtl/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fvqtl {

std::size_t SignedLodMatrix::n_positions() const {
    std::size_t n = 0;
    for (const auto& c : chromosomes) n += c.grid.size();
    return n;
}

HkScanner::HkScanner(const GenoProbs& probs) : cross_(probs.cross), n_ind_(probs.n_ind()) {
    const auto n = static_cast<Eigen::Index>(n_ind_);
    const double const_tol = kConstantTol * static_cast<double>(n);
    for (std::size_t c = 0; c < probs.chromosomes.size(); ++c) {
        const auto& cp = probs.chromosomes[c];
        const auto P = static_cast<Eigen::Index>(cp.n_positions());
        Design d;
        d.q1 = Eigen::MatrixXd::Zero(n, P);
        d.r11 = Eigen::VectorXd::Zero(P);
        d.r12 = Eigen::VectorXd::Zero(P);
        d.r22 = Eigen::VectorXd::Zero(P);
        if (cross_ == CrossType::F2) d.q2 = Eigen::MatrixXd::Zero(n, P);
        for (Eigen::Index k = 0; k < P; ++k) {
            const Eigen::MatrixXd x = locus_design(probs, {c, static_cast<std::size_t>(k)});
            Eigen::VectorXd a = x.col(0).array() - x.col(0).mean();
            const double a_norm2 = a.squaredNorm();
            const bool has_add = a_norm2 > const_tol;
            if (has_add) {
                d.r11(k) = std::sqrt(a_norm2);
                d.q1.col(k) = a / d.r11(k);
            }
            if (cross_ != CrossType::F2) continue;
            Eigen::VectorXd dom = x.col(1).array() - x.col(1).mean();
            const double d_norm2 = dom.squaredNorm();
            if (!(d_norm2 > const_tol)) continue;
            if (has_add) {
                for (int pass = 0; pass < 2; ++pass) {
                    const double proj = d.q1.col(k).dot(dom);
                    d.r12(k) += proj;
                    dom -= proj * d.q1.col(k);
                }
                if (!(dom.squaredNorm() > kCollinearTol * d_norm2)) continue;
            }
            d.r22(k) = dom.norm();
            d.q2.col(k) = dom / d.r22(k);
        }
        designs_.push_back(std::move(d));
        chr_names_.push_back(cp.chr);
        grids_.push_back(cp.grid);
    }
}

void HkScanner::lod_block(std::size_t chr, const Eigen::MatrixXd& yc, const Eigen::RowVectorXd& rss0,
                          Eigen::MatrixXd& w1, Eigen::MatrixXd& w2, Eigen::MatrixXd& lod, bool signed_lod) const {
    const auto& d = designs_[chr];
    const bool f2 = cross_ == CrossType::F2;
    const double n = static_cast<double>(n_ind_);
    w1.noalias() = d.q1.transpose() * yc;
    if (f2) w2.noalias() = d.q2.transpose() * yc;
    const auto P = w1.rows();
    const auto T = w1.cols();
    lod.resize(P, T);
    for (Eigen::Index t = 0; t < T; ++t) {
        for (Eigen::Index k = 0; k < P; ++k) {
            double explained = w1(k, t) * w1(k, t);
            if (f2) explained += w2(k, t) * w2(k, t);
            const double rss1 = std::max(rss0(t) - explained, 0.0);
            double value = lod_from_rss(n, rss0(t), rss1);
            if (signed_lod && value > 0.0) {
                double beta_add = 0.0;
                if (d.r11(k) > 0.0) {
                    double num = w1(k, t);
                    if (f2 && d.r22(k) > 0.0) num -= d.r12(k) * w2(k, t) / d.r22(k);
                    beta_add = num / d.r11(k);
                }
                if (beta_add < 0.0) value = -value;
            }
            lod(k, t) = value;
        }
    }
}

SignedLodMatrix HkScanner::scan(const CenteredPhenotypes& y, const std::vector<double>& time_labels) const {
    if (static_cast<std::size_t>(y.yc.rows()) != n_ind_)
        throw DataError(fmt::format("phenotype rows ({}) differ from genotype rows ({})", y.yc.rows(), n_ind_));
    SignedLodMatrix out;
    out.time_labels = time_labels;
    Eigen::MatrixXd w1, w2;
    for (std::size_t c = 0; c < designs_.size(); ++c) {
        ChromosomeLod cl;
        cl.chr = chr_names_[c];
        cl.grid = grids_[c];
        lod_block(c, y.yc, y.rss0, w1, w2, cl.lod, true);
        out.chromosomes.push_back(std::move(cl));
    }
    return out;
}

std::pair<double, double> HkScanner::genome_max(const Eigen::MatrixXd& yc, const Eigen::RowVectorXd& rss0) const {
    double best_slod = 0.0;
    double best_mlod = 0.0;
    Eigen::MatrixXd w1, w2, lod;
    for (std::size_t c = 0; c < designs_.size(); ++c) {
        lod_block(c, yc, rss0, w1, w2, lod, false);
        best_slod = std::max(best_slod, lod.rowwise().mean().maxCoeff());
        best_mlod = std::max(best_mlod, lod.maxCoeff());
    }
    return {best_slod, best_mlod};
}

SignedLodMatrix scan_hk(const GenoProbs& probs, const PhenotypeMatrix& pheno) {
    if (pheno.n_ind() != probs.n_ind())
        throw DataError(fmt::format("phenotype rows ({}) differ from genotype rows ({})", pheno.n_ind(), probs.n_ind()));
    const auto y = center_phenotypes(pheno.values());
    return HkScanner(probs).scan(y, pheno.time_labels());
}

std::vector<Eigen::VectorXd> slod(const SignedLodMatrix& lods) {
    std::vector<Eigen::VectorXd> out;
    for (const auto& c : lods.chromosomes) {
        if (c.lod.cols() == 0)
            out.push_back(Eigen::VectorXd::Zero(c.lod.rows()));
        else
            out.push_back(c.lod.cwiseAbs().rowwise().mean());
    }
    return out;
}

std::vector<Eigen::VectorXd> mlod(const SignedLodMatrix& lods) {
    std::vector<Eigen::VectorXd> out;
    for (const auto& c : lods.chromosomes) {
        if (c.lod.cols() == 0)
            out.push_back(Eigen::VectorXd::Zero(c.lod.rows()));
        else
            out.push_back(c.lod.cwiseAbs().rowwise().maxCoeff());
    }
    return out;
}

ScanSummary summarize(const SignedLodMatrix& lods) {
    auto s = slod(lods);
    auto m = mlod(lods);
    ScanSummary out;
    for (std::size_t c = 0; c < lods.chromosomes.size(); ++c)
        out.chromosomes.push_back({lods.chromosomes[c].chr, lods.chromosomes[c].grid, std::move(s[c]), std::move(m[c])});
    return out;
}

GenomeMax genome_max(const ScanSummary& summary, Stat stat) {
    GenomeMax best{-1.0, {}};
    for (std::size_t c = 0; c < summary.chromosomes.size(); ++c) {
        const auto& curve = stat == Stat::Slod ? summary.chromosomes[c].slod : summary.chromosomes[c].mlod;
        for (Eigen::Index k = 0; k < curve.size(); ++k)
            if (curve(k) > best.value) best = {curve(k), {c, static_cast<std::size_t>(k)}};
    }
    if (best.value < 0.0) best.value = 0.0;
    return best;
}

PermutationMaxima permutation_maxima(const GenoProbs& probs, const PhenotypeMatrix& pheno, std::size_t n_perm,
                                     std::uint64_t seed, int threads) {
    if (n_perm < 1) throw std::invalid_argument("n_perm must be >= 1");
    if (pheno.n_ind() != probs.n_ind())
        throw DataError(fmt::format("phenotype rows ({}) differ from genotype rows ({})", pheno.n_ind(), probs.n_ind()));
    const auto y = center_phenotypes(pheno.values());
    const HkScanner scanner(probs);
    PermutationMaxima out;
    out.slod.assign(n_perm, 0.0);
    out.mlod.assign(n_perm, 0.0);
    parallel_for(n_perm, threads, [&](std::size_t begin, std::size_t end) {
        const auto n = static_cast<std::size_t>(y.yc.rows());
        std::vector<Eigen::Index> order(n);
        Eigen::MatrixXd yp(y.yc.rows(), y.yc.cols());
        for (std::size_t i = begin; i < end; ++i) {
            auto rng = make_stream(seed, stream::kPermutation, i);
            std::iota(order.begin(), order.end(), Eigen::Index{0});
            std::shuffle(order.begin(), order.end(), rng);
            for (std::size_t r = 0; r < n; ++r) yp.row(static_cast<Eigen::Index>(r)) = y.yc.row(order[r]);
            const auto [s, m] = scanner.genome_max(yp, y.rss0);
            out.slod[i] = s;
            out.mlod[i] = m;
        }
    });
    return out;
}

double empirical_threshold(std::span<const double> maxima, double alpha) {
    if (maxima.empty()) throw std::invalid_argument("no maxima");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument(fmt::format("alpha {} outside [0, 1]", alpha));
    std::vector<double> sorted(maxima.begin(), maxima.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    auto index = static_cast<long long>(std::ceil((1.0 - alpha) * n - 1e-9));
    index = std::clamp<long long>(index, 1, static_cast<long long>(sorted.size()));
    return sorted[static_cast<std::size_t>(index - 1)];
}

PermutationResult permutation_threshold(const GenoProbs& probs, const PhenotypeMatrix& pheno, Stat stat,
                                        std::size_t n_perm, std::span<const double> alphas, std::uint64_t seed,
                                        int threads) {
    auto maxima = permutation_maxima(probs, pheno, n_perm, seed, threads);
    PermutationResult out;
    out.stat = stat;
    out.seed = seed;
    out.maxima = stat == Stat::Slod ? std::move(maxima.slod) : std::move(maxima.mlod);
    for (double a : alphas) out.thresholds.emplace_back(a, empirical_threshold(out.maxima, a));
    return out;
}

}  // namespace fvqtl
