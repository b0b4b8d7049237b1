#include "fvqtl/modelsel.hpp"

#include "fvqtl/parallel.hpp"

#include <Eigen/QR>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace fvqtl {

namespace {

constexpr double kTieTol = 1e-9;

// Centered design columns of every grid position on one chromosome.
struct CandidateColumns {
    Eigen::MatrixXd add;
    Eigen::MatrixXd dom;  // F2 only
    Eigen::VectorXd add_norm2;
    Eigen::VectorXd dom_norm2;
};

std::vector<CandidateColumns> candidate_columns(const GenoProbs& probs) {
    std::vector<CandidateColumns> out;
    for (const auto& cp : probs.chromosomes) {
        CandidateColumns cc;
        if (probs.cross == CrossType::F2) {
            cc.add = cp.probs[2] - cp.probs[0];
            cc.dom = cp.probs[1];
            cc.dom.rowwise() -= cc.dom.colwise().mean();
            cc.dom_norm2 = cc.dom.colwise().squaredNorm().transpose();
        } else {
            cc.add = cp.probs[1];
        }
        cc.add.rowwise() -= cc.add.colwise().mean();
        cc.add_norm2 = cc.add.colwise().squaredNorm().transpose();
        out.push_back(std::move(cc));
    }
    return out;
}

void project_out(const Eigen::MatrixXd& q, Eigen::MatrixXd& x) {
    if (q.cols() == 0) return;
    for (int pass = 0; pass < 2; ++pass) x.noalias() -= q * (q.transpose() * x);
}

// Per-time reduction in RSS (positions x times) from adding each candidate
// position to a model with orthonormal basis `q` and residuals `r`.
Eigen::MatrixXd rss_gains(const CandidateColumns& cc, const Eigen::MatrixXd& q, const Eigen::MatrixXd& r) {
    const double const_tol = kConstantTol * static_cast<double>(cc.add.rows());
    const auto P = cc.add.cols();

    Eigen::MatrixXd a = cc.add;
    project_out(q, a);
    std::vector<bool> keep_a(static_cast<std::size_t>(P), false);
    for (Eigen::Index k = 0; k < P; ++k) {
        const double norm2 = a.col(k).squaredNorm();
        const bool keep = cc.add_norm2(k) > const_tol && norm2 > kCollinearTol * cc.add_norm2(k);
        keep_a[static_cast<std::size_t>(k)] = keep;
        if (keep)
            a.col(k) /= std::sqrt(norm2);
        else
            a.col(k).setZero();
    }
    Eigen::MatrixXd w = a.transpose() * r;
    Eigen::MatrixXd gains = w.array().square();
    if (cc.dom.size() == 0) return gains;

    Eigen::MatrixXd d = cc.dom;
    project_out(q, d);
    for (Eigen::Index k = 0; k < P; ++k) {
        if (keep_a[static_cast<std::size_t>(k)])
            for (int pass = 0; pass < 2; ++pass) d.col(k) -= a.col(k).dot(d.col(k)) * a.col(k);
        const double norm2 = d.col(k).squaredNorm();
        if (cc.dom_norm2(k) > const_tol && norm2 > kCollinearTol * cc.dom_norm2(k))
            d.col(k) /= std::sqrt(norm2);
        else
            d.col(k).setZero();
    }
    w.noalias() = d.transpose() * r;
    gains.array() += w.array().square();
    return gains;
}

OrthoBasis basis_for(const GenoProbs& probs, std::span<const GridLocus> loci) {
    OrthoBasis basis(static_cast<Eigen::Index>(probs.n_ind()));
    for (const auto& l : loci) {
        const Eigen::MatrixXd x = locus_design(probs, l);
        for (Eigen::Index c = 0; c < x.cols(); ++c) basis.add(x.col(c));
    }
    return basis;
}

void check_distinct(std::span<const GridLocus> loci) {
    for (std::size_t i = 0; i < loci.size(); ++i)
        for (std::size_t j = i + 1; j < loci.size(); ++j)
            if (loci[i] == loci[j]) throw std::invalid_argument("duplicate locus in model");
}

void check_inputs(const GenoProbs& probs, const PhenotypeMatrix& pheno) {
    if (pheno.n_ind() != probs.n_ind())
        throw DataError(fmt::format("phenotype rows ({}) differ from genotype rows ({})", pheno.n_ind(), probs.n_ind()));
}

double fitted_lod(const GenoProbs& probs, const CenteredPhenotypes& y, std::span<const GridLocus> loci, Stat stat) {
    if (loci.empty()) return 0.0;
    const auto basis = basis_for(probs, loci);
    return aggregate(lod_per_time(y, basis.rss(y.yc)), stat);
}

std::vector<GridLocus> grid_loci(const std::vector<QtlLocus>& loci) {
    std::vector<GridLocus> out;
    for (const auto& l : loci) out.push_back(l.grid);
    return out;
}

}  // namespace

std::string QtlLocus::label() const { return fmt::format("chr{}@{:g}", chr, pos); }

QtlLocus make_locus(const GenoProbs& probs, GridLocus where) {
    const auto& cp = probs.chromosomes.at(where.chr);
    return {cp.chr, cp.grid.at(where.pos).pos, where};
}

QtlLocus locate(const GenoProbs& probs, std::string_view chr, double pos) {
    for (std::size_t c = 0; c < probs.chromosomes.size(); ++c) {
        const auto& cp = probs.chromosomes[c];
        if (cp.chr != chr) continue;
        for (std::size_t k = 0; k < cp.grid.size(); ++k)
            if (std::abs(cp.grid[k].pos - pos) <= 1e-6) return make_locus(probs, {c, k});
        throw DataError(fmt::format("position {} is not on the grid of chromosome '{}'", pos, chr));
    }
    throw DataError(fmt::format("unknown chromosome '{}'", chr));
}

double model_lod(const GenoProbs& probs, const PhenotypeMatrix& pheno, std::span<const GridLocus> loci, Stat stat) {
    check_inputs(probs, pheno);
    check_distinct(loci);
    if (loci.empty()) return 0.0;
    return fitted_lod(probs, center_phenotypes(pheno.values()), loci, stat);
}

double plod(double model_lod_value, std::size_t n_qtl, double penalty) {
    return model_lod_value - penalty * static_cast<double>(n_qtl);
}

StepwiseResult stepwise_path(const GenoProbs& probs, const PhenotypeMatrix& pheno, Stat stat, double penalty,
                             const StepwiseOptions& options) {
    check_inputs(probs, pheno);
    if (!(penalty > 0.0)) throw std::invalid_argument("penalty must be > 0");
    const auto y = center_phenotypes(pheno.values());
    const auto candidates = candidate_columns(probs);

    StepwiseResult result;
    auto visit = [&](const std::vector<GridLocus>& loci, double lod) {
        QtlModel m;
        for (const auto& l : loci) m.loci.push_back(make_locus(probs, l));
        m.stat = stat;
        m.penalty = penalty;
        m.model_lod = lod;
        m.plod = plod(lod, loci.size(), penalty);
        result.visited.push_back(std::move(m));
    };

    std::vector<GridLocus> current;
    visit(current, 0.0);

    // Forward selection.
    Eigen::MatrixXd resid = y.yc;
    Eigen::RowVectorXd rss_cur = y.rss0;
    OrthoBasis basis(y.yc.rows());
    const auto n_chr = probs.chromosomes.size();
    while (current.size() < options.max_qtl) {
        struct Best {
            double value = -1.0;
            std::size_t pos = 0;
        };
        std::vector<Best> per_chr(n_chr);
        parallel_for(n_chr, options.threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t c = begin; c < end; ++c) {
                const auto& grid = probs.chromosomes[c].grid;
                const Eigen::MatrixXd gains = rss_gains(candidates[c], basis.q(), resid);
                Eigen::RowVectorXd lod(y.rss0.size());
                for (std::size_t k = 0; k < grid.size(); ++k) {
                    const bool too_close = std::any_of(current.begin(), current.end(), [&](const GridLocus& l) {
                        return l.chr == c && std::abs(probs.chromosomes[c].grid[l.pos].pos - grid[k].pos) <=
                                                 options.min_spacing;
                    });
                    if (too_close) continue;
                    for (Eigen::Index t = 0; t < lod.size(); ++t) {
                        const double rss = std::max(rss_cur(t) - gains(static_cast<Eigen::Index>(k), t), 0.0);
                        lod(t) = lod_from_rss(y.n, y.rss0(t), rss);
                    }
                    const double value = aggregate(lod, stat);
                    if (value > per_chr[c].value) per_chr[c] = {value, k};
                }
            }
        });
        double best_value = -1.0;
        GridLocus best_locus;
        for (std::size_t c = 0; c < n_chr; ++c)
            if (per_chr[c].value > best_value) {
                best_value = per_chr[c].value;
                best_locus = {c, per_chr[c].pos};
            }
        if (best_value < 0.0) break;
        current.push_back(best_locus);
        const Eigen::MatrixXd x = locus_design(probs, best_locus);
        for (Eigen::Index c = 0; c < x.cols(); ++c) basis.add(x.col(c));
        resid = basis.residual(y.yc);
        rss_cur = resid.colwise().squaredNorm();
        visit(current, aggregate(lod_per_time(y, rss_cur), stat));
    }

    // Backward elimination.
    while (!current.empty()) {
        double best_value = -std::numeric_limits<double>::infinity();
        std::size_t drop = 0;
        for (std::size_t j = 0; j < current.size(); ++j) {
            std::vector<GridLocus> reduced = current;
            reduced.erase(reduced.begin() + static_cast<std::ptrdiff_t>(j));
            const double value = fitted_lod(probs, y, reduced, stat);
            if (value > best_value) {
                best_value = value;
                drop = j;
            }
        }
        current.erase(current.begin() + static_cast<std::ptrdiff_t>(drop));
        visit(current, current.empty() ? 0.0 : best_value);
    }

    const QtlModel* best = &result.visited.front();
    for (const auto& m : result.visited) {
        if (m.plod > best->plod + kTieTol || (std::abs(m.plod - best->plod) <= kTieTol && m.size() < best->size()))
            best = &m;
    }
    result.best = *best;
    return result;
}

QtlModel stepwise_search(const GenoProbs& probs, const PhenotypeMatrix& pheno, Stat stat, double penalty,
                         const StepwiseOptions& options) {
    return stepwise_path(probs, pheno, stat, penalty, options).best;
}

ProfileCurves profile(const GenoProbs& probs, const PhenotypeMatrix& pheno, const QtlModel& model, Stat stat) {
    check_inputs(probs, pheno);
    if (model.loci.empty()) throw std::invalid_argument("profile needs a non-empty model");
    const auto all = grid_loci(model.loci);
    check_distinct(all);
    const auto y = center_phenotypes(pheno.values());
    const auto candidates = candidate_columns(probs);

    ProfileCurves out;
    out.stat = stat;
    for (std::size_t j = 0; j < model.loci.size(); ++j) {
        std::vector<GridLocus> others = all;
        others.erase(others.begin() + static_cast<std::ptrdiff_t>(j));
        const auto basis = basis_for(probs, others);
        const Eigen::MatrixXd resid = basis.residual(y.yc);
        const Eigen::RowVectorXd rss_without = resid.colwise().squaredNorm();
        const auto c = model.loci[j].grid.chr;
        const Eigen::MatrixXd gains = rss_gains(candidates[c], basis.q(), resid);

        ProfileCurve curve;
        curve.qtl = model.loci[j];
        curve.grid = probs.chromosomes[c].grid;
        curve.values.resize(static_cast<Eigen::Index>(curve.grid.size()));
        Eigen::RowVectorXd lod(y.rss0.size());
        for (Eigen::Index k = 0; k < curve.values.size(); ++k) {
            for (Eigen::Index t = 0; t < lod.size(); ++t) {
                const double rss_full = std::max(rss_without(t) - gains(k, t), 0.0);
                lod(t) = lod_from_rss(y.n, rss_without(t), rss_full);
            }
            curve.values(k) = aggregate(lod, stat);
        }
        out.curves.push_back(std::move(curve));
    }
    return out;
}

EffectCurves fit_effects(const GenoProbs& probs, const PhenotypeMatrix& pheno, const QtlModel& model) {
    check_inputs(probs, pheno);
    const auto loci = grid_loci(model.loci);
    check_distinct(loci);
    const auto y = center_phenotypes(pheno.values());
    const auto n = y.yc.rows();
    const auto T = y.yc.cols();
    const int per = columns_per_locus(probs.cross);
    const auto k = static_cast<Eigen::Index>(loci.size());

    // Raw design columns, locus by locus.
    Eigen::MatrixXd x(n, k * per);
    for (Eigen::Index j = 0; j < k; ++j) x.middleCols(j * per, per) = locus_design(probs, loci[static_cast<std::size_t>(j)]);

    OrthoBasis basis(n);
    for (Eigen::Index c = 0; c < x.cols(); ++c) basis.add(x.col(c));
    std::vector<Eigen::Index> kept;
    for (Eigen::Index c = 0; c < x.cols(); ++c)
        if (basis.kept()[static_cast<std::size_t>(c)]) kept.push_back(c);

    Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(x.cols(), T);
    const Eigen::RowVectorXd x_mean = x.colwise().mean();
    if (!kept.empty()) {
        Eigen::MatrixXd xk(n, static_cast<Eigen::Index>(kept.size()));
        for (std::size_t i = 0; i < kept.size(); ++i)
            xk.col(static_cast<Eigen::Index>(i)) = x.col(kept[i]).array() - x_mean(kept[i]);
        const Eigen::MatrixXd b = xk.colPivHouseholderQr().solve(y.yc);
        for (std::size_t i = 0; i < kept.size(); ++i) coef.row(kept[i]) = b.row(static_cast<Eigen::Index>(i));
    }
    const Eigen::RowVectorXd intercept = y.mean - x_mean * coef;

    EffectCurves out;
    out.time_labels = pheno.time_labels();
    out.loci = model.loci;
    out.beta.resize(k, T);
    if (probs.cross == CrossType::F2) {
        // Additive score is -1 for AA, so the all-AA baseline subtracts each additive coefficient.
        out.dominance.resize(k, T);
        out.mu = intercept;
        for (Eigen::Index j = 0; j < k; ++j) {
            out.beta.row(j) = 2.0 * coef.row(j * 2);
            out.dominance.row(j) = coef.row(j * 2 + 1);
            out.mu -= coef.row(j * 2);
        }
    } else {
        out.mu = intercept;
        for (Eigen::Index j = 0; j < k; ++j) out.beta.row(j) = coef.row(j);
    }
    out.lod = lod_per_time(y, basis.rss(y.yc));
    return out;
}

}  // namespace fvqtl
