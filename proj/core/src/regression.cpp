#include "fvqtl/regression.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace fvqtl {

double lod_from_rss(double n, double rss0, double rss1) {
    if (rss0 <= kRss0Floor) return 0.0;
    if (rss1 <= kPerfectFitRatio * rss0) return kLodCap;
    const double lod = 0.5 * n * std::log10(rss0 / rss1);
    return std::clamp(lod, 0.0, kLodCap);
}

CenteredPhenotypes center_phenotypes(const Eigen::MatrixXd& y) {
    if (!y.allFinite()) throw DataError("phenotype matrix has missing or non-finite cells; interpolate first");
    if (y.rows() < 2) throw DataError("need at least two individuals");
    CenteredPhenotypes out;
    out.n = static_cast<double>(y.rows());
    out.mean = y.colwise().mean();
    out.yc = y.rowwise() - out.mean;
    out.rss0 = out.yc.colwise().squaredNorm();
    return out;
}

int columns_per_locus(CrossType cross) { return cross == CrossType::F2 ? 2 : 1; }

Eigen::MatrixXd locus_design(const GenoProbs& probs, GridLocus locus) {
    const auto& cp = probs.chromosomes.at(locus.chr);
    if (locus.pos >= cp.n_positions()) throw std::out_of_range("grid position out of range");
    const auto k = static_cast<Eigen::Index>(locus.pos);
    const auto n = static_cast<Eigen::Index>(probs.n_ind());
    if (probs.cross == CrossType::F2) {
        Eigen::MatrixXd x(n, 2);
        x.col(0) = cp.probs[2].col(k) - cp.probs[0].col(k);
        x.col(1) = cp.probs[1].col(k);
        return x;
    }
    return cp.probs[1].col(k);
}

bool OrthoBasis::add(const Eigen::VectorXd& column) {
    Eigen::VectorXd v = column.array() - column.mean();
    const double norm0 = v.squaredNorm();
    bool keep = norm0 > kConstantTol * static_cast<double>(v.size());
    if (keep && q_.cols() > 0) {
        for (int pass = 0; pass < 2; ++pass) v -= q_ * (q_.transpose() * v);
        keep = v.squaredNorm() > kCollinearTol * norm0;
    }
    kept_.push_back(keep);
    if (!keep) return false;
    v /= v.norm();
    q_.conservativeResize(Eigen::NoChange, q_.cols() + 1);
    q_.col(q_.cols() - 1) = v;
    return true;
}

Eigen::MatrixXd OrthoBasis::residual(const Eigen::MatrixXd& yc) const {
    if (q_.cols() == 0) return yc;
    Eigen::MatrixXd r = yc - q_ * (q_.transpose() * yc);
    return r;
}

Eigen::RowVectorXd OrthoBasis::rss(const Eigen::MatrixXd& yc) const { return residual(yc).colwise().squaredNorm(); }

Eigen::RowVectorXd lod_per_time(const CenteredPhenotypes& y, const Eigen::RowVectorXd& rss1) {
    Eigen::RowVectorXd lod(rss1.size());
    for (Eigen::Index t = 0; t < rss1.size(); ++t) lod(t) = lod_from_rss(y.n, y.rss0(t), rss1(t));
    return lod;
}

double aggregate(const Eigen::RowVectorXd& lod, Stat stat) {
    if (lod.size() == 0) return 0.0;
    return stat == Stat::Slod ? lod.cwiseAbs().mean() : lod.cwiseAbs().maxCoeff();
}

}  // namespace fvqtl
