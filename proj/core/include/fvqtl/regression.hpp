#pragma once

// Least-squares building blocks shared by the genome scan and the
// multiple-QTL model code. Every fit includes an intercept, which is
// handled by centering: phenotypes and design columns are centered and the
// regression runs on the centered columns only.

#include "fvqtl/genoprob.hpp"

#include <Eigen/Core>

#include <vector>

namespace fvqtl {

/// LOD assigned to positions whose residual sum of squares is numerically 0.
inline constexpr double kLodCap = 300.0;
/// RSS0 at or below this is a constant phenotype: LOD is 0.
inline constexpr double kRss0Floor = 1e-12;
/// RSS1 / RSS0 at or below this counts as a perfect fit.
inline constexpr double kPerfectFitRatio = 1e-12;
/// A centered column with squared norm <= kConstantTol * n is constant.
inline constexpr double kConstantTol = 1e-12;
/// A column whose squared norm shrinks below this fraction after projecting
/// out earlier columns is treated as linearly dependent and dropped.
inline constexpr double kCollinearTol = 1e-10;

/// (n/2) log10(rss0 / rss1) with the constant-phenotype and perfect-fit
/// conventions, clamped to [0, kLodCap].
double lod_from_rss(double n, double rss0, double rss1);

struct CenteredPhenotypes {
    Eigen::MatrixXd yc;        // n x T, column means removed
    Eigen::RowVectorXd mean;   // per-time means
    Eigen::RowVectorXd rss0;   // per-time intercept-only RSS
    double n = 0.0;
};

/// Throws DataError when any cell is missing or non-finite.
CenteredPhenotypes center_phenotypes(const Eigen::MatrixXd& y);

/// Index of a grid position: chromosome index and position index within it.
struct GridLocus {
    std::size_t chr = 0;
    std::size_t pos = 0;

    friend bool operator==(const GridLocus&, const GridLocus&) = default;
};

/// Uncentered design columns of one locus: Pr(BB) for RIL; additive score
/// Pr(BB) - Pr(AA) and dominance score Pr(AB) for F2.
Eigen::MatrixXd locus_design(const GenoProbs& probs, GridLocus locus);

/// Number of design columns per locus for the cross.
int columns_per_locus(CrossType cross);

/// Orthonormal basis of centered design columns, grown one column at a time
/// by twice-iterated Gram-Schmidt. Dependent columns are dropped.
class OrthoBasis {
public:
    explicit OrthoBasis(Eigen::Index n) : q_(n, 0) {}

    /// Centers `column`, orthogonalises it against the basis and appends it
    /// unless it is constant or dependent. Returns whether it was kept.
    bool add(const Eigen::VectorXd& column);

    Eigen::Index size() const noexcept { return q_.cols(); }
    const Eigen::MatrixXd& q() const noexcept { return q_; }
    const std::vector<bool>& kept() const noexcept { return kept_; }

    /// Residuals of centered phenotypes after projection onto the basis.
    Eigen::MatrixXd residual(const Eigen::MatrixXd& yc) const;

    /// Per-time residual sums of squares, computed from explicit residuals.
    Eigen::RowVectorXd rss(const Eigen::MatrixXd& yc) const;

private:
    Eigen::MatrixXd q_;
    std::vector<bool> kept_;
};

/// Per-time LOD of a fit with the given per-time RSS against the null.
Eigen::RowVectorXd lod_per_time(const CenteredPhenotypes& y, const Eigen::RowVectorXd& rss1);

/// Mean (SLOD) or maximum (MLOD) of per-time LOD magnitudes.
double aggregate(const Eigen::RowVectorXd& lod, Stat stat);

}  // namespace fvqtl
