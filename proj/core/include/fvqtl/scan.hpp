#pragma once

// Haley-Knott genome scan of every time point at once, SLOD/MLOD
// aggregation, and permutation thresholds.
//
// At each grid position the design [1, p] (RIL) or [1, additive, dominance]
// (F2) is factored once; all T phenotype columns are then fit by a single
// matrix product, so the cost is linear in the number of time points.

#include "fvqtl/genoprob.hpp"
#include "fvqtl/regression.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fvqtl {

struct ChromosomeLod {
    std::string chr;
    std::vector<GridPoint> grid;
    /// positions x time points; the sign is that of the BB-minus-AA effect.
    Eigen::MatrixXd lod;
};

struct SignedLodMatrix {
    std::vector<double> time_labels;
    std::vector<ChromosomeLod> chromosomes;

    std::size_t n_positions() const;
};

struct ChromosomeSummary {
    std::string chr;
    std::vector<GridPoint> grid;
    Eigen::VectorXd slod;
    Eigen::VectorXd mlod;
};

struct ScanSummary {
    std::vector<ChromosomeSummary> chromosomes;
};

struct GenomeMax {
    double value = 0.0;
    GridLocus where;
};

/// Precomputed orthonormal factorisation of every grid position's design.
/// Reusable across phenotype matrices (permutations, simulation replicates
/// sharing genotypes).
class HkScanner {
public:
    explicit HkScanner(const GenoProbs& probs);

    SignedLodMatrix scan(const CenteredPhenotypes& y, const std::vector<double>& time_labels) const;

    /// Genome-wide maxima of SLOD and MLOD for centered phenotypes `yc`
    /// (rows aligned with the genotypes) with per-time null RSS `rss0`.
    std::pair<double, double> genome_max(const Eigen::MatrixXd& yc, const Eigen::RowVectorXd& rss0) const;

    std::size_t n_ind() const noexcept { return n_ind_; }

private:
    struct Design {
        Eigen::MatrixXd q1;  // n x P, normalised centered additive column (0 if dropped)
        Eigen::MatrixXd q2;  // n x P, F2 dominance residual (empty for RIL)
        Eigen::VectorXd r11, r12, r22;
    };

    void lod_block(std::size_t chr, const Eigen::MatrixXd& yc, const Eigen::RowVectorXd& rss0, Eigen::MatrixXd& w1,
                   Eigen::MatrixXd& w2, Eigen::MatrixXd& lod, bool signed_lod) const;

    CrossType cross_;
    std::size_t n_ind_;
    std::vector<Design> designs_;
    std::vector<std::string> chr_names_;
    std::vector<std::vector<GridPoint>> grids_;
};

SignedLodMatrix scan_hk(const GenoProbs& probs, const PhenotypeMatrix& pheno);

/// Per chromosome: mean over time of |LOD| at every position.
std::vector<Eigen::VectorXd> slod(const SignedLodMatrix& lods);
/// Per chromosome: maximum over time of |LOD| at every position.
std::vector<Eigen::VectorXd> mlod(const SignedLodMatrix& lods);

ScanSummary summarize(const SignedLodMatrix& lods);

/// Largest statistic over the genome; ties go to the first position.
GenomeMax genome_max(const ScanSummary& summary, Stat stat);

struct PermutationResult {
    Stat stat = Stat::Slod;
    std::vector<double> maxima;                       // one per permutation, in index order
    std::vector<std::pair<double, double>> thresholds;  // (alpha, threshold)
    std::uint64_t seed = 0;
};

struct PermutationMaxima {
    std::vector<double> slod;
    std::vector<double> mlod;
};

/// Genome-wide maxima of both statistics under `n_perm` row permutations of
/// the phenotype matrix. Permutation i draws from its own stream of `seed`,
/// so the result does not depend on `threads`.
PermutationMaxima permutation_maxima(const GenoProbs& probs, const PhenotypeMatrix& pheno, std::size_t n_perm,
                                     std::uint64_t seed, int threads = 1);

PermutationResult permutation_threshold(const GenoProbs& probs, const PhenotypeMatrix& pheno, Stat stat,
                                        std::size_t n_perm, std::span<const double> alphas, std::uint64_t seed,
                                        int threads = 1);

/// Empirical 1 - alpha quantile: order statistic ceil((1 - alpha) n),
/// 1-based, clamped to [1, n].
double empirical_threshold(std::span<const double> maxima, double alpha);

}  // namespace fvqtl
