#pragma once

// Conditional QTL-genotype probabilities on a pseudomarker grid.
//
// Each chromosome of each individual is a hidden Markov chain over the true
// genotypes at the grid positions (markers and pseudomarkers). Transitions
// come from Haldane recombination fractions, expanded for RIL by selfing.
// A marker reports its true genotype with probability 1 - error_prob and one
// of the other codes uniformly otherwise; missing codes carry no information.

#include "fvqtl/types.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <vector>

namespace fvqtl {

inline constexpr double kDefaultErrorProb = 1e-4;

/// Haldane map function, r = (1 - exp(-2d/100)) / 2 for d in cM.
double haldane_r(double d_cm);

/// Haldane-Waddington expansion for RIL by selfing, R = 2r / (1 + 2r).
double ril_expand(double r);

/// Stationary genotype frequencies: (1/2, 1/2) for RIL, (1/4, 1/2, 1/4) for F2.
Eigen::VectorXd initial_probs(CrossType cross);

/// Row-stochastic transition matrix between loci d cM apart, indexed
/// [from state][to state].
Eigen::MatrixXd transition_matrix(CrossType cross, double d_cm);

/// Pr(observed code | true state).
double emission_prob(Geno observed, int true_state, CrossType cross, double error_prob);

struct ChromosomeProbs {
    std::string chr;
    std::vector<GridPoint> grid;
    /// One n_ind x n_positions matrix per genotype state.
    std::vector<Eigen::MatrixXd> probs;

    std::size_t n_positions() const noexcept { return grid.size(); }
};

struct GenoProbs {
    CrossType cross = CrossType::RilSelf;
    std::vector<std::string> ids;
    std::vector<ChromosomeProbs> chromosomes;
    double step = 1.0;
    double error_prob = kDefaultErrorProb;

    std::size_t n_ind() const noexcept { return ids.size(); }
    std::size_t n_positions() const;
};

GenoProbs calc_genoprob(const GenotypeMatrix& geno, const GeneticMap& map, CrossType cross,
                        const GridSpec& grid = {}, double error_prob = kDefaultErrorProb, int threads = 1);

/// Debug dump: one row per (individual, position) with columns
/// id,position,<genotype probabilities>.
void write_genoprob_csv(const std::filesystem::path& path, const GenoProbs& probs, std::size_t chr_index);

}  // namespace fvqtl
