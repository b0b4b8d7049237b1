#pragma once

// Multiple-QTL models for function-valued traits: the penalized criterion
// pLOD = LOD(model) - penalty * |model|, with LOD(model) the SLOD or MLOD of
// the per-time additive-model LOD scores; forward/backward stepwise search;
// profile curves; and per-time effect estimates.

#include "fvqtl/genoprob.hpp"
#include "fvqtl/regression.hpp"

#include <Eigen/Core>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fvqtl {

struct QtlLocus {
    std::string chr;
    double pos = 0.0;
    GridLocus grid;

    /// "chr<name>@<pos>", e.g. chr1@60.
    std::string label() const;
};

struct QtlModel {
    std::vector<QtlLocus> loci;
    Stat stat = Stat::Slod;
    double penalty = 0.0;
    double model_lod = 0.0;
    double plod = 0.0;

    std::size_t size() const noexcept { return loci.size(); }
};

QtlLocus make_locus(const GenoProbs& probs, GridLocus where);

/// Grid position on `chr` within 1e-6 cM of `pos`; throws DataError otherwise.
QtlLocus locate(const GenoProbs& probs, std::string_view chr, double pos);

/// SLOD or MLOD of the additive model with the given loci against the null.
/// Throws std::invalid_argument on duplicate loci.
double model_lod(const GenoProbs& probs, const PhenotypeMatrix& pheno, std::span<const GridLocus> loci, Stat stat);

double plod(double model_lod_value, std::size_t n_qtl, double penalty);

struct StepwiseOptions {
    std::size_t max_qtl = 10;
    /// Forward candidates within this distance of a model locus on the same
    /// chromosome are skipped.
    double min_spacing = 5.0;
    int threads = 1;
};

struct StepwiseResult {
    QtlModel best;
    /// Every model visited, in visit order: the null model, the forward path,
    /// then the backward path.
    std::vector<QtlModel> visited;
};

StepwiseResult stepwise_path(const GenoProbs& probs, const PhenotypeMatrix& pheno, Stat stat, double penalty,
                             const StepwiseOptions& options = {});

/// Model with maximal pLOD among those visited. Ties within 1e-9 go to the
/// smaller model, then to the earlier one.
QtlModel stepwise_search(const GenoProbs& probs, const PhenotypeMatrix& pheno, Stat stat, double penalty,
                         const StepwiseOptions& options = {});

struct ProfileCurve {
    QtlLocus qtl;
    std::vector<GridPoint> grid;  // the QTL's chromosome
    Eigen::VectorXd values;       // aggregated statistic at each position
};

struct ProfileCurves {
    Stat stat = Stat::Slod;
    std::vector<ProfileCurve> curves;
};

/// For each QTL, moves it across its chromosome with the others fixed and
/// compares against the model without it.
ProfileCurves profile(const GenoProbs& probs, const PhenotypeMatrix& pheno, const QtlModel& model, Stat stat);

struct EffectCurves {
    std::vector<double> time_labels;
    std::vector<QtlLocus> loci;
    /// Baseline: expected phenotype of an all-AA individual.
    Eigen::RowVectorXd mu;
    /// One row per QTL: BB-minus-AA effect at each time.
    Eigen::MatrixXd beta;
    /// F2 only: dominance deviation per QTL (empty for RIL).
    Eigen::MatrixXd dominance;
    /// Per-time LOD of the full model against the null.
    Eigen::RowVectorXd lod;
};

EffectCurves fit_effects(const GenoProbs& probs, const PhenotypeMatrix& pheno, const QtlModel& model);

}  // namespace fvqtl
