#pragma once

// Simulation engines for the two power studies.
//
// Single-QTL study: one 100 cM F2 chromosome, six equally spaced markers, a
// QTL at 32 cM, logistic genotype mean curves g(t) = a / (1 + b exp(-r t))
// observed at t = 1..10, residuals MVN(0, c * Sigma) plus optional white
// noise.
//
// Multiple-QTL study: five-chromosome RIL, three QTL, each individual's
// cubic coefficients (a, b, c, d) drawn from MVN(baseline + QTL effects,
// Sigma4), phenotype = cubic at 241 equally spaced times on [0, 1] plus
// N(0, 1) measurement error.

#include "fvqtl/io.hpp"
#include "fvqtl/types.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace fvqtl {

enum class CovarianceKind { Autoregressive, Equicorrelated, Unstructured };

std::string_view to_string(CovarianceKind kind);
CovarianceKind parse_covariance(std::string_view text);

struct CovarianceSpec {
    CovarianceKind kind = CovarianceKind::Autoregressive;
    double sigma2 = 3.0;
    double rho = 0.6;
    double scale = 1.0;  // c

    static CovarianceSpec autoregressive(double c = 1.0, double sigma2 = 3.0, double rho = 0.6);
    static CovarianceSpec equicorrelated(double c = 1.0, double sigma2 = 3.0, double rho = 0.5);
    static CovarianceSpec unstructured(double c = 1.0);

    /// Sigma for `n_times` time points (the unstructured matrix is 10 x 10).
    Eigen::MatrixXd base(std::size_t n_times) const;
    /// c * Sigma.
    Eigen::MatrixXd matrix(std::size_t n_times) const;
};

/// The 10 x 10 unstructured residual covariance of the single-QTL study.
/// The published table is asymmetric in one pair of cells ((4,6) = 4.01 vs
/// (6,4) = 4.07); the two are averaged.
Eigen::MatrixXd unstructured_covariance();

/// Multivariate normal sampler via Cholesky factorisation. A zero
/// covariance is allowed and yields the zero vector.
class MvnSampler {
public:
    /// Throws std::invalid_argument if `cov` is not symmetric positive definite.
    explicit MvnSampler(const Eigen::MatrixXd& cov);

    Eigen::VectorXd draw(std::mt19937_64& rng) const;
    Eigen::Index dim() const noexcept { return dim_; }

private:
    Eigen::MatrixXd lower_;
    Eigen::Index dim_ = 0;
    bool zero_ = false;
};

struct LogisticParams {
    double a = 0.0;
    double b = 0.0;
    double r = 0.0;
};

struct LogisticQtlSpec {
    /// Indexed AA, AB, BB.
    std::array<LogisticParams, 3> curves{{{29.0, 7.0, 0.7}, {28.5, 6.5, 0.73}, {27.5, 5.0, 0.75}}};
    double qtl_pos = 32.0;
    double chr_length = 100.0;
    std::size_t n_markers = 6;
    std::vector<double> times{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

    /// Same design with every genotype following the AA curve.
    LogisticQtlSpec without_effect() const;
};

double logistic_mean(const LogisticQtlSpec& spec, Geno g, double t);

struct HeritabilityProfile {
    Eigen::VectorXd h2;  // per time point
    double mean = 0.0;
};

/// h2(t) = Vq(t) / (Vq(t) + c Sigma_tt + noise_sd^2) with F2 frequencies
/// (1/4, 1/2, 1/4) for the genetic variance Vq(t).
HeritabilityProfile heritability_profile(const LogisticQtlSpec& spec, const CovarianceSpec& cov, double noise_sd = 0.0);

struct CubicQtlEffect {
    std::string chr;
    double pos = 0.0;
    Eigen::Vector4d coef = Eigen::Vector4d::Zero();
};

/// How a QTL genotype scales its coefficient vector: AA -> 0 and BB -> 1,
/// or AA -> -1 and BB -> +1 (effect vector = half the BB-minus-AA gap).
enum class EffectCoding { ZeroOne, PlusMinusOne };

std::string_view to_string(EffectCoding coding);
EffectCoding parse_coding(std::string_view text);

struct CubicQtlSpec {
    Eigen::Vector4d baseline{-0.238, -265.248, 229.405, -59.771};
    std::vector<CubicQtlEffect> qtl{
        {"1", 61.0, Eigen::Vector4d(0.209, 8.729, 1.602, -9.054)},
        {"3", 76.0, Eigen::Vector4d(-1.887, 3.414, -4.220, 2.265)},
        {"4", 40.0, Eigen::Vector4d(2.003, 11.907, -28.647, 15.311)},
    };
    Eigen::Matrix4d coef_cov = default_coef_cov();
    double noise_var = 1.0;
    EffectCoding coding = EffectCoding::PlusMinusOne;
    std::size_t n_times = 241;
    GeneticMap map = GeneticMap::uniform(5, 100.0, 5.0);

    static Eigen::Matrix4d default_coef_cov();
    std::vector<double> times() const;
    /// Same design with every QTL effect set to zero.
    CubicQtlSpec without_effect() const;
};

struct TrueQtl {
    std::string chr;
    double pos = 0.0;
};

struct SimulatedData {
    Dataset data;
    std::vector<TrueQtl> truth;
    /// n_ind x n_qtl simulated QTL genotypes.
    std::vector<std::vector<Geno>> qtl_genotypes;
};

/// Markov chain along each chromosome: first marker from the stationary
/// genotype frequencies, then transitions over Haldane fractions.
/// Individual i uses its own stream of `seed`.
GenotypeMatrix sim_genotypes(const GeneticMap& map, CrossType cross, std::size_t n, std::uint64_t seed);

SimulatedData sim_single_qtl(const LogisticQtlSpec& spec, const CovarianceSpec& cov, std::size_t n, double noise_sd,
                             std::uint64_t seed);

SimulatedData sim_multi_qtl(const CubicQtlSpec& spec, std::size_t n, std::uint64_t seed);
inline SimulatedData sim_multi_qtl(std::size_t n, std::uint64_t seed) { return sim_multi_qtl(CubicQtlSpec{}, n, seed); }

/// Derived 64-bit seed for replicate `index` of a study seeded with `seed`.
std::uint64_t replicate_seed(std::uint64_t seed, std::uint64_t domain, std::uint64_t index);

}  // namespace fvqtl
