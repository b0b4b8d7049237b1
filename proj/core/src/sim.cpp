#include "fvqtl/sim.hpp"

#include "fvqtl/genoprob.hpp"
#include "fvqtl/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fvqtl {

std::string_view to_string(CovarianceKind kind) {
    switch (kind) {
    case CovarianceKind::Autoregressive: return "ar";
    case CovarianceKind::Equicorrelated: return "eq";
    case CovarianceKind::Unstructured: return "un";
    }
    return "ar";
}

CovarianceKind parse_covariance(std::string_view text) {
    if (text == "ar" || text == "autoregressive") return CovarianceKind::Autoregressive;
    if (text == "eq" || text == "equicorrelated") return CovarianceKind::Equicorrelated;
    if (text == "un" || text == "unstructured") return CovarianceKind::Unstructured;
    throw std::invalid_argument(fmt::format("unknown covariance structure '{}' (expected ar, eq or un)", text));
}

CovarianceSpec CovarianceSpec::autoregressive(double c, double sigma2, double rho) {
    return {CovarianceKind::Autoregressive, sigma2, rho, c};
}

CovarianceSpec CovarianceSpec::equicorrelated(double c, double sigma2, double rho) {
    return {CovarianceKind::Equicorrelated, sigma2, rho, c};
}

CovarianceSpec CovarianceSpec::unstructured(double c) { return {CovarianceKind::Unstructured, 0.0, 0.0, c}; }

Eigen::MatrixXd unstructured_covariance() {
    Eigen::MatrixXd s(10, 10);
    s << 0.72, 0.39, 0.45, 0.48, 0.50, 0.53, 0.60, 0.64, 0.68, 0.68,
         0.39, 1.06, 1.61, 1.60, 1.50, 1.48, 1.55, 1.47, 1.35, 1.29,
         0.45, 1.61, 3.29, 3.29, 3.17, 3.09, 3.19, 3.04, 2.78, 2.53,
         0.48, 1.60, 3.29, 3.98, 4.07, 4.01, 4.17, 4.18, 4.00, 3.69,
         0.50, 1.50, 3.17, 4.07, 4.70, 4.68, 4.66, 4.78, 4.70, 4.36,
         0.53, 1.48, 3.09, 4.07, 4.68, 5.56, 6.23, 6.87, 7.11, 6.92,
         0.60, 1.55, 3.19, 4.17, 4.66, 6.23, 8.59, 10.16, 10.80, 10.70,
         0.64, 1.47, 3.04, 4.18, 4.78, 6.87, 10.16, 12.74, 13.80, 13.80,
         0.68, 1.35, 2.78, 4.00, 4.70, 7.11, 10.80, 13.80, 15.33, 15.35,
         0.68, 1.29, 2.53, 3.69, 4.36, 6.92, 10.70, 13.80, 15.35, 15.77;
    Eigen::MatrixXd sym = 0.5 * (s + s.transpose());
    return sym;
}

Eigen::MatrixXd CovarianceSpec::base(std::size_t n_times) const {
    const auto T = static_cast<Eigen::Index>(n_times);
    Eigen::MatrixXd s(T, T);
    switch (kind) {
    case CovarianceKind::Autoregressive:
        for (Eigen::Index i = 0; i < T; ++i)
            for (Eigen::Index j = 0; j < T; ++j) s(i, j) = sigma2 * std::pow(rho, std::abs(static_cast<double>(i - j)));
        break;
    case CovarianceKind::Equicorrelated:
        for (Eigen::Index i = 0; i < T; ++i)
            for (Eigen::Index j = 0; j < T; ++j) s(i, j) = sigma2 * (rho + (i == j ? 1.0 - rho : 0.0));
        break;
    case CovarianceKind::Unstructured:
        if (T != 10) throw std::invalid_argument("the unstructured covariance is defined for 10 time points");
        s = unstructured_covariance();
        break;
    }
    return s;
}

Eigen::MatrixXd CovarianceSpec::matrix(std::size_t n_times) const { return scale * base(n_times); }

MvnSampler::MvnSampler(const Eigen::MatrixXd& cov) : dim_(cov.rows()) {
    if (cov.rows() != cov.cols()) throw std::invalid_argument("covariance must be square");
    if (!cov.allFinite()) throw std::invalid_argument("covariance has non-finite entries");
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("covariance is not symmetric");
    if (cov.isZero(0.0)) {
        zero_ = true;
        return;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("covariance is not positive definite");
    lower_ = llt.matrixL();
}

Eigen::VectorXd MvnSampler::draw(std::mt19937_64& rng) const {
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(dim_);
    for (Eigen::Index i = 0; i < dim_; ++i) z(i) = normal(rng);
    if (zero_) return Eigen::VectorXd::Zero(dim_);
    return lower_ * z;
}

std::string_view to_string(EffectCoding coding) {
    return coding == EffectCoding::ZeroOne ? "zero-one" : "plus-minus-one";
}

EffectCoding parse_coding(std::string_view text) {
    if (text == "zero-one" || text == "01") return EffectCoding::ZeroOne;
    if (text == "plus-minus-one" || text == "pm1") return EffectCoding::PlusMinusOne;
    throw std::invalid_argument(fmt::format("unknown effect coding '{}' (expected zero-one or plus-minus-one)", text));
}

LogisticQtlSpec LogisticQtlSpec::without_effect() const {
    LogisticQtlSpec s = *this;
    s.curves[1] = s.curves[0];
    s.curves[2] = s.curves[0];
    return s;
}

double logistic_mean(const LogisticQtlSpec& spec, Geno g, double t) {
    const int idx = g == Geno::AA ? 0 : g == Geno::AB ? 1 : g == Geno::BB ? 2 : -1;
    if (idx < 0) throw std::invalid_argument("logistic_mean needs a non-missing genotype");
    const auto& p = spec.curves[static_cast<std::size_t>(idx)];
    if (p.b == 0.0) return p.a;
    return p.a / (1.0 + p.b * std::exp(-p.r * t));
}

HeritabilityProfile heritability_profile(const LogisticQtlSpec& spec, const CovarianceSpec& cov, double noise_sd) {
    const std::size_t T = spec.times.size();
    const Eigen::MatrixXd sigma = cov.matrix(T);
    static constexpr std::array<double, 3> freq{0.25, 0.5, 0.25};
    static constexpr std::array<Geno, 3> genos{Geno::AA, Geno::AB, Geno::BB};
    HeritabilityProfile out;
    out.h2.resize(static_cast<Eigen::Index>(T));
    for (std::size_t k = 0; k < T; ++k) {
        double mean = 0.0;
        for (std::size_t g = 0; g < 3; ++g) mean += freq[g] * logistic_mean(spec, genos[g], spec.times[k]);
        double vq = 0.0;
        for (std::size_t g = 0; g < 3; ++g) {
            const double dev = logistic_mean(spec, genos[g], spec.times[k]) - mean;
            vq += freq[g] * dev * dev;
        }
        const auto kk = static_cast<Eigen::Index>(k);
        const double total = vq + sigma(kk, kk) + noise_sd * noise_sd;
        out.h2(kk) = total > 0.0 ? vq / total : 0.0;
    }
    out.mean = T > 0 ? out.h2.mean() : 0.0;
    return out;
}

Eigen::Matrix4d CubicQtlSpec::default_coef_cov() {
    Eigen::Matrix4d s;
    s << 58.99, -177.77, 185.11, -45.44,
         -177.77, 3848.70, -7274.83, 3595.37,
         185.11, -7274.83, 16897.56, -9702.32,
         -45.44, 3595.37, -9702.32, 6096.71;
    return s;
}

std::vector<double> CubicQtlSpec::times() const {
    std::vector<double> t(n_times);
    for (std::size_t k = 0; k < n_times; ++k)
        t[k] = n_times == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(n_times - 1);
    return t;
}

CubicQtlSpec CubicQtlSpec::without_effect() const {
    CubicQtlSpec s = *this;
    for (auto& q : s.qtl) q.coef.setZero();
    return s;
}

std::uint64_t replicate_seed(std::uint64_t seed, std::uint64_t domain, std::uint64_t index) {
    auto rng = make_stream(seed, domain, index);
    return rng();
}

namespace {

int draw_state(const Eigen::Ref<const Eigen::VectorXd>& probs, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    double acc = 0.0;
    for (Eigen::Index g = 0; g < probs.size(); ++g) {
        acc += probs(g);
        if (u < acc) return static_cast<int>(g);
    }
    return static_cast<int>(probs.size() - 1);
}

// Genotype states along sorted positions of one chromosome.
std::vector<int> simulate_chain(const std::vector<double>& positions, CrossType cross, std::mt19937_64& rng) {
    std::vector<int> states(positions.size());
    if (positions.empty()) return states;
    states[0] = draw_state(initial_probs(cross), rng);
    for (std::size_t k = 1; k < positions.size(); ++k) {
        const Eigen::MatrixXd t = transition_matrix(cross, positions[k] - positions[k - 1]);
        const Eigen::VectorXd row = t.row(states[k - 1]).transpose();
        states[k] = draw_state(row, rng);
    }
    return states;
}

// One chromosome with extra (QTL) loci inserted among its markers.
struct ChainLayout {
    std::vector<double> positions;
    std::vector<int> marker_slot;  // slot of each marker in positions
    std::vector<int> extra_slot;   // slot of each extra locus
};

ChainLayout layout_chain(const Chromosome& chr, const std::vector<double>& extra) {
    struct Item {
        double pos;
        int kind;  // 0 marker, 1 extra
        std::size_t index;
    };
    std::vector<Item> items;
    for (std::size_t m = 0; m < chr.markers.size(); ++m) items.push_back({chr.markers[m].pos, 0, m});
    for (std::size_t e = 0; e < extra.size(); ++e) items.push_back({extra[e], 1, e});
    std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.pos < b.pos; });
    ChainLayout out;
    out.marker_slot.resize(chr.markers.size());
    out.extra_slot.resize(extra.size());
    for (std::size_t s = 0; s < items.size(); ++s) {
        out.positions.push_back(items[s].pos);
        (items[s].kind == 0 ? out.marker_slot : out.extra_slot)[items[s].index] = static_cast<int>(s);
    }
    return out;
}

struct GenotypeDraw {
    std::vector<Geno> markers;  // n x n_markers row-major
    std::vector<std::vector<Geno>> qtl;
};

// Simulates marker genotypes plus genotypes at `qtl` loci for n individuals.
GenotypeDraw simulate_with_qtl(const GeneticMap& map, CrossType cross, const std::vector<TrueQtl>& qtl, std::size_t n,
                               std::uint64_t seed) {
    std::vector<ChainLayout> layouts;
    std::vector<std::vector<std::size_t>> qtl_on_chr(map.n_chromosomes());
    for (std::size_t j = 0; j < qtl.size(); ++j) {
        const auto c = map.chromosome_index(qtl[j].chr);
        if (!c) throw std::invalid_argument(fmt::format("QTL on unknown chromosome '{}'", qtl[j].chr));
        qtl_on_chr[*c].push_back(j);
    }
    for (std::size_t c = 0; c < map.n_chromosomes(); ++c) {
        std::vector<double> extra;
        for (auto j : qtl_on_chr[c]) extra.push_back(qtl[j].pos);
        layouts.push_back(layout_chain(map.chromosomes()[c], extra));
    }
    GenotypeDraw out;
    const std::size_t n_mark = map.n_markers();
    out.markers.resize(n * n_mark);
    out.qtl.assign(n, std::vector<Geno>(qtl.size(), Geno::AA));
    for (std::size_t i = 0; i < n; ++i) {
        auto rng = make_stream(seed, stream::kGenotype, i);
        std::size_t offset = 0;
        for (std::size_t c = 0; c < map.n_chromosomes(); ++c) {
            const auto states = simulate_chain(layouts[c].positions, cross, rng);
            const auto& slots = layouts[c].marker_slot;
            for (std::size_t m = 0; m < slots.size(); ++m)
                out.markers[i * n_mark + offset + m] = state_genotype(states[static_cast<std::size_t>(slots[m])], cross);
            for (std::size_t e = 0; e < qtl_on_chr[c].size(); ++e)
                out.qtl[i][qtl_on_chr[c][e]] =
                    state_genotype(states[static_cast<std::size_t>(layouts[c].extra_slot[e])], cross);
            offset += slots.size();
        }
    }
    return out;
}

std::vector<std::string> make_ids(std::size_t n) {
    std::vector<std::string> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = fmt::format("ind{}", i + 1);
    return ids;
}

}  // namespace

GenotypeMatrix sim_genotypes(const GeneticMap& map, CrossType cross, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    auto draw = simulate_with_qtl(map, cross, {}, n, seed);
    return GenotypeMatrix(cross, make_ids(n), map.marker_names(), std::move(draw.markers));
}

SimulatedData sim_single_qtl(const LogisticQtlSpec& spec, const CovarianceSpec& cov, std::size_t n, double noise_sd,
                             std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (spec.n_markers < 2) throw std::invalid_argument("need at least two markers");
    if (!(noise_sd >= 0.0)) throw std::invalid_argument("noise_sd must be >= 0");
    Chromosome chr{"1", {}};
    for (std::size_t m = 0; m < spec.n_markers; ++m)
        chr.markers.push_back({fmt::format("m{}", m + 1),
                               spec.chr_length * static_cast<double>(m) / static_cast<double>(spec.n_markers - 1)});
    GeneticMap map({chr});
    const std::vector<TrueQtl> truth{{"1", spec.qtl_pos}};
    auto draw = simulate_with_qtl(map, CrossType::F2, truth, n, seed);

    const std::size_t T = spec.times.size();
    const MvnSampler mvn(cov.matrix(T));
    Eigen::MatrixXd y(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(T));
    for (std::size_t i = 0; i < n; ++i) {
        auto rng = make_stream(seed, stream::kPhenotype, i);
        const Eigen::VectorXd resid = mvn.draw(rng);
        std::normal_distribution<double> normal;
        for (std::size_t k = 0; k < T; ++k) {
            const auto ii = static_cast<Eigen::Index>(i);
            const auto kk = static_cast<Eigen::Index>(k);
            y(ii, kk) = logistic_mean(spec, draw.qtl[i][0], spec.times[k]) + resid(kk);
            const double e = normal(rng);
            if (noise_sd > 0.0) y(ii, kk) += noise_sd * e;
        }
    }
    auto ids = make_ids(n);
    SimulatedData out;
    out.data.geno = GenotypeMatrix(CrossType::F2, ids, map.marker_names(), std::move(draw.markers));
    out.data.pheno = PhenotypeMatrix(ids, spec.times, std::move(y));
    out.data.map = std::move(map);
    out.truth = truth;
    out.qtl_genotypes = std::move(draw.qtl);
    return out;
}

SimulatedData sim_multi_qtl(const CubicQtlSpec& spec, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    std::vector<TrueQtl> truth;
    for (const auto& q : spec.qtl) truth.push_back({q.chr, q.pos});
    auto draw = simulate_with_qtl(spec.map, CrossType::RilSelf, truth, n, seed);

    const MvnSampler mvn(spec.coef_cov);
    const auto times = spec.times();
    const auto T = static_cast<Eigen::Index>(times.size());
    Eigen::MatrixXd basis(T, 4);
    for (Eigen::Index k = 0; k < T; ++k) {
        const double t = times[static_cast<std::size_t>(k)];
        basis.row(k) << 1.0, t, t * t, t * t * t;
    }
    const double noise_sd = std::sqrt(spec.noise_var);
    Eigen::MatrixXd y(static_cast<Eigen::Index>(n), T);
    for (std::size_t i = 0; i < n; ++i) {
        auto rng = make_stream(seed, stream::kPhenotype, i);
        Eigen::Vector4d coef = spec.baseline;
        for (std::size_t j = 0; j < spec.qtl.size(); ++j)
            if (draw.qtl[i][j] == Geno::BB)
                coef += spec.qtl[j].coef;
            else if (spec.coding == EffectCoding::PlusMinusOne)
                coef -= spec.qtl[j].coef;
        coef += mvn.draw(rng);
        std::normal_distribution<double> normal;
        Eigen::VectorXd curve = basis * coef;
        for (Eigen::Index k = 0; k < T; ++k) {
            const double e = normal(rng);
            curve(k) += noise_sd * e;
        }
        y.row(static_cast<Eigen::Index>(i)) = curve.transpose();
    }
    auto ids = make_ids(n);
    SimulatedData out;
    out.data.geno = GenotypeMatrix(CrossType::RilSelf, ids, spec.map.marker_names(), std::move(draw.markers));
    out.data.pheno = PhenotypeMatrix(ids, times, std::move(y));
    out.data.map = spec.map;
    out.truth = std::move(truth);
    out.qtl_genotypes = std::move(draw.qtl);
    return out;
}

}  // namespace fvqtl
