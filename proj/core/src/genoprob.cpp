#include "fvqtl/genoprob.hpp"

#include "fvqtl/io.hpp"
#include "fvqtl/parallel.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace fvqtl {

double haldane_r(double d_cm) {
    if (!(d_cm >= 0.0)) throw std::invalid_argument(fmt::format("negative map distance {}", d_cm));
    return 0.5 * -std::expm1(-2.0 * d_cm / 100.0);
}

double ril_expand(double r) {
    if (!(r >= 0.0 && r <= 0.5)) throw std::invalid_argument(fmt::format("recombination fraction {} outside [0, 0.5]", r));
    return 2.0 * r / (1.0 + 2.0 * r);
}

Eigen::VectorXd initial_probs(CrossType cross) {
    if (cross == CrossType::F2) return Eigen::Vector3d(0.25, 0.5, 0.25);
    return Eigen::Vector2d(0.5, 0.5);
}

Eigen::MatrixXd transition_matrix(CrossType cross, double d_cm) {
    const double r = haldane_r(d_cm);
    if (cross == CrossType::RilSelf) {
        const double R = ril_expand(r);
        Eigen::Matrix2d t;
        t << 1.0 - R, R, R, 1.0 - R;
        return t;
    }
    const double s = 1.0 - r;
    Eigen::Matrix3d t;
    t << s * s, 2.0 * r * s, r * r,
         r * s, s * s + r * r, r * s,
         r * r, 2.0 * r * s, s * s;
    return t;
}

double emission_prob(Geno observed, int true_state, CrossType cross, double error_prob) {
    const int obs = state_index(observed, cross);
    if (obs < 0) return 1.0;
    if (obs == true_state) return 1.0 - error_prob;
    return error_prob / static_cast<double>(n_genotypes(cross) - 1);
}

std::size_t GenoProbs::n_positions() const {
    std::size_t n = 0;
    for (const auto& c : chromosomes) n += c.n_positions();
    return n;
}

namespace {

// Forward-backward with per-step normalisation for one individual on one
// chromosome. `emit(k, g)` gives the emission at grid point k.
template <class Emit>
void forward_backward(const std::vector<Eigen::MatrixXd>& trans, const Eigen::VectorXd& init, Emit emit,
                      Eigen::MatrixXd& alpha, Eigen::MatrixXd& beta, Eigen::MatrixXd& post) {
    const auto n_pos = alpha.cols();
    const auto G = alpha.rows();
    for (Eigen::Index g = 0; g < G; ++g) alpha(g, 0) = init(g) * emit(0, g);
    alpha.col(0) /= alpha.col(0).sum();
    for (Eigen::Index k = 1; k < n_pos; ++k) {
        alpha.col(k).noalias() = trans[static_cast<std::size_t>(k - 1)].transpose() * alpha.col(k - 1);
        for (Eigen::Index g = 0; g < G; ++g) alpha(g, k) *= emit(k, g);
        alpha.col(k) /= alpha.col(k).sum();
    }
    beta.col(n_pos - 1).setOnes();
    for (Eigen::Index k = n_pos - 2; k >= 0; --k) {
        Eigen::VectorXd e(G);
        for (Eigen::Index g = 0; g < G; ++g) e(g) = emit(k + 1, g) * beta(g, k + 1);
        beta.col(k).noalias() = trans[static_cast<std::size_t>(k)] * e;
        beta.col(k) /= beta.col(k).sum();
    }
    post = alpha.cwiseProduct(beta);
    for (Eigen::Index k = 0; k < n_pos; ++k) post.col(k) /= post.col(k).sum();
}

}  // namespace

GenoProbs calc_genoprob(const GenotypeMatrix& geno, const GeneticMap& map, CrossType cross, const GridSpec& grid,
                        double error_prob, int threads) {
    if (!(error_prob >= 0.0 && error_prob < 0.5))
        throw std::invalid_argument(fmt::format("error_prob {} outside [0, 0.5)", error_prob));
    if (geno.cross() != cross) throw std::invalid_argument("genotype matrix cross type differs from requested cross");
    geno.check_against(map);

    GenoProbs out;
    out.cross = cross;
    out.ids = geno.ids();
    out.step = grid.step;
    out.error_prob = error_prob;

    const auto n_ind = static_cast<Eigen::Index>(geno.n_ind());
    const int G = n_genotypes(cross);
    const Eigen::VectorXd init = initial_probs(cross);

    std::size_t marker_offset = 0;
    for (const auto& chr : map.chromosomes()) {
        ChromosomeProbs cp;
        cp.chr = chr.name;
        cp.grid = grid_positions(chr, grid);
        const auto n_pos = static_cast<Eigen::Index>(cp.grid.size());
        cp.probs.assign(static_cast<std::size_t>(G), Eigen::MatrixXd(n_ind, n_pos));

        std::vector<Eigen::MatrixXd> trans;
        for (std::size_t k = 0; k + 1 < cp.grid.size(); ++k)
            trans.push_back(transition_matrix(cross, cp.grid[k + 1].pos - cp.grid[k].pos));

        parallel_for(geno.n_ind(), threads, [&](std::size_t begin, std::size_t end) {
            Eigen::MatrixXd alpha(G, n_pos), beta(G, n_pos), post(G, n_pos);
            for (std::size_t i = begin; i < end; ++i) {
                auto emit = [&](Eigen::Index k, Eigen::Index g) {
                    const int m = cp.grid[static_cast<std::size_t>(k)].marker_index;
                    if (m < 0) return 1.0;
                    return emission_prob(geno.at(i, marker_offset + static_cast<std::size_t>(m)), static_cast<int>(g),
                                         cross, error_prob);
                };
                forward_backward(trans, init, emit, alpha, beta, post);
                for (int g = 0; g < G; ++g)
                    cp.probs[static_cast<std::size_t>(g)].row(static_cast<Eigen::Index>(i)) = post.row(g);
            }
        });
        marker_offset += chr.markers.size();
        out.chromosomes.push_back(std::move(cp));
    }
    return out;
}

void write_genoprob_csv(const std::filesystem::path& path, const GenoProbs& probs, std::size_t chr_index) {
    const auto& cp = probs.chromosomes.at(chr_index);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file", path.string());
    out << "id,position";
    if (probs.cross == CrossType::F2)
        out << ",AA,AB,BB\n";
    else
        out << ",AA,BB\n";
    for (std::size_t i = 0; i < probs.n_ind(); ++i) {
        for (std::size_t k = 0; k < cp.n_positions(); ++k) {
            out << probs.ids[i] << ',' << format_number(cp.grid[k].pos);
            for (const auto& m : cp.probs)
                out << ',' << format_number(m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
            out << '\n';
        }
    }
}

}  // namespace fvqtl
