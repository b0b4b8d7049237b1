#include "fvqtl/types.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace fvqtl {

int n_genotypes(CrossType cross) { return cross == CrossType::F2 ? 3 : 2; }

std::string_view to_string(CrossType cross) { return cross == CrossType::F2 ? "f2" : "ril"; }

CrossType parse_cross(std::string_view text) {
    if (text == "ril" || text == "RIL" || text == "ril_self" || text == "RIL_SELF") return CrossType::RilSelf;
    if (text == "f2" || text == "F2") return CrossType::F2;
    throw std::invalid_argument(fmt::format("unknown cross type '{}' (expected ril or f2)", text));
}

std::string_view to_string(Stat stat) { return stat == Stat::Slod ? "slod" : "mlod"; }

Stat parse_stat(std::string_view text) {
    if (text == "slod" || text == "SLOD") return Stat::Slod;
    if (text == "mlod" || text == "MLOD") return Stat::Mlod;
    throw std::invalid_argument(fmt::format("unknown statistic '{}' (expected slod or mlod)", text));
}

int state_index(Geno code, CrossType cross) {
    switch (code) {
    case Geno::AA: return 0;
    case Geno::AB: return cross == CrossType::F2 ? 1 : -1;
    case Geno::BB: return cross == CrossType::F2 ? 2 : 1;
    case Geno::Missing: return -1;
    }
    return -1;
}

Geno state_genotype(int state, CrossType cross) {
    if (cross == CrossType::F2) {
        static constexpr Geno f2[] = {Geno::AA, Geno::AB, Geno::BB};
        return f2[state];
    }
    return state == 0 ? Geno::AA : Geno::BB;
}

static std::string located(const std::string& message, const std::string& file, std::size_t row,
                           const std::string& column) {
    if (file.empty()) return message;
    std::string where = file;
    if (row > 0) where += fmt::format(", row {}", row);
    if (!column.empty()) where += fmt::format(", column '{}'", column);
    return fmt::format("{}: {}", where, message);
}

DataError::DataError(const std::string& message, std::string file, std::size_t row, std::string column)
    : std::runtime_error(located(message, file, row, column)),
      file_(std::move(file)),
      row_(row),
      column_(std::move(column)) {}

GeneticMap::GeneticMap(std::vector<Chromosome> chromosomes) : chromosomes_(std::move(chromosomes)) {
    std::unordered_set<std::string> chr_names;
    std::unordered_set<std::string> marker_names;
    for (const auto& chr : chromosomes_) {
        if (!chr_names.insert(chr.name).second)
            throw DataError(fmt::format("duplicate chromosome '{}'", chr.name));
        if (chr.markers.empty())
            throw DataError(fmt::format("chromosome '{}' has no markers", chr.name));
        double prev = -1.0;
        for (const auto& m : chr.markers) {
            if (!std::isfinite(m.pos) || m.pos < 0.0)
                throw DataError(fmt::format("marker '{}' has invalid position {}", m.name, m.pos));
            if (m.pos < prev)
                throw DataError(fmt::format("marker '{}' on chromosome '{}' is out of order ({} < {})",
                                            m.name, chr.name, m.pos, prev));
            if (!marker_names.insert(m.name).second)
                throw DataError(fmt::format("duplicate marker '{}'", m.name));
            prev = m.pos;
        }
        n_markers_ += chr.markers.size();
    }
}

std::optional<std::size_t> GeneticMap::chromosome_index(std::string_view name) const {
    for (std::size_t i = 0; i < chromosomes_.size(); ++i)
        if (chromosomes_[i].name == name) return i;
    return std::nullopt;
}

std::vector<std::string> GeneticMap::marker_names() const {
    std::vector<std::string> names;
    names.reserve(n_markers_);
    for (const auto& chr : chromosomes_)
        for (const auto& m : chr.markers) names.push_back(m.name);
    return names;
}

GeneticMap GeneticMap::uniform(std::size_t n_chr, double length, double spacing) {
    std::vector<Chromosome> chrs;
    const auto n_mark = static_cast<std::size_t>(std::llround(length / spacing)) + 1;
    for (std::size_t c = 0; c < n_chr; ++c) {
        Chromosome chr{std::to_string(c + 1), {}};
        for (std::size_t m = 0; m < n_mark; ++m)
            chr.markers.push_back({fmt::format("c{}m{}", c + 1, m + 1), static_cast<double>(m) * spacing});
        chrs.push_back(std::move(chr));
    }
    return GeneticMap(std::move(chrs));
}

GenotypeMatrix::GenotypeMatrix(CrossType cross, std::vector<std::string> ids, std::vector<std::string> markers,
                               std::vector<Geno> codes)
    : cross_(cross), ids_(std::move(ids)), markers_(std::move(markers)), codes_(std::move(codes)) {
    if (codes_.size() != ids_.size() * markers_.size())
        throw DataError(fmt::format("genotype matrix has {} cells, expected {} x {}", codes_.size(), ids_.size(),
                                    markers_.size()));
    for (std::size_t i = 0; i < codes_.size(); ++i) {
        if (codes_[i] != Geno::Missing && state_index(codes_[i], cross_) < 0)
            throw DataError(fmt::format("genotype code illegal for cross {} (individual '{}', marker '{}')",
                                        to_string(cross_), ids_[i / markers_.size()],
                                        markers_[i % markers_.size()]));
    }
    std::unordered_set<std::string> seen;
    for (const auto& id : ids_)
        if (!seen.insert(id).second) throw DataError(fmt::format("duplicate individual '{}'", id));
}

void GenotypeMatrix::check_against(const GeneticMap& map) const {
    const auto names = map.marker_names();
    if (names != markers_)
        throw DataError(fmt::format("genotype columns ({}) do not match the genetic map ({} markers)",
                                    markers_.size(), names.size()));
}

PhenotypeMatrix::PhenotypeMatrix(std::vector<std::string> ids, std::vector<double> time_labels,
                                 Eigen::MatrixXd values)
    : ids_(std::move(ids)), time_labels_(std::move(time_labels)), values_(std::move(values)) {
    if (static_cast<std::size_t>(values_.rows()) != ids_.size() ||
        static_cast<std::size_t>(values_.cols()) != time_labels_.size())
        throw DataError(fmt::format("phenotype matrix is {} x {}, expected {} x {}", values_.rows(),
                                    values_.cols(), ids_.size(), time_labels_.size()));
    for (std::size_t t = 1; t < time_labels_.size(); ++t)
        if (!(time_labels_[t] > time_labels_[t - 1]))
            throw DataError(fmt::format("time labels must be strictly increasing ({} after {})", time_labels_[t],
                                        time_labels_[t - 1]));
    std::unordered_set<std::string> seen;
    for (const auto& id : ids_)
        if (!seen.insert(id).second) throw DataError(fmt::format("duplicate individual '{}'", id));
}

bool PhenotypeMatrix::has_missing() const { return !values_.allFinite(); }

PhenotypeMatrix PhenotypeMatrix::aligned_to(const std::vector<std::string>& ids) const {
    std::unordered_map<std::string, Eigen::Index> row_of;
    for (std::size_t i = 0; i < ids_.size(); ++i) row_of.emplace(ids_[i], static_cast<Eigen::Index>(i));
    Eigen::MatrixXd out(static_cast<Eigen::Index>(ids.size()), values_.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto it = row_of.find(ids[i]);
        if (it == row_of.end()) throw DataError(fmt::format("individual '{}' has no phenotype row", ids[i]));
        out.row(static_cast<Eigen::Index>(i)) = values_.row(it->second);
    }
    return PhenotypeMatrix(ids, time_labels_, std::move(out));
}

std::vector<GridPoint> grid_positions(const Chromosome& chr, const GridSpec& grid) {
    if (!(grid.step >= 0.0)) throw std::invalid_argument("grid step must be >= 0");
    constexpr double kSameTol = 1e-6;
    std::vector<GridPoint> points;
    for (std::size_t m = 0; m < chr.markers.size(); ++m)
        points.push_back({chr.markers[m].pos, chr.markers[m].name, static_cast<int>(m)});
    if (grid.step > 0.0) {
        const double first = chr.markers.front().pos;
        const double last = chr.markers.back().pos;
        for (std::size_t k = 1;; ++k) {
            const double pos = first + static_cast<double>(k) * grid.step;
            if (pos > last + kSameTol) break;
            const bool on_marker = std::any_of(chr.markers.begin(), chr.markers.end(),
                                               [&](const Marker& m) { return std::abs(m.pos - pos) <= kSameTol; });
            if (!on_marker) points.push_back({pos, fmt::format("c{}.loc{:g}", chr.name, pos), -1});
        }
    }
    std::stable_sort(points.begin(), points.end(),
                     [](const GridPoint& a, const GridPoint& b) { return a.pos < b.pos; });
    return points;
}

}  // namespace fvqtl
