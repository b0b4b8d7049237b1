#pragma once

// Domain types shared by every fvqtl module: genetic map, genotype and
// phenotype matrices, cross types and the error types raised on bad input.

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fvqtl {

enum class CrossType { RilSelf, F2 };

/// Number of true genotype states: 2 for selfed RIL (AA/BB), 3 for F2.
int n_genotypes(CrossType cross);
std::string_view to_string(CrossType cross);
CrossType parse_cross(std::string_view text);

/// Aggregation of per-time LOD scores across the trait.
enum class Stat { Slod, Mlod };

std::string_view to_string(Stat stat);
Stat parse_stat(std::string_view text);

/// Observed genotype code at a marker.
enum class Geno : std::int8_t { Missing = -1, AA = 0, AB = 1, BB = 2 };

/// Index of a genotype into the per-cross state space, or -1 when the code
/// is missing or illegal for the cross (AB in a RIL).
int state_index(Geno code, CrossType cross);
Geno state_genotype(int state, CrossType cross);

/// Error raised for malformed input data. Carries the location when known.
class DataError : public std::runtime_error {
public:
    DataError(const std::string& message, std::string file = {}, std::size_t row = 0,
              std::string column = {});

    const std::string& file() const noexcept { return file_; }
    std::size_t row() const noexcept { return row_; }
    const std::string& column() const noexcept { return column_; }

private:
    std::string file_;
    std::size_t row_;
    std::string column_;
};

struct Marker {
    std::string name;
    double pos = 0.0;  // cM
};

struct Chromosome {
    std::string name;
    std::vector<Marker> markers;

    double length() const { return markers.back().pos - markers.front().pos; }
};

class GeneticMap {
public:
    GeneticMap() = default;
    /// Validates: non-empty chromosomes, unique names, non-decreasing
    /// non-negative positions.
    explicit GeneticMap(std::vector<Chromosome> chromosomes);

    const std::vector<Chromosome>& chromosomes() const noexcept { return chromosomes_; }
    std::size_t n_chromosomes() const noexcept { return chromosomes_.size(); }
    std::size_t n_markers() const noexcept { return n_markers_; }
    std::optional<std::size_t> chromosome_index(std::string_view name) const;
    /// Marker names in traversal order (chromosome by chromosome).
    std::vector<std::string> marker_names() const;

    /// Map with `n_chr` chromosomes named 1..n_chr, each with markers
    /// every `spacing` cM from 0 to `length`.
    static GeneticMap uniform(std::size_t n_chr, double length, double spacing);

private:
    std::vector<Chromosome> chromosomes_;
    std::size_t n_markers_ = 0;
};

class GenotypeMatrix {
public:
    GenotypeMatrix() = default;
    /// `codes` is row-major n_ind x n_markers.
    GenotypeMatrix(CrossType cross, std::vector<std::string> ids, std::vector<std::string> markers,
                   std::vector<Geno> codes);

    CrossType cross() const noexcept { return cross_; }
    std::size_t n_ind() const noexcept { return ids_.size(); }
    std::size_t n_markers() const noexcept { return markers_.size(); }
    const std::vector<std::string>& ids() const noexcept { return ids_; }
    const std::vector<std::string>& markers() const noexcept { return markers_; }
    Geno at(std::size_t ind, std::size_t marker) const { return codes_[ind * markers_.size() + marker]; }
    const std::vector<Geno>& codes() const noexcept { return codes_; }

    /// Throws DataError unless the columns match the map's traversal order.
    void check_against(const GeneticMap& map) const;

private:
    CrossType cross_ = CrossType::RilSelf;
    std::vector<std::string> ids_;
    std::vector<std::string> markers_;
    std::vector<Geno> codes_;
};

/// n_ind x T trait values. Missing cells are NaN.
class PhenotypeMatrix {
public:
    PhenotypeMatrix() = default;
    PhenotypeMatrix(std::vector<std::string> ids, std::vector<double> time_labels,
                    Eigen::MatrixXd values);

    std::size_t n_ind() const noexcept { return ids_.size(); }
    std::size_t n_times() const noexcept { return time_labels_.size(); }
    const std::vector<std::string>& ids() const noexcept { return ids_; }
    const std::vector<double>& time_labels() const noexcept { return time_labels_; }
    const Eigen::MatrixXd& values() const noexcept { return values_; }
    bool has_missing() const;

    /// Rows reordered to follow `ids`. Throws DataError naming the first
    /// requested id that is absent.
    PhenotypeMatrix aligned_to(const std::vector<std::string>& ids) const;

private:
    std::vector<std::string> ids_;
    std::vector<double> time_labels_;
    Eigen::MatrixXd values_;
};

/// Pseudomarker grid: step 0 means marker positions only.
struct GridSpec {
    double step = 1.0;
};

struct GridPoint {
    double pos = 0.0;
    std::string label;      // marker name, or c<chr>.loc<pos> for pseudomarkers
    int marker_index = -1;  // index within the chromosome, -1 for pseudomarkers
};

/// Marker positions merged with pseudomarkers at first_marker + k*step.
std::vector<GridPoint> grid_positions(const Chromosome& chr, const GridSpec& grid);

}  // namespace fvqtl
