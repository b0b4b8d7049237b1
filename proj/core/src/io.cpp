#include "fvqtl/io.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_map>
#include <unordered_set>

namespace fvqtl {

namespace {

struct CsvFile {
    std::string path;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based, header is line 1
};

CsvFile read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    CsvFile csv;
    csv.path = path.string();
    if (!in) throw DataError("cannot open file", csv.path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto fields = split_csv_line(line);
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (csv.header.empty()) {
            csv.header = std::move(fields);
            continue;
        }
        if (fields.size() != csv.header.size())
            throw DataError(fmt::format("expected {} fields, found {}", csv.header.size(), fields.size()), csv.path,
                            line_no);
        csv.rows.push_back(std::move(fields));
        csv.line_numbers.push_back(line_no);
    }
    if (csv.header.empty()) throw DataError("file is empty", csv.path);
    return csv;
}

bool parse_double(std::string_view text, double& out) {
    if (text.empty()) return false;
    if (text.front() == '+') text.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size() && std::isfinite(out);
}

Geno parse_geno(std::string_view cell) {
    if (cell == "A") return Geno::AA;
    if (cell == "B") return Geno::BB;
    if (cell == "H") return Geno::AB;
    if (cell == "-") return Geno::Missing;
    throw std::invalid_argument("bad code");
}

char geno_char(Geno g) {
    switch (g) {
    case Geno::AA: return 'A';
    case Geno::AB: return 'H';
    case Geno::BB: return 'B';
    case Geno::Missing: return '-';
    }
    return '-';
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file", path.string());
    return out;
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
        fields.emplace_back(field);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

std::string format_number(double value) {
    auto text = fmt::format("{:.6f}", value);
    if (text == "-0.000000") text = "0.000000";
    return text;
}

GeneticMap read_map(const std::filesystem::path& path) {
    const auto csv = read_csv(path);
    if (csv.header != std::vector<std::string>{"marker", "chr", "pos"})
        throw DataError("header must be 'marker,chr,pos'", csv.path, 1);
    std::vector<Chromosome> chrs;
    std::unordered_map<std::string, std::size_t> chr_index;
    std::unordered_set<std::string> markers;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& row = csv.rows[r];
        const auto line = csv.line_numbers[r];
        if (row[0].empty()) throw DataError("empty marker name", csv.path, line, "marker");
        if (!markers.insert(row[0]).second)
            throw DataError(fmt::format("duplicate marker '{}'", row[0]), csv.path, line, "marker");
        double pos = 0.0;
        if (!parse_double(row[2], pos) || pos < 0.0)
            throw DataError(fmt::format("invalid position '{}'", row[2]), csv.path, line, "pos");
        auto [it, inserted] = chr_index.emplace(row[1], chrs.size());
        if (inserted) chrs.push_back({row[1], {}});
        auto& chr = chrs[it->second];
        if (!chr.markers.empty() && pos < chr.markers.back().pos)
            throw DataError(fmt::format("non-monotone map: marker '{}' at {} follows {} on chromosome '{}'", row[0],
                                        row[2], chr.markers.back().pos, row[1]),
                            csv.path, line, "pos");
        chr.markers.push_back({row[0], pos});
    }
    if (chrs.empty()) throw DataError("map has no markers", csv.path);
    return GeneticMap(std::move(chrs));
}

GenotypeMatrix read_genotypes(const std::filesystem::path& path, const GeneticMap& map, CrossType cross) {
    const auto csv = read_csv(path);
    if (csv.header.empty() || csv.header[0] != "id") throw DataError("first column must be 'id'", csv.path, 1);

    std::unordered_map<std::string, std::size_t> map_column;
    const auto names = map.marker_names();
    for (std::size_t j = 0; j < names.size(); ++j) map_column.emplace(names[j], j);

    // file column -> map column
    std::vector<std::size_t> target(csv.header.size(), 0);
    std::unordered_set<std::string> seen;
    for (std::size_t c = 1; c < csv.header.size(); ++c) {
        const auto& name = csv.header[c];
        auto it = map_column.find(name);
        if (it == map_column.end())
            throw DataError(fmt::format("marker '{}' is not in the genetic map", name), csv.path, 1, name);
        if (!seen.insert(name).second)
            throw DataError(fmt::format("duplicate marker column '{}'", name), csv.path, 1, name);
        target[c] = it->second;
    }
    if (seen.size() != names.size())
        throw DataError(fmt::format("dimension mismatch: {} marker columns but the map has {} markers",
                                    seen.size(), names.size()),
                        csv.path, 1);

    const std::size_t n_mark = names.size();
    std::vector<std::string> ids;
    std::vector<Geno> codes(csv.rows.size() * n_mark, Geno::Missing);
    std::unordered_set<std::string> id_seen;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& row = csv.rows[r];
        const auto line = csv.line_numbers[r];
        if (!id_seen.insert(row[0]).second)
            throw DataError(fmt::format("duplicate individual '{}'", row[0]), csv.path, line, "id");
        ids.push_back(row[0]);
        for (std::size_t c = 1; c < row.size(); ++c) {
            Geno g;
            try {
                g = parse_geno(row[c]);
            } catch (const std::invalid_argument&) {
                throw DataError(fmt::format("unknown genotype code '{}'", row[c]), csv.path, line, csv.header[c]);
            }
            if (g == Geno::AB && cross != CrossType::F2)
                throw DataError("heterozygote code 'H' is illegal for a RIL cross", csv.path, line, csv.header[c]);
            codes[r * n_mark + target[c]] = g;
        }
    }
    return GenotypeMatrix(cross, std::move(ids), names, std::move(codes));
}

PhenotypeMatrix read_phenotypes(const std::filesystem::path& path) {
    const auto csv = read_csv(path);
    if (csv.header.empty() || csv.header[0] != "id") throw DataError("first column must be 'id'", csv.path, 1);
    if (csv.header.size() < 2) throw DataError("no time-point columns", csv.path, 1);
    std::vector<double> times;
    for (std::size_t c = 1; c < csv.header.size(); ++c) {
        double t = 0.0;
        if (!parse_double(csv.header[c], t))
            throw DataError(fmt::format("time label '{}' is not numeric", csv.header[c]), csv.path, 1,
                            csv.header[c]);
        if (!times.empty() && !(t > times.back()))
            throw DataError("time labels must be strictly increasing", csv.path, 1, csv.header[c]);
        times.push_back(t);
    }
    Eigen::MatrixXd values(static_cast<Eigen::Index>(csv.rows.size()), static_cast<Eigen::Index>(times.size()));
    std::vector<std::string> ids;
    std::unordered_set<std::string> id_seen;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& row = csv.rows[r];
        const auto line = csv.line_numbers[r];
        if (!id_seen.insert(row[0]).second)
            throw DataError(fmt::format("duplicate individual '{}'", row[0]), csv.path, line, "id");
        ids.push_back(row[0]);
        for (std::size_t c = 1; c < row.size(); ++c) {
            double v = std::numeric_limits<double>::quiet_NaN();
            if (row[c] != "-" && !parse_double(row[c], v))
                throw DataError(fmt::format("phenotype value '{}' is not numeric", row[c]), csv.path, line,
                                csv.header[c]);
            values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - 1)) = v;
        }
    }
    return PhenotypeMatrix(std::move(ids), std::move(times), std::move(values));
}

Dataset read_dataset(const std::filesystem::path& geno_path, const std::filesystem::path& map_path,
                     const std::filesystem::path& pheno_path, CrossType cross) {
    auto map = read_map(map_path);
    auto geno = read_genotypes(geno_path, map, cross);
    auto pheno = read_phenotypes(pheno_path);

    std::unordered_set<std::string> geno_ids(geno.ids().begin(), geno.ids().end());
    for (std::size_t i = 0; i < pheno.ids().size(); ++i)
        if (!geno_ids.count(pheno.ids()[i]))
            throw DataError(fmt::format("individual '{}' is absent from the genotype file", pheno.ids()[i]),
                            pheno_path.string(), i + 2, "id");
    if (pheno.n_ind() != geno.n_ind())
        throw DataError(fmt::format("dimension mismatch: {} phenotype rows vs {} genotype rows", pheno.n_ind(),
                                    geno.n_ind()),
                        pheno_path.string());
    auto aligned = pheno.aligned_to(geno.ids());
    return {std::move(map), std::move(geno), std::move(aligned)};
}

void write_map(const std::filesystem::path& path, const GeneticMap& map) {
    auto out = open_out(path);
    out << "marker,chr,pos\n";
    for (const auto& chr : map.chromosomes())
        for (const auto& m : chr.markers) out << m.name << ',' << chr.name << ',' << format_number(m.pos) << '\n';
}

void write_genotypes(const std::filesystem::path& path, const GenotypeMatrix& geno) {
    auto out = open_out(path);
    out << "id";
    for (const auto& m : geno.markers()) out << ',' << m;
    out << '\n';
    for (std::size_t i = 0; i < geno.n_ind(); ++i) {
        out << geno.ids()[i];
        for (std::size_t j = 0; j < geno.n_markers(); ++j) out << ',' << geno_char(geno.at(i, j));
        out << '\n';
    }
}

void write_phenotypes(const std::filesystem::path& path, const PhenotypeMatrix& pheno) {
    auto out = open_out(path);
    out << "id";
    for (double t : pheno.time_labels()) out << ',' << format_number(t);
    out << '\n';
    const auto& y = pheno.values();
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        out << pheno.ids()[static_cast<std::size_t>(i)];
        for (Eigen::Index t = 0; t < y.cols(); ++t) {
            out << ',';
            if (std::isfinite(y(i, t)))
                out << format_number(y(i, t));
            else
                out << '-';
        }
        out << '\n';
    }
}

void write_dataset(const std::filesystem::path& dir, const Dataset& data) {
    write_map(dir / "map.csv", data.map);
    write_genotypes(dir / "geno.csv", data.geno);
    write_phenotypes(dir / "pheno.csv", data.pheno);
}

PhenotypeMatrix interpolate_missing(const PhenotypeMatrix& pheno) {
    const auto& times = pheno.time_labels();
    Eigen::MatrixXd y = pheno.values();
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        std::vector<Eigen::Index> observed;
        for (Eigen::Index t = 0; t < y.cols(); ++t)
            if (std::isfinite(y(i, t))) observed.push_back(t);
        if (observed.size() == static_cast<std::size_t>(y.cols())) continue;
        if (observed.size() < 2)
            throw DataError(fmt::format("individual '{}' has fewer than 2 observed time points",
                                        pheno.ids()[static_cast<std::size_t>(i)]));
        for (Eigen::Index t = 0; t < observed.front(); ++t) y(i, t) = y(i, observed.front());
        for (Eigen::Index t = observed.back() + 1; t < y.cols(); ++t) y(i, t) = y(i, observed.back());
        for (std::size_t k = 0; k + 1 < observed.size(); ++k) {
            const auto lo = observed[k];
            const auto hi = observed[k + 1];
            const double t0 = times[static_cast<std::size_t>(lo)];
            const double t1 = times[static_cast<std::size_t>(hi)];
            for (auto t = lo + 1; t < hi; ++t) {
                const double w = (times[static_cast<std::size_t>(t)] - t0) / (t1 - t0);
                y(i, t) = (1.0 - w) * y(i, lo) + w * y(i, hi);
            }
        }
    }
    return PhenotypeMatrix(pheno.ids(), times, std::move(y));
}

}  // namespace fvqtl
