#pragma once

// CSV readers and writers for map.csv / geno.csv / pheno.csv, and the
// phenotype gap filler applied before scanning.
//
//   map.csv    marker,chr,pos
//   geno.csv   id,<marker1>,...   cells A, B, H (F2 heterozygote), - (missing)
//   pheno.csv  id,<t1>,<t2>,...   cells numeric or -
//
// Numbers are written with 6 fixed decimals so outputs are reproducible
// byte for byte.

#include "fvqtl/types.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fvqtl {

struct Dataset {
    GeneticMap map;
    GenotypeMatrix geno;
    PhenotypeMatrix pheno;
};

/// Chromosomes keep their order of first appearance in the file. Markers of
/// one chromosome must be listed with non-decreasing positions.
GeneticMap read_map(const std::filesystem::path& path);

/// Columns are reordered to the map's traversal order.
GenotypeMatrix read_genotypes(const std::filesystem::path& path, const GeneticMap& map, CrossType cross);

PhenotypeMatrix read_phenotypes(const std::filesystem::path& path);

/// Reads all three files. Phenotype rows are aligned to the genotype rows by
/// individual id; the two files must name the same set of individuals.
Dataset read_dataset(const std::filesystem::path& geno_path, const std::filesystem::path& map_path,
                     const std::filesystem::path& pheno_path, CrossType cross);

void write_map(const std::filesystem::path& path, const GeneticMap& map);
void write_genotypes(const std::filesystem::path& path, const GenotypeMatrix& geno);
void write_phenotypes(const std::filesystem::path& path, const PhenotypeMatrix& pheno);

/// Writes map.csv, geno.csv and pheno.csv into `dir` (which must exist).
void write_dataset(const std::filesystem::path& dir, const Dataset& data);

/// Linear interpolation of internal gaps against the time labels; leading
/// and trailing gaps take the nearest observed value. Every individual needs
/// at least two observed time points.
PhenotypeMatrix interpolate_missing(const PhenotypeMatrix& pheno);

/// Fixed 6-decimal rendering used by every writer. Negative zero prints as 0.
std::string format_number(double value);

/// Splits one CSV line on commas, trimming surrounding blanks and a trailing CR.
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace fvqtl
