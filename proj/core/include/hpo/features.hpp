#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hpo {

/// A named set of genes whose expression moves together.
struct GeneModule {
  std::string name;
  std::vector<std::string> genes;
};

/// The six host-response modules, in feature order.
const std::vector<GeneModule>& default_gene_modules();

/// The 29 marker genes: the module genes in module order.
std::vector<std::string> default_gene_order();

/// Parses "name: GENE1, GENE2, ..." lines; blank lines and '#' comments are
/// skipped. Throws DataError with the line number on malformed input.
std::vector<GeneModule> parse_gene_modules(std::string_view text);
std::vector<GeneModule> load_gene_modules(const std::filesystem::path& path);

/// Column indices of every module's genes within `gene_order`.
std::vector<std::vector<std::size_t>> module_indices(const std::vector<GeneModule>& modules,
                                                     const std::vector<std::string>& gene_order);

/// [raw expression | geometric mean per module | arithmetic mean per module].
/// With 29 genes and 6 modules the result has 41 columns. Throws DataError on
/// a non-positive expression value.
Eigen::MatrixXd module_features(const Eigen::MatrixXd& expression,
                                const std::vector<std::vector<std::size_t>>& modules);

}  // namespace hpo
