#include "hpo/features.hpp"

#include "hpo/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hpo {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

const std::vector<GeneModule>& default_gene_modules() {
  static const std::vector<GeneModule> modules{
      {"viral_up", {"IFI27", "JUP", "LAX1"}},
      {"bacterial_up", {"TNIP1", "CTSB", "HK3", "GPAA1"}},
      {"mortality_up", {"HIF1A", "SEPP1", "RGS1", "C11orf74", "CD163", "PER1", "DEFA4", "CIT"}},
      {"mortality_down", {"LY86", "TST", "KCNJ2"}},
      {"sepsis_up", {"CEACAM1", "ZDHHC19", "C9orf95", "GNA15", "BATF", "C3AR1"}},
      {"sepsis_down", {"KIAA1370", "TGFBI", "MTCH1", "RPGRIP1", "HLA-DPB1"}},
  };
  return modules;
}

std::vector<std::string> default_gene_order() {
  std::vector<std::string> genes;
  for (const auto& m : default_gene_modules()) genes.insert(genes.end(), m.genes.begin(), m.genes.end());
  return genes;
}

std::vector<GeneModule> parse_gene_modules(std::string_view text) {
  std::vector<GeneModule> modules;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string content = trim(line.substr(0, line.find('#')));
    if (content.empty()) continue;
    const auto colon = content.find(':');
    if (colon == std::string::npos) throw DataError("gene groups line " + std::to_string(line_no) + ": missing ':'");
    GeneModule module{trim(std::string_view(content).substr(0, colon)), {}};
    if (module.name.empty()) throw DataError("gene groups line " + std::to_string(line_no) + ": empty module name");
    std::istringstream genes(content.substr(colon + 1));
    std::string gene;
    while (std::getline(genes, gene, ',')) {
      gene = trim(gene);
      if (gene.empty()) throw DataError("gene groups line " + std::to_string(line_no) + ": empty gene symbol");
      module.genes.push_back(gene);
    }
    if (module.genes.empty()) throw DataError("gene groups line " + std::to_string(line_no) + ": module has no genes");
    modules.push_back(std::move(module));
  }
  if (modules.empty()) throw DataError("gene groups file defines no modules");
  return modules;
}

std::vector<GeneModule> load_gene_modules(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_gene_modules(buffer.str());
}

std::vector<std::vector<std::size_t>> module_indices(const std::vector<GeneModule>& modules,
                                                     const std::vector<std::string>& gene_order) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& m : modules) {
    std::vector<std::size_t> idx;
    for (const auto& g : m.genes) {
      const auto it = std::find(gene_order.begin(), gene_order.end(), g);
      if (it == gene_order.end()) throw DataError("gene '" + g + "' of module " + m.name + " is not a feature column");
      idx.push_back(static_cast<std::size_t>(it - gene_order.begin()));
    }
    out.push_back(std::move(idx));
  }
  return out;
}

Eigen::MatrixXd module_features(const Eigen::MatrixXd& expression,
                                const std::vector<std::vector<std::size_t>>& modules) {
  const auto n = expression.rows();
  const auto g = expression.cols();
  const auto m = static_cast<Eigen::Index>(modules.size());
  if (!(expression.array() > 0.0).all() || !expression.allFinite())
    throw DataError("module features need strictly positive, finite expression values");
  for (const auto& idx : modules) {
    if (idx.empty()) throw DataError("empty gene module");
    for (auto j : idx)
      if (static_cast<Eigen::Index>(j) >= g) throw DataError("gene module index out of range");
  }

  Eigen::MatrixXd out(n, g + 2 * m);
  out.leftCols(g) = expression;
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto& idx = modules[static_cast<std::size_t>(k)];
    const double count = static_cast<double>(idx.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      double log_sum = 0.0, sum = 0.0;
      for (auto j : idx) {
        const double v = expression(i, static_cast<Eigen::Index>(j));
        log_sum += std::log(v);
        sum += v;
      }
      const double arithmetic = sum / count;
      // Guard the AM-GM ordering against last-bit rounding.
      out(i, g + k) = std::min(std::exp(log_sum / count), arithmetic);
      out(i, g + m + k) = arithmetic;
    }
  }
  return out;
}

}  // namespace hpo
