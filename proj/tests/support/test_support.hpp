#pragma once

#include "hpo/hyperspace.hpp"
#include "hpo/rng.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace hpo::testing {

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("hpo-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

// A random mixed space with 1-5 dimensions of every kind.
inline HyperSpace random_space(Rng& rng) {
  std::vector<Dimension> dims;
  std::set<std::string> int_round;
  const std::size_t count = 1 + rng.index(5);
  for (std::size_t h = 0; h < count; ++h) {
    const std::string name = "d" + std::to_string(h);
    switch (rng.index(5)) {
      case 0: {
        const double lo = rng.uniform(-10.0, 10.0);
        dims.push_back(Dimension::continuous(name, lo, lo + rng.uniform(0.1, 20.0)));
        break;
      }
      case 1: {
        const double lo = rng.uniform(-12.0, 2.0);
        dims.push_back(Dimension::log_continuous(name, lo, lo + rng.uniform(0.5, 8.0)));
        break;
      }
      case 2: {
        std::vector<double> values;
        double v = rng.uniform(-5.0, 5.0);
        for (std::size_t k = 0, m = 1 + rng.index(7); k < m; ++k) values.push_back(v += rng.uniform(0.1, 3.0));
        dims.push_back(Dimension::discrete(name, values));
        break;
      }
      case 3: {
        std::vector<std::string> labels;
        for (std::size_t k = 0, m = 1 + rng.index(5); k < m; ++k) labels.push_back("L" + std::to_string(k));
        dims.push_back(Dimension::categorical(name, labels));
        break;
      }
      default: {
        const double lo = std::floor(rng.uniform(-20.0, 20.0));
        dims.push_back(Dimension::continuous(name, lo, lo + 1.0 + std::floor(rng.uniform(0.0, 30.0))));
        int_round.insert(name);
        break;
      }
    }
  }
  return HyperSpace(std::move(dims), std::move(int_round));
}

}  // namespace hpo::testing
