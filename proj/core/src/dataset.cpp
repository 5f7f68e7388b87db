#include "hpo/dataset.hpp"

#include "hpo/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace hpo {
namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& text, const std::string& where) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) throw DataError(where + ": '" + text + "' is not a number");
  return value;
}

int parse_label(const std::string& text, const std::string& where) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value < 0)
    throw DataError(where + ": label '" + text + "' is not a non-negative integer");
  return value;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return ec == std::errc() ? std::string(buffer, ptr) : std::string("nan");
}

void GroupedDataset::validate() const {
  const auto n = labels.size();
  if (static_cast<std::size_t>(features.rows()) != n || groups.size() != n || sample_ids.size() != n)
    throw DataError("dataset columns differ in length");
  if (num_classes < 2) throw DataError("dataset needs at least two classes");
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
  for (int label : labels) {
    if (label < 0 || label >= num_classes) throw DataError("label " + std::to_string(label) + " out of range");
    ++counts[static_cast<std::size_t>(label)];
  }
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (counts[c] == 0) throw DataError("class " + std::to_string(c) + " has no samples");
  if (!features.allFinite()) throw DataError("dataset features must be finite");
}

GroupedDataset GroupedDataset::subset(std::span<const std::size_t> rows) const {
  GroupedDataset out;
  out.num_classes = num_classes;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  out.labels.reserve(rows.size());
  out.groups.reserve(rows.size());
  out.sample_ids.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(rows[i]));
    out.labels.push_back(labels[rows[i]]);
    out.groups.push_back(groups[rows[i]]);
    out.sample_ids.push_back(sample_ids[rows[i]]);
  }
  return out;
}

std::vector<std::string> GroupedDataset::distinct_groups() const {
  std::set<std::string> distinct(groups.begin(), groups.end());
  return {distinct.begin(), distinct.end()};
}

GroupedDataset read_dataset(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  const auto header = split_row(line);
  if (header.size() < 4 || header[0] != "sample_id" || header[1] != "group_id" || header[2] != "label")
    throw DataError(path.string() + ":1: header must start with sample_id,group_id,label and name feature columns");
  const std::size_t d = header.size() - 3;

  GroupedDataset ds;
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto cells = split_row(line);
    if (cells.size() != header.size())
      throw DataError(where + ": expected " + std::to_string(header.size()) + " columns, found " +
                      std::to_string(cells.size()));
    ds.sample_ids.push_back(cells[0]);
    ds.groups.push_back(cells[1]);
    ds.labels.push_back(parse_label(cells[2], where));
    for (std::size_t j = 0; j < d; ++j) values.push_back(parse_number(cells[3 + j], where));
  }
  if (ds.labels.empty()) throw DataError(path.string() + ": no samples");
  ds.features = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Eigen::Index>(ds.labels.size()), static_cast<Eigen::Index>(d));
  ds.num_classes = *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
  ds.validate();
  return ds;
}

void write_dataset(const std::filesystem::path& path, const GroupedDataset& dataset) {
  dataset.validate();
  auto out = open_output(path);
  out << "sample_id,group_id,label";
  for (Eigen::Index j = 0; j < dataset.features.cols(); ++j) out << ",f" << j;
  out << '\n';
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out << dataset.sample_ids[i] << ',' << dataset.groups[i] << ',' << dataset.labels[i];
    for (Eigen::Index j = 0; j < dataset.features.cols(); ++j)
      out << ',' << format_double(dataset.features(static_cast<Eigen::Index>(i), j));
    out << '\n';
  }
}

void PredictionSet::validate() const {
  const auto n = labels.size();
  if (static_cast<std::size_t>(probabilities.rows()) != n || sample_ids.size() != n)
    throw DataError("prediction set columns differ in length");
  for (Eigen::Index i = 0; i < probabilities.rows(); ++i) {
    if (!(probabilities.row(i).array() >= 0.0).all() || !(probabilities.row(i).array() <= 1.0).all())
      throw DataError("probabilities must lie in [0, 1]");
    if (std::abs(probabilities.row(i).sum() - 1.0) > 1e-9) throw DataError("probability rows must sum to 1");
  }
  for (int label : labels)
    if (label < 0 || label >= probabilities.cols()) throw DataError("prediction label out of range");
}

PredictionSet read_predictions(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  const auto header = split_row(line);
  if (header.size() < 4 || header[0] != "sample_id" || header[1] != "label")
    throw DataError(path.string() + ":1: header must be sample_id,label,p0,p1,...");
  const std::size_t c = header.size() - 2;

  PredictionSet preds;
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto cells = split_row(line);
    if (cells.size() != header.size()) throw DataError(where + ": wrong column count");
    preds.sample_ids.push_back(cells[0]);
    preds.labels.push_back(parse_label(cells[1], where));
    for (std::size_t j = 0; j < c; ++j) values.push_back(parse_number(cells[2 + j], where));
  }
  preds.probabilities = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Eigen::Index>(preds.labels.size()), static_cast<Eigen::Index>(c));
  preds.validate();
  return preds;
}

void write_predictions(const std::filesystem::path& path, const PredictionSet& predictions) {
  auto out = open_output(path);
  out << "sample_id,label";
  for (Eigen::Index j = 0; j < predictions.probabilities.cols(); ++j) out << ",p" << j;
  out << '\n';
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    out << predictions.sample_ids[i] << ',' << predictions.labels[i];
    for (Eigen::Index j = 0; j < predictions.probabilities.cols(); ++j)
      out << ',' << format_double(predictions.probabilities(static_cast<Eigen::Index>(i), j));
    out << '\n';
  }
}

}  // namespace hpo
