#include "adass/dataset.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "adass/config.hpp"
#include "adass/csv.hpp"

namespace adass {

IndexList iota_indices(std::size_t n) {
  IndexList out(n);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

Dataset::Dataset(RowMatrix features, Vec targets, std::size_t num_classes)
    : features_(std::move(features)), targets_(std::move(targets)), num_classes_(num_classes) {
  if (features_.rows() < 1 || features_.cols() < 1) {
    throw std::invalid_argument("dataset needs n >= 1 and d >= 1");
  }
  if (targets_.size() != features_.rows()) {
    throw std::invalid_argument("dataset: " + std::to_string(targets_.size()) + " targets for " +
                                std::to_string(features_.rows()) + " rows");
  }
  if (!features_.allFinite() || !targets_.allFinite()) {
    throw std::invalid_argument("dataset contains non-finite entries");
  }
  if (num_classes_ > 0) {
    for (Eigen::Index i = 0; i < targets_.size(); ++i) {
      const double t = targets_[i];
      if (t < 0.0 || t != std::floor(t) || t >= static_cast<double>(num_classes_)) {
        throw std::invalid_argument("dataset: target " + format_double(t) + " at row " + std::to_string(i) +
                                    " is not a class in [0, " + std::to_string(num_classes_) + ")");
      }
    }
  }
}

std::size_t Dataset::label(std::size_t i) const { return static_cast<std::size_t>(target(i)); }

Dataset Dataset::subset(const IndexList& indices) const {
  RowMatrix x(static_cast<Eigen::Index>(indices.size()), features_.cols());
  Vec y(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= size()) throw std::out_of_range("dataset subset index out of range");
    x.row(static_cast<Eigen::Index>(k)) = row(indices[k]);
    y[static_cast<Eigen::Index>(k)] = target(indices[k]);
  }
  return Dataset(std::move(x), std::move(y), num_classes_);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

Dataset load_csv_dataset(const std::filesystem::path& path, std::size_t num_classes) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::size_t columns = split_fields(line).size();
  if (columns < 2) throw std::runtime_error(path.string() + ": need at least one feature and a target column");

  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != columns) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(columns) + " fields, got " + std::to_string(fields.size()));
    }
    for (const auto& f : fields) values.push_back(parse_real(f));
    ++rows;
  }
  if (rows == 0) throw std::runtime_error(path.string() + ": no data rows");

  const auto n = static_cast<Eigen::Index>(rows);
  const auto d = static_cast<Eigen::Index>(columns - 1);
  RowMatrix x(n, d);
  Vec y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = values[static_cast<std::size_t>(i) * columns + static_cast<std::size_t>(j)];
    y[i] = values[static_cast<std::size_t>(i) * columns + static_cast<std::size_t>(d)];
  }
  return Dataset(std::move(x), std::move(y), num_classes);
}

void write_csv_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::vector<std::string> header;
  for (std::size_t j = 0; j < data.dim(); ++j) header.push_back("x" + std::to_string(j));
  header.emplace_back("y");
  CsvWriter out(path, header);
  std::vector<std::string> fields(data.dim() + 1);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < data.dim(); ++j) {
      fields[j] = format_double(data.features()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    fields[data.dim()] = format_double(data.target(i));
    out.row(fields);
  }
}

}  // namespace adass
