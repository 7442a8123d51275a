#include "rlo/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <string_view>

#include "rlo/counter_rng.hpp"
#include "rlo/error.hpp"

namespace rlo {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_field(std::string_view tok, long line, std::size_t col) {
  tok = trim(tok);
  double value = 0.0;
  const auto* first = tok.data();
  const auto* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (tok.empty() || ec != std::errc() || ptr != last) {
    throw DatasetError(line, "column " + std::to_string(col + 1) +
                                 ": not a decimal number: '" + std::string(tok) + "'");
  }
  if (!std::isfinite(value)) {
    throw DatasetError(line, "column " + std::to_string(col + 1) + ": non-finite value");
  }
  return value;
}

}  // namespace

int Dataset::num_classes() const {
  if (labels.empty()) return 0;
  return *std::max_element(labels.begin(), labels.end()) + 1;
}

void Dataset::validate() const {
  if (static_cast<Index>(labels.size()) != features.rows()) {
    throw DatasetError(0, "label count does not match feature rows");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) throw DatasetError(static_cast<long>(i) + 1, "negative label");
  }
  if (!features.allFinite()) throw DatasetError(0, "non-finite feature value");
}

Dataset parse_csv_dataset(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::string raw;
  long line = 0;
  std::size_t width = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view text = trim(raw);
    if (text.empty()) continue;

    std::vector<double> values;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = text.find(',', start);
      const auto tok = text.substr(start, comma == std::string_view::npos
                                              ? std::string_view::npos
                                              : comma - start);
      values.push_back(parse_field(tok, line, values.size()));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (values.size() < 2) {
      throw DatasetError(line, "need at least one feature and a label");
    }
    if (width == 0) {
      width = values.size();
    } else if (values.size() != width) {
      throw DatasetError(line, "expected " + std::to_string(width) + " columns, got " +
                                   std::to_string(values.size()));
    }
    const double label = values.back();
    if (label < 0.0 || label != std::floor(label) || label > 1e9) {
      throw DatasetError(line, "label must be a nonnegative integer");
    }
    labels.push_back(static_cast<int>(label));
    values.pop_back();
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw DatasetError(line, "dataset is empty");

  Dataset ds;
  ds.features.resize(static_cast<Index>(rows.size()), static_cast<Index>(width - 1));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c + 1 < width; ++c) {
      ds.features(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    }
  }
  ds.labels = std::move(labels);
  return ds;
}

Dataset load_csv_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError(0, "cannot open " + path.string());
  return parse_csv_dataset(in);
}

Dataset make_two_gaussians(Index rows_per_class, Index dim, double separation,
                           std::uint64_t seed) {
  if (rows_per_class < 1 || dim < 1) {
    throw PreconditionError("make_two_gaussians: need rows_per_class >= 1 and dim >= 1");
  }
  const CounterRng rng(seed);
  Dataset ds;
  ds.features.resize(2 * rows_per_class, dim);
  ds.labels.resize(static_cast<std::size_t>(2 * rows_per_class));
  for (Index r = 0; r < 2 * rows_per_class; ++r) {
    const int label = static_cast<int>(r % 2);
    ds.labels[static_cast<std::size_t>(r)] = label;
    for (Index c = 0; c < dim; ++c) {
      double x = rng.normal(static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(c));
      if (c == 0) x += (label == 1 ? 0.5 : -0.5) * separation;
      ds.features(r, c) = x;
    }
  }
  return ds;
}

}  // namespace rlo
