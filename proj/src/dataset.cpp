// Copyright (c) 2026 the glik authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "rng.hpp"

namespace glik {

namespace {

struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim spaces
    size_t b = field.find_first_not_of(" \t\r");
    size_t e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  return out;
}

bool parse_double(const std::string& s, double* out) {
  try {
    size_t pos = 0;
    *out = std::stod(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

}  // namespace

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_csv: cannot open " + path);
  }
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::string line;
  int line_no = 0;
  size_t ncols = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_fields(line);
    if (fields.size() < 2) {
      throw std::runtime_error("load_csv: line " + std::to_string(line_no) +
                               ": need at least one feature and a label column");
    }
    std::vector<double> vals(fields.size());
    bool numeric = true;
    for (size_t i = 0; i < fields.size(); ++i) {
      if (!parse_double(fields[i], &vals[i])) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (line_no == 1 && rows.empty()) continue;  // optional header
      throw std::runtime_error("load_csv: line " + std::to_string(line_no) +
                               ": non-numeric field");
    }
    if (ncols == 0) {
      ncols = fields.size();
    } else if (fields.size() != ncols) {
      throw std::runtime_error("load_csv: line " + std::to_string(line_no) +
                               ": expected " + std::to_string(ncols) + " columns, got " +
                               std::to_string(fields.size()));
    }
    const double lab = vals.back();
    const int ilab = static_cast<int>(std::lround(lab));
    if (std::abs(lab - ilab) > 1e-9 || ilab < 0) {
      throw std::runtime_error("load_csv: line " + std::to_string(line_no) +
                               ": label must be a nonnegative integer");
    }
    vals.pop_back();
    rows.push_back(std::move(vals));
    labels.push_back(ilab);
  }
  if (rows.empty()) {
    throw std::runtime_error("load_csv: no data rows in " + path);
  }
  const int max_label = *std::max_element(labels.begin(), labels.end());
  std::set<int> seen(labels.begin(), labels.end());
  for (int k = 0; k <= max_label; ++k) {
    if (!seen.count(k)) {
      throw std::runtime_error("load_csv: labels must form a contiguous range from 0; missing " +
                               std::to_string(k));
    }
  }
  Dataset d;
  d.num_classes = max_label + 1;
  d.labels = std::move(labels);
  d.features.resize(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows[i].size(); ++j) d.features(i, j) = rows[i][j];
  }
  return d;
}

void save_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("save_csv: cannot open " + path);
  }
  out.precision(17);
  for (int i = 0; i < d.size(); ++i) {
    for (int j = 0; j < d.dim(); ++j) out << d.features(i, j) << ',';
    out << d.labels[i] << '\n';
  }
}

Dataset dataset_slice(const Dataset& d, const std::vector<int>& rows) {
  Dataset out;
  out.num_classes = d.num_classes;
  out.features.resize(static_cast<int>(rows.size()), d.dim());
  out.labels.resize(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<int>(i)) = d.features.row(rows[i]);
    out.labels[i] = d.labels[rows[i]];
  }
  return out;
}

Dataset subsample(const Dataset& d, int cap, uint64_t seed, std::vector<int>* indices) {
  std::vector<int> order(d.size());
  for (int i = 0; i < d.size(); ++i) order[i] = i;
  Rng rng(seed);
  for (int i = d.size() - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.below(i + 1));
    std::swap(order[i], order[j]);
  }
  if (d.size() > cap) order.resize(cap);
  if (indices) *indices = order;
  return dataset_slice(d, order);
}

Dataset make_four_class_toy(int points_per_class, uint64_t seed) {
  Rng rng(seed);
  const double centers[4][2] = {{2, 2}, {-2, 2}, {-2, -2}, {2, -2}};
  Dataset d;
  d.num_classes = 4;
  d.features.resize(4 * points_per_class, 2);
  d.labels.resize(4 * points_per_class);
  int row = 0;
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < points_per_class; ++i, ++row) {
      d.features(row, 0) = centers[c][0] + 0.6 * rng.normal();
      d.features(row, 1) = centers[c][1] + 0.6 * rng.normal();
      d.labels[row] = c;
    }
  }
  return d;
}

Dataset make_binary_toy(int points_per_class, uint64_t seed, double sigma) {
  Rng rng(seed);
  Dataset d;
  d.num_classes = 2;
  d.features.resize(2 * points_per_class, 2);
  d.labels.resize(2 * points_per_class);
  int row = 0;
  for (int c = 0; c < 2; ++c) {
    const double cx = c == 0 ? -2.0 : 2.0;
    for (int i = 0; i < points_per_class; ++i, ++row) {
      d.features(row, 0) = cx + sigma * rng.normal();
      d.features(row, 1) = cx + sigma * rng.normal();
      d.labels[row] = c;
    }
  }
  return d;
}

Dataset make_blobs(int n, int dim, int num_classes, double sigma, uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd centers(num_classes, dim);
  for (int c = 0; c < num_classes; ++c) {
    for (int j = 0; j < dim; ++j) centers(c, j) = rng.normal();
  }
  Dataset d;
  d.num_classes = num_classes;
  d.features.resize(n, dim);
  d.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    const int c = static_cast<int>(rng.below(num_classes));
    for (int j = 0; j < dim; ++j) {
      d.features(i, j) = centers(c, j) + sigma * rng.normal();
    }
    d.labels[i] = c;
  }
  return d;
}

}  // namespace glik
