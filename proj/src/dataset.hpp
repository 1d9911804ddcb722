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

#ifndef GLIK_DATASET_HPP
#define GLIK_DATASET_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace glik {

// Features plus integer class labels in [0, K).
struct Dataset {
  Eigen::MatrixXd features;  // N x D
  std::vector<int> labels;   // N
  int num_classes = 0;

  int size() const { return static_cast<int>(labels.size()); }
  int dim() const { return static_cast<int>(features.cols()); }
};

// CSV with optional header; feature columns followed by one integer label
// column (last). Labels must form a contiguous range starting at 0.
// Parse failures report the offending line number.
Dataset load_csv(const std::string& path);
void save_csv(const Dataset& d, const std::string& path);

// Seeded-shuffle subsample to at most `cap` rows (identity when N <= cap).
// Returns the chosen row indices via `indices` when non-null.
Dataset subsample(const Dataset& d, int cap, uint64_t seed,
                  std::vector<int>* indices = nullptr);

Dataset dataset_slice(const Dataset& d, const std::vector<int>& rows);

// Four Gaussian blobs at (+-2, +-2), sigma 0.6.
Dataset make_four_class_toy(int points_per_class, uint64_t seed);

// Two 2-D Gaussian blobs at (-2,-2) and (2,2), linearly separable.
Dataset make_binary_toy(int points_per_class, uint64_t seed, double sigma = 0.8);

// K Gaussian blobs in `dim` dimensions with unit-scaled centers.
Dataset make_blobs(int n, int dim, int num_classes, double sigma, uint64_t seed);

}  // namespace glik

#endif
