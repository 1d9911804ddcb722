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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "dataset.hpp"
#include "doctest.h"

using namespace glik;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

void write_file(const std::filesystem::path& p, const std::string& body) {
  std::ofstream f(p);
  f << body;
}

}  // namespace

TEST_CASE("csv round trip") {
  Dataset d;
  d.features = Eigen::MatrixXd(3, 2);
  d.features << 0.5, -1.25, 3.0, 0.0, -2.5, 1.5;
  d.labels = {0, 1, 0};
  d.num_classes = 2;

  const auto p = temp_file("glik_test_roundtrip.csv");
  save_csv(d, p.string());
  const Dataset back = load_csv(p.string());
  REQUIRE(back.size() == 3);
  CHECK(back.dim() == 2);
  CHECK(back.num_classes == 2);
  CHECK((back.features - d.features).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.labels == d.labels);
  std::filesystem::remove(p);
}

TEST_CASE("csv header is optional") {
  const auto p = temp_file("glik_test_header.csv");
  write_file(p, "x,y,label\n1.0,2.0,0\n3.0,4.0,1\n");
  const Dataset with_header = load_csv(p.string());
  CHECK(with_header.size() == 2);
  CHECK(with_header.features(1, 1) == 4.0);

  write_file(p, "1.0,2.0,0\n3.0,4.0,1\n");
  const Dataset no_header = load_csv(p.string());
  CHECK(no_header.size() == 2);
  CHECK(no_header.features(0, 0) == 1.0);
  std::filesystem::remove(p);
}

TEST_CASE("csv parse errors name the offending line") {
  const auto p = temp_file("glik_test_bad.csv");
  write_file(p, "1.0,2.0,0\n3.0,oops,1\n");
  try {
    load_csv(p.string());
    FAIL("expected a parse error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }

  // Labels must form a contiguous range starting at zero.
  write_file(p, "1.0,2.0,0\n3.0,4.0,2\n");
  CHECK_THROWS(load_csv(p.string()));
  CHECK_THROWS(load_csv(temp_file("glik_test_missing_xyz.csv").string()));
  std::filesystem::remove(p);
}

TEST_CASE("subsample and slice") {
  const Dataset d = make_blobs(100, 3, 4, 1.0, 99);
  CHECK(subsample(d, 200, 1).size() == 100);

  std::vector<int> idx;
  const Dataset s = subsample(d, 25, 1, &idx);
  CHECK(s.size() == 25);
  CHECK(idx.size() == 25);
  std::set<int> uniq(idx.begin(), idx.end());
  CHECK(uniq.size() == 25);
  for (int i = 0; i < 25; ++i) {
    CHECK((s.features.row(i) - d.features.row(idx[i])).cwiseAbs().maxCoeff() == 0.0);
    CHECK(s.labels[i] == d.labels[idx[i]]);
  }

  const Dataset sl = dataset_slice(d, {3, 7});
  CHECK(sl.size() == 2);
  CHECK(sl.labels[1] == d.labels[7]);
}

TEST_CASE("toy generators") {
  const Dataset four = make_four_class_toy(100, 1);
  CHECK(four.size() == 400);
  CHECK(four.dim() == 2);
  CHECK(four.num_classes == 4);

  const Dataset bin = make_binary_toy(50, 2);
  CHECK(bin.size() == 100);
  CHECK(bin.num_classes == 2);

  const Dataset blobs = make_blobs(60, 5, 3, 1.5, 3);
  CHECK(blobs.size() == 60);
  CHECK(blobs.dim() == 5);
  CHECK(blobs.num_classes == 3);
  for (int y : blobs.labels) {
    CHECK(y >= 0);
    CHECK(y < 3);
  }

  // Seeded generators are reproducible.
  const Dataset again = make_blobs(60, 5, 3, 1.5, 3);
  CHECK((blobs.features - again.features).cwiseAbs().maxCoeff() == 0.0);
  CHECK(blobs.labels == again.labels);
}
