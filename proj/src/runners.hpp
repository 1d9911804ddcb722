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

#ifndef GLIK_RUNNERS_HPP
#define GLIK_RUNNERS_HPP

#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace glik {

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dispatches one experiment subcommand. Throws usage_error / data_error;
// other exceptions indicate numerical failure.
void run_command(const std::string& command, const nlohmann::json& config);

// Condensed oracle suites over matching, the conjugate linear model, and the
// GP gradients; prints one line per suite, returns true iff all pass.
bool run_verify();

// Shortest round-trip decimal representation.
std::string fmt_double(double v);

}  // namespace glik

#endif
