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

// Command-line front end. Everything substantive lives behind the C API in
// libglik; this binary only assembles a JSON config and dispatches.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "glik/glik.h"

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::string methods;
  uint64_t seed = 0;
  bool seed_set = false;
  double alpha_eps = 0.0;
  bool alpha_set = false;
};

void add_common(CLI::App* sub, CommonOpts* opts) {
  sub->add_option("--config", opts->config_path, "JSON config file; flags override its fields");
  sub->add_option("--out", opts->out_dir, "output directory");
  sub->add_option("--methods", opts->methods, "comma-separated method list");
  sub->add_option("--seed", opts->seed, "root seed for all randomness");
  sub->add_option("--alpha-eps", opts->alpha_eps, "concentration parameter");
}

int run(const std::string& command, const CommonOpts& opts, const json& extra) {
  json cfg = json::object();
  if (!opts.config_path.empty()) {
    std::ifstream in(opts.config_path);
    if (!in) {
      std::cerr << "error: cannot open config file " << opts.config_path << '\n';
      return GLIK_ERR_USAGE;
    }
    try {
      in >> cfg;
    } catch (const json::exception& e) {
      std::cerr << "error: config file is not valid JSON: " << e.what() << '\n';
      return GLIK_ERR_USAGE;
    }
    if (!cfg.is_object()) {
      std::cerr << "error: config file must contain a JSON object\n";
      return GLIK_ERR_USAGE;
    }
  }
  for (const auto& [k, v] : extra.items()) cfg[k] = v;
  if (!opts.out_dir.empty()) cfg["out"] = opts.out_dir;
  if (!opts.methods.empty()) cfg["methods"] = split_csv_list(opts.methods);
  if (opts.seed_set) cfg["seed"] = opts.seed;
  if (opts.alpha_set) cfg["alpha_eps"] = opts.alpha_eps;

  const glik_status st = glik_run(command.c_str(), cfg.dump().c_str());
  if (st != GLIK_OK) {
    std::cerr << "error: " << glik_last_error() << '\n';
  }
  return st;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian likelihood approximation experiments"};
  app.require_subcommand(1);

  CommonOpts opts;
  json extra = json::object();

  auto* match = app.add_subcommand("match", "approximate one transformed density");
  add_common(match, &opts);
  std::string family;
  double pa = 0.0, pb = 0.0;
  match->add_option("--family", family,
                    "gamma-log|beta-logit|exp-log|inv-gamma-log|chi-sq-log");
  match->add_option("--a", pa, "first parameter");
  match->add_option("--b", pb, "second parameter");

  auto* toy = app.add_subcommand("toy-classify", "four-class toy with all loss variants");
  add_common(toy, &opts);
  int epochs = 0;
  std::string losses;
  toy->add_option("--epochs", epochs, "training epochs");
  toy->add_option("--losses", losses, "comma-separated loss variants");

  std::string dataset;
  auto* gpc = app.add_subcommand("gpc", "GP classification evidence landscape");
  add_common(gpc, &opts);
  gpc->add_option("--dataset", dataset, "CSV dataset path");

  auto* stream = app.add_subcommand("stream", "streaming replay of online updates");
  add_common(stream, &opts);
  int cadence = 0, train_size = 0, test_size = 0, feature_dim = 0;
  stream->add_option("--dataset", dataset, "CSV dataset path (synthetic if omitted)");
  stream->add_option("--cadence", cadence, "evaluation cadence");
  stream->add_option("--train-size", train_size, "stream length");
  stream->add_option("--test-size", test_size, "held-out size");
  stream->add_option("--feature-dim", feature_dim, "random feature dimension");

  auto* active = app.add_subcommand("active", "pool-based active learning (binary)");
  add_common(active, &opts);
  int steps = 0, init_size = 0;
  std::string acqs;
  active->add_option("--dataset", dataset, "binary CSV dataset path (synthetic if omitted)");
  active->add_option("--steps", steps, "acquisition steps");
  active->add_option("--init-size", init_size, "initial labelled size");
  active->add_option("--acquisitions", acqs, "entropy,random");

  auto* verify = app.add_subcommand("verify", "run the built-in oracle suites");
  add_common(verify, &opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : GLIK_ERR_USAGE;
  }

  CLI::App* parsed = nullptr;
  for (auto* sub : {match, toy, gpc, stream, active, verify}) {
    if (sub->parsed()) parsed = sub;
  }
  if (!parsed) return GLIK_ERR_USAGE;

  auto set_if = [&](CLI::App* sub, const std::string& flag, const json& value) {
    if (sub == parsed && sub->count(flag) > 0) extra[flag.substr(2)] = value;
  };
  set_if(match, "--family", family);
  set_if(match, "--a", pa);
  set_if(match, "--b", pb);
  set_if(toy, "--epochs", epochs);
  if (parsed == toy && toy->count("--losses") > 0) extra["losses"] = split_csv_list(losses);
  set_if(gpc, "--dataset", dataset);
  set_if(stream, "--dataset", dataset);
  set_if(active, "--dataset", dataset);
  set_if(stream, "--cadence", cadence);
  if (parsed == stream && stream->count("--train-size") > 0) extra["train_size"] = train_size;
  if (parsed == stream && stream->count("--test-size") > 0) extra["test_size"] = test_size;
  if (parsed == stream && stream->count("--feature-dim") > 0) extra["feature_dim"] = feature_dim;
  set_if(active, "--steps", steps);
  if (parsed == active && active->count("--init-size") > 0) extra["init_size"] = init_size;
  if (parsed == active && active->count("--acquisitions") > 0) {
    extra["acquisitions"] = split_csv_list(acqs);
  }
  opts.seed_set = parsed->count("--seed") > 0;
  opts.alpha_set = parsed->count("--alpha-eps") > 0;
  return run(parsed->get_name(), opts, extra);
}
