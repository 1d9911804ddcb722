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

#include "runners.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "dataset.hpp"
#include "evalharness.hpp"
#include "gp.hpp"
#include "matching.hpp"
#include "mlp.hpp"
#include "rng.hpp"
#include "special_fns.hpp"

namespace glik {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

uint64_t fnv1a_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw data_error("cannot hash output file " + p.string());
  uint64_t h = 0xcbf29ce484222325ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Collects output paths and failure notes, then writes manifest.json.
class Manifest {
 public:
  Manifest(std::string command, json config, const fs::path& out_dir)
      : command_(std::move(command)), config_(std::move(config)), out_dir_(out_dir) {}

  std::ofstream open(const std::string& name) {
    const fs::path p = out_dir_ / name;
    std::ofstream f(p);
    if (!f) throw data_error("cannot open output file " + p.string());
    files_.push_back(name);
    return f;
  }

  void fail(const std::string& what) { failures_.push_back(what); }

  void write() const {
    json outputs = json::object();
    for (const auto& name : files_) {
      outputs[name] = hex64(fnv1a_file(out_dir_ / name));
    }
    json m;
    m["command"] = command_;
    m["config"] = config_;
    m["seed"] = config_.contains("seed") ? config_["seed"] : json(nullptr);
    m["outputs"] = outputs;
    m["failures"] = failures_;
    std::ofstream f(out_dir_ / "manifest.json");
    if (!f) throw data_error("cannot open manifest.json in " + out_dir_.string());
    f << m.dump(2) << '\n';
  }

 private:
  std::string command_;
  json config_;
  fs::path out_dir_;
  std::vector<std::string> files_;
  std::vector<std::string> failures_;
};

template <typename T>
T get_or(const json& cfg, const std::string& key, T def) {
  if (!cfg.contains(key)) return def;
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw usage_error("config field '" + key + "' has the wrong type");
  }
}

uint64_t require_seed(const json& cfg) {
  if (!cfg.contains("seed")) throw usage_error("config field 'seed' is required");
  try {
    return cfg.at("seed").get<uint64_t>();
  } catch (const json::exception&) {
    throw usage_error("config field 'seed' must be a 64-bit unsigned integer");
  }
}

std::vector<std::string> string_list(const json& cfg, const std::string& key,
                                     std::vector<std::string> def) {
  if (!cfg.contains(key)) return def;
  try {
    return cfg.at(key).get<std::vector<std::string>>();
  } catch (const json::exception&) {
    throw usage_error("config field '" + key + "' must be a list of strings");
  }
}

TransformedDensity density_from_config(const json& cfg) {
  const std::string family = get_or<std::string>(cfg, "family", "gamma-log");
  const double a = get_or<double>(cfg, "a", 1.0);
  const double b = get_or<double>(cfg, "b", 1.0);
  try {
    if (family == "gamma-log") return TransformedDensity::gamma_log(a, b);
    if (family == "beta-logit") return TransformedDensity::beta_logit(a, b);
    if (family == "exp-log") return TransformedDensity::exp_log(a);
    if (family == "inv-gamma-log") return TransformedDensity::inv_gamma_log(a, b);
    if (family == "chi-sq-log") return TransformedDensity::chi_sq_log(a);
  } catch (const std::invalid_argument& e) {
    throw usage_error(e.what());
  }
  throw usage_error("unknown family '" + family + "'");
}

double gauss_log_pdf(double psi, const GaussianApprox& g) {
  const double r = psi - g.mean;
  return -0.5 * (r * r / g.variance + std::log(2.0 * std::numbers::pi * g.variance));
}

Dataset load_dataset(const std::string& path) {
  try {
    return load_csv(path);
  } catch (const std::exception& e) {
    throw data_error(e.what());
  }
}

// ---- subcommands ----

void cmd_match(const json& cfg, Manifest& man) {
  const TransformedDensity d = density_from_config(cfg);
  std::vector<std::string> default_methods = {"laplace", "variational", "moment"};
  if (d.family == Family::GammaLog) default_methods.push_back("moment-ori");
  const auto methods = string_list(cfg, "methods", default_methods);
  const json grid = cfg.contains("grid") ? cfg.at("grid") : json::object();
  const double lo = get_or<double>(grid, "lo", -4.0);
  const double hi = get_or<double>(grid, "hi", 4.0);
  const int n = get_or<int>(grid, "n", 201);
  if (!(hi > lo) || n < 2) throw usage_error("config field 'grid' must have hi > lo and n >= 2");

  std::vector<GaussianApprox> fits;
  for (const auto& name : methods) {
    MatchMethod m;
    try {
      m = method_from_name(name);
    } catch (const std::invalid_argument& e) {
      throw usage_error(e.what());
    }
    try {
      fits.push_back(match(d, m));
    } catch (const std::invalid_argument& e) {
      throw usage_error(e.what());
    }
  }

  auto approx = man.open("approximations.csv");
  approx << "method,mean,variance,kl_q_to_p\n";
  for (size_t i = 0; i < methods.size(); ++i) {
    approx << methods[i] << ',' << fmt_double(fits[i].mean) << ',' << fmt_double(fits[i].variance)
           << ',' << fmt_double(kl_q_to_p(fits[i], d)) << '\n';
  }

  auto gridf = man.open("density_grid.csv");
  gridf << "psi,exact_log_pdf";
  for (const auto& name : methods) gridf << ',' << name;
  gridf << '\n';
  for (int i = 0; i < n; ++i) {
    const double psi = lo + (hi - lo) * i / (n - 1);
    gridf << fmt_double(psi) << ',' << fmt_double(d.log_pdf(psi));
    for (const auto& g : fits) gridf << ',' << fmt_double(gauss_log_pdf(psi, g));
    gridf << '\n';
  }
}

LossKind loss_kind_from_name(const std::string& name, double alpha_eps) {
  if (name == "exact") return LossKind::exact_ce();
  if (name == "gauss") return LossKind::gauss_onehot();
  ApproxConfig cfg;
  cfg.alpha_eps = alpha_eps;
  cfg.beta_eps = alpha_eps;
  try {
    cfg.method = method_from_name(name);
  } catch (const std::invalid_argument&) {
    throw usage_error("unknown loss variant '" + name + "'");
  }
  return LossKind::matched(cfg);
}

// train() plus streaming of the per-epoch curve into an output file.
TrainResult train_net_curves(const MLP& init, const Dataset& data, const LossKind& kind,
                             const TrainConfig& tc, uint64_t seed, Manifest& man,
                             const std::string& filename) {
  TrainResult res = train(init, data, kind, tc, seed);
  auto curve = man.open(filename);
  curve << "epoch,loss,accuracy\n";
  for (size_t e = 0; e < res.epoch_loss.size(); ++e) {
    curve << e << ',' << fmt_double(res.epoch_loss[e]) << ','
          << (e < res.epoch_accuracy.size() ? fmt_double(res.epoch_accuracy[e]) : "nan") << '\n';
  }
  if (res.diverged) throw std::runtime_error("training diverged");
  return res;
}

void cmd_toy_classify(const json& cfg, Manifest& man) {
  const uint64_t seed = require_seed(cfg);
  const int ppc = get_or<int>(cfg, "points_per_class", 100);
  const double alpha_eps = get_or<double>(cfg, "alpha_eps", 0.1);
  const auto variants = string_list(
      cfg, "losses", {"exact", "gauss", "moment-ori", "moment", "laplace", "variational"});
  TrainConfig tc;
  tc.epochs = get_or<int>(cfg, "epochs", 300);
  tc.lr = get_or<double>(cfg, "lr", 0.01);
  tc.momentum = get_or<double>(cfg, "momentum", 0.9);
  tc.batch_size = get_or<int>(cfg, "batch_size", 64);
  tc.weight_decay = get_or<double>(cfg, "weight_decay", 0.0);

  const Dataset train = make_four_class_toy(ppc, derive_seed(seed, 1));
  const Dataset test = make_four_class_toy(ppc, derive_seed(seed, 2));
  const MLP init = MLP::make({2, 64, 64, 4}, derive_seed(seed, 3));

  auto metrics = man.open("toy_metrics.csv");
  metrics << "variant,train_accuracy,test_accuracy,test_nll,test_ece\n";
  for (size_t vi = 0; vi < variants.size(); ++vi) {
    const std::string& name = variants[vi];
    try {
      const LossKind kind = loss_kind_from_name(name, alpha_eps);
      const TrainResult res = train_net_curves(init, train, kind, tc, derive_seed(seed, 10 + vi),
                                               man, "curves_" + name + ".csv");
      Eigen::MatrixXd probs(test.size(), 4);
      for (int i = 0; i < test.size(); ++i) {
        probs.row(i) = predict_proba_point(res.net, test.features.row(i).transpose()).transpose();
      }
      metrics << name << ',' << fmt_double(res.epoch_accuracy.back()) << ','
              << fmt_double(accuracy(probs, test.labels)) << ','
              << fmt_double(nll(probs, test.labels)) << ',' << fmt_double(ece(probs, test.labels))
              << '\n';
    } catch (const usage_error&) {
      throw;
    } catch (const std::exception& e) {
      man.fail(name + ": " + e.what());
    }
  }
}

void cmd_gpc(const json& cfg, Manifest& man) {
  const uint64_t seed = require_seed(cfg);
  if (!cfg.contains("dataset")) throw usage_error("config field 'dataset' is required");
  Dataset data = load_dataset(get_or<std::string>(cfg, "dataset", ""));
  const int cap = get_or<int>(cfg, "cap", 2000);
  if (data.size() > cap) data = subsample(data, cap, derive_seed(seed, 1), nullptr);

  const auto methods =
      string_list(cfg, "methods", {"laplace", "variational", "moment", "moment-ori"});
  const double alpha_eps = get_or<double>(cfg, "alpha_eps", 0.1);
  const json grid = cfg.contains("grid") ? cfg.at("grid") : json::object();
  const double ll_lo = get_or<double>(grid, "ll_lo", -2.0);
  const double ll_hi = get_or<double>(grid, "ll_hi", 4.0);
  const int ll_n = get_or<int>(grid, "ll_n", 20);
  const double lv_lo = get_or<double>(grid, "lv_lo", -2.0);
  const double lv_hi = get_or<double>(grid, "lv_hi", 6.0);
  const int lv_n = get_or<int>(grid, "lv_n", 20);
  if (ll_n < 1 || lv_n < 1) throw usage_error("config field 'grid' counts must be >= 1");

  std::vector<double> lls(ll_n), lvs(lv_n);
  for (int i = 0; i < ll_n; ++i) lls[i] = ll_n == 1 ? ll_lo : ll_lo + (ll_hi - ll_lo) * i / (ll_n - 1);
  for (int j = 0; j < lv_n; ++j) lvs[j] = lv_n == 1 ? lv_lo : lv_lo + (lv_hi - lv_lo) * j / (lv_n - 1);

  auto land = man.open("landscape.csv");
  land << "log_lengthscale,log_variance,method,log_ml\n";
  auto summary = man.open("summary.csv");
  summary << "method,best_log_lengthscale,best_log_variance,best_log_ml\n";
  for (const auto& name : methods) {
    ApproxConfig acfg;
    acfg.alpha_eps = alpha_eps;
    acfg.beta_eps = alpha_eps;
    try {
      acfg.method = method_from_name(name);
    } catch (const std::invalid_argument& e) {
      throw usage_error(e.what());
    }
    try {
      const LandscapeResult res = landscape(data, lls, lvs, acfg);
      double best = -std::numeric_limits<double>::infinity();
      double best_ll = lls[0], best_lv = lvs[0];
      for (int i = 0; i < ll_n; ++i) {
        for (int j = 0; j < lv_n; ++j) {
          const double v = res.log_ml(i, j);
          land << fmt_double(lls[i]) << ',' << fmt_double(lvs[j]) << ',' << name << ','
               << fmt_double(v) << '\n';
          if (std::isfinite(v) && v > best) {
            best = v;
            best_ll = lls[i];
            best_lv = lvs[j];
          }
        }
      }
      summary << name << ',' << fmt_double(best_ll) << ',' << fmt_double(best_lv) << ','
              << fmt_double(best) << '\n';
    } catch (const std::exception& e) {
      man.fail(name + ": " + e.what());
    }
  }
}

void cmd_stream(const json& cfg, Manifest& man) {
  const uint64_t seed = require_seed(cfg);
  const int train_size = get_or<int>(cfg, "train_size", 5000);
  const int test_size = get_or<int>(cfg, "test_size", 1000);
  Dataset train, test;
  if (cfg.contains("dataset")) {
    Dataset data = load_dataset(get_or<std::string>(cfg, "dataset", ""));
    data = subsample(data, std::min<int>(data.size(), train_size + test_size),
                     derive_seed(seed, 1), nullptr);
    if (data.size() < test_size + 10) throw data_error("dataset too small for the test split");
    std::vector<int> tr, te;
    for (int i = 0; i < data.size(); ++i) {
      (i < data.size() - test_size ? tr : te).push_back(i);
    }
    train = dataset_slice(data, tr);
    test = dataset_slice(data, te);
    train.num_classes = test.num_classes = data.num_classes;
  } else {
    const int dim = get_or<int>(cfg, "synthetic_dim", 20);
    const int classes = get_or<int>(cfg, "synthetic_classes", 10);
    const double sigma = get_or<double>(cfg, "synthetic_sigma", 2.0);
    const Dataset all =
        make_blobs(train_size + test_size, dim, classes, sigma, derive_seed(seed, 1));
    std::vector<int> tr, te;
    for (int i = 0; i < all.size(); ++i) (i < train_size ? tr : te).push_back(i);
    train = dataset_slice(all, tr);
    test = dataset_slice(all, te);
    const double label_noise = get_or<double>(cfg, "label_noise", 0.0);
    if (label_noise > 0.0) {
      Rng noise_rng(derive_seed(seed, 4));
      for (auto& y : train.labels) {
        if (noise_rng.uniform() < label_noise) {
          y = static_cast<int>(noise_rng.below(train.num_classes));
        }
      }
    }
  }

  StreamConfig sc;
  sc.approx.alpha_eps = get_or<double>(cfg, "alpha_eps", 0.1);
  sc.approx.beta_eps = sc.approx.alpha_eps;
  sc.prior_variance = get_or<double>(cfg, "prior_variance", 1.0);
  sc.cadence = get_or<int>(cfg, "cadence", 100);
  sc.predict_samples = get_or<int>(cfg, "predict_samples", 1024);
  const int feature_dim = get_or<int>(cfg, "feature_dim", 512);
  const FeatureMap fmap = FeatureMap::random_relu(train.dim(), feature_dim, derive_seed(seed, 2));

  const auto methods = string_list(
      cfg, "methods",
      {"gauss", "moment-ori", "moment", "laplace", "variational", "adf", "sgd+m"});
  for (const auto& name : methods) {
    const auto m = parse_stream_method(name);
    if (!m) throw usage_error("unknown stream method '" + name + "'");
    try {
      const StreamRunResult res = streaming_run(train, test, *m, fmap, sc, derive_seed(seed, 3));
      auto f = man.open("stream_" + name + ".csv");
      f << "step,seen,test_accuracy,test_loglik\n";
      for (const auto& r : res.records) {
        f << r.step << ',' << r.seen << ',' << fmt_double(r.test_accuracy) << ','
          << fmt_double(r.test_loglik) << '\n';
      }
    } catch (const std::exception& e) {
      man.fail(name + ": " + e.what());
    }
  }
}

void cmd_active(const json& cfg, Manifest& man) {
  const uint64_t seed = require_seed(cfg);
  Dataset pool, test;
  if (cfg.contains("dataset")) {
    Dataset data = load_dataset(get_or<std::string>(cfg, "dataset", ""));
    if (data.num_classes != 2) throw data_error("active learning requires a binary dataset");
    const int test_size = get_or<int>(cfg, "test_size", std::max(50, data.size() / 4));
    data = subsample(data, data.size(), derive_seed(seed, 1), nullptr);
    std::vector<int> po, te;
    for (int i = 0; i < data.size(); ++i) (i < data.size() - test_size ? po : te).push_back(i);
    pool = dataset_slice(data, po);
    test = dataset_slice(data, te);
    pool.num_classes = test.num_classes = 2;
  } else {
    pool = make_binary_toy(get_or<int>(cfg, "pool_per_class", 500), derive_seed(seed, 1));
    test = make_binary_toy(get_or<int>(cfg, "test_per_class", 250), derive_seed(seed, 2));
  }

  ALConfig ac;
  ac.approx.alpha_eps = get_or<double>(cfg, "alpha_eps", 0.1);
  ac.approx.beta_eps = ac.approx.alpha_eps;
  ac.prior_variance = get_or<double>(cfg, "prior_variance", 1.0);
  ac.init_size = get_or<int>(cfg, "init_size", 10);
  ac.steps = get_or<int>(cfg, "steps", 50);
  ac.predict_samples = get_or<int>(cfg, "predict_samples", 1024);

  for (const auto& name : string_list(cfg, "acquisitions", {"entropy", "random"})) {
    if (name != "entropy" && name != "random") {
      throw usage_error("unknown acquisition '" + name + "'");
    }
    ac.acquisition = name == "entropy" ? Acquisition::Entropy : Acquisition::Random;
    try {
      const auto records = active_learning_run(pool, test, ac, derive_seed(seed, 3));
      auto f = man.open("active_" + name + ".csv");
      f << "step,train_size,test_accuracy,test_loglik,chosen_index\n";
      for (const auto& r : records) {
        f << r.step << ',' << r.train_size << ',' << fmt_double(r.test_accuracy) << ','
          << fmt_double(r.test_loglik) << ',' << r.chosen_index << '\n';
      }
    } catch (const std::exception& e) {
      man.fail(name + ": " + e.what());
    }
  }
}

}  // namespace

bool run_verify() {
  bool all_ok = true;
  auto report = [&](const std::string& name, bool ok) {
    std::cout << "verify " << name << ": " << (ok ? "pass" : "fail") << '\n';
    all_ok = all_ok && ok;
  };

  // Closed-form matchers against their numeric oracles.
  {
    bool ok = true;
    Rng rng(20260823);
    auto draw = [&] { return std::exp(-1.5 + 3.0 * rng.uniform()); };
    for (int t = 0; t < 40 && ok; ++t) {
      const std::vector<TransformedDensity> ds = {
          TransformedDensity::gamma_log(draw(), draw()),
          TransformedDensity::beta_logit(draw(), draw()),
          TransformedDensity::exp_log(draw()),
          TransformedDensity::inv_gamma_log(draw(), draw()),
          TransformedDensity::chi_sq_log(draw()),
      };
      for (const auto& d : ds) {
        const GaussianApprox mm = match(d, MatchMethod::Moment);
        const GaussianApprox nm = numeric_moments(d);
        ok = ok && std::abs(mm.mean - nm.mean) < 1e-6 && std::abs(mm.variance - nm.variance) < 1e-6;
        const GaussianApprox lp = match(d, MatchMethod::Laplace);
        const GaussianApprox nh = numeric_mode_hessian(d);
        ok = ok && std::abs(lp.mean - nh.mean) < 1e-8 && std::abs(lp.variance - nh.variance) < 1e-8;
        if (d.family != Family::BetaLogit) {
          const GaussianApprox vc = match(d, MatchMethod::Variational);
          const GaussianApprox vn = variational_numeric(d, lp);
          ok = ok && std::abs(vc.mean - vn.mean) < 1e-4 && std::abs(vc.variance - vn.variance) < 1e-4;
        }
      }
    }
    report("matching", ok);
  }

  // Sequential vs batch conjugate posterior.
  {
    bool ok = true;
    for (int t = 0; t < 5 && ok; ++t) {
      Rng rng(100 + t);
      const int n = 30, d = 6, kk = 3;
      Eigen::MatrixXd phi(n, d);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) phi(i, j) = rng.normal();
      std::vector<ClassPseudoObs> obs(n);
      ApproxConfig acfg;
      for (int i = 0; i < n; ++i) {
        obs[i] = softmax_pseudo_obs(static_cast<int>(rng.below(kk)), kk, acfg);
      }
      PosteriorState seq = init_posterior(d, kk, 1.0);
      for (int i = 0; i < n; ++i) seq = update_one(seq, phi.row(i).transpose(), obs[i]);
      const PosteriorState batch = fit_batch(init_posterior(d, kk, 1.0), phi, obs);
      for (int k = 0; k < kk; ++k) {
        ok = ok && (seq.mean[k] - batch.mean[k]).cwiseAbs().maxCoeff() < 1e-8 &&
             (seq.cov[k] - batch.cov[k]).cwiseAbs().maxCoeff() < 1e-8;
      }
    }
    report("bayes_linear", ok);
  }

  // GP marginal-likelihood gradient against central finite differences.
  {
    bool ok = true;
    const Dataset data = make_blobs(40, 3, 3, 1.0, 7);
    ApproxConfig acfg;
    HeteroGP gp = make_hetero_gp(data, EQKernel{1.3, 0.8}, acfg);
    const Eigen::Vector2d g = log_marginal_likelihood_grad(gp);
    const double h = 1e-6;
    auto eval = [&](double lv, double ll) {
      HeteroGP g2 = gp;
      g2.kernel.variance = std::exp(lv);
      g2.kernel.lengthscale = std::exp(ll);
      return log_marginal_likelihood(g2);
    };
    const double lv0 = std::log(gp.kernel.variance), ll0 = std::log(gp.kernel.lengthscale);
    const double fd_v = (eval(lv0 + h, ll0) - eval(lv0 - h, ll0)) / (2 * h);
    const double fd_l = (eval(lv0, ll0 + h) - eval(lv0, ll0 - h)) / (2 * h);
    ok = std::abs(g(0) - fd_v) < 1e-5 * std::max(1.0, std::abs(fd_v)) &&
         std::abs(g(1) - fd_l) < 1e-5 * std::max(1.0, std::abs(fd_l));
    report("gp", ok);
  }

  return all_ok;
}

void run_command(const std::string& command, const json& config) {
  if (!config.is_object()) throw usage_error("config must be a JSON object");
  if (command == "verify") {
    if (!run_verify()) throw std::runtime_error("verification failed");
    return;
  }
  const std::string out_dir = get_or<std::string>(config, "out", "glik-out");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw data_error("cannot create output directory " + out_dir);
  Manifest man(command, config, out_dir);
  if (command == "match") {
    cmd_match(config, man);
  } else if (command == "toy-classify") {
    cmd_toy_classify(config, man);
  } else if (command == "gpc") {
    cmd_gpc(config, man);
  } else if (command == "stream") {
    cmd_stream(config, man);
  } else if (command == "active") {
    cmd_active(config, man);
  } else {
    throw usage_error("unknown command '" + command + "'");
  }
  man.write();
}

}  // namespace glik
