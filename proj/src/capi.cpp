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

#include "glik/glik.h"

#include <cstring>
#include <string>

#include <nlohmann/json.hpp>

#include "matching.hpp"
#include "runners.hpp"

namespace {

thread_local std::string g_last_error;

glik_status fail(glik_status code, const std::string& what) {
  g_last_error = what;
  return code;
}

}  // namespace

extern "C" {

struct glik_density {
  glik::TransformedDensity d;
};

const char* glik_version(void) { return "0.1.0"; }

const char* glik_last_error(void) { return g_last_error.c_str(); }

glik_status glik_density_create(const char* family, double a, double b, glik_density** out) {
  if (!family || !out) return fail(GLIK_ERR_USAGE, "null argument");
  try {
    const std::string f = family;
    glik::TransformedDensity d;
    if (f == "gamma-log") {
      d = glik::TransformedDensity::gamma_log(a, b);
    } else if (f == "beta-logit") {
      d = glik::TransformedDensity::beta_logit(a, b);
    } else if (f == "exp-log") {
      d = glik::TransformedDensity::exp_log(a);
    } else if (f == "inv-gamma-log") {
      d = glik::TransformedDensity::inv_gamma_log(a, b);
    } else if (f == "chi-sq-log") {
      d = glik::TransformedDensity::chi_sq_log(a);
    } else {
      return fail(GLIK_ERR_USAGE, "unknown family '" + f + "'");
    }
    *out = new glik_density{d};
    g_last_error.clear();
    return GLIK_OK;
  } catch (const std::invalid_argument& e) {
    return fail(GLIK_ERR_USAGE, e.what());
  } catch (const std::exception& e) {
    return fail(GLIK_ERR_NUMERIC, e.what());
  }
}

void glik_density_destroy(glik_density* d) { delete d; }

glik_status glik_density_match(const glik_density* d, const char* method, double* mean,
                               double* variance) {
  if (!d || !method || !mean || !variance) return fail(GLIK_ERR_USAGE, "null argument");
  try {
    const glik::GaussianApprox g = glik::match(d->d, glik::method_from_name(method));
    *mean = g.mean;
    *variance = g.variance;
    g_last_error.clear();
    return GLIK_OK;
  } catch (const std::invalid_argument& e) {
    return fail(GLIK_ERR_USAGE, e.what());
  } catch (const std::exception& e) {
    return fail(GLIK_ERR_NUMERIC, e.what());
  }
}

glik_status glik_density_log_pdf(const glik_density* d, double psi, double* out) {
  if (!d || !out) return fail(GLIK_ERR_USAGE, "null argument");
  try {
    *out = d->d.log_pdf(psi);
    g_last_error.clear();
    return GLIK_OK;
  } catch (const std::exception& e) {
    return fail(GLIK_ERR_NUMERIC, e.what());
  }
}

glik_status glik_density_kl(const glik_density* d, double mean, double variance, double* out) {
  if (!d || !out) return fail(GLIK_ERR_USAGE, "null argument");
  if (!(variance > 0.0)) return fail(GLIK_ERR_USAGE, "variance must be positive");
  try {
    *out = glik::kl_q_to_p({mean, variance}, d->d);
    g_last_error.clear();
    return GLIK_OK;
  } catch (const std::exception& e) {
    return fail(GLIK_ERR_NUMERIC, e.what());
  }
}

glik_status glik_run(const char* command, const char* config_json) {
  if (!command) return fail(GLIK_ERR_USAGE, "null command");
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(config_json ? config_json : "{}");
  } catch (const nlohmann::json::exception& e) {
    return fail(GLIK_ERR_USAGE, std::string("config is not valid JSON: ") + e.what());
  }
  try {
    glik::run_command(command, cfg);
    g_last_error.clear();
    return GLIK_OK;
  } catch (const glik::usage_error& e) {
    return fail(GLIK_ERR_USAGE, e.what());
  } catch (const glik::data_error& e) {
    return fail(GLIK_ERR_DATA, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(GLIK_ERR_USAGE, e.what());
  } catch (const std::exception& e) {
    return fail(GLIK_ERR_NUMERIC, e.what());
  }
}

}  // extern "C"
