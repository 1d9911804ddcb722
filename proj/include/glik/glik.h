/* Copyright (c) 2026 the glik authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the glik library: Gaussian approximation of transformed
 * constrained-support densities, and the seeded experiment runners built on
 * top of them. All functions return a glik_status; details for the most
 * recent failure on the calling thread are available via glik_last_error().
 */

#ifndef GLIK_GLIK_H
#define GLIK_GLIK_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum glik_status {
  GLIK_OK = 0,
  GLIK_ERR_USAGE = 1,   /* invalid arguments or configuration */
  GLIK_ERR_DATA = 2,    /* unreadable or malformed input data */
  GLIK_ERR_NUMERIC = 3  /* numerical failure during computation */
} glik_status;

const char* glik_version(void);

/* Message for the last failure on this thread; empty string if none. */
const char* glik_last_error(void);

/* Opaque handle to a transformed density: a constrained-support base density
 * composed with its log or logit transform.
 *
 * family: "gamma-log" (a=alpha, b=beta), "beta-logit" (a=alpha, b=beta),
 *         "exp-log" (a=lambda, b ignored), "inv-gamma-log" (a=alpha, b=beta),
 *         "chi-sq-log" (a=k, b ignored)
 */
typedef struct glik_density glik_density;

glik_status glik_density_create(const char* family, double a, double b, glik_density** out);
void glik_density_destroy(glik_density* d);

/* method: "laplace", "variational", "moment", or "moment-ori" */
glik_status glik_density_match(const glik_density* d, const char* method, double* mean,
                               double* variance);

glik_status glik_density_log_pdf(const glik_density* d, double psi, double* out);

/* KL(N(mean, variance) || density) in the transformed basis. */
glik_status glik_density_kl(const glik_density* d, double mean, double variance, double* out);

/* Runs one experiment subcommand. command is one of "match", "toy-classify",
 * "gpc", "stream", "active", "verify"; config_json is a JSON object (may be
 * "{}" for defaults) whose "out" key names the output directory. Output files
 * and a manifest.json are written there.
 */
glik_status glik_run(const char* command, const char* config_json);

#ifdef __cplusplus
}
#endif

#endif
