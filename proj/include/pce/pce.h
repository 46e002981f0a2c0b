// SPDX-License-Identifier: Apache-2.0
//
// pce - parametric channel estimation for multiuser MIMO-OFDM uplink sensing
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
#ifndef PCE_H
#define PCE_H

/* C interface of the pce library. Every object is an opaque handle created by a *_create, *_load,
 * *_generate, *_run or pce_estimate call and released by the matching *_destroy. Functions return a
 * pce_status; on failure pce_last_error() describes the problem for the calling thread. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PCE_API __declspec(dllexport)
#else
#define PCE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pce_status
{
    PCE_OK = 0,
    PCE_ERR_INVALID_ARGUMENT = 1,
    PCE_ERR_DIMENSION = 2,
    PCE_ERR_DEGENERATE = 3,
    PCE_ERR_NOT_ISOTROPIC = 4,
    PCE_ERR_IO = 5,
    PCE_ERR_FORMAT = 6,
    PCE_ERR_INTERNAL = 7
} pce_status;

typedef struct pce_config pce_config;
typedef struct pce_scenario pce_scenario;
typedef struct pce_result pce_result;
typedef struct pce_sweep pce_sweep;

typedef struct pce_path
{
    double gain_re, gain_im;
    double omega1, omega2; /* rad per subcarrier, rad per symbol */
    double phi, theta;     /* arrival and departure angle, rad */
} pce_path;

typedef struct pce_dims
{
    size_t K, Nc, Ns, Nr, Nt;
} pce_dims;

typedef struct pce_telemetry
{
    size_t user_visits, paths_added, path_updates, safeguard_fallbacks, failed_updates, monotonicity_violations;
    int reached_optimality;
} pce_telemetry;

typedef struct pce_metrics
{
    double f1;
    size_t matches, truth_count, estimate_count;
    int has_mae; /* 0 when nothing matched; the mae fields are then NaN */
    double mae_omega1, mae_omega2, mae_phi, mae_theta, mae_gain;
} pce_metrics;

typedef struct pce_sweep_summary
{
    size_t points, users, trials, failed_trials, monotonicity_violations;
} pce_sweep_summary;

typedef struct pce_point_stats
{
    double power_dbw;
    size_t trials, mae_trials;
    double f1_mean, f1_stderr;
    double mae_mean[5], mae_stderr[5]; /* omega1, omega2, phi, theta (rad), gain (relative) */
} pce_point_stats;

typedef void (*pce_progress_fn)(size_t done, size_t total, void *user_data);

PCE_API const char *pce_version(void);
PCE_API const char *pce_last_error(void);
PCE_API const char *pce_status_string(pce_status status);

/* Configuration: scenario, estimator and sweep settings addressed by their field names. Values are
 * JSON literals ("3", "[3,3]", "true"); user numbers are 1-based. */
PCE_API pce_status pce_config_create(pce_config **out);
PCE_API void pce_config_destroy(pce_config *config);
PCE_API pce_status pce_config_set(pce_config *config, const char *key, const char *value);
PCE_API pce_status pce_config_load(const char *path, pce_config **out);
PCE_API pce_status pce_config_save(const pce_config *config, const char *path);
/* Copies the configuration as JSON into buf (NUL-terminated) if it fits; *needed gets the full size. */
PCE_API pce_status pce_config_json(const pce_config *config, char *buf, size_t len, size_t *needed);

PCE_API pce_status pce_scenario_generate(const pce_config *config, uint64_t seed, pce_scenario **out);
PCE_API pce_status pce_scenario_load(const char *path, pce_scenario **out);
PCE_API pce_status pce_scenario_save(const pce_scenario *scenario, const char *path);
PCE_API void pce_scenario_destroy(pce_scenario *scenario);
PCE_API pce_status pce_scenario_dims(const pce_scenario *scenario, pce_dims *out);
/* Up to capacity ground-truth paths of a 0-based user; *count gets the number available. */
PCE_API pce_status pce_scenario_truth(const pce_scenario *scenario, size_t user, pce_path *paths, size_t capacity,
                                      size_t *count);
/* Received samples as interleaved (re, im) doubles in (n, t, u) order; len counts doubles. */
PCE_API pce_status pce_scenario_received(const pce_scenario *scenario, double *data, size_t len);

PCE_API pce_status pce_estimate(const pce_scenario *scenario, const pce_config *config, pce_result **out);
PCE_API pce_status pce_result_load(const char *path, pce_result **out);
PCE_API pce_status pce_result_save(const pce_result *result, const char *path);
PCE_API void pce_result_destroy(pce_result *result);
PCE_API pce_status pce_result_users(const pce_result *result, size_t *users);
PCE_API pce_status pce_result_model_order(const pce_result *result, size_t user, size_t *L);
/* Paths of a 0-based user by descending |gain|; selected_only limits them to the estimated model order. */
PCE_API pce_status pce_result_paths(const pce_result *result, size_t user, int selected_only, pce_path *paths,
                                    size_t capacity, size_t *count);
PCE_API pce_status pce_result_objective(const pce_result *result, double *objective);
PCE_API pce_status pce_result_telemetry(const pce_result *result, pce_telemetry *out);

/* Matches the selected paths of one user against the scenario's ground truth. */
PCE_API pce_status pce_match(const pce_scenario *scenario, const pce_result *result, size_t user, double threshold,
                             pce_metrics *out);

PCE_API pce_status pce_sweep_run(const pce_config *config, pce_progress_fn progress, void *user_data,
                                 pce_sweep **out);
PCE_API pce_status pce_sweep_load(const char *path, pce_sweep **out);
PCE_API pce_status pce_sweep_save(const pce_sweep *sweep, const char *path);
PCE_API void pce_sweep_destroy(pce_sweep *sweep);
/* CSV, plot-data files, manifest and the stored sweep, written into dir. */
PCE_API pce_status pce_sweep_report(const pce_sweep *sweep, const char *dir);
PCE_API pce_status pce_sweep_csv(const pce_sweep *sweep, char *buf, size_t len, size_t *needed);
PCE_API pce_status pce_sweep_summary_get(const pce_sweep *sweep, pce_sweep_summary *out);
PCE_API pce_status pce_sweep_point(const pce_sweep *sweep, size_t point, size_t user, pce_point_stats *out);

#ifdef __cplusplus
}
#endif

#endif
