/* C interface to the ulmc sampling library.
 *
 * All functions return a ulmc_status; results come back through out
 * parameters. Handles are opaque and must be released with the matching
 * _destroy function. On error, ulmc_last_error() returns a thread-local
 * message with details.
 */
#ifndef ULMC_H
#define ULMC_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ulmc_status {
  ULMC_OK = 0,
  ULMC_ERR_INVALID_ARGUMENT = 1,
  ULMC_ERR_DIMENSION_MISMATCH = 2,
  ULMC_ERR_UNKNOWN_KEY = 3,
  ULMC_ERR_RUN_FAILED = 4,
  ULMC_ERR_IO = 5,
  ULMC_ERR_SGLD_LIMIT = 6,
  ULMC_ERR_INTERNAL = 7
} ulmc_status;

const char* ulmc_version(void);
const char* ulmc_status_name(ulmc_status status);
/* Message describing the most recent failure on this thread. */
const char* ulmc_last_error(void);

/* --- hyperparameter conversions ------------------------------------- */

/* h = sqrt(lr/N), gamma = -sqrt(N/lr) log(momentum). momentum == 0 has no
 * finite friction and returns ULMC_ERR_SGLD_LIMIT: select the sgld
 * integrator instead. */
ulmc_status ulmc_sgd_to_sampler(double learning_rate, double momentum, int64_t data_size,
                                double* step_size, double* friction);

/* lr = N h^2, momentum = exp(-gamma h). */
ulmc_status ulmc_sampler_to_sgd(double step_size, double friction, int64_t data_size,
                                double* learning_rate, double* momentum);

/* First-order Euler variant: gamma = (1 - momentum) sqrt(N/lr). */
ulmc_status ulmc_sgd_to_em_sampler(double learning_rate, double momentum, int64_t data_size,
                                   double* step_size, double* friction);

ulmc_status ulmc_em_sampler_to_sgd(double step_size, double friction, int64_t data_size,
                                   double* learning_rate, double* momentum);

/* --- target handles -------------------------------------------------- */

typedef struct ulmc_target ulmc_target;

ulmc_status ulmc_target_create_gaussian(int32_t dim, const double* mean, const double* variance,
                                        ulmc_target** out);
ulmc_status ulmc_target_create_banana(double curvature, double scale, ulmc_target** out);
/* Synthetic logistic-regression posterior; data generated from the seed. */
ulmc_status ulmc_target_create_logistic(int64_t n, int32_t p, double prior_precision,
                                        uint64_t data_seed, double signal, double label_noise,
                                        ulmc_target** out);
void ulmc_target_destroy(ulmc_target* target);

int32_t ulmc_target_dim(const ulmc_target* target);
ulmc_status ulmc_target_potential(const ulmc_target* target, const double* position, double* out);
ulmc_status ulmc_target_gradient(const ulmc_target* target, const double* position, double* out);

/* --- runs ------------------------------------------------------------ */

typedef struct ulmc_runspec ulmc_runspec;
typedef struct ulmc_summary ulmc_summary;

ulmc_status ulmc_runspec_create(ulmc_runspec** out);
void ulmc_runspec_destroy(ulmc_runspec* spec);
/* Flat key=value assignment, same keys as the config file. Unknown keys or
 * unparsable values fail. */
ulmc_status ulmc_runspec_set(ulmc_runspec* spec, const char* key, const char* value);

/* Runs the chains described by the spec. Writes the samples and summary
 * files when the spec has an output prefix. The returned summary pools all
 * chains. */
ulmc_status ulmc_run(const ulmc_runspec* spec, ulmc_summary** out);

void ulmc_summary_destroy(ulmc_summary* summary);
int32_t ulmc_summary_dim(const ulmc_summary* summary);
int64_t ulmc_summary_samples(const ulmc_summary* summary);
double ulmc_summary_acceptance_rate(const ulmc_summary* summary);
double ulmc_summary_mean_potential(const ulmc_summary* summary);
double ulmc_summary_mean_kinetic(const ulmc_summary* summary);
double ulmc_summary_kinetic_temperature(const ulmc_summary* summary);
double ulmc_summary_wall_seconds(const ulmc_summary* summary);
ulmc_status ulmc_summary_mean(const ulmc_summary* summary, double* out);
ulmc_status ulmc_summary_variance(const ulmc_summary* summary, double* out);
ulmc_status ulmc_summary_ess(const ulmc_summary* summary, double* out);

/* Runs every cell of a sweep (in parallel), writing each cell's own output
 * files per its spec plus a combined table at table_path. Cell failures are
 * recorded in the table; the sweep itself still succeeds. axis_names_csv and
 * the per-cell value strings are comma-separated and must have matching
 * arity. */
ulmc_status ulmc_sweep(const ulmc_runspec* const* cells, int32_t n_cells,
                       const char* axis_names_csv, const char* const* cell_axis_values_csv,
                       const char* table_path);

/* --- diagnostics demos ------------------------------------------------ */

/* Runs `steps` Euler-Maruyama steps on a standard Gaussian and counts how
 * often the reversed move lies in the kernel's support (realizable_count)
 * and how often the log acceptance ratio is finite (finite_accept_count).
 * Both are 0 with probability 1 for any step_size > 0. */
ulmc_status ulmc_backward_realizability_demo(int64_t steps, double step_size, double friction,
                                             double temperature, uint64_t seed,
                                             int64_t* realizable_count,
                                             int64_t* finite_accept_count);

#ifdef __cplusplus
}
#endif

#endif /* ULMC_H */
