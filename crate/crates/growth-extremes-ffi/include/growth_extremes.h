/* C interface to the growth-extremes toolkit.
 *
 * Conventions:
 *   - Fitness laws and random streams are opaque handles created and
 *     destroyed by gx_*_new / gx_*_free pairs; freeing NULL is a no-op.
 *   - Every fallible call returns a GxStatus and writes its result through
 *     an out-pointer, which is left untouched on error.
 *   - Strings returned by the library are static; do not free them.
 *     Strings passed in must be NUL-terminated UTF-8.
 *   - All calls are panic-safe: internal failures surface as
 *     GX_STATUS_INTERNAL instead of unwinding.
 *
 * This header is maintained by hand; a library test keeps it in lockstep
 * with the exported symbols.
 */

#ifndef GROWTH_EXTREMES_H
#define GROWTH_EXTREMES_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Outcome of a library call. Stable values. */
typedef enum GxStatus {
  GX_STATUS_OK = 0,
  GX_STATUS_NULL_POINTER = 1,
  GX_STATUS_INVALID_UTF8 = 2,
  GX_STATUS_UNKNOWN_MODEL = 3,
  GX_STATUS_INVALID_PARAMETER = 4,
  /* The operation needs the other tail class. */
  GX_STATUS_WRONG_CLASS = 5,
  /* The balance equation has no root in the admissible range. */
  GX_STATUS_NO_ROOT = 6,
  /* An iterative solve stopped above its residual tolerance. */
  GX_STATUS_NOT_CONVERGED = 7,
  GX_STATUS_SIMULATION_FAILED = 8,
  /* A defect inside the library; please report it. */
  GX_STATUS_INTERNAL = 9
} GxStatus;

/* Opaque fitness law. */
typedef struct GxModel GxModel;

/* Opaque deterministic random stream. */
typedef struct GxRng GxRng;

/* Library version as a static NUL-terminated string. */
const char *gx_version(void);

/* Static message for a status code; never NULL. */
const char *gx_status_message(int32_t status);

/* Creates a fitness law from a catalog id ("gnedenko", "power_rho",
 * "weibull_alpha", ...) and its parameters in declaration order. */
GxStatus gx_model_new(const char *id, const double *params, size_t n_params,
                      GxModel **out);

/* Destroys a fitness law; NULL is a no-op. */
void gx_model_free(GxModel *model);

/* P(fitness > x). */
GxStatus gx_model_tail_prob(const GxModel *model, double x, double *out);

/* Curvature constant of a fast-decaying (Gumbel-class) law. */
GxStatus gx_model_kappa(const GxModel *model, double *out);

/* Draws one fitness value, advancing the stream. */
GxStatus gx_model_sample_fitness(const GxModel *model, GxRng *rng,
                                 double *out);

/* Creates the deterministic stream for (seed, stream); the same pair always
 * reproduces the same draws. */
GxRng *gx_rng_new(uint64_t seed, uint64_t stream);

/* Destroys a stream; NULL is a no-op. */
void gx_rng_free(GxRng *rng);

/* Centering time of the largest family for a Gumbel-class law at rate
 * lambda and horizon t. */
GxStatus gx_solve_sigma(const GxModel *model, double lambda, double t,
                        double *out);

/* Growth rate of the fitness-degree attachment tree. */
GxStatus gx_malthusian_bb(const GxModel *model, double *out);

/* Growth rate of branching dynamics with an offspring table given as three
 * parallel arrays: per row, same[i] same-family members and new_[i] new
 * families arrive together with probability prob[i]. */
GxStatus gx_malthusian_rbp(const GxModel *model, const uint32_t *same,
                           const uint32_t *new_, const double *prob,
                           size_t n_rows, double *out);

/* Growth rate of selection-mutation dynamics: mean children per event,
 * each a mutant with probability beta. */
GxStatus gx_malthusian_selection_mutation(const GxModel *model, double beta,
                                          double mean, double *out);

/* Partition-balance exponent of the fitness-biased seating process. */
GxStatus gx_malthusian_crp(const GxModel *model, double *out);

/* Frechet CDF with the given shape and scale. */
GxStatus gx_frechet_cdf(double shape, double scale, double x, double *out);

/* Gaussian CDF with the given mean and variance. */
GxStatus gx_gaussian_cdf(double mean, double variance, double x, double *out);

/* Gamma CDF with the given shape and rate. */
GxStatus gx_gamma_cdf(double shape, double rate, double x, double *out);

/* Seats n_customers in the fitness-biased seating process and reports the
 * ratio of the two largest occupancies (infinity when fewer than two tables
 * opened). Deterministic in (seed, replicate). */
GxStatus gx_crp_top_ratio(const GxModel *model, double theta,
                          uint64_t n_customers, uint64_t seed,
                          uint64_t replicate, double *out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* GROWTH_EXTREMES_H */
