/* C interface to the skewsing library.
 *
 * Every function returns an sks_status. On failure the message of the most
 * recent error on the calling thread is available from sks_last_error().
 * Strings returned through char** out-parameters are owned by the caller and
 * must be released with sks_string_free(). Reports are JSON documents with
 * sorted keys.
 */
#ifndef SKEWSING_H
#define SKEWSING_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SKS_API __declspec(dllexport)
#else
#define SKS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sks_status {
  SKS_OK = 0,
  SKS_NON_FINITE = 1,
  SKS_TOLERANCE_NOT_MET = 2,
  SKS_MAX_ITERATIONS = 3,
  SKS_PARSE_ERROR = 4,
  SKS_DOMAIN_ERROR = 5,
  SKS_INVALID_ARGUMENT = 6,
  SKS_DEGENERATE_SKEWING = 7,
  SKS_NOT_GAUSSIAN_KERNEL = 8,
  SKS_ORDER_MISMATCH = 9,
  SKS_INCONSISTENT_DIAGNOSTICS = 10,
  SKS_DEGENERATE_DENOMINATOR = 11,
  SKS_NOT_SKEW_NORMAL = 12,
  SKS_SKEWNESS_OUT_OF_RANGE = 13,
  SKS_VALIDATION_FAILED = 14,
  SKS_IO_ERROR = 15,
  SKS_INTERNAL = 99
} sks_status;

typedef struct sks_family sks_family;

/* Status names ("ParseError", ...) and the thread's last error message. */
SKS_API const char* sks_status_name(sks_status status);
SKS_API const char* sks_last_error(void);
/* 1 when the status stems from bad input (parse, schema, order, domain),
 * 0 when it is a numeric failure. */
SKS_API int sks_status_is_input_error(sks_status status);

SKS_API void sks_string_free(char* s);

/* Families. params_json may be NULL or an object with "nu", "alpha",
 * "coefficients". */
SKS_API sks_status sks_family_from_json(const char* json, sks_family** out);
SKS_API sks_status sks_family_builtin(const char* name, const char* params_json, sks_family** out);
SKS_API void sks_family_free(sks_family* fam);
SKS_API sks_status sks_family_name(const sks_family* fam, char** out);
/* JSON array of builtin family names. */
SKS_API sks_status sks_builtin_names(char** out_json);

SKS_API sks_status sks_density(const sks_family* fam, const double theta[3], double x, double* out);
SKS_API sks_status sks_log_likelihood(const sks_family* fam, const double theta[3], const double* data,
                                      size_t n, double* out);
/* Draws n values at theta = (mu, sigma, delta) from stream (seed, stream). */
SKS_API sks_status sks_simulate(const sks_family* fam, const double theta[3], size_t n, uint64_t seed,
                                uint64_t stream, double* out);

/* Classification. options_json may be NULL or an object with any of
 * "residual_tol", "rank_tol", "upsilon_consistency_tol", "abs_tol",
 * "rel_tol". */
SKS_API sks_status sks_classify(const sks_family* fam, const char* options_json, char** out_json);
/* Singularity order only. */
SKS_API sks_status sks_order(const sks_family* fam, const char* options_json, int* out);
/* Information matrix in parametrization k at (mu, sigma). */
SKS_API sks_status sks_fisher(const sks_family* fam, int k, double mu, double sigma,
                              const char* options_json, char** out_json);
/* Scores (l1, l2, l3) at (mu, sigma, 0) in parametrization k; minus_branch
 * selects the delta -> 0- one-sided limit. */
SKS_API sks_status sks_score(const sks_family* fam, int k, double mu, double sigma, double x,
                             int minus_branch, double out[3]);

/* LM symmetry test. variant: 0 simple, 1 double. nuisance may be NULL
 * (estimated) or point to (mu, sigma). */
SKS_API sks_status sks_lm_test(const sks_family* fam, const double* data, size_t n, int variant,
                               const double* nuisance, double alpha, char** out_json);

/* Maximum likelihood in parametrization k. options_json: "delta_bound",
 * "sigma_lower", "restarts", "x_tol", "f_tol", "max_evaluations", "seed". */
SKS_API sks_status sks_fit_mle(const sks_family* fam, const double* data, size_t n, int k,
                               const char* options_json, char** out_json);

/* Rate experiment. options_json: "n_grid", "replications", "seed",
 * "threads", "parametrization", "summary_quantile". out_csv may be NULL;
 * otherwise it receives the per-replication table. */
SKS_API sks_status sks_rate_experiment(const sks_family* fam, const char* options_json,
                                       char** out_json, char** out_csv);

/* Reparametrizations: theta is (mu, sigma, delta), out the k-th coordinates,
 * and back. */
SKS_API sks_status sks_to_reparam(int k, const double theta[3], double a, double alpha1, double out[3]);
SKS_API sks_status sks_from_reparam(int k, const double coords[3], double a, double alpha1,
                                    double out[3]);

/* Centred parametrization of the skew-normal. fam may be NULL; otherwise it
 * must be a skew-normal family. */
SKS_API sks_status sks_cp_forward(const sks_family* fam, const double theta[3], double out[3]);
SKS_API sks_status sks_cp_inverse(const double cp[3], double out[3]);
SKS_API double sks_cp_gamma1_bound(void);

SKS_API sks_status sks_appendix_score_ours(double mu2, double sigma2, double delta2, double x,
                                           double* out);
SKS_API sks_status sks_appendix_score_cp(double theta1, double theta2, double gamma1, double x,
                                         double* out);
/* ours and cp hold m_ours and m_cp (parameter, x) pairs, interleaved. */
SKS_API sks_status sks_appendix_check(const double* ours, size_t m_ours, const double* cp, size_t m_cp,
                                      double tolerance, char** out_json);

#ifdef __cplusplus
}
#endif

#endif /* SKEWSING_H */
