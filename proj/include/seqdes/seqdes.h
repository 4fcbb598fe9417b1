/*
 * seqdes - cost-efficient sequential designs for binary response models.
 *
 * C interface to the shared library. All functions return a seqdes_status;
 * on any failure seqdes_last_error() gives a human-readable message for the
 * calling thread. Opaque handles must be released with the matching *_free.
 */
#ifndef SEQDES_SEQDES_H
#define SEQDES_SEQDES_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SEQDES_API __declspec(dllexport)
#else
#define SEQDES_API __attribute__((visibility("default")))
#endif

typedef enum {
  SEQDES_OK = 0,
  SEQDES_ERR_INVALID_ARGUMENT = 1,
  SEQDES_ERR_SEPARATION = 2,
  SEQDES_ERR_DEGENERATE_DESIGN = 3,
  SEQDES_ERR_NO_IMPROVEMENT = 4,
  SEQDES_ERR_ALL_CANDIDATES_DEGENERATE = 5,
  SEQDES_ERR_NOT_CONVERGED = 6,
  SEQDES_ERR_PROTOCOL = 7,
  SEQDES_ERR_IO = 8,
  SEQDES_ERR_INTERNAL = 9
} seqdes_status;

typedef enum {
  SEQDES_MODEL_LOGIT = 0,
  SEQDES_MODEL_PROBIT = 1,
  SEQDES_MODEL_CLOGLOG = 2
} seqdes_model;

SEQDES_API const char* seqdes_version(void);
SEQDES_API const char* seqdes_last_error(void);

/* --- response model primitives -------------------------------------- */

SEQDES_API double seqdes_response_prob(int model, double z);
SEQDES_API double seqdes_info_weight(int model, double z);

typedef struct {
  double z1, z2;       /* canonical optimal points, z1 < z2 */
  double f1, f2;       /* response probabilities at the points */
  double d_star;       /* sqrt(det) of the unit-weight two-point design */
  double j11, j12, j22;
} seqdes_canonical_design;

SEQDES_API seqdes_status seqdes_derive_canonical(int model,
                                                 seqdes_canonical_design* out);

/* --- expected information gain --------------------------------------- */

typedef struct seqdes_gain seqdes_gain; /* opaque */

SEQDES_API seqdes_status seqdes_gain_simulate(int model, double d0, long draws,
                                              unsigned long long seed,
                                              double* mean_out,
                                              double* std_error_out,
                                              long* degenerate_out);

/* fits the interpolant on grid_points log-spaced values of D0 */
SEQDES_API seqdes_status seqdes_gain_fit(int model, double grid_min,
                                         double grid_max, int grid_points,
                                         long draws, unsigned long long seed,
                                         seqdes_gain** out);
SEQDES_API seqdes_status seqdes_gain_eval(const seqdes_gain* gain, double d0,
                                          double* out);
SEQDES_API seqdes_status seqdes_gain_save(const seqdes_gain* gain,
                                          const char* path);
SEQDES_API seqdes_status seqdes_gain_load(const char* path, seqdes_gain** out);
SEQDES_API void seqdes_gain_free(seqdes_gain* gain);

/* --- stage-size rule -------------------------------------------------- */

typedef struct seqdes_rule seqdes_rule; /* opaque */

/* sweeps the default D x C_S grid with the default candidate set; when
 * sweep_csv_path is non-NULL the sweep table is written there */
SEQDES_API seqdes_status seqdes_rule_fit(const seqdes_gain* gain,
                                         const char* sweep_csv_path,
                                         seqdes_rule** out);
/* the published reference coefficients for the given model */
SEQDES_API seqdes_status seqdes_rule_reference(int model, seqdes_rule** out);
SEQDES_API seqdes_status seqdes_rule_coefficients(const seqdes_rule* rule,
                                                  double* alpha, double* beta,
                                                  double* gamma, double* delta,
                                                  double* r_squared);
SEQDES_API seqdes_status seqdes_rule_save(const seqdes_rule* rule,
                                          const char* path);
SEQDES_API seqdes_status seqdes_rule_load(const char* path, seqdes_rule** out);
SEQDES_API void seqdes_rule_free(seqdes_rule* rule);

SEQDES_API seqdes_status seqdes_suggest(const seqdes_rule* rule, double a_hat,
                                        double d_prev, double stage_cost,
                                        long* n_out);

/* --- sequential simulation ------------------------------------------- */

typedef enum {
  SEQDES_POLICY_COST_EFFICIENT = 0,
  SEQDES_POLICY_ADHOC_GROWTH = 1,
  SEQDES_POLICY_FIXED = 2
} seqdes_policy;

typedef struct {
  int model;
  double true_a, true_b;   /* simulator parameters */
  double init_a, init_b;   /* initial estimates */
  double init_d;           /* information level at the start */
  double init_cost;        /* cost already spent before stage 1 */
  double stage_cost;
  int policy;
  const seqdes_rule* rule; /* cost_efficient: NULL means reference rule */
  double adhoc_start;      /* defaults apply when <= 0 */
  double adhoc_factor;
  long fixed_n;
  double target_d;         /* <= 0: unset */
  double budget;           /* <= 0: unset */
  int max_stages;          /* <= 0: unset */
  unsigned long long seed;
} seqdes_sim_config;

/* replications == 1 writes the single path; > 1 writes the per-stage median
 * path. Either output path may be NULL to skip that format. */
SEQDES_API seqdes_status seqdes_simulate(const seqdes_sim_config* cfg,
                                         int replications, const char* csv_path,
                                         const char* json_path,
                                         double* final_cost_out);

/* runs both arms with shared per-replicate seeds; writes median-path CSVs
 * (d,c per stage) and a JSON summary, any of which may be NULL */
SEQDES_API seqdes_status seqdes_compare(const seqdes_sim_config* cfg_a,
                                        const seqdes_sim_config* cfg_b,
                                        int replications,
                                        unsigned long long seed,
                                        const char* csv_a, const char* csv_b,
                                        const char* summary_json,
                                        double* median_cost_a,
                                        double* median_cost_b);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SEQDES_SEQDES_H */
