/* C interface to the twofold library.  Every fallible call returns a
 * tf_status; on failure tf_last_error_message() describes the error for the
 * calling thread.  Objects are opaque and released with their *_free call. */
#ifndef TWOFOLD_TWOFOLD_H
#define TWOFOLD_TWOFOLD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TF_API __declspec(dllexport)
#else
#define TF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tf_status {
  TF_OK = 0,
  TF_INVALID_ARGUMENT,
  TF_INVALID_PARAMS,
  TF_DEGENERATE_SLIDING,
  TF_NOT_SLIDING_REGION,
  TF_LEAVES_CROSSING_REGIME,
  TF_DOMAIN_ERROR,
  TF_MAX_STEPS_EXCEEDED,
  TF_NON_FINITE_STATE,
  TF_NO_CONVERGENCE,
  TF_NO_CROSSING_BEFORE,
  TF_SEED_ESCAPED,
  TF_DEPTH_TOO_LARGE,
  TF_INTERNAL_ERROR
} tf_status;

TF_API const char* tf_status_string(tf_status status);
TF_API const char* tf_last_error_message(void);
TF_API const char* tf_version(void);

typedef struct tf_vec3 {
  double x, y, z;
} tf_vec3;

typedef enum tf_side { TF_LEFT = 0, TF_RIGHT = 1 } tf_side;

/* ---- normal form ------------------------------------------------------ */

typedef struct tf_derived_constants {
  double lambda, mu, gamma, alpha, beta;
} tf_derived_constants;

TF_API tf_status tf_derived_constants_eval(double v_minus, double v_plus, tf_derived_constants* out);

typedef enum tf_region {
  TF_REGION_A = 0,
  TF_REGION_R,
  TF_REGION_C_PLUS,
  TF_REGION_C_MINUS,
  TF_REGION_FOLD_BOUNDARY,
  TF_REGION_TWO_FOLD
} tf_region;

TF_API tf_status tf_classify_region(double y, double z, double tol, tf_region* out);
TF_API const char* tf_region_string(tf_region region);

TF_API tf_status tf_flow_left(double v_minus, double v_plus, tf_vec3 X0, double dt, tf_vec3* out);
TF_API tf_status tf_flow_right(double v_minus, double v_plus, tf_vec3 X0, double dt, tf_vec3* out);
TF_API tf_status tf_return_map(double v_minus, double v_plus, double y, double z, double* y_next,
                               double* z_next, double* elapsed);
TF_API tf_status tf_psi_orbit_eval(double v_minus, double v_plus, double a, double t, tf_vec3* out,
                                   int* below_resolution);
TF_API tf_status tf_to_polar(double v_minus, double v_plus, double x, double y, double* r,
                             double* theta, int* degenerate);

/* ---- fields ------------------------------------------------------------ */

typedef struct tf_field tf_field;

typedef enum tf_perturbation {
  TF_PERTURBATION_NONE = 0,
  TF_PERTURBATION_LINEAR_DAMPING,
  TF_PERTURBATION_CUBIC
} tf_perturbation;

typedef struct tf_control_params {
  double a1, a2, a3, a4, t1, t2;
} tf_control_params;

TF_API void tf_control_params_default(tf_control_params* out);

TF_API tf_status tf_field_normal_form(double v_minus, double v_plus, tf_perturbation kind,
                                      tf_field** out);
/* coeffs holds 2 x 3 x 35 values indexed [side][component][monomial]; the
 * monomial order is that of tf_monomial_index. */
TF_API tf_status tf_field_polynomial(double v_minus, double v_plus, const double* coeffs,
                                     tf_field** out);
TF_API tf_status tf_monomial_index(int i, int j, int k, size_t* out);
TF_API tf_status tf_field_controlled_hopf(const tf_control_params* control, tf_field** out);
TF_API void tf_field_free(tf_field* field);

TF_API tf_status tf_field_eval(const tf_field* field, tf_side side, tf_vec3 X, double t, tf_vec3* out);
/* Filippov sliding vector on x = 0. */
TF_API tf_status tf_sliding_field(const tf_field* field, tf_vec3 X, double t, double* ydot,
                                  double* zdot, double* q);

/* ---- integration ------------------------------------------------------- */

typedef struct tf_integrator_config {
  double dt;
  double event_tol;
  double twofold_tol;
  uint64_t max_steps;
  double chatter_guard; /* <= 0 selects the default */
  double relative_step;
  uint32_t sample_stride;
  uint32_t stop_after_pos_y;
} tf_integrator_config;

TF_API void tf_integrator_config_default(tf_integrator_config* out);
TF_API tf_status tf_integrator_config_validate(const tf_integrator_config* cfg);

typedef struct tf_noise {
  double epsilon;
  double D[9]; /* row major */
  uint64_t seed;
} tf_noise;

TF_API void tf_noise_default(tf_noise* out);
TF_API uint64_t tf_derive_stream_seed(uint64_t master, uint64_t index);

typedef enum tf_event_kind {
  TF_EVENT_CROSSING_POS_Y = 0,
  TF_EVENT_CROSSING_NEG_Y,
  TF_EVENT_SLIDING_ENTRY,
  TF_EVENT_SLIDING_EXIT,
  TF_EVENT_TWO_FOLD_REACHED
} tf_event_kind;

TF_API const char* tf_event_kind_string(tf_event_kind kind);

typedef struct tf_trajectory tf_trajectory;

TF_API tf_status tf_integrate_deterministic(const tf_field* field, tf_vec3 X0, double t0, double t_end,
                                            const tf_integrator_config* cfg, tf_trajectory** out);
/* psi_offset <= 0 restarts at psi_a(a). */
TF_API tf_status tf_integrate_with_continuation(const tf_field* field, tf_vec3 X0, double t0,
                                                double t_end, const tf_integrator_config* cfg,
                                                double psi_a, double psi_offset, tf_trajectory** out);
TF_API tf_status tf_integrate_sde(const tf_field* field, tf_vec3 X0, double t0, double t_end,
                                  const tf_integrator_config* cfg, const tf_noise* noise,
                                  tf_trajectory** out);
TF_API void tf_trajectory_free(tf_trajectory* traj);
TF_API size_t tf_trajectory_sample_count(const tf_trajectory* traj);
TF_API tf_status tf_trajectory_sample(const tf_trajectory* traj, size_t i, double* t, tf_vec3* X);
TF_API size_t tf_trajectory_event_count(const tf_trajectory* traj);
TF_API tf_status tf_trajectory_event(const tf_trajectory* traj, size_t i, tf_event_kind* kind, double* t,
                                     tf_vec3* X);

/* ---- phase ------------------------------------------------------------- */

TF_API tf_status tf_phase_phi_T(const tf_trajectory* traj, double T, double tau, double* out);

typedef struct tf_orbit tf_orbit;

TF_API tf_status tf_find_periodic_orbit(const tf_field* field, tf_vec3 guess, double t0,
                                        const tf_integrator_config* cfg, tf_orbit** out);
TF_API void tf_orbit_free(tf_orbit* orbit);
TF_API double tf_orbit_tau(const tf_orbit* orbit);
TF_API tf_vec3 tf_orbit_section_point(const tf_orbit* orbit);
TF_API size_t tf_orbit_sample_count(const tf_orbit* orbit);
TF_API tf_status tf_orbit_sample(const tf_orbit* orbit, size_t i, double* t, tf_vec3* X);
TF_API tf_status tf_asymptotic_phase(const tf_field* field, const tf_orbit* orbit, tf_vec3 X, double t,
                                     const tf_integrator_config* cfg, uint32_t settle_periods,
                                     double* out);

typedef struct tf_return_time_options {
  double a_min;
  uint32_t n_seeds;
  double t_max;
  unsigned threads;
} tf_return_time_options;

TF_API void tf_return_time_options_default(tf_return_time_options* out);

typedef struct tf_return_table tf_return_table;

TF_API tf_status tf_return_time_table(const tf_field* field, const tf_integrator_config* cfg,
                                      const tf_return_time_options* opts, tf_return_table** out);
TF_API void tf_return_table_free(tf_return_table* table);
TF_API size_t tf_return_table_knot_count(const tf_return_table* table);
TF_API tf_status tf_return_table_knot(const tf_return_table* table, size_t i, double* a, double* f);
TF_API tf_status tf_return_table_eval(const tf_return_table* table, double a, double* out);
TF_API tf_status tf_return_table_inverse_iterate(const tf_return_table* table, double v, uint32_t n,
                                                 double* out);

typedef struct tf_density tf_density;

TF_API tf_status tf_pdf_sT(const tf_return_table* table, double T, double t0, uint32_t n, uint32_t grid,
                           tf_density** out);
TF_API tf_status tf_pdf_phase(const tf_density* p_sT, double T, double tau, uint32_t grid,
                              tf_density** out);
/* Knots are taken as given, without normalisation. */
TF_API tf_status tf_density_from_knots(const double* s, const double* p, size_t n, tf_density** out);
TF_API void tf_density_free(tf_density* d);
TF_API size_t tf_density_knot_count(const tf_density* d);
TF_API tf_status tf_density_knot(const tf_density* d, size_t i, double* s, double* p);
TF_API double tf_density_eval(const tf_density* d, double x);
TF_API double tf_density_cdf(const tf_density* d, double x);
TF_API tf_status tf_density_l1_distance(const tf_density* a, const tf_density* b, double* out);

typedef struct tf_isochron_options {
  uint32_t n_orbits;
  double a_min;
  double t_max;
  double t_min;
  uint32_t sample_stride;
  unsigned threads;
} tf_isochron_options;

TF_API void tf_isochron_options_default(tf_isochron_options* out);

typedef struct tf_isochrons tf_isochrons;

TF_API tf_status tf_isochron_mesh(const tf_field* field, const tf_orbit* orbit, const double* phases,
                                  size_t n_phases, const tf_integrator_config* cfg,
                                  const tf_isochron_options* opts, tf_isochrons** out);
TF_API void tf_isochrons_free(tf_isochrons* iso);
TF_API size_t tf_isochrons_count(const tf_isochrons* iso);
TF_API double tf_isochrons_phase(const tf_isochrons* iso, size_t k);
TF_API size_t tf_isochrons_point_count(const tf_isochrons* iso, size_t k);
TF_API tf_status tf_isochrons_point(const tf_isochrons* iso, size_t k, size_t j, tf_vec3* X, double* t,
                                    uint32_t* orbit);

/* ---- ensemble ---------------------------------------------------------- */

typedef struct tf_ensemble_config {
  uint64_t n_samples;
  tf_vec3 X0;
  double t0;
  double T;
  tf_noise noise; /* noise.seed is the master seed */
  tf_integrator_config integrator;
  unsigned threads;
  /* With noise.epsilon == 0 and psi_a > 0, samples are deterministic and
   * continue through the two-fold on psi_a. */
  double psi_a;
  double psi_offset;
} tf_ensemble_config;

TF_API void tf_ensemble_config_default(tf_ensemble_config* out);
TF_API tf_status tf_ensemble_config_validate(const tf_ensemble_config* cfg);

typedef struct tf_ensemble tf_ensemble;

TF_API tf_status tf_run_ensemble(const tf_field* field, const tf_ensemble_config* cfg, double tau,
                                 tf_ensemble** out);
TF_API void tf_ensemble_free(tf_ensemble* ens);
TF_API size_t tf_ensemble_sample_count(const tf_ensemble* ens);
TF_API tf_status tf_ensemble_sample(const tf_ensemble* ens, size_t i, uint64_t* index, double* phi_T,
                                    double* s_T);
TF_API size_t tf_ensemble_failure_count(const tf_ensemble* ens);
TF_API tf_status tf_ensemble_failure(const tf_ensemble* ens, size_t i, uint64_t* index, tf_status* status,
                                     const char** message);

TF_API tf_status tf_histogram(const double* phases, size_t n, uint32_t n_bins, uint64_t* counts);
TF_API tf_status tf_ks_distance(const double* samples, size_t n, const tf_density* d, double* out);

/* ---- desynchronisation ------------------------------------------------- */

TF_API void tf_hopf_field(double x, double y, double* xdot, double* ydot);
TF_API tf_status tf_controlled_field(double t, double x, double y, const tf_control_params* control,
                                     double* xdot, double* ydot);

typedef struct tf_twofold_conditions {
  int left_fold_invisible;
  int right_fold_invisible;
  int generic;
  int sign_condition;
  int window_ordered;
  int all_pass;
} tf_twofold_conditions;

TF_API tf_status tf_verify_twofold_conditions(const tf_control_params* control, tf_twofold_conditions* out);

typedef struct tf_desync_config {
  tf_control_params control;
  uint32_t n_osc;
  double epsilon;
  uint64_t seed;
  double t_start;
  double t_end;
  double x0, y0;
  double dt;
  uint32_t sample_stride;
  unsigned threads;
} tf_desync_config;

TF_API void tf_desync_config_default(tf_desync_config* out);
TF_API tf_status tf_desync_config_validate(const tf_desync_config* cfg);

typedef struct tf_desync_result tf_desync_result;

TF_API tf_status tf_desync_experiment(const tf_desync_config* cfg, tf_desync_result** out);
TF_API void tf_desync_result_free(tf_desync_result* res);
TF_API size_t tf_desync_count(const tf_desync_result* res);
TF_API tf_status tf_desync_phase(const tf_desync_result* res, size_t i, double* before, double* after);
TF_API void tf_desync_circular_variance(const tf_desync_result* res, double* before, double* after);
TF_API size_t tf_desync_path_length(const tf_desync_result* res, size_t i);
TF_API tf_status tf_desync_path_sample(const tf_desync_result* res, size_t i, size_t j, double* t, double* x,
                                       double* y);
TF_API tf_status tf_circular_variance(const double* phases, size_t n, double* out);

#ifdef __cplusplus
}
#endif

#endif
