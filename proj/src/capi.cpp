#include "twofold/twofold.h"

#include <algorithm>
#include <exception>
#include <new>
#include <string>

#include "twofold/core.hpp"
#include "twofold/desync.hpp"
#include "twofold/ensemble.hpp"
#include "twofold/error.hpp"
#include "twofold/integrate.hpp"
#include "twofold/normalform.hpp"
#include "twofold/phase.hpp"
#include "twofold/polar.hpp"

struct tf_field {
  twofold::FieldSpec spec;
};
struct tf_trajectory {
  twofold::Trajectory traj;
};
struct tf_orbit {
  twofold::PeriodicOrbit orbit;
};
struct tf_return_table {
  twofold::ReturnTimeTable table;
};
struct tf_density {
  twofold::DensityTable density;
};
struct tf_isochrons {
  std::vector<twofold::Isochron> lines;
};
struct tf_ensemble {
  twofold::EnsembleResult result;
};
struct tf_desync_result {
  twofold::DesyncResult result;
};

namespace {

using namespace twofold;

thread_local std::string g_last_error;

tf_status to_status(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return TF_INVALID_ARGUMENT;
    case ErrorCode::InvalidParams: return TF_INVALID_PARAMS;
    case ErrorCode::DegenerateSliding: return TF_DEGENERATE_SLIDING;
    case ErrorCode::NotSlidingRegion: return TF_NOT_SLIDING_REGION;
    case ErrorCode::LeavesCrossingRegime: return TF_LEAVES_CROSSING_REGIME;
    case ErrorCode::DomainError: return TF_DOMAIN_ERROR;
    case ErrorCode::MaxStepsExceeded: return TF_MAX_STEPS_EXCEEDED;
    case ErrorCode::NonFiniteState: return TF_NON_FINITE_STATE;
    case ErrorCode::NoConvergence: return TF_NO_CONVERGENCE;
    case ErrorCode::NoCrossingBefore: return TF_NO_CROSSING_BEFORE;
    case ErrorCode::SeedEscaped: return TF_SEED_ESCAPED;
    case ErrorCode::DepthTooLarge: return TF_DEPTH_TOO_LARGE;
  }
  return TF_INTERNAL_ERROR;
}

template <class Fn>
tf_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return TF_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return TF_INTERNAL_ERROR;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TF_INTERNAL_ERROR;
  } catch (...) {
    g_last_error = "unknown exception";
    return TF_INTERNAL_ERROR;
  }
}

template <class T>
void need(const T* p, const char* what) {
  if (!p) fail(ErrorCode::InvalidArgument, std::string(what) + " must not be null");
}

void need_index(std::size_t i, std::size_t n) {
  if (i >= n) fail(ErrorCode::InvalidArgument, "index out of range");
}

State3 from_c(tf_vec3 v) { return {v.x, v.y, v.z}; }
tf_vec3 to_c(const State3& v) { return {v.x, v.y, v.z}; }

IntegratorConfig from_c(const tf_integrator_config* c) {
  IntegratorConfig cfg;
  if (!c) return cfg;
  cfg.dt = c->dt;
  cfg.event_tol = c->event_tol;
  cfg.twofold_tol = c->twofold_tol;
  cfg.max_steps = c->max_steps;
  if (c->chatter_guard > 0.0) cfg.chatter_guard = c->chatter_guard;
  cfg.relative_step = c->relative_step;
  cfg.sample_stride = c->sample_stride;
  cfg.stop_after_pos_y = c->stop_after_pos_y;
  return cfg;
}

NoiseSpec from_c(const tf_noise* n) {
  NoiseSpec out;
  if (!n) return out;
  out.epsilon = n->epsilon;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out.D[r][c] = n->D[3 * r + c];
  out.seed = n->seed;
  return out;
}

ControlParams from_c(const tf_control_params* c) {
  return {c->a1, c->a2, c->a3, c->a4, c->t1, c->t2};
}

Side from_c(tf_side s) { return s == TF_RIGHT ? Side::Right : Side::Left; }

EnsembleConfig from_c(const tf_ensemble_config* cfg) {
  EnsembleConfig c;
  c.n_samples = cfg->n_samples;
  c.X0 = from_c(cfg->X0);
  c.t0 = cfg->t0;
  c.T = cfg->T;
  c.noise = from_c(&cfg->noise);
  c.integrator = from_c(&cfg->integrator);
  c.threads = cfg->threads;
  if (cfg->psi_a > 0.0) {
    ViablePsi psi{cfg->psi_a, std::nullopt};
    if (cfg->psi_offset > 0.0) psi.offset = cfg->psi_offset;
    c.continuation = psi;
  }
  return c;
}

DesyncConfig from_c(const tf_desync_config* cfg) {
  DesyncConfig c;
  c.control = from_c(&cfg->control);
  c.n_osc = cfg->n_osc;
  c.epsilon = cfg->epsilon;
  c.seed = cfg->seed;
  c.t_start = cfg->t_start;
  c.t_end = cfg->t_end;
  c.X0 = {cfg->x0, cfg->y0};
  c.dt = cfg->dt;
  c.sample_stride = cfg->sample_stride;
  c.threads = cfg->threads;
  return c;
}

}  // namespace

extern "C" {

const char* tf_status_string(tf_status status) {
  switch (status) {
    case TF_OK: return "ok";
    case TF_INVALID_ARGUMENT: return to_string(ErrorCode::InvalidArgument);
    case TF_INVALID_PARAMS: return to_string(ErrorCode::InvalidParams);
    case TF_DEGENERATE_SLIDING: return to_string(ErrorCode::DegenerateSliding);
    case TF_NOT_SLIDING_REGION: return to_string(ErrorCode::NotSlidingRegion);
    case TF_LEAVES_CROSSING_REGIME: return to_string(ErrorCode::LeavesCrossingRegime);
    case TF_DOMAIN_ERROR: return to_string(ErrorCode::DomainError);
    case TF_MAX_STEPS_EXCEEDED: return to_string(ErrorCode::MaxStepsExceeded);
    case TF_NON_FINITE_STATE: return to_string(ErrorCode::NonFiniteState);
    case TF_NO_CONVERGENCE: return to_string(ErrorCode::NoConvergence);
    case TF_NO_CROSSING_BEFORE: return to_string(ErrorCode::NoCrossingBefore);
    case TF_SEED_ESCAPED: return to_string(ErrorCode::SeedEscaped);
    case TF_DEPTH_TOO_LARGE: return to_string(ErrorCode::DepthTooLarge);
    case TF_INTERNAL_ERROR: return "internal_error";
  }
  return "unknown_status";
}

const char* tf_last_error_message(void) { return g_last_error.c_str(); }

const char* tf_version(void) { return "0.1.0"; }

tf_status tf_derived_constants_eval(double v_minus, double v_plus, tf_derived_constants* out) {
  return guarded([&] {
    need(out, "out");
    const DerivedConstants d = derived_constants(TwoFoldParams(v_minus, v_plus));
    *out = {d.lambda, d.mu, d.gamma, d.alpha, d.beta};
  });
}

tf_status tf_classify_region(double y, double z, double tol, tf_region* out) {
  return guarded([&] {
    need(out, "out");
    *out = static_cast<tf_region>(classify_region(y, z, tol));
  });
}

const char* tf_region_string(tf_region region) {
  if (region < TF_REGION_A || region > TF_REGION_TWO_FOLD) return "?";
  return to_string(static_cast<Region>(region));
}

tf_status tf_flow_left(double v_minus, double v_plus, tf_vec3 X0, double dt, tf_vec3* out) {
  return guarded([&] {
    need(out, "out");
    *out = to_c(flow_left(TwoFoldParams(v_minus, v_plus), from_c(X0), dt));
  });
}

tf_status tf_flow_right(double v_minus, double v_plus, tf_vec3 X0, double dt, tf_vec3* out) {
  return guarded([&] {
    need(out, "out");
    *out = to_c(flow_right(TwoFoldParams(v_minus, v_plus), from_c(X0), dt));
  });
}

tf_status tf_return_map(double v_minus, double v_plus, double y, double z, double* y_next, double* z_next,
                        double* elapsed) {
  return guarded([&] {
    need(y_next, "y_next");
    need(z_next, "z_next");
    need(elapsed, "elapsed");
    const ReturnMapResult r = return_map(TwoFoldParams(v_minus, v_plus), y, z);
    *y_next = r.y_next;
    *z_next = r.z_next;
    *elapsed = r.elapsed;
  });
}

tf_status tf_psi_orbit_eval(double v_minus, double v_plus, double a, double t, tf_vec3* out,
                            int* below_resolution) {
  return guarded([&] {
    need(out, "out");
    const PsiSample s = psi_orbit_eval(PsiOrbit(TwoFoldParams(v_minus, v_plus), a), t);
    *out = to_c(s.X);
    if (below_resolution) *below_resolution = s.below_resolution ? 1 : 0;
  });
}

tf_status tf_to_polar(double v_minus, double v_plus, double x, double y, double* r, double* theta,
                      int* degenerate) {
  return guarded([&] {
    need(r, "r");
    need(theta, "theta");
    const PolarPoint p = to_polar(TwoFoldParams(v_minus, v_plus), x, y);
    *r = p.r;
    *theta = p.theta;
    if (degenerate) *degenerate = p.degenerate ? 1 : 0;
  });
}

void tf_control_params_default(tf_control_params* out) {
  if (!out) return;
  const ControlParams c;
  *out = {c.a1, c.a2, c.a3, c.a4, c.t1, c.t2};
}

tf_status tf_field_normal_form(double v_minus, double v_plus, tf_perturbation kind, tf_field** out) {
  return guarded([&] {
    need(out, "out");
    PerturbationKind k;
    switch (kind) {
      case TF_PERTURBATION_NONE: k = PerturbationKind::None; break;
      case TF_PERTURBATION_LINEAR_DAMPING: k = PerturbationKind::LinearDamping; break;
      case TF_PERTURBATION_CUBIC: k = PerturbationKind::Cubic; break;
      default: fail(ErrorCode::InvalidArgument, "unknown perturbation kind");
    }
    *out = new tf_field{FieldSpec::normal_form(TwoFoldParams(v_minus, v_plus), k)};
  });
}

tf_status tf_field_polynomial(double v_minus, double v_plus, const double* coeffs, tf_field** out) {
  return guarded([&] {
    need(out, "out");
    need(coeffs, "coeffs");
    PolynomialTerms terms;
    std::size_t idx = 0;
    for (auto& side : terms.coeffs)
      for (auto& comp : side)
        for (auto& v : comp) v = coeffs[idx++];
    *out = new tf_field{FieldSpec::polynomial(TwoFoldParams(v_minus, v_plus), terms)};
  });
}

tf_status tf_monomial_index(int i, int j, int k, size_t* out) {
  return guarded([&] {
    need(out, "out");
    *out = PolynomialTerms::monomial_index(i, j, k);
  });
}

tf_status tf_field_controlled_hopf(const tf_control_params* control, tf_field** out) {
  return guarded([&] {
    need(out, "out");
    need(control, "control");
    *out = new tf_field{FieldSpec::controlled_hopf(from_c(control))};
  });
}

void tf_field_free(tf_field* field) { delete field; }

tf_status tf_field_eval(const tf_field* field, tf_side side, tf_vec3 X, double t, tf_vec3* out) {
  return guarded([&] {
    need(field, "field");
    need(out, "out");
    *out = to_c(eval_field(field->spec, from_c(side), from_c(X), t));
  });
}

tf_status tf_sliding_field(const tf_field* field, tf_vec3 X, double t, double* ydot, double* zdot, double* q) {
  return guarded([&] {
    need(field, "field");
    const SlidingField s = filippov_sliding_field(field->spec, from_c(X), t);
    if (ydot) *ydot = s.ydot;
    if (zdot) *zdot = s.zdot;
    if (q) *q = s.q;
  });
}

void tf_integrator_config_default(tf_integrator_config* out) {
  if (!out) return;
  const IntegratorConfig c;
  *out = {c.dt, c.event_tol, c.twofold_tol, c.max_steps, 0.0, c.relative_step, c.sample_stride,
          c.stop_after_pos_y};
}

tf_status tf_integrator_config_validate(const tf_integrator_config* cfg) {
  return guarded([&] {
    need(cfg, "cfg");
    from_c(cfg).validate();
  });
}

void tf_noise_default(tf_noise* out) {
  if (!out) return;
  *out = {};
  out->D[0] = out->D[4] = out->D[8] = 1.0;
}

uint64_t tf_derive_stream_seed(uint64_t master, uint64_t index) { return derive_stream_seed(master, index); }

const char* tf_event_kind_string(tf_event_kind kind) {
  if (kind < TF_EVENT_CROSSING_POS_Y || kind > TF_EVENT_TWO_FOLD_REACHED) return "?";
  return to_string(static_cast<EventKind>(kind));
}

tf_status tf_integrate_deterministic(const tf_field* field, tf_vec3 X0, double t0, double t_end,
                                     const tf_integrator_config* cfg, tf_trajectory** out) {
  return guarded([&] {
    need(field, "field");
    need(out, "out");
    *out = new tf_trajectory{integrate_deterministic(field->spec, from_c(X0), t0, t_end, from_c(cfg))};
  });
}

tf_status tf_integrate_with_continuation(const tf_field* field, tf_vec3 X0, double t0, double t_end,
                                         const tf_integrator_config* cfg, double psi_a, double psi_offset,
                                         tf_trajectory** out) {
  return guarded([&] {
    need(field, "field");
    need(out, "out");
    ViablePsi psi{psi_a, std::nullopt};
    if (psi_offset > 0.0) psi.offset = psi_offset;
    *out = new tf_trajectory{
        integrate_with_continuation(field->spec, from_c(X0), t0, t_end, from_c(cfg), psi)};
  });
}

tf_status tf_integrate_sde(const tf_field* field, tf_vec3 X0, double t0, double t_end,
                           const tf_integrator_config* cfg, const tf_noise* noise, tf_trajectory** out) {
  return guarded([&] {
    need(field, "field");
    need(out, "out");
    need(noise, "noise");
    *out = new tf_trajectory{integrate_sde(field->spec, from_c(X0), t0, t_end, from_c(cfg), from_c(noise))};
  });
}

void tf_trajectory_free(tf_trajectory* traj) { delete traj; }

size_t tf_trajectory_sample_count(const tf_trajectory* traj) { return traj ? traj->traj.samples.size() : 0; }

tf_status tf_trajectory_sample(const tf_trajectory* traj, size_t i, double* t, tf_vec3* X) {
  return guarded([&] {
    need(traj, "traj");
    need_index(i, traj->traj.samples.size());
    const Sample& s = traj->traj.samples[i];
    if (t) *t = s.t;
    if (X) *X = to_c(s.X);
  });
}

size_t tf_trajectory_event_count(const tf_trajectory* traj) { return traj ? traj->traj.events.size() : 0; }

tf_status tf_trajectory_event(const tf_trajectory* traj, size_t i, tf_event_kind* kind, double* t, tf_vec3* X) {
  return guarded([&] {
    need(traj, "traj");
    need_index(i, traj->traj.events.size());
    const Event& e = traj->traj.events[i];
    if (kind) *kind = static_cast<tf_event_kind>(e.kind);
    if (t) *t = e.t;
    if (X) *X = to_c(e.X);
  });
}

tf_status tf_phase_phi_T(const tf_trajectory* traj, double T, double tau, double* out) {
  return guarded([&] {
    need(traj, "traj");
    need(out, "out");
    *out = phase_phi_T(traj->traj, T, tau);
  });
}

tf_status tf_find_periodic_orbit(const tf_field* field, tf_vec3 guess, double t0, const tf_integrator_config* cfg,
                                 tf_orbit** out) {
  return guarded([&] {
    need(field, "field");
    need(out, "out");
    *out = new tf_orbit{find_periodic_orbit(field->spec, from_c(guess), t0, from_c(cfg))};
  });
}

void tf_orbit_free(tf_orbit* orbit) { delete orbit; }
double tf_orbit_tau(const tf_orbit* orbit) { return orbit ? orbit->orbit.tau : 0.0; }
tf_vec3 tf_orbit_section_point(const tf_orbit* orbit) {
  return orbit ? to_c(orbit->orbit.section_point) : tf_vec3{0.0, 0.0, 0.0};
}
size_t tf_orbit_sample_count(const tf_orbit* orbit) { return orbit ? orbit->orbit.samples.size() : 0; }

tf_status tf_orbit_sample(const tf_orbit* orbit, size_t i, double* t, tf_vec3* X) {
  return guarded([&] {
    need(orbit, "orbit");
    need_index(i, orbit->orbit.samples.size());
    if (t) *t = orbit->orbit.samples[i].t;
    if (X) *X = to_c(orbit->orbit.samples[i].X);
  });
}

tf_status tf_asymptotic_phase(const tf_field* field, const tf_orbit* orbit, tf_vec3 X, double t,
                              const tf_integrator_config* cfg, uint32_t settle_periods, double* out) {
  return guarded([&] {
    need(field, "field");
    need(orbit, "orbit");
    need(out, "out");
    *out = asymptotic_phase(field->spec, orbit->orbit, from_c(X), t, from_c(cfg), settle_periods);
  });
}

void tf_return_time_options_default(tf_return_time_options* out) {
  if (!out) return;
  const ReturnTimeOptions o;
  *out = {o.a_min, o.n_seeds, o.t_max, o.threads};
}

tf_status tf_return_time_table(const tf_field* field, const tf_integrator_config* cfg,
                               const tf_return_time_options* opts, tf_return_table** out) {
  return guarded([&] {
    need(field, "field");
    need(out, "out");
    ReturnTimeOptions o;
    if (opts) o = {opts->a_min, opts->n_seeds, opts->t_max, opts->threads};
    *out = new tf_return_table{return_time_table(field->spec, from_c(cfg), o)};
  });
}

void tf_return_table_free(tf_return_table* table) { delete table; }
size_t tf_return_table_knot_count(const tf_return_table* table) { return table ? table->table.knots.size() : 0; }

tf_status tf_return_table_knot(const tf_return_table* table, size_t i, double* a, double* f) {
  return guarded([&] {
    need(table, "table");
    need_index(i, table->table.knots.size());
    if (a) *a = table->table.knots[i].a;
    if (f) *f = table->table.knots[i].f;
  });
}

tf_status tf_return_table_eval(const tf_return_table* table, double a, double* out) {
  return guarded([&] {
    need(table, "table");
    need(out, "out");
    *out = table->table.eval(a);
  });
}

tf_status tf_return_table_inverse_iterate(const tf_return_table* table, double v, uint32_t n, double* out) {
  return guarded([&] {
    need(table, "table");
    need(out, "out");
    *out = table->table.inverse_iterate(v, n);
  });
}

tf_status tf_pdf_sT(const tf_return_table* table, double T, double t0, uint32_t n, uint32_t grid,
                    tf_density** out) {
  return guarded([&] {
    need(table, "table");
    need(out, "out");
    *out = new tf_density{pdf_sT(table->table, T, t0, n, grid == 0 ? 4001 : grid)};
  });
}

tf_status tf_pdf_phase(const tf_density* p_sT, double T, double tau, uint32_t grid, tf_density** out) {
  return guarded([&] {
    need(p_sT, "p_sT");
    need(out, "out");
    *out = new tf_density{pdf_phase(p_sT->density, T, tau, grid == 0 ? 721 : grid)};
  });
}

tf_status tf_density_from_knots(const double* s, const double* p, size_t n, tf_density** out) {
  return guarded([&] {
    need(s, "s");
    need(p, "p");
    need(out, "out");
    *out = new tf_density{DensityTable(std::vector<double>(s, s + n), std::vector<double>(p, p + n))};
  });
}

void tf_density_free(tf_density* d) { delete d; }
size_t tf_density_knot_count(const tf_density* d) { return d ? d->density.s().size() : 0; }

tf_status tf_density_knot(const tf_density* d, size_t i, double* s, double* p) {
  return guarded([&] {
    need(d, "density");
    need_index(i, d->density.s().size());
    if (s) *s = d->density.s()[i];
    if (p) *p = d->density.p()[i];
  });
}

double tf_density_eval(const tf_density* d, double x) { return d ? d->density.density(x) : 0.0; }
double tf_density_cdf(const tf_density* d, double x) { return d ? d->density.cdf(x) : 0.0; }

tf_status tf_density_l1_distance(const tf_density* a, const tf_density* b, double* out) {
  return guarded([&] {
    need(a, "a");
    need(b, "b");
    need(out, "out");
    *out = l1_distance(a->density, b->density);
  });
}

void tf_isochron_options_default(tf_isochron_options* out) {
  if (!out) return;
  const IsochronOptions o;
  *out = {o.n_orbits, o.a_min, o.t_max, o.t_min, o.sample_stride, o.threads};
}

tf_status tf_isochron_mesh(const tf_field* field, const tf_orbit* orbit, const double* phases, size_t n_phases,
                           const tf_integrator_config* cfg, const tf_isochron_options* opts, tf_isochrons** out) {
  return guarded([&] {
    need(field, "field");
    need(orbit, "orbit");
    need(out, "out");
    if (n_phases > 0) need(phases, "phases");
    IsochronOptions o;
    if (opts) o = {opts->n_orbits, opts->a_min, opts->t_max, opts->t_min, opts->sample_stride, opts->threads};
    std::vector<double> ph(phases, phases + n_phases);
    *out = new tf_isochrons{isochron_mesh(field->spec, orbit->orbit, ph, from_c(cfg), o)};
  });
}

void tf_isochrons_free(tf_isochrons* iso) { delete iso; }
size_t tf_isochrons_count(const tf_isochrons* iso) { return iso ? iso->lines.size() : 0; }
double tf_isochrons_phase(const tf_isochrons* iso, size_t k) {
  return iso && k < iso->lines.size() ? iso->lines[k].phase : 0.0;
}
size_t tf_isochrons_point_count(const tf_isochrons* iso, size_t k) {
  return iso && k < iso->lines.size() ? iso->lines[k].points.size() : 0;
}

tf_status tf_isochrons_point(const tf_isochrons* iso, size_t k, size_t j, tf_vec3* X, double* t, uint32_t* orbit) {
  return guarded([&] {
    need(iso, "isochrons");
    need_index(k, iso->lines.size());
    need_index(j, iso->lines[k].points.size());
    const IsochronPoint& p = iso->lines[k].points[j];
    if (X) *X = to_c(p.X);
    if (t) *t = p.t;
    if (orbit) *orbit = p.orbit;
  });
}

void tf_ensemble_config_default(tf_ensemble_config* out) {
  if (!out) return;
  const EnsembleConfig c;
  *out = {};
  out->n_samples = c.n_samples;
  out->X0 = to_c(c.X0);
  out->t0 = c.t0;
  out->T = c.T;
  tf_noise_default(&out->noise);
  tf_integrator_config_default(&out->integrator);
  out->threads = c.threads;
}

tf_status tf_ensemble_config_validate(const tf_ensemble_config* cfg) {
  return guarded([&] {
    need(cfg, "cfg");
    from_c(cfg).validate();
  });
}

tf_status tf_run_ensemble(const tf_field* field, const tf_ensemble_config* cfg, double tau, tf_ensemble** out) {
  return guarded([&] {
    need(field, "field");
    need(cfg, "cfg");
    need(out, "out");
    *out = new tf_ensemble{run_ensemble(field->spec, from_c(cfg), tau)};
  });
}

void tf_ensemble_free(tf_ensemble* ens) { delete ens; }
size_t tf_ensemble_sample_count(const tf_ensemble* ens) { return ens ? ens->result.samples.size() : 0; }

tf_status tf_ensemble_sample(const tf_ensemble* ens, size_t i, uint64_t* index, double* phi_T, double* s_T) {
  return guarded([&] {
    need(ens, "ensemble");
    need_index(i, ens->result.samples.size());
    const PhaseSample& s = ens->result.samples[i];
    if (index) *index = s.sample_index;
    if (phi_T) *phi_T = s.phi_T;
    if (s_T) *s_T = s.s_T;
  });
}

size_t tf_ensemble_failure_count(const tf_ensemble* ens) { return ens ? ens->result.failures.size() : 0; }

tf_status tf_ensemble_failure(const tf_ensemble* ens, size_t i, uint64_t* index, tf_status* status,
                              const char** message) {
  return guarded([&] {
    need(ens, "ensemble");
    need_index(i, ens->result.failures.size());
    const SampleFailure& f = ens->result.failures[i];
    if (index) *index = f.sample_index;
    if (status) *status = to_status(f.code);
    if (message) *message = f.message.c_str();
  });
}

tf_status tf_histogram(const double* phases, size_t n, uint32_t n_bins, uint64_t* counts) {
  return guarded([&] {
    if (n > 0) need(phases, "phases");
    need(counts, "counts");
    const auto h = histogram(std::vector<double>(phases, phases + n), n_bins);
    std::copy(h.begin(), h.end(), counts);
  });
}

tf_status tf_ks_distance(const double* samples, size_t n, const tf_density* d, double* out) {
  return guarded([&] {
    need(samples, "samples");
    need(d, "density");
    need(out, "out");
    *out = ks_distance(std::vector<double>(samples, samples + n), d->density);
  });
}

void tf_hopf_field(double x, double y, double* xdot, double* ydot) {
  const PlanarState v = hopf_field({x, y});
  if (xdot) *xdot = v.x;
  if (ydot) *ydot = v.y;
}

tf_status tf_controlled_field(double t, double x, double y, const tf_control_params* control, double* xdot,
                              double* ydot) {
  return guarded([&] {
    need(control, "control");
    const PlanarState v = controlled_field(t, {x, y}, from_c(control));
    if (xdot) *xdot = v.x;
    if (ydot) *ydot = v.y;
  });
}

tf_status tf_verify_twofold_conditions(const tf_control_params* control, tf_twofold_conditions* out) {
  return guarded([&] {
    need(control, "control");
    need(out, "out");
    const TwoFoldConditionReport r = verify_twofold_conditions(from_c(control));
    *out = {r.left_fold_invisible, r.right_fold_invisible, r.generic, r.sign_condition, r.window_ordered,
            r.all_pass()};
  });
}

void tf_desync_config_default(tf_desync_config* out) {
  if (!out) return;
  const DesyncConfig c;
  tf_control_params_default(&out->control);
  out->n_osc = c.n_osc;
  out->epsilon = c.epsilon;
  out->seed = c.seed;
  out->t_start = c.t_start;
  out->t_end = c.t_end;
  out->x0 = c.X0.x;
  out->y0 = c.X0.y;
  out->dt = c.dt;
  out->sample_stride = c.sample_stride;
  out->threads = c.threads;
}

tf_status tf_desync_config_validate(const tf_desync_config* cfg) {
  return guarded([&] {
    need(cfg, "cfg");
    from_c(cfg).validate();
  });
}

tf_status tf_desync_experiment(const tf_desync_config* cfg, tf_desync_result** out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    *out = new tf_desync_result{desync_experiment(from_c(cfg))};
  });
}

void tf_desync_result_free(tf_desync_result* res) { delete res; }
size_t tf_desync_count(const tf_desync_result* res) { return res ? res->result.phase_after.size() : 0; }

tf_status tf_desync_phase(const tf_desync_result* res, size_t i, double* before, double* after) {
  return guarded([&] {
    need(res, "result");
    need_index(i, res->result.phase_after.size());
    if (before) *before = res->result.phase_before[i];
    if (after) *after = res->result.phase_after[i];
  });
}

void tf_desync_circular_variance(const tf_desync_result* res, double* before, double* after) {
  if (!res) return;
  if (before) *before = res->result.circular_variance_before;
  if (after) *after = res->result.circular_variance_after;
}

size_t tf_desync_path_length(const tf_desync_result* res, size_t i) {
  return res && i < res->result.paths.size() ? res->result.paths[i].size() : 0;
}

tf_status tf_desync_path_sample(const tf_desync_result* res, size_t i, size_t j, double* t, double* x, double* y) {
  return guarded([&] {
    need(res, "result");
    need_index(i, res->result.paths.size());
    need_index(j, res->result.paths[i].size());
    const Sample& s = res->result.paths[i][j];
    if (t) *t = s.t;
    if (x) *x = s.X.x;
    if (y) *y = s.X.y;
  });
}

tf_status tf_circular_variance(const double* phases, size_t n, double* out) {
  return guarded([&] {
    need(phases, "phases");
    need(out, "out");
    *out = circular_variance(std::vector<double>(phases, phases + n));
  });
}

}  // extern "C"
