// twofold command-line driver.  Every subcommand writes CSV files plus a
// manifest.txt into the output directory; the manifest doubles as a --config
// file that replays the run.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "twofold/twofold.h"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct RunError : std::runtime_error {
  RunError(int code, const std::string& msg) : std::runtime_error(msg), exit_code(code) {}
  int exit_code;
};

[[noreturn]] void invalid(const std::string& msg) { throw RunError(kExitValidation, msg); }

void check(tf_status s, const char* what) {
  if (s == TF_OK) return;
  throw RunError(kExitRuntime, std::string(what) + ": " + tf_status_string(s) + ": " + tf_last_error_message());
}

void check_valid(tf_status s, const char* what) {
  if (s == TF_OK) return;
  throw RunError(kExitValidation, std::string(what) + ": " + tf_last_error_message());
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string text(double v) { return num(v); }
std::string text(bool v) { return v ? "true" : "false"; }
std::string text(const std::string& v) { return v; }
template <class T>
  requires std::is_integral_v<T>
std::string text(T v) {
  return std::to_string(v);
}
std::string text(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + num(v[i]);
  return out + "]";
}

template <class T>
using Owned = std::unique_ptr<T, void (*)(T*)>;

template <class T>
Owned<T> own(T* p, void (*del)(T*)) {
  return Owned<T>(p, del);
}

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, const std::string& header) : path_(path) {
    f_ = std::fopen(path.c_str(), "w");
    if (!f_) throw RunError(kExitRuntime, "cannot open " + path.string() + " for writing");
    std::fprintf(f_, "%s\n", header.c_str());
  }
  CsvFile(const CsvFile&) = delete;
  CsvFile& operator=(const CsvFile&) = delete;
  ~CsvFile() {
    if (f_) std::fclose(f_);
  }

  template <class... Ts>
  void row(const Ts&... cols) {
    std::string line;
    ((line += (line.empty() ? "" : ",") + text(cols)), ...);
    std::fprintf(f_, "%s\n", line.c_str());
  }

 private:
  std::filesystem::path path_;
  std::FILE* f_ = nullptr;
};

// Options of one subcommand, remembered so the manifest can list their final values.
class Params {
 public:
  explicit Params(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* add(const std::string& name, T& value, const std::string& desc) {
    CLI::Option* opt = app_->add_option("--" + name, value, desc)->capture_default_str();
    entries_.emplace_back(name, [&value] { return text(value); });
    options_[name] = opt;
    return opt;
  }

  CLI::Option* flag(const std::string& name, bool& value, const std::string& desc) {
    CLI::Option* opt = app_->add_flag("--" + name, value, desc);
    entries_.emplace_back(name, [&value] { return text(value); });
    options_[name] = opt;
    return opt;
  }

  bool given(const std::string& name) const { return options_.at(name)->count() > 0; }

  // Preset values only fill options the user did not set.
  template <class T>
  void preset(const std::string& name, T& value, const T& preset_value) const {
    if (!given(name)) value = preset_value;
  }

  const std::vector<std::pair<std::string, std::function<std::string()>>>& entries() const { return entries_; }
  CLI::App* app() const { return app_; }

 private:
  CLI::App* app_;
  std::vector<std::pair<std::string, std::function<std::string()>>> entries_;
  std::map<std::string, CLI::Option*> options_;
};

struct Global {
  std::string out_dir;
  unsigned threads = 0;
};

std::filesystem::path prepare_out_dir(const Global& g) {
  std::filesystem::path dir = g.out_dir.empty() ? std::filesystem::path(".") : std::filesystem::path(g.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw RunError(kExitRuntime, "cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_manifest(const std::filesystem::path& dir, const Global& g, const Params& p, double wall_seconds,
                    const std::vector<std::pair<std::string, std::string>>& results) {
  std::FILE* f = std::fopen((dir / "manifest.txt").c_str(), "w");
  if (!f) throw RunError(kExitRuntime, "cannot write manifest in " + dir.string());
  std::fprintf(f, "# replay with: twofold --config manifest.txt %s\n", p.app()->get_name().c_str());
  std::fprintf(f, "program=twofold\ntwofold_version=%s\nsubcommand=%s\n", tf_version(), p.app()->get_name().c_str());
  std::fprintf(f, "wall_time_s=%s\n", num(wall_seconds).c_str());
  for (const auto& [k, v] : results) std::fprintf(f, "result_%s=%s\n", k.c_str(), v.c_str());
  std::fprintf(f, "threads=%u\nout-dir=\"%s\"\n", g.threads, dir.string().c_str());
  std::fprintf(f, "[%s]\n", p.app()->get_name().c_str());
  for (const auto& [k, v] : p.entries()) {
    const std::string value = v();
    const bool quoted = !value.empty() && value.front() != '[' && value != "true" && value != "false" &&
                        value.find_first_not_of("0123456789+-.eEinfa") != std::string::npos;
    std::fprintf(f, quoted ? "%s=\"%s\"\n" : "%s=%s\n", k.c_str(), value.c_str());
  }
  std::fclose(f);
}

tf_perturbation parse_perturbation(const std::string& s) {
  if (s == "none") return TF_PERTURBATION_NONE;
  if (s == "linear") return TF_PERTURBATION_LINEAR_DAMPING;
  return TF_PERTURBATION_CUBIC;
}

tf_vec3 vec3(const std::vector<double>& v) { return {v.at(0), v.at(1), v.at(2)}; }

double step_for_scale(const std::string& scale) { return scale == "paper" ? 1e-5 : 1e-4; }

// Shared inputs for every run that starts near the two-fold of the perturbed normal form.
struct NormalFormInputs {
  double v_minus = -0.5;
  double v_plus = -2.5;
  std::string perturbation = "linear";
  std::vector<double> x0{0.0, 1.0, 1.0};
  double T = 15.0;
  double dt = 1e-4;
  std::string preset;
  std::string scale = "ci";

  void add(Params& p, bool with_T) {
    p.add("vm", v_minus, "V- coefficient of the normal form");
    p.add("vp", v_plus, "V+ coefficient of the normal form");
    p.add("perturbation", perturbation, "higher order terms: none, linear or cubic")
        ->check(CLI::IsMember({"none", "linear", "cubic"}));
    p.add("x0", x0, "initial point x y z")->expected(3);
    if (with_T) p.add("T", T, "reference time T");
    p.add("dt", dt, "integrator step");
  }

  // fig1a/fig5a use the linear damping terms with T = 15, fig1b/fig5b the cubic terms with T = 40.
  void apply_figure(const Params& p, bool cubic) {
    p.preset("perturbation", perturbation, std::string(cubic ? "cubic" : "linear"));
    p.preset("vm", v_minus, -0.5);
    p.preset("vp", v_plus, -2.5);
    p.preset("x0", x0, std::vector<double>{0.0, 1.0, 1.0});
    p.preset("T", T, cubic ? 40.0 : 15.0);
  }
};

struct OrbitSetup {
  Owned<tf_field> field{nullptr, tf_field_free};
  Owned<tf_orbit> orbit{nullptr, tf_orbit_free};
  double tau = 0.0;
  double t0 = 0.0;  // arrival time at the two-fold from x0
  tf_integrator_config icfg{};
};

tf_integrator_config integrator_for(double dt) {
  tf_integrator_config c;
  tf_integrator_config_default(&c);
  c.dt = dt;
  c.event_tol = std::min(c.event_tol, 0.5 * dt);
  return c;
}

Owned<tf_field> make_normal_form(const NormalFormInputs& in) {
  tf_field* f = nullptr;
  check_valid(tf_field_normal_form(in.v_minus, in.v_plus, parse_perturbation(in.perturbation), &f), "field");
  return own(f, tf_field_free);
}

OrbitSetup setup_orbit(const NormalFormInputs& in, bool need_t0) {
  if (in.perturbation == "none") invalid("this subcommand needs a perturbation with a stable periodic orbit");
  OrbitSetup s;
  s.icfg = integrator_for(in.dt);
  check_valid(tf_integrator_config_validate(&s.icfg), "integrator");
  s.field = make_normal_form(in);

  tf_orbit* orb = nullptr;
  check(tf_find_periodic_orbit(s.field.get(), {0.0, 0.16, -0.55}, 0.0, &s.icfg, &orb), "periodic orbit");
  s.orbit = own(orb, tf_orbit_free);
  s.tau = tf_orbit_tau(orb);

  if (need_t0) {
    tf_integrator_config c = s.icfg;
    c.sample_stride = 0;
    tf_trajectory* tr = nullptr;
    check(tf_integrate_deterministic(s.field.get(), vec3(in.x0), 0.0, 1e3, &c, &tr), "deterministic run");
    auto traj = own(tr, tf_trajectory_free);
    const std::size_t n = tf_trajectory_event_count(tr);
    tf_event_kind kind{};
    tf_vec3 X{};
    if (n == 0 || tf_trajectory_event(tr, n - 1, &kind, &s.t0, &X) != TF_OK || kind != TF_EVENT_TWO_FOLD_REACHED)
      throw RunError(kExitRuntime, "the deterministic orbit from x0 does not reach the two-fold");
  }
  return s;
}

Owned<tf_return_table> build_table(const OrbitSetup& s, double t_max, double a_min, std::uint32_t n_seeds,
                                   unsigned threads) {
  tf_return_time_options o;
  tf_return_time_options_default(&o);
  o.t_max = t_max;
  o.a_min = a_min;
  o.n_seeds = n_seeds;
  o.threads = threads;
  tf_return_table* t = nullptr;
  check(tf_return_time_table(s.field.get(), &s.icfg, &o, &t), "return-time table");
  return own(t, tf_return_table_free);
}

struct Densities {
  Owned<tf_density> s_T{nullptr, tf_density_free};
  Owned<tf_density> phase{nullptr, tf_density_free};
};

Densities theoretical(const tf_return_table* table, double T, double t0, double tau, std::uint32_t depth,
                      std::uint32_t grid) {
  Densities d;
  tf_density* p = nullptr;
  check(tf_pdf_sT(table, T, t0, depth, grid, &p), "pdf of s_T");
  d.s_T = own(p, tf_density_free);
  check(tf_pdf_phase(p, T, tau, 721, &p), "pdf of phi_T");
  d.phase = own(p, tf_density_free);
  return d;
}

void write_density(const std::filesystem::path& path, const tf_density* d, const char* header, bool with_cdf) {
  CsvFile out(path, header);
  const std::size_t n = tf_density_knot_count(d);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0, p = 0.0;
    check(tf_density_knot(d, i, &s, &p), "density knot");
    if (with_cdf)
      out.row(s, p, tf_density_cdf(d, s));
    else
      out.row(s, p);
  }
}

using Results = std::vector<std::pair<std::string, std::string>>;

// ---- eigen ------------------------------------------------------------------

struct EigenCmd {
  double v_minus = -0.5;
  double v_plus = -2.5;

  void add(Params& p) {
    p.add("vm", v_minus, "V- coefficient");
    p.add("vp", v_plus, "V+ coefficient");
  }

  Results run(const Global&, const std::filesystem::path& dir) {
    tf_derived_constants c{};
    check_valid(tf_derived_constants_eval(v_minus, v_plus, &c), "parameters");
    CsvFile out(dir / "eigen.csv", "quantity,value");
    const std::pair<const char*, double> rows[] = {
        {"mu", c.mu}, {"gamma", c.gamma}, {"lambda", c.lambda}, {"alpha", c.alpha}, {"beta", c.beta}};
    std::printf("quantity,value\n");
    for (const auto& [k, v] : rows) {
      out.row(std::string(k), v);
      std::printf("%s,%s\n", k, num(v).c_str());
    }
    return {};
  }
};

// ---- simulate ---------------------------------------------------------------

struct SimulateCmd {
  NormalFormInputs nf;
  std::string field = "normal";
  double t0 = 0.0;
  double t_end = 15.0;
  double epsilon = 1e-3;
  std::uint64_t seed = 1;
  std::uint32_t stride = 10;

  void add(Params& p) {
    p.add("preset", nf.preset, "fig4a or fig4b sample solution")->check(CLI::IsMember({"", "fig4a", "fig4b"}));
    p.add("scale", nf.scale, "ci (dt 1e-4) or paper (dt 1e-5) for presets")->check(CLI::IsMember({"ci", "paper"}));
    p.add("field", field, "normal (perturbed two-fold normal form) or hopf (controlled Hopf oscillator)")
        ->check(CLI::IsMember({"normal", "hopf"}));
    nf.add(p, false);
    p.add("t0", t0, "start time");
    p.add("t-end", t_end, "end time");
    p.add("eps", epsilon, "noise amplitude (0 runs the deterministic integrator)");
    p.add("seed", seed, "noise seed");
    p.add("stride", stride, "keep every n-th step in trajectory.csv");
  }

  Results run(const Global&, const std::filesystem::path& dir, const Params& p) {
    if (!nf.preset.empty()) {
      const bool cubic = nf.preset == "fig4b";
      p.preset("field", field, std::string("normal"));
      p.preset("perturbation", nf.perturbation, std::string(cubic ? "cubic" : "linear"));
      p.preset("x0", nf.x0, std::vector<double>{0.0, 1.0, 1.0});
      p.preset("t-end", t_end, cubic ? 40.0 : 15.0);
      p.preset("eps", epsilon, 1e-3);
      p.preset("dt", nf.dt, step_for_scale(nf.scale));
    }
    tf_integrator_config icfg = integrator_for(nf.dt);
    icfg.sample_stride = stride;
    check_valid(tf_integrator_config_validate(&icfg), "integrator");
    if (!(t_end > t0)) invalid("t-end must exceed t0");
    if (!(epsilon >= 0.0)) invalid("eps must be >= 0");

    Owned<tf_field> f{nullptr, tf_field_free};
    if (field == "hopf") {
      tf_control_params c;
      tf_control_params_default(&c);
      tf_field* raw = nullptr;
      check_valid(tf_field_controlled_hopf(&c, &raw), "field");
      f = own(raw, tf_field_free);
    } else {
      f = make_normal_form(nf);
    }

    tf_trajectory* raw = nullptr;
    if (epsilon > 0.0) {
      tf_noise noise;
      tf_noise_default(&noise);
      noise.epsilon = epsilon;
      noise.seed = seed;
      if (field == "hopf") noise.D[8] = 0.0;
      check(tf_integrate_sde(f.get(), vec3(nf.x0), t0, t_end, &icfg, &noise, &raw), "simulation");
    } else {
      check(tf_integrate_deterministic(f.get(), vec3(nf.x0), t0, t_end, &icfg, &raw), "simulation");
    }
    auto tr = own(raw, tf_trajectory_free);

    {
      CsvFile out(dir / "trajectory.csv", "t,x,y,z");
      const std::size_t n = tf_trajectory_sample_count(raw);
      for (std::size_t i = 0; i < n; ++i) {
        double t = 0.0;
        tf_vec3 X{};
        check(tf_trajectory_sample(raw, i, &t, &X), "sample");
        out.row(t, X.x, X.y, X.z);
      }
    }
    CsvFile events(dir / "events.csv", "kind,t,x,y,z");
    const std::size_t n = tf_trajectory_event_count(raw);
    for (std::size_t i = 0; i < n; ++i) {
      tf_event_kind kind{};
      double t = 0.0;
      tf_vec3 X{};
      check(tf_trajectory_event(raw, i, &kind, &t, &X), "event");
      events.row(std::string(tf_event_kind_string(kind)), t, X.x, X.y, X.z);
    }
    return {{"samples", text(tf_trajectory_sample_count(raw))}, {"events", text(n)}};
  }
};

// ---- ensemble ---------------------------------------------------------------

struct EnsembleCmd {
  NormalFormInputs nf;
  std::uint64_t n_samples = 2000;
  double epsilon = 1e-3;
  std::uint64_t seed = 1;
  std::uint32_t depth = 10;
  std::uint32_t bins = 64;
  std::uint32_t grid = 4001;

  void add(Params& p) {
    p.add("preset", nf.preset, "fig1a (linear damping, T 15) or fig1b (cubic, T 40)")
        ->check(CLI::IsMember({"", "fig1a", "fig1b"}));
    p.add("scale", nf.scale, "ci (N 2000, dt 1e-4) or paper (N 1e4, dt 1e-5) for presets")
        ->check(CLI::IsMember({"ci", "paper"}));
    nf.add(p, true);
    p.add("n", n_samples, "number of sample paths");
    p.add("eps", epsilon, "noise amplitude");
    p.add("seed", seed, "master seed");
    p.add("depth", depth, "push-forward depth of the theoretical density");
    p.add("bins", bins, "histogram bins over [0, 2pi)");
    p.add("grid", grid, "grid points of the s_T density");
  }

  Results run(const Global& g, const std::filesystem::path& dir, const Params& p) {
    if (!nf.preset.empty()) {
      nf.apply_figure(p, nf.preset == "fig1b");
      p.preset("n", n_samples, std::uint64_t(nf.scale == "paper" ? 10000 : 2000));
      p.preset("dt", nf.dt, step_for_scale(nf.scale));
      p.preset("eps", epsilon, 1e-3);
      p.preset("depth", depth, std::uint32_t(10));
    }
    if (bins == 0) invalid("bins must be >= 1");
    if (depth == 0) invalid("depth must be >= 1");

    tf_ensemble_config ec;
    tf_ensemble_config_default(&ec);
    ec.n_samples = n_samples;
    ec.X0 = vec3(nf.x0);
    ec.T = nf.T;
    ec.noise.epsilon = epsilon;
    ec.noise.seed = seed;
    ec.integrator = integrator_for(nf.dt);
    ec.integrator.sample_stride = 0;
    ec.threads = g.threads;
    check_valid(tf_ensemble_config_validate(&ec), "ensemble configuration");
    if (!(epsilon > 0.0)) invalid("eps must be > 0 for an ensemble");

    OrbitSetup s = setup_orbit(nf, true);
    if (!(nf.T > s.t0)) invalid("T must exceed the two-fold arrival time " + num(s.t0));
    auto table = build_table(s, nf.T - s.t0 + 3.0 * s.tau, 1e-3, 24, g.threads);
    Densities d = theoretical(table.get(), nf.T, s.t0, s.tau, depth, grid);

    tf_ensemble* raw = nullptr;
    check(tf_run_ensemble(s.field.get(), &ec, s.tau, &raw), "ensemble");
    auto ens = own(raw, tf_ensemble_free);

    std::vector<double> phases;
    {
      CsvFile out(dir / "samples.csv", "index,s_T,phi_T");
      const std::size_t n = tf_ensemble_sample_count(raw);
      for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t idx = 0;
        double phi = 0.0, sT = 0.0;
        check(tf_ensemble_sample(raw, i, &idx, &phi, &sT), "ensemble sample");
        out.row(idx, sT, phi);
        phases.push_back(phi);
      }
    }
    const std::size_t n_fail = tf_ensemble_failure_count(raw);
    if (n_fail > 0) {
      CsvFile out(dir / "failures.csv", "index,status,message");
      for (std::size_t i = 0; i < n_fail; ++i) {
        std::uint64_t idx = 0;
        tf_status st{};
        const char* msg = nullptr;
        check(tf_ensemble_failure(raw, i, &idx, &st, &msg), "ensemble failure");
        out.row(idx, std::string(tf_status_string(st)), "\"" + std::string(msg ? msg : "") + "\"");
      }
    }
    if (phases.empty()) throw RunError(kExitRuntime, "every sample failed");

    std::vector<std::uint64_t> counts(bins);
    check(tf_histogram(phases.data(), phases.size(), bins, counts.data()), "histogram");
    const double width = kTwoPi / bins;
    const double total = static_cast<double>(phases.size());
    {
      CsvFile hist(dir / "histogram.csv", "bin_lo,bin_hi,count,density");
      CsvFile cmp(dir / "comparison.csv", "phi,empirical_density,theoretical_density,theoretical_bin_density");
      for (std::uint32_t b = 0; b < bins; ++b) {
        const double lo = b * width, hi = (b + 1) * width;
        const double emp = static_cast<double>(counts[b]) / (total * width);
        hist.row(lo, hi, counts[b], emp);
        const double mid = 0.5 * (lo + hi);
        const double bin_theory = (tf_density_cdf(d.phase.get(), hi) - tf_density_cdf(d.phase.get(), lo)) / width;
        cmp.row(mid, emp, tf_density_eval(d.phase.get(), mid), bin_theory);
      }
    }
    write_density(dir / "pdf_phase.csv", d.phase.get(), "phi,density,cdf", true);

    double ks = 0.0;
    check(tf_ks_distance(phases.data(), phases.size(), d.phase.get(), &ks), "KS distance");
    std::printf("ks_distance=%s\n", num(ks).c_str());
    std::printf("samples=%zu failures=%zu tau=%s t0=%s\n", phases.size(), n_fail, num(s.tau).c_str(),
                num(s.t0).c_str());
    return {{"ks_distance", num(ks)}, {"failures", text(n_fail)}, {"tau", num(s.tau)}, {"t0", num(s.t0)}};
  }
};

// ---- pdf --------------------------------------------------------------------

struct PdfCmd {
  NormalFormInputs nf;
  std::uint32_t depth = 10;
  std::uint32_t grid = 4001;
  double a_min = 1e-3;

  void add(Params& p) {
    p.add("preset", nf.preset, "fig1a or fig1b parameters")->check(CLI::IsMember({"", "fig1a", "fig1b"}));
    nf.add(p, true);
    p.add("depth", depth, "push-forward depth");
    p.add("grid", grid, "grid points of the s_T density");
    p.add("a-min", a_min, "smallest seed time of the return-time table");
  }

  Results run(const Global& g, const std::filesystem::path& dir, const Params& p) {
    if (!nf.preset.empty()) {
      nf.apply_figure(p, nf.preset == "fig1b");
      p.preset("depth", depth, std::uint32_t(10));
    }
    if (depth == 0) invalid("depth must be >= 1");
    if (!(a_min > 0.0)) invalid("a-min must be > 0");
    OrbitSetup s = setup_orbit(nf, true);
    if (!(nf.T > s.t0)) invalid("T must exceed the two-fold arrival time " + num(s.t0));
    auto table = build_table(s, nf.T - s.t0 + 3.0 * s.tau, a_min, 24, g.threads);
    Densities d = theoretical(table.get(), nf.T, s.t0, s.tau, depth, grid);
    write_density(dir / "pdf_phase.csv", d.phase.get(), "phi,density,cdf", true);
    write_density(dir / "pdf_sT.csv", d.s_T.get(), "s,density", false);
    return {{"tau", num(s.tau)}, {"t0", num(s.t0)}};
  }
};

// ---- return-time ------------------------------------------------------------

struct ReturnTimeCmd {
  NormalFormInputs nf;
  std::uint32_t depth = 10;
  double a_min = 1e-3;
  std::uint32_t n_seeds = 24;
  double t_max = 0.0;
  std::uint32_t points = 400;

  void add(Params& p) {
    p.add("preset", nf.preset, "fig5a (linear damping, T 15) or fig5b (cubic, T 40)")
        ->check(CLI::IsMember({"", "fig5a", "fig5b"}));
    nf.add(p, true);
    p.add("depth", depth, "n for the f^n curve");
    p.add("a-min", a_min, "smallest seed time");
    p.add("seeds", n_seeds, "seed orbits per geometric period");
    p.add("t-max", t_max, "largest tabulated time (0 picks T - t0 + 3 tau)");
    p.add("points", points, "log-spaced abscissae of the f^n curve");
  }

  Results run(const Global& g, const std::filesystem::path& dir, const Params& p) {
    if (!nf.preset.empty()) {
      nf.apply_figure(p, nf.preset == "fig5b");
      p.preset("depth", depth, std::uint32_t(10));
    }
    if (!(a_min > 0.0)) invalid("a-min must be > 0");
    if (n_seeds == 0 || points < 2) invalid("seeds must be >= 1 and points >= 2");
    if (t_max < 0.0) invalid("t-max must be >= 0");
    OrbitSetup s = setup_orbit(nf, true);
    const double span = t_max > 0.0 ? t_max : nf.T - s.t0 + 3.0 * s.tau;
    auto table = build_table(s, span, a_min, n_seeds, g.threads);

    const std::size_t n = tf_return_table_knot_count(table.get());
    {
      CsvFile out(dir / "return_time.csv", "a,f");
      for (std::size_t i = 0; i < n; ++i) {
        double a = 0.0, f = 0.0;
        check(tf_return_table_knot(table.get(), i, &a, &f), "knot");
        out.row(a, f);
      }
    }
    // f^n is plotted against ln a over the range where every iterate stays tabulated.
    CsvFile out(dir / "iterate.csv", "a,ln_a,f_n");
    double a_lo = 0.0, a_hi = 0.0, f_last = 0.0;
    check(tf_return_table_knot(table.get(), 0, &a_lo, &f_last), "knot");
    check(tf_return_table_knot(table.get(), n - 1, &a_hi, &f_last), "knot");
    std::size_t written = 0;
    for (std::uint32_t i = 0; i < points; ++i) {
      const double a = a_lo * std::pow(a_hi / a_lo, static_cast<double>(i) / (points - 1));
      double v = a;
      bool ok = true;
      for (std::uint32_t k = 0; k < depth && ok; ++k) ok = tf_return_table_eval(table.get(), v, &v) == TF_OK;
      if (!ok) break;
      out.row(a, std::log(a), v);
      ++written;
    }
    return {{"knots", text(n)}, {"iterate_points", text(written)}, {"tau", num(s.tau)}, {"t0", num(s.t0)}};
  }
};

// ---- isochrons --------------------------------------------------------------

struct IsochronsCmd {
  NormalFormInputs nf;
  std::uint32_t n_phases = 5;
  std::uint32_t n_orbits = 100;
  double a_min = 1e-3;
  double t_max = 40.0;

  void add(Params& p) {
    nf.add(p, false);
    p.add("phases", n_phases, "isochrons at phases 2 pi k / phases");
    p.add("orbits", n_orbits, "cone orbits sampled per isochron");
    p.add("a-min", a_min, "smallest seed time");
    p.add("t-max", t_max, "integration horizon of the cone orbits");
  }

  Results run(const Global& g, const std::filesystem::path& dir, const Params&) {
    if (n_phases == 0 || n_orbits == 0) invalid("phases and orbits must be >= 1");
    OrbitSetup s = setup_orbit(nf, false);
    std::vector<double> phases(n_phases);
    for (std::uint32_t k = 0; k < n_phases; ++k) phases[k] = kTwoPi * k / n_phases;
    tf_isochron_options o;
    tf_isochron_options_default(&o);
    o.n_orbits = n_orbits;
    o.a_min = a_min;
    o.t_max = t_max;
    o.threads = g.threads;
    tf_isochrons* raw = nullptr;
    check(tf_isochron_mesh(s.field.get(), s.orbit.get(), phases.data(), phases.size(), &s.icfg, &o, &raw),
          "isochrons");
    auto iso = own(raw, tf_isochrons_free);
    std::size_t total = 0;
    for (std::size_t k = 0; k < tf_isochrons_count(raw); ++k) {
      CsvFile out(dir / ("isochron_" + std::to_string(k) + ".csv"), "phase,orbit,t,x,y,z");
      const double phase = tf_isochrons_phase(raw, k);
      for (std::size_t j = 0; j < tf_isochrons_point_count(raw, k); ++j) {
        tf_vec3 X{};
        double t = 0.0;
        std::uint32_t orbit = 0;
        check(tf_isochrons_point(raw, k, j, &X, &t, &orbit), "isochron point");
        out.row(phase, orbit, t, X.x, X.y, X.z);
        ++total;
      }
    }
    CsvFile gamma(dir / "orbit.csv", "t,x,y,z");
    for (std::size_t i = 0; i < tf_orbit_sample_count(s.orbit.get()); ++i) {
      double t = 0.0;
      tf_vec3 X{};
      check(tf_orbit_sample(s.orbit.get(), i, &t, &X), "orbit sample");
      gamma.row(t, X.x, X.y, X.z);
    }
    return {{"points", text(total)}, {"tau", num(s.tau)}};
  }
};

// ---- contours ---------------------------------------------------------------

struct ContoursCmd {
  double v_minus = -0.5;
  double v_plus = -2.5;
  std::vector<double> x_range{-1.0, 1.0};
  std::vector<double> y_range{-1.0, 1.0};
  std::uint32_t nx = 201;
  std::uint32_t ny = 201;

  void add(Params& p) {
    p.add("vm", v_minus, "V- coefficient");
    p.add("vp", v_plus, "V+ coefficient");
    p.add("x-range", x_range, "x interval")->expected(2);
    p.add("y-range", y_range, "y interval")->expected(2);
    p.add("nx", nx, "grid points in x");
    p.add("ny", ny, "grid points in y");
  }

  Results run(const Global&, const std::filesystem::path& dir, const Params&) {
    if (nx < 2 || ny < 2) invalid("nx and ny must be >= 2");
    if (!(x_range[1] > x_range[0]) || !(y_range[1] > y_range[0])) invalid("ranges must be increasing");
    tf_derived_constants c{};
    check_valid(tf_derived_constants_eval(v_minus, v_plus, &c), "parameters");
    CsvFile out(dir / "contours.csv", "x,y,r,theta,degenerate");
    std::size_t degenerate_count = 0;
    for (std::uint32_t i = 0; i < nx; ++i) {
      const double x = x_range[0] + (x_range[1] - x_range[0]) * i / (nx - 1);
      for (std::uint32_t j = 0; j < ny; ++j) {
        const double y = y_range[0] + (y_range[1] - y_range[0]) * j / (ny - 1);
        double r = 0.0, theta = 0.0;
        int degenerate = 0;
        check(tf_to_polar(v_minus, v_plus, x, y, &r, &theta, &degenerate), "polar coordinates");
        out.row(x, y, r, theta, degenerate);
        degenerate_count += degenerate != 0;
      }
    }
    return {{"degenerate_points", text(degenerate_count)}};
  }
};

// ---- desync -----------------------------------------------------------------

struct DesyncCmd {
  tf_desync_config cfg{};
  std::vector<double> x0{1.0, 0.0};
  std::string preset;
  std::string scale = "ci";
  bool no_control = false;

  DesyncCmd() {
    tf_desync_config_default(&cfg);
    cfg.seed = 1;
    cfg.sample_stride = 100;
  }

  void add(Params& p) {
    p.add("preset", preset, "fig6 parameters")->check(CLI::IsMember({"", "fig6"}));
    p.add("scale", scale, "ci (dt 1e-4) or paper (dt 1e-5) for presets")->check(CLI::IsMember({"ci", "paper"}));
    p.add("a1", cfg.control.a1, "control gain a1");
    p.add("a2", cfg.control.a2, "control gain a2");
    p.add("a3", cfg.control.a3, "control gain a3");
    p.add("a4", cfg.control.a4, "control gain a4");
    p.add("t1", cfg.control.t1, "control switched on");
    p.add("t2", cfg.control.t2, "control switched off");
    p.add("t-start", cfg.t_start, "start time");
    p.add("t-end", cfg.t_end, "end time");
    p.add("eps", cfg.epsilon, "noise amplitude");
    p.add("n-osc", cfg.n_osc, "number of oscillators");
    p.add("seed", cfg.seed, "master seed");
    p.add("dt", cfg.dt, "Euler-Maruyama step");
    p.add("stride", cfg.sample_stride, "keep every n-th step in desync_paths.csv (0 keeps endpoints)");
    p.add("x0", x0, "initial point x y")->expected(2);
    p.flag("no-control", no_control, "run without the control (t1 = t2 = 0)");
  }

  Results run(const Global& g, const std::filesystem::path& dir, const Params& p) {
    if (!preset.empty()) {
      tf_desync_config d;
      tf_desync_config_default(&d);
      p.preset("a1", cfg.control.a1, d.control.a1);
      p.preset("a2", cfg.control.a2, d.control.a2);
      p.preset("a3", cfg.control.a3, d.control.a3);
      p.preset("a4", cfg.control.a4, d.control.a4);
      p.preset("t1", cfg.control.t1, d.control.t1);
      p.preset("t2", cfg.control.t2, d.control.t2);
      p.preset("t-start", cfg.t_start, -15.0);
      p.preset("t-end", cfg.t_end, 15.0);
      p.preset("eps", cfg.epsilon, 1e-3);
      p.preset("n-osc", cfg.n_osc, std::uint32_t(5));
      p.preset("x0", x0, std::vector<double>{1.0, 0.0});
      p.preset("dt", cfg.dt, step_for_scale(scale));
    }
    if (no_control) cfg.control.t1 = cfg.control.t2 = 0.0;
    cfg.x0 = x0[0];
    cfg.y0 = x0[1];
    cfg.threads = g.threads;
    check_valid(tf_desync_config_validate(&cfg), "desync configuration");
    tf_twofold_conditions cond{};
    check(tf_verify_twofold_conditions(&cfg.control, &cond), "two-fold conditions");
    if (!no_control && !cond.all_pass)
      std::fprintf(stderr, "warning: gains violate a2 < a1 < a3 < a4; the control may not create a two-fold\n");

    tf_desync_result* raw = nullptr;
    check(tf_desync_experiment(&cfg, &raw), "desync experiment");
    auto res = own(raw, tf_desync_result_free);
    const std::size_t n = tf_desync_count(raw);
    {
      CsvFile paths(dir / "desync_paths.csv", "oscillator,t,x,y");
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < tf_desync_path_length(raw, i); ++j) {
          double t = 0.0, x = 0.0, y = 0.0;
          check(tf_desync_path_sample(raw, i, j, &t, &x, &y), "path sample");
          paths.row(i, t, x, y);
        }
    }
    {
      CsvFile summary(dir / "desync_summary.csv", "oscillator,phase_before,phase_after");
      for (std::size_t i = 0; i < n; ++i) {
        double before = 0.0, after = 0.0;
        check(tf_desync_phase(raw, i, &before, &after), "phase");
        summary.row(i, before, after);
      }
    }
    double cv_before = 0.0, cv_after = 0.0;
    tf_desync_circular_variance(raw, &cv_before, &cv_after);
    {
      CsvFile out(dir / "desync_variance.csv", "circular_variance_before,circular_variance_after");
      out.row(cv_before, cv_after);
    }
    std::printf("circular_variance_before=%s\ncircular_variance_after=%s\n", num(cv_before).c_str(),
                num(cv_after).c_str());
    return {{"circular_variance_before", num(cv_before)}, {"circular_variance_after", num(cv_after)}};
  }
};

template <class Cmd>
void attach(CLI::App& app, const char* name, const char* desc, Global& g, std::function<int()>& action,
            std::vector<std::unique_ptr<Params>>& keep, std::vector<std::shared_ptr<void>>& cmds) {
  auto cmd = std::make_shared<Cmd>();
  CLI::App* sub = app.add_subcommand(name, desc);
  auto params = std::make_unique<Params>(sub);
  cmd->add(*params);
  Params* pp = params.get();
  keep.push_back(std::move(params));
  cmds.push_back(cmd);
  sub->callback([&g, &action, cmd, pp] {
    action = [&g, cmd, pp] {
      const auto start = std::chrono::steady_clock::now();
      const std::filesystem::path dir = prepare_out_dir(g);
      Results results;
      if constexpr (requires { cmd->run(g, dir, *pp); })
        results = cmd->run(g, dir, *pp);
      else
        results = cmd->run(g, dir);
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      write_manifest(dir, g, *pp, wall, results);
      return 0;
    };
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and phase statistics of flows through an invisible two-fold", "twofold"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(tf_version()));
  Global g;
  if (const char* env = std::getenv("TWOFOLD_OUT_DIR")) g.out_dir = env;
  app.add_option("--out-dir", g.out_dir, "output directory (default $TWOFOLD_OUT_DIR or .)");
  app.add_option("--threads", g.threads, "worker threads (0 uses all cores)");
  app.set_config("--config", "", "read option values from a key=value file such as a manifest");

  std::function<int()> action;
  std::vector<std::unique_ptr<Params>> keep;
  std::vector<std::shared_ptr<void>> cmds;
  attach<EigenCmd>(app, "eigen", "derived constants of the return map", g, action, keep, cmds);
  attach<SimulateCmd>(app, "simulate", "one trajectory with events", g, action, keep, cmds);
  attach<EnsembleCmd>(app, "ensemble", "Monte-Carlo phase distribution against theory", g, action, keep, cmds);
  attach<PdfCmd>(app, "pdf", "theoretical density of the phase", g, action, keep, cmds);
  attach<ReturnTimeCmd>(app, "return-time", "tabulated return-time function and its iterate", g, action, keep,
                        cmds);
  attach<IsochronsCmd>(app, "isochrons", "isochrons on the unstable cone", g, action, keep, cmds);
  attach<ContoursCmd>(app, "contours", "polar coordinates r and theta on a grid", g, action, keep, cmds);
  attach<DesyncCmd>(app, "desync", "control-induced desynchronisation of Hopf oscillators", g, action, keep, cmds);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }
  try {
    return action ? action() : 0;
  } catch (const RunError& e) {
    std::fprintf(stderr, "twofold: %s\n", e.what());
    return e.exit_code;
  } catch (const CLI::Error& e) {
    std::fprintf(stderr, "twofold: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "twofold: %s\n", e.what());
    return kExitRuntime;
  }
}
