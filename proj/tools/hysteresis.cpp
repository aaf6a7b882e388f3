// Command-line front end: one subcommand per experiment, JSON config in,
// CSV / JSON / PGM out, plus a manifest.json for every run.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "hysteresis/basin.hpp"
#include "hysteresis/io.hpp"
#include "hysteresis/linear.hpp"
#include "hysteresis/response.hpp"
#include "hysteresis/series.hpp"
#include "hysteresis/trajectory.hpp"

#ifndef HYSTERESIS_VERSION
#define HYSTERESIS_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace hysteresis;

namespace {

/// Bad configuration; reported with exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return fmt::format("line {}, column {}", line, column);
}

json load_config(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  try {
    json j = json::parse(text);
    if (!j.is_object()) throw ConfigError(path + ": top level must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    // e.byte is one past the offending character
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    throw ConfigError(fmt::format("{}: {}: {}", path, line_column(text, at), e.what()));
  }
}

/// defaults <- top-level config keys <- config[subcommand] <- flags
json resolve(const json& defaults, const json& file, const std::string& sub, const json& flags) {
  json out = defaults;
  json top = file;
  for (const char* name : {"simulate", "attractor", "response", "escape", "basin", "blowup"})
    top.erase(name);
  out.merge_patch(top);
  if (file.contains(sub)) out.merge_patch(file.at(sub));
  if (!flags.is_null()) out.merge_patch(flags);
  return out;
}

template <typename T>
T get(const json& cfg, const std::string& key) {
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config field '{}': {}", key, e.what()));
  }
}

template <typename T>
std::vector<T> get_list(const json& cfg, const std::string& key) {
  const json& v = cfg.at(key);
  if (v.is_array()) return get<std::vector<T>>(cfg, key);
  return {get<T>(cfg, key)};
}

ModelSpec model_of(const json& cfg) {
  try {
    return model_from_json(cfg);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

IntegratorConfig integrator_of(const json& cfg) {
  IntegratorConfig ic;
  ic.rtol = get<double>(cfg, "rtol");
  ic.atol = get<double>(cfg, "atol");
  if (cfg.contains("max_step") && !cfg.at("max_step").is_null()) ic.max_step = get<double>(cfg, "max_step");
  ic.blowup_threshold = get<double>(cfg, "blowup_threshold");
  if (cfg.contains("t_end")) ic.t_end = get<double>(cfg, "t_end");
  if (cfg.contains("dt")) ic.output_step = get<double>(cfg, "dt");
  try {
    ic.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return ic;
}

json integrator_defaults() {
  return {{"rtol", 1e-9}, {"atol", 1e-12}, {"max_step", nullptr}, {"blowup_threshold", 1e6}};
}

/// Registers `--name` so that, when given, it lands in flags at `pointer`.
template <typename T>
void flag(CLI::App* app, json& flags, const std::string& name, const std::string& pointer,
          const std::string& help) {
  app->add_option_function<T>(
      name, [&flags, pointer](const T& value) { flags[json::json_pointer(pointer)] = value; }, help);
}

void model_flags(CLI::App* app, json& flags) {
  flag<std::string>(app, flags, "--model", "/variant", "model variant");
  flag<double>(app, flags, "--M", "/M", "mass");
  flag<double>(app, flags, "--k", "/k", "stiffness");
  flag<double>(app, flags, "--h", "/h", "hysteretic coefficient (Bishop)");
  flag<double>(app, flags, "--mu", "/mu", "loss factor h/k (Bishop)");
  flag<double>(app, flags, "--c", "/c", "damping coefficient (Reid)");
  flag<double>(app, flags, "--epsilon", "/epsilon", "nonlinearity");
  flag<double>(app, flags, "--f", "/forcing/f", "forcing amplitude, real part");
  flag<double>(app, flags, "--g", "/forcing/g", "forcing amplitude, imaginary part (Bishop)");
  flag<double>(app, flags, "--omega", "/forcing/omega", "forcing frequency");
}

void integrator_flags(CLI::App* app, json& flags) {
  flag<double>(app, flags, "--rtol", "/rtol", "relative tolerance");
  flag<double>(app, flags, "--atol", "/atol", "absolute tolerance");
  flag<double>(app, flags, "--max-step", "/max_step", "largest step");
  flag<double>(app, flags, "--blowup-threshold", "/blowup_threshold", "|x| treated as blow-up");
}

struct Context {
  fs::path out_dir;
  unsigned threads = 1;
  RunManifest manifest;
  bool partial_failure = false;

  void write(const std::string& name, const std::string& content) {
    write_output(out_dir, name, content, manifest);
  }
};

// simulate ----------------------------------------------------------------

json simulate_defaults() {
  json d = integrator_defaults();
  d.update({{"variant", "bishop-linear"}, {"t_end", 100.0}, {"dt", 0.1}, {"start", "state"}});
  return d;
}

void run_simulate(const json& cfg, Context& ctx) {
  const ModelSpec spec = model_of(cfg);
  const IntegratorConfig ic = integrator_of(cfg);
  const bool by_phase = cfg.contains("alpha") || cfg.contains("theta");
  const std::string start = get<std::string>(cfg, "start");

  if (is_reid(spec.variant)) {
    if (by_phase) throw ConfigError("Reid models take --x0/--v0, not --alpha/--theta");
    const ReidState s0{cfg.value("x0", 0.0), cfg.value("v0", 0.0)};
    const ReidTrajectory traj = integrate_reid(spec, s0, ic);
    ctx.write("trajectory.csv", trajectory_csv(traj));
    ctx.write("trajectory.json", trajectory_sidecar(traj).dump(2) + "\n");
    return;
  }

  const BishopParams& p = spec.bishop();
  BishopState s0;
  std::function<Complex(double)> reference;
  if (start == "attractor") {
    if (spec.variant == Variant::BishopLinear) {
      const Complex b = particular_coefficient(p, spec.forcing_amplitude(), spec.forcing_omega());
      s0 = {b, Complex(0.0, spec.forcing_omega()) * b};
      reference = [b, w = spec.forcing_omega()](double t) { return b * std::polar(1.0, w * t); };
    } else {
      auto a = std::make_shared<FourierAttractor>(build_attractor(spec, cfg.value("terms", 150)));
      const SeriesState s = evaluate(*a, 0.0);
      s0 = {s.x, s.v};
      reference = [a](double t) { return evaluate(*a, t).x; };
    }
  } else if (start != "state") {
    throw ConfigError("start must be 'state' or 'attractor'");
  } else if (by_phase) {
    const double alpha = cfg.value("alpha", 0.0), theta = cfg.value("theta", 0.0);
    if (spec.variant == Variant::BishopLinear && spec.forcing) {
      const auto sol = ForcedSolution::from_amplitude_phase(p, spec.forcing_amplitude(),
                                                            spec.forcing_omega(), alpha, theta);
      s0 = sol.state(0.0);
      reference = [sol](double t) { return sol.state(t).x; };
    } else {
      const auto sol = FreeSolution::from_amplitude_phase(p, alpha, theta);
      s0 = sol.state(0.0);
      if (spec.variant == Variant::BishopLinear) reference = [sol](double t) { return sol.state(t).x; };
    }
  } else {
    s0 = {Complex(cfg.value("x0", 0.0), cfg.value("x0_im", 0.0)),
          Complex(cfg.value("v0", 0.0), cfg.value("v0_im", 0.0))};
    if (spec.variant == Variant::BishopLinear) {
      try {
        if (spec.forcing) {
          const auto sol = ForcedSolution::from_initial_state(p, spec.forcing_amplitude(),
                                                              spec.forcing_omega(), s0.x, s0.v);
          reference = [sol](double t) { return sol.state(t).x; };
        } else {
          const auto sol = FreeSolution::from_initial_state(p, s0.x, s0.v);
          reference = [sol](double t) { return sol.state(t).x; };
        }
      } catch (const DomainError&) {
        // off the decaying branch: no bounded closed form to compare with
      }
    }
  }

  const BishopTrajectory traj = integrate(spec, s0, ic);
  std::vector<double> error;
  if (reference)
    for (std::size_t i = 0; i < traj.size(); ++i)
      error.push_back(std::abs(Complex(traj.states[i][0], traj.states[i][1]) - reference(traj.times[i])));
  ctx.write("trajectory.csv", trajectory_csv(traj, error));
  json sidecar = trajectory_sidecar(traj);
  sidecar["reference"] = static_cast<bool>(reference);
  ctx.write("trajectory.json", sidecar.dump(2) + "\n");
}

// attractor -----------------------------------------------------------------

json attractor_defaults() {
  return {{"variant", "bishop-quadratic"}, {"k", 1.0}, {"mu", 0.05}, {"epsilon", 0.1},
          {"forcing", {{"f", 1.0}, {"g", 0.0}, {"omega", 0.75}}}, {"terms", 150},
          {"residual_samples", 4096}};
}

void run_attractor(const json& cfg, Context& ctx) {
  const ModelSpec spec = model_of(cfg);
  const FourierAttractor a = build_attractor(spec, get<std::size_t>(cfg, "terms"));
  std::string table = "k,harmonic,re_B,im_B,abs_B\n";
  for (std::size_t k = 0; k < a.size(); ++k) {
    const Complex b = a.coefficients[k];
    table += fmt::format("{},{},{:.17g},{:.17g},{:.17g}\n", k, a.harmonic(k), b.real(), b.imag(), std::abs(b));
  }
  ctx.write("coefficients.csv", table);
  const ConvergenceReport report = convergence_report(a);
  const double residual = max_residual(a, 0.0, a.period(), get<std::size_t>(cfg, "residual_samples"));
  json conv = {{"slope", report.slope ? json(*report.slope) : json(nullptr)},
               {"tail_bound", report.tail_bound},
               {"head_sum", report.head_sum},
               {"accepted", report.accepted},
               {"max_residual_one_period", residual},
               {"terms", a.size()}};
  ctx.write("convergence.json", conv.dump(2) + "\n");
  ctx.write("attractor.json", to_json(a).dump(2) + "\n");
}

// response ------------------------------------------------------------------

json response_defaults() {
  json d = integrator_defaults();
  d.update({{"variant", "bishop-quadratic"}, {"k", 1.0}, {"mu", 0.05}, {"epsilon", 0.0},
            {"forcing", {{"f", 1.0}, {"g", 0.0}, {"omega", 1.0}}}, {"r_lo", 0.05}, {"r_hi", 3.0},
            {"samples", 400}, {"method", "auto"}, {"terms", 150}, {"settle_periods", 5},
            {"transient_periods", 100}, {"samples_per_period", 1024}});
  return d;
}

ResponseMethod method_of(const std::string& name) {
  static const std::map<std::string, ResponseMethod> names{
      {"auto", ResponseMethod::Auto},
      {"closed-form", ResponseMethod::ClosedForm},
      {"fourier-series", ResponseMethod::FourierSeries},
      {"time-integration", ResponseMethod::TimeIntegration}};
  const auto it = names.find(name);
  if (it == names.end()) throw ConfigError("unknown response method '" + name + "'");
  return it->second;
}

void run_response(const json& cfg, Context& ctx) {
  SweepConfig sc;
  sc.r_lo = get<double>(cfg, "r_lo");
  sc.r_hi = get<double>(cfg, "r_hi");
  sc.samples = get<int>(cfg, "samples");
  sc.method = method_of(get<std::string>(cfg, "method"));
  sc.terms = get<std::size_t>(cfg, "terms");
  sc.settle_periods = get<int>(cfg, "settle_periods");
  sc.reid_transient_periods = get<int>(cfg, "transient_periods");
  sc.samples_per_period = get<int>(cfg, "samples_per_period");
  sc.integrator = integrator_of(cfg);
  sc.threads = ctx.threads;

  bool bishop = true;
  try {
    bishop = is_bishop(variant_from_string(get<std::string>(cfg, "variant")));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  const std::vector<double> second = bishop ? get_list<double>(cfg, "mu") : get_list<double>(cfg, "k");
  const std::vector<double> eps = get_list<double>(cfg, "epsilon");
  const std::string second_name = bishop ? "mu" : "k";

  std::string combined = fmt::format("variant,{},epsilon,omega,r,n,eta,n_fundamental,source\n", second_name);
  for (double s : second) {
    for (double e : eps) {
      json one = cfg;
      one[second_name] = s;
      if (bishop) one.erase("h");
      one["epsilon"] = e;
      const ModelSpec spec = model_of(one);
      const auto points = response_sweep(spec, sc);
      ctx.write(fmt::format("response_{}{}_eps{}.csv", second_name, s, e), response_csv(points));
      for (const ResponsePoint& p : points)
        combined += fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{}{}\n",
                                to_string(spec.variant), s, e, p.omega, p.ratio, p.magnification,
                                p.phase, p.fundamental, to_string(p.source), p.flagged ? "*" : "");
    }
  }
  ctx.write("response_all.csv", combined);
}

// escape --------------------------------------------------------------------

json escape_defaults() {
  json d = integrator_defaults();
  d.update({{"epsilon", {0.05, 0.1, 0.2, 0.3}}, {"omega", {0.8, 1.2}}, {"mu", {0.1, 0.4}},
            {"f_lo", 0.0}, {"f_hi", 20.0}, {"tolerance", 1e-3}, {"horizon_periods", 500.0}});
  return d;
}

void run_escape(const json& cfg, Context& ctx) {
  EscapeSearchConfig sc;
  sc.f_lo = get<double>(cfg, "f_lo");
  sc.f_hi = get<double>(cfg, "f_hi");
  sc.tolerance = get<double>(cfg, "tolerance");
  sc.horizon_periods = get<double>(cfg, "horizon_periods");
  sc.integrator = integrator_of(cfg);

  std::vector<EscapeResult> results;
  std::string probes = "epsilon,omega,mu,F,verdict,t_escape,t_escape_tight,start\n";
  json items = json::array();
  for (double omega : get_list<double>(cfg, "omega"))
    for (double mu : get_list<double>(cfg, "mu"))
      for (double eps : get_list<double>(cfg, "epsilon")) {
        json item = {{"epsilon", eps}, {"omega", omega}, {"mu", mu}};
        try {
          EscapeResult r = critical_amplitude(eps, omega, mu, sc);
          for (const ProbeRecord& p : r.probes) {
            auto opt = [](const std::optional<double>& t) { return t ? fmt::format("{:.17g}", *t) : std::string(); };
            probes += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{},{},{},{}\n", eps, omega, mu,
                                  p.amplitude, p.verdict == ProbeVerdict::Escaped ? "escaped" : "bounded",
                                  opt(p.escape_time), opt(p.escape_time_tight), p.start);
          }
          item["status"] = "ok";
          results.push_back(std::move(r));
        } catch (const std::exception& e) {
          item["status"] = "failed";
          item["error"] = e.what();
          ctx.partial_failure = true;
          std::cerr << "escape: " << e.what() << "\n";
        }
        items.push_back(item);
      }
  ctx.write("escape.csv", escape_csv(results));
  ctx.write("escape_probes.csv", probes);
  ctx.manifest.status["items"] = items;
}

// basin ---------------------------------------------------------------------

json basin_defaults() {
  json d = integrator_defaults();
  d.update({{"variant", "reid-cubic"}, {"c", 0.01}, {"k", 0.3}, {"epsilon", 0.1},
            {"forcing", {{"f", 1.1}, {"omega", 1.3}}}, {"x_lo", -3.0}, {"x_hi", 3.0},
            {"v_lo", -3.0}, {"v_hi", 1.0}, {"nx", 200}, {"ny", 200}, {"rho", 1e-4},
            {"transient", 300}, {"p_max", 12}, {"consecutive", 20}, {"max_strobes", 6000}});
  return d;
}

void run_basin(const json& cfg, Context& ctx) {
  const ModelSpec spec = model_of(cfg);
  GridConfig grid;
  grid.x_lo = get<double>(cfg, "x_lo");
  grid.x_hi = get<double>(cfg, "x_hi");
  grid.v_lo = get<double>(cfg, "v_lo");
  grid.v_hi = get<double>(cfg, "v_hi");
  grid.nx = get<int>(cfg, "nx");
  grid.ny = get<int>(cfg, "ny");
  StrobeConfig strobe;
  strobe.match_radius = get<double>(cfg, "rho");
  strobe.transient = get<int>(cfg, "transient");
  strobe.p_max = get<int>(cfg, "p_max");
  strobe.consecutive = get<int>(cfg, "consecutive");
  strobe.max_strobes = get<int>(cfg, "max_strobes");
  try {
    grid.validate();
    strobe.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const BasinGrid basin = build_basin(spec, grid, integrator_of(cfg), strobe, ctx.threads);
  ctx.write("basin.csv", basin_csv(basin));
  ctx.write("catalog.json", catalog_json(basin, strobe).dump(2) + "\n");
  ctx.write("basin.pgm", basin_pgm(basin));
}

// blowup --------------------------------------------------------------------

json blowup_defaults() {
  json d = integrator_defaults();
  d.update({{"variant", "bishop-linear"}, {"k", 1.0}, {"mu", {0.02, 0.05, 0.1, 0.2, 0.5}},
            {"rtol", {1e-6, 1e-8, 1e-10, 1e-12}}, {"forcing", {{"f", 0.5}, {"g", 0.5}, {"omega", 0.5}}},
            {"alpha", 10.5}, {"theta", 0.3}, {"t_end", 20000.0}, {"dt", 0.1}});
  return d;
}

void run_blowup(const json& cfg, Context& ctx) {
  const std::vector<double> mus = get_list<double>(cfg, "mu");
  const std::vector<double> rtols = get_list<double>(cfg, "rtol");
  std::string table = "mu,rtol,t_d\n";
  json fits = json::array();
  std::map<double, std::vector<std::pair<double, double>>> by_rtol;
  for (double mu : mus) {
    for (double rtol : rtols) {
      json one = cfg;
      one["mu"] = mu;
      one["rtol"] = rtol;
      one["atol"] = rtol * 1e-3;
      one.erase("h");
      const ModelSpec spec = model_of(one);
      const IntegratorConfig ic = integrator_of(one);
      BishopState s0;
      if (spec.forcing)
        s0 = ForcedSolution::from_amplitude_phase(spec.bishop(), spec.forcing_amplitude(),
                                                  spec.forcing_omega(), get<double>(cfg, "alpha"),
                                                  get<double>(cfg, "theta")).state(0.0);
      else
        s0 = FreeSolution::from_amplitude_phase(spec.bishop(), get<double>(cfg, "alpha"),
                                                get<double>(cfg, "theta")).state(0.0);
      const auto td = measure_blowup_time(spec, s0, ic);
      table += fmt::format("{:.17g},{:.17g},{}\n", mu, rtol, td ? fmt::format("{:.17g}", *td) : "");
      if (td && mu > 0.0) by_rtol[rtol].push_back({std::log(mu), std::log(*td)});
    }
  }
  for (const auto& [rtol, pts] : by_rtol) {
    if (pts.size() < 2) continue;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (const auto& [x, y] : pts) {
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      syy += y * y;
    }
    const double n = static_cast<double>(pts.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double r = (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
    fits.push_back({{"rtol", rtol}, {"exponent", slope}, {"r_squared", r * r}, {"points", pts.size()}});
  }
  ctx.write("blowup.csv", table);
  ctx.write("blowup_fit.json", json{{"power_law", fits}}.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hysteretic oscillator experiments"};
  app.require_subcommand(1);
  // -h would clash with the hysteretic coefficient flag
  app.set_help_flag("--help", "print this help and exit");
  app.fallthrough();  // global flags may follow the subcommand
  std::string config_path;
  std::string out_dir = "out";
  unsigned threads = 1;
  long seed = 0;
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--out-dir", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads (0 = all cores)");
  app.add_option("--seed", seed, "reserved; every computation is deterministic");

  json flags_sim, flags_attr, flags_resp, flags_esc, flags_basin, flags_blow;
  auto* sim = app.add_subcommand("simulate", "integrate one trajectory");
  model_flags(sim, flags_sim);
  integrator_flags(sim, flags_sim);
  flag<double>(sim, flags_sim, "--alpha", "/alpha", "initial amplitude (Bishop)");
  flag<double>(sim, flags_sim, "--theta", "/theta", "initial phase (Bishop)");
  flag<double>(sim, flags_sim, "--x0", "/x0", "initial displacement (real part)");
  flag<double>(sim, flags_sim, "--v0", "/v0", "initial velocity (real part)");
  flag<double>(sim, flags_sim, "--x0-im", "/x0_im", "initial displacement, imaginary part");
  flag<double>(sim, flags_sim, "--v0-im", "/v0_im", "initial velocity, imaginary part");
  flag<double>(sim, flags_sim, "--t-end", "/t_end", "horizon");
  flag<double>(sim, flags_sim, "--dt", "/dt", "output sampling step");
  flag<std::string>(sim, flags_sim, "--start", "/start", "'state' or 'attractor'");

  auto* attr = app.add_subcommand("attractor", "Fourier coefficients and residual");
  model_flags(attr, flags_attr);
  flag<std::size_t>(attr, flags_attr, "--terms", "/terms", "number of coefficients");

  auto* resp = app.add_subcommand("response", "amplitude and phase response curves");
  model_flags(resp, flags_resp);
  integrator_flags(resp, flags_resp);
  flag<std::vector<double>>(resp, flags_resp, "--mu-list", "/mu", "loss factors (Bishop)");
  flag<std::vector<double>>(resp, flags_resp, "--k-list", "/k", "stiffnesses (Reid)");
  flag<std::vector<double>>(resp, flags_resp, "--eps-list", "/epsilon", "nonlinearities");
  flag<double>(resp, flags_resp, "--r-lo", "/r_lo", "lowest frequency ratio");
  flag<double>(resp, flags_resp, "--r-hi", "/r_hi", "highest frequency ratio");
  flag<int>(resp, flags_resp, "--samples", "/samples", "points per sweep");
  flag<std::string>(resp, flags_resp, "--method", "/method",
                    "auto | closed-form | fourier-series | time-integration");

  auto* esc = app.add_subcommand("escape", "critical forcing amplitude scan");
  integrator_flags(esc, flags_esc);
  flag<std::vector<double>>(esc, flags_esc, "--eps-list", "/epsilon", "nonlinearities");
  flag<std::vector<double>>(esc, flags_esc, "--omega-list", "/omega", "forcing frequencies");
  flag<std::vector<double>>(esc, flags_esc, "--mu-list", "/mu", "loss factors");
  flag<double>(esc, flags_esc, "--f-lo", "/f_lo", "lower bracket");
  flag<double>(esc, flags_esc, "--f-hi", "/f_hi", "upper bracket");
  flag<double>(esc, flags_esc, "--tolerance", "/tolerance", "bracket width");

  auto* bas = app.add_subcommand("basin", "basins of attraction of a Reid model");
  model_flags(bas, flags_basin);
  integrator_flags(bas, flags_basin);
  int resolution = 0;
  bool paper_scale = false;
  bas->add_option("--resolution", resolution, "grid cells per side (default 200)");
  bas->add_flag("--paper-scale", paper_scale, "500x500 grid (long run)");
  flag<int>(bas, flags_basin, "--transient", "/transient", "strobes discarded");
  flag<int>(bas, flags_basin, "--p-max", "/p_max", "largest period multiple");
  flag<double>(bas, flags_basin, "--rho", "/rho", "match radius");

  auto* blow = app.add_subcommand("blowup", "spurious blow-up time vs tolerance and mu");
  integrator_flags(blow, flags_blow);
  flag<std::vector<double>>(blow, flags_blow, "--mu-list", "/mu", "loss factors");
  flag<std::vector<double>>(blow, flags_blow, "--rtol-list", "/rtol", "tolerance ladder");
  flag<double>(blow, flags_blow, "--t-end", "/t_end", "horizon");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const auto started = std::chrono::steady_clock::now();
  Context ctx;
  ctx.out_dir = out_dir;
  ctx.threads = threads;
  ctx.manifest.version = HYSTERESIS_VERSION;
  try {
    const json file = config_path.empty() ? json::object() : load_config(config_path);
    json resolved;
    if (*sim) {
      ctx.manifest.subcommand = "simulate";
      resolved = resolve(simulate_defaults(), file, "simulate", flags_sim);
      ctx.manifest.config = resolved;
      run_simulate(resolved, ctx);
    } else if (*attr) {
      ctx.manifest.subcommand = "attractor";
      resolved = resolve(attractor_defaults(), file, "attractor", flags_attr);
      ctx.manifest.config = resolved;
      run_attractor(resolved, ctx);
    } else if (*resp) {
      ctx.manifest.subcommand = "response";
      resolved = resolve(response_defaults(), file, "response", flags_resp);
      ctx.manifest.config = resolved;
      run_response(resolved, ctx);
    } else if (*esc) {
      ctx.manifest.subcommand = "escape";
      resolved = resolve(escape_defaults(), file, "escape", flags_esc);
      ctx.manifest.config = resolved;
      run_escape(resolved, ctx);
    } else if (*bas) {
      ctx.manifest.subcommand = "basin";
      if (paper_scale) resolution = 500;
      if (resolution > 0) flags_basin["nx"] = flags_basin["ny"] = resolution;
      resolved = resolve(basin_defaults(), file, "basin", flags_basin);
      ctx.manifest.config = resolved;
      run_basin(resolved, ctx);
    } else if (*blow) {
      ctx.manifest.subcommand = "blowup";
      resolved = resolve(blowup_defaults(), file, "blowup", flags_blow);
      ctx.manifest.config = resolved;
      run_blowup(resolved, ctx);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ResonanceError& e) {
    std::cerr << "resonant denominator at harmonic " << e.harmonic() << ": " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  ctx.manifest.config["threads"] = threads;
  ctx.manifest.config["seed"] = seed;
  ctx.manifest.status["complete"] = !ctx.partial_failure;
  ctx.manifest.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  try {
    fs::create_directories(ctx.out_dir);
    std::ofstream(ctx.out_dir / "manifest.json") << ctx.manifest.to_json().dump(2) << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: cannot write manifest: " << e.what() << "\n";
    return 1;
  }
  return ctx.partial_failure ? 4 : 0;
}
