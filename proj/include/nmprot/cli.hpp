#pragma once

// Command-line front-end. run() is the whole program; tools/nmprot.cpp only
// forwards argv. Exit codes: 0 success, 2 usage/config error, 3 runtime failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dynamics.hpp"
#include "markovian.hpp"
#include "memory.hpp"
#include "model.hpp"
#include "phase.hpp"
#include "report.hpp"

namespace nmprot::cli {

using nlohmann::json;
namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kUsage = 2, kRuntime = 3 };

/// Bad flags, bad config, bad parameters: exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Keys accepted in a --config file. Anything else is rejected.
inline const std::set<std::string>& config_keys() {
  static const std::set<std::string> keys = {"omega0",  "delta_omega",      "g",
                                             "Omega",   "n_modes",          "index_convention",
                                             "threads", "rotating_frame"};
  return keys;
}

/// Physics parameters gathered from preset, config file and flags, applied in that order.
struct ParamOverrides {
  std::optional<double> omega0, delta_omega, g, Omega;
  std::optional<std::size_t> n_modes;
  std::optional<std::string> convention;
};

struct GlobalOptions {
  std::string config;
  std::string out = ".";
  std::size_t threads = 0;
  std::optional<bool> rotating_frame;
  ParamOverrides flags;
};

struct Preset {
  std::string name;
  std::string caption;
  SystemParams params;
};

/// Parameter sets of the published figures (omega0 = 1).
inline std::optional<Preset> find_preset(const std::string& name) {
  auto make = [](std::size_t n, double dw, double g, double W) {
    SystemParams p;
    p.n_modes = n;
    p.delta_omega = dw;
    p.g = g;
    p.Omega = W;
    return p;
  };
  if (name == "fig1")
    return Preset{name, "N=100, delta_omega=2e-3, g=3e-3, Omega=6e-3 (gamma >> delta_omega)",
                  make(100, 2e-3, 3e-3, 6e-3)};
  if (name == "fig2")
    return Preset{name, "N=100, delta_omega=2e-3, g=7.5e-4, Omega=5e-4 (gamma < delta_omega)",
                  make(100, 2e-3, 7.5e-4, 5e-4)};
  if (name == "fig3")
    return Preset{name, "N=50, delta_omega=2e-3, memory maps over (g, Omega)",
                  make(50, 2e-3, 0.0, 0.0)};
  if (name == "fig4-analytic")
    return Preset{name, "delta_omega=2e-3, analytic protection boundaries over (g, Omega)",
                  make(50, 2e-3, 0.0, 0.0)};
  return std::nullopt;
}

struct ConfigFile {
  ParamOverrides params;
  std::optional<std::size_t> threads;
  std::optional<bool> rotating_frame;
};

inline ConfigFile load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw UsageError("config file must hold a JSON object");
  for (const auto& [key, _] : j.items())
    if (!config_keys().count(key)) throw UsageError("unknown config key '" + key + "'");

  ConfigFile c;
  try {
    auto num = [&](const char* k, std::optional<double>& dst) {
      if (j.contains(k)) dst = j.at(k).get<double>();
    };
    num("omega0", c.params.omega0);
    num("delta_omega", c.params.delta_omega);
    num("g", c.params.g);
    num("Omega", c.params.Omega);
    if (j.contains("n_modes")) {
      const auto n = j.at("n_modes").get<long long>();
      if (n < 1) throw UsageError("n_modes must be >= 1");
      c.params.n_modes = static_cast<std::size_t>(n);
    }
    if (j.contains("index_convention")) c.params.convention = j.at("index_convention").get<std::string>();
    if (j.contains("threads")) {
      const auto t = j.at("threads").get<long long>();
      if (t < 0) throw UsageError("threads must be >= 0");
      c.threads = static_cast<std::size_t>(t);
    }
    if (j.contains("rotating_frame")) c.rotating_frame = j.at("rotating_frame").get<bool>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("config value has the wrong type: ") + e.what());
  }
  return c;
}

inline void apply(const ParamOverrides& o, SystemParams& p) {
  if (o.omega0) p.omega0 = *o.omega0;
  if (o.delta_omega) p.delta_omega = *o.delta_omega;
  if (o.g) p.g = *o.g;
  if (o.Omega) p.Omega = *o.Omega;
  if (o.n_modes) p.n_modes = *o.n_modes;
  if (o.convention) {
    try {
      p.index_convention = parse_convention(*o.convention);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
}

/// Fully resolved run settings shared by all subcommands.
struct Resolved {
  SystemParams params;
  std::size_t threads = 1;
  bool rotating_frame = true;
  fs::path out;
};

inline Resolved resolve(const GlobalOptions& g, const std::optional<Preset>& preset) {
  Resolved r;
  if (preset) r.params = preset->params;
  std::optional<std::size_t> threads;
  std::optional<bool> rotating;
  if (!g.config.empty()) {
    const auto c = load_config(g.config);
    apply(c.params, r.params);
    threads = c.threads;
    rotating = c.rotating_frame;
  }
  apply(g.flags, r.params);
  try {
    validate(r.params);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  r.threads = resolve_threads(g.threads != 0 ? g.threads : threads.value_or(0));
  r.rotating_frame = g.rotating_frame.value_or(rotating.value_or(true));
  r.out = g.out;
  return r;
}

inline void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << content;
  if (!f) throw std::runtime_error("failed writing '" + path.string() + "'");
}

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "'");
}

/// "a1", "a2", or a JSON file holding [[re, im], ...] with N+2 entries.
inline StateVector initial_state(const std::string& selector, const SystemParams& p) {
  if (selector == "a1") return StateVector::basis(p.dimension(), 0);
  if (selector == "a2") return StateVector::basis(p.dimension(), 1);
  std::ifstream in(selector);
  if (!in) throw UsageError("--init expects a1, a2 or a readable state file, got '" + selector + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("state file is not valid JSON: " + std::string(e.what()));
  }
  if (!j.is_array() || j.size() != p.dimension())
    throw UsageError("state file must be an array of " + std::to_string(p.dimension()) +
                     " [re, im] pairs");
  Eigen::VectorXcd v(static_cast<Eigen::Index>(p.dimension()));
  try {
    for (std::size_t i = 0; i < j.size(); ++i)
      v(static_cast<Eigen::Index>(i)) = {j[i].at(0).get<double>(), j[i].at(1).get<double>()};
  } catch (const json::exception& e) {
    throw UsageError("state file entries must be [re, im] pairs: " + std::string(e.what()));
  }
  return StateVector(std::move(v));
}

struct SimulateOptions {
  std::string preset;
  std::string init = "a1";
  double t_end_revivals = 3.0;
  std::optional<double> t_end;
  std::size_t samples = 3001;
  bool markovian = false;
};

inline void write_markovian_csv(std::ostream& os, const MarkovianModel& m, const StateVector& psi0,
                                const std::vector<double>& times) {
  os << kTrajectoryCsvHeader << '\n';
  const cvec2 a0{psi0.a1(), psi0.a2()};
  for (double t : times) {
    const auto a = markovian_propagate(m, a0, t);
    const double p1 = std::norm(a[0]), p2 = std::norm(a[1]);
    // The environment column carries the population lost from the pair.
    os << format_double(t) << ',' << format_double(a[0].real()) << ',' << format_double(a[0].imag())
       << ',' << format_double(p1) << ',' << format_double(a[1].real()) << ','
       << format_double(a[1].imag()) << ',' << format_double(p2) << ','
       << format_double(psi0.norm2() - p1 - p2) << '\n';
  }
}

inline int run_simulate(const GlobalOptions& g, const SimulateOptions& o, std::ostream& out) {
  std::optional<Preset> preset;
  if (!o.preset.empty()) {
    preset = find_preset(o.preset);
    if (!preset || (o.preset != "fig1" && o.preset != "fig2"))
      throw UsageError("simulate presets are fig1 and fig2, got '" + o.preset + "'");
  }
  if (o.samples == 0) throw UsageError("time grid is empty (--samples 0)");
  const auto r = resolve(g, preset);
  const double tr = revival_time(r.params);
  const double t_end = o.t_end.value_or(o.t_end_revivals * tr);
  if (!(t_end > 0.0) && o.samples > 1) throw UsageError("--t-end must be > 0");
  const auto psi0 = initial_state(o.init, r.params);
  const auto times = uniform_times(0.0, t_end, o.samples);

  const auto d = diagonalize(build_hamiltonian(r.params, r.rotating_frame));
  const auto traj = propagate_series(d, psi0, times);

  ensure_dir(r.out);
  {
    std::ostringstream csv;
    write_trajectory_csv(csv, traj);
    write_file(r.out / "trajectory.csv", csv.str());
  }
  std::string markovian_csv;
  if (o.markovian) {
    std::ostringstream csv;
    write_markovian_csv(csv, MarkovianModel::from_params(r.params, r.rotating_frame), psi0, times);
    write_file(r.out / "markovian.csv", csv.str());
    markovian_csv = "markovian.csv";
  }
  const std::string title = preset ? preset->name + ": " + preset->caption : "trajectory";
  write_file(r.out / "plot_trajectory.gp",
             report::trajectory_plot_script("trajectory.csv", markovian_csv, "trajectory.png", title, tr));

  json meta = {{"subcommand", "simulate"},
               {"params", report::to_json(r.params)},
               {"rotating_frame", r.rotating_frame},
               {"revival_time", tr},
               {"gamma", effective_gamma(r.params)},
               {"t_end", t_end},
               {"samples", o.samples},
               {"init", o.init},
               {"markovian", o.markovian}};
  if (preset) meta["preset"] = {{"name", preset->name}, {"caption", preset->caption},
                                {"caption_params", report::to_json(preset->params)}};
  write_file(r.out / "simulate.json", meta.dump(2) + "\n");
  out << meta.dump(2) << '\n';
  return kOk;
}

struct MarkovianOptions {
  std::optional<double> gamma;
};

inline int run_markovian(const GlobalOptions& g, const MarkovianOptions& o, std::ostream& out) {
  const auto r = resolve(g, std::nullopt);
  auto m = MarkovianModel::from_params(r.params, r.rotating_frame);
  if (o.gamma) {
    if (!(*o.gamma >= 0.0) || !std::isfinite(*o.gamma)) throw UsageError("--gamma must be >= 0");
    m.gamma = *o.gamma;
  }
  json j = report::markovian_report(m);
  j["rotating_frame"] = r.rotating_frame;
  out << j.dump(2) << '\n';
  return kOk;
}

struct MemoryOptions {
  std::string init = "a1";
  double tau_revivals = 5.0;
  double window_revivals = 20.0;
  std::size_t samples = 4096;
};

inline int run_memory(const GlobalOptions& g, const MemoryOptions& o, std::ostream& out,
                      std::ostream& err) {
  const auto r = resolve(g, std::nullopt);
  const auto psi0 = initial_state(o.init, r.params);
  MemorySettings s;
  s.tau_revivals = o.tau_revivals;
  s.window_revivals = o.window_revivals;
  s.n_samples = o.samples;
  s.rotating_frame = r.rotating_frame;
  s.threads = r.threads;
  MemoryEstimate est;
  try {
    est = memory(r.params, psi0, s);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (est.short_window) err << "warning: window starts before 5 T_R; M may not be a late-time average\n";
  json j = report::to_json(est);
  j["params"] = report::to_json(r.params);
  j["init"] = o.init;
  j["rotating_frame"] = r.rotating_frame;
  out << j.dump(2) << '\n';
  return kOk;
}

struct SweepOptions {
  std::string preset;
  double g_min = 0.1, g_max = 3.0;
  std::size_t g_count = 20;
  double omega_min = 0.1, omega_max = 3.0;
  std::size_t omega_count = 20;
  double threshold = kDefaultThreshold;
  bool analytic_only = false;
  double tau_revivals = 5.0;
  double window_revivals = 20.0;
  std::size_t samples = 4096;
};

/// count points from lo to hi (units of delta_omega), scaled to absolute values.
inline std::vector<double> axis(double lo, double hi, std::size_t count, double dw, const char* name) {
  if (count == 0) throw UsageError(std::string(name) + " axis needs at least one point");
  if (count > 1 && !(hi > lo)) throw UsageError(std::string(name) + " axis max must exceed min");
  if (lo < 0.0) throw UsageError(std::string(name) + " axis must be >= 0");
  std::vector<double> a(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = count == 1 ? lo : lo + (hi - lo) * double(i) / double(count - 1);
    a[i] = x * dw;
  }
  return a;
}

inline int run_sweep(const GlobalOptions& g, SweepOptions o, std::ostream& out, std::ostream& err) {
  std::optional<Preset> preset;
  if (!o.preset.empty()) {
    preset = find_preset(o.preset);
    if (!preset || (o.preset != "fig3" && o.preset != "fig4-analytic"))
      throw UsageError("sweep presets are fig3 and fig4-analytic, got '" + o.preset + "'");
    if (o.preset == "fig3") {
      o.g_count = o.omega_count = 50;
    } else {
      o.g_count = o.omega_count = 200;
      o.analytic_only = true;
    }
  }
  const auto r = resolve(g, preset);
  if (!(o.threshold > 0.0 && o.threshold < 1.0)) throw UsageError("--threshold must lie in (0, 1)");
  if (o.samples < kMinMemorySamples)
    throw UsageError("--samples must be >= " + std::to_string(kMinMemorySamples));
  const double dw = r.params.delta_omega;
  auto g_axis = axis(o.g_min, o.g_max, o.g_count, dw, "g");
  auto w_axis = axis(o.omega_min, o.omega_max, o.omega_count, dw, "Omega");

  SweepFixed fixed{r.params.n_modes, dw, r.params.omega0, r.params.index_convention};
  MemorySettings s;
  s.tau_revivals = o.tau_revivals;
  s.window_revivals = o.window_revivals;
  s.n_samples = o.samples;
  s.rotating_frame = r.rotating_frame;
  const auto diagram = sweep(std::move(g_axis), std::move(w_axis), fixed, o.threshold, s, r.threads,
                             o.analytic_only);

  ensure_dir(r.out);
  std::ostringstream csv, numeric, analytic;
  report::write_diagram_csv(csv, diagram);
  write_file(r.out / "diagram.csv", csv.str());
  report::write_heatmap_matrix(analytic, diagram, true);
  write_file(r.out / "diagram_analytic.dat", analytic.str());
  write_file(r.out / "plot_diagram_analytic.gp",
             report::heatmap_plot_script("diagram_analytic.dat", "diagram_analytic.png",
                                         "analytic protection boundaries", diagram));
  if (!o.analytic_only) {
    report::write_heatmap_matrix(numeric, diagram, false);
    write_file(r.out / "diagram_numeric.dat", numeric.str());
    write_file(r.out / "plot_diagram.gp",
               report::heatmap_plot_script("diagram_numeric.dat", "diagram_numeric.png",
                                           "memory-based protection", diagram));
  }
  json meta = report::diagram_metadata(diagram);
  meta["subcommand"] = "sweep";
  if (preset) meta["preset"] = {{"name", preset->name}, {"caption", preset->caption}};
  write_file(r.out / "diagram.json", meta.dump(2) + "\n");

  const std::size_t invalid = diagram.invalid_count();
  for (const auto& c : diagram.cells)
    if (!c.valid()) err << "cell g=" << c.g << " Omega=" << c.Omega << " failed: " << c.error << '\n';
  out << "wrote " << diagram.cells.size() << " cells to " << (r.out / "diagram.csv").string();
  if (!o.analytic_only) {
    const auto a = verdict_agreement(diagram);
    out << " (numeric/analytic agreement outside boundary band: " << a.agreeing << "/" << a.compared
        << ")";
  }
  out << '\n';
  if (invalid * 10 > diagram.cells.size()) {
    err << invalid << " of " << diagram.cells.size() << " cells invalid\n";
    return kRuntime;
  }
  return kOk;
}

inline int run_boundaries(const GlobalOptions& g, std::ostream& out) {
  const auto r = resolve(g, std::nullopt);
  json j = report::boundaries_report(r.params.g, r.params.Omega, r.params.delta_omega);
  out << j.dump(2) << '\n';
  return kOk;
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Finite-environment dynamics and loss protection of two coupled resonators", "nmprot"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  bool rotating = true;
  app.add_option("--config", g.config, "JSON config with physics parameters");
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads (0 = available parallelism)");
  auto* rot = app.add_option("--rotating-frame", rotating, "propagate in the frame rotating at omega0");
  app.add_option("--convention,--index_convention", g.flags.convention, "as-written|symmetric");
  app.add_option("--omega0", g.flags.omega0);
  app.add_option("--delta_omega", g.flags.delta_omega, "environment frequency step");
  app.add_option("--g", g.flags.g, "resonator-2 / environment coupling");
  app.add_option("--Omega", g.flags.Omega, "resonator / resonator coupling");
  app.add_option("--n_modes", g.flags.n_modes, "number of environment modes");

  SimulateOptions so;
  auto* sim = app.add_subcommand("simulate", "trajectory of the full model (and Markovian reduction)");
  sim->add_option("--preset", so.preset, "fig1|fig2");
  sim->add_option("--init", so.init, "a1|a2|<state.json>")->capture_default_str();
  sim->add_option("--t-end", so.t_end, "end time in units of 1/omega0");
  sim->add_option("--t-end-revivals", so.t_end_revivals, "end time in units of T_R")->capture_default_str();
  sim->add_option("--samples", so.samples, "number of time samples")->capture_default_str();
  sim->add_flag("--markovian", so.markovian, "also write the Markovian 2x2 trajectory");

  MarkovianOptions mo;
  auto* mk = app.add_subcommand("markovian", "closed-form eigenstructure of the Markovian reduction");
  mk->add_option("--gamma", mo.gamma, "decay rate (default pi g^2 / delta_omega)");

  MemoryOptions me;
  auto* mem = app.add_subcommand("memory", "memory M of an initial state");
  mem->add_option("--init", me.init, "a1|a2|<state.json>")->capture_default_str();
  mem->add_option("--tau-revivals", me.tau_revivals)->capture_default_str();
  mem->add_option("--window-revivals", me.window_revivals)->capture_default_str();
  mem->add_option("--samples", me.samples)->capture_default_str();

  SweepOptions sw;
  auto* swp = app.add_subcommand("sweep", "phase diagram over (g, Omega)");
  swp->add_option("--preset", sw.preset, "fig3|fig4-analytic");
  swp->add_option("--g-min", sw.g_min, "units of delta_omega")->capture_default_str();
  swp->add_option("--g-max", sw.g_max, "units of delta_omega")->capture_default_str();
  swp->add_option("--g-count", sw.g_count)->capture_default_str();
  swp->add_option("--Omega-min", sw.omega_min, "units of delta_omega")->capture_default_str();
  swp->add_option("--Omega-max", sw.omega_max, "units of delta_omega")->capture_default_str();
  swp->add_option("--Omega-count", sw.omega_count)->capture_default_str();
  swp->add_option("--threshold", sw.threshold, "memory threshold for a protected probe")->capture_default_str();
  swp->add_flag("--analytic-only", sw.analytic_only, "skip the memory simulations");
  swp->add_option("--tau-revivals", sw.tau_revivals)->capture_default_str();
  swp->add_option("--window-revivals", sw.window_revivals)->capture_default_str();
  swp->add_option("--samples", sw.samples)->capture_default_str();

  auto* bnd = app.add_subcommand("boundaries", "analytic protection verdict at one (g, Omega)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kUsage;
  }
  if (rot->count() > 0) g.rotating_frame = rotating;

  try {
    if (*sim) return run_simulate(g, so, out);
    if (*mk) return run_markovian(g, mo, out);
    if (*mem) return run_memory(g, me, out, err);
    if (*swp) return run_sweep(g, sw, out, err);
    if (*bnd) return run_boundaries(g, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "runtime failure: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}

}  // namespace nmprot::cli
