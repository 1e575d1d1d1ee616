#pragma once

// CSV / JSON / gnuplot writers for trajectories, memory estimates and phase
// diagrams. Output is a pure function of the inputs (no timestamps, fixed
// ordering), so identical runs produce identical files.

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "dynamics.hpp"
#include "markovian.hpp"
#include "memory.hpp"
#include "model.hpp"
#include "phase.hpp"

namespace nmprot::report {

using nlohmann::json;

inline json to_json(std::complex<double> z) { return json::array({z.real(), z.imag()}); }

inline json to_json(const cvec2& v) { return json::array({to_json(v[0]), to_json(v[1])}); }

inline json to_json(const SystemParams& p) {
  return {{"omega0", p.omega0},   {"delta_omega", p.delta_omega},
          {"g", p.g},             {"Omega", p.Omega},
          {"n_modes", p.n_modes}, {"index_convention", std::string(to_string(p.index_convention))}};
}

inline json to_json(const MemorySettings& s) {
  return {{"tau_revivals", s.tau_revivals},
          {"window_revivals", s.window_revivals},
          {"n_samples", s.n_samples},
          {"rotating_frame", s.rotating_frame}};
}

inline json to_json(const MemoryEstimate& m) {
  return {{"M", m.M},
          {"tau", m.tau},
          {"T", m.T},
          {"n_samples", m.n_samples},
          {"convergence_delta", m.convergence_delta},
          {"short_window", m.short_window}};
}

inline json markovian_report(const MarkovianModel& m) {
  const auto ev = eigenvalues(m);
  const auto rates = relaxation_rates(m);
  const auto e = eigenvectors(m);
  const auto en = normalized_eigenvectors(m);
  json j = {{"gamma", m.gamma},
            {"Omega", m.Omega},
            {"omega0", m.omega0},
            {"lambda_plus", to_json(ev.plus)},
            {"lambda_minus", to_json(ev.minus)},
            {"Gamma_slow", rates.slow},
            {"Gamma_fast", rates.fast},
            {"e_plus", to_json(e.plus)},
            {"e_minus", to_json(e.minus)},
            {"e_plus_normalized", to_json(en.plus)},
            {"e_minus_normalized", to_json(en.minus)},
            {"decoupled", e.decoupled},
            {"Omega_EP", exceptional_point(m.gamma)},
            {"phase", std::string(to_string(pt_phase(m)))}};
  if (m.gamma > 0.0) j["Gamma_slow_reference_estimate"] = slow_rate_reference_estimate(m);
  return j;
}

inline json reference_lines(double delta_omega) {
  return {{"vertical_g_gamma_equals_delta_omega", boundaries::reference_vertical_g(delta_omega)},
          {"symmetric_phase_critical_g", boundaries::symmetric_phase_critical_g(delta_omega)},
          {"inclined_Omega_over_g", boundaries::reference_inclined_omega(1.0)}};
}

inline json boundaries_report(double g, double Omega, double delta_omega) {
  const auto c = analytic_classification(g, Omega, delta_omega);
  json j = {{"g", g},
            {"Omega", Omega},
            {"delta_omega", delta_omega},
            {"gamma", std::numbers::pi * g * g / delta_omega},
            {"Omega_EP", c.omega_ep},
            {"above_ep", c.above_ep},
            {"state1_protected", c.state1_protected},
            {"state2_protected", c.state2_protected},
            {"N_ex_slow", c.n_ex_slow},
            {"N_ex_fast", c.n_ex_fast},
            {"both_protected", boundaries::both_protected(g, Omega, delta_omega)},
            {"both_unprotected", boundaries::both_unprotected(g, Omega, delta_omega)},
            {"verdict", std::string(to_string(c.verdict))},
            {"reference_lines", reference_lines(delta_omega)}};
  if (!c.above_ep) {
    j["state1_lhs"] = boundaries::state1_lhs(g, Omega, delta_omega);
    j["state2_lhs"] = boundaries::state2_lhs(g, Omega, delta_omega);
  }
  return j;
}

inline constexpr const char* kDiagramCsvHeader = "g,Omega,M_state1,M_state2,verdict,analytic_verdict";

inline void write_diagram_csv(std::ostream& os, const PhaseDiagram& d) {
  os << kDiagramCsvHeader << '\n';
  for (const auto& c : d.cells) {
    os << format_double(c.g) << ',' << format_double(c.Omega) << ',';
    if (c.numeric) {
      os << format_double(c.numeric->state1.M) << ',' << format_double(c.numeric->state2.M) << ','
         << to_string(c.numeric->verdict);
    } else {
      os << "nan,nan," << (c.valid() ? "none" : "invalid");
    }
    os << ',' << to_string(c.analytic.verdict) << '\n';
  }
}

inline json diagram_metadata(const PhaseDiagram& d) {
  json cells_invalid = json::array();
  for (const auto& c : d.cells)
    if (!c.valid()) cells_invalid.push_back({{"g", c.g}, {"Omega", c.Omega}, {"error", c.error}});
  json j = {{"g_axis", d.g_axis},
            {"Omega_axis", d.omega_axis},
            {"n_modes", d.fixed.n_modes},
            {"delta_omega", d.fixed.delta_omega},
            {"omega0", d.fixed.omega0},
            {"index_convention", std::string(to_string(d.fixed.convention))},
            {"threshold", d.threshold},
            {"analytic_only", d.analytic_only},
            {"memory", to_json(d.settings)},
            {"reference_lines", reference_lines(d.fixed.delta_omega)},
            {"invalid_cells", cells_invalid}};
  if (!d.analytic_only) {
    const auto a = verdict_agreement(d);
    j["agreement_outside_boundary_band"] = {
        {"compared", a.compared}, {"agreeing", a.agreeing}, {"fraction", a.fraction()}};
  }
  return j;
}

inline int verdict_count(ProtectionVerdict v) {
  switch (v) {
    case ProtectionVerdict::TwoProtected: return 2;
    case ProtectionVerdict::OneProtected: return 1;
    case ProtectionVerdict::ZeroProtected: return 0;
  }
  return 0;
}

/// gnuplot "nonuniform matrix": first row holds the g axis, first column the
/// Omega axis (both in units of delta_omega), cells the protected-state count.
inline void write_heatmap_matrix(std::ostream& os, const PhaseDiagram& d, bool analytic) {
  const double dw = d.fixed.delta_omega;
  os << d.g_axis.size();
  for (double g : d.g_axis) os << ' ' << format_double(g / dw);
  os << '\n';
  for (std::size_t j = 0; j < d.omega_axis.size(); ++j) {
    os << format_double(d.omega_axis[j] / dw);
    for (std::size_t i = 0; i < d.g_axis.size(); ++i) {
      const auto& c = d.cell(i, j);
      if (analytic) {
        os << ' ' << verdict_count(c.analytic.verdict);
      } else if (c.numeric) {
        os << ' ' << verdict_count(c.numeric->verdict);
      } else {
        os << " NaN";
      }
    }
    os << '\n';
  }
}

/// Heatmap with the reference lines g = dw/sqrt(pi), g = sqrt(2/pi) dw and
/// Omega = sqrt(pi/2) g, axes in units of delta_omega.
inline std::string heatmap_plot_script(const std::string& matrix_file, const std::string& png,
                                       const std::string& title, const PhaseDiagram& d) {
  const double dw = d.fixed.delta_omega;
  const double gv = boundaries::reference_vertical_g(dw) / dw;
  const double gc = boundaries::symmetric_phase_critical_g(dw) / dw;
  const double slope = boundaries::reference_inclined_omega(1.0);
  const double gmax = d.g_axis.back() / dw;
  std::string s;
  s += "set terminal pngcairo size 900,750\n";
  s += "set output '" + png + "'\n";
  s += "set title '" + title + "'\n";
  s += "set xlabel 'g / delta_omega'\nset ylabel 'Omega / delta_omega'\n";
  s += "set cblabel 'protected states'\nset cbrange [0:2]\n";
  s += "set palette defined (0 '#3060c0', 1 '#f0b040', 2 '#f07020')\n";
  s += "set xrange [" + format_double(d.g_axis.front() / dw) + ":" + format_double(gmax) + "]\n";
  s += "set yrange [" + format_double(d.omega_axis.front() / dw) + ":" +
       format_double(d.omega_axis.back() / dw) + "]\n";
  s += "set arrow 1 from " + format_double(gv) + ", graph 0 to " + format_double(gv) +
       ", graph 1 nohead lc rgb 'red' lw 2\n";
  s += "set arrow 2 from " + format_double(gc) + ", graph 0 to " + format_double(gc) +
       ", graph 1 nohead lc rgb 'red' lw 1 dt 2\n";
  s += "plot '" + matrix_file + "' nonuniform matrix with image notitle, \\\n";
  s += "     " + format_double(slope) + "*x with lines lc rgb 'red' lw 2 title 'Omega = sqrt(pi/2) g'\n";
  return s;
}

/// Overlay of the full-model and Markovian |a1|^2, |a2|^2 with a marker at T_R.
inline std::string trajectory_plot_script(const std::string& full_csv,
                                          const std::string& markovian_csv, const std::string& png,
                                          const std::string& title, double revival_time) {
  std::string s;
  s += "set terminal pngcairo size 1000,600\n";
  s += "set output '" + png + "'\n";
  s += "set title '" + title + "'\n";
  s += "set datafile separator ','\n";
  s += "set key autotitle columnhead\n";
  s += "set xlabel 't omega0'\nset ylabel '|a|^2'\n";
  s += "set arrow 1 from " + format_double(revival_time) + ", graph 0 to " +
       format_double(revival_time) + ", graph 1 nohead lc rgb 'gray' dt 3\n";
  s += "plot '" + full_csv + "' using 1:4 with lines lc rgb 'blue' title '|a1|^2', \\\n";
  s += "     '" + full_csv + "' using 1:7 with lines lc rgb 'red' title '|a2|^2'";
  if (!markovian_csv.empty()) {
    s += ", \\\n     '" + markovian_csv +
         "' using 1:4 with lines lc rgb 'black' dt 2 title '|a1|^2 Markovian', \\\n";
    s += "     '" + markovian_csv +
         "' using 1:7 with lines lc rgb 'black' dt 2 title '|a2|^2 Markovian'";
  }
  s += "\n";
  return s;
}

}  // namespace nmprot::report
