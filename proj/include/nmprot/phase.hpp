#pragma once

// Loss-protection classification of the resonator pair.
//
// Analytic side: the number of comb modes excited during the initial Markovian
// decay is estimated as N_ex = Gamma / delta_omega, and a state counts as
// protected when N_ex < 1. Above the exceptional point both eigenstates decay
// with gamma / 2; below it they split into a slow and a fast rate.
//
// Numeric side: the memory M of the canonical probes (1, 0, ...) and
// (0, 1, ...) compared against a threshold.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dynamics.hpp"
#include "markovian.hpp"
#include "memory.hpp"
#include "model.hpp"
#include "parallel.hpp"

namespace nmprot {

/// Estimated number of comb modes excited by a decay at rate Gamma.
inline double n_excited(double rate, double delta_omega) {
  if (!(delta_omega > 0.0)) throw std::invalid_argument("delta_omega must be > 0");
  return rate / delta_omega;
}

namespace boundaries {

/// Omega_EP = gamma / 2 = pi g^2 / (2 delta_omega).
inline double omega_ep(double g, double delta_omega) {
  return 0.5 * std::numbers::pi * g * g / delta_omega;
}

/// Critical coupling of the symmetric phase, sqrt(2/pi) delta_omega.
inline double symmetric_phase_critical_g(double delta_omega) {
  return std::sqrt(2.0 / std::numbers::pi) * delta_omega;
}

/// Vertical reference line of the memory maps (gamma = delta_omega): delta_omega / sqrt(pi).
inline double reference_vertical_g(double delta_omega) {
  return delta_omega / std::sqrt(std::numbers::pi);
}

/// Inclined reference line of the memory maps (2 Omega^2 / gamma = delta_omega): sqrt(pi/2) g.
inline double reference_inclined_omega(double g) { return std::sqrt(0.5 * std::numbers::pi) * g; }

/// Omega / delta_omega > (pi/2) (g / delta_omega)^2, i.e. above the EP.
inline bool above_exceptional_point(double g, double Omega, double delta_omega) {
  const double x = g / delta_omega;
  return Omega / delta_omega > 0.5 * std::numbers::pi * x * x;
}

/// g < sqrt(2/pi) delta_omega
inline bool symmetric_phase_protected(double g, double delta_omega) {
  return g < symmetric_phase_critical_g(delta_omega);
}

/// g > sqrt(2/pi) delta_omega
inline bool symmetric_phase_unprotected(double g, double delta_omega) {
  return g > symmetric_phase_critical_g(delta_omega);
}

/// Both states protected: above the EP with g below the critical coupling.
inline bool both_protected(double g, double Omega, double delta_omega) {
  return above_exceptional_point(g, Omega, delta_omega) && symmetric_phase_protected(g, delta_omega);
}

/// Both states unprotected in the symmetric phase.
inline bool both_unprotected(double g, double Omega, double delta_omega) {
  return above_exceptional_point(g, Omega, delta_omega) &&
         symmetric_phase_unprotected(g, delta_omega);
}

namespace detail {
inline double half_split(double g, double Omega, double delta_omega) {
  const double x = g / delta_omega;
  const double y = Omega / delta_omega;
  const double gg = std::numbers::pi * std::numbers::pi * x * x * x * x;
  double arg = gg - 4.0 * y * y;
  // Roundoff at the EP itself.
  if (arg < 0.0 && -arg <= 1e-12 * gg) arg = 0.0;
  if (arg < 0.0)
    throw std::domain_error("broken-phase boundary evaluated above the exceptional point");
  return 0.5 * std::sqrt(arg);
}
inline double half_gamma(double g, double delta_omega) {
  const double x = g / delta_omega;
  return 0.5 * std::numbers::pi * x * x;
}
}  // namespace detail

/// Slow rate over delta_omega below the EP:
///   pi g^2 / (2 dw^2) - (1/2) sqrt(pi^2 g^4 / dw^4 - 4 Omega^2 / dw^2).
/// Governs the state concentrated in the uncoupled resonator.
inline double state1_lhs(double g, double Omega, double delta_omega) {
  return detail::half_gamma(g, delta_omega) - detail::half_split(g, Omega, delta_omega);
}

/// Fast rate over delta_omega below the EP (same expression with +).
/// Governs the state concentrated in the resonator coupled to the environment.
inline double state2_lhs(double g, double Omega, double delta_omega) {
  return detail::half_gamma(g, delta_omega) + detail::half_split(g, Omega, delta_omega);
}

inline bool state1_protected(double g, double Omega, double delta_omega) {
  return state1_lhs(g, Omega, delta_omega) < 1.0;
}

inline bool state2_protected(double g, double Omega, double delta_omega) {
  return state2_lhs(g, Omega, delta_omega) < 1.0;
}

}  // namespace boundaries

enum class ProtectionVerdict { TwoProtected, OneProtected, ZeroProtected };

inline std::string_view to_string(ProtectionVerdict v) {
  switch (v) {
    case ProtectionVerdict::TwoProtected: return "two";
    case ProtectionVerdict::OneProtected: return "one";
    case ProtectionVerdict::ZeroProtected: return "zero";
  }
  return "unknown";
}

inline ProtectionVerdict verdict_from_count(int protected_states) {
  switch (protected_states) {
    case 2: return ProtectionVerdict::TwoProtected;
    case 1: return ProtectionVerdict::OneProtected;
    default: return ProtectionVerdict::ZeroProtected;
  }
}

struct AnalyticClassification {
  ProtectionVerdict verdict = ProtectionVerdict::ZeroProtected;
  bool above_ep = false;
  bool state1_protected = false;
  bool state2_protected = false;
  double omega_ep = 0.0;
  /// N_ex for the slow and fast eigenstates (equal above the EP).
  double n_ex_slow = 0.0;
  double n_ex_fast = 0.0;
};

inline AnalyticClassification analytic_classification(double g, double Omega, double delta_omega) {
  if (!(delta_omega > 0.0)) throw std::invalid_argument("delta_omega must be > 0");
  if (!(g >= 0.0) || !(Omega >= 0.0))
    throw std::invalid_argument("g and Omega must be >= 0");

  AnalyticClassification c;
  c.omega_ep = boundaries::omega_ep(g, delta_omega);
  c.above_ep = boundaries::above_exceptional_point(g, Omega, delta_omega);
  if (c.above_ep) {
    const bool prot = boundaries::symmetric_phase_protected(g, delta_omega);
    c.state1_protected = c.state2_protected = prot;
    c.n_ex_slow = c.n_ex_fast = boundaries::detail::half_gamma(g, delta_omega);
  } else {
    c.n_ex_slow = boundaries::state1_lhs(g, Omega, delta_omega);
    c.n_ex_fast = boundaries::state2_lhs(g, Omega, delta_omega);
    c.state1_protected = c.n_ex_slow < 1.0;
    c.state2_protected = c.n_ex_fast < 1.0;
  }
  c.verdict = verdict_from_count(int(c.state1_protected) + int(c.state2_protected));
  return c;
}

/// Memory threshold separating protected from unprotected probes.
inline constexpr double kDefaultThreshold = 0.2;

struct PhaseClassification {
  ProtectionVerdict verdict = ProtectionVerdict::ZeroProtected;
  MemoryEstimate state1;
  MemoryEstimate state2;
  double threshold = kDefaultThreshold;
};

inline ProtectionVerdict numeric_verdict(double m_state1, double m_state2, double threshold) {
  return verdict_from_count(int(m_state1 >= threshold) + int(m_state2 >= threshold));
}

inline void validate_threshold(double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw std::invalid_argument("threshold must lie in (0, 1)");
}

/// Memory of the probes (1, 0, ...) and (0, 1, ...) from one diagonalization.
inline PhaseClassification numeric_classification(const SystemParams& p,
                                                  double threshold = kDefaultThreshold,
                                                  const MemorySettings& s = {}) {
  validate_threshold(threshold);
  const auto d = diagonalize(build_hamiltonian(p, s.rotating_frame));
  const double tr = revival_time(p);
  const double tau = s.tau_revivals * tr;
  const double T = s.window_revivals * tr;
  PhaseClassification c;
  c.threshold = threshold;
  c.state1 = memory(d, StateVector::basis(p.dimension(), 0), tau, T, s.n_samples, tr, s.threads);
  c.state2 = memory(d, StateVector::basis(p.dimension(), 1), tau, T, s.n_samples, tr, s.threads);
  c.verdict = numeric_verdict(c.state1.M, c.state2.M, threshold);
  return c;
}

/// Quantities held fixed across a sweep.
struct SweepFixed {
  std::size_t n_modes = 50;
  double delta_omega = 2e-3;
  double omega0 = 1.0;
  IndexConvention convention = IndexConvention::AsWritten;
};

struct PhaseCell {
  double g = 0.0;
  double Omega = 0.0;
  AnalyticClassification analytic;
  /// Empty for analytic-only sweeps and for failed cells.
  std::optional<PhaseClassification> numeric;
  /// Non-empty when the numeric evaluation failed.
  std::string error;

  bool valid() const { return error.empty(); }
};

struct PhaseDiagram {
  std::vector<double> g_axis;
  std::vector<double> omega_axis;
  SweepFixed fixed;
  double threshold = kDefaultThreshold;
  MemorySettings settings;
  bool analytic_only = false;
  /// g-major: cell(i, j) has g = g_axis[i], Omega = omega_axis[j].
  std::vector<PhaseCell> cells;

  const PhaseCell& cell(std::size_t ig, std::size_t jo) const {
    return cells.at(ig * omega_axis.size() + jo);
  }
  std::size_t invalid_count() const {
    std::size_t n = 0;
    for (const auto& c : cells) n += c.valid() ? 0 : 1;
    return n;
  }
};

inline void validate_axis(const std::vector<double>& axis, const char* name) {
  if (axis.empty()) throw std::invalid_argument(std::string(name) + " axis is empty");
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (!std::isfinite(axis[i]) || axis[i] < 0.0)
      throw std::invalid_argument(std::string(name) + " axis values must be finite and >= 0");
    if (i > 0 && !(axis[i] > axis[i - 1]))
      throw std::invalid_argument(std::string(name) + " axis must be strictly increasing");
  }
}

inline SystemParams cell_params(const SweepFixed& f, double g, double Omega) {
  SystemParams p;
  p.omega0 = f.omega0;
  p.delta_omega = f.delta_omega;
  p.g = g;
  p.Omega = Omega;
  p.n_modes = f.n_modes;
  p.index_convention = f.convention;
  return p;
}

/// Evaluates every (g, Omega) cell independently. `threads` parallelizes over
/// cells; per-cell memory evaluation then runs single-threaded. Cell failures
/// are recorded on the cell rather than thrown.
inline PhaseDiagram sweep(std::vector<double> g_axis, std::vector<double> omega_axis,
                          const SweepFixed& fixed, double threshold = kDefaultThreshold,
                          MemorySettings settings = {}, std::size_t threads = 1,
                          bool analytic_only = false) {
  validate_axis(g_axis, "g");
  validate_axis(omega_axis, "Omega");
  validate_threshold(threshold);
  if (!(fixed.delta_omega > 0.0)) throw std::invalid_argument("delta_omega must be > 0");
  settings.threads = 1;

  PhaseDiagram out;
  out.g_axis = std::move(g_axis);
  out.omega_axis = std::move(omega_axis);
  out.fixed = fixed;
  out.threshold = threshold;
  out.settings = settings;
  out.analytic_only = analytic_only;
  const std::size_t nw = out.omega_axis.size();
  out.cells.resize(out.g_axis.size() * nw);

  parallel_for(out.cells.size(), threads, [&](std::size_t idx) {
    PhaseCell& c = out.cells[idx];
    c.g = out.g_axis[idx / nw];
    c.Omega = out.omega_axis[idx % nw];
    c.analytic = analytic_classification(c.g, c.Omega, fixed.delta_omega);
    if (analytic_only) return;
    try {
      c.numeric = numeric_classification(cell_params(fixed, c.g, c.Omega), threshold, settings);
    } catch (const std::exception& e) {
      c.error = e.what();
      if (c.error.empty()) c.error = "unknown failure";
    }
  });
  return out;
}

/// Cells whose 3x3 neighbourhood contains a different analytic verdict.
inline std::vector<bool> analytic_boundary_band(const PhaseDiagram& d) {
  const std::size_t ng = d.g_axis.size(), nw = d.omega_axis.size();
  std::vector<bool> band(ng * nw, false);
  for (std::size_t i = 0; i < ng; ++i)
    for (std::size_t j = 0; j < nw; ++j) {
      const auto v = d.cell(i, j).analytic.verdict;
      for (std::size_t a = (i > 0 ? i - 1 : 0); a <= std::min(ng - 1, i + 1); ++a)
        for (std::size_t b = (j > 0 ? j - 1 : 0); b <= std::min(nw - 1, j + 1); ++b)
          if (d.cell(a, b).analytic.verdict != v) band[i * nw + j] = true;
    }
  return band;
}

struct VerdictAgreement {
  std::size_t compared = 0;
  std::size_t agreeing = 0;
  double fraction() const { return compared ? double(agreeing) / double(compared) : 0.0; }
};

/// Numeric vs analytic agreement over valid cells outside the boundary band.
inline VerdictAgreement verdict_agreement(const PhaseDiagram& d) {
  const auto band = analytic_boundary_band(d);
  VerdictAgreement a;
  for (std::size_t k = 0; k < d.cells.size(); ++k) {
    const auto& c = d.cells[k];
    if (band[k] || !c.numeric) continue;
    ++a.compared;
    if (c.numeric->verdict == c.analytic.verdict) ++a.agreeing;
  }
  return a;
}

}  // namespace nmprot
