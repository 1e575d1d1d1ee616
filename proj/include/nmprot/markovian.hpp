#pragma once

// Born-Markov reduction of the resonator pair: resonator 2 acquires the decay
// rate gamma and the environment drops out, leaving the 2x2 generator
//
//   d/dt (a1, a2) = [ -i w0     -i Omega     ] (a1, a2)
//                   [ -i Omega  -i w0 - gamma]
//
// with an exceptional point at Omega = gamma / 2.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string_view>

#include <Eigen/Dense>

#include "model.hpp"

namespace nmprot {

using cvec2 = std::array<std::complex<double>, 2>;

struct MarkovianModel {
  double gamma = 0.0;
  double Omega = 0.0;
  /// Set to 0 for the rotating frame.
  double omega0 = 1.0;

  static MarkovianModel from_params(const SystemParams& p, bool rotating_frame = true) {
    validate(p);
    return {effective_gamma(p), p.Omega, rotating_frame ? 0.0 : p.omega0};
  }

  Eigen::Matrix2cd generator() const {
    using namespace std::complex_literals;
    Eigen::Matrix2cd m;
    m << -1i * omega0, -1i * Omega, -1i * Omega, -1i * omega0 - gamma;
    return m;
  }
};

inline void validate(const MarkovianModel& m) {
  if (!std::isfinite(m.gamma) || !std::isfinite(m.Omega) || !std::isfinite(m.omega0))
    throw std::invalid_argument("Markovian model parameters must be finite");
  if (m.gamma < 0.0) throw std::invalid_argument("gamma must be >= 0");
  if (m.Omega < 0.0) throw std::invalid_argument("Omega must be >= 0");
}

/// gamma^2 - 4 Omega^2
inline double discriminant(const MarkovianModel& m) {
  return m.gamma * m.gamma - 4.0 * m.Omega * m.Omega;
}

/// Principal square root of the discriminant. Purely imaginary above the EP,
/// so the real parts of both eigenvalues are exactly -gamma/2 there.
inline std::complex<double> split(const MarkovianModel& m) {
  const double d = discriminant(m);
  return d >= 0.0 ? std::complex<double>(std::sqrt(d), 0.0)
                  : std::complex<double>(0.0, std::sqrt(-d));
}

struct EigenPair {
  std::complex<double> plus;   // principal root; the slow eigenvalue below the EP
  std::complex<double> minus;
};

inline EigenPair eigenvalues(const MarkovianModel& m) {
  validate(m);
  const std::complex<double> centre(-0.5 * m.gamma, -m.omega0);
  const std::complex<double> half = 0.5 * split(m);
  return {centre + half, centre - half};
}

/// Relaxation rate Gamma = -Re(lambda).
struct RelaxationRates {
  double slow;  // -Re(lambda_plus)
  double fast;  // -Re(lambda_minus)
};

inline RelaxationRates relaxation_rates(const MarkovianModel& m) {
  const auto ev = eigenvalues(m);
  return {-ev.plus.real(), -ev.minus.real()};
}

/// Small-coupling estimate of the slow rate used for the inclined reference
/// line of the memory maps, 2 Omega^2 / gamma. The leading term of the exact
/// -Re(lambda_plus) expansion is Omega^2 / gamma; this keeps the factor 2 of
/// the published reference line.
inline double slow_rate_reference_estimate(const MarkovianModel& m) {
  if (!(m.gamma > 0.0)) throw std::invalid_argument("slow-rate estimate needs gamma > 0");
  return 2.0 * m.Omega * m.Omega / m.gamma;
}

inline double exceptional_point(double gamma) {
  if (gamma < 0.0) throw std::invalid_argument("gamma must be >= 0");
  return 0.5 * gamma;
}

struct EigenVectors {
  cvec2 plus;
  cvec2 minus;
  /// Omega == 0: the closed form divides by Omega, so the basis vectors are returned.
  bool decoupled = false;
};

/// Unnormalized {i (gamma +- s) / (2 Omega), 1}, s = sqrt(gamma^2 - 4 Omega^2),
/// on the same branch as eigenvalues().
inline EigenVectors eigenvectors(const MarkovianModel& m) {
  validate(m);
  if (m.Omega == 0.0) return {{1.0, 0.0}, {0.0, 1.0}, true};
  using namespace std::complex_literals;
  const auto s = split(m);
  return {{1i * (m.gamma + s) / (2.0 * m.Omega), 1.0},
          {1i * (m.gamma - s) / (2.0 * m.Omega), 1.0},
          false};
}

inline EigenVectors normalized_eigenvectors(const MarkovianModel& m) {
  auto e = eigenvectors(m);
  auto normalize = [](cvec2& v) {
    const double n = std::sqrt(std::norm(v[0]) + std::norm(v[1]));
    v[0] /= n;
    v[1] /= n;
  };
  normalize(e.plus);
  normalize(e.minus);
  return e;
}

enum class PtPhase { Symmetric, ExceptionalPoint, Broken };

inline std::string_view to_string(PtPhase p) {
  switch (p) {
    case PtPhase::Symmetric: return "symmetric";
    case PtPhase::ExceptionalPoint: return "exceptional-point";
    case PtPhase::Broken: return "broken";
  }
  return "unknown";
}

/// Symmetric above the EP (equal rates gamma/2), Broken below it.
inline PtPhase pt_phase(const MarkovianModel& m) {
  validate(m);
  const double gap = 2.0 * m.Omega - m.gamma;
  const double scale = std::max(m.gamma, 2.0 * m.Omega);
  if (std::abs(gap) <= 1e-12 * scale) return PtPhase::ExceptionalPoint;
  return gap > 0.0 ? PtPhase::Symmetric : PtPhase::Broken;
}

/// Below this |gamma^2 - 4 Omega^2| the eigenbasis is treated as collinear.
inline bool near_exceptional_point(const MarkovianModel& m) {
  const double eps = 1e-6 * m.gamma;
  return std::abs(discriminant(m)) < eps * eps;
}

/// Exact solution a(t) = exp(M t) a0 of the 2x2 system.
///
/// With lambda0 = -gamma/2 - i w0, h = s/2 and K = M - lambda0 I (so K^2 = h^2 I),
/// the two-eigenvalue expansion sums to
///   exp(M t) = exp(lambda0 t) [cosh(h t) I + sinh(h t)/h K],
/// which needs no eigenvector coefficients and stays accurate near the EP.
/// For |h t| > 1 it is evaluated from exp(lambda_+- t) directly, which avoids
/// overflow of cosh/sinh at long times. Within the EP neighbourhood the
/// Jordan form exp(lambda0 t) (I + K t) is used.
inline cvec2 markovian_propagate(const MarkovianModel& m, const cvec2& a0, double t) {
  validate(m);
  if (t < 0.0) throw std::invalid_argument("markovian_propagate: t must be >= 0");
  using namespace std::complex_literals;
  const auto ev = eigenvalues(m);

  if (m.Omega == 0.0) {
    return {a0[0] * std::exp(ev.plus * t), a0[1] * std::exp(ev.minus * t)};
  }

  const std::complex<double> lambda0(-0.5 * m.gamma, -m.omega0);
  // K a0 with K = [[gamma/2, -i Omega], [-i Omega, -gamma/2]]
  const cvec2 ka{0.5 * m.gamma * a0[0] - 1i * m.Omega * a0[1],
                 -1i * m.Omega * a0[0] - 0.5 * m.gamma * a0[1]};

  std::complex<double> c, sh;  // multipliers of a0 and K a0
  if (near_exceptional_point(m)) {
    const auto e0 = std::exp(lambda0 * t);
    c = e0;
    sh = e0 * t;
  } else {
    const std::complex<double> h = 0.5 * split(m);
    const std::complex<double> x = h * t;
    if (std::abs(x) <= 1.0) {
      const auto e0 = std::exp(lambda0 * t);
      c = e0 * std::cosh(x);
      sh = e0 * std::sinh(x) / h;
    } else {
      const auto ep = std::exp(ev.plus * t);
      const auto em = std::exp(ev.minus * t);
      c = 0.5 * (ep + em);
      sh = (ep - em) / (2.0 * h);
    }
  }
  return {c * a0[0] + sh * ka[0], c * a0[1] + sh * ka[1]};
}

}  // namespace nmprot
