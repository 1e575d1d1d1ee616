#pragma once

// Two coupled resonators, the second one coupled uniformly to a finite comb
// of N environment modes. Everything here is expressed in units of omega0.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace nmprot {

/// Placement of the environment comb relative to omega0.
///  - AsWritten: omega_j = omega0 + delta_omega * (j - N/2), j = 1..N
///  - Symmetric: omega_j = omega0 + delta_omega * (j - (N+1)/2), centered on omega0
enum class IndexConvention { AsWritten, Symmetric };

inline std::string_view to_string(IndexConvention c) {
  return c == IndexConvention::AsWritten ? "as-written" : "symmetric";
}

inline IndexConvention parse_convention(std::string_view s) {
  if (s == "as-written" || s == "AsWritten" || s == "as_written") return IndexConvention::AsWritten;
  if (s == "symmetric" || s == "Symmetric") return IndexConvention::Symmetric;
  throw std::invalid_argument("unknown index convention '" + std::string(s) +
                              "' (expected as-written|symmetric)");
}

/// Hard cap on the environment size; the dense matrix is (N+2)^2.
inline constexpr std::size_t kMaxModes = 1'000'000;

struct SystemParams {
  double omega0 = 1.0;
  double delta_omega = 2e-3;
  double g = 0.0;
  double Omega = 0.0;
  std::size_t n_modes = 1;
  IndexConvention index_convention = IndexConvention::AsWritten;

  std::size_t dimension() const { return n_modes + 2; }
};

/// Throws std::invalid_argument describing the first violated constraint.
inline void validate(const SystemParams& p) {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(p.omega0) || !finite(p.delta_omega) || !finite(p.g) || !finite(p.Omega))
    throw std::invalid_argument("system parameters must be finite");
  if (!(p.omega0 > 0.0)) throw std::invalid_argument("omega0 must be > 0");
  if (!(p.delta_omega > 0.0)) throw std::invalid_argument("delta_omega must be > 0");
  if (p.g < 0.0) throw std::invalid_argument("g must be >= 0");
  if (p.Omega < 0.0) throw std::invalid_argument("Omega must be >= 0");
  if (p.n_modes < 1) throw std::invalid_argument("n_modes must be >= 1");
  if (p.n_modes > kMaxModes)
    throw std::invalid_argument("n_modes exceeds the supported maximum of " +
                                std::to_string(kMaxModes));
}

/// Offset of mode j (1-based) from omega0, in units of delta_omega.
inline double comb_offset(std::size_t j, std::size_t n, IndexConvention c) {
  const double jd = static_cast<double>(j);
  const double nd = static_cast<double>(n);
  return c == IndexConvention::AsWritten ? jd - nd / 2.0 : jd - (nd + 1.0) / 2.0;
}

inline std::vector<double> environment_frequencies(const SystemParams& p) {
  validate(p);
  std::vector<double> w(p.n_modes);
  for (std::size_t j = 1; j <= p.n_modes; ++j)
    w[j - 1] = p.omega0 + p.delta_omega * comb_offset(j, p.n_modes, p.index_convention);
  return w;
}

/// Real-symmetric Hamiltonian of the single-excitation sector.
/// Basis order: [resonator 1, resonator 2, environment modes 1..N].
using HamiltonianMatrix = Eigen::MatrixXd;

/// With rotating_frame set, omega0 is subtracted from every diagonal entry.
inline HamiltonianMatrix build_hamiltonian(const SystemParams& p, bool rotating_frame = true) {
  validate(p);
  const auto n = static_cast<Eigen::Index>(p.dimension());
  HamiltonianMatrix h;
  try {
    h = HamiltonianMatrix::Zero(n, n);
  } catch (const std::bad_alloc&) {
    throw std::runtime_error("cannot allocate a " + std::to_string(n) + "x" + std::to_string(n) +
                             " Hamiltonian");
  }
  const double shift = rotating_frame ? p.omega0 : 0.0;
  h(0, 0) = p.omega0 - shift;
  h(1, 1) = p.omega0 - shift;
  h(0, 1) = h(1, 0) = p.Omega;
  for (std::size_t j = 1; j <= p.n_modes; ++j) {
    const auto k = static_cast<Eigen::Index>(j + 1);
    // Same expression in both frames so the two matrices differ by exactly omega0 * I.
    h(k, k) = (p.omega0 + p.delta_omega * comb_offset(j, p.n_modes, p.index_convention)) - shift;
    h(1, k) = h(k, 1) = p.g;
  }
  return h;
}

/// Born-Markov decay rate of resonator 2: pi g^2 / delta_omega.
inline double effective_gamma(const SystemParams& p) {
  if (!(p.delta_omega > 0.0)) throw std::invalid_argument("delta_omega must be > 0");
  return std::numbers::pi * p.g * p.g / p.delta_omega;
}

/// First revival time of the equidistant comb, 2 pi / delta_omega.
inline double revival_time(const SystemParams& p) {
  if (!(p.delta_omega > 0.0)) throw std::invalid_argument("delta_omega must be > 0");
  return 2.0 * std::numbers::pi / p.delta_omega;
}

}  // namespace nmprot
