#pragma once

// Memory of an initial state: the late-time average of the return probability
//
//   M = (1/T) * integral_{tau}^{tau+T} |<psi(0)|psi(t)>|^2 dt
//
// evaluated by midpoint quadrature on the exact spectral propagator.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "model.hpp"
#include "parallel.hpp"

namespace nmprot {

struct MemorySettings {
  /// Window start and length in units of the revival time T_R.
  double tau_revivals = 5.0;
  double window_revivals = 20.0;
  std::size_t n_samples = 4096;
  bool rotating_frame = true;
  std::size_t threads = 1;
};

struct MemoryEstimate {
  double M = 0.0;
  double tau = 0.0;
  double T = 0.0;
  std::size_t n_samples = 0;
  /// |M(n) - M(n/2)|, the latter on its own midpoint grid.
  double convergence_delta = 0.0;
  /// The window starts before 5 T_R, too early for a late-time average.
  bool short_window = false;
};

inline constexpr std::size_t kMinMemorySamples = 64;
inline constexpr double kNormTolerance = 1e-6;

namespace detail {

/// Midpoint average of |<psi0|psi(t)>|^2 over [tau, tau + T] with n points.
/// Samples are evaluated in parallel and summed in index order, so the result
/// does not depend on the worker count.
inline double midpoint_return_probability(const std::vector<double>& weights,
                                          const Eigen::VectorXd& eigenvalues, double tau, double T,
                                          std::size_t n, std::size_t threads) {
  std::vector<double> samples(n);
  const double h = T / static_cast<double>(n);
  constexpr std::size_t kChunk = 256;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      const double t = tau + (static_cast<double>(i) + 0.5) * h;
      samples[i] = std::norm(return_amplitude(weights, eigenvalues, t));
    }
  });
  // Kahan summation in fixed order.
  double sum = 0.0, carry = 0.0;
  for (double s : samples) {
    const double y = s - carry;
    const double next = sum + y;
    carry = (next - sum) - y;
    sum = next;
  }
  return sum / static_cast<double>(n);
}

}  // namespace detail

/// Memory from an existing decomposition. tau and T are absolute times.
inline MemoryEstimate memory(const SpectralDecomposition& d, const StateVector& psi0, double tau,
                             double T, std::size_t n_samples, double revival_time,
                             std::size_t threads = 1) {
  require_same_dimension(psi0.size(), d.size(), "memory");
  const double n2 = psi0.norm2();
  if (!(std::abs(n2 - 1.0) <= kNormTolerance))
    throw std::invalid_argument("memory: initial state is not normalized (norm^2 = " +
                                std::to_string(n2) + ")");
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw std::invalid_argument("memory: tau must be >= 0");
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("memory: T must be > 0");
  if (n_samples < kMinMemorySamples)
    throw std::invalid_argument("memory: n_samples must be >= " + std::to_string(kMinMemorySamples));

  const auto weights = spectral_weights(d, psi0);
  MemoryEstimate est;
  est.tau = tau;
  est.T = T;
  est.n_samples = n_samples;
  est.short_window = tau < 5.0 * revival_time;
  est.M = detail::midpoint_return_probability(weights, d.eigenvalues(), tau, T, n_samples, threads);
  const double coarse =
      detail::midpoint_return_probability(weights, d.eigenvalues(), tau, T, n_samples / 2, threads);
  est.convergence_delta = std::abs(est.M - coarse);
  return est;
}

inline MemoryEstimate memory(const SystemParams& p, const StateVector& psi0, double tau, double T,
                             std::size_t n_samples, bool rotating_frame = true,
                             std::size_t threads = 1) {
  require_same_dimension(psi0.size(), p.dimension(), "memory");
  const auto d = diagonalize(build_hamiltonian(p, rotating_frame));
  return memory(d, psi0, tau, T, n_samples, revival_time(p), threads);
}

/// Memory with the window expressed through MemorySettings (multiples of T_R).
inline MemoryEstimate memory(const SystemParams& p, const StateVector& psi0,
                             const MemorySettings& s = {}) {
  const double tr = revival_time(p);
  return memory(p, psi0, s.tau_revivals * tr, s.window_revivals * tr, s.n_samples,
                s.rotating_frame, s.threads);
}

}  // namespace nmprot
