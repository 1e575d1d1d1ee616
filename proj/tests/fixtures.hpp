#pragma once

#include <random>

#include "nmprot/dynamics.hpp"
#include "nmprot/model.hpp"

namespace nmprot::fixtures {

/// Strong-coupling regime: gamma ~ 1.4e-2 >> delta_omega.
inline SystemParams fig1_params() {
  SystemParams p;
  p.n_modes = 100;
  p.delta_omega = 2e-3;
  p.g = 3e-3;
  p.Omega = 6e-3;
  return p;
}

/// Weak-coupling regime: gamma ~ 8.8e-4 < delta_omega.
inline SystemParams fig2_params() {
  SystemParams p;
  p.n_modes = 100;
  p.delta_omega = 2e-3;
  p.g = 7.5e-4;
  p.Omega = 5e-4;
  return p;
}

inline StateVector random_normalized_state(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXcd v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = {n(rng), n(rng)};
  v /= v.norm();
  return StateVector(std::move(v));
}

inline double max_abs_diff(const StateVector& a, const StateVector& b) {
  return (a.amplitudes() - b.amplitudes()).cwiseAbs().maxCoeff();
}

}  // namespace nmprot::fixtures
