#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "model.hpp"

namespace nmprot {

using cplx = std::complex<double>;

/// Amplitudes (a1, a2, b_1..b_N) of the single-excitation wavefunction.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(Eigen::VectorXcd amplitudes) : amp_(std::move(amplitudes)) {}

  /// Excitation localized in basis slot k (0 = resonator 1, 1 = resonator 2, 2+j = mode j).
  static StateVector basis(std::size_t dimension, std::size_t k) {
    if (k >= dimension) throw std::out_of_range("basis index outside state dimension");
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dimension));
    v(static_cast<Eigen::Index>(k)) = 1.0;
    return StateVector(std::move(v));
  }

  std::size_t size() const { return static_cast<std::size_t>(amp_.size()); }
  cplx a1() const { return amp_(0); }
  cplx a2() const { return amp_(1); }
  cplx operator[](std::size_t i) const { return amp_(static_cast<Eigen::Index>(i)); }

  double norm2() const { return amp_.squaredNorm(); }
  /// Total population of the environment modes.
  double environment_population() const {
    return amp_.size() > 2 ? amp_.tail(amp_.size() - 2).squaredNorm() : 0.0;
  }

  const Eigen::VectorXcd& amplitudes() const { return amp_; }

 private:
  Eigen::VectorXcd amp_;
};

inline void require_same_dimension(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                                " vs " + std::to_string(b) + ")");
  }
}

/// <A|B> = sum conj(A_i) B_i
inline cplx overlap(const StateVector& a, const StateVector& b) {
  require_same_dimension(a.size(), b.size(), "overlap");
  return a.amplitudes().dot(b.amplitudes());
}

/// Eigen-decomposition H = V diag(lambda) V^T of the real-symmetric Hamiltonian.
/// Immutable once built; propagation from it is safe to call concurrently.
class SpectralDecomposition {
 public:
  SpectralDecomposition(Eigen::VectorXd eigenvalues, Eigen::MatrixXd eigenvectors)
      : values_(std::move(eigenvalues)), vectors_(std::move(eigenvectors)) {}

  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  const Eigen::VectorXd& eigenvalues() const { return values_; }
  const Eigen::MatrixXd& eigenvectors() const { return vectors_; }

  /// Coordinates of psi in the eigenbasis, V^T psi.
  Eigen::VectorXcd project(const StateVector& psi) const {
    require_same_dimension(psi.size(), size(), "project");
    return vectors_.transpose().cast<cplx>() * psi.amplitudes();
  }

  /// Inverse of project().
  StateVector expand(const Eigen::VectorXcd& coeffs) const {
    return StateVector(vectors_.cast<cplx>() * coeffs);
  }

 private:
  Eigen::VectorXd values_;
  Eigen::MatrixXd vectors_;
};

/// Eigenvalues come back ascending. Throws on a non-symmetric or non-finite
/// matrix, and when the eigensolver fails to converge.
inline SpectralDecomposition diagonalize(const HamiltonianMatrix& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("diagonalize: matrix is not square");
  if (!h.allFinite()) throw std::runtime_error("diagonalize: matrix has non-finite entries");
  if (h != h.transpose()) throw std::invalid_argument("diagonalize: matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success) {
    std::ostringstream os;
    os << "diagonalize: eigensolver did not converge (dimension " << h.rows()
       << ", max |H_ij| = " << h.cwiseAbs().maxCoeff() << ")";
    throw std::runtime_error(os.str());
  }
  return SpectralDecomposition(solver.eigenvalues(), solver.eigenvectors());
}

/// psi(t) = V exp(-i lambda t) V^T psi(0). Negative t evolves backward.
inline StateVector propagate(const SpectralDecomposition& d, const StateVector& psi0, double t) {
  Eigen::VectorXcd c = d.project(psi0);
  const auto& lam = d.eigenvalues();
  for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::polar(1.0, -lam(k) * t);
  return d.expand(c);
}

/// <psi0|psi(t)> evaluated in the eigenbasis: sum_k |c_k|^2 exp(-i lambda_k t).
/// Same quantity as overlap(psi0, propagate(d, psi0, t)) at O(dimension) cost per t,
/// given weights = |V^T psi0|^2.
inline cplx return_amplitude(std::span<const double> weights, const Eigen::VectorXd& eigenvalues,
                             double t) {
  cplx sum = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k)
    sum += weights[k] * std::polar(1.0, -eigenvalues(static_cast<Eigen::Index>(k)) * t);
  return sum;
}

inline std::vector<double> spectral_weights(const SpectralDecomposition& d, const StateVector& psi0) {
  const Eigen::VectorXcd c = d.project(psi0);
  std::vector<double> w(static_cast<std::size_t>(c.size()));
  for (Eigen::Index k = 0; k < c.size(); ++k) w[static_cast<std::size_t>(k)] = std::norm(c(k));
  return w;
}

struct TrajectorySample {
  double time;
  StateVector state;
};

/// Time-ordered samples; times strictly increasing.
using Trajectory = std::vector<TrajectorySample>;

inline Trajectory propagate_series(const SpectralDecomposition& d, const StateVector& psi0,
                                   std::span<const double> times) {
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw std::invalid_argument("propagate_series: times must be strictly increasing");

  const Eigen::VectorXcd c0 = d.project(psi0);
  const Eigen::MatrixXcd v = d.eigenvectors().cast<cplx>();
  const auto& lam = d.eigenvalues();
  Trajectory out;
  out.reserve(times.size());
  Eigen::VectorXcd c(c0.size());
  for (double t : times) {
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) = c0(k) * std::polar(1.0, -lam(k) * t);
    out.push_back({t, StateVector(v * c)});
  }
  return out;
}

/// Uniform grid of `count` points on [t0, t1] inclusive.
inline std::vector<double> uniform_times(double t0, double t1, std::size_t count) {
  if (count == 0) throw std::invalid_argument("time grid must contain at least one point");
  if (count == 1) return {t0};
  if (!(t1 > t0)) throw std::invalid_argument("time grid end must exceed its start");
  std::vector<double> t(count);
  const double step = (t1 - t0) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) t[i] = t0 + step * static_cast<double>(i);
  t.back() = t1;
  return t;
}

struct Rk4Options {
  bool rotating_frame = true;
  /// Keep every k-th step (the final step is always kept).
  std::size_t sample_every = 1;
  double max_norm_drift = 1e-4;
};

/// Fixed-step classical RK4 of the amplitude equations
///   da1/dt  = -i w0 a1 - i Omega a2
///   da2/dt  = -i w0 a2 - i Omega a1 - i g sum_j b_j
///   db_j/dt = -i w_j b_j - i g a2
/// evaluated directly, independent of build_hamiltonian(). Serves as the
/// cross-check for the spectral propagator.
inline Trajectory rk4_integrate(const SystemParams& p, const StateVector& psi0, double t_end,
                                double dt, const Rk4Options& opt = {}) {
  validate(p);
  require_same_dimension(psi0.size(), p.dimension(), "rk4_integrate");
  if (!(dt > 0.0)) throw std::invalid_argument("rk4_integrate: dt must be > 0");
  if (t_end < 0.0) throw std::invalid_argument("rk4_integrate: t_end must be >= 0");
  if (opt.sample_every == 0) throw std::invalid_argument("rk4_integrate: sample_every must be >= 1");

  const std::size_t n = p.n_modes;
  const double frame = opt.rotating_frame ? p.omega0 : 0.0;
  const double w0 = p.omega0 - frame;
  std::vector<double> wj = environment_frequencies(p);
  for (double& w : wj) w -= frame;
  const cplx mi(0.0, -1.0);

  auto rhs = [&](const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
    cplx bsum = 0.0;
    for (std::size_t j = 0; j < n; ++j) bsum += y(static_cast<Eigen::Index>(j + 2));
    dy(0) = mi * (w0 * y(0) + p.Omega * y(1));
    dy(1) = mi * (w0 * y(1) + p.Omega * y(0) + p.g * bsum);
    for (std::size_t j = 0; j < n; ++j) {
      const auto k = static_cast<Eigen::Index>(j + 2);
      dy(k) = mi * (wj[j] * y(k) + p.g * y(1));
    }
  };

  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  const double norm0 = psi0.norm2();
  Eigen::VectorXcd y = psi0.amplitudes();
  const auto dim = y.size();
  Eigen::VectorXcd k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);

  Trajectory out;
  out.reserve(steps / opt.sample_every + 2);
  out.push_back({0.0, psi0});
  for (std::size_t s = 1; s <= steps; ++s) {
    rhs(y, k1);
    tmp = y + (0.5 * dt) * k1;
    rhs(tmp, k2);
    tmp = y + (0.5 * dt) * k2;
    rhs(tmp, k3);
    tmp = y + dt * k3;
    rhs(tmp, k4);
    y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    const double drift = std::abs(y.squaredNorm() - norm0);
    const double t = static_cast<double>(s) * dt;
    if (!(drift <= opt.max_norm_drift)) {
      std::ostringstream os;
      os << "rk4_integrate: norm drift " << drift << " exceeds " << opt.max_norm_drift
         << " at t = " << t << " (step " << dt << " too large?)";
      throw std::runtime_error(os.str());
    }
    if (s % opt.sample_every == 0 || s == steps) out.push_back({t, StateVector(y)});
  }
  return out;
}

/// %.17g formatting used by every exported table.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline constexpr const char* kTrajectoryCsvHeader =
    "t,re_a1,im_a1,abs2_a1,re_a2,im_a2,abs2_a2,abs2_env_total";

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << kTrajectoryCsvHeader << '\n';
  for (const auto& [t, psi] : traj) {
    const cplx a1 = psi.a1();
    const cplx a2 = psi.a2();
    os << format_double(t) << ',' << format_double(a1.real()) << ',' << format_double(a1.imag())
       << ',' << format_double(std::norm(a1)) << ',' << format_double(a2.real()) << ','
       << format_double(a2.imag()) << ',' << format_double(std::norm(a2)) << ','
       << format_double(psi.environment_population()) << '\n';
  }
}

}  // namespace nmprot
