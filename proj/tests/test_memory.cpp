#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "nmprot/memory.hpp"

using namespace nmprot;
using namespace nmprot::fixtures;

namespace {

StateVector resonator_state(std::size_t dim, cplx a1, cplx a2) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
  v(0) = a1;
  v(1) = a2;
  v /= v.norm();
  return StateVector(std::move(v));
}

/// (1/T) * integral_tau^{tau+T} cos^2(W t) dt
double rabi_average(double W, double tau, double T) {
  return 0.5 + (std::sin(2.0 * W * (tau + T)) - std::sin(2.0 * W * tau)) / (4.0 * W * T);
}

}  // namespace

TEST(Memory, FrozenDynamicsGivesOne) {
  SystemParams p;
  p.n_modes = 10;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  for (int i = 0; i < 5; ++i) {
    const auto psi0 = resonator_state(p.dimension(), {n(rng), n(rng)}, {n(rng), n(rng)});
    const auto m = memory(p, psi0);
    EXPECT_NEAR(m.M, 1.0, 1e-9);
    EXPECT_LT(m.convergence_delta, 1e-9);
  }
}

TEST(Memory, RabiAverageMatchesClosedForm) {
  SystemParams p;
  p.n_modes = 10;
  p.Omega = 3e-3;
  const auto psi0 = StateVector::basis(p.dimension(), 0);
  const double tr = revival_time(p);
  for (double window : {20.0, 3.3}) {
    const double tau = 5.0 * tr, T = window * tr;
    const auto m = memory(p, psi0, tau, T, 4096);
    // Midpoint rule on cos(2 W t)/2: error <= h^2 (2W)^2 / 48.
    const double h = T / 4096.0;
    const double bound = h * h * 4.0 * p.Omega * p.Omega / 48.0;
    EXPECT_NEAR(m.M, rabi_average(p.Omega, tau, T), bound + 1e-12);
    EXPECT_NEAR(m.M, 0.5, 1.0 / (p.Omega * T));
  }
}

TEST(Memory, StationaryStateGivesOne) {
  const auto p = fig1_params();
  const auto d = diagonalize(build_hamiltonian(p));
  for (Eigen::Index k : {0, 17, 50, 101}) {
    const StateVector psi0(d.eigenvectors().col(k).cast<cplx>());
    for (double tau : {0.0, 1234.5, 5.0 * revival_time(p)}) {
      const auto m = memory(d, psi0, tau, 777.0, 128, revival_time(p));
      EXPECT_NEAR(m.M, 1.0, 1e-9);
    }
  }
}

TEST(Memory, GlobalPhaseInvariance) {
  const auto p = fig2_params();
  std::mt19937_64 rng(8);
  const auto psi0 = random_normalized_state(p.dimension(), rng);
  const StateVector rotated(psi0.amplitudes() * std::polar(1.0, 2.345));
  EXPECT_NEAR(memory(p, psi0).M, memory(p, rotated).M, 1e-14);
}

TEST(Memory, FrameInvariance) {
  for (const auto& p : {fig1_params(), fig2_params()}) {
    MemorySettings rot, lab;
    lab.rotating_frame = false;
    for (std::size_t k : {0u, 1u}) {
      const auto psi0 = StateVector::basis(p.dimension(), k);
      EXPECT_NEAR(memory(p, psi0, rot).M, memory(p, psi0, lab).M, 2e-3);
    }
  }
}

TEST(Memory, ConvergedAtDefaultWindow) {
  for (const auto& p : {fig1_params(), fig2_params()}) {
    for (std::size_t k : {0u, 1u}) {
      const auto psi0 = StateVector::basis(p.dimension(), k);
      MemorySettings s;
      const auto m = memory(p, psi0, s);
      s.n_samples *= 2;
      const auto m2 = memory(p, psi0, s);
      EXPECT_LT(std::abs(m2.M - m.M), 1e-3);
      EXPECT_LT(m.convergence_delta, 1e-3);
      EXPECT_GE(m.M, 0.0);
      EXPECT_LE(m.M, 1.0 + 1e-9);
      EXPECT_FALSE(m.short_window);
      EXPECT_EQ(m.n_samples, 4096u);
      EXPECT_DOUBLE_EQ(m.tau, 5.0 * revival_time(p));
      EXPECT_DOUBLE_EQ(m.T, 20.0 * revival_time(p));
    }
  }
}

TEST(Memory, IndependentOfThreadCount) {
  const auto p = fig1_params();
  const auto psi0 = StateVector::basis(p.dimension(), 0);
  MemorySettings one, four;
  four.threads = 4;
  const auto a = memory(p, psi0, one);
  const auto b = memory(p, psi0, four);
  EXPECT_EQ(a.M, b.M);
  EXPECT_EQ(a.convergence_delta, b.convergence_delta);
}

TEST(Memory, FlagsShortWindow) {
  const auto p = fig2_params();
  const auto m = memory(p, StateVector::basis(p.dimension(), 0), revival_time(p), revival_time(p), 64);
  EXPECT_TRUE(m.short_window);
}

TEST(Memory, RejectsBadInput) {
  const auto p = fig2_params();
  const StateVector unnormalized(2.0 * StateVector::basis(p.dimension(), 0).amplitudes());
  EXPECT_THROW(memory(p, unnormalized), std::invalid_argument);
  const StateVector almost(StateVector::basis(p.dimension(), 0).amplitudes() * (1.0 + 1e-8));
  EXPECT_NO_THROW(memory(p, almost, 0.0, 100.0, 64));
  const auto psi0 = StateVector::basis(p.dimension(), 0);
  EXPECT_THROW(memory(p, psi0, 0.0, 100.0, 63), std::invalid_argument);
  EXPECT_THROW(memory(p, psi0, -1.0, 100.0, 64), std::invalid_argument);
  EXPECT_THROW(memory(p, psi0, 0.0, 0.0, 64), std::invalid_argument);
  EXPECT_THROW(memory(p, StateVector::basis(5, 0)), std::invalid_argument);
}
