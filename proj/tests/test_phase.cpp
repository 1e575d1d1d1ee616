#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "nmprot/phase.hpp"
#include "nmprot/report.hpp"

using namespace nmprot;
using namespace nmprot::fixtures;

namespace {
constexpr double dw = 2e-3;
}

TEST(NExcited, Estimates) {
  EXPECT_DOUBLE_EQ(n_excited(dw, dw), 1.0);
  const double gamma1 = effective_gamma(fig1_params());
  EXPECT_NEAR(n_excited(0.5 * gamma1, dw), 3.534, 1e-3);
  const double gamma2 = effective_gamma(fig2_params());
  EXPECT_LT(n_excited(gamma2, dw), 1.0);
  EXPECT_THROW(n_excited(1.0, 0.0), std::invalid_argument);
}

TEST(AnalyticClassification, SymmetricPhaseWeakCouplingProtectsBoth) {
  const double g = 0.5 * dw;
  const double ep = boundaries::omega_ep(g, dw);
  for (double W : {1.01 * ep, 2.0 * ep, 3.0 * dw}) {
    const auto c = analytic_classification(g, W, dw);
    EXPECT_TRUE(c.above_ep);
    EXPECT_EQ(c.verdict, ProtectionVerdict::TwoProtected);
    EXPECT_TRUE(boundaries::both_protected(g, W, dw));
  }
}

TEST(AnalyticClassification, BrokenPhaseSmallOmegaProtectsOne) {
  const double g = 2.0 * dw;
  const double W = 0.5 * g;  // Omega << Omega_EP ~ 6.3 dw, and Omega < g
  ASSERT_LT(W, 0.2 * boundaries::omega_ep(g, dw));
  const auto c = analytic_classification(g, W, dw);
  EXPECT_FALSE(c.above_ep);
  EXPECT_TRUE(c.state1_protected);
  EXPECT_FALSE(c.state2_protected);
  EXPECT_EQ(c.verdict, ProtectionVerdict::OneProtected);
  EXPECT_FALSE(g < dw / std::sqrt(std::numbers::pi));
}

TEST(AnalyticClassification, SymmetricPhaseStrongCouplingProtectsNone) {
  const double g = 2.0 * dw;
  const auto c = analytic_classification(g, boundaries::omega_ep(g, dw) * (1.0 + 1e-9), dw);
  EXPECT_TRUE(c.above_ep);
  EXPECT_EQ(c.verdict, ProtectionVerdict::ZeroProtected);
  EXPECT_TRUE(boundaries::both_unprotected(g, c.omega_ep * 1.5, dw));
}

TEST(AnalyticClassification, RatesMatchMarkovianEigenvalues) {
  // Below the EP the left-hand sides are -Re(lambda)/delta_omega of the 2x2 reduction.
  const double g = 1.5 * dw, W = 0.8 * dw;
  const MarkovianModel m{std::numbers::pi * g * g / dw, W, 0.0};
  ASSERT_EQ(pt_phase(m), PtPhase::Broken);
  const auto r = relaxation_rates(m);
  EXPECT_NEAR(boundaries::state1_lhs(g, W, dw), r.slow / dw, 1e-12);
  EXPECT_NEAR(boundaries::state2_lhs(g, W, dw), r.fast / dw, 1e-12);
}

TEST(AnalyticClassification, ScaleInvariant) {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(0.05, 3.0);
  for (int i = 0; i < 500; ++i) {
    const double x = u(rng), y = u(rng);
    const auto a = analytic_classification(x * dw, y * dw, dw);
    for (double k : {1e-3, 7.0, 1234.5}) {
      const auto b = analytic_classification(x * dw * k, y * dw * k, dw * k);
      EXPECT_EQ(a.verdict, b.verdict);
      EXPECT_EQ(a.above_ep, b.above_ep);
      EXPECT_NEAR(a.n_ex_slow, b.n_ex_slow, 1e-12 * std::max(1.0, a.n_ex_slow));
      EXPECT_NEAR(a.n_ex_fast, b.n_ex_fast, 1e-12 * std::max(1.0, a.n_ex_fast));
    }
  }
}

TEST(AnalyticClassification, SymmetricPhasePredicatesPartition) {
  std::mt19937_64 rng(67);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int i = 0; i < 2000; ++i) {
    const double g = u(rng) * dw;
    const double W = boundaries::omega_ep(g, dw) * (1.0 + u(rng)) + 1e-12;
    ASSERT_TRUE(boundaries::above_exceptional_point(g, W, dw));
    EXPECT_NE(boundaries::symmetric_phase_protected(g, dw),
              boundaries::symmetric_phase_unprotected(g, dw));
  }
}

TEST(AnalyticClassification, BrokenPhaseBoundariesMergeAtExceptionalPoint) {
  const double g = 1.7 * dw;
  const double ep = boundaries::omega_ep(g, dw);
  double previous = 1e300;
  for (double eps : {1e-2, 1e-4, 1e-6, 1e-8, 1e-10}) {
    const double W = ep * (1.0 - eps);
    const double diff = boundaries::state2_lhs(g, W, dw) - boundaries::state1_lhs(g, W, dw);
    EXPECT_GT(diff, 0.0);
    EXPECT_LT(diff, previous);
    // Square-root approach: diff = (gamma/dw) sqrt(eps (2 - eps)).
    const double gamma_dw = 2.0 * ep / dw;
    EXPECT_NEAR(diff, gamma_dw * std::sqrt(eps * (2.0 - eps)), 1e-6 * gamma_dw * std::sqrt(eps) + 1e-12);
    previous = diff;
  }
  EXPECT_NEAR(boundaries::state1_lhs(g, ep, dw), boundaries::state2_lhs(g, ep, dw), 1e-5);
}

TEST(AnalyticClassification, BrokenPhaseFormulaRejectsSymmetricPhase) {
  const double g = dw;
  EXPECT_THROW(boundaries::state1_lhs(g, 2.0 * boundaries::omega_ep(g, dw), dw), std::domain_error);
}

TEST(AnalyticClassification, ReferenceLines) {
  EXPECT_NEAR(boundaries::reference_vertical_g(dw), dw / std::sqrt(std::numbers::pi), 1e-18);
  EXPECT_NEAR(boundaries::symmetric_phase_critical_g(dw), 0.7978845608 * dw, 1e-12);
  EXPECT_NEAR(boundaries::symmetric_phase_critical_g(dw) / boundaries::reference_vertical_g(dw),
              std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(boundaries::reference_inclined_omega(1.0), 1.2533141373, 1e-9);
}

TEST(NumericClassification, DecoupledIsTwoProtected) {
  SystemParams p;
  p.n_modes = 8;
  const auto c = numeric_classification(p, 0.99);
  EXPECT_NEAR(c.state1.M, 1.0, 1e-9);
  EXPECT_NEAR(c.state2.M, 1.0, 1e-9);
  EXPECT_EQ(c.verdict, ProtectionVerdict::TwoProtected);
}

TEST(NumericClassification, WeakCouplingRetainsMoreMemory) {
  const auto weak = numeric_classification(fig2_params());
  const auto strong = numeric_classification(fig1_params());
  EXPECT_GT(weak.state1.M, strong.state1.M + 0.2);
}

TEST(NumericClassification, VerdictFromThreshold) {
  EXPECT_EQ(numeric_verdict(0.5, 0.5, 0.4), ProtectionVerdict::TwoProtected);
  EXPECT_EQ(numeric_verdict(0.5, 0.1, 0.4), ProtectionVerdict::OneProtected);
  EXPECT_EQ(numeric_verdict(0.1, 0.5, 0.4), ProtectionVerdict::OneProtected);
  EXPECT_EQ(numeric_verdict(0.1, 0.1, 0.4), ProtectionVerdict::ZeroProtected);
  EXPECT_EQ(numeric_verdict(0.4, 0.4, 0.4), ProtectionVerdict::TwoProtected);
  SystemParams p;
  EXPECT_THROW(numeric_classification(p, 0.0), std::invalid_argument);
  EXPECT_THROW(numeric_classification(p, 1.0), std::invalid_argument);
}

TEST(NumericClassification, UncoupledResonatorProtectedByStrongerEnvironmentCoupling) {
  // At fixed Omega << delta_omega the slow rate ~ Omega^2/gamma falls with g,
  // so the memory of (1, 0, ...) grows along the cut.
  SystemParams p;
  p.n_modes = 50;
  p.Omega = 0.1 * dw;
  double previous = 0.0;
  std::vector<double> ms;
  for (double x : {0.5, 1.0, 2.0, 3.0}) {
    p.g = x * dw;
    const double m = numeric_classification(p).state1.M;
    EXPECT_GE(m, previous - 1e-2) << "g/dw = " << x;
    previous = m;
    ms.push_back(m);
  }
  EXPECT_GT(ms.back(), ms.front());
}

TEST(Sweep, SingleCellMatchesDirectClassification) {
  SweepFixed f;
  const auto d = sweep({1.2 * dw}, {0.7 * dw}, f);
  ASSERT_EQ(d.cells.size(), 1u);
  const auto direct = numeric_classification(cell_params(f, 1.2 * dw, 0.7 * dw));
  ASSERT_TRUE(d.cells[0].numeric);
  EXPECT_EQ(d.cells[0].numeric->state1.M, direct.state1.M);
  EXPECT_EQ(d.cells[0].numeric->state2.M, direct.state2.M);
  EXPECT_EQ(d.cells[0].numeric->verdict, direct.verdict);
}

TEST(Sweep, EvaluationOrderDoesNotMatter) {
  SweepFixed f;
  f.n_modes = 20;
  MemorySettings s;
  s.n_samples = 512;
  const std::vector<double> gs{0.2 * dw, 0.9 * dw, 2.5 * dw};
  const std::vector<double> ws{0.3 * dw, 1.1 * dw, 2.0 * dw, 2.9 * dw};
  const auto serial = sweep(gs, ws, f, kDefaultThreshold, s, 1);
  const auto threaded = sweep(gs, ws, f, kDefaultThreshold, s, 5);
  std::ostringstream a, b;
  report::write_diagram_csv(a, serial);
  report::write_diagram_csv(b, threaded);
  EXPECT_EQ(a.str(), b.str());
  // Reverse-order evaluation cell by cell.
  for (std::size_t k = serial.cells.size(); k-- > 0;) {
    const auto& c = serial.cells[k];
    const auto direct = numeric_classification(cell_params(f, c.g, c.Omega), kDefaultThreshold, s);
    EXPECT_EQ(direct.state1.M, c.numeric->state1.M);
    EXPECT_EQ(direct.state2.M, c.numeric->state2.M);
  }
  EXPECT_EQ(serial.cell(1, 2).g, gs[1]);
  EXPECT_EQ(serial.cell(1, 2).Omega, ws[2]);
}

TEST(Sweep, AnalyticOnlySkipsSimulation) {
  const auto d = sweep({0.5 * dw, 2.0 * dw}, {0.1 * dw, 3.0 * dw}, {}, kDefaultThreshold, {}, 1, true);
  for (const auto& c : d.cells) {
    EXPECT_FALSE(c.numeric);
    EXPECT_TRUE(c.valid());
  }
  EXPECT_EQ(d.cell(0, 1).analytic.verdict, ProtectionVerdict::TwoProtected);
  EXPECT_EQ(d.cell(1, 0).analytic.verdict, ProtectionVerdict::OneProtected);
}

TEST(Sweep, CellFailuresAreRecorded) {
  MemorySettings s;
  s.n_samples = 8;  // below the minimum: every cell fails
  const auto d = sweep({dw, 2.0 * dw}, {dw}, {}, kDefaultThreshold, s, 2);
  EXPECT_EQ(d.invalid_count(), 2u);
  for (const auto& c : d.cells) EXPECT_FALSE(c.error.empty());
}

TEST(Sweep, RejectsBadAxes) {
  EXPECT_THROW(sweep({}, {dw}, {}), std::invalid_argument);
  EXPECT_THROW(sweep({2 * dw, dw}, {dw}, {}), std::invalid_argument);
  EXPECT_THROW(sweep({dw}, {dw, dw}, {}), std::invalid_argument);
  EXPECT_THROW(sweep({dw}, {dw}, {}, 1.5), std::invalid_argument);
}

TEST(Agreement, BoundaryBandExcludesNeighbours) {
  PhaseDiagram d;
  d.g_axis = {1, 2, 3, 4, 5};
  d.omega_axis = {1};
  d.cells.resize(5);
  const ProtectionVerdict analytic[] = {ProtectionVerdict::TwoProtected, ProtectionVerdict::TwoProtected,
                                        ProtectionVerdict::TwoProtected, ProtectionVerdict::ZeroProtected,
                                        ProtectionVerdict::ZeroProtected};
  for (std::size_t i = 0; i < 5; ++i) {
    d.cells[i].analytic.verdict = analytic[i];
    d.cells[i].numeric = PhaseClassification{};
    d.cells[i].numeric->verdict = ProtectionVerdict::TwoProtected;
  }
  const auto band = analytic_boundary_band(d);
  EXPECT_EQ(band, (std::vector<bool>{false, false, true, true, false}));
  const auto a = verdict_agreement(d);
  EXPECT_EQ(a.compared, 3u);
  EXPECT_EQ(a.agreeing, 2u);
}
