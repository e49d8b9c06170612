#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <cstring>
#include <random>

#include "dce/mode_evolver.hpp"

namespace {

using dce::cplx;
using dce::CavityConfig;
using dce::Dynamics;
using std::numbers::pi;

CavityConfig make(double eps, double gamma, int K, double T = 100.0, int spp = 64) {
  CavityConfig c;
  c.epsilon = eps;
  c.gamma = gamma;
  c.K = K;
  c.T = T;
  c.steps_per_period = spp;
  return c;
}

dce::ModeState random_state(int K, int cols, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  dce::ModeState s;
  s.layout = dce::ModeLayout::window(K);
  s.X.resize(2 * K, cols);
  for (Eigen::Index i = 0; i < s.X.size(); ++i) s.X(i) = cplx(nd(rng), nd(rng));
  return s;
}

// First-order coupled equations written directly in (Q, P):
//   Pdot = -w^2 (1 - 2 eps sin) Q + 2 (eps Omega cos) G P + (-eps Omega^2 sin) G Q
// mapped to X by hand. Independent of the v-coefficient tables.
Eigen::MatrixXcd first_order_oracle(const dce::ModeState& s, double t, const CavityConfig& c) {
  const int K = s.layout.count();
  const double W = c.drive_frequency();
  const auto qp = dce::to_canonical(s, c);
  Eigen::MatrixXd G(K, K);
  for (int k = 1; k <= K; ++k)
    for (int j = 1; j <= K; ++j) G(k - 1, j - 1) = dce::coupling_g(k, j);
  const double lam = c.epsilon * W * std::cos(W * t);
  const double acc = -c.epsilon * W * W * std::sin(W * t);
  Eigen::MatrixXcd pdot = 2.0 * lam * G.cast<cplx>() * qp.P + acc * G.cast<cplx>() * qp.Q;
  Eigen::MatrixXcd out(2 * K, s.X.cols());
  for (int k = 1; k <= K; ++k) {
    const double w = k * c.omega1();
    pdot.row(k - 1) -= w * w * (1.0 - 2.0 * c.epsilon * std::sin(W * t)) * qp.Q.row(k - 1);
    const double a = std::sqrt(w / 2.0);
    out.row(s.layout.row(-k)) = a * (qp.P.row(k - 1) + cplx(0, 1.0 / w) * pdot.row(k - 1));
    out.row(s.layout.row(k)) = a * (qp.P.row(k - 1) - cplx(0, 1.0 / w) * pdot.row(k - 1));
  }
  return out;
}

TEST(InitialState, UnitSigmaMinusAmplitudes) {
  const auto c = make(1e-3, 2, 5);
  const auto s = dce::initial_state(c);
  EXPECT_EQ(s.amplitude(1, -1), cplx(1.0));
  for (int n = 1; n <= 5; ++n) {
    EXPECT_NEAR(s.X.col(n - 1).squaredNorm(), 1.0, 0.0);
    for (int k = -5; k <= 5; ++k)
      if (k != 0 && k != -n) { EXPECT_EQ(s.amplitude(n, k), cplx(0.0)); }
  }
  const auto qp = dce::to_canonical(s, c);
  for (int n = 1; n <= 5; ++n)
    for (int k = 1; k <= 5; ++k) {
      const double expect = (n == k) ? 1.0 / std::sqrt(2.0 * k) : 0.0;
      EXPECT_NEAR(std::abs(qp.Q(k - 1, n - 1) - expect), 0.0, 1e-15);
      EXPECT_NEAR(std::abs(qp.P(k - 1, n - 1) - cplx(0, -k) * expect), 0.0, 1e-15);
    }
}

TEST(SystemRhs, StaticWallDecouples) {
  for (auto dyn : {Dynamics::linearized, Dynamics::exact}) {
    const auto c = make(0.0, 2, 4);
    const auto s = random_state(4, 3, 1);
    const auto d = dce::system_rhs(s, 0.8, c, dyn);
    for (int r = 0; r < 8; ++r) {
      const int k = s.layout.signed_mode(r);
      for (int col = 0; col < 3; ++col)
        EXPECT_NEAR(std::abs(d.X(r, col) - cplx(0, k) * s.X(r, col)), 0.0, 1e-14);
    }
  }
}

TEST(SystemRhs, LinearizedMatchesFirstOrderQPOracle) {
  const auto c = make(0.02, 3, 6);
  const auto s = random_state(6, 2, 7);
  for (double t : {0.1, 0.77, 1.9, 4.0}) {
    const auto d = dce::system_rhs(s, t, c, Dynamics::linearized);
    EXPECT_LT((d.X - first_order_oracle(s, t, c)).norm(), 1e-12 * s.X.norm()) << t;
  }
}

TEST(SystemRhs, OnlyVelocityCouplingAtZeroPhase) {
  // At sin(Omega t) = 0, cos = 1 the drive is pure 2 lambda G P: check against
  // the oracle with eps-modulated frequency removed.
  const auto c = make(0.01, 2, 5);
  const double t = c.drive_period();
  const auto s = random_state(5, 1, 3);
  const auto d = dce::system_rhs(s, t, c, Dynamics::linearized);
  dce::CoupledModeSystem sys(c, Dynamics::linearized);
  // Drive matrix at this instant is cos*(V+ + V-), whose diagonal (mirror) part cancels.
  const Eigen::MatrixXd sum = sys.drive_coupling(1) + sys.drive_coupling(-1);
  for (int r = 0; r < 10; ++r) {
    const int k = s.layout.signed_mode(r);
    EXPECT_NEAR(sum(r, s.layout.row(-k)), 0.0, 1e-14);
    EXPECT_NEAR(sum(r, r), 0.0, 1e-14);
  }
  EXPECT_LT((d.X - first_order_oracle(s, t, c)).norm(), 1e-12);
}

TEST(SystemRhs, ExactMinusLinearizedIsSecondOrder) {
  const auto s = random_state(6, 2, 11);
  double prev = 0.0;
  for (double eps : {4e-3, 2e-3, 1e-3}) {
    const auto c = make(eps, 2.5, 6);
    const double t = 0.61;
    const double diff =
        (dce::system_rhs(s, t, c, Dynamics::exact).X - dce::system_rhs(s, t, c, Dynamics::linearized).X).norm();
    if (prev > 0.0) { EXPECT_NEAR(prev / diff, 4.0, 0.2); }
    prev = diff;
  }
}

TEST(SystemRhs, DimensionMismatch) {
  const auto s = random_state(4, 1, 2);
  EXPECT_THROW(dce::system_rhs(s, 0.1, make(0.01, 2, 5), Dynamics::linearized), std::invalid_argument);
}

TEST(Integrate, StaticWallIsFreeRotation) {
  const auto c = make(0.0, 2, 4, 10.0, 512);
  const auto s = dce::integrate(c, Dynamics::linearized, 13.7);
  EXPECT_DOUBLE_EQ(s.t, 13.7);
  for (int n = 1; n <= 4; ++n)
    for (int k = 1; k <= 4; ++k) {
      const cplx expect = (n == k) ? std::polar(1.0, -k * 13.7) : cplx(0.0);
      EXPECT_NEAR(std::abs(s.amplitude(n, -k) - expect), 0.0, 1e-6);
      EXPECT_EQ(s.amplitude(n, k), cplx(0.0));
    }
}

TEST(Integrate, FourthOrderConvergence) {
  for (auto dyn : {Dynamics::linearized, Dynamics::exact}) {
    auto c = make(0.05, 2, 4, 6.0, 16);
    const auto a = dce::integrate(c, dyn).X;
    c.steps_per_period = 32;
    const auto b = dce::integrate(c, dyn).X;
    c.steps_per_period = 64;
    const auto d = dce::integrate(c, dyn).X;
    const double order = std::log2((a - b).norm() / (b - d).norm());
    EXPECT_GT(order, 3.5) << dce::to_string(dyn);
    EXPECT_LT(order, 4.5) << dce::to_string(dyn);
  }
}

TEST(Integrate, BitIdenticalReruns) {
  const auto c = make(1e-3, 3, 12, 20.0);
  const auto a = dce::integrate(c, Dynamics::exact);
  const auto b = dce::integrate(c, Dynamics::exact);
  EXPECT_EQ(0, std::memcmp(a.X.data(), b.X.data(), sizeof(cplx) * a.X.size()));
}

TEST(Integrate, BlowUpReportsTime) {
  auto c = make(0.0, 2, 64, 1000.0, 1);
  try {
    dce::integrate(c, Dynamics::linearized);
    FAIL() << "expected IntegrationError";
  } catch (const dce::IntegrationError& e) {
    EXPECT_GT(e.time(), 0.0);
    EXPECT_LE(e.time(), c.stop_time());
    EXPECT_NE(std::string(e.what()).find("t ="), std::string::npos);
  }
}

TEST(Bogoliubov, StaticWallGivesIdentity) {
  const auto c = make(0.0, 2, 6, 10.0, 256);
  const auto b = dce::extract_bogoliubov(dce::integrate(c, Dynamics::exact), c);
  EXPECT_LT((b.alpha - Eigen::MatrixXcd::Identity(6, 6)).norm(), 1e-4);
  EXPECT_EQ(b.beta.norm(), 0.0);
}

TEST(Bogoliubov, ConstantOnceWallStops) {
  const auto c = make(5e-3, 2, 8, 20.0, 512);
  const auto at_T = dce::extract_bogoliubov(dce::integrate(c, Dynamics::linearized), c);
  for (double extra : {2.0 * pi, 0.37}) {
    const auto later = dce::extract_bogoliubov(dce::integrate(c, Dynamics::linearized, c.stop_time() + extra), c);
    EXPECT_LT((later.alpha - at_T.alpha).norm(), 1e-5);
    EXPECT_LT((later.beta - at_T.beta).norm(), 1e-5);
  }
}

TEST(Bogoliubov, RejectsStateBeforeStop) {
  const auto c = make(1e-3, 2, 4, 10.0);
  EXPECT_THROW(dce::extract_bogoliubov(dce::integrate(c, Dynamics::linearized, 5.0), c), std::invalid_argument);
}

TEST(Bogoliubov, ResonantCoefficientGrowsLinearly) {
  const auto c = make(1e-3, 2, 16);
  const auto b = dce::extract_bogoliubov(dce::integrate(c, Dynamics::linearized), c);
  EXPECT_NEAR(std::abs(b.beta(0, 0)), 0.05, 0.05 * 0.05);
  EXPECT_NEAR(std::norm(b.beta(0, 0)), 2.5e-3, 2.5e-3 * 0.05);
}

TEST(Bogoliubov, UnitarityOnLowerHalf) {
  for (auto dyn : {Dynamics::linearized, Dynamics::exact}) {
    const auto c = make(1e-3, 2, 16, 100.0, 256);
    const auto r = dce::extract_bogoliubov(dce::integrate(c, dyn), c).unitarity_residuals();
    EXPECT_LE(r.head(8).maxCoeff(), 1e-3) << dce::to_string(dyn);
  }
}

TEST(ParticleSpectrumNumeric, DirectSums) {
  dce::BogoliubovMatrices b{Eigen::MatrixXcd::Identity(3, 3), Eigen::MatrixXcd::Zero(3, 3), 1.0};
  auto s = dce::particle_spectrum_numeric(b, make(0, 2, 3));
  for (double n : s.N) EXPECT_EQ(n, 0.0);
  b.beta(0, 0) = cplx(0.3, -0.4);
  s = dce::particle_spectrum_numeric(b, make(0, 2, 3));
  EXPECT_DOUBLE_EQ(s.at(1), 0.25);
  EXPECT_EQ(s.at(2), 0.0);
  EXPECT_EQ(s.method, dce::SpectrumMethod::numeric);
}

TEST(ParticleSpectrumNumeric, ResonantSpectrumGammaTwo) {
  const auto c = make(1e-3, 2, 16);
  const auto s = dce::particle_spectrum_numeric(dce::extract_bogoliubov(dce::integrate(c, Dynamics::linearized), c), c);
  EXPECT_NEAR(s.at(1), 2.5e-3, 2.5e-3 * 0.05);
  for (int k = 2; k <= 16; ++k) EXPECT_LT(s.at(k), 1e-2 * s.at(1));
  for (double n : s.N) EXPECT_GE(n, 0.0);
}

TEST(Monodromy, StaticWallIsDiagonal) {
  const auto c = make(0.0, 2, 3);
  const auto phi = dce::monodromy(c, Dynamics::linearized, 512);
  const auto layout = dce::ModeLayout::window(3);
  for (int r = 0; r < 6; ++r)
    for (int q = 0; q < 6; ++q) {
      const cplx expect = r == q ? std::polar(1.0, layout.signed_mode(r) * c.drive_period()) : cplx(0.0);
      EXPECT_NEAR(std::abs(phi(r, q) - expect), 0.0, 1e-7);
    }
}

TEST(Monodromy, UnitDeterminantForLinearizedDynamics) {
  const auto c = make(1e-2, 2, 6);
  const auto phi = dce::monodromy(c, Dynamics::linearized, 1024);
  EXPECT_NEAR(std::abs(phi.determinant()), 1.0, 1e-8);
}

TEST(Monodromy, GrowthRateNearFirstOrderValue) {
  // gamma = 2, K = 8: the first-order recurrence gives max Re mu = 0.245295...
  const auto c = make(1e-3, 2, 8);
  const double rate = dce::max_growth_rate(dce::monodromy(c, Dynamics::linearized, 2048), c.drive_period());
  EXPECT_NEAR(rate / c.epsilon, 0.2452952, 2e-3);
}

TEST(Mathieu, SingleModeResonanceIsStrongestAtTwiceTheFrequency) {
  for (int k : {1, 2}) {
    const double on = dce::single_mode_growth_rate(k, 2.0 * k, 1e-2, Dynamics::linearized);
    const double below = dce::single_mode_growth_rate(k, 2.0 * k - 0.5, 1e-2, Dynamics::linearized);
    const double above = dce::single_mode_growth_rate(k, 2.0 * k + 0.5, 1e-2, Dynamics::linearized);
    EXPECT_GT(on, below);
    EXPECT_GT(on, above);
    EXPECT_NEAR(on, 1e-2 * k / 2.0, 1e-4 * k);  // half the modulation depth of w_k^2, times w_k / 2
    EXPECT_LT(std::abs(below), 1e-6);
  }
}

}  // namespace
