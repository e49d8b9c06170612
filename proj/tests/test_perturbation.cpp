#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "dce/mode_evolver.hpp"
#include "dce/perturbation.hpp"

namespace {

using dce::ResonanceBranch;

dce::CavityConfig make(double eps, double gamma, double T, int K = 16) {
  dce::CavityConfig c;
  c.epsilon = eps;
  c.gamma = gamma;
  c.T = T;
  c.K = K;
  return c;
}

TEST(ResonanceTable, CreationBranchExamples) {
  const auto two = dce::resonance_table(2, 4).branch(ResonanceBranch::creation);
  ASSERT_EQ(two.size(), 1u);
  EXPECT_EQ(two[0].n, 1);
  EXPECT_EQ(two[0].k, 1);
  EXPECT_DOUBLE_EQ(two[0].v, -0.5);

  EXPECT_TRUE(dce::resonance_table(1, 10).branch(ResonanceBranch::creation).empty());

  const auto four = dce::resonance_table(4, 6).branch(ResonanceBranch::creation);
  ASSERT_EQ(four.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(four[i].n, static_cast<int>(i) + 1);
    EXPECT_EQ(four[i].k, 3 - static_cast<int>(i));
  }
}

TEST(ResonanceTable, EveryEntrySatisfiesItsSecularCondition) {
  for (int gamma = 1; gamma <= 8; ++gamma) {
    const auto t = dce::resonance_table(gamma, 20);
    for (const auto& e : t.entries) {
      // sigma k - s gamma + n = 0 with sigma = -1 for the creation branch (k of sign +).
      switch (e.branch) {
        case ResonanceBranch::creation: EXPECT_EQ(e.k, gamma - e.n); break;
        case ResonanceBranch::upshift: EXPECT_EQ(e.k, e.n + gamma); break;
        case ResonanceBranch::downshift: EXPECT_EQ(e.k, e.n - gamma); break;
      }
      EXPECT_EQ(e.sigma * e.k - e.s * gamma + e.n, 0) << dce::to_string(e.branch);
      EXPECT_DOUBLE_EQ(e.v, dce::coupling_v(e.s, e.sigma * e.k, -e.n, gamma));
      EXPECT_GE(e.k, 1);
      EXPECT_LE(e.k, 20);
    }
    EXPECT_EQ(t.branch(ResonanceBranch::creation).size(), static_cast<std::size_t>(std::max(gamma - 1, 0)));
    EXPECT_EQ(t.branch(ResonanceBranch::upshift).size(), static_cast<std::size_t>(std::max(20 - gamma, 0)));
  }
}

TEST(BetaFirstOrder, Examples) {
  EXPECT_DOUBLE_EQ(dce::beta_first_order(1, 1, make(1e-3, 2, 100)), -0.05);
  EXPECT_EQ(dce::beta_first_order(1, 2, make(1e-3, 2, 100)), 0.0);
  EXPECT_EQ(dce::beta_first_order(2, 3, make(1e-3, 4, 100)), 0.0);
  EXPECT_NEAR(std::pow(dce::beta_first_order(1, 3, make(1e-3, 4, 100)), 2), 7.5e-3, 1e-15);
  EXPECT_THROW(dce::beta_first_order(1, 1, make(1e-3, 2.5, 100)), std::invalid_argument);
}

TEST(BetaFirstOrder, QuarterNkIdentity) {
  for (int gamma = 2; gamma <= 12; ++gamma)
    for (int n = 1; n < gamma; ++n) {
      const auto c = make(1e-3, gamma, 100, 16);
      const double b = dce::beta_first_order(n, gamma - n, c);
      EXPECT_NEAR(b * b, 0.25 * n * (gamma - n) * 0.01, 1e-14) << gamma << " " << n;
    }
}

TEST(PerturbativeSpectrum, Examples) {
  auto s = dce::particle_spectrum_perturbative(make(1e-3, 2, 100));
  EXPECT_DOUBLE_EQ(s.at(1), 2.5e-3);
  for (int k = 2; k <= 16; ++k) EXPECT_EQ(s.at(k), 0.0);
  EXPECT_EQ(s.method, dce::SpectrumMethod::perturbative);

  s = dce::particle_spectrum_perturbative(make(1e-3, 1, 100));
  for (double n : s.N) EXPECT_EQ(n, 0.0);

  s = dce::particle_spectrum_perturbative(make(1e-3, 4, 100));
  EXPECT_NEAR(s.at(1), 7.5e-3, 1e-17);
  EXPECT_NEAR(s.at(2), 1e-2, 1e-17);
  EXPECT_NEAR(s.at(3), 7.5e-3, 1e-17);
  EXPECT_EQ(s.at(4), 0.0);
}

TEST(PerturbativeSpectrum, ShortTimeGuardrails) {
  EXPECT_EQ(dce::short_time_regime(make(1e-3, 2, 100)), dce::ShortTimeRegime::valid);
  EXPECT_EQ(dce::short_time_regime(make(1e-3, 2, 500)), dce::ShortTimeRegime::marginal);
  EXPECT_EQ(dce::short_time_regime(make(1e-3, 2, 1500)), dce::ShortTimeRegime::invalid);
  EXPECT_NO_THROW(dce::particle_spectrum_perturbative(make(1e-3, 2, 500)));
  EXPECT_THROW(dce::particle_spectrum_perturbative(make(1e-3, 2, 1500)), std::domain_error);
  EXPECT_THROW(dce::particle_spectrum_perturbative(make(1e-3, 2.2, 100)), std::invalid_argument);
}

TEST(PerturbativeSpectrum, ExactQuadraticScaling) {
  for (int gamma = 2; gamma <= 6; ++gamma) {
    const auto a = dce::particle_spectrum_perturbative(make(1e-3, gamma, 50, 24));
    const auto b = dce::particle_spectrum_perturbative(make(1e-3, gamma, 100, 24));
    for (int k = 1; k < gamma; ++k) EXPECT_NEAR(b.at(k) / a.at(k), 4.0, 1e-12);
  }
}

TEST(DominantMode, Rule) {
  EXPECT_EQ(dce::dominant_mode(2), std::vector<int>{1});
  EXPECT_EQ(dce::dominant_mode(5), (std::vector<int>{2, 3}));
  EXPECT_EQ(dce::dominant_mode(4), std::vector<int>{2});
  EXPECT_THROW(dce::dominant_mode(1), std::invalid_argument);
}

TEST(DominantMode, ArgmaxOfClosedFormSpectrum) {
  for (int gamma = 2; gamma <= 12; ++gamma) {
    const auto s = dce::particle_spectrum_perturbative(make(1e-3, gamma, 100, dce::default_truncation(gamma)));
    const auto dom = dce::dominant_mode(gamma);
    EXPECT_NE(std::find(dom.begin(), dom.end(), s.argmax()), dom.end()) << gamma;
    for (int k : dom) EXPECT_DOUBLE_EQ(s.at(k), s.at(dom.front()));
  }
}

dce::ParticleSpectrum numeric(const dce::CavityConfig& c, dce::Dynamics dyn = dce::Dynamics::linearized) {
  return dce::particle_spectrum_numeric(dce::extract_bogoliubov(dce::integrate(c, dyn), c), c);
}

TEST(NumericSpectrum, AgreesWithClosedFormForSmallGamma) {
  for (int gamma : {2, 3}) {
    const auto c = make(1e-3, gamma, 100, dce::default_truncation(gamma));
    const auto num = numeric(c);
    const auto per = dce::particle_spectrum_perturbative(c);
    double top = 0.0;
    for (double n : num.N) top = std::max(top, n);
    for (int k = 1; k < gamma; ++k) EXPECT_NEAR(num.at(k), per.at(k), 0.05 * per.at(k)) << gamma << " " << k;
    for (int k = gamma; k <= c.K; ++k) EXPECT_LE(num.at(k), 1e-2 * top) << gamma << " " << k;
  }
}

TEST(NumericSpectrum, DoublingTimeQuadruples) {
  for (int gamma : {2, 3}) {
    const auto a = numeric(make(1e-3, gamma, 50, 16));
    const auto b = numeric(make(1e-3, gamma, 100, 16));
    for (int k = 1; k < gamma; ++k) EXPECT_NEAR(b.at(k) / a.at(k), 4.0, 0.4) << gamma << " " << k;
  }
}

TEST(NumericSpectrum, MirrorSymmetryInK) {
  for (int gamma : {3, 4}) {
    const auto s = numeric(make(1e-3, gamma, 100, 16));
    for (int k = 1; k < gamma; ++k) EXPECT_NEAR(s.at(k), s.at(gamma - k), 0.05 * s.at(k)) << gamma << " " << k;
  }
}

TEST(NumericSpectrum, ExactDynamicsAgreesAtSmallAmplitude) {
  const auto c = make(1e-3, 2, 100, 16);
  EXPECT_NEAR(numeric(c, dce::Dynamics::exact).at(1), numeric(c).at(1), 0.01 * numeric(c).at(1));
}

}  // namespace
