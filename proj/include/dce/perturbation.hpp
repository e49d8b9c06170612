/**
 * @file perturbation.hpp
 * @brief First-order (short-time) results for an integer drive ratio gamma:
 *        secular resonance terms, beta_nk, N_k and the dominant mode.
 */
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "dce/cavity_model.hpp"
#include "dce/particle_spectrum.hpp"

namespace dce {

/// Secular branches of the first-order solution for initial label n.
enum class ResonanceBranch {
  creation,   ///< k = gamma - n, coefficient v^+_{k+,n-}; feeds beta
  upshift,    ///< k = n + gamma, coefficient v^-_{k-,n-}; feeds alpha
  downshift,  ///< k = n - gamma, coefficient v^+_{k-,n-}; feeds alpha
};

inline std::string to_string(ResonanceBranch b) {
  switch (b) {
    case ResonanceBranch::creation: return "creation";
    case ResonanceBranch::upshift: return "upshift";
    case ResonanceBranch::downshift: return "downshift";
  }
  return "?";
}

struct ResonanceEntry {
  int n = 0;
  int k = 0;
  ResonanceBranch branch = ResonanceBranch::creation;
  int s = 1;      ///< drive harmonic e^{s i Omega t}
  int sigma = 1;  ///< component of mode k the term lands in
  double v = 0.0;
};

struct ResonanceTable {
  int gamma = 0;
  std::vector<ResonanceEntry> entries;

  std::vector<ResonanceEntry> branch(ResonanceBranch b) const {
    std::vector<ResonanceEntry> out;
    for (const auto& e : entries)
      if (e.branch == b) out.push_back(e);
    return out;
  }
};

inline int require_integer_gamma(double gamma, const char* who) {
  if (gamma != std::round(gamma) || gamma < 1.0)
    throw std::invalid_argument(std::string(who) +
                                ": the closed-form resonance result needs an exact integer drive ratio gamma >= 1 "
                                "(got " + std::to_string(gamma) + "); detuned drives must be integrated numerically");
  return static_cast<int>(gamma);
}

/// All (n, k) in [1, K]^2 on one of the three secular branches.
inline ResonanceTable resonance_table(int gamma, int K) {
  if (gamma < 1) throw std::invalid_argument("resonance_table: gamma must be a positive integer");
  ResonanceTable t{gamma, {}};
  for (int n = 1; n <= K; ++n) {
    for (int k = 1; k <= K; ++k) {
      if (k == gamma - n)
        t.entries.push_back({n, k, ResonanceBranch::creation, 1, 1, coupling_v(1, SignedMode(k), SignedMode(-n), gamma)});
      if (k == n + gamma)
        t.entries.push_back({n, k, ResonanceBranch::upshift, -1, -1, coupling_v(-1, SignedMode(-k), SignedMode(-n), gamma)});
      if (k == n - gamma)
        t.entries.push_back({n, k, ResonanceBranch::downshift, 1, -1, coupling_v(1, SignedMode(-k), SignedMode(-n), gamma)});
    }
  }
  return t;
}

/// beta_nk = eps omega_1 T v^+_{k+,n-} delta_{k, gamma-n}.
inline double beta_first_order(int n, int k, const CavityConfig& cfg) {
  const int gamma = require_integer_gamma(cfg.gamma, "beta_first_order");
  if (n < 1 || k < 1) throw std::invalid_argument("beta_first_order: mode labels must be positive");
  if (k != gamma - n) return 0.0;
  return cfg.epsilon * cfg.T * coupling_v(1, SignedMode(k), SignedMode(-n), gamma);
}

enum class ShortTimeRegime { valid, marginal, invalid };

/// Guardrail on eps omega_1 T: marginal above 0.3, invalid above 1.
inline ShortTimeRegime short_time_regime(const CavityConfig& cfg) {
  const double x = cfg.epsilon * cfg.T;
  if (x > 1.0) return ShortTimeRegime::invalid;
  if (x > 0.3) return ShortTimeRegime::marginal;
  return ShortTimeRegime::valid;
}

/// N_k = (gamma - k) k (eps omega_1 T)^2 / 4 for k < gamma, zero otherwise.
inline ParticleSpectrum particle_spectrum_perturbative(const CavityConfig& cfg) {
  const int gamma = require_integer_gamma(cfg.gamma, "particle_spectrum_perturbative");
  if (short_time_regime(cfg) == ShortTimeRegime::invalid)
    throw std::domain_error("particle_spectrum_perturbative: eps*omega_1*T = " + std::to_string(cfg.epsilon * cfg.T) +
                            " exceeds 1; the first-order spectrum is outside its short-time regime");
  ParticleSpectrum s;
  s.method = SpectrumMethod::perturbative;
  s.params = cfg;
  s.N.assign(static_cast<std::size_t>(cfg.K), 0.0);
  const double x = cfg.epsilon * cfg.T;
  for (int k = 1; k < gamma && k <= cfg.K; ++k) s.N[static_cast<std::size_t>(k - 1)] = 0.25 * (gamma - k) * k * x * x;
  return s;
}

/// Mode(s) receiving the most photons: gamma/2, or (gamma -+ 1)/2 for odd gamma.
inline std::vector<int> dominant_mode(int gamma) {
  if (gamma < 2) throw std::invalid_argument("dominant_mode: gamma must be >= 2 (gamma = 1 creates no photons at first order)");
  if (gamma % 2 == 0) return {gamma / 2};
  return {(gamma - 1) / 2, (gamma + 1) / 2};
}

}  // namespace dce
