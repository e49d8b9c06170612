/**
 * @file cavity_model.hpp
 * @brief Geometry, wall trajectory, mode frequencies and mode-coupling
 *        coefficients of a 1D cavity whose right wall oscillates as
 *        L(t) = L0 [1 + eps sin(Omega t)] for 0 < t < T.
 *
 * Units: c = 1. The fundamental rest frequency is omega_1 = pi / L0, the
 * drive frequency is Omega = gamma * omega_1. CavityConfig::T is given in
 * units of 1/omega_1; physical times passed to the functions below are in
 * the same units as L0 (stop_time() converts).
 */
#pragma once

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dce {

/// Wall schedule. `finite` stops the wall outside (0, T); `periodic` ignores T
/// (used for one-period monodromy integration).
enum class WallMotion { finite, periodic };

/// Mode truncation used when a config does not set K explicitly.
inline int default_truncation(double gamma) {
  const int g = static_cast<int>(std::ceil(gamma));
  return g * 4 > 16 ? g * 4 : 16;
}

struct CavityConfig {
  double L0 = std::numbers::pi;  ///< rest length; pi gives omega_1 = 1
  double epsilon = 1e-3;         ///< wall amplitude ratio
  double gamma = 2.0;            ///< drive ratio Omega / omega_1
  int K = 16;                    ///< number of retained modes 1..K
  double T = 100.0;              ///< stop time in units of 1/omega_1
  int steps_per_period = 64;     ///< RK4 steps per drive period

  double omega1() const { return std::numbers::pi / L0; }
  double drive_frequency() const { return gamma * omega1(); }
  double drive_period() const { return 2.0 * std::numbers::pi / drive_frequency(); }
  /// Stop time in physical units.
  double stop_time() const { return T / omega1(); }
  bool integer_gamma() const { return gamma == std::round(gamma); }

  /// Throws std::invalid_argument naming the offending field.
  void validate() const {
    if (!(L0 > 0.0) || !std::isfinite(L0)) throw std::invalid_argument("L0: must be positive and finite");
    if (!(epsilon >= 0.0 && epsilon < 1.0))
      throw std::invalid_argument("epsilon: must satisfy 0 <= epsilon < 1 so that L(t) stays positive");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma: must be positive and finite");
    if (K < 1) throw std::invalid_argument("K: must be a positive integer");
    if (integer_gamma() && K < static_cast<int>(gamma) + 1)
      throw std::invalid_argument("K: must be at least gamma + 1 for integer gamma (resonance partner k = gamma - n)");
    if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("T: must be positive and finite");
    if (steps_per_period < 1) throw std::invalid_argument("steps_per_period: must be a positive integer");
  }
};

/// Nonzero signed mode label: k > 0 is the sigma = + component of mode |k|,
/// k < 0 the sigma = - component.
class SignedMode {
 public:
  explicit SignedMode(int value) : value_(value) {
    if (value == 0) throw std::invalid_argument("SignedMode: index must be nonzero");
  }
  int value() const { return value_; }
  int mode() const { return std::abs(value_); }
  int sign() const { return value_ > 0 ? 1 : -1; }

  friend bool operator==(SignedMode a, SignedMode b) { return a.value_ == b.value_; }

 private:
  int value_;
};

inline double wall_position(double t, const CavityConfig& cfg, WallMotion motion = WallMotion::finite) {
  if (motion == WallMotion::finite && (t <= 0.0 || t >= cfg.stop_time())) return cfg.L0;
  return cfg.L0 * (1.0 + cfg.epsilon * std::sin(cfg.drive_frequency() * t));
}

/// lambda = Ldot/L and Lddot/L, exact and to first order in epsilon.
struct WallRates {
  double lambda = 0.0;
  double accel_ratio = 0.0;
  double lambda_linear = 0.0;
  double accel_ratio_linear = 0.0;
};

/// Zero outside the motion window (wall at rest) unless `motion` is periodic.
inline WallRates wall_log_derivatives(double t, const CavityConfig& cfg, WallMotion motion = WallMotion::finite) {
  if (motion == WallMotion::finite && (t <= 0.0 || t >= cfg.stop_time())) return {};
  const double w = cfg.drive_frequency();
  const double s = std::sin(w * t);
  const double c = std::cos(w * t);
  const double denom = 1.0 + cfg.epsilon * s;
  WallRates r;
  r.lambda_linear = cfg.epsilon * w * c;
  r.accel_ratio_linear = -cfg.epsilon * w * w * s;
  r.lambda = r.lambda_linear / denom;
  r.accel_ratio = r.accel_ratio_linear / denom;
  return r;
}

enum class FrequencyModel { exact, linearized };

/// omega_k(t) = k pi / L(t); the linearized model keeps the first order in epsilon.
inline double mode_frequency(int k, double t, const CavityConfig& cfg, FrequencyModel model = FrequencyModel::exact,
                             WallMotion motion = WallMotion::finite) {
  if (k < 1) throw std::invalid_argument("mode_frequency: k must be >= 1");
  const double rest = k * cfg.omega1();
  if (model == FrequencyModel::exact) return k * std::numbers::pi / wall_position(t, cfg, motion);
  if (motion == WallMotion::finite && (t <= 0.0 || t >= cfg.stop_time())) return rest;
  return rest * (1.0 - cfg.epsilon * std::sin(cfg.drive_frequency() * t));
}

/// omega_k^2 (1 - 2 eps sin(Omega t)), the squared frequency used by the
/// first-order coupled-mode system.
inline double mode_frequency_squared_linearized(int k, double t, const CavityConfig& cfg,
                                                WallMotion motion = WallMotion::finite) {
  const double rest = k * cfg.omega1();
  if (motion == WallMotion::finite && (t <= 0.0 || t >= cfg.stop_time())) return rest * rest;
  return rest * rest * (1.0 - 2.0 * cfg.epsilon * std::sin(cfg.drive_frequency() * t));
}

/// g_kj = (-1)^(k-j) 2kj / (j^2 - k^2), zero when |j| == |k|.
inline double coupling_g(SignedMode k, SignedMode j) {
  if (k.mode() == j.mode()) return 0.0;
  const double kk = k.value();
  const double jj = j.value();
  const double parity = (std::abs(k.value() - j.value()) % 2 == 0) ? 1.0 : -1.0;
  return parity * 2.0 * kk * jj / (jj * jj - kk * kk);
}

inline double coupling_g(int k, int j) { return coupling_g(SignedMode(k), SignedMode(j)); }

/// v^s_{k,j} = gamma g_kj sqrt|j/k| (1/2 + s gamma/(4j)) - s (k/2) delta_{|k|,|j|}
/// with signed indices; s = +1 multiplies exp(+i Omega t), s = -1 exp(-i Omega t).
inline double coupling_v(int s, SignedMode k, SignedMode j, double gamma) {
  if (s != 1 && s != -1) throw std::invalid_argument("coupling_v: s must be +1 or -1");
  const double kk = k.value();
  const double jj = j.value();
  double v = gamma * coupling_g(k, j) * std::sqrt(std::abs(jj / kk)) * (0.5 + s * gamma / (4.0 * jj));
  if (k.mode() == j.mode()) v -= s * kk / 2.0;
  return v;
}

inline double coupling_v(int s, int k, int j, double gamma) {
  return coupling_v(s, SignedMode(k), SignedMode(j), gamma);
}

/// Four-index form v^s_{k sigma, j sigma'} for positive mode numbers k, j.
inline double coupling_v(int s, int k, int sigma, int j, int sigma_prime, double gamma) {
  if (k < 1 || j < 1) throw std::invalid_argument("coupling_v: mode numbers must be positive");
  if (std::abs(sigma) != 1 || std::abs(sigma_prime) != 1)
    throw std::invalid_argument("coupling_v: sigma labels must be +1 or -1");
  return coupling_v(s, SignedMode(sigma * k), SignedMode(sigma_prime * j), gamma);
}

}  // namespace dce
