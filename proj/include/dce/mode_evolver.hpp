/**
 * @file mode_evolver.hpp
 * @brief Truncated coupled-mode dynamics of the oscillating cavity.
 *
 * State vectors use the amplitudes
 *   X_{k-} = sqrt(w_k/2) (Q_k + i P_k / w_k),  X_{k+} = sqrt(w_k/2) (Q_k - i P_k / w_k)
 * with the rest frequencies w_k = k omega_1. In signed notation X_{-k} is the
 * sigma = - (alpha carrying) amplitude and X_{+k} the sigma = + (beta carrying)
 * amplitude of mode k.
 *
 * Storage is transposed relative to the X_{n,k} notation: rows are signed
 * modes ordered -K..-1, 1..K and columns are solutions (initial-mode label n
 * in column n-1, or basis vectors for the monodromy).
 */
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dce/cavity_model.hpp"
#include "dce/particle_spectrum.hpp"

namespace dce {

using cplx = std::complex<double>;

enum class Dynamics { exact, linearized };

inline std::string to_string(Dynamics d) { return d == Dynamics::exact ? "exact" : "linearized"; }

/// Raised when the integrated state stops being finite.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(double time, const std::string& what) : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Positive mode numbers retained in a simulation and their row positions.
class ModeLayout {
 public:
  explicit ModeLayout(std::vector<int> modes) : modes_(std::move(modes)) {
    if (modes_.empty()) throw std::invalid_argument("ModeLayout: at least one mode is required");
    for (std::size_t i = 0; i < modes_.size(); ++i) {
      if (modes_[i] < 1) throw std::invalid_argument("ModeLayout: mode numbers must be positive");
      if (i > 0 && modes_[i] <= modes_[i - 1]) throw std::invalid_argument("ModeLayout: modes must be strictly ascending");
    }
  }

  static ModeLayout window(int K) {
    std::vector<int> m(static_cast<std::size_t>(K));
    for (int k = 1; k <= K; ++k) m[static_cast<std::size_t>(k - 1)] = k;
    return ModeLayout(std::move(m));
  }

  int count() const { return static_cast<int>(modes_.size()); }
  int rows() const { return 2 * count(); }
  const std::vector<int>& modes() const { return modes_; }
  int mode(int position) const { return modes_[static_cast<std::size_t>(position)]; }

  /// Position of mode number m in modes(), or -1.
  int position(int m) const {
    auto it = std::lower_bound(modes_.begin(), modes_.end(), m);
    if (it == modes_.end() || *it != m) return -1;
    return static_cast<int>(it - modes_.begin());
  }

  int row(int signed_k) const {
    const int p = position(std::abs(signed_k));
    if (signed_k == 0 || p < 0) throw std::out_of_range("ModeLayout: mode " + std::to_string(signed_k) + " not retained");
    return signed_k < 0 ? count() - 1 - p : count() + p;
  }

  int signed_mode(int row) const {
    const int n = count();
    return row < n ? -modes_[static_cast<std::size_t>(n - 1 - row)] : modes_[static_cast<std::size_t>(row - n)];
  }

  friend bool operator==(const ModeLayout& a, const ModeLayout& b) { return a.modes_ == b.modes_; }

 private:
  std::vector<int> modes_;
};

struct ModeState {
  double t = 0.0;
  ModeLayout layout = ModeLayout::window(1);
  Eigen::MatrixXcd X;

  /// X_{n,k}: solution with initial-mode label n, signed component k.
  cplx amplitude(int n, int signed_k) const { return X(layout.row(signed_k), n - 1); }
};

/// X_{n,-k}(0) = delta_nk, X_{n,+k}(0) = 0.
inline ModeState initial_state(const CavityConfig& cfg) {
  ModeState s;
  s.t = 0.0;
  s.layout = ModeLayout::window(cfg.K);
  s.X = Eigen::MatrixXcd::Zero(s.layout.rows(), cfg.K);
  for (int n = 1; n <= cfg.K; ++n) s.X(s.layout.row(-n), n - 1) = 1.0;
  return s;
}

/// Q_{nk} and P_{nk} recovered from a state; both indexed (mode position, column).
struct CanonicalAmplitudes {
  Eigen::MatrixXcd Q;
  Eigen::MatrixXcd P;
};

inline CanonicalAmplitudes to_canonical(const ModeState& s, const CavityConfig& cfg) {
  const int n = s.layout.count();
  CanonicalAmplitudes c{Eigen::MatrixXcd(n, s.X.cols()), Eigen::MatrixXcd(n, s.X.cols())};
  for (int p = 0; p < n; ++p) {
    const double w = s.layout.mode(p) * cfg.omega1();
    const auto xm = s.X.row(n - 1 - p);
    const auto xp = s.X.row(n + p);
    c.Q.row(p) = (xm + xp) / std::sqrt(2.0 * w);
    c.P.row(p) = cplx(0.0, -std::sqrt(w / 2.0)) * (xm - xp);
  }
  return c;
}

/// Right-hand side dX/dt of the truncated coupled-mode system.
///
/// The linearized dynamics is dX/dt = [V0 + eps V1(t)] X with
/// V0 = diag(i k omega_1) and V1 = omega_1 sum_s v^s e^{s i Omega t}. The exact
/// dynamics evaluates, in (Q, P = dQ/dt) form,
///   Pdot_k = -w_k(t)^2 Q_k + 2 lambda (G P)_k + lambdadot (G Q)_k + lambda^2 (G^T G Q)_k
/// with the full wall law, then maps back to X using rest frequencies.
class CoupledModeSystem {
 public:
  CoupledModeSystem(const CavityConfig& cfg, Dynamics dynamics, WallMotion motion = WallMotion::finite)
      : CoupledModeSystem(cfg, dynamics, ModeLayout::window(cfg.K), motion) {}

  CoupledModeSystem(const CavityConfig& cfg, Dynamics dynamics, ModeLayout layout, WallMotion motion)
      : cfg_(cfg), dynamics_(dynamics), motion_(motion), layout_(std::move(layout)) {
    build();
  }

  const CavityConfig& config() const { return cfg_; }
  Dynamics dynamics() const { return dynamics_; }
  WallMotion motion() const { return motion_; }
  const ModeLayout& layout() const { return layout_; }

  /// Multiplies every g-proportional coupling (sensitivity probes and
  /// mutation tests). The frequency-modulation term is left untouched.
  void scale_couplings(double factor) {
    coupling_scale_ = factor;
    build();
  }

  /// True when the wall moves somewhere inside (t0, t1).
  bool wall_moving(double t_mid) const {
    return motion_ == WallMotion::periodic || (t_mid > 0.0 && t_mid < cfg_.stop_time());
  }

  /// dX/dt at time t; `moving` selects the moving-wall or rest-wall branch so
  /// that a step lying inside one phase sees a smooth right-hand side even at
  /// its endpoints.
  void derivative(double t, const Eigen::MatrixXcd& X, Eigen::MatrixXcd& dX, bool moving) const {
    if (X.rows() != layout_.rows())
      throw std::invalid_argument("CoupledModeSystem: state has " + std::to_string(X.rows()) + " rows, expected " +
                                  std::to_string(layout_.rows()));
    if (!moving || cfg_.epsilon == 0.0) {
      dX = rest_rate_.asDiagonal() * X;
      return;
    }
    if (dynamics_ == Dynamics::linearized)
      linearized(t, X, dX);
    else
      exact(t, X, dX);
  }

  void derivative(double t, const Eigen::MatrixXcd& X, Eigen::MatrixXcd& dX) const {
    derivative(t, X, dX, wall_moving(t));
  }

  /// omega_1 v^s as a dense matrix over signed rows (s = +1 or -1).
  const Eigen::MatrixXd& drive_coupling(int s) const { return s > 0 ? v_plus_ : v_minus_; }

 private:
  void build() {
    const int n = layout_.count();
    const int rows = layout_.rows();
    const double w1 = cfg_.omega1();
    rest_rate_.resize(rows);
    for (int r = 0; r < rows; ++r) rest_rate_(r) = cplx(0.0, layout_.signed_mode(r) * w1);

    v_plus_.setZero(rows, rows);
    v_minus_.setZero(rows, rows);
    for (int a = 0; a < rows; ++a) {
      const SignedMode k(layout_.signed_mode(a));
      for (int b = 0; b < rows; ++b) {
        const SignedMode j(layout_.signed_mode(b));
        for (int s : {1, -1}) {
          double v = coupling_scale_ * cfg_.gamma * coupling_g(k, j) * std::sqrt(std::abs(double(j.value()) / k.value())) *
                     (0.5 + s * cfg_.gamma / (4.0 * j.value()));
          if (k.mode() == j.mode()) v -= s * k.value() / 2.0;
          (s > 0 ? v_plus_ : v_minus_)(a, b) = w1 * v;
        }
      }
    }
    sum_ = (v_plus_ + v_minus_).cast<cplx>();
    diff_ = (v_plus_ - v_minus_).cast<cplx>();

    g_.setZero(n, n);
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) g_(p, q) = coupling_scale_ * coupling_g(layout_.mode(p), layout_.mode(q));
    gtg_ = g_.transpose() * g_;
    g_c_ = g_.cast<cplx>();
    omega_.resize(n);
    for (int p = 0; p < n; ++p) omega_(p) = layout_.mode(p) * w1;
  }

  void linearized(double t, const Eigen::MatrixXcd& X, Eigen::MatrixXcd& dX) const {
    const double th = cfg_.drive_frequency() * t;
    // e^{i th} V+ + e^{-i th} V- = cos(th) (V+ + V-) + i sin(th) (V+ - V-)
    drive_.noalias() = (cfg_.epsilon * std::cos(th)) * sum_;
    drive_.noalias() += cplx(0.0, cfg_.epsilon * std::sin(th)) * diff_;
    dX.noalias() = drive_ * X;
    dX.noalias() += rest_rate_.asDiagonal() * X;
  }

  void exact(double t, const Eigen::MatrixXcd& X, Eigen::MatrixXcd& dX) const {
    const int n = layout_.count();
    const Eigen::Index cols = X.cols();
    const WallRates r = wall_log_derivatives(t, cfg_, WallMotion::periodic);
    const double lambda = r.lambda;
    const double lambda_dot = r.accel_ratio - lambda * lambda;
    const double stretch = 1.0 + cfg_.epsilon * std::sin(cfg_.drive_frequency() * t);

    q_.resize(n, cols);
    p_.resize(n, cols);
    for (int p = 0; p < n; ++p) {
      const double w = omega_(p);
      const auto xm = X.row(n - 1 - p);
      const auto xp = X.row(n + p);
      q_.row(p) = (xm + xp) / std::sqrt(2.0 * w);
      p_.row(p) = cplx(0.0, -std::sqrt(w / 2.0)) * (xm - xp);
    }
    pdot_.noalias() = (2.0 * lambda) * (g_c_ * p_);
    pdot_.noalias() += (lambda_dot * g_ + (lambda * lambda) * gtg_).cast<cplx>() * q_;
    dX.resize(X.rows(), cols);
    for (int p = 0; p < n; ++p) {
      const double w = omega_(p);
      const double wt = w / stretch;
      pdot_.row(p) -= (wt * wt) * q_.row(p);
      const double a = std::sqrt(w / 2.0);
      dX.row(n - 1 - p) = a * (p_.row(p) + cplx(0.0, 1.0 / w) * pdot_.row(p));
      dX.row(n + p) = a * (p_.row(p) - cplx(0.0, 1.0 / w) * pdot_.row(p));
    }
  }

  CavityConfig cfg_;
  Dynamics dynamics_;
  WallMotion motion_;
  ModeLayout layout_;
  double coupling_scale_ = 1.0;

  Eigen::VectorXcd rest_rate_;
  Eigen::MatrixXd v_plus_, v_minus_;
  Eigen::MatrixXcd sum_, diff_;
  Eigen::MatrixXd g_, gtg_;
  Eigen::MatrixXcd g_c_;
  Eigen::VectorXd omega_;

  mutable Eigen::MatrixXcd drive_, q_, p_, pdot_;
};

/// Point evaluation of the right-hand side; the wall phase is taken at t.
inline ModeState system_rhs(const ModeState& state, double t, const CavityConfig& cfg, Dynamics dynamics) {
  if (state.layout.count() != cfg.K)
    throw std::invalid_argument("system_rhs: state holds " + std::to_string(state.layout.count()) +
                                " modes, config K = " + std::to_string(cfg.K));
  CoupledModeSystem sys(cfg, dynamics, state.layout, WallMotion::finite);
  ModeState out{t, state.layout, {}};
  sys.derivative(t, state.X, out.X);
  return out;
}

namespace detail {

inline void check_finite(const Eigen::MatrixXcd& X, double t) {
  if (!X.allFinite()) {
    std::ostringstream os;
    os << "integration produced non-finite amplitudes at t = " << t
       << " (parametric blow-up or step too large for the retained modes)";
    throw IntegrationError(t, os.str());
  }
}

/// Classical RK4 over [t0, t1] with steps of h; the last step is shortened so
/// the state lands exactly on t1. The wall phase is fixed for the segment.
inline void rk4_segment(const CoupledModeSystem& sys, Eigen::MatrixXcd& X, double t0, double t1, double h) {
  if (!(t1 > t0)) return;
  const bool moving = sys.wall_moving(0.5 * (t0 + t1));
  const double span = t1 - t0;
  auto full = static_cast<long long>(std::floor(span / h));
  double rem = span - static_cast<double>(full) * h;
  if (rem < 1e-9 * h) {
    rem = 0.0;
  } else if (h - rem < 1e-9 * h) {
    ++full;
    rem = 0.0;
  }
  const long long total = full + (rem > 0.0 ? 1 : 0);

  Eigen::MatrixXcd k1, k2, k3, k4, tmp;
  for (long long i = 0; i < total; ++i) {
    const double t = t0 + static_cast<double>(i) * h;
    const double step = (i == total - 1) ? (t1 - t) : h;
    sys.derivative(t, X, k1, moving);
    tmp = X + (0.5 * step) * k1;
    sys.derivative(t + 0.5 * step, tmp, k2, moving);
    tmp = X + (0.5 * step) * k2;
    sys.derivative(t + 0.5 * step, tmp, k3, moving);
    tmp = X + step * k3;
    sys.derivative(t + step, tmp, k4, moving);
    X += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check_finite(X, t + step);
  }
}

}  // namespace detail

/// Advances `state` to t_end with fixed step h, splitting at the wall's
/// start and stop times so that no step straddles a velocity kink.
inline void propagate(const CoupledModeSystem& sys, ModeState& state, double t_end, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("propagate: step must be positive");
  if (state.X.rows() != sys.layout().rows()) throw std::invalid_argument("propagate: state/system dimension mismatch");
  std::vector<double> cuts{state.t};
  if (sys.motion() == WallMotion::finite) {
    for (double c : {0.0, sys.config().stop_time()})
      if (c > state.t && c < t_end) cuts.push_back(c);
  }
  cuts.push_back(t_end);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) detail::rk4_segment(sys, state.X, cuts[i], cuts[i + 1], h);
  state.t = t_end;
}

/// Integrates the initial state from t = 0 to t_end with h = drive_period / steps_per_period.
inline ModeState integrate(const CavityConfig& cfg, Dynamics dynamics, double t_end) {
  cfg.validate();
  if (!(t_end > 0.0)) throw std::invalid_argument("integrate: t_end must be positive");
  CoupledModeSystem sys(cfg, dynamics);
  ModeState s = initial_state(cfg);
  propagate(sys, s, t_end, cfg.drive_period() / cfg.steps_per_period);
  return s;
}

inline ModeState integrate(const CavityConfig& cfg, Dynamics dynamics) {
  return integrate(cfg, dynamics, cfg.stop_time());
}

struct BogoliubovMatrices {
  Eigen::MatrixXcd alpha;  ///< alpha(n-1, k-1) = alpha_{nk}
  Eigen::MatrixXcd beta;   ///< beta(n-1, k-1) = beta_{nk}
  double T = 0.0;          ///< extraction time

  /// r_k = |sum_n (|alpha_nk|^2 - |beta_nk|^2) - 1| for k = 1..K.
  Eigen::VectorXd unitarity_residuals() const {
    const Eigen::VectorXd col =
        (alpha.cwiseAbs2() - beta.cwiseAbs2()).colwise().sum().transpose() - Eigen::VectorXd::Ones(alpha.cols());
    return col.cwiseAbs();
  }
};

/// alpha_{nk} = X_{n,-k} e^{+i w_k t}, beta_{nk} = X_{n,+k} e^{-i w_k t}.
inline BogoliubovMatrices extract_bogoliubov(const ModeState& state, const CavityConfig& cfg) {
  const double stop = cfg.stop_time();
  if (state.t < stop * (1.0 - 1e-12))
    throw std::invalid_argument("extract_bogoliubov: state at t = " + std::to_string(state.t) +
                                " is before the wall stops (T = " + std::to_string(stop) + ")");
  const int K = state.layout.count();
  if (state.X.cols() != K) throw std::invalid_argument("extract_bogoliubov: expected one column per initial mode");
  BogoliubovMatrices b{Eigen::MatrixXcd(K, K), Eigen::MatrixXcd(K, K), state.t};
  for (int p = 0; p < K; ++p) {
    const int k = state.layout.mode(p);
    const double ph = k * cfg.omega1() * state.t;
    const cplx fwd = std::polar(1.0, ph);
    const cplx bwd = std::polar(1.0, -ph);
    for (int n = 0; n < K; ++n) {
      b.alpha(n, p) = state.X(state.layout.row(-k), n) * fwd;
      b.beta(n, p) = state.X(state.layout.row(k), n) * bwd;
    }
  }
  return b;
}

/// N_k = sum_n |beta_nk|^2.
inline ParticleSpectrum particle_spectrum_numeric(const BogoliubovMatrices& bog, const CavityConfig& params) {
  ParticleSpectrum s;
  s.method = SpectrumMethod::numeric;
  s.params = params;
  const Eigen::VectorXd n = bog.beta.cwiseAbs2().colwise().sum().transpose();
  s.N.assign(n.data(), n.data() + n.size());
  return s;
}

/// One-period propagator Phi(tau) of `sys` (which should use periodic motion).
inline Eigen::MatrixXcd monodromy(const CoupledModeSystem& sys, int steps) {
  if (steps < 1) throw std::invalid_argument("monodromy: steps must be positive");
  const double tau = sys.config().drive_period();
  ModeState s{0.0, sys.layout(), Eigen::MatrixXcd::Identity(sys.layout().rows(), sys.layout().rows())};
  detail::rk4_segment(sys, s.X, 0.0, tau, tau / steps);
  return s.X;
}

/// Monodromy over tau = 2 pi / Omega for the eternally oscillating wall.
inline Eigen::MatrixXcd monodromy(const CavityConfig& cfg, Dynamics dynamics, int steps) {
  CoupledModeSystem sys(cfg, dynamics, WallMotion::periodic);
  return monodromy(sys, steps);
}

inline Eigen::MatrixXcd monodromy(const CavityConfig& cfg, Dynamics dynamics) {
  return monodromy(cfg, dynamics, cfg.steps_per_period);
}

/// Largest log|multiplier| / tau, i.e. the asymptotic exponential growth rate.
inline double max_growth_rate(const Eigen::MatrixXcd& phi, double tau) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(phi, false);
  return es.eigenvalues().cwiseAbs().array().log().maxCoeff() / tau;
}

/// Growth rate of a single isolated mode k (all g couplings absent): a
/// Mathieu-type oscillator with parametrically modulated frequency.
inline double single_mode_growth_rate(int k, double gamma, double epsilon, Dynamics dynamics, int steps = 2048) {
  CavityConfig cfg;
  cfg.gamma = gamma;
  cfg.epsilon = epsilon;
  cfg.K = k;
  CoupledModeSystem sys(cfg, dynamics, ModeLayout({k}), WallMotion::periodic);
  return max_growth_rate(monodromy(sys, steps), cfg.drive_period());
}

}  // namespace dce
