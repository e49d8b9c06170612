/**
 * @file floquet.hpp
 * @brief Long-time behaviour through first-order Floquet exponents.
 *
 * Writing X_k(t) = e^{eps mu omega_1 t} C_k e^{i k omega_1 t} and removing the
 * secular terms of the first-order equation gives the three-term recurrence
 *
 *     v^-_{k,k+gamma} C_{k+gamma} - mu C_k + v^+_{k,k-gamma} C_{k-gamma} = 0
 *
 * over nonzero signed indices k. Since mu only sits on the diagonal, the
 * characteristic exponents are the eigenvalues of the real coupling matrix A
 * with A[k, k+gamma] = v^-, A[k, k-gamma] = v^+.
 */
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dce/cavity_model.hpp"
#include "dce/mode_evolver.hpp"

namespace dce {

/// eq44 evaluates the signed-index couplings literally; printed4x4 doubles the
/// |k| == |j| (k <-> -k) entries, which reproduces the matrix printed for the
/// gamma = 2 example with modes {-3, -1, 1, 3}.
enum class RecurrenceVariant { eq44, printed4x4 };

inline std::string to_string(RecurrenceVariant v) { return v == RecurrenceVariant::eq44 ? "eq44" : "printed4x4"; }

inline RecurrenceVariant parse_recurrence_variant(const std::string& s) {
  if (s == "eq44") return RecurrenceVariant::eq44;
  if (s == "printed4x4") return RecurrenceVariant::printed4x4;
  throw std::invalid_argument("unknown recurrence variant '" + s + "' (expected eq44 or printed4x4)");
}

struct RecurrenceMatrix {
  int gamma = 0;
  std::vector<int> modes;  ///< signed indices, ascending
  RecurrenceVariant variant = RecurrenceVariant::eq44;
  Eigen::MatrixXd A;

  /// Row/column of signed index k, or -1 when k is outside the window.
  int index(int k) const {
    auto it = std::lower_bound(modes.begin(), modes.end(), k);
    return (it != modes.end() && *it == k) ? static_cast<int>(it - modes.begin()) : -1;
  }
};

/// Signed window -K..-1, 1..K.
inline std::vector<int> signed_window(int K) {
  std::vector<int> m;
  m.reserve(static_cast<std::size_t>(2 * K));
  for (int k = -K; k <= K; ++k)
    if (k != 0) m.push_back(k);
  return m;
}

/// Couplings that leave the given index set are dropped.
inline RecurrenceMatrix build_recurrence_matrix(int gamma, std::vector<int> modes, RecurrenceVariant variant) {
  if (gamma < 1) throw std::invalid_argument("build_recurrence_matrix: gamma must be a positive integer");
  std::sort(modes.begin(), modes.end());
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (modes[i] == 0) throw std::invalid_argument("build_recurrence_matrix: signed indices must be nonzero");
    if (i > 0 && modes[i] == modes[i - 1]) throw std::invalid_argument("build_recurrence_matrix: duplicate index");
  }
  RecurrenceMatrix r{gamma, std::move(modes), variant, {}};
  const int n = static_cast<int>(r.modes.size());
  r.A.setZero(n, n);
  for (int a = 0; a < n; ++a) {
    const int k = r.modes[static_cast<std::size_t>(a)];
    for (const auto& [j, s] : {std::pair{k + gamma, -1}, std::pair{k - gamma, 1}}) {
      if (j == 0) continue;
      const int b = r.index(j);
      if (b < 0) continue;
      double v = coupling_v(s, SignedMode(k), SignedMode(j), gamma);
      if (variant == RecurrenceVariant::printed4x4 && std::abs(j) == std::abs(k)) v *= 2.0;
      r.A(a, b) = v;
    }
  }
  return r;
}

inline RecurrenceMatrix build_recurrence_matrix(int gamma, int K, RecurrenceVariant variant) {
  if (K < gamma)
    throw std::invalid_argument("build_recurrence_matrix: truncation K = " + std::to_string(K) +
                                " is smaller than gamma = " + std::to_string(gamma));
  return build_recurrence_matrix(gamma, signed_window(K), variant);
}

struct FloquetSpectrum {
  std::vector<int> modes;      ///< signed indices labelling the vector components
  Eigen::VectorXcd exponents;  ///< mu_1^A, sorted by (Re, Im) descending
  Eigen::MatrixXcd vectors;    ///< column A is C^A (unit 2-norm)
  Eigen::VectorXd residuals;   ///< ||(A - mu^A) C^A||
  double matrix_norm = 0.0;    ///< spectral norm of A
  Eigen::MatrixXcd combination;  ///< column for label n = -1, -2, ... holds d_{nA}

  int index(int k) const {
    auto it = std::lower_bound(modes.begin(), modes.end(), k);
    return (it != modes.end() && *it == k) ? static_cast<int>(it - modes.begin()) : -1;
  }
  double max_real() const { return exponents.size() ? exponents.real().maxCoeff() : 0.0; }
};

/// Eigensolver failure; carries whatever was computed.
class EigenSolveError : public std::runtime_error {
 public:
  EigenSolveError(const std::string& what, Eigen::VectorXcd partial, Eigen::VectorXd residuals)
      : std::runtime_error(what), partial_(std::move(partial)), residuals_(std::move(residuals)) {}
  const Eigen::VectorXcd& partial_spectrum() const { return partial_; }
  const Eigen::VectorXd& residuals() const { return residuals_; }

 private:
  Eigen::VectorXcd partial_;
  Eigen::VectorXd residuals_;
};

/// Relative residual bound every returned eigenpair must meet.
inline constexpr double kEigenResidualTolerance = 1e-10;
/// Inverse-iteration sweeps allowed per eigenpair before giving up.
inline constexpr int kRefinementIterations = 8;

namespace detail {

inline void normalize_phase(Eigen::Ref<Eigen::VectorXcd> v) {
  v.normalize();
  Eigen::Index best = 0;
  const double top = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) >= top * (1.0 - 1e-9)) {
      best = i;
      break;
    }
  }
  v *= std::conj(v(best)) / std::abs(v(best));
}

}  // namespace detail

inline FloquetSpectrum characteristic_exponents(const RecurrenceMatrix& rec) {
  const Eigen::MatrixXd& A = rec.A;
  if (!A.allFinite()) throw std::invalid_argument("characteristic_exponents: matrix has non-finite entries");
  const Eigen::Index n = A.rows();
  FloquetSpectrum spec;
  spec.modes = rec.modes;
  spec.matrix_norm = n ? Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues()(0) : 0.0;
  const double tol = kEigenResidualTolerance * std::max(spec.matrix_norm, 1e-300);

  Eigen::EigenSolver<Eigen::MatrixXd> es(A, true);
  if (es.info() != Eigen::Success)
    throw EigenSolveError("characteristic_exponents: QR iteration did not converge", es.eigenvalues(),
                          Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity()));

  Eigen::VectorXcd mu = es.eigenvalues();
  Eigen::MatrixXcd C = es.eigenvectors();
  const Eigen::MatrixXcd Ac = A.cast<cplx>();
  Eigen::VectorXd res(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXcd v = C.col(i).normalized();
    double r = (Ac * v - mu(i) * v).norm();
    // Inverse iteration with a slightly offset shift, then a Rayleigh update.
    const cplx offset = cplx(1e-13 * std::max(spec.matrix_norm, 1.0), 0.0);
    for (int it = 0; it < kRefinementIterations && r > tol; ++it) {
      Eigen::MatrixXcd B = Ac;
      B.diagonal().array() -= mu(i) + offset;
      Eigen::VectorXcd y = B.fullPivLu().solve(v);
      if (!y.allFinite() || y.norm() == 0.0) break;
      v = y.normalized();
      mu(i) = v.dot(Ac * v);
      r = (Ac * v - mu(i) * v).norm();
    }
    C.col(i) = v;
    res(i) = r;
  }
  if ((res.array() > tol).any()) {
    std::ostringstream os;
    os << "characteristic_exponents: residual " << res.maxCoeff() << " exceeds " << tol << " after "
       << kRefinementIterations << " refinement sweeps";
    throw EigenSolveError(os.str(), mu, res);
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (mu(a).real() != mu(b).real()) return mu(a).real() > mu(b).real();
    return mu(a).imag() > mu(b).imag();
  });
  spec.exponents.resize(n);
  spec.vectors.resize(n, n);
  spec.residuals.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index src = order[static_cast<std::size_t>(i)];
    spec.exponents(i) = mu(src);
    spec.vectors.col(i) = C.col(src);
    detail::normalize_phase(spec.vectors.col(i));
    spec.residuals(i) = (Ac * spec.vectors.col(i) - mu(src) * spec.vectors.col(i)).norm();
  }
  return spec;
}

/// Eigenvector matrix too close to singular to expand an initial condition.
class DegenerateSpectrumError : public std::runtime_error {
 public:
  DegenerateSpectrumError(const std::string& what, double condition)
      : std::runtime_error(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

inline constexpr double kMaxEigenvectorCondition = 1e12;

namespace detail {

inline void require_well_conditioned(const Eigen::MatrixXcd& C) {
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(C).singularValues();
  const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxEigenvectorCondition)) {
    std::ostringstream os;
    os << "eigenvector matrix condition number " << cond
       << " exceeds 1e12; the exponents are (nearly) degenerate at this truncation";
    throw DegenerateSpectrumError(os.str(), cond);
  }
}

}  // namespace detail

/// Solves sum_A d_{nA} C_k^A = delta_{nk} [n < 0] for one initial label n.
inline Eigen::VectorXcd solve_initial_coefficients(const FloquetSpectrum& spec, int n) {
  if (n == 0) throw std::invalid_argument("solve_initial_coefficients: label must be nonzero");
  const Eigen::Index dim = spec.vectors.cols();
  if (n > 0) return Eigen::VectorXcd::Zero(dim);
  const int row = spec.index(n);
  if (row < 0) throw std::out_of_range("solve_initial_coefficients: label " + std::to_string(n) + " outside the window");
  detail::require_well_conditioned(spec.vectors);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(dim);
  rhs(row) = 1.0;
  return spec.vectors.fullPivLu().solve(rhs);
}

/// Fills spec.combination with d_{nA} for n = -1, -2, ... (one column each).
inline void solve_all_initial_coefficients(FloquetSpectrum& spec) {
  detail::require_well_conditioned(spec.vectors);
  std::vector<int> labels;
  for (int k : spec.modes)
    if (k < 0) labels.push_back(k);
  std::sort(labels.begin(), labels.end(), [](int a, int b) { return a > b; });
  const auto lu = spec.vectors.fullPivLu();
  spec.combination.resize(spec.vectors.cols(), static_cast<Eigen::Index>(labels.size()));
  for (std::size_t c = 0; c < labels.size(); ++c) {
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(spec.vectors.cols());
    rhs(spec.index(labels[c])) = 1.0;
    spec.combination.col(static_cast<Eigen::Index>(c)) = lu.solve(rhs);
  }
}

/// X_{n,k}(t) = sum_A d_A e^{eps mu^A omega_1 t} C_k^A e^{i k omega_1 t}, over spec.modes.
inline Eigen::VectorXcd evaluate_solution(const FloquetSpectrum& spec, const Eigen::VectorXcd& d, double t,
                                          const CavityConfig& cfg) {
  if (d.size() != spec.exponents.size()) throw std::invalid_argument("evaluate_solution: coefficient size mismatch");
  const double w1 = cfg.omega1();
  Eigen::VectorXcd weights(d.size());
  for (Eigen::Index a = 0; a < d.size(); ++a) weights(a) = d(a) * std::exp(cfg.epsilon * spec.exponents(a) * w1 * t);
  Eigen::VectorXcd x = spec.vectors * weights;
  for (std::size_t i = 0; i < spec.modes.size(); ++i)
    x(static_cast<Eigen::Index>(i)) *= std::polar(1.0, spec.modes[i] * w1 * t);
  return x;
}

/// N_k(t) = sum_{n<0} |X_{n,+k}(t)|^2 for k = 1..max mode in the window.
inline std::vector<double> floquet_particle_numbers(const FloquetSpectrum& spec, double t, const CavityConfig& cfg) {
  if (spec.combination.cols() == 0) throw std::invalid_argument("floquet_particle_numbers: combination not solved");
  const int kmax = spec.modes.empty() ? 0 : spec.modes.back();
  std::vector<double> N(static_cast<std::size_t>(std::max(kmax, 0)), 0.0);
  for (Eigen::Index c = 0; c < spec.combination.cols(); ++c) {
    const Eigen::VectorXcd x = evaluate_solution(spec, spec.combination.col(c), t, cfg);
    for (std::size_t i = 0; i < spec.modes.size(); ++i) {
      const int k = spec.modes[i];
      if (k > 0) N[static_cast<std::size_t>(k - 1)] += std::norm(x(static_cast<Eigen::Index>(i)));
    }
  }
  return N;
}

// ---------------------------------------------------------------------------
// Monodromy oracle
// ---------------------------------------------------------------------------

class BranchTrackingError : public std::runtime_error {
 public:
  BranchTrackingError(const std::string& what, std::vector<cplx> candidates)
      : std::runtime_error(what), candidates_(std::move(candidates)) {}
  const std::vector<cplx>& candidates() const { return candidates_; }

 private:
  std::vector<cplx> candidates_;
};

struct MonodromyExponents {
  std::vector<cplx> exponents;  ///< log(multiplier)/tau on the tracked branch, (Re, Im) descending
  std::vector<int> origin;      ///< signed mode k whose i k omega_1 the branch starts from
  double epsilon = 0.0;

  double max_real() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& e : exponents) m = std::max(m, e.real());
    return m;
  }
};

inline constexpr int kMinRampSteps = 4;

namespace detail {

/// log(lambda)/tau shifted by a multiple of i Omega so Im is nearest `target`.
inline cplx lift_exponent(cplx multiplier, double tau, double target_im, bool* ambiguous = nullptr) {
  const cplx base = std::log(multiplier) / tau;
  const double omega = 2.0 * std::numbers::pi / tau;
  const double shift = (target_im - base.imag()) / omega;
  const double m = std::round(shift);
  if (ambiguous) *ambiguous = std::abs(std::abs(shift - m) - 0.5) < 1e-6;
  return base + cplx(0.0, m * omega);
}

}  // namespace detail

/// Floquet exponents log(eig Phi)/tau with the branch continued from the
/// eps = 0 values i k omega_1 along a geometric eps ramp.
///
/// At the smallest ramp amplitude every multiplier sits next to some
/// e^{i k omega_1 tau}; multipliers of modes differing by gamma coincide there,
/// so labels inside such a cluster go to the eigenvectors by largest weight.
/// Later steps continue each branch to the candidate nearest its extrapolation
/// in eps (linear from the first point, quadratic afterwards); a rival about
/// as close but clearly distinct is reported as ambiguous.
inline MonodromyExponents floquet_exponents_from_monodromy(const CavityConfig& cfg, Dynamics dynamics, int steps,
                                                           int ramp_steps = kMinRampSteps) {
  if (ramp_steps < kMinRampSteps)
    throw std::invalid_argument("floquet_exponents_from_monodromy: need at least 4 ramp steps");
  const double tau = cfg.drive_period();
  const double w1 = cfg.omega1();
  const double tol = 1e-6 * cfg.drive_frequency();
  const ModeLayout layout = ModeLayout::window(cfg.K);
  const int dim = layout.rows();
  const auto n = static_cast<std::size_t>(dim);
  MonodromyExponents out;
  out.epsilon = cfg.epsilon;

  if (cfg.epsilon == 0.0) {
    for (int r = 0; r < dim; ++r) {
      out.origin.push_back(layout.signed_mode(r));
      out.exponents.emplace_back(0.0, layout.signed_mode(r) * w1);
    }
  } else {
    std::vector<cplx> current(n), older(n);
    double prev_eps = 0.0, older_eps = 0.0;
    for (int j = 0; j <= ramp_steps; ++j) {
      const double eps = cfg.epsilon * std::ldexp(1.0, j - ramp_steps);
      CavityConfig c = cfg;
      c.epsilon = eps;
      Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(monodromy(c, dynamics, steps));
      if (es.info() != Eigen::Success)
        throw EigenSolveError("floquet_exponents_from_monodromy: eigen-decomposition failed", es.eigenvalues(),
                              Eigen::VectorXd());
      const Eigen::VectorXcd lam = es.eigenvalues();

      if (j == 0) {
        // Weight of signed mode r in eigenvector a, restricted to rest
        // frequencies whose multiplier is the closest one to lam(a).
        Eigen::MatrixXd weight = Eigen::MatrixXd::Constant(dim, dim, -1.0);
        for (int a = 0; a < dim; ++a) {
          const Eigen::VectorXcd v = es.eigenvectors().col(a).normalized();
          double nearest = std::numeric_limits<double>::infinity();
          for (int r = 0; r < dim; ++r)
            nearest = std::min(nearest, std::abs(lam(a) - std::polar(1.0, layout.signed_mode(r) * w1 * tau)));
          for (int r = 0; r < dim; ++r) {
            const double d = std::abs(lam(a) - std::polar(1.0, layout.signed_mode(r) * w1 * tau));
            if (d <= nearest + 1e-8) weight(a, r) = std::norm(v(r));
          }
        }
        std::vector<bool> used_a(n, false), used_r(n, false);
        out.origin.assign(n, 0);
        for (int round = 0; round < dim; ++round) {
          double best = -1.0;
          int ba = -1, br = -1;
          for (int a = 0; a < dim; ++a)
            for (int r = 0; r < dim; ++r)
              if (!used_a[static_cast<std::size_t>(a)] && !used_r[static_cast<std::size_t>(r)] && weight(a, r) > best) {
                best = weight(a, r);
                ba = a;
                br = r;
              }
          if (best < 0.0) throw BranchTrackingError("no rest frequency left to label a multiplier", {lam(ba < 0 ? 0 : ba)});
          used_a[static_cast<std::size_t>(ba)] = used_r[static_cast<std::size_t>(br)] = true;
          const int k = layout.signed_mode(br);
          bool amb = false;
          out.origin[static_cast<std::size_t>(ba)] = k;
          current[static_cast<std::size_t>(ba)] = detail::lift_exponent(lam(ba), tau, k * w1, &amb);
          if (amb) throw BranchTrackingError("branch lift ambiguous at the start of the eps ramp", {lam(ba)});
        }
      } else {
        std::vector<cplx> predicted(n);
        for (std::size_t p = 0; p < n; ++p) {
          const cplx rest(0.0, out.origin[p] * w1);
          const cplx d2 = current[p] - rest;
          if (j == 1) {
            predicted[p] = rest + d2 * (eps / prev_eps);
          } else {
            // d(e) = a e + b e^2 through the two previous ramp points.
            const double e1 = older_eps, e2 = prev_eps;
            const cplx d1 = older[p] - rest;
            const cplx b = (d2 / e2 - d1 / e1) / (e2 - e1);
            const cplx a = d2 / e2 - b * e2;
            predicted[p] = rest + a * eps + b * eps * eps;
          }
        }
        // Greedy global assignment by distance to the prediction.
        Eigen::MatrixXd dist(dim, dim);
        std::vector<std::vector<cplx>> lifted(n, std::vector<cplx>(n));
        for (std::size_t p = 0; p < n; ++p)
          for (int q = 0; q < dim; ++q) {
            lifted[p][static_cast<std::size_t>(q)] = detail::lift_exponent(lam(q), tau, predicted[p].imag());
            dist(static_cast<Eigen::Index>(p), q) = std::abs(lifted[p][static_cast<std::size_t>(q)] - predicted[p]);
          }
        std::vector<bool> done(n, false), taken(n, false);
        std::vector<cplx> next(n);
        for (int round = 0; round < dim; ++round) {
          double best = std::numeric_limits<double>::infinity();
          int bp = -1, bq = -1;
          for (int p = 0; p < dim; ++p) {
            if (done[static_cast<std::size_t>(p)]) continue;
            for (int q = 0; q < dim; ++q)
              if (!taken[static_cast<std::size_t>(q)] && dist(p, q) < best) {
                best = dist(p, q);
                bp = p;
                bq = q;
              }
          }
          const auto up = static_cast<std::size_t>(bp);
          const cplx chosen = lifted[up][static_cast<std::size_t>(bq)];
          // Candidates closer together than 5% of the predicted shift count as
          // the same branch.
          const double slack = std::max(tol, 0.05 * std::abs(predicted[up] - cplx(0.0, out.origin[up] * w1)));
          for (int q = 0; q < dim; ++q) {
            if (q == bq || taken[static_cast<std::size_t>(q)]) continue;
            const cplx rival = lifted[up][static_cast<std::size_t>(q)];
            if (dist(bp, q) <= best + slack && std::abs(rival - chosen) > slack) {
              std::ostringstream os;
              os << "branch tracking ambiguous at eps = " << eps << " for branch from k = " << out.origin[up]
                 << ": candidates " << chosen << " and " << rival;
              throw BranchTrackingError(os.str(), {chosen, rival});
            }
          }
          done[up] = true;
          taken[static_cast<std::size_t>(bq)] = true;
          next[up] = chosen;
        }
        older = current;
        current = std::move(next);
      }
      if (j == 0) older = current;
      older_eps = prev_eps;
      prev_eps = eps;
    }
    out.exponents = current;
  }

  std::vector<std::size_t> order(out.exponents.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (out.exponents[a].real() != out.exponents[b].real()) return out.exponents[a].real() > out.exponents[b].real();
    return out.exponents[a].imag() > out.exponents[b].imag();
  });
  MonodromyExponents sorted{{}, {}, out.epsilon};
  for (auto i : order) {
    sorted.exponents.push_back(out.exponents[i]);
    sorted.origin.push_back(out.origin[i]);
  }
  return sorted;
}

// ---------------------------------------------------------------------------
// Variant arbitration
// ---------------------------------------------------------------------------

struct VariantGap {
  RecurrenceVariant variant = RecurrenceVariant::eq44;
  double mu_max_real = 0.0;       ///< max Re mu_1 of the recurrence matrix
  std::array<double, 2> gap{};    ///< |max Re monodromy - eps omega_1 max Re mu_1| at (eps_hi, eps_lo)
  double ratio = 0.0;             ///< gap[0] / gap[1]
  double C = 0.0;                 ///< gap[0] / eps_hi^2
};

struct Arbitration {
  int gamma = 0;
  int K = 0;
  Dynamics dynamics = Dynamics::linearized;
  std::array<double, 2> epsilon{};
  std::array<double, 2> monodromy_max_real{};
  std::vector<VariantGap> variants;
  RecurrenceVariant verdict = RecurrenceVariant::eq44;

  const VariantGap& selected() const {
    for (const auto& v : variants)
      if (v.variant == verdict) return v;
    throw std::logic_error("Arbitration: verdict missing from variants");
  }
};

/// Compares both recurrence variants against measured monodromy growth rates
/// at two amplitudes; the verdict is the variant whose first-order prediction
/// leaves the smaller relative gap at the smaller amplitude.
inline Arbitration arbitrate_from_rates(int gamma, int K, double omega1, std::array<double, 2> epsilon,
                                        std::array<double, 2> monodromy_max_real, Dynamics dynamics) {
  Arbitration arb;
  arb.gamma = gamma;
  arb.K = K;
  arb.dynamics = dynamics;
  arb.epsilon = epsilon;
  arb.monodromy_max_real = monodromy_max_real;
  double best = std::numeric_limits<double>::infinity();
  for (auto variant : {RecurrenceVariant::eq44, RecurrenceVariant::printed4x4}) {
    VariantGap g;
    g.variant = variant;
    g.mu_max_real = characteristic_exponents(build_recurrence_matrix(gamma, K, variant)).max_real();
    for (std::size_t i = 0; i < 2; ++i)
      g.gap[i] = std::abs(monodromy_max_real[i] - epsilon[i] * omega1 * g.mu_max_real);
    g.ratio = g.gap[0] / g.gap[1];
    g.C = g.gap[0] / (epsilon[0] * epsilon[0]);
    const double relative = g.gap[1] / epsilon[1];
    if (relative < best) {
      best = relative;
      arb.verdict = variant;
    }
    arb.variants.push_back(g);
  }
  return arb;
}

inline Arbitration arbitrate_variants(const CavityConfig& base, int K, double eps_hi, double eps_lo, Dynamics dynamics,
                                      int steps, int ramp_steps = kMinRampSteps) {
  const int gamma = static_cast<int>(std::lround(base.gamma));
  if (base.gamma != gamma) throw std::invalid_argument("arbitrate_variants: gamma must be an integer");
  std::array<double, 2> re{};
  const std::array<double, 2> eps{eps_hi, eps_lo};
  for (std::size_t i = 0; i < 2; ++i) {
    CavityConfig c = base;
    c.K = K;
    c.epsilon = eps[i];
    re[i] = floquet_exponents_from_monodromy(c, dynamics, steps, ramp_steps).max_real();
  }
  return arbitrate_from_rates(gamma, K, base.omega1(), eps, re, dynamics);
}

}  // namespace dce
