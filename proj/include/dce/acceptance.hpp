/**
 * @file acceptance.hpp
 * @brief The release-gate criteria, shared by the acceptance test binary and
 *        `dce validate`. Each check returns a verdict plus detail lines with
 *        the measured numbers.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "dce/experiments.hpp"
#include "dce/floquet.hpp"
#include "dce/mode_evolver.hpp"
#include "dce/perturbation.hpp"

namespace dce::acceptance {

struct Result {
  int id = 0;
  std::string name;
  bool passed = false;
  std::vector<std::string> details;
};

/// Deliberate faults for checking that the gate can fail.
struct Options {
  double coupling_scale = 1.0;  ///< multiplies every g_kj
  int step_divisor = 1;         ///< divides the integrator step counts
};

namespace detail {

inline std::string fmt(double x, int digits = 4) { return format_number(x, digits); }

inline CavityConfig grid_config(int gamma, double eps, double T) {
  CavityConfig c;
  c.gamma = gamma;
  c.epsilon = eps;
  c.T = T;
  c.K = default_truncation(gamma);
  return c;
}

inline ParticleSpectrum numeric_spectrum(const CavityConfig& c, const Options& o, Dynamics dyn = Dynamics::linearized) {
  CoupledModeSystem sys(c, dyn);
  if (o.coupling_scale != 1.0) sys.scale_couplings(o.coupling_scale);
  ModeState s = initial_state(c);
  const int spp = std::max(1, c.steps_per_period / o.step_divisor);
  propagate(sys, s, c.stop_time(), c.drive_period() / spp);
  return particle_spectrum_numeric(extract_bogoliubov(s, c), c);
}

template <class F>
Result guarded(int id, std::string name, F&& body) {
  Result r{id, std::move(name), false, {}};
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.details.push_back(std::string("error: ") + e.what());
  }
  return r;
}

}  // namespace detail

/// Closed-form spectrum vs linearized integration on gamma = 2..6.
inline Result perturbative_spectrum(const Options& o = {}) {
  return detail::guarded(1, "perturbative spectrum formula", [&](Result& r) {
    bool ok = true;
    for (int gamma = 2; gamma <= 6; ++gamma) {
      const CavityConfig c = detail::grid_config(gamma, 1e-3, 100.0);
      const auto num = detail::numeric_spectrum(c, o);
      const auto per = particle_spectrum_perturbative(c);
      const double top = *std::max_element(num.N.begin(), num.N.end());
      double worst_rel = 0.0;
      for (int k = 1; k < gamma; ++k) worst_rel = std::max(worst_rel, std::abs(num.at(k) - per.at(k)) / per.at(k));
      double tail = 0.0;
      int tail_k = gamma;
      for (int k = gamma; k <= c.K; ++k)
        if (num.at(k) > tail) {
          tail = num.at(k);
          tail_k = k;
        }
      const bool low_ok = worst_rel <= 0.05;
      const bool tail_ok = tail <= 1e-2 * top;
      ok = ok && low_ok && tail_ok;
      r.details.push_back("gamma=" + std::to_string(gamma) + " K=" + std::to_string(c.K) +
                          ": max rel err (k<gamma) " + detail::fmt(worst_rel) + (low_ok ? " ok" : " FAIL") +
                          "; max N_k(k>=gamma)/max N " + detail::fmt(tail / top) + " at k=" + std::to_string(tail_k) +
                          (tail_ok ? " ok" : " FAIL"));
    }
    r.passed = ok;
  });
}

/// argmax of the numeric spectrum against the dominant-mode rule.
inline Result dominant_mode_rule(const Options& o = {}) {
  return detail::guarded(2, "dominant mode", [&](Result& r) {
    bool ok = true;
    for (int gamma = 2; gamma <= 6; ++gamma) {
      const auto num = detail::numeric_spectrum(detail::grid_config(gamma, 1e-3, 100.0), o);
      const auto dom = dominant_mode(gamma);
      const int arg = num.argmax();
      const bool hit = std::find(dom.begin(), dom.end(), arg) != dom.end();
      ok = ok && hit;
      std::string expect;
      for (int k : dom) expect += (expect.empty() ? "" : "|") + std::to_string(k);
      r.details.push_back("gamma=" + std::to_string(gamma) + ": argmax " + std::to_string(arg) + ", expected " + expect +
                          (hit ? " ok" : " FAIL"));
    }
    r.passed = ok;
  });
}

/// Printed gamma = 2 example: eigenvalues and closed-form eigenvectors.
inline Result printed_floquet_example(const Options& = {}) {
  return detail::guarded(3, "printed 4x4 Floquet example", [&](Result& r) {
    const auto spec =
        characteristic_exponents(build_recurrence_matrix(2, std::vector<int>{-3, -1, 1, 3}, RecurrenceVariant::printed4x4));
    const double h = std::sqrt(2.0) / 2.0;
    const std::vector<cplx> expect{{0.5, h}, {0.5, -h}, {-0.5, h}, {-0.5, -h}};
    double eig_err = 0.0, vec_res = 0.0;
    for (int a = 0; a < 4; ++a) {
      const cplx mu = spec.exponents(a);
      double nearest = 1e300;
      for (const auto& e : expect) nearest = std::min(nearest, std::abs(mu - e));
      eig_err = std::max(eig_err, nearest);
      const double s3 = std::sqrt(3.0);
      Eigen::VectorXcd ref(4);
      ref << 1.0, -2.0 * mu / s3, s3 / 2.0 + 2.0 * mu * mu / s3, mu + 4.0 * mu * (mu * mu - 1.0) / 3.0;
      ref.normalize();
      const Eigen::VectorXcd got = spec.vectors.col(a).normalized();
      vec_res = std::max(vec_res, (got - ref.dot(got) * ref).norm());
    }
    const bool e_ok = eig_err <= 1e-12, v_ok = vec_res <= 1e-10;
    r.details.push_back("max |mu - (+-1 +- i sqrt2)/2| = " + detail::fmt(eig_err, 3) + (e_ok ? " ok" : " FAIL"));
    r.details.push_back("max eigenvector residual vs closed form = " + detail::fmt(vec_res, 3) + (v_ok ? " ok" : " FAIL"));
    r.passed = e_ok && v_ok;
  });
}

/// Monodromy oracle vs the recurrence at gamma = 2, K = 8 (verdict also at K = 12).
inline Result floquet_monodromy_agreement(const Options& o = {}) {
  return detail::guarded(4, "Floquet-monodromy cross-validation", [&](Result& r) {
    CavityConfig base;
    base.gamma = 2;
    const int steps = std::max(1, 2048 / o.step_divisor);
    std::vector<Arbitration> arbs;
    for (int K : {8, 12}) arbs.push_back(arbitrate_variants(base, K, 1e-2, 5e-3, Dynamics::linearized, steps));
    const auto& a8 = arbs[0];
    for (const auto& a : arbs) {
      std::ostringstream os;
      os << "K=" << a.K << ": monodromy max Re " << detail::fmt(a.monodromy_max_real[0], 6) << " / "
         << detail::fmt(a.monodromy_max_real[1], 6) << " at eps 1e-2 / 5e-3; verdict " << to_string(a.verdict);
      r.details.push_back(os.str());
      for (const auto& g : a.variants)
        r.details.push_back("  " + to_string(g.variant) + ": max Re mu1 " + detail::fmt(g.mu_max_real, 6) + ", gaps " +
                            detail::fmt(g.gap[0], 3) + " / " + detail::fmt(g.gap[1], 3) + ", ratio " +
                            detail::fmt(g.ratio) + ", C " + detail::fmt(g.C));
    }
    const bool stable = arbs[0].verdict == arbs[1].verdict;
    const double ratio = a8.selected().ratio;
    const bool ratio_ok = ratio >= 3.0 && ratio <= 5.0;
    r.details.push_back("selected " + to_string(a8.verdict) + " at K=8: gap ratio " + detail::fmt(ratio) +
                        (ratio_ok ? " in [3,5] ok" : " outside [3,5] FAIL") + "; C = " + detail::fmt(a8.selected().C));
    r.details.push_back(std::string("verdict stable across K in {8,12}: ") + (stable ? "yes ok" : "no FAIL"));
    r.passed = stable && ratio_ok;
  });
}

/// Bogoliubov normalization on the lower half of the window.
inline Result bogoliubov_unitarity(const Options& o = {}) {
  return detail::guarded(5, "Bogoliubov unitarity", [&](Result& r) {
    bool ok = true;
    for (auto dyn : {Dynamics::linearized, Dynamics::exact}) {
      CavityConfig c;
      c.gamma = 2;
      c.epsilon = 1e-3;
      c.T = 100.0;
      c.K = 16;
      c.steps_per_period = std::max(1, 256 / o.step_divisor);
      CoupledModeSystem sys(c, dyn);
      if (o.coupling_scale != 1.0) sys.scale_couplings(o.coupling_scale);
      ModeState s = initial_state(c);
      propagate(sys, s, c.stop_time(), c.drive_period() / c.steps_per_period);
      const Eigen::VectorXd res = extract_bogoliubov(s, c).unitarity_residuals();
      const double worst = res.head(c.K / 2).maxCoeff();
      ok = ok && worst <= 1e-3;
      r.details.push_back(to_string(dyn) + " (gamma=2, " + std::to_string(c.steps_per_period) +
                          " steps/period): max_{k<=8} residual " + detail::fmt(worst, 3) +
                          (worst <= 1e-3 ? " ok" : " FAIL"));
    }
    r.passed = ok;
  });
}

/// Isolated-mode growth peaks at gamma = 2k.
inline Result mathieu_resonance(const Options& o = {}) {
  return detail::guarded(6, "Mathieu single-mode resonance", [&](Result& r) {
    bool ok = true;
    const int steps = std::max(1, 2048 / o.step_divisor);
    for (int k : {1, 2}) {
      const double on = single_mode_growth_rate(k, 2.0 * k, 1e-2, Dynamics::linearized, steps);
      const double lo = single_mode_growth_rate(k, 2.0 * k - 0.5, 1e-2, Dynamics::linearized, steps);
      const double hi = single_mode_growth_rate(k, 2.0 * k + 0.5, 1e-2, Dynamics::linearized, steps);
      const bool hit = on > lo && on > hi;
      ok = ok && hit;
      r.details.push_back("k=" + std::to_string(k) + ": rate " + detail::fmt(on, 6) + " at gamma=" +
                          std::to_string(2 * k) + ", " + detail::fmt(lo, 3) + " / " + detail::fmt(hi, 3) +
                          " at -+1/2" + (hit ? " ok" : " FAIL"));
    }
    r.passed = ok;
  });
}

/// Convergence order, bit-identical reruns and truncation stability.
inline Result numerical_hygiene(const Options& o = {}) {
  return detail::guarded(7, "numerical hygiene", [&](Result& r) {
    bool ok = true;

    // RK4 order from three successive step halvings.
    {
      CavityConfig c = detail::grid_config(2, 1e-3, 100.0);
      std::vector<Eigen::MatrixXcd> X;
      std::string trail;
      bool blew_up = false;
      for (int spp : {128, 256, 512}) {
        c.steps_per_period = std::max(1, spp / o.step_divisor);
        trail += (trail.empty() ? "" : "/") + std::to_string(c.steps_per_period);
        try {
          CoupledModeSystem sys(c, Dynamics::linearized);
          if (o.coupling_scale != 1.0) sys.scale_couplings(o.coupling_scale);
          ModeState s = initial_state(c);
          propagate(sys, s, c.stop_time(), c.drive_period() / c.steps_per_period);
          X.push_back(s.X);
        } catch (const IntegrationError& e) {
          blew_up = true;
          r.details.push_back(std::string("convergence run blew up: ") + e.what());
          break;
        }
      }
      const double order = blew_up ? std::nan("") : std::log2((X[0] - X[1]).norm() / (X[1] - X[2]).norm());
      const bool order_ok = order >= 3.5 && order <= 4.5;
      ok = ok && order_ok;
      r.details.push_back("RK order (" + trail + " steps/period): " + detail::fmt(order) +
                          (order_ok ? " in [3.5,4.5] ok" : " outside [3.5,4.5] FAIL"));
    }

    // Reruns: raw state and rendered output.
    {
      RunConfig rc;
      rc.cavity = detail::grid_config(2, 1e-3, 100.0);
      rc.cavity.steps_per_period = std::max(1, 64 / o.step_divisor);
      const auto a = run_spectrum(rc), b = run_spectrum(rc);
      const auto xa = integrate(rc.cavity, Dynamics::exact).X, xb = integrate(rc.cavity, Dynamics::exact).X;
      const bool same = render_json(a.report) == render_json(b.report) && a.files == b.files &&
                        std::memcmp(xa.data(), xb.data(), sizeof(cplx) * static_cast<std::size_t>(xa.size())) == 0;
      ok = ok && same;
      r.details.push_back(std::string("byte-identical reruns: ") + (same ? "yes ok" : "no FAIL"));
    }

    // N_k for k <= gamma under K -> 1.5 K.
    for (int gamma = 2; gamma <= 6; ++gamma) {
      CavityConfig c = detail::grid_config(gamma, 1e-3, 100.0);
      const auto a = detail::numeric_spectrum(c, o);
      c.K = (3 * c.K) / 2;
      const auto b = detail::numeric_spectrum(c, o);
      double worst = 0.0;
      int worst_k = 1;
      for (int k = 1; k <= gamma; ++k) {
        const double rel = std::abs(b.at(k) - a.at(k)) / std::abs(b.at(k));
        if (rel > worst) {
          worst = rel;
          worst_k = k;
        }
      }
      const bool stable = worst < 1e-2;
      ok = ok && stable;
      r.details.push_back("truncation gamma=" + std::to_string(gamma) + " K " + std::to_string((2 * c.K) / 3) + "->" +
                          std::to_string(c.K) + ": max rel change (k<=gamma) " + detail::fmt(worst) + " at k=" +
                          std::to_string(worst_k) + (stable ? " ok" : " FAIL"));
    }
    r.passed = ok;
  });
}

inline const std::vector<std::function<Result(const Options&)>>& criteria() {
  static const std::vector<std::function<Result(const Options&)>> all{
      perturbative_spectrum, dominant_mode_rule,  printed_floquet_example, floquet_monodromy_agreement,
      bogoliubov_unitarity,  mathieu_resonance,   numerical_hygiene};
  return all;
}

inline std::string format_result(const Result& r) {
  std::string s = std::string(r.passed ? "PASS" : "FAIL") + "  criterion " + std::to_string(r.id) + ": " + r.name + "\n";
  for (const auto& d : r.details) s += "        " + d + "\n";
  return s;
}

}  // namespace dce::acceptance
