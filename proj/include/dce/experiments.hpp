/**
 * @file experiments.hpp
 * @brief End-to-end pipelines behind the command-line subcommands. Each one
 *        returns the report document plus the rendered CSV files; nothing is
 *        written to disk here.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "dce/floquet.hpp"
#include "dce/mode_evolver.hpp"
#include "dce/perturbation.hpp"
#include "dce/report.hpp"

namespace dce {

struct Artifacts {
  ordered_json report;
  std::map<std::string, std::string> files;  ///< file name -> contents
  std::vector<std::string> warnings;
};

inline ordered_json report_header(const std::string& command, const RunConfig& rc) {
  ordered_json j;
  j["tool"] = {{"name", "dce"}, {"version", kToolVersion}};
  j["command"] = command;
  j["config"] = config_to_json(rc);
  return j;
}

inline ordered_json bogoliubov_summary(const BogoliubovMatrices& b) {
  const Eigen::VectorXd r = b.unitarity_residuals();
  const auto half = static_cast<Eigen::Index>(std::max<Eigen::Index>(1, r.size() / 2));
  ordered_json j;
  j["extraction_time"] = b.T;
  j["alpha_norm"] = b.alpha.norm();
  j["beta_norm"] = b.beta.norm();
  j["unitarity_residuals"] = std::vector<double>(r.data(), r.data() + r.size());
  j["max_residual_lower_half"] = r.head(half).maxCoeff();
  return j;
}

inline std::vector<std::string> regime_warnings(const CavityConfig& c) {
  std::vector<std::string> w;
  if (short_time_regime(c) == ShortTimeRegime::marginal)
    w.push_back("eps*omega_1*T = " + format_number(c.epsilon * c.T, 6) +
                " is above 0.3; the first-order spectrum is only marginally valid");
  return w;
}

// ---------------------------------------------------------------------------
// spectrum
// ---------------------------------------------------------------------------

inline Artifacts run_spectrum(const RunConfig& rc) {
  const CavityConfig& c = rc.cavity;
  Artifacts out;
  out.report = report_header("spectrum", rc);

  bool have_pert = false;
  ParticleSpectrum pert;
  std::string pert_note;
  if (!c.integer_gamma()) {
    pert_note = "gamma is not an integer; no closed-form spectrum";
  } else if (short_time_regime(c) == ShortTimeRegime::invalid) {
    pert_note = "eps*omega_1*T exceeds 1; closed-form spectrum outside its validity range";
  } else {
    pert = particle_spectrum_perturbative(c);
    have_pert = true;
    out.warnings = regime_warnings(c);
  }

  const BogoliubovMatrices bog = extract_bogoliubov(integrate(c, rc.dynamics), c);
  const ParticleSpectrum num = particle_spectrum_numeric(bog, c);

  CsvTable csv({"k", "N_k_perturbative", "N_k_numeric", "rel_diff"});
  for (int k = 1; k <= c.K; ++k) {
    const double p = have_pert ? pert.at(k) : std::nan("");
    const double rel = (have_pert && p > 0.0) ? std::abs(num.at(k) - p) / p : std::nan("");
    csv.row() << k << p << num.at(k) << rel;
  }

  out.report["perturbative"] = have_pert ? ordered_json(spectrum_to_json(pert)) : ordered_json({{"skipped", pert_note}});
  out.report["numeric"] = spectrum_to_json(num);
  out.report["numeric"]["dynamics"] = to_string(rc.dynamics);
  out.report["bogoliubov"] = bogoliubov_summary(bog);
  if (c.integer_gamma() && c.gamma >= 2) out.report["dominant_mode"] = dominant_mode(static_cast<int>(c.gamma));
  out.report["warnings"] = out.warnings;
  out.files["spectrum.csv"] = csv.render();
  return out;
}

// ---------------------------------------------------------------------------
// evolve
// ---------------------------------------------------------------------------

/// Instantaneous sigma = + content sum_n |X_{n,+k}|^2.
inline std::vector<double> instantaneous_numbers(const ModeState& s) {
  std::vector<double> N(static_cast<std::size_t>(s.layout.count()), 0.0);
  for (int p = 0; p < s.layout.count(); ++p)
    N[static_cast<std::size_t>(p)] = s.X.row(s.layout.row(s.layout.mode(p))).squaredNorm();
  return N;
}

inline Artifacts run_evolve(const RunConfig& rc) {
  const CavityConfig& c = rc.cavity;
  c.validate();
  Artifacts out;
  out.report = report_header("evolve", rc);

  const CoupledModeSystem sys(c, rc.dynamics);
  ModeState s = initial_state(c);
  const double stop = c.stop_time();
  const double h = c.drive_period() / c.steps_per_period;
  const double dt = c.drive_period() / rc.samples_per_period;

  CsvTable csv({"t", "k", "N_k"});
  auto sample = [&] {
    const auto N = instantaneous_numbers(s);
    for (int k = 1; k <= c.K; ++k) csv.row() << s.t << k << N[static_cast<std::size_t>(k - 1)];
  };
  sample();
  for (long long i = 1;; ++i) {
    const double t = std::min(stop, static_cast<double>(i) * dt);
    propagate(sys, s, t, h);
    sample();
    if (t >= stop) break;
  }

  const BogoliubovMatrices bog = extract_bogoliubov(s, c);
  out.report["dynamics"] = to_string(rc.dynamics);
  out.report["samples"] = static_cast<int>(csv.size() / static_cast<std::size_t>(c.K));
  out.report["bogoliubov"] = bogoliubov_summary(bog);
  out.report["numeric"] = spectrum_to_json(particle_spectrum_numeric(bog, c));
  out.report["warnings"] = out.warnings;
  out.files["timeseries.csv"] = csv.render();
  return out;
}

// ---------------------------------------------------------------------------
// floquet
// ---------------------------------------------------------------------------

/// Signed mode carrying the largest weight of each eigenvector.
inline std::vector<int> dominant_modes(const FloquetSpectrum& spec) {
  std::vector<int> out;
  for (Eigen::Index a = 0; a < spec.vectors.cols(); ++a) {
    Eigen::Index r = 0;
    spec.vectors.col(a).cwiseAbs().maxCoeff(&r);
    out.push_back(spec.modes[static_cast<std::size_t>(r)]);
  }
  return out;
}

/// Exponents whose eigenvector peaks on the modes nearest gamma/2.
inline std::vector<cplx> exponents_near_half_gamma(const FloquetSpectrum& spec, int gamma) {
  const auto dom = dominant_modes(spec);
  std::vector<cplx> out;
  for (std::size_t a = 0; a < dom.size(); ++a) {
    const int m = std::abs(dom[a]);
    if (2 * m == gamma || 2 * m == gamma - 1 || 2 * m == gamma + 1) out.push_back(spec.exponents(static_cast<Eigen::Index>(a)));
  }
  return out;
}

/// Largest relative change between two exponent lists of equal length
/// (both sorted the same way); infinity when the lengths differ.
inline double relative_drift(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  if (a.size() != b.size() || a.empty()) return std::numeric_limits<double>::infinity();
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]) / std::abs(b[i]));
  return d;
}

inline Artifacts run_floquet(const RunConfig& rc) {
  const CavityConfig& c = rc.cavity;
  if (!c.integer_gamma()) throw ConfigError("gamma: the Floquet recurrence needs an integer drive ratio");
  const int gamma = static_cast<int>(c.gamma);
  for (int K : rc.floquet_K)
    if (K < gamma) throw ConfigError("floquet.K_sweep: every truncation must be at least gamma");
  Artifacts out;
  out.report = report_header("floquet", rc);
  const double w1 = c.omega1();
  const auto variants = variants_of(rc.variant);

  CsvTable exps({"table", "variant", "K", "epsilon", "index", "origin", "mu1_re", "mu1_im", "rate_re", "rate_im"});
  auto recurrence_rows = [&](const std::string& table, const FloquetSpectrum& spec, RecurrenceVariant v, int K) {
    const auto dom = dominant_modes(spec);
    for (Eigen::Index a = 0; a < spec.exponents.size(); ++a) {
      const cplx mu = spec.exponents(a);
      exps.row() << table << to_string(v) << K << c.epsilon << static_cast<int>(a) << dom[static_cast<std::size_t>(a)]
                 << mu.real() << mu.imag() << c.epsilon * w1 * mu.real() << c.epsilon * w1 * mu.imag();
    }
  };

  if (gamma == 2) {
    ordered_json ex = ordered_json::object();
    for (auto v : variants) {
      const auto spec = characteristic_exponents(build_recurrence_matrix(2, std::vector<int>{-3, -1, 1, 3}, v));
      recurrence_rows("example4x4", spec, v, 2);
      ex[to_string(v)] = {{"modes", spec.modes}, {"exponents", complex_list(spec.exponents)},
                          {"max_residual", spec.residuals.maxCoeff()}};
    }
    out.report["example4x4"] = ex;
  }

  ordered_json recurrence = ordered_json::object();
  std::map<RecurrenceVariant, std::vector<std::vector<cplx>>> near_half;
  for (auto v : variants) {
    ordered_json per_k = ordered_json::array();
    for (int K : rc.floquet_K) {
      const auto spec = characteristic_exponents(build_recurrence_matrix(gamma, K, v));
      recurrence_rows("recurrence", spec, v, K);
      near_half[v].push_back(exponents_near_half_gamma(spec, gamma));
      per_k.push_back({{"K", K},
                       {"max_real", spec.max_real()},
                       {"max_residual", spec.residuals.maxCoeff()},
                       {"matrix_norm", spec.matrix_norm},
                       {"exponents", complex_list(spec.exponents)}});
    }
    recurrence[to_string(v)] = per_k;
  }
  out.report["recurrence"] = recurrence;

  // Monodromy oracle over the (K, eps) sweep.
  ordered_json mono = ordered_json::array();
  std::map<std::pair<int, int>, MonodromyExponents> mono_runs;
  for (std::size_t ki = 0; ki < rc.floquet_K.size(); ++ki) {
    for (std::size_t ei = 0; ei < rc.floquet_epsilons.size(); ++ei) {
      CavityConfig mc = c;
      mc.K = rc.floquet_K[ki];
      mc.epsilon = rc.floquet_epsilons[ei];
      const auto m = floquet_exponents_from_monodromy(mc, rc.dynamics, rc.monodromy_steps);
      for (std::size_t a = 0; a < m.exponents.size(); ++a) {
        const cplx e = m.exponents[a];
        const cplx mu1 = (e - cplx(0.0, m.origin[a] * w1)) / (mc.epsilon * w1);
        exps.row() << "monodromy" << to_string(rc.dynamics) << mc.K << mc.epsilon << static_cast<int>(a) << m.origin[a]
                   << mu1.real() << mu1.imag() << e.real() << e.imag();
      }
      mono.push_back({{"K", mc.K}, {"epsilon", mc.epsilon}, {"max_real", m.max_real()}});
      mono_runs.emplace(std::pair{static_cast<int>(ki), static_cast<int>(ei)}, m);
    }
  }
  out.report["monodromy"] = mono;

  // Arbitration per K from the runs above.
  ordered_json arb_json = ordered_json::array();
  std::vector<RecurrenceVariant> verdicts;
  for (std::size_t ki = 0; ki < rc.floquet_K.size(); ++ki) {
    const int K = rc.floquet_K[ki];
    const std::array<double, 2> eps{rc.floquet_epsilons[0], rc.floquet_epsilons[1]};
    const std::array<double, 2> re{mono_runs.at({static_cast<int>(ki), 0}).max_real(),
                                   mono_runs.at({static_cast<int>(ki), 1}).max_real()};
    const Arbitration arb = arbitrate_from_rates(gamma, K, w1, eps, re, rc.dynamics);
    ordered_json per_variant = ordered_json::object();
    for (const auto& g : arb.variants)
      per_variant[to_string(g.variant)] = {
          {"mu1_max_real", g.mu_max_real}, {"gap", g.gap}, {"gap_ratio", g.ratio}, {"C", g.C}};
    const RecurrenceVariant verdict = arb.verdict;
    verdicts.push_back(verdict);
    arb_json.push_back({{"K", K},
                        {"epsilon", eps},
                        {"monodromy_max_real", re},
                        {"variants", per_variant},
                        {"verdict", to_string(verdict)}});
  }
  const bool stable = std::all_of(verdicts.begin(), verdicts.end(), [&](auto v) { return v == verdicts.front(); });
  const RecurrenceVariant selected = verdicts.front();
  ordered_json drift = ordered_json::object();
  for (auto v : variants) {
    const auto& nh = near_half[v];
    drift[to_string(v)] = nh.size() == 2 ? ordered_json(relative_drift(nh[0], nh[1])) : ordered_json(nullptr);
  }
  out.report["arbitration"] = {{"per_K", arb_json},
                               {"verdict", to_string(selected)},
                               {"verdict_stable_across_K", stable},
                               {"K_drift_near_half_gamma", drift}};

  // N_k(t) from the Floquet form, first K of the sweep, configured eps.
  CsvTable ts({"variant", "t", "k", "N_k"});
  ordered_json series = ordered_json::object();
  const int K0 = rc.floquet_K.front();
  for (auto v : variants) {
    auto spec = characteristic_exponents(build_recurrence_matrix(gamma, K0, v));
    try {
      solve_all_initial_coefficients(spec);
    } catch (const DegenerateSpectrumError& e) {
      series[to_string(v)] = {{"skipped", e.what()}};
      out.warnings.push_back(to_string(v) + ": " + e.what());
      continue;
    }
    const double stop = c.stop_time();
    for (int i = 0; i < rc.floquet_samples; ++i) {
      const double t = stop * i / (rc.floquet_samples - 1);
      const auto N = floquet_particle_numbers(spec, t, c);
      for (std::size_t k = 0; k < N.size(); ++k) ts.row() << to_string(v) << t << static_cast<int>(k + 1) << N[k];
    }
    series[to_string(v)] = {{"K", K0}, {"samples", rc.floquet_samples}};
  }
  out.report["timeseries"] = series;
  out.report["warnings"] = out.warnings;
  out.files["exponents.csv"] = exps.render();
  out.files["timeseries.csv"] = ts.render();
  return out;
}

}  // namespace dce
