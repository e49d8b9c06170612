#pragma once

#include <string>
#include <vector>

#include "dce/cavity_model.hpp"

namespace dce {

enum class SpectrumMethod { numeric, perturbative };

inline std::string to_string(SpectrumMethod m) { return m == SpectrumMethod::numeric ? "numeric" : "perturbative"; }

/// Created-photon numbers N_k for k = 1..K (N[k-1] holds N_k).
struct ParticleSpectrum {
  std::vector<double> N;
  SpectrumMethod method = SpectrumMethod::numeric;
  CavityConfig params;

  double at(int k) const { return N.at(static_cast<std::size_t>(k - 1)); }
  double total() const {
    double s = 0.0;
    for (double n : N) s += n;
    return s;
  }
  /// 1-based index of the largest entry (first one on ties).
  int argmax() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < N.size(); ++i)
      if (N[i] > N[best]) best = i;
    return static_cast<int>(best) + 1;
  }
};

}  // namespace dce
