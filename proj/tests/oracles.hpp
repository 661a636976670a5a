// Test-only oracles, kept independent of the implementation paths they check.
#pragma once

#include <cmath>
#include <vector>

#include "ris/channel.hpp"
#include "ris/initsolvers.hpp"
#include "ris/system.hpp"

namespace ris::testing {

// Conjugated composite channels: received symbol is g~^T f = h^H f.
inline std::vector<CVector> conj_composites(const ChannelSet& ch,
                                            const std::vector<CVector>& phases) {
  std::vector<CVector> h = composite_channels(ch, phases);
  for (CVector& v : h)
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::conj(v[i]);
  return h;
}

// Max-min SINR achievable with FIXED unit-norm directions under a total
// power budget, found by bisecting the equalized level: for each eta the
// closed-form power vector is evaluated and feasibility is sum p <= K in
// per-user normalized units (equivalently sum <= P_t in watts).
inline double maxmin_bisection_oracle(const std::vector<CVector>& h,
                                      const std::vector<CVector>& dirs,
                                      double p_t, double noise_power) {
  const std::size_t kk = h.size();
  const double kd = static_cast<double>(kk);
  const double rho0 = p_t / (kd * noise_power);

  CMatrix gamma(kk, kk), f0(kk, kk);
  for (std::size_t k = 0; k < kk; ++k) {
    const double nv = norm2(dirs[k]);
    gamma(k, k) = (nv * nv) / std::norm(dot_conj(h[k], dirs[k]));
    for (std::size_t l = 0; l < kk; ++l) {
      if (l == k) continue;
      const double nl = norm2(dirs[l]);
      f0(k, l) = std::norm(dot_conj(h[k], dirs[l])) / (nl * nl);
    }
  }

  auto budget_of = [&](double eta) -> double {
    // returns sum of normalized powers, or +inf when eta is unsupportable
    try {
      const std::vector<double> p = maxmin_power_closed_form(gamma, f0, eta, rho0);
      double s = 0.0;
      for (double x : p) s += x;
      return s;
    } catch (const InfeasibleError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  double lo = 0.0, hi = 1.0;
  while (budget_of(hi) <= kd) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e18) return hi;
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (budget_of(mid) <= kd)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace ris::testing
