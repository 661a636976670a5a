#include "ris/system.hpp"

#include <cmath>
#include <string>

#include "ris/channel.hpp"

namespace ris {

void SystemConfig::validate() const {
  if (K < 1) throw std::invalid_argument("SystemConfig: K must be >= 1");
  if (M < K) throw std::invalid_argument("SystemConfig: M must be >= K");
  if (N.size() != I) throw std::invalid_argument("SystemConfig: N must list I element counts");
  for (std::size_t n : N)
    if (n < 1) throw std::invalid_argument("SystemConfig: every N_i must be >= 1");
  if (!(P_t > 0.0)) throw std::invalid_argument("SystemConfig: P_t must be > 0");
  if (!(noise_power > 0.0)) throw std::invalid_argument("SystemConfig: noise_power must be > 0");
  if (!(frequency > 0.0)) throw std::invalid_argument("SystemConfig: frequency must be > 0");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("SystemConfig: bandwidth must be > 0");
}

bool BeamformingSolution::is_finite() const {
  if (!F.is_finite()) return false;
  for (const CVector& p : phases)
    if (!p.is_finite()) return false;
  return true;
}

bool solution_feasible(const BeamformingSolution& sol, double p_t,
                       double power_slack, double modulus_slack) {
  if (!sol.is_finite()) return false;
  if (precoder_power(sol.F) > p_t + power_slack) return false;
  for (const CVector& p : sol.phases)
    for (std::size_t n = 0; n < p.size(); ++n)
      if (std::abs(std::abs(p[n]) - 1.0) > modulus_slack) return false;
  return true;
}

CVector composite_channel(const ChannelSet& ch, const std::vector<CVector>& phases,
                          std::size_t k) {
  if (k >= ch.direct.size()) throw std::invalid_argument("composite_channel: bad user index");
  const std::size_t hops = ch.hops.size();
  if (phases.size() != hops)
    throw std::invalid_argument("composite_channel: phase count differs from hop count");

  const CVector& w = ch.direct[k];
  if (hops == 0) return w;

  // r = g_k^T, then fold in Phi_i H_i from the user side toward the BS.
  CVector r = ch.last_hop[k];
  for (std::size_t i = hops; i-- > 0;) {
    const CMatrix& h = ch.hops[i];
    const CVector& phi = phases[i];
    if (r.size() != h.rows() || phi.size() != h.rows())
      throw std::invalid_argument("composite_channel: dimension chain broken");
    CVector scaled(r.size());
    for (std::size_t n = 0; n < r.size(); ++n) scaled[n] = r[n] * phi[n];
    r = vecmat(scaled, h);
  }
  if (r.size() != w.size())
    throw std::invalid_argument("composite_channel: direct link length mismatch");
  for (std::size_t m = 0; m < r.size(); ++m) r[m] += w[m];
  return r;
}

std::vector<CVector> composite_channels(const ChannelSet& ch,
                                        const std::vector<CVector>& phases) {
  std::vector<CVector> out;
  out.reserve(ch.direct.size());
  for (std::size_t k = 0; k < ch.direct.size(); ++k)
    out.push_back(composite_channel(ch, phases, k));
  return out;
}

double sinr_from_composites(const CMatrix& f, const std::vector<CVector>& comps,
                            std::size_t k, double noise_power) {
  const std::size_t kk = comps.size();
  const CVector& g = comps[k];
  double signal = 0.0;
  double interference = 0.0;
  for (std::size_t j = 0; j < kk; ++j) {
    cplx s(0.0, 0.0);
    for (std::size_t m = 0; m < g.size(); ++m) s += g[m] * f(m, j);
    const double p = std::norm(s);
    if (j == k)
      signal = p;
    else
      interference += p;
  }
  return signal / (interference + noise_power);
}

double sinr(const BeamformingSolution& sol, const ChannelSet& ch, std::size_t k,
            double noise_power) {
  const auto comps = composite_channels(ch, sol.phases);
  return sinr_from_composites(sol.F, comps, k, noise_power);
}

double sum_rate_from_composites(const CMatrix& f, const std::vector<CVector>& comps,
                                double noise_power) {
  double c = 0.0;
  for (std::size_t k = 0; k < comps.size(); ++k)
    c += std::log2(1.0 + sinr_from_composites(f, comps, k, noise_power));
  return c;
}

double sum_rate(const BeamformingSolution& sol, const ChannelSet& ch,
                double noise_power) {
  const auto comps = composite_channels(ch, sol.phases);
  return sum_rate_from_composites(sol.F, comps, noise_power);
}

double precoder_power(const CMatrix& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.rows(); ++i)
    for (std::size_t j = 0; j < f.cols(); ++j) s += std::norm(f(i, j));
  return s;
}

CMatrix normalize_power(const CMatrix& f, double p_t) {
  const double tr = precoder_power(f);
  if (tr <= 0.0 || !std::isfinite(tr))
    throw std::invalid_argument("normalize_power: precoder is all-zero");
  const double scale = std::sqrt(p_t / tr);
  CMatrix out = f;
  for (std::size_t i = 0; i < f.rows(); ++i)
    for (std::size_t j = 0; j < f.cols(); ++j) out(i, j) *= scale;
  return out;
}

std::vector<CVector> project_phases(const std::vector<CVector>& raw) {
  std::vector<CVector> out;
  out.reserve(raw.size());
  for (const CVector& v : raw) {
    CVector p(v.size());
    for (std::size_t n = 0; n < v.size(); ++n) p[n] = unit_modulus(v[n]);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace ris
