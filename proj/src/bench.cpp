#include "ris/bench.hpp"

#include <cmath>

#include "ris/initsolvers.hpp"

namespace ris::bench {

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

ChannelSet direct_only(const std::vector<CVector>& direct) {
  ChannelSet ch;
  ch.direct = direct;
  return ch;
}

}  // namespace

BaselineResult zf_no_ris(const std::vector<CVector>& direct, double p_t,
                         double noise_power) {
  const std::size_t kk = direct.size();
  if (kk == 0) throw std::invalid_argument("zf_no_ris: no users");
  const std::size_t m = direct[0].size();
  if (m < kk) throw std::invalid_argument("zf_no_ris: requires M >= K");

  const ChannelSet ch = direct_only(direct);
  BaselineResult out;

  CMatrix w(kk, m);
  for (std::size_t k = 0; k < kk; ++k)
    for (std::size_t j = 0; j < m; ++j) w(k, j) = direct[k][j];
  const CMatrix gram = matmul(w, hermitian(w));  // K x K, HPD iff full rank

  CMatrix f(m, kk);
  try {
    for (std::size_t k = 0; k < kk; ++k) {
      CVector e(kk);
      e[k] = 1.0;
      const CVector x = solve_hpd(gram, e);  // column of (W W^H)^{-1}
      for (std::size_t j = 0; j < m; ++j) {
        cplx s(0.0, 0.0);
        for (std::size_t l = 0; l < kk; ++l) s += std::conj(w(l, j)) * x[l];
        f(j, k) = s;
      }
    }
  } catch (const SingularityError&) {
    f = init_method1_zf(ch, {}, p_t);
    out.fallback_used = true;
  }

  // equal per-user power
  const double per_user = std::sqrt(p_t / static_cast<double>(kk));
  for (std::size_t k = 0; k < kk; ++k) {
    double nn = 0.0;
    for (std::size_t j = 0; j < m; ++j) nn += std::norm(f(j, k));
    const double scale = per_user / std::sqrt(nn);
    for (std::size_t j = 0; j < m; ++j) f(j, k) *= scale;
  }

  out.sol.F = std::move(f);
  out.rate = sum_rate(out.sol, ch, noise_power);
  return out;
}

BaselineResult alternating_single_hop(const SystemConfig& cfg, const ChannelSet& ch,
                                      std::size_t outer_iters) {
  if (ch.hops.size() != 1)
    throw std::invalid_argument("alternating_single_hop: requires exactly one hop");
  const std::size_t n1 = ch.hops[0].rows();

  BeamformingSolution sol;
  sol.phases.assign(1, CVector(n1));
  for (std::size_t n = 0; n < n1; ++n) sol.phases[0][n] = 1.0;
  sol.F = init_method2_maxmin(ch, sol.phases, cfg.P_t, cfg.noise_power).F;
  double rate = sum_rate(sol, ch, cfg.noise_power);

  for (std::size_t outer = 0; outer < outer_iters; ++outer) {
    const double rate_at_entry = rate;

    // coordinate ascent over each phase entry at fixed F
    for (std::size_t n = 0; n < n1; ++n) {
      cplx best_phi = sol.phases[0][n];
      double best_rate = rate;
      for (std::size_t g = 0; g < 64; ++g) {
        const cplx cand = std::polar(1.0, kTwoPi * static_cast<double>(g) / 64.0);
        sol.phases[0][n] = cand;
        const double r = sum_rate(sol, ch, cfg.noise_power);
        if (r > best_rate) {
          best_rate = r;
          best_phi = cand;
        }
      }
      sol.phases[0][n] = best_phi;
      rate = best_rate;
    }

    // refresh the precoder; keep it only when it improves the sum rate
    const CMatrix f2 = init_method2_maxmin(ch, sol.phases, cfg.P_t, cfg.noise_power).F;
    BeamformingSolution cand = sol;
    cand.F = f2;
    const double r2 = sum_rate(cand, ch, cfg.noise_power);
    if (r2 > rate) {
      sol.F = f2;
      rate = r2;
    }

    if (rate - rate_at_entry < 1e-4) break;
  }

  BaselineResult out;
  out.sol = std::move(sol);
  out.rate = rate;
  return out;
}

OracleResult brute_force_oracle(const SystemConfig& cfg, const ChannelSet& ch,
                                std::size_t grid_points) {
  std::size_t total_entries = 0;
  for (const CMatrix& h : ch.hops) total_entries += h.rows();
  if (total_entries > 4)
    throw std::invalid_argument("brute_force_oracle: more than 4 phase entries");
  if (grid_points == 0 || grid_points > 64)
    throw std::invalid_argument("brute_force_oracle: grid_points must be in [1, 64]");

  std::vector<cplx> grid(grid_points);
  for (std::size_t g = 0; g < grid_points; ++g)
    grid[g] = std::polar(1.0, kTwoPi * static_cast<double>(g) / static_cast<double>(grid_points));

  std::size_t combos = 1;
  for (std::size_t e = 0; e < total_entries; ++e) combos *= grid_points;

  OracleResult best;
  best.rate = -1.0;
  std::vector<CVector> phases;
  for (const CMatrix& h : ch.hops) phases.push_back(CVector(h.rows()));

  for (std::size_t combo = 0; combo < combos; ++combo) {
    std::size_t rest = combo;
    for (CVector& phi : phases)
      for (std::size_t n = 0; n < phi.size(); ++n) {
        phi[n] = grid[rest % grid_points];
        rest /= grid_points;
      }
    const CMatrix f = init_method2_maxmin(ch, phases, cfg.P_t, cfg.noise_power).F;
    BeamformingSolution sol;
    sol.F = f;
    sol.phases = phases;
    const double r = sum_rate(sol, ch, cfg.noise_power);
    if (r > best.rate) {
      best.rate = r;
      best.sol = std::move(sol);
    }
  }
  return best;
}

TinyInstance random_tiny_instance(RngStream& rng) {
  TinyInstance inst;
  inst.cfg.M = 1 + rng.below(2);
  inst.cfg.K = 1;
  inst.cfg.I = 1;
  inst.cfg.N = {1 + rng.below(2)};
  inst.cfg.P_t = rng.uniform(0.5, 4.0);
  inst.cfg.noise_power = rng.uniform(0.05, 0.5);

  const std::size_t m = inst.cfg.M, n1 = inst.cfg.N[0];
  CMatrix h1(n1, m);
  for (std::size_t r = 0; r < n1; ++r)
    for (std::size_t c = 0; c < m; ++c) h1(r, c) = cplx(rng.normal(), rng.normal());
  inst.ch.hops.push_back(std::move(h1));
  CVector g(n1), w(m);
  for (std::size_t r = 0; r < n1; ++r) g[r] = cplx(rng.normal(), rng.normal());
  for (std::size_t c = 0; c < m; ++c) w[c] = 0.3 * cplx(rng.normal(), rng.normal());
  inst.ch.last_hop.push_back(std::move(g));
  inst.ch.direct.push_back(std::move(w));
  return inst;
}

}  // namespace ris::bench
