#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ris/channel.hpp"
#include "ris/system.hpp"

using namespace ris;

namespace {

CMatrix random_matrix(std::size_t r, std::size_t c, RngStream& rng) {
  CMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = cplx(rng.normal(), rng.normal());
  return m;
}

CVector random_vector(std::size_t n, RngStream& rng) {
  CVector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = cplx(rng.normal(), rng.normal());
  return v;
}

std::vector<CVector> unit_phases(const std::vector<std::size_t>& sizes) {
  std::vector<CVector> out;
  for (std::size_t n : sizes) {
    CVector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = 1.0;
    out.push_back(std::move(v));
  }
  return out;
}

ChannelSet random_channelset(std::size_t m, std::size_t k,
                             const std::vector<std::size_t>& n, RngStream& rng) {
  ChannelSet ch;
  for (std::size_t i = 0; i < n.size(); ++i)
    ch.hops.push_back(random_matrix(n[i], i == 0 ? m : n[i - 1], rng));
  for (std::size_t u = 0; u < k; ++u) {
    if (!n.empty()) ch.last_hop.push_back(random_vector(n.back(), rng));
    ch.direct.push_back(random_vector(m, rng));
  }
  return ch;
}

// elementwise expansion of g^T Phi_2 H_2 Phi_1 H_1 + w^T for I=2, all loops
CVector composite_oracle_2hop(const ChannelSet& ch, const std::vector<CVector>& phases,
                              std::size_t k) {
  const CMatrix& h1 = ch.hops[0];
  const CMatrix& h2 = ch.hops[1];
  const CVector& g = ch.last_hop[k];
  const CVector& w = ch.direct[k];
  const std::size_t m = h1.cols();
  CVector out(m);
  for (std::size_t mm = 0; mm < m; ++mm) {
    cplx s(0.0, 0.0);
    for (std::size_t b = 0; b < h2.rows(); ++b)
      for (std::size_t a = 0; a < h1.rows(); ++a)
        s += g[b] * phases[1][b] * h2(b, a) * phases[0][a] * h1(a, mm);
    out[mm] = s + w[mm];
  }
  return out;
}

}  // namespace

TEST_CASE("composite_channel: direct-only degenerate case") {
  RngStream rng(1);
  ChannelSet ch = random_channelset(3, 2, {}, rng);
  const CVector g = composite_channel(ch, {}, 0);
  for (std::size_t m = 0; m < 3; ++m) CHECK(g[m] == ch.direct[0][m]);
}

TEST_CASE("composite_channel: pass-through RIS") {
  // I=1, square identity H_1, unit phases, g = e_1: first row of H_1 plus w
  ChannelSet ch;
  ch.hops.push_back(CMatrix::identity(3));
  CVector g(3);
  g[0] = 1.0;
  ch.last_hop.push_back(g);
  RngStream rng(2);
  ch.direct.push_back(random_vector(3, rng));
  const CVector comp = composite_channel(ch, unit_phases({3}), 0);
  for (std::size_t m = 0; m < 3; ++m) {
    const cplx expect = (m == 0 ? cplx(1.0, 0.0) : cplx(0.0, 0.0)) + ch.direct[0][m];
    CHECK(std::abs(comp[m] - expect) < 1e-15);
  }
}

TEST_CASE("composite_channel: matches elementwise expansion oracle, I=2") {
  RngStream rng(3);
  ChannelSet ch = random_channelset(2, 1, {2, 2}, rng);
  std::vector<CVector> phases;
  for (std::size_t n : {2u, 2u}) {
    CVector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::polar(1.0, rng.uniform(0.0, 6.28));
    phases.push_back(std::move(v));
  }
  const CVector fast = composite_channel(ch, phases, 0);
  const CVector slow = composite_oracle_2hop(ch, phases, 0);
  for (std::size_t m = 0; m < 2; ++m) CHECK(std::abs(fast[m] - slow[m]) < 1e-12);
}

TEST_CASE("composite_channel: linear in each hop and in the direct link") {
  RngStream rng(4);
  ChannelSet ch = random_channelset(3, 1, {4}, rng);
  auto phases = unit_phases({4});
  const CVector base = composite_channel(ch, phases, 0);

  ChannelSet bumped = ch;
  CMatrix delta = random_matrix(4, 3, rng);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 3; ++c) bumped.hops[0](r, c) += delta(r, c);
  const CVector after = composite_channel(bumped, phases, 0);

  ChannelSet only_delta = ch;
  only_delta.hops[0] = delta;
  for (std::size_t m = 0; m < 3; ++m) only_delta.direct[0][m] = 0.0;
  const CVector lin = composite_channel(only_delta, phases, 0);
  for (std::size_t m = 0; m < 3; ++m)
    CHECK(std::abs(after[m] - (base[m] + lin[m])) < 1e-12);
}

TEST_CASE("sinr: single user has no interference term") {
  RngStream rng(5);
  ChannelSet ch = random_channelset(3, 1, {}, rng);
  BeamformingSolution sol;
  sol.F = random_matrix(3, 1, rng);
  sol.F = normalize_power(sol.F, 2.0);
  const double noise = 0.5;
  cplx s(0.0, 0.0);
  for (std::size_t m = 0; m < 3; ++m) s += ch.direct[0][m] * sol.F(m, 0);
  CHECK(sinr(sol, ch, 0, noise) == doctest::Approx(std::norm(s) / noise).epsilon(1e-12));
}

TEST_CASE("sinr: matches scalar expansion of the defining ratio") {
  RngStream rng(6);
  ChannelSet ch = random_channelset(3, 3, {2}, rng);
  std::vector<CVector> phases;
  CVector v(2);
  v[0] = std::polar(1.0, 0.4);
  v[1] = std::polar(1.0, -1.1);
  phases.push_back(v);
  BeamformingSolution sol;
  sol.F = normalize_power(random_matrix(3, 3, rng), 4.0);
  sol.phases = phases;
  const double noise = 0.25;

  for (std::size_t k = 0; k < 3; ++k) {
    const CVector gk = composite_channel(ch, phases, k);
    double sig = 0.0, intf = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      cplx s(0.0, 0.0);
      for (std::size_t m = 0; m < 3; ++m) s += gk[m] * sol.F(m, j);
      if (j == k)
        sig = std::norm(s);
      else
        intf += std::norm(s);
    }
    CHECK(sinr(sol, ch, k, noise) == doctest::Approx(sig / (intf + noise)).epsilon(1e-12));
  }
}

TEST_CASE("sum_rate: trivial values") {
  RngStream rng(7);
  ChannelSet ch = random_channelset(2, 1, {}, rng);
  BeamformingSolution sol;
  sol.F = CMatrix(2, 1);  // all-zero precoder transmits nothing
  CHECK(sum_rate(sol, ch, 1.0) == 0.0);

  // crafted SINR = 1 for a single user: rate = 1 bit/s/Hz
  ChannelSet unit;
  unit.direct.push_back(CVector{cplx(1.0, 0.0)});
  BeamformingSolution one;
  one.F = CMatrix(1, 1);
  one.F(0, 0) = 1.0;
  CHECK(sum_rate(one, unit, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sum_rate: K equal SINRs add") {
  // three orthogonal users, each SINR 3 -> 3*log2(4) = 6
  ChannelSet ch;
  for (std::size_t k = 0; k < 3; ++k) {
    CVector w(3);
    w[k] = 1.0;
    ch.direct.push_back(w);
  }
  BeamformingSolution sol;
  sol.F = CMatrix(3, 3);
  const double noise = 1.0 / 3.0;  // |1|^2 / noise = 3 with unit diagonal F
  for (std::size_t k = 0; k < 3; ++k) sol.F(k, k) = 1.0;
  CHECK(sum_rate(sol, ch, noise) == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("normalize_power") {
  RngStream rng(8);
  CMatrix f = random_matrix(3, 2, rng);
  const double p_t = 7.0;

  CMatrix f1 = normalize_power(f, p_t);
  CHECK(precoder_power(f1) == doctest::Approx(p_t).epsilon(1e-12));
  // already feasible input is unchanged
  CMatrix f2 = normalize_power(f1, p_t);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(f2(i, j) - f1(i, j)) < 1e-14);

  // trace 4 P_t scales by 1/2
  CMatrix f4 = f1;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) f4(i, j) *= 2.0;
  CMatrix back = normalize_power(f4, p_t);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(back(i, j) - f1(i, j)) < 1e-13);

  CHECK_THROWS_AS(normalize_power(CMatrix(3, 2), p_t), std::invalid_argument);
}

TEST_CASE("project_phases") {
  CVector raw(3);
  raw[0] = std::polar(1.0, 0.9);
  raw[1] = cplx(2.0, 0.0);
  raw[2] = cplx(0.0, 0.0);
  auto out = project_phases({raw});
  CHECK(std::abs(out[0][0] - raw[0]) < 1e-15);
  CHECK(out[0][1] == cplx(1.0, 0.0));
  CHECK(out[0][2] == cplx(1.0, 0.0));
}

TEST_CASE("invariant: per-column phase rotation leaves every SINR unchanged") {
  RngStream rng(9);
  ChannelSet ch = random_channelset(4, 3, {3}, rng);
  std::vector<CVector> phases;
  CVector v(3);
  for (std::size_t i = 0; i < 3; ++i) v[i] = std::polar(1.0, rng.uniform(0.0, 6.28));
  phases.push_back(v);
  BeamformingSolution sol;
  sol.F = normalize_power(random_matrix(4, 3, rng), 5.0);
  sol.phases = phases;

  BeamformingSolution rotated = sol;
  for (std::size_t j = 0; j < 3; ++j) {
    const cplx phase = std::polar(1.0, rng.uniform(0.0, 6.28));
    for (std::size_t i = 0; i < 4; ++i) rotated.F(i, j) *= phase;
  }
  for (std::size_t k = 0; k < 3; ++k)
    CHECK(sinr(rotated, ch, k, 0.3) == doctest::Approx(sinr(sol, ch, k, 0.3)).epsilon(1e-12));
}

TEST_CASE("invariant: joint power/noise scaling leaves SINRs unchanged") {
  RngStream rng(10);
  ChannelSet ch = random_channelset(3, 2, {}, rng);
  BeamformingSolution sol;
  sol.F = normalize_power(random_matrix(3, 2, rng), 2.0);
  const double noise = 0.7;

  const double c = 3.5;
  BeamformingSolution scaled = sol;
  scaled.F = normalize_power(sol.F, 2.0 * c);
  for (std::size_t k = 0; k < 2; ++k)
    CHECK(sinr(scaled, ch, k, noise * c) == doctest::Approx(sinr(sol, ch, k, noise)).epsilon(1e-12));
}

TEST_CASE("invariant: sum_rate equals an independent scalar re-implementation") {
  RngStream rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t m = 1 + rng.below(3);
    const std::size_t k = 1 + rng.below(std::min<std::size_t>(m, 3));
    const std::size_t n1 = 1 + rng.below(3);
    ChannelSet ch = random_channelset(m, k, {n1}, rng);
    std::vector<CVector> phases;
    CVector v(n1);
    for (std::size_t i = 0; i < n1; ++i) v[i] = std::polar(1.0, rng.uniform(0.0, 6.28));
    phases.push_back(v);
    BeamformingSolution sol;
    sol.F = normalize_power(random_matrix(m, k, rng), 3.0);
    sol.phases = phases;
    const double noise = 0.4;

    // independent path: expand everything in scalar arithmetic
    double rate = 0.0;
    for (std::size_t u = 0; u < k; ++u) {
      std::vector<cplx> geff(m, cplx(0.0, 0.0));
      for (std::size_t mm = 0; mm < m; ++mm) {
        cplx s(0.0, 0.0);
        for (std::size_t n = 0; n < n1; ++n)
          s += ch.last_hop[u][n] * phases[0][n] * ch.hops[0](n, mm);
        geff[mm] = s + ch.direct[u][mm];
      }
      double sig = 0.0, intf = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        cplx s(0.0, 0.0);
        for (std::size_t mm = 0; mm < m; ++mm) s += geff[mm] * sol.F(mm, j);
        (j == u ? sig : intf) += std::norm(s);
      }
      rate += std::log2(1.0 + sig / (intf + noise));
    }
    CHECK(sum_rate(sol, ch, noise) == doctest::Approx(rate).epsilon(1e-10));
  }
}

TEST_CASE("solution_feasible") {
  RngStream rng(12);
  BeamformingSolution sol;
  sol.F = normalize_power(random_matrix(2, 2, rng), 1.0);
  CVector p(3);
  for (std::size_t i = 0; i < 3; ++i) p[i] = std::polar(1.0, rng.uniform(0.0, 6.28));
  sol.phases.push_back(p);
  CHECK(solution_feasible(sol, 1.0));

  BeamformingSolution hot = sol;
  hot.F(0, 0) *= 4.0;
  CHECK(!solution_feasible(hot, 1.0));

  BeamformingSolution off = sol;
  off.phases[0][1] *= 1.5;
  CHECK(!solution_feasible(off, 1.0));
}

TEST_CASE("SystemConfig validation names the offending field") {
  SystemConfig cfg;
  cfg.M = 2;
  cfg.K = 3;  // violates M >= K
  cfg.I = 0;
  cfg.N = {};
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("M"), std::invalid_argument);

  SystemConfig cfg2;
  cfg2.P_t = 0.0;
  CHECK_THROWS_WITH_AS(cfg2.validate(), doctest::Contains("P_t"), std::invalid_argument);
}
