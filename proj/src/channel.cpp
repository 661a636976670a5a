#include "ris/channel.hpp"

#include <cmath>

namespace ris {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Fixed unit-modulus steering component for one link: a ULA phase
// progression with 2-wavelength element spacing, slopes taken from the
// link azimuth at either end. Deterministic per topology, rank one.
CMatrix steering_los(std::size_t rows, std::size_t cols, const Vec3& from, const Vec3& to) {
  const double az_out = std::atan2(to.y - from.y, to.x - from.x);
  const double az_in = std::atan2(from.y - to.y, from.x - to.x);
  const double spacing = 2.0;  // element spacing in wavelengths
  const double slope_rx = 2.0 * kPi * spacing * std::sin(az_in);
  const double slope_tx = 2.0 * kPi * spacing * std::sin(az_out);
  CMatrix h(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const double phase = slope_rx * static_cast<double>(r) + slope_tx * static_cast<double>(c);
      h(r, c) = cplx(std::cos(phase), std::sin(phase));
    }
  return h;
}

CMatrix scale(const CMatrix& m, double s) {
  CMatrix out = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) *= s;
  return out;
}

}  // namespace

double distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

void ThzLinkParams::validate() const {
  if (!(frequency > 0.0)) throw std::invalid_argument("ThzLinkParams: frequency must be > 0");
  if (alpha_molec < 0.0) throw std::invalid_argument("ThzLinkParams: alpha_molec must be >= 0");
  if (!(reflection_amplitude > 0.0) || reflection_amplitude > 1.0)
    throw std::invalid_argument("ThzLinkParams: reflection_amplitude must be in (0,1]");
}

void RicianFactors::validate() const {
  if (k_h < 0.0 || k_g < 0.0 || k_w < 0.0)
    throw std::invalid_argument("RicianFactors: factors must be >= 0");
}

bool ChannelSet::is_finite() const {
  for (const CMatrix& h : hops)
    if (!h.is_finite()) return false;
  for (const CVector& g : last_hop)
    if (!g.is_finite()) return false;
  for (const CVector& w : direct)
    if (!w.is_finite()) return false;
  return true;
}

double spreading_gain(double frequency, double d) {
  if (!(frequency > 0.0)) throw std::invalid_argument("spreading_gain: frequency must be > 0");
  if (!(d > 0.0)) throw std::invalid_argument("spreading_gain: distance must be > 0");
  return kLightSpeed / (4.0 * kPi * frequency * d);
}

double molecular_gain(double d, double alpha) {
  if (d < 0.0) throw std::invalid_argument("molecular_gain: distance must be >= 0");
  if (alpha < 0.0) throw std::invalid_argument("molecular_gain: alpha must be >= 0");
  return std::exp(-0.5 * alpha * d);
}

double los_gain(const ThzLinkParams& p, double d) {
  return spreading_gain(p.frequency, d) * molecular_gain(d, p.alpha_molec);
}

double nlos_gain(const ThzLinkParams& p, double d1, double d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0))
    throw std::invalid_argument("nlos_gain: distances must be > 0");
  return p.reflection_amplitude * spreading_gain(p.frequency, d1 + d2) *
         molecular_gain(d1 + d2, p.alpha_molec);
}

double calibrate_alpha(double frequency, double d, double total_loss_db) {
  const double target_amplitude = std::pow(10.0, -total_loss_db / 20.0);
  const double spread = spreading_gain(frequency, d);
  if (target_amplitude >= spread)
    throw std::invalid_argument("calibrate_alpha: spreading alone already exceeds the target");
  return -2.0 * std::log(target_amplitude / spread) / d;
}

CMatrix sample_rician(std::size_t rows, std::size_t cols, double k_factor,
                      const CMatrix& los, RngStream& rng) {
  if (los.rows() != rows || los.cols() != cols)
    throw std::invalid_argument("sample_rician: LoS dimensions mismatch");
  if (k_factor < 0.0) throw std::invalid_argument("sample_rician: k_factor must be >= 0");
  const double a = std::sqrt(k_factor / (k_factor + 1.0));
  const double b = std::sqrt(1.0 / (k_factor + 1.0));
  const double inv_sqrt2 = 0.70710678118654752440;
  CMatrix h(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      const cplx diffuse(rng.normal() * inv_sqrt2, rng.normal() * inv_sqrt2);
      h(i, j) = a * los(i, j) + b * diffuse;
    }
  return h;
}

ChannelSet realize_channels(const SystemConfig& cfg, const Topology& topo,
                            const ThzLinkParams& p, const RicianFactors& rf,
                            const RngStream& rng) {
  cfg.validate();
  p.validate();
  rf.validate();
  if (topo.ris.size() != cfg.I)
    throw std::invalid_argument("realize_channels: topology RIS count differs from I");
  if (topo.users.size() != cfg.K)
    throw std::invalid_argument("realize_channels: topology user count differs from K");

  ChannelSet ch;

  // Cumulative unfolded path length along the chain; each later hop carries
  // the spreading ratio so that the product over the chain equals one
  // spreading factor over the total path plus one reflection per RIS.
  double cumulative = 0.0;
  Vec3 prev = topo.bs;
  for (std::size_t i = 0; i < cfg.I; ++i) {
    const double d = distance(prev, topo.ris[i]);
    if (!(d > 0.0)) throw std::invalid_argument("realize_channels: zero-length hop");
    double amp = 0.0;
    if (i == 0) {
      amp = los_gain(p, d);
    } else {
      amp = p.reflection_amplitude * (cumulative / (cumulative + d)) *
            molecular_gain(d, p.alpha_molec);
    }
    cumulative += d;

    const std::size_t rows = cfg.N[i];
    const std::size_t cols = (i == 0) ? cfg.M : cfg.N[i - 1];
    const CMatrix los = steering_los(rows, cols, prev, topo.ris[i]);
    RngStream sub = rng.substream("H", i);
    ch.hops.push_back(scale(sample_rician(rows, cols, rf.k_h, los, sub), amp));
    prev = topo.ris[i];
  }

  for (std::size_t k = 0; k < cfg.K; ++k) {
    if (cfg.I > 0) {
      const double d = distance(topo.ris[cfg.I - 1], topo.users[k]);
      if (!(d > 0.0)) throw std::invalid_argument("realize_channels: user sits on the last RIS");
      const double amp = p.reflection_amplitude * (cumulative / (cumulative + d)) *
                         molecular_gain(d, p.alpha_molec);
      const CMatrix los = steering_los(1, cfg.N[cfg.I - 1], topo.ris[cfg.I - 1], topo.users[k]);
      RngStream sub = rng.substream("g", k);
      const CMatrix row = scale(sample_rician(1, cfg.N[cfg.I - 1], rf.k_g, los, sub), amp);
      CVector g(cfg.N[cfg.I - 1]);
      for (std::size_t n = 0; n < g.size(); ++n) g[n] = row(0, n);
      ch.last_hop.push_back(std::move(g));
    }

    const double dw = distance(topo.bs, topo.users[k]);
    if (!(dw > 0.0)) throw std::invalid_argument("realize_channels: user sits on the BS");
    const double ampw = los_gain(p, dw);
    const CMatrix losw = steering_los(1, cfg.M, topo.bs, topo.users[k]);
    RngStream sub = rng.substream("w", k);
    const CMatrix row = scale(sample_rician(1, cfg.M, rf.k_w, losw, sub), ampw);
    CVector w(cfg.M);
    for (std::size_t m = 0; m < w.size(); ++m) w[m] = row(0, m);
    ch.direct.push_back(std::move(w));
  }

  return ch;
}

}  // namespace ris
