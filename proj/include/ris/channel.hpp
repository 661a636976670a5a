#pragma once

#include <vector>

#include "ris/cxmat.hpp"
#include "ris/rng.hpp"
#include "ris/system.hpp"

namespace ris {

inline constexpr double kLightSpeed = 2.99792458e8;  // m/s

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

double distance(const Vec3& a, const Vec3& b);

// Propagation parameters of one scenario. alpha_molec folds frequency,
// temperature and pressure into a single absorption coefficient (1/m);
// reflection_amplitude stands in for the scattered-power statistic of a
// rough surface, one multiplicative factor per reflection.
struct ThzLinkParams {
  double frequency = 0.12e12;          // Hz
  double alpha_molec = 0.0;            // 1/m
  double reflection_amplitude = 0.7;   // in (0, 1]

  void validate() const;
};

// Rician K-factors for the three link classes.
struct RicianFactors {
  double k_h = 1.0;  // BS->RIS and RIS->RIS hops
  double k_g = 1.0;  // last RIS -> user
  double k_w = 1.0;  // BS -> user direct

  void validate() const;
};

// Node placement. ris ordered hop 1..I along the chain.
struct Topology {
  Vec3 bs;
  std::vector<Vec3> ris;
  std::vector<Vec3> users;
};

// One realization of every link in the multi-hop topology.
//   hops[0]   : N_1 x M   (BS to first RIS)
//   hops[i]   : N_{i+1} x N_i
//   last_hop  : per user, length N_I (last RIS to user)
//   direct    : per user, length M  (BS to user)
struct ChannelSet {
  std::vector<CMatrix> hops;
  std::vector<CVector> last_hop;
  std::vector<CVector> direct;

  bool is_finite() const;
};

// free-space spreading amplitude c / (4 pi f d)
double spreading_gain(double frequency, double d);

// molecular absorption amplitude exp(-alpha d / 2)
double molecular_gain(double d, double alpha);

// line-of-sight amplitude: spreading * absorption
double los_gain(const ThzLinkParams& p, double d);

// single-reflection amplitude: the reflector behaves like a mirror, so
// spreading and absorption accrue over the unfolded path length d1+d2 and
// the reflection costs one amplitude factor.
double nlos_gain(const ThzLinkParams& p, double d1, double d2);

// absorption coefficient that makes the LoS loss at (frequency, d) equal
// total_loss_db; used to calibrate scenario defaults.
double calibrate_alpha(double frequency, double d, double total_loss_db);

// sqrt(K/(K+1)) * los + sqrt(1/(K+1)) * G, G entries CN(0,1).
CMatrix sample_rician(std::size_t rows, std::size_t cols, double k_factor,
                      const CMatrix& los, RngStream& rng);

// Full channel realization: per-hop large-scale amplitudes follow the
// mirror model (the end-to-end product over a chain equals one spreading
// factor over the unfolded path length times one reflection amplitude per
// RIS), small-scale fading is Rician around a fixed unit-modulus steering
// component derived from the hop geometry.
//
// Substreams of rng are keyed per link ("H",i / "g" / "w"), so draws for a
// given link are identical across configurations that share that link.
ChannelSet realize_channels(const SystemConfig& cfg, const Topology& topo,
                            const ThzLinkParams& p, const RicianFactors& rf,
                            const RngStream& rng);

}  // namespace ris
