#pragma once

#include <cstddef>
#include <vector>

#include "ris/cxmat.hpp"

namespace ris {

struct ChannelSet;  // channel.hpp

// Scenario dimensions and budgets shared by every module.
struct SystemConfig {
  std::size_t M = 4;               // BS antennas
  std::size_t K = 2;               // single-antenna users
  std::size_t I = 2;               // RIS hops
  std::vector<std::size_t> N{16, 16};  // elements per RIS, length I
  double P_t = 10.0;               // total BS transmit power, W
  double noise_power = 1e-10;      // sigma_n^2, W
  double frequency = 0.12e12;      // Hz
  double bandwidth = 12e9;         // Hz

  void validate() const;  // throws std::invalid_argument naming the field
};

// Digital precoder plus per-RIS phase vectors (diagonals of the Phi_i).
struct BeamformingSolution {
  CMatrix F;                    // M x K
  std::vector<CVector> phases;  // phases[i] has length N_i, unit modulus

  bool is_finite() const;
};

// Feasibility per the power and unit-modulus constraints.
bool solution_feasible(const BeamformingSolution& sol, double p_t,
                       double power_slack = 1e-9, double modulus_slack = 1e-12);

// Effective BS->user-k row channel: g_k^T Phi_I H_I ... Phi_1 H_1 + w_k^T.
// The hop adjacent to the BS is applied last so dimensions chain; with I=0
// this is just the direct channel.
CVector composite_channel(const ChannelSet& ch, const std::vector<CVector>& phases,
                          std::size_t k);

// All composite channels at once (the hot path computes them together).
std::vector<CVector> composite_channels(const ChannelSet& ch,
                                        const std::vector<CVector>& phases);

// |g~_k^T f_k|^2 / (sum_{j != k} |g~_k^T f_j|^2 + noise_power)
double sinr(const BeamformingSolution& sol, const ChannelSet& ch, std::size_t k,
            double noise_power);

// Same, given precomputed composite channels.
double sinr_from_composites(const CMatrix& f, const std::vector<CVector>& comps,
                            std::size_t k, double noise_power);

// sum_k log2(1 + sinr_k), bits/s/Hz
double sum_rate(const BeamformingSolution& sol, const ChannelSet& ch,
                double noise_power);
double sum_rate_from_composites(const CMatrix& f, const std::vector<CVector>& comps,
                                double noise_power);

// Scales F so that trace(F^H F) == p_t; rejects an all-zero F.
CMatrix normalize_power(const CMatrix& f, double p_t);

double precoder_power(const CMatrix& f);  // trace(F^H F)

// Entrywise unit-modulus projection of raw phase vectors.
std::vector<CVector> project_phases(const std::vector<CVector>& raw);

}  // namespace ris
