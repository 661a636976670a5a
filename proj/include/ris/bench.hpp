#pragma once

#include <vector>

#include "ris/channel.hpp"
#include "ris/rng.hpp"
#include "ris/system.hpp"

namespace ris::bench {

struct BaselineResult {
  BeamformingSolution sol;
  double rate = 0.0;          // sum rate, bits/s/Hz
  bool fallback_used = false;  // zf_no_ris fell back to the null-space construction
};

// Full-digital zero forcing without any RIS: right pseudo-inverse of the
// stacked direct channels, columns scaled to equal per-user power. A
// rank-deficient stack falls back to the null-space construction and is
// flagged. Requires M >= K.
BaselineResult zf_no_ris(const std::vector<CVector>& direct, double p_t,
                         double noise_power);

// Simplified single-hop alternating baseline (a stand-in, not the published
// benchmark): alternately resolves the precoder by the max-min initializer
// at fixed phases and coordinate-ascends every phase entry over a 64-point
// grid, keeping only improving moves so the sum rate never decreases.
// Stops when one outer round improves the rate by less than 1e-4.
BaselineResult alternating_single_hop(const SystemConfig& cfg, const ChannelSet& ch,
                                      std::size_t outer_iters);

struct OracleResult {
  BeamformingSolution sol;
  double rate = 0.0;
};

// Exhaustive phase-grid search for tiny instances: every phase entry runs
// over a uniform grid and the precoder is the max-min optimum per phase
// combination. Guarded to at most 4 phase entries and 64 grid points.
OracleResult brute_force_oracle(const SystemConfig& cfg, const ChannelSet& ch,
                                std::size_t grid_points);

struct TinyInstance {
  SystemConfig cfg;
  ChannelSet ch;
};

// Random single-user, single-hop instance small enough for the oracle.
TinyInstance random_tiny_instance(RngStream& rng);

}  // namespace ris::bench
