#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "ris/channel.hpp"
#include "ris/ddpg.hpp"
#include "ris/system.hpp"

namespace ris::cli {

// Node placement policy: the BS sits on the edge of a circular region,
// users are drawn uniformly from a small disc centered at the probe
// distance along the chord toward the region center, and the RIS chain
// is spaced evenly along that chord between the BS and the user disc.
struct Placement {
  double circle_diameter_m = 100.0;
  std::uint64_t placement_seed = 1;
  double user_disc_radius_m = 0.5;
  double bs_user_distance_m = 10.0;
};

struct Scenario {
  SystemConfig system;
  RicianFactors rician;
  ThzLinkParams link;  // frequency mirrors system.frequency
  Placement placement;
  ddpg::Hyper hyper;
  std::uint64_t seed = 0;
  ddpg::InitMethod init_method = ddpg::InitMethod::method2;
  std::string output_dir = "out";

  void validate() const;
};

// Parses the JSON scenario text. Missing required fields and malformed
// values raise std::invalid_argument naming the offending field; syntax
// errors carry the parser's position diagnostics.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

// Serialization is total: parse(serialize(s)) == s.
std::string serialize_scenario(const Scenario& s);

// Topology for the given dimensions; user_distance overrides the
// scenario's probe distance (used by sweeps).
Topology make_topology(const Scenario& s, const SystemConfig& cfg,
                       std::optional<double> user_distance);

// Table-scale episode/step counts (selected by --full-scale).
void apply_full_scale(ddpg::Hyper& hp);

}  // namespace ris::cli
