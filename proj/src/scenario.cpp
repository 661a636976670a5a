#include "ris/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ris::cli {

using nlohmann::json;

namespace {

[[noreturn]] void missing(const std::string& path) {
  throw std::invalid_argument("scenario: missing or invalid field " + path);
}

template <typename T>
T require(const json& block, const std::string& prefix, const char* field) {
  const auto it = block.find(field);
  if (it == block.end()) missing(prefix + "." + field);
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    missing(prefix + "." + field);
  }
}

template <typename T>
T optional_field(const json& block, const std::string& prefix, const char* field,
                 T fallback) {
  const auto it = block.find(field);
  if (it == block.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    missing(prefix + "." + field);
  }
}

}  // namespace

void Scenario::validate() const {
  system.validate();
  link.validate();
  rician.validate();
  hyper.validate();
  if (!(placement.circle_diameter_m > 0.0))
    throw std::invalid_argument("scenario: placement.circle_diameter_m must be > 0");
  if (!(placement.bs_user_distance_m > 0.0))
    throw std::invalid_argument("scenario: placement.bs_user_distance_m must be > 0");
  if (placement.user_disc_radius_m < 0.0 ||
      placement.user_disc_radius_m >= placement.bs_user_distance_m)
    throw std::invalid_argument(
        "scenario: placement.user_disc_radius_m must be in [0, bs_user_distance_m)");
  if (output_dir.empty()) throw std::invalid_argument("scenario: run.output_dir is empty");
}

Scenario parse_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("scenario: ") + e.what());
  }

  Scenario s;

  const auto sys_it = root.find("system");
  if (sys_it == root.end()) missing("system");
  const json& sys = *sys_it;
  s.system.M = require<std::size_t>(sys, "system", "M");
  s.system.K = require<std::size_t>(sys, "system", "K");
  s.system.I = require<std::size_t>(sys, "system", "I");
  s.system.N = require<std::vector<std::size_t>>(sys, "system", "N");
  s.system.P_t = require<double>(sys, "system", "P_t");
  s.system.noise_power = optional_field(sys, "system", "noise_power", 1e-10);
  s.system.frequency = optional_field(sys, "system", "frequency", 0.12e12);
  s.system.bandwidth = optional_field(sys, "system", "bandwidth", 12e9);

  s.link.frequency = s.system.frequency;
  const json chan = root.value("channel", json::object());
  s.rician.k_h = optional_field(chan, "channel", "K_H", 1.0);
  s.rician.k_g = optional_field(chan, "channel", "K_g", 1.0);
  s.rician.k_w = optional_field(chan, "channel", "K_w", 1.0);
  // default absorption: calibrated so the 10 m line-of-sight budget is 100 dB
  s.link.alpha_molec = optional_field(chan, "channel", "alpha_molec",
                                      calibrate_alpha(s.link.frequency, 10.0, 100.0));
  s.link.reflection_amplitude = optional_field(chan, "channel", "reflection_amplitude", 0.7);
  const json plc = chan.value("placement", json::object());
  s.placement.circle_diameter_m =
      optional_field(plc, "channel.placement", "circle_diameter_m", 100.0);
  s.placement.placement_seed =
      optional_field<std::uint64_t>(plc, "channel.placement", "placement_seed", 1);
  s.placement.user_disc_radius_m =
      optional_field(plc, "channel.placement", "user_disc_radius_m", 0.5);
  s.placement.bs_user_distance_m =
      optional_field(plc, "channel.placement", "bs_user_distance_m", 10.0);

  const json hyp = root.value("hyper", json::object());
  ddpg::Hyper& h = s.hyper;
  h.beta = optional_field(hyp, "hyper", "beta", h.beta);
  h.mu_c = optional_field(hyp, "hyper", "mu_c", h.mu_c);
  h.mu_a = optional_field(hyp, "hyper", "mu_a", h.mu_a);
  h.tau_c = optional_field(hyp, "hyper", "tau_c", h.tau_c);
  h.tau_a = optional_field(hyp, "hyper", "tau_a", h.tau_a);
  h.lambda_c = optional_field(hyp, "hyper", "lambda_c", h.lambda_c);
  h.lambda_a = optional_field(hyp, "hyper", "lambda_a", h.lambda_a);
  h.buffer_size = optional_field(hyp, "hyper", "buffer_size", h.buffer_size);
  h.episodes = optional_field(hyp, "hyper", "episodes", h.episodes);
  h.steps_per_episode = optional_field(hyp, "hyper", "steps_per_episode", h.steps_per_episode);
  h.minibatch = optional_field(hyp, "hyper", "minibatch", h.minibatch);
  h.sync_interval = optional_field(hyp, "hyper", "sync_interval", h.sync_interval);
  h.exploration_sigma0 = optional_field(hyp, "hyper", "exploration_sigma0", h.exploration_sigma0);
  h.exploration_decay = optional_field(hyp, "hyper", "exploration_decay", h.exploration_decay);
  h.hidden1 = optional_field(hyp, "hyper", "hidden1", h.hidden1);
  h.hidden2 = optional_field(hyp, "hyper", "hidden2", h.hidden2);
  h.penalty_coeff = optional_field(hyp, "hyper", "penalty_coeff", h.penalty_coeff);
  h.whiten_momentum = optional_field(hyp, "hyper", "whiten_momentum", h.whiten_momentum);
  h.action_range = optional_field(hyp, "hyper", "action_range", h.action_range);
  h.include_direct_in_state =
      optional_field(hyp, "hyper", "include_direct_in_state", h.include_direct_in_state);
  h.init_random_phases =
      optional_field(hyp, "hyper", "init_random_phases", h.init_random_phases);

  const json run = root.value("run", json::object());
  s.seed = optional_field<std::uint64_t>(run, "run", "seed", 0);
  const std::string im = optional_field<std::string>(run, "run", "init_method", "method2");
  s.init_method = ddpg::init_method_from_string(im);
  s.output_dir = optional_field<std::string>(run, "run", "output_dir", "out");

  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("scenario: cannot open " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
  json root;
  root["system"] = {{"M", s.system.M},
                    {"K", s.system.K},
                    {"I", s.system.I},
                    {"N", s.system.N},
                    {"P_t", s.system.P_t},
                    {"noise_power", s.system.noise_power},
                    {"frequency", s.system.frequency},
                    {"bandwidth", s.system.bandwidth}};
  root["channel"] = {{"K_H", s.rician.k_h},
                     {"K_g", s.rician.k_g},
                     {"K_w", s.rician.k_w},
                     {"alpha_molec", s.link.alpha_molec},
                     {"reflection_amplitude", s.link.reflection_amplitude},
                     {"placement",
                      {{"circle_diameter_m", s.placement.circle_diameter_m},
                       {"placement_seed", s.placement.placement_seed},
                       {"user_disc_radius_m", s.placement.user_disc_radius_m},
                       {"bs_user_distance_m", s.placement.bs_user_distance_m}}}};
  const ddpg::Hyper& h = s.hyper;
  root["hyper"] = {{"beta", h.beta},
                   {"mu_c", h.mu_c},
                   {"mu_a", h.mu_a},
                   {"tau_c", h.tau_c},
                   {"tau_a", h.tau_a},
                   {"lambda_c", h.lambda_c},
                   {"lambda_a", h.lambda_a},
                   {"buffer_size", h.buffer_size},
                   {"episodes", h.episodes},
                   {"steps_per_episode", h.steps_per_episode},
                   {"minibatch", h.minibatch},
                   {"sync_interval", h.sync_interval},
                   {"exploration_sigma0", h.exploration_sigma0},
                   {"exploration_decay", h.exploration_decay},
                   {"hidden1", h.hidden1},
                   {"hidden2", h.hidden2},
                   {"penalty_coeff", h.penalty_coeff},
                   {"whiten_momentum", h.whiten_momentum},
                   {"action_range", h.action_range},
                   {"include_direct_in_state", h.include_direct_in_state},
                   {"init_random_phases", h.init_random_phases}};
  root["run"] = {{"seed", s.seed},
                 {"init_method", ddpg::init_method_to_string(s.init_method)},
                 {"output_dir", s.output_dir}};
  return root.dump(2);
}

Topology make_topology(const Scenario& s, const SystemConfig& cfg,
                       std::optional<double> user_distance) {
  const double d_user = user_distance.value_or(s.placement.bs_user_distance_m);
  if (!(d_user > 0.0)) throw std::invalid_argument("make_topology: distance must be > 0");
  if (d_user > s.placement.circle_diameter_m)
    throw std::invalid_argument("make_topology: users outside the deployment region");

  // The RIS chain is spaced evenly along the chord from the BS toward the
  // served user disc, so every chain keeps an unfolded path length close to
  // the direct distance and longer chains trade reflection loss against
  // aperture rather than against extra absorption.
  Topology topo;
  topo.bs = {0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < cfg.I; ++i)
    topo.ris.push_back(
        {d_user * static_cast<double>(i + 1) / static_cast<double>(cfg.I + 1), 0.0, 0.0});

  RngStream rng(mix64(s.placement.placement_seed));
  const double r_max = std::min(s.placement.user_disc_radius_m, 0.5 * d_user);
  for (std::size_t k = 0; k < cfg.K; ++k) {
    RngStream sub = rng.substream("user", k);
    const double r = r_max * std::sqrt(sub.uniform());
    const double th = sub.uniform(0.0, 2.0 * 3.14159265358979323846);
    topo.users.push_back({d_user + r * std::cos(th), r * std::sin(th) + 1e-3, 0.0});
  }
  return topo;
}

void apply_full_scale(ddpg::Hyper& hp) {
  hp.episodes = 5000;
  hp.steps_per_episode = 20000;
}

}  // namespace ris::cli
