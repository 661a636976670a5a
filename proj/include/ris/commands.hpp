#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ris/ddpg.hpp"
#include "ris/scenario.hpp"

namespace ris::cli {

struct TrainArtifacts {
  std::string trace_csv;
  std::string summary_json;
  std::string best_json;
  std::string checkpoint;
  double best_sum_rate = 0.0;
};

// Runs one training and writes the reward trace CSV, the best-solution
// record, a JSON summary and a network checkpoint into out_dir (the
// scenario's output_dir when empty).
TrainArtifacts cmd_train(const Scenario& s, const std::string& out_dir = "");

// Trained networks and whitening statistics as written by cmd_train.
struct Checkpoint {
  ddpg::Whitener whiten;
  neural::DenseNet actor, critic, actor_target, critic_target;
};

Checkpoint load_checkpoint(const std::string& path);

// Known sweep schemes: no_ris_zf, single_hop_alt, single_hop_drl,
// multi_hop_drl.
extern const std::vector<std::string> kSweepSchemes;

// Scenario dimensions restricted to one scheme; rejects combinations the
// scenario cannot support (for example a single-hop scheme with I = 0).
SystemConfig scheme_config(const Scenario& s, const std::string& scheme);

struct SweepPoint {
  std::string scheme;
  double distance_m = 0.0;
  std::vector<double> rates;           // per Monte-Carlo draw, bits/s/Hz
  double mean_throughput_bps = 0.0;
};

// One (scheme, distance) cell: channels are drawn from substreams keyed
// only by the draw index, so different schemes face common randomness.
// DRL schemes train once per cell and are then evaluated per draw by a
// greedy policy rollout.
SweepPoint run_sweep_point(const Scenario& s, const std::string& scheme, double distance,
                           std::size_t n_mc, std::size_t eval_steps);

struct SweepOptions {
  std::vector<double> distances;      // positive, ascending
  std::vector<std::string> schemes;
  std::size_t n_mc = 50;
  std::size_t eval_steps = 30;
  std::size_t workers = 1;
};

// Writes CSV rows (scheme, distance_m, throughput_bps); cells run on a
// small worker pool and are written by a single aggregator in a fixed
// order, so output is byte-stable for a given seed.
std::vector<SweepPoint> cmd_sweep_distance(const Scenario& s, const SweepOptions& opt,
                                           const std::string& out_csv);

// Empirical CDF of per-episode average rewards, one curve per completed
// scenario (reads <output_dir>/reward_trace.csv written by cmd_train).
void cmd_reward_cdf(const std::vector<std::string>& scenario_paths,
                    const std::string& out_csv);

// One training per learning rate (applied to both actor and critic) under
// a shared seed; emits (learning_rate, step, average_reward) rows.
void cmd_lr_study(const Scenario& s, const std::vector<double>& rates,
                  const std::string& out_csv);

// Runs the named invariant checks and prints one row per check; returns
// a process exit status (0 on all-pass).
int cmd_check(std::ostream& os);

}  // namespace ris::cli
