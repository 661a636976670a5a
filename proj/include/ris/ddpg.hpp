#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ris/channel.hpp"
#include "ris/neural.hpp"
#include "ris/rng.hpp"
#include "ris/system.hpp"

namespace ris::ddpg {

enum class InitMethod { method1, method2, random };

InitMethod init_method_from_string(const std::string& s);
std::string init_method_to_string(InitMethod m);

// Training hyperparameters. The published table drives the defaults for
// the discount, learning rates, target rates, decay rates, buffer, batch
// and sync interval; episode/step counts default to the desk scale used
// by CI. Exploration, whitening, widths and the action head are plumbing
// knobs the table does not cover.
struct Hyper {
  double beta = 0.99;        // future-reward discount
  double mu_c = 0.001;       // critic learning rate
  double mu_a = 0.001;       // actor learning rate
  double tau_c = 0.001;      // target critic blend rate
  double tau_a = 0.001;      // target actor blend rate
  double lambda_c = 0.005;   // critic per-episode learning-rate decay
  double lambda_a = 0.005;   // actor per-episode learning-rate decay
  std::size_t buffer_size = 100000;
  std::size_t episodes = 20;          // Z
  std::size_t steps_per_episode = 500;  // T
  std::size_t minibatch = 16;         // W
  std::size_t sync_interval = 1;      // U
  double exploration_sigma0 = 0.1;
  double exploration_decay = 0.999;   // per episode
  std::size_t hidden1 = 256;
  std::size_t hidden2 = 128;
  double penalty_coeff = 0.0;
  double whiten_momentum = 0.999;
  double action_range = 1.0;
  bool include_direct_in_state = false;
  bool init_random_phases = false;

  void validate() const;
};

// State width 2MK + 2*sum N_i + 2MN_1 + 2*sum N_i N_{i+1} + 2K N_I, plus
// 2MK more when the direct channels are included (a documented extension
// of the printed formula).
std::size_t state_dim(const SystemConfig& cfg, bool include_direct);

// Action width 2MK + 2*sum N_i.
std::size_t action_dim(const SystemConfig& cfg);

// Layout, in order: Re then Im of F (row-major); per RIS, Re then Im of
// the phase vector; Re then Im of each hop matrix (row-major); per user,
// Re then Im of g_k; optionally per user, Re then Im of w_k.
std::vector<double> encode_state(const ChannelSet& ch, const BeamformingSolution& prev,
                                 bool include_direct);

// Action layout: Re then Im of F (row-major), then per RIS Re then Im of
// the phase vector. decode applies the feasibility projections; encode of
// a feasible solution round-trips through decode unchanged.
std::vector<double> encode_action(const BeamformingSolution& sol);

struct DecodedAction {
  BeamformingSolution sol;
  bool zero_f_fallback = false;  // F slice was all zero, previous F substituted
};

// prev_f may be null; an all-zero F slice then raises the rejected-input
// error instead of falling back.
DecodedAction decode_action(const std::vector<double>& raw, const SystemConfig& cfg,
                            const CMatrix* prev_f);

// sum rate minus the beam-adjustment penalty
// penalty = ||F - F_prev||_F^2 / P_t + sum_i ||phi_i - phi_i,prev||^2 / N_i.
double reward(const BeamformingSolution& sol, const ChannelSet& ch, double noise_power,
              double penalty_coeff, const BeamformingSolution& prev, double p_t);

// y = r + beta * q_next (q_next already zeroed on terminal steps)
double critic_target(double r, double q_next, double beta);

// mean of the first L entries
double average_reward(const std::vector<double>& rewards, std::size_t L);

struct Experience {
  std::vector<double> state;
  std::vector<double> action;
  double reward = 0.0;
  std::vector<double> next_state;
  bool terminal = false;
};

// Bounded FIFO with uniform minibatch sampling (distinct indices).
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, RngStream rng)
      : capacity_(capacity), rng_(std::move(rng)) {}

  void push(Experience e);
  std::size_t size() const { return storage_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Experience& at(std::size_t i) const { return storage_[i]; }
  std::vector<std::size_t> sample_indices(std::size_t w);

 private:
  std::size_t capacity_;
  std::vector<Experience> storage_;
  std::size_t head_ = 0;  // next slot to overwrite once full
  RngStream rng_;
};

// Running per-feature whitening statistics, applied identically at act
// and update time. The accumulators are exponential moving averages with
// bias correction, so the transform is already well-scaled on the first
// observations (channel features live at ~1e-5, far from the unit prior).
struct Whitener {
  std::vector<double> mean_acc, var_acc;  // uncorrected EMA accumulators
  double momentum = 0.999;
  std::uint64_t count = 0;

  void init(std::size_t width, double mom);
  void observe(const std::vector<double>& x);
  std::vector<double> apply(const std::vector<double>& x) const;
};

struct Metrics {
  std::size_t zero_f_fallbacks = 0;
  std::size_t overflow_events = 0;
  std::size_t updates = 0;
  std::size_t steps = 0;
};

struct Agent {
  SystemConfig cfg;
  Hyper hp;
  neural::DenseNet actor, critic;
  neural::DenseNet actor_target, critic_target_net;
  neural::AdamState opt_actor, opt_critic;
  Whitener whiten;
  ReplayBuffer buffer;
  std::size_t update_count = 0;
  Metrics metrics;
};

Agent make_agent(const SystemConfig& cfg, const Hyper& hp, const RngStream& seed_stream);

// Environment of one episode: fixed channels, the currently applied
// solution and its encoded state.
struct EnvState {
  ChannelSet ch;
  BeamformingSolution current;
  std::vector<double> state;
};

BeamformingSolution make_initial_solution(const SystemConfig& cfg, const ChannelSet& ch,
                                          InitMethod method, const Hyper& hp,
                                          RngStream& rng);

struct StepResult {
  double reward_value = 0.0;
  double sum_rate_value = 0.0;
  bool updated = false;
};

// One minibatch update (critic step, actor step, periodic target blends).
// train_step calls this once the buffer can fill a minibatch.
void learn_step(Agent& ag);

// Squared-error critic loss over the given buffer indices against the
// current target networks; evaluates copies, so nothing in the agent moves.
double critic_loss(const Agent& ag, const std::vector<std::size_t>& idx);

// One interaction step: act with exploration noise, project to a feasible
// solution, store the experience, and (with a full enough buffer) run one
// critic and one actor update plus the periodic target blends.
StepResult train_step(Agent& ag, EnvState& env, double sigma, bool terminal,
                      RngStream& noise_rng);

struct TraceRow {
  std::size_t episode = 0;
  std::size_t step = 0;
  double instant_reward = 0.0;
  double average_reward = 0.0;  // running mean from the start of the run
};

struct TrainResult {
  BeamformingSolution best;
  double best_sum_rate = 0.0;
  std::size_t best_episode = 0;
  std::size_t best_step = 0;
  std::vector<TraceRow> trace;
  Metrics metrics;
  Agent agent;  // trained networks, for later policy evaluation
};

// Outer loop: per episode realize fresh channels, seed the state from the
// chosen initializer (whose solution is also the step-0 action), run T
// steps, decay the learning rates and the exploration noise. The best
// solution ever seen (by sum rate) is tracked across the whole run.
TrainResult run_training(const SystemConfig& cfg, const Topology& topo,
                         const ThzLinkParams& link, const RicianFactors& rf,
                         const Hyper& hp, InitMethod init, std::uint64_t seed);

// Greedy rollout of a trained policy on one channel draw: start from the
// initializer's solution, take eval_steps noise-free actor steps, return
// the best sum rate seen (the initializer's included). Does not learn and
// does not mutate the agent.
double evaluate_policy(const Agent& ag, const ChannelSet& ch, InitMethod init,
                       std::size_t eval_steps, RngStream& init_rng);

}  // namespace ris::ddpg
