#include "ris/ddpg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "ris/initsolvers.hpp"

namespace ris::ddpg {

using neural::Mat;

InitMethod init_method_from_string(const std::string& s) {
  if (s == "method1") return InitMethod::method1;
  if (s == "method2") return InitMethod::method2;
  if (s == "random") return InitMethod::random;
  throw std::invalid_argument("unknown init_method: " + s);
}

std::string init_method_to_string(InitMethod m) {
  switch (m) {
    case InitMethod::method1: return "method1";
    case InitMethod::method2: return "method2";
    case InitMethod::random: return "random";
  }
  return "method2";
}

void Hyper::validate() const {
  if (!(beta >= 0.0) || beta >= 1.0) throw std::invalid_argument("Hyper: beta must be in [0,1)");
  if (!(mu_c > 0.0) || !(mu_a > 0.0)) throw std::invalid_argument("Hyper: learning rates must be > 0");
  if (!(tau_c > 0.0) || tau_c > 1.0 || !(tau_a > 0.0) || tau_a > 1.0)
    throw std::invalid_argument("Hyper: target rates must be in (0,1]");
  if (lambda_c < 0.0 || lambda_c >= 1.0 || lambda_a < 0.0 || lambda_a >= 1.0)
    throw std::invalid_argument("Hyper: decay rates must be in [0,1)");
  if (minibatch == 0 || minibatch > buffer_size)
    throw std::invalid_argument("Hyper: minibatch must be in [1, buffer_size]");
  if (episodes == 0 || steps_per_episode == 0)
    throw std::invalid_argument("Hyper: episodes and steps_per_episode must be >= 1");
  if (sync_interval == 0) throw std::invalid_argument("Hyper: sync_interval must be >= 1");
  if (!(exploration_sigma0 >= 0.0)) throw std::invalid_argument("Hyper: exploration_sigma0 must be >= 0");
  if (!(exploration_decay > 0.0) || exploration_decay > 1.0)
    throw std::invalid_argument("Hyper: exploration_decay must be in (0,1]");
  if (hidden1 == 0 || hidden2 == 0) throw std::invalid_argument("Hyper: hidden widths must be >= 1");
  if (!(action_range > 0.0)) throw std::invalid_argument("Hyper: action_range must be > 0");
}

std::size_t state_dim(const SystemConfig& cfg, bool include_direct) {
  std::size_t d = 2 * cfg.M * cfg.K;
  for (std::size_t n : cfg.N) d += 2 * n;
  if (cfg.I > 0) {
    d += 2 * cfg.M * cfg.N[0];
    for (std::size_t i = 0; i + 1 < cfg.I; ++i) d += 2 * cfg.N[i] * cfg.N[i + 1];
    d += 2 * cfg.K * cfg.N[cfg.I - 1];
  }
  if (include_direct) d += 2 * cfg.M * cfg.K;
  return d;
}

std::size_t action_dim(const SystemConfig& cfg) {
  std::size_t d = 2 * cfg.M * cfg.K;
  for (std::size_t n : cfg.N) d += 2 * n;
  return d;
}

namespace {

void append_complex_block(std::vector<double>& out, const cplx* data, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out.push_back(data[i].real());
  for (std::size_t i = 0; i < n; ++i) out.push_back(data[i].imag());
}

}  // namespace

std::vector<double> encode_state(const ChannelSet& ch, const BeamformingSolution& prev,
                                 bool include_direct) {
  std::vector<double> s;
  append_complex_block(s, prev.F.data(), prev.F.rows() * prev.F.cols());
  for (const CVector& phi : prev.phases) append_complex_block(s, phi.data(), phi.size());
  for (const CMatrix& h : ch.hops) append_complex_block(s, h.data(), h.rows() * h.cols());
  for (const CVector& g : ch.last_hop) append_complex_block(s, g.data(), g.size());
  if (include_direct)
    for (const CVector& w : ch.direct) append_complex_block(s, w.data(), w.size());
  return s;
}

std::vector<double> encode_action(const BeamformingSolution& sol) {
  std::vector<double> a;
  append_complex_block(a, sol.F.data(), sol.F.rows() * sol.F.cols());
  for (const CVector& phi : sol.phases) append_complex_block(a, phi.data(), phi.size());
  return a;
}

DecodedAction decode_action(const std::vector<double>& raw, const SystemConfig& cfg,
                            const CMatrix* prev_f) {
  if (raw.size() != action_dim(cfg))
    throw std::invalid_argument("decode_action: raw length differs from the action width");

  DecodedAction out;
  const std::size_t mk = cfg.M * cfg.K;
  CMatrix f(cfg.M, cfg.K);
  for (std::size_t i = 0; i < mk; ++i) {
    f.data()[i] = cplx(raw[i], raw[mk + i]);
  }
  std::size_t off = 2 * mk;
  std::vector<CVector> phases;
  for (std::size_t i = 0; i < cfg.I; ++i) {
    const std::size_t n = cfg.N[i];
    CVector phi(n);
    for (std::size_t j = 0; j < n; ++j) phi[j] = cplx(raw[off + j], raw[off + n + j]);
    off += 2 * n;
    phases.push_back(std::move(phi));
  }

  if (precoder_power(f) <= 0.0) {
    if (prev_f == nullptr)
      throw std::invalid_argument("decode_action: all-zero precoder slice");
    f = *prev_f;
    out.zero_f_fallback = true;
  }
  out.sol.F = normalize_power(f, cfg.P_t);
  out.sol.phases = project_phases(phases);
  return out;
}

double reward(const BeamformingSolution& sol, const ChannelSet& ch, double noise_power,
              double penalty_coeff, const BeamformingSolution& prev, double p_t) {
  double r = sum_rate(sol, ch, noise_power);
  if (penalty_coeff != 0.0) {
    double pen = 0.0;
    for (std::size_t i = 0; i < sol.F.rows(); ++i)
      for (std::size_t j = 0; j < sol.F.cols(); ++j)
        pen += std::norm(sol.F(i, j) - prev.F(i, j));
    pen /= p_t;
    for (std::size_t i = 0; i < sol.phases.size(); ++i) {
      double d = 0.0;
      for (std::size_t n = 0; n < sol.phases[i].size(); ++n)
        d += std::norm(sol.phases[i][n] - prev.phases[i][n]);
      pen += d / static_cast<double>(sol.phases[i].size());
    }
    r -= penalty_coeff * pen;
  }
  return r;
}

double critic_target(double r, double q_next, double beta) { return r + beta * q_next; }

double average_reward(const std::vector<double>& rewards, std::size_t l) {
  if (l < 1 || l > rewards.size())
    throw std::invalid_argument("average_reward: L out of range");
  double s = 0.0;
  for (std::size_t i = 0; i < l; ++i) s += rewards[i];
  return s / static_cast<double>(l);
}

void ReplayBuffer::push(Experience e) {
  if (storage_.size() < capacity_) {
    storage_.push_back(std::move(e));
  } else {
    storage_[head_] = std::move(e);
    head_ = (head_ + 1) % capacity_;
  }
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t w) {
  const std::size_t n = storage_.size();
  if (w > n) throw std::invalid_argument("ReplayBuffer: not enough experiences to sample");
  // Floyd's algorithm: w distinct uniform indices
  std::vector<std::size_t> picked;
  picked.reserve(w);
  for (std::size_t i = n - w; i < n; ++i) {
    const std::size_t j = rng_.below(i + 1);
    if (std::find(picked.begin(), picked.end(), j) != picked.end())
      picked.push_back(i);
    else
      picked.push_back(j);
  }
  return picked;
}

void Whitener::init(std::size_t width, double mom) {
  mean_acc.assign(width, 0.0);
  var_acc.assign(width, 0.0);
  momentum = mom;
  count = 0;
}

void Whitener::observe(const std::vector<double>& x) {
  ++count;
  const double bc = 1.0 - std::pow(momentum, static_cast<double>(count ? count - 1 : 0));
  for (std::size_t i = 0; i < mean_acc.size(); ++i) {
    const double mean_hat = (count > 1) ? mean_acc[i] / bc : 0.0;
    const double d = x[i] - mean_hat;
    mean_acc[i] = momentum * mean_acc[i] + (1.0 - momentum) * x[i];
    var_acc[i] = momentum * var_acc[i] + (1.0 - momentum) * d * d;
  }
}

std::vector<double> Whitener::apply(const std::vector<double>& x) const {
  std::vector<double> y(x.size());
  if (count == 0) {
    y = x;
    return y;
  }
  const double bc = 1.0 - std::pow(momentum, static_cast<double>(count));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double mean_hat = mean_acc[i] / bc;
    const double var_hat = var_acc[i] / bc;
    y[i] = (x[i] - mean_hat) / std::sqrt(var_hat + 1e-12);
  }
  return y;
}

Agent make_agent(const SystemConfig& cfg, const Hyper& hp, const RngStream& seed_stream) {
  cfg.validate();
  hp.validate();
  const std::size_t ds = state_dim(cfg, hp.include_direct_in_state);
  const std::size_t da = action_dim(cfg);

  RngStream actor_rng = seed_stream.substream("actor-init");
  RngStream critic_rng = seed_stream.substream("critic-init");
  // actor: relu hiddens and a tanh head that the action range scales;
  // critic: tanh hiddens so negative state/action values propagate, linear head
  neural::DenseNet actor =
      neural::make_mlp(ds, hp.hidden1, hp.hidden2, da, neural::Act::relu, neural::Act::tanh,
                       actor_rng);
  neural::DenseNet critic =
      neural::make_mlp(ds + da, hp.hidden1, hp.hidden2, 1, neural::Act::tanh,
                       neural::Act::linear, critic_rng);

  Agent ag{cfg,
           hp,
           actor,
           critic,
           actor,   // targets start as exact copies
           critic,
           neural::make_adam(actor, hp.mu_a, hp.lambda_a),
           neural::make_adam(critic, hp.mu_c, hp.lambda_c),
           Whitener{},
           ReplayBuffer(hp.buffer_size, seed_stream.substream("buffer")),
           0,
           Metrics{}};
  ag.whiten.init(ds, hp.whiten_momentum);
  return ag;
}

BeamformingSolution make_initial_solution(const SystemConfig& cfg, const ChannelSet& ch,
                                          InitMethod method, const Hyper& hp,
                                          RngStream& rng) {
  if (method == InitMethod::random) {
    std::vector<double> raw(action_dim(cfg));
    for (double& v : raw) v = rng.normal();
    return decode_action(raw, cfg, nullptr).sol;
  }

  std::vector<CVector> phases;
  for (std::size_t n : cfg.N) {
    CVector phi(n);
    for (std::size_t j = 0; j < n; ++j)
      phi[j] = hp.init_random_phases ? std::polar(1.0, rng.uniform(0.0, 2.0 * 3.14159265358979))
                                     : cplx(1.0, 0.0);
    phases.push_back(std::move(phi));
  }

  BeamformingSolution sol;
  sol.phases = phases;
  if (method == InitMethod::method1)
    sol.F = init_method1_zf(ch, phases, cfg.P_t);
  else
    sol.F = init_method2_maxmin(ch, phases, cfg.P_t, cfg.noise_power).F;
  return sol;
}

namespace {

Mat row_mat(const std::vector<double>& v) {
  Mat m(1, v.size());
  m.a = v;
  return m;
}

struct MinibatchTensors {
  Mat s, s2, a;
  std::vector<double> r;
  std::vector<bool> term;
};

MinibatchTensors gather_minibatch(const Agent& ag, const std::vector<std::size_t>& idx) {
  const std::size_t w = idx.size();
  const std::size_t ds = state_dim(ag.cfg, ag.hp.include_direct_in_state);
  const std::size_t da = action_dim(ag.cfg);
  MinibatchTensors mb{Mat(w, ds), Mat(w, ds), Mat(w, da), std::vector<double>(w),
                      std::vector<bool>(w)};
  for (std::size_t i = 0; i < w; ++i) {
    const Experience& e = ag.buffer.at(idx[i]);
    const std::vector<double> ws = ag.whiten.apply(e.state);
    const std::vector<double> ws2 = ag.whiten.apply(e.next_state);
    for (std::size_t j = 0; j < ds; ++j) {
      mb.s(i, j) = ws[j];
      mb.s2(i, j) = ws2[j];
    }
    for (std::size_t j = 0; j < da; ++j) mb.a(i, j) = e.action[j];
    mb.r[i] = e.reward;
    mb.term[i] = e.terminal;
  }
  return mb;
}

Mat concat_sa(const Mat& states, const Mat& actions) {
  Mat x(states.rows, states.cols + actions.cols);
  for (std::size_t i = 0; i < states.rows; ++i) {
    for (std::size_t j = 0; j < states.cols; ++j) x(i, j) = states(i, j);
    for (std::size_t j = 0; j < actions.cols; ++j) x(i, states.cols + j) = actions(i, j);
  }
  return x;
}

std::vector<double> critic_targets(Agent& ag, const MinibatchTensors& mb) {
  ag.actor_target.train_mode = false;
  Mat a2 = neural::forward(ag.actor_target, mb.s2);
  for (double& v : a2.a) v *= ag.hp.action_range;
  ag.critic_target_net.train_mode = false;
  const Mat q2 = neural::forward(ag.critic_target_net, concat_sa(mb.s2, a2));
  std::vector<double> y(mb.r.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = critic_target(mb.r[i], mb.term[i] ? 0.0 : q2(i, 0), ag.hp.beta);
  return y;
}

}  // namespace

double critic_loss(const Agent& ag, const std::vector<std::size_t>& idx) {
  const MinibatchTensors mb = gather_minibatch(ag, idx);
  const std::vector<double> y = [&] {
    neural::DenseNet at = ag.actor_target, ct = ag.critic_target_net;
    at.train_mode = false;
    ct.train_mode = false;
    Mat a2 = neural::forward(at, mb.s2);
    for (double& v : a2.a) v *= ag.hp.action_range;
    const Mat q2 = neural::forward(ct, concat_sa(mb.s2, a2));
    std::vector<double> out(mb.r.size());
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = critic_target(mb.r[i], mb.term[i] ? 0.0 : q2(i, 0), ag.hp.beta);
    return out;
  }();
  neural::DenseNet c = ag.critic;
  c.train_mode = true;
  const Mat q = neural::forward(c, concat_sa(mb.s, mb.a));
  double loss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) loss += (q(i, 0) - y[i]) * (q(i, 0) - y[i]);
  return loss / static_cast<double>(y.size());
}

// Minibatch update: one adaptive-moment step on the critic's squared-error
// loss, one ascent step on the actor through the target critic's action
// gradient, then the periodic target blends. Non-finite gradients abort
// the step, halve the learning rate and are counted; training continues.
void learn_step(Agent& ag) {
  const Hyper& hp = ag.hp;
  const std::size_t w = hp.minibatch;
  const std::size_t ds = state_dim(ag.cfg, hp.include_direct_in_state);
  const std::size_t da = action_dim(ag.cfg);

  const std::vector<std::size_t> idx = ag.buffer.sample_indices(w);
  const MinibatchTensors mb = gather_minibatch(ag, idx);
  const std::vector<double> y = critic_targets(ag, mb);

  // critic step on the squared-error loss
  ag.critic.train_mode = true;
  neural::ForwardCache ccache;
  const Mat q = neural::forward_cached(ag.critic, concat_sa(mb.s, mb.a), ccache);
  Mat dq(w, 1);
  for (std::size_t i = 0; i < w; ++i)
    dq(i, 0) = 2.0 * (q(i, 0) - y[i]) / static_cast<double>(w);
  const neural::Gradients cgrads = neural::backward(ag.critic, ccache, dq);
  if (!cgrads.is_finite()) {
    ag.opt_critic.lr *= 0.5;
    ++ag.metrics.overflow_events;
  } else {
    neural::adam_step(ag.critic, cgrads, ag.opt_critic);
    if (!ag.critic.is_finite()) {
      // recover from the lagged target copy rather than carrying NaNs
      ag.critic = ag.critic_target_net;
      ag.opt_critic.lr *= 0.5;
      ++ag.metrics.overflow_events;
    }
  }

  // actor step: ascend the target critic's value at (s, pi(s))
  ag.actor.train_mode = true;
  neural::ForwardCache acache;
  Mat api = neural::forward_cached(ag.actor, mb.s, acache);
  for (double& v : api.a) v *= hp.action_range;
  ag.critic_target_net.train_mode = false;
  neural::ForwardCache tcache;
  neural::forward_cached(ag.critic_target_net, concat_sa(mb.s, api), tcache);
  Mat up(w, 1);
  for (std::size_t i = 0; i < w; ++i) up(i, 0) = -1.0 / static_cast<double>(w);
  const neural::Gradients tg = neural::backward(ag.critic_target_net, tcache, up);
  Mat dact(w, da);
  for (std::size_t i = 0; i < w; ++i)
    for (std::size_t j = 0; j < da; ++j) dact(i, j) = tg.dinput(i, ds + j) * hp.action_range;
  const neural::Gradients agrads = neural::backward(ag.actor, acache, dact);
  if (!agrads.is_finite()) {
    ag.opt_actor.lr *= 0.5;
    ++ag.metrics.overflow_events;
  } else {
    neural::adam_step(ag.actor, agrads, ag.opt_actor);
    if (!ag.actor.is_finite()) {
      ag.actor = ag.actor_target;
      ag.opt_actor.lr *= 0.5;
      ++ag.metrics.overflow_events;
    }
  }

  ++ag.update_count;
  ++ag.metrics.updates;
  if (ag.update_count % hp.sync_interval == 0) {
    neural::soft_update(ag.critic_target_net, ag.critic, hp.tau_c);
    neural::soft_update(ag.actor_target, ag.actor, hp.tau_a);
  }
}

StepResult train_step(Agent& ag, EnvState& env, double sigma, bool terminal,
                      RngStream& noise_rng) {
  const Hyper& hp = ag.hp;
  const std::size_t da = action_dim(ag.cfg);

  // act: eval-mode actor on the whitened state, plus exploration noise
  ag.actor.train_mode = false;
  const Mat out = neural::forward(ag.actor, row_mat(ag.whiten.apply(env.state)));
  std::vector<double> raw(da);
  for (std::size_t j = 0; j < da; ++j)
    raw[j] = out(0, j) * hp.action_range + (sigma > 0.0 ? sigma * noise_rng.normal() : 0.0);

  DecodedAction dec = decode_action(raw, ag.cfg, &env.current.F);
  if (dec.zero_f_fallback) ++ag.metrics.zero_f_fallbacks;
#ifndef NDEBUG
  assert(solution_feasible(dec.sol, ag.cfg.P_t));
#endif

  const double rate = sum_rate(dec.sol, env.ch, ag.cfg.noise_power);
  double r = rate;
  if (hp.penalty_coeff != 0.0)
    r = reward(dec.sol, env.ch, ag.cfg.noise_power, hp.penalty_coeff, env.current, ag.cfg.P_t);

  std::vector<double> s2 = encode_state(env.ch, dec.sol, hp.include_direct_in_state);
  ag.whiten.observe(s2);
  ag.buffer.push(Experience{env.state, std::move(raw), r, s2, terminal});

  StepResult res;
  res.reward_value = r;
  res.sum_rate_value = rate;
  if (ag.buffer.size() >= hp.minibatch) {
    learn_step(ag);
    res.updated = true;
  }

  env.current = std::move(dec.sol);
  env.state = std::move(s2);
  ++ag.metrics.steps;
  return res;
}

TrainResult run_training(const SystemConfig& cfg, const Topology& topo,
                         const ThzLinkParams& link, const RicianFactors& rf,
                         const Hyper& hp, InitMethod init, std::uint64_t seed) {
  cfg.validate();
  hp.validate();
  const RngStream root(seed);
  Agent ag = make_agent(cfg, hp, root.substream("agent"));

  TrainResult result{BeamformingSolution{}, -1.0, 0, 0, {}, {}, std::move(ag)};
  Agent& agent = result.agent;

  double running_sum = 0.0;
  std::size_t n_rewards = 0;
  double sigma = hp.exploration_sigma0;

  for (std::size_t ep = 0; ep < hp.episodes; ++ep) {
    const RngStream chan_rng = root.substream("chan", ep);
    ChannelSet ch = realize_channels(cfg, topo, link, rf, chan_rng);
    RngStream init_rng = root.substream("init-sol", ep);
    BeamformingSolution sol0 = make_initial_solution(cfg, ch, init, hp, init_rng);

    EnvState env;
    env.state = encode_state(ch, sol0, hp.include_direct_in_state);
    env.current = sol0;
    env.ch = std::move(ch);
    agent.whiten.observe(env.state);

    // step 0: the applied action is the initializer's solution itself
    const double rate0 = sum_rate(sol0, env.ch, cfg.noise_power);
    const double r0 = rate0;  // zero displacement, so no penalty either way
    agent.buffer.push(Experience{env.state, encode_action(sol0), r0, env.state,
                                 hp.steps_per_episode == 1});
    running_sum += r0;
    ++n_rewards;
    result.trace.push_back(TraceRow{ep, 0, r0, running_sum / static_cast<double>(n_rewards)});
    if (rate0 > result.best_sum_rate) {
      result.best_sum_rate = rate0;
      result.best = sol0;
      result.best_episode = ep;
      result.best_step = 0;
    }

    RngStream noise_rng = root.substream("explore", ep);
    for (std::size_t t = 1; t < hp.steps_per_episode; ++t) {
      const bool terminal = (t + 1 == hp.steps_per_episode);
      const StepResult sr = train_step(agent, env, sigma, terminal, noise_rng);
      running_sum += sr.reward_value;
      ++n_rewards;
      result.trace.push_back(
          TraceRow{ep, t, sr.reward_value, running_sum / static_cast<double>(n_rewards)});
      if (sr.sum_rate_value > result.best_sum_rate) {
        result.best_sum_rate = sr.sum_rate_value;
        result.best = env.current;
        result.best_episode = ep;
        result.best_step = t;
      }
    }

    neural::decay_lr(agent.opt_actor);
    neural::decay_lr(agent.opt_critic);
    sigma *= hp.exploration_decay;
  }

  result.metrics = agent.metrics;
  return result;
}

double evaluate_policy(const Agent& ag, const ChannelSet& ch, InitMethod init,
                       std::size_t eval_steps, RngStream& init_rng) {
  BeamformingSolution sol = make_initial_solution(ag.cfg, ch, init, ag.hp, init_rng);
  double best = sum_rate(sol, ch, ag.cfg.noise_power);

  neural::DenseNet actor = ag.actor;  // the agent itself stays untouched
  actor.train_mode = false;
  const std::size_t da = action_dim(ag.cfg);
  std::vector<double> state = encode_state(ch, sol, ag.hp.include_direct_in_state);

  for (std::size_t t = 0; t < eval_steps; ++t) {
    const Mat out = neural::forward(actor, row_mat(ag.whiten.apply(state)));
    std::vector<double> raw(da);
    for (std::size_t j = 0; j < da; ++j) raw[j] = out(0, j) * ag.hp.action_range;
    DecodedAction dec = decode_action(raw, ag.cfg, &sol.F);
    const double rate = sum_rate(dec.sol, ch, ag.cfg.noise_power);
    best = std::max(best, rate);
    sol = std::move(dec.sol);
    state = encode_state(ch, sol, ag.hp.include_direct_in_state);
  }
  return best;
}

}  // namespace ris::ddpg
