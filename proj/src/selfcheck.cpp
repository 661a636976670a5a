#include "ris/selfcheck.hpp"

#include <cmath>
#include <sstream>

#include "ris/bench.hpp"
#include "ris/channel.hpp"
#include "ris/ddpg.hpp"
#include "ris/initsolvers.hpp"
#include "ris/system.hpp"

namespace ris::selfcheck {

using neural::Act;
using neural::DenseNet;
using neural::ForwardCache;
using neural::Gradients;
using neural::Mat;

namespace {

double weighted_sum(const Mat& out, const Mat& upstream) {
  double s = 0.0;
  for (std::size_t i = 0; i < out.a.size(); ++i) s += out.a[i] * upstream.a[i];
  return s;
}

double loss_eval(const DenseNet& net, const Mat& batch, const Mat& upstream) {
  DenseNet copy = net;  // running statistics of the original must not move
  return weighted_sum(neural::forward(copy, batch), upstream);
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-3});
}

// central difference over one scalar parameter inside a net copy
double fd_param(const DenseNet& net, const Mat& batch, const Mat& upstream,
                std::function<double*(DenseNet&)> locate, double h) {
  DenseNet plus = net;
  *locate(plus) += h;
  DenseNet minus = net;
  *locate(minus) -= h;
  return (loss_eval(plus, batch, upstream) - loss_eval(minus, batch, upstream)) / (2.0 * h);
}

}  // namespace

double max_gradient_error(const DenseNet& net, const Mat& batch, const Mat& upstream,
                          double fd_step, bool corrupt_one_gradient) {
  DenseNet work = net;
  ForwardCache cache;
  neural::forward_cached(work, batch, cache);
  Gradients grads = neural::backward(work, cache, upstream);
  if (corrupt_one_gradient && !grads.layers.empty() && !grads.layers[0].dW.a.empty())
    grads.layers[0].dW.a[0] += 1.0;

  double worst = 0.0;
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    const auto& layer = net.layers[li];
    for (std::size_t i = 0; i < layer.W.a.size(); ++i) {
      const double fd = fd_param(
          net, batch, upstream,
          [li, i](DenseNet& n) { return &n.layers[li].W.a[i]; }, fd_step);
      worst = std::max(worst, rel_err(grads.layers[li].dW.a[i], fd));
    }
    for (std::size_t i = 0; i < layer.b.size(); ++i) {
      const double fd = fd_param(
          net, batch, upstream,
          [li, i](DenseNet& n) { return &n.layers[li].b[i]; }, fd_step);
      worst = std::max(worst, rel_err(grads.layers[li].db[i], fd));
    }
    if (layer.bn) {
      for (std::size_t i = 0; i < layer.bn->gamma.size(); ++i) {
        const double fd = fd_param(
            net, batch, upstream,
            [li, i](DenseNet& n) { return &n.layers[li].bn->gamma[i]; }, fd_step);
        worst = std::max(worst, rel_err(grads.layers[li].dgamma[i], fd));
      }
      for (std::size_t i = 0; i < layer.bn->beta.size(); ++i) {
        const double fd = fd_param(
            net, batch, upstream,
            [li, i](DenseNet& n) { return &n.layers[li].bn->beta[i]; }, fd_step);
        worst = std::max(worst, rel_err(grads.layers[li].dbeta[i], fd));
      }
    }
  }

  // gradient with respect to the input
  for (std::size_t i = 0; i < batch.a.size(); ++i) {
    Mat plus = batch;
    plus.a[i] += fd_step;
    Mat minus = batch;
    minus.a[i] -= fd_step;
    const double fd =
        (loss_eval(net, plus, upstream) - loss_eval(net, minus, upstream)) / (2.0 * fd_step);
    worst = std::max(worst, rel_err(grads.dinput.a[i], fd));
  }
  return worst;
}

double max_actor_chain_error(const DenseNet& actor, DenseNet& critic, const Mat& states,
                             double fd_step) {
  const std::size_t n = states.rows;
  const std::size_t ds = states.cols;

  auto critic_input = [&](const Mat& actions) {
    Mat x(n, ds + actions.cols);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < ds; ++j) x(i, j) = states(i, j);
      for (std::size_t j = 0; j < actions.cols; ++j) x(i, ds + j) = actions(i, j);
    }
    return x;
  };

  auto objective = [&](const DenseNet& a) {
    DenseNet acopy = a;
    acopy.train_mode = true;
    const Mat actions = neural::forward(acopy, states);
    DenseNet ccopy = critic;
    ccopy.train_mode = false;
    const Mat q = neural::forward(ccopy, critic_input(actions));
    double s = 0.0;
    for (double v : q.a) s += v;
    return s / static_cast<double>(n);
  };

  // analytic chain: critic input-gradient at (s, pi(s)), action slice pushed
  // back through the actor
  DenseNet awork = actor;
  awork.train_mode = true;
  ForwardCache acache;
  const Mat actions = neural::forward_cached(awork, states, acache);
  DenseNet cwork = critic;
  cwork.train_mode = false;
  ForwardCache ccache;
  neural::forward_cached(cwork, critic_input(actions), ccache);
  Mat dq(n, 1);
  for (std::size_t i = 0; i < n; ++i) dq(i, 0) = 1.0 / static_cast<double>(n);
  const Gradients cgrads = neural::backward(cwork, ccache, dq);
  Mat dact(n, actions.cols);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < actions.cols; ++j) dact(i, j) = cgrads.dinput(i, ds + j);
  const Gradients agrads = neural::backward(awork, acache, dact);

  double worst = 0.0;
  for (std::size_t li = 0; li < actor.layers.size(); ++li) {
    for (std::size_t i = 0; i < actor.layers[li].W.a.size(); ++i) {
      DenseNet plus = actor;
      plus.layers[li].W.a[i] += fd_step;
      DenseNet minus = actor;
      minus.layers[li].W.a[i] -= fd_step;
      const double fd = (objective(plus) - objective(minus)) / (2.0 * fd_step);
      worst = std::max(worst, rel_err(agrads.layers[li].dW.a[i], fd));
    }
    for (std::size_t i = 0; i < actor.layers[li].b.size(); ++i) {
      DenseNet plus = actor;
      plus.layers[li].b[i] += fd_step;
      DenseNet minus = actor;
      minus.layers[li].b[i] -= fd_step;
      const double fd = (objective(plus) - objective(minus)) / (2.0 * fd_step);
      worst = std::max(worst, rel_err(agrads.layers[li].db[i], fd));
    }
  }
  return worst;
}

GradCheckCase make_gradcheck_case(RngStream& rng, bool with_bn, Act hidden) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    const std::size_t in = 2 + rng.below(4);
    const std::size_t h1 = 2 + rng.below(15);
    const std::size_t h2 = 2 + rng.below(15);
    const std::size_t out = 1 + rng.below(3);
    RngStream init = rng.substream("init", attempt);
    neural::DenseNet net = neural::make_mlp(in, h1, h2, out, hidden, Act::linear, init);
    if (!with_bn) net.layers[0].bn.reset();
    net.train_mode = true;
    // nudge batch-norm parameters off their init so their gradients matter
    if (net.layers[0].bn)
      for (std::size_t i = 0; i < net.layers[0].bn->gamma.size(); ++i) {
        net.layers[0].bn->gamma[i] = 1.0 + 0.3 * rng.normal();
        net.layers[0].bn->beta[i] = 0.2 * rng.normal();
      }

    Mat batch(4, in);
    for (double& v : batch.a) v = rng.normal();
    Mat upstream(4, out);
    for (double& v : upstream.a) v = rng.normal();

    // relu finite differences need pre-activations away from the kink
    if (hidden == Act::relu) {
      DenseNet probe = net;
      ForwardCache cache;
      neural::forward_cached(probe, batch, cache);
      double closest = 1e300;
      for (std::size_t li = 0; li + 1 < net.layers.size(); ++li)
        for (double z : cache.layers[li].pre_act.a) closest = std::min(closest, std::abs(z));
      if (closest < 1e-3) continue;
    }
    return GradCheckCase{std::move(net), std::move(batch), std::move(upstream)};
  }
  throw std::runtime_error("make_gradcheck_case: could not build a kink-safe case");
}

std::vector<CheckResult> run_all_checks() {
  std::vector<CheckResult> results;

  {  // gradient-suite
    CheckResult r;
    r.name = "gradient-suite";
    RngStream rng(20240601);
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      auto c = make_gradcheck_case(rng, t % 2 == 0, t % 3 == 0 ? Act::tanh : Act::relu);
      worst = std::max(worst, max_gradient_error(c.net, c.batch, c.upstream));
    }
    std::ostringstream os;
    os << "max relative gradient error " << worst << " (tolerance 1e-4)";
    r.detail = os.str();
    r.pass = worst <= 1e-4;
    results.push_back(r);
  }

  {  // fixed-point-equalization
    CheckResult r;
    r.name = "fixed-point-equalization";
    double worst_spread = 0.0;
    bool all_converged = true;
    for (int t = 0; t < 20; ++t) {
      RngStream rng(7100 + t);
      ChannelSet ch;
      const std::size_t k = 2 + rng.below(2);
      for (std::size_t u = 0; u < k; ++u) {
        CVector w(4);
        for (std::size_t m = 0; m < 4; ++m) w[m] = cplx(rng.normal(), rng.normal());
        ch.direct.push_back(w);
      }
      MaxMinResult res = init_method2_maxmin(ch, {}, 2.0, 0.1, 1e-6, 500);
      all_converged = all_converged && res.converged;
      BeamformingSolution sol;
      sol.F = res.F;
      double lo = 1e300, hi = 0.0;
      for (std::size_t u = 0; u < k; ++u) {
        const double s = sinr(sol, ch, u, 0.1);
        lo = std::min(lo, s);
        hi = std::max(hi, s);
      }
      worst_spread = std::max(worst_spread, (hi - lo) / lo);
    }
    std::ostringstream os;
    os << "worst SINR spread " << worst_spread << " (tolerance 1e-5); converged="
       << (all_converged ? "yes" : "no");
    r.detail = os.str();
    r.pass = all_converged && worst_spread <= 1e-5;
    results.push_back(r);
  }

  {  // oracle-dominance
    CheckResult r;
    r.name = "oracle-dominance";
    bool ok = true;
    double worst_gap = 0.0;
    for (int t = 0; t < 10; ++t) {
      RngStream rng(8300 + t);
      auto inst = bench::random_tiny_instance(rng);
      const auto oracle = bench::brute_force_oracle(inst.cfg, inst.ch, 64);
      const auto alt = bench::alternating_single_hop(inst.cfg, inst.ch, 20);
      const double gap = (alt.rate - oracle.rate) / std::max(oracle.rate, 1e-12);
      worst_gap = std::max(worst_gap, gap);
      if (alt.rate > oracle.rate * 1.001) ok = false;
    }
    std::ostringstream os;
    os << "worst (alternating - oracle)/oracle " << worst_gap << " (tolerance 1e-3)";
    r.detail = os.str();
    r.pass = ok;
    results.push_back(r);
  }

  {  // dimension-conformance
    CheckResult r;
    r.name = "dimension-conformance";
    bool ok = true;
    RngStream rng(9500);
    for (int t = 0; t < 20 && ok; ++t) {
      SystemConfig cfg;
      cfg.K = 1 + rng.below(3);
      cfg.M = cfg.K + rng.below(3);
      cfg.I = rng.below(3);
      cfg.N.clear();
      for (std::size_t i = 0; i < cfg.I; ++i) cfg.N.push_back(1 + rng.below(6));
      std::size_t expect_s = 2 * cfg.M * cfg.K;
      for (std::size_t n : cfg.N) expect_s += 2 * n;
      if (cfg.I > 0) {
        expect_s += 2 * cfg.M * cfg.N[0];
        for (std::size_t i = 0; i + 1 < cfg.I; ++i) expect_s += 2 * cfg.N[i] * cfg.N[i + 1];
        expect_s += 2 * cfg.K * cfg.N[cfg.I - 1];
      }
      std::size_t expect_a = 2 * cfg.M * cfg.K;
      for (std::size_t n : cfg.N) expect_a += 2 * n;
      ok = ok && ddpg::state_dim(cfg, false) == expect_s && ddpg::action_dim(cfg) == expect_a;
    }
    r.detail = ok ? "state/action lengths match the dimension formulas"
                  : "dimension formula mismatch";
    r.pass = ok;
    results.push_back(r);
  }

  {  // power-and-modulus-feasibility
    CheckResult r;
    r.name = "power-and-modulus-feasibility";
    RngStream rng(9900);
    SystemConfig cfg;
    cfg.M = 3;
    cfg.K = 2;
    cfg.I = 1;
    cfg.N = {4};
    bool ok = true;
    for (int t = 0; t < 50; ++t) {
      std::vector<double> raw(ddpg::action_dim(cfg));
      for (double& v : raw) v = rng.normal();
      const auto dec = ddpg::decode_action(raw, cfg, nullptr);
      ok = ok && solution_feasible(dec.sol, cfg.P_t);
    }
    r.detail = ok ? "decoded actions always satisfy the feasibility projections"
                  : "infeasible decoded action";
    r.pass = ok;
    results.push_back(r);
  }

  return results;
}

}  // namespace ris::selfcheck
