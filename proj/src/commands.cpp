#include "ris/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ris/bench.hpp"
#include "ris/selfcheck.hpp"

namespace ris::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& content) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os << content;
}

void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& body) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const std::size_t count = std::min(workers, n);
  pool.reserve(count);
  for (std::size_t w = 0; w < count; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  for (std::thread& t : pool) t.join();
}

json solution_to_json(const BeamformingSolution& sol) {
  json f = json::array();
  for (std::size_t i = 0; i < sol.F.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < sol.F.cols(); ++j)
      row.push_back({sol.F(i, j).real(), sol.F(i, j).imag()});
    f.push_back(row);
  }
  json phases = json::array();
  for (const CVector& phi : sol.phases) {
    json v = json::array();
    for (std::size_t n = 0; n < phi.size(); ++n)
      v.push_back({phi[n].real(), phi[n].imag()});
    phases.push_back(v);
  }
  return json{{"F", f}, {"phases", phases}};
}

void save_checkpoint(const ddpg::Agent& ag, const std::string& path) {
  std::ostringstream os;
  os << "risthz-checkpoint 1\n";
  os << "whitener " << ag.whiten.mean_acc.size() << ' ' << ag.whiten.momentum << ' '
     << ag.whiten.count << '\n';
  os.precision(17);
  for (double v : ag.whiten.mean_acc) os << v << ' ';
  os << '\n';
  for (double v : ag.whiten.var_acc) os << v << ' ';
  os << '\n';
  neural::save_net(ag.actor, os);
  neural::save_net(ag.critic, os);
  neural::save_net(ag.actor_target, os);
  neural::save_net(ag.critic_target_net, os);
  write_text(path, os.str());
}

}  // namespace

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string magic, tag;
  int version = 0;
  if (!(is >> magic >> version) || magic != "risthz-checkpoint" || version != 1)
    throw std::runtime_error("checkpoint: bad header");
  std::size_t width = 0;
  Checkpoint cp;
  if (!(is >> tag >> width >> cp.whiten.momentum >> cp.whiten.count) || tag != "whitener")
    throw std::runtime_error("checkpoint: bad whitener header");
  cp.whiten.mean_acc.resize(width);
  cp.whiten.var_acc.resize(width);
  for (double& v : cp.whiten.mean_acc)
    if (!(is >> v)) throw std::runtime_error("checkpoint: truncated whitener");
  for (double& v : cp.whiten.var_acc)
    if (!(is >> v)) throw std::runtime_error("checkpoint: truncated whitener");
  cp.actor = neural::load_net(is);
  cp.critic = neural::load_net(is);
  cp.actor_target = neural::load_net(is);
  cp.critic_target = neural::load_net(is);
  return cp;
}

TrainArtifacts cmd_train(const Scenario& s, const std::string& out_dir) {
  s.validate();
  const std::string out = out_dir.empty() ? s.output_dir : out_dir;
  fs::create_directories(out);

  const Topology topo = make_topology(s, s.system, std::nullopt);
  const auto t0 = std::chrono::steady_clock::now();
  ddpg::TrainResult res = ddpg::run_training(s.system, topo, s.link, s.rician, s.hyper,
                                             s.init_method, s.seed);
  const double wall_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  TrainArtifacts art;
  art.best_sum_rate = res.best_sum_rate;

  {
    std::ostringstream os;
    os << "episode,step,instant_reward,average_reward\n";
    for (const ddpg::TraceRow& row : res.trace)
      os << row.episode << ',' << row.step << ',' << fmt(row.instant_reward) << ','
         << fmt(row.average_reward) << '\n';
    art.trace_csv = out + "/reward_trace.csv";
    write_text(art.trace_csv, os.str());
  }

  {
    json best = solution_to_json(res.best);
    best["sum_rate"] = res.best_sum_rate;
    best["episode"] = res.best_episode;
    best["step"] = res.best_step;
    art.best_json = out + "/best_solution.json";
    write_text(art.best_json, best.dump(2) + "\n");
  }

  {
    json summary{{"best_sum_rate", res.best_sum_rate},
                 {"episodes", s.hyper.episodes},
                 {"steps_per_episode", s.hyper.steps_per_episode},
                 {"steps_total", res.trace.size()},
                 {"wall_time_s", wall_s},
                 {"feasibility_fallbacks", res.metrics.zero_f_fallbacks},
                 {"overflow_events", res.metrics.overflow_events},
                 {"updates", res.metrics.updates},
                 {"init_method", ddpg::init_method_to_string(s.init_method)},
                 {"seed", s.seed}};
    art.summary_json = out + "/summary.json";
    write_text(art.summary_json, summary.dump(2) + "\n");
  }

  art.checkpoint = out + "/checkpoint.net";
  save_checkpoint(res.agent, art.checkpoint);
  return art;
}

const std::vector<std::string> kSweepSchemes{"no_ris_zf", "single_hop_alt",
                                             "single_hop_drl", "multi_hop_drl"};

SystemConfig scheme_config(const Scenario& s, const std::string& scheme) {
  SystemConfig cfg = s.system;
  if (scheme == "no_ris_zf") {
    cfg.I = 0;
    cfg.N.clear();
    return cfg;
  }
  if (scheme == "single_hop_alt" || scheme == "single_hop_drl") {
    if (s.system.I < 1)
      throw std::invalid_argument("scheme " + scheme +
                                  " needs a scenario with at least one RIS (I >= 1)");
    cfg.I = 1;
    cfg.N = {s.system.N[0]};
    return cfg;
  }
  if (scheme == "multi_hop_drl") {
    if (s.system.I < 2)
      throw std::invalid_argument("scheme multi_hop_drl needs a scenario with I >= 2");
    return cfg;
  }
  throw std::invalid_argument("unknown scheme: " + scheme);
}

SweepPoint run_sweep_point(const Scenario& s, const std::string& scheme, double distance,
                           std::size_t n_mc, std::size_t eval_steps) {
  if (!(distance > 0.0)) throw std::invalid_argument("sweep distance must be > 0");
  if (n_mc == 0) throw std::invalid_argument("sweep needs at least one Monte-Carlo draw");

  const SystemConfig cfg = scheme_config(s, scheme);
  const Topology topo = make_topology(s, cfg, distance);
  const RngStream root(s.seed);

  SweepPoint point;
  point.scheme = scheme;
  point.distance_m = distance;
  point.rates.reserve(n_mc);

  const bool is_drl = (scheme == "single_hop_drl" || scheme == "multi_hop_drl");
  std::optional<ddpg::TrainResult> trained;
  if (is_drl) {
    const RngStream train_seed =
        root.substream("train-" + scheme, static_cast<std::uint64_t>(distance * 1000.0));
    trained = ddpg::run_training(cfg, topo, s.link, s.rician, s.hyper, s.init_method,
                                 train_seed.id());
  }

  for (std::size_t draw = 0; draw < n_mc; ++draw) {
    // channel substreams keyed by the draw only: schemes share randomness
    const ChannelSet ch =
        realize_channels(cfg, topo, s.link, s.rician, root.substream("mc", draw));
    double rate = 0.0;
    if (scheme == "no_ris_zf") {
      rate = bench::zf_no_ris(ch.direct, cfg.P_t, cfg.noise_power).rate;
    } else if (scheme == "single_hop_alt") {
      rate = bench::alternating_single_hop(cfg, ch, 8).rate;
    } else {
      RngStream init_rng = root.substream("eval-init", draw);
      rate = ddpg::evaluate_policy(trained->agent, ch, s.init_method, eval_steps, init_rng);
    }
    point.rates.push_back(rate);
  }

  double mean = 0.0;
  for (double r : point.rates) mean += r;
  mean /= static_cast<double>(point.rates.size());
  point.mean_throughput_bps = mean * cfg.bandwidth;
  return point;
}

std::vector<SweepPoint> cmd_sweep_distance(const Scenario& s, const SweepOptions& opt,
                                           const std::string& out_csv) {
  if (opt.distances.empty()) throw std::invalid_argument("sweep: no distances given");
  for (std::size_t i = 0; i < opt.distances.size(); ++i) {
    if (!(opt.distances[i] > 0.0))
      throw std::invalid_argument("sweep: distances must be positive");
    if (i > 0 && opt.distances[i] <= opt.distances[i - 1])
      throw std::invalid_argument("sweep: distances must be ascending");
  }
  if (opt.schemes.empty()) throw std::invalid_argument("sweep: no schemes given");
  for (const std::string& scheme : opt.schemes) scheme_config(s, scheme);  // early reject

  const std::size_t n = opt.schemes.size() * opt.distances.size();
  std::vector<SweepPoint> points(n);
  parallel_for(n, opt.workers, [&](std::size_t task) {
    const std::size_t si = task / opt.distances.size();
    const std::size_t di = task % opt.distances.size();
    points[task] =
        run_sweep_point(s, opt.schemes[si], opt.distances[di], opt.n_mc, opt.eval_steps);
  });

  std::ostringstream os;
  os << "scheme,distance_m,throughput_bps\n";
  for (const SweepPoint& p : points)
    os << p.scheme << ',' << fmt(p.distance_m) << ',' << fmt(p.mean_throughput_bps) << '\n';
  write_text(out_csv, os.str());
  return points;
}

void cmd_reward_cdf(const std::vector<std::string>& scenario_paths,
                    const std::string& out_csv) {
  if (scenario_paths.empty()) throw std::invalid_argument("reward-cdf: no scenarios given");

  std::ostringstream os;
  os << "label,reward,cdf\n";
  for (const std::string& path : scenario_paths) {
    const Scenario s = load_scenario(path);
    const std::string trace_path = s.output_dir + "/reward_trace.csv";
    std::ifstream is(trace_path);
    if (!is)
      throw std::invalid_argument("reward-cdf: no completed training trace at " + trace_path);

    std::map<std::size_t, std::pair<double, std::size_t>> per_episode;  // sum, count
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::size_t episode = 0, step = 0;
      double instant = 0.0, avg = 0.0;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream ls(line);
      if (!(ls >> episode >> step >> instant >> avg))
        throw std::invalid_argument("reward-cdf: malformed trace row in " + trace_path);
      auto& acc = per_episode[episode];
      acc.first += instant;
      acc.second += 1;
    }
    if (per_episode.empty())
      throw std::invalid_argument("reward-cdf: empty trace in " + trace_path);

    std::vector<double> episode_means;
    episode_means.reserve(per_episode.size());
    for (const auto& [ep, acc] : per_episode)
      episode_means.push_back(acc.first / static_cast<double>(acc.second));
    std::sort(episode_means.begin(), episode_means.end());

    const std::string label = fs::path(path).stem().string();
    for (std::size_t i = 0; i < episode_means.size(); ++i)
      os << label << ',' << fmt(episode_means[i]) << ','
         << fmt(static_cast<double>(i + 1) / static_cast<double>(episode_means.size()))
         << '\n';
  }
  write_text(out_csv, os.str());
}

void cmd_lr_study(const Scenario& s, const std::vector<double>& rates,
                  const std::string& out_csv) {
  if (rates.empty()) throw std::invalid_argument("lr-study: no rates given");
  for (double r : rates)
    if (!(r > 0.0)) throw std::invalid_argument("lr-study: rates must be positive");

  const Topology topo = make_topology(s, s.system, std::nullopt);
  std::ostringstream os;
  os << "learning_rate,step,average_reward\n";
  for (double rate : rates) {
    Scenario variant = s;
    variant.hyper.mu_c = rate;
    variant.hyper.mu_a = rate;
    const ddpg::TrainResult res = ddpg::run_training(
        variant.system, topo, variant.link, variant.rician, variant.hyper,
        variant.init_method, variant.seed);  // shared seed across rates
    for (std::size_t i = 0; i < res.trace.size(); ++i)
      os << fmt(rate) << ',' << i << ',' << fmt(res.trace[i].average_reward) << '\n';
  }
  write_text(out_csv, os.str());
}

int cmd_check(std::ostream& os) {
  const auto results = selfcheck::run_all_checks();
  os << "check,status,detail\n";
  bool all_pass = true;
  for (const auto& r : results) {
    os << r.name << ',' << (r.pass ? "PASS" : "FAIL") << ',' << r.detail << '\n';
    all_pass = all_pass && r.pass;
  }
  os << (all_pass ? "RESULT,PASS,all checks passed" : "RESULT,FAIL,see failing rows") << '\n';
  return all_pass ? 0 : 1;
}

}  // namespace ris::cli
