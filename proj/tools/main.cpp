// Experiment harness for the multi-hop RIS THz beamforming toolkit.
#include <iostream>

#include <CLI11.hpp>

#include "ris/commands.hpp"
#include "ris/scenario.hpp"

namespace {

ris::cli::Scenario load_with_overrides(const std::string& path, bool has_seed,
                                       std::uint64_t seed, const std::string& out,
                                       bool full_scale) {
  ris::cli::Scenario s = ris::cli::load_scenario(path);
  if (has_seed) s.seed = seed;
  if (!out.empty()) s.output_dir = out;
  if (full_scale) ris::cli::apply_full_scale(s.hyper);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-hop RIS-assisted THz downlink: DRL hybrid beamforming experiments"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out;
  std::uint64_t seed = 0;
  bool full_scale = false;
  std::size_t workers = 1;

  auto add_common = [&](CLI::App* cmd, bool scenario_required = true) {
    auto* opt = cmd->add_option("--scenario", scenario_path, "scenario JSON path");
    if (scenario_required) opt->required();
    cmd->add_option("--seed", seed, "override the scenario seed");
    cmd->add_option("--out", out, "output directory or file");
    cmd->add_flag("--full-scale", full_scale,
                  "use the published episode/step counts instead of desk scale");
  };

  auto* train = app.add_subcommand("train", "train the DRL agent, write trace and artifacts");
  add_common(train);

  auto* sweep = app.add_subcommand("sweep-distance",
                                   "mean throughput per scheme over a distance sweep");
  add_common(sweep);
  std::vector<double> distances{1.0, 5.0, 10.0, 15.0, 20.0};
  std::vector<std::string> schemes = ris::cli::kSweepSchemes;
  std::size_t n_mc = 50;
  std::size_t eval_steps = 30;
  sweep->add_option("--distances", distances, "BS-to-user distances in meters, ascending");
  sweep->add_option("--schemes", schemes, "subset of no_ris_zf single_hop_alt single_hop_drl multi_hop_drl");
  sweep->add_option("--mc", n_mc, "Monte-Carlo channel draws per point");
  sweep->add_option("--eval-steps", eval_steps, "greedy policy steps per evaluation draw");
  sweep->add_option("--workers", workers, "worker threads over sweep cells");

  auto* cdf = app.add_subcommand("reward-cdf",
                                 "empirical CDF of per-episode average rewards");
  std::vector<std::string> cdf_scenarios;
  cdf->add_option("--scenario", cdf_scenarios, "completed scenario JSON paths")->required();
  cdf->add_option("--out", out, "output CSV path");

  auto* lr = app.add_subcommand("lr-study", "average-reward curves per learning rate");
  add_common(lr);
  std::vector<double> rates{0.01, 0.001, 0.0001, 0.00001};
  lr->add_option("--rates", rates, "learning rates to compare");

  auto* check = app.add_subcommand("check", "run the invariant self-checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      const auto s = load_with_overrides(scenario_path, train->count("--seed") > 0, seed,
                                         out, full_scale);
      const auto art = ris::cli::cmd_train(s);
      std::cout << "best_sum_rate " << art.best_sum_rate << "\n"
                << "trace " << art.trace_csv << "\n"
                << "summary " << art.summary_json << "\n"
                << "best " << art.best_json << "\n"
                << "checkpoint " << art.checkpoint << "\n";
    } else if (*sweep) {
      const auto s = load_with_overrides(scenario_path, sweep->count("--seed") > 0, seed,
                                         "", full_scale);
      ris::cli::SweepOptions opt;
      opt.distances = distances;
      opt.schemes = schemes;
      opt.n_mc = n_mc;
      opt.eval_steps = eval_steps;
      opt.workers = workers;
      const std::string csv = out.empty() ? "sweep_distance.csv" : out;
      ris::cli::cmd_sweep_distance(s, opt, csv);
      std::cout << "wrote " << csv << "\n";
    } else if (*cdf) {
      const std::string csv = out.empty() ? "reward_cdf.csv" : out;
      ris::cli::cmd_reward_cdf(cdf_scenarios, csv);
      std::cout << "wrote " << csv << "\n";
    } else if (*lr) {
      const auto s = load_with_overrides(scenario_path, lr->count("--seed") > 0, seed, "",
                                         full_scale);
      const std::string csv = out.empty() ? "lr_study.csv" : out;
      ris::cli::cmd_lr_study(s, rates, csv);
      std::cout << "wrote " << csv << "\n";
    } else if (*check) {
      return ris::cli::cmd_check(std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
