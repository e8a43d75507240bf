#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "ppolab/cli_commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"PPO / PPO-lambda policy-gradient lab"};
  app.require_subcommand(1);

  ppolab::TrainArgs train_args;
  std::string algo;
  auto* train = app.add_subcommand("train", "run a training job");
  train->add_option("--config", train_args.config_path, "config JSON path")->required();
  train->add_option("--algo", algo, "ppo or ppo-lambda");
  std::uint64_t seed = 0;
  bool seed_set = false;
  train->add_option("--seed", seed, "seed override")->each([&](const std::string&) {
    seed_set = true;
  });
  std::size_t iters = 0;
  bool iters_set = false;
  train->add_option("--iters", iters, "iteration count override")
      ->each([&](const std::string&) { iters_set = true; });
  train->add_option("--out", train_args.out_dir, "output directory")->required();

  ppolab::VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify", "run analytical verification sweeps");
  verify->add_option("--check", verify_args.check,
                     "stationary | bound | eq16 | pinsker | all");
  verify->add_option("--gamma", verify_args.gamma, "discount for the bound sweep");
  verify->add_option("--out", verify_args.out_path, "report path");

  ppolab::CompareArgs compare_args;
  auto* compare = app.add_subcommand("compare", "score learning curves");
  compare->add_option("curves", compare_args.curve_paths, "curve.csv files")->required();
  compare->add_option("--out", compare_args.out_csv, "comparison CSV path");

  std::vector<std::string> plot_curves;
  std::string plot_out = "curves.gp";
  auto* plot = app.add_subcommand("plot", "emit a gnuplot script for curves");
  plot->add_option("curves", plot_curves, "curve.csv files")->required();
  plot->add_option("--out", plot_out, "script path");

  CLI11_PARSE(app, argc, argv);

  if (*train) {
    if (!algo.empty()) train_args.algo = algo;
    if (seed_set) train_args.seed = seed;
    if (iters_set) train_args.iters = iters;
    return ppolab::cmd_train(train_args);
  }
  if (*verify) return ppolab::cmd_verify(verify_args);
  if (*compare) return ppolab::cmd_compare(compare_args);
  if (*plot) return ppolab::cmd_plot(plot_curves, plot_out);
  return 1;
}
