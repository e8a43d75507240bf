#include "ppolab/cli_commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <sstream>

#include "ppolab/run_io.hpp"
#include "ppolab/verify.hpp"

namespace ppolab {

namespace {

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

int cmd_train(const TrainArgs& args) {
  TrainConfig config;
  try {
    config = parse_config_file(args.config_path);
    if (args.algo) {
      if (*args.algo == "ppo")
        config.algorithm = Algorithm::kPpo;
      else if (*args.algo == "ppo-lambda")
        config.algorithm = Algorithm::kPpoLambda;
      else
        throw std::invalid_argument("--algo must be ppo or ppo-lambda");
    }
    if (args.seed) config.seed = *args.seed;
    if (args.iters) config.hp.iterations = *args.iters;
    config.out_dir = args.out_dir;
    if (const char* threads = std::getenv("PPOLAMBDA_THREADS"))
      config.rollout_threads = std::max(1L, std::atol(threads));
    config.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  std::filesystem::create_directories(config.out_dir);
  const std::string started = timestamp_utc();
  const TrainResult result = train(config);
  const std::string finished = timestamp_utc();

  write_text_file(config.out_dir + "/curve.csv",
                  curve_to_csv(result.curve, config.hp.epochs));
  write_text_file(config.out_dir + "/config.json", config_to_json(config));
  write_params_bin(config.out_dir + "/params.bin", result.agent);
  write_manifest(config.out_dir + "/manifest.json", config, started, finished);

  if (!result.curve.rows.empty() && result.curve.rows.back().halted) {
    std::cerr << "training halted: non-finite parameters at iteration "
              << result.curve.rows.back().iteration << "\n";
    return 3;
  }
  std::cout << "wrote " << config.out_dir << "/curve.csv (" << result.curve.rows.size()
            << " rows)\n";
  return 0;
}

int cmd_verify(const VerifyArgs& args) {
  const bool all = args.check == "all";
  std::optional<verify::StationarySweep> st;
  std::optional<verify::BoundSweep> bd;
  std::optional<verify::Eq16Sweep> eq;
  std::optional<verify::PinskerSweep> pk;

  if (all || args.check == "stationary") st = verify::run_stationary_sweep(100, 7);
  if (all || args.check == "bound") bd = verify::run_bound_sweep(1000, args.gamma, 11);
  if (all || args.check == "eq16") eq = verify::run_eq16_sweep(20, 13);
  if (all || args.check == "pinsker") pk = verify::run_pinsker_sweep(1000, 17);
  if (!st && !bd && !eq && !pk) {
    std::cerr << "unknown check: " << args.check << "\n";
    return 2;
  }

  const std::string report = verify::report_json(st ? &*st : nullptr, bd ? &*bd : nullptr,
                                                 eq ? &*eq : nullptr, pk ? &*pk : nullptr);
  write_text_file(args.out_path, report);
  std::cout << report;

  bool ok = true;
  if (st && !st->pass()) {
    ok = false;
    std::cerr << "stationary-point check FAILED; worst: " << st->worst_instance << "\n";
  }
  if (bd && !bd->pass()) {
    ok = false;
    std::cerr << "bound check FAILED; worst: " << bd->worst_instance << "\n";
  }
  if (eq && !eq->pass()) {
    ok = false;
    std::cerr << "eq16 check FAILED; worst rel dev " << eq->worst_rel_dev << "\n";
  }
  if (pk && !pk->pass()) {
    ok = false;
    std::cerr << "pinsker check FAILED\n";
  }
  return ok ? 0 : 1;
}

int cmd_compare(const CompareArgs& args) {
  if (args.curve_paths.size() < 2) {
    std::cerr << "compare needs at least two curve files\n";
    return 2;
  }
  std::ostringstream csv;
  csv << "curve,fast_learning,final_performance\n";
  double fast_sum = 0, final_sum = 0;
  for (const auto& path : args.curve_paths) {
    std::vector<double> rets;
    try {
      rets = read_curve_returns(path);
    } catch (const std::exception& e) {
      std::cerr << "compare: " << e.what() << "\n";
      return 2;
    }
    if (rets.size() < 10) {
      std::cerr << "compare: " << path << " has fewer than 10 rows\n";
      return 2;
    }
    const double fast = std::accumulate(rets.begin(), rets.end(), 0.0) /
                        static_cast<double>(rets.size());
    const double final_perf =
        std::accumulate(rets.end() - 10, rets.end(), 0.0) / 10.0;
    fast_sum += fast;
    final_sum += final_perf;
    csv << path << ',' << fast << ',' << final_perf << '\n';
    std::printf("%-40s fast_learning=%.6g final_performance=%.6g\n", path.c_str(), fast,
                final_perf);
  }
  const auto n = static_cast<double>(args.curve_paths.size());
  std::printf("%-40s fast_learning=%.6g final_performance=%.6g\n", "MEAN", fast_sum / n,
              final_sum / n);
  csv << "MEAN," << fast_sum / n << ',' << final_sum / n << '\n';
  if (!args.out_csv.empty()) write_text_file(args.out_csv, csv.str());
  return 0;
}

int cmd_plot(const std::vector<std::string>& curve_paths, const std::string& out_path) {
  if (curve_paths.empty()) {
    std::cerr << "plot needs at least one curve file\n";
    return 2;
  }
  std::ostringstream os;
  os << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set xlabel 'iteration'\n"
     << "set ylabel 'mean episode return'\n"
     << "plot ";
  for (std::size_t i = 0; i < curve_paths.size(); ++i) {
    if (i) os << ", ";
    os << "'" << curve_paths[i] << "' using 1:2 with lines title '" << curve_paths[i]
       << "'";
  }
  os << "\npause -1\n";
  write_text_file(out_path, os.str());
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

}  // namespace ppolab
