#pragma once

#include <optional>
#include <string>
#include <vector>

namespace ppolab {

struct TrainArgs {
  std::string config_path;
  std::optional<std::string> algo;   // "ppo" | "ppo-lambda"
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> iters;
  std::string out_dir;
};

// Writes curve.csv, config.json, manifest.json, params.bin under out_dir.
// Exit codes: 0 ok, 2 bad config, 3 training halted.
int cmd_train(const TrainArgs& args);

struct VerifyArgs {
  std::string check = "all";  // stationary | bound | eq16 | pinsker | all
  double gamma = 0.9;
  std::string out_path = "verify_report.json";
};

// Exit 0 iff every asserted check passes; 1 with the worst instance dumped.
int cmd_verify(const VerifyArgs& args);

struct CompareArgs {
  std::vector<std::string> curve_paths;
  std::string out_csv;  // optional comparison CSV
};

int cmd_compare(const CompareArgs& args);

// Emits a gnuplot script that plots mean episode return for the given curves.
int cmd_plot(const std::vector<std::string>& curve_paths, const std::string& out_path);

}  // namespace ppolab
