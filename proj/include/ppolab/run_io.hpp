#pragma once

#include <string>

#include "ppolab/trainer.hpp"

namespace ppolab {

// Parses a train config from JSON text. Unknown keys are rejected.
TrainConfig parse_config_text(const std::string& text);
TrainConfig parse_config_file(const std::string& path);
std::string config_to_json(const TrainConfig& config);

std::string curve_to_csv(const LearningCurve& curve, std::size_t epochs);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

// Flat little-endian dump of both parameter sets; see README for layout.
void write_params_bin(const std::string& path, const Agent& agent);

void write_manifest(const std::string& path, const TrainConfig& config,
                    const std::string& started_at, const std::string& finished_at);

// Reads the mean_episode_return column back from a curve.csv.
std::vector<double> read_curve_returns(const std::string& path);

}  // namespace ppolab
