#include "ppolab/run_io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ppolab {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

TrainConfig parse_config_text(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  TrainConfig c;
  static const char* known[] = {
      "env",        "algorithm",  "seed",        "hidden",     "rollout_threads",
      "gamma",      "delta0",     "lambda0",     "beta0",      "c1",
      "c2",         "lambda_gae", "actors",      "horizon",    "epochs",
      "minibatch_size", "iterations", "delta_floor", "beta_floor"};
  for (const auto& [key, val] : j.items()) {
    bool ok = false;
    for (const char* k : known)
      if (key == k) ok = true;
    if (!ok) throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  c.env_id = j.at("env").get<std::string>();
  if (j.contains("algorithm")) {
    const auto a = j["algorithm"].get<std::string>();
    if (a == "ppo")
      c.algorithm = Algorithm::kPpo;
    else if (a == "ppo-lambda")
      c.algorithm = Algorithm::kPpoLambda;
    else
      throw std::invalid_argument("config: algorithm must be 'ppo' or 'ppo-lambda'");
  }
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("hidden")) c.hidden = j["hidden"].get<std::vector<std::size_t>>();
  if (j.contains("rollout_threads"))
    c.rollout_threads = j["rollout_threads"].get<std::size_t>();
  auto& hp = c.hp;
  if (j.contains("gamma")) hp.gamma = j["gamma"].get<double>();
  if (j.contains("delta0")) hp.delta0 = j["delta0"].get<double>();
  if (j.contains("lambda0")) hp.lambda0 = j["lambda0"].get<double>();
  if (j.contains("beta0")) hp.beta0 = j["beta0"].get<double>();
  if (j.contains("c1")) hp.c1 = j["c1"].get<double>();
  if (j.contains("c2")) hp.c2 = j["c2"].get<double>();
  if (j.contains("lambda_gae")) hp.lambda_gae = j["lambda_gae"].get<double>();
  if (j.contains("actors")) hp.num_actors = j["actors"].get<std::size_t>();
  if (j.contains("horizon")) hp.horizon = j["horizon"].get<std::size_t>();
  if (j.contains("epochs")) hp.epochs = j["epochs"].get<std::size_t>();
  if (j.contains("minibatch_size"))
    hp.minibatch_size = j["minibatch_size"].get<std::size_t>();
  if (j.contains("iterations")) hp.iterations = j["iterations"].get<std::size_t>();
  if (j.contains("delta_floor")) hp.delta_floor = j["delta_floor"].get<double>();
  if (j.contains("beta_floor")) hp.beta_floor = j["beta_floor"].get<double>();
  return c;
}

TrainConfig parse_config_file(const std::string& path) {
  return parse_config_text(read_text_file(path));
}

std::string config_to_json(const TrainConfig& c) {
  nlohmann::json j;
  j["env"] = c.env_id;
  j["algorithm"] = c.algorithm == Algorithm::kPpo ? "ppo" : "ppo-lambda";
  j["seed"] = c.seed;
  j["hidden"] = c.hidden;
  j["rollout_threads"] = c.rollout_threads;
  j["gamma"] = c.hp.gamma;
  j["delta0"] = c.hp.delta0;
  j["lambda0"] = c.hp.lambda0;
  j["beta0"] = c.hp.beta0;
  j["c1"] = c.hp.c1;
  j["c2"] = c.hp.c2;
  j["lambda_gae"] = c.hp.lambda_gae;
  j["actors"] = c.hp.num_actors;
  j["horizon"] = c.hp.horizon;
  j["epochs"] = c.hp.epochs;
  j["minibatch_size"] = c.hp.minibatch_size;
  j["iterations"] = c.hp.iterations;
  j["delta_floor"] = c.hp.delta_floor;
  j["beta_floor"] = c.hp.beta_floor;
  return j.dump(2) + "\n";
}

std::string curve_to_csv(const LearningCurve& curve, std::size_t epochs) {
  std::ostringstream out;
  out << "iteration,mean_episode_return,episode_count,delta,beta,lambda,clip_fraction";
  for (int d = 0; d < 10; ++d) out << ",vanish_d" << d;
  out << ",mean_kl_new_old";
  for (std::size_t k = 0; k < epochs; ++k) out << ",abs_log_ratio_e" << k;
  out << ",surrogate_loss,value_loss,entropy,env_steps\n";
  for (const auto& r : curve.rows) {
    out << r.iteration << ',' << fmt(r.mean_episode_return) << ',' << r.episode_count << ','
        << fmt(r.delta) << ',' << fmt(r.beta) << ',' << fmt(r.lambda) << ','
        << fmt(r.clip_fraction);
    for (double v : r.vanish_by_decile) out << ',' << fmt(v);
    out << ',' << fmt(r.mean_kl_new_old);
    for (std::size_t k = 0; k < epochs; ++k)
      out << ',' << fmt(k < r.mean_abs_log_ratio_per_epoch.size()
                            ? r.mean_abs_log_ratio_per_epoch[k]
                            : 0.0);
    out << ',' << fmt(r.surrogate_loss) << ',' << fmt(r.value_loss) << ','
        << fmt(r.entropy) << ',' << r.env_steps << '\n';
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << text;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ofstream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ofstream& out, double d) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(d));
  std::memcpy(&bits, &d, 8);
  put_u64(out, bits);
}

void put_set(std::ofstream& out, const ParameterSet& set) {
  put_u32(out, static_cast<std::uint32_t>(set.layers.size()));
  for (const auto& l : set.layers) {
    put_u64(out, l.w.rows);
    put_u64(out, l.w.cols);
    put_u64(out, l.b.size());
    for (double v : l.w.data) put_f64(out, v);
    for (double v : l.b) put_f64(out, v);
  }
}

}  // namespace

void write_params_bin(const std::string& path, const Agent& agent) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  put_u32(out, 0x42504C50u);  // "PLPB"
  put_u32(out, 1u);
  put_u32(out, agent.continuous ? 1u : 0u);
  put_u32(out, 2u);  // parameter sets: policy, value
  put_set(out, agent.policy);
  put_set(out, agent.value);
}

void write_manifest(const std::string& path, const TrainConfig& config,
                    const std::string& started_at, const std::string& finished_at) {
  nlohmann::json j;
  j["config"] = nlohmann::json::parse(config_to_json(config));
  j["seed"] = config.seed;
  j["version"] = "ppolab 1.0";
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  j["outputs"] = {config.out_dir + "/curve.csv", config.out_dir + "/config.json",
                  config.out_dir + "/params.bin"};
  write_text_file(path, j.dump(2) + "\n");
}

std::vector<double> read_curve_returns(const std::string& path) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty curve file: " + path);
  // find column index
  std::size_t col = 0;
  {
    std::istringstream hs(line);
    std::string name;
    bool found = false;
    while (std::getline(hs, name, ',')) {
      if (name == "mean_episode_return") {
        found = true;
        break;
      }
      ++col;
    }
    if (!found) throw std::runtime_error("curve file missing mean_episode_return: " + path);
  }
  std::vector<double> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    for (std::size_t i = 0; i <= col; ++i)
      if (!std::getline(ls, cell, ','))
        throw std::runtime_error("malformed curve row in " + path);
    out.push_back(std::stod(cell));
  }
  return out;
}

}  // namespace ppolab
