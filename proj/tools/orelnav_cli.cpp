#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <string>
#include <vector>

#include "orelnav/config.hpp"
#include "orelnav/flight_io.hpp"

namespace {

using nlohmann::json;
using namespace orelnav;

std::string default_out_dir(const std::string& cli_value) {
  if (!cli_value.empty()) return cli_value;
  if (const char* env = std::getenv("ORELNAV_OUT_DIR")) return env;
  return "out";
}

// "1..10" or "1,4,9" or a single number.
std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  std::vector<std::uint64_t> seeds;
  const auto range_pos = spec.find("..");
  if (range_pos != std::string::npos) {
    const long lo = std::stol(spec.substr(0, range_pos));
    const long hi = std::stol(spec.substr(range_pos + 2));
    if (lo > hi) throw std::invalid_argument("seeds: empty range " + spec);
    for (long s = lo; s <= hi; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
    return seeds;
  }
  std::string token;
  std::istringstream iss(spec);
  while (std::getline(iss, token, ',')) {
    if (!token.empty()) seeds.push_back(std::stoul(token));
  }
  if (seeds.empty()) throw std::invalid_argument("seeds: none parsed from " + spec);
  return seeds;
}

std::vector<double> parse_list(const std::string& spec) {
  std::vector<double> out;
  std::string token;
  std::istringstream iss(spec);
  while (std::getline(iss, token, ',')) {
    if (!token.empty()) out.push_back(std::stod(token));
  }
  return out;
}

ScenarioConfig load_with_overrides(const std::string& config_path,
                                   const std::vector<std::string>& overrides) {
  ScenarioConfig cfg = load_scenario(config_path);
  for (const std::string& o : overrides) apply_override(cfg, o);
  return cfg;
}

json aggregate(const std::vector<json>& runs) {
  const std::vector<std::string> keys = {"rmse_pos_m", "rmse_rot_deg",
                                         "max_pe_m", "mean_pos_m"};
  json mean_row, std_row;
  for (const std::string& key : keys) {
    double m = 0.0;
    for (const json& r : runs) m += r.at(key).get<double>();
    m /= static_cast<double>(runs.size());
    double v = 0.0;
    for (const json& r : runs) {
      const double d = r.at(key).get<double>() - m;
      v += d * d;
    }
    mean_row[key] = m;
    std_row[key] = std::sqrt(v / static_cast<double>(runs.size()));
  }
  json out;
  out["runs"] = runs;
  out["mean"] = mean_row;
  out["std"] = std_row;
  return out;
}

int cmd_run(const std::string& config_path, const std::string& seeds_spec,
            const std::string& out_dir_arg,
            const std::vector<std::string>& overrides, bool save_streams) {
  const std::string out_dir = default_out_dir(out_dir_arg);
  std::filesystem::create_directories(out_dir);
  const std::vector<std::uint64_t> seeds = parse_seeds(seeds_spec);

  std::vector<json> runs;
  for (const std::uint64_t seed : seeds) {
    ScenarioConfig cfg = load_with_overrides(config_path, overrides);
    cfg.seed = seed;
    const FlightLog log = run_closed_loop(cfg);
    const std::string traj =
        out_dir + "/trajectory_seed" + std::to_string(seed) + ".csv";
    write_trajectory_csv(log, traj);
    if (save_streams)
      write_streams(log, out_dir + "/streams_seed" + std::to_string(seed));
    if (log.diverged) {
      std::cerr << "seed " << seed << ": estimator diverged, run aborted\n";
      return 2;
    }
    const Metrics metrics = compute_metrics(log);
    json j = metrics_to_json(metrics, seed);
    j["completed_waypoints"] = log.completed_waypoints;
    write_json(j, out_dir + "/metrics_seed" + std::to_string(seed) + ".json");
    runs.push_back(j);
    std::cout << "seed " << seed << ": rmse_pos=" << metrics.rmse_pos_m
              << " m, rmse_rot=" << metrics.rmse_rot_deg
              << " deg, max_pe=" << metrics.max_pe_m << " m\n";
  }
  write_json(aggregate(runs), out_dir + "/metrics.json");
  std::cout << "wrote " << out_dir << "/metrics.json\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir_arg,
              const std::string& distances_spec, const std::string& angles_spec,
              const std::vector<std::string>& overrides) {
  const std::string out_dir = default_out_dir(out_dir_arg);
  std::filesystem::create_directories(out_dir);
  const std::vector<double> distances = parse_list(distances_spec);
  const std::vector<double> angles = parse_list(angles_spec);

  json table = json::array();
  std::cout << "distance\\angle";
  for (double a : angles) std::cout << "\t" << a << " deg";
  std::cout << "\n";
  for (double d : distances) {
    json row;
    row["distance_m"] = d;
    std::cout << d << " m";
    for (double a : angles) {
      ScenarioConfig cfg = load_with_overrides(config_path, overrides);
      cfg.mode = ScenarioMode::Hover;
      cfg.plan.distance_m = d;
      cfg.approach_bearing_rad += a * M_PI / 180.0;
      cfg.takeoff_offset.setZero();
      cfg.duration_s = cfg.plan.hover_duration_s + 35.0;
      const FlightLog log = run_closed_loop(cfg);
      if (log.diverged) {
        std::cerr << "\nsweep cell d=" << d << " angle=" << a << " diverged\n";
        return 2;
      }
      const Metrics m = compute_metrics(log);
      json cell;
      cell["angle_deg"] = a;
      cell["mean_pos_m"] = m.mean_pos_m;
      cell["mean_rot_deg"] = m.mean_rot_deg;
      row["cells"].push_back(cell);
      std::cout << "\t" << m.mean_pos_m << " m / " << m.mean_rot_deg << " deg";
    }
    std::cout << "\n";
    table.push_back(row);
  }
  json out;
  out["hover_grid"] = table;
  write_json(out, out_dir + "/sweep.json");
  std::cout << "wrote " << out_dir << "/sweep.json\n";
  return 0;
}

int cmd_replay(const std::string& config_path, const std::string& streams_dir,
               const std::string& out_dir_arg,
               const std::vector<std::string>& overrides) {
  const std::string out_dir = default_out_dir(out_dir_arg);
  std::filesystem::create_directories(out_dir);
  ScenarioConfig cfg = load_with_overrides(config_path, overrides);
  const RecordedStreams streams = read_streams(streams_dir);
  const FlightLog log = run_offline(cfg, streams);
  write_trajectory_csv(log, out_dir + "/replay_trajectory.csv");
  const Metrics metrics = compute_metrics(log);
  write_json(metrics_to_json(metrics, cfg.seed), out_dir + "/replay_metrics.json");
  std::cout << "replay: rmse_pos=" << metrics.rmse_pos_m
            << " m, rmse_rot=" << metrics.rmse_rot_deg << " deg\n";
  return 0;
}

int cmd_metrics(const std::string& log_path, const std::string& out_path,
                std::uint64_t seed) {
  const FlightLog log = read_trajectory_csv(log_path);
  const Metrics metrics = compute_metrics(log);
  const json j = metrics_to_json(metrics, seed);
  std::cout << j.dump(2) << "\n";
  if (!out_path.empty()) write_json(j, out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Object-relative UAV state-estimation simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, seeds_spec = "1", streams_dir;
  std::string log_path, metrics_out;
  std::string distances = "3.0,3.3,3.6", angles = "0,25,50";
  std::vector<std::string> overrides;
  bool save_streams = false;
  std::uint64_t metrics_seed = 0;

  CLI::App* run = app.add_subcommand("run", "closed-loop scenario per seed");
  run->add_option("--config", config_path, "scenario config file")->required();
  run->add_option("--seeds", seeds_spec, "seed list: 1..10 or 1,2,5");
  run->add_option("--out", out_dir, "output directory (or ORELNAV_OUT_DIR)");
  run->add_option("--set", overrides, "override section.key=value");
  run->add_flag("--save-streams", save_streams, "write replayable sensor streams");

  CLI::App* sweep = app.add_subcommand("sweep", "hover grid over distance x angle");
  sweep->add_option("--config", config_path, "scenario config file")->required();
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--distances", distances, "comma list of distances [m]");
  sweep->add_option("--angles", angles, "comma list of view angles [deg]");
  sweep->add_option("--set", overrides, "override section.key=value");

  CLI::App* replay = app.add_subcommand("replay", "offline replay of recorded streams");
  replay->add_option("--config", config_path, "scenario config file")->required();
  replay->add_option("--streams", streams_dir, "recorded streams directory")->required();
  replay->add_option("--out", out_dir, "output directory");
  replay->add_option("--set", overrides, "override section.key=value");

  CLI::App* metrics = app.add_subcommand("metrics", "recompute metrics from a trajectory CSV");
  metrics->add_option("--log", log_path, "trajectory CSV")->required();
  metrics->add_option("--out", metrics_out, "metrics JSON output path");
  metrics->add_option("--seed", metrics_seed, "seed recorded in the JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(config_path, seeds_spec, out_dir, overrides, save_streams);
    if (sweep->parsed())
      return cmd_sweep(config_path, out_dir, distances, angles, overrides);
    if (replay->parsed())
      return cmd_replay(config_path, streams_dir, out_dir, overrides);
    if (metrics->parsed())
      return cmd_metrics(log_path, metrics_out, metrics_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
