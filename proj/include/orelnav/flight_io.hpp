#pragma once

#include <string>

#include <json.hpp>

#include "orelnav/sim_harness.hpp"

namespace orelnav {

// Shortest round-trip decimal form of a double (std::to_chars), so emitted
// files parse back to bit-identical values.
std::string format_double(double value);

// Time series of truth, estimate, and core covariance diagonal. Columns:
//   t,px,py,pz,qx,qy,qz,qw,est_px,...,est_qw,cov_*,phase
void write_trajectory_csv(const FlightLog& log, const std::string& path);

// Re-read an emitted trajectory (records only; streams are separate files).
FlightLog read_trajectory_csv(const std::string& path);

// Recorded sensor streams as imu.csv / poet.csv / global.csv / truth.csv
// under the given directory (created if missing).
void write_streams(const FlightLog& log, const std::string& dir);
RecordedStreams read_streams(const std::string& dir);

nlohmann::json metrics_to_json(const Metrics& metrics, std::uint64_t seed);
void write_json(const nlohmann::json& j, const std::string& path);

}  // namespace orelnav
