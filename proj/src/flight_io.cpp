#include "orelnav/flight_io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace orelnav {

namespace {

MissionPhase phase_from_string(const std::string& s) {
  if (s == "GlobalTakeoff") return MissionPhase::GlobalTakeoff;
  if (s == "HoverVerify") return MissionPhase::HoverVerify;
  if (s == "ObjectRelative") return MissionPhase::ObjectRelative;
  if (s == "ReturnToGlobal") return MissionPhase::ReturnToGlobal;
  if (s == "Done") return MissionPhase::Done;
  throw std::invalid_argument("unknown mission phase '" + s + "'");
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream iss(line);
  while (std::getline(iss, field, ',')) out.push_back(field);
  return out;
}

double to_double(const std::string& s) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw std::invalid_argument("csv: bad number '" + s + "'");
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return in;
}

void put(std::ostream& os, double v, bool leading_comma = true) {
  if (leading_comma) os << ',';
  os << format_double(v);
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(const FlightLog& log, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "t,px,py,pz,qx,qy,qz,qw,"
         "est_px,est_py,est_pz,est_qx,est_qy,est_qz,est_qw,"
         "cov_px_m2,cov_py_m2,cov_pz_m2,"
         "cov_vx_m2s2,cov_vy_m2s2,cov_vz_m2s2,"
         "cov_thx_rad2,cov_thy_rad2,cov_thz_rad2,"
         "cov_bwx_rad2s2,cov_bwy_rad2s2,cov_bwz_rad2s2,"
         "cov_bax_m2s4,cov_bay_m2s4,cov_baz_m2s4,phase\n";
  for (const LogRecord& rec : log.records) {
    put(out, rec.t, false);
    for (int i = 0; i < 3; ++i) put(out, rec.truth.p(i));
    put(out, rec.truth.q.x());
    put(out, rec.truth.q.y());
    put(out, rec.truth.q.z());
    put(out, rec.truth.q.w());
    for (int i = 0; i < 3; ++i) put(out, rec.est.p(i));
    put(out, rec.est.q.x());
    put(out, rec.est.q.y());
    put(out, rec.est.q.z());
    put(out, rec.est.q.w());
    for (int i = 0; i < 15; ++i) put(out, rec.cov_diag(i));
    out << ',' << to_string(rec.phase) << '\n';
  }
}

FlightLog read_trajectory_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("trajectory csv: empty file " + path);
  const std::vector<std::string> header = split_csv(line);
  if (header.size() != 31 || header[0] != "t" || header.back() != "phase")
    throw std::invalid_argument("trajectory csv: unexpected header in " + path);

  FlightLog log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != header.size())
      throw std::invalid_argument("trajectory csv: ragged row in " + path);
    LogRecord rec;
    rec.t = to_double(f[0]);
    rec.truth.p = Vec3(to_double(f[1]), to_double(f[2]), to_double(f[3]));
    rec.truth.q = Quat(to_double(f[7]), to_double(f[4]), to_double(f[5]),
                       to_double(f[6]));
    rec.est.p = Vec3(to_double(f[8]), to_double(f[9]), to_double(f[10]));
    rec.est.q = Quat(to_double(f[14]), to_double(f[11]), to_double(f[12]),
                     to_double(f[13]));
    for (int i = 0; i < 15; ++i) rec.cov_diag(i) = to_double(f[15 + i]);
    rec.phase = phase_from_string(f[30]);
    log.records.push_back(rec);
  }
  return log;
}

void write_streams(const FlightLog& log, const std::string& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out = open_out(dir + "/imu.csv");
    out << "t,ax_mps2,ay_mps2,az_mps2,wx_rps,wy_rps,wz_rps\n";
    for (const ImuSample& s : log.imu) {
      put(out, s.t, false);
      for (int i = 0; i < 3; ++i) put(out, s.a_m(i));
      for (int i = 0; i < 3; ++i) put(out, s.omega(i));
      out << '\n';
    }
  }
  {
    std::ofstream out = open_out(dir + "/poet.csv");
    out << "t,count,meas_index,object_hint,px,py,pz,qx,qy,qz,qw\n";
    for (const MeasurementBatch& b : log.batches) {
      if (b.measurements.empty()) {
        put(out, b.t, false);
        out << ",0,-1,-1,0,0,0,0,0,0,1\n";
        continue;
      }
      for (size_t i = 0; i < b.measurements.size(); ++i) {
        const RelPoseMeasurement& m = b.measurements[i];
        put(out, b.t, false);
        out << ',' << b.measurements.size() << ',' << i << ','
            << m.object_hint;
        for (int j = 0; j < 3; ++j) put(out, m.p_oc(j));
        put(out, m.q_oc.x());
        put(out, m.q_oc.y());
        put(out, m.q_oc.z());
        put(out, m.q_oc.w());
        out << '\n';
      }
    }
  }
  {
    std::ofstream out = open_out(dir + "/global.csv");
    out << "t,px,py,pz,qx,qy,qz,qw,"
           "sigma_px_m,sigma_py_m,sigma_pz_m,"
           "sigma_thx_rad,sigma_thy_rad,sigma_thz_rad\n";
    for (const GlobalPoseMeasurement& g : log.globals) {
      put(out, g.t, false);
      for (int i = 0; i < 3; ++i) put(out, g.p(i));
      put(out, g.q.x());
      put(out, g.q.y());
      put(out, g.q.z());
      put(out, g.q.w());
      for (int i = 0; i < 3; ++i) put(out, g.noise.sigma_p(i));
      for (int i = 0; i < 3; ++i) put(out, g.noise.sigma_theta(i));
      out << '\n';
    }
  }
  {
    std::ofstream out = open_out(dir + "/truth.csv");
    out << "t,px,py,pz,qx,qy,qz,qw,vx_mps,vy_mps,vz_mps\n";
    for (const LogRecord& rec : log.records) {
      put(out, rec.t, false);
      for (int i = 0; i < 3; ++i) put(out, rec.truth.p(i));
      put(out, rec.truth.q.x());
      put(out, rec.truth.q.y());
      put(out, rec.truth.q.z());
      put(out, rec.truth.q.w());
      for (int i = 0; i < 3; ++i) put(out, rec.truth_v(i));
      out << '\n';
    }
  }
}

RecordedStreams read_streams(const std::string& dir) {
  RecordedStreams streams;
  std::string line;
  {
    std::ifstream in = open_in(dir + "/imu.csv");
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split_csv(line);
      if (f.size() != 7)
        throw std::invalid_argument("imu.csv: ragged row");
      ImuSample s;
      s.t = to_double(f[0]);
      s.a_m = Vec3(to_double(f[1]), to_double(f[2]), to_double(f[3]));
      s.omega = Vec3(to_double(f[4]), to_double(f[5]), to_double(f[6]));
      streams.imu.push_back(s);
    }
  }
  {
    std::ifstream in = open_in(dir + "/poet.csv");
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split_csv(line);
      if (f.size() != 11)
        throw std::invalid_argument("poet.csv: ragged row");
      const double t = to_double(f[0]);
      const int count = static_cast<int>(to_double(f[1]));
      if (streams.batches.empty() || streams.batches.back().t != t) {
        MeasurementBatch b;
        b.t = t;
        streams.batches.push_back(b);
      }
      if (count == 0) continue;
      RelPoseMeasurement m;
      m.t = t;
      m.object_hint = static_cast<int>(to_double(f[3]));
      m.p_oc = Vec3(to_double(f[4]), to_double(f[5]), to_double(f[6]));
      m.q_oc = Quat(to_double(f[10]), to_double(f[7]), to_double(f[8]),
                    to_double(f[9]));
      streams.batches.back().measurements.push_back(m);
    }
  }
  {
    std::ifstream in = open_in(dir + "/global.csv");
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split_csv(line);
      if (f.size() != 14)
        throw std::invalid_argument("global.csv: ragged row");
      GlobalPoseMeasurement g;
      g.t = to_double(f[0]);
      g.p = Vec3(to_double(f[1]), to_double(f[2]), to_double(f[3]));
      g.q = Quat(to_double(f[7]), to_double(f[4]), to_double(f[5]),
                 to_double(f[6]));
      g.noise.sigma_p = Vec3(to_double(f[8]), to_double(f[9]), to_double(f[10]));
      g.noise.sigma_theta =
          Vec3(to_double(f[11]), to_double(f[12]), to_double(f[13]));
      streams.globals.push_back(g);
    }
  }
  {
    std::ifstream in = open_in(dir + "/truth.csv");
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split_csv(line);
      if (f.size() != 11)
        throw std::invalid_argument("truth.csv: ragged row");
      TruthSample s;
      s.t = to_double(f[0]);
      s.pose.p = Vec3(to_double(f[1]), to_double(f[2]), to_double(f[3]));
      s.pose.q = Quat(to_double(f[7]), to_double(f[4]), to_double(f[5]),
                      to_double(f[6]));
      s.v = Vec3(to_double(f[8]), to_double(f[9]), to_double(f[10]));
      streams.truth.push_back(s);
    }
  }
  return streams;
}

nlohmann::json metrics_to_json(const Metrics& metrics, std::uint64_t seed) {
  nlohmann::json j;
  j["rmse_pos_m"] = metrics.rmse_pos_m;
  j["rmse_pos_std"] = metrics.rmse_pos_std;
  j["rmse_rot_deg"] = metrics.rmse_rot_deg;
  j["rmse_rot_std"] = metrics.rmse_rot_std;
  j["max_pe_m"] = metrics.max_pe_m;
  j["seed"] = seed;
  j["mean_pos_m"] = metrics.mean_pos_m;
  j["mean_rot_deg"] = metrics.mean_rot_deg;
  j["n_samples"] = metrics.n_samples;
  if (!metrics.raw_te_mean_m.empty()) {
    j["raw_te_mean_m"] = metrics.raw_te_mean_m;
    j["raw_re_mean_deg"] = metrics.raw_re_mean_deg;
  }
  return j;
}

void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

}  // namespace orelnav
