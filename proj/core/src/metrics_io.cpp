#include "simpa/metrics_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace simpa {

nlohmann::json bound_report_json(std::size_t iteration, const BoundReport& report, double nll) {
  nlohmann::json j;
  j["iter"] = iteration;
  j["bound"] = report.bound;
  j["r0"] = report.r0;
  j["ri"] = report.r_i;
  j["kl_hyper"] = report.kl_hyper;
  j["kl_task"] = report.kl_task;
  j["emp_loss"] = report.emp_loss;
  j["delta0"] = report.delta0;
  j["delta_i"] = report.delta_i;
  j["nll"] = nll;
  return j;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw std::runtime_error("rename failed for " + path);
  }
}

std::string reliability_csv(const ReliabilityCurve& curve) {
  std::ostringstream os;
  os.precision(17);
  os << "level,observed,weight\n";
  for (std::size_t i = 0; i < curve.levels.size(); ++i) {
    os << curve.levels[i] << ',' << curve.observed[i] << ',' << curve.bin_weights[i] << '\n';
  }
  return os.str();
}

ReliabilityCurve reliability_from_csv(const std::string& content) {
  ReliabilityCurve curve;
  std::istringstream is(content);
  std::string line;
  if (!std::getline(is, line) || line != "level,observed,weight") {
    throw std::runtime_error("reliability CSV: bad header");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    double level = 0, obs = 0, w = 0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &level, &obs, &w) != 3) {
      throw std::runtime_error("reliability CSV: bad row '" + line + "'");
    }
    curve.levels.push_back(level);
    curve.observed.push_back(obs);
    curve.bin_weights.push_back(w);
  }
  return curve;
}

}  // namespace simpa
