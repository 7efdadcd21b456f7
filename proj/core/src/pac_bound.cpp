#include "simpa/pac_bound.hpp"

#include <cmath>
#include <stdexcept>

namespace simpa {

void BoundConfig::validate() const {
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("BoundConfig: delta must be in (0, 1]");
  if (!(tau > 1.0)) throw std::invalid_argument("BoundConfig: tau must be > 1");
  if (t_tasks < 2) throw std::invalid_argument("BoundConfig: T must be >= 2");
}

double clip_loss(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

ad::Var clip_loss(ad::Var x) { return ad::clip01(x); }

double compute_r0(double kl_hyper, const BoundConfig& cfg) {
  cfg.validate();
  if (kl_hyper < 0.0) throw std::invalid_argument("compute_r0: kl_hyper must be >= 0");
  const double t = static_cast<double>(cfg.t_tasks);
  return std::sqrt((kl_hyper + std::log(cfg.tau * t / cfg.delta)) / (2.0 * (t - 1.0)));
}

double compute_ri(double expected_task_kl, std::size_t m_v, const BoundConfig& cfg) {
  cfg.validate();
  if (expected_task_kl < 0.0) throw std::invalid_argument("compute_ri: kl must be >= 0");
  if (m_v < 2) throw std::invalid_argument("compute_ri: m_v must be >= 2");
  const double t = static_cast<double>(cfg.t_tasks);
  const double m = static_cast<double>(m_v);
  const double weight = cfg.tau * t / ((cfg.tau - 1.0) * cfg.delta);
  return std::sqrt((expected_task_kl + weight * std::log(m)) / (2.0 * (m - 1.0)));
}

double neumaier_sum(std::span<const double> xs) {
  double s = 0.0, c = 0.0;
  for (double x : xs) {
    const double t = s + x;
    if (std::fabs(s) >= std::fabs(x)) {
      c += (s - t) + x;
    } else {
      c += (x - t) + s;
    }
    s = t;
  }
  return s + c;
}

std::pair<double, std::vector<double>> split_confidence(const BoundConfig& cfg) {
  cfg.validate();
  const double t = static_cast<double>(cfg.t_tasks);
  const double di = (cfg.tau - 1.0) / cfg.tau * cfg.delta / t;
  std::vector<double> delta_i(cfg.t_tasks, di);
  // Close the budget on delta0 (= delta/tau up to rounding) so the
  // compensated total reproduces delta exactly.
  double delta0 = cfg.delta / cfg.tau;
  for (int pass = 0; pass < 4; ++pass) {
    std::vector<double> all;
    all.reserve(cfg.t_tasks + 1);
    all.push_back(delta0);
    all.insert(all.end(), delta_i.begin(), delta_i.end());
    const double total = neumaier_sum(all);
    if (total == cfg.delta) break;
    delta0 += cfg.delta - total;
  }
  if (!(delta0 > 0.0)) throw std::invalid_argument("split_confidence: budget closure failed");
  return {delta0, std::move(delta_i)};
}

BoundReport assemble_bound(std::span<const double> emp_losses, std::span<const double> vfes,
                           std::span<const double> kl_tasks, double kl_hyper,
                           std::span<const std::size_t> m_vs, const BoundConfig& cfg,
                           std::size_t k_theta_samples) {
  cfg.validate();
  const std::size_t t = cfg.t_tasks;
  if (emp_losses.size() != t || kl_tasks.size() != t || m_vs.size() != t ||
      (!vfes.empty() && vfes.size() != t)) {
    throw std::invalid_argument("assemble_bound: task record count does not match T");
  }
  BoundReport rep;
  rep.k_theta_samples = k_theta_samples;
  rep.kl_hyper = kl_hyper;
  rep.emp_loss.assign(emp_losses.begin(), emp_losses.end());
  rep.vfe.assign(vfes.begin(), vfes.end());
  rep.kl_task.assign(kl_tasks.begin(), kl_tasks.end());
  rep.r0 = compute_r0(kl_hyper, cfg);
  double acc = 0.0;
  for (std::size_t i = 0; i < t; ++i) {
    const double kl_pos = kl_tasks[i] > 0.0 ? kl_tasks[i] : 0.0;
    rep.r_i.push_back(compute_ri(kl_pos, m_vs[i], cfg));
    acc += emp_losses[i] + kl_tasks[i] + rep.r_i[i];
  }
  rep.bound = acc / static_cast<double>(t) + rep.r0;
  auto [d0, di] = split_confidence(cfg);
  rep.delta0 = d0;
  rep.delta_i = std::move(di);
  return rep;
}

}  // namespace simpa
