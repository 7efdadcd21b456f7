#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "simpa/tape.hpp"
#include "simpa/tensor.hpp"

namespace simpa {

struct BoundConfig {
  double delta = 0.1;       // confidence level, in (0, 1]
  double tau = 2.0;         // budget split knob, > 1
  std::size_t t_tasks = 2;  // tasks per meta-batch, >= 2

  void validate() const;
};

// Every term of the assembled bound for one meta-batch.
struct BoundReport {
  std::vector<double> emp_loss;  // clipped empirical query losses, per task
  std::vector<double> vfe;       // task-level free energies, per task
  std::vector<double> kl_task;   // implicit-KL estimates, per task
  std::vector<double> r_i;       // sample-complexity regularisers, per task
  double r0 = 0.0;
  double kl_hyper = 0.0;
  double bound = 0.0;
  double delta0 = 0.0;
  std::vector<double> delta_i;
  std::size_t k_theta_samples = 1;  // Monte-Carlo samples behind the E_q(theta) terms
};

double clip_loss(double x);
ad::Var clip_loss(ad::Var x);

// R0 = sqrt((kl_hyper + ln(tau*T/delta)) / (2(T-1)))
double compute_r0(double kl_hyper, const BoundConfig& cfg);

// Ri = sqrt((kl_task + tau*T/((tau-1)*delta) * ln(m_v)) / (2(m_v - 1)))
double compute_ri(double expected_task_kl, std::size_t m_v, const BoundConfig& cfg);

// delta_i = ((tau-1)/tau) * delta / T for each task; delta0 closes the
// budget so that delta0 + sum(delta_i) equals delta exactly in floating
// point (delta0 = delta/tau up to rounding).
std::pair<double, std::vector<double>> split_confidence(const BoundConfig& cfg);

// Compensated (Neumaier) summation; used by the budget identity test.
double neumaier_sum(std::span<const double> xs);

// bound = (1/T) * sum_i (emp_loss_i + kl_i + Ri) + R0, with every
// intermediate recorded. kl values are clamped at zero inside Ri.
BoundReport assemble_bound(std::span<const double> emp_losses, std::span<const double> vfes,
                           std::span<const double> kl_tasks, double kl_hyper,
                           std::span<const std::size_t> m_vs, const BoundConfig& cfg,
                           std::size_t k_theta_samples);

}  // namespace simpa
