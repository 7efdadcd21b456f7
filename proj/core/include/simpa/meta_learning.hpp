#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "simpa/adam.hpp"
#include "simpa/kl_estimation.hpp"
#include "simpa/networks.hpp"
#include "simpa/pac_bound.hpp"
#include "simpa/stochastic.hpp"
#include "simpa/task_env.hpp"

namespace simpa {

struct TrainConfig {
  // Alg.-1 hyper-parameters
  std::size_t t_tasks = 2;   // T
  std::size_t k_theta = 4;   // K
  std::size_t l_t = 16;
  std::size_t l_v = 16;
  std::size_t l_d = 128;
  std::size_t eta = 5;       // inner alternations
  double alpha_t = 1e-3;
  double alpha_v = 1e-4;
  double gamma_t = 1e-4;
  double gamma_v = 1e-5;
  double nu = 1e-4;
  double delta = 0.01;
  double tau = 2.0;
  double sigma_theta = 1e-8;
  double prior_mu0 = 0.0;
  double prior_sigma0 = 10.0;
  ad::GradMode inner_grad_mode = ad::GradMode::kFirstOrder;
  NoiseFamily noise_family = NoiseFamily::kBeta;
  bool label_smoothing = true;
  std::size_t iterations = 10000;
  std::uint64_t seed = 0;
  std::size_t checkpoint_every = 1000;
  std::string mode = "simpa";  // simpa | maml

  // deterministic baseline
  double maml_inner_lr = 1e-2;
  std::size_t maml_inner_steps = 5;
  double maml_meta_lr = 1e-3;

  EnvConfig env;
  Architectures arch;

  BoundConfig bound() const { return {delta, tau, t_tasks}; }
  void validate() const;
};

struct MetaState {
  HyperPosterior hyper;  // psi plus the fixed scales
  Tensor enc_params;     // phi_enc
  Tensor disc_meta;      // omega_0
  AdamState opt_psi, opt_enc, opt_disc;
  std::size_t iteration = 0;
};

MetaState init_meta_state(const TrainConfig& cfg);

// Stream addressing for one episode: training uses (seed, iteration, task);
// evaluation gets a disjoint iteration space.
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t iteration = 0;
  std::uint64_t task = 0;
};
inline StreamKey eval_stream_key(std::uint64_t seed, std::uint64_t episode) {
  return {seed, (1ull << 63) | episode, 0};
}

// All random draws one task consumes in one meta-iteration, pre-drawn so the
// K theta samples share them (common random numbers; this is also what makes
// predictions collapse to the K=1 case as sigma_theta -> 0).
struct TaskNoiseCache {
  LatentNoiseParams noise;  // encoder output at the current phi_enc
  std::vector<Tensor> disc_uniforms, vfe_uniforms;  // per alternation
  std::vector<Tensor> disc_targets;
  std::vector<Tensor> disc_z, vfe_z;                // realized latent values
  Tensor query_uniforms, kl_uniforms;
  Tensor final_disc_uniforms, final_disc_targets;
  Tensor final_disc_z;
};

TaskNoiseCache make_noise_cache(const TrainConfig& cfg, const Tensor& enc_params,
                                const TaskBatch& task, const StreamKey& key);

// Eq.-(21) task free energy on a fixed latent batch: the likelihood part
// drops constant normalisers (reported NLL adds them back).
double vfe(const TrainConfig& cfg, const Tensor& lambda, const Tensor& omega,
           const TaskBatch& task, const Tensor& z_values);

struct EStepResult {
  Tensor lambda;
  Tensor omega;
  LatentNoiseParams noise;
};

// Alg.-1 steps 7..17: lambda starts at theta, omega at omega0, then eta
// alternations of discriminator ascent and VFE descent. Never mutates its
// inputs.
EStepResult e_step(const TrainConfig& cfg, const Tensor& theta, const Tensor& omega0,
                   const TaskBatch& task, const TaskNoiseCache& cache);

// Clipped empirical query loss (Eq. 12) for an adapted lambda.
double query_loss(const TrainConfig& cfg, const Tensor& lambda, const TaskBatch& task,
                  const Tensor& z_values);

// Per-(theta sample, task) outcome feeding the M-step.
struct UnitOutcome {
  double emp_loss = 0.0;
  double kl_hat = 0.0;
  double vfe_final = 0.0;
  Tensor g_lhat_psi, g_kl_psi;  // d/d(theta) routed to psi
  Tensor g_lhat_phi, g_kl_phi;
  Tensor g_disc_meta;
  Tensor predictions;  // regression: (l_v, m_v) draws; classification: (m_v, C) probs
};

UnitOutcome run_unit(const TrainConfig& cfg, const Tensor& theta, const Tensor& omega0,
                     const Tensor& enc_params, const TaskBatch& task, const TaskNoiseCache& cache);

struct TaskAggregate {
  double emp_loss = 0.0;  // K-averaged
  double kl_task = 0.0;
  double vfe = 0.0;
  Tensor g_lhat_psi, g_kl_psi, g_lhat_phi, g_kl_phi, g_disc;  // K-summed
  std::size_t m_v = 0;
};

// Alg.-1 steps 24..26 plus bound assembly. Updates psi on the simplified
// M-step objective, phi_enc on (Lhat + Ri), omega0 by discriminator ascent.
BoundReport m_step(MetaState& state, const std::vector<TaskAggregate>& tasks,
                   const TrainConfig& cfg);

struct IterationStats {
  BoundReport report;
  double nll = 0.0;  // reporting NLL, constants included
};

using IterationCallback =
    std::function<void(std::size_t iteration, const IterationStats& stats, MetaState& state)>;

// Alg. 1: runs from state.iteration to cfg.iterations. The callback fires
// once per meta-iteration after the M-step.
void train(const TrainConfig& cfg, const TaskEnvironment& env, MetaState& state,
           const IterationCallback& cb = nullptr);

struct Predictive {
  Tensor sample_matrix;  // regression: (nq, K*l_v) per-draw means
  Tensor mean, stddev;   // regression summaries (nq)
  Tensor probs;          // classification: (nq, C), rows on the simplex
};

// Alg. 2: adapt on the support set per theta sample, then average the
// predictive distribution over l_v draws and K theta samples.
Predictive predict(const TrainConfig& cfg, const MetaState& state, const TaskBatch& task,
                   const Tensor& x_query, std::uint64_t episode_id);

// One bound-validity trial: adapt to each task of a fresh meta-sample,
// assemble the bound from the observed query sets, and compare it against
// the oracle estimate of the true expected clipped query loss (the large
// hidden query sets). Tasks must carry oracle sets.
struct BoundTrialResult {
  BoundReport report;
  double true_loss = 0.0;  // oracle estimate, averaged over tasks
  bool holds = false;
};

BoundTrialResult bound_validity_trial(const TrainConfig& cfg, const MetaState& state,
                                      const std::vector<TaskBatch>& tasks,
                                      std::uint64_t trial_id);

}  // namespace simpa
