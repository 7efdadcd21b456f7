#pragma once

#include "simpa/networks.hpp"
#include "simpa/rng.hpp"
#include "simpa/stochastic.hpp"

namespace simpa {

struct DiscriminatorConfig {
  std::size_t steps = 5;        // ascent steps
  double lr = 1e-4;             // gamma_t
  std::size_t l_d = 128;        // latent draws per step
  bool label_smoothing = true;  // real ~ U[0.95, 1], fake = 1 - real
};

// Smoothed real-class targets for one ascent step (all ones when smoothing
// is disabled).
Tensor draw_real_targets(RngStream& rng, std::size_t n, bool smoothing);

// Discriminator objective (to be maximised): mean over prior samples of
// [t ln D + (1-t) ln(1-D)] plus mean over posterior samples of
// [(1-t) ln D + t ln(1-D)], in the overflow-safe log-sigmoid form
// ln D = -softplus(-V), ln(1-D) = -softplus(V).
ad::Var discriminator_loss_on_samples(const MlpSpec& disc, ad::Var omega, ad::Var w_prior,
                                      ad::Var w_posterior, const Tensor& real_targets);

// Spec-level objective: both classes are generated from the same latent
// batch, prior weights through theta and posterior weights through lambda.
ad::Var discriminator_loss(const Architectures& arch, ad::Var omega, ad::Var gen_theta,
                           ad::Var gen_lambda, ad::Var z_batch, const Tensor& real_targets);

// One first-order ascent step on the discriminator parameters; gradients
// flow only into omega (the generated samples are constants).
Tensor discriminator_ascent_step(const Architectures& arch, const Tensor& omega,
                                 const Tensor& theta, const Tensor& lambda,
                                 const Tensor& z_values, const Tensor& real_targets, double lr);

// Task adaptation: cfg.steps ascent steps at cfg.lr from omega0, drawing a
// fresh latent batch from the task's noise distribution each step.
Tensor adapt_discriminator(const Architectures& arch, const Tensor& omega0, const Tensor& theta,
                           const Tensor& lambda, const LatentNoiseParams& noise,
                           NoiseFamily family, const DiscriminatorConfig& cfg,
                           RngStream& noise_rng, RngStream& label_rng);

// Monte-Carlo KL estimate, mean of -V over posterior samples. The graph
// form keeps the gradient path into lambda (and into z when z carries one);
// omega is a constant here.
ad::Var estimate_kl_graph(const Architectures& arch, ad::Var gen_lambda, ad::Var omega,
                          ad::Var z_batch);
double estimate_kl(const Architectures& arch, const Tensor& gen_lambda, const Tensor& omega,
                   const Tensor& z_values);

// Same estimator applied to raw weight samples (used by oracle tests with
// proxy distributions in place of the generator).
double estimate_kl_on_samples(const MlpSpec& disc, const Tensor& omega, const Tensor& w_posterior);

}  // namespace simpa
