#pragma once

#include "simpa/networks.hpp"
#include "simpa/rng.hpp"
#include "simpa/tensor.hpp"

namespace simpa {

// Diagonal-Gaussian hyper-posterior q(theta; psi) = N(psi, sigma_theta^2 I)
// with hyper-prior p(theta) = N(mu0 * 1, sigma0^2 I).
struct HyperPosterior {
  Tensor psi;
  double sigma_theta = 1e-8;
  double prior_mu0 = 0.0;
  double prior_sigma0 = 10.0;

  void validate() const {
    if (!(sigma_theta > 0.0)) throw NumericError("HyperPosterior: sigma_theta must be > 0");
    if (!(prior_sigma0 > 0.0)) throw NumericError("HyperPosterior: prior_sigma0 must be > 0");
  }
};

enum class NoiseFamily { kBeta, kGaussian };

// theta = psi + sigma_theta * eps, eps ~ N(0, I); d(theta)/d(psi) = I.
Tensor sample_theta(const HyperPosterior& h, RngStream& rng);

// Closed-form KL[q(theta; psi) || p(theta)] for the diagonal Gaussians.
double gaussian_kl(const HyperPosterior& h);

// L x Z matrix of open-interval uniforms for reparameterised sampling.
Tensor draw_uniforms(RngStream& rng, std::size_t rows, std::size_t cols);

// Value-level Beta draw through the inverse CDF (the graph form lives in
// ad::beta_sample and shares the exact same path).
Tensor sample_beta(const LatentNoiseParams& params, RngStream& rng, std::size_t n_samples);

// Latent draw dispatching on the configured family. For the Gaussian family
// the (alpha, beta) vectors act as (location, scale).
ad::Var sample_latent_graph(NoiseFamily family, ad::Var alpha, ad::Var beta,
                            const Tensor& uniforms);

}  // namespace simpa
