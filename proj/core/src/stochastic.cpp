#include "simpa/stochastic.hpp"

#include <cmath>

#include "simpa/beta_dist.hpp"

namespace simpa {

Tensor sample_theta(const HyperPosterior& h, RngStream& rng) {
  h.validate();
  Tensor theta(h.psi.shape());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    theta[i] = h.psi[i] + h.sigma_theta * rng.normal();
  }
  return theta;
}

double gaussian_kl(const HyperPosterior& h) {
  h.validate();
  const double log_ratio = std::log(h.prior_sigma0 / h.sigma_theta);
  const double var_term = h.sigma_theta * h.sigma_theta;
  const double inv_2s0 = 1.0 / (2.0 * h.prior_sigma0 * h.prior_sigma0);
  double kl = 0.0;
  for (std::size_t d = 0; d < h.psi.size(); ++d) {
    const double diff = h.psi[d] - h.prior_mu0;
    kl += log_ratio + (var_term + diff * diff) * inv_2s0 - 0.5;
  }
  return kl;
}

Tensor draw_uniforms(RngStream& rng, std::size_t rows, std::size_t cols) {
  Tensor u({rows, cols});
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = rng.uniform();
  return u;
}

Tensor sample_beta(const LatentNoiseParams& params, RngStream& rng, std::size_t n_samples) {
  const std::size_t z_dim = params.alpha.size();
  if (params.beta.size() != z_dim) throw ShapeError("sample_beta: concentration length mismatch");
  for (std::size_t d = 0; d < z_dim; ++d) {
    if (!(params.alpha[d] > 0.0) || !(params.beta[d] > 0.0)) {
      throw NumericError("sample_beta: concentration underflow");
    }
  }
  Tensor z({n_samples, z_dim});
  for (std::size_t l = 0; l < n_samples; ++l) {
    for (std::size_t d = 0; d < z_dim; ++d) {
      z.at(l, d) = inc_beta_inv(params.alpha[d], params.beta[d], rng.uniform());
    }
  }
  return z;
}

ad::Var sample_latent_graph(NoiseFamily family, ad::Var alpha, ad::Var beta,
                            const Tensor& uniforms) {
  if (family == NoiseFamily::kBeta) {
    return ad::beta_sample(alpha, beta, uniforms);
  }
  // Gaussian family: z = alpha + beta * eps with eps derived from the same
  // uniform noise by Box-Muller (pairwise).
  Tensor eps(uniforms.shape());
  const std::size_t n = uniforms.size();
  for (std::size_t i = 0; i + 1 < n; i += 2) {
    const double r = std::sqrt(-2.0 * std::log(uniforms[i]));
    const double a = 6.283185307179586476925286766559 * uniforms[i + 1];
    eps[i] = r * std::cos(a);
    eps[i + 1] = r * std::sin(a);
  }
  if (n % 2 == 1) {
    eps[n - 1] = std::sqrt(-2.0 * std::log(uniforms[n - 1])) *
                 std::cos(6.283185307179586476925286766559 * 0.5);
  }
  const std::size_t rows = uniforms.rows();
  ad::Var loc = ad::tile_rows(alpha, rows);
  ad::Var scl = ad::tile_rows(beta, rows);
  return ad::add(loc, ad::mul(scl, alpha.tape->leaf(std::move(eps))));
}

}  // namespace simpa
