#include "simpa/kl_estimation.hpp"

namespace simpa {
namespace {

// t*ln(D) + (1-t)*ln(1-D) per row, with V the logit column:
// = -t*softplus(-V) - (1-t)*softplus(V)
ad::Var smoothed_log_prob(ad::Var v, const Tensor& targets) {
  ad::Tape& t = *v.tape;
  const std::size_t n = v.value().rows();
  if (targets.size() != n) throw ShapeError("discriminator targets length mismatch");
  Tensor tcol({n, 1});
  Tensor ucol({n, 1});
  for (std::size_t i = 0; i < n; ++i) {
    tcol[i] = targets[i];
    ucol[i] = 1.0 - targets[i];
  }
  ad::Var ln_d = ad::neg(ad::softplus(ad::neg(v)));
  ad::Var ln_1md = ad::neg(ad::softplus(v));
  return ad::add(ad::mul(t.leaf(std::move(tcol)), ln_d), ad::mul(t.leaf(std::move(ucol)), ln_1md));
}

}  // namespace

Tensor draw_real_targets(RngStream& rng, std::size_t n, bool smoothing) {
  Tensor t({n});
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = smoothing ? 0.95 + 0.05 * rng.uniform() : 1.0;
  }
  return t;
}

ad::Var discriminator_loss_on_samples(const MlpSpec& disc, ad::Var omega, ad::Var w_prior,
                                      ad::Var w_posterior, const Tensor& real_targets) {
  ad::Var v_prior = mlp_forward(disc, omega, w_prior);
  ad::Var v_post = mlp_forward(disc, omega, w_posterior);
  Tensor fake_targets({real_targets.size()});
  for (std::size_t i = 0; i < fake_targets.size(); ++i) fake_targets[i] = 1.0 - real_targets[i];
  ad::Var prior_term = ad::mean(smoothed_log_prob(v_prior, real_targets));
  ad::Var post_term = ad::mean(smoothed_log_prob(v_post, fake_targets));
  return ad::add(prior_term, post_term);
}

ad::Var discriminator_loss(const Architectures& arch, ad::Var omega, ad::Var gen_theta,
                           ad::Var gen_lambda, ad::Var z_batch, const Tensor& real_targets) {
  ad::Var w_prior = generate_weights(arch.generator, z_batch, gen_theta);
  ad::Var w_post = generate_weights(arch.generator, z_batch, gen_lambda);
  return discriminator_loss_on_samples(arch.discriminator, omega, w_prior, w_post, real_targets);
}

Tensor discriminator_ascent_step(const Architectures& arch, const Tensor& omega,
                                 const Tensor& theta, const Tensor& lambda,
                                 const Tensor& z_values, const Tensor& real_targets, double lr) {
  ad::Tape tape;
  ad::Var om = tape.leaf(omega);
  ad::Var loss = discriminator_loss(arch, om, tape.leaf(theta), tape.leaf(lambda),
                                    tape.leaf(z_values), real_targets);
  Tensor g = ad::grad(loss, {om})[0].value();
  Tensor next(omega.shape());
  for (std::size_t i = 0; i < next.size(); ++i) next[i] = omega[i] + lr * g[i];
  if (!next.all_finite()) throw NumericError("discriminator ascent diverged");
  return next;
}

Tensor adapt_discriminator(const Architectures& arch, const Tensor& omega0, const Tensor& theta,
                           const Tensor& lambda, const LatentNoiseParams& noise,
                           NoiseFamily family, const DiscriminatorConfig& cfg,
                           RngStream& noise_rng, RngStream& label_rng) {
  Tensor omega = omega0;
  for (std::size_t s = 0; s < cfg.steps; ++s) {
    Tensor u = draw_uniforms(noise_rng, cfg.l_d, arch.latent_dim);
    Tensor z;
    {
      ad::Tape tape;
      ad::Var zv = sample_latent_graph(family, tape.leaf(noise.alpha), tape.leaf(noise.beta), u);
      z = zv.value();
    }
    Tensor targets = draw_real_targets(label_rng, cfg.l_d, cfg.label_smoothing);
    omega = discriminator_ascent_step(arch, omega, theta, lambda, z, targets, cfg.lr);
  }
  return omega;
}

ad::Var estimate_kl_graph(const Architectures& arch, ad::Var gen_lambda, ad::Var omega,
                          ad::Var z_batch) {
  ad::Var w = generate_weights(arch.generator, z_batch, gen_lambda);
  ad::Var v = mlp_forward(arch.discriminator, omega, w);
  return ad::neg(ad::mean(v));
}

double estimate_kl(const Architectures& arch, const Tensor& gen_lambda, const Tensor& omega,
                   const Tensor& z_values) {
  ad::Tape tape;
  return estimate_kl_graph(arch, tape.leaf(gen_lambda), tape.leaf(omega), tape.leaf(z_values))
      .scalar();
}

double estimate_kl_on_samples(const MlpSpec& disc, const Tensor& omega,
                              const Tensor& w_posterior) {
  ad::Tape tape;
  ad::Var v = mlp_forward(disc, tape.leaf(omega), tape.leaf(w_posterior));
  return ad::neg(ad::mean(v)).scalar();
}

}  // namespace simpa
