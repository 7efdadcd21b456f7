#include "simpa/networks.hpp"

#include <cmath>

#include "simpa/rng.hpp"

namespace simpa {

std::size_t MlpSpec::param_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < layer_widths.size(); ++i) {
    n += layer_widths[i] * layer_widths[i + 1] + layer_widths[i + 1];
  }
  return n;
}

void MlpSpec::validate() const {
  if (layer_widths.size() < 2) throw ShapeError("MlpSpec: need at least input and output layer");
  for (std::size_t w : layer_widths) {
    if (w == 0) throw ShapeError("MlpSpec: zero-width layer");
  }
}

void Architectures::validate() const {
  base.validate();
  generator.validate();
  discriminator.validate();
  encoder.validate();
  if (latent_dim == 0) throw ShapeError("Architectures: latent_dim must be positive");
  if (generator.input_width() != latent_dim)
    throw ShapeError("Architectures: generator input must match latent_dim");
  if (generator.output_width() != base.param_count())
    throw ShapeError("Architectures: generator output must match base parameter count");
  if (discriminator.input_width() != base.param_count())
    throw ShapeError("Architectures: discriminator input must match base parameter count");
  if (encoder.output_width() != 2 * latent_dim)
    throw ShapeError("Architectures: encoder output must be 2*latent_dim");
}

namespace {

ad::Var apply_activation(ad::Var h, Activation act) {
  switch (act) {
    case Activation::kIdentity: return h;
    case Activation::kRelu: return ad::relu(h);
    case Activation::kTanh: return ad::tanh(h);
    case Activation::kSigmoid: return ad::sigmoid(h);
    case Activation::kSoftmax: return ad::exp(ad::log_softmax(h));
    case Activation::kSoftplus: return ad::softplus(h);
  }
  return h;
}

}  // namespace

ad::Var mlp_forward(const MlpSpec& spec, ad::Var flat_params, ad::Var x) {
  spec.validate();
  const Tensor& pv = flat_params.value();
  if (pv.rank() != 1 || pv.size() != spec.param_count()) {
    throw ShapeError("mlp_forward: parameter vector has wrong length");
  }
  if (x.value().rank() != 2 || x.value().cols() != spec.input_width()) {
    throw ShapeError("mlp_forward: input shape " + x.value().shape_str() + " does not match width " +
                     std::to_string(spec.input_width()));
  }
  ad::Var h = x;
  std::size_t off = 0;
  const std::size_t n_layers = spec.layer_widths.size() - 1;
  for (std::size_t i = 0; i < n_layers; ++i) {
    const std::size_t in_w = spec.layer_widths[i];
    const std::size_t out_w = spec.layer_widths[i + 1];
    ad::Var w = ad::reshape(ad::slice(flat_params, off, in_w * out_w), {in_w, out_w});
    off += in_w * out_w;
    ad::Var b = ad::slice(flat_params, off, out_w);
    off += out_w;
    h = ad::add_bias(ad::matmul(h, w), b);
    h = apply_activation(h, i + 1 < n_layers ? spec.hidden_activation : spec.output_activation);
  }
  return h;
}

Architectures regression_architectures() {
  Architectures a;
  a.base = {{1, 40, 40, 1}, Activation::kRelu, Activation::kIdentity};
  a.latent_dim = 40;
  a.encoder = {{1, 40, 40, 80}, Activation::kRelu, Activation::kIdentity};
  a.generator = {{40, 128, 512, a.base.param_count()}, Activation::kRelu, Activation::kTanh};
  a.discriminator = {{a.base.param_count(), 512, 128, 40, 1}, Activation::kRelu,
                     Activation::kIdentity};
  a.validate();
  return a;
}

Architectures classification_architectures(std::size_t input_dim, std::size_t n_classes) {
  Architectures a;
  a.base = {{input_dim, 128, 32, n_classes}, Activation::kRelu, Activation::kIdentity};
  a.latent_dim = 128;
  a.encoder = {{input_dim, 256, 256, 256}, Activation::kRelu, Activation::kIdentity};
  a.generator = {{128, 256, 512, a.base.param_count()}, Activation::kRelu, Activation::kTanh};
  a.discriminator = {{a.base.param_count(), 512, 256, 128, 1}, Activation::kRelu,
                     Activation::kIdentity};
  a.validate();
  return a;
}

ad::Var base_forward(const MlpSpec& base, ad::Var w, ad::Var x) { return mlp_forward(base, w, x); }

ad::Var generate_weights(const MlpSpec& generator, ad::Var z, ad::Var gen_params) {
  return mlp_forward(generator, gen_params, z);
}

Discriminated discriminate(const MlpSpec& discriminator, ad::Var w, ad::Var omega) {
  ad::Var v = mlp_forward(discriminator, omega, w);
  return {v, ad::sigmoid(v)};
}

std::pair<ad::Var, ad::Var> encode_task_graph(const MlpSpec& encoder, std::size_t latent_dim,
                                              ad::Var x_support, ad::Var enc_params) {
  const Tensor& xv = x_support.value();
  if (xv.rank() != 2 || xv.rows() == 0) throw ShapeError("encode_task: empty support set");
  ad::Var enc = mlp_forward(encoder, enc_params, x_support);  // (m, 2Z)
  const std::size_t m = xv.rows();
  ad::Var ones = x_support.tape->leaf(Tensor::full({1, m}, 1.0 / static_cast<double>(m)));
  ad::Var pooled = ad::reshape(ad::matmul(ones, enc), {2 * latent_dim});
  // softplus + floor keeps the Beta concentrations strictly positive
  ad::Var positive = ad::add_scalar(ad::softplus(pooled), 1e-4);
  ad::Var alpha = ad::slice(positive, 0, latent_dim);
  ad::Var beta = ad::slice(positive, latent_dim, latent_dim);
  return {alpha, beta};
}

LatentNoiseParams encode_task(const MlpSpec& encoder, std::size_t latent_dim,
                              const Tensor& x_support, const Tensor& enc_params) {
  ad::Tape tape;
  auto [a, b] = encode_task_graph(encoder, latent_dim, tape.leaf(x_support), tape.leaf(enc_params));
  return {a.value(), b.value()};
}

Tensor init_mlp_params(const MlpSpec& spec, RngStream& rng) {
  spec.validate();
  Tensor out({spec.param_count()});
  std::size_t off = 0;
  for (std::size_t i = 0; i + 1 < spec.layer_widths.size(); ++i) {
    const std::size_t in_w = spec.layer_widths[i];
    const std::size_t out_w = spec.layer_widths[i + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(in_w + out_w));
    for (std::size_t j = 0; j < in_w * out_w; ++j) {
      out[off + j] = (2.0 * rng.uniform() - 1.0) * bound;
    }
    off += in_w * out_w;
    // biases start at zero
    off += out_w;
  }
  return out;
}

}  // namespace simpa
