#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "simpa/tape.hpp"

namespace simpa {

enum class Activation { kIdentity, kRelu, kTanh, kSigmoid, kSoftmax, kSoftplus };

struct MlpSpec {
  std::vector<std::size_t> layer_widths;  // input width first, output width last
  Activation hidden_activation = Activation::kRelu;
  Activation output_activation = Activation::kIdentity;

  std::size_t input_width() const { return layer_widths.front(); }
  std::size_t output_width() const { return layer_widths.back(); }
  std::size_t param_count() const;
  void validate() const;
};

// Forward through an MLP whose weights and biases are packed into a single
// flat parameter vector, layer by layer (W row-major, then b).
// x is (n, input_width); result is (n, output_width).
ad::Var mlp_forward(const MlpSpec& spec, ad::Var flat_params, ad::Var x);

// Latent noise distribution parameters: two positive concentration vectors
// of length Z (Beta), or (location, scale) when the Gaussian family is
// selected at the sampling site.
struct LatentNoiseParams {
  Tensor alpha;
  Tensor beta;
};

// The four networks of one experiment plus the latent dimension.
struct Architectures {
  MlpSpec base;
  MlpSpec generator;
  MlpSpec discriminator;
  MlpSpec encoder;
  std::size_t latent_dim = 0;

  void validate() const;
};

// Regression default: base 1-40-40-1 ReLU, Z = 40, encoder mirroring the
// base with 2Z outputs, generator hidden 128/512 with tanh output,
// discriminator hidden 512/128/40.
Architectures regression_architectures();

// Classification over precomputed feature vectors: base with hidden 128/32,
// encoder hidden 256/256 with 2Z outputs, Z = 128, generator hidden 256/512,
// discriminator hidden 512/256/128. Generator output stays tanh.
Architectures classification_architectures(std::size_t input_dim, std::size_t n_classes);

// Single-weight-vector forward pass of the base network (w is rank-1).
ad::Var base_forward(const MlpSpec& base, ad::Var w, ad::Var x);

// Batched generation: z (L, Z) -> base weights (L, P), componentwise in the
// generator's tanh range.
ad::Var generate_weights(const MlpSpec& generator, ad::Var z, ad::Var gen_params);

struct Discriminated {
  ad::Var v;  // logits (L, 1)
  ad::Var d;  // sigmoid(v)
};
Discriminated discriminate(const MlpSpec& discriminator, ad::Var w, ad::Var omega);

// Pooling task encoder (graph form): mean of per-example encodings, then
// softplus with a small positive floor, split into the two concentration
// vectors. Returns (alpha, beta) as rank-1 vars of length Z.
std::pair<ad::Var, ad::Var> encode_task_graph(const MlpSpec& encoder, std::size_t latent_dim,
                                              ad::Var x_support, ad::Var enc_params);

// Value-level convenience used outside of gradient contexts.
LatentNoiseParams encode_task(const MlpSpec& encoder, std::size_t latent_dim,
                              const Tensor& x_support, const Tensor& enc_params);

// Glorot-uniform style initialisation of a packed MLP parameter vector.
Tensor init_mlp_params(const MlpSpec& spec, class RngStream& rng);

}  // namespace simpa
