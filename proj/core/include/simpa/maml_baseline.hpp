#pragma once

#include <functional>

#include "simpa/adam.hpp"
#include "simpa/meta_learning.hpp"

namespace simpa {

// Deterministic MAML-style baseline: one base network adapted directly by
// gradient descent, no generator, discriminator, or bound.
struct MamlState {
  Tensor w0;
  AdamState opt;
  std::size_t iteration = 0;
};

MamlState init_maml_state(const TrainConfig& cfg);

// Mean per-point loss of a weight vector on (x, y): MSE for regression,
// softmax cross-entropy for classification.
double maml_loss(const TrainConfig& cfg, const Tensor& w, const Tensor& x, const Tensor& y,
                 bool classification);

// maml_inner_steps gradient steps at maml_inner_lr on the support loss.
Tensor maml_adapt(const TrainConfig& cfg, const Tensor& w0, const TaskBatch& task);

// Point predictions of an adapted network.
Tensor maml_point_predict(const TrainConfig& cfg, const Tensor& w, const Tensor& x);

struct MamlIterationStats {
  double query_loss = 0.0;  // post-adaptation, averaged over the meta-batch
  double nll = 0.0;         // unit-variance Gaussian readout for regression
};

using MamlCallback =
    std::function<void(std::size_t iteration, const MamlIterationStats&, MamlState&)>;

void train_maml(const TrainConfig& cfg, const TaskEnvironment& env, MamlState& state,
                const MamlCallback& cb = nullptr);

}  // namespace simpa
