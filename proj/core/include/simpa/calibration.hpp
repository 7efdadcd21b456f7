#pragma once

#include <span>
#include <utility>
#include <vector>

#include "simpa/tensor.hpp"

namespace simpa {

struct ReliabilityCurve {
  std::vector<double> levels;       // probe probabilities / mean confidences
  std::vector<double> observed;     // empirical coverage / accuracy
  std::vector<double> bin_weights;  // sample mass per level or bin, sums to 1
};

// Mean negative log probability of the true class. A zero predicted
// probability yields +inf; nothing is clamped.
double nll(const Tensor& probs, std::span<const int> labels);

// Mean NLL under an equal-weight mixture of Gaussians centred at the
// predictive samples (one row of samples per evaluation point).
double nll_gaussian_mixture(const Tensor& samples, const Tensor& targets, double component_sigma);

// Linear-interpolation (order-statistics) quantile of one predictive sample
// row; values need not be sorted.
double sample_quantile(std::span<const double> values, double p);

// Quantile calibration for regression: observed(p) is the fraction of
// targets lying below the per-point predictive p-quantile.
ReliabilityCurve regression_reliability(const Tensor& samples, const Tensor& targets,
                                        std::span<const double> levels);

// Equal-width confidence binning over the max predicted probability.
// Occupied bins report mean confidence, accuracy and mass; empty bins carry
// no weight and are dropped.
ReliabilityCurve classification_reliability(const Tensor& probs, std::span<const int> labels,
                                            std::size_t n_bins = 10);

// ECE = sum_b w_b |obs_b - level_b|, MCE = max_b |obs_b - level_b|.
std::pair<double, double> ece_mce(const ReliabilityCurve& curve);

}  // namespace simpa
