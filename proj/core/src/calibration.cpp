#include "simpa/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace simpa {

double nll(const Tensor& probs, std::span<const int> labels) {
  if (probs.rank() != 2 || probs.rows() != labels.size() || labels.empty()) {
    throw std::invalid_argument("nll: probs must be (n, C) with matching labels");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= probs.cols()) {
      throw std::invalid_argument("nll: label out of range");
    }
    const double p = probs.at(i, static_cast<std::size_t>(y));
    if (p <= 0.0) return std::numeric_limits<double>::infinity();
    acc += -std::log(p);
  }
  return acc / static_cast<double>(labels.size());
}

double nll_gaussian_mixture(const Tensor& samples, const Tensor& targets, double component_sigma) {
  if (samples.rank() != 2 || samples.rows() != targets.size()) {
    throw std::invalid_argument("nll_gaussian_mixture: samples must be (n, S) with n targets");
  }
  if (!(component_sigma > 0.0)) {
    throw std::invalid_argument("nll_gaussian_mixture: sigma must be > 0");
  }
  const double log_norm = -0.5 * std::log(2.0 * 3.14159265358979323846) - std::log(component_sigma);
  const double inv_2s2 = 1.0 / (2.0 * component_sigma * component_sigma);
  const std::size_t s = samples.cols();
  double acc = 0.0;
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    // log-sum-exp over mixture components
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < s; ++j) {
      const double d = targets[i] - samples.at(i, j);
      mx = std::max(mx, -d * d * inv_2s2);
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < s; ++j) {
      const double d = targets[i] - samples.at(i, j);
      sum += std::exp(-d * d * inv_2s2 - mx);
    }
    acc += -(log_norm + mx + std::log(sum / static_cast<double>(s)));
  }
  return acc / static_cast<double>(samples.rows());
}

double sample_quantile(std::span<const double> values, double p) {
  if (values.empty()) throw std::invalid_argument("sample_quantile: empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  if (p <= 0.0) return sorted.front();
  if (p >= 1.0) return sorted.back();
  const double h = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

ReliabilityCurve regression_reliability(const Tensor& samples, const Tensor& targets,
                                        std::span<const double> levels) {
  if (samples.rank() != 2 || samples.rows() != targets.size()) {
    throw std::invalid_argument("regression_reliability: samples must be (n, S) with n targets");
  }
  if (samples.rows() < 30) {
    throw std::invalid_argument("regression_reliability: need at least 30 evaluation points");
  }
  const std::size_t n = samples.rows();
  ReliabilityCurve curve;
  for (double p : levels) {
    std::size_t below = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double q =
          sample_quantile(std::span<const double>(samples.data() + i * samples.cols(),
                                                  samples.cols()),
                          p);
      if (targets[i] <= q) ++below;
    }
    curve.levels.push_back(p);
    curve.observed.push_back(static_cast<double>(below) / static_cast<double>(n));
    curve.bin_weights.push_back(1.0 / static_cast<double>(levels.size()));
  }
  return curve;
}

ReliabilityCurve classification_reliability(const Tensor& probs, std::span<const int> labels,
                                            std::size_t n_bins) {
  if (probs.rank() != 2 || probs.rows() != labels.size() || labels.empty()) {
    throw std::invalid_argument("classification_reliability: probs must be (n, C) with labels");
  }
  if (n_bins == 0) throw std::invalid_argument("classification_reliability: n_bins must be > 0");
  std::vector<double> conf_sum(n_bins, 0.0);
  std::vector<double> acc_sum(n_bins, 0.0);
  std::vector<std::size_t> count(n_bins, 0);
  const std::size_t n = probs.rows();
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t arg = 0;
    double conf = probs.at(i, 0);
    for (std::size_t c = 1; c < probs.cols(); ++c) {
      if (probs.at(i, c) > conf) {
        conf = probs.at(i, c);
        arg = c;
      }
    }
    std::size_t b = static_cast<std::size_t>(conf * static_cast<double>(n_bins));
    if (b >= n_bins) b = n_bins - 1;
    conf_sum[b] += conf;
    acc_sum[b] += (static_cast<std::size_t>(labels[i]) == arg) ? 1.0 : 0.0;
    ++count[b];
  }
  ReliabilityCurve curve;
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (count[b] == 0) continue;
    curve.levels.push_back(conf_sum[b] / static_cast<double>(count[b]));
    curve.observed.push_back(acc_sum[b] / static_cast<double>(count[b]));
    curve.bin_weights.push_back(static_cast<double>(count[b]) / static_cast<double>(n));
  }
  return curve;
}

std::pair<double, double> ece_mce(const ReliabilityCurve& curve) {
  double ece = 0.0, mce = 0.0;
  for (std::size_t b = 0; b < curve.levels.size(); ++b) {
    const double gap = std::fabs(curve.observed[b] - curve.levels[b]);
    ece += curve.bin_weights[b] * gap;
    mce = std::max(mce, gap);
  }
  return {ece, mce};
}

}  // namespace simpa
