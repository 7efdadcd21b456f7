#pragma once

#include <optional>
#include <string>
#include <vector>

#include "simpa/rng.hpp"
#include "simpa/tensor.hpp"

namespace simpa {

enum class TaskKind { kSinusoid, kLinear, kClassification };

// One few-shot episode. Regression targets are (m, 1); classification
// targets hold class indices in (m, 1). The oracle set is a large hidden
// query sample for bound-validity evaluation and is empty unless requested.
struct TaskBatch {
  TaskKind kind = TaskKind::kSinusoid;
  Tensor support_x, support_y;
  Tensor query_x, query_y;
  Tensor oracle_x, oracle_y;
  std::size_t n_classes = 0;

  std::size_t m_support() const { return support_x.rows(); }
  std::size_t m_query() const { return query_x.rows(); }
  bool has_oracle() const { return oracle_x.size() > 0; }
  bool is_classification() const { return kind == TaskKind::kClassification; }
};

struct RegressionTaskSpec {
  TaskKind kind = TaskKind::kSinusoid;  // sinusoid or linear
  double amplitude = 1.0;               // A in [0.1, 5]
  double phase = 0.0;                   // Phi in [0, pi]
  double slope = 0.0;                   // a in [-5, 5]
  double intercept = 0.0;               // b in [-5, 5]
  double noise_sigma = 0.3;
};

RegressionTaskSpec sample_regression_spec(RngStream& rng);
double regression_mean_value(const RegressionTaskSpec& spec, double x);  // noiseless y(x)
TaskBatch make_regression_task(const RegressionTaskSpec& spec, RngStream& rng, std::size_t m_t,
                               std::size_t m_v, std::size_t oracle_n = 0);
TaskBatch sample_regression_task(RngStream& rng, std::size_t m_t = 5, std::size_t m_v = 15,
                                 std::size_t oracle_n = 0);

// Synthetic N-way k-shot classification: per episode, N Gaussian class
// centers with unit-covariance samples and shuffled episode labels.
TaskBatch sample_blob_classification_task(RngStream& rng, std::size_t n_way, std::size_t k_shot,
                                          std::size_t m_v_per_class, std::size_t dim,
                                          double center_sigma = 5.0);

// Precomputed-feature container: binary blocks plus a JSON sidecar that
// carries the class names (see metrics_io for the exact layout).
struct FeatureDataset {
  std::size_t dim = 0;
  std::vector<std::vector<double>> class_features;  // per class, count*dim row-major
  std::vector<std::string> class_names;

  std::size_t class_count() const { return class_features.size(); }
  std::size_t vectors_in(std::size_t c) const { return class_features[c].size() / dim; }
};

FeatureDataset load_feature_file(const std::string& path);
void save_feature_file(const std::string& path, const FeatureDataset& ds);
TaskBatch sample_feature_episode(const FeatureDataset& ds, RngStream& rng, std::size_t n_way,
                                 std::size_t k_shot, std::size_t m_v_per_class);

// Environment configuration as it appears in experiment configs.
struct EnvConfig {
  std::string kind = "regression";  // regression | blobs | features
  std::size_t m_t = 5;
  std::size_t m_v = 15;
  std::size_t oracle_n = 0;
  std::size_t n_way = 5;
  std::size_t k_shot = 1;
  std::size_t m_v_per_class = 15;
  std::size_t dim = 2;
  double center_sigma = 5.0;
  std::string feature_path;
};

class TaskEnvironment {
 public:
  explicit TaskEnvironment(EnvConfig cfg);

  TaskBatch sample(RngStream& rng) const;
  bool is_classification() const { return cfg_.kind != "regression"; }
  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t query_size() const;
  const EnvConfig& config() const { return cfg_; }

 private:
  EnvConfig cfg_;
  std::optional<FeatureDataset> features_;
};

}  // namespace simpa
