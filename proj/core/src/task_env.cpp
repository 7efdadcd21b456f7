#include "simpa/task_env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "json.hpp"

namespace simpa {

RegressionTaskSpec sample_regression_spec(RngStream& rng) {
  RegressionTaskSpec spec;
  spec.kind = rng.uniform() < 0.5 ? TaskKind::kSinusoid : TaskKind::kLinear;
  spec.amplitude = 0.1 + 4.9 * rng.uniform();
  spec.phase = std::numbers::pi * rng.uniform();
  spec.slope = -5.0 + 10.0 * rng.uniform();
  spec.intercept = -5.0 + 10.0 * rng.uniform();
  return spec;
}

double regression_mean_value(const RegressionTaskSpec& spec, double x) {
  if (spec.kind == TaskKind::kSinusoid) return spec.amplitude * std::sin(x + spec.phase);
  return spec.slope * x + spec.intercept;
}

namespace {

void fill_regression(const RegressionTaskSpec& spec, RngStream& rng, std::size_t n, Tensor* x,
                     Tensor* y) {
  *x = Tensor({n, 1});
  *y = Tensor({n, 1});
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = -5.0 + 10.0 * rng.uniform();
    (*x)[i] = xi;
    (*y)[i] = regression_mean_value(spec, xi) + spec.noise_sigma * rng.normal();
  }
}

}  // namespace

TaskBatch make_regression_task(const RegressionTaskSpec& spec, RngStream& rng, std::size_t m_t,
                               std::size_t m_v, std::size_t oracle_n) {
  TaskBatch task;
  task.kind = spec.kind;
  fill_regression(spec, rng, m_t, &task.support_x, &task.support_y);
  fill_regression(spec, rng, m_v, &task.query_x, &task.query_y);
  if (oracle_n > 0) fill_regression(spec, rng, oracle_n, &task.oracle_x, &task.oracle_y);
  return task;
}

TaskBatch sample_regression_task(RngStream& rng, std::size_t m_t, std::size_t m_v,
                                 std::size_t oracle_n) {
  return make_regression_task(sample_regression_spec(rng), rng, m_t, m_v, oracle_n);
}

TaskBatch sample_blob_classification_task(RngStream& rng, std::size_t n_way, std::size_t k_shot,
                                          std::size_t m_v_per_class, std::size_t dim,
                                          double center_sigma) {
  if (n_way < 2) throw std::invalid_argument("blob task: N must be >= 2");
  if (k_shot < 1) throw std::invalid_argument("blob task: k must be >= 1");
  if (dim < 1) throw std::invalid_argument("blob task: dim must be >= 1");

  std::vector<std::vector<double>> centers(n_way, std::vector<double>(dim));
  for (auto& c : centers)
    for (double& v : c) v = center_sigma * rng.normal();

  // shuffled episode labels
  std::vector<std::size_t> label_of(n_way);
  for (std::size_t i = 0; i < n_way; ++i) label_of[i] = i;
  for (std::size_t i = n_way - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i + 1));
    std::swap(label_of[i], label_of[std::min(j, i)]);
  }

  TaskBatch task;
  task.kind = TaskKind::kClassification;
  task.n_classes = n_way;
  const std::size_t m_t = n_way * k_shot;
  const std::size_t m_v = n_way * m_v_per_class;
  task.support_x = Tensor({m_t, dim});
  task.support_y = Tensor({m_t, 1});
  task.query_x = Tensor({m_v, dim});
  task.query_y = Tensor({m_v, 1});

  std::size_t si = 0, qi = 0;
  for (std::size_t c = 0; c < n_way; ++c) {
    for (std::size_t s = 0; s < k_shot + m_v_per_class; ++s) {
      const bool support = s < k_shot;
      Tensor& xs = support ? task.support_x : task.query_x;
      Tensor& ys = support ? task.support_y : task.query_y;
      const std::size_t row = support ? si++ : qi++;
      for (std::size_t d = 0; d < dim; ++d) {
        xs.at(row, d) = centers[c][d] + rng.normal();
      }
      ys[row] = static_cast<double>(label_of[c]);
    }
  }
  return task;
}

namespace {
constexpr char kFeatureMagic[8] = {'S', 'I', 'M', 'P', 'A', 'F', 'T', '1'};
}

void save_feature_file(const std::string& path, const FeatureDataset& ds) {
  if (ds.class_features.size() != ds.class_names.size()) {
    throw std::invalid_argument("feature dataset: class name count mismatch");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(kFeatureMagic, sizeof(kFeatureMagic));
  const std::uint32_t n_classes = static_cast<std::uint32_t>(ds.class_count());
  const std::uint32_t dim = static_cast<std::uint32_t>(ds.dim);
  out.write(reinterpret_cast<const char*>(&n_classes), 4);
  out.write(reinterpret_cast<const char*>(&dim), 4);
  for (const auto& block : ds.class_features) {
    if (block.size() % ds.dim != 0) throw std::invalid_argument("feature block not dim-aligned");
    const std::uint32_t count = static_cast<std::uint32_t>(block.size() / ds.dim);
    out.write(reinterpret_cast<const char*>(&count), 4);
    out.write(reinterpret_cast<const char*>(block.data()),
              static_cast<std::streamsize>(block.size() * sizeof(double)));
  }
  nlohmann::json side;
  side["classes"] = ds.class_names;
  std::ofstream sj(path + ".json", std::ios::trunc);
  sj << side.dump(2) << "\n";
}

FeatureDataset load_feature_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("feature file not found: " + path);
  char magic[8];
  in.read(magic, 8);
  if (in.gcount() != 8 || std::memcmp(magic, kFeatureMagic, 8) != 0) {
    throw std::runtime_error("feature file: bad magic in " + path);
  }
  std::uint32_t n_classes = 0, dim = 0;
  in.read(reinterpret_cast<char*>(&n_classes), 4);
  in.read(reinterpret_cast<char*>(&dim), 4);
  if (!in || n_classes == 0 || dim == 0) {
    throw std::runtime_error("feature file: malformed header in " + path);
  }
  FeatureDataset ds;
  ds.dim = dim;
  for (std::uint32_t c = 0; c < n_classes; ++c) {
    std::uint32_t count = 0;
    in.read(reinterpret_cast<char*>(&count), 4);
    if (!in) throw std::runtime_error("feature file: truncated class header");
    std::vector<double> block(static_cast<std::size_t>(count) * dim);
    in.read(reinterpret_cast<char*>(block.data()),
            static_cast<std::streamsize>(block.size() * sizeof(double)));
    if (!in) throw std::runtime_error("feature file: truncated class block");
    ds.class_features.push_back(std::move(block));
  }
  std::ifstream sj(path + ".json");
  if (sj) {
    nlohmann::json side = nlohmann::json::parse(sj, nullptr, true, true);
    if (side.contains("classes")) {
      ds.class_names = side["classes"].get<std::vector<std::string>>();
    }
  }
  if (ds.class_names.size() != ds.class_count()) {
    ds.class_names.resize(ds.class_count());
    for (std::size_t c = 0; c < ds.class_count(); ++c) {
      if (ds.class_names[c].empty()) ds.class_names[c] = "class_" + std::to_string(c);
    }
  }
  return ds;
}

TaskBatch sample_feature_episode(const FeatureDataset& ds, RngStream& rng, std::size_t n_way,
                                 std::size_t k_shot, std::size_t m_v_per_class) {
  if (n_way < 2 || n_way > ds.class_count()) {
    throw std::invalid_argument("feature episode: invalid N for dataset");
  }
  const std::size_t need = k_shot + m_v_per_class;

  // choose N distinct classes
  std::vector<std::size_t> order(ds.class_count());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = 0; i < n_way; ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(rng.uniform() * static_cast<double>(order.size() - i));
    std::swap(order[i], order[std::min(j, order.size() - 1)]);
  }

  TaskBatch task;
  task.kind = TaskKind::kClassification;
  task.n_classes = n_way;
  const std::size_t m_t = n_way * k_shot;
  const std::size_t m_v = n_way * m_v_per_class;
  task.support_x = Tensor({m_t, ds.dim});
  task.support_y = Tensor({m_t, 1});
  task.query_x = Tensor({m_v, ds.dim});
  task.query_y = Tensor({m_v, 1});

  std::size_t si = 0, qi = 0;
  for (std::size_t label = 0; label < n_way; ++label) {
    const std::size_t c = order[label];
    const std::size_t avail = ds.vectors_in(c);
    if (avail < need) {
      throw std::runtime_error("feature episode: class " + ds.class_names[c] + " has only " +
                               std::to_string(avail) + " vectors, need " + std::to_string(need));
    }
    std::vector<std::size_t> idx(avail);
    for (std::size_t i = 0; i < avail; ++i) idx[i] = i;
    for (std::size_t i = 0; i < need; ++i) {
      const std::size_t j =
          i + static_cast<std::size_t>(rng.uniform() * static_cast<double>(avail - i));
      std::swap(idx[i], idx[std::min(j, avail - 1)]);
    }
    for (std::size_t s = 0; s < need; ++s) {
      const bool support = s < k_shot;
      Tensor& xs = support ? task.support_x : task.query_x;
      Tensor& ys = support ? task.support_y : task.query_y;
      const std::size_t row = support ? si++ : qi++;
      const double* vec = ds.class_features[c].data() + idx[s] * ds.dim;
      for (std::size_t d = 0; d < ds.dim; ++d) xs.at(row, d) = vec[d];
      ys[row] = static_cast<double>(label);
    }
  }
  return task;
}

TaskEnvironment::TaskEnvironment(EnvConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.kind == "features") {
    features_ = load_feature_file(cfg_.feature_path);
  } else if (cfg_.kind != "regression" && cfg_.kind != "blobs") {
    throw std::invalid_argument("unknown environment kind: " + cfg_.kind);
  }
}

TaskBatch TaskEnvironment::sample(RngStream& rng) const {
  if (cfg_.kind == "regression") {
    return sample_regression_task(rng, cfg_.m_t, cfg_.m_v, cfg_.oracle_n);
  }
  if (cfg_.kind == "blobs") {
    return sample_blob_classification_task(rng, cfg_.n_way, cfg_.k_shot, cfg_.m_v_per_class,
                                           cfg_.dim, cfg_.center_sigma);
  }
  return sample_feature_episode(*features_, rng, cfg_.n_way, cfg_.k_shot, cfg_.m_v_per_class);
}

std::size_t TaskEnvironment::input_dim() const {
  if (cfg_.kind == "regression") return 1;
  if (cfg_.kind == "blobs") return cfg_.dim;
  return features_->dim;
}

std::size_t TaskEnvironment::output_dim() const {
  return is_classification() ? cfg_.n_way : 1;
}

std::size_t TaskEnvironment::query_size() const {
  return is_classification() ? cfg_.n_way * cfg_.m_v_per_class : cfg_.m_v;
}

}  // namespace simpa
