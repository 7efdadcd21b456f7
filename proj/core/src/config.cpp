#include "simpa/config.hpp"

#include <fstream>

namespace simpa {
namespace {

using nlohmann::json;

json regression_preset() {
  return json{
      {"mode", "simpa"},
      {"seed", 0},
      {"iterations", 10000},
      {"checkpoint_every", 1000},
      {"inner_grad_mode", "first"},
      {"noise_family", "beta"},
      {"label_smoothing", true},
      {"out_dir", "runs/regression"},
      {"env", {{"kind", "regression"}, {"m_t", 5}, {"m_v", 15}, {"oracle_n", 0}}},
      {"hyper",
       {{"t_tasks", 2},
        {"k_theta", 4},
        {"l_t", 16},
        {"l_v", 16},
        {"l_d", 128},
        {"eta", 5},
        {"alpha_t", 1e-3},
        {"alpha_v", 1e-4},
        {"gamma_t", 1e-4},
        {"gamma_v", 1e-5},
        {"nu", 1e-4},
        {"delta", 0.01},
        {"tau", 2.0},
        {"sigma_theta", 1e-8},
        {"prior_mu0", 0.0},
        {"prior_sigma0", 10.0}}},
      {"maml", {{"inner_lr", 1e-2}, {"inner_steps", 5}, {"meta_lr", 1e-3}}},
  };
}

json classification_preset() {
  json doc = regression_preset();
  doc["out_dir"] = "runs/classification";
  doc["env"] = {{"kind", "blobs"},   {"n_way", 5},          {"k_shot", 1},
                {"m_v_per_class", 15}, {"dim", 2},            {"center_sigma", 5.0}};
  doc["hyper"]["t_tasks"] = 2;
  doc["hyper"]["k_theta"] = 2;
  doc["hyper"]["l_t"] = 16;
  doc["hyper"]["l_v"] = 16;
  doc["hyper"]["l_d"] = 1024;
  doc["hyper"]["alpha_t"] = 1e-2;
  doc["hyper"]["delta"] = 0.1;
  return doc;
}

json blob_smoke_preset() {
  json doc = classification_preset();
  doc["out_dir"] = "runs/blob-smoke";
  doc["iterations"] = 2000;
  doc["env"] = {{"kind", "blobs"},    {"n_way", 5},           {"k_shot", 1},
                {"m_v_per_class", 15}, {"dim", 4},             {"center_sigma", 10.0}};
  doc["hyper"]["l_t"] = 8;
  doc["hyper"]["l_v"] = 8;
  doc["hyper"]["l_d"] = 64;
  doc["hyper"]["gamma_t"] = 1e-3;
  doc["hyper"]["alpha_v"] = 1e-3;
  doc["hyper"]["nu"] = 1e-3;
  doc["hyper"]["gamma_v"] = 1e-4;
  doc["arch"] = {{"latent_dim", 16},
                 {"base_hidden", {32}},
                 {"encoder_hidden", {32}},
                 {"generator_hidden", {32, 64}},
                 {"discriminator_hidden", {64, 32}}};
  return doc;
}

template <typename T>
T require_field(const json& doc, const std::string& scope, const std::string& name) {
  if (!doc.contains(name)) throw ConfigError(scope.empty() ? name : scope + "." + name, "missing required field");
  try {
    return doc.at(name).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(scope.empty() ? name : scope + "." + name, e.what());
  }
}

template <typename T>
T optional_field(const json& doc, const std::string& scope, const std::string& name, T fallback) {
  if (!doc.contains(name)) return fallback;
  try {
    return doc.at(name).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(scope.empty() ? name : scope + "." + name, e.what());
  }
}

void deep_merge(json& base, const json& overlay) {
  for (auto it = overlay.begin(); it != overlay.end(); ++it) {
    if (it->is_object() && base.contains(it.key()) && base[it.key()].is_object()) {
      deep_merge(base[it.key()], *it);
    } else {
      base[it.key()] = *it;
    }
  }
}

std::vector<std::size_t> widths_with(const std::vector<std::size_t>& hidden, std::size_t in,
                                     std::size_t out) {
  std::vector<std::size_t> w{in};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(out);
  return w;
}

}  // namespace

json preset_json(const std::string& name) {
  if (name == "regression-appendix-d") return regression_preset();
  if (name == "classification-appendix-f") return classification_preset();
  if (name == "blob-smoke") return blob_smoke_preset();
  throw ConfigError("preset", "unknown preset '" + name + "'");
}

RunConfig config_from_json(json doc) {
  if (doc.contains("preset")) {
    json merged = preset_json(doc.at("preset").get<std::string>());
    doc.erase("preset");
    deep_merge(merged, doc);
    doc = std::move(merged);
  }

  RunConfig run;
  TrainConfig& cfg = run.train;
  cfg.mode = require_field<std::string>(doc, "", "mode");
  cfg.seed = require_field<std::uint64_t>(doc, "", "seed");
  cfg.iterations = require_field<std::size_t>(doc, "", "iterations");
  cfg.checkpoint_every = optional_field<std::size_t>(doc, "", "checkpoint_every", 1000);
  run.out_dir = optional_field<std::string>(doc, "", "out_dir", "runs/default");

  const std::string grad_mode = optional_field<std::string>(doc, "", "inner_grad_mode", "first");
  if (grad_mode == "first") {
    cfg.inner_grad_mode = ad::GradMode::kFirstOrder;
  } else if (grad_mode == "second") {
    cfg.inner_grad_mode = ad::GradMode::kSecondOrder;
  } else {
    throw ConfigError("inner_grad_mode", "must be 'first' or 'second'");
  }
  const std::string family = optional_field<std::string>(doc, "", "noise_family", "beta");
  if (family == "beta") {
    cfg.noise_family = NoiseFamily::kBeta;
  } else if (family == "gaussian") {
    cfg.noise_family = NoiseFamily::kGaussian;
  } else {
    throw ConfigError("noise_family", "must be 'beta' or 'gaussian'");
  }
  cfg.label_smoothing = optional_field<bool>(doc, "", "label_smoothing", true);

  if (!doc.contains("env")) throw ConfigError("env", "missing required field");
  const json& env = doc.at("env");
  cfg.env.kind = require_field<std::string>(env, "env", "kind");
  cfg.env.m_t = optional_field<std::size_t>(env, "env", "m_t", 5);
  cfg.env.m_v = optional_field<std::size_t>(env, "env", "m_v", 15);
  cfg.env.oracle_n = optional_field<std::size_t>(env, "env", "oracle_n", 0);
  cfg.env.n_way = optional_field<std::size_t>(env, "env", "n_way", 5);
  cfg.env.k_shot = optional_field<std::size_t>(env, "env", "k_shot", 1);
  cfg.env.m_v_per_class = optional_field<std::size_t>(env, "env", "m_v_per_class", 15);
  cfg.env.dim = optional_field<std::size_t>(env, "env", "dim", 2);
  cfg.env.center_sigma = optional_field<double>(env, "env", "center_sigma", 5.0);
  cfg.env.feature_path = optional_field<std::string>(env, "env", "feature_path", "");
  if (cfg.env.kind == "features" && cfg.env.feature_path.empty()) {
    throw ConfigError("env.feature_path", "missing required field");
  }

  const json hyper = doc.contains("hyper") ? doc.at("hyper") : json::object();
  cfg.t_tasks = optional_field<std::size_t>(hyper, "hyper", "t_tasks", cfg.t_tasks);
  cfg.k_theta = optional_field<std::size_t>(hyper, "hyper", "k_theta", cfg.k_theta);
  cfg.l_t = optional_field<std::size_t>(hyper, "hyper", "l_t", cfg.l_t);
  cfg.l_v = optional_field<std::size_t>(hyper, "hyper", "l_v", cfg.l_v);
  cfg.l_d = optional_field<std::size_t>(hyper, "hyper", "l_d", cfg.l_d);
  cfg.eta = optional_field<std::size_t>(hyper, "hyper", "eta", cfg.eta);
  cfg.alpha_t = optional_field<double>(hyper, "hyper", "alpha_t", cfg.alpha_t);
  cfg.alpha_v = optional_field<double>(hyper, "hyper", "alpha_v", cfg.alpha_v);
  cfg.gamma_t = optional_field<double>(hyper, "hyper", "gamma_t", cfg.gamma_t);
  cfg.gamma_v = optional_field<double>(hyper, "hyper", "gamma_v", cfg.gamma_v);
  cfg.nu = optional_field<double>(hyper, "hyper", "nu", cfg.nu);
  cfg.delta = optional_field<double>(hyper, "hyper", "delta", cfg.delta);
  cfg.tau = optional_field<double>(hyper, "hyper", "tau", cfg.tau);
  cfg.sigma_theta = optional_field<double>(hyper, "hyper", "sigma_theta", cfg.sigma_theta);
  cfg.prior_mu0 = optional_field<double>(hyper, "hyper", "prior_mu0", cfg.prior_mu0);
  cfg.prior_sigma0 = optional_field<double>(hyper, "hyper", "prior_sigma0", cfg.prior_sigma0);

  const json maml = doc.contains("maml") ? doc.at("maml") : json::object();
  cfg.maml_inner_lr = optional_field<double>(maml, "maml", "inner_lr", cfg.maml_inner_lr);
  cfg.maml_inner_steps = optional_field<std::size_t>(maml, "maml", "inner_steps", cfg.maml_inner_steps);
  cfg.maml_meta_lr = optional_field<double>(maml, "maml", "meta_lr", cfg.maml_meta_lr);

  // architecture: environment defaults, then explicit overrides
  TaskEnvironment probe(cfg.env);
  const std::size_t in_dim = probe.input_dim();
  const std::size_t out_dim = probe.output_dim();
  Architectures arch = probe.is_classification()
                           ? classification_architectures(in_dim, out_dim)
                           : regression_architectures();
  if (doc.contains("arch")) {
    const json& aj = doc.at("arch");
    const std::size_t z = optional_field<std::size_t>(aj, "arch", "latent_dim", arch.latent_dim);
    auto base_hidden = optional_field<std::vector<std::size_t>>(
        aj, "arch", "base_hidden",
        std::vector<std::size_t>(arch.base.layer_widths.begin() + 1,
                                 arch.base.layer_widths.end() - 1));
    auto enc_hidden = optional_field<std::vector<std::size_t>>(
        aj, "arch", "encoder_hidden",
        std::vector<std::size_t>(arch.encoder.layer_widths.begin() + 1,
                                 arch.encoder.layer_widths.end() - 1));
    auto gen_hidden = optional_field<std::vector<std::size_t>>(
        aj, "arch", "generator_hidden",
        std::vector<std::size_t>(arch.generator.layer_widths.begin() + 1,
                                 arch.generator.layer_widths.end() - 1));
    auto disc_hidden = optional_field<std::vector<std::size_t>>(
        aj, "arch", "discriminator_hidden",
        std::vector<std::size_t>(arch.discriminator.layer_widths.begin() + 1,
                                 arch.discriminator.layer_widths.end() - 1));
    arch.latent_dim = z;
    arch.base.layer_widths = widths_with(base_hidden, in_dim, out_dim);
    arch.encoder.layer_widths = widths_with(enc_hidden, in_dim, 2 * z);
    arch.generator.layer_widths = widths_with(gen_hidden, z, arch.base.param_count());
    arch.discriminator.layer_widths = widths_with(disc_hidden, arch.base.param_count(), 1);
  }
  cfg.arch = arch;

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("(validation)", e.what());
  }
  return run;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config parse error: ") + e.what());
  }
  return config_from_json(std::move(doc));
}

json config_to_json(const RunConfig& run) {
  const TrainConfig& cfg = run.train;
  json doc;
  doc["mode"] = cfg.mode;
  doc["seed"] = cfg.seed;
  doc["iterations"] = cfg.iterations;
  doc["checkpoint_every"] = cfg.checkpoint_every;
  doc["out_dir"] = run.out_dir;
  doc["inner_grad_mode"] = cfg.inner_grad_mode == ad::GradMode::kFirstOrder ? "first" : "second";
  doc["noise_family"] = cfg.noise_family == NoiseFamily::kBeta ? "beta" : "gaussian";
  doc["label_smoothing"] = cfg.label_smoothing;
  doc["env"] = {{"kind", cfg.env.kind},
                {"m_t", cfg.env.m_t},
                {"m_v", cfg.env.m_v},
                {"oracle_n", cfg.env.oracle_n},
                {"n_way", cfg.env.n_way},
                {"k_shot", cfg.env.k_shot},
                {"m_v_per_class", cfg.env.m_v_per_class},
                {"dim", cfg.env.dim},
                {"center_sigma", cfg.env.center_sigma},
                {"feature_path", cfg.env.feature_path}};
  doc["hyper"] = {{"t_tasks", cfg.t_tasks},   {"k_theta", cfg.k_theta},
                  {"l_t", cfg.l_t},           {"l_v", cfg.l_v},
                  {"l_d", cfg.l_d},           {"eta", cfg.eta},
                  {"alpha_t", cfg.alpha_t},   {"alpha_v", cfg.alpha_v},
                  {"gamma_t", cfg.gamma_t},   {"gamma_v", cfg.gamma_v},
                  {"nu", cfg.nu},             {"delta", cfg.delta},
                  {"tau", cfg.tau},           {"sigma_theta", cfg.sigma_theta},
                  {"prior_mu0", cfg.prior_mu0}, {"prior_sigma0", cfg.prior_sigma0}};
  doc["maml"] = {{"inner_lr", cfg.maml_inner_lr},
                 {"inner_steps", cfg.maml_inner_steps},
                 {"meta_lr", cfg.maml_meta_lr}};
  auto hidden = [](const MlpSpec& s) {
    return std::vector<std::size_t>(s.layer_widths.begin() + 1, s.layer_widths.end() - 1);
  };
  doc["arch"] = {{"latent_dim", cfg.arch.latent_dim},
                 {"base_hidden", hidden(cfg.arch.base)},
                 {"encoder_hidden", hidden(cfg.arch.encoder)},
                 {"generator_hidden", hidden(cfg.arch.generator)},
                 {"discriminator_hidden", hidden(cfg.arch.discriminator)}};
  return doc;
}

}  // namespace simpa
