#include "simpa/checkpoint.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace simpa {
namespace {

constexpr char kMagic[8] = {'S', 'I', 'M', 'P', 'A', 'C', 'K', '1'};

void put_u32(std::ofstream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }
void put_u64(std::ofstream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); }

std::uint32_t get_u32(std::ifstream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}
std::uint64_t get_u64(std::ifstream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

void write_block(std::ofstream& out, const std::string& name, const Tensor& t) {
  put_u32(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  put_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.shape()) put_u64(out, d);
  out.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
}

void write_file(const std::string& path, std::uint64_t iteration, std::uint32_t mode,
                const std::string& config_json,
                const std::map<std::string, Tensor>& blocks) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot write " + tmp);
    out.write(kMagic, 8);
    put_u32(out, 1);
    put_u64(out, iteration);
    put_u32(out, mode);
    put_u64(out, config_json.size());
    out.write(config_json.data(), static_cast<std::streamsize>(config_json.size()));
    put_u32(out, static_cast<std::uint32_t>(blocks.size()));
    for (const auto& [name, tensor] : blocks) write_block(out, name, tensor);
    out.flush();
    if (!out) throw std::runtime_error("checkpoint: write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw std::runtime_error("checkpoint: rename failed for " + path);
  }
}

Tensor scalar_block(double v) { return Tensor({1}, {v}); }

const Tensor& need_block(const CheckpointData& d, const std::string& name) {
  auto it = d.blocks.find(name);
  if (it == d.blocks.end()) throw std::runtime_error("checkpoint: missing block '" + name + "'");
  return it->second;
}

void check_len(const Tensor& t, std::size_t n, const std::string& name) {
  if (t.size() != n) {
    throw std::runtime_error("checkpoint: block '" + name + "' has " + std::to_string(t.size()) +
                             " values, expected " + std::to_string(n));
  }
}

void load_adam(const CheckpointData& d, const std::string& prefix, std::size_t n, AdamState* opt) {
  opt->m = need_block(d, prefix + ".m");
  opt->v = need_block(d, prefix + ".v");
  check_len(opt->m, n, prefix + ".m");
  check_len(opt->v, n, prefix + ".v");
  opt->step = static_cast<std::size_t>(need_block(d, prefix + ".step")[0]);
}

}  // namespace

void save_checkpoint(const std::string& path, const MetaState& state,
                     const std::string& config_json) {
  std::map<std::string, Tensor> blocks;
  blocks["psi"] = state.hyper.psi;
  blocks["enc"] = state.enc_params;
  blocks["omega0"] = state.disc_meta;
  blocks["opt_psi.m"] = state.opt_psi.m;
  blocks["opt_psi.v"] = state.opt_psi.v;
  blocks["opt_psi.step"] = scalar_block(static_cast<double>(state.opt_psi.step));
  blocks["opt_enc.m"] = state.opt_enc.m;
  blocks["opt_enc.v"] = state.opt_enc.v;
  blocks["opt_enc.step"] = scalar_block(static_cast<double>(state.opt_enc.step));
  blocks["opt_disc.m"] = state.opt_disc.m;
  blocks["opt_disc.v"] = state.opt_disc.v;
  blocks["opt_disc.step"] = scalar_block(static_cast<double>(state.opt_disc.step));
  write_file(path, state.iteration, 0, config_json, blocks);
}

void save_checkpoint(const std::string& path, const MamlState& state,
                     const std::string& config_json) {
  std::map<std::string, Tensor> blocks;
  blocks["w0"] = state.w0;
  blocks["opt.m"] = state.opt.m;
  blocks["opt.v"] = state.opt.v;
  blocks["opt.step"] = scalar_block(static_cast<double>(state.opt.step));
  write_file(path, state.iteration, 1, config_json, blocks);
}

CheckpointData read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (in.gcount() != 8 || std::memcmp(magic, kMagic, 8) != 0) {
    throw std::runtime_error("checkpoint: bad magic in " + path);
  }
  CheckpointData data;
  data.version = get_u32(in);
  if (data.version != 1) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(data.version));
  }
  data.iteration = get_u64(in);
  const std::uint32_t mode = get_u32(in);
  data.mode = mode == 0 ? "simpa" : "maml";
  const std::uint64_t cfg_len = get_u64(in);
  data.config_json.resize(cfg_len);
  in.read(data.config_json.data(), static_cast<std::streamsize>(cfg_len));
  if (!in) throw std::runtime_error("checkpoint: truncated config echo");
  const std::uint32_t n_blocks = get_u32(in);
  for (std::uint32_t b = 0; b < n_blocks; ++b) {
    const std::uint32_t name_len = get_u32(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw std::runtime_error("checkpoint: truncated block name");
    const std::uint32_t ndim = get_u32(in);
    std::vector<std::size_t> shape;
    std::size_t count = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      const std::uint64_t dim = get_u64(in);
      shape.push_back(static_cast<std::size_t>(dim));
      count *= static_cast<std::size_t>(dim);
    }
    std::vector<double> values(count);
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint: truncated block '" + name + "'");
    data.blocks.emplace(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  return data;
}

MetaState meta_state_from_checkpoint(const CheckpointData& data, const TrainConfig& cfg) {
  if (data.mode != "simpa") throw std::runtime_error("checkpoint: not a simpa checkpoint");
  MetaState st;
  st.hyper.psi = need_block(data, "psi");
  check_len(st.hyper.psi, cfg.arch.generator.param_count(), "psi");
  st.hyper.sigma_theta = cfg.sigma_theta;
  st.hyper.prior_mu0 = cfg.prior_mu0;
  st.hyper.prior_sigma0 = cfg.prior_sigma0;
  st.enc_params = need_block(data, "enc");
  check_len(st.enc_params, cfg.arch.encoder.param_count(), "enc");
  st.disc_meta = need_block(data, "omega0");
  check_len(st.disc_meta, cfg.arch.discriminator.param_count(), "omega0");
  load_adam(data, "opt_psi", st.hyper.psi.size(), &st.opt_psi);
  load_adam(data, "opt_enc", st.enc_params.size(), &st.opt_enc);
  load_adam(data, "opt_disc", st.disc_meta.size(), &st.opt_disc);
  st.iteration = data.iteration;
  return st;
}

MamlState maml_state_from_checkpoint(const CheckpointData& data, const TrainConfig& cfg) {
  if (data.mode != "maml") throw std::runtime_error("checkpoint: not a maml checkpoint");
  MamlState st;
  st.w0 = need_block(data, "w0");
  check_len(st.w0, cfg.arch.base.param_count(), "w0");
  load_adam(data, "opt", st.w0.size(), &st.opt);
  st.iteration = data.iteration;
  return st;
}

}  // namespace simpa
