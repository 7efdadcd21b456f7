#include "simpa/meta_learning.hpp"

#include <cmath>
#include <stdexcept>

#include "simpa/calibration.hpp"

namespace simpa {

void TrainConfig::validate() const {
  if (t_tasks < 2) throw std::invalid_argument("TrainConfig: t_tasks must be >= 2");
  if (k_theta < 1 || l_t < 1 || l_v < 1 || l_d < 1) {
    throw std::invalid_argument("TrainConfig: sample counts must be >= 1");
  }
  if (!(alpha_t > 0 && alpha_v > 0 && gamma_t > 0 && gamma_v > 0 && nu > 0)) {
    throw std::invalid_argument("TrainConfig: learning rates must be > 0");
  }
  bound().validate();
  if (!(sigma_theta > 0)) throw std::invalid_argument("TrainConfig: sigma_theta must be > 0");
  if (!(prior_sigma0 > 0)) throw std::invalid_argument("TrainConfig: prior_sigma0 must be > 0");
  if (mode != "simpa" && mode != "maml") throw std::invalid_argument("TrainConfig: unknown mode");
  arch.validate();
}

MetaState init_meta_state(const TrainConfig& cfg) {
  cfg.validate();
  MetaState st;
  RngStream r_psi = RngStream::keyed(cfg.seed, 0, 0, stream_purpose::kInit, 0);
  RngStream r_enc = RngStream::keyed(cfg.seed, 0, 1, stream_purpose::kInit, 0);
  RngStream r_dis = RngStream::keyed(cfg.seed, 0, 2, stream_purpose::kInit, 0);
  st.hyper.psi = init_mlp_params(cfg.arch.generator, r_psi);
  st.hyper.sigma_theta = cfg.sigma_theta;
  st.hyper.prior_mu0 = cfg.prior_mu0;
  st.hyper.prior_sigma0 = cfg.prior_sigma0;
  st.enc_params = init_mlp_params(cfg.arch.encoder, r_enc);
  st.disc_meta = init_mlp_params(cfg.arch.discriminator, r_dis);
  st.opt_psi.init(st.hyper.psi.size());
  st.opt_enc.init(st.enc_params.size());
  st.opt_disc.init(st.disc_meta.size());
  return st;
}

namespace {

RngStream task_stream(const StreamKey& key, std::uint64_t purpose) {
  return RngStream::keyed(key.seed, key.iteration, key.task, purpose, 0);
}

Tensor realize_latent(const TrainConfig& cfg, const LatentNoiseParams& noise, const Tensor& u) {
  ad::Tape tape;
  tape.check_finite = false;  // values validated by the caller paths
  ad::Var z = sample_latent_graph(cfg.noise_family, tape.leaf(noise.alpha),
                                  tape.leaf(noise.beta), u);
  return z.value();
}

// Support-set negative log-likelihood of one generated weight row, summed
// over the support points; constants dropped (Gaussian unit variance for
// regression, softmax cross-entropy for classification).
ad::Var support_nll(const TrainConfig& cfg, ad::Var w_row, const TaskBatch& task) {
  ad::Tape& t = *w_row.tape;
  ad::Var x = t.leaf(task.support_x);
  ad::Var pred = base_forward(cfg.arch.base, w_row, x);
  if (task.is_classification()) {
    const std::size_t m = task.m_support();
    const std::size_t c = cfg.arch.base.output_width();
    Tensor onehot({m, c});
    for (std::size_t j = 0; j < m; ++j) {
      onehot.at(j, static_cast<std::size_t>(task.support_y[j])) = 1.0;
    }
    return ad::neg(ad::sum(ad::mul(ad::log_softmax(pred), t.leaf(std::move(onehot)))));
  }
  ad::Var diff = ad::sub(pred, t.leaf(task.support_y));
  return ad::scale(ad::sum(ad::square(diff)), 0.5);
}

ad::Var vfe_graph(const TrainConfig& cfg, ad::Var lambda, ad::Var omega, const TaskBatch& task,
                  ad::Var z) {
  ad::Tape& t = *lambda.tape;
  const std::size_t l_samples = z.value().rows();
  const std::size_t p = cfg.arch.base.param_count();
  ad::Var w = generate_weights(cfg.arch.generator, z, lambda);
  ad::Var v = mlp_forward(cfg.arch.discriminator, omega, w);
  ad::Var w_flat = ad::reshape(w, {l_samples * p});
  ad::Var nll_acc;
  for (std::size_t l = 0; l < l_samples; ++l) {
    ad::Var w_row = ad::slice(w_flat, l * p, p);
    ad::Var nll_l = support_nll(cfg, w_row, task);
    nll_acc = l == 0 ? nll_l : ad::add(nll_acc, nll_l);
  }
  (void)t;
  return ad::add(ad::scale(ad::sum(v), -1.0 / static_cast<double>(l_samples)),
                 ad::scale(nll_acc, 1.0 / static_cast<double>(l_samples)));
}

struct QueryGraph {
  ad::Var loss;               // clipped empirical query loss
  Tensor predictions;         // regression (L, m); classification (m, C) averaged probs
};

QueryGraph query_graph(const TrainConfig& cfg, ad::Var lambda, const TaskBatch& task, ad::Var z,
                       bool want_predictions) {
  ad::Tape& t = *lambda.tape;
  const std::size_t l_samples = z.value().rows();
  const std::size_t p = cfg.arch.base.param_count();
  const std::size_t m = task.m_query();
  ad::Var x = t.leaf(task.query_x);
  ad::Var w = generate_weights(cfg.arch.generator, z, lambda);
  ad::Var w_flat = ad::reshape(w, {l_samples * p});

  QueryGraph out;
  Tensor preds_reg({l_samples, m});
  Tensor probs_acc;
  if (task.is_classification()) probs_acc = Tensor({m, cfg.arch.base.output_width()});

  ad::Var acc;
  for (std::size_t l = 0; l < l_samples; ++l) {
    ad::Var w_row = ad::slice(w_flat, l * p, p);
    ad::Var pred = base_forward(cfg.arch.base, w_row, x);
    ad::Var per_point;  // (m, 1) unclipped per-point loss
    if (task.is_classification()) {
      const std::size_t c = cfg.arch.base.output_width();
      Tensor onehot({m, c});
      for (std::size_t j = 0; j < m; ++j) {
        onehot.at(j, static_cast<std::size_t>(task.query_y[j])) = 1.0;
      }
      ad::Var lsm = ad::log_softmax(pred);
      ad::Var picked = ad::mul(lsm, t.leaf(std::move(onehot)));
      per_point = ad::neg(ad::matmul(picked, t.leaf(Tensor::full({c, 1}, 1.0))));
      if (want_predictions) {
        ad::Var probs = ad::exp(lsm);
        const Tensor& pv = probs.value();
        for (std::size_t j = 0; j < m; ++j)
          for (std::size_t cc = 0; cc < c; ++cc) probs_acc.at(j, cc) += pv.at(j, cc);
      }
    } else {
      ad::Var diff = ad::sub(pred, t.leaf(task.query_y));
      per_point = ad::scale(ad::square(diff), 0.5);
      if (want_predictions) {
        const Tensor& pv = pred.value();
        for (std::size_t j = 0; j < m; ++j) preds_reg.at(l, j) = pv[j];
      }
    }
    ad::Var clipped = ad::sum(clip_loss(per_point));
    acc = l == 0 ? clipped : ad::add(acc, clipped);
  }
  out.loss = ad::scale(acc, 1.0 / static_cast<double>(l_samples * m));
  if (want_predictions) {
    if (task.is_classification()) {
      for (std::size_t i = 0; i < probs_acc.size(); ++i) {
        probs_acc[i] /= static_cast<double>(l_samples);
      }
      out.predictions = std::move(probs_acc);
    } else {
      out.predictions = std::move(preds_reg);
    }
  }
  return out;
}

}  // namespace

TaskNoiseCache make_noise_cache(const TrainConfig& cfg, const Tensor& enc_params,
                                const TaskBatch& task, const StreamKey& key) {
  TaskNoiseCache cache;
  cache.noise = encode_task(cfg.arch.encoder, cfg.arch.latent_dim, task.support_x, enc_params);
  const std::size_t z_dim = cfg.arch.latent_dim;

  RngStream r_disc = task_stream(key, stream_purpose::kDiscNoise);
  RngStream r_vfe = task_stream(key, stream_purpose::kVfeNoise);
  RngStream r_query = task_stream(key, stream_purpose::kQueryNoise);
  RngStream r_kl = task_stream(key, stream_purpose::kKlNoise);
  RngStream r_lab = task_stream(key, stream_purpose::kDiscLabels);

  for (std::size_t s = 0; s < cfg.eta; ++s) {
    cache.disc_uniforms.push_back(draw_uniforms(r_disc, cfg.l_d, z_dim));
    cache.disc_targets.push_back(draw_real_targets(r_lab, cfg.l_d, cfg.label_smoothing));
    cache.vfe_uniforms.push_back(draw_uniforms(r_vfe, cfg.l_t, z_dim));
    cache.disc_z.push_back(realize_latent(cfg, cache.noise, cache.disc_uniforms.back()));
    cache.vfe_z.push_back(realize_latent(cfg, cache.noise, cache.vfe_uniforms.back()));
  }
  cache.query_uniforms = draw_uniforms(r_query, cfg.l_v, z_dim);
  cache.kl_uniforms = draw_uniforms(r_kl, cfg.l_t, z_dim);
  cache.final_disc_uniforms = draw_uniforms(r_disc, cfg.l_d, z_dim);
  cache.final_disc_targets = draw_real_targets(r_lab, cfg.l_d, cfg.label_smoothing);
  cache.final_disc_z = realize_latent(cfg, cache.noise, cache.final_disc_uniforms);
  return cache;
}

double vfe(const TrainConfig& cfg, const Tensor& lambda, const Tensor& omega,
           const TaskBatch& task, const Tensor& z_values) {
  ad::Tape tape;
  return vfe_graph(cfg, tape.leaf(lambda), tape.leaf(omega), task, tape.leaf(z_values)).scalar();
}

EStepResult e_step(const TrainConfig& cfg, const Tensor& theta, const Tensor& omega0,
                   const TaskBatch& task, const TaskNoiseCache& cache) {
  Tensor lambda = theta;
  Tensor omega = omega0;
  for (std::size_t s = 0; s < cfg.eta; ++s) {
    omega = discriminator_ascent_step(cfg.arch, omega, theta, lambda, cache.disc_z[s],
                                      cache.disc_targets[s], cfg.gamma_t);
    ad::Tape tape;
    ad::Var lam = tape.leaf(lambda);
    ad::Var loss = vfe_graph(cfg, lam, tape.leaf(omega), task, tape.leaf(cache.vfe_z[s]));
    Tensor g = ad::grad(loss, {lam})[0].value();
    for (std::size_t i = 0; i < lambda.size(); ++i) lambda[i] -= cfg.alpha_t * g[i];
    if (!lambda.all_finite()) throw NumericError("e_step: lambda diverged");
  }
  return {std::move(lambda), std::move(omega), cache.noise};
}

double query_loss(const TrainConfig& cfg, const Tensor& lambda, const TaskBatch& task,
                  const Tensor& z_values) {
  if (task.m_query() == 0) throw std::invalid_argument("query_loss: empty query set");
  ad::Tape tape;
  ad::Var lam = tape.leaf(lambda);
  return query_graph(cfg, lam, task, tape.leaf(z_values), false).loss.scalar();
}

UnitOutcome run_unit(const TrainConfig& cfg, const Tensor& theta, const Tensor& omega0,
                     const Tensor& enc_params, const TaskBatch& task,
                     const TaskNoiseCache& cache) {
  UnitOutcome out;

  Tensor lambda_value, omega_value;
  ad::Tape tape;
  ad::Var phi = tape.leaf(enc_params);
  auto [alpha, beta] = encode_task_graph(cfg.arch.encoder, cfg.arch.latent_dim,
                                         tape.leaf(task.support_x), phi);
  ad::Var lam_outer;
  ad::Var theta_leaf;  // second-order gradient target

  if (cfg.inner_grad_mode == ad::GradMode::kFirstOrder) {
    EStepResult es = e_step(cfg, theta, omega0, task, cache);
    lambda_value = std::move(es.lambda);
    omega_value = std::move(es.omega);
    lam_outer = tape.leaf(lambda_value);
  } else {
    // Unrolled E-step on one graph: theta -> lambda chain with the
    // Hessian-vector terms kept. The discriminator path stays detached; the
    // phi path flows through the inner latent draws as well.
    theta_leaf = tape.leaf(theta);
    ad::Var lam = theta_leaf;
    Tensor omega = omega0;
    for (std::size_t s = 0; s < cfg.eta; ++s) {
      omega = discriminator_ascent_step(cfg.arch, omega, theta, lam.value(), cache.disc_z[s],
                                        cache.disc_targets[s], cfg.gamma_t);
      ad::Var z = sample_latent_graph(cfg.noise_family, alpha, beta, cache.vfe_uniforms[s]);
      ad::Var loss = vfe_graph(cfg, lam, tape.leaf(omega), task, z);
      ad::Var g = ad::grad(loss, {lam})[0];
      lam = ad::sub(lam, ad::scale(g, cfg.alpha_t));
    }
    lambda_value = lam.value();
    omega_value = std::move(omega);
    lam_outer = lam;
  }

  ad::Var z_query = sample_latent_graph(cfg.noise_family, alpha, beta, cache.query_uniforms);
  QueryGraph q = query_graph(cfg, lam_outer, task, z_query, true);
  out.emp_loss = q.loss.scalar();
  out.predictions = std::move(q.predictions);

  ad::Var z_kl = sample_latent_graph(cfg.noise_family, alpha, beta, cache.kl_uniforms);
  ad::Var omega_const = tape.leaf(omega_value);
  ad::Var kl = estimate_kl_graph(cfg.arch, lam_outer, omega_const, z_kl);
  out.kl_hat = kl.scalar();

  out.vfe_final = vfe(cfg, lambda_value, omega_value, task, z_kl.value());

  ad::Var grad_target =
      cfg.inner_grad_mode == ad::GradMode::kFirstOrder ? lam_outer : theta_leaf;
  {
    auto g = ad::grad(q.loss, {grad_target, phi});
    out.g_lhat_psi = g[0].value();
    out.g_lhat_phi = g[1].value();
  }
  {
    auto g = ad::grad(kl, {grad_target, phi});
    out.g_kl_psi = g[0].value();
    out.g_kl_phi = g[1].value();
  }

  {
    ad::Tape dt;
    ad::Var om = dt.leaf(omega_value);
    ad::Var dloss = discriminator_loss(cfg.arch, om, dt.leaf(theta), dt.leaf(lambda_value),
                                       dt.leaf(cache.final_disc_z), cache.final_disc_targets);
    out.g_disc_meta = ad::grad(dloss, {om})[0].value();
  }
  return out;
}

BoundReport m_step(MetaState& state, const std::vector<TaskAggregate>& tasks,
                   const TrainConfig& cfg) {
  const std::size_t t = cfg.t_tasks;
  if (tasks.size() != t) throw std::invalid_argument("m_step: task record count does not match T");
  const double k = static_cast<double>(cfg.k_theta);

  std::vector<double> emp, vfes, kls;
  std::vector<std::size_t> m_vs;
  for (const auto& rec : tasks) {
    emp.push_back(rec.emp_loss);
    vfes.push_back(rec.vfe);
    kls.push_back(rec.kl_task);
    m_vs.push_back(rec.m_v);
  }
  const double kl_hyper = gaussian_kl(state.hyper);
  BoundReport report = assemble_bound(emp, vfes, kls, kl_hyper, m_vs, cfg.bound(),
                                      cfg.k_theta);

  // d(objective)/d(psi): query loss + direct KL term + Ri chain, averaged
  // over tasks and theta samples, plus the hyper KL and R0 chain.
  Tensor g_psi(state.hyper.psi.shape());
  Tensor g_phi(state.enc_params.shape());
  Tensor g_disc(state.disc_meta.shape());
  const double inv_tk = 1.0 / (static_cast<double>(t) * k);
  for (std::size_t i = 0; i < t; ++i) {
    const auto& rec = tasks[i];
    const double ri = report.r_i[i];
    const double m_v = static_cast<double>(rec.m_v);
    const double ri_chain =
        (rec.kl_task > 0.0 && ri > 0.0) ? 1.0 / (4.0 * ri * (m_v - 1.0)) : 0.0;
    for (std::size_t d = 0; d < g_psi.size(); ++d) {
      g_psi[d] += inv_tk * (rec.g_lhat_psi[d] + (1.0 + ri_chain) * rec.g_kl_psi[d]);
    }
    for (std::size_t d = 0; d < g_phi.size(); ++d) {
      g_phi[d] += inv_tk * (rec.g_lhat_phi[d] + ri_chain * rec.g_kl_phi[d]);
    }
    for (std::size_t d = 0; d < g_disc.size(); ++d) {
      g_disc[d] += inv_tk * rec.g_disc[d];
    }
  }
  const double r0_chain = report.r0 > 0.0
                              ? 1.0 / (4.0 * report.r0 * (static_cast<double>(t) - 1.0))
                              : 0.0;
  const double inv_s0sq = 1.0 / (cfg.prior_sigma0 * cfg.prior_sigma0);
  for (std::size_t d = 0; d < g_psi.size(); ++d) {
    g_psi[d] += (1.0 + r0_chain) * (state.hyper.psi[d] - cfg.prior_mu0) * inv_s0sq;
  }

  if (!g_psi.all_finite() || !g_phi.all_finite() || !g_disc.all_finite()) {
    throw NumericError("m_step: non-finite meta-gradient");
  }

  state.opt_psi.update(state.hyper.psi, g_psi, cfg.alpha_v);
  state.opt_enc.update(state.enc_params, g_phi, cfg.nu);
  for (std::size_t d = 0; d < g_disc.size(); ++d) g_disc[d] = -g_disc[d];  // ascent
  state.opt_disc.update(state.disc_meta, g_disc, cfg.gamma_v);
  ++state.iteration;
  return report;
}

void train(const TrainConfig& cfg, const TaskEnvironment& env, MetaState& state,
           const IterationCallback& cb) {
  cfg.validate();
  for (std::size_t iter = state.iteration; iter < cfg.iterations; ++iter) {
    std::vector<TaskBatch> tasks;
    for (std::size_t i = 0; i < cfg.t_tasks; ++i) {
      RngStream r = RngStream::keyed(cfg.seed, iter, i, stream_purpose::kTaskSampling, 0);
      tasks.push_back(env.sample(r));
    }
    RngStream r_theta = RngStream::keyed(cfg.seed, iter, 0, stream_purpose::kThetaSample, 0);
    std::vector<Tensor> thetas;
    for (std::size_t kk = 0; kk < cfg.k_theta; ++kk) {
      thetas.push_back(sample_theta(state.hyper, r_theta));
    }

    std::vector<TaskAggregate> aggregates(cfg.t_tasks);
    std::vector<std::vector<Tensor>> task_preds(cfg.t_tasks);
    for (std::size_t i = 0; i < cfg.t_tasks; ++i) {
      TaskNoiseCache cache =
          make_noise_cache(cfg, state.enc_params, tasks[i], {cfg.seed, iter, i});
      TaskAggregate& agg = aggregates[i];
      agg.m_v = tasks[i].m_query();
      for (std::size_t kk = 0; kk < cfg.k_theta; ++kk) {
        UnitOutcome u = run_unit(cfg, thetas[kk], state.disc_meta, state.enc_params, tasks[i],
                                 cache);
        const double invk = 1.0 / static_cast<double>(cfg.k_theta);
        agg.emp_loss += invk * u.emp_loss;
        agg.kl_task += invk * u.kl_hat;
        agg.vfe += invk * u.vfe_final;
        auto acc = [](Tensor& dst, const Tensor& src) {
          if (dst.size() == 0) {
            dst = src;
          } else {
            for (std::size_t d = 0; d < dst.size(); ++d) dst[d] += src[d];
          }
        };
        acc(agg.g_lhat_psi, u.g_lhat_psi);
        acc(agg.g_kl_psi, u.g_kl_psi);
        acc(agg.g_lhat_phi, u.g_lhat_phi);
        acc(agg.g_kl_phi, u.g_kl_phi);
        acc(agg.g_disc, u.g_disc_meta);
        task_preds[i].push_back(std::move(u.predictions));
      }
    }

    IterationStats stats;
    stats.report = m_step(state, aggregates, cfg);

    // Reporting NLL with constants included, averaged over the meta-batch.
    double nll_acc = 0.0;
    for (std::size_t i = 0; i < cfg.t_tasks; ++i) {
      const TaskBatch& task = tasks[i];
      if (task.is_classification()) {
        Tensor probs = task_preds[i][0];
        for (std::size_t kk = 1; kk < cfg.k_theta; ++kk) {
          for (std::size_t d = 0; d < probs.size(); ++d) probs[d] += task_preds[i][kk][d];
        }
        for (std::size_t d = 0; d < probs.size(); ++d) {
          probs[d] /= static_cast<double>(cfg.k_theta);
        }
        std::vector<int> labels(task.m_query());
        for (std::size_t j = 0; j < labels.size(); ++j) {
          labels[j] = static_cast<int>(task.query_y[j]);
        }
        nll_acc += nll(probs, labels);
      } else {
        const std::size_t m = task.m_query();
        const std::size_t s = cfg.k_theta * cfg.l_v;
        Tensor samples({m, s});
        for (std::size_t kk = 0; kk < cfg.k_theta; ++kk) {
          const Tensor& pp = task_preds[i][kk];
          for (std::size_t l = 0; l < cfg.l_v; ++l) {
            for (std::size_t j = 0; j < m; ++j) {
              samples.at(j, kk * cfg.l_v + l) = pp.at(l, j);
            }
          }
        }
        Tensor targets({m});
        for (std::size_t j = 0; j < m; ++j) targets[j] = task.query_y[j];
        nll_acc += nll_gaussian_mixture(samples, targets, 1.0);
      }
    }
    stats.nll = nll_acc / static_cast<double>(cfg.t_tasks);

    if (cb) cb(iter, stats, state);
  }
}

BoundTrialResult bound_validity_trial(const TrainConfig& cfg, const MetaState& state,
                                      const std::vector<TaskBatch>& tasks,
                                      std::uint64_t trial_id) {
  if (tasks.size() != cfg.t_tasks) {
    throw std::invalid_argument("bound_validity_trial: task count does not match T");
  }
  std::vector<double> emp(cfg.t_tasks, 0.0), vfes(cfg.t_tasks, 0.0), kls(cfg.t_tasks, 0.0);
  std::vector<std::size_t> m_vs;
  double true_loss = 0.0;
  const double inv_k = 1.0 / static_cast<double>(cfg.k_theta);

  for (std::size_t i = 0; i < cfg.t_tasks; ++i) {
    const TaskBatch& task = tasks[i];
    if (!task.has_oracle()) {
      throw std::invalid_argument("bound_validity_trial: task lacks an oracle query set");
    }
    m_vs.push_back(task.m_query());
    StreamKey key = eval_stream_key(cfg.seed, (trial_id << 8) | i);
    TaskNoiseCache cache = make_noise_cache(cfg, state.enc_params, task, key);
    RngStream r_theta =
        RngStream::keyed(key.seed, key.iteration, key.task, stream_purpose::kThetaSample, 0);
    Tensor z_query = realize_latent_public(cfg, cache.noise, cache.query_uniforms);
    Tensor z_kl = realize_latent_public(cfg, cache.noise, cache.kl_uniforms);

    TaskBatch oracle_view = task;
    oracle_view.query_x = task.oracle_x;
    oracle_view.query_y = task.oracle_y;

    for (std::size_t kk = 0; kk < cfg.k_theta; ++kk) {
      Tensor theta = sample_theta(state.hyper, r_theta);
      EStepResult es = e_step(cfg, theta, state.disc_meta, task, cache);
      emp[i] += inv_k * query_loss(cfg, es.lambda, task, z_query);
      kls[i] += inv_k * estimate_kl(cfg.arch, es.lambda, es.omega, z_kl);
      vfes[i] += inv_k * vfe(cfg, es.lambda, es.omega, task, z_kl);
      true_loss += inv_k * query_loss(cfg, es.lambda, oracle_view, z_query) /
                   static_cast<double>(cfg.t_tasks);
    }
  }

  BoundTrialResult out;
  out.report =
      assemble_bound(emp, vfes, kls, gaussian_kl(state.hyper), m_vs, cfg.bound(), cfg.k_theta);
  out.true_loss = true_loss;
  out.holds = true_loss <= out.report.bound;
  return out;
}

Predictive predict(const TrainConfig& cfg, const MetaState& state, const TaskBatch& task,
                   const Tensor& x_query, std::uint64_t episode_id) {
  StreamKey key = eval_stream_key(cfg.seed, episode_id);
  TaskNoiseCache cache = make_noise_cache(cfg, state.enc_params, task, key);
  RngStream r_theta =
      RngStream::keyed(key.seed, key.iteration, key.task, stream_purpose::kThetaSample, 0);

  const std::size_t nq = x_query.rows();
  const std::size_t p = cfg.arch.base.param_count();
  const bool classification = task.is_classification();
  const std::size_t n_classes = classification ? cfg.arch.base.output_width() : 0;

  Tensor z_query = realize_latent(cfg, cache.noise, cache.query_uniforms);

  Predictive out;
  if (classification) {
    out.probs = Tensor({nq, n_classes});
  } else {
    out.sample_matrix = Tensor({nq, cfg.k_theta * cfg.l_v});
  }

  for (std::size_t kk = 0; kk < cfg.k_theta; ++kk) {
    Tensor theta = sample_theta(state.hyper, r_theta);
    EStepResult es = e_step(cfg, theta, state.disc_meta, task, cache);
    ad::Tape tape;
    ad::Var lam = tape.leaf(es.lambda);
    ad::Var w = generate_weights(cfg.arch.generator, tape.leaf(z_query), lam);
    ad::Var w_flat = ad::reshape(w, {cfg.l_v * p});
    ad::Var x = tape.leaf(x_query);
    for (std::size_t l = 0; l < cfg.l_v; ++l) {
      ad::Var pred = base_forward(cfg.arch.base, ad::slice(w_flat, l * p, p), x);
      if (classification) {
        ad::Var probs = ad::exp(ad::log_softmax(pred));
        const Tensor& pv = probs.value();
        for (std::size_t d = 0; d < pv.size(); ++d) out.probs[d] += pv[d];
      } else {
        const Tensor& pv = pred.value();
        for (std::size_t j = 0; j < nq; ++j) {
          out.sample_matrix.at(j, kk * cfg.l_v + l) = pv[j];
        }
      }
    }
  }

  if (classification) {
    const double denom = static_cast<double>(cfg.k_theta * cfg.l_v);
    for (std::size_t d = 0; d < out.probs.size(); ++d) out.probs[d] /= denom;
  } else {
    out.mean = Tensor({nq});
    out.stddev = Tensor({nq});
    const std::size_t s = cfg.k_theta * cfg.l_v;
    for (std::size_t j = 0; j < nq; ++j) {
      double mu = 0.0;
      for (std::size_t c = 0; c < s; ++c) mu += out.sample_matrix.at(j, c);
      mu /= static_cast<double>(s);
      double var = 0.0;
      for (std::size_t c = 0; c < s; ++c) {
        const double d = out.sample_matrix.at(j, c) - mu;
        var += d * d;
      }
      out.mean[j] = mu;
      out.stddev[j] = std::sqrt(var / static_cast<double>(s));
    }
  }
  return out;
}

}  // namespace simpa
