#include "simpa/maml_baseline.hpp"

#include <cmath>

namespace simpa {
namespace {

ad::Var maml_loss_graph(const TrainConfig& cfg, ad::Var w, const Tensor& x, const Tensor& y,
                        bool classification) {
  ad::Tape& t = *w.tape;
  ad::Var pred = base_forward(cfg.arch.base, w, t.leaf(x));
  const std::size_t m = x.rows();
  if (classification) {
    const std::size_t c = cfg.arch.base.output_width();
    Tensor onehot({m, c});
    for (std::size_t j = 0; j < m; ++j) onehot.at(j, static_cast<std::size_t>(y[j])) = 1.0;
    return ad::scale(ad::neg(ad::sum(ad::mul(ad::log_softmax(pred), t.leaf(std::move(onehot))))),
                     1.0 / static_cast<double>(m));
  }
  return ad::mean(ad::square(ad::sub(pred, t.leaf(y))));
}

}  // namespace

MamlState init_maml_state(const TrainConfig& cfg) {
  MamlState st;
  RngStream r = RngStream::keyed(cfg.seed, 0, 0, stream_purpose::kInit, 1);
  st.w0 = init_mlp_params(cfg.arch.base, r);
  st.opt.init(st.w0.size());
  return st;
}

double maml_loss(const TrainConfig& cfg, const Tensor& w, const Tensor& x, const Tensor& y,
                 bool classification) {
  ad::Tape tape;
  return maml_loss_graph(cfg, tape.leaf(w), x, y, classification).scalar();
}

Tensor maml_adapt(const TrainConfig& cfg, const Tensor& w0, const TaskBatch& task) {
  Tensor w = w0;
  for (std::size_t s = 0; s < cfg.maml_inner_steps; ++s) {
    ad::Tape tape;
    ad::Var wv = tape.leaf(w);
    ad::Var loss =
        maml_loss_graph(cfg, wv, task.support_x, task.support_y, task.is_classification());
    Tensor g = ad::grad(loss, {wv})[0].value();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= cfg.maml_inner_lr * g[i];
  }
  return w;
}

Tensor maml_point_predict(const TrainConfig& cfg, const Tensor& w, const Tensor& x) {
  ad::Tape tape;
  ad::Var pred = base_forward(cfg.arch.base, tape.leaf(w), tape.leaf(x));
  if (cfg.arch.base.output_width() > 1) {
    return ad::exp(ad::log_softmax(pred)).value();
  }
  return pred.value();
}

void train_maml(const TrainConfig& cfg, const TaskEnvironment& env, MamlState& state,
                const MamlCallback& cb) {
  for (std::size_t iter = state.iteration; iter < cfg.iterations; ++iter) {
    Tensor g_meta(state.w0.shape());
    double qloss = 0.0, nll_acc = 0.0;
    for (std::size_t i = 0; i < cfg.t_tasks; ++i) {
      RngStream r = RngStream::keyed(cfg.seed, iter, i, stream_purpose::kTaskSampling, 0);
      TaskBatch task = env.sample(r);
      const bool classification = task.is_classification();

      ad::Tape tape;
      ad::Var w0v = tape.leaf(state.w0);
      ad::Var w = w0v;
      for (std::size_t s = 0; s < cfg.maml_inner_steps; ++s) {
        ad::Var loss = maml_loss_graph(cfg, w, task.support_x, task.support_y, classification);
        ad::Var g = ad::grad(loss, {w})[0];
        if (cfg.inner_grad_mode == ad::GradMode::kFirstOrder) {
          g = tape.leaf(g.value());  // detach: first-order MAML
        }
        w = ad::sub(w, ad::scale(g, cfg.maml_inner_lr));
      }
      ad::Var outer = maml_loss_graph(cfg, w, task.query_x, task.query_y, classification);
      qloss += outer.scalar();
      Tensor g = ad::grad(outer, {w0v})[0].value();
      for (std::size_t d = 0; d < g_meta.size(); ++d) g_meta[d] += g[d];

      if (!classification) {
        // unit-variance Gaussian readout of the point prediction
        ad::Tape pt;
        ad::Var pred = base_forward(cfg.arch.base, pt.leaf(w.value()), pt.leaf(task.query_x));
        const Tensor& pv = pred.value();
        double acc = 0.0;
        for (std::size_t j = 0; j < task.m_query(); ++j) {
          const double d = pv[j] - task.query_y[j];
          acc += 0.5 * d * d + 0.5 * std::log(2.0 * 3.14159265358979323846);
        }
        nll_acc += acc / static_cast<double>(task.m_query());
      }
    }
    for (std::size_t d = 0; d < g_meta.size(); ++d) g_meta[d] /= static_cast<double>(cfg.t_tasks);
    state.opt.update(state.w0, g_meta, cfg.maml_meta_lr);
    ++state.iteration;
    if (cb) {
      MamlIterationStats stats;
      stats.query_loss = qloss / static_cast<double>(cfg.t_tasks);
      stats.nll = nll_acc / static_cast<double>(cfg.t_tasks);
      cb(iter, stats, state);
    }
  }
}

}  // namespace simpa
