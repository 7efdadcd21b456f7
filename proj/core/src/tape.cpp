#include "simpa/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "simpa/beta_dist.hpp"
#include "simpa/gemm.hpp"

namespace simpa::ad {
namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ShapeError(msg);
}

Tensor elementwise(const Tensor& x, double (*fn)(double)) {
  Tensor out(x.shape());
  const double* in = x.data();
  double* o = out.data();
  for (std::size_t i = 0; i < x.size(); ++i) o[i] = fn(in[i]);
  return out;
}

double relu_fn(double v) { return v > 0.0 ? v : 0.0; }
double sigmoid_fn(double v) {
  return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
}
double softplus_fn(double v) { return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }
double clip01_fn(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

Var ones_const(Tape& t, std::vector<std::size_t> shape) {
  return t.leaf(Tensor::full(std::move(shape), 1.0));
}

}  // namespace

const char* op_name(Op op) {
  switch (op) {
    case Op::kLeaf: return "leaf";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "mul";
    case Op::kMulCol: return "mul_col";
    case Op::kScale: return "scale";
    case Op::kAddScalar: return "add_scalar";
    case Op::kMatmul: return "matmul";
    case Op::kAddBias: return "add_bias";
    case Op::kRelu: return "relu";
    case Op::kTanh: return "tanh";
    case Op::kSigmoid: return "sigmoid";
    case Op::kSoftplus: return "softplus";
    case Op::kExp: return "exp";
    case Op::kLog: return "log";
    case Op::kSquare: return "square";
    case Op::kSqrt: return "sqrt";
    case Op::kRecip: return "recip";
    case Op::kSum: return "sum";
    case Op::kBroadcast: return "broadcast";
    case Op::kTileRows: return "tile_rows";
    case Op::kColSum: return "col_sum";
    case Op::kClip01: return "clip01";
    case Op::kLogSoftmax: return "log_softmax";
    case Op::kSlice: return "slice";
    case Op::kScatter: return "scatter";
    case Op::kReshape: return "reshape";
    case Op::kBetaSample: return "beta_sample";
  }
  return "?";
}

const Tensor& Var::value() const { return tape->node(id).val; }

Var Tape::leaf(Tensor value) {
  Node n;
  n.op = Op::kLeaf;
  n.val = std::move(value);
  return {this, emit(std::move(n))};
}

int Tape::emit(Node n) {
  if (check_finite && !n.val.all_finite()) {
    throw NumericError(std::string("non-finite value produced by node #") +
                       std::to_string(nodes_.size()) + " (" + op_name(n.op) + ") shape " +
                       n.val.shape_str());
  }
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

namespace {

Var emit_unary(Var a, Op op, Tensor val) {
  Node n;
  n.op = op;
  n.in0 = a.id;
  n.val = std::move(val);
  return {a.tape, a.tape->emit(std::move(n))};
}

Var emit_binary(Var a, Var b, Op op, Tensor val) {
  require(a.tape == b.tape, "operands from different tapes");
  Node n;
  n.op = op;
  n.in0 = a.id;
  n.in1 = b.id;
  n.val = std::move(val);
  return {a.tape, a.tape->emit(std::move(n))};
}

}  // namespace

Var add(Var a, Var b) {
  require(a.value().same_shape(b.value()), "add: shape mismatch " + a.value().shape_str() + " vs " +
                                               b.value().shape_str());
  Tensor out(a.value().shape());
  const double* pa = a.value().data();
  const double* pb = b.value().data();
  double* po = out.data();
  for (std::size_t i = 0; i < out.size(); ++i) po[i] = pa[i] + pb[i];
  return emit_binary(a, b, Op::kAdd, std::move(out));
}

Var sub(Var a, Var b) {
  require(a.value().same_shape(b.value()), "sub: shape mismatch");
  Tensor out(a.value().shape());
  const double* pa = a.value().data();
  const double* pb = b.value().data();
  double* po = out.data();
  for (std::size_t i = 0; i < out.size(); ++i) po[i] = pa[i] - pb[i];
  return emit_binary(a, b, Op::kSub, std::move(out));
}

Var mul(Var a, Var b) {
  require(a.value().same_shape(b.value()), "mul: shape mismatch");
  Tensor out(a.value().shape());
  const double* pa = a.value().data();
  const double* pb = b.value().data();
  double* po = out.data();
  for (std::size_t i = 0; i < out.size(); ++i) po[i] = pa[i] * pb[i];
  return emit_binary(a, b, Op::kMul, std::move(out));
}

Var mul_col(Var x, Var v) {
  const Tensor& xv = x.value();
  const Tensor& vv = v.value();
  require(xv.rank() == 2 && vv.rank() == 2 && vv.cols() == 1 && vv.rows() == xv.rows(),
          "mul_col: expected (n,c) and (n,1)");
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.rows(); ++i) {
    const double s = vv[i];
    for (std::size_t j = 0; j < xv.cols(); ++j) out.at(i, j) = xv.at(i, j) * s;
  }
  return emit_binary(x, v, Op::kMulCol, std::move(out));
}

Var scale(Var a, double c) {
  Tensor out(a.value().shape());
  const double* pa = a.value().data();
  double* po = out.data();
  for (std::size_t i = 0; i < out.size(); ++i) po[i] = pa[i] * c;
  Node n;
  n.op = Op::kScale;
  n.in0 = a.id;
  n.c = c;
  n.val = std::move(out);
  return {a.tape, a.tape->emit(std::move(n))};
}

Var add_scalar(Var a, double c) {
  Tensor out(a.value().shape());
  const double* pa = a.value().data();
  double* po = out.data();
  for (std::size_t i = 0; i < out.size(); ++i) po[i] = pa[i] + c;
  Node n;
  n.op = Op::kAddScalar;
  n.in0 = a.id;
  n.c = c;
  n.val = std::move(out);
  return {a.tape, a.tape->emit(std::move(n))};
}

Var neg(Var a) { return scale(a, -1.0); }

Var matmul(Var a, Var b, bool trans_a, bool trans_b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require(av.rank() == 2 && bv.rank() == 2, "matmul: operands must be rank-2");
  const std::size_t m = trans_a ? av.cols() : av.rows();
  const std::size_t k = trans_a ? av.rows() : av.cols();
  const std::size_t kb = trans_b ? bv.cols() : bv.rows();
  const std::size_t n = trans_b ? bv.rows() : bv.cols();
  require(k == kb, "matmul: inner dimensions disagree " + av.shape_str() + (trans_a ? "^T" : "") +
                       " @ " + bv.shape_str() + (trans_b ? "^T" : ""));
  Tensor out({m, n});
  gemm(trans_a, trans_b, m, n, k, 1.0, av.data(), av.cols(), bv.data(), bv.cols(), 0.0, out.data(),
       n);
  Node node;
  node.op = Op::kMatmul;
  node.in0 = a.id;
  node.in1 = b.id;
  node.ta = trans_a;
  node.tb = trans_b;
  node.val = std::move(out);
  return {a.tape, a.tape->emit(std::move(node))};
}

Var add_bias(Var x, Var bias) {
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  require(xv.rank() == 2 && bv.rank() == 1 && bv.size() == xv.cols(),
          "add_bias: expected (n,c) and (c)");
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.rows(); ++i)
    for (std::size_t j = 0; j < xv.cols(); ++j) out.at(i, j) = xv.at(i, j) + bv[j];
  return emit_binary(x, bias, Op::kAddBias, std::move(out));
}

Var relu(Var a) {
  Tensor out = elementwise(a.value(), relu_fn);
  Tensor mask(a.value().shape());
  const double* pa = a.value().data();
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = pa[i] > 0.0 ? 1.0 : 0.0;
  Node n;
  n.op = Op::kRelu;
  n.in0 = a.id;
  n.val = std::move(out);
  n.aux.push_back(std::move(mask));
  return {a.tape, a.tape->emit(std::move(n))};
}

Var tanh(Var a) { return emit_unary(a, Op::kTanh, elementwise(a.value(), [](double v) { return std::tanh(v); })); }
Var sigmoid(Var a) { return emit_unary(a, Op::kSigmoid, elementwise(a.value(), sigmoid_fn)); }
Var softplus(Var a) { return emit_unary(a, Op::kSoftplus, elementwise(a.value(), softplus_fn)); }
Var exp(Var a) { return emit_unary(a, Op::kExp, elementwise(a.value(), [](double v) { return std::exp(v); })); }
Var log(Var a) { return emit_unary(a, Op::kLog, elementwise(a.value(), [](double v) { return std::log(v); })); }
Var square(Var a) { return emit_unary(a, Op::kSquare, elementwise(a.value(), [](double v) { return v * v; })); }
Var sqrt(Var a) { return emit_unary(a, Op::kSqrt, elementwise(a.value(), [](double v) { return std::sqrt(v); })); }
Var recip(Var a) { return emit_unary(a, Op::kRecip, elementwise(a.value(), [](double v) { return 1.0 / v; })); }

Var sum(Var a) {
  double s = 0.0;
  const double* pa = a.value().data();
  for (std::size_t i = 0; i < a.value().size(); ++i) s += pa[i];
  return emit_unary(a, Op::kSum, Tensor::scalar(s));
}

Var mean(Var a) {
  require(a.value().size() > 0, "mean of empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var broadcast(Var s, std::vector<std::size_t> shape) {
  require(s.value().is_scalar(), "broadcast: input must be scalar");
  Tensor out = Tensor::full(std::move(shape), s.value().value());
  return emit_unary(s, Op::kBroadcast, std::move(out));
}

Var tile_rows(Var rowvec, std::size_t n_rows) {
  const Tensor& v = rowvec.value();
  require(v.rank() == 1, "tile_rows: input must be rank-1");
  Tensor out({n_rows, v.size()});
  for (std::size_t i = 0; i < n_rows; ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out.at(i, j) = v[j];
  Node n;
  n.op = Op::kTileRows;
  n.in0 = rowvec.id;
  n.a = n_rows;
  n.val = std::move(out);
  return {rowvec.tape, rowvec.tape->emit(std::move(n))};
}

Var col_sum(Var a) {
  const Tensor& x = a.value();
  require(x.rank() == 2, "col_sum: input must be rank-2");
  Tensor out({x.cols()});
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out[j] += x.at(i, j);
  return emit_unary(a, Op::kColSum, std::move(out));
}

Var clip01(Var a) {
  Tensor out = elementwise(a.value(), clip01_fn);
  Tensor mask(a.value().shape());
  const double* pa = a.value().data();
  for (std::size_t i = 0; i < mask.size(); ++i)
    mask[i] = (pa[i] > 0.0 && pa[i] < 1.0) ? 1.0 : 0.0;
  Node n;
  n.op = Op::kClip01;
  n.in0 = a.id;
  n.val = std::move(out);
  n.aux.push_back(std::move(mask));
  return {a.tape, a.tape->emit(std::move(n))};
}

Var log_softmax(Var a) {
  const Tensor& x = a.value();
  require(x.rank() == 2, "log_softmax: input must be rank-2");
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double mx = x.at(i, 0);
    for (std::size_t j = 1; j < x.cols(); ++j) mx = std::max(mx, x.at(i, j));
    double lse = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) lse += std::exp(x.at(i, j) - mx);
    lse = mx + std::log(lse);
    for (std::size_t j = 0; j < x.cols(); ++j) out.at(i, j) = x.at(i, j) - lse;
  }
  return emit_unary(a, Op::kLogSoftmax, std::move(out));
}

Var slice(Var flat, std::size_t offset, std::size_t len) {
  const Tensor& x = flat.value();
  require(x.rank() == 1, "slice: input must be rank-1");
  require(offset + len <= x.size(), "slice: window out of range");
  Tensor out({len});
  for (std::size_t i = 0; i < len; ++i) out[i] = x[offset + i];
  Node n;
  n.op = Op::kSlice;
  n.in0 = flat.id;
  n.a = offset;
  n.b = len;
  n.val = std::move(out);
  return {flat.tape, flat.tape->emit(std::move(n))};
}

Var scatter(Var window, std::size_t offset, std::size_t total_len) {
  const Tensor& x = window.value();
  require(x.rank() == 1, "scatter: input must be rank-1");
  require(offset + x.size() <= total_len, "scatter: window out of range");
  Tensor out({total_len});
  for (std::size_t i = 0; i < x.size(); ++i) out[offset + i] = x[i];
  Node n;
  n.op = Op::kScatter;
  n.in0 = window.id;
  n.a = offset;
  n.b = total_len;
  n.val = std::move(out);
  return {window.tape, window.tape->emit(std::move(n))};
}

Var reshape(Var a, std::vector<std::size_t> shape) {
  require(Tensor::count(shape) == a.value().size(), "reshape: element count mismatch");
  Tensor out(std::move(shape), std::vector<double>(a.value().data(),
                                                   a.value().data() + a.value().size()));
  Node n;
  n.op = Op::kReshape;
  n.in0 = a.id;
  n.val = std::move(out);
  return {a.tape, a.tape->emit(std::move(n))};
}

Var beta_sample(Var alpha, Var beta, const Tensor& uniforms) {
  const Tensor& av = alpha.value();
  const Tensor& bv = beta.value();
  require(av.rank() == 1 && bv.rank() == 1 && av.size() == bv.size(),
          "beta_sample: concentrations must be rank-1 of equal length");
  require(uniforms.rank() == 2 && uniforms.cols() == av.size(),
          "beta_sample: noise must be (L, Z)");
  for (std::size_t d = 0; d < av.size(); ++d) {
    if (!(av[d] > 0.0) || !(bv[d] > 0.0)) {
      throw NumericError("beta_sample: concentration underflow at dim " + std::to_string(d));
    }
  }
  Tensor z(uniforms.shape());
  for (std::size_t l = 0; l < uniforms.rows(); ++l) {
    for (std::size_t d = 0; d < uniforms.cols(); ++d) {
      z.at(l, d) = inc_beta_inv(av[d], bv[d], uniforms.at(l, d));
    }
  }
  Node n;
  n.op = Op::kBetaSample;
  n.in0 = alpha.id;
  n.in1 = beta.id;
  n.val = std::move(z);
  n.aux.push_back(uniforms);  // slot 0: noise (kept for inspection)
  return {alpha.tape, alpha.tape->emit(std::move(n))};
}

namespace {

// Implicit reparameterisation: dz/da = -(dI_z/da) / pdf(z), likewise for b.
// Computed lazily on first backward visit and cached on the node.
void ensure_beta_grads(Tape& t, int id) {
  Node& n = t.node(id);
  if (n.aux.size() >= 3) return;
  const Tensor& av = t.node(n.in0).val;
  const Tensor& bv = t.node(n.in1).val;
  const Tensor& z = n.val;
  Tensor dzda(z.shape());
  Tensor dzdb(z.shape());
  for (std::size_t l = 0; l < z.rows(); ++l) {
    for (std::size_t d = 0; d < z.cols(); ++d) {
      const double a = av[d];
      const double b = bv[d];
      const double x = z.at(l, d);
      double dda, ddb;
      inc_beta_param_grad(a, b, x, &dda, &ddb);
      const double dens = std::max(beta_pdf(a, b, x), 1e-300);
      dzda.at(l, d) = -dda / dens;
      dzdb.at(l, d) = -ddb / dens;
    }
  }
  n.aux.push_back(std::move(dzda));
  n.aux.push_back(std::move(dzdb));
}

struct BackwardCtx {
  std::vector<Var> adj;

  void accumulate(int id, Var g) {
    if (id < 0) return;
    if (static_cast<std::size_t>(id) >= adj.size()) return;
    if (!adj[id].valid()) {
      adj[id] = g;
    } else {
      adj[id] = add(adj[id], g);
    }
  }
};

}  // namespace

std::vector<Var> grad(Var output, std::span<const Var> wrt) {
  Tape& t = *output.tape;
  require(output.value().is_scalar(), "grad: output must be scalar");
  const int n0 = output.id + 1;

  std::vector<char> reach(n0, 0);
  {
    std::vector<int> stack{output.id};
    reach[output.id] = 1;
    while (!stack.empty()) {
      int id = stack.back();
      stack.pop_back();
      const Node& n = t.node(id);
      for (int in : {n.in0, n.in1}) {
        if (in >= 0 && !reach[in]) {
          reach[in] = 1;
          stack.push_back(in);
        }
      }
    }
  }

  std::vector<char> has_wrt(n0, 0);
  for (const Var& w : wrt) {
    require(w.tape == &t, "grad: parameter from a different graph");
    require(w.id >= 0 && w.id < t.size(), "grad: parameter not in graph");
    if (w.id < n0) has_wrt[w.id] = 1;
  }
  for (int id = 0; id < n0; ++id) {
    const Node& n = t.node(id);
    if (n.in0 >= 0 && has_wrt[n.in0]) has_wrt[id] = 1;
    if (n.in1 >= 0 && has_wrt[n.in1]) has_wrt[id] = 1;
  }

  BackwardCtx ctx;
  ctx.adj.resize(n0);
  ctx.adj[output.id] = t.leaf(Tensor::scalar(1.0));

  auto needed = [&](int id) { return id >= 0 && id < n0 && reach[id] && has_wrt[id]; };

  for (int id = output.id; id >= 0; --id) {
    if (!needed(id) || !ctx.adj[id].valid()) continue;
    Var g = ctx.adj[id];
    // Snapshot payloads: emitting gradient nodes may reallocate the tape,
    // so no Node reference may be held across builder calls.
    const Node& n0ref = t.node(id);
    const Op op = n0ref.op;
    const int i0 = n0ref.in0;
    const int i1 = n0ref.in1;
    const double nc = n0ref.c;
    const std::size_t na = n0ref.a;
    const bool ta = n0ref.ta;
    const bool tb = n0ref.tb;
    switch (op) {
      case Op::kLeaf:
        break;
      case Op::kAdd:
        if (needed(i0)) ctx.accumulate(i0, g);
        if (needed(i1)) ctx.accumulate(i1, g);
        break;
      case Op::kSub:
        if (needed(i0)) ctx.accumulate(i0, g);
        if (needed(i1)) ctx.accumulate(i1, neg(g));
        break;
      case Op::kMul:
        if (needed(i0)) ctx.accumulate(i0, mul(g, Var{&t, i1}));
        if (needed(i1)) ctx.accumulate(i1, mul(g, Var{&t, i0}));
        break;
      case Op::kMulCol: {
        Var x{&t, i0};
        Var v{&t, i1};
        if (needed(i0)) ctx.accumulate(i0, mul_col(g, v));
        if (needed(i1)) {
          Var gv = matmul(mul(g, x), ones_const(t, {x.value().cols(), 1}));
          ctx.accumulate(i1, gv);
        }
        break;
      }
      case Op::kScale:
        if (needed(i0)) ctx.accumulate(i0, scale(g, nc));
        break;
      case Op::kAddScalar:
        if (needed(i0)) ctx.accumulate(i0, g);
        break;
      case Op::kMatmul: {
        Var a{&t, i0};
        Var b{&t, i1};
        if (!ta && !tb) {
          if (needed(i0)) ctx.accumulate(i0, matmul(g, b, false, true));
          if (needed(i1)) ctx.accumulate(i1, matmul(a, g, true, false));
        } else if (ta && !tb) {
          if (needed(i0)) ctx.accumulate(i0, matmul(b, g, false, true));
          if (needed(i1)) ctx.accumulate(i1, matmul(a, g, false, false));
        } else if (!ta && tb) {
          if (needed(i0)) ctx.accumulate(i0, matmul(g, b, false, false));
          if (needed(i1)) ctx.accumulate(i1, matmul(g, a, true, false));
        } else {
          if (needed(i0)) ctx.accumulate(i0, matmul(b, g, true, true));
          if (needed(i1)) ctx.accumulate(i1, matmul(g, a, true, true));
        }
        break;
      }
      case Op::kAddBias:
        if (needed(i0)) ctx.accumulate(i0, g);
        if (needed(i1)) ctx.accumulate(i1, col_sum(g));
        break;
      case Op::kRelu:
        if (needed(i0)) {
          Tensor mask = t.node(id).aux[0];
          ctx.accumulate(i0, mul(g, t.leaf(std::move(mask))));
        }
        break;
      case Op::kTanh:
        if (needed(i0)) {
          Var y{&t, id};
          ctx.accumulate(i0, mul(g, add_scalar(scale(square(y), -1.0), 1.0)));
        }
        break;
      case Op::kSigmoid:
        if (needed(i0)) {
          Var y{&t, id};
          ctx.accumulate(i0, mul(g, mul(y, add_scalar(scale(y, -1.0), 1.0))));
        }
        break;
      case Op::kSoftplus:
        if (needed(i0)) ctx.accumulate(i0, mul(g, sigmoid(Var{&t, i0})));
        break;
      case Op::kExp:
        if (needed(i0)) ctx.accumulate(i0, mul(g, Var{&t, id}));
        break;
      case Op::kLog:
        if (needed(i0)) ctx.accumulate(i0, mul(g, recip(Var{&t, i0})));
        break;
      case Op::kSquare:
        if (needed(i0)) ctx.accumulate(i0, mul(g, scale(Var{&t, i0}, 2.0)));
        break;
      case Op::kSqrt:
        if (needed(i0)) ctx.accumulate(i0, mul(g, scale(recip(Var{&t, id}), 0.5)));
        break;
      case Op::kRecip:
        if (needed(i0)) ctx.accumulate(i0, mul(g, scale(square(Var{&t, id}), -1.0)));
        break;
      case Op::kSum:
        if (needed(i0)) ctx.accumulate(i0, broadcast(g, t.node(i0).val.shape()));
        break;
      case Op::kBroadcast:
        if (needed(i0)) ctx.accumulate(i0, sum(g));
        break;
      case Op::kTileRows:
        if (needed(i0)) ctx.accumulate(i0, col_sum(g));
        break;
      case Op::kColSum:
        if (needed(i0)) ctx.accumulate(i0, tile_rows(g, t.node(i0).val.rows()));
        break;
      case Op::kClip01:
        if (needed(i0)) {
          Tensor mask = t.node(id).aux[0];
          ctx.accumulate(i0, mul(g, t.leaf(std::move(mask))));
        }
        break;
      case Op::kLogSoftmax:
        if (needed(i0)) {
          Var y{&t, id};
          Var sm = exp(y);
          Var rs = matmul(g, ones_const(t, {y.value().cols(), 1}));
          ctx.accumulate(i0, sub(g, mul_col(sm, rs)));
        }
        break;
      case Op::kSlice:
        if (needed(i0)) ctx.accumulate(i0, scatter(g, na, t.node(i0).val.size()));
        break;
      case Op::kScatter:
        if (needed(i0)) ctx.accumulate(i0, slice(g, na, t.node(i0).val.size()));
        break;
      case Op::kReshape:
        if (needed(i0)) ctx.accumulate(i0, reshape(g, t.node(i0).val.shape()));
        break;
      case Op::kBetaSample: {
        ensure_beta_grads(t, id);
        Tensor dzda = t.node(id).aux[1];
        Tensor dzdb = t.node(id).aux[2];
        if (needed(i0)) ctx.accumulate(i0, col_sum(mul(g, t.leaf(std::move(dzda)))));
        if (needed(i1)) ctx.accumulate(i1, col_sum(mul(g, t.leaf(std::move(dzdb)))));
        break;
      }
    }
  }

  std::vector<Var> out;
  out.reserve(wrt.size());
  for (const Var& w : wrt) {
    if (w.id < n0 && ctx.adj[w.id].valid()) {
      out.push_back(ctx.adj[w.id]);
    } else {
      out.push_back(t.leaf(Tensor::zeros(w.value().shape())));
    }
  }
  return out;
}

}  // namespace simpa::ad
