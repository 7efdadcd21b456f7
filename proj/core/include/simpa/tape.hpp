#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "simpa/tensor.hpp"

namespace simpa::ad {

enum class Op : std::uint8_t {
  kLeaf,
  kAdd,
  kSub,
  kMul,
  kMulCol,
  kScale,
  kAddScalar,
  kMatmul,
  kAddBias,
  kRelu,
  kTanh,
  kSigmoid,
  kSoftplus,
  kExp,
  kLog,
  kSquare,
  kSqrt,
  kRecip,
  kSum,
  kBroadcast,
  kTileRows,
  kColSum,
  kClip01,
  kLogSoftmax,
  kSlice,
  kScatter,
  kReshape,
  kBetaSample,
};

const char* op_name(Op op);

struct Node {
  Op op = Op::kLeaf;
  int in0 = -1;
  int in1 = -1;
  double c = 0.0;       // scalar payload (kScale, kAddScalar)
  std::size_t a = 0;    // offset / rows payload
  std::size_t b = 0;    // length / cols payload
  bool ta = false;      // matmul transpose flags
  bool tb = false;
  Tensor val;
  std::vector<Tensor> aux;  // cached masks / sampler derivatives
};

class Tape;

// Lightweight handle into a tape. Values are computed eagerly at node
// creation, so a Var always carries a concrete tensor.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  bool valid() const { return tape != nullptr && id >= 0; }
  const Tensor& value() const;
  double scalar() const { return value().value(); }
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Tensor value);
  int size() const { return static_cast<int>(nodes_.size()); }
  const Node& node(int id) const { return nodes_[id]; }
  Node& node(int id) { return nodes_[id]; }

  // Finite-check toggle; on by default. Non-finite forward values throw
  // NumericError naming the offending node.
  bool check_finite = true;

  int emit(Node n);

 private:
  std::vector<Node> nodes_;
};

// ---- graph builders ----
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var mul_col(Var x, Var v);  // x:(n,c) * v:(n,1) broadcast across columns
Var scale(Var a, double c);
Var add_scalar(Var a, double c);
Var neg(Var a);
Var matmul(Var a, Var b, bool trans_a = false, bool trans_b = false);
Var add_bias(Var x, Var bias);
Var relu(Var a);
Var tanh(Var a);
Var sigmoid(Var a);
Var softplus(Var a);
Var exp(Var a);
Var log(Var a);
Var square(Var a);
Var sqrt(Var a);
Var recip(Var a);
Var sum(Var a);
Var mean(Var a);
Var broadcast(Var scalar, std::vector<std::size_t> shape);
Var tile_rows(Var rowvec, std::size_t n_rows);
Var col_sum(Var a);
Var clip01(Var a);
Var log_softmax(Var a);
Var slice(Var flat, std::size_t offset, std::size_t len);
Var scatter(Var window, std::size_t offset, std::size_t total_len);
Var reshape(Var a, std::vector<std::size_t> shape);

// z = BetaInvCDF(u; alpha, beta) elementwise; u is fixed noise of shape
// (L, Z), alpha/beta are rank-1 of length Z. The pathwise derivatives
// dz/dalpha, dz/dbeta are cached at forward time and treated as constants
// by further differentiation.
Var beta_sample(Var alpha, Var beta, const Tensor& uniforms);

// Reverse-mode gradients of a scalar output w.r.t. the given leaves.
// Gradients are emitted as ordinary nodes on the same tape, so they can be
// differentiated again (double backprop). Leaves not connected to the
// output yield zero tensors of the leaf's shape.
std::vector<Var> grad(Var output, std::span<const Var> wrt);
inline std::vector<Var> grad(Var output, std::initializer_list<Var> wrt) {
  return grad(output, std::span<const Var>(wrt.begin(), wrt.size()));
}

// d(outer)/d(theta) through one inner gradient step
//   lambda = theta - step_size * d(inner)/d(theta).
// In second-order mode the Hessian-vector term is kept; in first-order mode
// the inner gradient is detached, so d(outer)/d(theta) = d(outer)/d(lambda).
enum class GradMode { kFirstOrder, kSecondOrder };

template <typename InnerFn, typename OuterFn>
Tensor grad_through_update(const Tensor& theta, double step_size, GradMode mode,
                           InnerFn&& inner_loss, OuterFn&& outer_loss) {
  Tape tape;
  Var th = tape.leaf(theta);
  Var inner = inner_loss(th);
  Var g = grad(inner, {th})[0];
  Var lam;
  if (mode == GradMode::kSecondOrder) {
    lam = sub(th, scale(g, step_size));
  } else {
    Var g_const = tape.leaf(g.value());
    lam = sub(th, scale(g_const, step_size));
  }
  Var outer = outer_loss(lam);
  return grad(outer, {th})[0].value();
}

}  // namespace simpa::ad
