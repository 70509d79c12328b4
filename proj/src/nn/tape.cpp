/**
 * Copyright (c) The introspect Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "introspect/nn/tape.hpp"

#include <cmath>

#include <fmt/format.h>

#include "introspect/nn/functional.hpp"

namespace introspect::nn {

void zero_grad(std::span<Param* const> params) {
  for (Param* p : params) p->grad.setZero(p->value.rows(), p->value.cols());
}

Var Tape::push(Matrix value, bool needs_grad, std::function<void(Tape&, std::size_t)> backprop) {
  if (consumed_) throw std::logic_error("Tape: cannot record on a consumed tape");
  nodes_.push_back(Node{std::move(value), Matrix(), nullptr, needs_grad, std::move(backprop)});
  return Var(nodes_.size() - 1);
}

Tape::Node& Tape::node(Var v) {
  if (v.id() >= nodes_.size()) throw std::out_of_range("Tape: unknown variable");
  return nodes_[v.id()];
}

const Tape::Node& Tape::node(Var v) const {
  if (v.id() >= nodes_.size()) throw std::out_of_range("Tape: unknown variable");
  return nodes_[v.id()];
}

void Tape::accumulate(Var v, const Matrix& g) {
  Node& n = node(v);
  if (!n.needs_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

Var Tape::constant(Matrix value) { return push(std::move(value), false, nullptr); }

Var Tape::leaf(Matrix value) { return push(std::move(value), true, nullptr); }

Var Tape::param(Param& p) {
  Var v = push(p.value, true, nullptr);
  nodes_[v.id()].param = &p;
  return v;
}

const Matrix& Tape::value(Var v) const { return node(v).value; }

const Matrix& Tape::grad(Var v) const {
  const Node& n = node(v);
  if (n.grad.size() == 0 && n.value.size() != 0) {
    // Lazily materialize a zero gradient for untouched nodes.
    const_cast<Node&>(n).grad = Matrix::Zero(n.value.rows(), n.value.cols());
  }
  return n.grad;
}

double Tape::scalar(Var v) const {
  const Matrix& m = value(v);
  if (m.size() != 1) throw DimensionError("Tape::scalar: value is not 1x1");
  return m(0, 0);
}

Var Tape::affine(Var w, Var x, Var b) {
  const Matrix& W = value(w);
  const Matrix& X = value(x);
  const Matrix& B = value(b);
  require_dim(X.rows(), W.cols(), "affine input");
  require_dim(B.rows(), W.rows(), "affine bias");
  Matrix out = W * X;
  out.colwise() += B.col(0);
  return push(std::move(out), needs(w) || needs(x) || needs(b), [w, x, b](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    if (t.needs(w)) t.accumulate(w, g * t.value(x).transpose());
    if (t.needs(x)) t.accumulate(x, t.value(w).transpose() * g);
    if (t.needs(b)) t.accumulate(b, g.rowwise().sum());
  });
}

Var Tape::elu(Var x) {
  Matrix out = nn::elu(value(x));
  return push(std::move(out), needs(x), [x](Tape& t, std::size_t self) {
    const Matrix d = t.value(x).unaryExpr([](double v) { return elu_derivative(v); });
    t.accumulate(x, t.nodes_[self].grad.cwiseProduct(d));
  });
}

Var Tape::tanh(Var x) {
  Matrix out = value(x).array().tanh().matrix();
  return push(std::move(out), needs(x), [x](Tape& t, std::size_t self) {
    const Node& n = t.nodes_[self];
    t.accumulate(x, (n.grad.array() * (1.0 - n.value.array().square())).matrix());
  });
}

Var Tape::exp(Var x) {
  Matrix out = value(x).array().exp().matrix();
  return push(std::move(out), needs(x), [x](Tape& t, std::size_t self) {
    const Node& n = t.nodes_[self];
    t.accumulate(x, n.grad.cwiseProduct(n.value));
  });
}

Var Tape::square(Var x) {
  Matrix out = value(x).array().square().matrix();
  return push(std::move(out), needs(x), [x](Tape& t, std::size_t self) {
    t.accumulate(x, 2.0 * t.nodes_[self].grad.cwiseProduct(t.value(x)));
  });
}

Var Tape::add(Var a, Var b) {
  require_dim(value(b).rows(), value(a).rows(), "add rows");
  require_dim(value(b).cols(), value(a).cols(), "add cols");
  Matrix out = value(a) + value(b);
  return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var Tape::sub(Var a, Var b) {
  require_dim(value(b).rows(), value(a).rows(), "sub rows");
  require_dim(value(b).cols(), value(a).cols(), "sub cols");
  Matrix out = value(a) - value(b);
  return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    t.accumulate(a, g);
    if (t.needs(b)) t.accumulate(b, -g);
  });
}

Var Tape::mul(Var a, Var b) {
  require_dim(value(b).rows(), value(a).rows(), "mul rows");
  require_dim(value(b).cols(), value(a).cols(), "mul cols");
  Matrix out = value(a).cwiseProduct(value(b));
  return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    if (t.needs(a)) t.accumulate(a, g.cwiseProduct(t.value(b)));
    if (t.needs(b)) t.accumulate(b, g.cwiseProduct(t.value(a)));
  });
}

Var Tape::mul_const(Var a, const Matrix& c) {
  require_dim(c.rows(), value(a).rows(), "mul_const rows");
  require_dim(c.cols(), value(a).cols(), "mul_const cols");
  Matrix out = value(a).cwiseProduct(c);
  return push(std::move(out), needs(a), [a, c](Tape& t, std::size_t self) {
    t.accumulate(a, t.nodes_[self].grad.cwiseProduct(c));
  });
}

Var Tape::scale(Var a, double s) {
  Matrix out = value(a) * s;
  return push(std::move(out), needs(a), [a, s](Tape& t, std::size_t self) {
    t.accumulate(a, t.nodes_[self].grad * s);
  });
}

Var Tape::add_scalar(Var a, double s) {
  Matrix out = value(a).array() + s;
  return push(std::move(out), needs(a), [a](Tape& t, std::size_t self) {
    t.accumulate(a, t.nodes_[self].grad);
  });
}

Var Tape::clamp(Var x, double lo, double hi) {
  Matrix out = value(x).cwiseMax(lo).cwiseMin(hi);
  return push(std::move(out), needs(x), [x, lo, hi](Tape& t, std::size_t self) {
    const Matrix& in = t.value(x);
    const Matrix mask = in.unaryExpr([lo, hi](double v) { return (v >= lo && v <= hi) ? 1.0 : 0.0; });
    t.accumulate(x, t.nodes_[self].grad.cwiseProduct(mask));
  });
}

Var Tape::concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const Index cols = value(parts.front()).cols();
  Index rows = 0;
  bool any = false;
  for (Var p : parts) {
    require_dim(value(p).cols(), cols, "concat_rows cols");
    rows += value(p).rows();
    any = any || needs(p);
  }
  Matrix out(rows, cols);
  Index offset = 0;
  for (Var p : parts) {
    out.middleRows(offset, value(p).rows()) = value(p);
    offset += value(p).rows();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return push(std::move(out), any, [inputs](Tape& t, std::size_t self) {
    const Matrix& g = t.nodes_[self].grad;
    Index off = 0;
    for (Var p : inputs) {
      const Index r = t.value(p).rows();
      if (t.needs(p)) t.accumulate(p, g.middleRows(off, r));
      off += r;
    }
  });
}

Var Tape::rows(Var x, Index start, Index count) {
  const Matrix& in = value(x);
  if (start < 0 || count < 0 || start + count > in.rows()) {
    throw DimensionError(fmt::format("rows: range [{}, {}) outside {} rows", start, start + count, in.rows()));
  }
  Matrix out = in.middleRows(start, count);
  return push(std::move(out), needs(x), [x, start, count](Tape& t, std::size_t self) {
    Matrix g = Matrix::Zero(t.value(x).rows(), t.value(x).cols());
    g.middleRows(start, count) = t.nodes_[self].grad;
    t.accumulate(x, g);
  });
}

Var Tape::sum(Var x) {
  Matrix out(1, 1);
  out(0, 0) = value(x).sum();
  return push(std::move(out), needs(x), [x](Tape& t, std::size_t self) {
    const Matrix& in = t.value(x);
    t.accumulate(x, Matrix::Constant(in.rows(), in.cols(), t.nodes_[self].grad(0, 0)));
  });
}

Var Tape::mean(Var x) {
  const double n = static_cast<double>(value(x).size());
  if (n == 0) throw DimensionError("mean: empty input");
  return scale(sum(x), 1.0 / n);
}

Var Tape::mse(Var a, Var b) {
  require_dim(value(b).rows(), value(a).rows(), "mse rows");
  require_dim(value(b).cols(), value(a).cols(), "mse cols");
  return mean(square(sub(a, b)));
}

Var Tape::kl_std_normal(Var mu, Var logvar) {
  require_dim(value(logvar).rows(), value(mu).rows(), "kl logvar rows");
  require_dim(value(logvar).cols(), value(mu).cols(), "kl logvar cols");
  const double cols = static_cast<double>(value(mu).cols());
  // 0.5 * (exp(lv) + mu^2 - 1 - lv), summed then averaged over samples.
  Var terms = sub(add(exp(logvar), square(mu)), add_scalar(logvar, 1.0));
  return scale(sum(terms), 0.5 / cols);
}

Var Tape::reparameterize(Var mu, Var logvar, const Matrix& eps) {
  require_dim(eps.rows(), value(mu).rows(), "reparameterize eps rows");
  require_dim(eps.cols(), value(mu).cols(), "reparameterize eps cols");
  Var sigma = exp(scale(clamp(logvar, kLogvarMin, kLogvarMax), 0.5));
  return add(mu, mul_const(sigma, eps));
}

Var Tape::log_softmax(Var logits) {
  const Matrix& in = value(logits);
  Matrix out(in.rows(), in.cols());
  for (Index j = 0; j < in.cols(); ++j) {
    const double m = in.col(j).maxCoeff();
    const double lse = m + std::log((in.col(j).array() - m).exp().sum());
    out.col(j) = in.col(j).array() - lse;
  }
  return push(std::move(out), needs(logits), [logits](Tape& t, std::size_t self) {
    const Node& n = t.nodes_[self];
    const Matrix p = n.value.array().exp().matrix();
    Matrix g = n.grad;
    const Eigen::RowVectorXd gsum = n.grad.colwise().sum();
    for (Index j = 0; j < g.cols(); ++j) g.col(j) -= p.col(j) * gsum(j);
    t.accumulate(logits, g);
  });
}

Var Tape::pick(Var x, std::span<const int> index) {
  const Matrix& in = value(x);
  require_dim(static_cast<Index>(index.size()), in.cols(), "pick index");
  Matrix out(1, in.cols());
  for (Index j = 0; j < in.cols(); ++j) {
    const int r = index[static_cast<std::size_t>(j)];
    if (r < 0 || r >= in.rows()) throw DimensionError(fmt::format("pick: row {} out of range", r));
    out(0, j) = in(r, j);
  }
  std::vector<int> idx(index.begin(), index.end());
  return push(std::move(out), needs(x), [x, idx](Tape& t, std::size_t self) {
    Matrix g = Matrix::Zero(t.value(x).rows(), t.value(x).cols());
    const Matrix& up = t.nodes_[self].grad;
    for (Index j = 0; j < g.cols(); ++j) g(idx[static_cast<std::size_t>(j)], j) = up(0, j);
    t.accumulate(x, g);
  });
}

void Tape::backward(Var loss) {
  if (consumed_) throw std::logic_error("Tape: backward called on a consumed tape");
  if (value(loss).size() != 1) throw DimensionError("Tape::backward: loss must be 1x1");
  consumed_ = true;
  node(loss).grad = Matrix::Ones(1, 1);
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad.size() == 0) continue;
    if (n.backprop) n.backprop(*this, i);
    if (n.param != nullptr) n.param->grad += n.grad;
  }
}

}  // namespace introspect::nn
