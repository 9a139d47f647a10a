#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "lanegraph/error.hpp"

namespace lanegraph::nn {

template <typename S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

// Activation node: value plus lazily allocated gradient accumulator.
template <typename S>
struct Var {
  MatX<S> val;
  MatX<S> grad;
  bool needs_grad = true;

  MatX<S>& g() {
    if (grad.size() == 0) grad = MatX<S>::Zero(val.rows(), val.cols());
    return grad;
  }
};

template <typename S>
using VarPtr = std::shared_ptr<Var<S>>;

template <typename S>
VarPtr<S> make_var(MatX<S> v, bool needs_grad = true) {
  auto p = std::make_shared<Var<S>>();
  p->val = std::move(v);
  p->needs_grad = needs_grad;
  return p;
}

template <typename S>
VarPtr<S> constant(MatX<S> v) {
  return make_var<S>(std::move(v), false);
}

// Reverse-mode tape over the fixed op set below. Passing a null tape to any
// op gives a forward-only evaluation.
template <typename S>
class Tape {
 public:
  void push(std::function<void()> op) { ops_.push_back(std::move(op)); }

  void backward(const VarPtr<S>& scalar_root) {
    if (scalar_root->val.size() != 1) fail_internal("backward: root is not a scalar");
    scalar_root->g().setConstant(S(1));
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
    ops_.clear();
  }

  std::size_t size() const { return ops_.size(); }

 private:
  std::vector<std::function<void()>> ops_;
};

// Learnable tensor with gradient and Adam moments.
template <typename S>
struct Param {
  std::string name;
  MatX<S> value;
  MatX<S> grad;
  MatX<S> m, v;  // optimizer state, allocated on first step
};

// ---- primitive ops ----

// view of a parameter as an activation (e.g. learned start embeddings)
template <typename S>
VarPtr<S> param_var(Tape<S>* t, Param<S>& p) {
  auto out = make_var<S>(p.value);
  if (t) {
    Param<S>* pp = &p;
    t->push([pp, out]() { pp->grad += out->g(); });
  }
  return out;
}

// y = x * W^T (+ b per row); x: n x in, W: out x in, b: out x 1
template <typename S>
VarPtr<S> linear(Tape<S>* t, Param<S>& W, Param<S>* b, const VarPtr<S>& x) {
  if (x->val.cols() != W.value.cols())
    fail_internal("linear: input width " + std::to_string(x->val.cols()) +
                  " does not match parameter " + W.name + " (" + std::to_string(W.value.rows()) +
                  "x" + std::to_string(W.value.cols()) + ")");
  MatX<S> y = x->val * W.value.transpose();
  if (b) y.rowwise() += b->value.col(0).transpose();
  auto out = make_var<S>(std::move(y));
  if (t) {
    Param<S>* Wp = &W;
    t->push([Wp, b, x, out]() {
      const MatX<S>& go = out->g();
      Wp->grad.noalias() += go.transpose() * x->val;
      if (b) b->grad.col(0).noalias() += go.colwise().sum().transpose();
      if (x->needs_grad) x->g().noalias() += go * Wp->value;
    });
  }
  return out;
}

template <typename S>
VarPtr<S> add(Tape<S>* t, const VarPtr<S>& a, const VarPtr<S>& b) {
  auto out = make_var<S>(a->val + b->val, a->needs_grad || b->needs_grad);
  if (t && out->needs_grad) {
    t->push([a, b, out]() {
      if (a->needs_grad) a->g() += out->g();
      if (b->needs_grad) b->g() += out->g();
    });
  }
  return out;
}

template <typename S>
VarPtr<S> sub(Tape<S>* t, const VarPtr<S>& a, const VarPtr<S>& b) {
  auto out = make_var<S>(a->val - b->val, a->needs_grad || b->needs_grad);
  if (t && out->needs_grad) {
    t->push([a, b, out]() {
      if (a->needs_grad) a->g() += out->g();
      if (b->needs_grad) b->g() -= out->g();
    });
  }
  return out;
}

template <typename S>
VarPtr<S> hadamard(Tape<S>* t, const VarPtr<S>& a, const VarPtr<S>& b) {
  auto out = make_var<S>(a->val.cwiseProduct(b->val), a->needs_grad || b->needs_grad);
  if (t && out->needs_grad) {
    t->push([a, b, out]() {
      if (a->needs_grad) a->g() += out->g().cwiseProduct(b->val);
      if (b->needs_grad) b->g() += out->g().cwiseProduct(a->val);
    });
  }
  return out;
}

template <typename S>
VarPtr<S> scale(Tape<S>* t, const VarPtr<S>& x, S c) {
  auto out = make_var<S>(x->val * c, x->needs_grad);
  if (t && out->needs_grad) {
    t->push([x, out, c]() { x->g() += out->g() * c; });
  }
  return out;
}

template <typename S>
VarPtr<S> tanh_op(Tape<S>* t, const VarPtr<S>& x) {
  auto out = make_var<S>(x->val.array().tanh().matrix(), x->needs_grad);
  if (t && out->needs_grad) {
    t->push([x, out]() { x->g().array() += out->g().array() * (S(1) - out->val.array().square()); });
  }
  return out;
}

template <typename S>
VarPtr<S> sigmoid_op(Tape<S>* t, const VarPtr<S>& x) {
  MatX<S> y = (S(0.5) * ((S(0.5) * x->val).array().tanh() + S(1))).matrix();
  auto out = make_var<S>(std::move(y), x->needs_grad);
  if (t && out->needs_grad) {
    t->push([x, out]() {
      x->g().array() += out->g().array() * out->val.array() * (S(1) - out->val.array());
    });
  }
  return out;
}

template <typename S>
VarPtr<S> gather_rows(Tape<S>* t, const VarPtr<S>& x, std::vector<int> idx) {
  MatX<S> y(idx.size(), x->val.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) y.row(i) = x->val.row(idx[i]);
  auto out = make_var<S>(std::move(y), x->needs_grad);
  if (t && out->needs_grad) {
    t->push([x, out, idx = std::move(idx)]() {
      for (std::size_t i = 0; i < idx.size(); ++i) x->g().row(idx[i]) += out->g().row(i);
    });
  }
  return out;
}

template <typename S>
VarPtr<S> scatter_sum_rows(Tape<S>* t, const VarPtr<S>& x, std::vector<int> dst, int n_rows) {
  MatX<S> y = MatX<S>::Zero(n_rows, x->val.cols());
  for (std::size_t i = 0; i < dst.size(); ++i) y.row(dst[i]) += x->val.row(i);
  auto out = make_var<S>(std::move(y), x->needs_grad);
  if (t && out->needs_grad) {
    t->push([x, out, dst = std::move(dst)]() {
      for (std::size_t i = 0; i < dst.size(); ++i) x->g().row(i) += out->g().row(dst[i]);
    });
  }
  return out;
}

// y.row(i) = x.row(i) * s(i); s is an n x 1 var
template <typename S>
VarPtr<S> scale_rows(Tape<S>* t, const VarPtr<S>& x, const VarPtr<S>& s) {
  MatX<S> y = x->val.array().colwise() * s->val.col(0).array();
  auto out = make_var<S>(std::move(y), x->needs_grad || s->needs_grad);
  if (t && out->needs_grad) {
    t->push([x, s, out]() {
      if (x->needs_grad) x->g().array() += out->g().array().colwise() * s->val.col(0).array();
      if (s->needs_grad)
        s->g().col(0).array() += (out->g().array() * x->val.array()).rowwise().sum();
    });
  }
  return out;
}

template <typename S>
VarPtr<S> concat_cols(Tape<S>* t, const VarPtr<S>& a, const VarPtr<S>& b) {
  if (a->val.rows() != b->val.rows()) fail_internal("concat_cols: row mismatch");
  MatX<S> y(a->val.rows(), a->val.cols() + b->val.cols());
  y.leftCols(a->val.cols()) = a->val;
  y.rightCols(b->val.cols()) = b->val;
  auto out = make_var<S>(std::move(y), a->needs_grad || b->needs_grad);
  if (t && out->needs_grad) {
    t->push([a, b, out]() {
      if (a->needs_grad) a->g() += out->g().leftCols(a->val.cols());
      if (b->needs_grad) b->g() += out->g().rightCols(b->val.cols());
    });
  }
  return out;
}

template <typename S>
VarPtr<S> slice_cols(Tape<S>* t, const VarPtr<S>& x, int c0, int n) {
  auto out = make_var<S>(x->val.middleCols(c0, n), x->needs_grad);
  if (t && out->needs_grad) {
    t->push([x, out, c0, n]() { x->g().middleCols(c0, n) += out->g(); });
  }
  return out;
}

// column sums as a single row (used for pooling over candidate edges)
template <typename S>
VarPtr<S> sum_rows(Tape<S>* t, const VarPtr<S>& x) {
  MatX<S> y = x->val.colwise().sum();
  auto out = make_var<S>(std::move(y), x->needs_grad);
  if (t && out->needs_grad) {
    t->push([x, out]() { x->g().rowwise() += out->g().row(0); });
  }
  return out;
}

// vertical stack of equal-width rows (recurrent outputs into one batch)
template <typename S>
VarPtr<S> stack_rows(Tape<S>* t, const std::vector<VarPtr<S>>& rows) {
  if (rows.empty()) fail_internal("stack_rows: empty input");
  Eigen::Index total = 0;
  for (const auto& r : rows) total += r->val.rows();
  MatX<S> y(total, rows[0]->val.cols());
  Eigen::Index at = 0;
  bool needs = false;
  for (const auto& r : rows) {
    y.middleRows(at, r->val.rows()) = r->val;
    at += r->val.rows();
    needs = needs || r->needs_grad;
  }
  auto out = make_var<S>(std::move(y), needs);
  if (t && needs) {
    t->push([rows, out]() {
      Eigen::Index at = 0;
      for (const auto& r : rows) {
        if (r->needs_grad) r->g() += out->g().middleRows(at, r->val.rows());
        at += r->val.rows();
      }
    });
  }
  return out;
}

template <typename S>
VarPtr<S> sum_all(Tape<S>* t, const VarPtr<S>& x) {
  MatX<S> y(1, 1);
  y(0, 0) = x->val.sum();
  auto out = make_var<S>(std::move(y), x->needs_grad);
  if (t && out->needs_grad) {
    t->push([x, out]() { x->g().array() += out->g()(0, 0); });
  }
  return out;
}

template <typename S>
VarPtr<S> zero_scalar() {
  return constant<S>(MatX<S>::Zero(1, 1));
}

}  // namespace lanegraph::nn
