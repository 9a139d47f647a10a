#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "lanegraph/nn/tensor.hpp"
#include "lanegraph/rng.hpp"

namespace lanegraph::nn {

// Raw 2D GMM head layout per row, K components each:
// [pi logits | mu_x | mu_y | log sigma_x | log sigma_y]
inline int gmm_raw_width(int K) { return 5 * K; }

constexpr double kLogSigmaFloor = -7.0;
constexpr double kThetaClamp = 1e-7;

namespace detail {

template <typename S>
void softmax_row(const Eigen::Array<S, Eigen::Dynamic, 1>& logits,
                 Eigen::Array<S, Eigen::Dynamic, 1>& out) {
  S m = logits.maxCoeff();
  out = (logits - m).exp();
  out /= out.sum();
}

template <typename S>
S logsumexp_row(const Eigen::Array<S, Eigen::Dynamic, 1>& x) {
  S m = x.maxCoeff();
  return m + std::log((x - m).exp().sum());
}

}  // namespace detail

// Sum of 2D diagonal-GMM negative log-likelihoods over all rows.
// raw: n x 5K, targets: n x 2.
template <typename S>
VarPtr<S> gmm_nll(Tape<S>* t, const VarPtr<S>& raw, const MatX<S>& targets) {
  using Arr = Eigen::Array<S, Eigen::Dynamic, 1>;
  const int n = static_cast<int>(raw->val.rows());
  const int K = static_cast<int>(raw->val.cols()) / 5;
  if (raw->val.cols() != 5 * K || targets.rows() != n || targets.cols() != 2)
    fail_internal("gmm_nll: bad shapes (raw " + std::to_string(raw->val.rows()) + "x" +
                  std::to_string(raw->val.cols()) + ", targets " + std::to_string(targets.rows()) +
                  "x" + std::to_string(targets.cols()) + ")");

  S total = 0;
  MatX<S> draw;  // d nll / d raw, filled when a tape is recording
  if (t) draw = MatX<S>::Zero(n, 5 * K);

  for (int i = 0; i < n; ++i) {
    Arr logit = raw->val.row(i).segment(0, K).transpose().array();
    Arr mux = raw->val.row(i).segment(K, K).transpose().array();
    Arr muy = raw->val.row(i).segment(2 * K, K).transpose().array();
    Arr lsx = raw->val.row(i).segment(3 * K, K).transpose().array().max(S(kLogSigmaFloor));
    Arr lsy = raw->val.row(i).segment(4 * K, K).transpose().array().max(S(kLogSigmaFloor));
    Arr sx2 = (S(2) * lsx).exp();
    Arr sy2 = (S(2) * lsy).exp();
    Arr dx = targets(i, 0) - mux;
    Arr dy = targets(i, 1) - muy;

    Arr log_pi = logit - detail::logsumexp_row<S>(logit);
    Arr log_n = -S(std::log(2 * M_PI)) - lsx - lsy - S(0.5) * (dx.square() / sx2 + dy.square() / sy2);
    Arr joint = log_pi + log_n;
    S lse = detail::logsumexp_row<S>(joint);
    total -= lse;

    if (t) {
      Arr resp = (joint - lse).exp();
      Arr pi;
      detail::softmax_row<S>(logit, pi);
      draw.row(i).segment(0, K) = (pi - resp).matrix().transpose();
      draw.row(i).segment(K, K) = (-resp * dx / sx2).matrix().transpose();
      draw.row(i).segment(2 * K, K) = (-resp * dy / sy2).matrix().transpose();
      // zero gradient where the floor clamps
      Arr active_x = (raw->val.row(i).segment(3 * K, K).transpose().array() > S(kLogSigmaFloor)).template cast<S>();
      Arr active_y = (raw->val.row(i).segment(4 * K, K).transpose().array() > S(kLogSigmaFloor)).template cast<S>();
      draw.row(i).segment(3 * K, K) = (resp * (S(1) - dx.square() / sx2) * active_x).matrix().transpose();
      draw.row(i).segment(4 * K, K) = (resp * (S(1) - dy.square() / sy2) * active_y).matrix().transpose();
    }
  }
  MatX<S> y(1, 1);
  y(0, 0) = total;
  auto out = make_var<S>(std::move(y), raw->needs_grad);
  if (t && out->needs_grad) {
    t->push([raw, out, draw = std::move(draw)]() { raw->g() += out->g()(0, 0) * draw; });
  }
  return out;
}

// Draws from the mixture; tau scales the component standard deviations.
// tau == 0 picks the top-weight component's mean (greedy geometry).
template <typename S>
std::pair<double, double> gmm_sample(const MatX<S>& raw_row, double tau, Rng& rng) {
  const int K = static_cast<int>(raw_row.cols()) / 5;
  using Arr = Eigen::Array<S, Eigen::Dynamic, 1>;
  Arr logit = raw_row.row(0).segment(0, K).transpose().array();
  Arr pi;
  detail::softmax_row<S>(logit, pi);
  int k;
  if (tau <= 0) {
    Eigen::Index arg;
    pi.maxCoeff(&arg);
    k = static_cast<int>(arg);
    return {raw_row(0, K + k), raw_row(0, 2 * K + k)};
  }
  std::vector<double> w(K);
  for (int i = 0; i < K; ++i) w[i] = static_cast<double>(pi(i));
  k = rng.categorical(w);
  double sx = std::exp(std::max(static_cast<double>(raw_row(0, 3 * K + k)), kLogSigmaFloor));
  double sy = std::exp(std::max(static_cast<double>(raw_row(0, 4 * K + k)), kLogSigmaFloor));
  double n1 = rng.normal();
  double n2 = rng.normal();
  return {static_cast<double>(raw_row(0, K + k)) + sx * tau * n1,
          static_cast<double>(raw_row(0, 2 * K + k)) + sy * tau * n2};
}

// Negative log-likelihood of a Bernoulli mixture over candidate edges.
// alpha_logits: 1 x Kb (pooled), theta_logits: n x Kb, targets: n flags.
template <typename S>
VarPtr<S> bernmix_nll(Tape<S>* t, const VarPtr<S>& alpha_logits, const VarPtr<S>& theta_logits,
                      const std::vector<std::uint8_t>& targets) {
  using Arr = Eigen::Array<S, Eigen::Dynamic, 1>;
  const int n = static_cast<int>(theta_logits->val.rows());
  const int Kb = static_cast<int>(theta_logits->val.cols());
  if (alpha_logits->val.cols() != Kb || static_cast<int>(targets.size()) != n)
    fail_internal("bernmix_nll: bad shapes");

  Arr alpha_logit = alpha_logits->val.row(0).transpose().array();
  Arr alpha_lp = alpha_logit - detail::logsumexp_row<S>(alpha_logit);

  MatX<S> theta = (S(0.5) * ((S(0.5) * theta_logits->val).array().tanh() + S(1)))
                      .cwiseMax(S(kThetaClamp))
                      .cwiseMin(S(1) - S(kThetaClamp))
                      .matrix();
  Arr ll = Arr::Zero(Kb);
  for (int s = 0; s < n; ++s) {
    for (int k = 0; k < Kb; ++k)
      ll(k) += targets[s] ? std::log(theta(s, k)) : std::log(S(1) - theta(s, k));
  }
  Arr joint = alpha_lp + ll;
  S lse = detail::logsumexp_row<S>(joint);

  MatX<S> y(1, 1);
  y(0, 0) = -lse;
  auto out = make_var<S>(std::move(y), alpha_logits->needs_grad || theta_logits->needs_grad);
  if (t && out->needs_grad) {
    Arr w = (joint - lse).exp();
    Arr alpha;
    detail::softmax_row<S>(alpha_logit, alpha);
    MatX<S> dalpha = (alpha - w).matrix().transpose();
    MatX<S> dtheta(n, Kb);
    for (int s = 0; s < n; ++s) {
      S e = targets[s] ? S(1) : S(0);
      for (int k = 0; k < Kb; ++k) {
        bool clamped = theta(s, k) <= S(kThetaClamp) || theta(s, k) >= S(1) - S(kThetaClamp);
        dtheta(s, k) = clamped ? S(0) : -w(k) * (e - theta(s, k));
      }
    }
    t->push([alpha_logits, theta_logits, out, dalpha = std::move(dalpha), dtheta = std::move(dtheta)]() {
      S go = out->g()(0, 0);
      if (alpha_logits->needs_grad) alpha_logits->g() += go * dalpha;
      if (theta_logits->needs_grad) theta_logits->g() += go * dtheta;
    });
  }
  return out;
}

// Component draw by alpha, then independent Bernoullis (stochastic at all
// temperatures).
template <typename S>
std::vector<std::uint8_t> bernmix_sample(const MatX<S>& alpha_logits, const MatX<S>& theta_logits,
                                         Rng& rng) {
  using Arr = Eigen::Array<S, Eigen::Dynamic, 1>;
  const int n = static_cast<int>(theta_logits.rows());
  const int Kb = static_cast<int>(theta_logits.cols());
  Arr alpha_logit = alpha_logits.row(0).transpose().array();
  Arr alpha;
  detail::softmax_row<S>(alpha_logit, alpha);
  std::vector<double> w(Kb);
  for (int i = 0; i < Kb; ++i) w[i] = static_cast<double>(alpha(i));
  int k = rng.categorical(w);
  std::vector<std::uint8_t> bits(n);
  for (int s = 0; s < n; ++s) {
    double theta = 0.5 * (std::tanh(0.5 * static_cast<double>(theta_logits(s, k))) + 1.0);
    theta = std::min(1.0 - kThetaClamp, std::max(kThetaClamp, theta));
    bits[s] = rng.bernoulli(theta) ? 1 : 0;
  }
  return bits;
}

// Weighted binary cross-entropy on logits (sum over entries).
template <typename S>
VarPtr<S> bce_logits(Tape<S>* t, const VarPtr<S>& logits, const MatX<S>& targets,
                     const MatX<S>& weights) {
  auto stable = [](S l) {  // softplus(l) - used via max trick
    return std::max(l, S(0)) + std::log1p(std::exp(-std::abs(l)));
  };
  S total = 0;
  for (Eigen::Index j = 0; j < logits->val.cols(); ++j)
    for (Eigen::Index i = 0; i < logits->val.rows(); ++i)
      total += weights(i, j) * (stable(logits->val(i, j)) - targets(i, j) * logits->val(i, j));
  MatX<S> y(1, 1);
  y(0, 0) = total;
  auto out = make_var<S>(std::move(y), logits->needs_grad);
  if (t && out->needs_grad) {
    t->push([logits, out, targets, weights]() {
      MatX<S> sig = (S(0.5) * ((S(0.5) * logits->val).array().tanh() + S(1))).matrix();
      logits->g() += out->g()(0, 0) * weights.cwiseProduct(sig - targets);
    });
  }
  return out;
}

// Weighted squared error (sum over entries).
template <typename S>
VarPtr<S> mse_weighted(Tape<S>* t, const VarPtr<S>& pred, const MatX<S>& targets,
                       const MatX<S>& weights) {
  MatX<S> diff = pred->val - targets;
  MatX<S> y(1, 1);
  y(0, 0) = weights.cwiseProduct(diff).cwiseProduct(diff).sum();
  auto out = make_var<S>(std::move(y), pred->needs_grad);
  if (t && out->needs_grad) {
    t->push([pred, out, diff = std::move(diff), weights]() {
      pred->g() += out->g()(0, 0) * S(2) * weights.cwiseProduct(diff);
    });
  }
  return out;
}

// Sum of categorical cross-entropies; logits: n x k.
template <typename S>
VarPtr<S> softmax_ce(Tape<S>* t, const VarPtr<S>& logits, const std::vector<int>& labels) {
  using Arr = Eigen::Array<S, Eigen::Dynamic, 1>;
  const int n = static_cast<int>(logits->val.rows());
  if (static_cast<int>(labels.size()) != n) fail_internal("softmax_ce: label count mismatch");
  S total = 0;
  MatX<S> dlog;
  if (t) dlog.resize(n, logits->val.cols());
  for (int i = 0; i < n; ++i) {
    Arr row = logits->val.row(i).transpose().array();
    S lse = detail::logsumexp_row<S>(row);
    total += lse - logits->val(i, labels[i]);
    if (t) {
      Arr p = (row - lse).exp();
      dlog.row(i) = p.matrix().transpose();
      dlog(i, labels[i]) -= S(1);
    }
  }
  MatX<S> y(1, 1);
  y(0, 0) = total;
  auto out = make_var<S>(std::move(y), logits->needs_grad);
  if (t && out->needs_grad) {
    t->push([logits, out, dlog = std::move(dlog)]() { logits->g() += out->g()(0, 0) * dlog; });
  }
  return out;
}

template <typename S>
int categorical_sample(const MatX<S>& logits_row, Rng& rng) {
  using Arr = Eigen::Array<S, Eigen::Dynamic, 1>;
  Arr row = logits_row.row(0).transpose().array();
  Arr p;
  detail::softmax_row<S>(row, p);
  std::vector<double> w(p.size());
  for (int i = 0; i < p.size(); ++i) w[i] = static_cast<double>(p(i));
  return rng.categorical(w);
}

}  // namespace lanegraph::nn
