#pragma once

#include "lanegraph/model/dataset.hpp"
#include "lanegraph/model/hier_model.hpp"
#include "lanegraph/nn/blocks.hpp"
#include "lanegraph/nn/heads.hpp"

namespace lanegraph::model {

struct SeqModelConfig {
  int hidden = 256;
  int layers = 2;
  int K_gmm = 20;
  int head_hidden = 128;
};

// Decoder-only stroke model: stacked gated recurrent cells emitting a 2D GMM
// over offsets and a 3-way state categorical per step.
template <typename S>
class SeqModel {
 public:
  SeqModel(nn::ParamStore<S>& ps, const SeqModelConfig& cfg) : cfg_(cfg) {
    for (int l = 0; l < cfg.layers; ++l)
      cells_.push_back(nn::GruCell<S>::create(ps, "rnn" + std::to_string(l),
                                              l == 0 ? 5 : cfg.hidden, cfg.hidden));
    head_ = nn::Mlp<S>::create(ps, "head.seq",
                               {cfg.hidden, cfg.head_hidden, 5 * cfg.K_gmm + 3});
  }

  const SeqModelConfig& config() const { return cfg_; }

  // Teacher-forced loss: inputs are the shifted tokens (start token first),
  // targets are the actual offsets and states.
  nn::VarPtr<S> total_loss(nn::Tape<S>* tape, const SeqSample& sample, const LossWeights& lw,
                           LossReport* report) const {
    using namespace nn;
    const int m = static_cast<int>(sample.tokens.rows());
    std::vector<VarPtr<S>> hs(cells_.size());
    for (std::size_t l = 0; l < cells_.size(); ++l)
      hs[l] = constant<S>(MatX<S>::Zero(1, cfg_.hidden));

    std::vector<VarPtr<S>> outputs;
    outputs.reserve(m);
    for (int i = 0; i < m; ++i) {
      MatX<S> x(1, 5);
      if (i == 0) {
        x.setZero();
        x(0, 2) = S(1);  // start token: the next point begins a new lane
      } else {
        for (int c = 0; c < 5; ++c) x(0, c) = static_cast<S>(sample.tokens(i - 1, c));
      }
      VarPtr<S> inp = constant<S>(std::move(x));
      for (std::size_t l = 0; l < cells_.size(); ++l) {
        hs[l] = cells_[l].step(tape, hs[l], inp);
        inp = hs[l];
      }
      outputs.push_back(inp);
    }
    auto H = stack_rows(tape, outputs);
    auto raw = head_.apply(tape, H);
    auto gmm = slice_cols(tape, raw, 0, 5 * cfg_.K_gmm);
    auto qlogits = slice_cols(tape, raw, 5 * cfg_.K_gmm, 3);

    MatX<S> offsets = sample.tokens.leftCols(2).template cast<S>();
    auto nll = gmm_nll(tape, gmm, offsets);
    auto ce = softmax_ce(tape, qlogits, sample.labels);

    if (report) {
      report->coord_nll = static_cast<double>(nll->val(0, 0));
      report->topo_bce = static_cast<double>(ce->val(0, 0));
      report->steps = m;
      report->candidates = m;
    }
    auto total = scale(tape, nll, static_cast<S>(lw.coord / m));
    return add(tape, total, scale(tape, ce, static_cast<S>(lw.topo / m)));
  }

  // Samples tokens until q=3 or max_len; truncation is flagged.
  struct Sampled {
    Eigen::MatrixXd tokens;
    bool truncated = false;
    bool degenerate = false;  // ended on the very first token
  };
  Sampled sample(double tau, int max_len, Rng& rng) const {
    using namespace nn;
    std::vector<MatX<S>> hs(cells_.size(), MatX<S>::Zero(1, cfg_.hidden));
    MatX<S> x(1, 5);
    x.setZero();
    x(0, 2) = S(1);
    std::vector<Eigen::RowVector3d> qs;
    Eigen::MatrixXd tokens(max_len, 5);
    int n = 0;
    bool ended = false;
    while (n < max_len) {
      VarPtr<S> inp = constant<S>(x);
      for (std::size_t l = 0; l < cells_.size(); ++l) {
        auto h = constant<S>(hs[l]);
        auto hn = cells_[l].step(nullptr, h, inp);
        hs[l] = hn->val;
        inp = hn;
      }
      auto raw = head_.apply(nullptr, inp);
      MatX<S> gmm_row = raw->val.leftCols(5 * cfg_.K_gmm);
      auto [dx, dy] = gmm_sample(gmm_row, tau, rng);
      MatX<S> qrow = raw->val.rightCols(3);
      int q = categorical_sample(qrow, rng) + 1;
      tokens.row(n) << dx, dy, q == 1 ? 1 : 0, q == 2 ? 1 : 0, q == 3 ? 1 : 0;
      n++;
      x.setZero();
      x(0, 0) = static_cast<S>(dx);
      x(0, 1) = static_cast<S>(dy);
      x(0, 2 + (q - 1)) = S(1);
      if (q == 3) {
        ended = true;
        break;
      }
    }
    Sampled out;
    out.tokens = tokens.topRows(n);
    out.truncated = !ended;
    out.degenerate = (n <= 1);
    return out;
  }

 private:
  SeqModelConfig cfg_;
  std::vector<nn::GruCell<S>> cells_;
  nn::Mlp<S> head_;
};

}  // namespace lanegraph::model
