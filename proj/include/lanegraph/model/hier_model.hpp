#pragma once

#include "lanegraph/model/global_model.hpp"

namespace lanegraph::model {

struct LossWeights {
  double coord = 1.0, topo = 1.0, local = 1.0, mask = 1.0, sem = 1.0;
};

// Scalar report of one teacher-forced pass (sums plus normalizers).
struct LossReport {
  double coord_nll = 0;
  double topo_bce = 0;
  double local_mse = 0;
  double mask_bce = 0;
  double sem_bce = 0;
  long steps = 0, candidates = 0, valid_coords = 0, mask_slots = 0, edges = 0;

  double coord_per_step() const { return steps ? coord_nll / steps : 0; }
  double topo_per_candidate() const { return candidates ? topo_bce / candidates : 0; }
  double local_per_coord() const { return valid_coords ? local_mse / valid_coords : 0; }
  double mask_per_slot() const { return mask_slots ? mask_bce / mask_slots : 0; }
  double sem_per_edge() const { return edges ? sem_bce / edges : 0; }

  void accumulate(const LossReport& o) {
    coord_nll += o.coord_nll;
    topo_bce += o.topo_bce;
    local_mse += o.local_mse;
    mask_bce += o.mask_bce;
    sem_bce += o.sem_bce;
    steps += o.steps;
    candidates += o.candidates;
    valid_coords += o.valid_coords;
    mask_slots += o.mask_slots;
    edges += o.edges;
  }
};

struct HierDecodeOut {
  Eigen::MatrixXd coords;          // W x 2
  std::vector<double> mask_probs;  // W
  double light_prob = 0;
};

// Hierarchical generator: the global model plus single-shot local-path and
// traffic-light decoders over per-edge contexts.
template <typename S>
class HdmapgenModel {
 public:
  HdmapgenModel(nn::ParamStore<S>& ps, const GlobalModelConfig& cfg, int W, bool with_semantics = true)
      : global_(ps, cfg), W_(W), with_sem_(with_semantics) {
    const int in = 4 + 2 * cfg.hidden;
    if (W_ > 0)
      local_head_ = nn::Mlp<S>::create(ps, "head.local", {in, cfg.hidden, 3 * W_});
    if (with_sem_) sem_head_ = nn::Mlp<S>::create(ps, "head.sem", {in, cfg.hidden, 1});
  }

  const GlobalGraphModel<S>& global() const { return global_; }
  int W() const { return W_; }
  bool with_semantics() const { return with_sem_; }

  // Weighted total teacher-forced loss for one graph; sums are normalized by
  // their own counters so every component is a per-item mean.
  nn::VarPtr<S> total_loss(nn::Tape<S>* tape, const GlobalSample& sample, const LossWeights& lw,
                           LossReport* report) const {
    using namespace nn;
    std::vector<StepStates<S>> states;
    GlobalLoss<S> gl = global_.graph_loss(tape, sample, &states);

    VarPtr<S> local_mse = zero_scalar<S>();
    VarPtr<S> mask_bce = zero_scalar<S>();
    VarPtr<S> sem_bce = zero_scalar<S>();
    long valid_coords = 0, mask_slots = 0, n_edges = 0;

    if ((W_ > 0 || with_sem_) && !sample.locals.empty()) {
      // group ground-truth edges by their creation step
      std::vector<std::vector<const GlobalSample::LocalTarget*>> by_step(sample.size());
      for (const auto& lt : sample.locals) by_step[lt.t].push_back(&lt);
      for (int t = 0; t < sample.size(); ++t) {
        if (by_step[t].empty()) continue;
        std::vector<int> partners;
        for (auto* lt : by_step[t]) partners.push_back(lt->s);
        auto feat = global_.edge_features(tape, sample, states[t].E, t, partners);
        const int m = static_cast<int>(partners.size());
        if (W_ > 0) {
          auto raw = local_head_.apply(tape, feat);
          auto coord_pred = slice_cols(tape, raw, 0, 2 * W_);
          auto mask_logits = slice_cols(tape, raw, 2 * W_, W_);
          MatX<S> coord_t = MatX<S>::Zero(m, 2 * W_);
          MatX<S> coord_w = MatX<S>::Zero(m, 2 * W_);
          MatX<S> mask_t = MatX<S>::Zero(m, W_);
          for (int i = 0; i < m; ++i) {
            const auto* lt = by_step[t][static_cast<std::size_t>(i)];
            for (int w = 0; w < lt->n_valid; ++w) {
              coord_t(i, 2 * w) = static_cast<S>(lt->coords(w, 0));
              coord_t(i, 2 * w + 1) = static_cast<S>(lt->coords(w, 1));
              coord_w(i, 2 * w) = coord_w(i, 2 * w + 1) = S(1);
              mask_t(i, w) = S(1);
            }
            valid_coords += 2 * lt->n_valid;
          }
          local_mse = add(tape, local_mse, mse_weighted(tape, coord_pred, coord_t, coord_w));
          mask_bce = add(tape, mask_bce,
                         bce_logits(tape, mask_logits, mask_t, MatX<S>(MatX<S>::Ones(m, W_))));
          mask_slots += static_cast<long>(m) * W_;
        }
        if (with_sem_) {
          auto logits = sem_head_.apply(tape, feat);
          MatX<S> target(m, 1);
          for (int i = 0; i < m; ++i) target(i, 0) = by_step[t][static_cast<std::size_t>(i)]->light ? S(1) : S(0);
          sem_bce = add(tape, sem_bce, bce_logits(tape, logits, target, MatX<S>(MatX<S>::Ones(m, 1))));
        }
        n_edges += m;
      }
    }

    if (report) {
      report->coord_nll = static_cast<double>(gl.coord_nll->val(0, 0));
      report->topo_bce = static_cast<double>(gl.topo_nll->val(0, 0));
      report->local_mse = static_cast<double>(local_mse->val(0, 0));
      report->mask_bce = static_cast<double>(mask_bce->val(0, 0));
      report->sem_bce = static_cast<double>(sem_bce->val(0, 0));
      report->steps = gl.steps;
      report->candidates = gl.candidates;
      report->valid_coords = valid_coords;
      report->mask_slots = mask_slots;
      report->edges = n_edges;
    }

    using nn::scale;
    auto total = scale(tape, gl.coord_nll, static_cast<S>(lw.coord / std::max(1L, gl.steps)));
    total = add(tape, total,
                scale(tape, gl.topo_nll, static_cast<S>(lw.topo / std::max(1L, gl.candidates))));
    total = add(tape, total,
                scale(tape, local_mse, static_cast<S>(lw.local / std::max(1L, valid_coords))));
    total = add(tape, total,
                scale(tape, mask_bce, static_cast<S>(lw.mask / std::max(1L, mask_slots))));
    total = add(tape, total, scale(tape, sem_bce, static_cast<S>(lw.sem / std::max(1L, n_edges))));
    return total;
  }

  // Decodes the padded local path and the traffic-light probability for one
  // sampled edge context.
  HierDecodeOut decode_edge(const Eigen::MatrixXd& feat) const {
    HierDecodeOut out;
    auto fv = nn::constant<S>(feat.template cast<S>());
    if (W_ > 0) {
      auto raw = local_head_.apply(nullptr, fv);
      out.coords.resize(W_, 2);
      out.mask_probs.resize(W_);
      for (int w = 0; w < W_; ++w) {
        out.coords(w, 0) = static_cast<double>(raw->val(0, 2 * w));
        out.coords(w, 1) = static_cast<double>(raw->val(0, 2 * w + 1));
        double logit = static_cast<double>(raw->val(0, 2 * W_ + w));
        out.mask_probs[w] = 0.5 * (std::tanh(0.5 * logit) + 1.0);
      }
    }
    if (with_sem_) {
      auto logits = sem_head_.apply(nullptr, fv);
      out.light_prob = 0.5 * (std::tanh(0.5 * static_cast<double>(logits->val(0, 0))) + 1.0);
    }
    return out;
  }

 private:
  GlobalGraphModel<S> global_;
  int W_ = 0;
  bool with_sem_ = true;
  nn::Mlp<S> local_head_, sem_head_;
};

// Thresholds mask probabilities at 0.5 and forces the prefix form: the first
// sub-threshold slot truncates the path.
inline int effective_valid_length(const std::vector<double>& mask_probs) {
  int n = 0;
  for (double p : mask_probs) {
    if (p < 0.5) break;
    n++;
  }
  return n;
}

}  // namespace lanegraph::model
