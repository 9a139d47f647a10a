#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lanegraph/model/dataset.hpp"
#include "lanegraph/nn/blocks.hpp"
#include "lanegraph/nn/heads.hpp"
#include "lanegraph/rng.hpp"

namespace lanegraph::model {

enum class Variant { coordinate_first, topology_first, independent };

inline std::string variant_name(Variant v) {
  switch (v) {
    case Variant::coordinate_first: return "coordinate_first";
    case Variant::topology_first: return "topology_first";
    case Variant::independent: return "independent";
  }
  return "?";
}

inline Variant variant_from_name(const std::string& s) {
  if (s == "coordinate_first") return Variant::coordinate_first;
  if (s == "topology_first") return Variant::topology_first;
  if (s == "independent") return Variant::independent;
  fail_config("unknown variant: " + s);
}

struct GlobalModelConfig {
  int max_nodes = 64;  // adjacency pad budget
  int hidden = 64;
  int layers = 7;
  int rounds = 1;
  int K_gmm = 20;
  int K_bern = 20;
  Variant variant = Variant::coordinate_first;
};

// Per-step loss pieces accumulated over a graph.
template <typename S>
struct GlobalLoss {
  nn::VarPtr<S> coord_nll;  // sum over steps
  nn::VarPtr<S> topo_nll;   // sum over steps with candidates
  long steps = 0;
  long candidates = 0;
};

template <typename S>
struct StepStates {
  nn::VarPtr<S> E;  // (t+1) x hidden final node states of the step
};

// Autoregressive generator over generation-ordered graphs: recurrent
// attentive message passing, Bernoulli-mixture topology head and 2D GMM
// coordinate head. Used for both the hierarchical global graph and the
// plain-graph baseline.
template <typename S>
class GlobalGraphModel {
 public:
  GlobalGraphModel(nn::ParamStore<S>& ps, const GlobalModelConfig& cfg) : cfg_(cfg) {
    W_L_ = &ps.create("enc.W_L", cfg.hidden, cfg.max_nodes);
    W_C_ = &ps.create("enc.W_C", cfg.hidden, 2);
    b_ = &ps.create("enc.b", cfg.hidden, 1, nn::Init::zeros);
    start_ = &ps.create("enc.start", 1, cfg.hidden);
    for (int l = 0; l < cfg.layers; ++l)
      layers_.push_back(nn::GatLayer<S>::create(ps, "gat" + std::to_string(l), cfg.hidden));
    coord_head_ = nn::Mlp<S>::create(ps, "head.coord", {cfg.hidden, cfg.hidden, 5 * cfg.K_gmm});
    theta_head_ = nn::Mlp<S>::create(ps, "head.theta", {cfg.hidden, cfg.hidden, cfg.K_bern});
    alpha_head_ = nn::Mlp<S>::create(ps, "head.alpha", {cfg.hidden, cfg.hidden, cfg.K_bern});
  }

  const GlobalModelConfig& config() const { return cfg_; }

  // Encodes nodes 0..t-1 (generated) plus the pending node t. The pending
  // node exchanges messages with every existing node; its initial state is
  // the learned start embedding, optionally refreshed with an already-sampled
  // coordinate or adjacency row (the conditional second pass).
  nn::VarPtr<S> encode(nn::Tape<S>* tape, const AdjMatrix& adj, const Eigen::MatrixXd& coords,
                       int t, const double* inject_coord, const std::uint8_t* inject_links) const {
    using namespace nn;
    VarPtr<S> pending = param_var(tape, *start_);
    if (inject_coord) {
      MatX<S> c(1, 2);
      c(0, 0) = static_cast<S>(inject_coord[0]);
      c(0, 1) = static_cast<S>(inject_coord[1]);
      pending = add(tape, pending, linear<S>(tape, *W_C_, static_cast<Param<S>*>(nullptr),
                                             constant<S>(std::move(c))));
    }
    if (inject_links) {
      MatX<S> row = MatX<S>::Zero(1, cfg_.max_nodes);
      for (int s = 0; s < t && s < cfg_.max_nodes; ++s) row(0, s) = static_cast<S>(inject_links[s]);
      pending = add(tape, pending, linear<S>(tape, *W_L_, static_cast<Param<S>*>(nullptr),
                                             constant<S>(std::move(row))));
    }

    VarPtr<S> E0;
    if (t == 0) {
      E0 = pending;
    } else {
      if (t > cfg_.max_nodes) fail_validation("encode: graph exceeds the max-node budget");
      MatX<S> padL = MatX<S>::Zero(t, cfg_.max_nodes);
      MatX<S> C(t, 2);
      for (int i = 0; i < t; ++i) {
        for (int j = 0; j < t; ++j) padL(i, j) = static_cast<S>(adj(i, j));
        C(i, 0) = static_cast<S>(coords(i, 0));
        C(i, 1) = static_cast<S>(coords(i, 1));
      }
      auto gen = add(tape, linear(tape, *W_L_, b_, constant<S>(std::move(padL))),
                     linear<S>(tape, *W_C_, static_cast<Param<S>*>(nullptr),
                               constant<S>(std::move(C))));
      E0 = stack_rows<S>(tape, {gen, pending});
    }

    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < t; ++i)
      for (int j = 0; j < t; ++j)
        if (i != j && adj(i, j)) edges.push_back({i, j});
    for (int s = 0; s < t; ++s) {
      edges.push_back({t, s});
      edges.push_back({s, t});
    }
    MatX<S> mask = MatX<S>::Zero(t + 1, 1);
    mask(t, 0) = S(1);

    VarPtr<S> E = E0;
    for (const auto& layer : layers_)
      for (int r = 0; r < cfg_.rounds; ++r) E = layer.propagate(tape, E, edges, mask);
    return E;
  }

  nn::VarPtr<S> coord_raw(nn::Tape<S>* tape, const nn::VarPtr<S>& E, int t) const {
    return coord_head_.apply(tape, nn::gather_rows(tape, E, {t}));
  }

  // Pair features E_t - E_s for s = 0..t-1 feed both topology heads; the
  // mixture weights pool over candidates.
  std::pair<nn::VarPtr<S>, nn::VarPtr<S>> topo_raw(nn::Tape<S>* tape, const nn::VarPtr<S>& E,
                                                   int t) const {
    using namespace nn;
    std::vector<int> repeat_t(t, t), prev(t);
    for (int s = 0; s < t; ++s) prev[s] = s;
    auto diff = sub(tape, gather_rows(tape, E, repeat_t), gather_rows(tape, E, prev));
    auto theta = theta_head_.apply(tape, diff);
    auto alpha = sum_rows(tape, alpha_head_.apply(tape, diff));
    return {alpha, theta};
  }

  // Teacher-forced loss over the whole graph; states_out (optional) collects
  // each step's final node states for the local decoders.
  GlobalLoss<S> graph_loss(nn::Tape<S>* tape, const GlobalSample& sample,
                           std::vector<StepStates<S>>* states_out) const {
    using namespace nn;
    GlobalLoss<S> loss;
    loss.coord_nll = zero_scalar<S>();
    loss.topo_nll = zero_scalar<S>();
    const int T = sample.size();
    for (int t = 0; t < T; ++t) {
      Eigen::MatrixXd target_c = sample.coords.row(t);
      MatX<S> target_cs = target_c.template cast<S>();
      std::vector<std::uint8_t> target_l(t);
      for (int s = 0; s < t; ++s) target_l[s] = sample.adj(t, s);

      VarPtr<S> E_final;
      if (cfg_.variant == Variant::coordinate_first) {
        auto E1 = encode(tape, sample.adj, sample.coords, t, nullptr, nullptr);
        loss.coord_nll = add(tape, loss.coord_nll, gmm_nll(tape, coord_raw(tape, E1, t), target_cs));
        double cinj[2] = {sample.coords(t, 0), sample.coords(t, 1)};
        auto E2 = encode(tape, sample.adj, sample.coords, t, cinj, nullptr);
        if (t > 0) {
          auto [alpha, theta] = topo_raw(tape, E2, t);
          loss.topo_nll = add(tape, loss.topo_nll, bernmix_nll(tape, alpha, theta, target_l));
          loss.candidates += t;
        }
        E_final = E2;
      } else if (cfg_.variant == Variant::topology_first) {
        auto E1 = encode(tape, sample.adj, sample.coords, t, nullptr, nullptr);
        if (t > 0) {
          auto [alpha, theta] = topo_raw(tape, E1, t);
          loss.topo_nll = add(tape, loss.topo_nll, bernmix_nll(tape, alpha, theta, target_l));
          loss.candidates += t;
        }
        auto E2 = encode(tape, sample.adj, sample.coords, t, nullptr,
                         t > 0 ? target_l.data() : nullptr);
        loss.coord_nll = add(tape, loss.coord_nll, gmm_nll(tape, coord_raw(tape, E2, t), target_cs));
        E_final = E2;
      } else {
        auto E1 = encode(tape, sample.adj, sample.coords, t, nullptr, nullptr);
        loss.coord_nll = add(tape, loss.coord_nll, gmm_nll(tape, coord_raw(tape, E1, t), target_cs));
        if (t > 0) {
          auto [alpha, theta] = topo_raw(tape, E1, t);
          loss.topo_nll = add(tape, loss.topo_nll, bernmix_nll(tape, alpha, theta, target_l));
          loss.candidates += t;
        }
        E_final = E1;
      }
      loss.steps++;
      if (states_out) states_out->push_back({E_final});
    }
    return loss;
  }

  struct SampledGraph {
    AdjMatrix adj;
    Eigen::MatrixXd coords;
    // per created edge: s, t and the feature rows for the local decoders
    struct EdgeContext {
      int s, t;
      Eigen::MatrixXd feat;  // 1 x (4 + 2*hidden): [C_t, C_s, E_t, E_s]
    };
    std::vector<EdgeContext> edges;
  };

  // Autoregressive sampling. Stops when a sampled adjacency row is all-zero
  // past the first node (the pending node is discarded) or at max_nodes.
  SampledGraph sample(double tau, int max_nodes, Rng& rng) const {
    SampledGraph out;
    const int cap = std::min(max_nodes, cfg_.max_nodes);
    AdjMatrix adj = AdjMatrix::Zero(cap, cap);
    Eigen::MatrixXd coords = Eigen::MatrixXd::Zero(cap, 2);
    int T = 0;
    for (int t = 0; t < cap; ++t) {
      double c[2] = {0, 0};
      std::vector<std::uint8_t> links(t, 0);
      nn::VarPtr<S> E_final;
      if (cfg_.variant == Variant::coordinate_first) {
        auto E1 = encode(nullptr, adj, coords, t, nullptr, nullptr);
        auto raw = coord_raw(nullptr, E1, t);
        std::tie(c[0], c[1]) = nn::gmm_sample(raw->val, tau, rng);
        auto E2 = encode(nullptr, adj, coords, t, c, nullptr);
        if (t > 0) {
          auto [alpha, theta] = topo_raw(nullptr, E2, t);
          links = nn::bernmix_sample(alpha->val, theta->val, rng);
        }
        E_final = E2;
      } else if (cfg_.variant == Variant::topology_first) {
        auto E1 = encode(nullptr, adj, coords, t, nullptr, nullptr);
        if (t > 0) {
          auto [alpha, theta] = topo_raw(nullptr, E1, t);
          links = nn::bernmix_sample(alpha->val, theta->val, rng);
        }
        auto E2 = encode(nullptr, adj, coords, t, nullptr, t > 0 ? links.data() : nullptr);
        auto raw = coord_raw(nullptr, E2, t);
        std::tie(c[0], c[1]) = nn::gmm_sample(raw->val, tau, rng);
        E_final = E2;
      } else {
        auto E1 = encode(nullptr, adj, coords, t, nullptr, nullptr);
        auto raw = coord_raw(nullptr, E1, t);
        std::tie(c[0], c[1]) = nn::gmm_sample(raw->val, tau, rng);
        if (t > 0) {
          auto [alpha, theta] = topo_raw(nullptr, E1, t);
          links = nn::bernmix_sample(alpha->val, theta->val, rng);
        }
        E_final = E1;
      }

      if (t > 0) {
        bool any = false;
        for (auto b : links) any = any || b;
        if (!any) break;  // all-zero row: generation complete, drop the node
      }
      coords(t, 0) = c[0];
      coords(t, 1) = c[1];
      for (int s = 0; s < t; ++s)
        if (links[s]) {
          adj(t, s) = adj(s, t) = 1;
          typename SampledGraph::EdgeContext ec;
          ec.s = s;
          ec.t = t;
          ec.feat.resize(1, 4 + 2 * cfg_.hidden);
          ec.feat(0, 0) = c[0];
          ec.feat(0, 1) = c[1];
          ec.feat(0, 2) = coords(s, 0);
          ec.feat(0, 3) = coords(s, 1);
          for (int d = 0; d < cfg_.hidden; ++d) {
            ec.feat(0, 4 + d) = static_cast<double>(E_final->val(t, d));
            ec.feat(0, 4 + cfg_.hidden + d) = static_cast<double>(E_final->val(s, d));
          }
          out.edges.push_back(std::move(ec));
        }
      T = t + 1;
    }
    out.adj = adj.topLeftCorner(T, T);
    out.coords = coords.topRows(T);
    return out;
  }

  // Feature rows [C_t, C_s, E_t, E_s] for the ground-truth edges of step t.
  nn::VarPtr<S> edge_features(nn::Tape<S>* tape, const GlobalSample& sample,
                              const nn::VarPtr<S>& E, int t,
                              const std::vector<int>& partners) const {
    using namespace nn;
    const int m = static_cast<int>(partners.size());
    MatX<S> cpart(m, 4);
    std::vector<int> rows_t(m, t);
    for (int i = 0; i < m; ++i) {
      cpart(i, 0) = static_cast<S>(sample.coords(t, 0));
      cpart(i, 1) = static_cast<S>(sample.coords(t, 1));
      cpart(i, 2) = static_cast<S>(sample.coords(partners[i], 0));
      cpart(i, 3) = static_cast<S>(sample.coords(partners[i], 1));
    }
    auto Et = gather_rows(tape, E, rows_t);
    auto Es = gather_rows(tape, E, partners);
    return concat_cols(tape, constant<S>(std::move(cpart)), concat_cols(tape, Et, Es));
  }

 private:
  GlobalModelConfig cfg_;
  nn::Param<S>*W_L_, *W_C_, *b_, *start_;
  std::vector<nn::GatLayer<S>> layers_;
  nn::Mlp<S> coord_head_, theta_head_, alpha_head_;
};

}  // namespace lanegraph::model
