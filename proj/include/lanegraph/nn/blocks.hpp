#pragma once

#include <string>
#include <vector>

#include "lanegraph/nn/params.hpp"
#include "lanegraph/nn/tensor.hpp"

namespace lanegraph::nn {

// Affine stack with tanh on hidden layers, linear output.
template <typename S>
struct Mlp {
  std::vector<Param<S>*> W;
  std::vector<Param<S>*> b;

  static Mlp create(ParamStore<S>& ps, const std::string& prefix, const std::vector<int>& dims) {
    Mlp m;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
      m.W.push_back(&ps.create(prefix + ".W" + std::to_string(i), dims[i + 1], dims[i]));
      m.b.push_back(&ps.create(prefix + ".b" + std::to_string(i), dims[i + 1], 1, Init::zeros));
    }
    return m;
  }

  VarPtr<S> apply(Tape<S>* t, VarPtr<S> x) const {
    for (std::size_t i = 0; i < W.size(); ++i) {
      x = linear(t, *W[i], b[i], x);
      if (i + 1 < W.size()) x = tanh_op(t, x);
    }
    return x;
  }
};

// Gated recurrent cell. With all-zero parameters the update halves the state:
// z = r = 1/2, candidate = 0, h' = h/2.
template <typename S>
struct GruCell {
  Param<S>*Wz, *Uz, *bz, *Wr, *Ur, *br, *Wn, *Un, *bn;

  static GruCell create(ParamStore<S>& ps, const std::string& prefix, int in_dim, int hidden) {
    GruCell c;
    c.Wz = &ps.create(prefix + ".Wz", hidden, in_dim);
    c.Uz = &ps.create(prefix + ".Uz", hidden, hidden);
    c.bz = &ps.create(prefix + ".bz", hidden, 1, Init::zeros);
    c.Wr = &ps.create(prefix + ".Wr", hidden, in_dim);
    c.Ur = &ps.create(prefix + ".Ur", hidden, hidden);
    c.br = &ps.create(prefix + ".br", hidden, 1, Init::zeros);
    c.Wn = &ps.create(prefix + ".Wn", hidden, in_dim);
    c.Un = &ps.create(prefix + ".Un", hidden, hidden);
    c.bn = &ps.create(prefix + ".bn", hidden, 1, Init::zeros);
    return c;
  }

  // h: n x hidden (state), x: n x in_dim (input); returns the next state
  VarPtr<S> step(Tape<S>* t, const VarPtr<S>& h, const VarPtr<S>& x) const {
    auto z = sigmoid_op(t, add(t, linear(t, *Wz, bz, x), linear<S>(t, *Uz, static_cast<Param<S>*>(nullptr), h)));
    auto r = sigmoid_op(t, add(t, linear(t, *Wr, br, x), linear<S>(t, *Ur, static_cast<Param<S>*>(nullptr), h)));
    auto n = tanh_op(t, add(t, linear(t, *Wn, bn, x), hadamard(t, r, linear<S>(t, *Un, static_cast<Param<S>*>(nullptr), h))));
    return add(t, n, hadamard(t, z, sub(t, h, n)));  // (1-z)*n + z*h
  }
};

// One round of masked attentive message passing:
//   m_ik = f(E_i - E_k),  a_ik = sigmoid(g([E_i,B_i] - [E_k,B_k])),
//   E'_i = GRU(E_i, sum_k a_ik * m_ik)
// Nodes without neighbors receive a zero aggregate.
template <typename S>
struct GatLayer {
  Mlp<S> f;
  Mlp<S> g;
  GruCell<S> gru;

  static GatLayer create(ParamStore<S>& ps, const std::string& prefix, int d) {
    GatLayer l;
    l.f = Mlp<S>::create(ps, prefix + ".f", {d, d, d});
    l.g = Mlp<S>::create(ps, prefix + ".g", {d + 1, d, 1});
    l.gru = GruCell<S>::create(ps, prefix + ".gru", d, d);
    return l;
  }

  // edges: directed (receiver, neighbor) pairs; mask: n x 1 construction flags
  VarPtr<S> propagate(Tape<S>* t, const VarPtr<S>& E,
                      const std::vector<std::pair<int, int>>& edges, const MatX<S>& mask) const {
    const int n = static_cast<int>(E->val.rows());
    VarPtr<S> agg;
    if (edges.empty()) {
      agg = constant<S>(MatX<S>::Zero(n, E->val.cols()));
    } else {
      std::vector<int> recv(edges.size()), nbr(edges.size());
      for (std::size_t i = 0; i < edges.size(); ++i) {
        recv[i] = edges[i].first;
        nbr[i] = edges[i].second;
      }
      auto msg = f.apply(t, sub(t, gather_rows(t, E, recv), gather_rows(t, E, nbr)));
      auto masked = concat_cols(t, E, constant<S>(mask));
      auto att_in = sub(t, gather_rows(t, masked, recv), gather_rows(t, masked, nbr));
      auto att = sigmoid_op(t, g.apply(t, att_in));
      agg = scatter_sum_rows(t, scale_rows(t, msg, att), std::move(recv), n);
    }
    return gru.step(t, E, agg);
  }

  // adjacency-matrix entry point; checks symmetry
  VarPtr<S> propagate_adj(Tape<S>* t, const VarPtr<S>& E,
                          const std::vector<std::vector<std::uint8_t>>& adj,
                          const MatX<S>& mask) const {
    const int n = static_cast<int>(adj.size());
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        if (adj[i][k] != adj[k][i]) fail_validation("gat_propagate: asymmetric adjacency");
        if (adj[i][k] && i != k) edges.push_back({i, k});
      }
    return propagate(t, E, edges, mask);
  }
};

}  // namespace lanegraph::nn
