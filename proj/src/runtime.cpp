#include "lanegraph/model/runtime.hpp"

#include <variant>

#include "lanegraph/error.hpp"
#include "lanegraph/model/seq_model.hpp"
#include "lanegraph/model/trainer.hpp"

namespace lanegraph::model {

namespace {

GlobalModelConfig global_config_from_json(const Json& cfg) {
  GlobalModelConfig g;
  g.max_nodes = cfg.at("max_nodes").get<int>();
  g.hidden = cfg.at("hidden").get<int>();
  g.layers = cfg.at("layers").get<int>();
  g.rounds = cfg.at("rounds").get<int>();
  g.K_gmm = cfg.at("K_gmm").get<int>();
  g.K_bern = cfg.at("K_bern").get<int>();
  g.variant = variant_from_name(cfg.at("variant").get<std::string>());
  return g;
}

SeqModelConfig seq_config_from_json(const Json& cfg) {
  SeqModelConfig s;
  s.hidden = cfg.at("hidden").get<int>();
  s.layers = cfg.at("rnn_layers").get<int>();
  s.K_gmm = cfg.at("K_gmm").get<int>();
  s.head_hidden = cfg.at("head_hidden").get<int>();
  return s;
}

template <typename S>
struct GlobalRt {
  nn::ParamStore<S> store;
  HdmapgenModel<S> model;

  GlobalRt(const CheckpointData& d)
      : store(d.param_seed),
        model(store, global_config_from_json(d.config), d.W,
              d.config.value("semantics", false)) {
    nn::Adam<S> opt;
    restore_store(store, opt, d);
  }
};

template <typename S>
struct SeqRt {
  nn::ParamStore<S> store;
  SeqModel<S> model;

  SeqRt(const CheckpointData& d) : store(d.param_seed), model(store, seq_config_from_json(d.config)) {
    nn::Adam<S> opt;
    restore_store(store, opt, d);
  }
};

}  // namespace

struct ModelRuntime::Impl {
  CheckpointData meta;
  std::variant<std::monostate, GlobalRt<float>, GlobalRt<double>, SeqRt<float>, SeqRt<double>> rt;

  template <typename S>
  HierGraph sample_global(const GlobalRt<S>& g, double tau, std::uint64_t seed, int max_nodes,
                          SampleFlags* flags) const {
    Rng rng(derive_seed(seed, 0x5A11));
    int cap = max_nodes;
    if (cap <= 0) {
      if (meta.train_sizes.empty()) fail_internal("checkpoint lacks a size distribution");
      cap = meta.train_sizes[rng.uniform_int(static_cast<int>(meta.train_sizes.size()))];
    }
    auto sampled = g.model.global().sample(tau, cap, rng);

    HierGraph h;
    h.fov_m = meta.fov_m;
    h.W = meta.W;
    const double half = meta.fov_m / 2;
    const int T = static_cast<int>(sampled.coords.rows());
    for (int i = 0; i < T; ++i)
      h.global_nodes.push_back(
          {(sampled.coords(i, 0) + 1.0) * half, (sampled.coords(i, 1) + 1.0) * half});
    h.global_adj.assign(T, std::vector<std::uint8_t>(T, 0));
    for (int i = 0; i < T; ++i)
      for (int j = 0; j < T; ++j) h.global_adj[i][j] = sampled.adj(i, j);
    h.order.resize(T);
    for (int i = 0; i < T; ++i) h.order[i] = i;  // emitted in generation order

    for (const auto& ec : sampled.edges) {
      auto decoded = g.model.decode_edge(ec.feat);
      Edge key{std::min(ec.s, ec.t), std::max(ec.s, ec.t)};
      if (meta.W > 0) {
        int n_valid = effective_valid_length(decoded.mask_probs);
        LocalPath lp;
        lp.coords.assign(meta.W, Vec2{});
        lp.mask.assign(meta.W, 0);
        for (int w = 0; w < n_valid; ++w) {
          lp.coords[w] = {(decoded.coords(w, 0) + 1.0) * half, (decoded.coords(w, 1) + 1.0) * half};
          lp.mask[w] = 1;
        }
        h.local_paths[key] = std::move(lp);
      }
      if (g.model.with_semantics())
        h.semantics[key] = rng.bernoulli(decoded.light_prob) ? 1 : 0;
    }
    if (flags) {
      flags->nodes = T;
      flags->degenerate = T <= 1;
    }
    auto report = validate(h);
    if (!report.ok()) fail_internal("sampled map violates invariants: " + report.joined());
    return h;
  }

  template <typename S>
  PlainGraph sample_seq(const SeqRt<S>& s, double tau, std::uint64_t seed, int max_nodes,
                        SampleFlags* flags) const {
    Rng rng(derive_seed(seed, 0x5A12));
    int max_len = max_nodes;
    if (max_len <= 0) {
      int longest = 1;
      for (int v : meta.train_sizes) longest = std::max(longest, v);
      max_len = longest + longest / 4;
    }
    auto sampled = s.model.sample(tau, max_len, rng);
    if (flags) {
      flags->truncated = sampled.truncated;
      flags->degenerate = sampled.degenerate;
      flags->nodes = static_cast<int>(sampled.tokens.rows());
    }
    return seq_tokens_to_graph(sampled.tokens, meta.fov_m);
  }
};

ModelRuntime ModelRuntime::load(const std::string& path) {
  auto impl = std::make_shared<Impl>();
  impl->meta = read_checkpoint(path);
  const bool f32 = impl->meta.dtype == "f32";
  if (impl->meta.model_kind == "seqgen") {
    if (f32)
      impl->rt.emplace<SeqRt<float>>(impl->meta);
    else
      impl->rt.emplace<SeqRt<double>>(impl->meta);
  } else if (impl->meta.model_kind == "hdmapgen" || impl->meta.model_kind == "plaingen") {
    if (f32)
      impl->rt.emplace<GlobalRt<float>>(impl->meta);
    else
      impl->rt.emplace<GlobalRt<double>>(impl->meta);
  } else {
    fail_io("unknown model kind in checkpoint: " + impl->meta.model_kind);
  }
  ModelRuntime r;
  r.impl_ = std::move(impl);
  return r;
}

const CheckpointData& ModelRuntime::meta() const { return impl_->meta; }

AnyMap ModelRuntime::sample_map(double tau, std::uint64_t seed, int max_nodes,
                                SampleFlags* flags) const {
  const Impl& im = *impl_;
  if (std::holds_alternative<GlobalRt<float>>(im.rt))
    return im.sample_global(std::get<GlobalRt<float>>(im.rt), tau, seed, max_nodes, flags);
  if (std::holds_alternative<GlobalRt<double>>(im.rt))
    return im.sample_global(std::get<GlobalRt<double>>(im.rt), tau, seed, max_nodes, flags);
  if (std::holds_alternative<SeqRt<float>>(im.rt))
    return im.sample_seq(std::get<SeqRt<float>>(im.rt), tau, seed, max_nodes, flags);
  if (std::holds_alternative<SeqRt<double>>(im.rt))
    return im.sample_seq(std::get<SeqRt<double>>(im.rt), tau, seed, max_nodes, flags);
  fail_internal("runtime not initialized");
}

}  // namespace lanegraph::model
