#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "lanegraph/model/checkpoint.hpp"
#include "lanegraph/model/runtime.hpp"
#include "lanegraph/model/seq_model.hpp"
#include "lanegraph/model/trainer.hpp"
#include "lanegraph/nn/grad_check.hpp"
#include "support/test_util.hpp"

using namespace lanegraph;
using namespace lanegraph::model;
namespace fs = std::filesystem;

namespace {

// 4-node path with one curved lane; W=3
GlobalSample tiny_sample() {
  GlobalSample s;
  s.adj = AdjMatrix::Zero(4, 4);
  s.coords.resize(4, 2);
  s.coords << -0.8, -0.8, 0.0, -0.2, 0.5, 0.4, 0.9, 0.9;
  auto link = [&](int a, int b) { s.adj(a, b) = s.adj(b, a) = 1; };
  link(0, 1);
  link(1, 2);
  link(2, 3);
  link(0, 3);
  s.W = 3;
  s.has_locals = true;
  auto add_local = [&](int sid, int tid, int n_valid, std::uint8_t light) {
    GlobalSample::LocalTarget lt;
    lt.s = sid;
    lt.t = tid;
    lt.n_valid = n_valid;
    lt.light = light;
    lt.coords = Eigen::MatrixXd::Zero(3, 2);
    for (int w = 0; w < n_valid; ++w) {
      lt.coords(w, 0) = 0.1 * (w + 1) * (tid - sid);
      lt.coords(w, 1) = -0.05 * (w + 1);
    }
    s.locals.push_back(lt);
  };
  add_local(0, 1, 2, 1);
  add_local(1, 2, 0, 0);
  add_local(2, 3, 3, 0);
  add_local(0, 3, 1, 1);
  return s;
}

GlobalModelConfig tiny_config(Variant v) {
  GlobalModelConfig cfg;
  cfg.max_nodes = 8;
  cfg.hidden = 8;
  cfg.layers = 2;
  cfg.rounds = 1;
  cfg.K_gmm = 3;
  cfg.K_bern = 2;
  cfg.variant = v;
  return cfg;
}

}  // namespace

TEST_CASE("encode: zero weights collapse initial states to the bias") {
  nn::ParamStore<double> ps(21);
  GlobalGraphModel<double> m(ps, tiny_config(Variant::independent));
  for (auto* p : ps.all()) p->value.setZero();
  ps.at("enc.b").value.setConstant(0.7);
  auto s = tiny_sample();
  // zero GAT parameters halve every state per layer: E = E0 / 2^layers
  auto E = m.encode(nullptr, s.adj, s.coords, 3, nullptr, nullptr);
  for (int i = 0; i < 3; ++i)
    for (int d = 0; d < 8; ++d) CHECK(E->val(i, d) == doctest::Approx(0.7 / 4));
  // pending row comes from the (zeroed) start embedding instead
  for (int d = 0; d < 8; ++d) CHECK(E->val(3, d) == doctest::Approx(0.0));
}

TEST_CASE("encode: empty context returns the start embedding path") {
  nn::ParamStore<double> ps(22);
  GlobalGraphModel<double> m(ps, tiny_config(Variant::independent));
  auto s = tiny_sample();
  auto E = m.encode(nullptr, s.adj, s.coords, 0, nullptr, nullptr);
  CHECK(E->val.rows() == 1);
  CHECK(E->val.allFinite());
}

TEST_CASE("graph_loss: step and candidate counts follow the factorization") {
  for (Variant v : {Variant::coordinate_first, Variant::topology_first, Variant::independent}) {
    nn::ParamStore<double> ps(23);
    GlobalGraphModel<double> m(ps, tiny_config(v));
    auto s = tiny_sample();
    auto loss = m.graph_loss(nullptr, s, nullptr);
    CHECK(loss.steps == 4);
    CHECK(loss.candidates == 1 + 2 + 3);
    CHECK(std::isfinite(loss.coord_nll->val(0, 0)));
    CHECK(std::isfinite(loss.topo_nll->val(0, 0)));
  }
}

TEST_CASE("hier relabeling: generation-ordered sample is invariant") {
  HierGraph h;
  h.global_nodes = {{10, 10}, {40, 12}, {70, 40}};
  h.global_adj = {{0, 1, 0}, {1, 0, 1}, {0, 1, 0}};
  h.W = 2;
  h.order = {2, 1, 0};
  h.fov_m = 100;
  LocalPath lp;
  lp.coords = {{50, 20}, {0, 0}};
  lp.mask = {1, 0};
  h.local_paths[{1, 2}] = lp;
  h.semantics[{1, 2}] = 1;
  auto base = hier_to_sample(h);

  // relabel nodes with sigma = (0 1 2) -> (2 0 1), order updated to match
  HierGraph r;
  r.global_nodes = {h.global_nodes[1], h.global_nodes[2], h.global_nodes[0]};
  r.global_adj = {{0, 1, 1}, {1, 0, 0}, {1, 0, 0}};
  r.W = 2;
  r.order = {1, 0, 2};
  r.fov_m = 100;
  r.local_paths[{0, 1}] = lp;
  r.semantics[{0, 1}] = 1;
  auto relabeled = hier_to_sample(r);

  CHECK((base.adj == relabeled.adj));
  CHECK((base.coords - relabeled.coords).cwiseAbs().maxCoeff() < 1e-12);
  REQUIRE(base.locals.size() == relabeled.locals.size());
  CHECK(base.locals[0].s == relabeled.locals[0].s);
  CHECK(base.locals[0].t == relabeled.locals[0].t);
  CHECK((base.locals[0].coords - relabeled.locals[0].coords).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("hdmapgen: full step loss passes the finite-difference check") {
  auto s = tiny_sample();
  for (Variant v : {Variant::coordinate_first, Variant::topology_first, Variant::independent}) {
    nn::ParamStore<double> ps(24 + static_cast<int>(v));
    HdmapgenModel<double> m(ps, tiny_config(v), s.W, true);
    LossWeights lw;
    auto loss_fn = [&](nn::Tape<double>* t) { return m.total_loss(t, s, lw, nullptr); };
    auto r = nn::grad_check(ps, loss_fn, 1e-5, 256, 7);
    CHECK(r.max_rel_err < 1e-4);
  }
}

TEST_CASE("local decode: prefix rule on mask probabilities") {
  CHECK(effective_valid_length({0.9, 0.6, 0.4, 0.7}) == 2);
  CHECK(effective_valid_length({0.2, 0.9}) == 0);
  CHECK(effective_valid_length({0.9, 0.9, 0.9}) == 3);
}

TEST_CASE("sample: max_nodes one yields a single-node graph") {
  nn::ParamStore<double> ps(26);
  GlobalGraphModel<double> m(ps, tiny_config(Variant::coordinate_first));
  Rng rng(5);
  auto g = m.sample(0.2, 1, rng);
  CHECK(g.coords.rows() == 1);
  CHECK(g.edges.empty());
}

TEST_CASE("sample: deterministic per seed, variants produce valid shapes") {
  for (Variant v : {Variant::coordinate_first, Variant::topology_first, Variant::independent}) {
    nn::ParamStore<double> ps(27);
    GlobalGraphModel<double> m(ps, tiny_config(v));
    Rng r1(99), r2(99);
    auto a = m.sample(0.3, 6, r1);
    auto b = m.sample(0.3, 6, r2);
    REQUIRE(a.coords.rows() == b.coords.rows());
    CHECK((a.coords - b.coords).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.adj == b.adj));
    CHECK(a.adj.rows() <= 6);
    // symmetric adjacency with empty diagonal by construction
    for (int i = 0; i < a.adj.rows(); ++i) {
      CHECK(a.adj(i, i) == 0);
      for (int j = 0; j < a.adj.cols(); ++j) CHECK(a.adj(i, j) == a.adj(j, i));
    }
  }
}

TEST_CASE("seq model: loss, gradient and deterministic sampling") {
  SeqModelConfig cfg;
  cfg.hidden = 12;
  cfg.layers = 2;
  cfg.K_gmm = 3;
  cfg.head_hidden = 8;
  nn::ParamStore<double> ps(28);
  SeqModel<double> m(ps, cfg);

  auto g = testutil::path_graph({{10, 10}, {30, 10}, {30, 40}});
  auto sample = plain_to_seq_sample(g, 100.0);
  LossWeights lw;
  auto loss_fn = [&](nn::Tape<double>* t) { return m.total_loss(t, sample, lw, nullptr); };
  auto r = nn::grad_check(ps, loss_fn, 1e-5, 200, 3);
  CHECK(r.max_rel_err < 1e-4);

  Rng r1(4), r2(4);
  auto a = m.sample(0.5, 20, r1);
  auto b = m.sample(0.5, 20, r2);
  CHECK((a.tokens - b.tokens).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("seq tokens: training tokens reconstruct the source graph") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    PlainGraph g = testutil::random_geometric_graph(rng, 4 + rng.uniform_int(10));
    if (g.edges.empty()) continue;
    auto sample = plain_to_seq_sample(g, 100.0);
    PlainGraph back = seq_tokens_to_graph(sample.tokens, 100.0);
    CHECK(testutil::geo_isomorphic(back, g, 1e-6));
  }
}

TEST_CASE("trainer: single-sample overfit reduces the loss sharply") {
  auto s = tiny_sample();
  auto cfg = tiny_config(Variant::coordinate_first);
  auto factory = [&](nn::ParamStore<double>& ps) {
    return std::make_unique<HdmapgenModel<double>>(ps, cfg, s.W, true);
  };
  Trainer<double, HdmapgenModel<double>, GlobalSample> trainer(factory, 55);
  TrainConfig tc;
  tc.epochs = 150;
  tc.batch = 1;
  tc.lr = 3e-3;
  tc.seed = 1;
  auto records = trainer.fit({s}, {}, tc);
  REQUIRE(records.size() == 150);
  CHECK(records.back().train_total < 0.5 * records.front().train_total);
}

TEST_CASE("trainer: two workers are deterministic at fixed count") {
  auto s1 = tiny_sample();
  auto s2 = tiny_sample();
  s2.coords.array() *= 0.5;
  auto cfg = tiny_config(Variant::independent);
  auto make = [&]() {
    auto factory = [&](nn::ParamStore<double>& ps) {
      return std::make_unique<HdmapgenModel<double>>(ps, cfg, s1.W, true);
    };
    return std::make_unique<Trainer<double, HdmapgenModel<double>, GlobalSample>>(factory, 77);
  };
  TrainConfig tc;
  tc.epochs = 3;
  tc.batch = 2;
  tc.lr = 1e-3;
  tc.jobs = 2;
  auto t1 = make(), t2 = make();
  t1->fit({s1, s2}, {}, tc);
  t2->fit({s1, s2}, {}, tc);
  auto p1 = t1->store().all(), p2 = t2->store().all();
  for (std::size_t i = 0; i < p1.size(); ++i)
    CHECK((p1[i]->value - p2[i]->value).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("checkpoint: snapshot and restore round trip through the runtime") {
  auto s = tiny_sample();
  auto cfg = tiny_config(Variant::topology_first);
  auto factory = [&](nn::ParamStore<float>& ps) {
    return std::make_unique<HdmapgenModel<float>>(ps, cfg, s.W, true);
  };
  Trainer<float, HdmapgenModel<float>, GlobalSample> trainer(factory, 91);
  TrainConfig tc;
  tc.epochs = 2;
  tc.batch = 1;
  tc.lr = 1e-3;
  trainer.fit({s}, {}, tc);

  CheckpointData ckpt = snapshot_store(trainer.store(), trainer.optimizer());
  ckpt.model_kind = "hdmapgen";
  ckpt.config = {{"max_nodes", cfg.max_nodes}, {"hidden", cfg.hidden},
                 {"layers", cfg.layers},       {"rounds", cfg.rounds},
                 {"K_gmm", cfg.K_gmm},         {"K_bern", cfg.K_bern},
                 {"variant", "topology_first"},{"semantics", true}};
  ckpt.fov_m = 120;
  ckpt.W = s.W;
  ckpt.train_sizes = {4};
  ckpt.rng_state = Rng(1).state_string();
  fs::path path = fs::temp_directory_path() / "lg_test_ckpt.bin";
  write_checkpoint(path.string(), ckpt);

  auto runtime = ModelRuntime::load(path.string());
  CHECK(runtime.meta().model_kind == "hdmapgen");
  SampleFlags flags;
  AnyMap a = runtime.sample_map(0.2, 123, 0, &flags);
  AnyMap b = runtime.sample_map(0.2, 123, 0, nullptr);
  REQUIRE(std::holds_alternative<HierGraph>(a));
  const HierGraph& ha = std::get<HierGraph>(a);
  const HierGraph& hb = std::get<HierGraph>(b);
  CHECK(hier_to_json(ha).dump() == hier_to_json(hb).dump());
  CHECK(validate(ha).ok());
  CHECK(ha.fov_m == doctest::Approx(120));
  // restored parameters are bit-identical to the snapshot
  nn::ParamStore<float> ps2(91);
  HdmapgenModel<float> m2(ps2, cfg, s.W, true);
  nn::Adam<float> opt2;
  restore_store(ps2, opt2, read_checkpoint(path.string()));
  auto pa = trainer.store().all(), pb = ps2.all();
  for (std::size_t i = 0; i < pa.size(); ++i)
    CHECK((pa[i]->value - pb[i]->value).cwiseAbs().maxCoeff() == 0.0f);
  fs::remove(path);
}
