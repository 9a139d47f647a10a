#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lanegraph/nn/blocks.hpp"
#include "lanegraph/nn/grad_check.hpp"
#include "lanegraph/nn/heads.hpp"
#include "lanegraph/nn/params.hpp"
#include "lanegraph/nn/tensor.hpp"

using namespace lanegraph;
using namespace lanegraph::nn;

namespace {

MatX<double> random_mat(Rng& rng, int r, int c, double scale = 1.0) {
  MatX<double> m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = rng.uniform(-scale, scale);
  return m;
}

}  // namespace

TEST_CASE("mlp: zero weights yield the bias vector") {
  ParamStore<double> ps(3);
  auto mlp = Mlp<double>::create(ps, "m", {4, 3});
  ps.at("m.W0").value.setZero();
  ps.at("m.b0").value << 1.5, -2.0, 0.25;
  Rng rng(1);
  auto x = constant<double>(random_mat(rng, 5, 4));
  auto y = mlp.apply(nullptr, x);
  for (int i = 0; i < 5; ++i) {
    CHECK(y->val(i, 0) == doctest::Approx(1.5));
    CHECK(y->val(i, 1) == doctest::Approx(-2.0));
    CHECK(y->val(i, 2) == doctest::Approx(0.25));
  }
}

TEST_CASE("gru: zero parameters halve the state") {
  ParamStore<double> ps(4);
  auto gru = GruCell<double>::create(ps, "g", 3, 3);
  for (auto* p : ps.all()) p->value.setZero();
  Rng rng(2);
  auto h = constant<double>(random_mat(rng, 2, 3));
  auto x = constant<double>(random_mat(rng, 2, 3));
  auto h2 = gru.step(nullptr, h, x);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) CHECK(h2->val(i, j) == doctest::Approx(0.5 * h->val(i, j)));
}

TEST_CASE("mlp and gru gradients match finite differences") {
  ParamStore<double> ps(5);
  auto mlp = Mlp<double>::create(ps, "m", {4, 6, 2});
  auto gru = GruCell<double>::create(ps, "g", 2, 3);
  Rng rng(7);
  MatX<double> xin = random_mat(rng, 5, 4);
  MatX<double> hin = random_mat(rng, 5, 3);
  MatX<double> tgt = random_mat(rng, 5, 3);
  auto loss_fn = [&](Tape<double>* t) {
    auto x = constant<double>(xin);
    auto mid = mlp.apply(t, x);
    auto h = gru.step(t, constant<double>(hin), mid);
    return mse_weighted<double>(t, h, tgt, MatX<double>::Ones(5, 3));
  };
  auto r = grad_check(ps, loss_fn);
  CHECK(r.max_rel_err < 1e-6);
  CHECK(r.coords_checked == static_cast<int>(ps.total_size()));
}

TEST_CASE("linear: shape mismatch raises an error naming tensors") {
  ParamStore<double> ps(6);
  auto mlp = Mlp<double>::create(ps, "m", {4, 2});
  Rng rng(3);
  auto x = constant<double>(random_mat(rng, 5, 3));
  CHECK_THROWS(mlp.apply(nullptr, x));
}

TEST_CASE("gat: isolated node reduces to GRU(E, 0)") {
  ParamStore<double> ps(8);
  auto layer = GatLayer<double>::create(ps, "l", 4);
  Rng rng(4);
  auto E = constant<double>(random_mat(rng, 1, 4));
  MatX<double> mask = MatX<double>::Ones(1, 1);
  auto out = layer.propagate(nullptr, E, {}, mask);
  auto zero_in = constant<double>(MatX<double>::Zero(1, 4));
  auto ref = layer.gru.step(nullptr, E, zero_in);
  CHECK((out->val - ref->val).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gat: identical states and masks update identically") {
  ParamStore<double> ps(9);
  auto layer = GatLayer<double>::create(ps, "l", 4);
  Rng rng(5);
  MatX<double> row = random_mat(rng, 1, 4);
  MatX<double> E(2, 4);
  E.row(0) = row;
  E.row(1) = row;
  MatX<double> mask = MatX<double>::Zero(2, 1);
  auto out = layer.propagate(nullptr, constant<double>(E), {{0, 1}, {1, 0}}, mask);
  CHECK((out->val.row(0) - out->val.row(1)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gat: permutation equivariance on random 6-node graphs") {
  ParamStore<double> ps(10);
  auto layer = GatLayer<double>::create(ps, "l", 5);
  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 6;
    MatX<double> E = random_mat(rng, n, 5);
    MatX<double> mask(n, 1);
    for (int i = 0; i < n; ++i) mask(i, 0) = rng.bernoulli(0.3) ? 1.0 : 0.0;
    std::vector<std::vector<std::uint8_t>> adj(n, std::vector<std::uint8_t>(n, 0));
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng.bernoulli(0.4)) adj[i][j] = adj[j][i] = 1;

    auto out = layer.propagate_adj(nullptr, constant<double>(E), adj, mask);

    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_int(i + 1)]);

    MatX<double> Ep(n, 5), maskp(n, 1);
    std::vector<std::vector<std::uint8_t>> adjp(n, std::vector<std::uint8_t>(n, 0));
    for (int i = 0; i < n; ++i) {
      Ep.row(perm[i]) = E.row(i);
      maskp(perm[i], 0) = mask(i, 0);
      for (int j = 0; j < n; ++j) adjp[perm[i]][perm[j]] = adj[i][j];
    }
    auto outp = layer.propagate_adj(nullptr, constant<double>(Ep), adjp, maskp);
    for (int i = 0; i < n; ++i)
      CHECK((outp->val.row(perm[i]) - out->val.row(i)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("gat: asymmetric adjacency rejected") {
  ParamStore<double> ps(11);
  auto layer = GatLayer<double>::create(ps, "l", 3);
  Rng rng(8);
  auto E = constant<double>(random_mat(rng, 2, 3));
  std::vector<std::vector<std::uint8_t>> adj{{0, 1}, {0, 0}};
  CHECK_THROWS_AS(layer.propagate_adj(nullptr, E, adj, MatX<double>::Zero(2, 1)), Error);
}

TEST_CASE("gmm: standard normal at the mean") {
  // K=1, mu=(0,0), sigma=(1,1), point (0,0): nll = log(2*pi)
  MatX<double> raw = MatX<double>::Zero(1, 5);
  auto nll = gmm_nll<double>(nullptr, constant<double>(raw), MatX<double>::Zero(1, 2));
  CHECK(nll->val(0, 0) == doctest::Approx(1.8378770664093453).epsilon(1e-12));
}

TEST_CASE("gmm: greedy pick at tau zero") {
  // K=2 with pi ~ (0.9, 0.1)
  MatX<double> raw(1, 10);
  raw.setZero();
  raw(0, 0) = std::log(0.9);
  raw(0, 1) = std::log(0.1);
  raw(0, 2) = 3.0;   // mu_x of component 0
  raw(0, 4) = -2.0;  // mu_y of component 0
  Rng rng(9);
  for (int i = 0; i < 20; ++i) {
    auto [x, y] = gmm_sample(raw, 0.0, rng);
    CHECK(x == doctest::Approx(3.0));
    CHECK(y == doctest::Approx(-2.0));
  }
}

TEST_CASE("gmm: sample variance scales as tau squared") {
  MatX<double> raw = MatX<double>::Zero(1, 5);  // K=1, mu 0, sigma 1
  for (double tau : {0.5, 1.0, 2.0}) {
    Rng rng(10);
    double sx = 0, sxx = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      auto [x, y] = gmm_sample(raw, tau, rng);
      (void)y;
      sx += x;
      sxx += x * x;
    }
    double var = sxx / n - (sx / n) * (sx / n);
    CHECK(var > 0.9 * tau * tau);
    CHECK(var < 1.1 * tau * tau);
  }
}

TEST_CASE("gmm: nll invariant to component relabeling") {
  Rng rng(11);
  const int K = 4;
  MatX<double> raw = random_mat(rng, 1, 5 * K);
  MatX<double> point = random_mat(rng, 1, 2);
  auto base = gmm_nll<double>(nullptr, constant<double>(raw), point);
  MatX<double> swapped = raw;
  for (int blk = 0; blk < 5; ++blk) {
    std::swap(swapped(0, blk * K + 1), swapped(0, blk * K + 3));
  }
  auto perm = gmm_nll<double>(nullptr, constant<double>(swapped), point);
  CHECK(base->val(0, 0) == doctest::Approx(perm->val(0, 0)).epsilon(1e-12));
}

TEST_CASE("bernmix: single component half probabilities") {
  MatX<double> alpha = MatX<double>::Zero(1, 1);
  MatX<double> theta = MatX<double>::Zero(3, 1);
  auto nll = bernmix_nll<double>(nullptr, constant<double>(alpha), constant<double>(theta),
                                 {1, 0, 1});
  CHECK(nll->val(0, 0) == doctest::Approx(-3 * std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("bernmix: confident probabilities drive the loss to zero") {
  MatX<double> alpha = MatX<double>::Zero(1, 1);
  MatX<double> theta(3, 1);
  theta << 30.0, -30.0, 30.0;  // logits
  auto nll = bernmix_nll<double>(nullptr, constant<double>(alpha), constant<double>(theta),
                                 {1, 0, 1});
  CHECK(nll->val(0, 0) < 1e-6);
}

TEST_CASE("bernmix: matches the brute-force mixture sum") {
  Rng rng(12);
  const int Kb = 3, n = 4;
  MatX<double> alpha = random_mat(rng, 1, Kb);
  MatX<double> theta = random_mat(rng, n, Kb, 2.0);
  std::vector<std::uint8_t> targets{1, 0, 0, 1};
  auto nll = bernmix_nll<double>(nullptr, constant<double>(alpha), constant<double>(theta), targets);

  // direct summation oracle
  Eigen::ArrayXd al = alpha.row(0).transpose().array();
  Eigen::ArrayXd av = (al - al.maxCoeff()).exp();
  av /= av.sum();
  double p = 0;
  for (int k = 0; k < Kb; ++k) {
    double comp = av(k);
    for (int s = 0; s < n; ++s) {
      double th = 1.0 / (1.0 + std::exp(-theta(s, k)));
      comp *= targets[s] ? th : (1 - th);
    }
    p += comp;
  }
  CHECK(nll->val(0, 0) == doctest::Approx(-std::log(p)).epsilon(1e-10));
}

TEST_CASE("fused heads: gradients match finite differences") {
  ParamStore<double> ps(13);
  const int K = 3, Kb = 2;
  auto head = Mlp<double>::create(ps, "coord", {4, 8, 5 * K});
  auto theta_head = Mlp<double>::create(ps, "theta", {4, 8, Kb});
  auto alpha_head = Mlp<double>::create(ps, "alpha", {4, 8, Kb});
  auto mask_head = Mlp<double>::create(ps, "mask", {4, 8, 6});
  Rng rng(14);
  MatX<double> x = random_mat(rng, 5, 4);
  MatX<double> pts = random_mat(rng, 5, 2);
  std::vector<std::uint8_t> bits{1, 0, 1, 1, 0};
  MatX<double> bce_t = (random_mat(rng, 5, 6).array() > 0).cast<double>();
  MatX<double> bce_w = (random_mat(rng, 5, 6).array() > -0.2).cast<double>();
  std::vector<int> labels{0, 2, 1, 2, 0};

  auto loss_fn = [&](Tape<double>* t) {
    auto xin = constant<double>(x);
    auto raw = head.apply(t, xin);
    auto l1 = gmm_nll<double>(t, raw, pts);
    auto theta = theta_head.apply(t, xin);
    auto alpha = sum_rows(t, alpha_head.apply(t, xin));
    auto l2 = bernmix_nll<double>(t, alpha, theta, bits);
    auto logits = mask_head.apply(t, xin);
    auto l3 = bce_logits<double>(t, logits, bce_t, bce_w);
    auto l4 = softmax_ce<double>(t, slice_cols(t, logits, 0, 3), labels);
    auto l5 = mse_weighted<double>(t, slice_cols(t, raw, K, 2), pts, MatX<double>::Ones(5, 2));
    return add(t, add(t, add(t, l1, l2), add(t, l3, l4)), l5);
  };
  auto r = grad_check(ps, loss_fn);
  CHECK(r.max_rel_err < 1e-6);
}

TEST_CASE("grad_check: quadratic loss is exact") {
  ParamStore<double> ps(15);
  auto& p = ps.create("p", 10, 3);
  (void)p;
  auto loss_fn = [&](Tape<double>* t) {
    auto v = param_var(t, ps.at("p"));
    return scale(t, sum_all(t, hadamard(t, v, v)), 0.5);
  };
  auto r = grad_check(ps, loss_fn);
  CHECK(r.max_rel_err < 1e-8);
}

TEST_CASE("grad_check: corrupted gradient is caught") {
  ParamStore<double> ps(16);
  ps.create("p", 8, 8);
  auto loss_fn = [&](Tape<double>* t) {
    auto v = param_var(t, ps.at("p"));
    auto loss = scale(t, sum_all(t, hadamard(t, v, v)), 0.5);
    if (t) {
      // fault injection: bogus extra gradient contribution
      t->push([&ps]() { ps.at("p").grad.array() += 0.05; });
    }
    return loss;
  };
  auto r = grad_check(ps, loss_fn);
  CHECK(r.max_rel_err > 1e-2);
}

TEST_CASE("grad_check: non-finite loss rejected") {
  ParamStore<double> ps(17);
  ps.create("p", 2, 2);
  auto loss_fn = [&](Tape<double>*) {
    MatX<double> bad(1, 1);
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    return constant<double>(bad);
  };
  CHECK_THROWS_AS(grad_check(ps, loss_fn), Error);
}

TEST_CASE("adam: flags non-finite parameters") {
  ParamStore<float> ps(18);
  ps.create("p", 2, 2);
  Adam<float> opt;
  opt.lr = 1e30;  // force overflow after a few steps
  ps.at("p").grad.setConstant(1e30f);
  bool threw = false;
  try {
    for (int i = 0; i < 4; ++i) opt.step(ps);
  } catch (const Error&) {
    threw = true;
  }
  CHECK(threw);
}

TEST_CASE("param init: deterministic per seed and name") {
  ParamStore<double> a(42), b(42), c(43);
  auto& pa = a.create("x", 4, 4);
  auto& pb = b.create("x", 4, 4);
  auto& pc = c.create("x", 4, 4);
  CHECK((pa.value - pb.value).cwiseAbs().maxCoeff() == 0.0);
  CHECK((pa.value - pc.value).cwiseAbs().maxCoeff() > 0.0);
}
