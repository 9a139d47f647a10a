#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <thread>
#include <vector>

#include "lanegraph/model/hier_model.hpp"
#include "lanegraph/nn/params.hpp"

namespace lanegraph::model {

struct TrainConfig {
  Variant variant = Variant::coordinate_first;
  int layers = 7;
  int rounds = 1;
  int epochs = 30;
  int batch = 32;
  double lr = 1e-4;
  std::uint64_t seed = 0;
  LossWeights weights;
  int hidden = 64;
  int K_gmm = 20;
  int K_bern = 20;
  int jobs = 1;
  bool f64 = false;

  void check() const {
    if (rounds < 1) fail_config("rounds must be >= 1");
    if (layers < 1) fail_config("layers must be >= 1");
    if (epochs < 1) fail_config("epochs must be >= 1");
    if (batch < 1) fail_config("batch must be >= 1");
    if (weights.coord < 0 || weights.topo < 0 || weights.local < 0 || weights.mask < 0 ||
        weights.sem < 0)
      fail_config("loss weights must be non-negative");
  }
};

struct EpochRecord {
  int epoch = 0;
  double train_total = 0;
  LossReport train;
  LossReport val;
  double wall_s = 0;
};

// Minibatch Adam training with optional data-parallel gradient workers.
// Per-sample gradients are reduced in sample order inside each worker and
// workers are reduced in index order, so runs are bit-reproducible at a
// fixed worker count.
template <typename S, typename ModelT, typename SampleT>
class Trainer {
 public:
  using Factory = std::function<std::unique_ptr<ModelT>(nn::ParamStore<S>&)>;

  Trainer(Factory factory, std::uint64_t param_seed) : factory_(factory) {
    master_store_ = std::make_unique<nn::ParamStore<S>>(param_seed);
    master_model_ = factory_(*master_store_);
  }

  ModelT& model() { return *master_model_; }
  nn::ParamStore<S>& store() { return *master_store_; }
  nn::Adam<S>& optimizer() { return opt_; }

  std::vector<EpochRecord> fit(const std::vector<SampleT>& train, const std::vector<SampleT>& val,
                               const TrainConfig& cfg,
                               const std::function<void(const EpochRecord&)>& on_epoch = {}) {
    cfg.check();
    opt_.lr = cfg.lr;
    const int jobs = std::max(1, cfg.jobs);
    ensure_workers(jobs);

    std::vector<EpochRecord> records;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      auto tick = std::chrono::steady_clock::now();
      std::vector<int> order(train.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
      Rng shuffle_rng(derive_seed(cfg.seed, 0xE90C, epoch));
      for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
        std::swap(order[i], order[shuffle_rng.uniform_int(i + 1)]);

      EpochRecord rec;
      rec.epoch = epoch;
      double total_loss = 0;
      long total_samples = 0;

      for (std::size_t at = 0; at < order.size(); at += cfg.batch) {
        std::size_t batch_end = std::min(order.size(), at + cfg.batch);
        std::vector<int> batch(order.begin() + at, order.begin() + batch_end);
        master_store_->zero_grads();
        auto [batch_loss, batch_report] = run_batch(train, batch, cfg, /*with_grad=*/true, jobs);
        const S inv = static_cast<S>(1.0 / batch.size());
        for (auto* p : master_store_->all()) p->grad *= inv;
        opt_.step(*master_store_);
        total_loss += batch_loss;
        total_samples += static_cast<long>(batch.size());
        rec.train.accumulate(batch_report);
      }
      rec.train_total = total_samples ? total_loss / total_samples : 0;

      if (!val.empty()) {
        std::vector<int> all(val.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
        auto [vloss, vreport] = run_batch(val, all, cfg, /*with_grad=*/false, jobs);
        (void)vloss;
        rec.val = vreport;
      }
      rec.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - tick).count();
      records.push_back(rec);
      if (on_epoch) on_epoch(rec);
    }
    return records;
  }

  // Teacher-forced evaluation over a sample set (no parameter updates).
  LossReport evaluate(const std::vector<SampleT>& samples, const TrainConfig& cfg) {
    std::vector<int> all(samples.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    ensure_workers(std::max(1, cfg.jobs));
    return run_batch(samples, all, cfg, false, std::max(1, cfg.jobs)).second;
  }

 private:
  struct Worker {
    std::unique_ptr<nn::ParamStore<S>> store;
    std::unique_ptr<ModelT> model;
  };

  void ensure_workers(int jobs) {
    if (jobs <= 1 || static_cast<int>(workers_.size()) == jobs) return;
    workers_.clear();
    for (int w = 0; w < jobs; ++w) {
      Worker wk;
      wk.store = std::make_unique<nn::ParamStore<S>>(master_store_->seed());
      wk.model = factory_(*wk.store);
      workers_.push_back(std::move(wk));
    }
  }

  std::pair<double, LossReport> run_batch(const std::vector<SampleT>& samples,
                                          const std::vector<int>& batch, const TrainConfig& cfg,
                                          bool with_grad, int jobs) {
    if (jobs <= 1 || batch.size() < 2) {
      return run_chunk(*master_model_, *master_store_, samples, batch, cfg, with_grad,
                       /*into_master=*/true);
    }
    auto masters = master_store_->all();
    const int n_workers = std::min<int>(jobs, static_cast<int>(batch.size()));
    std::vector<std::pair<double, LossReport>> results(n_workers);
    std::vector<std::thread> threads;
    for (int w = 0; w < n_workers; ++w) {
      auto ws = workers_[w].store->all();
      for (std::size_t p = 0; p < masters.size(); ++p) {
        ws[p]->value = masters[p]->value;
        ws[p]->grad.setZero();
      }
    }
    std::size_t chunk = (batch.size() + n_workers - 1) / n_workers;
    for (int w = 0; w < n_workers; ++w) {
      threads.emplace_back([&, w]() {
        std::size_t lo = w * chunk, hi = std::min(batch.size(), (w + 1) * chunk);
        std::vector<int> part(batch.begin() + lo, batch.begin() + hi);
        results[w] = run_chunk(*workers_[w].model, *workers_[w].store, samples, part, cfg,
                               with_grad, false);
      });
    }
    for (auto& th : threads) th.join();

    double loss = 0;
    LossReport report;
    for (int w = 0; w < n_workers; ++w) {
      loss += results[w].first;
      report.accumulate(results[w].second);
      if (with_grad) {
        auto ws = workers_[w].store->all();
        for (std::size_t p = 0; p < masters.size(); ++p) masters[p]->grad += ws[p]->grad;
      }
    }
    return {loss, report};
  }

  std::pair<double, LossReport> run_chunk(ModelT& model, nn::ParamStore<S>& store,
                                          const std::vector<SampleT>& samples,
                                          const std::vector<int>& idxs, const TrainConfig& cfg,
                                          bool with_grad, bool into_master) {
    (void)into_master;
    double loss_sum = 0;
    LossReport report;
    for (int idx : idxs) {
      LossReport one;
      if (with_grad) {
        nn::Tape<S> tape;
        auto loss = model.total_loss(&tape, samples[idx], cfg.weights, &one);
        loss_sum += static_cast<double>(loss->val(0, 0));
        tape.backward(loss);
      } else {
        auto loss = model.total_loss(nullptr, samples[idx], cfg.weights, &one);
        loss_sum += static_cast<double>(loss->val(0, 0));
      }
      report.accumulate(one);
    }
    return {loss_sum, report};
  }

  Factory factory_;
  std::unique_ptr<nn::ParamStore<S>> master_store_;
  std::unique_ptr<ModelT> master_model_;
  std::vector<Worker> workers_;
  nn::Adam<S> opt_;
};

}  // namespace lanegraph::model
