#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "lanegraph/nn/tensor.hpp"
#include "lanegraph/rng.hpp"

namespace lanegraph::nn {

enum class Init { zeros, uniform_fan };

inline std::uint64_t name_hash(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
  return h;
}

// Named parameter collection. Initialization is seeded per name so the same
// (seed, architecture) always produces identical weights regardless of
// construction order.
template <typename S>
class ParamStore {
 public:
  explicit ParamStore(std::uint64_t seed = 0) : seed_(seed) {}

  Param<S>& create(const std::string& name, int rows, int cols, Init init = Init::uniform_fan) {
    if (index_.count(name)) fail_internal("duplicate parameter name: " + name);
    auto p = std::make_unique<Param<S>>();
    p->name = name;
    p->value.resize(rows, cols);
    if (init == Init::zeros) {
      p->value.setZero();
    } else {
      Rng rng(derive_seed(seed_, name_hash(name)));
      double limit = std::sqrt(6.0 / (rows + cols));
      for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) p->value(r, c) = static_cast<S>(rng.uniform(-limit, limit));
    }
    p->grad = MatX<S>::Zero(rows, cols);
    index_[name] = items_.size();
    items_.push_back(std::move(p));
    return *items_.back();
  }

  Param<S>& at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) fail_internal("unknown parameter: " + name);
    return *items_[it->second];
  }

  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  void zero_grads() {
    for (auto& p : items_) p->grad.setZero();
  }

  std::size_t count() const { return items_.size(); }

  std::size_t total_size() const {
    std::size_t n = 0;
    for (const auto& p : items_) n += p->value.size();
    return n;
  }

  std::vector<Param<S>*> all() {
    std::vector<Param<S>*> out;
    out.reserve(items_.size());
    for (auto& p : items_) out.push_back(p.get());
    return out;
  }

  std::uint64_t seed() const { return seed_; }
  std::string version = "1";

 private:
  std::uint64_t seed_;
  std::vector<std::unique_ptr<Param<S>>> items_;
  std::map<std::string, std::size_t> index_;
};

template <typename S>
struct Adam {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long steps = 0;

  void step(ParamStore<S>& store) {
    steps++;
    const double bc1 = 1.0 - std::pow(beta1, steps);
    const double bc2 = 1.0 - std::pow(beta2, steps);
    for (Param<S>* p : store.all()) {
      if (p->m.size() == 0) {
        p->m = MatX<S>::Zero(p->value.rows(), p->value.cols());
        p->v = MatX<S>::Zero(p->value.rows(), p->value.cols());
      }
      p->m = static_cast<S>(beta1) * p->m + static_cast<S>(1 - beta1) * p->grad;
      p->v = static_cast<S>(beta2) * p->v.array().matrix() +
             static_cast<S>(1 - beta2) * p->grad.cwiseProduct(p->grad);
      auto m_hat = p->m.array() / static_cast<S>(bc1);
      auto v_hat = p->v.array() / static_cast<S>(bc2);
      p->value.array() -= static_cast<S>(lr) * m_hat / (v_hat.sqrt() + static_cast<S>(eps));
      if (!p->value.allFinite())
        fail_internal("non-finite parameter after optimizer step: " + p->name);
    }
  }
};

}  // namespace lanegraph::nn
