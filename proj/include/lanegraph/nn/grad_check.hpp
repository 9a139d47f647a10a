#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "lanegraph/nn/params.hpp"
#include "lanegraph/rng.hpp"

namespace lanegraph::nn {

struct GradCheckResult {
  double max_rel_err = 0;
  int coords_checked = 0;
};

// Central finite differences against the tape gradient of a deterministic
// scalar loss. Checks all coordinates up to max_coords (at least 64 when
// sampling a subset).
inline GradCheckResult grad_check(ParamStore<double>& store,
                                  const std::function<VarPtr<double>(Tape<double>*)>& loss_fn,
                                  double eps = 1e-5, int max_coords = 0, std::uint64_t seed = 1) {
  store.zero_grads();
  {
    Tape<double> tape;
    VarPtr<double> root = loss_fn(&tape);
    if (!std::isfinite(root->val(0, 0))) fail_internal("grad_check: non-finite loss");
    tape.backward(root);
  }
  auto params = store.all();
  std::vector<std::pair<int, long>> coords;  // (param index, flat offset)
  for (std::size_t p = 0; p < params.size(); ++p)
    for (long o = 0; o < params[p]->value.size(); ++o) coords.push_back({static_cast<int>(p), o});

  if (max_coords > 0 && static_cast<int>(coords.size()) > std::max(max_coords, 64)) {
    Rng rng(derive_seed(seed, 0x6c0de));
    // partial Fisher-Yates for a deterministic sample
    int want = std::max(max_coords, 64);
    for (int i = 0; i < want; ++i) {
      int j = i + rng.uniform_int(static_cast<int>(coords.size()) - i);
      std::swap(coords[i], coords[j]);
    }
    coords.resize(want);
  }

  GradCheckResult result;
  for (auto [p, o] : coords) {
    double* cell = params[p]->value.data() + o;
    double analytic = *(params[p]->grad.data() + o);
    double keep = *cell;
    *cell = keep + eps;
    double lp = loss_fn(nullptr)->val(0, 0);
    *cell = keep - eps;
    double lm = loss_fn(nullptr)->val(0, 0);
    *cell = keep;
    double fd = (lp - lm) / (2 * eps);
    double rel = std::abs(fd - analytic) / std::max(1.0, std::abs(fd) + std::abs(analytic));
    result.max_rel_err = std::max(result.max_rel_err, rel);
    result.coords_checked++;
  }
  return result;
}

}  // namespace lanegraph::nn
