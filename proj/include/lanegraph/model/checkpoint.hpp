#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lanegraph/json_io.hpp"
#include "lanegraph/nn/params.hpp"

namespace lanegraph::model {

// Versioned container: JSON manifest (names, shapes, dtype, model config,
// optimizer and RNG state) followed by raw little-endian arrays.
inline constexpr char kCkptMagic[8] = {'L', 'G', 'C', 'K', 'P', 'T', '0', '1'};

struct ArrayBlob {
  int rows = 0, cols = 0;
  std::vector<double> data;  // widened on read; narrowed on fill as needed
};

struct CheckpointData {
  std::string model_kind;  // hdmapgen | plaingen | seqgen
  std::string dtype;       // f32 | f64
  Json config;             // model/train configuration echo
  double fov_m = 0;
  int W = 0;
  std::vector<int> train_sizes;  // node counts (token counts for seqgen)
  long adam_steps = 0;
  std::string rng_state;
  std::uint64_t param_seed = 0;
  std::map<std::string, ArrayBlob> params;
  std::map<std::string, ArrayBlob> adam_m, adam_v;
};

void write_checkpoint(const std::string& path, const CheckpointData& data);
CheckpointData read_checkpoint(const std::string& path);

template <typename S>
CheckpointData snapshot_store(nn::ParamStore<S>& store, const nn::Adam<S>& opt) {
  CheckpointData d;
  d.dtype = sizeof(S) == 4 ? "f32" : "f64";
  d.param_seed = store.seed();
  d.adam_steps = opt.steps;
  for (auto* p : store.all()) {
    ArrayBlob blob;
    blob.rows = static_cast<int>(p->value.rows());
    blob.cols = static_cast<int>(p->value.cols());
    blob.data.resize(p->value.size());
    for (long i = 0; i < p->value.size(); ++i) blob.data[i] = static_cast<double>(p->value.data()[i]);
    d.params[p->name] = std::move(blob);
    if (p->m.size() > 0) {
      ArrayBlob m, v;
      m.rows = v.rows = blob.rows;
      m.cols = v.cols = blob.cols;
      m.data.resize(p->m.size());
      v.data.resize(p->v.size());
      for (long i = 0; i < p->m.size(); ++i) m.data[i] = static_cast<double>(p->m.data()[i]);
      for (long i = 0; i < p->v.size(); ++i) v.data[i] = static_cast<double>(p->v.data()[i]);
      d.adam_m[p->name] = std::move(m);
      d.adam_v[p->name] = std::move(v);
    }
  }
  return d;
}

template <typename S>
void restore_store(nn::ParamStore<S>& store, nn::Adam<S>& opt, const CheckpointData& d) {
  for (auto* p : store.all()) {
    auto it = d.params.find(p->name);
    if (it == d.params.end()) fail_io("checkpoint missing parameter " + p->name);
    const ArrayBlob& blob = it->second;
    if (blob.rows != p->value.rows() || blob.cols != p->value.cols())
      fail_io("checkpoint shape mismatch for " + p->name);
    for (long i = 0; i < p->value.size(); ++i) p->value.data()[i] = static_cast<S>(blob.data[i]);
    auto mit = d.adam_m.find(p->name);
    if (mit != d.adam_m.end()) {
      p->m.resize(blob.rows, blob.cols);
      p->v.resize(blob.rows, blob.cols);
      const ArrayBlob& vb = d.adam_v.at(p->name);
      for (long i = 0; i < p->m.size(); ++i) p->m.data()[i] = static_cast<S>(mit->second.data[i]);
      for (long i = 0; i < p->v.size(); ++i) p->v.data()[i] = static_cast<S>(vb.data[i]);
    }
  }
  opt.steps = d.adam_steps;
}

}  // namespace lanegraph::model
