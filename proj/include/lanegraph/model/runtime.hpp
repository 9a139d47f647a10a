#pragma once

#include <memory>
#include <string>

#include "lanegraph/json_io.hpp"
#include "lanegraph/model/checkpoint.hpp"

namespace lanegraph::model {

struct SampleFlags {
  bool truncated = false;
  bool degenerate = false;
  int nodes = 0;
};

// A trained model loaded from a checkpoint; samples maps in meters.
// Sampling is deterministic per seed and safe to call concurrently.
class ModelRuntime {
 public:
  static ModelRuntime load(const std::string& path);

  const CheckpointData& meta() const;

  // hdmapgen/plaingen yield a HierGraph; seqgen yields a PlainGraph.
  // max_nodes == 0 draws the cap from the training size distribution.
  AnyMap sample_map(double tau, std::uint64_t seed, int max_nodes = 0,
                    SampleFlags* flags = nullptr) const;

  struct Impl;

 private:
  std::shared_ptr<const Impl> impl_;
};

}  // namespace lanegraph::model
