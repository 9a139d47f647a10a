#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "lanegraph/map_model.hpp"
#include "lanegraph/preprocess.hpp"

namespace lanegraph::model {

using AdjMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// One training graph in generation order, coordinates normalized to [-1,1].
struct GlobalSample {
  AdjMatrix adj;               // T x T, symmetric
  Eigen::MatrixXd coords;      // T x 2
  struct LocalTarget {
    int t = 0, s = 0;          // generation-order indices, s < t
    Eigen::MatrixXd coords;    // W x 2 (padded; only the first n_valid rows matter)
    int n_valid = 0;
    std::uint8_t light = 0;
  };
  std::vector<LocalTarget> locals;  // empty for plain-graph training
  int W = 0;
  bool has_locals = false;

  int size() const { return static_cast<int>(adj.rows()); }
};

// Stroke sequence sample: tokens are (dx, dy, one-hot q) rows; the pen starts
// at the normalized patch center, so the first token places it.
struct SeqSample {
  Eigen::MatrixXd tokens;   // m x 5
  std::vector<int> labels;  // q-1 per token (0..2)
};

// Converts a preprocessed HierGraph (meters) into a normalized sample.
GlobalSample hier_to_sample(const HierGraph& h);

// Treats the decimated plain graph as the generated graph (baseline input).
GlobalSample plain_to_sample(const PlainGraph& g, double fov_m, std::uint64_t order_seed);

SeqSample plain_to_seq_sample(const PlainGraph& g, double fov_m);

// Reconstructs a plain graph from generated sequence tokens (normalized
// units; denormalized into the fov square around its center).
PlainGraph seq_tokens_to_graph(const Eigen::MatrixXd& tokens, double fov_m);

struct Dataset {
  std::vector<GlobalSample> train;
  std::vector<GlobalSample> val;
  double fov_m = 0;
  int W = 0;
  int max_nodes = 0;  // largest training graph
};

struct SeqDataset {
  std::vector<SeqSample> train;
  std::vector<SeqSample> val;
  double fov_m = 0;
  int max_len = 0;
};

enum class DatasetKind { hier, plain };

// Loads a corpus directory (train/ and val/ of HierGraph JSON). For
// DatasetKind::plain the files are flattened first.
Dataset load_dataset(const std::string& dir, DatasetKind kind, std::uint64_t order_seed = 0);
SeqDataset load_seq_dataset(const std::string& dir);

}  // namespace lanegraph::model
