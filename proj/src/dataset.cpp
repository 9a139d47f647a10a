#include "lanegraph/model/dataset.hpp"

#include <algorithm>
#include <filesystem>

#include "lanegraph/error.hpp"
#include "lanegraph/graph_utils.hpp"
#include "lanegraph/json_io.hpp"
#include "lanegraph/rng.hpp"

namespace fs = std::filesystem;

namespace lanegraph::model {

GlobalSample hier_to_sample(const HierGraph& h) {
  if (h.fov_m <= 0) fail_validation("hier_to_sample: missing fov");
  auto norm = normalize(h, h.fov_m).graph;
  const int n = norm.node_count();
  std::vector<int> pos(n);
  for (int k = 0; k < n; ++k) pos[norm.order[k]] = k;

  GlobalSample s;
  s.W = norm.W;
  s.has_locals = true;
  s.adj = AdjMatrix::Zero(n, n);
  s.coords.resize(n, 2);
  for (int k = 0; k < n; ++k) {
    const Vec2& p = norm.global_nodes[norm.order[k]];
    s.coords(k, 0) = p.x;
    s.coords(k, 1) = p.y;
  }
  for (auto e : norm.edge_list()) {
    int a = pos[e.first], b = pos[e.second];
    s.adj(a, b) = 1;
    s.adj(b, a) = 1;
  }
  for (auto e : norm.edge_list()) {
    GlobalSample::LocalTarget lt;
    lt.s = std::min(pos[e.first], pos[e.second]);
    lt.t = std::max(pos[e.first], pos[e.second]);
    lt.coords = Eigen::MatrixXd::Zero(norm.W, 2);
    auto it = norm.local_paths.find(e);
    if (it != norm.local_paths.end()) {
      // stored direction is already earlier-generated -> later-generated
      for (int w = 0; w < norm.W; ++w) {
        if (!it->second.mask[w]) break;
        lt.coords(w, 0) = it->second.coords[w].x;
        lt.coords(w, 1) = it->second.coords[w].y;
        lt.n_valid++;
      }
    }
    auto sem = norm.semantics.find(e);
    lt.light = (sem != norm.semantics.end() && sem->second) ? 1 : 0;
    s.locals.push_back(std::move(lt));
  }
  std::sort(s.locals.begin(), s.locals.end(),
            [](const GlobalSample::LocalTarget& a, const GlobalSample::LocalTarget& b) {
              return a.t != b.t ? a.t < b.t : a.s < b.s;
            });
  return s;
}

GlobalSample plain_to_sample(const PlainGraph& g, double fov_m, std::uint64_t order_seed) {
  if (fov_m <= 0) fail_validation("plain_to_sample: missing fov");
  const int n = g.node_count();
  std::vector<std::vector<std::uint8_t>> adj(n, std::vector<std::uint8_t>(n, 0));
  for (auto [a, b] : g.edges) adj[a][b] = adj[b][a] = 1;
  auto order = dfs_order(adj, order_seed);
  std::vector<int> pos(n);
  for (int k = 0; k < n; ++k) pos[order[k]] = k;

  GlobalSample s;
  s.W = 0;
  s.has_locals = false;
  s.adj = AdjMatrix::Zero(n, n);
  s.coords.resize(n, 2);
  const double half = fov_m / 2;
  for (int k = 0; k < n; ++k) {
    const Vec2& p = g.nodes[order[k]];
    s.coords(k, 0) = p.x / half - 1.0;
    s.coords(k, 1) = p.y / half - 1.0;
  }
  for (auto [a, b] : g.edges) {
    s.adj(pos[a], pos[b]) = 1;
    s.adj(pos[b], pos[a]) = 1;
  }
  return s;
}

SeqSample plain_to_seq_sample(const PlainGraph& g, double fov_m) {
  if (fov_m <= 0) fail_validation("plain_to_seq_sample: missing fov");
  SequenceRep rep = to_sequence(g);
  const double half = fov_m / 2;
  auto norm = [&](double v) { return v / half; };  // offsets scale by fov/2

  const int m = static_cast<int>(rep.steps.size()) + 1;
  SeqSample s;
  s.tokens = Eigen::MatrixXd::Zero(m, 5);
  s.labels.resize(m);
  // token 0 moves the pen from the patch center to the first stroke start
  s.tokens(0, 0) = norm(rep.origin.x - fov_m / 2);
  s.tokens(0, 1) = norm(rep.origin.y - fov_m / 2);
  s.tokens(0, 2 + (2 - 1)) = 1;  // q=2: the next point continues this lane
  s.labels[0] = 1;
  for (int i = 1; i < m; ++i) {
    const SeqStep& st = rep.steps[i - 1];
    s.tokens(i, 0) = norm(st.dx);
    s.tokens(i, 1) = norm(st.dy);
    s.tokens(i, 2 + (st.q - 1)) = 1;
    s.labels[i] = st.q - 1;
  }
  return s;
}

PlainGraph seq_tokens_to_graph(const Eigen::MatrixXd& tokens, double fov_m) {
  const double half = fov_m / 2;
  PlainGraph g;
  g.bbox = BBox{0, 0, fov_m, fov_m};
  Vec2 cur{fov_m / 2, fov_m / 2};
  int prev_q = 1;  // the move onto the very first point is never drawn
  std::vector<Vec2> pts;
  std::vector<std::pair<int, int>> segs;
  for (int i = 0; i < tokens.rows(); ++i) {
    Vec2 next{cur.x + tokens(i, 0) * half, cur.y + tokens(i, 1) * half};
    int q = 1;
    for (int c = 0; c < 3; ++c)
      if (tokens(i, 2 + c) > 0.5) q = c + 1;
    pts.push_back(next);
    if (i > 0 && prev_q == 2) segs.push_back({i - 1, i});
    cur = next;
    prev_q = q;
    if (q == 3) break;
  }
  g.nodes = pts;
  for (auto [a, b] : segs) g.edges.push_back({a, b});
  return merge_coincident(g, kMergeTolerance);
}

namespace {

std::vector<std::string> sorted_files(const std::string& dir) {
  std::vector<std::string> files;
  if (!fs::is_directory(dir)) return files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".json") files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

Dataset load_dataset(const std::string& dir, DatasetKind kind, std::uint64_t order_seed) {
  Dataset d;
  int file_idx = 0;
  auto load_split = [&](const std::string& sub, std::vector<GlobalSample>& out) {
    for (const auto& file : sorted_files((fs::path(dir) / sub).string())) {
      HierGraph h = hier_from_json(load_json_file(file));
      if (d.fov_m <= 0) d.fov_m = h.fov_m;
      GlobalSample s;
      if (kind == DatasetKind::hier) {
        if (d.W == 0) d.W = h.W;
        if (h.W != d.W) fail_validation("load_dataset: inconsistent W across dataset");
        s = hier_to_sample(h);
      } else {
        s = plain_to_sample(flatten(h), h.fov_m, derive_seed(order_seed, 0x9fde, file_idx));
      }
      d.max_nodes = std::max(d.max_nodes, s.size());
      out.push_back(std::move(s));
      file_idx++;
    }
  };
  load_split("train", d.train);
  load_split("val", d.val);
  if (d.train.empty()) fail_validation("load_dataset: no training files in " + dir);
  return d;
}

SeqDataset load_seq_dataset(const std::string& dir) {
  SeqDataset d;
  auto load_split = [&](const std::string& sub, std::vector<SeqSample>& out) {
    for (const auto& file : sorted_files((fs::path(dir) / sub).string())) {
      HierGraph h = hier_from_json(load_json_file(file));
      if (d.fov_m <= 0) d.fov_m = h.fov_m;
      SeqSample s = plain_to_seq_sample(flatten(h), h.fov_m);
      d.max_len = std::max(d.max_len, static_cast<int>(s.tokens.rows()));
      out.push_back(std::move(s));
    }
  };
  load_split("train", d.train);
  load_split("val", d.val);
  if (d.train.empty()) fail_validation("load_seq_dataset: no training files in " + dir);
  return d;
}

}  // namespace lanegraph::model
