#include "lanegraph/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include "lanegraph/error.hpp"
#include "lanegraph/manifest.hpp"
#include "lanegraph/metrics.hpp"
#include "lanegraph/model/runtime.hpp"
#include "lanegraph/model/seq_model.hpp"
#include "lanegraph/model/trainer.hpp"
#include "lanegraph/render.hpp"
#include "lanegraph/synth.hpp"

namespace fs = std::filesystem;

namespace lanegraph::pipeline {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_keys(const Json& cfg, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : cfg.items()) {
    (void)value;
    bool ok = false;
    for (const char* k : allowed) ok = ok || key == k;
    if (!ok) fail_config("unknown config key: " + key);
  }
}

std::string require_str(const Json& cfg, const char* key) {
  if (!cfg.contains(key)) fail_config(std::string("missing required option: ") + key);
  return cfg.at(key).get<std::string>();
}

std::string sample_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "sample_%04d.json", i);
  return buf;
}

// maps in a directory: flat *.json, falling back to train/ + val/ subdirs
std::vector<std::string> map_files(const std::string& dir) {
  std::vector<std::string> files;
  auto gather = [&](const fs::path& p) {
    if (!fs::is_directory(p)) return;
    for (const auto& e : fs::directory_iterator(p))
      if (e.path().extension() == ".json" && e.path().filename() != "stats.json" &&
          e.path().filename() != "manifest.json")
        files.push_back(e.path().string());
  };
  gather(dir);
  if (files.empty()) {
    gather(fs::path(dir) / "train");
    gather(fs::path(dir) / "val");
  }
  std::sort(files.begin(), files.end());
  return files;
}

struct LoadedMaps {
  std::vector<PlainGraph> flat;
  double fov_m = 0;
};

LoadedMaps load_flat_maps(const std::string& dir) {
  LoadedMaps out;
  for (const auto& file : map_files(dir)) {
    Json j = load_json_file(file);
    if (json_is_hier(j)) {
      HierGraph h = hier_from_json(j);
      if (out.fov_m <= 0) out.fov_m = h.fov_m;
      out.flat.push_back(flatten(h));
    } else {
      double fov = 0;
      PlainGraph g = plain_from_json(j, &fov);
      if (out.fov_m <= 0) out.fov_m = fov;
      out.flat.push_back(std::move(g));
    }
  }
  return out;
}

model::TrainConfig train_config_from_json(const Json& cfg) {
  model::TrainConfig t;
  t.variant = model::variant_from_name(cfg.value("variant", "coordinate_first"));
  t.layers = cfg.value("layers", 7);
  t.rounds = cfg.value("rounds", 1);
  t.epochs = cfg.value("epochs", 30);
  t.batch = cfg.value("batch", 32);
  t.lr = cfg.value("lr", 1e-4);
  t.seed = cfg.value("seed", 0ULL);
  t.hidden = cfg.value("hidden", 64);
  t.K_gmm = cfg.value("kgmm", 20);
  t.K_bern = cfg.value("kbern", 20);
  t.jobs = cfg.value("jobs", 1);
  t.f64 = cfg.value("f64", false);
  if (cfg.contains("weights")) {
    const Json& w = cfg.at("weights");
    t.weights.coord = w.value("coord", 1.0);
    t.weights.topo = w.value("topo", 1.0);
    t.weights.local = w.value("local", 1.0);
    t.weights.mask = w.value("mask", 1.0);
    t.weights.sem = w.value("sem", 1.0);
  }
  return t;
}

Json train_config_echo(const model::TrainConfig& t) {
  Json j;
  j["variant"] = model::variant_name(t.variant);
  j["layers"] = t.layers;
  j["rounds"] = t.rounds;
  j["epochs"] = t.epochs;
  j["batch"] = t.batch;
  j["lr"] = t.lr;
  j["seed"] = t.seed;
  j["hidden"] = t.hidden;
  j["kgmm"] = t.K_gmm;
  j["kbern"] = t.K_bern;
  j["jobs"] = t.jobs;
  j["f64"] = t.f64;
  j["weights"] = {{"coord", t.weights.coord},
                  {"topo", t.weights.topo},
                  {"local", t.weights.local},
                  {"mask", t.weights.mask},
                  {"sem", t.weights.sem}};
  return j;
}

Json epoch_to_json(const model::EpochRecord& rec) {
  Json j;
  j["epoch"] = rec.epoch;
  j["train_total"] = rec.train_total;
  j["coord_nll"] = rec.train.coord_per_step();
  j["topo_bce"] = rec.train.topo_per_candidate();
  j["local_mse"] = rec.train.local_per_coord();
  j["mask_bce"] = rec.train.mask_per_slot();
  j["sem_bce"] = rec.train.sem_per_edge();
  j["val_coord_nll"] = rec.val.coord_per_step();
  j["val_topo_bce"] = rec.val.topo_per_candidate();
  j["wall_s"] = rec.wall_s;
  return j;
}

template <typename S>
Json train_global(const std::string& kind, const model::Dataset& data,
                  const model::TrainConfig& tcfg, const std::string& out_path,
                  const std::string& report_path) {
  using namespace model;
  GlobalModelConfig gcfg;
  gcfg.max_nodes = data.max_nodes + std::max(1, data.max_nodes / 4);
  gcfg.hidden = tcfg.hidden;
  gcfg.layers = tcfg.layers;
  gcfg.rounds = tcfg.rounds;
  gcfg.K_gmm = tcfg.K_gmm;
  gcfg.K_bern = tcfg.K_bern;
  gcfg.variant = tcfg.variant;
  const bool hier = kind == "hdmapgen";
  const int W = hier ? data.W : 0;

  auto factory = [gcfg, W, hier](nn::ParamStore<S>& ps) {
    return std::make_unique<HdmapgenModel<S>>(ps, gcfg, W, hier);
  };
  Trainer<S, HdmapgenModel<S>, GlobalSample> trainer(factory, derive_seed(tcfg.seed, 0x9A9A));

  std::ofstream report(report_path);
  if (!report) fail_io("cannot write " + report_path);
  auto records = trainer.fit(data.train, data.val, tcfg, [&](const EpochRecord& rec) {
    report << epoch_to_json(rec).dump() << "\n";
    report.flush();
  });

  CheckpointData ckpt = snapshot_store(trainer.store(), trainer.optimizer());
  ckpt.model_kind = kind;
  ckpt.config = train_config_echo(tcfg);
  ckpt.config["max_nodes"] = gcfg.max_nodes;
  ckpt.config["K_gmm"] = gcfg.K_gmm;
  ckpt.config["K_bern"] = gcfg.K_bern;
  ckpt.config["semantics"] = hier;
  ckpt.fov_m = data.fov_m;
  ckpt.W = W;
  for (const auto& s : data.train) ckpt.train_sizes.push_back(s.size());
  ckpt.rng_state = Rng(derive_seed(tcfg.seed, 0xE90C, tcfg.epochs)).state_string();
  write_checkpoint(out_path, ckpt);

  Json summary;
  summary["model"] = kind;
  summary["epochs"] = static_cast<int>(records.size());
  summary["final"] = records.empty() ? Json::object() : epoch_to_json(records.back());
  summary["params"] = trainer.store().total_size();
  return summary;
}

template <typename S>
Json train_seq(const model::SeqDataset& data, const model::TrainConfig& tcfg,
               const std::string& out_path, const std::string& report_path) {
  using namespace model;
  SeqModelConfig scfg;
  scfg.K_gmm = tcfg.K_gmm;
  auto factory = [scfg](nn::ParamStore<S>& ps) { return std::make_unique<SeqModel<S>>(ps, scfg); };
  Trainer<S, SeqModel<S>, SeqSample> trainer(factory, derive_seed(tcfg.seed, 0x5E9));

  std::ofstream report(report_path);
  if (!report) fail_io("cannot write " + report_path);
  auto records = trainer.fit(data.train, data.val, tcfg, [&](const EpochRecord& rec) {
    report << epoch_to_json(rec).dump() << "\n";
    report.flush();
  });

  CheckpointData ckpt = snapshot_store(trainer.store(), trainer.optimizer());
  ckpt.model_kind = "seqgen";
  ckpt.config = train_config_echo(tcfg);
  ckpt.config["rnn_layers"] = scfg.layers;
  ckpt.config["hidden"] = scfg.hidden;
  ckpt.config["head_hidden"] = scfg.head_hidden;
  ckpt.config["K_gmm"] = scfg.K_gmm;
  ckpt.fov_m = data.fov_m;
  ckpt.W = 0;
  for (const auto& s : data.train) ckpt.train_sizes.push_back(static_cast<int>(s.tokens.rows()));
  ckpt.rng_state = Rng(derive_seed(tcfg.seed, 0xE90C, tcfg.epochs)).state_string();
  write_checkpoint(out_path, ckpt);

  Json summary;
  summary["model"] = "seqgen";
  summary["epochs"] = static_cast<int>(records.size());
  summary["final"] = records.empty() ? Json::object() : epoch_to_json(records.back());
  summary["params"] = trainer.store().total_size();
  return summary;
}

}  // namespace

Json run_synth(const Json& cfg) {
  check_keys(cfg, {"size", "block", "jitter", "curve_prob", "light_prob", "n_cities", "seed", "out"});
  auto t0 = Clock::now();
  CityConfig city;
  city.size_m = cfg.value("size", 1000.0);
  city.block_m = cfg.value("block", 50.0);
  city.jitter = cfg.value("jitter", 0.1);
  city.curve_prob = cfg.value("curve_prob", 0.95);
  city.light_prob = cfg.value("light_prob", 0.3);
  city.seed = cfg.value("seed", 0ULL);
  const int n_cities = cfg.value("n_cities", 1);
  std::string out_dir = require_str(cfg, "out");
  fs::create_directories(out_dir);

  RunManifest manifest;
  manifest.command = "synth";
  manifest.config = cfg;
  for (int c = 0; c < n_cities; ++c) {
    CityConfig one = city;
    one.seed = derive_seed(city.seed, 0xC0DE, c);
    CityMap m = generate_city(one);
    char name[64];
    std::snprintf(name, sizeof(name), "city_%02d.json", c);
    fs::path file = fs::path(out_dir) / name;
    save_json_file(file.string(), plain_to_json(m.graph, city.size_m, &m.lanes));
    manifest.outputs.push_back(file.string());
  }
  manifest.wall_s = seconds_since(t0);
  manifest.write(out_dir);

  Json summary;
  summary["cities"] = n_cities;
  summary["out"] = out_dir;
  return summary;
}

Json run_preprocess(const Json& cfg) {
  check_keys(cfg, {"in", "fov", "n", "w", "curvature_tol", "seed", "out"});
  auto t0 = Clock::now();
  std::vector<std::string> inputs;
  if (cfg.contains("in") && cfg.at("in").is_array())
    inputs = cfg.at("in").get<std::vector<std::string>>();
  else
    inputs.push_back(require_str(cfg, "in"));

  PatchConfig patch;
  patch.fov_m = cfg.value("fov", 200.0);
  int w = cfg.value("w", 0);
  patch.max_local_W = w > 0 ? w : (patch.fov_m >= 160 ? 8 : 20);
  patch.curvature_tol = cfg.value("curvature_tol", 0.025);
  patch.seed = cfg.value("seed", 0ULL);
  const int n = cfg.value("n", 100);
  std::string out_dir = require_str(cfg, "out");
  fs::create_directories(fs::path(out_dir) / "train");
  fs::create_directories(fs::path(out_dir) / "val");

  RunManifest manifest;
  manifest.command = "preprocess";
  manifest.config = cfg;
  manifest.inputs = inputs;

  CorpusStats stats;
  double non_edges = 0, edges_total = 0;
  int count = 0;
  for (std::size_t c = 0; c < inputs.size(); ++c) {
    double fov_in = 0;
    PlainGraph city = plain_from_json(load_json_file(inputs[c]), &fov_in);
    PatchConfig pc = patch;
    pc.seed = derive_seed(patch.seed, 0x9A7C, c);
    auto patches = sample_patches(city, pc, n);
    for (int p = 0; p < static_cast<int>(patches.size()); ++p) {
      auto dec = decimate_graph(patches[p], patch.curvature_tol);
      PatchConfig hc = patch;
      hc.seed = derive_seed(patch.seed, 0xD0, (static_cast<std::uint64_t>(c) << 32) ^ p);
      HierGraph h = build_hierarchical(dec.graph, hc);
      bool val = is_validation_patch(c, p);
      char name[64];
      std::snprintf(name, sizeof(name), "patch_%02zu_%04d.json", c, p);
      fs::path file = fs::path(out_dir) / (val ? "val" : "train") / name;
      save_json_file(file.string(), hier_to_json(h));
      manifest.outputs.push_back(file.string());

      stats.plain_nodes_mean += dec.graph.node_count();
      stats.plain_edges_mean += dec.graph.edge_count();
      stats.plain_nodes_max = std::max(stats.plain_nodes_max, dec.graph.node_count());
      stats.plain_edges_max = std::max(stats.plain_edges_max, dec.graph.edge_count());
      int gn = h.node_count(), ge = h.edge_count();
      stats.global_nodes_mean += gn;
      stats.global_edges_mean += ge;
      stats.global_nodes_max = std::max(stats.global_nodes_max, gn);
      stats.global_edges_max = std::max(stats.global_edges_max, ge);
      for (const auto& [e, lp] : h.local_paths) {
        (void)e;
        stats.local_nodes_max = std::max(stats.local_nodes_max, lp.valid_count());
      }
      if (ge > 0) {
        non_edges += gn * (gn - 1) / 2.0 - ge;
        edges_total += ge;
      }
      stats.removal_fraction_mean += dec.removal_fraction();
      (val ? stats.n_val : stats.n_train)++;
      count++;
    }
  }
  if (count > 0) {
    stats.plain_nodes_mean /= count;
    stats.plain_edges_mean /= count;
    stats.global_nodes_mean /= count;
    stats.global_edges_mean /= count;
    stats.removal_fraction_mean /= count;
  }
  if (edges_total > 0) stats.sparsity_ratio = non_edges / edges_total;
  fs::path stats_file = fs::path(out_dir) / "stats.json";
  save_json_file(stats_file.string(), stats.to_json());
  manifest.outputs.push_back(stats_file.string());
  manifest.wall_s = seconds_since(t0);
  manifest.write(out_dir);
  return stats.to_json();
}

Json run_train(const Json& cfg) {
  check_keys(cfg, {"data", "model", "variant", "layers", "rounds", "epochs", "batch", "lr", "seed",
                   "hidden", "kgmm", "kbern", "jobs", "f64", "weights", "out"});
  auto t0 = Clock::now();
  std::string data_dir = require_str(cfg, "data");
  std::string out_path = require_str(cfg, "out");
  std::string kind = cfg.value("model", "hdmapgen");
  if (kind != "hdmapgen" && kind != "plaingen" && kind != "seqgen")
    fail_config("unknown model: " + kind);
  model::TrainConfig tcfg = train_config_from_json(cfg);
  if (fs::path(out_path).has_parent_path())
    fs::create_directories(fs::path(out_path).parent_path());
  std::string report_path = out_path + ".report.jsonl";

  Json summary;
  if (kind == "seqgen") {
    auto data = model::load_seq_dataset(data_dir);
    summary = tcfg.f64 ? train_seq<double>(data, tcfg, out_path, report_path)
                       : train_seq<float>(data, tcfg, out_path, report_path);
  } else {
    auto data = model::load_dataset(
        data_dir, kind == "hdmapgen" ? model::DatasetKind::hier : model::DatasetKind::plain,
        tcfg.seed);
    summary = tcfg.f64 ? train_global<double>(kind, data, tcfg, out_path, report_path)
                       : train_global<float>(kind, data, tcfg, out_path, report_path);
  }

  RunManifest manifest;
  manifest.command = "train";
  manifest.config = cfg;
  manifest.inputs = {data_dir};
  manifest.outputs = {out_path, report_path};
  manifest.wall_s = seconds_since(t0);
  Json mj;
  mj["command"] = manifest.command;
  mj["config"] = manifest.config;
  mj["inputs"] = manifest.inputs;
  Json outs = Json::array();
  for (const auto& path : manifest.outputs)
    outs.push_back({{"path", fs::path(path).filename().string()}, {"fnv1a64", file_hash(path)}});
  mj["outputs"] = outs;
  mj["wall_s"] = manifest.wall_s;
  save_json_file(out_path + ".manifest.json", mj);
  return summary;
}

Json run_sample(const Json& cfg) {
  check_keys(cfg, {"ckpt", "n", "tau", "seed", "max_nodes", "out"});
  auto t0 = Clock::now();
  std::string ckpt_path = require_str(cfg, "ckpt");
  std::string out_dir = require_str(cfg, "out");
  const int n = cfg.value("n", 64);
  const double tau = cfg.value("tau", 0.2);
  const std::uint64_t seed = cfg.value("seed", 0ULL);
  const int max_nodes = cfg.value("max_nodes", 0);
  fs::create_directories(out_dir);

  auto runtime = model::ModelRuntime::load(ckpt_path);
  RunManifest manifest;
  manifest.command = "sample";
  manifest.config = cfg;
  manifest.inputs = {ckpt_path};

  int degenerate = 0, truncated = 0;
  for (int i = 0; i < n; ++i) {
    model::SampleFlags flags;
    AnyMap m = runtime.sample_map(tau, derive_seed(seed, 0x5A3F, i), max_nodes, &flags);
    fs::path file = fs::path(out_dir) / sample_name(i);
    if (std::holds_alternative<HierGraph>(m))
      save_json_file(file.string(), hier_to_json(std::get<HierGraph>(m)));
    else
      save_json_file(file.string(),
                     plain_to_json(std::get<PlainGraph>(m), runtime.meta().fov_m));
    manifest.outputs.push_back(file.string());
    degenerate += flags.degenerate;
    truncated += flags.truncated;
  }
  manifest.wall_s = seconds_since(t0);
  manifest.write(out_dir);

  Json summary;
  summary["n"] = n;
  summary["degenerate"] = degenerate;
  summary["truncated"] = truncated;
  summary["model"] = runtime.meta().model_kind;
  return summary;
}

Json run_eval(const Json& cfg) {
  check_keys(cfg, {"samples", "reference", "out", "radius", "probes", "bins", "seed"});
  auto t0 = Clock::now();
  std::string samples_dir = require_str(cfg, "samples");
  std::string reference_dir = require_str(cfg, "reference");
  std::string out_path = require_str(cfg, "out");

  auto samples = load_flat_maps(samples_dir);
  auto reference = load_flat_maps(reference_dir);
  MetricsConfig mcfg;
  mcfg.region_radius = cfg.value("radius", 20.0);
  mcfg.n_probes = cfg.value("probes", 32);
  mcfg.spectrum_bins = cfg.value("bins", 200);
  mcfg.seed = cfg.value("seed", 0ULL);
  double fov = reference.fov_m > 0 ? reference.fov_m : samples.fov_m;
  MetricsReport rep = compute_report(samples.flat, reference.flat, fov, mcfg);

  if (fs::path(out_path).has_parent_path())
    fs::create_directories(fs::path(out_path).parent_path());
  save_json_file(out_path, rep.to_json());

  Json mj;
  mj["command"] = "eval";
  mj["config"] = cfg;
  mj["inputs"] = {samples_dir, reference_dir};
  mj["outputs"] = Json::array({Json{{"path", fs::path(out_path).filename().string()},
                                    {"fnv1a64", file_hash(out_path)}}});
  mj["wall_s"] = seconds_since(t0);
  save_json_file(out_path + ".manifest.json", mj);
  return rep.to_json();
}

Json run_render(const Json& cfg) {
  check_keys(cfg, {"in", "out", "width", "fov", "no_nodes", "no_legend"});
  auto t0 = Clock::now();
  std::string in_path = require_str(cfg, "in");
  std::string out_path = require_str(cfg, "out");
  RenderOptions opt;
  opt.width_px = cfg.value("width", 800.0);
  opt.fov_m = cfg.value("fov", 0.0);
  opt.show_nodes = !cfg.value("no_nodes", false);
  opt.legend = !cfg.value("no_legend", false);

  Json j = load_json_file(in_path);
  std::string svg;
  if (json_is_hier(j)) {
    svg = render_svg(hier_from_json(j), opt);
  } else {
    double fov = 0;
    PlainGraph g = plain_from_json(j, &fov);
    svg = render_svg(g, fov, opt);
  }
  if (fs::path(out_path).has_parent_path())
    fs::create_directories(fs::path(out_path).parent_path());
  std::ofstream out(out_path, std::ios::binary);
  if (!out) fail_io("cannot write " + out_path);
  out << svg;
  out.close();

  Json mj;
  mj["command"] = "render";
  mj["config"] = cfg;
  mj["inputs"] = {in_path};
  mj["outputs"] = Json::array({Json{{"path", fs::path(out_path).filename().string()},
                                    {"fnv1a64", file_hash(out_path)}}});
  mj["wall_s"] = seconds_since(t0);
  save_json_file(out_path + ".manifest.json", mj);

  Json summary;
  summary["out"] = out_path;
  summary["bytes"] = svg.size();
  return summary;
}

Json run_bench(const Json& cfg) {
  check_keys(cfg, {"ckpts", "n", "tau", "seed", "warmup", "out"});
  auto t0 = Clock::now();
  if (!cfg.contains("ckpts") || !cfg.at("ckpts").is_array() || cfg.at("ckpts").empty())
    fail_config("bench: need a non-empty ckpts list");
  const int n = cfg.value("n", 16);
  if (n <= 0) fail_config("bench: n must be positive");
  const int warmup = cfg.value("warmup", 2);
  const double tau = cfg.value("tau", 0.2);
  const std::uint64_t seed = cfg.value("seed", 0ULL);
  std::string out_path = require_str(cfg, "out");

  Json results = Json::object();
  std::vector<std::pair<std::string, double>> means;
  for (const auto& entry : cfg.at("ckpts")) {
    std::string path = entry.get<std::string>();
    auto runtime = model::ModelRuntime::load(path);
    for (int i = 0; i < warmup; ++i)
      runtime.sample_map(tau, derive_seed(seed, 0xBE, i), 0, nullptr);
    std::vector<double> times;
    for (int i = 0; i < n; ++i) {
      auto tick = Clock::now();
      runtime.sample_map(tau, derive_seed(seed, 0xBF, i), 0, nullptr);
      times.push_back(seconds_since(tick));
    }
    double mean = 0;
    for (double v : times) mean += v;
    mean /= n;
    double var = 0;
    for (double v : times) var += (v - mean) * (v - mean);
    var /= n;
    const std::string kind = runtime.meta().model_kind;
    results[kind] = {{"ckpt", path}, {"mean_s", mean}, {"var_s", var}, {"n", n}};
    means.push_back({kind, mean});
  }
  Json ratios = Json::object();
  for (const auto& [ka, ma] : means)
    for (const auto& [kb, mb] : means)
      if (ka != kb && mb > 0) ratios[ka + "/" + kb] = ma / mb;

  Json report;
  report["config"] = cfg;
  report["results"] = results;
  report["ratios"] = ratios;
  if (fs::path(out_path).has_parent_path())
    fs::create_directories(fs::path(out_path).parent_path());
  save_json_file(out_path, report);

  Json mj;
  mj["command"] = "bench";
  mj["config"] = cfg;
  mj["outputs"] = Json::array({Json{{"path", fs::path(out_path).filename().string()}}});
  mj["wall_s"] = seconds_since(t0);
  save_json_file(out_path + ".manifest.json", mj);
  return report;
}

Json run_command(const std::string& command, const Json& cfg) {
  if (command == "synth") return run_synth(cfg);
  if (command == "preprocess") return run_preprocess(cfg);
  if (command == "train") return run_train(cfg);
  if (command == "sample") return run_sample(cfg);
  if (command == "eval") return run_eval(cfg);
  if (command == "render") return run_render(cfg);
  if (command == "bench") return run_bench(cfg);
  fail_config("unknown command: " + command);
}

}  // namespace lanegraph::pipeline
