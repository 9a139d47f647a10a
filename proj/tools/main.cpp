// Command-line front end. All work happens behind the C API in
// liblanegraph; this binary only parses flags and assembles JSON configs.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lanegraph.h"

using Json = nlohmann::ordered_json;

namespace {

int status_to_exit(lg_status st) {
  switch (st) {
    case LG_OK: return 0;
    case LG_ERR_VALIDATION:
    case LG_ERR_CONFIG: return 2;
    default: return 1;
  }
}

int run(const char* command, const Json& cfg, bool quiet) {
  char* result = nullptr;
  lg_status st = lg_run(command, cfg.dump().c_str(), &result);
  if (st != LG_OK) {
    std::fprintf(stderr, "error: %s\n", lg_last_error());
    return status_to_exit(st);
  }
  if (result) {
    if (!quiet) std::printf("%s\n", result);
    lg_string_free(result);
  }
  return 0;
}

// flag > config file > env LANEGRAPH_SEED > default 0
std::uint64_t resolve_seed(CLI::Option* opt, std::uint64_t value) {
  if (opt->count() > 0) return value;
  if (const char* env = std::getenv("LANEGRAPH_SEED")) return std::strtoull(env, nullptr, 10);
  return value;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lane map generation toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read defaults from a TOML-style config file");
  bool quiet = false;
  app.add_flag("--quiet", quiet, "suppress the JSON summary on stdout");

  // synth
  auto* synth = app.add_subcommand("synth", "generate synthetic city maps");
  double size = 1000, block = 50, jitter = 0.1, curve_prob = 0.95, light_prob = 0.3;
  int n_cities = 1;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  synth->add_option("--size", size, "city side length (m)");
  synth->add_option("--block", block, "mean block size (m)");
  synth->add_option("--jitter", jitter, "grid jitter fraction");
  synth->add_option("--curve-prob", curve_prob, "probability a segment is an arc");
  synth->add_option("--light-prob", light_prob, "probability an intersection is signalized");
  synth->add_option("--n-cities", n_cities, "number of cities");
  auto* synth_seed_opt = synth->add_option("--seed", synth_seed, "random seed");
  synth->add_option("--out", synth_out, "output directory")->required();

  // preprocess
  auto* prep = app.add_subcommand("preprocess", "crop, decimate and build hierarchical graphs");
  std::vector<std::string> prep_in;
  double fov = 200, curvature_tol = 0.025;
  int n_patches = 100, w = 0;
  std::uint64_t prep_seed = 0;
  std::string prep_out;
  prep->add_option("--in", prep_in, "input map JSON (repeatable)")->required();
  prep->add_option("--fov", fov, "patch field of view (m)");
  prep->add_option("--n", n_patches, "patches per input map");
  prep->add_option("--w", w, "max local points per lane (0 = by fov)");
  prep->add_option("--curvature-tol", curvature_tol, "decimation turning-angle tolerance (rad)");
  auto* prep_seed_opt = prep->add_option("--seed", prep_seed, "random seed");
  prep->add_option("--out", prep_out, "output directory")->required();

  // train
  auto* train = app.add_subcommand("train", "train a generator on a corpus");
  std::string data_dir, model = "hdmapgen", variant = "coordinate_first", train_out;
  int epochs = 30, batch = 32, layers = 7, rounds = 1, hidden = 64, kgmm = 20, kbern = 20, jobs = 1;
  double lr = 1e-4;
  bool f64 = false;
  std::uint64_t train_seed = 0;
  train->add_option("--data", data_dir, "corpus directory (train/ and val/)")->required();
  train->add_option("--model", model, "hdmapgen | plaingen | seqgen");
  train->add_option("--variant", variant, "coordinate_first | topology_first | independent");
  train->add_option("--epochs", epochs, "training epochs");
  train->add_option("--batch", batch, "minibatch size");
  train->add_option("--lr", lr, "learning rate");
  train->add_option("--layers", layers, "propagation layer count");
  train->add_option("--rounds", rounds, "message passing rounds per layer");
  train->add_option("--hidden", hidden, "hidden width");
  train->add_option("--kgmm", kgmm, "GMM components");
  train->add_option("--kbern", kbern, "Bernoulli mixture components");
  train->add_option("--jobs", jobs, "gradient worker threads");
  train->add_flag("--f64", f64, "train in 64-bit precision");
  auto* train_seed_opt = train->add_option("--seed", train_seed, "random seed");
  train->add_option("--out", train_out, "checkpoint output path")->required();

  // sample
  auto* sample = app.add_subcommand("sample", "draw maps from a trained model");
  std::string ckpt, sample_out;
  int n_samples = 64, max_nodes = 0;
  double tau = 0.2;
  std::uint64_t sample_seed = 0;
  sample->add_option("--ckpt", ckpt, "checkpoint path")->required();
  sample->add_option("--n", n_samples, "number of samples");
  sample->add_option("--tau", tau, "temperature");
  sample->add_option("--max-nodes", max_nodes, "cap on generated nodes (0 = from training sizes)");
  auto* sample_seed_opt = sample->add_option("--seed", sample_seed, "random seed");
  sample->add_option("--out", sample_out, "output directory")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "fidelity and diversity metrics");
  std::string samples_dir, reference_dir, eval_out;
  double radius = 20;
  int probes = 32, bins = 200;
  std::uint64_t eval_seed = 0;
  eval->add_option("--samples", samples_dir, "sampled maps directory")->required();
  eval->add_option("--reference", reference_dir, "reference maps directory")->required();
  eval->add_option("--radius", radius, "urban feature region radius (m)");
  eval->add_option("--probes", probes, "probes per map");
  eval->add_option("--bins", bins, "spectrum histogram bins");
  auto* eval_seed_opt = eval->add_option("--seed", eval_seed, "random seed");
  eval->add_option("--out", eval_out, "report output path")->required();

  // render
  auto* render = app.add_subcommand("render", "render a map to SVG");
  std::string render_in, render_out;
  double width = 800, render_fov = 0;
  bool no_nodes = false, no_legend = false;
  render->add_option("--in", render_in, "map JSON path")->required();
  render->add_option("--out", render_out, "SVG output path")->required();
  render->add_option("--width", width, "image width in pixels");
  render->add_option("--fov", render_fov, "view side length (m, 0 = from map)");
  render->add_flag("--no-nodes", no_nodes, "hide node markers");
  render->add_flag("--no-legend", no_legend, "hide legend and scale bar");

  // bench
  auto* bench = app.add_subcommand("bench", "single-threaded generation latency");
  std::vector<std::string> ckpts;
  int bench_n = 16, warmup = 2;
  double bench_tau = 0.2;
  std::uint64_t bench_seed = 0;
  std::string bench_out;
  bench->add_option("--ckpt", ckpts, "checkpoint path (repeatable)")->required();
  bench->add_option("--n", bench_n, "samples per model");
  bench->add_option("--warmup", warmup, "warmup samples (excluded)");
  bench->add_option("--tau", bench_tau, "temperature");
  auto* bench_seed_opt = bench->add_option("--seed", bench_seed, "random seed");
  bench->add_option("--out", bench_out, "report output path")->required();

  CLI11_PARSE(app, argc, argv);

  if (synth->parsed()) {
    Json cfg{{"size", size},           {"block", block},
             {"jitter", jitter},       {"curve_prob", curve_prob},
             {"light_prob", light_prob}, {"n_cities", n_cities},
             {"seed", resolve_seed(synth_seed_opt, synth_seed)}, {"out", synth_out}};
    return run("synth", cfg, quiet);
  }
  if (prep->parsed()) {
    Json cfg{{"in", prep_in}, {"fov", fov},
             {"n", n_patches}, {"w", w},
             {"curvature_tol", curvature_tol}, {"seed", resolve_seed(prep_seed_opt, prep_seed)},
             {"out", prep_out}};
    return run("preprocess", cfg, quiet);
  }
  if (train->parsed()) {
    Json cfg{{"data", data_dir}, {"model", model},   {"variant", variant}, {"epochs", epochs},
             {"batch", batch},   {"lr", lr},         {"layers", layers},   {"rounds", rounds},
             {"hidden", hidden}, {"kgmm", kgmm},     {"kbern", kbern},     {"jobs", jobs},
             {"f64", f64},       {"seed", resolve_seed(train_seed_opt, train_seed)},
             {"out", train_out}};
    return run("train", cfg, quiet);
  }
  if (sample->parsed()) {
    Json cfg{{"ckpt", ckpt}, {"n", n_samples},
             {"tau", tau},   {"max_nodes", max_nodes},
             {"seed", resolve_seed(sample_seed_opt, sample_seed)}, {"out", sample_out}};
    return run("sample", cfg, quiet);
  }
  if (eval->parsed()) {
    Json cfg{{"samples", samples_dir}, {"reference", reference_dir},
             {"radius", radius},       {"probes", probes},
             {"bins", bins},           {"seed", resolve_seed(eval_seed_opt, eval_seed)},
             {"out", eval_out}};
    return run("eval", cfg, quiet);
  }
  if (render->parsed()) {
    Json cfg{{"in", render_in},     {"out", render_out},    {"width", width},
             {"fov", render_fov},   {"no_nodes", no_nodes}, {"no_legend", no_legend}};
    return run("render", cfg, quiet);
  }
  if (bench->parsed()) {
    Json cfg{{"ckpts", ckpts}, {"n", bench_n},
             {"warmup", warmup}, {"tau", bench_tau},
             {"seed", resolve_seed(bench_seed_opt, bench_seed)}, {"out", bench_out}};
    return run("bench", cfg, quiet);
  }
  return 2;
}
