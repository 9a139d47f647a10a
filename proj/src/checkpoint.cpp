#include "lanegraph/model/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "lanegraph/error.hpp"

namespace lanegraph::model {

namespace {

void write_raw(std::ofstream& out, const std::vector<double>& data, bool f32) {
  if (f32) {
    std::vector<float> tmp(data.begin(), data.end());
    out.write(reinterpret_cast<const char*>(tmp.data()), tmp.size() * sizeof(float));
  } else {
    out.write(reinterpret_cast<const char*>(data.data()), data.size() * sizeof(double));
  }
}

std::vector<double> read_raw(std::ifstream& in, std::size_t count, bool f32) {
  if (f32) {
    std::vector<float> tmp(count);
    in.read(reinterpret_cast<char*>(tmp.data()), count * sizeof(float));
    return {tmp.begin(), tmp.end()};
  }
  std::vector<double> data(count);
  in.read(reinterpret_cast<char*>(data.data()), count * sizeof(double));
  return data;
}

Json manifest_arrays(const std::map<std::string, ArrayBlob>& arrays) {
  Json list = Json::array();
  for (const auto& [name, blob] : arrays)
    list.push_back({{"name", name}, {"rows", blob.rows}, {"cols", blob.cols}});
  return list;
}

}  // namespace

void write_checkpoint(const std::string& path, const CheckpointData& d) {
  Json manifest;
  manifest["version"] = 1;
  manifest["model"] = d.model_kind;
  manifest["dtype"] = d.dtype;
  manifest["config"] = d.config;
  manifest["fov_m"] = d.fov_m;
  manifest["W"] = d.W;
  manifest["train_sizes"] = d.train_sizes;
  manifest["adam_steps"] = d.adam_steps;
  manifest["rng_state"] = d.rng_state;
  manifest["param_seed"] = d.param_seed;
  manifest["params"] = manifest_arrays(d.params);
  manifest["has_adam"] = !d.adam_m.empty();

  std::ofstream out(path, std::ios::binary);
  if (!out) fail_io("cannot write checkpoint " + path);
  out.write(kCkptMagic, sizeof(kCkptMagic));
  std::string mjson = manifest.dump();
  std::uint64_t len = mjson.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(mjson.data(), mjson.size());

  const bool f32 = d.dtype == "f32";
  for (const auto& [name, blob] : d.params) {
    (void)name;
    write_raw(out, blob.data, f32);
  }
  if (!d.adam_m.empty()) {
    for (const auto& [name, blob] : d.adam_m) {
      (void)name;
      write_raw(out, blob.data, f32);
    }
    for (const auto& [name, blob] : d.adam_v) {
      (void)name;
      write_raw(out, blob.data, f32);
    }
  }
  if (!out) fail_io("write failed: " + path);
}

CheckpointData read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_io("cannot open checkpoint " + path);
  char magic[sizeof(kCkptMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCkptMagic, sizeof(magic)) != 0)
    fail_io("not a checkpoint file: " + path);
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string mjson(len, '\0');
  in.read(mjson.data(), len);
  Json manifest;
  try {
    manifest = Json::parse(mjson);
  } catch (const std::exception& e) {
    fail_io(std::string("bad checkpoint manifest: ") + e.what());
  }

  CheckpointData d;
  d.model_kind = manifest.at("model").get<std::string>();
  d.dtype = manifest.at("dtype").get<std::string>();
  d.config = manifest.at("config");
  d.fov_m = manifest.at("fov_m").get<double>();
  d.W = manifest.at("W").get<int>();
  d.train_sizes = manifest.at("train_sizes").get<std::vector<int>>();
  d.adam_steps = manifest.at("adam_steps").get<long>();
  d.rng_state = manifest.at("rng_state").get<std::string>();
  d.param_seed = manifest.at("param_seed").get<std::uint64_t>();

  const bool f32 = d.dtype == "f32";
  for (const auto& entry : manifest.at("params")) {
    ArrayBlob blob;
    blob.rows = entry.at("rows").get<int>();
    blob.cols = entry.at("cols").get<int>();
    blob.data = read_raw(in, static_cast<std::size_t>(blob.rows) * blob.cols, f32);
    d.params[entry.at("name").get<std::string>()] = std::move(blob);
  }
  if (manifest.value("has_adam", false)) {
    for (const auto& entry : manifest.at("params")) {
      ArrayBlob blob;
      blob.rows = entry.at("rows").get<int>();
      blob.cols = entry.at("cols").get<int>();
      blob.data = read_raw(in, static_cast<std::size_t>(blob.rows) * blob.cols, f32);
      d.adam_m[entry.at("name").get<std::string>()] = std::move(blob);
    }
    for (const auto& entry : manifest.at("params")) {
      ArrayBlob blob;
      blob.rows = entry.at("rows").get<int>();
      blob.cols = entry.at("cols").get<int>();
      blob.data = read_raw(in, static_cast<std::size_t>(blob.rows) * blob.cols, f32);
      d.adam_v[entry.at("name").get<std::string>()] = std::move(blob);
    }
  }
  if (!in) fail_io("truncated checkpoint: " + path);
  return d;
}

}  // namespace lanegraph::model
