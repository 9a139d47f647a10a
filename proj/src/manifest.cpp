#include "lanegraph/manifest.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "lanegraph/error.hpp"

namespace lanegraph {

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_io("hash: cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (in) {
    in.read(buf, sizeof(buf));
    std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i)
      h = (h ^ static_cast<unsigned char>(buf[i])) * 0x100000001b3ULL;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return out;
}

void RunManifest::write(const std::string& out_dir) const {
  Json j;
  j["command"] = command;
  j["config"] = config;
  j["inputs"] = inputs;
  Json outs = Json::array();
  for (const auto& path : outputs) {
    Json o;
    o["path"] = std::filesystem::relative(path, out_dir).string();
    o["fnv1a64"] = file_hash(path);
    outs.push_back(o);
  }
  j["outputs"] = outs;
  j["wall_s"] = wall_s;
  save_json_file((std::filesystem::path(out_dir) / "manifest.json").string(), j);
}

}  // namespace lanegraph
