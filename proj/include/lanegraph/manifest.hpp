#pragma once

#include <string>
#include <vector>

#include "lanegraph/json_io.hpp"

namespace lanegraph {

// FNV-1a over file bytes, hex string.
std::string file_hash(const std::string& path);

// Every pipeline command writes exactly one manifest next to its outputs:
// command, config echo, seeds, paths, artifact hashes and wall time.
struct RunManifest {
  std::string command;
  Json config;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;  // hashed on write
  double wall_s = 0;

  void write(const std::string& out_dir) const;
};

}  // namespace lanegraph
