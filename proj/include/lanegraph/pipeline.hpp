#pragma once

#include <string>

#include "lanegraph/json_io.hpp"

namespace lanegraph::pipeline {

// Pipeline commands. Each takes a JSON config, writes its outputs plus a run
// manifest, and returns a summary. Configs and flags are documented in the
// CLI; unknown keys are rejected.
Json run_synth(const Json& cfg);
Json run_preprocess(const Json& cfg);
Json run_train(const Json& cfg);
Json run_sample(const Json& cfg);
Json run_eval(const Json& cfg);
Json run_render(const Json& cfg);
Json run_bench(const Json& cfg);

Json run_command(const std::string& command, const Json& cfg);

}  // namespace lanegraph::pipeline
