#include "lanegraph.h"

#include <cstring>
#include <string>

#include "lanegraph/error.hpp"
#include "lanegraph/model/runtime.hpp"
#include "lanegraph/pipeline.hpp"
#include "lanegraph/render.hpp"

using namespace lanegraph;

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

lg_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation: return LG_ERR_VALIDATION;
    case ErrorKind::io: return LG_ERR_IO;
    case ErrorKind::config: return LG_ERR_CONFIG;
    case ErrorKind::internal: return LG_ERR_INTERNAL;
  }
  return LG_ERR_INTERNAL;
}

template <typename Fn>
lg_status guarded(Fn&& fn) {
  try {
    fn();
    return LG_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const Json::exception& e) {
    g_last_error = e.what();
    return LG_ERR_CONFIG;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LG_ERR_INTERNAL;
  }
}

}  // namespace

struct lg_map {
  AnyMap map;
  double fov_m = 0;
};

struct lg_model {
  model::ModelRuntime runtime;
};

extern "C" {

const char* lg_version(void) { return "0.1.0"; }

const char* lg_last_error(void) { return g_last_error.c_str(); }

void lg_string_free(char* s) { delete[] s; }

lg_status lg_run(const char* command, const char* config_json, char** result_json) {
  if (!command || !config_json) {
    g_last_error = "null argument";
    return LG_ERR_CONFIG;
  }
  return guarded([&]() {
    Json cfg = Json::parse(config_json);
    Json result = pipeline::run_command(command, cfg);
    if (result_json) *result_json = dup_string(result.dump());
  });
}

static lg_status map_from_json(const Json& j, lg_map** out) {
  auto* handle = new lg_map();
  if (json_is_hier(j)) {
    HierGraph h = hier_from_json(j);
    handle->fov_m = h.fov_m;
    handle->map = std::move(h);
  } else {
    double fov = 0;
    PlainGraph g = plain_from_json(j, &fov);
    handle->fov_m = fov;
    handle->map = std::move(g);
  }
  *out = handle;
  return LG_OK;
}

lg_status lg_map_open(const char* path, lg_map** out) {
  if (!path || !out) {
    g_last_error = "null argument";
    return LG_ERR_CONFIG;
  }
  return guarded([&]() { map_from_json(load_json_file(path), out); });
}

lg_status lg_map_parse(const char* json, lg_map** out) {
  if (!json || !out) {
    g_last_error = "null argument";
    return LG_ERR_CONFIG;
  }
  return guarded([&]() { map_from_json(Json::parse(json), out); });
}

void lg_map_close(lg_map* map) { delete map; }

lg_status lg_map_validate(const lg_map* map, char** report_json) {
  if (!map || !report_json) {
    g_last_error = "null argument";
    return LG_ERR_CONFIG;
  }
  return guarded([&]() {
    ValidationReport rep = std::holds_alternative<HierGraph>(map->map)
                               ? validate(std::get<HierGraph>(map->map))
                               : validate(std::get<PlainGraph>(map->map));
    Json arr = Json::array();
    for (const auto& v : rep.violations) arr.push_back(v);
    *report_json = dup_string(arr.dump());
  });
}

lg_status lg_map_to_json(const lg_map* map, char** json) {
  if (!map || !json) {
    g_last_error = "null argument";
    return LG_ERR_CONFIG;
  }
  return guarded([&]() {
    Json j = std::holds_alternative<HierGraph>(map->map)
                 ? hier_to_json(std::get<HierGraph>(map->map))
                 : plain_to_json(std::get<PlainGraph>(map->map), map->fov_m);
    *json = dup_string(j.dump());
  });
}

lg_status lg_map_render_svg(const lg_map* map, const char* options_json, char** svg) {
  if (!map || !svg) {
    g_last_error = "null argument";
    return LG_ERR_CONFIG;
  }
  return guarded([&]() {
    RenderOptions opt;
    if (options_json && *options_json) {
      Json o = Json::parse(options_json);
      opt.width_px = o.value("width", 800.0);
      opt.fov_m = o.value("fov", 0.0);
      opt.show_nodes = !o.value("no_nodes", false);
      opt.legend = !o.value("no_legend", false);
    }
    std::string out = std::holds_alternative<HierGraph>(map->map)
                          ? render_svg(std::get<HierGraph>(map->map), opt)
                          : render_svg(std::get<PlainGraph>(map->map), map->fov_m, opt);
    *svg = dup_string(out);
  });
}

int lg_map_is_hierarchical(const lg_map* map) {
  return map && std::holds_alternative<HierGraph>(map->map) ? 1 : 0;
}

lg_status lg_model_open(const char* ckpt_path, lg_model** out) {
  if (!ckpt_path || !out) {
    g_last_error = "null argument";
    return LG_ERR_CONFIG;
  }
  return guarded([&]() { *out = new lg_model{model::ModelRuntime::load(ckpt_path)}; });
}

void lg_model_close(lg_model* model) { delete model; }

lg_status lg_model_info(const lg_model* model, char** info_json) {
  if (!model || !info_json) {
    g_last_error = "null argument";
    return LG_ERR_CONFIG;
  }
  return guarded([&]() {
    const auto& meta = model->runtime.meta();
    Json j;
    j["model"] = meta.model_kind;
    j["dtype"] = meta.dtype;
    j["fov_m"] = meta.fov_m;
    j["W"] = meta.W;
    j["config"] = meta.config;
    *info_json = dup_string(j.dump());
  });
}

lg_status lg_model_sample(const lg_model* model, double tau, uint64_t seed, int max_nodes,
                          lg_map** out) {
  if (!model || !out) {
    g_last_error = "null argument";
    return LG_ERR_CONFIG;
  }
  return guarded([&]() {
    auto* handle = new lg_map();
    handle->map = model->runtime.sample_map(tau, seed, max_nodes, nullptr);
    handle->fov_m = model->runtime.meta().fov_m;
    *out = handle;
  });
}

}  // extern "C"
