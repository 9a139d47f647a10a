/* C API for the lanegraph library: opaque handles, integer status codes,
 * JSON strings across the boundary. Every function returns LG_OK (0) on
 * success; lg_last_error() describes the most recent failure on the calling
 * thread. Strings returned through out-parameters are heap-allocated and
 * must be released with lg_string_free(). */

#ifndef LANEGRAPH_H
#define LANEGRAPH_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define LG_API __attribute__((visibility("default")))

typedef enum lg_status {
  LG_OK = 0,
  LG_ERR_INTERNAL = 1,
  LG_ERR_VALIDATION = 2,
  LG_ERR_IO = 3,
  LG_ERR_CONFIG = 4,
} lg_status;

LG_API const char* lg_version(void);
LG_API const char* lg_last_error(void);
LG_API void lg_string_free(char* s);

/* Runs one pipeline command ("synth", "preprocess", "train", "sample",
 * "eval", "render", "bench") with a JSON config string. On success stores a
 * JSON summary in *result_json when result_json is non-null. */
LG_API lg_status lg_run(const char* command, const char* config_json, char** result_json);

/* ---- maps ---- */
typedef struct lg_map lg_map;

LG_API lg_status lg_map_open(const char* path, lg_map** out);
LG_API lg_status lg_map_parse(const char* json, lg_map** out);
LG_API void lg_map_close(lg_map* map);

/* JSON array of violated invariants (empty when valid). */
LG_API lg_status lg_map_validate(const lg_map* map, char** report_json);
LG_API lg_status lg_map_to_json(const lg_map* map, char** json);
LG_API lg_status lg_map_render_svg(const lg_map* map, const char* options_json, char** svg);
LG_API int lg_map_is_hierarchical(const lg_map* map);

/* ---- trained models ---- */
typedef struct lg_model lg_model;

LG_API lg_status lg_model_open(const char* ckpt_path, lg_model** out);
LG_API void lg_model_close(lg_model* model);
LG_API lg_status lg_model_info(const lg_model* model, char** info_json);

/* Draws one map (deterministic per seed); max_nodes 0 draws the cap from the
 * training size distribution. */
LG_API lg_status lg_model_sample(const lg_model* model, double tau, uint64_t seed, int max_nodes,
                                 lg_map** out);

#ifdef __cplusplus
}
#endif

#endif /* LANEGRAPH_H */
