/* C interface to the evbandit library. All handles are opaque; functions
 * return an evb_status and leave a message in evb_last_error() (per thread)
 * when they fail. */
#ifndef EVBANDIT_H
#define EVBANDIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define EVB_API __declspec(dllexport)
#else
#define EVB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum evb_status {
  EVB_OK = 0,
  EVB_ERR_ARGUMENT = 1,    /* null handle or pointer */
  EVB_ERR_CONFIG = 2,
  EVB_ERR_VALIDATION = 3,
  EVB_ERR_PARSE = 4,
  EVB_ERR_INFEASIBLE = 5,  /* isolated terminal or unreachable target */
  EVB_ERR_EMPTY_INPUT = 6,
  EVB_ERR_IO = 7,
  EVB_ERR_NUMERIC = 8,     /* domain error or sampler failure */
  EVB_ERR_INTERNAL = 9
} evb_status;

typedef struct evb_config evb_config;
typedef struct evb_road_graph evb_road_graph;
typedef struct evb_feasibility evb_feasibility;

EVB_API const char* evb_version(void);

/* Message of the last failed call on this thread; "" when none. */
EVB_API const char* evb_last_error(void);

/* Process exit code for a status: 0 ok, 2 config or validation, 3 infeasible, 1 otherwise. */
EVB_API int evb_exit_code(evb_status status);

/* ---- configuration ---- */
EVB_API evb_status evb_config_default(evb_config** out);
EVB_API evb_status evb_config_load(const char* path, evb_config** out);
EVB_API void evb_config_free(evb_config* cfg);
/* Sets one `[section] key = value` entry, as in the INI file. */
EVB_API evb_status evb_config_set(evb_config* cfg, const char* section, const char* key,
                                  const char* value);
/* Comma-separated overrides. */
EVB_API evb_status evb_config_set_seeds(evb_config* cfg, const char* seeds);
EVB_API evb_status evb_config_set_policies(evb_config* cfg, const char* policies);
/* Validates and refreshes the warning list. */
EVB_API evb_status evb_config_validate(evb_config* cfg);
EVB_API size_t evb_config_warning_count(const evb_config* cfg);
EVB_API const char* evb_config_warning(const evb_config* cfg, size_t index);
EVB_API const char* evb_config_output_dir(const evb_config* cfg);

/* ---- pipeline ---- */
/* Writes nodes.csv and edges.csv into out_dir; reports the trip terminals. */
EVB_API evb_status evb_generate(const evb_config* cfg, const char* out_dir, int64_t* source,
                                int64_t* target);
/* Writes feasibility_stations.csv and feasibility_edges.csv into out_dir. */
EVB_API evb_status evb_preprocess(const evb_config* cfg, const char* out_dir,
                                  size_t* station_count, size_t* edge_count);
/* Runs every (seed, policy) pair; writes trace and posterior CSVs. */
EVB_API evb_status evb_run(const evb_config* cfg, const char* out_dir, size_t* files_written);
/* Reads trace_*.csv from trace_dir; writes summary.csv and regret.svg. */
EVB_API evb_status evb_report(const char* trace_dir, const char* out_dir);

/* ---- graphs ---- */
EVB_API evb_status evb_road_graph_load(const char* nodes_csv, const char* edges_csv,
                                       evb_road_graph** out);
EVB_API void evb_road_graph_free(evb_road_graph* graph);
EVB_API size_t evb_road_graph_node_count(const evb_road_graph* graph);
EVB_API size_t evb_road_graph_edge_count(const evb_road_graph* graph);
EVB_API size_t evb_road_graph_charger_count(const evb_road_graph* graph);
/* Fastest road path; time in s, energy in Ws for the config's vehicle. */
EVB_API evb_status evb_road_graph_fastest_path(const evb_road_graph* graph,
                                               const evb_config* cfg, int64_t from, int64_t to,
                                               double* time_s, double* energy_ws);

EVB_API evb_status evb_feasibility_build(const evb_road_graph* graph, const evb_config* cfg,
                                         evb_feasibility** out);
EVB_API void evb_feasibility_free(evb_feasibility* graph);
EVB_API size_t evb_feasibility_station_count(const evb_feasibility* graph);
EVB_API size_t evb_feasibility_edge_count(const evb_feasibility* graph);

#ifdef __cplusplus
}
#endif

#endif /* EVBANDIT_H */
