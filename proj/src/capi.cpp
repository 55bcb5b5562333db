#include <exception>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "evbandit.h"
#include "evbandit/csv.hpp"
#include "evbandit/errors.hpp"
#include "evbandit/experiment.hpp"

struct evb_config {
  evbandit::experiment::ExperimentConfig cfg;
  std::vector<std::string> warnings;
  std::string output_dir;
};

struct evb_road_graph {
  evbandit::road::RoadGraph graph;
};

struct evb_feasibility {
  evbandit::feasibility::FeasibilityGraph graph;
};

namespace {

thread_local std::string last_error;

evb_status status_of(evbandit::ErrorKind kind) {
  using evbandit::ErrorKind;
  switch (kind) {
    case ErrorKind::config:
      return EVB_ERR_CONFIG;
    case ErrorKind::validation:
    case ErrorKind::mismatched_feedback:
      return EVB_ERR_VALIDATION;
    case ErrorKind::parse:
      return EVB_ERR_PARSE;
    case ErrorKind::isolated_terminal:
    case ErrorKind::unreachable:
      return EVB_ERR_INFEASIBLE;
    case ErrorKind::empty_input:
      return EVB_ERR_EMPTY_INPUT;
    case ErrorKind::io:
      return EVB_ERR_IO;
    case ErrorKind::domain:
    case ErrorKind::sampler_failure:
    case ErrorKind::degenerate_map:
    case ErrorKind::no_interior_mode:
    case ErrorKind::zero_deficit:
      return EVB_ERR_NUMERIC;
    case ErrorKind::generation_failure:
      return EVB_ERR_VALIDATION;
  }
  return EVB_ERR_INTERNAL;
}

template <class F>
evb_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return EVB_OK;
  } catch (const evbandit::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    last_error = e.what();
    return EVB_ERR_IO;
  } catch (const std::exception& e) {
    last_error = e.what();
    return EVB_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return EVB_ERR_INTERNAL;
  }
}

evb_status null_argument(const char* what) {
  last_error = std::string(what) + " is null";
  return EVB_ERR_ARGUMENT;
}

}  // namespace

extern "C" {

const char* evb_version(void) { return "0.1.0"; }

const char* evb_last_error(void) { return last_error.c_str(); }

int evb_exit_code(evb_status status) {
  switch (status) {
    case EVB_OK:
      return 0;
    case EVB_ERR_CONFIG:
    case EVB_ERR_VALIDATION:
    case EVB_ERR_PARSE:
      return 2;
    case EVB_ERR_INFEASIBLE:
      return 3;
    default:
      return 1;
  }
}

evb_status evb_config_default(evb_config** out) {
  if (!out) return null_argument("out");
  return guarded([&] { *out = new evb_config{}; });
}

evb_status evb_config_load(const char* path, evb_config** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  return guarded([&] {
    auto handle = std::make_unique<evb_config>();
    handle->cfg = evbandit::experiment::load_config(path);
    handle->warnings = handle->cfg.validate();
    *out = handle.release();
  });
}

void evb_config_free(evb_config* cfg) { delete cfg; }

evb_status evb_config_set(evb_config* cfg, const char* section, const char* key,
                          const char* value) {
  if (!cfg) return null_argument("config");
  if (!section || !key || !value) return null_argument("setting");
  return guarded([&] { evbandit::experiment::apply_setting(cfg->cfg, section, key, value); });
}

evb_status evb_config_set_seeds(evb_config* cfg, const char* seeds) {
  if (!cfg) return null_argument("config");
  if (!seeds) return null_argument("seeds");
  return guarded([&] { cfg->cfg.seeds = evbandit::experiment::parse_seed_list(seeds); });
}

evb_status evb_config_set_policies(evb_config* cfg, const char* policies) {
  if (!cfg) return null_argument("config");
  if (!policies) return null_argument("policies");
  return guarded(
      [&] { cfg->cfg.policies = evbandit::experiment::parse_policy_list(policies); });
}

evb_status evb_config_validate(evb_config* cfg) {
  if (!cfg) return null_argument("config");
  return guarded([&] { cfg->warnings = cfg->cfg.validate(); });
}

size_t evb_config_warning_count(const evb_config* cfg) { return cfg ? cfg->warnings.size() : 0; }

const char* evb_config_warning(const evb_config* cfg, size_t index) {
  if (!cfg || index >= cfg->warnings.size()) return nullptr;
  return cfg->warnings[index].c_str();
}

const char* evb_config_output_dir(const evb_config* cfg) {
  if (!cfg) return nullptr;
  auto* self = const_cast<evb_config*>(cfg);
  self->output_dir = cfg->cfg.output_dir.string();
  return self->output_dir.c_str();
}

evb_status evb_generate(const evb_config* cfg, const char* out_dir, int64_t* source,
                        int64_t* target) {
  if (!cfg) return null_argument("config");
  if (!out_dir) return null_argument("out_dir");
  return guarded([&] {
    const auto inst = evbandit::experiment::generate_instance(cfg->cfg.generator);
    // Validate through the loader's rules before writing.
    const evbandit::road::RoadGraph graph(inst.nodes, inst.edges);
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    evbandit::road::save_instance(graph, dir / "nodes.csv", dir / "edges.csv");
    if (source) *source = inst.source;
    if (target) *target = inst.target;
  });
}

evb_status evb_preprocess(const evb_config* cfg, const char* out_dir, size_t* station_count,
                          size_t* edge_count) {
  if (!cfg) return null_argument("config");
  if (!out_dir) return null_argument("out_dir");
  return guarded([&] {
    auto plain = cfg->cfg;
    // Always rebuild here; the cache is what this call produces.
    plain.feasibility_stations_file.clear();
    plain.feasibility_edges_file.clear();
    const auto instance = evbandit::experiment::load_or_generate_instance(plain);
    const auto graph = evbandit::experiment::preprocess(plain, instance);
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    evbandit::feasibility::save_feasibility(graph, dir / "feasibility_stations.csv",
                                            dir / "feasibility_edges.csv");
    if (station_count) *station_count = graph.stations().size();
    if (edge_count) *edge_count = graph.edges().size();
  });
}

evb_status evb_run(const evb_config* cfg, const char* out_dir, size_t* files_written) {
  if (!cfg) return null_argument("config");
  if (!out_dir) return null_argument("out_dir");
  return guarded([&] {
    const auto files = evbandit::experiment::run_experiment(cfg->cfg, out_dir);
    if (files_written) *files_written = files.size();
  });
}

evb_status evb_report(const char* trace_dir, const char* out_dir) {
  if (!trace_dir) return null_argument("trace_dir");
  if (!out_dir) return null_argument("out_dir");
  return guarded([&] { evbandit::experiment::report(trace_dir, out_dir); });
}

evb_status evb_road_graph_load(const char* nodes_csv, const char* edges_csv,
                               evb_road_graph** out) {
  if (!nodes_csv || !edges_csv) return null_argument("path");
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = new evb_road_graph{evbandit::road::load_instance(nodes_csv, edges_csv)};
  });
}

void evb_road_graph_free(evb_road_graph* graph) { delete graph; }

size_t evb_road_graph_node_count(const evb_road_graph* graph) {
  return graph ? graph->graph.nodes().size() : 0;
}

size_t evb_road_graph_edge_count(const evb_road_graph* graph) {
  return graph ? graph->graph.edges().size() : 0;
}

size_t evb_road_graph_charger_count(const evb_road_graph* graph) {
  return graph ? graph->graph.charger_indices().size() : 0;
}

evb_status evb_road_graph_fastest_path(const evb_road_graph* graph, const evb_config* cfg,
                                       int64_t from, int64_t to, double* time_s,
                                       double* energy_ws) {
  if (!graph) return null_argument("graph");
  if (!cfg) return null_argument("config");
  return guarded([&] {
    const auto path = evbandit::road::fastest_path(graph->graph, from, to, cfg->cfg.vehicle);
    if (time_s) *time_s = path.total_time_s;
    if (energy_ws) *energy_ws = path.total_energy_ws;
  });
}

evb_status evb_feasibility_build(const evb_road_graph* graph, const evb_config* cfg,
                                 evb_feasibility** out) {
  if (!graph) return null_argument("graph");
  if (!cfg) return null_argument("config");
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = new evb_feasibility{
        evbandit::feasibility::build_feasibility_graph(graph->graph, cfg->cfg.vehicle)};
  });
}

void evb_feasibility_free(evb_feasibility* graph) { delete graph; }

size_t evb_feasibility_station_count(const evb_feasibility* graph) {
  return graph ? graph->graph.stations().size() : 0;
}

size_t evb_feasibility_edge_count(const evb_feasibility* graph) {
  return graph ? graph->graph.edges().size() : 0;
}

}  // extern "C"
