// Command-line front end; talks to the library only through evbandit.h.
#include <cstdio>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "evbandit.h"

namespace {

struct ConfigDeleter {
  void operator()(evb_config* cfg) const { evb_config_free(cfg); }
};
using ConfigPtr = std::unique_ptr<evb_config, ConfigDeleter>;

int fail(evb_status status) {
  std::fprintf(stderr, "error: %s\n", evb_last_error());
  return evb_exit_code(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EV charging route planning with bandit feedback"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string seeds;
  std::string policy;
  std::string trace_dir;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "INI experiment config");
    sub->add_option("--out", out_dir, "output directory");
  };
  auto* generate = app.add_subcommand("generate", "write a synthetic road network");
  add_common(generate);
  auto* preprocess = app.add_subcommand("preprocess", "build the charger feasibility graph");
  add_common(preprocess);
  auto* run = app.add_subcommand("run", "run the bandit experiment");
  add_common(run);
  run->add_option("--seeds", seeds, "comma-separated seeds (overrides the config)");
  run->add_option("--policy", policy,
                  "only this policy: greedy, epsilon_greedy, thompson_sampling, bayes_ucb");
  auto* report = app.add_subcommand("report", "summarize traces into summary.csv and regret.svg");
  add_common(report);
  report->add_option("--traces", trace_dir, "directory with trace_*.csv (default: --out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  evb_config* raw = nullptr;
  const evb_status st = config_path.empty() ? evb_config_default(&raw)
                                            : evb_config_load(config_path.c_str(), &raw);
  if (st != EVB_OK) return fail(st);
  ConfigPtr cfg(raw);
  if (!seeds.empty()) {
    if (const auto s = evb_config_set_seeds(cfg.get(), seeds.c_str()); s != EVB_OK) return fail(s);
  }
  if (!policy.empty()) {
    if (const auto s = evb_config_set_policies(cfg.get(), policy.c_str()); s != EVB_OK) {
      return fail(s);
    }
  }
  if (const auto s = evb_config_validate(cfg.get()); s != EVB_OK) return fail(s);
  // Warnings are about the priors; report does not use them.
  for (size_t i = 0; !report->parsed() && i < evb_config_warning_count(cfg.get()); ++i) {
    std::fprintf(stderr, "warning: %s\n", evb_config_warning(cfg.get(), i));
  }
  if (out_dir.empty()) out_dir = evb_config_output_dir(cfg.get());

  if (generate->parsed()) {
    int64_t source = 0;
    int64_t target = 0;
    if (const auto s = evb_generate(cfg.get(), out_dir.c_str(), &source, &target); s != EVB_OK) {
      return fail(s);
    }
    std::printf("wrote %s/nodes.csv and %s/edges.csv; source %lld, target %lld\n",
                out_dir.c_str(), out_dir.c_str(), static_cast<long long>(source),
                static_cast<long long>(target));
  } else if (preprocess->parsed()) {
    size_t stations = 0;
    size_t edges = 0;
    if (const auto s = evb_preprocess(cfg.get(), out_dir.c_str(), &stations, &edges);
        s != EVB_OK) {
      return fail(s);
    }
    std::printf("feasibility graph: %zu stations, %zu edges\n", stations, edges);
  } else if (run->parsed()) {
    size_t files = 0;
    if (const auto s = evb_run(cfg.get(), out_dir.c_str(), &files); s != EVB_OK) return fail(s);
    std::printf("wrote %zu files to %s\n", files, out_dir.c_str());
  } else if (report->parsed()) {
    if (trace_dir.empty()) trace_dir = out_dir;
    if (const auto s = evb_report(trace_dir.c_str(), out_dir.c_str()); s != EVB_OK) {
      return fail(s);
    }
    std::printf("wrote %s/summary.csv and %s/regret.svg\n", out_dir.c_str(), out_dir.c_str());
  }
  return 0;
}
