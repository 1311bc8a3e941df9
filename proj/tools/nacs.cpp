// Command-line front end: cost estimation, accelerator search, joint
// network/accelerator co-search, baselines, and the oracle equivalence
// sweep. All randomness comes from config/flag seeds; identical inputs
// produce byte-identical output files.
//
// Exit codes: 0 success, 1 parse/schema/runtime failure, 2 violations
// (illegal config in estimate, oracle mismatch), 3 no legal accelerator.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>

#include "nacs/config_io.hpp"

namespace fs = std::filesystem;
using namespace nacs;

namespace {

// A bare relative path that does not exist locally is retried under
// NACS_CONFIG_DIR; that variable's only role is locating config files.
std::string resolve_config_path(const std::string& given) {
  if (fs::exists(given)) return given;
  if (const char* dir = std::getenv("NACS_CONFIG_DIR")) {
    fs::path alt = fs::path(dir) / given;
    if (fs::exists(alt)) return alt.string();
  }
  return given;
}

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "run configuration JSON")->required();
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--threads", args.threads, "override the worker thread cap");
  cmd->add_option("--out", args.out_dir, "output directory (default from config)");
}

RunConfig load_run_config(const CommonArgs& args) {
  const std::string path = resolve_config_path(args.config_path);
  RunConfig rc = run_config_from_json(parse_json_file(path), "config");
  if (args.seed) {
    rc.seed = *args.seed;
    rc.cosearch.seed = *args.seed;
  } else {
    rc.cosearch.seed = rc.seed;
  }
  if (args.threads) {
    rc.threads = *args.threads;
    if (rc.threads < 1) throw ConfigError("--threads: must be >= 1");
  }
  rc.cosearch.threads = rc.threads;
  if (args.out_dir) rc.output_dir = *args.out_dir;
  return rc;
}

fs::path prepare_out_dir(const RunConfig& rc) {
  fs::path dir(rc.output_dir);
  fs::create_directories(dir);
  return dir;
}

json cosearch_result_to_json(const CoSearchResult& res, const RunConfig& rc) {
  json j{{"schema_version", kSchemaVersion},
         {"objective", objective_to_string(rc.objective)},
         {"choices", res.choices},
         {"network", network_to_json(res.network)},
         {"accelerator", accel_config_to_json(res.accel)},
         {"final_cost", res.final_cost},
         {"lambda", res.lambda_used},
         {"hw_cost_normalizer", res.table_norm},
         {"report", report_to_json(res.report, false)}};
  return j;
}

int cmd_estimate(const CommonArgs& args, const std::string& network_path,
                 const std::string& accel_path) {
  RunConfig rc = load_run_config(args);
  NetworkDesc net = network_path.empty()
                        ? rc.resolve_network()
                        : network_from_json(parse_json_file(resolve_config_path(network_path)),
                                            network_path);
  AcceleratorConfig accel =
      accel_config_from_json(parse_json_file(resolve_config_path(accel_path)), accel_path);

  CostReport rep = network_cost(net, accel, rc.tables);
  LegalityReport leg = validate(accel, net, rc.accel_space, rc.tables);

  json out{{"schema_version", kSchemaVersion},
           {"objective", objective_to_string(rc.objective)},
           {"objective_cost", objective_cost(rep, rc.objective, rc.tables)},
           {"legal", leg.legal()},
           {"violations", violations_to_json(leg)},
           {"report", report_to_json(rep)}};
  const std::string text = out.dump(2) + "\n";
  std::fputs(text.c_str(), stdout);

  fs::path dir = prepare_out_dir(rc);
  write_text_file((dir / "report.json").string(), text);
  write_text_file((dir / "breakdown.csv").string(), breakdown_csv(rep));
  return leg.legal() ? 0 : 2;
}

int cmd_das(const CommonArgs& args) {
  RunConfig rc = load_run_config(args);
  NetworkDesc net = rc.resolve_network();
  AccelSearchConfig das = rc.das;
  das.seed = rc.seed;
  SearchResult res = search_accelerator(net, rc.accel_space, rc.tables, rc.objective, das);

  fs::path dir = prepare_out_dir(rc);
  write_text_file((dir / "trace.csv").string(), search_trace_csv(res.trace));
  json out{{"schema_version", kSchemaVersion},
           {"objective", objective_to_string(rc.objective)},
           {"found_legal", res.found_legal},
           {"best_cost", res.best_cost}};
  if (res.found_legal) {
    out["accelerator"] = accel_config_to_json(res.best_config);
    out["report"] = report_to_json(res.best_report, false);
  }
  write_text_file((dir / "result.json").string(), out.dump(2) + "\n");
  std::printf("%s\n", res.found_legal ? "search finished; result.json written"
                                      : "search finished; no legal accelerator found");
  if (!res.found_legal) return 3;
  return 0;
}

int cmd_cosearch(const CommonArgs& args, bool sequential) {
  RunConfig rc = load_run_config(args);
  CoSearchResult res =
      sequential ? run_sequential_baseline(rc.cosearch, rc.network_space, rc.accel_space,
                                           rc.tables, rc.task)
                 : run_cosearch(rc.cosearch, rc.network_space, rc.accel_space, rc.tables, rc.task);
  if (rc.cosearch.lambda < 0.0)
    std::printf("lambda auto-balanced to %s\n", fmt_g17(res.lambda_used).c_str());

  fs::path dir = prepare_out_dir(rc);
  write_text_file((dir / "trace.csv").string(), epoch_trace_csv(res.trace));
  write_text_file((dir / "result.json").string(), cosearch_result_to_json(res, rc).dump(2) + "\n");
  std::printf("final cost %s; result.json written\n", fmt_g17(res.final_cost).c_str());
  return 0;
}

int cmd_random(const CommonArgs& args) {
  RunConfig rc = load_run_config(args);
  RandomBaselineResult res = run_random_baseline(
      rc.network_space, rc.accel_space, rc.tables, rc.objective, rc.task, rc.random_n_nets,
      rc.random_n_accels, rc.random_proxy_steps, rc.das.penalty_multiplier, rc.seed, rc.threads);

  json pareto = json::array();
  for (const auto& p : res.pareto)
    pareto.push_back(json{{"choices", p.choices},
                          {"accuracy", p.accuracy},
                          {"cost", p.cost},
                          {"accelerator", accel_config_to_json(p.accel)}});
  json out{{"schema_version", kSchemaVersion},
           {"objective", objective_to_string(rc.objective)},
           {"n_nets", rc.random_n_nets},
           {"n_accels_per_net", rc.random_n_accels},
           {"pareto", std::move(pareto)}};

  fs::path dir = prepare_out_dir(rc);
  write_text_file((dir / "points.csv").string(), random_points_csv(res));
  write_text_file((dir / "result.json").string(), out.dump(2) + "\n");
  std::printf("%zu nets evaluated, %zu on the front; result.json written\n", res.points.size(),
              res.pareto.size());
  return 0;
}

int cmd_oracle_check(const CommonArgs& args) {
  RunConfig rc = load_run_config(args);
  SweepConfig sweep = rc.oracle;
  if (args.seed) sweep.seed = *args.seed;
  SweepResult res = oracle_sweep(sweep);

  json out{{"schema_version", kSchemaVersion},
           {"checked", res.checked},
           {"mismatches", res.mismatches}};
  if (res.first) {
    out["first_mismatch"] = json{{"layer", layer_to_json(res.first->layer)},
                                 {"config", accel_config_to_json(res.first->config)},
                                 {"detail", res.first->detail}};
  }
  fs::path dir = prepare_out_dir(rc);
  write_text_file((dir / "result.json").string(), out.dump(2) + "\n");

  if (res.mismatches) {
    std::printf("FAIL: %d of %d configs mismatched; first: %s\n", res.mismatches, res.checked,
                res.first->detail.c_str());
    return 2;
  }
  std::printf("PASS: %d configs matched the oracle exactly\n", res.checked);
  return 0;
}

int cmd_enumerate(const CommonArgs& args, std::uint64_t limit, bool full) {
  RunConfig rc = load_run_config(args);

  json divisor_tables = json::object();
  for (int d = 0; d < kDims; ++d)
    divisor_tables[dim_name(d)] = divisors(rc.accel_space.ref_dims[d]);

  int assignment_slots = 0;
  if (rc.accel_space.has_mode(ExecMode::Pipeline)) {
    NetworkDesc probe;
    if (rc.network || rc.network_choices) probe = rc.resolve_network();
    assignment_slots = static_cast<int>(probe.layers.size());
  }
  json out{{"schema_version", kSchemaVersion},
           {"ref_dims", tiles_to_json(rc.accel_space.ref_dims)},
           {"divisors", std::move(divisor_tables)},
           {"space_size_log10", space_size_log10(rc.accel_space, assignment_slots)}};
  if (auto exact = space_size_exact(rc.accel_space, assignment_slots)) out["space_size"] = *exact;

  fs::path dir = prepare_out_dir(rc);
  if (full) {
    NetworkDesc net = rc.resolve_network();
    auto all = enumerate_configs(net, rc.accel_space, rc.tables, rc.objective,
                                 rc.das.penalty_multiplier, limit);
    std::string csv = "index,cost,legal\n";
    for (std::size_t i = 0; i < all.size(); ++i) {
      csv += std::to_string(i);
      csv += ',';
      csv += fmt_g17(all[i].cost);
      csv += ',';
      csv += all[i].legal ? '1' : '0';
      csv += '\n';
    }
    write_text_file((dir / "configs.csv").string(), csv);
    out["enumerated"] = all.size();
  }
  const std::string text = out.dump(2) + "\n";
  std::fputs(text.c_str(), stdout);
  write_text_file((dir / "result.json").string(), text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"differentiable network/accelerator co-search toolkit"};
  app.require_subcommand(1);

  CommonArgs est_args, das_args, co_args, seq_args, rnd_args, orc_args, enum_args;
  std::string est_network, est_accel;
  std::uint64_t enum_limit = 1000000;
  bool enum_full = false;

  CLI::App* est = app.add_subcommand("estimate", "price one network on one accelerator");
  add_common(est, est_args);
  est->add_option("--network", est_network, "network JSON (default: config network section)");
  est->add_option("--accel", est_accel, "accelerator config JSON")->required();

  add_common(app.add_subcommand("das", "gradient-based accelerator search"), das_args);
  add_common(app.add_subcommand("cosearch", "joint network/accelerator search"), co_args);
  add_common(app.add_subcommand("seq", "network-then-accelerator baseline"), seq_args);
  add_common(app.add_subcommand("random", "random-sampling baseline with Pareto filter"), rnd_args);
  add_common(app.add_subcommand("oracle-check", "analytical-vs-oracle equivalence sweep"), orc_args);

  CLI::App* enu = app.add_subcommand("enumerate", "dump space size, divisor tables, and configs");
  add_common(enu, enum_args);
  enu->add_option("--limit", enum_limit, "max configs for --full enumeration");
  enu->add_flag("--full", enum_full, "also enumerate and price every config");

  CLI11_PARSE(app, argc, argv);

  try {
    if (est->parsed()) return cmd_estimate(est_args, est_network, est_accel);
    if (app.got_subcommand("das")) return cmd_das(das_args);
    if (app.got_subcommand("cosearch")) return cmd_cosearch(co_args, false);
    if (app.got_subcommand("seq")) return cmd_cosearch(seq_args, true);
    if (app.got_subcommand("random")) return cmd_random(rnd_args);
    if (app.got_subcommand("oracle-check")) return cmd_oracle_check(orc_args);
    if (app.got_subcommand("enumerate")) return cmd_enumerate(enum_args, enum_limit, enum_full);
  } catch (const NoLegalAcceleratorError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
