#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qcpulse/pipeline.hpp"
#include "qcpulse/verify.hpp"

namespace {

namespace fs = std::filesystem;

struct StageArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::string in_path;
  bool force = false;
  std::optional<std::uint64_t> seed;
  std::optional<double> time_limit;
};

void add_common_options(CLI::App* cmd, StageArgs& args, bool with_input) {
  cmd->add_option("--config", args.config_path, "run configuration file")->required();
  cmd->add_option("--out", args.out_dir, "output directory (default: current)");
  cmd->add_flag("--force", args.force, "overwrite existing outputs");
  cmd->add_option("--seed", args.seed, "override [instance] seed");
  cmd->add_option("--time-limit", args.time_limit, "override search time limits, seconds");
  if (with_input) {
    cmd->add_option("--in", args.in_path, "input controls CSV from the previous stage");
  }
}

qcp::RunConfig load_config(const StageArgs& args) {
  qcp::RunConfig cfg = qcp::parse_run_config(args.config_path);
  if (args.seed) cfg.instance.seed = *args.seed;
  if (args.time_limit) {
    cfg.round.time_limit = *args.time_limit;
    cfg.improve.tr.subproblem_time_limit = *args.time_limit;
  }
  return cfg;
}

void print_report(const qcp::SolveReport& report) {
  std::printf("%s: objective=%.6e tv=%.4f sos1=%.3e iterations=%lld status=%s (%.2fs)\n",
              report.stage.c_str(), report.objective, report.tv_value, report.sos1_penalty_value,
              report.iterations, to_string(report.status).c_str(), report.wall_seconds);
}

void write_report_json(const std::string& path, const qcp::SolveReport& report, bool force) {
  qcp::ensure_writable(path, force);
  qcp::write_text_file(path, qcp::report_to_json(report).dump(2) + "\n");
}

void write_failure(const std::string& out_dir, const std::string& stage, const std::string& what) {
  nlohmann::ordered_json failure;
  failure["stage"] = stage;
  failure["error"] = what;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!ec) qcp::write_text_file(out_dir + "/failure.json", failure.dump(2) + "\n");
}

int run_stage_command(const std::string& stage, const StageArgs& args) {
  try {
    const qcp::RunConfig cfg = load_config(args);
    const qcp::QuantumInstance inst = qcp::make_instance(cfg.instance);
    fs::create_directories(args.out_dir);

    if (stage == "relax") {
      std::optional<qcp::ControlSequence> warm;
      if (!args.in_path.empty()) {
        warm = qcp::read_controls_csv(args.in_path);
      } else if (cfg.relax.warm_start) {
        warm = qcp::read_controls_csv(args.out_dir + "/relax_controls.csv");
      }
      const std::string controls_path = args.out_dir + "/relax_controls.csv";
      qcp::ensure_writable(controls_path, args.force || cfg.relax.warm_start);
      const qcp::RelaxResult result = qcp::run_relax_stage(cfg, inst, warm);
      qcp::write_controls_csv(controls_path, result.controls);
      write_report_json(args.out_dir + "/relax_report.json", result.report, true);
      print_report(result.report);
      return 0;
    }

    const std::string default_in =
        args.out_dir + (stage == "round" ? "/relax_controls.csv" : "/round_controls.csv");
    const std::string in_path = args.in_path.empty() ? default_in : args.in_path;
    const qcp::ControlSequence input = qcp::read_controls_csv(in_path);

    if (stage == "round") {
      const std::string controls_path = args.out_dir + "/round_controls.csv";
      qcp::ensure_writable(controls_path, args.force);
      const qcp::RoundStageResult result = qcp::run_round_stage(cfg, inst, input);
      qcp::write_controls_csv(controls_path, result.controls);
      write_report_json(args.out_dir + "/round_report.json", result.report, true);
      print_report(result.report);
      return 0;
    }

    const std::string controls_path = args.out_dir + "/improve_controls.csv";
    qcp::ensure_writable(controls_path, args.force);
    const qcp::ImproveResult result = qcp::run_improve_stage(cfg, inst, input);
    qcp::write_controls_csv(controls_path, result.controls);
    write_report_json(args.out_dir + "/improve_report.json", result.report, true);
    print_report(result.report);
    return 0;
  } catch (const std::exception& error) {
    std::fprintf(stderr, "error: %s\n", error.what());
    write_failure(args.out_dir, stage, error.what());
    return 1;
  }
}

int run_pipeline_command(const StageArgs& args) {
  try {
    const qcp::RunConfig cfg = load_config(args);
    const qcp::PipelineResult result = qcp::run_pipeline(cfg, args.out_dir, args.force);
    for (const qcp::SolveReport& report : result.reports) print_report(report);
    std::printf("final objective %.6e\n", result.reports.back().objective);
    return 0;
  } catch (const std::exception& error) {
    // run_pipeline already recorded the failing stage in failure.json
    std::fprintf(stderr, "error: %s\n", error.what());
    return 1;
  }
}

int run_verify_command(const std::string& suite, const std::string& out_dir, bool force) {
  try {
    std::vector<qcp::VerifySuiteReport> reports;
    if (suite == "all" || suite == "gradients") reports.push_back(qcp::verify_gradients());
    if (suite == "all" || suite == "rounding") reports.push_back(qcp::verify_rounding_bounds());
    if (suite == "all" || suite == "oracles") reports.push_back(qcp::verify_oracle_equivalence());
    if (suite == "all" || suite == "tables") reports.push_back(qcp::verify_tables());
    if (reports.empty()) {
      std::fprintf(stderr, "error: unknown suite '%s'\n", suite.c_str());
      return 1;
    }
    bool all_pass = true;
    for (const qcp::VerifySuiteReport& report : reports) {
      int passed = 0;
      for (const qcp::VerifyCheck& check : report.checks) passed += check.pass ? 1 : 0;
      std::printf("%s: %s (checks %d/%zu, invariants %lld checked, %lld violated)\n",
                  report.suite.c_str(), report.all_pass ? "PASS" : "FAIL", passed,
                  report.checks.size(), report.invariants.checked, report.invariants.violated);
      for (const qcp::VerifyCheck& check : report.checks) {
        if (!check.pass) {
          std::printf("  %s: value=%.6e bound=%.6e margin=%.6e\n", check.name.c_str(), check.value,
                      check.bound, check.margin);
        }
      }
      if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        const std::string path = out_dir + "/verify_" + report.suite + ".json";
        qcp::ensure_writable(path, force);
        qcp::write_text_file(path, qcp::verify_report_to_json(report).dump(2) + "\n");
      }
      all_pass = all_pass && report.all_pass;
    }
    return all_pass ? 0 : 1;
  } catch (const std::exception& error) {
    std::fprintf(stderr, "error: %s\n", error.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binary quantum control: relax, round, improve"};
  app.require_subcommand(1);

  StageArgs relax_args;
  StageArgs round_args;
  StageArgs improve_args;
  StageArgs run_args;
  CLI::App* relax = app.add_subcommand("relax", "solve the continuous relaxation");
  add_common_options(relax, relax_args, true);
  CLI::App* round = app.add_subcommand("round", "round relaxed controls to one-hot binary");
  add_common_options(round, round_args, true);
  CLI::App* improve = app.add_subcommand("improve", "local-branching improvement of a rounding");
  add_common_options(improve, improve_args, true);
  CLI::App* run = app.add_subcommand("run", "full relax-round-improve pipeline");
  add_common_options(run, run_args, false);

  std::string verify_suite = "all";
  std::string verify_out;
  bool verify_force = false;
  CLI::App* verify = app.add_subcommand("verify", "run the self-verification suites");
  verify->add_option("--suite", verify_suite, "gradients | rounding | oracles | tables | all");
  verify->add_option("--out", verify_out, "directory for JSON reports");
  verify->add_flag("--force", verify_force, "overwrite existing reports");

  CLI11_PARSE(app, argc, argv);

  if (relax->parsed()) return run_stage_command("relax", relax_args);
  if (round->parsed()) return run_stage_command("round", round_args);
  if (improve->parsed()) return run_stage_command("improve", improve_args);
  if (run->parsed()) return run_pipeline_command(run_args);
  return run_verify_command(verify_suite, verify_out, verify_force);
}
