// isoweb: config-driven construction, optimization, flexion and export of webs.
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "isoweb/pipeline.hpp"

namespace pl = isoweb::pipeline;

int main(int argc, char** argv) {
  CLI::App app{"Isotropic and Euclidean webs on quad nets"};
  app.require_subcommand(1);

  std::vector<std::string> configs;
  std::string output = ".";
  std::string schedule;
  bool no_continuation = false;

  const std::vector<std::pair<pl::Command, std::string>> commands = {
      {pl::Command::Construct, "Build a net from a constructor recipe and write it with a diagnostics report"},
      {pl::Command::Optimize, "Run the epsilon continuation and write the net, stats and summary table"},
      {pl::Command::Flex, "Trace an isotropic or Euclidean flexion and write every step"},
      {pl::Command::Diagnose, "Write the diagnostics report of a net"},
      {pl::Command::Extract, "Downsample and trim polylines into OBJ groups"},
      {pl::Command::Export, "Convert a net to OBJ or JSON"},
  };
  for (const auto& [cmd, help] : commands) {
    CLI::App* sub = app.add_subcommand(std::string(pl::to_string(cmd)), help);
    sub->add_option("-c,--config", configs, "Job config (JSON); several configs run as a batch")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("-o,--output", output, "Output directory")->capture_default_str();
    sub->add_option("--seed-epsilon-schedule", schedule, "Comma-separated eps values, e.g. 0,0.5,1");
    sub->add_flag("--ablation-no-continuation", no_continuation, "Optimize directly at eps = 1");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pl::kInputError;
  }

  pl::Command command = pl::Command::Construct;
  for (const auto& [cmd, help] : commands)
    if (app.got_subcommand(std::string(pl::to_string(cmd)))) command = cmd;

  std::vector<pl::JobConfig> jobs;
  try {
    for (const auto& c : configs) {
      pl::JobConfig job = pl::load_job(c, command, output);
      if (!schedule.empty()) job.eps_schedule = pl::parse_schedule(schedule);
      job.no_continuation = no_continuation;
      jobs.push_back(std::move(job));
    }
  } catch (const isoweb::Error& e) {
    std::cerr << "config: " << e.what() << "\n";
    return pl::exit_code_for(e.code());
  }

  int code = pl::kOk;
  const auto results = pl::run_batch(jobs, pl::threads_from_env());
  for (size_t k = 0; k < results.size(); ++k) {
    const auto& r = results[k];
    std::ostream& out = r.exit_code == pl::kOk ? std::cout : std::cerr;
    if (results.size() > 1) out << "[" << configs[k] << "] ";
    out << r.message << (r.message.empty() || r.message.back() != '\n' ? "\n" : "");
    for (const auto& f : r.files) std::cout << "  wrote " << f << "\n";
    code = std::max(code, r.exit_code);
  }
  return code;
}
