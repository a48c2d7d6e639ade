#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "isoweb/net.hpp"
#include "isoweb/net_io.hpp"
#include "isoweb/solver.hpp"
#include "json.hpp"

// Config-driven jobs behind the isoweb command line tool.
namespace isoweb::pipeline {

namespace fs = std::filesystem;

enum class Command { Construct, Optimize, Flex, Diagnose, Extract, Export };
std::string_view to_string(Command c);
Command command_from_string(std::string_view s);

/// Exit codes of a job.
inline constexpr int kOk = 0, kInputError = 2, kNumericalError = 3;

/// Input and config problems map to 2, everything else to 3.
int exit_code_for(ErrorCode c);

struct JobConfig {
  Command command = Command::Construct;
  std::string name = "net";  // stem of every output file
  WebKind kind = WebKind::Generic;
  fs::path base_dir = ".";   // relative paths in the document resolve here
  fs::path output_dir = ".";
  nlohmann::json doc = nlohmann::json::object();
  std::optional<std::vector<double>> eps_schedule;  // command line override
  bool no_continuation = false;                     // run the schedule {1}
};

/// Reads and checks a config file. Throws InvalidInput naming the field.
JobConfig load_job(const fs::path& config, Command command, const fs::path& output_dir);
JobConfig job_from_json(const nlohmann::json& doc, Command command, const fs::path& base_dir,
                        const fs::path& output_dir);

/// Parses "0,0.25,1".
std::vector<double> parse_schedule(const std::string& s);

struct JobResult {
  int exit_code = kOk;
  std::string message;
  std::vector<std::string> files;  // written outputs, in order
};

/// Runs one job. Errors are reported through the exit code, never thrown.
JobResult run_job(const JobConfig& job);

/// Runs independent jobs on up to threads workers; results in input order.
std::vector<JobResult> run_batch(const std::vector<JobConfig>& jobs, int threads);

/// Worker count from ISOWEB_THREADS (default 1).
int threads_from_env();

// --- building blocks (exposed for tests) ---

/// Net described by the "construct" section, or read from "input".
Net input_net(const JobConfig& job, nlohmann::json* extra = nullptr);

/// z = c0 x^2 + c1 xy + c2 y^2 + c3 x + c4 y + c5 from {"quadratic": [...]}.
std::function<double(double, double)> height_from_json(const nlohmann::json& j, const std::string& field);

/// 0, s, 2s, ... plus the last index.
std::vector<int> stride_indices(int count, int stride);

/// Even-odd rule; points on the boundary count as inside.
bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& polygon);
bool polygon_is_simple(const std::vector<Vec2>& polygon);

struct ExtractOptions {
  int stride = 1;
  std::vector<Family> families;  // empty: every family with a role, or i and j lines
  std::vector<Vec2> trim;        // closed top-view polygon, empty: no trim
};

/// Kept polylines per family; trimming splits a polyline into its runs of
/// inside vertices (runs of one vertex are dropped). Throws EmptySelection.
std::vector<ObjPolylineGroup> extract_polylines(const Net& net, const ExtractOptions& opt);

std::string family_name(Family f);
Family family_from_string(const std::string& s);

/// Human-readable table with |V|, N_v, weights, iterations, time per
/// iteration, total time and final E_hard.
std::string summary_table(const std::string& name, WebKind kind, const ContinuationResult& r,
                          const SolverConfig& cfg);

}  // namespace isoweb::pipeline
