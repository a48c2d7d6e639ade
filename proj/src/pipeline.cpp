#include "isoweb/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <thread>

#include "isoweb/crpc.hpp"
#include "isoweb/flexnets.hpp"
#include "isoweb/recipes.hpp"
#include "isoweb/web_construct.hpp"

namespace isoweb::pipeline {

using nlohmann::json;

namespace {

Error bad(const std::string& field, const std::string& what) { return Error(ErrorCode::InvalidInput, field + ": " + what); }

const json& section(const json& doc, const std::string& key) {
  if (!doc.contains(key) || !doc.at(key).is_object()) throw bad(key, "missing section");
  return doc.at(key);
}

template <typename T>
T field(const json& j, const std::string& key, const std::string& ctx) {
  if (!j.contains(key)) throw bad(ctx + "." + key, "missing");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw bad(ctx + "." + key, "wrong type");
  }
}

template <typename T>
T field_or(const json& j, const std::string& key, T fallback, const std::string& ctx) {
  return j.contains(key) ? field<T>(j, key, ctx) : fallback;
}

Vec2 vec2(const json& j, const std::string& ctx) {
  std::vector<double> v;
  if (j.is_array())
    for (const auto& x : j)
      if (x.is_number()) v.push_back(x.get<double>());
  if (v.size() != 2 || j.size() != 2) throw bad(ctx, "expected [x, y]");
  return {v[0], v[1]};
}

Vec3 vec3(const json& j, const std::string& ctx) {
  std::vector<double> v;
  if (j.is_array())
    for (const auto& x : j)
      if (x.is_number()) v.push_back(x.get<double>());
  if (v.size() != 3 || j.size() != 3) throw bad(ctx, "expected [x, y, z]");
  return {v[0], v[1], v[2]};
}

std::vector<Vec2> points2(const json& j, const std::string& key, const std::string& ctx) {
  std::vector<Vec2> out;
  if (!j.contains(key)) return out;
  try {
    for (const auto& p : j.at(key)) out.push_back(vec2(p, ctx + "." + key));
  } catch (const json::exception&) {
    throw bad(ctx + "." + key, "expected a list of [x, y]");
  }
  if (!j.at(key).is_array()) throw bad(ctx + "." + key, "expected a list of [x, y]");
  return out;
}

std::vector<Vec3> points3(const json& j, const std::string& key, const std::string& ctx) {
  std::vector<Vec3> out;
  try {
    for (const auto& p : field<json>(j, key, ctx)) out.push_back(vec3(p, ctx + "." + key));
  } catch (const json::exception&) {
    throw bad(ctx + "." + key, "expected a list of [x, y, z]");
  }
  return out;
}

fs::path existing_file(const JobConfig& job, const json& j, const std::string& key, const std::string& ctx) {
  fs::path p = field<std::string>(j, key, ctx);
  if (p.is_relative()) p = job.base_dir / p;
  if (!fs::is_regular_file(p)) throw bad(ctx + "." + key, "file not found: " + p.string());
  return p;
}

std::string out_path(const JobConfig& job, const std::string& suffix) {
  return (job.output_dir / (job.name + suffix)).string();
}

AagSeed aag_seed_from_json(const json& j, const std::string& ctx) {
  AagSeed s;
  try {
    for (const auto& l : j.at("lines")) {
      const auto v = l.get<std::vector<double>>();
      if (v.size() != 3) throw bad(ctx + ".lines", "expected [a, b, c] for a x + b y = c");
      s.lines.push_back({v[0], v[1], v[2]});
    }
  } catch (const json::exception&) {
    throw bad(ctx + ".lines", "missing or malformed");
  }
  s.diagonal = points3(j, "diagonal", ctx);
  s.subdiagonal = points3(j, "subdiagonal", ctx);
  return s;
}

ZProjectiveMap projective_from_json(const json& j, const std::string& ctx) {
  std::vector<double> v;
  try {
    for (const auto& row : j) {
      const auto r = row.get<std::vector<double>>();
      v.insert(v.end(), r.begin(), r.end());
    }
  } catch (const json::exception&) {
    throw bad(ctx, "expected a 4x4 matrix");
  }
  if (v.size() != 16) throw bad(ctx, "expected a 4x4 matrix");
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m(r, c) = v[4 * r + c];
  return ZProjectiveMap(m);
}

ConeCylinderData cone_cylinder_from_json(const json& j, const std::string& ctx) {
  ConeCylinderData d;
  d.a = points3(j, "a", ctx);
  d.b = points3(j, "b", ctx);
  d.sigma = field<std::vector<double>>(j, "sigma", ctx);
  d.validate();
  return d;
}

/// Ansatz from flat points or from a boundary fit.
CrpcAnsatz crpc_ansatz(const json& c, json* extra) {
  const std::string ctx = "construct";
  const double gamma = field<double>(c, "gamma", ctx) * std::numbers::pi / 180.0;
  std::vector<cplx> flats;
  for (const Vec2& p : points2(c, "flatPoints", ctx)) flats.emplace_back(p.x(), p.y());
  if (!c.contains("boundary")) return build_c2l(gamma, flats);
  const json& b = c.at("boundary");
  BoundarySpec spec;
  spec.polygon = points2(b, "polygon", ctx + ".boundary");
  spec.heights = field<std::vector<double>>(b, "heights", ctx + ".boundary");
  if (spec.polygon.size() != spec.heights.size()) throw bad(ctx + ".boundary.heights", "one height per polygon vertex");
  const BoundaryFit fit = fit_boundary(spec, gamma, flats, field_or<int>(b, "degree", 1, ctx + ".boundary"));
  if (extra) (*extra)["boundaryFit"] = {{"misfit", fit.misfit}, {"iterations", fit.iterations}, {"converged", fit.converged}};
  return fit.ansatz;
}

Net construct(const JobConfig& job, json* extra) {
  const json& c = section(job.doc, "construct");
  const std::string ctx = "construct";
  const std::string method = field<std::string>(c, "method", ctx);
  auto height = [&] { return height_from_json(c, ctx + ".height"); };
  auto integer = [&](const char* k) { return field<int>(c, k, ctx); };
  auto real = [&](const char* k) { return field<double>(c, k, ctx); };
  auto range = [&](const char* k) {
    const auto v = field<std::vector<double>>(c, k, ctx);
    if (v.size() != 2) throw bad(ctx + "." + k, "expected [from, to]");
    return v;
  };

  Net net;
  if (method == "pencil") {
    net = recipes::ggg_pencil(integer("n"), real("h"), height());
  } else if (method == "cubic") {
    net = recipes::ggg_cubic(integer("count"), real("u0"), real("v0"), real("du"), height());
  } else if (method == "propagation") {
    if (c.contains("seedFile")) {
      const fs::path p = existing_file(job, c, "seedFile", ctx);
      json s;
      try {
        s = json::parse(read_text_file(p.string()));
      } catch (const json::exception& e) {
        throw bad(ctx + ".seedFile", e.what());
      }
      net = aag_propagate(aag_seed_from_json(s, ctx + ".seedFile"));
    } else {
      net = recipes::aag_propagation(integer("n"), real("h"), height());
    }
  } else if (method == "koenigs") {
    net = recipes::aag_koenigs(integer("n"), real("h"), field_or<double>(c, "jitter", 0.2, ctx),
                               field_or<unsigned>(c, "rngSeed", 7, ctx), height());
  } else if (method == "conic") {
    const auto t = range("theta"), p = range("phi");
    net = recipes::agag_conic(integer("rows"), integer("cols"), t[0], t[1], p[0], p[1], height());
  } else if (method == "ansatz-trace") {
    const CrpcAnsatz a = crpc_ansatz(c, extra);
    if (extra) (*extra)["ansatz"] = ansatz_to_json(a);
    const Vec2 seed = vec2(field<json>(c, "seed", ctx), ctx + ".seed");
    const Vec2 dir = c.contains("firstDir") ? vec2(c.at("firstDir"), ctx + ".firstDir") : Vec2(1, 0);
    const TraceResult tr = recipes::crpc_ansatz_trace(a, field_or<double>(c, "heightScale", 1.0, ctx), seed,
                                                      integer("rows"), integer("cols"), real("step"), dir);
    if (extra) (*extra)["trace"] = {{"leftDomain", tr.left_domain}, {"anetResidual", tr.anet_residual}};
    net = field_or<bool>(c, "reverseJ", false, ctx) ? recipes::reverse_j(tr.net) : tr.net;
  } else if (method == "saddle-trace") {
    const Vec2 seed = vec2(field<json>(c, "seed", ctx), ctx + ".seed");
    const Vec2 dir = c.contains("firstDir") ? vec2(c.at("firstDir"), ctx + ".firstDir") : Vec2(1, 0);
    net = trace_asymptotic_quadmesh(recipes::saddle_graph(field_or<double>(c, "radius", 2.0, ctx)), seed,
                                    integer("rows"), integer("cols"), real("step"), dir)
              .net;
  } else if (method == "tnet") {
    const ConeCylinderData d = c.contains("data") ? cone_cylinder_from_json(c.at("data"), ctx + ".data")
                                                  : random_cone_cylinder(integer("m"), integer("n"),
                                                                         field_or<unsigned>(c, "rngSeed", 1, ctx));
    net = tnet_from_cone_cylinder(d);
  } else if (method == "miura") {
    net = miura_ori(integer("rows"), integer("cols"), real("s"), real("h"), real("d"), real("l"));
  } else if (method == "qnet") {
    net = recipes::random_qnet(integer("rows"), integer("cols"), field_or<unsigned>(c, "rngSeed", 1, ctx));
  } else if (method == "import-obj") {
    net = import_obj(existing_file(job, c, "path", ctx).string(), integer("rows"), integer("cols"));
  } else {
    throw bad(ctx + ".method", "unknown method '" + method + "'");
  }
  if (c.contains("projective")) net = z_projective_transform(net, projective_from_json(c.at("projective"), ctx + ".projective"));
  return net;
}

std::string module_of(const json& doc) {
  if (!doc.contains("construct") || !doc.at("construct").is_object()) return "net_io";
  const std::string m = doc.at("construct").value("method", "");
  if (m == "ansatz-trace" || m == "saddle-trace") return "crpc";
  if (m == "tnet" || m == "miura" || m == "qnet") return "flexnets";
  if (m == "import-obj") return "net_io";
  return "web_construct";
}

void write_json(const std::string& path, const json& j, std::vector<std::string>& files) {
  write_text_file(path, j.dump(1));
  files.push_back(path);
}

void write_net(const std::string& path, const Net& net, std::vector<std::string>& files) {
  write_net_json(net, path);
  files.push_back(path);
}

json diagnostics(const Net& net, const json& solver) {
  json j = report_to_json(diagnostics_report(net));
  j["kind"] = std::string(to_string(net.kind));
  j["maxFairness"] = max_fairness_residual(net);
  if (net.rows() >= 4 && net.cols() >= 4) {
    const ClassIReport c1 = class_i_check(net);
    const ClassIIReport c2 = class_ii_check(net);
    j["classI"] = {{"passes", c1.passes}, {"degenerate", c1.degenerate}};
    j["classII"] = {{"passes", c2.passes}, {"maxMismatch", c2.max_mismatch}};
  }
  if (net.kind != WebKind::Generic) {
    const SolverConfig cfg = config_from_json(solver, net.kind);
    j["initialHardEnergy"] = initial_hard_energy(net, net.kind, 0.0, cfg);
  }
  return j;
}

std::string short_report(const json& r) {
  std::ostringstream s;
  s << r.value("rows", 0) << "x" << r.value("cols", 0) << " " << r.value("kind", std::string("generic"));
  if (r.contains("anet")) s << ", A-net residual " << r["anet"].value("parameter", 0.0);
  s << ", planarity " << r.value("planarity", 0.0);
  if (r.contains("initialHardEnergy")) s << ", E_hard(0) " << r["initialHardEnergy"].get<double>();
  return s.str();
}

Net job_net(const JobConfig& job, json* extra, std::string& context) {
  if (job.doc.contains("input")) {
    context = "net_io";
    Net net = read_net_json(existing_file(job, job.doc, "input", "input").string());
    return net;
  }
  context = module_of(job.doc);
  Net net = construct(job, extra);
  if (job.kind != WebKind::Generic && net.kind != job.kind) {
    if (net.kind != WebKind::Generic)
      throw Error(ErrorCode::InconsistentRoles, "constructed " + std::string(to_string(net.kind)) + " net, config kind " +
                                                    std::string(to_string(job.kind)));
    net.kind = job.kind;
    net.roles = NetRoles::for_kind(job.kind);
  }
  return net;
}

void cmd_construct(const JobConfig& job, JobResult& res, std::string& context) {
  json extra = json::object();
  const Net net = job_net(job, &extra, context);
  context = "net_io";
  write_net(out_path(job, ".json"), net, res.files);
  json report = diagnostics(net, job.doc.value("solver", json::object()));
  for (auto& [k, v] : extra.items())
    if (k != "ansatz") report[k] = v;
  write_json(out_path(job, "_report.json"), report, res.files);
  if (extra.contains("ansatz")) write_json(out_path(job, "_ansatz.json"), extra["ansatz"], res.files);
  res.message = short_report(report);
}

void cmd_optimize(const JobConfig& job, JobResult& res, std::string& context) {
  const Net net = job_net(job, nullptr, context);
  context = "solver";
  const WebKind kind = job.kind != WebKind::Generic ? job.kind : net.kind;
  if (kind == WebKind::Generic) throw bad("kind", "optimize needs GGG, AAG, AGAG or CRPC");
  SolverConfig cfg = config_from_json(job.doc.value("solver", json::object()), kind);
  if (job.eps_schedule) cfg.eps_schedule = *job.eps_schedule;
  if (job.no_continuation) cfg.eps_schedule = {1.0};
  const ContinuationResult r = run_continuation(net, kind, cfg);
  context = "net_io";
  write_net(out_path(job, "_optimized.json"), r.net, res.files);
  json stats = stats_to_json(r, cfg);
  stats["name"] = job.name;
  stats["config"] = config_to_json(cfg, kind);
  stats["ablationNoContinuation"] = job.no_continuation;
  stats["maxFairnessInput"] = max_fairness_residual(net);
  stats["maxFairness"] = max_fairness_residual(r.net);
  write_json(out_path(job, "_stats.json"), stats, res.files);
  const std::string table = summary_table(job.name, kind, r, cfg);
  write_text_file(out_path(job, "_summary.txt"), table);
  res.files.push_back(out_path(job, "_summary.txt"));
  res.message = table;
  if (!r.converged) {
    res.exit_code = kNumericalError;
    res.message = std::string(to_string(ErrorCode::ContinuationFailed)) + ": final E_hard " +
                  std::to_string(r.final_e_hard) + " above target " + std::to_string(cfg.hard_target) +
                  "; best iterate written\n" + table;
  }
}

EdgeDir dir_from_string(const std::string& s, const std::string& ctx) {
  if (s == "+i") return EdgeDir::PlusI;
  if (s == "+j") return EdgeDir::PlusJ;
  throw bad(ctx, "expected \"+i\" or \"+j\"");
}

void cmd_flex(const JobConfig& job, JobResult& res, std::string& context) {
  const Net net = job_net(job, nullptr, context);
  context = "flexnets";
  const json& f = section(job.doc, "flex");
  const std::string mode = field_or<std::string>(f, "mode", "isotropic", "flex");
  if (mode != "isotropic" && mode != "euclidean") throw bad("flex.mode", "expected isotropic or euclidean");
  const int steps = field_or<int>(f, "steps", 20, "flex");
  if (steps < 1) throw bad("flex.steps", "must be at least 1");
  const json& d = section(f, "driver");
  FlexDriver driver;
  driver.i = field_or<int>(d, "i", 1, "flex.driver");
  driver.j = field_or<int>(d, "j", 1, "flex.driver");
  driver.dir = dir_from_string(field_or<std::string>(d, "dir", "+i", "flex.driver"), "flex.driver.dir");
  const bool iso = mode == "isotropic";
  const double start = iso ? isotropic_dihedral(net, driver) : euclidean_dihedral(net, driver);
  if (d.contains("target"))
    driver.target = field<double>(d, "target", "flex.driver");
  else
    driver.target = start + field<double>(d, "delta", "flex.driver");
  FlexOptions opt;
  opt.keep_partial = true;
  const FlexResult r = iso ? isotropic_flexion(FlexionState::isotropic(net), driver, steps, opt)
                           : euclidean_flexion(FlexionState::euclidean(net), driver, steps, opt);
  context = "net_io";
  const bool obj = field_or<bool>(f, "writeObj", true, "flex");
  std::vector<std::string> step_files;
  for (size_t k = 0; k < r.steps.size(); ++k) {
    char suffix[32];
    std::snprintf(suffix, sizeof suffix, "_step_%03zu", k);
    const std::string stem = out_path(job, suffix);
    write_net(stem + ".json", r.steps[k].net, res.files);
    step_files.push_back(fs::path(stem + ".json").filename().string());
    if (obj) {
      write_net_obj(r.steps[k].net, stem + ".obj");
      res.files.push_back(stem + ".obj");
      step_files.push_back(fs::path(stem + ".obj").filename().string());
    }
  }
  json manifest = flex_manifest(r, driver, step_files);
  manifest["mode"] = mode;
  write_json(out_path(job, "_flex.json"), manifest, res.files);
  std::ostringstream msg;
  if (r.failed_step > 0) {
    res.exit_code = kNumericalError;
    msg << to_string(ErrorCode::StepFailed) << ": " << r.failure << "; " << r.steps.size() - 1
        << " completed steps written";
  } else {
    msg << mode << " flexion, " << steps << " steps, angle " << r.start_angle << " -> " << r.steps.back().angle;
    if (r.class_warning) msg << " (input passed neither class check)";
  }
  res.message = msg.str();
}

void cmd_diagnose(const JobConfig& job, JobResult& res, std::string& context) {
  const Net net = job_net(job, nullptr, context);
  context = "net_core";
  const json report = diagnostics(net, job.doc.value("solver", json::object()));
  write_json(out_path(job, "_report.json"), report, res.files);
  res.message = short_report(report);
}

void cmd_extract(const JobConfig& job, JobResult& res, std::string& context) {
  const Net net = job_net(job, nullptr, context);
  context = "pipeline";
  const json e = job.doc.value("extract", json::object());
  ExtractOptions opt;
  opt.stride = field_or<int>(e, "stride", 1, "extract");
  for (const auto& s : field_or<std::vector<std::string>>(e, "families", {}, "extract")) {
    try {
      opt.families.push_back(family_from_string(s));
    } catch (const Error&) {
      throw bad("extract.families", "unknown family '" + s + "'");
    }
  }
  opt.trim = points2(e, "trim", "extract");
  const auto groups = extract_polylines(net, opt);
  const std::string path = out_path(job, "_extract.obj");
  write_text_file(path, polylines_to_obj(groups));
  res.files.push_back(path);
  int lines = 0;
  for (const auto& g : groups) lines += static_cast<int>(g.lines.size());
  res.message = std::to_string(lines) + " polylines in " + std::to_string(groups.size()) + " groups";
}

void cmd_export(const JobConfig& job, JobResult& res, std::string& context) {
  const Net net = job_net(job, nullptr, context);
  context = "net_io";
  const json e = job.doc.value("export", json::object());
  const std::string format = field_or<std::string>(e, "format", "obj", "export");
  if (format == "obj") {
    std::vector<ObjPolylineGroup> groups;
    if (field_or<bool>(e, "polylines", false, "export")) groups = extract_polylines(net, {});
    write_net_obj(net, out_path(job, ".obj"), groups);
    res.files.push_back(out_path(job, ".obj"));
  } else if (format == "json") {
    write_net(out_path(job, ".json"), net, res.files);
  } else {
    throw bad("export.format", "expected obj or json");
  }
  res.message = "exported " + std::to_string(net.rows()) + "x" + std::to_string(net.cols()) + " net as " + format;
}

}  // namespace

std::string_view to_string(Command c) {
  switch (c) {
    case Command::Construct: return "construct";
    case Command::Optimize: return "optimize";
    case Command::Flex: return "flex";
    case Command::Diagnose: return "diagnose";
    case Command::Extract: return "extract";
    case Command::Export: return "export";
  }
  return "construct";
}

Command command_from_string(std::string_view s) {
  for (Command c : {Command::Construct, Command::Optimize, Command::Flex, Command::Diagnose, Command::Extract,
                    Command::Export})
    if (to_string(c) == s) return c;
  throw bad("command", "unknown command '" + std::string(s) + "'");
}

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidInput:
    case ErrorCode::BadTopology:
    case ErrorCode::InconsistentRoles:
    case ErrorCode::EmptySelection:
    case ErrorCode::DegenerateParameters:
    case ErrorCode::SeedOffLine:
      return kInputError;
    default:
      return kNumericalError;
  }
}

JobConfig job_from_json(const json& doc, Command command, const fs::path& base_dir, const fs::path& output_dir) {
  if (!doc.is_object()) throw bad("config", "expected a JSON object");
  JobConfig job;
  job.doc = doc;
  job.command = command;
  if (doc.contains("command") && command_from_string(field<std::string>(doc, "command", "config")) != command)
    throw bad("command", "config is for '" + doc.at("command").get<std::string>() + "', not '" +
                             std::string(to_string(command)) + "'");
  job.name = field_or<std::string>(doc, "name", std::string(to_string(command)), "config");
  if (job.name.empty() || job.name.find('/') != std::string::npos) throw bad("name", "must be a plain file stem");
  try {
    job.kind = web_kind_from_string(field_or<std::string>(doc, "kind", "generic", "config"));
  } catch (const Error& e) {
    throw bad("kind", e.what());
  }
  job.base_dir = base_dir;
  job.output_dir = output_dir;
  return job;
}

JobConfig load_job(const fs::path& config, Command command, const fs::path& output_dir) {
  if (!fs::is_regular_file(config)) throw bad("--config", "file not found: " + config.string());
  json doc;
  try {
    doc = json::parse(read_text_file(config.string()));
  } catch (const json::exception& e) {
    throw bad("--config", std::string("parse error: ") + e.what());
  }
  return job_from_json(doc, command, config.parent_path().empty() ? fs::path(".") : config.parent_path(), output_dir);
}

std::vector<double> parse_schedule(const std::string& s) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (tok.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw bad("--seed-epsilon-schedule", "not a number: '" + tok + "'");
    }
  }
  if (out.empty()) throw bad("--seed-epsilon-schedule", "empty schedule");
  return out;
}

JobResult run_job(const JobConfig& job) {
  JobResult res;
  std::string context = "pipeline";
  try {
    fs::create_directories(job.output_dir);
    switch (job.command) {
      case Command::Construct: cmd_construct(job, res, context); break;
      case Command::Optimize: cmd_optimize(job, res, context); break;
      case Command::Flex: cmd_flex(job, res, context); break;
      case Command::Diagnose: cmd_diagnose(job, res, context); break;
      case Command::Extract: cmd_extract(job, res, context); break;
      case Command::Export: cmd_export(job, res, context); break;
    }
  } catch (const Error& e) {
    res.exit_code = exit_code_for(e.code());
    res.message = context + ": " + e.what();
  } catch (const fs::filesystem_error& e) {
    res.exit_code = kInputError;
    res.message = std::string("output: ") + e.what();
  } catch (const std::exception& e) {
    res.exit_code = kNumericalError;
    res.message = context + ": " + e.what();
  }
  return res;
}

std::vector<JobResult> run_batch(const std::vector<JobConfig>& jobs, int threads) {
  std::vector<JobResult> out(jobs.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t k; (k = next++) < jobs.size();) out[k] = run_job(jobs[k]);
  };
  const int n = std::clamp<int>(threads, 1, std::max<int>(1, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

int threads_from_env() {
  const char* v = std::getenv("ISOWEB_THREADS");
  if (!v) return 1;
  const int n = std::atoi(v);
  return n >= 1 ? n : 1;
}

std::function<double(double, double)> height_from_json(const json& j, const std::string& field_name) {
  const std::string key = field_name.substr(field_name.rfind('.') + 1);
  if (!j.contains(key)) throw bad(field_name, "missing");
  const json& h = j.at(key);
  if (!h.is_object() || !h.contains("quadratic")) throw bad(field_name, "expected {\"quadratic\": [6 coefficients]}");
  std::vector<double> c;
  try {
    c = h.at("quadratic").get<std::vector<double>>();
  } catch (const json::exception&) {
    throw bad(field_name + ".quadratic", "expected 6 numbers");
  }
  if (c.size() != 6) throw bad(field_name + ".quadratic", "expected 6 numbers");
  return [c](double x, double y) { return c[0] * x * x + c[1] * x * y + c[2] * y * y + c[3] * x + c[4] * y + c[5]; };
}

std::vector<int> stride_indices(int count, int stride) {
  if (stride < 1) throw bad("extract.stride", "must be at least 1");
  std::vector<int> out;
  for (int k = 0; k < count; k += stride) out.push_back(k);
  if (count > 0 && out.back() != count - 1) out.push_back(count - 1);
  return out;
}

bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly) {
  const size_t n = poly.size();
  bool inside = false;
  for (size_t a = 0, b = n - 1; a < n; b = a++) {
    const Vec2 &u = poly[a], &v = poly[b];
    const double cross = (v - u).x() * (p - u).y() - (v - u).y() * (p - u).x();
    const bool between = std::min(u.x(), v.x()) <= p.x() && p.x() <= std::max(u.x(), v.x()) &&
                         std::min(u.y(), v.y()) <= p.y() && p.y() <= std::max(u.y(), v.y());
    if (between && std::abs(cross) <= 1e-12 * (1 + (v - u).squaredNorm())) return true;
    if ((u.y() > p.y()) != (v.y() > p.y()) && p.x() < u.x() + (v.x() - u.x()) * (p.y() - u.y()) / (v.y() - u.y()))
      inside = !inside;
  }
  return inside;
}

bool polygon_is_simple(const std::vector<Vec2>& poly) {
  const int n = static_cast<int>(poly.size());
  if (n < 3) return false;
  auto orient = [](const Vec2& a, const Vec2& b, const Vec2& c) {
    const double d = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
    return (d > 0) - (d < 0);
  };
  auto on_segment = [](const Vec2& a, const Vec2& b, const Vec2& p) {
    return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) && std::min(a.y(), b.y()) <= p.y() &&
           p.y() <= std::max(a.y(), b.y());
  };
  auto intersect = [&](const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    return (o1 == 0 && on_segment(a, b, c)) || (o2 == 0 && on_segment(a, b, d)) || (o3 == 0 && on_segment(c, d, a)) ||
           (o4 == 0 && on_segment(c, d, b));
  };
  for (int a = 0; a < n; ++a) {
    if ((poly[a] - poly[(a + 1) % n]).norm() == 0) return false;
    for (int b = a + 1; b < n; ++b) {
      if (b == a + 1 || (a == 0 && b == n - 1)) continue;  // adjacent edges share a vertex
      if (intersect(poly[a], poly[(a + 1) % n], poly[b], poly[(b + 1) % n])) return false;
    }
  }
  return true;
}

std::string family_name(Family f) {
  switch (f) {
    case Family::ILines: return "iLines";
    case Family::JLines: return "jLines";
    case Family::DiagMinus: return "diagMinus";
    case Family::DiagPlus: return "diagPlus";
  }
  return "iLines";
}

Family family_from_string(const std::string& s) {
  for (Family f : {Family::ILines, Family::JLines, Family::DiagMinus, Family::DiagPlus})
    if (family_name(f) == s) return f;
  throw bad("family", "unknown family '" + s + "'");
}

std::vector<ObjPolylineGroup> extract_polylines(const Net& net, const ExtractOptions& opt) {
  if (opt.stride < 1) throw bad("extract.stride", "must be at least 1");
  if (!opt.trim.empty() && !polygon_is_simple(opt.trim)) throw bad("extract.trim", "polygon is not simple");
  std::vector<Family> families = opt.families;
  if (families.empty()) {
    for (Family f : {Family::ILines, Family::JLines, Family::DiagMinus, Family::DiagPlus})
      if (net.roles.of(f) != LineRole::None) families.push_back(f);
    if (families.empty()) families = {Family::ILines, Family::JLines};
  }
  std::vector<ObjPolylineGroup> out;
  for (Family f : families) {
    const auto polys = family_polylines(net, f);
    ObjPolylineGroup g{family_name(f), {}};
    for (int k : stride_indices(static_cast<int>(polys.size()), opt.stride)) {
      std::vector<Vec3> run;
      auto flush = [&] {
        if (run.size() >= 2) g.lines.push_back(run);
        run.clear();
      };
      for (const VertexRef& v : polys[k].verts) {
        if (opt.trim.empty() || point_in_polygon(net.xy(v.i, v.j), opt.trim))
          run.push_back(net(v.i, v.j));
        else
          flush();
      }
      flush();
    }
    if (!g.lines.empty()) out.push_back(std::move(g));
  }
  if (out.empty()) throw Error(ErrorCode::EmptySelection, "no polyline survives the stride and trim");
  return out;
}

std::string summary_table(const std::string& name, WebKind kind, const ContinuationResult& r,
                          const SolverConfig& cfg) {
  const int iters = static_cast<int>(r.iterations.size());
  char buf[512];
  std::string out;
  std::snprintf(buf, sizeof buf, "%-16s %-6s %6s %8s %9s %9s %9s %6s %10s %9s %10s\n", "name", "kind", "|V|", "N_v",
                "w_fair", "w_surf", "w_vert", "iters", "s/iter", "total s", "E_hard");
  out += buf;
  std::snprintf(buf, sizeof buf, "%-16s %-6s %6d %8d %9.1e %9.1e %9.1e %6d %10.2e %9.3f %10.2e\n", name.c_str(),
                std::string(to_string(kind)).c_str(), r.state.vertex_count(), r.state.num_vars(),
                cfg.weights.fairness, cfg.weights.surf_close, cfg.weights.vert_close, iters,
                iters > 0 ? r.seconds / iters : 0.0, r.seconds, r.final_e_hard);
  out += buf;
  for (const EpsSummary& e : r.per_eps) {
    std::snprintf(buf, sizeof buf, "  eps %.3f: %2d iterations, E_hard %.2e%s%s\n", e.eps, e.iterations, e.e_hard,
                  e.reached ? "" : ", target missed", e.stalled ? ", stalled" : "");
    out += buf;
  }
  return out;
}

Net input_net(const JobConfig& job, json* extra) {
  std::string context;
  return job_net(job, extra, context);
}

}  // namespace isoweb::pipeline
