#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include "doctest.h"
#include "isoweb/crpc.hpp"
#include "isoweb/flexnets.hpp"
#include "isoweb/pipeline.hpp"
#include "isoweb/recipes.hpp"
#include "test_util.hpp"

using namespace isoweb;
using namespace isoweb::pipeline;
using nlohmann::json;
using testutil::Rng;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("isoweb_pipeline_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

JobResult run(const json& doc, Command c, const fs::path& dir) { return run_job(job_from_json(doc, c, dir, dir)); }

json read_json(const fs::path& p) { return json::parse(read_text_file(p.string())); }

Net plain_grid(int rows, int cols) {
  return testutil::grid_net(rows, cols, [](int i, int j) { return Vec3(i, j, 0.1 * i * j); });
}

const fs::path kSource = ISOWEB_SOURCE_DIR;

}  // namespace

TEST_CASE("stride keeps endpoints") {
  const auto s = stride_indices(19, 3);
  CHECK(s == std::vector<int>{0, 3, 6, 9, 12, 15, 18});
  CHECK(stride_indices(20, 3) == std::vector<int>{0, 3, 6, 9, 12, 15, 18, 19});
  CHECK(stride_indices(4, 1) == std::vector<int>{0, 1, 2, 3});
  CHECK(stride_indices(1, 5) == std::vector<int>{0});
  CHECK(stride_indices(0, 2).empty());
  CHECK_THROWS_AS(stride_indices(5, 0), Error);
  // every index is a multiple of the stride or the last one, and the gaps never exceed it
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    const int n = 1 + static_cast<int>(rng.uniform(0, 60)), s = 1 + static_cast<int>(rng.uniform(0, 8));
    const auto idx = stride_indices(n, s);
    CHECK(idx.front() == 0);
    CHECK(idx.back() == n - 1);
    for (size_t k = 1; k < idx.size(); ++k) {
      CHECK(idx[k] > idx[k - 1]);
      CHECK(idx[k] - idx[k - 1] <= s);
      CHECK((idx[k] % s == 0 || idx[k] == n - 1));
    }
  }
}

TEST_CASE("point in polygon against convex half-plane oracle") {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    const int n = 3 + static_cast<int>(rng.uniform(0, 8));
    const Vec2 c(rng.uniform(-1, 1), rng.uniform(-1, 1));
    const double r = rng.uniform(0.5, 2), phase = rng.uniform(0, 6.28);
    std::vector<Vec2> poly;
    for (int k = 0; k < n; ++k) {
      const double a = phase + 2 * std::numbers::pi * k / n;
      poly.push_back(c + r * Vec2(std::cos(a), std::sin(a)));
    }
    CHECK(polygon_is_simple(poly));
    for (int q = 0; q < 20; ++q) {
      const Vec2 p(rng.uniform(-3, 3), rng.uniform(-3, 3));
      bool inside = true;  // counterclockwise: left of every edge
      for (int k = 0; k < n; ++k) {
        const Vec2 e = poly[(k + 1) % n] - poly[k], d = p - poly[k];
        if (e.x() * d.y() - e.y() * d.x() < 0) inside = false;
      }
      CHECK(point_in_polygon(p, poly) == inside);
    }
  }
  const std::vector<Vec2> bowtie{{0, 0}, {1, 1}, {1, 0}, {0, 1}};
  CHECK_FALSE(polygon_is_simple(bowtie));
  CHECK_FALSE(polygon_is_simple({{0, 0}, {1, 0}}));
  const std::vector<Vec2> l_shape{{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}};
  CHECK(polygon_is_simple(l_shape));
  CHECK(point_in_polygon({0.5, 1.5}, l_shape));
  CHECK_FALSE(point_in_polygon({1.5, 1.5}, l_shape));
  CHECK(point_in_polygon({2, 0.5}, l_shape));  // boundary counts as inside
}

TEST_CASE("extract: identity, stride and trim") {
  const Net net = plain_grid(19, 19);
  // stride 1 without trim reproduces every polyline of the i and j families
  const auto all = extract_polylines(net, {});
  REQUIRE(all.size() == 2);
  CHECK(all[0].name == "iLines");
  CHECK(all[1].name == "jLines");
  for (int g = 0; g < 2; ++g) {
    const auto polys = family_polylines(net, g == 0 ? Family::ILines : Family::JLines);
    REQUIRE(all[g].lines.size() == polys.size());
    for (size_t k = 0; k < polys.size(); ++k) {
      REQUIRE(all[g].lines[k].size() == polys[k].verts.size());
      for (size_t v = 0; v < polys[k].verts.size(); ++v)
        CHECK(all[g].lines[k][v] == net(polys[k].verts[v].i, polys[k].verts[v].j));
    }
  }
  // stride 3 on 19 lines
  ExtractOptions o;
  o.stride = 3;
  o.families = {Family::ILines};
  const auto s = extract_polylines(net, o);
  REQUIRE(s.size() == 1);
  REQUIRE(s[0].lines.size() == 7);
  for (int k = 0; k < 7; ++k) CHECK(s[0].lines[k].front().x() == 3 * k);
  // roles select the families of a web
  const Net ggg = recipes::ggg_pencil(6, 0.2, [](double x, double y) { return x * y; });
  const auto w = extract_polylines(ggg, {});
  CHECK(w.size() == 3);
  // trim: kept vertices are inside, and lines crossing the boundary are split
  ExtractOptions t;
  t.trim = {{-1, -1}, {9.5, -1}, {9.5, 20}, {-1, 20}};
  for (const auto& g : extract_polylines(net, t))
    for (const auto& l : g.lines) {
      CHECK(l.size() >= 2);
      for (const auto& p : l) CHECK(p.x() <= 9.5);
    }
  ExtractOptions ring;
  ring.families = {Family::ILines};
  ring.trim = {{-1, -1}, {20, -1}, {20, 20}, {-1, 20}, {-1, 12.5}, {12.5, 12.5}, {12.5, 5.5}, {-1, 5.5}};
  // i-lines run along j; the notch cuts lines 0..12 into two runs each
  const auto cut = extract_polylines(net, ring);
  CHECK(cut[0].lines.size() == 13 * 2 + 6);
  CHECK(cut[0].lines[0].back().y() == 5);
  CHECK(cut[0].lines[1].front().y() == 13);
  // disjoint polygon and bad polygons
  ExtractOptions far;
  far.trim = {{100, 100}, {101, 100}, {101, 101}};
  try {
    extract_polylines(net, far);
    FAIL("expected EmptySelection");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptySelection);
  }
  ExtractOptions bow;
  bow.trim = {{0, 0}, {10, 10}, {10, 0}, {0, 10}};
  CHECK_THROWS_AS(extract_polylines(net, bow), Error);
}

TEST_CASE("config errors name the field and exit with 2") {
  const fs::path dir = scratch("config");
  json doc = {{"kind", "AAG"}, {"construct", {{"method", "propagation"}, {"seedFile", "nowhere.json"}}}};
  JobResult r = run(doc, Command::Construct, dir);
  CHECK(r.exit_code == 2);
  CHECK(r.message.find("construct.seedFile") != std::string::npos);
  CHECK(r.files.empty());

  r = run(json{{"construct", {{"n", 4}}}}, Command::Construct, dir);
  CHECK(r.exit_code == 2);
  CHECK(r.message.find("construct.method") != std::string::npos);

  r = run(json{{"construct", {{"method", "pencil"}, {"n", 4}, {"h", 0.5}}}}, Command::Construct, dir);
  CHECK(r.exit_code == 2);
  CHECK(r.message.find("construct.height") != std::string::npos);

  r = run(json{{"construct",
                {{"method", "pencil"}, {"n", "four"}, {"h", 0.5}, {"height", {{"quadratic", {0, 0, 0, 0, 0, 0}}}}}}},
          Command::Construct, dir);
  CHECK(r.exit_code == 2);
  CHECK(r.message.find("construct.n") != std::string::npos);

  CHECK_THROWS_AS(job_from_json(json{{"kind", "quadric"}}, Command::Construct, dir, dir), Error);
  CHECK_THROWS_AS(job_from_json(json{{"command", "flex"}}, Command::Construct, dir, dir), Error);
  CHECK_THROWS_AS(job_from_json(json::array(), Command::Construct, dir, dir), Error);
  CHECK_THROWS_AS(load_job(dir / "missing.json", Command::Construct, dir), Error);
  write_text_file((dir / "broken.json").string(), "{ \"name\": ");
  CHECK_THROWS_AS(load_job(dir / "broken.json", Command::Construct, dir), Error);

  // seed file present: the same job succeeds and reproduces the z = xy A-net
  json seed;
  const int n = 4;
  const double h = 0.25;
  for (int l = 0; l <= 2 * n; ++l) seed["lines"].push_back({1.0, -1.0, -(n - l) * h});
  for (int k = 0; k <= n; ++k) seed["diagonal"].push_back({k * h, k * h, k * h * k * h});
  for (int k = 0; k <= n + 1; ++k) seed["subdiagonal"].push_back({k * h, (k - 1) * h, k * h * (k - 1) * h});
  write_text_file((dir / "seed.json").string(), seed.dump());
  doc["construct"]["seedFile"] = "seed.json";
  doc["name"] = "aag";
  r = run(doc, Command::Construct, dir);
  REQUIRE(r.exit_code == 0);
  const Net net = read_net_json((dir / "aag.json").string());
  CHECK(net.kind == WebKind::AAG);
  for (int v = 0; v < net.size(); ++v) {
    const Vec3 p = net.points().col(v);
    CHECK(std::abs(p.z() - p.x() * p.y()) <= 1e-10);
  }
}

TEST_CASE("schedule parsing and exit code mapping") {
  CHECK(parse_schedule("0,0.5,1") == std::vector<double>{0, 0.5, 1});
  CHECK(parse_schedule("1") == std::vector<double>{1});
  CHECK_THROWS_AS(parse_schedule("0,a"), Error);
  CHECK_THROWS_AS(parse_schedule(""), Error);
  CHECK_THROWS_AS(parse_schedule("0.5x"), Error);
  CHECK(exit_code_for(ErrorCode::InvalidInput) == 2);
  CHECK(exit_code_for(ErrorCode::BadTopology) == 2);
  CHECK(exit_code_for(ErrorCode::EmptySelection) == 2);
  CHECK(exit_code_for(ErrorCode::StepFailed) == 3);
  CHECK(exit_code_for(ErrorCode::ContinuationFailed) == 3);
  CHECK(exit_code_for(ErrorCode::ZeroDenominator) == 3);
  CHECK(command_from_string("flex") == Command::Flex);
  CHECK_THROWS_AS(command_from_string("view"), Error);
}

TEST_CASE("construct GGG pencil web writes an exact net and report") {
  const fs::path dir = scratch("ggg");
  const json doc = {{"name", "ggg"},
                    {"kind", "GGG"},
                    {"construct",
                     {{"method", "pencil"}, {"n", 8}, {"h", 0.125}, {"height", {{"quadratic", {0.5, 0, 0.5, 0, 0, 0}}}}}}};
  const JobResult r = run(doc, Command::Construct, dir);
  REQUIRE(r.exit_code == 0);
  CHECK(r.files.size() == 2);
  const Net net = read_net_json((dir / "ggg.json").string());
  CHECK(net.kind == WebKind::GGG);
  CHECK(net.rows() == 9);
  // vertices on the pencil x = i h, y = j h (up to the j reversal) and on the paraboloid
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) {
      const Vec3 p = net(i, j);
      CHECK(std::abs(p.z() - 0.5 * (p.x() * p.x() + p.y() * p.y())) <= 1e-12);
      CHECK(std::abs(p.x() / 0.125 - std::round(p.x() / 0.125)) <= 1e-12);
      CHECK(std::abs(p.y() / 0.125 - std::round(p.y() / 0.125)) <= 1e-12);
    }
  const json rep = read_json(dir / "ggg_report.json");
  for (const auto& [k, v] : rep["geodesicEps0"].items())
    if (!v.is_null()) CHECK(v.get<double>() <= 1e-10);
  CHECK(rep["initialHardEnergy"].get<double>() <= 1e-10);
  // determinism: same config, same bytes
  const std::string first = read_text_file((dir / "ggg.json").string());
  REQUIRE(run(doc, Command::Construct, dir).exit_code == 0);
  CHECK(read_text_file((dir / "ggg.json").string()) == first);
}

TEST_CASE("construct CRPC writes the ansatz and the traced net") {
  const fs::path dir = scratch("crpc");
  json doc = read_json(kSource / "configs" / "crpc_60.json");
  const JobResult r = run(doc, Command::Construct, dir);
  REQUIRE(r.exit_code == 0);
  const CrpcAnsatz a = ansatz_from_json(read_json(dir / "crpc_60_ansatz.json"));
  CHECK(a.gamma == doctest::Approx(std::numbers::pi / 3).epsilon(1e-12));
  CHECK(a.eps == doctest::Approx(0.5).epsilon(1e-12));
  const Net net = read_net_json((dir / "crpc_60.json").string());
  CHECK(net.rows() == 25);
  CHECK(net.kind == WebKind::CRPC);
  const json rep = read_json(dir / "crpc_60_report.json");
  CHECK(rep["trace"]["anetResidual"].get<double>() <= 1e-5);
  // vertices lie on the scaled ansatz graph
  for (int v = 0; v < net.size(); v += 7) {
    const Vec3 p = net.points().col(v);
    CHECK(std::abs(p.z() - 0.3 * eval_ansatz(a, {p.x(), p.y()})) <= 1e-9);
  }
}

TEST_CASE("optimize writes net, stats and summary") {
  const fs::path dir = scratch("optimize");
  json doc = {{"name", "small"},
              {"kind", "GGG"},
              {"construct",
               {{"method", "pencil"}, {"n", 10}, {"h", 0.1}, {"height", {{"quadratic", {0.5, 0, 0.5, 0, 0, 0}}}}}}};
  JobResult r = run(doc, Command::Optimize, dir);
  REQUIRE(r.exit_code == 0);
  CHECK(r.files.size() == 3);
  const json stats = read_json(dir / "small_stats.json");
  CHECK(stats["finalEHard"].get<double>() <= 1e-5);
  CHECK(stats["V"] == 121);
  CHECK(stats["perEps"].size() == 5);
  const std::string table = read_text_file((dir / "small_summary.txt").string());
  for (const char* col : {"|V|", "N_v", "w_fair", "iters", "s/iter", "total s", "E_hard"})
    CHECK(table.find(col) != std::string::npos);
  const Net out = read_net_json((dir / "small_optimized.json").string());
  CHECK(out.rows() == 11);

  // ablation runs the schedule {1} and records the fairness residual
  JobConfig ab = job_from_json(doc, Command::Optimize, dir, dir);
  ab.no_continuation = true;
  ab.name = "ablation";
  REQUIRE(run_job(ab).exit_code == 0);
  const json as = read_json(dir / "ablation_stats.json");
  CHECK(as["perEps"].size() == 1);
  CHECK(as["ablationNoContinuation"] == true);
  CHECK(as.contains("maxFairness"));

  // schedule override
  JobConfig sc = job_from_json(doc, Command::Optimize, dir, dir);
  sc.eps_schedule = std::vector<double>{0, 0.5, 1};
  sc.name = "three";
  REQUIRE(run_job(sc).exit_code == 0);
  CHECK(read_json(dir / "three_stats.json")["perEps"].size() == 3);

  // an optimized net fed back needs at most one iteration per eps
  json again = {{"name", "again"}, {"kind", "GGG"}, {"input", "small_optimized.json"}};
  REQUIRE(run(again, Command::Optimize, dir).exit_code == 0);
  for (const auto& p : read_json(dir / "again_stats.json")["perEps"]) CHECK(p["iterations"].get<int>() <= 1);

  // unreachable target: exit 3 with the best iterate written
  doc["name"] = "hopeless";
  doc["solver"] = {{"hardTarget", 1e-40}, {"maxIterPerEps", 1}};
  r = run(doc, Command::Optimize, dir);
  CHECK(r.exit_code == 3);
  CHECK(r.message.find("ContinuationFailed") != std::string::npos);
  CHECK(fs::exists(dir / "hopeless_optimized.json"));
  CHECK(read_json(dir / "hopeless_stats.json")["converged"] == false);

  // a generic net cannot be optimized
  json generic = {{"construct", {{"method", "qnet"}, {"rows", 4}, {"cols", 4}}}};
  CHECK(run(generic, Command::Optimize, dir).exit_code == 2);
}

TEST_CASE("flex writes per-step files and a manifest") {
  const fs::path dir = scratch("flex");
  json doc = read_json(kSource / "configs" / "flex_tnet_isotropic.json");
  doc["flex"]["steps"] = 5;
  const JobResult r = run(doc, Command::Flex, dir);
  REQUIRE(r.exit_code == 0);
  CHECK(r.files.size() == 6 * 2 + 1);
  const json m = read_json(dir / "flex_tnet_isotropic_flex.json");
  CHECK(m["steps"] == 5);
  CHECK(m["files"].size() == 12);
  CHECK(m["classWarning"] == false);
  CHECK(m["angles"].back().get<double>() == doctest::Approx(m["startAngle"].get<double>() + 0.2).epsilon(1e-9));
  // frozen quantities checked on the files themselves
  const Net start = read_net_json((dir / "flex_tnet_isotropic_step_000.json").string());
  const FlexionState st = FlexionState::isotropic(start);
  for (int k = 1; k <= 5; ++k) {
    char name[64];
    std::snprintf(name, sizeof name, "flex_tnet_isotropic_step_%03d.json", k);
    const FlexDrift d = flex_drift(st, read_net_json((dir / name).string()));
    CHECK(d.omega <= 1e-8);
    CHECK(d.length <= 1e-8);
  }
  const Net obj = import_obj((dir / "flex_tnet_isotropic_step_005.obj").string(), start.rows(), start.cols());
  CHECK(obj.points().isApprox(read_net_json((dir / "flex_tnet_isotropic_step_005.json").string()).points(), 1e-15));

  // a generic Q-net is rigid: StepFailed, exit 3, completed steps kept
  const json rigid = {{"name", "rigid"},
                      {"construct", {{"method", "qnet"}, {"rows", 5}, {"cols", 5}, {"rngSeed", 3}}},
                      {"flex", {{"mode", "euclidean"}, {"steps", 10}, {"driver", {{"i", 2}, {"j", 2}, {"delta", 0.5}}}}}};
  const JobResult f = run(rigid, Command::Flex, dir);
  CHECK(f.exit_code == 3);
  CHECK(f.message.find("StepFailed") != std::string::npos);
  const json fm = read_json(dir / "rigid_flex.json");
  REQUIRE(fm.contains("failedStep"));
  CHECK(fm["failedStep"].get<int>() >= 1);
  CHECK(fm["steps"].get<int>() == fm["failedStep"].get<int>() - 1);

  json bad_mode = doc;
  bad_mode["flex"]["mode"] = "hyperbolic";
  CHECK(run(bad_mode, Command::Flex, dir).exit_code == 2);
  json bad_dir = doc;
  bad_dir["flex"]["driver"]["dir"] = "-i";
  CHECK(run(bad_dir, Command::Flex, dir).exit_code == 2);
  json no_flex = doc;
  no_flex.erase("flex");
  CHECK(run(no_flex, Command::Flex, dir).exit_code == 2);
}

TEST_CASE("export and import round trip") {
  const fs::path dir = scratch("export");
  Rng rng(2);
  Net net = testutil::random_translational(rng, 6, 7);
  net.kind = WebKind::Generic;
  write_net_json(net, (dir / "in.json").string());
  json doc = {{"name", "out"}, {"input", "in.json"}, {"export", {{"format", "obj"}}}};
  REQUIRE(run(doc, Command::Export, dir).exit_code == 0);
  json back = {{"name", "back"},
               {"construct", {{"method", "import-obj"}, {"path", "out.obj"}, {"rows", 6}, {"cols", 7}}},
               {"export", {{"format", "json"}}}};
  REQUIRE(run(back, Command::Export, dir).exit_code == 0);
  const Net round = read_net_json((dir / "back.json").string());
  CHECK((round.points() - net.points()).cwiseAbs().maxCoeff() <= 1e-15 * net.points().cwiseAbs().maxCoeff());

  // polyline groups follow the grid and do not disturb the import
  doc["export"]["polylines"] = true;
  doc["name"] = "lines";
  REQUIRE(run(doc, Command::Export, dir).exit_code == 0);
  const std::string text = read_text_file((dir / "lines.obj").string());
  CHECK(text.find("g iLines") != std::string::npos);
  CHECK(text.find("\nl ") != std::string::npos);
  CHECK(import_obj((dir / "lines.obj").string(), 6, 7).points().isApprox(net.points(), 1e-15));

  // wrong grid size: BadTopology, exit 2
  back["construct"]["rows"] = 7;
  back["construct"]["cols"] = 6;
  const JobResult r = run(back, Command::Export, dir);
  CHECK(r.exit_code == 2);
  CHECK(r.message.find("BadTopology") != std::string::npos);
  doc["export"]["format"] = "ply";
  CHECK(run(doc, Command::Export, dir).exit_code == 2);
}

TEST_CASE("extract and diagnose jobs") {
  const fs::path dir = scratch("extract");
  const json doc = {{"name", "shell"},
                    {"kind", "GGG"},
                    {"construct",
                     {{"method", "pencil"}, {"n", 18}, {"h", 0.1}, {"height", {{"quadratic", {0.5, 0, 0.5, 0, 0, 0}}}}}},
                    {"extract", {{"stride", 3}, {"families", {"iLines", "jLines"}}}}};
  JobResult r = run(doc, Command::Extract, dir);
  REQUIRE(r.exit_code == 0);
  const std::string obj = read_text_file((dir / "shell_extract.obj").string());
  int groups = 0, lines = 0;
  std::istringstream in(obj);
  for (std::string l; std::getline(in, l);) {
    groups += l.rfind("g ", 0) == 0;
    lines += l.rfind("l ", 0) == 0;
  }
  CHECK(groups == 2);
  CHECK(lines == 14);
  json far = doc;
  far["extract"]["trim"] = {{50, 50}, {51, 50}, {51, 51}};
  r = run(far, Command::Extract, dir);
  CHECK(r.exit_code == 2);
  CHECK(r.message.find("EmptySelection") != std::string::npos);
  json fam = doc;
  fam["extract"]["families"] = {"kLines"};
  CHECK(run(fam, Command::Extract, dir).exit_code == 2);

  r = run(doc, Command::Diagnose, dir);
  REQUIRE(r.exit_code == 0);
  const json rep = read_json(dir / "shell_report.json");
  CHECK(rep["rows"] == 19);
  CHECK(rep.contains("classI"));
  CHECK(rep["initialHardEnergy"].get<double>() <= 1e-10);
}

TEST_CASE("batch runs match sequential runs") {
  const fs::path dir = scratch("batch");
  std::vector<JobConfig> jobs;
  for (int k = 0; k < 4; ++k) {
    const json doc = {{"name", "b" + std::to_string(k)},
                      {"kind", "GGG"},
                      {"construct",
                       {{"method", "pencil"},
                        {"n", 4 + k},
                        {"h", 0.2},
                        {"height", {{"quadratic", {0.5, 0, 0.5, 0, 0, 0}}}}}}};
    jobs.push_back(job_from_json(doc, Command::Construct, dir, dir));
  }
  jobs.push_back(job_from_json(json{{"name", "bad"}}, Command::Construct, dir, dir));
  const auto par = run_batch(jobs, 3);
  REQUIRE(par.size() == 5);
  for (size_t k = 0; k < jobs.size(); ++k) {
    const JobResult seq = run_job(jobs[k]);
    CHECK(par[k].exit_code == seq.exit_code);
    CHECK(par[k].files == seq.files);
  }
  CHECK(par[4].exit_code == 2);
}

TEST_CASE("every recipe config runs") {
  const fs::path dir = scratch("recipes");
  int count = 0;
  for (const auto& e : fs::directory_iterator(kSource / "configs")) {
    if (e.path().extension() != ".json") continue;
    ++count;
    const std::string stem = e.path().stem().string();
    const Command c = stem.rfind("flex", 0) == 0 ? Command::Flex : Command::Optimize;
    const JobResult r = run_job(load_job(e.path(), c, dir));
    INFO(stem << ": " << r.message);
    CHECK(r.exit_code == 0);
    if (c == Command::Optimize) CHECK(read_json(dir / (stem + "_stats.json"))["finalEHard"].get<double>() <= 1e-5);
  }
  CHECK(count == 10);
}

TEST_CASE("command line binary") {
  const fs::path dir = scratch("cli");
  auto status = [](const std::string& cmd) {
    const int s = std::system((cmd + " > /dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  const std::string bin = ISOWEB_CLI_PATH;
  const std::string cfg = (kSource / "configs" / "flex_miura_euclidean.json").string();
  CHECK(status(bin + " flex --config " + cfg + " --output " + dir.string()) == 0);
  CHECK(fs::exists(dir / "flex_miura_euclidean_flex.json"));
  CHECK(status(bin + " diagnose -c " + cfg + " -o " + dir.string()) == 0);
  CHECK(status(bin + " construct -c " + (dir / "nothing.json").string()) == 2);
  CHECK(status(bin + " frobnicate") == 2);
  write_text_file((dir / "seedless.json").string(),
                  R"({"kind": "AAG", "construct": {"method": "propagation", "seedFile": "missing.json"}})");
  CHECK(status(bin + " construct -c " + (dir / "seedless.json").string() + " -o " + dir.string()) == 2);
  write_text_file((dir / "rigid.json").string(),
                  R"({"name": "rigid", "construct": {"method": "qnet", "rows": 5, "cols": 5, "rngSeed": 3},
                      "flex": {"mode": "euclidean", "steps": 10, "driver": {"i": 2, "j": 2, "delta": 0.5}}})");
  CHECK(status(bin + " flex -c " + (dir / "rigid.json").string() + " -o " + dir.string()) == 3);
  const std::string ggg = (kSource / "configs" / "ggg_pencil.json").string();
  CHECK(status(bin + " optimize -c " + ggg + " -o " + dir.string() + " --seed-epsilon-schedule 0,x") == 2);
}
