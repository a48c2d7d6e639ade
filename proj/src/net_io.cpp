#include "isoweb/net_io.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace isoweb {

using nlohmann::json;

json net_to_json(const Net& net) {
  json verts = json::array();
  for (int k = 0; k < net.size(); ++k) {
    const auto p = net.points().col(k);
    verts.push_back({p.x(), p.y(), p.z()});
  }
  return json{{"rows", net.rows()},
              {"cols", net.cols()},
              {"kind", to_string(net.kind)},
              {"vertices", verts},
              {"roles",
               {{"iLines", to_string(net.roles.i_lines)},
                {"jLines", to_string(net.roles.j_lines)},
                {"diagMinus", to_string(net.roles.diag_minus)},
                {"diagPlus", to_string(net.roles.diag_plus)}}},
              {"boundaryPolicy", net.boundary_policy}};
}

Net net_from_json(const json& j) {
  try {
    const int rows = j.at("rows").get<int>(), cols = j.at("cols").get<int>();
    Net net(rows, cols);
    const auto& verts = j.at("vertices");
    if (static_cast<int>(verts.size()) != rows * cols)
      throw Error(ErrorCode::BadTopology, "vertex count " + std::to_string(verts.size()) + " != rows*cols");
    for (int k = 0; k < rows * cols; ++k)
      for (int c = 0; c < 3; ++c) net.points()(c, k) = verts[k].at(c).get<double>();
    if (j.contains("roles")) {
      const auto& r = j["roles"];
      net.roles.i_lines = line_role_from_string(r.value("iLines", "none"));
      net.roles.j_lines = line_role_from_string(r.value("jLines", "none"));
      net.roles.diag_minus = line_role_from_string(r.value("diagMinus", "none"));
      net.roles.diag_plus = line_role_from_string(r.value("diagPlus", "none"));
    }
    net.kind = web_kind_from_string(j.value("kind", "generic"));
    net.boundary_policy = j.value("boundaryPolicy", net.boundary_policy);
    return net;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("net JSON: ") + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write '" + path + "'");
  out << text;
}

void write_net_json(const Net& net, const std::string& path) { write_text_file(path, net_to_json(net).dump(1)); }

Net read_net_json(const std::string& path) {
  try {
    return net_from_json(json::parse(read_text_file(path)));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidInput, path + ": " + e.what());
  }
}

json report_to_json(const Report& r) {
  auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json g0, g1;
  for (const auto& [k, v] : r.geodesic_eps0) g0[k] = finite_or_null(v);
  for (const auto& [k, v] : r.geodesic_eps1) g1[k] = finite_or_null(v);
  return json{{"numVertices", r.num_vertices},
              {"rows", r.rows},
              {"cols", r.cols},
              {"geodesicEps0", g0},
              {"geodesicEps1", g1},
              {"anet", {{"parameter", r.anet_parameter}, {"even", r.anet_even}, {"odd", r.anet_odd}}},
              {"planarity", r.planarity},
              {"angleDeg", {{"min", r.angle_min}, {"max", r.angle_max}, {"mean", r.angle_mean}}},
              {"omegaHistogram", {{"edges", r.omega_bin_edges}, {"counts", r.omega_histogram}}}};
}

// --- OBJ ---

namespace {

void append_vertex(std::string& out, const Vec3& p) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", p.x(), p.y(), p.z());
  out += buf;
}

void append_groups(std::string& out, const std::vector<ObjPolylineGroup>& groups, int next) {
  for (const auto& g : groups) {
    out += "g " + g.name + "\n";
    for (const auto& line : g.lines) {
      const int first = next;
      for (const auto& p : line) append_vertex(out, p), ++next;
      out += "l";
      for (int k = first; k < next; ++k) out += " " + std::to_string(k);
      out += "\n";
    }
  }
}

}  // namespace

std::string net_to_obj(const Net& net, const std::vector<ObjPolylineGroup>& groups) {
  std::string out = "# grid " + std::to_string(net.rows()) + " " + std::to_string(net.cols()) + " row-major\n";
  for (int k = 0; k < net.size(); ++k) append_vertex(out, net.points().col(k));
  for (int i = 0; i + 1 < net.rows(); ++i)
    for (int j = 0; j + 1 < net.cols(); ++j) {
      out += "f " + std::to_string(net.index(i, j) + 1) + " " + std::to_string(net.index(i + 1, j) + 1) + " " +
             std::to_string(net.index(i + 1, j + 1) + 1) + " " + std::to_string(net.index(i, j + 1) + 1) + "\n";
    }
  append_groups(out, groups, net.size() + 1);
  return out;
}

std::string polylines_to_obj(const std::vector<ObjPolylineGroup>& groups) {
  std::string out = "# polylines\n";
  append_groups(out, groups, 1);
  return out;
}

void write_net_obj(const Net& net, const std::string& path, const std::vector<ObjPolylineGroup>& groups) {
  write_text_file(path, net_to_obj(net, groups));
}

Net net_from_obj(const std::string& text, int rows, int cols) {
  if (rows < 2 || cols < 2) throw Error(ErrorCode::BadTopology, "grid must be at least 2x2");
  std::vector<Vec3> verts;
  std::vector<std::vector<int>> faces;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x() >> p.y() >> p.z())) throw Error(ErrorCode::BadTopology, "malformed vertex record");
      verts.push_back(p);
    } else if (tag == "f") {
      std::vector<int> f;
      std::string tok;
      while (ls >> tok) f.push_back(std::stoi(tok.substr(0, tok.find('/'))) - 1);
      faces.push_back(std::move(f));
    } else if (tag == "l" || tag == "g") {
      break;  // polyline groups follow the grid block
    }
  }
  if (static_cast<int>(verts.size()) < rows * cols)
    throw Error(ErrorCode::BadTopology, "expected " + std::to_string(rows * cols) + " grid vertices, found " +
                                            std::to_string(verts.size()));
  Net net(rows, cols);
  for (int k = 0; k < rows * cols; ++k) net.points().col(k) = verts[k];

  // Faces must be exactly the row-major grid faces (any rotation or orientation).
  auto canonical = [](std::vector<int> f) {
    auto it = std::min_element(f.begin(), f.end());
    std::rotate(f.begin(), it, f.end());
    if (f.size() == 4 && f[3] < f[1]) std::swap(f[1], f[3]);
    return f;
  };
  std::set<std::vector<int>> expected, seen;
  for (int i = 0; i + 1 < rows; ++i)
    for (int j = 0; j + 1 < cols; ++j)
      expected.insert(canonical({net.index(i, j), net.index(i + 1, j), net.index(i + 1, j + 1), net.index(i, j + 1)}));
  for (const auto& f : faces) {
    if (f.size() != 4) throw Error(ErrorCode::BadTopology, "non-quad face");
    auto c = canonical(f);
    if (!expected.count(c)) throw Error(ErrorCode::BadTopology, "face does not match row-major grid order");
    seen.insert(c);
  }
  if (seen.size() != expected.size())
    throw Error(ErrorCode::BadTopology, "grid incomplete: " + std::to_string(expected.size() - seen.size()) +
                                            " faces missing");
  return net;
}

Net import_obj(const std::string& path, int rows, int cols) { return net_from_obj(read_text_file(path), rows, cols); }

}  // namespace isoweb
