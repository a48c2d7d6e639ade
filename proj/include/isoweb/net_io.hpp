#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "isoweb/net.hpp"

namespace isoweb {

nlohmann::json net_to_json(const Net& net);
Net net_from_json(const nlohmann::json& j);

void write_net_json(const Net& net, const std::string& path);
Net read_net_json(const std::string& path);

nlohmann::json report_to_json(const Report& r);

/// OBJ grid convention: vertices row-major (index i*cols + j), one quad
/// record per face in the order f_ij, f_{i+1,j}, f_{i+1,j+1}, f_{i,j+1},
/// and optional polyline groups written as `l` records.
struct ObjPolylineGroup {
  std::string name;
  std::vector<std::vector<Vec3>> lines;
};

std::string net_to_obj(const Net& net, const std::vector<ObjPolylineGroup>& groups = {});
/// Polyline groups alone, without the grid.
std::string polylines_to_obj(const std::vector<ObjPolylineGroup>& groups);

void write_net_obj(const Net& net, const std::string& path, const std::vector<ObjPolylineGroup>& groups = {});

/// Parses a rows x cols grid; throws BadTopology unless the face records are
/// exactly the grid faces of the row-major convention.
Net net_from_obj(const std::string& text, int rows, int cols);
Net import_obj(const std::string& path, int rows, int cols);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace isoweb
