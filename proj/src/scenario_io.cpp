#include "greensplit/scenario_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <regex>
#include <set>

#include "greensplit/errors.hpp"

namespace greensplit {

namespace {

void check_keys(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + " must be an object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) throw ValidationError("unknown key '" + item.key() + "' in " + where);
  }
}

template <typename T>
T required(const Json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ValidationError(where + " is missing '" + key + "'");
  return obj.at(key).get<T>();
}

template <typename T>
T optional(const Json& obj, const char* key, T fallback) {
  return obj.contains(key) ? obj.at(key).get<T>() : fallback;
}

InflowProfile parse_inflow(const Json& j, const std::string& where) {
  InflowProfile p;
  if (j.is_number()) {
    p.segments.push_back({0.0, j.get<double>()});
    return p;
  }
  if (!j.is_array()) throw ValidationError(where + ": inflow must be a number or a list of segments");
  for (const auto& s : j) {
    check_keys(s, {"start", "rate"}, where + " inflow segment");
    p.segments.push_back({required<double>(s, "start", where), required<double>(s, "rate", where)});
  }
  return p;
}

NetworkSpec parse(const Json& doc) {
  check_keys(doc, {"schema_version", "name", "step", "cycle_time", "allow_phase_overlap", "enforce_conservation",
                   "roads", "intersections"},
             "scenario");
  const int version = required<int>(doc, "schema_version", "scenario");
  if (version != kSchemaVersion) {
    throw ValidationError("unsupported schema_version " + std::to_string(version));
  }
  NetworkSpec spec;
  spec.name = optional<std::string>(doc, "name", "");
  spec.step = required<double>(doc, "step", "scenario");
  spec.cycle_time = required<double>(doc, "cycle_time", "scenario");
  spec.allow_phase_overlap = optional<bool>(doc, "allow_phase_overlap", false);
  spec.enforce_conservation = optional<bool>(doc, "enforce_conservation", true);

  for (const auto& r : required<Json>(doc, "roads", "scenario")) {
    check_keys(r, {"id", "length", "free_flow_speed", "source", "destination", "exit_rate", "inflow"}, "road");
    Road road;
    road.id = required<std::string>(r, "id", "road");
    const std::string where = "road " + road.id;
    road.length = required<double>(r, "length", where);
    road.free_flow_speed = required<double>(r, "free_flow_speed", where);
    road.is_source = optional<bool>(r, "source", false);
    road.is_destination = optional<bool>(r, "destination", false);
    road.exit_rate = optional<double>(r, "exit_rate", 0.0);
    if (r.contains("inflow")) road.inflow = parse_inflow(r.at("inflow"), where);
    spec.roads.push_back(std::move(road));
  }

  bool any_durations = false;
  bool all_durations = true;
  for (const auto& i : required<Json>(doc, "intersections", "scenario")) {
    check_keys(i, {"id", "movements", "phases", "durations"}, "intersection");
    Intersection inter;
    inter.id = required<std::string>(i, "id", "intersection");
    const std::string where = "intersection " + inter.id;
    for (const auto& m : required<Json>(i, "movements", where)) {
      check_keys(m, {"from", "to", "routing_ratio", "saturation_rate"}, where + " movement");
      Movement mv;
      mv.from_road = required<std::string>(m, "from", where);
      mv.to_road = required<std::string>(m, "to", where);
      mv.routing_ratio = optional<double>(m, "routing_ratio", 1.0);
      mv.saturation_rate = required<double>(m, "saturation_rate", where);
      inter.movements.push_back(std::move(mv));
    }
    inter.phases = required<std::vector<std::vector<int>>>(i, "phases", where);
    if (i.contains("durations")) {
      any_durations = true;
      spec.phase_durations.push_back(i.at("durations").get<std::vector<double>>());
    } else {
      all_durations = false;
    }
    spec.intersections.push_back(std::move(inter));
  }
  if (any_durations && !all_durations) {
    throw ValidationError("phase durations must be given for every intersection or for none");
  }
  return validate_network(std::move(spec));
}

}  // namespace

NetworkSpec build_network(const Json& doc) {
  try {
    return parse(doc);
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed scenario: ") + e.what());
  }
}

Json to_json(const NetworkSpec& spec) {
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["name"] = spec.name;
  doc["step"] = spec.step;
  doc["cycle_time"] = spec.cycle_time;
  doc["allow_phase_overlap"] = spec.allow_phase_overlap;
  doc["enforce_conservation"] = spec.enforce_conservation;
  doc["roads"] = Json::array();
  for (const auto& r : spec.roads) {
    Json road{{"id", r.id},
              {"length", r.length},
              {"free_flow_speed", r.free_flow_speed},
              {"source", r.is_source},
              {"destination", r.is_destination},
              {"exit_rate", r.exit_rate}};
    if (!r.inflow.segments.empty()) {
      road["inflow"] = Json::array();
      for (const auto& s : r.inflow.segments) road["inflow"].push_back({{"start", s.start}, {"rate", s.rate}});
    }
    doc["roads"].push_back(std::move(road));
  }
  doc["intersections"] = Json::array();
  for (std::size_t j = 0; j < spec.intersections.size(); ++j) {
    const auto& inter = spec.intersections[j];
    Json i{{"id", inter.id}, {"movements", Json::array()}, {"phases", inter.phases}};
    for (const auto& m : inter.movements) {
      i["movements"].push_back({{"from", m.from_road},
                                {"to", m.to_road},
                                {"routing_ratio", m.routing_ratio},
                                {"saturation_rate", m.saturation_rate}});
    }
    if (!spec.phase_durations.empty()) i["durations"] = spec.phase_durations[j];
    doc["intersections"].push_back(std::move(i));
  }
  return doc;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ValidationError("cannot parse " + path.string() + ": " + e.what());
  }
}

NetworkSpec load_scenario(const std::string& source, const std::filesystem::path& bundled_dir) {
  if (std::filesystem::is_regular_file(source)) return build_network(read_json_file(source));
  static const std::regex grid_name(R"(grid_(\d+)x(\d+))");
  std::smatch m;
  if (std::regex_match(source, m, grid_name)) {
    return generate_grid(std::stoi(m[1].str()), std::stoi(m[2].str()));
  }
  if (!bundled_dir.empty()) {
    const auto path = bundled_dir / (source + ".json");
    if (std::filesystem::is_regular_file(path)) return build_network(read_json_file(path));
  }
  throw ValidationError("scenario '" + source + "' is neither a file, a bundled scenario nor grid_RxC");
}

Eigen::VectorXd parse_state(const Json& doc, const NetworkSpec& spec) {
  try {
    check_keys(doc, {"schema_version", "cells"}, "state file");
    if (required<int>(doc, "schema_version", "state file") != kSchemaVersion) {
      throw ValidationError("unsupported state file schema_version");
    }
    Eigen::VectorXd x = Eigen::VectorXd::Zero(spec.state_dim);
    const Json& cells = required<Json>(doc, "cells", "state file");
    if (!cells.is_object()) throw ValidationError("state file 'cells' must map road ids to lists");
    for (const auto& item : cells.items()) {
      const int r = spec.road_index(item.key());
      if (r < 0) throw ValidationError("state file names unknown road " + item.key());
      const auto values = item.value().get<std::vector<double>>();
      if (static_cast<int>(values.size()) != spec.roads[static_cast<std::size_t>(r)].cell_count) {
        throw DimensionError("road " + item.key() + " has " +
                             std::to_string(spec.roads[static_cast<std::size_t>(r)].cell_count) + " cells, state gives " +
                             std::to_string(values.size()));
      }
      for (std::size_t k = 0; k < values.size(); ++k) {
        if (!(values[k] >= 0) || !std::isfinite(values[k])) {
          throw ValidationError("densities must be finite and nonnegative (road " + item.key() + ")");
        }
        x[spec.first_cell[static_cast<std::size_t>(r)] + static_cast<Eigen::Index>(k)] = values[k];
      }
    }
    return x;
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed state file: ") + e.what());
  }
}

Eigen::VectorXd load_state(const std::string& source, const NetworkSpec& spec) {
  if (source == "zeros") return Eigen::VectorXd::Zero(spec.state_dim);
  if (source == "ones") return Eigen::VectorXd::Ones(spec.state_dim);
  return parse_state(read_json_file(source), spec);
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw DimensionError("matrix data has the wrong length");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = data[static_cast<std::size_t>(i * cols + k)];
  return m;
}

Json modes_to_json(const ModeSet& ms) {
  Json doc;
  doc["layout"] = "row-major";
  doc["state_dim"] = ms.state_dim();
  doc["cycle_time"] = ms.cycle_time;
  doc["durations"] = std::vector<double>(ms.durations.data(), ms.durations.data() + ms.durations.size());
  doc["windows"] = Json::array();
  for (const auto& [a, b] : ms.windows) doc["windows"].push_back({a, b});
  doc["active_phase"] = ms.active_phase;
  doc["modes"] = Json::array();
  for (const auto& a : ms.modes) doc["modes"].push_back(matrix_to_json(a));
  doc["input_map"] = matrix_to_json(ms.input_map);
  doc["output_map"] = matrix_to_json(ms.output_map);
  doc["averaged"] = matrix_to_json(averaged_matrix(ms.modes, ms.durations));
  return doc;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace greensplit
