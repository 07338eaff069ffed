#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <Eigen/Dense>
#include "json.hpp"

#include "greensplit/dynamics.hpp"
#include "greensplit/network.hpp"

namespace greensplit {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Parses and validates a scenario document. Unknown keys are rejected.
NetworkSpec build_network(const Json& doc);

/// Canonical serialization; build_network(to_json(spec)) == spec.
Json to_json(const NetworkSpec& spec);

/// Loads a scenario from a file path, a bundled scenario name
/// (single_road, four_intersections, ...) or a generated grid "grid_RxC".
NetworkSpec load_scenario(const std::string& source, const std::filesystem::path& bundled_dir = {});

/// Initial state from a preset ("zeros", "ones") or a state file
///   {"schema_version": 1, "cells": {"road id": [cell densities...]}}
/// Roads missing from the file start empty.
Eigen::VectorXd load_state(const std::string& source, const NetworkSpec& spec);
Eigen::VectorXd parse_state(const Json& doc, const NetworkSpec& spec);

/// Matrices in row-major layout: {"rows": r, "cols": c, "data": [...]}.
Json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const Json& j);

/// Mode matrices, durations, input/output maps and the averaged matrix.
Json modes_to_json(const ModeSet& ms);

/// 64-bit FNV-1a of a string, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

Json read_json_file(const std::filesystem::path& path);

}  // namespace greensplit
