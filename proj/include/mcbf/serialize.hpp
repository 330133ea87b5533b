// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "mcbf/feasibility.hpp"
#include "mcbf/scenario.hpp"

namespace mcbf {

using Json = nlohmann::json;

/// Complex data serializes as row-major interleaved [re, im, re, im, ...].
Json complex_to_json(const CMat& m);
Json complex_to_json(const CVec& v);
CMat complex_matrix_from_json(const Json& j, int rows, int cols);
CVec complex_vector_from_json(const Json& j, int size);

Json scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const Json& j);

Json strategy_to_json(const Strategy& strategy);
Strategy strategy_from_json(const Json& j, const Scenario& scenario);

void write_json_file(const std::string& path, const Json& j);
Json read_json_file(const std::string& path);

}  // namespace mcbf
