#pragma once

#include <nlohmann/json.hpp>

#include "dpplab/geometry.hpp"

namespace dpplab {

nlohmann::ordered_json region_to_json(const Region& region);
Region region_from_json(const nlohmann::json& j);

}  // namespace dpplab
