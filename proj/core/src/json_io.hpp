#pragma once

#include <json.hpp>

#include "tmm/metrics.hpp"

namespace tmm::detail {

nlohmann::ordered_json report_json(const MetricsReport& report);
MetricsReport report_from_json(const nlohmann::json& doc);

}  // namespace tmm::detail
