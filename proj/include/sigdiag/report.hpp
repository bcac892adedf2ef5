#pragma once

#include <string>

#include "sigdiag/config.hpp"
#include "sigdiag/inference.hpp"

namespace sigdiag {

// Metrics JSON document (schema "sigdiag.metrics", format_version 1): tool
// version, full config echo, pooled and per-fold confusion counts and
// metrics. Serialization is deterministic: fixed key order, shortest
// round-trip double formatting, no timestamps.
std::string metrics_json(const CrossValResult& result, const RunConfig& config);

}  // namespace sigdiag
