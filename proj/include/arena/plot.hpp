#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "arena/harness.hpp"

namespace arena::plot {

struct Series {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<std::pair<double, double>> points;
};

// One name per learning-curve family: reward, cumulative successful
// episodes, epsilon, cumulative random / non-random actions, episode count,
// episode length and cumulative episode length, each against time steps or
// episodes where both axes exist.
const std::vector<std::string>& family_names();
bool is_family(std::string_view name);

// Builds the named family from a log; throws UsageError for unknown names.
Series build_family(const harness::MetricsLog& log, std::string_view family);

// Self-contained deterministic SVG line chart (polyline, axis ticks, title).
// Long series are decimated to a fixed point budget.
std::string render_svg(const Series& series);

}  // namespace arena::plot
