#pragma once

#include <string>

#include "evrptw/instance.h"
#include "evrptw/route_eval.h"

namespace evrptw {

// Map of the node coordinates with one polyline per route. Depots are drawn
// as squares, stations as triangles and customers as circles.
std::string route_map_svg(const Instance& inst, const Solution& solution);

// Battery level (charge-minutes) against time of day for every vehicle, as a
// step chart built from the simulated route traces.
std::string battery_chart_svg(const Instance& inst, const Solution& solution);

}  // namespace evrptw
