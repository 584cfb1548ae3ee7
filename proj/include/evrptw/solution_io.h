#pragma once

#include <string>

#include "evrptw/charge_sched.h"
#include "evrptw/instance.h"
#include "evrptw/route_eval.h"

namespace evrptw {

// Summary stored next to the routes. Informational only; readers recompute it.
struct SolutionSummary {
  double objective = 0.0;
  bool feasible = false;
  Violations phi;
};

// JSON document, key order fixed, numbers in shortest round-trip form:
//   {"format": "evrptw-solution/1", "instance": ..., "vehicles": K,
//    "routes": [{"nodes": [0, ..., N+S+1],
//                "plan": [{"position": p, "actions": [[t, "charge"], ...]}]}],
//    "objective": ..., "feasible": ..., "violations": {"tw": .., "batt": .., "cargo": ..}}
std::string solution_to_json(const Instance& inst, const Solution& solution,
                             const SolutionSummary& summary);
// Throws ParseError on malformed documents.
Solution solution_from_json(const std::string& text);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace evrptw
