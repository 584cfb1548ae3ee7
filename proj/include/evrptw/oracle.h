#pragma once

#include <cstdint>

#include "evrptw/charge_sched.h"
#include "evrptw/instance.h"
#include "evrptw/route_eval.h"

namespace evrptw {

struct SearchCaps {
  int max_customers = 7;
  int max_stations_per_route = 2;  // fixed by the restricted model
  std::int64_t max_routes = 20'000'000;  // priced candidate routes
};

struct OracleCounters {
  std::int64_t customer_sequences = 0;  // elementary sequences surviving prefix pruning
  std::int64_t candidate_routes = 0;    // sequences with station insertions
  std::int64_t priced_routes = 0;       // candidates passed to the scheduler
  std::int64_t feasible_routes = 0;     // candidates with a plan and no violation
  std::int64_t covered_subsets = 0;     // customer subsets with at least one feasible route
};

struct OracleResult {
  bool feasible = false;
  double f_elec = 0.0;
  Solution solution;  // exactly K routes (idle vehicles get a depot-only route)
  OracleCounters counters;
};

// Exhaustive optimum of the restricted model (at most two station visits per
// route, schedules from the case programs). Throws GuardExceeded when the
// instance is outside the caps.
OracleResult exact_search(const Instance& inst, int vehicles, const SearchCaps& caps = {});

// Optimum over every per-period action assignment of the route's charge-capable
// visits, checked only by the route simulator and the restricted-model rules
// (one action type per visit, recharge just enough). Throws GuardExceeded when
// a visit has more than `window_cap` candidate periods.
PricedRoute schedule_bruteforce(const Instance& inst, const Route& route, const RouteMetrics& m,
                                int window_cap = 8);

}  // namespace evrptw
