#pragma once

#include <string>
#include <vector>

#include "evrptw/instance.h"
#include "evrptw/route_eval.h"

namespace evrptw {

enum class ScheduleCase { ZeroStation, OneStation, TwoStationRecharge, TwoStationDischarge };

const char* case_name(ScheduleCase c);

enum class ScheduleStatus {
  Optimal,      // plan found and proven optimal for the case program
  NoPlan,       // the case program has no feasible plan (battery-infeasible)
  Unscheduled,  // route violates windows or a leg exceeds the battery; not priced
};

// Inclusive period range; empty when last < first.
struct PeriodRange {
  int first = 1;
  int last = 0;

  bool empty() const { return last < first; }
  int size() const { return empty() ? 0 : last - first + 1; }
  bool contains(int t) const { return t >= first && t <= last; }
  std::vector<int> periods() const;

  bool operator==(const PeriodRange&) const = default;
};

struct ScheduleProblem {
  ScheduleCase tag = ScheduleCase::ZeroStation;
  std::vector<int> visits;            // charge-capable positions, in route order
  std::vector<PeriodRange> periods;   // connected periods per visit
  double total_energy = 0.0;          // sum of F over charge-capable positions
  double deficit = 0.0;               // Delta = total_energy - B
  int required = 0;                   // ceil(Delta / delta) when Delta > 0, else 0
  int budget = 0;                     // Omega = floor(-Delta / delta) when Delta <= 0, else 0
};

struct PricedRoute {
  Route route;
  ChargePlan plan;
  double f_elec = 0.0;
  ScheduleCase tag = ScheduleCase::ZeroStation;
  ScheduleStatus status = ScheduleStatus::Optimal;

  bool priced() const { return status == ScheduleStatus::Optimal; }
};

// Periods t with (t-1)*delta >= T^E and t*delta <= T^L, i.e. periods that can
// be used entirely after arriving without pushing any later window.
PeriodRange connected_periods(const Instance& inst, const RouteMetrics& m, int position);

// Periods of the later visit j made unreachable by acting in period t at the
// earlier visit i.
std::vector<int> mutually_exclusive(const Instance& inst, const RouteMetrics& m, int i, int j,
                                    int t);

ScheduleProblem build_schedule_problem(const Instance& inst, const Route& route,
                                       const RouteMetrics& m);

// Exact solvers of the per-route programs. Each throws StructuralError when the
// route has the wrong number of station visits.
PricedRoute schedule_zero_station(const Instance& inst, const Route& route, const RouteMetrics& m);
PricedRoute schedule_one_station(const Instance& inst, const Route& route, const RouteMetrics& m);
PricedRoute schedule_two_station(const Instance& inst, const Route& route, const RouteMetrics& m);

// Dispatches on the number of station visits; more than two is a
// StructuralError. Routes that are not schedulable come back with status
// Unscheduled, an empty plan and the overnight cost of the consumed energy.
PricedRoute price_route(const Instance& inst, const Route& route, const RouteMetrics& m);
PricedRoute price_route(const Instance& inst, const Route& route);

// Net cost of the given plan according to the closed-form expression of the
// case program.
double case_cost(const Instance& inst, const Route& route, const RouteMetrics& m,
                 const ChargePlan& plan, ScheduleCase tag);

// A priced route together with its violations. A route whose case program has
// no plan is charged the energy it cannot cover as additional battery
// violation, so the search can still rank it.
struct RouteAssessment {
  PricedRoute priced;
  Violations phi;
  double f_gen = 0.0;
};

RouteAssessment assess_route(const Instance& inst, const Route& route, const Betas& betas);

struct SolutionCost {
  double f_elec = 0.0;
  Violations phi;
  double f_gen = 0.0;
  bool feasible() const { return !phi.any(kFeasibilityTolerance); }
};

// Prices every route, stores the plans in `solution` and sums the costs.
SolutionCost evaluate_solution(const Instance& inst, Solution& solution, const Betas& betas);

}  // namespace evrptw
