#pragma once

#include <span>
#include <string>
#include <vector>

#include "evrptw/instance.h"

namespace evrptw {

// Node ids from depot_start() to depot_end(); interior nodes are customers or
// stations.
using Route = std::vector<int>;

enum class Action { Idle, Charge, Discharge };

const char* action_name(Action a);

struct PlannedAction {
  int period = 0;  // 1-based
  Action action = Action::Idle;

  bool operator==(const PlannedAction&) const = default;
};

// Actions at one charge-capable position of a route, sorted by period.
struct VisitPlan {
  int position = 0;
  std::vector<PlannedAction> actions;

  bool operator==(const VisitPlan&) const = default;
};

struct ChargePlan {
  std::vector<VisitPlan> visits;  // sorted by position, no empty entries

  const VisitPlan* at(int position) const;
  int count(Action a) const;
  bool empty() const { return visits.empty(); }

  bool operator==(const ChargePlan&) const = default;
};

struct Solution {
  std::vector<Route> routes;
  std::vector<ChargePlan> plans;  // one per route
};

struct RouteMetrics {
  std::vector<double> earliest;        // T^E
  std::vector<double> latest;          // T^L
  std::vector<double> forward_slack;   // T^FS
  std::vector<double> backward_slack;  // T^BS
  std::vector<double> energy;          // F, charge-minutes since the last charge-capable node

  bool operator==(const RouteMetrics&) const = default;
};

struct Violations {
  double tw = 0.0;
  double batt = 0.0;
  double cargo = 0.0;

  Violations& operator+=(const Violations& o) {
    tw += o.tw;
    batt += o.batt;
    cargo += o.cargo;
    return *this;
  }
  bool any(double tol = 1e-9) const { return tw > tol || batt > tol || cargo > tol; }
};

struct Betas {
  double tw = 10.0;
  double batt = 10.0;
  double cargo = 10.0;
};

constexpr double kFeasibilityTolerance = 1e-6;

// Throws StructuralError unless the route starts at the start depot, ends at
// the end depot, has only customers and stations inside and no repeated
// customer.
void check_route_structure(const Instance& inst, const Route& route);

// Positions of stations and depots, in route order.
std::vector<int> charge_capable_positions(const Instance& inst, const Route& route);
int station_visits(const Instance& inst, const Route& route);

RouteMetrics compute_metrics(const Instance& inst, const Route& route);

double cargo_violation(const Instance& inst, const Route& route);
double tw_violation(const Instance& inst, const Route& route, const RouteMetrics& m);
// Sum over station and end-depot positions of the excess of F over B.
double battery_violation(const Instance& inst, const Route& route, const RouteMetrics& m);
Violations route_violations(const Instance& inst, const Route& route, const RouteMetrics& m);

double f_gen(double f_elec, const Violations& phi, const Betas& betas);

// A constraint of the full model that a solution breaks. `node`, `position`
// and `period` are -1 when not applicable.
struct ConstraintViolation {
  std::string constraint;  // e.g. "coverage", "time-window", "no-action-before-arrival"
  int route = -1;
  int node = -1;
  int position = -1;
  int period = -1;
  std::string detail;
};

// Exact schedule of one route under a plan: earliest arrival, battery and
// cargo on arrival, and departure per position.
struct RouteTrace {
  std::vector<double> arrival;
  std::vector<double> battery;
  std::vector<double> cargo;
  std::vector<double> departure;
  double objective = 0.0;
};

// Steps through a route one position at a time, applying the plan's actions
// and checking every per-route constraint as it goes. Cheap to copy, so
// enumerators can branch on it.
class RouteSimulator {
 public:
  RouteSimulator(const Instance& inst, const Route& route, int route_index = 0);

  // Processes position `next_position()` with the given actions, which must
  // be sorted by period. Returns false if any violation has been found so far.
  bool advance(std::span<const PlannedAction> actions);

  bool done() const { return next_ >= static_cast<int>(route_->size()); }
  bool ok() const { return witnesses_.empty(); }
  int next_position() const { return next_; }
  // Battery level on arrival at the last processed position, before actions.
  double battery_on_arrival() const { return battery_; }
  double battery_after_actions() const { return battery_after_; }
  double departure() const { return departure_; }
  // Net electricity cost so far; includes the overnight recharge once done().
  double objective() const { return objective_; }
  const std::vector<ConstraintViolation>& witnesses() const { return witnesses_; }
  const RouteTrace& trace() const { return trace_; }

 private:
  void fail(std::string constraint, int period, std::string detail);

  const Instance* inst_;
  const Route* route_;
  int route_index_;
  int next_ = 0;
  double departure_ = 0.0;
  double battery_ = 0.0;
  double battery_after_ = 0.0;
  double cargo_ = 0.0;
  double objective_ = 0.0;
  std::vector<ConstraintViolation> witnesses_;
  RouteTrace trace_;
};

// Simulates one route; witnesses are appended to `out` when non-null.
RouteTrace simulate_route(const Instance& inst, const Route& route, const ChargePlan& plan,
                          int route_index = 0, std::vector<ConstraintViolation>* out = nullptr);

struct VerificationReport {
  bool feasible = false;
  double objective = 0.0;
  std::vector<ConstraintViolation> violations;
  std::vector<RouteTrace> traces;
};

// Checks a complete solution against every constraint family of the full
// model, without big-M terms. Never throws on infeasible or malformed input;
// structural problems become witnesses too.
VerificationReport verify_full(const Instance& inst, const Solution& solution);

}  // namespace evrptw
