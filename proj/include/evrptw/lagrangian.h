#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evrptw/charge_sched.h"
#include "evrptw/instance.h"
#include "evrptw/route_eval.h"

namespace evrptw {

// Cheapest feasible single-vehicle route serving exactly one customer subset.
struct RouteColumn {
  std::uint32_t mask = 0;  // bit c-1 set when customer c is visited
  Route route;
  ChargePlan plan;
  double cost = 0.0;  // f_elec of the route
};

// All single-vehicle routes of the restricted model (at most two station
// visits), reduced to the cheapest one per customer subset. Built once; every
// subproblem is then a scan over the subsets.
class SubproblemSpace {
 public:
  // Throws GuardExceeded when the instance has more than `guard` customers.
  static SubproblemSpace enumerate(const Instance& inst, int guard = 10);

  const std::vector<RouteColumn>& columns() const { return columns_; }
  int customer_count() const { return customers_; }
  int vehicles() const { return vehicles_; }
  std::int64_t routes_enumerated() const { return routes_; }

 private:
  std::vector<RouteColumn> columns_;
  int customers_ = 0;
  int vehicles_ = 1;
  std::int64_t routes_ = 0;
};

struct SubproblemSolution {
  RouteColumn column;
  double value = 0.0;  // Z_SP(lambda) = cost - sum of lambda over visited customers
};

// lambda[c-1] is the multiplier of customer c.
SubproblemSolution solve_subproblem(const SubproblemSpace& space, const std::vector<double>& lambda);
SubproblemSolution solve_subproblem(const Instance& inst, const std::vector<double>& lambda);

// Z_LR(lambda) = K * Z_SP(lambda) + sum(lambda).
double lagrangian_bound(const SubproblemSpace& space, const std::vector<double>& lambda);
double lagrangian_bound(const Instance& inst, const std::vector<double>& lambda);

struct BoundParams {
  int max_iters = 200;
  double upper_bound = 0.0;  // reference value for the step size (heuristic UB)
  double mu = 2.0;
  int halve_after = 20;
  double rel_tol = 1e-4;
  int window = 50;
  int guard = 10;
};

struct BoundIteration {
  int iteration = 0;
  std::vector<double> lambda;
  double z_sp = 0.0;
  double z_lr = 0.0;
  double best_lb = 0.0;
  double step = 0.0;
  // The cut theta + sum_i lambda_i a_i <= cost contributed by this iterate.
  std::uint32_t column_mask = 0;
  double column_cost = 0.0;
};

struct BoundTrace {
  std::vector<BoundIteration> iterations;
  double best_lb = 0.0;
  std::vector<double> best_lambda;
  std::int64_t routes_enumerated = 0;
};

// Projected subgradient ascent with a Polyak step
// mu * (UB - Z_LR) / ||g||^2, g_i = 1 - K * a_i.
BoundTrace maximize_bound(const Instance& inst, const BoundParams& params);
BoundTrace maximize_bound(const SubproblemSpace& space, const BoundParams& params);

std::string bound_trace_to_csv(const BoundTrace& trace);

}  // namespace evrptw
