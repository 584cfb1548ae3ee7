#include "evrptw/lagrangian.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "evrptw/csv.h"
#include "evrptw/error.h"

namespace evrptw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Depth-first construction of elementary routes. Stations are placed while
// extending, so every prefix is final and prefix checks are exact.
class RouteDfs {
 public:
  explicit RouteDfs(const Instance& inst) : inst_(inst), best_(std::size_t{1} << inst.customer_count()) {}

  void run() {
    path_ = {inst_.depot_start()};
    extend(0, 0.0, 0.0, 0.0, 0);
  }

  std::vector<RouteColumn>& best() { return best_; }
  std::int64_t routes() const { return routes_; }

 private:
  void extend(std::uint32_t mask, double departure, double load, double energy, int stations) {
    const int last = path_.back();
    close(mask, departure, energy);
    for (int next = 1; next < inst_.depot_end(); ++next) {
      const bool customer = inst_.is_customer(next);
      if (customer && (mask >> (next - 1) & 1u)) continue;
      if (!customer && (stations >= 2 || next == last)) continue;
      const auto& node = inst_.node(next);
      const double arrival = std::max(node.ready, departure + inst_.travel_time(last, next));
      if (arrival > node.due + kFeasibilityTolerance) continue;
      const double used = energy + inst_.charge_time(last, next);
      if (used > inst_.full_charge_time() + kFeasibilityTolerance) continue;
      if (load + node.demand > inst_.fleet().cargo_capacity + kFeasibilityTolerance) continue;
      path_.push_back(next);
      if (customer) {
        extend(mask | (1u << (next - 1)), arrival + node.service, load + node.demand, used, stations);
      } else {
        extend(mask, arrival, load, 0.0, stations + 1);
      }
      path_.pop_back();
    }
  }

  void close(std::uint32_t mask, double departure, double energy) {
    const int last = path_.back();
    const int end = inst_.depot_end();
    if (departure + inst_.travel_time(last, end) > inst_.node(end).due + kFeasibilityTolerance) return;
    if (energy + inst_.charge_time(last, end) > inst_.full_charge_time() + kFeasibilityTolerance) return;
    Route route = path_;
    route.push_back(end);
    ++routes_;
    const auto m = compute_metrics(inst_, route);
    if (route_violations(inst_, route, m).any(kFeasibilityTolerance)) return;
    auto priced = price_route(inst_, route, m);
    if (!priced.priced()) return;
    auto& slot = best_[mask];
    if (slot.route.empty() || priced.f_elec < slot.cost - 1e-9) {
      slot.mask = mask;
      slot.cost = priced.f_elec;
      slot.route = std::move(route);
      slot.plan = std::move(priced.plan);
    }
  }

  const Instance& inst_;
  Route path_;
  std::vector<RouteColumn> best_;
  std::int64_t routes_ = 0;
};

double lambda_sum(const std::vector<double>& lambda) {
  return std::accumulate(lambda.begin(), lambda.end(), 0.0);
}

}  // namespace

SubproblemSpace SubproblemSpace::enumerate(const Instance& inst, int guard) {
  const int cap = std::min(guard, 20);
  if (inst.customer_count() > cap) throw GuardExceeded("customers", cap, inst.customer_count());
  RouteDfs dfs(inst);
  dfs.run();
  SubproblemSpace space;
  space.customers_ = inst.customer_count();
  space.vehicles_ = inst.fleet().vehicles;
  space.routes_ = dfs.routes();
  for (auto& col : dfs.best()) {
    if (!col.route.empty()) space.columns_.push_back(std::move(col));
  }
  return space;
}

SubproblemSolution solve_subproblem(const SubproblemSpace& space, const std::vector<double>& lambda) {
  if (static_cast<int>(lambda.size()) != space.customer_count()) {
    throw Error("one multiplier per customer expected");
  }
  SubproblemSolution best;
  best.value = kInf;
  for (const auto& col : space.columns()) {
    double value = col.cost;
    for (int c = 0; c < space.customer_count(); ++c) {
      if (col.mask >> c & 1u) value -= lambda[static_cast<std::size_t>(c)];
    }
    if (value < best.value - 1e-12) {
      best.value = value;
      best.column = col;
    }
  }
  if (best.value == kInf) throw Error("no feasible single-vehicle route");
  return best;
}

SubproblemSolution solve_subproblem(const Instance& inst, const std::vector<double>& lambda) {
  return solve_subproblem(SubproblemSpace::enumerate(inst), lambda);
}

double lagrangian_bound(const SubproblemSpace& space, const std::vector<double>& lambda) {
  return space.vehicles() * solve_subproblem(space, lambda).value + lambda_sum(lambda);
}

double lagrangian_bound(const Instance& inst, const std::vector<double>& lambda) {
  return lagrangian_bound(SubproblemSpace::enumerate(inst), lambda);
}

BoundTrace maximize_bound(const Instance& inst, const BoundParams& params) {
  return maximize_bound(SubproblemSpace::enumerate(inst, params.guard), params);
}

BoundTrace maximize_bound(const SubproblemSpace& space, const BoundParams& params) {
  const int n = space.customer_count();
  const int k = space.vehicles();
  std::vector<double> lambda(static_cast<std::size_t>(n), 0.0);
  BoundTrace trace;
  trace.routes_enumerated = space.routes_enumerated();
  trace.best_lb = -kInf;
  double mu = params.mu;
  int stale = 0;

  for (int it = 0; it < params.max_iters; ++it) {
    const auto sp = solve_subproblem(space, lambda);
    const double z_lr = k * sp.value + lambda_sum(lambda);
    BoundIteration row;
    row.iteration = it;
    row.lambda = lambda;
    row.z_sp = sp.value;
    row.z_lr = z_lr;
    row.column_mask = sp.column.mask;
    row.column_cost = sp.column.cost;

    if (z_lr > trace.best_lb + 1e-12) {
      const bool improved = z_lr > trace.best_lb + 1e-9 * std::max(1.0, std::abs(trace.best_lb));
      trace.best_lb = z_lr;
      trace.best_lambda = lambda;
      stale = improved ? 0 : stale + 1;
    } else {
      ++stale;
    }
    if (stale >= params.halve_after) {
      mu /= 2.0;
      stale = 0;
    }
    row.best_lb = trace.best_lb;

    std::vector<double> g(static_cast<std::size_t>(n));
    double norm2 = 0.0;
    for (int c = 0; c < n; ++c) {
      const double a = (sp.column.mask >> c & 1u) ? 1.0 : 0.0;
      g[static_cast<std::size_t>(c)] = 1.0 - k * a;
      norm2 += g[static_cast<std::size_t>(c)] * g[static_cast<std::size_t>(c)];
    }
    double step = 0.0;
    if (norm2 > 0.0) {
      const double scale = 1e-3 * std::max(1.0, std::abs(trace.best_lb));
      const double target = std::max(params.upper_bound, trace.best_lb + scale);
      step = mu * (target - z_lr) / norm2;
    }
    row.step = step;
    trace.iterations.push_back(std::move(row));
    if (norm2 == 0.0) break;  // the multipliers are optimal

    const int w = params.window;
    if (it >= w) {
      const double earlier = trace.iterations[static_cast<std::size_t>(it - w)].best_lb;
      if (trace.best_lb - earlier <= params.rel_tol * std::max(1.0, std::abs(trace.best_lb))) break;
    }
    for (int c = 0; c < n; ++c) lambda[static_cast<std::size_t>(c)] += step * g[static_cast<std::size_t>(c)];
  }
  return trace;
}

std::string bound_trace_to_csv(const BoundTrace& trace) {
  CsvTable t({"iteration", "z_sp", "z_lr", "best_lb", "step", "column_mask", "column_cost"});
  for (const auto& r : trace.iterations) {
    t.add_row({std::to_string(r.iteration), format_double(r.z_sp), format_double(r.z_lr),
               format_double(r.best_lb), format_double(r.step), std::to_string(r.column_mask),
               format_double(r.column_cost)});
  }
  return t.str();
}

}  // namespace evrptw
