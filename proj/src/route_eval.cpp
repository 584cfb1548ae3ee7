#include "evrptw/route_eval.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "evrptw/error.h"

namespace evrptw {

const char* action_name(Action a) {
  switch (a) {
    case Action::Charge: return "charge";
    case Action::Discharge: return "discharge";
    case Action::Idle: break;
  }
  return "idle";
}

const VisitPlan* ChargePlan::at(int position) const {
  for (const auto& v : visits) {
    if (v.position == position) return &v;
  }
  return nullptr;
}

int ChargePlan::count(Action a) const {
  int n = 0;
  for (const auto& v : visits) {
    for (const auto& pa : v.actions) n += pa.action == a;
  }
  return n;
}

void check_route_structure(const Instance& inst, const Route& route) {
  if (route.size() < 2) throw StructuralError("route needs at least the two depot nodes");
  if (route.front() != inst.depot_start()) throw StructuralError("route must start at the start depot");
  if (route.back() != inst.depot_end()) throw StructuralError("route must end at the end depot");
  std::set<int> seen;
  for (std::size_t i = 1; i + 1 < route.size(); ++i) {
    const int id = route[i];
    if (id <= inst.depot_start() || id >= inst.depot_end()) {
      throw StructuralError("invalid interior node " + std::to_string(id));
    }
    if (inst.is_customer(id) && !seen.insert(id).second) {
      throw StructuralError("customer " + std::to_string(id) + " visited twice");
    }
  }
}

std::vector<int> charge_capable_positions(const Instance& inst, const Route& route) {
  std::vector<int> out;
  for (std::size_t i = 0; i < route.size(); ++i) {
    if (inst.is_charge_capable(route[i])) out.push_back(static_cast<int>(i));
  }
  return out;
}

int station_visits(const Instance& inst, const Route& route) {
  return static_cast<int>(std::count_if(route.begin(), route.end(),
                                        [&](int id) { return inst.is_station(id); }));
}

RouteMetrics compute_metrics(const Instance& inst, const Route& route) {
  const std::size_t n = route.size();
  RouteMetrics m;
  m.earliest.assign(n, 0.0);
  m.latest.assign(n, inst.horizon());
  m.forward_slack.assign(n, 0.0);
  m.backward_slack.assign(n, 0.0);
  m.energy.assign(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const auto& prev = inst.node(route[i - 1]);
    const auto& cur = inst.node(route[i]);
    const double t = inst.travel_time(prev.id, cur.id);
    m.earliest[i] = std::max(std::min(m.earliest[i - 1], prev.due) + prev.service + t, cur.ready);
    const double wait = std::max(cur.ready - (m.earliest[i - 1] + prev.service + t), 0.0);
    const bool after_customer = prev.kind == NodeKind::Customer;
    m.forward_slack[i] = (after_customer ? m.forward_slack[i - 1] : 0.0) + wait;
    m.energy[i] = (after_customer ? m.energy[i - 1] : 0.0) + inst.charge_time(prev.id, cur.id);
  }
  for (std::size_t k = n - 1; k-- > 0;) {
    const auto& cur = inst.node(route[k]);
    const auto& next = inst.node(route[k + 1]);
    const double t = inst.travel_time(cur.id, next.id);
    m.latest[k] = std::min(m.latest[k + 1] - t, cur.due + cur.service);
    const double gap = std::max(m.latest[k + 1] - t - cur.due - cur.service, 0.0);
    const bool before_customer = next.kind == NodeKind::Customer;
    m.backward_slack[k] = (before_customer ? m.backward_slack[k + 1] : 0.0) + gap;
  }
  return m;
}

double cargo_violation(const Instance& inst, const Route& route) {
  double demand = 0.0;
  for (int id : route) demand += inst.node(id).demand;
  return std::max(demand - inst.fleet().cargo_capacity, 0.0);
}

double tw_violation(const Instance& inst, const Route& route, const RouteMetrics& m) {
  double total = 0.0;
  for (std::size_t i = 0; i < route.size(); ++i) {
    total += std::max(m.earliest[i] - inst.node(route[i]).due, 0.0);
  }
  return total;
}

double battery_violation(const Instance& inst, const Route& route, const RouteMetrics& m) {
  const double b = inst.full_charge_time();
  double total = 0.0;
  for (std::size_t i = 1; i < route.size(); ++i) {
    if (inst.is_charge_capable(route[i])) total += std::max(m.energy[i] - b, 0.0);
  }
  return total;
}

Violations route_violations(const Instance& inst, const Route& route, const RouteMetrics& m) {
  return {tw_violation(inst, route, m), battery_violation(inst, route, m),
          cargo_violation(inst, route)};
}

double f_gen(double f_elec, const Violations& phi, const Betas& betas) {
  return f_elec + betas.tw * phi.tw + betas.batt * phi.batt + betas.cargo * phi.cargo;
}

RouteSimulator::RouteSimulator(const Instance& inst, const Route& route, int route_index)
    : inst_(&inst), route_(&route), route_index_(route_index) {
  const auto n = route.size();
  trace_.arrival.reserve(n);
  trace_.battery.reserve(n);
  trace_.cargo.reserve(n);
  trace_.departure.reserve(n);
}

void RouteSimulator::fail(std::string constraint, int period, std::string detail) {
  ConstraintViolation v;
  v.constraint = std::move(constraint);
  v.route = route_index_;
  v.position = next_;
  v.node = (*route_)[static_cast<std::size_t>(next_)];
  v.period = period;
  v.detail = std::move(detail);
  witnesses_.push_back(std::move(v));
}

bool RouteSimulator::advance(std::span<const PlannedAction> actions) {
  const auto& inst = *inst_;
  const auto& fleet = inst.fleet();
  const auto& prices = inst.prices();
  const double delta = prices.period_length;
  const double full = inst.full_charge_time();
  const int id = (*route_)[static_cast<std::size_t>(next_)];
  const auto& node = inst.node(id);
  const bool last = next_ + 1 == static_cast<int>(route_->size());

  double arrival = node.ready;
  if (next_ == 0) {
    battery_ = full;
    cargo_ = fleet.cargo_capacity;
  } else {
    const int prev = (*route_)[static_cast<std::size_t>(next_ - 1)];
    arrival = std::max(node.ready, departure_ + inst.travel_time(prev, id));
    battery_ = battery_after_ - inst.charge_time(prev, id);
    cargo_ -= inst.node(prev).demand;
  }
  arrival = std::max(arrival, 0.0);

  if (arrival > node.due + kFeasibilityTolerance) {
    std::ostringstream d;
    d << "arrival " << arrival << " after window end " << node.due;
    fail("time-window", -1, d.str());
  }
  if (battery_ < -kFeasibilityTolerance) {
    std::ostringstream d;
    d << "battery " << battery_ << " below zero on arrival";
    fail("battery-bounds", -1, d.str());
  }
  if (cargo_ < -kFeasibilityTolerance) {
    std::ostringstream d;
    d << "cargo " << cargo_ << " below zero on arrival";
    fail("cargo", -1, d.str());
  }

  int charges = 0;
  int discharges = 0;
  int last_period = 0;
  int prev_period = 0;
  for (const auto& pa : actions) {
    if (pa.action == Action::Idle) continue;
    if (!inst.is_charge_capable(id)) {
      fail("structure", pa.period, "charging action at a customer");
      continue;
    }
    if (pa.period < 1 || pa.period > prices.period_count()) {
      fail("structure", pa.period, "period outside the horizon");
      continue;
    }
    if (pa.period <= prev_period) {
      fail("exclusivity", pa.period, "period used twice or out of order");
      continue;
    }
    prev_period = pa.period;
    if (arrival > (pa.period - 1) * delta + kFeasibilityTolerance) {
      std::ostringstream d;
      d << "action starts at " << (pa.period - 1) * delta << " before arrival " << arrival;
      fail("no-action-before-arrival", pa.period, d.str());
    }
    const auto price = price_at(prices, pa.period);
    if (pa.action == Action::Charge) {
      ++charges;
      objective_ += price.charge;
    } else {
      ++discharges;
      objective_ -= price.discharge;
    }
    last_period = std::max(last_period, pa.period);
  }
  if (charges * delta > full - battery_ + kFeasibilityTolerance) {
    fail("charge-capacity", -1, "charging beyond battery capacity");
  }
  if (discharges * delta > battery_ + kFeasibilityTolerance) {
    fail("discharge-capacity", -1, "discharging below empty");
  }
  battery_after_ = battery_ + delta * (charges - discharges);
  departure_ = std::max(arrival + node.service, last_period * delta);
  if (last) objective_ += prices.night * (full - battery_after_) / delta;

  trace_.arrival.push_back(arrival);
  trace_.battery.push_back(battery_);
  trace_.cargo.push_back(cargo_);
  trace_.departure.push_back(departure_);
  trace_.objective = objective_;
  ++next_;
  return ok();
}

RouteTrace simulate_route(const Instance& inst, const Route& route, const ChargePlan& plan,
                          int route_index, std::vector<ConstraintViolation>* out) {
  RouteSimulator sim(inst, route, route_index);
  std::vector<ConstraintViolation> extra;
  for (const auto& v : plan.visits) {
    if (v.position < 0 || v.position >= static_cast<int>(route.size())) {
      ConstraintViolation w;
      w.constraint = "structure";
      w.route = route_index;
      w.position = v.position;
      w.detail = "plan refers to a position outside the route";
      extra.push_back(std::move(w));
    }
  }
  while (!sim.done()) {
    const auto* visit = plan.at(sim.next_position());
    if (visit) {
      sim.advance(visit->actions);
    } else {
      sim.advance({});
    }
  }
  if (out) {
    out->insert(out->end(), extra.begin(), extra.end());
    out->insert(out->end(), sim.witnesses().begin(), sim.witnesses().end());
  }
  return sim.trace();
}

VerificationReport verify_full(const Instance& inst, const Solution& solution) {
  VerificationReport report;
  auto add = [&](std::string constraint, int route, int node, std::string detail) {
    ConstraintViolation v;
    v.constraint = std::move(constraint);
    v.route = route;
    v.node = node;
    v.detail = std::move(detail);
    report.violations.push_back(std::move(v));
  };

  if (static_cast<int>(solution.routes.size()) > inst.fleet().vehicles) {
    add("fleet-size", -1, -1,
        std::to_string(solution.routes.size()) + " routes for " +
            std::to_string(inst.fleet().vehicles) + " vehicles");
  }
  if (solution.plans.size() != solution.routes.size()) {
    add("structure", -1, -1, "number of charge plans differs from number of routes");
  }

  std::vector<int> visits(static_cast<std::size_t>(inst.node_count()), 0);
  for (std::size_t r = 0; r < solution.routes.size(); ++r) {
    const auto& route = solution.routes[r];
    const int ri = static_cast<int>(r);
    for (int id : route) {
      if (id >= 0 && id < inst.node_count()) ++visits[static_cast<std::size_t>(id)];
    }
    try {
      check_route_structure(inst, route);
    } catch (const StructuralError& e) {
      add("structure", ri, -1, e.what());
      report.traces.emplace_back();
      continue;
    }
    static const ChargePlan kNoPlan;
    const auto& plan = r < solution.plans.size() ? solution.plans[r] : kNoPlan;
    auto trace = simulate_route(inst, route, plan, ri, &report.violations);
    report.objective += trace.objective;
    report.traces.push_back(std::move(trace));
  }

  for (int id = 0; id < inst.node_count(); ++id) {
    if (!inst.is_customer(id)) continue;
    const int n = visits[static_cast<std::size_t>(id)];
    if (n != 1) {
      add("coverage", -1, id,
          "customer " + inst.node(id).name + " served " + std::to_string(n) + " times");
    }
  }
  report.feasible = report.violations.empty();
  return report;
}

}  // namespace evrptw
