#include "evrptw/charge_sched.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>

#include "evrptw/error.h"

namespace evrptw {

namespace {

constexpr double kTol = kFeasibilityTolerance;
constexpr double kCostEps = 1e-9;

int first_period_after(double time, double delta) {
  return std::max(1, static_cast<int>(std::ceil((time - kTol) / delta)) + 1);
}

int last_period_before(double time, double delta, int count) {
  return std::min(count, static_cast<int>(std::floor((time + kTol) / delta)));
}

double total_energy(const Instance& inst, const Route& route, const RouteMetrics& m) {
  double total = 0.0;
  for (std::size_t i = 1; i < route.size(); ++i) {
    if (inst.is_charge_capable(route[i])) total += m.energy[i];
  }
  return total;
}

struct VisitRule {
  bool charge = false;
  bool discharge = false;
};

struct Policy {
  std::vector<VisitRule> rules;  // one per charge-capable visit
  std::optional<int> net_target;  // required charge periods minus discharge periods
};

struct DpState {
  double cost = 0.0;     // prices paid minus rewards earned so far
  double battery = 0.0;  // on arrival at the current visit
  int net = 0;           // charge periods minus discharge periods so far
  std::vector<VisitPlan> plan;
};

// Chooses, for a fixed last period, the best `extra` periods strictly before it
// within [lo, last-1]. Ties go to earlier periods.
std::vector<int> best_periods(const PriceSchedule& prices, Action type, int lo, int last,
                              int extra) {
  std::vector<int> candidates;
  for (int t = lo; t < last; ++t) candidates.push_back(t);
  auto value = [&](int t) {
    const auto& p = prices.periods[static_cast<std::size_t>(t - 1)];
    return type == Action::Charge ? p.charge : -p.discharge;
  };
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](int a, int b) { return value(a) < value(b); });
  candidates.resize(static_cast<std::size_t>(extra));
  std::sort(candidates.begin(), candidates.end());
  return candidates;
}

// Propagates from a departure at position `from` to the arrival at the next
// charge-capable position `to`. Returns nullopt if a window is missed.
std::optional<double> propagate(const Instance& inst, const Route& route, int from, int to,
                                double departure) {
  double dep = departure;
  for (int p = from + 1; p <= to; ++p) {
    const auto& node = inst.node(route[static_cast<std::size_t>(p)]);
    const double arrival =
        std::max(node.ready, dep + inst.travel_time(route[static_cast<std::size_t>(p - 1)], node.id));
    if (arrival > node.due + kTol) return std::nullopt;
    if (p == to) return arrival;
    dep = arrival + node.service;
  }
  return std::nullopt;
}

// Exact dynamic program over the charge-capable visits. State: arrival time at
// the visit and the net number of charge periods so far. Within one visit only
// the last action period affects timing, so for each (type, count, last period)
// the remaining periods are the best-priced ones before it.
std::optional<DpState> solve_policy(const Instance& inst, const Route& route,
                                    const RouteMetrics& m, const std::vector<int>& visits,
                                    const Policy& policy) {
  const auto& prices = inst.prices();
  const double delta = prices.period_length;
  const double full = inst.full_charge_time();
  const int count = prices.period_count();

  using Key = std::pair<int, double>;  // (net, arrival)
  std::map<Key, DpState> layer;
  DpState start;
  start.battery = full;
  layer.emplace(Key{0, std::max(0.0, inst.node(route.front()).ready)}, std::move(start));

  for (std::size_t v = 0; v < visits.size(); ++v) {
    const int pos = visits[v];
    const bool last_visit = v + 1 == visits.size();
    const auto& rule = policy.rules[v];
    std::map<Key, DpState> next;

    auto offer = [&](const DpState& from, double arrival, double departure, Action type,
                     std::vector<int> periods, double price_delta) {
      const int c = static_cast<int>(periods.size());
      DpState s;
      s.cost = from.cost + price_delta;
      s.net = from.net + (type == Action::Charge ? c : type == Action::Discharge ? -c : 0);
      s.plan = from.plan;
      if (c > 0) {
        VisitPlan vp;
        vp.position = pos;
        for (int t : periods) vp.actions.push_back({t, type});
        s.plan.push_back(std::move(vp));
      }
      const double after = from.battery + delta * (s.net - from.net);
      double key_time = 0.0;
      if (!last_visit) {
        const int to = visits[v + 1];
        auto arr = propagate(inst, route, pos, to, departure);
        if (!arr) return;
        s.battery = after - m.energy[static_cast<std::size_t>(to)];
        if (s.battery < -kTol) return;
        key_time = *arr;
      } else {
        s.battery = after;
      }
      (void)arrival;
      Key key{s.net, key_time};
      auto it = next.find(key);
      if (it == next.end()) {
        next.emplace(key, std::move(s));
      } else if (s.cost < it->second.cost - kCostEps) {
        it->second = std::move(s);
      }
    };

    for (const auto& [key, state] : layer) {
      const double arrival = key.second;
      const double service = inst.node(route[static_cast<std::size_t>(pos)]).service;
      offer(state, arrival, arrival + service, Action::Idle, {}, 0.0);

      const int lo = first_period_after(arrival, delta);
      const int hi = last_period_before(m.latest[static_cast<std::size_t>(pos)], delta, count);
      if (hi < lo) continue;
      for (Action type : {Action::Charge, Action::Discharge}) {
        if (type == Action::Charge && !rule.charge) continue;
        if (type == Action::Discharge && !rule.discharge) continue;
        const double room = type == Action::Charge ? full - state.battery : state.battery;
        const int cap = std::min(hi - lo + 1, static_cast<int>(std::floor((room + kTol) / delta)));
        for (int c = 1; c <= cap; ++c) {
          for (int last = lo + c - 1; last <= hi; ++last) {
            auto periods = best_periods(prices, type, lo, last, c - 1);
            periods.push_back(last);
            double price_delta = 0.0;
            for (int t : periods) {
              const auto& p = prices.periods[static_cast<std::size_t>(t - 1)];
              price_delta += type == Action::Charge ? p.charge : -p.discharge;
            }
            const double departure = std::max(arrival + service, last * delta);
            offer(state, arrival, departure, type, std::move(periods), price_delta);
          }
        }
      }
    }
    layer = std::move(next);
    if (layer.empty()) return std::nullopt;
  }

  const double f_tot = total_energy(inst, route, m);
  std::optional<DpState> best;
  double best_total = 0.0;
  for (auto& [key, state] : layer) {
    if (policy.net_target && state.net != *policy.net_target) continue;
    const double total = state.cost + prices.night * (f_tot / delta - state.net);
    if (!best || total < best_total - kCostEps) {
      best_total = total;
      best = state;
    }
  }
  if (best) best->cost = best_total;
  return best;
}

int sum_actions(const ChargePlan& plan, int position, Action a) {
  const auto* v = plan.at(position);
  if (!v) return 0;
  return static_cast<int>(std::count_if(v->actions.begin(), v->actions.end(),
                                        [&](const PlannedAction& pa) { return pa.action == a; }));
}

double sum_prices(const Instance& inst, const ChargePlan& plan, Action a) {
  double total = 0.0;
  for (const auto& v : plan.visits) {
    for (const auto& pa : v.actions) {
      if (pa.action != a) continue;
      const auto p = price_at(inst.prices(), pa.period);
      total += a == Action::Charge ? p.charge : p.discharge;
    }
  }
  return total;
}

int required_periods(double deficit, double delta) {
  return static_cast<int>(std::ceil(deficit / delta - 1e-9));
}

PricedRoute unscheduled(const Instance& inst, const Route& route, const RouteMetrics& m,
                        ScheduleCase tag, ScheduleStatus status) {
  PricedRoute out;
  out.route = route;
  out.tag = tag;
  out.status = status;
  out.f_elec = inst.prices().night * total_energy(inst, route, m) / inst.prices().period_length;
  return out;
}

PricedRoute run_case(const Instance& inst, const Route& route, const RouteMetrics& m,
                     ScheduleCase tag, const Policy& policy) {
  const auto visits = charge_capable_positions(inst, route);
  auto best = solve_policy(inst, route, m, visits, policy);
  if (!best) return unscheduled(inst, route, m, tag, ScheduleStatus::NoPlan);
  PricedRoute out;
  out.route = route;
  out.tag = tag;
  out.plan.visits = std::move(best->plan);
  out.f_elec = case_cost(inst, route, m, out.plan, tag);
  if (std::abs(out.f_elec - best->cost) > 1e-7 * std::max(1.0, std::abs(best->cost))) {
    throw std::logic_error("schedule cost disagrees with its closed form");
  }
  return out;
}

void require_stations(const Instance& inst, const Route& route, int expected) {
  check_route_structure(inst, route);
  const int s = station_visits(inst, route);
  if (s != expected) {
    throw StructuralError("route has " + std::to_string(s) + " station visits, expected " +
                          std::to_string(expected));
  }
}

}  // namespace

const char* case_name(ScheduleCase c) {
  switch (c) {
    case ScheduleCase::ZeroStation: return "zero-station";
    case ScheduleCase::OneStation: return "one-station";
    case ScheduleCase::TwoStationRecharge: return "two-station-recharge";
    case ScheduleCase::TwoStationDischarge: return "two-station-discharge";
  }
  return "?";
}

std::vector<int> PeriodRange::periods() const {
  std::vector<int> out;
  for (int t = first; t <= last; ++t) out.push_back(t);
  return out;
}

PeriodRange connected_periods(const Instance& inst, const RouteMetrics& m, int position) {
  const auto& prices = inst.prices();
  const auto p = static_cast<std::size_t>(position);
  return {first_period_after(m.earliest[p], prices.period_length),
          last_period_before(m.latest[p], prices.period_length, prices.period_count())};
}

std::vector<int> mutually_exclusive(const Instance& inst, const RouteMetrics& m, int i, int j,
                                    int t) {
  const double delta = inst.prices().period_length;
  const auto pi = static_cast<std::size_t>(i);
  const auto pj = static_cast<std::size_t>(j);
  const double reach = m.earliest[pi] + m.forward_slack[pj];
  std::vector<int> out;
  if (delta * t <= reach + kTol) return out;
  const double bound = m.earliest[pj] + delta * t - reach;
  for (int tp : connected_periods(inst, m, j).periods()) {
    if (delta * (tp - 1) < bound - kTol) out.push_back(tp);
  }
  return out;
}

ScheduleProblem build_schedule_problem(const Instance& inst, const Route& route,
                                       const RouteMetrics& m) {
  ScheduleProblem sp;
  const double delta = inst.prices().period_length;
  sp.visits = charge_capable_positions(inst, route);
  for (int pos : sp.visits) sp.periods.push_back(connected_periods(inst, m, pos));
  sp.total_energy = total_energy(inst, route, m);
  sp.deficit = sp.total_energy - inst.full_charge_time();
  if (sp.deficit > kCostEps) {
    sp.required = required_periods(sp.deficit, delta);
  } else {
    sp.budget = static_cast<int>(std::floor(-sp.deficit / delta + 1e-9));
  }
  const int s = station_visits(inst, route);
  if (s == 0) {
    sp.tag = ScheduleCase::ZeroStation;
  } else if (s == 1) {
    sp.tag = ScheduleCase::OneStation;
  } else {
    sp.tag = sp.deficit > kCostEps ? ScheduleCase::TwoStationRecharge
                                   : ScheduleCase::TwoStationDischarge;
  }
  return sp;
}

double case_cost(const Instance& inst, const Route& route, const RouteMetrics& m,
                 const ChargePlan& plan, ScheduleCase tag) {
  const double delta = inst.prices().period_length;
  const double night = inst.prices().night;
  const auto visits = charge_capable_positions(inst, route);
  const double rewards = sum_prices(inst, plan, Action::Discharge);
  const double costs = sum_prices(inst, plan, Action::Charge);
  int d = 0;
  int r = 0;
  for (int pos : visits) {
    d += sum_actions(plan, pos, Action::Discharge);
    r += sum_actions(plan, pos, Action::Charge);
  }
  const double energy = total_energy(inst, route, m) / delta;
  switch (tag) {
    case ScheduleCase::ZeroStation:
      return -rewards + (energy + d) * night;
    case ScheduleCase::OneStation:
      return -(rewards - costs) + (energy + d - r) * night;
    case ScheduleCase::TwoStationRecharge:
      return costs + (energy - r) * night;
    case ScheduleCase::TwoStationDischarge:
      return -rewards + (energy + d) * night;
  }
  return 0.0;
}

PricedRoute schedule_zero_station(const Instance& inst, const Route& route,
                                  const RouteMetrics& m) {
  require_stations(inst, route, 0);
  if (m.energy.back() > inst.full_charge_time() + kTol) {
    return unscheduled(inst, route, m, ScheduleCase::ZeroStation, ScheduleStatus::NoPlan);
  }
  Policy policy;
  policy.rules = {{false, true}, {false, true}};
  return run_case(inst, route, m, ScheduleCase::ZeroStation, policy);
}

PricedRoute schedule_one_station(const Instance& inst, const Route& route,
                                 const RouteMetrics& m) {
  require_stations(inst, route, 1);
  const double delta = inst.prices().period_length;
  const double deficit = total_energy(inst, route, m) - inst.full_charge_time();
  Policy policy;
  policy.rules = {{false, true}, {true, true}, {false, true}};
  if (deficit >= -kCostEps) policy.net_target = std::max(0, required_periods(deficit, delta));
  return run_case(inst, route, m, ScheduleCase::OneStation, policy);
}

PricedRoute schedule_two_station(const Instance& inst, const Route& route,
                                 const RouteMetrics& m) {
  require_stations(inst, route, 2);
  const double delta = inst.prices().period_length;
  const double deficit = total_energy(inst, route, m) - inst.full_charge_time();
  Policy policy;
  if (deficit > kCostEps) {
    policy.rules = {{false, false}, {true, false}, {true, false}, {false, false}};
    policy.net_target = required_periods(deficit, delta);
    return run_case(inst, route, m, ScheduleCase::TwoStationRecharge, policy);
  }
  policy.rules = {{false, true}, {false, true}, {false, true}, {false, true}};
  return run_case(inst, route, m, ScheduleCase::TwoStationDischarge, policy);
}

PricedRoute price_route(const Instance& inst, const Route& route, const RouteMetrics& m) {
  check_route_structure(inst, route);
  const int s = station_visits(inst, route);
  if (s > 2) throw StructuralError("route visits more than two stations");
  const auto sp_tag = build_schedule_problem(inst, route, m).tag;
  if (tw_violation(inst, route, m) > kTol || battery_violation(inst, route, m) > kTol) {
    return unscheduled(inst, route, m, sp_tag, ScheduleStatus::Unscheduled);
  }
  if (s == 0) return schedule_zero_station(inst, route, m);
  if (s == 1) return schedule_one_station(inst, route, m);
  return schedule_two_station(inst, route, m);
}

PricedRoute price_route(const Instance& inst, const Route& route) {
  return price_route(inst, route, compute_metrics(inst, route));
}

RouteAssessment assess_route(const Instance& inst, const Route& route, const Betas& betas) {
  const auto m = compute_metrics(inst, route);
  RouteAssessment out;
  out.priced = price_route(inst, route, m);
  out.phi = route_violations(inst, route, m);
  if (out.priced.status == ScheduleStatus::NoPlan) {
    out.phi.batt += std::max(0.0, total_energy(inst, route, m) - inst.full_charge_time());
  }
  out.f_gen = f_gen(out.priced.f_elec, out.phi, betas);
  return out;
}

SolutionCost evaluate_solution(const Instance& inst, Solution& solution, const Betas& betas) {
  SolutionCost cost;
  solution.plans.assign(solution.routes.size(), ChargePlan{});
  for (std::size_t r = 0; r < solution.routes.size(); ++r) {
    auto a = assess_route(inst, solution.routes[r], betas);
    cost.f_elec += a.priced.f_elec;
    cost.phi += a.phi;
    solution.plans[r] = std::move(a.priced.plan);
  }
  cost.f_gen = f_gen(cost.f_elec, cost.phi, betas);
  return cost;
}

}  // namespace evrptw
