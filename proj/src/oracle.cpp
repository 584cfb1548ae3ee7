#include "evrptw/oracle.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "evrptw/error.h"

namespace evrptw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Whether inserting a node into an edge can never shorten it. Prefix pruning
// on time windows is only exact under this condition.
bool satisfies_triangle_inequality(const Instance& inst) {
  if (!inst.has_explicit_distances()) return true;
  const int n = inst.node_count();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        if (inst.distance(i, j) > inst.distance(i, k) + inst.distance(k, j) + 1e-9) return false;
      }
    }
  }
  return true;
}

struct SubsetBest {
  double cost = kInf;
  Route route;
  ChargePlan plan;
};

class Enumerator {
 public:
  Enumerator(const Instance& inst, const SearchCaps& caps)
      : inst_(inst), caps_(caps), metric_(satisfies_triangle_inequality(inst)) {
    best_.resize(std::size_t{1} << inst.customer_count());
    for (int s = 0; s < inst.station_count(); ++s) stations_.push_back(inst.customer_count() + 1 + s);
  }

  void run() {
    std::vector<int> seq;
    expand(seq, 0, 0.0, 0.0);
  }

  std::vector<SubsetBest>& best() { return best_; }
  OracleCounters& counters() { return counters_; }

 private:
  void expand(std::vector<int>& seq, unsigned mask, double load, double departure) {
    ++counters_.customer_sequences;
    with_stations(seq, mask);
    const int last = seq.empty() ? inst_.depot_start() : seq.back();
    for (int c = 1; c <= inst_.customer_count(); ++c) {
      const unsigned bit = 1u << (c - 1);
      if (mask & bit) continue;
      const auto& node = inst_.node(c);
      if (load + node.demand > inst_.fleet().cargo_capacity + kFeasibilityTolerance) continue;
      const double arrival = std::max(node.ready, departure + inst_.travel_time(last, c));
      if (metric_) {
        if (arrival > node.due + kFeasibilityTolerance) continue;
        const double back = arrival + node.service + inst_.travel_time(c, inst_.depot_end());
        if (back > inst_.node(inst_.depot_end()).due + kFeasibilityTolerance) continue;
      }
      seq.push_back(c);
      expand(seq, mask | bit, load + node.demand, arrival + node.service);
      seq.pop_back();
    }
  }

  // Every placement of up to two station visits into the gaps of `seq`.
  void with_stations(const std::vector<int>& seq, unsigned mask) {
    const int gaps = static_cast<int>(seq.size()) + 1;
    consider(build(seq, {}), mask);
    for (int g1 = 0; g1 < gaps; ++g1) {
      for (int s1 : stations_) {
        consider(build(seq, {{g1, s1}}), mask);
        if (caps_.max_stations_per_route < 2) continue;
        for (int g2 = g1; g2 < gaps; ++g2) {
          for (int s2 : stations_) {
            if (g2 == g1 && s2 == s1) continue;
            consider(build(seq, {{g1, s1}, {g2, s2}}), mask);
          }
        }
      }
    }
  }

  Route build(const std::vector<int>& seq, std::vector<std::pair<int, int>> inserts) const {
    Route r{inst_.depot_start()};
    std::size_t next = 0;
    for (int g = 0; g <= static_cast<int>(seq.size()); ++g) {
      while (next < inserts.size() && inserts[next].first == g) r.push_back(inserts[next++].second);
      if (g < static_cast<int>(seq.size())) r.push_back(seq[static_cast<std::size_t>(g)]);
    }
    r.push_back(inst_.depot_end());
    return r;
  }

  void consider(const Route& route, unsigned mask) {
    ++counters_.candidate_routes;
    const auto m = compute_metrics(inst_, route);
    if (route_violations(inst_, route, m).any(kFeasibilityTolerance)) return;
    if (++counters_.priced_routes > caps_.max_routes) {
      throw GuardExceeded("candidate routes", caps_.max_routes, counters_.priced_routes);
    }
    auto priced = price_route(inst_, route, m);
    if (!priced.priced()) return;
    ++counters_.feasible_routes;
    auto& slot = best_[mask];
    if (priced.f_elec < slot.cost - 1e-9) {
      slot.cost = priced.f_elec;
      slot.route = route;
      slot.plan = std::move(priced.plan);
    }
  }

  const Instance& inst_;
  SearchCaps caps_;
  bool metric_;
  std::vector<int> stations_;
  std::vector<SubsetBest> best_;
  OracleCounters counters_;
};

}  // namespace

OracleResult exact_search(const Instance& inst, int vehicles, const SearchCaps& caps) {
  if (vehicles < 1) throw Error("fleet size must be positive");
  if (inst.customer_count() > caps.max_customers) {
    throw GuardExceeded("customers", caps.max_customers, inst.customer_count());
  }
  if (inst.customer_count() > 20) throw GuardExceeded("customers", 20, inst.customer_count());
  Enumerator e(inst, caps);
  e.run();
  auto& best = e.best();
  OracleResult out;
  out.counters = e.counters();
  for (const auto& b : best) out.counters.covered_subsets += b.cost < kInf;

  // value[k][mask]: cheapest way to serve exactly `mask` with k vehicles, idle
  // vehicles included as routes over the empty subset.
  const std::size_t full = best.size() - 1;
  std::vector<std::vector<double>> value(static_cast<std::size_t>(vehicles) + 1,
                                         std::vector<double>(best.size(), kInf));
  std::vector<std::vector<std::size_t>> choice(value.size(), std::vector<std::size_t>(best.size(), 0));
  value[0][0] = 0.0;
  for (std::size_t k = 1; k <= static_cast<std::size_t>(vehicles); ++k) {
    for (std::size_t mask = 0; mask <= full; ++mask) {
      // Enumerate submasks including the empty one.
      std::size_t sub = mask;
      while (true) {
        const double c = best[sub].cost;
        const double rest = value[k - 1][mask ^ sub];
        if (c < kInf && rest < kInf && c + rest < value[k][mask] - 1e-9) {
          value[k][mask] = c + rest;
          choice[k][mask] = sub;
        }
        if (sub == 0) break;
        sub = (sub - 1) & mask;
      }
    }
  }
  if (value[static_cast<std::size_t>(vehicles)][full] == kInf) return out;

  out.feasible = true;
  out.f_elec = value[static_cast<std::size_t>(vehicles)][full];
  std::size_t mask = full;
  for (std::size_t k = static_cast<std::size_t>(vehicles); k >= 1; --k) {
    const std::size_t sub = choice[k][mask];
    out.solution.routes.push_back(best[sub].route);
    out.solution.plans.push_back(best[sub].plan);
    mask ^= sub;
  }
  return out;
}

namespace {

// Restricted-model rules, stated directly from the case definitions.
struct BruteRules {
  std::vector<bool> may_charge;
  std::vector<bool> may_discharge;
  std::optional<int> net_charge;  // required charge minus discharge periods
  ScheduleCase tag = ScheduleCase::ZeroStation;
};

BruteRules rules_for(const Instance& inst, const Route& route, const RouteMetrics& m,
                     const std::vector<int>& visits) {
  BruteRules r;
  double need = -inst.full_charge_time();
  int stations = 0;
  for (int pos : visits) {
    if (pos > 0) need += m.energy[static_cast<std::size_t>(pos)];
    stations += inst.is_station(route[static_cast<std::size_t>(pos)]);
  }
  const double delta = inst.prices().period_length;
  const int periods_needed = static_cast<int>(std::ceil(need / delta - 1e-9));
  const std::size_t n = visits.size();
  r.may_charge.assign(n, false);
  r.may_discharge.assign(n, true);
  if (stations == 1) {
    r.tag = ScheduleCase::OneStation;
    r.may_charge[1] = true;
    if (need >= -1e-9) r.net_charge = std::max(0, periods_needed);
  } else if (stations == 2) {
    if (need > 1e-9) {
      r.tag = ScheduleCase::TwoStationRecharge;
      r.may_discharge.assign(n, false);
      r.may_charge[1] = r.may_charge[2] = true;
      r.net_charge = periods_needed;
    } else {
      r.tag = ScheduleCase::TwoStationDischarge;
    }
  }
  return r;
}

struct BruteSearch {
  const Instance& inst;
  const Route& route;
  const std::vector<int>& visits;
  const std::vector<std::vector<int>>& windows;
  const BruteRules& rules;
  int max_per_visit;
  double best = kInf;
  ChargePlan best_plan;
  std::vector<VisitPlan> current;

  // Simulates customers (and nothing else) up to the next charge-capable visit.
  bool run_to(RouteSimulator& sim, int position) {
    while (sim.next_position() < position) {
      if (!sim.advance({})) return false;
    }
    return true;
  }

  void visit(std::size_t v, RouteSimulator sim, int net) {
    if (v == visits.size()) {
      if (rules.net_charge && net != *rules.net_charge) return;
      if (sim.objective() < best - 1e-12) {
        best = sim.objective();
        best_plan.visits.clear();
        for (const auto& vp : current) {
          if (!vp.actions.empty()) best_plan.visits.push_back(vp);
        }
      }
      return;
    }
    if (!run_to(sim, visits[v])) return;
    VisitPlan vp;
    vp.position = visits[v];
    choose(v, 0, sim, net, vp);
  }

  void choose(std::size_t v, std::size_t k, const RouteSimulator& sim, int net, VisitPlan& vp) {
    const auto& window = windows[v];
    if (k == window.size()) {
      RouteSimulator next = sim;
      if (!next.advance(vp.actions)) return;
      int delta_net = 0;
      for (const auto& pa : vp.actions) delta_net += pa.action == Action::Charge ? 1 : -1;
      current.push_back(vp);
      visit(v + 1, next, net + delta_net);
      current.pop_back();
      return;
    }
    for (Action a : {Action::Idle, Action::Charge, Action::Discharge}) {
      if (a != Action::Idle) {
        if (a == Action::Charge && !rules.may_charge[v]) continue;
        if (a == Action::Discharge && !rules.may_discharge[v]) continue;
        // One action type per visit.
        if (!vp.actions.empty() && vp.actions.front().action != a) continue;
        if (static_cast<int>(vp.actions.size()) >= max_per_visit) continue;
        vp.actions.push_back({window[k], a});
      }
      choose(v, k + 1, sim, net, vp);
      if (a != Action::Idle) vp.actions.pop_back();
    }
  }
};

}  // namespace

PricedRoute schedule_bruteforce(const Instance& inst, const Route& route, const RouteMetrics& m,
                                int window_cap) {
  check_route_structure(inst, route);
  if (station_visits(inst, route) > 2) throw StructuralError("route visits more than two stations");
  const auto visits = charge_capable_positions(inst, route);
  const auto& prices = inst.prices();
  const double delta = prices.period_length;
  std::vector<std::vector<int>> windows;
  for (int pos : visits) {
    const auto p = static_cast<std::size_t>(pos);
    const int lo = static_cast<int>(std::floor(m.earliest[p] / delta)) + 1;
    const int hi = std::min(static_cast<int>(std::floor(m.latest[p] / delta)) + 1,
                            prices.period_count());
    std::vector<int> w;
    for (int t = std::max(1, lo); t <= hi; ++t) w.push_back(t);
    if (static_cast<int>(w.size()) > window_cap) {
      throw GuardExceeded("window periods", window_cap, static_cast<long long>(w.size()));
    }
    windows.push_back(std::move(w));
  }
  const auto rules = rules_for(inst, route, m, visits);
  BruteSearch search{inst, route, visits, windows, rules,
                     static_cast<int>(std::floor(inst.full_charge_time() / delta + 1e-9)),
                     kInf, {}, {}};
  search.visit(0, RouteSimulator(inst, route), 0);

  PricedRoute out;
  out.route = route;
  out.tag = rules.tag;
  if (search.best == kInf) {
    double energy = 0.0;
    for (int pos : visits) energy += m.energy[static_cast<std::size_t>(pos)];
    out.status = ScheduleStatus::NoPlan;
    out.f_elec = prices.night * energy / delta;
    return out;
  }
  out.plan = std::move(search.best_plan);
  out.f_elec = search.best;
  return out;
}

}  // namespace evrptw
