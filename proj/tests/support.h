#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "evrptw/charge_sched.h"
#include "evrptw/instance.h"
#include "evrptw/route_eval.h"

namespace testing {

using namespace evrptw;

inline std::string data_dir() { return EVRPTW_DATA_DIR; }

inline Instance roster_instance(const std::string& name) {
  const auto dash = name.find('-');
  return load_instance(data_dir() + "/instances/n" + name.substr(dash + 1) + "/" + name + ".txt");
}

inline PriceSchedule flat_prices(double charge, double discharge, double night, int periods = 19,
                                 double delta = 60.0) {
  PriceSchedule p;
  p.period_length = delta;
  p.periods.assign(static_cast<std::size_t>(periods), PeriodPrice{charge, discharge});
  p.night = night;
  return p;
}

struct NodeSpec {
  NodeKind kind;
  double x = 0.0;
  double y = 0.0;
  double demand = 0.0;
  double ready = 0.0;
  double due = -1.0;  // -1: horizon
  double service = 0.0;
};

inline FleetParams fleet(int k, double cargo, double battery_minutes, double alpha = 1.0) {
  FleetParams f;
  f.vehicles = k;
  f.cargo_capacity = cargo;
  f.recharge_rate = alpha;
  f.battery_capacity = battery_minutes / alpha;
  f.consumption_rate = 1.0;
  f.velocity = 1.0;
  return f;
}

// Nodes are given without the end depot; the start depot is copied to the
// end. Customers must precede stations.
inline Instance build(std::vector<NodeSpec> specs, FleetParams f, PriceSchedule prices,
                      std::optional<std::vector<std::vector<double>>> matrix = {}) {
  std::vector<Node> nodes;
  int customers = 0, stations = 0;
  for (const auto& s : specs) {
    Node n;
    n.kind = s.kind;
    n.x = s.x;
    n.y = s.y;
    n.demand = s.demand;
    n.ready = s.ready;
    n.due = s.due < 0 ? prices.horizon() : s.due;
    n.service = s.service;
    if (s.kind == NodeKind::Customer) n.name = "C" + std::to_string(++customers);
    if (s.kind == NodeKind::Station) n.name = "S" + std::to_string(++stations);
    if (s.kind == NodeKind::DepotStart) n.name = "D0";
    nodes.push_back(n);
  }
  Node end = nodes.front();
  end.kind = NodeKind::DepotEnd;
  nodes.push_back(end);
  if (matrix) {
    // The matrix covers the listed nodes; the end depot copies row/column 0.
    auto& m = *matrix;
    for (auto& row : m) row.push_back(row[0]);
    m.push_back(m[0]);
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i].id = static_cast<int>(i);
  return Instance("toy", std::move(nodes), f, std::move(prices), std::move(matrix));
}

// Nodes on a line: position p_i, distance |p_i - p_j|.
inline std::vector<std::vector<double>> line_matrix(const std::vector<double>& pos) {
  std::vector<std::vector<double>> m(pos.size(), std::vector<double>(pos.size()));
  for (std::size_t i = 0; i < pos.size(); ++i) {
    for (std::size_t j = 0; j < pos.size(); ++j) m[i][j] = std::abs(pos[i] - pos[j]);
  }
  return m;
}

inline int total_count(const ChargePlan& plan, Action a) { return plan.count(a); }

inline bool close(double a, double b, double rel = 1e-9) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

// All customer ids 1..N.
inline std::vector<int> customer_ids(const Instance& inst) {
  std::vector<int> ids;
  for (int c = 1; c <= inst.customer_count(); ++c) ids.push_back(c);
  return ids;
}

inline std::vector<int> station_ids(const Instance& inst) {
  std::vector<int> ids;
  for (int s = inst.customer_count() + 1; s < inst.depot_end(); ++s) ids.push_back(s);
  return ids;
}

// Every way of placing at most two station visits into the gaps of a
// customer sequence (no station twice in the same gap).
inline std::vector<Route> with_stations(const Instance& inst, const std::vector<int>& seq) {
  std::vector<Route> out;
  const auto st = station_ids(inst);
  const int gaps = static_cast<int>(seq.size()) + 1;
  auto assemble = [&](const std::vector<std::vector<int>>& ins) {
    Route r{inst.depot_start()};
    for (int g = 0; g < gaps; ++g) {
      for (int s : ins[static_cast<std::size_t>(g)]) r.push_back(s);
      if (g < static_cast<int>(seq.size())) r.push_back(seq[static_cast<std::size_t>(g)]);
    }
    r.push_back(inst.depot_end());
    return r;
  };
  std::vector<std::vector<int>> ins(static_cast<std::size_t>(gaps));
  out.push_back(assemble(ins));
  for (int g1 = 0; g1 < gaps; ++g1) {
    for (int s1 : st) {
      ins[static_cast<std::size_t>(g1)].push_back(s1);
      out.push_back(assemble(ins));
      for (int g2 = g1; g2 < gaps; ++g2) {
        for (int s2 : st) {
          if (g2 == g1 && s2 == s1) continue;
          ins[static_cast<std::size_t>(g2)].push_back(s2);
          out.push_back(assemble(ins));
          ins[static_cast<std::size_t>(g2)].pop_back();
        }
      }
      ins[static_cast<std::size_t>(g1)].pop_back();
    }
  }
  return out;
}

// Cost of a route when it is feasible and schedulable.
inline std::optional<double> feasible_route_cost(const Instance& inst, const Route& r) {
  const auto m = compute_metrics(inst, r);
  if (route_violations(inst, r, m).any(kFeasibilityTolerance)) return std::nullopt;
  const auto p = price_route(inst, r, m);
  if (!p.priced()) return std::nullopt;
  return p.f_elec;
}

}  // namespace testing

namespace testing {

// A small random instance with one route through it, built so that every
// charge-capable visit has a short window. Used to compare the case programs
// with exhaustive enumeration.
struct ScheduleCaseSample {
  Instance inst;
  Route route;
};

inline std::optional<ScheduleCaseSample> random_schedule_case(std::mt19937_64& rng, int stations,
                                                              bool want_deficit) {
  std::uniform_int_distribution<int> periods_d(5, 9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int periods = periods_d(rng);
  PriceSchedule prices;
  prices.period_length = 60.0;
  for (int t = 0; t < periods; ++t) {
    const double charge = 4.0 + std::round(u(rng) * 100.0) / 10.0;
    const double discharge = std::round(u(rng) * 120.0) / 10.0;
    prices.periods.push_back({charge, discharge});
  }
  prices.night = 3.0 + std::round(u(rng) * 50.0) / 10.0;
  const double horizon = prices.horizon();

  const int customers = std::uniform_int_distribution<int>(1, 3)(rng);
  // Battery between two and five periods.
  const double battery = 60.0 * (2.0 + 3.0 * u(rng));
  std::vector<NodeSpec> specs{{NodeKind::DepotStart, 0, 0}};
  // Customers at increasing angles so the route order is natural.
  std::vector<double> ready(static_cast<std::size_t>(customers));
  for (auto& r : ready) r = u(rng) * horizon * 0.8;
  std::sort(ready.begin(), ready.end());
  const double scale = want_deficit ? battery * 0.45 : battery * 0.2;
  for (int c = 0; c < customers; ++c) {
    const double angle = 3.14159 * (0.2 + 0.6 * (c + u(rng)) / customers);
    const double radius = scale * (0.3 + 0.7 * u(rng));
    const double width = 30.0 + u(rng) * 150.0;
    const double e = ready[static_cast<std::size_t>(c)];
    specs.push_back({NodeKind::Customer, radius * std::cos(angle), radius * std::sin(angle),
                     1.0, e, std::min(horizon, e + width), std::round(u(rng) * 30.0)});
  }
  const int station_nodes = 2;
  for (int s = 0; s < station_nodes; ++s) {
    const double angle = 3.14159 * u(rng);
    const double radius = scale * u(rng);
    specs.push_back({NodeKind::Station, radius * std::cos(angle), radius * std::sin(angle)});
  }
  ScheduleCaseSample sample{build(specs, fleet(1, 100, battery), prices), {}};
  const auto& inst = sample.inst;

  std::vector<int> seq;
  for (int c = 1; c <= customers; ++c) seq.push_back(c);
  // Stations go into random gaps; two visits may reuse the same station.
  std::vector<std::vector<int>> gaps(static_cast<std::size_t>(customers) + 1);
  std::vector<int> used;
  for (int s = 0; s < stations; ++s) {
    int id = customers + 1 + std::uniform_int_distribution<int>(0, station_nodes - 1)(rng);
    int g = std::uniform_int_distribution<int>(0, customers)(rng);
    auto& gap = gaps[static_cast<std::size_t>(g)];
    if (std::find(gap.begin(), gap.end(), id) != gap.end()) return std::nullopt;
    gap.push_back(id);
  }
  Route r{inst.depot_start()};
  for (int g = 0; g <= customers; ++g) {
    for (int s : gaps[static_cast<std::size_t>(g)]) r.push_back(s);
    if (g < customers) r.push_back(seq[static_cast<std::size_t>(g)]);
  }
  r.push_back(inst.depot_end());
  const auto m = compute_metrics(inst, r);
  if (route_violations(inst, r, m).any(kFeasibilityTolerance)) return std::nullopt;
  const double deficit = build_schedule_problem(inst, r, m).deficit;
  if (want_deficit != (deficit > 1e-9)) return std::nullopt;
  sample.route = std::move(r);
  return sample;
}

}  // namespace testing
