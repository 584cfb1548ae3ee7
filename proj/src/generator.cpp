#include "evrptw/generator.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <regex>

#include "evrptw/error.h"
#include "evrptw/heuristic.h"
#include "evrptw/oracle.h"

namespace evrptw {

namespace {

constexpr double kMorningEnd = 420.0;    // 12pm
constexpr double kAfternoonEnd = 780.0;  // 6pm

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Horizon length of the original Solomon family the window midpoints are
// drawn on.
double original_horizon(InstanceClass cls, int series) {
  switch (cls) {
    case InstanceClass::Clustered: return series == 1 ? 1236.0 : 3390.0;
    case InstanceClass::Random: return series == 1 ? 230.0 : 1000.0;
    case InstanceClass::Mixed: return series == 1 ? 240.0 : 960.0;
  }
  return 1000.0;
}

}  // namespace

GeneratorSpec spec_from_name(const std::string& name, int vehicles) {
  static const std::regex pattern(R"(^(RC|C|R)([12])\d\d-(\d+)$)");
  std::smatch m;
  if (!std::regex_match(name, m, pattern)) throw Error("unrecognised instance name '" + name + "'");
  GeneratorSpec spec;
  spec.name = name;
  spec.cls = m[1] == "C" ? InstanceClass::Clustered : m[1] == "R" ? InstanceClass::Random : InstanceClass::Mixed;
  spec.series = std::stoi(m[2]);
  spec.customers = std::stoi(m[3]);
  if (spec.customers < 1) throw Error("instance name '" + name + "' has no customers");
  spec.stations = 1 + (spec.customers <= 5 ? 2 : spec.customers <= 10 ? 3 : spec.customers <= 15 ? 4 : 6);
  spec.vehicles = vehicles;
  spec.seed = fnv1a(name);
  return spec;
}

FleetParams benchmark_fleet(int vehicles) {
  FleetParams f;
  f.vehicles = vehicles;
  f.cargo_capacity = 200.0;
  f.recharge_rate = 3.39;
  f.battery_capacity = 270.0 / 3.39;
  f.consumption_rate = 1.0;
  f.velocity = 1.0;
  return f;
}

Instance generate_instance(const GeneratorSpec& spec, const PriceSchedule& prices) {
  std::mt19937_64 rng(spec.seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto round1 = [](double v) { return std::round(v * 10.0) / 10.0; };

  // Coordinate boxes of the Solomon families: R in [0,70]^2, C and RC in
  // [0,100]^2.
  const bool random_layout = spec.cls == InstanceClass::Random;
  const double dx = random_layout ? 35.0 : 40.0;
  const double dy = random_layout ? 35.0 : 50.0;
  const double box = random_layout ? 70.0 : 100.0;
  const double horizon = prices.horizon();
  const FleetParams fleet = benchmark_fleet(spec.vehicles);
  // A customer must be reachable from the depot or a station and back on one
  // charge.
  const double reach_limit = 0.5 * fleet.battery_capacity / fleet.consumption_rate;

  std::vector<Node> nodes;
  Node depot;
  depot.kind = NodeKind::DepotStart;
  depot.name = "D0";
  depot.x = dx;
  depot.y = dy;
  depot.due = horizon;
  nodes.push_back(depot);

  std::vector<Node> stations;
  for (int s = 0; s < spec.stations; ++s) {
    Node st;
    st.kind = NodeKind::Station;
    st.name = "S" + std::to_string(s);
    st.due = horizon;
    if (s == 0) {
      st.x = dx;
      st.y = dy;
    } else {
      st.x = round1(uniform(0.0, box));
      st.y = round1(uniform(0.0, box));
    }
    stations.push_back(st);
  }
  auto reachable = [&](double x, double y) {
    for (const auto& st : stations) {
      if (std::hypot(x - st.x, y - st.y) <= reach_limit) return true;
    }
    return false;
  };

  // Cluster centres for the clustered part of the layout.
  std::vector<std::pair<double, double>> centres;
  const int n_centres = std::max(1, spec.customers / 5);
  while (static_cast<int>(centres.size()) < n_centres) {
    const double cx = uniform(10.0, box - 10.0);
    const double cy = uniform(10.0, box - 10.0);
    if (reachable(cx, cy)) centres.emplace_back(cx, cy);
  }

  const double h_orig = original_horizon(spec.cls, spec.series);
  for (int i = 0; i < spec.customers; ++i) {
    Node c;
    c.kind = NodeKind::Customer;
    c.name = "C" + std::to_string(i + 1);
    const bool clustered = spec.cls == InstanceClass::Clustered ||
                           (spec.cls == InstanceClass::Mixed && i % 2 == 0);
    do {
      if (clustered) {
        const auto& [cx, cy] = centres[static_cast<std::size_t>(uniform_int(0, n_centres - 1))];
        const double r = 8.0 * std::sqrt(uniform(0.0, 1.0));
        const double a = uniform(0.0, 2.0 * M_PI);
        c.x = round1(std::clamp(cx + r * std::cos(a), 0.0, box));
        c.y = round1(std::clamp(cy + r * std::sin(a), 0.0, box));
      } else {
        c.x = round1(uniform(0.0, box));
        c.y = round1(uniform(0.0, box));
      }
    } while (!reachable(c.x, c.y));
    switch (spec.cls) {
      case InstanceClass::Clustered:
        c.demand = 10.0 * uniform_int(1, 4);
        c.service = 90.0;
        break;
      case InstanceClass::Random:
        c.demand = uniform_int(1, 40);
        c.service = 10.0;
        break;
      case InstanceClass::Mixed:
        c.demand = uniform_int(5, 40);
        c.service = 10.0;
        break;
    }
    // A Solomon-style window midpoint on the original horizon, scaled to the
    // planning horizon and mapped to the morning, afternoon or evening block
    // containing it.
    const double reach = std::hypot(c.x - dx, c.y - dy);
    const double lo = reach;
    const double hi = std::max(lo, h_orig - reach - c.service * h_orig / horizon);
    const double mid = uniform(lo, hi) * horizon / h_orig;
    if (mid < kMorningEnd) {
      c.ready = 0.0;
      c.due = kMorningEnd;
    } else if (mid < kAfternoonEnd) {
      c.ready = kMorningEnd;
      c.due = kAfternoonEnd;
    } else {
      c.ready = kAfternoonEnd;
      c.due = horizon;
    }
    nodes.push_back(c);
  }
  nodes.insert(nodes.end(), stations.begin(), stations.end());
  if (spec.spread != 1.0) {
    for (auto& n : nodes) {
      n.x = round1(dx + spec.spread * (n.x - dx));
      n.y = round1(dy + spec.spread * (n.y - dy));
    }
  }

  Node end = depot;
  end.kind = NodeKind::DepotEnd;
  nodes.push_back(end);
  for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i].id = static_cast<int>(i);
  return Instance(spec.name, std::move(nodes), fleet, prices);
}

GeneratedInstance generate_feasible_instance(const GeneratorSpec& spec, const PriceSchedule& prices,
                                             int max_attempts) {
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    GeneratorSpec draw = spec;
    if (attempt > 0) draw.seed = fnv1a(spec.name + "#" + std::to_string(attempt));
    draw.spread = spec.spread * std::max(0.5, 1.0 - 0.1 * (attempt / 5));
    Instance inst = generate_instance(draw, prices);
    bool feasible = false;
    if (spec.customers <= SearchCaps{}.max_customers) {
      feasible = exact_search(inst, spec.vehicles).feasible;
    } else {
      for (std::uint64_t seed = 1; seed <= 3 && !feasible; ++seed) {
        SearchParams p;
        p.seed = seed;
        feasible = vns_ts(inst, p).cost.feasible();
      }
    }
    if (feasible) return {std::move(inst), attempt};
  }
  throw Error("no feasible draw for " + spec.name + " after " + std::to_string(max_attempts) + " attempts");
}

std::vector<RosterEntry> benchmark_roster(int customers) {
  switch (customers) {
    case 5:
      return {{"C101-5", 2},  {"C103-5", 2},  {"C206-5", 2},  {"C208-5", 1},
              {"R104-5", 2},  {"R105-5", 2},  {"R202-5", 1},  {"R203-5", 1},
              {"RC105-5", 2}, {"RC108-5", 2}, {"RC204-5", 1}, {"RC208-5", 1}};
    case 10:
      return {{"C101-10", 3},  {"C104-10", 2},  {"C202-10", 2},  {"C205-10", 2},
              {"R102-10", 4},  {"R103-10", 2},  {"R201-10", 1},  {"R203-10", 2},
              {"RC102-10", 4}, {"RC108-10", 3}, {"RC201-10", 2}, {"RC205-10", 2}};
    case 15:
      return {{"C103-15", 3},  {"C106-15", 3},  {"C202-15", 2},  {"C208-15", 2},
              {"R102-15", 5},  {"R105-15", 4},  {"R202-15", 2},  {"RC103-15", 4},
              {"RC108-15", 3}, {"RC202-15", 3}, {"RC204-15", 2}};
    case 30:
      return {{"C103-30", 4}, {"R105-30", 4}, {"RC108-30", 5}};
  }
  return {};
}

}  // namespace evrptw
