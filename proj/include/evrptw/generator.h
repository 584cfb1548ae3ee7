#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evrptw/instance.h"

namespace evrptw {

enum class InstanceClass { Clustered, Random, Mixed };

// Surrogate Schneider-style instance: named like "RC204-5" (class, series,
// customer count). Everything else is drawn from a generator seeded by the
// name, so the same name always yields the same instance.
struct GeneratorSpec {
  std::string name;
  InstanceClass cls = InstanceClass::Random;
  int series = 1;  // 1: short original horizon, 2: long
  int customers = 5;
  int stations = 3;  // including the one at the depot
  int vehicles = 1;
  std::uint64_t seed = 0;
  // Coordinates are contracted toward the depot by this factor (1: full
  // Solomon box).
  double spread = 1.0;
};

// Parses "C101-5"-style names. Throws evrptw::Error on other names.
GeneratorSpec spec_from_name(const std::string& name, int vehicles);

Instance generate_instance(const GeneratorSpec& spec, const PriceSchedule& prices);

struct GeneratedInstance {
  Instance instance;
  int attempt = 0;  // 0 when the first draw was kept
};

// Redraws (seed derived from the name and the attempt number) until the
// instance admits a feasible solution with the spec's fleet. Every fifth
// failed attempt contracts the layout by another 10%, down to half size. Feasibility is
// decided by the exact oracle up to 7 customers and by the metaheuristic
// above that. Throws evrptw::Error after `max_attempts` draws.
GeneratedInstance generate_feasible_instance(const GeneratorSpec& spec, const PriceSchedule& prices,
                                             int max_attempts = 50);

// Fleet parameters shared by all generated instances: Q = 200, B = 270,
// alpha = 3.39, g = 1, v = 1.
FleetParams benchmark_fleet(int vehicles);

struct RosterEntry {
  std::string name;
  int vehicles = 1;
};

// Instance sets used by the benchmark harness and the tests, keyed by customer
// count (5, 10, 15, 30).
std::vector<RosterEntry> benchmark_roster(int customers);

}  // namespace evrptw
