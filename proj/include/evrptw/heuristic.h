#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <unordered_map>
#include <utility>
#include <vector>

#include "evrptw/charge_sched.h"
#include "evrptw/instance.h"
#include "evrptw/route_eval.h"

namespace evrptw {

using Rng = std::mt19937_64;

// Negative vns_iters and non-positive early_stop / routes_per_cycle mean
// "size-dependent default" and are filled in by resolve_params().
struct SearchParams {
  Betas betas;
  int vns_iters = -1;         // eta_vns; 0 returns the sweep solution
  int tabu_iters = 30;        // eta_tabu
  int early_stop = 0;         // eta_early
  int routes_per_cycle = 0;   // N_r
  std::vector<int> block_lengths{1, 2, 3};
  int tenure_min = 5;
  int tenure_max = 15;
  double kappa = 0.5;
  std::uint64_t seed = 1;
  bool check_conservation = false;  // assert customer conservation after every move
};

SearchParams resolve_params(const Instance& inst, SearchParams p);

// Removed edges, undirected, with the iteration until which re-adding them is
// forbidden.
class TabuList {
 public:
  void forbid(int a, int b, std::int64_t until);
  bool is_tabu(int a, int b) const;
  void tick() { ++now_; }
  std::int64_t now() const { return now_; }
  std::size_t size() const;

 private:
  std::map<std::pair<int, int>, std::int64_t> expiry_;
  std::int64_t now_ = 0;
};

struct RouteScore {
  double f_elec = 0.0;
  Violations phi;
  double f_gen = 0.0;
};

// Memoizes route assessments by node sequence.
class RouteCache {
 public:
  RouteCache(const Instance& inst, const Betas& betas) : inst_(&inst), betas_(betas) {}
  const RouteScore& score(const Route& route);
  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }

 private:
  struct Hash {
    std::size_t operator()(const Route& r) const;
  };
  const Instance* inst_;
  Betas betas_;
  std::unordered_map<Route, RouteScore, Hash> cache_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

// Sweep construction: customers by polar angle around a random reference
// point, cheapest insertion, a new route whenever battery or cargo is
// violated while fewer than K routes are open. Always returns K routes.
Solution sweep_init(const Instance& inst, int vehicles, Rng& rng);

// Reverses one random block per selected route and rotates the blocks along
// the cycle of selected routes.
Solution cyclic_exchange(const Instance& inst, const Solution& s, const SearchParams& p, Rng& rng);

// Moves to the best non-tabu neighbor (2-opt*, exchange, relocate, station
// insertion/removal) each iteration, even when it is worse. A tabu neighbor is
// admitted when it beats the best solution of the run, and the best tabu
// neighbor is taken when nothing else is left. Runs `p.tabu_iters` moves;
// returns the best visited solution, feasible ones first.
Solution tabu_search(const Instance& inst, const Solution& start, const SearchParams& p,
                     TabuList& tabu, RouteCache& cache, Rng& rng);

// Metropolis rule: always accept a candidate that is not worse, otherwise with
// probability exp((incumbent - candidate) / temp).
bool accept(double incumbent, double candidate, double temp, Rng& rng);

// Temperature at which a candidate kappa * |f| worse than f is accepted with
// probability one half.
double initial_temperature(double f, double kappa);

// Strictly decreasing schedule over VNS iterations 1..iters: linear from T0 to
// the tail level, and below 1e-4 from the first iteration of the last fifth.
class Temperature {
 public:
  Temperature(double t0, int iters);
  double at(int iteration) const;
  int tail_start() const { return tail_start_; }
  double initial() const { return t0_; }

 private:
  double t0_;
  int iters_;
  int tail_start_;
  double tail_level_;
};

struct TraceRow {
  int iteration = 0;
  double f_gen = 0.0;  // of the tabu result S''
  double f_elec = 0.0;
  Violations phi;
  bool feasible = false;
  bool accepted = false;
  double temperature = 0.0;
  double best_f_gen = 0.0;
  int best_iter = 0;
};

struct HeuristicResult {
  Solution best;
  SolutionCost cost;
  int best_iter = 0;
  Solution initial;
  SolutionCost initial_cost;
  double initial_temperature = 0.0;
  std::vector<TraceRow> trace;
  SearchParams params;  // resolved
};

HeuristicResult vns_ts(const Instance& inst, const SearchParams& params);

// Total f_gen of a solution using the cache.
double solution_f_gen(const Solution& s, RouteCache& cache);

std::string trace_to_csv(const std::vector<TraceRow>& trace);

}  // namespace evrptw
