#include <doctest.h>

#include <cmath>
#include <random>

#include "evrptw/error.h"
#include "evrptw/heuristic.h"
#include "evrptw/oracle.h"
#include "support.h"

using namespace evrptw;
using namespace testing;

namespace {

void check_conserved(const Instance& inst, const Solution& s) {
  std::vector<int> seen(static_cast<std::size_t>(inst.node_count()), 0);
  for (const auto& r : s.routes) {
    REQUIRE(r.size() >= 2);
    CHECK(r.front() == inst.depot_start());
    CHECK(r.back() == inst.depot_end());
    for (std::size_t i = 1; i + 1 < r.size(); ++i) {
      CHECK(r[i] != inst.depot_start());
      CHECK(r[i] != inst.depot_end());
      ++seen[static_cast<std::size_t>(r[i])];
    }
  }
  for (int c = 1; c <= inst.customer_count(); ++c) CHECK(seen[static_cast<std::size_t>(c)] == 1);
}

// Customers on a circle of radius 10 around the depot, 40 cargo units each.
Instance circle(int customers, int k, double cargo = 200.0) {
  std::vector<NodeSpec> specs{{NodeKind::DepotStart, 0, 0}};
  for (int c = 0; c < customers; ++c) {
    const double a = 2.0 * 3.141592653589793 * c / customers;
    specs.push_back({NodeKind::Customer, 10 * std::cos(a), 10 * std::sin(a), 40.0});
  }
  specs.push_back({NodeKind::Station, 0, 0});
  return build(specs, fleet(k, cargo, 270), builtin_scheme("A-summer"));
}

}  // namespace

TEST_SUITE("heuristic") {
  TEST_CASE("default parameters depend on the instance size") {
    const auto five = resolve_params(roster_instance("C101-5"), {});
    CHECK(five.vns_iters == 10);
    CHECK(five.early_stop == 5);
    CHECK(five.routes_per_cycle == 2);
    CHECK(five.tabu_iters == 30);
    CHECK(five.betas.tw == 10.0);
    CHECK(five.kappa == 0.5);
    const auto fifteen = resolve_params(roster_instance("R102-15"), {});
    CHECK(fifteen.vns_iters == 30);
    CHECK(fifteen.early_stop == 10);
    CHECK(fifteen.routes_per_cycle == 3);
    SearchParams zero;
    zero.vns_iters = 0;
    CHECK(resolve_params(roster_instance("C101-5"), zero).vns_iters == 0);
    SearchParams bad;
    bad.tenure_min = 9;
    bad.tenure_max = 3;
    CHECK_THROWS_AS(resolve_params(roster_instance("C101-5"), bad), Error);
  }

  TEST_CASE("sweep with one customer") {
    const auto inst = circle(1, 1);
    Rng rng(1);
    const auto s = sweep_init(inst, 1, rng);
    REQUIRE(s.routes.size() == 1);
    CHECK(s.routes[0] == Route{0, 1, inst.depot_end()});
  }

  TEST_CASE("sweep on a circle is deterministic per seed and opens routes on overload") {
    // Q = 100 allows two customers per route.
    const auto inst = circle(4, 2, 100.0);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      Rng a(seed), b(seed);
      const auto s1 = sweep_init(inst, 2, a);
      const auto s2 = sweep_init(inst, 2, b);
      CHECK(s1.routes == s2.routes);
      REQUIRE(s1.routes.size() == 2);
      check_conserved(inst, s1);
      // The third customer overloads the first route and opens the second.
      CHECK(s1.routes[0].size() == 5);
      CHECK(s1.routes[1].size() == 3);
    }
  }

  TEST_CASE("sweep forces the rest into the last route") {
    const auto inst = circle(6, 2, 100.0);
    Rng rng(5);
    const auto s = sweep_init(inst, 2, rng);
    check_conserved(inst, s);
    CHECK(cargo_violation(inst, s.routes.back()) > 0.0);
  }

  TEST_CASE("sweep always returns K routes") {
    const auto inst = circle(2, 4);
    Rng rng(3);
    const auto s = sweep_init(inst, 4, rng);
    CHECK(s.routes.size() == 4);
    check_conserved(inst, s);
  }

  TEST_CASE("cyclic exchange with single-node blocks swaps two nodes") {
    const auto inst = circle(4, 2);
    const int e = inst.depot_end();
    const Solution s{{{0, 1, 2, e}, {0, 3, 4, e}}, {}};
    SearchParams p = resolve_params(inst, {});
    p.block_lengths = {1};
    p.routes_per_cycle = 2;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      Rng rng(seed);
      const auto out = cyclic_exchange(inst, s, p, rng);
      check_conserved(inst, out);
      for (std::size_t r = 0; r < 2; ++r) {
        REQUIRE(out.routes[r].size() == 4);
        int changed = 0;
        for (std::size_t i = 0; i < 4; ++i) changed += out.routes[r][i] != s.routes[r][i];
        CHECK(changed == 1);
      }
    }
  }

  TEST_CASE("cyclic exchange moves reversed blocks along the cycle") {
    const auto inst = circle(9, 3);
    const int e = inst.depot_end();
    const Solution s{{{0, 1, 2, 3, e}, {0, 4, 5, 6, e}, {0, 7, 8, 9, e}}, {}};
    SearchParams p = resolve_params(inst, {});
    p.block_lengths = {2};
    p.routes_per_cycle = 3;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      Rng rng(seed);
      const auto out = cyclic_exchange(inst, s, p, rng);
      check_conserved(inst, out);
      for (std::size_t r = 0; r < 3; ++r) {
        const auto& got = out.routes[r];
        REQUIRE(got.size() == 5);
        // Exactly one adjacent pair came from another route, reversed.
        std::vector<std::size_t> foreign;
        for (std::size_t i = 1; i + 1 < got.size(); ++i) {
          if ((got[i] - 1) / 3 != static_cast<int>(r)) foreign.push_back(i);
        }
        REQUIRE(foreign.size() == 2);
        CHECK(foreign[1] == foreign[0] + 1);
        CHECK(got[foreign[0]] == got[foreign[1]] + 1);
      }
    }
  }

  TEST_CASE("stations travel with their block") {
    const auto inst = circle(4, 2);
    const int e = inst.depot_end();
    const int st = 5;
    const Solution s{{{0, 1, st, e}, {0, 3, 4, 2, e}}, {}};
    SearchParams p = resolve_params(inst, {});
    p.block_lengths = {2};
    bool moved = false;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      Rng rng(seed);
      const auto out = cyclic_exchange(inst, s, p, rng);
      check_conserved(inst, out);
      moved = moved || std::find(out.routes[1].begin(), out.routes[1].end(), st) != out.routes[1].end();
    }
    CHECK(moved);
  }

  TEST_CASE("operators conserve customers on the bundled instances") {
    for (const char* name : {"C101-10", "R102-10", "RC102-10"}) {
      const auto inst = roster_instance(name);
      SearchParams p = resolve_params(inst, {});
      p.check_conservation = true;
      Rng rng(17);
      TabuList tabu;
      RouteCache cache(inst, p.betas);
      auto s = sweep_init(inst, inst.fleet().vehicles, rng);
      for (int k = 0; k < 5; ++k) {
        s = cyclic_exchange(inst, s, p, rng);
        check_conserved(inst, s);
        s = tabu_search(inst, s, p, tabu, cache, rng);
        check_conserved(inst, s);
        for (const auto& r : s.routes) CHECK(station_visits(inst, r) <= 2);
      }
    }
  }

  TEST_CASE("tabu search inserts a station when the battery penalty outweighs its cost") {
    // 0 -> c1 -> c2 -> 0 is 400 long; a station at c2 splits it into 200 + 200
    // with three charged periods.
    const auto inst = build({{NodeKind::DepotStart}, {NodeKind::Customer, 0, 0, 1},
                             {NodeKind::Customer, 0, 0, 1}, {NodeKind::Station}},
                            fleet(1, 100, 270), builtin_scheme("A-summer"), line_matrix({0, 100, 200, 200}));
    const Solution start{{{0, 1, 2, 4}}, {}};
    SearchParams p = resolve_params(inst, {});
    p.tabu_iters = 1;
    RouteCache cache(inst, p.betas);
    TabuList tabu;
    Rng rng(1);
    const double before = solution_f_gen(start, cache);
    CHECK(cache.score(start.routes[0]).phi.batt == 130.0);
    const auto out = tabu_search(inst, start, p, tabu, cache, rng);
    CHECK(station_visits(inst, out.routes[0]) == 1);
    CHECK(solution_f_gen(out, cache) < before);
    CHECK_FALSE(cache.score(out.routes[0]).phi.any());
  }

  TEST_CASE("tabu search never returns something worse than a feasible start") {
    for (const char* name : {"C101-5", "R105-5", "RC108-5"}) {
      const auto inst = roster_instance(name);
      auto opt = exact_search(inst, inst.fleet().vehicles).solution;
      SearchParams p = resolve_params(inst, {});
      RouteCache cache(inst, p.betas);
      TabuList tabu;
      Rng rng(2);
      const auto out = tabu_search(inst, opt, p, tabu, cache, rng);
      CHECK(solution_f_gen(out, cache) == doctest::Approx(solution_f_gen(opt, cache)));
      for (const auto& r : out.routes) CHECK_FALSE(cache.score(r).phi.any(kFeasibilityTolerance));
    }
  }

  TEST_CASE("tabu list") {
    TabuList t;
    t.forbid(3, 7, 2);
    CHECK(t.is_tabu(7, 3));
    CHECK(t.is_tabu(3, 7));
    CHECK_FALSE(t.is_tabu(3, 8));
    CHECK(t.size() == 1);
    t.tick();
    CHECK(t.is_tabu(3, 7));
    t.tick();
    CHECK_FALSE(t.is_tabu(3, 7));
    CHECK(t.size() == 0);
    // A later expiry wins over an earlier one.
    t.forbid(1, 2, 10);
    t.forbid(2, 1, 5);
    for (int i = 0; i < 6; ++i) t.tick();
    CHECK(t.is_tabu(1, 2));
  }

  TEST_CASE("acceptance rule") {
    Rng rng(1);
    CHECK(accept(10.0, 9.0, 1e-9, rng));
    CHECK(accept(10.0, 10.0, 1e-9, rng));
    CHECK_FALSE(accept(10.0, 11.0, 0.0, rng));
    const double f = 80.0;
    const double t0 = initial_temperature(f, 0.5);
    CHECK(std::exp(-0.5 * f / t0) == doctest::Approx(0.5).epsilon(1e-12));
    int hits = 0;
    const int trials = 10000;
    for (int i = 0; i < trials; ++i) hits += accept(f, f + 0.5 * f, t0, rng);
    CHECK(std::abs(hits / static_cast<double>(trials) - 0.5) <= 0.02);
    // Negative objectives calibrate on the magnitude.
    CHECK(initial_temperature(-6.0, 0.5) == doctest::Approx(initial_temperature(6.0, 0.5)));
    CHECK(initial_temperature(0.0, 0.5) > 0.0);
  }

  TEST_CASE("temperature decreases strictly and ends below 1e-4") {
    for (int iters : {1, 2, 5, 10, 20, 30, 97}) {
      CAPTURE(iters);
      const Temperature temp(initial_temperature(82.61, 0.5), iters);
      for (int i = 2; i <= iters; ++i) CHECK(temp.at(i) < temp.at(i - 1));
      // Iterations strictly past 80% of the run.
      const int tail = static_cast<int>(std::floor(0.8 * iters)) + 1;
      for (int i = tail; i <= iters; ++i) {
        CHECK(temp.at(i) < 1e-4);
        CHECK(temp.at(i) > 0.0);
      }
    }
  }

  TEST_CASE("zero iterations returns the sweep solution") {
    const auto inst = roster_instance("R203-5");
    SearchParams p;
    p.vns_iters = 0;
    const auto res = vns_ts(inst, p);
    CHECK(res.best.routes == res.initial.routes);
    CHECK(res.best_iter == 0);
    CHECK(res.trace.size() == 1);
  }

  TEST_CASE("same seed, same trace") {
    const auto inst = roster_instance("RC108-10");
    SearchParams p;
    p.seed = 42;
    const auto a = vns_ts(inst, p);
    const auto b = vns_ts(inst, p);
    CHECK(trace_to_csv(a.trace) == trace_to_csv(b.trace));
    CHECK(a.best.routes == b.best.routes);
  }

  TEST_CASE("search result is never worse than the sweep start") {
    for (const char* name : {"C202-10", "R103-10", "RC205-10"}) {
      const auto inst = roster_instance(name);
      const auto res = vns_ts(inst, {});
      if (res.initial_cost.feasible()) CHECK(res.cost.feasible());
      if (res.cost.feasible() == res.initial_cost.feasible()) {
        CHECK(res.cost.f_gen <= res.initial_cost.f_gen + 1e-9);
      }
      check_conserved(inst, res.best);
      CHECK(res.best.routes.size() == static_cast<std::size_t>(inst.fleet().vehicles));
      // Trace rows carry the best so far.
      for (std::size_t i = 1; i < res.trace.size(); ++i) {
        CHECK(res.trace[i].best_iter >= res.trace[i - 1].best_iter);
      }
    }
  }

  TEST_CASE("feasible results are upper bounds of the exact optimum") {
    for (const char* name : {"C101-5", "C206-5", "R104-5", "R203-5", "RC105-5", "RC204-5"}) {
      CAPTURE(name);
      const auto inst = roster_instance(name);
      const auto res = vns_ts(inst, {});
      const auto opt = exact_search(inst, inst.fleet().vehicles);
      REQUIRE(opt.feasible);
      if (res.cost.feasible()) CHECK(res.cost.f_elec >= opt.f_elec - 1e-6);
      auto sol = res.best;
      evaluate_solution(inst, sol, Betas{});
      CHECK(verify_full(inst, sol).feasible == res.cost.feasible());
    }
  }

  TEST_CASE("trace csv") {
    const auto inst = roster_instance("C101-5");
    const auto res = vns_ts(inst, {});
    const auto csv = trace_to_csv(res.trace);
    CHECK(csv.rfind("iteration,f_gen,f_elec,phi_tw,phi_batt,phi_cargo,feasible,accepted,temperature,best_f_gen,"
                    "best_iter\n",
                    0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(res.trace.size()) + 1);
  }
}
