#include <doctest.h>

#include <random>

#include "evrptw/error.h"
#include "evrptw/oracle.h"
#include "support.h"

using namespace evrptw;
using namespace testing;

namespace {

bool has_violation(const std::vector<ConstraintViolation>& vs, const std::string& constraint) {
  return std::any_of(vs.begin(), vs.end(), [&](const auto& v) { return v.constraint == constraint; });
}

// Forward propagation with a forced departure time at `from`; true when every
// later window holds.
bool later_windows_hold(const Instance& inst, const Route& r, std::size_t from, double departure) {
  double dep = departure;
  for (std::size_t p = from + 1; p < r.size(); ++p) {
    const auto& n = inst.node(r[p]);
    const double arrival = std::max(n.ready, dep + inst.travel_time(r[p - 1], r[p]));
    if (arrival > n.due + 1e-9) return false;
    dep = arrival + n.service;
  }
  return true;
}

Route random_route(const Instance& inst, std::mt19937_64& rng) {
  auto ids = customer_ids(inst);
  std::shuffle(ids.begin(), ids.end(), rng);
  ids.resize(std::uniform_int_distribution<std::size_t>(0, ids.size())(rng));
  const auto options = with_stations(inst, ids);
  return options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
}

const char* kFive[] = {"C101-5", "C103-5", "C206-5", "C208-5", "R104-5", "R105-5",
                       "R202-5", "R203-5", "RC105-5", "RC108-5", "RC204-5", "RC208-5"};

}  // namespace

TEST_SUITE("route_eval") {
  TEST_CASE("metrics of a one-customer route traced by hand") {
    const auto inst = build({{NodeKind::DepotStart, 0, 0}, {NodeKind::Customer, 10, 0, 5, 30, 60, 10}},
                            fleet(1, 100, 270), flat_prices(1, 1, 1));
    const Route r{0, 1, 2};
    const auto m = compute_metrics(inst, r);
    CHECK(m.earliest == std::vector<double>{0, 30, 50});
    CHECK(m.forward_slack[1] == 20.0);
    CHECK(m.latest.back() == inst.horizon());
    CHECK(m.latest[1] == 70.0);
    CHECK(m.latest[0] == 60.0);
    CHECK(m.energy == std::vector<double>{0, 10, 20});
  }

  TEST_CASE("depot to station energy is one edge") {
    const auto inst = build({{NodeKind::DepotStart, 0, 0}, {NodeKind::Station, 3, 4}}, fleet(1, 10, 270, 3.39),
                            flat_prices(1, 1, 1));
    const auto m = compute_metrics(inst, {0, 1, 2});
    CHECK(m.energy[0] == 0.0);
    CHECK(m.energy[1] == doctest::Approx(5 * 3.39));
    // Energy resets at the station.
    CHECK(m.energy[2] == doctest::Approx(5 * 3.39));
  }

  TEST_CASE("earliest start agrees with a step-by-step simulation on feasible routes") {
    std::mt19937_64 rng(7);
    int checked = 0;
    for (const char* name : kFive) {
      const auto inst = roster_instance(name);
      for (int k = 0; k < 200; ++k) {
        const auto r = random_route(inst, rng);
        const auto m = compute_metrics(inst, r);
        if (tw_violation(inst, r, m) > 0.0) continue;
        const auto trace = simulate_route(inst, r, {});
        for (std::size_t i = 0; i < r.size(); ++i) CHECK(m.earliest[i] == doctest::Approx(trace.arrival[i]));
        // Without service times T^L is exactly the latest departure that keeps
        // every later window: one minute more breaks one unless the bound
        // comes from the node's own window.
        auto nodes = inst.nodes();
        for (auto& n : nodes) n.service = 0.0;
        const Instance quick(inst.name(), nodes, inst.fleet(), inst.prices());
        const auto mq = compute_metrics(quick, r);
        for (std::size_t i = 0; i + 1 < r.size(); ++i) {
          CHECK(later_windows_hold(quick, r, i, mq.latest[i]));
          if (mq.latest[i] < quick.node(r[i]).due - 1e-9) {
            CHECK_FALSE(later_windows_hold(quick, r, i, mq.latest[i] + 1.0));
          }
        }
        // F is the charge time accumulated since the last charge-capable node.
        double acc = 0.0;
        for (std::size_t i = 1; i < r.size(); ++i) {
          acc += inst.charge_time(r[i - 1], r[i]);
          CHECK(m.energy[i] == doctest::Approx(acc));
          if (inst.is_charge_capable(r[i])) acc = 0.0;
        }
        ++checked;
      }
    }
    CHECK(checked > 300);
  }

  TEST_CASE("cargo violation") {
    const auto make = [](double d1, double d2) {
      return build({{NodeKind::DepotStart}, {NodeKind::Customer, 1, 0, d1}, {NodeKind::Customer, 2, 0, d2}},
                   fleet(1, 200, 270), flat_prices(1, 1, 1));
    };
    CHECK(cargo_violation(make(100, 80), {0, 1, 2, 3}) == 0.0);
    CHECK(cargo_violation(make(100, 130), {0, 1, 2, 3}) == 30.0);
    CHECK(cargo_violation(make(100, 130), {0, 3}) == 0.0);
  }

  TEST_CASE("time window violation") {
    SUBCASE("single late node") {
      const auto inst = build({{NodeKind::DepotStart}, {NodeKind::Customer, 0, 0, 1, 0, 60, 0}}, fleet(1, 10, 270),
                              flat_prices(1, 1, 1), line_matrix({0, 70}));
      const Route r{0, 1, 2};
      CHECK(tw_violation(inst, r, compute_metrics(inst, r)) == 10.0);
    }
    SUBCASE("lateness does not cascade") {
      const auto inst = build({{NodeKind::DepotStart}, {NodeKind::Customer, 0, 0, 1, 0, 60, 0},
                               {NodeKind::Customer, 0, 0, 1, 0, 120, 0}},
                              fleet(1, 10, 1000), flat_prices(1, 1, 1), line_matrix({0, 65, 132}));
      const Route r{0, 1, 2, 3};
      const auto m = compute_metrics(inst, r);
      CHECK(m.earliest[1] == 65.0);
      CHECK(m.earliest[2] == 127.0);
      CHECK(tw_violation(inst, r, m) == 12.0);
    }
    SUBCASE("feasible route") {
      const auto inst = roster_instance("C101-5");
      const auto sol = exact_search(inst, inst.fleet().vehicles).solution;
      for (const auto& r : sol.routes) CHECK(tw_violation(inst, r, compute_metrics(inst, r)) == 0.0);
    }
  }

  TEST_CASE("battery violation") {
    const auto single = [](double x) {
      return build({{NodeKind::DepotStart}, {NodeKind::Customer, 0, 0, 1}}, fleet(1, 10, 270),
                   flat_prices(1, 1, 1), line_matrix({0, x}));
    };
    const Route r{0, 1, 2};
    CHECK(battery_violation(single(125), r, compute_metrics(single(125), r)) == 0.0);
    CHECK(battery_violation(single(150), r, compute_metrics(single(150), r)) == 30.0);

    // Legs 0 -> c1 -> S = 280 and S -> c2 -> 0 = 290.
    const auto two = build({{NodeKind::DepotStart}, {NodeKind::Customer, 0, 0, 1}, {NodeKind::Customer, 0, 0, 1},
                            {NodeKind::Station}},
                           fleet(1, 10, 270), flat_prices(1, 1, 1), line_matrix({0, 140, -5, 280}));
    const Route r2{0, 1, 3, 2, 4};
    const auto m2 = compute_metrics(two, r2);
    CHECK(m2.energy[2] == 280.0);
    CHECK(m2.energy[4] == 290.0);
    CHECK(battery_violation(two, r2, m2) == 30.0);
  }

  TEST_CASE("generalized cost") {
    CHECK(f_gen(50.0, {10.0, 0.0, 0.0}, Betas{}) == 150.0);
    CHECK(f_gen(50.0, {}, Betas{}) == 50.0);
    CHECK(f_gen(-3.0, {1.0, 2.0, 3.0}, Betas{1.0, 2.0, 3.0}) == 11.0);
  }

  TEST_CASE("structure checks") {
    const auto inst = roster_instance("C101-5");
    const int s = inst.customer_count() + 1;
    const int end = inst.depot_end();
    CHECK_NOTHROW(check_route_structure(inst, {0, end}));
    CHECK_NOTHROW(check_route_structure(inst, {0, s, s, end}));
    CHECK_THROWS_AS(check_route_structure(inst, {0, 1, 1, end}), StructuralError);
    CHECK_THROWS_AS(check_route_structure(inst, {1, end}), StructuralError);
    CHECK_THROWS_AS(check_route_structure(inst, {0, 1}), StructuralError);
    CHECK_THROWS_AS(check_route_structure(inst, {0, end, end}), StructuralError);
    CHECK_THROWS_AS(check_route_structure(inst, {0}), StructuralError);
  }

  TEST_CASE("verifier witnesses") {
    SUBCASE("omitted customer") {
      const auto inst = roster_instance("C101-5");
      auto sol = exact_search(inst, inst.fleet().vehicles).solution;
      auto& route = sol.routes.front().size() > 2 ? sol.routes.front() : sol.routes.back();
      const auto it = std::find_if(route.begin(), route.end(), [&](int id) { return inst.is_customer(id); });
      REQUIRE(it != route.end());
      const int dropped = *it;
      route.erase(it);
      sol.plans.assign(sol.routes.size(), {});
      const auto rep = verify_full(inst, sol);
      CHECK_FALSE(rep.feasible);
      const bool found = std::any_of(rep.violations.begin(), rep.violations.end(), [&](const auto& v) {
        return v.constraint == "coverage" && v.node == dropped;
      });
      CHECK(found);
    }
    SUBCASE("discharge in a period the vehicle arrives in") {
      const auto inst = build({{NodeKind::DepotStart}, {NodeKind::Station}}, fleet(1, 10, 270),
                              flat_prices(10, 8, 5), line_matrix({0, 90}));
      Solution sol{{{0, 1, 2}}, {ChargePlan{{VisitPlan{1, {{2, Action::Discharge}}}}}}};
      auto rep = verify_full(inst, sol);
      CHECK_FALSE(rep.feasible);
      REQUIRE(rep.violations.size() == 1);
      CHECK(rep.violations[0].constraint == "no-action-before-arrival");
      CHECK(rep.violations[0].period == 2);
      CHECK(rep.violations[0].position == 1);

      sol.plans[0].visits[0].actions[0].period = 3;
      rep = verify_full(inst, sol);
      CHECK(rep.feasible);
      // 180 minutes of driving and one discharged period leave 30; 240
      // minutes are recharged overnight at 5 per period.
      CHECK(rep.objective == doctest::Approx(-8.0 + 5.0 * 240.0 / 60.0));
    }
    SUBCASE("charging beyond capacity and exclusivity") {
      const auto inst = build({{NodeKind::DepotStart}, {NodeKind::Station}}, fleet(1, 10, 270),
                              flat_prices(10, 8, 5), line_matrix({0, 30}));
      Solution sol{{{0, 1, 2}}, {ChargePlan{{VisitPlan{1, {{2, Action::Charge}, {3, Action::Charge}}}}}}};
      auto rep = verify_full(inst, sol);
      CHECK(has_violation(rep.violations, "charge-capacity"));
      sol.plans[0] = ChargePlan{{VisitPlan{1, {{2, Action::Discharge}, {2, Action::Charge}}}}};
      rep = verify_full(inst, sol);
      CHECK(has_violation(rep.violations, "exclusivity"));
      sol.plans[0] = ChargePlan{{VisitPlan{1, {{2, Action::Discharge}, {3, Action::Discharge}, {4, Action::Discharge},
                                                {5, Action::Discharge}, {6, Action::Discharge}}}}};
      rep = verify_full(inst, sol);
      CHECK(has_violation(rep.violations, "discharge-capacity"));
    }
    SUBCASE("charging at a customer") {
      const auto inst = build({{NodeKind::DepotStart}, {NodeKind::Customer, 0, 0, 1}}, fleet(1, 10, 270),
                              flat_prices(10, 8, 5), line_matrix({0, 30}));
      Solution sol{{{0, 1, 2}}, {ChargePlan{{VisitPlan{1, {{2, Action::Charge}}}}}}};
      CHECK(has_violation(verify_full(inst, sol).violations, "structure"));
    }
    SUBCASE("malformed input is reported, not thrown") {
      const auto inst = roster_instance("C101-5");
      Solution sol{{{0, 999, inst.depot_end()}, {0, inst.depot_end()}, {0, inst.depot_end()}}, {}};
      VerificationReport rep;
      CHECK_NOTHROW(rep = verify_full(inst, sol));
      CHECK_FALSE(rep.feasible);
      CHECK(has_violation(rep.violations, "structure"));
      CHECK(has_violation(rep.violations, "fleet-size"));
      CHECK(has_violation(rep.violations, "coverage"));
    }
  }

  TEST_CASE("exact optima verify as feasible with matching objective") {
    for (const char* name : kFive) {
      CAPTURE(name);
      const auto inst = roster_instance(name);
      const auto res = exact_search(inst, inst.fleet().vehicles);
      REQUIRE(res.feasible);
      const auto rep = verify_full(inst, res.solution);
      CHECK(rep.feasible);
      CHECK(std::abs(rep.objective - res.f_elec) <= 1e-6 * std::max(1.0, std::abs(res.f_elec)));
      auto sol = res.solution;
      const auto cost = evaluate_solution(inst, sol, Betas{});
      CHECK(cost.feasible());
      CHECK(cost.f_gen == cost.f_elec);
      CHECK(cost.f_elec == doctest::Approx(res.f_elec));
      for (const auto& r : res.solution.routes) {
        const auto phi = route_violations(inst, r, compute_metrics(inst, r));
        CHECK(phi.tw == 0.0);
        CHECK(phi.batt == 0.0);
        CHECK(phi.cargo == 0.0);
      }
    }
  }

  TEST_CASE("simulated objective equals f_elec on random priced routes") {
    std::mt19937_64 rng(11);
    int priced = 0;
    for (const char* name : kFive) {
      const auto inst = roster_instance(name);
      for (int k = 0; k < 150; ++k) {
        const auto r = random_route(inst, rng);
        const auto m = compute_metrics(inst, r);
        if (route_violations(inst, r, m).any(kFeasibilityTolerance)) continue;
        const auto p = price_route(inst, r, m);
        if (!p.priced()) continue;
        std::vector<ConstraintViolation> witnesses;
        const auto trace = simulate_route(inst, r, p.plan, 0, &witnesses);
        CHECK(witnesses.empty());
        CHECK(close(trace.objective, p.f_elec, 1e-9));
        ++priced;
      }
    }
    CHECK(priced > 100);
  }

  TEST_CASE("monotonicity of cargo and window violations") {
    std::mt19937_64 rng(3);
    for (const char* name : kFive) {
      const auto inst = roster_instance(name);
      for (int k = 0; k < 40; ++k) {
        auto r = random_route(inst, rng);
        std::vector<int> missing;
        for (int c : customer_ids(inst)) {
          if (std::find(r.begin(), r.end(), c) == r.end()) missing.push_back(c);
        }
        if (!missing.empty()) {
          auto longer = r;
          const auto at = std::uniform_int_distribution<std::size_t>(1, r.size() - 1)(rng);
          longer.insert(longer.begin() + static_cast<std::ptrdiff_t>(at), missing.front());
          CHECK(cargo_violation(inst, longer) >= cargo_violation(inst, r));
        }
        // Tighten one customer window.
        auto nodes = inst.nodes();
        const int c = std::uniform_int_distribution<int>(1, inst.customer_count())(rng);
        auto& n = nodes[static_cast<std::size_t>(c)];
        n.due = n.ready + (n.due - n.ready) * 0.3;
        const Instance tight(inst.name(), nodes, inst.fleet(), inst.prices());
        CHECK(tw_violation(tight, r, compute_metrics(tight, r)) >=
              tw_violation(inst, r, compute_metrics(inst, r)) - 1e-9);
      }
    }
  }

  TEST_CASE("metrics are a pure function") {
    std::mt19937_64 rng(5);
    const auto inst = roster_instance("RC108-5");
    for (int k = 0; k < 50; ++k) {
      const auto r = random_route(inst, rng);
      CHECK(compute_metrics(inst, r) == compute_metrics(inst, r));
    }
  }
}
