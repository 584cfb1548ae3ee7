#include "evrptw/heuristic.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "evrptw/csv.h"
#include "evrptw/error.h"

namespace evrptw {

namespace {

constexpr double kImprove = 1e-9;
constexpr double kTailLevel = 5e-5;

using Edge = std::pair<int, int>;

Edge edge_of(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

void collect_edges(const Route& r, std::vector<Edge>& out) {
  for (std::size_t i = 0; i + 1 < r.size(); ++i) out.push_back(edge_of(r[i], r[i + 1]));
}

int stations_in(const Instance& inst, const Route& r) { return station_visits(inst, r); }

bool has_repeat_neighbors(const Route& r) {
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    if (r[i] == r[i + 1]) return true;
  }
  return false;
}

bool acceptable_route(const Instance& inst, const Route& r) {
  return stations_in(inst, r) <= 2 && !has_repeat_neighbors(r);
}

void check_conservation(const Instance& inst, const Solution& s) {
  std::vector<int> seen(static_cast<std::size_t>(inst.node_count()), 0);
  for (const auto& r : s.routes) {
    for (int id : r) ++seen[static_cast<std::size_t>(id)];
  }
  for (int c = 1; c <= inst.customer_count(); ++c) {
    if (seen[static_cast<std::size_t>(c)] != 1) {
      throw std::logic_error("customer " + std::to_string(c) + " not served exactly once");
    }
  }
}

Route empty_route(const Instance& inst) { return {inst.depot_start(), inst.depot_end()}; }

// Candidate replacement of some routes of the current solution.
struct Move {
  std::vector<int> indices;
  std::vector<Route> routes;
  double delta = 0.0;
};

}  // namespace

SearchParams resolve_params(const Instance& inst, SearchParams p) {
  const int n = inst.customer_count();
  if (p.vns_iters < 0) p.vns_iters = n <= 5 ? 10 : n <= 10 ? 20 : 30;
  if (p.early_stop <= 0) p.early_stop = n <= 10 ? 5 : 10;
  if (p.routes_per_cycle <= 0) p.routes_per_cycle = inst.fleet().vehicles <= 3 ? 2 : 3;
  if (p.tabu_iters < 0) p.tabu_iters = 30;
  if (p.block_lengths.empty()) p.block_lengths = {1, 2, 3};
  if (p.tenure_min < 1 || p.tenure_max < p.tenure_min) {
    throw Error("tabu tenure bounds must satisfy 1 <= min <= max");
  }
  if (p.kappa <= 0.0) throw Error("kappa must be positive");
  return p;
}

void TabuList::forbid(int a, int b, std::int64_t until) {
  auto& slot = expiry_[edge_of(a, b)];
  slot = std::max(slot, until);
}

bool TabuList::is_tabu(int a, int b) const {
  const auto it = expiry_.find(edge_of(a, b));
  return it != expiry_.end() && it->second > now_;
}

std::size_t TabuList::size() const {
  return static_cast<std::size_t>(std::count_if(
      expiry_.begin(), expiry_.end(), [&](const auto& kv) { return kv.second > now_; }));
}

std::size_t RouteCache::Hash::operator()(const Route& r) const {
  std::size_t h = 1469598103934665603ull;
  for (int id : r) {
    h ^= static_cast<std::size_t>(id) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

const RouteScore& RouteCache::score(const Route& route) {
  auto it = cache_.find(route);
  if (it != cache_.end()) {
    ++hits_;
    return it->second;
  }
  ++misses_;
  if (cache_.size() > 400000) cache_.clear();
  const auto a = assess_route(*inst_, route, betas_);
  return cache_.emplace(route, RouteScore{a.priced.f_elec, a.phi, a.f_gen}).first->second;
}

double solution_f_gen(const Solution& s, RouteCache& cache) {
  double total = 0.0;
  for (const auto& r : s.routes) total += cache.score(r).f_gen;
  return total;
}

Solution sweep_init(const Instance& inst, int vehicles, Rng& rng) {
  if (vehicles < 1) throw Error("fleet size must be positive");
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = min_x;
  double max_x = -min_x;
  double max_y = -min_x;
  for (const auto& n : inst.nodes()) {
    min_x = std::min(min_x, n.x);
    max_x = std::max(max_x, n.x);
    min_y = std::min(min_y, n.y);
    max_y = std::max(max_y, n.y);
  }
  std::uniform_real_distribution<double> ux(min_x, std::nextafter(max_x, max_x + 1.0));
  std::uniform_real_distribution<double> uy(min_y, std::nextafter(max_y, max_y + 1.0));
  const double rx = ux(rng);
  const double ry = uy(rng);

  std::vector<int> customers(static_cast<std::size_t>(inst.customer_count()));
  std::iota(customers.begin(), customers.end(), 1);
  std::vector<double> angle(static_cast<std::size_t>(inst.node_count()), 0.0);
  for (int c : customers) {
    angle[static_cast<std::size_t>(c)] = std::atan2(inst.node(c).y - ry, inst.node(c).x - rx);
  }
  std::stable_sort(customers.begin(), customers.end(), [&](int a, int b) {
    return angle[static_cast<std::size_t>(a)] < angle[static_cast<std::size_t>(b)];
  });

  Solution s;
  s.routes.push_back(empty_route(inst));
  for (int c : customers) {
    auto& r = s.routes.back();
    std::size_t best_pos = 1;
    double best_inc = std::numeric_limits<double>::infinity();
    for (std::size_t pos = 1; pos < r.size(); ++pos) {
      const double inc = inst.distance(r[pos - 1], c) + inst.distance(c, r[pos]) -
                         inst.distance(r[pos - 1], r[pos]);
      if (inc < best_inc - kImprove) {
        best_inc = inc;
        best_pos = pos;
      }
    }
    r.insert(r.begin() + static_cast<std::ptrdiff_t>(best_pos), c);
    const auto m = compute_metrics(inst, r);
    const bool violated = battery_violation(inst, r, m) > kFeasibilityTolerance ||
                          cargo_violation(inst, r) > kFeasibilityTolerance;
    if (violated && static_cast<int>(s.routes.size()) < vehicles) s.routes.push_back(empty_route(inst));
  }
  while (static_cast<int>(s.routes.size()) < vehicles) s.routes.push_back(empty_route(inst));
  return s;
}

Solution cyclic_exchange(const Instance& inst, const Solution& s, const SearchParams& p, Rng& rng) {
  const int k = static_cast<int>(s.routes.size());
  if (k == 0) return s;
  auto pick_len = [&]() {
    std::uniform_int_distribution<std::size_t> u(0, p.block_lengths.size() - 1);
    return p.block_lengths[u(rng)];
  };

  for (int attempt = 0; attempt < 20; ++attempt) {
    Solution out = s;
    if (k == 1) {
      auto& r = out.routes[0];
      const int interior = static_cast<int>(r.size()) - 2;
      if (interior < 2) return s;
      const int len = std::min(pick_len(), interior);
      std::uniform_int_distribution<int> us(1, interior - len + 1);
      const int start = us(rng);
      std::reverse(r.begin() + start, r.begin() + start + len);
      if (acceptable_route(inst, r)) return out;
      continue;
    }
    const int nr = std::min(p.routes_per_cycle, k);
    std::vector<int> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(static_cast<std::size_t>(nr));

    std::vector<int> starts(static_cast<std::size_t>(nr));
    std::vector<std::vector<int>> blocks(static_cast<std::size_t>(nr));
    bool any = false;
    for (int i = 0; i < nr; ++i) {
      const auto& r = s.routes[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
      const int interior = static_cast<int>(r.size()) - 2;
      const int len = std::min(pick_len(), interior);
      int start = 1;
      if (interior > 0) {
        std::uniform_int_distribution<int> us(1, interior - len + 1);
        start = us(rng);
      }
      starts[static_cast<std::size_t>(i)] = start;
      blocks[static_cast<std::size_t>(i)].assign(r.begin() + start, r.begin() + start + len);
      std::reverse(blocks[static_cast<std::size_t>(i)].begin(), blocks[static_cast<std::size_t>(i)].end());
      any = any || len > 0;
    }
    if (!any) continue;
    bool ok = true;
    for (int i = 0; i < nr; ++i) {
      // Route i receives the block of its predecessor in the cycle.
      const int from = (i + nr - 1) % nr;
      const auto& src = s.routes[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
      const int start = starts[static_cast<std::size_t>(i)];
      const auto own = static_cast<int>(blocks[static_cast<std::size_t>(i)].size());
      Route r(src.begin(), src.begin() + start);
      const auto& incoming = blocks[static_cast<std::size_t>(from)];
      r.insert(r.end(), incoming.begin(), incoming.end());
      r.insert(r.end(), src.begin() + start + own, src.end());
      if (!acceptable_route(inst, r)) {
        ok = false;
        break;
      }
      out.routes[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = std::move(r);
    }
    if (ok) {
      if (p.check_conservation) check_conservation(inst, out);
      return out;
    }
  }
  return s;
}

namespace {

class NeighborScan {
 public:
  // A tabu neighbor is still admissible when its change is below
  // `aspiration` (it would beat the best solution of the current run).
  NeighborScan(const Instance& inst, const Solution& s, const std::vector<double>& scores,
               const TabuList& tabu, RouteCache& cache, double aspiration)
      : inst_(inst), s_(s), scores_(scores), tabu_(tabu), cache_(cache), aspiration_(aspiration) {}

  std::optional<Move> best() {
    two_opt_star();
    exchange();
    relocate();
    station_in_re();
    // When every neighbor is tabu, take the best tabu one rather than stop.
    return best_ ? best_ : best_tabu_;
  }

 private:
  void offer(std::vector<int> idx, std::vector<Route> routes) {
    for (const auto& r : routes) {
      if (!acceptable_route(inst_, r)) return;
    }
    double delta = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      delta += cache_.score(routes[i]).f_gen - scores_[static_cast<std::size_t>(idx[i])];
    }
    if (best_ && delta >= best_->delta - kImprove) return;
    if (delta >= aspiration_ - kImprove && is_tabu(idx, routes)) {
      if (!best_tabu_ || delta < best_tabu_->delta - kImprove) best_tabu_ = Move{idx, routes, delta};
      return;
    }
    best_ = Move{std::move(idx), std::move(routes), delta};
  }

  bool is_tabu(const std::vector<int>& idx, const std::vector<Route>& routes) const {
    std::vector<Edge> before;
    std::vector<Edge> after;
    for (int i : idx) collect_edges(s_.routes[static_cast<std::size_t>(i)], before);
    for (const auto& r : routes) collect_edges(r, after);
    std::sort(before.begin(), before.end());
    std::sort(after.begin(), after.end());
    std::vector<Edge> added;
    std::set_difference(after.begin(), after.end(), before.begin(), before.end(),
                        std::back_inserter(added));
    return std::any_of(added.begin(), added.end(),
                       [&](const Edge& e) { return tabu_.is_tabu(e.first, e.second); });
  }

  void two_opt_star() {
    const int k = static_cast<int>(s_.routes.size());
    for (int a = 0; a < k; ++a) {
      for (int b = a + 1; b < k; ++b) {
        const auto& ra = s_.routes[static_cast<std::size_t>(a)];
        const auto& rb = s_.routes[static_cast<std::size_t>(b)];
        for (std::size_t i = 0; i + 1 < ra.size(); ++i) {
          for (std::size_t j = 0; j + 1 < rb.size(); ++j) {
            if (i + 2 == ra.size() && j + 2 == rb.size()) continue;  // swaps only the end depots
            if (i == 0 && j == 0) continue;                           // swaps whole routes
            Route na(ra.begin(), ra.begin() + static_cast<std::ptrdiff_t>(i) + 1);
            na.insert(na.end(), rb.begin() + static_cast<std::ptrdiff_t>(j) + 1, rb.end());
            Route nb(rb.begin(), rb.begin() + static_cast<std::ptrdiff_t>(j) + 1);
            nb.insert(nb.end(), ra.begin() + static_cast<std::ptrdiff_t>(i) + 1, ra.end());
            offer({a, b}, {std::move(na), std::move(nb)});
          }
        }
      }
    }
  }

  void exchange() {
    const int k = static_cast<int>(s_.routes.size());
    for (int a = 0; a < k; ++a) {
      const auto& ra = s_.routes[static_cast<std::size_t>(a)];
      for (std::size_t i = 1; i + 1 < ra.size(); ++i) {
        for (std::size_t j = i + 1; j + 1 < ra.size(); ++j) {
          if (ra[i] == ra[j]) continue;
          Route n = ra;
          std::swap(n[i], n[j]);
          offer({a}, {std::move(n)});
        }
        for (int b = a + 1; b < k; ++b) {
          const auto& rb = s_.routes[static_cast<std::size_t>(b)];
          for (std::size_t j = 1; j + 1 < rb.size(); ++j) {
            if (ra[i] == rb[j]) continue;
            Route na = ra;
            Route nb = rb;
            std::swap(na[i], nb[j]);
            offer({a, b}, {std::move(na), std::move(nb)});
          }
        }
      }
    }
  }

  void relocate() {
    const int k = static_cast<int>(s_.routes.size());
    for (int a = 0; a < k; ++a) {
      const auto& ra = s_.routes[static_cast<std::size_t>(a)];
      for (std::size_t i = 1; i + 1 < ra.size(); ++i) {
        Route removed = ra;
        const int node = removed[i];
        removed.erase(removed.begin() + static_cast<std::ptrdiff_t>(i));
        for (int b = 0; b < k; ++b) {
          const Route& target = b == a ? removed : s_.routes[static_cast<std::size_t>(b)];
          for (std::size_t pos = 1; pos < target.size(); ++pos) {
            if (b == a && pos == i) continue;  // original position
            Route nb = target;
            nb.insert(nb.begin() + static_cast<std::ptrdiff_t>(pos), node);
            if (b == a) {
              offer({a}, {std::move(nb)});
            } else {
              offer({a, b}, {removed, std::move(nb)});
            }
          }
        }
      }
    }
  }

  void station_in_re() {
    const int k = static_cast<int>(s_.routes.size());
    for (int a = 0; a < k; ++a) {
      const auto& r = s_.routes[static_cast<std::size_t>(a)];
      if (stations_in(inst_, r) < 2) {
        for (int st = inst_.customer_count() + 1; st < inst_.depot_end(); ++st) {
          for (std::size_t pos = 1; pos < r.size(); ++pos) {
            if (r[pos - 1] == st || r[pos] == st) continue;
            Route n = r;
            n.insert(n.begin() + static_cast<std::ptrdiff_t>(pos), st);
            offer({a}, {std::move(n)});
          }
        }
      }
      for (std::size_t i = 1; i + 1 < r.size(); ++i) {
        if (!inst_.is_station(r[i])) continue;
        Route n = r;
        n.erase(n.begin() + static_cast<std::ptrdiff_t>(i));
        offer({a}, {std::move(n)});
      }
    }
  }

  const Instance& inst_;
  const Solution& s_;
  const std::vector<double>& scores_;
  const TabuList& tabu_;
  RouteCache& cache_;
  double aspiration_;
  std::optional<Move> best_;
  std::optional<Move> best_tabu_;
};

}  // namespace

Solution tabu_search(const Instance& inst, const Solution& start, const SearchParams& p,
                     TabuList& tabu, RouteCache& cache, Rng& rng) {
  Solution current = start;
  std::vector<double> scores;
  for (const auto& r : current.routes) scores.push_back(cache.score(r).f_gen);
  auto feasible = [&](const Solution& sol) {
    return std::none_of(sol.routes.begin(), sol.routes.end(),
                        [&](const Route& r) { return cache.score(r).phi.any(kFeasibilityTolerance); });
  };
  double f = std::accumulate(scores.begin(), scores.end(), 0.0);
  Solution best = current;
  double best_f = f;
  bool best_feasible = feasible(current);
  std::uniform_int_distribution<int> tenure(p.tenure_min, p.tenure_max);
  for (int it = 0; it < p.tabu_iters; ++it) {
    NeighborScan scan(inst, current, scores, tabu, cache, best_f - f);
    auto move = scan.best();
    if (!move) break;  // no neighbor at all

    std::vector<Edge> before;
    std::vector<Edge> after;
    for (int i : move->indices) collect_edges(current.routes[static_cast<std::size_t>(i)], before);
    for (const auto& r : move->routes) collect_edges(r, after);
    std::sort(before.begin(), before.end());
    std::sort(after.begin(), after.end());
    std::vector<Edge> removed;
    std::set_difference(before.begin(), before.end(), after.begin(), after.end(),
                        std::back_inserter(removed));
    tabu.tick();
    for (const auto& e : removed) tabu.forbid(e.first, e.second, tabu.now() + tenure(rng));

    for (std::size_t i = 0; i < move->indices.size(); ++i) {
      const auto idx = static_cast<std::size_t>(move->indices[i]);
      current.routes[idx] = std::move(move->routes[i]);
      scores[idx] = cache.score(current.routes[idx]).f_gen;
    }
    if (p.check_conservation) check_conservation(inst, current);
    f = std::accumulate(scores.begin(), scores.end(), 0.0);
    const bool now_feasible = feasible(current);
    if ((now_feasible && !best_feasible) || (now_feasible == best_feasible && f < best_f - kImprove)) {
      best = current;
      best_f = f;
      best_feasible = now_feasible;
    }
  }
  best.plans.clear();
  return best;
}

bool accept(double incumbent, double candidate, double temp, Rng& rng) {
  if (candidate <= incumbent) return true;
  if (temp <= 0.0) return false;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng) < std::exp((incumbent - candidate) / temp);
}

double initial_temperature(double f, double kappa) {
  const double scale = std::abs(f) > 0.0 ? std::abs(f) : 1.0;
  return kappa * scale / std::log(2.0);
}

Temperature::Temperature(double t0, int iters)
    : t0_(t0),
      iters_(std::max(iters, 1)),
      tail_start_(static_cast<int>(std::floor(0.8 * std::max(iters, 1))) + 1),
      tail_level_(std::min(kTailLevel, t0 / 2.0)) {}

double Temperature::at(int iteration) const {
  if (iteration <= 1) return tail_start_ <= 1 ? tail_level_ : t0_;
  if (iteration < tail_start_) {
    const double frac = static_cast<double>(iteration - 1) / (tail_start_ - 1);
    return t0_ + (tail_level_ - t0_) * frac;
  }
  return tail_level_ * (1.0 - static_cast<double>(iteration - tail_start_) / (iters_ + 1));
}

HeuristicResult vns_ts(const Instance& inst, const SearchParams& params) {
  HeuristicResult out;
  out.params = resolve_params(inst, params);
  const auto& p = out.params;
  Rng rng(p.seed);
  RouteCache cache(inst, p.betas);
  TabuList tabu;

  Solution current = sweep_init(inst, inst.fleet().vehicles, rng);
  out.initial = current;
  out.initial_cost = evaluate_solution(inst, out.initial, p.betas);
  double f_current = out.initial_cost.f_gen;
  const double t0 = initial_temperature(f_current, p.kappa);
  out.initial_temperature = t0;
  const Temperature temp(t0, p.vns_iters);

  Solution best = current;
  double best_f = f_current;
  bool best_feasible = out.initial_cost.feasible();
  int best_iter = 0;

  auto record = [&](int iteration, const SolutionCost& c, bool accepted, double t) {
    TraceRow row;
    row.iteration = iteration;
    row.f_gen = c.f_gen;
    row.f_elec = c.f_elec;
    row.phi = c.phi;
    row.feasible = c.feasible();
    row.accepted = accepted;
    row.temperature = t;
    row.best_f_gen = best_f;
    row.best_iter = best_iter;
    out.trace.push_back(row);
  };
  record(0, out.initial_cost, true, t0);

  int counter = 0;
  for (int i = 1; i <= p.vns_iters; ++i) {
    const Solution shaken = cyclic_exchange(inst, current, p, rng);
    Solution candidate = tabu_search(inst, shaken, p, tabu, cache, rng);
    SolutionCost cost = evaluate_solution(inst, candidate, p.betas);

    const bool feasible = cost.feasible();
    if ((feasible && !best_feasible) ||
        (feasible == best_feasible && cost.f_gen < best_f - kImprove)) {
      best = candidate;
      best_f = cost.f_gen;
      best_feasible = feasible;
      best_iter = i;
    }

    counter = f_current > cost.f_gen + kImprove ? 0 : counter + 1;
    const double t = temp.at(i);
    if (counter >= p.early_stop) {
      record(i, cost, false, t);
      break;
    }
    const bool accepted = accept(f_current, cost.f_gen, t, rng);
    if (accepted) {
      current = std::move(candidate);
      f_current = cost.f_gen;
    }
    record(i, cost, accepted, t);
  }

  out.best = best;
  out.cost = evaluate_solution(inst, out.best, p.betas);
  out.best_iter = best_iter;
  return out;
}

std::string trace_to_csv(const std::vector<TraceRow>& trace) {
  CsvTable t({"iteration", "f_gen", "f_elec", "phi_tw", "phi_batt", "phi_cargo", "feasible",
              "accepted", "temperature", "best_f_gen", "best_iter"});
  for (const auto& r : trace) {
    t.add_row({std::to_string(r.iteration), format_double(r.f_gen), format_double(r.f_elec),
               format_double(r.phi.tw), format_double(r.phi.batt), format_double(r.phi.cargo),
               r.feasible ? "1" : "0", r.accepted ? "1" : "0", format_double(r.temperature),
               format_double(r.best_f_gen), std::to_string(r.best_iter)});
  }
  return t.str();
}

}  // namespace evrptw
