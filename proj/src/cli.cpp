#include "evrptw/cli.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "evrptw/charge_sched.h"
#include "evrptw/csv.h"
#include "evrptw/error.h"
#include "evrptw/generator.h"
#include "evrptw/heuristic.h"
#include "evrptw/lagrangian.h"
#include "evrptw/oracle.h"
#include "evrptw/plot.h"
#include "evrptw/solution_io.h"

namespace evrptw {

namespace fs = std::filesystem;

namespace {

// Options shared by the subcommands that load an instance.
struct RunConfig {
  std::string instance;
  int k = 0;  // 0: fleet size of the instance file
  std::string scheme;
  std::string scheme_file;
  std::uint64_t seed = 1;
  int iters_vns = -1;
  int iters_tabu = 30;
  std::string out = ".";
  int guard = 0;  // 0: per-command default
};

class InputError : public Error {
 public:
  using Error::Error;
};

void add_instance_options(CLI::App* cmd, RunConfig& cfg, bool need_instance = true) {
  auto* opt = cmd->add_option("--instance", cfg.instance, "instance file");
  if (need_instance) opt->required();
  cmd->add_option("--k", cfg.k, "fleet size (defaults to the instance's K)")->check(CLI::PositiveNumber);
  cmd->add_option("--scheme", cfg.scheme, "built-in price scheme");
  cmd->add_option("--scheme-file", cfg.scheme_file, "price scheme file");
}

void add_search_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--seed", cfg.seed, "random seed");
  cmd->add_option("--iters-vns", cfg.iters_vns, "VNS iterations (default depends on size)");
  cmd->add_option("--iters-tabu", cfg.iters_tabu, "tabu iterations per VNS iteration");
}

std::optional<PriceSchedule> requested_prices(const RunConfig& cfg) {
  if (!cfg.scheme.empty() && !cfg.scheme_file.empty()) {
    throw InputError("--scheme and --scheme-file are mutually exclusive");
  }
  if (!cfg.scheme.empty()) return builtin_scheme(cfg.scheme);
  if (!cfg.scheme_file.empty()) {
    if (!fs::exists(cfg.scheme_file)) throw InputError("scheme file not found: " + cfg.scheme_file);
    return parse_prices(read_text_file(cfg.scheme_file));
  }
  return std::nullopt;
}

Instance load_run_instance(const RunConfig& cfg) {
  if (!fs::is_regular_file(cfg.instance)) throw InputError("instance not found: " + cfg.instance);
  const auto prices = requested_prices(cfg);
  Instance inst = load_instance(cfg.instance, prices ? *prices : builtin_scheme("A-summer"));
  if (prices) inst = inst.with_prices(*prices);
  if (cfg.k > 0) inst = inst.with_vehicles(cfg.k);
  return inst;
}

SearchParams search_params(const RunConfig& cfg) {
  SearchParams p;
  p.seed = cfg.seed;
  p.vns_iters = cfg.iters_vns;
  p.tabu_iters = cfg.iters_tabu;
  return p;
}

std::string out_path(const RunConfig& cfg, const std::string& file) {
  fs::create_directories(cfg.out);
  return (fs::path(cfg.out) / file).string();
}

double total_distance(const Instance& inst, const Solution& s) {
  double d = 0.0;
  for (const auto& r : s.routes) {
    for (std::size_t i = 0; i + 1 < r.size(); ++i) d += inst.distance(r[i], r[i + 1]);
  }
  return d;
}

double action_hours(const Instance& inst, const Solution& s, Action a) {
  int periods = 0;
  for (const auto& plan : s.plans) periods += plan.count(a);
  return periods * inst.prices().period_length / 60.0;
}

std::string percent_gap(double ub, double lb) {
  if (std::abs(lb) < 1e-12) return "nan";
  return format_fixed(100.0 * (ub - lb) / std::abs(lb), 2) + "%";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_solution_artifacts(const RunConfig& cfg, const Instance& inst, const Solution& s,
                              const SolutionCost& cost, const std::string& stem, std::ostream& out) {
  SolutionSummary summary{cost.f_elec, cost.feasible(), cost.phi};
  const auto json_path = out_path(cfg, stem + ".solution.json");
  write_text_file(json_path, solution_to_json(inst, s, summary));
  write_text_file(out_path(cfg, stem + ".routes.svg"), route_map_svg(inst, s));
  write_text_file(out_path(cfg, stem + ".battery.svg"), battery_chart_svg(inst, s));
  out << "solution: " << json_path << "\n";
}

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
  const Instance inst = load_run_instance(cfg);
  const auto result = vns_ts(inst, search_params(cfg));
  write_solution_artifacts(cfg, inst, result.best, result.cost, inst.name(), out);
  const auto trace_path = out_path(cfg, inst.name() + ".trace.csv");
  write_text_file(trace_path, trace_to_csv(result.trace));
  out << "trace: " << trace_path << "\n";
  out << "f_elec: " << format_fixed(result.cost.f_elec, 4) << "\n";
  out << "f_gen: " << format_fixed(result.cost.f_gen, 4) << "\n";
  out << "feasible: " << (result.cost.feasible() ? "yes" : "no") << "\n";
  out << "best_iter: " << result.best_iter << "\n";
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg, const std::string& solution_path, std::ostream& out) {
  if (!fs::is_regular_file(solution_path)) throw InputError("solution not found: " + solution_path);
  const std::string text = read_text_file(solution_path);
  Solution s = solution_from_json(text);
  RunConfig c = cfg;
  if (c.k <= 0) {
    // Verify against the fleet the solution was produced for.
    const auto doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_object() && doc.contains("vehicles") && doc["vehicles"].is_number_integer()) {
      c.k = doc["vehicles"].get<int>();
    }
  }
  const Instance inst = load_run_instance(c);
  const auto report = verify_full(inst, s);
  out << "feasible: " << (report.feasible ? "yes" : "no") << "\n";
  out << "objective: " << format_fixed(report.objective, 6) << "\n";
  for (const auto& v : report.violations) {
    out << "violation: " << v.constraint << " route=" << v.route << " node=" << v.node
        << " position=" << v.position << " period=" << v.period << " " << v.detail << "\n";
  }
  return report.feasible ? kExitOk : kExitInfeasible;
}

int cmd_oracle(const RunConfig& cfg, std::ostream& out) {
  const Instance inst = load_run_instance(cfg);
  SearchCaps caps;
  if (cfg.guard > 0) caps.max_customers = cfg.guard;
  const auto result = exact_search(inst, inst.fleet().vehicles, caps);
  if (!result.feasible) {
    out << "feasible: no\n";
    return kExitInfeasible;
  }
  Solution s = result.solution;
  const auto cost = evaluate_solution(inst, s, Betas{});
  write_solution_artifacts(cfg, inst, s, cost, inst.name() + ".oracle", out);
  out << "f_elec: " << format_fixed(result.f_elec, 4) << "\n";
  out << "feasible: yes\n";
  out << "customer_sequences: " << result.counters.customer_sequences << "\n";
  out << "candidate_routes: " << result.counters.candidate_routes << "\n";
  out << "feasible_routes: " << result.counters.feasible_routes << "\n";
  return kExitOk;
}

int cmd_bound(const RunConfig& cfg, int iters, double upper_bound, std::ostream& out) {
  const Instance inst = load_run_instance(cfg);
  BoundParams bp;
  bp.max_iters = iters;
  if (cfg.guard > 0) bp.guard = cfg.guard;
  if (std::isnan(upper_bound)) {
    const auto h = vns_ts(inst, search_params(cfg));
    upper_bound = h.cost.f_elec;
  }
  bp.upper_bound = upper_bound;
  const auto trace = maximize_bound(inst, bp);
  const auto path = out_path(cfg, inst.name() + ".bound.csv");
  write_text_file(path, bound_trace_to_csv(trace));
  out << "trace: " << path << "\n";
  out << "upper_bound: " << format_fixed(upper_bound, 4) << "\n";
  out << "lower_bound: " << format_fixed(trace.best_lb, 4) << "\n";
  out << "iterations: " << trace.iterations.size() << "\n";
  return kExitOk;
}

struct BenchRow {
  std::vector<std::string> cells;
};

BenchRow bench_one(const RunConfig& base, const std::string& path, int oracle_guard, int bound_guard) {
  RunConfig cfg = base;
  cfg.instance = path;
  std::string name = fs::path(path).stem().string();
  try {
    const Instance inst = load_run_instance(cfg);
    name = inst.name();
    auto t0 = std::chrono::steady_clock::now();
    const auto h = vns_ts(inst, search_params(cfg));
    const double t_ub = seconds_since(t0);
    const double ub = h.cost.f_elec;

    std::string lb_cell = "skipped-by-guard", t_lb = "", gap_lb = "";
    if (inst.customer_count() <= bound_guard) {
      BoundParams bp;
      bp.upper_bound = ub;
      bp.guard = bound_guard;
      t0 = std::chrono::steady_clock::now();
      const auto b = maximize_bound(inst, bp);
      t_lb = format_fixed(seconds_since(t0), 3);
      lb_cell = format_fixed(b.best_lb, 4);
      gap_lb = percent_gap(ub, b.best_lb);
    }
    std::string opt_cell = "skipped-by-guard", t_opt = "", gap_opt = "";
    if (inst.customer_count() <= oracle_guard) {
      SearchCaps caps;
      caps.max_customers = oracle_guard;
      t0 = std::chrono::steady_clock::now();
      const auto o = exact_search(inst, inst.fleet().vehicles, caps);
      t_opt = format_fixed(seconds_since(t0), 3);
      if (o.feasible) {
        opt_cell = format_fixed(o.f_elec, 4);
        gap_opt = percent_gap(ub, o.f_elec);
      } else {
        opt_cell = "infeasible";
      }
    }
    return {{name, std::to_string(inst.customer_count()), std::to_string(inst.fleet().vehicles),
             format_fixed(ub, 4), h.cost.feasible() ? "1" : "0", std::to_string(h.best_iter),
             format_fixed(t_ub, 3), lb_cell, t_lb, gap_lb, opt_cell, t_opt, gap_opt, "ok"}};
  } catch (const std::exception& e) {
    return {{name, "", "", "", "", "", "", "", "", "", "", "", "", std::string("error: ") + e.what()}};
  }
}

int bench_threads() {
  int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("EVRPTW_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return n;
}

int cmd_bench(const RunConfig& cfg, const std::string& dir, std::ostream& out) {
  if (!fs::is_directory(dir)) throw InputError("instance directory not found: " + dir);
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InputError("no instance files (*.txt) in " + dir);

  const int oracle_guard = cfg.guard > 0 ? cfg.guard : SearchCaps{}.max_customers;
  const int bound_guard = cfg.guard > 0 ? cfg.guard : BoundParams{}.guard;
  std::vector<BenchRow> rows(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < files.size(); i = next++) {
      rows[i] = bench_one(cfg, files[i], oracle_guard, bound_guard);
    }
  };
  const int n_threads = std::min<int>(bench_threads(), static_cast<int>(files.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  CsvTable table({"instance", "customers", "vehicles", "ub", "ub_feasible", "best_iter", "time_ub_s", "lb",
                  "time_lb_s", "gap_lb", "oracle", "time_oracle_s", "gap_oracle", "status"});
  for (auto& r : rows) table.add_row(std::move(r.cells));
  const auto csv = table.str();
  write_text_file(out_path(cfg, "bench.csv"), csv);
  out << csv;
  return kExitOk;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

int cmd_schemes(const RunConfig& cfg, const std::vector<std::string>& schemes, bool exact, std::ostream& out) {
  if (schemes.empty()) throw InputError("no schemes given");
  RunConfig base = cfg;
  base.scheme.clear();
  base.scheme_file.clear();
  const Instance inst = load_run_instance(base);
  CsvTable table({"scheme", "distance", "f_elec", "charge_hours", "discharge_hours", "feasible"});
  for (const auto& id : schemes) {
    const Instance priced = inst.with_prices(builtin_scheme(id));
    Solution s;
    SolutionCost cost;
    if (exact) {
      SearchCaps caps;
      if (cfg.guard > 0) caps.max_customers = cfg.guard;
      s = exact_search(priced, priced.fleet().vehicles, caps).solution;
    } else {
      s = vns_ts(priced, search_params(cfg)).best;
    }
    cost = evaluate_solution(priced, s, Betas{});
    table.add_row({id, format_fixed(total_distance(priced, s), 4), format_fixed(cost.f_elec, 4),
                   format_fixed(action_hours(priced, s, Action::Charge), 2),
                   format_fixed(action_hours(priced, s, Action::Discharge), 2), cost.feasible() ? "1" : "0"});
  }
  const auto csv = table.str();
  write_text_file(out_path(cfg, inst.name() + ".schemes.csv"), csv);
  out << csv;
  return kExitOk;
}

int cmd_generate(const RunConfig& cfg, const std::string& name, int set, std::ostream& out) {
  const auto prices = requested_prices(cfg).value_or(builtin_scheme("A-summer"));
  std::vector<RosterEntry> entries;
  if (!name.empty()) {
    entries.push_back({name, cfg.k > 0 ? cfg.k : 1});
  } else {
    entries = benchmark_roster(set);
    if (entries.empty()) throw InputError("no roster for " + std::to_string(set) + " customers");
    if (cfg.k > 0) {
      for (auto& e : entries) e.vehicles = cfg.k;
    }
  }
  for (const auto& e : entries) {
    const auto g = generate_feasible_instance(spec_from_name(e.name, e.vehicles), prices);
    const auto path = out_path(cfg, e.name + ".txt");
    write_text_file(path, serialize_instance(g.instance));
    out << path << " attempt=" << g.attempt << "\n";
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Electric vehicle routing with time windows and time-of-use prices", "evrptw"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* solve = app.add_subcommand("solve", "run the VNS/TS heuristic and write solution, trace and plots");
  add_instance_options(solve, cfg);
  add_search_options(solve, cfg);
  solve->add_option("--out", cfg.out, "output directory");

  std::string solution_path;
  auto* verify = app.add_subcommand("verify", "check a solution file against the full model");
  verify->add_option("--solution", solution_path, "solution JSON")->required();
  add_instance_options(verify, cfg);

  int bound_iters = BoundParams{}.max_iters;
  double upper_bound = std::nan("");
  auto* bound = app.add_subcommand("bound", "Lagrangian lower bound by subgradient ascent");
  add_instance_options(bound, cfg);
  add_search_options(bound, cfg);
  bound->add_option("--iters", bound_iters, "subgradient iterations")->check(CLI::PositiveNumber);
  bound->add_option("--upper-bound", upper_bound, "step reference (default: heuristic value)");
  bound->add_option("--guard-customers", cfg.guard, "largest instance to enumerate");
  bound->add_option("--out", cfg.out, "output directory");

  auto* oracle = app.add_subcommand("oracle", "exhaustive optimum of a small instance");
  add_instance_options(oracle, cfg);
  oracle->add_option("--guard-customers", cfg.guard, "largest instance to enumerate");
  oracle->add_option("--out", cfg.out, "output directory");

  std::string bench_dir;
  auto* bench = app.add_subcommand("bench", "heuristic, bound and oracle over a directory of instances");
  bench->add_option("--dir", bench_dir, "instance directory")->required();
  bench->add_option("--scheme", cfg.scheme, "built-in price scheme");
  bench->add_option("--scheme-file", cfg.scheme_file, "price scheme file");
  add_search_options(bench, cfg);
  bench->add_option("--guard-customers", cfg.guard, "largest instance for bound and oracle");
  bench->add_option("--out", cfg.out, "output directory");

  std::string scheme_list;
  bool exact = false;
  auto* schemes = app.add_subcommand("schemes", "compare price schemes on one instance");
  add_instance_options(schemes, cfg);
  add_search_options(schemes, cfg);
  schemes->add_option("--schemes", scheme_list, "comma-separated scheme ids")->required();
  schemes->add_flag("--exact", exact, "use the exhaustive oracle instead of the heuristic");
  schemes->add_option("--guard-customers", cfg.guard, "largest instance for --exact");
  schemes->add_option("--out", cfg.out, "output directory");

  std::string gen_name;
  int gen_set = 0;
  auto* generate = app.add_subcommand("generate", "write surrogate benchmark instances");
  auto* name_opt = generate->add_option("--name", gen_name, "instance name such as C101-5");
  auto* set_opt = generate->add_option("--set", gen_set, "customer count of a benchmark roster (5, 10, 15, 30)");
  name_opt->excludes(set_opt);
  generate->add_option("--k", cfg.k, "fleet size")->check(CLI::PositiveNumber);
  generate->add_option("--scheme", cfg.scheme, "built-in price scheme");
  generate->add_option("--scheme-file", cfg.scheme_file, "price scheme file");
  generate->add_option("--out", cfg.out, "output directory");

  auto* list = app.add_subcommand("list-schemes", "print the built-in price scheme ids");

  std::vector<std::string> argv_store{"evrptw"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (solve->parsed()) return cmd_solve(cfg, out);
    if (verify->parsed()) return cmd_verify(cfg, solution_path, out);
    if (bound->parsed()) return cmd_bound(cfg, bound_iters, upper_bound, out);
    if (oracle->parsed()) return cmd_oracle(cfg, out);
    if (bench->parsed()) return cmd_bench(cfg, bench_dir, out);
    if (schemes->parsed()) return cmd_schemes(cfg, split_list(scheme_list), exact, out);
    if (generate->parsed()) {
      if (gen_name.empty() && gen_set == 0) throw InputError("generate needs --name or --set");
      return cmd_generate(cfg, gen_name, gen_set, out);
    }
    if (list->parsed()) {
      for (const auto& id : builtin_scheme_ids()) out << id << "\n";
      return kExitOk;
    }
  } catch (const GuardExceeded& e) {
    err << "error: " << e.what() << "\n";
    return kExitGuardExceeded;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace evrptw
