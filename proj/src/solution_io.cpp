#include "evrptw/solution_io.h"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "evrptw/error.h"

namespace evrptw {

using json = nlohmann::ordered_json;

std::string solution_to_json(const Instance& inst, const Solution& solution,
                             const SolutionSummary& summary) {
  json doc;
  doc["format"] = "evrptw-solution/1";
  doc["instance"] = inst.name();
  doc["vehicles"] = inst.fleet().vehicles;
  json routes = json::array();
  for (std::size_t r = 0; r < solution.routes.size(); ++r) {
    json route;
    route["nodes"] = solution.routes[r];
    json plan = json::array();
    if (r < solution.plans.size()) {
      for (const auto& visit : solution.plans[r].visits) {
        json actions = json::array();
        for (const auto& pa : visit.actions) actions.push_back({pa.period, action_name(pa.action)});
        plan.push_back({{"position", visit.position}, {"actions", std::move(actions)}});
      }
    }
    route["plan"] = std::move(plan);
    routes.push_back(std::move(route));
  }
  doc["routes"] = std::move(routes);
  doc["objective"] = summary.objective;
  doc["feasible"] = summary.feasible;
  doc["violations"] = {{"tw", summary.phi.tw}, {"batt", summary.phi.batt}, {"cargo", summary.phi.cargo}};
  return doc.dump(2) + "\n";
}

Solution solution_from_json(const std::string& text) {
  Solution out;
  try {
    const auto doc = json::parse(text);
    if (doc.value("format", std::string()) != "evrptw-solution/1") {
      throw ParseError(0, "not an evrptw solution document");
    }
    for (const auto& route : doc.at("routes")) {
      out.routes.push_back(route.at("nodes").get<Route>());
      ChargePlan plan;
      for (const auto& visit : route.at("plan")) {
        VisitPlan vp;
        vp.position = visit.at("position").get<int>();
        for (const auto& a : visit.at("actions")) {
          const auto name = a.at(1).get<std::string>();
          Action action = Action::Idle;
          if (name == "charge") {
            action = Action::Charge;
          } else if (name == "discharge") {
            action = Action::Discharge;
          } else if (name != "idle") {
            throw ParseError(0, "unknown action '" + name + "'");
          }
          vp.actions.push_back({a.at(0).get<int>(), action});
        }
        plan.visits.push_back(std::move(vp));
      }
      out.plans.push_back(std::move(plan));
    }
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("malformed solution: ") + e.what());
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("cannot write " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("file not found: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace evrptw
