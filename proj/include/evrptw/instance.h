#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace evrptw {

// Node ids follow the model's numbering: 0 is the start depot, customers are
// 1..N, stations N+1..N+S and the end depot is N+S+1.
enum class NodeKind { DepotStart, DepotEnd, Customer, Station };

struct Node {
  int id = 0;
  NodeKind kind = NodeKind::Customer;
  std::string name;  // StringID of the instance file
  double x = 0.0;
  double y = 0.0;
  double demand = 0.0;   // cargo units
  double ready = 0.0;    // earliest service start, minutes
  double due = 0.0;      // latest service start, minutes
  double service = 0.0;  // minutes
};

struct FleetParams {
  int vehicles = 1;               // K
  double cargo_capacity = 0.0;    // Q
  double battery_capacity = 0.0;  // C, energy units
  double recharge_rate = 0.0;     // alpha, minutes per energy unit
  double consumption_rate = 0.0;  // g, energy per distance unit
  double velocity = 0.0;          // v, distance per minute

  // B = alpha * C: minutes needed to charge an empty battery.
  double full_charge_time() const { return recharge_rate * battery_capacity; }
};

struct PeriodPrice {
  double charge = 0.0;     // cost of charging for one full period
  double discharge = 0.0;  // reward for discharging for one full period

  bool operator==(const PeriodPrice&) const = default;
};

// Prices are per period of length `period_length`, never per minute.
struct PriceSchedule {
  double period_length = 60.0;
  std::vector<PeriodPrice> periods;  // periods[t - 1] is period t
  double night = 0.0;                // cost of one period of overnight charging

  int period_count() const { return static_cast<int>(periods.size()); }
  double horizon() const { return period_length * period_count(); }

  bool operator==(const PriceSchedule&) const = default;
};

// Price pair of period `t` (1-based). Throws std::out_of_range.
PeriodPrice price_at(const PriceSchedule& prices, int t);

// Parses the PRICES grammar (a standalone scheme file or the trailing section
// of an instance file).
PriceSchedule parse_prices(std::string_view text);
std::string serialize_prices(const PriceSchedule& prices);

// Built-in schemes: A-summer, A-winter, B-summer, B-winter, C, D.
std::vector<std::string> builtin_scheme_ids();
// Throws evrptw::Error for unknown ids.
PriceSchedule builtin_scheme(std::string_view id);

struct EdgeQuantities {
  double distance = 0.0;     // a_ij
  double travel_time = 0.0;  // t_ij = a_ij / v
  double energy = 0.0;       // c_ij = g * a_ij
  double charge_time = 0.0;  // f_ij = alpha * c_ij
};

class Instance {
 public:
  // `nodes` must already be in id order (see NodeKind). When `distances` is
  // given it is a full square matrix over all node ids; otherwise Euclidean
  // distances are computed from the coordinates.
  Instance(std::string name, std::vector<Node> nodes, FleetParams fleet,
           PriceSchedule prices,
           std::optional<std::vector<std::vector<double>>> distances = {});

  const std::string& name() const { return name_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(int id) const { return nodes_.at(id); }
  const FleetParams& fleet() const { return fleet_; }
  const PriceSchedule& prices() const { return prices_; }
  bool has_explicit_distances() const { return explicit_distances_; }

  int customer_count() const { return customers_; }
  int station_count() const { return stations_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  int depot_start() const { return 0; }
  int depot_end() const { return node_count() - 1; }

  bool is_customer(int id) const { return nodes_[id].kind == NodeKind::Customer; }
  bool is_station(int id) const { return nodes_[id].kind == NodeKind::Station; }
  // Stations and both depot copies can charge or discharge.
  bool is_charge_capable(int id) const { return !is_customer(id); }

  double full_charge_time() const { return fleet_.full_charge_time(); }
  double horizon() const { return prices_.horizon(); }

  double distance(int i, int j) const { return distance_[index(i, j)]; }
  double travel_time(int i, int j) const { return travel_[index(i, j)]; }
  double charge_time(int i, int j) const { return charge_[index(i, j)]; }
  EdgeQuantities edge(int i, int j) const;

  // Copy with a different fleet size or price schedule. The replacement
  // schedule is validated against the node time windows.
  Instance with_vehicles(int k) const;
  Instance with_prices(PriceSchedule prices) const;

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * nodes_.size() + static_cast<std::size_t>(j);
  }
  void validate() const;
  void precompute(const std::optional<std::vector<std::vector<double>>>& explicit_matrix);

  std::string name_;
  std::vector<Node> nodes_;
  FleetParams fleet_;
  PriceSchedule prices_;
  int customers_ = 0;
  int stations_ = 0;
  bool explicit_distances_ = false;
  std::vector<double> distance_;
  std::vector<double> travel_;
  std::vector<double> charge_;
};

// Reads the extended Schneider format. Node rows may appear in any order; the
// depot row is duplicated into the start and end depot. When the file has no
// PRICES section, `fallback_prices` is used (ParseError if absent).
Instance parse_instance(std::string_view text, std::string name = {},
                        std::optional<PriceSchedule> fallback_prices = {});
Instance load_instance(const std::string& path,
                       std::optional<PriceSchedule> fallback_prices = {});
std::string serialize_instance(const Instance& instance);

namespace detail {
const std::vector<std::pair<std::string, std::string>>& builtin_scheme_texts();
}

}  // namespace evrptw
