#include "evrptw/instance.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "evrptw/error.h"

namespace evrptw {

namespace {

constexpr double kWindowTolerance = 1e-9;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string_view strip_comment(std::string_view s) {
  const auto hash = s.find('#');
  return hash == std::string_view::npos ? s : s.substr(0, hash);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::optional<double> to_double(std::string_view s) {
  double value = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::optional<int> to_int(std::string_view s) {
  int value = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

double number_or_throw(std::string_view s, int line, const char* what) {
  if (auto v = to_double(s)) return *v;
  throw ParseError(line, std::string("malformed line: bad ") + what + " '" +
                             std::string(s) + "'");
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<std::pair<int, std::string_view>> numbered_lines(std::string_view text) {
  std::vector<std::pair<int, std::string_view>> lines;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    lines.emplace_back(++number, text.substr(pos, end - pos));
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return lines;
}

// Consumes PRICES-section lines starting at `begin` (the line after the
// PRICES keyword). Stops at the first unrecognised line; returns its index.
std::size_t parse_price_lines(
    const std::vector<std::pair<int, std::string_view>>& lines, std::size_t begin,
    PriceSchedule& out, int keyword_line) {
  std::optional<double> delta;
  std::optional<double> night;
  std::map<int, PeriodPrice> periods;
  std::map<int, int> period_lines;
  std::size_t i = begin;
  for (; i < lines.size(); ++i) {
    const auto [number, raw] = lines[i];
    const auto body = trim(strip_comment(raw));
    if (body.empty()) continue;
    const auto tokens = split_ws(body);
    if (tokens[0] == "delta") {
      if (tokens.size() != 2) throw ParseError(number, "malformed line: expected 'delta <minutes>'");
      delta = number_or_throw(tokens[1], number, "period length");
      if (*delta <= 0.0) throw ParseError(number, "period length must be positive");
    } else if (tokens[0] == "night") {
      if (tokens.size() != 2) throw ParseError(number, "malformed line: expected 'night <price>'");
      night = number_or_throw(tokens[1], number, "night price");
      if (*night < 0.0) throw ParseError(number, "prices must be non-negative");
    } else if (auto t = to_int(tokens[0])) {
      if (tokens.size() != 3) {
        throw ParseError(number, "malformed line: expected '<period> <charge> <discharge>'");
      }
      if (*t < 1) throw ParseError(number, "period index must be >= 1");
      if (periods.count(*t)) throw ParseError(number, "duplicate period " + std::to_string(*t));
      PeriodPrice p{number_or_throw(tokens[1], number, "charge cost"),
                    number_or_throw(tokens[2], number, "discharge reward")};
      if (p.charge < 0.0 || p.discharge < 0.0) {
        throw ParseError(number, "prices must be non-negative");
      }
      periods[*t] = p;
      period_lines[*t] = number;
    } else {
      break;
    }
  }
  if (!delta) throw ParseError(keyword_line, "PRICES section lacks 'delta'");
  if (!night) throw ParseError(keyword_line, "PRICES section lacks 'night'");
  if (periods.empty()) throw ParseError(keyword_line, "PRICES section has no periods");
  const int count = static_cast<int>(periods.size());
  if (periods.rbegin()->first != count) {
    for (int t = 1; t <= count; ++t) {
      if (!periods.count(t)) {
        throw ParseError(keyword_line, "PRICES section misses period " + std::to_string(t));
      }
    }
  }
  out.period_length = *delta;
  out.night = *night;
  out.periods.clear();
  for (const auto& [t, p] : periods) out.periods.push_back(p);
  return i;
}

struct ParamSpec {
  char key;
  const char* label;
};

constexpr ParamSpec kParams[] = {
    {'Q', "Vehicle fuel tank capacity"}, {'C', "Vehicle load capacity"},
    {'r', "fuel consumption rate"},      {'g', "inverse refueling rate"},
    {'v', "average Velocity"},           {'K', "number of vehicles"},
};

}  // namespace

PeriodPrice price_at(const PriceSchedule& prices, int t) {
  if (t < 1 || t > prices.period_count()) {
    throw std::out_of_range("period " + std::to_string(t) + " outside 1.." +
                            std::to_string(prices.period_count()));
  }
  return prices.periods[static_cast<std::size_t>(t - 1)];
}

PriceSchedule parse_prices(std::string_view text) {
  const auto lines = numbered_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto body = trim(strip_comment(lines[i].second));
    if (body.empty()) continue;
    if (body != "PRICES") throw ParseError(lines[i].first, "expected PRICES keyword");
    PriceSchedule out;
    const auto stop = parse_price_lines(lines, i + 1, out, lines[i].first);
    for (std::size_t j = stop; j < lines.size(); ++j) {
      if (!trim(strip_comment(lines[j].second)).empty()) {
        throw ParseError(lines[j].first, "malformed line in PRICES section");
      }
    }
    return out;
  }
  throw ParseError(0, "missing PRICES section");
}

std::string serialize_prices(const PriceSchedule& prices) {
  std::ostringstream out;
  out << "PRICES\n";
  out << "delta " << format_number(prices.period_length) << '\n';
  for (int t = 1; t <= prices.period_count(); ++t) {
    const auto& p = prices.periods[static_cast<std::size_t>(t - 1)];
    out << t << ' ' << format_number(p.charge) << ' ' << format_number(p.discharge) << '\n';
  }
  out << "night " << format_number(prices.night) << '\n';
  return out.str();
}

std::vector<std::string> builtin_scheme_ids() {
  std::vector<std::string> ids;
  for (const auto& [id, text] : detail::builtin_scheme_texts()) ids.push_back(id);
  return ids;
}

PriceSchedule builtin_scheme(std::string_view id) {
  for (const auto& [name, text] : detail::builtin_scheme_texts()) {
    if (name == id) return parse_prices(text);
  }
  throw Error("unknown pricing scheme '" + std::string(id) + "'");
}

Instance::Instance(std::string name, std::vector<Node> nodes, FleetParams fleet,
                   PriceSchedule prices,
                   std::optional<std::vector<std::vector<double>>> distances)
    : name_(std::move(name)),
      nodes_(std::move(nodes)),
      fleet_(fleet),
      prices_(std::move(prices)) {
  for (const auto& n : nodes_) {
    if (n.kind == NodeKind::Customer) ++customers_;
    if (n.kind == NodeKind::Station) ++stations_;
  }
  validate();
  precompute(distances);
}

void Instance::validate() const {
  const int n = node_count();
  if (n < 2) throw Error("instance needs at least the two depot nodes");
  for (int id = 0; id < n; ++id) {
    const auto& node = nodes_[id];
    if (node.id != id) throw Error("node ids must equal their position");
    NodeKind expected = NodeKind::Customer;
    if (id == 0) {
      expected = NodeKind::DepotStart;
    } else if (id == n - 1) {
      expected = NodeKind::DepotEnd;
    } else if (id > customers_) {
      expected = NodeKind::Station;
    }
    if (node.kind != expected) throw Error("node " + std::to_string(id) + " has the wrong kind");
    if (node.kind != NodeKind::Customer && (node.demand != 0.0 || node.service != 0.0)) {
      throw Error("node " + node.name + ": stations and depots carry no demand or service");
    }
    if (node.ready > node.due) throw Error("node " + node.name + ": window start after window end");
    if (node.ready < 0.0 || node.due > prices_.horizon() + kWindowTolerance) {
      throw Error("node " + node.name + ": window exceeds horizon");
    }
  }
  if (fleet_.vehicles < 1 || fleet_.cargo_capacity <= 0.0 || fleet_.battery_capacity <= 0.0 ||
      fleet_.recharge_rate <= 0.0 || fleet_.consumption_rate <= 0.0 || fleet_.velocity <= 0.0) {
    throw Error("fleet parameters must be strictly positive");
  }
  if (prices_.periods.empty() || prices_.period_length <= 0.0) {
    throw Error("price schedule needs at least one period");
  }
}

void Instance::precompute(const std::optional<std::vector<std::vector<double>>>& explicit_matrix) {
  const auto n = nodes_.size();
  distance_.assign(n * n, 0.0);
  travel_.assign(n * n, 0.0);
  charge_.assign(n * n, 0.0);
  if (explicit_matrix) {
    if (explicit_matrix->size() != n) throw Error("distance matrix has the wrong size");
    for (const auto& row : *explicit_matrix) {
      if (row.size() != n) throw Error("distance matrix has the wrong size");
    }
    explicit_distances_ = true;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double a = 0.0;
      if (explicit_matrix) {
        a = (*explicit_matrix)[i][j];
        if (a < 0.0 || !std::isfinite(a)) throw Error("distances must be finite and non-negative");
      } else {
        a = std::hypot(nodes_[i].x - nodes_[j].x, nodes_[i].y - nodes_[j].y);
      }
      distance_[i * n + j] = a;
      travel_[i * n + j] = a / fleet_.velocity;
      charge_[i * n + j] = fleet_.recharge_rate * fleet_.consumption_rate * a;
    }
  }
}

EdgeQuantities Instance::edge(int i, int j) const {
  if (i < 0 || j < 0 || i >= node_count() || j >= node_count()) {
    throw std::out_of_range("invalid node id");
  }
  const double a = distance(i, j);
  return {a, travel_time(i, j), fleet_.consumption_rate * a, charge_time(i, j)};
}

Instance Instance::with_vehicles(int k) const {
  Instance copy = *this;
  copy.fleet_.vehicles = k;
  copy.validate();
  return copy;
}

Instance Instance::with_prices(PriceSchedule prices) const {
  Instance copy = *this;
  copy.prices_ = std::move(prices);
  copy.validate();
  return copy;
}

Instance parse_instance(std::string_view text, std::string name,
                        std::optional<PriceSchedule> fallback_prices) {
  struct RawNode {
    Node node;
    char type;
    int line;
  };
  const auto lines = numbered_lines(text);
  std::vector<RawNode> raw;
  std::set<std::string, std::less<>> seen_ids;
  std::map<char, double> params;
  std::optional<PriceSchedule> prices;
  std::optional<std::vector<std::vector<double>>> file_matrix;
  int prices_line = 0;

  std::size_t i = 0;
  while (i < lines.size()) {
    const auto [number, raw_line] = lines[i];
    const auto body = trim(strip_comment(raw_line));
    if (body.empty() || body.starts_with("StringID")) {
      ++i;
      continue;
    }
    if (body == "PRICES") {
      if (prices) throw ParseError(number, "duplicate PRICES section");
      PriceSchedule parsed;
      i = parse_price_lines(lines, i + 1, parsed, number);
      prices = std::move(parsed);
      prices_line = number;
      continue;
    }
    if (body == "DISTANCES") {
      if (file_matrix) throw ParseError(number, "duplicate DISTANCES section");
      std::vector<std::vector<double>> rows;
      const std::size_t expected = raw.size();
      ++i;
      while (i < lines.size() && rows.size() < expected) {
        const auto row_body = trim(strip_comment(lines[i].second));
        if (!row_body.empty()) {
          const auto tokens = split_ws(row_body);
          if (tokens.size() != expected) {
            throw ParseError(lines[i].first, "malformed line: distance row needs " +
                                                 std::to_string(expected) + " values");
          }
          std::vector<double> row;
          for (auto t : tokens) row.push_back(number_or_throw(t, lines[i].first, "distance"));
          rows.push_back(std::move(row));
        }
        ++i;
      }
      if (rows.size() != expected) throw ParseError(number, "DISTANCES section is incomplete");
      file_matrix = std::move(rows);
      continue;
    }
    const auto tokens = split_ws(body);
    const auto slash = body.find('/');
    if (slash != std::string_view::npos && tokens[0].size() == 1) {
      const char key = tokens[0][0];
      const bool known = std::any_of(std::begin(kParams), std::end(kParams),
                                     [&](const ParamSpec& p) { return p.key == key; });
      const auto close = body.find('/', slash + 1);
      if (!known || close == std::string_view::npos) {
        throw ParseError(number, "malformed line: unknown parameter line");
      }
      const auto value = trim(body.substr(slash + 1, close - slash - 1));
      if (params.count(key)) throw ParseError(number, "duplicate parameter " + std::string(1, key));
      params[key] = number_or_throw(value, number, "parameter value");
      ++i;
      continue;
    }
    if (tokens.size() != 8) {
      throw ParseError(number, "malformed line: expected 8 fields in node row");
    }
    if (tokens[1].size() != 1 || std::string_view("dfc").find(tokens[1][0]) == std::string_view::npos) {
      throw ParseError(number, "malformed line: node type must be d, f or c");
    }
    if (file_matrix) throw ParseError(number, "node rows must precede the DISTANCES section");
    if (!seen_ids.insert(std::string(tokens[0])).second) {
      throw ParseError(number, "duplicate node id '" + std::string(tokens[0]) + "'");
    }
    RawNode rn;
    rn.type = tokens[1][0];
    rn.line = number;
    rn.node.name = std::string(tokens[0]);
    rn.node.x = number_or_throw(tokens[2], number, "x");
    rn.node.y = number_or_throw(tokens[3], number, "y");
    rn.node.demand = number_or_throw(tokens[4], number, "demand");
    rn.node.ready = number_or_throw(tokens[5], number, "ready time");
    rn.node.due = number_or_throw(tokens[6], number, "due date");
    rn.node.service = number_or_throw(tokens[7], number, "service time");
    if (rn.type != 'c' && (rn.node.demand != 0.0 || rn.node.service != 0.0)) {
      throw ParseError(number, "stations and depots carry no demand or service");
    }
    if (rn.node.demand < 0.0 || rn.node.service < 0.0) {
      throw ParseError(number, "demand and service time must be non-negative");
    }
    raw.push_back(std::move(rn));
    ++i;
  }

  for (const auto& p : kParams) {
    if (p.key != 'K' && !params.count(p.key)) {
      throw ParseError(0, std::string("missing fleet parameter ") + p.key + " (" + p.label + ")");
    }
  }
  if (!prices) {
    if (!fallback_prices) throw ParseError(0, "missing PRICES section");
    prices = std::move(fallback_prices);
  }

  const auto depots = std::count_if(raw.begin(), raw.end(), [](const RawNode& r) { return r.type == 'd'; });
  if (depots != 1) throw ParseError(0, "instance needs exactly one depot row");

  const double horizon = prices->horizon();
  for (const auto& r : raw) {
    if (r.node.ready > r.node.due) throw ParseError(r.line, "window start after window end");
    if (r.node.ready < 0.0 || r.node.due > horizon + kWindowTolerance) {
      throw ParseError(r.line, "window exceeds horizon");
    }
  }

  // Assign model ids: depot, customers, stations, end depot. `order[k]` is the
  // raw row index of id k.
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < raw.size(); ++k) if (raw[k].type == 'd') order.push_back(k);
  for (std::size_t k = 0; k < raw.size(); ++k) if (raw[k].type == 'c') order.push_back(k);
  for (std::size_t k = 0; k < raw.size(); ++k) if (raw[k].type == 'f') order.push_back(k);
  order.push_back(order.front());

  std::vector<Node> nodes;
  for (std::size_t id = 0; id < order.size(); ++id) {
    Node n = raw[order[id]].node;
    n.id = static_cast<int>(id);
    const char type = raw[order[id]].type;
    n.kind = type == 'c'   ? NodeKind::Customer
             : type == 'f' ? NodeKind::Station
             : id == 0     ? NodeKind::DepotStart
                           : NodeKind::DepotEnd;
    nodes.push_back(std::move(n));
  }

  std::optional<std::vector<std::vector<double>>> matrix;
  if (file_matrix) {
    const auto n = order.size();
    matrix.emplace(n, std::vector<double>(n, 0.0));
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) (*matrix)[a][b] = (*file_matrix)[order[a]][order[b]];
    }
  }

  FleetParams fleet;
  fleet.battery_capacity = params['Q'];
  fleet.cargo_capacity = params['C'];
  fleet.consumption_rate = params['r'];
  fleet.recharge_rate = params['g'];
  fleet.velocity = params['v'];
  if (params.count('K')) {
    const double k = params['K'];
    if (k < 1.0 || k != std::floor(k)) throw ParseError(0, "fleet size K must be a positive integer");
    fleet.vehicles = static_cast<int>(k);
  }
  if (fleet.battery_capacity <= 0.0 || fleet.cargo_capacity <= 0.0 || fleet.consumption_rate <= 0.0 ||
      fleet.recharge_rate <= 0.0 || fleet.velocity <= 0.0) {
    throw ParseError(0, "fleet parameters must be strictly positive");
  }
  (void)prices_line;

  try {
    return Instance(std::move(name), std::move(nodes), fleet, std::move(*prices), std::move(matrix));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(0, e.what());
  }
}

Instance load_instance(const std::string& path, std::optional<PriceSchedule> fallback_prices) {
  std::ifstream in(path);
  if (!in) throw Error("instance not found: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  auto stem = path;
  if (const auto slash = stem.find_last_of('/'); slash != std::string::npos) stem = stem.substr(slash + 1);
  if (const auto dot = stem.find_last_of('.'); dot != std::string::npos) stem = stem.substr(0, dot);
  return parse_instance(buffer.str(), stem, std::move(fallback_prices));
}

std::string serialize_instance(const Instance& instance) {
  std::ostringstream out;
  out << "StringID Type x y demand ReadyTime DueDate ServiceTime\n";
  auto row = [&](const Node& n, char type) {
    out << n.name << ' ' << type << ' ' << format_number(n.x) << ' ' << format_number(n.y) << ' '
        << format_number(n.demand) << ' ' << format_number(n.ready) << ' ' << format_number(n.due)
        << ' ' << format_number(n.service) << '\n';
  };
  const auto& nodes = instance.nodes();
  row(nodes.front(), 'd');
  for (const auto& n : nodes) if (n.kind == NodeKind::Station) row(n, 'f');
  for (const auto& n : nodes) if (n.kind == NodeKind::Customer) row(n, 'c');
  const auto& f = instance.fleet();
  out << '\n';
  out << "Q Vehicle fuel tank capacity /" << format_number(f.battery_capacity) << "/\n";
  out << "C Vehicle load capacity /" << format_number(f.cargo_capacity) << "/\n";
  out << "r fuel consumption rate /" << format_number(f.consumption_rate) << "/\n";
  out << "g inverse refueling rate /" << format_number(f.recharge_rate) << "/\n";
  out << "v average Velocity /" << format_number(f.velocity) << "/\n";
  out << "K number of vehicles /" << f.vehicles << "/\n";
  if (instance.has_explicit_distances()) {
    // Rows follow the node rows above: depot, stations, customers.
    std::vector<int> file_order{0};
    for (const auto& n : nodes) if (n.kind == NodeKind::Station) file_order.push_back(n.id);
    for (const auto& n : nodes) if (n.kind == NodeKind::Customer) file_order.push_back(n.id);
    out << "\nDISTANCES\n";
    for (int a : file_order) {
      for (std::size_t b = 0; b < file_order.size(); ++b) {
        out << (b ? " " : "") << format_number(instance.distance(a, file_order[b]));
      }
      out << '\n';
    }
  }
  out << '\n' << serialize_prices(instance.prices());
  return out.str();
}

}  // namespace evrptw
