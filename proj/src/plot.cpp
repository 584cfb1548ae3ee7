#include "evrptw/plot.h"

#include <algorithm>
#include <array>
#include <limits>
#include <sstream>

#include "evrptw/csv.h"

namespace evrptw {

namespace {

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

const char* route_colour(std::size_t r) { return kPalette[r % kPalette.size()]; }

std::string num(double v) { return format_fixed(v, 2); }

struct Frame {
  double x0, x1, y0, y1;  // data bounds
  double width, height, margin;

  double px(double x) const { return margin + (x - x0) / std::max(x1 - x0, 1e-9) * (width - 2 * margin); }
  double py(double y) const {
    return height - margin - (y - y0) / std::max(y1 - y0, 1e-9) * (height - 2 * margin);
  }
};

void header(std::ostringstream& out, double w, double h) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h)
      << "\" viewBox=\"0 0 " << num(w) << ' ' << num(h) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

}  // namespace

std::string route_map_svg(const Instance& inst, const Solution& solution) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& n : inst.nodes()) {
    x0 = std::min(x0, n.x);
    x1 = std::max(x1, n.x);
    y0 = std::min(y0, n.y);
    y1 = std::max(y1, n.y);
  }
  const Frame f{x0, x1, y0, y1, 600.0, 600.0, 40.0};
  std::ostringstream out;
  header(out, f.width, f.height);
  out << "<text x=\"10\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << inst.name()
      << "</text>\n";

  for (std::size_t r = 0; r < solution.routes.size(); ++r) {
    out << "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << route_colour(r) << "\" points=\"";
    for (int id : solution.routes[r]) {
      if (id < 0 || id >= inst.node_count()) continue;
      out << num(f.px(inst.node(id).x)) << ',' << num(f.py(inst.node(id).y)) << ' ';
    }
    out << "\"/>\n";
  }

  for (const auto& n : inst.nodes()) {
    if (n.kind == NodeKind::DepotEnd) continue;
    const double x = f.px(n.x), y = f.py(n.y);
    switch (n.kind) {
      case NodeKind::DepotStart:
        out << "<rect x=\"" << num(x - 7) << "\" y=\"" << num(y - 7)
            << "\" width=\"14\" height=\"14\" fill=\"black\"/>\n";
        break;
      case NodeKind::Station:
        out << "<polygon fill=\"#2ca02c\" stroke=\"black\" points=\"" << num(x) << ',' << num(y - 8) << ' '
            << num(x - 7) << ',' << num(y + 6) << ' ' << num(x + 7) << ',' << num(y + 6) << "\"/>\n";
        break;
      default:
        out << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y)
            << "\" r=\"5\" fill=\"#4a90d9\" stroke=\"black\"/>\n";
        break;
    }
    out << "<text x=\"" << num(x + 8) << "\" y=\"" << num(y - 8)
        << "\" font-family=\"sans-serif\" font-size=\"10\">" << n.name << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string battery_chart_svg(const Instance& inst, const Solution& solution) {
  const double full = inst.full_charge_time();
  const double delta = inst.prices().period_length;
  const Frame f{0.0, inst.horizon(), 0.0, full, 800.0, 400.0, 50.0};
  std::ostringstream out;
  header(out, f.width, f.height);

  // Axes with one tick per period.
  out << "<g stroke=\"black\" stroke-width=\"1\">\n";
  out << "<line x1=\"" << num(f.px(0)) << "\" y1=\"" << num(f.py(0)) << "\" x2=\"" << num(f.px(f.x1))
      << "\" y2=\"" << num(f.py(0)) << "\"/>\n";
  out << "<line x1=\"" << num(f.px(0)) << "\" y1=\"" << num(f.py(0)) << "\" x2=\"" << num(f.px(0))
      << "\" y2=\"" << num(f.py(full)) << "\"/>\n";
  for (int t = 0; t <= inst.prices().period_count(); ++t) {
    const double x = f.px(t * delta);
    out << "<line x1=\"" << num(x) << "\" y1=\"" << num(f.py(0)) << "\" x2=\"" << num(x) << "\" y2=\""
        << num(f.py(0) + 4) << "\"/>\n";
  }
  out << "</g>\n";
  out << "<text x=\"" << num(f.width / 2) << "\" y=\"" << num(f.height - 10)
      << "\" font-family=\"sans-serif\" font-size=\"12\">minutes</text>\n";
  out << "<text x=\"5\" y=\"" << num(f.margin - 10) << "\" font-family=\"sans-serif\" font-size=\"12\">battery ("
      << num(full) << " full)</text>\n";

  for (std::size_t r = 0; r < solution.routes.size(); ++r) {
    const auto& route = solution.routes[r];
    const ChargePlan empty;
    const ChargePlan& plan = r < solution.plans.size() ? solution.plans[r] : empty;
    RouteTrace tr;
    try {
      tr = simulate_route(inst, route, plan, static_cast<int>(r));
    } catch (const std::exception&) {
      continue;
    }
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < tr.arrival.size(); ++i) {
      double b = tr.battery[i];
      pts.emplace_back(tr.arrival[i], b);
      if (const VisitPlan* v = plan.at(static_cast<int>(i))) {
        for (const auto& a : v->actions) {
          if (a.action == Action::Idle) continue;
          const double start = std::max(tr.arrival[i], (a.period - 1) * delta);
          pts.emplace_back(start, b);
          b += a.action == Action::Charge ? delta : -delta;
          pts.emplace_back(a.period * delta, b);
        }
      }
      pts.emplace_back(tr.departure[i], b);
    }
    out << "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << route_colour(r) << "\" points=\"";
    for (const auto& [t, b] : pts) out << num(f.px(t)) << ',' << num(f.py(b)) << ' ';
    out << "\"/>\n";
    out << "<text x=\"" << num(f.width - 90) << "\" y=\"" << num(20 + 14 * static_cast<double>(r))
        << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << route_colour(r) << "\">vehicle "
        << r + 1 << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace evrptw
