#include "quenchlab/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace quenchlab {

void AnnealSchedule::check() const {
  if (knots.size() < 2) throw ValidationError("schedule needs at least 2 knots");
  if (knots.front().s != 0.0 || knots.back().s != 1.0)
    throw ValidationError("schedule must span s in [0, 1] exactly");
  for (std::size_t k = 1; k < knots.size(); ++k) {
    if (!(knots[k].s > knots[k - 1].s)) throw ValidationError("schedule s must be strictly increasing");
    if (knots[k].gamma > knots[k - 1].gamma + 1e-15)
      throw ValidationError("Gamma(s) must be non-increasing");
    if (knots[k].jscale < knots[k - 1].jscale - 1e-15)
      throw ValidationError("J(s) must be non-decreasing");
  }
  if (!(knots.front().gamma > knots.front().jscale && knots.back().gamma < knots.back().jscale))
    throw ValidationError("schedule must cross: Gamma(0) > J(0) and Gamma(1) < J(1)");
}

std::pair<double, double> AnnealSchedule::eval(double s) const {
  if (s < 0.0 || s > 1.0)
    throw ValidationError("schedule eval: s = " + std::to_string(s) + " outside [0, 1]");
  auto hi = std::lower_bound(knots.begin(), knots.end(), s,
                             [](const Knot& k, double v) { return k.s < v; });
  if (hi == knots.begin()) return {knots.front().gamma, knots.front().jscale};
  if (hi == knots.end()) return {knots.back().gamma, knots.back().jscale};
  const Knot& b = *hi;
  const Knot& a = *(hi - 1);
  if (b.s == s) return {b.gamma, b.jscale};
  const double t = (s - a.s) / (b.s - a.s);
  return {a.gamma + t * (b.gamma - a.gamma), a.jscale + t * (b.jscale - a.jscale)};
}

double AnnealSchedule::crossing_point() const {
  double lo = 0.0, hi = 1.0;
  auto diff = [&](double s) {
    const auto [g, j] = eval(s);
    return g - j;
  };
  double flo = diff(lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = diff(mid);
    if (std::abs(fm) < 1e-12 || hi - lo < 1e-16) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

AnnealSchedule model_linear_schedule() {
  AnnealSchedule sch;
  sch.name = "model-linear";
  sch.knots = {{0.0, 4.0, 0.0}, {1.0, 0.0, 4.0}};
  return sch;
}

AnnealSchedule load_schedule_csv(const std::string& text, const std::string& name) {
  AnnealSchedule sch;
  sch.name = name;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    if (lineno == 1) {
      if (line.rfind("s,Gamma_GHz,J_GHz", 0) != 0)
        throw ParseError("schedule CSV line 1: expected header 's,Gamma_GHz,J_GHz'");
      continue;
    }
    std::istringstream row(line);
    std::string field;
    double vals[3];
    for (int c = 0; c < 3; ++c) {
      if (!std::getline(row, field, ','))
        throw ParseError("schedule CSV line " + std::to_string(lineno) + ": expected 3 fields");
      try {
        vals[c] = std::stod(field);
      } catch (const std::exception&) {
        throw ParseError("schedule CSV line " + std::to_string(lineno) + ": bad number '" + field + "'");
      }
    }
    sch.knots.push_back({vals[0], vals[1], vals[2]});
  }
  sch.check();
  return sch;
}

AnnealSchedule load_schedule_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open schedule file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return load_schedule_csv(ss.str(), path);
}

std::string schedule_to_csv(const AnnealSchedule& schedule) {
  std::ostringstream out;
  out.precision(17);
  out << "s,Gamma_GHz,J_GHz\n";
  for (const auto& k : schedule.knots) out << k.s << "," << k.gamma << "," << k.jscale << "\n";
  return out.str();
}

AnnealSchedule resolve_schedule(const std::string& ref) {
  if (ref.empty() || ref == "model-linear") return model_linear_schedule();
  return load_schedule_file(ref);
}

void QuenchSpec::check() const {
  // Full schedule invariants (monotone quench, crossing) are enforced when a
  // schedule is loaded or synthesized; engines only need evaluable knots, so
  // frozen-Hamiltonian diagnostics stay expressible.
  if (schedule.knots.size() < 2) throw ValidationError("schedule needs at least 2 knots");
  for (std::size_t k = 1; k < schedule.knots.size(); ++k)
    if (!(schedule.knots[k].s > schedule.knots[k - 1].s))
      throw ValidationError("schedule s must be strictly increasing");
  if (!(dt_ns > 0)) throw ValidationError("quench requires dt > 0");
  if (!(dt_ns <= t_a_ns)) throw ValidationError("quench requires dt <= t_a");
  if (!(s_stop > 0.0 && s_stop <= 1.0)) throw ValidationError("s_stop must lie in (0, 1]");
}

int QuenchSpec::step_count() const {
  return std::max(1, static_cast<int>(std::llround(s_stop * t_a_ns / dt_ns)));
}

}  // namespace quenchlab
