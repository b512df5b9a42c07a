#pragma once

#include <string>
#include <vector>

#include "quenchlab/common.hpp"

namespace quenchlab {

/// Annealing schedule (Gamma(s), J(s)) in GHz, piecewise linear between knots.
///
/// Unit convention, fixed project-wide: a term of energy E GHz acting for
/// dt ns contributes phase 2*pi*E*dt. Engines therefore integrate
/// dpsi/dt = -i * 2*pi * H(s) * psi with H in GHz and t in ns.
struct AnnealSchedule {
  struct Knot {
    double s;      // dimensionless in [0, 1]
    double gamma;  // transverse-field scale, GHz
    double jscale; // Ising energy scale, GHz
  };
  std::vector<Knot> knots;
  std::string name;

  /// (Gamma, J) at annealing parameter s in [0, 1].
  std::pair<double, double> eval(double s) const;
  double gamma(double s) const { return eval(s).first; }
  double jscale(double s) const { return eval(s).second; }

  /// The unique s* with Gamma(s*) = J(s*), found by bisection to 1e-12 GHz.
  double crossing_point() const;

  void check() const;  // throws ValidationError when invariants fail
};

/// Named synthetic default: Gamma(s) = 4(1-s) GHz, J(s) = 4s GHz.
AnnealSchedule model_linear_schedule();

/// CSV with header `s,Gamma_GHz,J_GHz`, one knot per row, >= 2 rows.
AnnealSchedule load_schedule_csv(const std::string& text, const std::string& name = "csv");
AnnealSchedule load_schedule_file(const std::string& path);
std::string schedule_to_csv(const AnnealSchedule& schedule);

/// Resolves "model-linear" or a CSV path.
AnnealSchedule resolve_schedule(const std::string& ref);

/// One quench: schedule plus total time t_a, integrator step dt, and the
/// stopping point s_stop (both in ns; s_stop dimensionless in (0, 1]).
struct QuenchSpec {
  AnnealSchedule schedule;
  double t_a_ns = 7.0;
  double dt_ns = 0.01;
  double s_stop = 1.0;

  void check() const;
  int step_count() const;  // number of dt steps to reach s_stop * t_a
};

}  // namespace quenchlab
