#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "quenchlab/correlations.hpp"
#include "quenchlab/graph.hpp"
#include "quenchlab/samples.hpp"

namespace quenchlab {

/// Normalized root-mean-square correlation error
///   eps_c = sqrt( sum_{i!=j} (c_ij - cref_ij)^2 / sum_{i!=j} cref_ij^2 ).
/// `undefined` is set (value = +inf) when the reference off-diagonals vanish.
struct EpsilonResult {
  double value = 0.0;
  bool undefined = false;
};

EpsilonResult epsilon_c(const CorrelationMatrix& c, const CorrelationMatrix& c_ref);

/// Nearest-neighbor variant: sums restricted to the graph's edges.
EpsilonResult epsilon_c_nn(const CorrelationMatrix& c, const CorrelationMatrix& c_ref,
                           const CouplingGraph& graph);

/// Spin-glass order parameter q^2 = 2/(N(N-1)) sum_{i<j} c_ij^2.
double q2_from_correlations(const CorrelationMatrix& c);

/// Replica-overlap moments over unordered sample pairs. Uses exact pair
/// enumeration when feasible, otherwise a seeded subsample of >= min_pairs.
struct OverlapMoments {
  double q2 = 0.0;  // <q_ab^2>, raw (diagonal contribution ~1/N included)
  double q4 = 0.0;  // <q_ab^4>
  std::int64_t pairs = 0;
  /// Diagonal-corrected q^2 estimator matching Eq-(3) correlations.
  double q2_corrected(int n) const;
};

OverlapMoments overlap_moments(const SampleSet& samples, std::int64_t min_pairs = 100000,
                               std::uint64_t seed = 0);

/// Binder cumulant U = (3 - [<q^4>]/[<q^2>]^2)/2 with disorder averages taken
/// before the ratio. Throws when moments are empty; `undefined` when
/// [<q^2>] = 0.
struct BinderResult {
  double u = 0.0;
  bool undefined = false;
};
BinderResult binder_u(const std::vector<OverlapMoments>& realizations);

/// Classical fidelity F = sum_z sqrt(p q) and total variation distance,
/// computed over the union of observed states.
struct FidelityTv {
  double fidelity = 0.0;
  double tv = 0.0;
};
FidelityTv classical_fidelity_tv(const std::map<std::uint64_t, double>& p,
                                 const std::map<std::uint64_t, double>& q);
FidelityTv classical_fidelity_tv(const SampleSet& p, const SampleSet& q);

/// Residual energy <H_P> - E0 in dimensionless J units.
struct ResidualEnergy {
  double value = 0.0;
  bool per_spin = false;
  bool lower_bound_uncertain = false;  // set when E0 came from a heuristic
};
ResidualEnergy residual_energy(const SampleSet& samples, const CouplingGraph& graph, double e0,
                               const std::string& e0_tag, bool per_spin = false);
ResidualEnergy residual_energy(const CorrelationMatrix& c, const CouplingGraph& graph, double e0,
                               const std::string& e0_tag, bool per_spin = false);

/// (chi, eps_c) curve against one ground truth, chi strictly increasing.
struct ErrorCurve {
  std::vector<std::pair<double, double>> points;
  std::string truth_ref;
  void check() const;
};

enum class ChiQTag { exact_point, interpolated, lower_bound, upper_bound };

struct ChiQResult {
  double chi_q = 0.0;
  ChiQTag tag = ChiQTag::interpolated;
  bool non_monotone = false;
};

/// QPU-equivalent bond dimension: log-log interpolation of (chi, eps) to the
/// chi where eps equals target_error. Out-of-range targets return tagged
/// bounds at the curve ends; non-monotone curves use the first crossing.
ChiQResult chi_q(const ErrorCurve& curve, double target_error);

/// Entrywise linear extrapolation of correlations in 1/chi from (chi_lo,
/// chi_hi) to chi_target (default sqrt(2)*chi_hi). Entries clamped to [-1,1],
/// diagonal reset to 1, result symmetrized.
CorrelationMatrix partial_extrapolation(const CorrelationMatrix& c_lo, double chi_lo,
                                        const CorrelationMatrix& c_hi, double chi_hi,
                                        double chi_target = 0.0);

/// MPS resource extrapolation from the measured anchor point
/// (54 qubits, chi = 724, t_a = 7 ns) = (12 GB, 7e4 s) at 300 W:
///   memory ~ N chi^2, time ~ N t_a chi^3, energy = time * 300 W.
struct ResourceEstimate {
  double memory_bytes = 0.0;
  double gpu_seconds = 0.0;
  double energy_joules = 0.0;
};
ResourceEstimate resource_estimate(double n, double chi, double t_a_ns);

/// Spearman rank correlation (ties broken by average ranks).
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace quenchlab
