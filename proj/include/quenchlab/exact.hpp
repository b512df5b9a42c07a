#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "quenchlab/correlations.hpp"
#include "quenchlab/graph.hpp"
#include "quenchlab/samples.hpp"
#include "quenchlab/schedule.hpp"

namespace quenchlab {

/// Dense 2^n amplitude vector. Basis convention: MPS position p (the p-th
/// node in graph.mps_order) maps to bit (n-1-p) of the basis index; bit value
/// b encodes spin 1-2b.
struct StateVector {
  int n = 0;
  std::vector<cplx> amp;

  static int site_bit_shift(int n, int p) { return n - 1 - p; }
  static int spin_at(std::uint64_t z, int n, int p) {
    return ((z >> site_bit_shift(n, p)) & 1ULL) ? -1 : 1;
  }
  double norm() const;
};

enum class ExactMethod { trotter2, krylov };

struct ExactObservables {
  CorrelationMatrix correlations;       // node-indexed
  std::vector<double> distribution;     // probability per basis state
  double energy_z = 0.0;                // <H_P> in dimensionless J units
  std::vector<double> entropy_cut;      // S_A per MPS-order cut, nats
};

/// Ground state of H = gamma*H_D + jscale*H_P by Lanczos (full reorthogonalization).
std::pair<double, StateVector> lanczos_ground(const CouplingGraph& graph, double gamma,
                                              double jscale, int max_iter = 400,
                                              double tol = 1e-12);

/// Schroedinger evolution of H(t) = Gamma(s) H_D + J(s) H_P from the ground
/// state of H(0) to s_stop * t_a. trotter2 uses the H_D/2 -> H_P -> H_D/2
/// splitting with mid-step schedule values; krylov uses Lanczos exponentials
/// (<= 100 vectors, tolerance 1e-12) of the mid-step Hamiltonian.
StateVector evolve_exact(const CouplingGraph& graph, const QuenchSpec& quench, ExactMethod method,
                         int hard_cap = 26);

ExactObservables exact_observables(const StateVector& psi, const CouplingGraph& graph);

/// <H_P> of a state, dimensionless J units.
double exact_energy_z(const StateVector& psi, const CouplingGraph& graph);

/// Exact classical ground-state energy of H_P by exhaustive enumeration with
/// spin-flip halving for n <= 28; simulated-annealing best-of-restarts above
/// that, tagged "heuristic".
std::pair<double, std::string> classical_ground_energy(const CouplingGraph& graph,
                                                       int enum_cap = 28,
                                                       int sa_restarts = 100,
                                                       std::uint64_t sa_seed = 1);

/// Draws k configurations (node-indexed) from |psi|^2.
SampleSet sample_state(const StateVector& psi, const CouplingGraph& graph, std::int64_t k,
                       std::uint64_t seed);

/// Exact distribution re-keyed by node bitmask (bit v set when spin v is -1).
std::vector<std::pair<std::uint64_t, double>> node_distribution(const StateVector& psi,
                                                                const CouplingGraph& graph);

namespace detail {
/// out = (gamma*H_D + jscale*H_P) * in, matrix-free.
void apply_hamiltonian(const CouplingGraph& graph, double gamma, double jscale,
                       const std::vector<double>& diag_energy, const std::vector<cplx>& in,
                       std::vector<cplx>& out);
/// E_P(z) per basis state, dimensionless J units.
std::vector<double> diagonal_energy(const CouplingGraph& graph);
}  // namespace detail

}  // namespace quenchlab
