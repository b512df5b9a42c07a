#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "quenchlab/correlations.hpp"
#include "quenchlab/graph.hpp"
#include "quenchlab/samples.hpp"
#include "quenchlab/schedule.hpp"

namespace quenchlab {

/// Matrix product state in graph.mps_order. Site tensor p is stored as two
/// chi_left x chi_right matrices, one per physical state (0 = spin up).
/// Sites left of `center` are left-isometric, right of it right-isometric.
struct MpsState {
  std::vector<std::array<Eigen::MatrixXcd, 2>> tensors;
  int chi_max = 0;
  double svd_threshold = 1e-12;  // discarded-weight threshold per split
  int center = 0;
  double cumulative_discarded = 0.0;  // sum of relative discarded weights

  int n() const { return static_cast<int>(tensors.size()); }
  std::vector<int> bond_dims() const;  // n-1 interior bonds
  double norm() const;

  void move_center_to(int site);  // lossless gauge moves
};

/// Per-checkpoint bipartite entanglement entropies (nats) at every MPS cut.
struct EntropyTrace {
  std::vector<double> s_values;
  std::vector<std::vector<double>> cut_entropy;  // [checkpoint][cut 0..n-2]
  double s_max() const;
};

struct TdvpOptions {
  double svd_threshold = 1e-12;
  int krylov_cap = 100;
  double krylov_tol = 1e-12;
  int checkpoints = 101;  // evenly spaced s values for the entropy trace
};

/// Two-site DMRG ground state of H(0) = Gamma(0) H_D + J(0) H_P. Truncation
/// threshold zero (keep up to chi), bond dimensions padded to >= 2 so that
/// TDVP is well defined.
MpsState dmrg_init(const CouplingGraph& graph, const AnnealSchedule& schedule, int chi,
                   int max_sweeps = 40, double rel_tol = 1e-11);

/// Two-site TDVP quench evolution to s_stop, recording entanglement at the
/// checkpoint grid and accumulating discarded weight.
std::pair<MpsState, EntropyTrace> tdvp_evolve(MpsState state, const CouplingGraph& graph,
                                              const QuenchSpec& quench, int chi,
                                              const TdvpOptions& options = {});

/// Exact O(N^2 chi^3) contraction of all two-point functions (node-indexed).
CorrelationMatrix mps_correlations(const MpsState& state, const CouplingGraph& graph);

/// k iid samples from |a_z|^2 by sequential conditional sampling in canonical
/// gauge; rows are node-indexed.
SampleSet mps_sample(const MpsState& state, const CouplingGraph& graph, std::int64_t k,
                     std::uint64_t seed);

/// Amplitude of one node-indexed +-1 configuration.
cplx amplitude(const MpsState& state, const CouplingGraph& graph,
               const std::vector<std::int8_t>& spins);

/// Schmidt entropies (nats) at all n-1 cuts of the current state.
std::vector<double> schmidt_entropies(const MpsState& state);

/// <H> at fixed (gamma, jscale); used by DMRG convergence checks and tests.
double mps_energy(const MpsState& state, const CouplingGraph& graph, double gamma, double jscale);

/// Per-site <sigma^z_i> (node-indexed).
std::vector<double> mps_magnetization(const MpsState& state, const CouplingGraph& graph);

}  // namespace quenchlab
