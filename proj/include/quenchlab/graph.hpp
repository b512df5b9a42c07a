#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "quenchlab/common.hpp"
#include "quenchlab/rational.hpp"

namespace quenchlab {

enum class Topology { square, cubic_dimer, cubic_nodimer, diamond, biclique, chain };
enum class Precision { low, high, pure };

std::string to_string(Topology t);
std::string to_string(Precision p);
Topology topology_from_string(const std::string& s);
Precision precision_from_string(const std::string& s);

struct Edge {
  int i = 0;  // i < j always
  int j = 0;
  Rational coupling;  // drawn value; cubic-dimer z-splits store J/2 exactly
  bool is_dimer = false;
};

/// One disorder realization: weighted coupling graph plus the metadata needed
/// to reproduce it (topology, dims, precision class, seed) and the canonical
/// MPS ordering. Immutable after construction; safe to share across threads.
struct CouplingGraph {
  Topology topology = Topology::chain;
  std::vector<int> dims;
  int n = 0;
  std::vector<Edge> edges;  // sorted by (i, j)
  std::vector<std::string> periodic_dims;
  Precision precision = Precision::pure;
  std::uint64_t seed = 0;
  std::vector<int> mps_order;  // mps_order[p] = node placed at MPS position p

  /// Effective coupling of an edge. Biclique non-dimer couplings carry the
  /// extensivity rescale 1/sqrt(M/4) on top of the stored rational.
  double coupling_value(const Edge& e) const;
  double coupling_scale(const Edge& e) const;

  /// Classical problem energy (dimensionless J units) of a +-1 configuration
  /// indexed by node id.
  double classical_energy(const std::vector<int>& spins) const;

  std::vector<int> degrees() const;
};

/// Deterministically generates one disorder realization.
///   square      dims (Lx, Ly), cylinder periodic in x, Lx >= 3
///   cubic_dimer dims (Lx, Ly, Lz), dimers J=-2, z-couplings split in half,
///               periodic in z iff Lz > 2
///   cubic_nodimer  same frame, no dimers, single z-coupler per site pair
///   diamond     dims (Lx, Ly, Lz), Lz divisible by 4, periodic in z
///   biclique    dims (M), K_{M,M} of dimers, couplers rescaled by 1/sqrt(M/4)
///   chain       dims (L), open path
CouplingGraph generate(Topology topology, const std::vector<int>& dims, Precision precision,
                       std::uint64_t seed);

/// Pattern MPS ordering for a recognized topology: spiral along the periodic
/// dimension (square), one-dimension-at-a-time with dimer partners adjacent
/// (cubic, diamond), half/whole/half partition sweep (biclique).
std::vector<int> canonical_mps_order(const CouplingGraph& graph);

/// Max number of edges crossing any prefix/suffix cut of the given ordering.
/// Brute-force enumeration; used as the ordering-quality oracle.
int cut_width(const CouplingGraph& graph, const std::vector<int>& order);

std::string save(const CouplingGraph& graph);
CouplingGraph load(const std::string& bytes);
void save_file(const CouplingGraph& graph, const std::string& path);
CouplingGraph load_file(const std::string& path);

/// Re-checks all structural invariants (precision-class membership, dimer
/// matching, ordering bijection, node-count formula). Throws on violation.
void validate(const CouplingGraph& graph);

namespace detail {
// Node indexing conventions, shared with validate() and the decomposition
// module. Documented in the README format notes.
int square_node(int x, int y, int lx);
int cubic_node(int x, int y, int z, int t, int lx, int ly);
int diamond_node(int x, int yp, int w, int ly, int lzq);
struct DiamondCoord {
  int a, b, c;  // physical integer coordinates (a/4 lattice units)
};
DiamondCoord diamond_coord(int x, int yp, int w, const std::vector<int>& dims);
}  // namespace detail

}  // namespace quenchlab
