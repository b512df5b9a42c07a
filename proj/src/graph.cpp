#include "quenchlab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "quenchlab/rng.hpp"

namespace quenchlab {

using json = nlohmann::json;

std::string to_string(Topology t) {
  switch (t) {
    case Topology::square: return "square";
    case Topology::cubic_dimer: return "cubic_dimer";
    case Topology::cubic_nodimer: return "cubic_nodimer";
    case Topology::diamond: return "diamond";
    case Topology::biclique: return "biclique";
    case Topology::chain: return "chain";
  }
  throw ValidationError("unknown topology enum value");
}

std::string to_string(Precision p) {
  switch (p) {
    case Precision::low: return "low";
    case Precision::high: return "high";
    case Precision::pure: return "pure";
  }
  throw ValidationError("unknown precision enum value");
}

Topology topology_from_string(const std::string& s) {
  if (s == "square") return Topology::square;
  if (s == "cubic_dimer") return Topology::cubic_dimer;
  if (s == "cubic_nodimer") return Topology::cubic_nodimer;
  if (s == "diamond") return Topology::diamond;
  if (s == "biclique") return Topology::biclique;
  if (s == "chain") return Topology::chain;
  throw ParseError("unknown topology '" + s + "'");
}

Precision precision_from_string(const std::string& s) {
  if (s == "low") return Precision::low;
  if (s == "high") return Precision::high;
  if (s == "pure") return Precision::pure;
  throw ParseError("unknown precision '" + s + "'");
}

double CouplingGraph::coupling_scale(const Edge& e) const {
  if (topology == Topology::biclique && !e.is_dimer) {
    const double m = static_cast<double>(dims.at(0));
    return 1.0 / std::sqrt(m / 4.0);
  }
  return 1.0;
}

double CouplingGraph::coupling_value(const Edge& e) const {
  return e.coupling.value() * coupling_scale(e);
}

double CouplingGraph::classical_energy(const std::vector<int>& spins) const {
  double e = 0.0;
  for (const Edge& ed : edges) e += coupling_value(ed) * spins[ed.i] * spins[ed.j];
  return e;
}

std::vector<int> CouplingGraph::degrees() const {
  std::vector<int> deg(n, 0);
  for (const Edge& e : edges) {
    ++deg[e.i];
    ++deg[e.j];
  }
  return deg;
}

namespace detail {

int square_node(int x, int y, int lx) { return y * lx + x; }

int cubic_node(int x, int y, int z, int t, int lx, int ly) {
  return 2 * ((z * ly + y) * lx + x) + t;
}

int diamond_node(int x, int yp, int w, int ly, int lzq) {
  return (x * ly + yp) * lzq + w;
}

DiamondCoord diamond_coord(int x, int yp, int w, const std::vector<int>& dims) {
  const int a = x;
  const int b = 2 * yp + (x & 1);
  // Residue of c mod 4 fixed by diamond membership: all-even sites need
  // a+b+c = 0 (mod 4), all-odd sites need a+b+c = 3 (mod 4).
  const int target = (a & 1) ? 3 : 0;
  int r = ((target - a - b) % 4 + 4) % 4;
  return DiamondCoord{a, b, (4 * w + r) % dims[2]};
}

}  // namespace detail

namespace {

struct ParentCoupling {
  // A logical coupling that consumes one random draw. Cubic-dimer z-couplings
  // own two physical edges, each carrying half the drawn value.
  std::vector<std::pair<int, int>> spans;  // (i, j) with i < j
  bool halve = false;
};

std::pair<int, int> ordered(int a, int b) { return a < b ? std::make_pair(a, b) : std::make_pair(b, a); }

void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

Rational draw_coupling(Precision precision, std::uint64_t seed, std::uint64_t k) {
  if (precision == Precision::pure) return Rational(1, 1);
  const std::uint64_t r = SplitMix64::derive(seed, k);
  const bool negative = (r & 1ULL) != 0;
  if (precision == Precision::low) return Rational(negative ? -1 : 1, 1);
  const std::int64_t mag = 1 + static_cast<std::int64_t>((r >> 1) & 127ULL);
  return Rational(negative ? -mag : mag, 128);
}

struct Skeleton {
  int n = 0;
  std::vector<ParentCoupling> parents;
  std::vector<std::pair<int, int>> dimers;
  std::vector<std::string> periodic;
};

Skeleton build_square(const std::vector<int>& dims) {
  require(dims.size() == 2, "square requires dims (Lx, Ly)");
  const int lx = dims[0], ly = dims[1];
  require(lx >= 3, "square cylinder requires Lx >= 3 (periodic x)");
  require(ly >= 1, "square requires Ly >= 1");
  Skeleton sk;
  sk.n = lx * ly;
  sk.periodic = {"x"};
  for (int y = 0; y < ly; ++y)
    for (int x = 0; x < lx; ++x) {
      const int a = detail::square_node(x, y, lx);
      sk.parents.push_back({{ordered(a, detail::square_node((x + 1) % lx, y, lx))}, false});
      if (y + 1 < ly) sk.parents.push_back({{ordered(a, detail::square_node(x, y + 1, lx))}, false});
    }
  return sk;
}

Skeleton build_cubic(const std::vector<int>& dims, bool dimerized) {
  require(dims.size() == 3, "cubic requires dims (Lx, Ly, Lz)");
  const int lx = dims[0], ly = dims[1], lz = dims[2];
  require(lx >= 1 && ly >= 1 && lz >= 2, "cubic requires Lx,Ly >= 1 and Lz >= 2");
  const bool periodic_z = lz > 2;
  Skeleton sk;
  sk.n = 2 * lx * ly * lz;
  if (periodic_z) sk.periodic = {"z"};
  auto s = [&](int x, int y, int z) { return detail::cubic_node(x, y, z, 0, lx, ly); };
  auto sp = [&](int x, int y, int z) { return detail::cubic_node(x, y, z, 1, lx, ly); };
  for (int z = 0; z < lz; ++z)
    for (int y = 0; y < ly; ++y)
      for (int x = 0; x < lx; ++x) {
        if (dimerized) {
          sk.dimers.push_back(ordered(s(x, y, z), sp(x, y, z)));
        } else {
          sk.parents.push_back({{ordered(s(x, y, z), sp(x, y, z))}, false});
        }
        if (x + 1 < lx) sk.parents.push_back({{ordered(s(x, y, z), s(x + 1, y, z))}, false});
        if (y + 1 < ly) sk.parents.push_back({{ordered(sp(x, y, z), sp(x, y + 1, z))}, false});
        const bool has_up = periodic_z || z + 1 < lz;
        if (has_up) {
          const int zu = (z + 1) % lz;
          if (dimerized) {
            // One cubic-lattice z-coupling split equally across two couplers.
            sk.parents.push_back(
                {{ordered(s(x, y, z), sp(x, y, zu)), ordered(sp(x, y, z), s(x, y, zu))}, true});
          } else {
            sk.parents.push_back({{ordered(s(x, y, z), sp(x, y, zu))}, false});
          }
        }
      }
  return sk;
}

Skeleton build_diamond(const std::vector<int>& dims) {
  require(dims.size() == 3, "diamond requires dims (Lx, Ly, Lz)");
  const int lx = dims[0], ly = dims[1], lz = dims[2];
  require(lz % 4 == 0, "diamond requires Lz divisible by 4 (periodic z)");
  require(lx >= 1 && ly >= 1 && lz >= 4, "diamond requires Lx,Ly >= 1 and Lz >= 4");
  const int lzq = lz / 4;
  Skeleton sk;
  sk.n = lx * ly * lzq;
  sk.periodic = {"z"};
  // Map physical (a, b, c mod Lz) back to node ids.
  std::map<std::array<int, 3>, int> at;
  for (int x = 0; x < lx; ++x)
    for (int yp = 0; yp < ly; ++yp)
      for (int w = 0; w < lzq; ++w) {
        const auto pc = detail::diamond_coord(x, yp, w, dims);
        at[{pc.a, pc.b, pc.c}] = detail::diamond_node(x, yp, w, ly, lzq);
      }
  static const int offs[4][3] = {{1, 1, 1}, {-1, -1, 1}, {-1, 1, -1}, {1, -1, -1}};
  for (int x = 0; x < lx; ++x)
    for (int yp = 0; yp < ly; ++yp)
      for (int w = 0; w < lzq; ++w) {
        const auto pc = detail::diamond_coord(x, yp, w, dims);
        if ((pc.a + pc.b + pc.c) % 4 != 0) continue;  // bonds emitted from even sites only
        const int id = detail::diamond_node(x, yp, w, ly, lzq);
        for (const auto& d : offs) {
          const int a2 = pc.a + d[0], b2 = pc.b + d[1];
          const int c2 = ((pc.c + d[2]) % lz + lz) % lz;
          if (a2 < 0 || a2 >= lx || b2 < 0 || b2 >= 2 * ly) continue;
          const auto it = at.find({a2, b2, c2});
          if (it == at.end()) continue;
          sk.parents.push_back({{ordered(id, it->second)}, false});
        }
      }
  return sk;
}

Skeleton build_biclique(const std::vector<int>& dims) {
  require(dims.size() == 1, "biclique requires dims (M)");
  const int m = dims[0];
  require(m >= 1, "biclique requires M >= 1");
  Skeleton sk;
  sk.n = 4 * m;
  auto a_spin = [&](int i, int t) { return 2 * i + t; };
  auto b_spin = [&](int j, int t) { return 2 * m + 2 * j + t; };
  for (int i = 0; i < m; ++i) sk.dimers.push_back({a_spin(i, 0), a_spin(i, 1)});
  for (int j = 0; j < m; ++j) sk.dimers.push_back({b_spin(j, 0), b_spin(j, 1)});
  // Exactly one coupler between dimers A_i and B_j; endpoints alternate so
  // couplers spread evenly over the two spins of each dimer.
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      sk.parents.push_back({{ordered(a_spin(i, j & 1), b_spin(j, i & 1))}, false});
  return sk;
}

Skeleton build_chain(const std::vector<int>& dims) {
  require(dims.size() == 1, "chain requires dims (L)");
  const int l = dims[0];
  require(l >= 2, "chain requires L >= 2");
  Skeleton sk;
  sk.n = l;
  for (int i = 0; i + 1 < l; ++i) sk.parents.push_back({{{i, i + 1}}, false});
  return sk;
}

}  // namespace

CouplingGraph generate(Topology topology, const std::vector<int>& dims, Precision precision,
                       std::uint64_t seed) {
  if (precision == Precision::pure && topology != Topology::chain)
    throw ValidationError("pure precision is defined for chains only");
  Skeleton sk;
  switch (topology) {
    case Topology::square: sk = build_square(dims); break;
    case Topology::cubic_dimer: sk = build_cubic(dims, true); break;
    case Topology::cubic_nodimer: sk = build_cubic(dims, false); break;
    case Topology::diamond: sk = build_diamond(dims); break;
    case Topology::biclique: sk = build_biclique(dims); break;
    case Topology::chain: sk = build_chain(dims); break;
  }

  CouplingGraph g;
  g.topology = topology;
  g.dims = dims;
  g.n = sk.n;
  g.periodic_dims = sk.periodic;
  g.precision = precision;
  g.seed = seed;

  // Draw couplings over parents iterated in canonical sorted order, so the
  // seed -> instance mapping does not depend on construction order.
  std::sort(sk.parents.begin(), sk.parents.end(),
            [](const ParentCoupling& a, const ParentCoupling& b) { return a.spans[0] < b.spans[0]; });
  for (std::size_t k = 0; k < sk.parents.size(); ++k) {
    const Rational j = draw_coupling(precision, seed, static_cast<std::uint64_t>(k));
    const ParentCoupling& p = sk.parents[k];
    for (const auto& [i, jj] : p.spans)
      g.edges.push_back(Edge{i, jj, p.halve ? j.half() : j, false});
  }
  for (const auto& [i, j] : sk.dimers) g.edges.push_back(Edge{i, j, Rational(-2, 1), true});
  std::sort(g.edges.begin(), g.edges.end(),
            [](const Edge& a, const Edge& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });

  g.mps_order = canonical_mps_order(g);
  return g;
}

std::vector<int> canonical_mps_order(const CouplingGraph& graph) {
  std::vector<int> order;
  order.reserve(graph.n);
  switch (graph.topology) {
    case Topology::chain:
      for (int i = 0; i < graph.n; ++i) order.push_back(i);
      break;
    case Topology::square: {
      // Spiral along the cylinder: periodic x innermost, rows outward.
      const int lx = graph.dims[0], ly = graph.dims[1];
      for (int y = 0; y < ly; ++y)
        for (int x = 0; x < lx; ++x) order.push_back(detail::square_node(x, y, lx));
      break;
    }
    case Topology::cubic_dimer:
    case Topology::cubic_nodimer: {
      // One dimension at a time, periodic z innermost, dimer partners adjacent.
      const int lx = graph.dims[0], ly = graph.dims[1], lz = graph.dims[2];
      for (int x = 0; x < lx; ++x)
        for (int y = 0; y < ly; ++y)
          for (int z = 0; z < lz; ++z)
            for (int t = 0; t < 2; ++t) order.push_back(detail::cubic_node(x, y, z, t, lx, ly));
      break;
    }
    case Topology::diamond: {
      const int ly = graph.dims[1], lzq = graph.dims[2] / 4;
      const int lx = graph.dims[0];
      for (int x = 0; x < lx; ++x)
        for (int yp = 0; yp < ly; ++yp)
          for (int w = 0; w < lzq; ++w) order.push_back(detail::diamond_node(x, yp, w, ly, lzq));
      break;
    }
    case Topology::biclique: {
      // First half of partition A, all of B, then the remaining half of A.
      const int m = graph.dims[0];
      const int half = (m + 1) / 2;
      auto push_dimer = [&](int first_spin) {
        order.push_back(first_spin);
        order.push_back(first_spin + 1);
      };
      for (int i = 0; i < half; ++i) push_dimer(2 * i);
      for (int j = 0; j < m; ++j) push_dimer(2 * m + 2 * j);
      for (int i = half; i < m; ++i) push_dimer(2 * i);
      break;
    }
  }
  return order;
}

int cut_width(const CouplingGraph& graph, const std::vector<int>& order) {
  std::vector<int> pos(graph.n);
  for (int p = 0; p < graph.n; ++p) pos[order[p]] = p;
  int best = 0;
  for (int cut = 0; cut + 1 < graph.n; ++cut) {
    int crossing = 0;
    for (const Edge& e : graph.edges) {
      const int pi = pos[e.i], pj = pos[e.j];
      if ((pi <= cut) != (pj <= cut)) ++crossing;
    }
    best = std::max(best, crossing);
  }
  return best;
}

std::string save(const CouplingGraph& graph) {
  json j;
  j["schema_version"] = 1;
  j["topology"] = to_string(graph.topology);
  j["dims"] = graph.dims;
  j["precision"] = to_string(graph.precision);
  j["seed"] = graph.seed;
  j["n"] = graph.n;
  json edges = json::array();
  for (const Edge& e : graph.edges)
    edges.push_back({e.i, e.j, e.coupling.num, e.coupling.den, e.is_dimer ? 1 : 0});
  j["edges"] = std::move(edges);
  j["periodic_dims"] = graph.periodic_dims;
  j["mps_order"] = graph.mps_order;
  return j.dump(2) + "\n";
}

CouplingGraph load(const std::string& bytes) {
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("instance parse error: ") + e.what());
  }
  auto need = [&](const char* key) -> const json& {
    if (!j.contains(key)) throw ParseError(std::string("instance missing key '") + key + "'");
    return j.at(key);
  };
  CouplingGraph g;
  try {
    g.topology = topology_from_string(need("topology").get<std::string>());
    g.dims = need("dims").get<std::vector<int>>();
    g.precision = precision_from_string(need("precision").get<std::string>());
    g.seed = need("seed").get<std::uint64_t>();
    g.n = need("n").get<int>();
    for (const auto& row : need("edges")) {
      if (!row.is_array() || row.size() != 5)
        throw ParseError("edge rows must be [i, j, J_num, J_den, is_dimer]");
      Edge e;
      e.i = row[0].get<int>();
      e.j = row[1].get<int>();
      e.coupling = Rational(row[2].get<std::int64_t>(), row[3].get<std::int64_t>());
      e.is_dimer = row[4].get<int>() != 0;
      if (e.i >= e.j || e.i < 0 || e.j >= g.n)
        throw ParseError("edge (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                         ") out of range or unordered");
      if (!e.is_dimer && e.coupling.num == 0)
        throw ValidationError("non-dimer coupling (" + std::to_string(e.i) + "," +
                              std::to_string(e.j) + ") is zero; couplings exclude zero");
      g.edges.push_back(e);
    }
    g.periodic_dims = need("periodic_dims").get<std::vector<std::string>>();
    g.mps_order = need("mps_order").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("instance field error: ") + e.what());
  }
  if (static_cast<int>(g.mps_order.size()) != g.n)
    throw ParseError("mps_order length does not match n");
  std::vector<char> seen(g.n, 0);
  for (int v : g.mps_order) {
    if (v < 0 || v >= g.n || seen[v]) throw ValidationError("mps_order is not a bijection on nodes");
    seen[v] = 1;
  }
  return g;
}

void save_file(const CouplingGraph& graph, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot open '" + path + "' for writing");
  f << save(graph);
}

CouplingGraph load_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open instance file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return load(ss.str());
}

namespace {

bool in_precision_class(const Rational& j, Precision p) {
  if (p == Precision::low) return j.den == 1 && (j.num == 1 || j.num == -1);
  if (p == Precision::high) {
    // +-k/128 reduced by gcd: num/den == k/128 for some k in 1..128.
    if (j.num == 0) return false;
    if (128 % j.den != 0) return false;
    const std::int64_t k = (j.num < 0 ? -j.num : j.num) * (128 / j.den);
    return k >= 1 && k <= 128;
  }
  return j.den == 1 && j.num != 0;  // pure: any common nonzero value
}

}  // namespace

void validate(const CouplingGraph& graph) {
  // Node count formula per topology.
  long expected = -1;
  const auto& d = graph.dims;
  switch (graph.topology) {
    case Topology::square: expected = long(d[0]) * d[1]; break;
    case Topology::cubic_dimer:
    case Topology::cubic_nodimer: expected = 2L * d[0] * d[1] * d[2]; break;
    case Topology::diamond: expected = long(d[0]) * d[1] * d[2] / 4; break;
    case Topology::biclique: expected = 4L * d[0]; break;
    case Topology::chain: expected = d[0]; break;
  }
  require(expected == graph.n, "node count does not match topology formula");

  std::vector<int> dimer_count(graph.n, 0);
  const bool dimerized =
      graph.topology == Topology::cubic_dimer || graph.topology == Topology::biclique;
  Rational pure_value;
  bool pure_seen = false;
  for (const Edge& e : graph.edges) {
    if (e.is_dimer) {
      require(dimerized, "dimer edge present in non-dimerized topology");
      require(e.coupling == Rational(-2, 1), "dimer coupling must be exactly -2");
      ++dimer_count[e.i];
      ++dimer_count[e.j];
      continue;
    }
    Rational drawn = e.coupling;
    if (graph.topology == Topology::cubic_dimer) {
      // z-splits carry half the drawn value; identify them by site geometry.
      const int site_i = e.i / 2, site_j = e.j / 2;
      const int zi = site_i / (d[0] * d[1]), zj = site_j / (d[0] * d[1]);
      if (zi != zj) drawn = Rational(e.coupling.num * 2, e.coupling.den);
    }
    if (graph.precision == Precision::pure) {
      if (!pure_seen) {
        pure_value = drawn;
        pure_seen = true;
      }
      require(drawn == pure_value, "pure-precision couplings must all be equal");
      require(drawn.num != 0, "couplings exclude zero");
    } else {
      require(in_precision_class(drawn, graph.precision),
              "coupling outside precision class on edge (" + std::to_string(e.i) + "," +
                  std::to_string(e.j) + ")");
    }
  }
  if (dimerized)
    for (int v = 0; v < graph.n; ++v)
      require(dimer_count[v] == 1, "dimer edges must form a perfect matching");

  std::vector<char> seen(graph.n, 0);
  require(static_cast<int>(graph.mps_order.size()) == graph.n, "mps_order length mismatch");
  for (int v : graph.mps_order) {
    require(v >= 0 && v < graph.n && !seen[v], "mps_order is not a bijection");
    seen[v] = 1;
  }
}

}  // namespace quenchlab
