#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "quenchlab/graph.hpp"

using namespace quenchlab;

TEST_CASE("square cylinder node and edge counts") {
  const auto g = generate(Topology::square, {6, 6}, Precision::high, 7);
  CHECK(g.n == 36);
  // L^2 periodic-x edges plus L(L-1) open-y edges.
  CHECK(g.edges.size() == 66);
  CHECK(g.periodic_dims == std::vector<std::string>{"x"});
  validate(g);
}

TEST_CASE("cubic dimer 6x6x6 has 432 qubits") {
  const auto g = generate(Topology::cubic_dimer, {6, 6, 6}, Precision::low, 3);
  CHECK(g.n == 432);
  validate(g);
  // z-couplings split as two edges each carrying J/2: low precision halves
  // are +-1/2.
  int halves = 0;
  for (const auto& e : g.edges)
    if (!e.is_dimer && e.coupling.den == 2) ++halves;
  CHECK(halves == 2 * 6 * 6 * 6);  // LxLyLz parent z-couplings, two edges each
}

TEST_CASE("biclique K_{24,24}") {
  const auto g = generate(Topology::biclique, {24}, Precision::high, 11);
  CHECK(g.n == 96);
  int dimers = 0, inter = 0;
  for (const auto& e : g.edges) (e.is_dimer ? dimers : inter)++;
  CHECK(dimers == 48);
  CHECK(inter == 576);
  // Non-dimer couplings carry the 1/sqrt(M/4) = 1/sqrt(6) factor.
  for (const auto& e : g.edges) {
    if (e.is_dimer) continue;
    CHECK(g.coupling_value(e) == doctest::Approx(e.coupling.value() / std::sqrt(6.0)));
  }
  validate(g);
}

TEST_CASE("diamond 12x12x16 is defect-free 576") {
  const auto g = generate(Topology::diamond, {12, 12, 16}, Precision::high, 5);
  CHECK(g.n == 576);
  validate(g);
  // 4-regular in the bulk: periodic z, open x/y, so max degree exactly 4.
  const auto deg = g.degrees();
  CHECK(*std::max_element(deg.begin(), deg.end()) == 4);
}

TEST_CASE("diamond rejects Lz not divisible by 4") {
  CHECK_THROWS_WITH_AS(generate(Topology::diamond, {4, 4, 6}, Precision::low, 1),
                       doctest::Contains("divisible by 4"), ValidationError);
}

TEST_CASE("degree structure") {
  SUBCASE("square bulk is 4-regular") {
    const auto g = generate(Topology::square, {6, 6}, Precision::low, 2);
    const auto deg = g.degrees();
    int four = 0;
    for (int v = 0; v < g.n; ++v) four += (deg[v] == 4);
    CHECK(four == 24);  // all but the two open rows
    CHECK(*std::max_element(deg.begin(), deg.end()) == 4);
  }
  SUBCASE("cubic no-dimer is 4-regular in bulk") {
    const auto g = generate(Topology::cubic_nodimer, {4, 4, 4}, Precision::low, 2);
    const auto deg = g.degrees();
    CHECK(*std::max_element(deg.begin(), deg.end()) == 4);
  }
  SUBCASE("cubic dimer degree bounded by 6 plus dimer") {
    const auto g = generate(Topology::cubic_dimer, {4, 4, 4}, Precision::low, 2);
    const auto deg = g.degrees();
    CHECK(*std::max_element(deg.begin(), deg.end()) <= 7);
  }
}

TEST_CASE("precision class membership over 1000 seeds") {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    validate(generate(Topology::square, {3, 3}, Precision::high, seed));
    validate(generate(Topology::square, {3, 3}, Precision::low, seed));
  }
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    validate(generate(Topology::cubic_dimer, {2, 2, 2}, Precision::high, seed));
    validate(generate(Topology::biclique, {3}, Precision::high, seed));
    validate(generate(Topology::diamond, {2, 2, 4}, Precision::low, seed));
    validate(generate(Topology::chain, {8}, Precision::pure, seed));
  }
}

TEST_CASE("high precision magnitudes span the full 1..128 set") {
  std::set<std::int64_t> mags;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto g = generate(Topology::square, {4, 4}, Precision::high, seed);
    for (const auto& e : g.edges) {
      const std::int64_t k = std::abs(e.coupling.num) * (128 / e.coupling.den);
      mags.insert(k);
    }
  }
  CHECK(mags.size() == 128);
  CHECK(*mags.begin() == 1);
  CHECK(*mags.rbegin() == 128);
}

TEST_CASE("determinism: same inputs give byte-identical serialization") {
  const auto a = generate(Topology::cubic_dimer, {3, 3, 3}, Precision::high, 99);
  const auto b = generate(Topology::cubic_dimer, {3, 3, 3}, Precision::high, 99);
  CHECK(save(a) == save(b));
  const auto c = generate(Topology::cubic_dimer, {3, 3, 3}, Precision::high, 100);
  CHECK(save(a) != save(c));
}

TEST_CASE("mps ordering patterns") {
  SUBCASE("chain is the identity with cut-width 1") {
    const auto g = generate(Topology::chain, {12}, Precision::pure, 0);
    for (int i = 0; i < 12; ++i) CHECK(g.mps_order[i] == i);
    CHECK(cut_width(g, g.mps_order) == 1);
  }
  SUBCASE("square 4x4 spiral cut-width by direct enumeration") {
    const auto g = generate(Topology::square, {4, 4}, Precision::low, 1);
    // Frozen from the cut-enumeration oracle: the spiral order of an LxL
    // cylinder has max cut-width L+2 (L vertical + 1 ring + 1 wrap edge).
    CHECK(cut_width(g, g.mps_order) == 6);
  }
  SUBCASE("square cut-width scales with L, not N") {
    for (int l = 4; l <= 6; ++l) {
      const auto g = generate(Topology::square, {l, l}, Precision::low, 1);
      CHECK(cut_width(g, g.mps_order) == l + 2);
    }
  }
  SUBCASE("biclique order: half A, all B, remaining A; dimer partners adjacent") {
    const auto g = generate(Topology::biclique, {4}, Precision::high, 1);
    const std::vector<int> expect = {0, 1, 2, 3, 8, 9, 10, 11, 12, 13, 14, 15, 4, 5, 6, 7};
    CHECK(g.mps_order == expect);
    // Max cut is attained strictly inside the B block.
    std::vector<int> pos(g.n);
    for (int p = 0; p < g.n; ++p) pos[g.mps_order[p]] = p;
    int best_cut = -1, best = -1;
    for (int cut = 0; cut + 1 < g.n; ++cut) {
      int crossing = 0;
      for (const auto& e : g.edges)
        if ((pos[e.i] <= cut) != (pos[e.j] <= cut)) ++crossing;
      if (crossing > best) {
        best = crossing;
        best_cut = cut;
      }
    }
    CHECK(best_cut >= 4);
    CHECK(best_cut < 12);
  }
  SUBCASE("dimer partners adjacent in cubic order") {
    const auto g = generate(Topology::cubic_dimer, {2, 2, 2}, Precision::low, 1);
    std::vector<int> pos(g.n);
    for (int p = 0; p < g.n; ++p) pos[g.mps_order[p]] = p;
    for (const auto& e : g.edges)
      if (e.is_dimer) CHECK(std::abs(pos[e.i] - pos[e.j]) == 1);
  }
}

TEST_CASE("serialization round-trip is field-for-field identity") {
  for (auto topo : {Topology::square, Topology::cubic_dimer, Topology::biclique, Topology::chain}) {
    std::vector<int> dims;
    switch (topo) {
      case Topology::square: dims = {4, 4}; break;
      case Topology::cubic_dimer: dims = {2, 2, 3}; break;
      case Topology::biclique: dims = {3}; break;
      default: dims = {9}; break;
    }
    const auto g = generate(topo, dims, topo == Topology::chain ? Precision::pure : Precision::high, 42);
    const auto g2 = load(save(g));
    CHECK(save(g2) == save(g));
    CHECK(g2.n == g.n);
    CHECK(g2.seed == g.seed);
    CHECK(g2.mps_order == g.mps_order);
    REQUIRE(g2.edges.size() == g.edges.size());
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
      CHECK(g2.edges[k].i == g.edges[k].i);
      CHECK(g2.edges[k].j == g.edges[k].j);
      CHECK(g2.edges[k].coupling == g.edges[k].coupling);
      CHECK(g2.edges[k].is_dimer == g.edges[k].is_dimer);
    }
  }
}

TEST_CASE("load rejects malformed input") {
  CHECK_THROWS_AS(load("{not json"), ParseError);
  CHECK_THROWS_WITH_AS(
      load(R"({"schema_version":1,"topology":"chain","dims":[2],"precision":"pure",
               "seed":0,"n":2,"periodic_dims":[],"mps_order":[0,1]})"),
      doctest::Contains("edges"), ParseError);
  // Zero coupling on a non-dimer edge violates the precision-class invariant.
  CHECK_THROWS_WITH_AS(
      load(R"({"schema_version":1,"topology":"chain","dims":[2],"precision":"pure",
               "seed":0,"n":2,"edges":[[0,1,0,1,0]],"periodic_dims":[],"mps_order":[0,1]})"),
      doctest::Contains("zero"), ValidationError);
}
