#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "quenchlab/exact.hpp"
#include "quenchlab/metrics.hpp"
#include "quenchlab/rng.hpp"

using namespace quenchlab;

namespace {

CorrelationMatrix random_corr(int n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  CorrelationMatrix c(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) c.set_sym(i, j, 2.0 * rng.uniform() - 1.0);
  return c;
}

}  // namespace

TEST_CASE("epsilon_c basics") {
  const auto ref = random_corr(8, 3);
  SUBCASE("identity gives zero") { CHECK(epsilon_c(ref, ref).value == doctest::Approx(0.0)); }
  SUBCASE("zero off-diagonals give exactly one") {
    CorrelationMatrix zero(8);
    CHECK(epsilon_c(zero, ref).value == doctest::Approx(1.0));
  }
  SUBCASE("uniform shift: eps = |delta| sqrt(n(n-1)) / ||cref||") {
    const double delta = 0.01;
    CorrelationMatrix shifted = ref;
    double den = 0;
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) {
        if (i == j) continue;
        shifted.at(i, j) += delta;
        den += ref.at(i, j) * ref.at(i, j);
      }
    const double expect = delta * std::sqrt(8.0 * 7.0) / std::sqrt(den);
    CHECK(epsilon_c(shifted, ref).value == doctest::Approx(expect));
  }
  SUBCASE("all-zero reference is tagged undefined") {
    CorrelationMatrix zero(8);
    const auto r = epsilon_c(ref, zero);
    CHECK(r.undefined);
    CHECK(std::isinf(r.value));
  }
  SUBCASE("invariant under simultaneous node relabeling") {
    const auto a = random_corr(8, 5);
    const double base = epsilon_c(a, ref).value;
    std::vector<int> perm = {3, 1, 7, 0, 6, 2, 5, 4};
    CorrelationMatrix pa(8), pref(8);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) {
        pa.at(perm[i], perm[j]) = a.at(i, j);
        pref.at(perm[i], perm[j]) = ref.at(i, j);
      }
    CHECK(epsilon_c(pa, pref).value == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("overlap moments and Binder cumulant") {
  SUBCASE("one configuration and its global flip give U = 1") {
    SampleSet s;
    s.n = 6;
    std::vector<std::int8_t> up(6, 1), down(6, -1);
    s.add(up, 500);
    s.add(down, 500);
    const auto m = overlap_moments(s);
    CHECK(m.q2 == doctest::Approx(1.0));
    CHECK(m.q4 == doctest::Approx(1.0));
    CHECK(binder_u({m}).u == doctest::Approx(1.0));
  }
  SUBCASE("iid uniform samples: <q2> ~ 1/N and U ~ 0") {
    const int n = 64;
    SampleSet s;
    s.n = n;
    SplitMix64 rng(9);
    for (int k = 0; k < 3000; ++k) {
      std::vector<std::int8_t> row(n);
      for (int i = 0; i < n; ++i) row[i] = (rng.next() & 1) ? 1 : -1;
      s.add(row);
    }
    const auto m = overlap_moments(s, 200000, 1);
    CHECK(m.q2 == doctest::Approx(1.0 / n).epsilon(0.15));
    // Gaussian q: <q^4> = 3 <q^2>^2 so U -> 0.
    CHECK(std::abs(binder_u({m}).u) < 0.1);
  }
  SUBCASE("single realization U equals the formula on its own moments") {
    OverlapMoments m;
    m.q2 = 0.5;
    m.q4 = 0.4;
    CHECK(binder_u({m}).u == doctest::Approx(0.5 * (3.0 - 0.4 / 0.25)));
  }
  SUBCASE("disorder averages are taken before the ratio") {
    OverlapMoments a{0.2, 0.06, 1, };
    OverlapMoments b{0.8, 0.7, 1};
    const double m2 = 0.5, m4 = 0.38;
    CHECK(binder_u({a, b}).u == doctest::Approx(0.5 * (3.0 - m4 / (m2 * m2))));
  }
  SUBCASE("moments require k >= 2") {
    SampleSet s;
    s.n = 4;
    s.add({1, 1, 1, 1}, 1);
    CHECK_THROWS_AS(overlap_moments(s), ValidationError);
  }
}

TEST_CASE("q2 two ways: correlations vs diagonal-corrected pair overlaps") {
  const auto g = generate(Topology::square, {3, 4}, Precision::high, 21);
  QuenchSpec q;
  q.schedule = model_linear_schedule();
  q.t_a_ns = 2.0;
  q.dt_ns = 0.01;
  const auto psi = evolve_exact(g, q, ExactMethod::trotter2);
  const auto obs = exact_observables(psi, g);
  const double q2_c = q2_from_correlations(obs.correlations);
  const std::int64_t k = 100000;
  const auto samples = sample_state(psi, g, k, 5);
  const auto m = overlap_moments(samples, 200000, 2);
  // 3 sigma on the pair estimator, sigma ~ spread/sqrt(k_eff); generous cap.
  CHECK(m.q2_corrected(g.n) == doctest::Approx(q2_c).epsilon(0.05));
}

TEST_CASE("fidelity and total variation") {
  SUBCASE("identical distributions") {
    std::map<std::uint64_t, double> p = {{0, 0.25}, {1, 0.75}};
    const auto r = classical_fidelity_tv(p, p);
    CHECK(r.fidelity == doctest::Approx(1.0));
    CHECK(r.tv == doctest::Approx(0.0));
  }
  SUBCASE("disjoint supports") {
    std::map<std::uint64_t, double> p = {{0, 1.0}};
    std::map<std::uint64_t, double> q = {{1, 1.0}};
    const auto r = classical_fidelity_tv(p, q);
    CHECK(r.fidelity == doctest::Approx(0.0));
    CHECK(r.tv == doctest::Approx(1.0));
  }
  SUBCASE("standard bounds F >= 1 - TV and F^2 <= 1 - TV^2") {
    SplitMix64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
      std::map<std::uint64_t, double> p, q;
      double sp = 0, sq = 0;
      for (std::uint64_t z = 0; z < 16; ++z) {
        p[z] = rng.uniform();
        q[z] = rng.uniform() * (z % 3 == 0 ? 0.0 : 1.0);
        sp += p[z];
        sq += q[z];
      }
      for (auto& [z, v] : p) v /= sp;
      for (auto& [z, v] : q) v /= sq;
      const auto r = classical_fidelity_tv(p, q);
      CHECK(r.fidelity >= 1.0 - r.tv - 1e-12);
      CHECK(r.fidelity * r.fidelity <= 1.0 - r.tv * r.tv + 1e-12);
    }
  }
}

TEST_CASE("residual energy") {
  CouplingGraph pair;
  pair.topology = Topology::chain;
  pair.dims = {2};
  pair.n = 2;
  pair.precision = Precision::pure;
  pair.mps_order = {0, 1};
  pair.edges = {Edge{0, 1, Rational(-2, 1), true}};
  SUBCASE("ground-state-only samples give zero") {
    SampleSet s;
    s.n = 2;
    s.add({1, 1}, 10);
    const auto r = residual_energy(s, pair, -2.0, "exact-enumeration");
    CHECK(r.value == doctest::Approx(0.0));
    CHECK_FALSE(r.lower_bound_uncertain);
  }
  SUBCASE("uniform random samples on the FM pair give E_res = 2") {
    SampleSet s;
    s.n = 2;
    s.add({1, 1}, 1);
    s.add({1, -1}, 1);
    s.add({-1, 1}, 1);
    s.add({-1, -1}, 1);
    CHECK(residual_energy(s, pair, -2.0, "exact-enumeration").value == doctest::Approx(2.0));
  }
  SUBCASE("heuristic E0 tags the result") {
    SampleSet s;
    s.n = 2;
    s.add({1, 1}, 1);
    CHECK(residual_energy(s, pair, -2.0, "heuristic").lower_bound_uncertain);
  }
  SUBCASE("adiabatic 8-spin run has tiny residual energy") {
    const auto g = generate(Topology::chain, {8}, Precision::pure, 1);
    QuenchSpec q;
    q.schedule = model_linear_schedule();
    q.t_a_ns = 20.0;
    q.dt_ns = 0.01;
    const auto psi = evolve_exact(g, q, ExactMethod::trotter2);
    const auto obs = exact_observables(psi, g);
    const auto [e0, tag] = classical_ground_energy(g);
    CHECK(residual_energy(obs.correlations, g, e0, tag).value < 1e-3);
  }
}

TEST_CASE("chi_q interpolation") {
  ErrorCurve curve;
  curve.points = {{8, 0.30}, {16, 0.12}, {32, 0.05}, {64, 0.02}, {91, 0.008}};
  SUBCASE("target at a measured point returns that chi exactly") {
    const auto r = chi_q(curve, 0.05);
    CHECK(r.chi_q == doctest::Approx(32.0));
    CHECK(r.tag == ChiQTag::exact_point);
  }
  SUBCASE("bracketing target lands inside the bracket") {
    const auto r = chi_q(curve, 0.012);
    CHECK(r.chi_q > 64.0);
    CHECK(r.chi_q < 91.0);
    CHECK(r.tag == ChiQTag::interpolated);
  }
  SUBCASE("monotone in target: lower target gives larger or equal chi_Q") {
    double prev = 1e300;
    for (double target : {0.25, 0.10, 0.04, 0.015, 0.009}) {
      const auto r = chi_q(curve, target);
      CHECK(r.chi_q <= prev + 1e-12);
      prev = r.chi_q;
    }
  }
  SUBCASE("out-of-range targets are tagged bounds") {
    CHECK(chi_q(curve, 1e-4).tag == ChiQTag::lower_bound);
    CHECK(chi_q(curve, 1e-4).chi_q == doctest::Approx(91.0));
    CHECK(chi_q(curve, 0.9).tag == ChiQTag::upper_bound);
  }
  SUBCASE("non-monotone curves flag and use the first crossing") {
    ErrorCurve wiggly;
    wiggly.points = {{8, 0.30}, {16, 0.10}, {32, 0.15}, {64, 0.02}};
    const auto r = chi_q(wiggly, 0.12);
    CHECK(r.non_monotone);
    CHECK(r.chi_q > 8.0);
    CHECK(r.chi_q < 16.0);
  }
}

TEST_CASE("partial bond-dimension extrapolation") {
  SUBCASE("identical inputs are a fixed point") {
    const auto c = random_corr(6, 11);
    const auto out = partial_extrapolation(c, 64 / std::sqrt(2.0), c, 64);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) CHECK(out.at(i, j) == doctest::Approx(c.at(i, j)));
  }
  SUBCASE("recovers an exactly linear-in-1/chi family") {
    const int n = 5;
    const auto a = random_corr(n, 13);   // intercept (chi -> infinity limit)
    const auto b = random_corr(n, 14);   // slope, scaled small to avoid clamping
    auto family = [&](double chi) {
      CorrelationMatrix c(n);
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
          c.set_sym(i, j, 0.5 * a.at(i, j) + 0.3 * b.at(i, j) / chi);
      return c;
    };
    const double hi = 64.0, lo = hi / std::sqrt(2.0), target = std::sqrt(2.0) * hi;
    const auto out = partial_extrapolation(family(lo), lo, family(hi), hi, target);
    const auto want = family(target);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) CHECK(out.at(i, j) == doctest::Approx(want.at(i, j)).epsilon(1e-12));
  }
  SUBCASE("entries clamp to [-1, 1] and the diagonal stays 1") {
    CorrelationMatrix lo(3), hi(3);
    lo.set_sym(0, 1, 0.2);
    hi.set_sym(0, 1, 0.95);  // extrapolates beyond 1
    const auto out = partial_extrapolation(lo, 10, hi, 14.14);
    CHECK(out.at(0, 1) <= 1.0);
    CHECK(out.at(0, 0) == 1.0);
  }
}

TEST_CASE("resource estimate reproduces the anchor and scaling") {
  SUBCASE("anchor point") {
    const auto r = resource_estimate(54, 724, 7);
    CHECK(r.memory_bytes == doctest::Approx(12e9));
    CHECK(r.gpu_seconds == doctest::Approx(7e4));
    CHECK(r.energy_joules == doctest::Approx(2.1e7));
  }
  SUBCASE("chi doubling quadruples memory") {
    CHECK(resource_estimate(54, 1448, 7).memory_bytes == doctest::Approx(48e9));
  }
  SUBCASE("linear in N") {
    const auto r = resource_estimate(108, 724, 7);
    CHECK(r.memory_bytes == doctest::Approx(24e9));
    CHECK(r.gpu_seconds == doctest::Approx(1.4e5));
  }
  SUBCASE("positive inputs required") {
    CHECK_THROWS_AS(resource_estimate(0, 724, 7), ValidationError);
  }
}

TEST_CASE("spearman rank correlation") {
  std::vector<double> a = {1, 2, 3, 4, 5, 6};
  std::vector<double> b = {2, 4, 5, 7, 11, 13};
  CHECK(spearman(a, b) == doctest::Approx(1.0));
  std::vector<double> c = {6, 5, 4, 3, 2, 1};
  CHECK(spearman(a, c) == doctest::Approx(-1.0));
}
