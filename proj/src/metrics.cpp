#include "quenchlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "quenchlab/rng.hpp"

namespace quenchlab {

namespace {

void check_match(const CorrelationMatrix& a, const CorrelationMatrix& b) {
  if (a.n != b.n) throw ValidationError("correlation matrices have mismatched n");
}

}  // namespace

EpsilonResult epsilon_c(const CorrelationMatrix& c, const CorrelationMatrix& c_ref) {
  check_match(c, c_ref);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < c.n; ++i)
    for (int j = 0; j < c.n; ++j) {
      if (i == j) continue;
      const double d = c.at(i, j) - c_ref.at(i, j);
      num += d * d;
      den += c_ref.at(i, j) * c_ref.at(i, j);
    }
  if (den == 0.0) return {std::numeric_limits<double>::infinity(), true};
  return {std::sqrt(num / den), false};
}

EpsilonResult epsilon_c_nn(const CorrelationMatrix& c, const CorrelationMatrix& c_ref,
                           const CouplingGraph& graph) {
  check_match(c, c_ref);
  double num = 0.0, den = 0.0;
  for (const Edge& e : graph.edges) {
    const double d = c.at(e.i, e.j) - c_ref.at(e.i, e.j);
    num += d * d;
    den += c_ref.at(e.i, e.j) * c_ref.at(e.i, e.j);
  }
  if (den == 0.0) return {std::numeric_limits<double>::infinity(), true};
  return {std::sqrt(num / den), false};
}

double q2_from_correlations(const CorrelationMatrix& c) {
  double acc = 0.0;
  for (int i = 0; i < c.n; ++i)
    for (int j = i + 1; j < c.n; ++j) acc += c.at(i, j) * c.at(i, j);
  return 2.0 * acc / (static_cast<double>(c.n) * (c.n - 1));
}

double OverlapMoments::q2_corrected(int n) const {
  return (q2 * n * n - n) / (static_cast<double>(n) * (n - 1));
}

OverlapMoments overlap_moments(const SampleSet& samples, std::int64_t min_pairs,
                               std::uint64_t seed) {
  const std::int64_t k = samples.total();
  if (k < 2) throw ValidationError("overlap moments require at least 2 samples");
  const int n = samples.n;
  OverlapMoments out;

  auto q_of = [&](std::size_t ra, std::size_t rb) {
    int dot = 0;
    const auto& a = samples.rows[ra];
    const auto& b = samples.rows[rb];
    for (int i = 0; i < n; ++i) dot += a[i] * b[i];
    return static_cast<double>(dot) / n;
  };

  const std::size_t rows = samples.rows.size();
  const double total_pairs_d = 0.5 * static_cast<double>(k) * (k - 1);
  if (static_cast<double>(rows) * rows <= 4e6 ||
      total_pairs_d <= static_cast<double>(min_pairs)) {
    // Exact enumeration over unordered pairs of draws; same-configuration
    // pairs (overlap 1) enter with their multiplicities.
    double s2 = 0.0, s4 = 0.0;
    for (std::size_t a = 0; a < rows; ++a) {
      const double ca = static_cast<double>(samples.counts[a]);
      const double waa = 0.5 * ca * (ca - 1);
      s2 += waa;
      s4 += waa;
      for (std::size_t b = a + 1; b < rows; ++b) {
        const double w = ca * static_cast<double>(samples.counts[b]);
        const double q = q_of(a, b);
        const double q2 = q * q;
        s2 += w * q2;
        s4 += w * q2 * q2;
      }
    }
    out.q2 = s2 / total_pairs_d;
    out.q4 = s4 / total_pairs_d;
    out.pairs = static_cast<std::int64_t>(total_pairs_d);
    return out;
  }

  // Seeded subsample of draw-index pairs (a != b).
  std::vector<std::int64_t> cum(rows);
  std::int64_t acc = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    acc += samples.counts[r];
    cum[r] = acc;
  }
  auto row_of = [&](std::int64_t idx) {
    return static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), idx) - cum.begin());
  };
  SplitMix64 rng(SplitMix64::derive(seed, 0x71ab5ULL));
  const std::int64_t m = min_pairs;
  double s2 = 0.0, s4 = 0.0;
  for (std::int64_t t = 0; t < m; ++t) {
    const auto ia = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(k)));
    std::int64_t ib;
    do {
      ib = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(k)));
    } while (ib == ia);
    const std::size_t ra = row_of(ia), rb = row_of(ib);
    const double q = (ra == rb) ? 1.0 : q_of(ra, rb);
    const double q2 = q * q;
    s2 += q2;
    s4 += q2 * q2;
  }
  out.q2 = s2 / static_cast<double>(m);
  out.q4 = s4 / static_cast<double>(m);
  out.pairs = m;
  return out;
}

BinderResult binder_u(const std::vector<OverlapMoments>& realizations) {
  if (realizations.empty()) throw ValidationError("binder_u requires >= 1 realization");
  double m2 = 0.0, m4 = 0.0;
  for (const auto& r : realizations) {
    m2 += r.q2;
    m4 += r.q4;
  }
  m2 /= static_cast<double>(realizations.size());
  m4 /= static_cast<double>(realizations.size());
  if (m2 == 0.0) return {0.0, true};
  return {0.5 * (3.0 - m4 / (m2 * m2)), false};
}

FidelityTv classical_fidelity_tv(const std::map<std::uint64_t, double>& p,
                                 const std::map<std::uint64_t, double>& q) {
  FidelityTv out;
  double tv = 0.0, f = 0.0;
  auto ip = p.begin();
  auto iq = q.begin();
  while (ip != p.end() || iq != q.end()) {
    if (iq == q.end() || (ip != p.end() && ip->first < iq->first)) {
      tv += std::abs(ip->second);
      ++ip;
    } else if (ip == p.end() || iq->first < ip->first) {
      tv += std::abs(iq->second);
      ++iq;
    } else {
      f += std::sqrt(ip->second * iq->second);
      tv += std::abs(ip->second - iq->second);
      ++ip;
      ++iq;
    }
  }
  out.fidelity = std::min(1.0, f);
  out.tv = std::min(1.0, 0.5 * tv);
  return out;
}

FidelityTv classical_fidelity_tv(const SampleSet& p, const SampleSet& q) {
  if (p.n != q.n) throw ValidationError("fidelity: sample sets have mismatched n");
  return classical_fidelity_tv(p.distribution(), q.distribution());
}

ResidualEnergy residual_energy(const SampleSet& samples, const CouplingGraph& graph, double e0,
                               const std::string& e0_tag, bool per_spin) {
  double mean = 0.0;
  const double k = static_cast<double>(samples.total());
  for (std::size_t r = 0; r < samples.rows.size(); ++r) {
    std::vector<int> spins(samples.rows[r].begin(), samples.rows[r].end());
    mean += static_cast<double>(samples.counts[r]) * graph.classical_energy(spins);
  }
  mean /= k;
  ResidualEnergy out;
  out.value = mean - e0;
  out.per_spin = per_spin;
  if (per_spin) out.value /= graph.n;
  out.lower_bound_uncertain = (e0_tag != "exact-enumeration");
  return out;
}

ResidualEnergy residual_energy(const CorrelationMatrix& c, const CouplingGraph& graph, double e0,
                               const std::string& e0_tag, bool per_spin) {
  double mean = 0.0;
  for (const Edge& e : graph.edges) mean += graph.coupling_value(e) * c.at(e.i, e.j);
  ResidualEnergy out;
  out.value = mean - e0;
  out.per_spin = per_spin;
  if (per_spin) out.value /= graph.n;
  out.lower_bound_uncertain = (e0_tag != "exact-enumeration");
  return out;
}

void ErrorCurve::check() const {
  if (points.size() < 2) throw ValidationError("error curve needs >= 2 points");
  for (std::size_t k = 1; k < points.size(); ++k)
    if (!(points[k].first > points[k - 1].first))
      throw ValidationError("error curve chi must be strictly increasing");
}

ChiQResult chi_q(const ErrorCurve& curve, double target_error) {
  curve.check();
  if (!(target_error > 0)) throw ValidationError("chi_q target error must be positive");
  ChiQResult out;
  for (std::size_t k = 1; k < curve.points.size(); ++k)
    if (curve.points[k].second > curve.points[k - 1].second) out.non_monotone = true;

  for (const auto& [chi, eps] : curve.points)
    if (eps == target_error) {
      out.chi_q = chi;
      out.tag = ChiQTag::exact_point;
      return out;
    }

  for (std::size_t k = 0; k + 1 < curve.points.size(); ++k) {
    const auto [x0, e0] = curve.points[k];
    const auto [x1, e1] = curve.points[k + 1];
    if ((e0 - target_error) * (e1 - target_error) < 0) {
      const double t = (std::log(e0) - std::log(target_error)) / (std::log(e0) - std::log(e1));
      out.chi_q = std::exp(std::log(x0) + t * (std::log(x1) - std::log(x0)));
      out.tag = ChiQTag::interpolated;
      return out;
    }
  }
  const double min_eps = std::min_element(curve.points.begin(), curve.points.end(),
                                          [](auto a, auto b) { return a.second < b.second; })
                             ->second;
  if (target_error < min_eps) {
    out.chi_q = curve.points.back().first;
    out.tag = ChiQTag::lower_bound;  // true chi_Q exceeds the measured range
  } else {
    out.chi_q = curve.points.front().first;
    out.tag = ChiQTag::upper_bound;
  }
  return out;
}

CorrelationMatrix partial_extrapolation(const CorrelationMatrix& c_lo, double chi_lo,
                                        const CorrelationMatrix& c_hi, double chi_hi,
                                        double chi_target) {
  check_match(c_lo, c_hi);
  if (!(chi_hi > chi_lo && chi_lo > 0))
    throw ValidationError("extrapolation requires chi_hi > chi_lo > 0");
  if (chi_target <= 0.0) chi_target = std::sqrt(2.0) * chi_hi;
  const double x_lo = 1.0 / chi_lo, x_hi = 1.0 / chi_hi, x_t = 1.0 / chi_target;
  const double w = (x_t - x_hi) / (x_hi - x_lo);
  CorrelationMatrix out(c_lo.n);
  for (int i = 0; i < out.n; ++i)
    for (int j = 0; j < out.n; ++j) {
      if (i == j) continue;
      const double v = c_hi.at(i, j) + w * (c_hi.at(i, j) - c_lo.at(i, j));
      out.at(i, j) = std::clamp(v, -1.0, 1.0);
    }
  for (int i = 0; i < out.n; ++i)
    for (int j = i + 1; j < out.n; ++j) out.set_sym(i, j, 0.5 * (out.at(i, j) + out.at(j, i)));
  return out;
}

ResourceEstimate resource_estimate(double n, double chi, double t_a_ns) {
  if (!(n > 0 && chi > 0 && t_a_ns > 0))
    throw ValidationError("resource_estimate requires positive inputs");
  ResourceEstimate out;
  const double nr = n / 54.0, cr = chi / 724.0, tr = t_a_ns / 7.0;
  out.memory_bytes = 12e9 * nr * cr * cr;
  out.gpu_seconds = 7e4 * nr * tr * cr * cr * cr;
  out.energy_joules = out.gpu_seconds * 300.0;
  return out;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw ValidationError("spearman needs matched inputs");
  auto ranks = [](const std::vector<double>& v) {
    const std::size_t m = v.size();
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> r(m);
    std::size_t k = 0;
    while (k < m) {
      std::size_t e = k;
      while (e + 1 < m && v[idx[e + 1]] == v[idx[k]]) ++e;
      const double avg = 0.5 * static_cast<double>(k + e);
      for (std::size_t t = k; t <= e; ++t) r[idx[t]] = avg;
      k = e + 1;
    }
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  double ma = 0, mb = 0;
  for (std::size_t k = 0; k < ra.size(); ++k) {
    ma += ra[k];
    mb += rb[k];
  }
  ma /= static_cast<double>(ra.size());
  mb /= static_cast<double>(rb.size());
  double num = 0, va = 0, vb = 0;
  for (std::size_t k = 0; k < ra.size(); ++k) {
    num += (ra[k] - ma) * (rb[k] - mb);
    va += (ra[k] - ma) * (ra[k] - ma);
    vb += (rb[k] - mb) * (rb[k] - mb);
  }
  if (va == 0 || vb == 0) return 0.0;
  return num / std::sqrt(va * vb);
}

}  // namespace quenchlab
