#include "quenchlab/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "quenchlab/rng.hpp"

namespace quenchlab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::uint64_t dim_of(int n) { return 1ULL << n; }

void check_size(const CouplingGraph& graph, int hard_cap) {
  if (graph.n > hard_cap)
    throw ResourceError("exact engine: n = " + std::to_string(graph.n) + " exceeds cap " +
                        std::to_string(hard_cap));
}

}  // namespace

double StateVector::norm() const {
  double s = 0.0;
  for (const cplx& a : amp) s += std::norm(a);
  return std::sqrt(s);
}

namespace detail {

std::vector<double> diagonal_energy(const CouplingGraph& graph) {
  const int n = graph.n;
  const std::uint64_t dim = dim_of(n);
  std::vector<int> pos(n);
  for (int p = 0; p < n; ++p) pos[graph.mps_order[p]] = p;
  // Incremental update along the binary-reflected Gray code: exactly one spin
  // flips between consecutive visits.
  std::vector<double> e(dim, 0.0);
  std::vector<int> spins(n, 1);
  std::vector<std::vector<std::pair<int, double>>> adj(n);
  for (const Edge& ed : graph.edges) {
    const double j = graph.coupling_value(ed);
    const int pi = pos[ed.i], pj = pos[ed.j];
    adj[pi].push_back({pj, j});
    adj[pj].push_back({pi, j});
  }
  double cur = 0.0;
  for (const Edge& ed : graph.edges) cur += graph.coupling_value(ed);
  std::uint64_t gray = 0;
  e[0] = cur;
  for (std::uint64_t k = 1; k < dim; ++k) {
    const int bit = std::countr_zero(k);
    const int p = StateVector::site_bit_shift(n, 0) - bit;  // bit b corresponds to site n-1-b
    double h = 0.0;
    for (const auto& [q, j] : adj[p]) h += j * spins[q];
    cur -= 2.0 * spins[p] * h;
    spins[p] = -spins[p];
    gray ^= (1ULL << bit);
    e[gray] = cur;
  }
  return e;
}

void apply_hamiltonian(const CouplingGraph& graph, double gamma, double jscale,
                       const std::vector<double>& diag_energy, const std::vector<cplx>& in,
                       std::vector<cplx>& out) {
  const int n = graph.n;
  const std::uint64_t dim = dim_of(n);
  out.resize(dim);
  for (std::uint64_t z = 0; z < dim; ++z) out[z] = jscale * diag_energy[z] * in[z];
  // H_D = -sum_i sigma^x_i: subtract the one-bit-flip neighbors.
  for (int b = 0; b < n; ++b) {
    const std::uint64_t mask = 1ULL << b;
    for (std::uint64_t z = 0; z < dim; ++z) out[z] -= gamma * in[z ^ mask];
  }
}

}  // namespace detail

std::pair<double, StateVector> lanczos_ground(const CouplingGraph& graph, double gamma,
                                              double jscale, int max_iter, double tol) {
  const int n = graph.n;
  const std::uint64_t dim = dim_of(n);
  const auto diag = detail::diagonal_energy(graph);

  // Restarted Lanczos with full reorthogonalization inside each cycle; the
  // basis cap bounds memory at large n, restarts recover full accuracy.
  const int cycle_cap = static_cast<int>(std::min<std::uint64_t>(64, dim));
  const int max_cycles = std::max(1, (max_iter + cycle_cap - 1) / cycle_cap);

  std::vector<cplx> v(dim);
  SplitMix64 rng(0x9d2c5680ULL + static_cast<std::uint64_t>(n));
  for (auto& a : v) a = cplx(rng.uniform() - 0.5, rng.uniform() - 0.5);
  {
    double nv = 0;
    for (auto& a : v) nv += std::norm(a);
    nv = std::sqrt(nv);
    for (auto& a : v) a /= nv;
  }

  std::vector<cplx> w(dim);
  double prev_cycle_e = 1e300;
  for (int cycle = 0; cycle < max_cycles; ++cycle) {
    std::vector<std::vector<cplx>> basis;
    std::vector<double> alpha, beta;
    double e0 = prev_cycle_e;
    Eigen::VectorXd ritz;
    int k = 0;
    bool invariant = false;
    double prev_e = 1e300;
    for (int it = 0; it < cycle_cap; ++it) {
      basis.push_back(v);
      detail::apply_hamiltonian(graph, gamma, jscale, diag, v, w);
      cplx a(0, 0);
      for (std::uint64_t z = 0; z < dim; ++z) a += std::conj(v[z]) * w[z];
      alpha.push_back(a.real());
      for (std::uint64_t z = 0; z < dim; ++z) w[z] -= a * v[z];
      if (it > 0)
        for (std::uint64_t z = 0; z < dim; ++z) w[z] -= beta[it - 1] * basis[it - 1][z];
      for (const auto& u : basis) {
        cplx ov(0, 0);
        for (std::uint64_t z = 0; z < dim; ++z) ov += std::conj(u[z]) * w[z];
        for (std::uint64_t z = 0; z < dim; ++z) w[z] -= ov * u[z];
      }
      double nb = 0;
      for (const auto& x : w) nb += std::norm(x);
      nb = std::sqrt(nb);

      k = it + 1;
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
      for (int i = 0; i < k; ++i) t(i, i) = alpha[i];
      for (int i = 0; i + 1 < k; ++i) t(i, i + 1) = t(i + 1, i) = beta[i];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
      e0 = es.eigenvalues()(0);
      ritz = es.eigenvectors().col(0);
      const bool value_converged =
          it >= 4 && std::abs(e0 - prev_e) < tol * std::max(1.0, std::abs(e0));
      prev_e = e0;
      if (value_converged || nb < 1e-14 || it == cycle_cap - 1) {
        invariant = nb < 1e-14 || value_converged;
        break;
      }
      beta.push_back(nb);
      for (std::uint64_t z = 0; z < dim; ++z) v[z] = w[z] / nb;
    }
    // Collapse onto the Ritz vector and either return or restart from it.
    std::vector<cplx> gs(dim, cplx(0, 0));
    for (int i = 0; i < k; ++i) {
      const double c = ritz(i);
      const auto& u = basis[i];
      for (std::uint64_t z = 0; z < dim; ++z) gs[z] += c * u[z];
    }
    double nv = 0;
    for (auto& x : gs) nv += std::norm(x);
    nv = std::sqrt(nv);
    for (auto& x : gs) x /= nv;

    const bool cycle_converged =
        invariant && std::abs(e0 - prev_cycle_e) < tol * std::max(1.0, std::abs(e0));
    if (cycle_converged || (invariant && cycle == 0 && k < cycle_cap) || cycle == max_cycles - 1) {
      if (!invariant && cycle == max_cycles - 1)
        throw NumericalError("Lanczos ground state did not converge after " +
                             std::to_string(max_cycles * cycle_cap) +
                             " iterations (last Ritz value " + std::to_string(e0) + ")");
      StateVector out;
      out.n = n;
      out.amp = std::move(gs);
      return {e0, out};
    }
    prev_cycle_e = e0;
    v = gs;
  }
  throw NumericalError("Lanczos ground state: unreachable");
}

namespace {

void apply_driver_halfstep(std::vector<cplx>& amp, int n, double theta) {
  // exp(-i*2pi*(dt/2)*Gamma*H_D) with H_D = -sum sigma^x: per-site rotation
  // exp(+i*theta*sigma^x) = cos(theta) I + i sin(theta) sigma^x.
  const double c = std::cos(theta);
  const cplx is(0, std::sin(theta));
  const std::uint64_t dim = amp.size();
  for (int b = 0; b < n; ++b) {
    const std::uint64_t mask = 1ULL << b;
    for (std::uint64_t z = 0; z < dim; ++z) {
      if (z & mask) continue;
      const cplx a0 = amp[z];
      const cplx a1 = amp[z | mask];
      amp[z] = c * a0 + is * a1;
      amp[z | mask] = is * a0 + c * a1;
    }
  }
}

void krylov_exp_step(const CouplingGraph& graph, double gamma, double jscale,
                     const std::vector<double>& diag, double dt, std::vector<cplx>& psi,
                     int step_index, int max_vectors = 100, double tol = 1e-12) {
  const std::uint64_t dim = psi.size();
  std::vector<std::vector<cplx>> basis;
  std::vector<double> alpha, beta;
  std::vector<cplx> v = psi, w(dim);

  double nv = 0;
  for (auto& a : v) nv += std::norm(a);
  nv = std::sqrt(nv);
  for (auto& a : v) a /= nv;

  Eigen::VectorXcd small_result;
  int k = 0;
  for (int it = 0; it < max_vectors; ++it) {
    basis.push_back(v);
    detail::apply_hamiltonian(graph, gamma, jscale, diag, v, w);
    cplx a(0, 0);
    for (std::uint64_t z = 0; z < dim; ++z) a += std::conj(v[z]) * w[z];
    alpha.push_back(a.real());
    for (std::uint64_t z = 0; z < dim; ++z) w[z] -= a * v[z];
    if (it > 0)
      for (std::uint64_t z = 0; z < dim; ++z) w[z] -= beta[it - 1] * basis[it - 1][z];
    // Light reorthogonalization keeps the propagation unitary to ~1e-13.
    for (const auto& u : basis) {
      cplx ov(0, 0);
      for (std::uint64_t z = 0; z < dim; ++z) ov += std::conj(u[z]) * w[z];
      for (std::uint64_t z = 0; z < dim; ++z) w[z] -= ov * u[z];
    }
    double nb = 0;
    for (const auto& x : w) nb += std::norm(x);
    nb = std::sqrt(nb);
    k = it + 1;

    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) t(i, i) = alpha[i];
    for (int i = 0; i + 1 < k; ++i) t(i, i + 1) = t(i + 1, i) = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    Eigen::VectorXcd phases(k);
    for (int i = 0; i < k; ++i)
      phases(i) = std::exp(cplx(0, -kTwoPi * dt * es.eigenvalues()(i)));
    const Eigen::VectorXcd weighted =
        phases.array() * es.eigenvectors().row(0).transpose().cast<cplx>().array();
    small_result = es.eigenvectors().cast<cplx>() * weighted;

    const double tail = (k > 1) ? std::abs(small_result(k - 1)) * nb * dt * kTwoPi : 1.0;
    if (tail < tol || nb < 1e-14) break;
    if (it == max_vectors - 1)
      throw NumericalError("exact krylov step " + std::to_string(step_index) +
                           ": not converged with 100 vectors (tail " + std::to_string(tail) + ")");
    beta.push_back(nb);
    for (std::uint64_t z = 0; z < dim; ++z) v[z] = w[z] / nb;
  }
  std::fill(psi.begin(), psi.end(), cplx(0, 0));
  for (int i = 0; i < k; ++i) {
    const cplx c = nv * small_result(i);
    const auto& u = basis[i];
    for (std::uint64_t z = 0; z < dim; ++z) psi[z] += c * u[z];
  }
}

}  // namespace

StateVector evolve_exact(const CouplingGraph& graph, const QuenchSpec& quench, ExactMethod method,
                         int hard_cap) {
  check_size(graph, hard_cap);
  quench.check();
  const int n = graph.n;
  const auto diag = detail::diagonal_energy(graph);

  auto [e0, psi] = lanczos_ground(graph, quench.schedule.gamma(0.0), quench.schedule.jscale(0.0));
  (void)e0;

  // H commutes with the global spin flip (no longitudinal fields anywhere in
  // this project), and the paramagnetic ground state is non-degenerate, so it
  // lies in the flip-symmetric sector. Projecting removes the residual
  // antisymmetric Lanczos error and makes <sigma^z_i> = 0 exact.
  {
    const std::uint64_t dim = psi.amp.size();
    const std::uint64_t mask = dim - 1;
    double nv = 0;
    for (std::uint64_t z = 0; z < dim; ++z) {
      const std::uint64_t zf = (~z) & mask;
      if (zf < z) continue;
      const cplx s = 0.5 * (psi.amp[z] + psi.amp[zf]);
      psi.amp[z] = s;
      psi.amp[zf] = s;
    }
    for (const auto& a : psi.amp) nv += std::norm(a);
    nv = std::sqrt(nv);
    if (nv < 0.5)
      throw NumericalError("initial-state flip symmetrization collapsed the state; "
                           "ground state of H(0) appears flip-antisymmetric");
    for (auto& a : psi.amp) a /= nv;
  }

  const int nsteps = quench.step_count();
  const double t_end = quench.s_stop * quench.t_a_ns;
  const double dt = t_end / nsteps;
  for (int step = 0; step < nsteps; ++step) {
    const double s_mid = (step + 0.5) * dt / quench.t_a_ns;
    const auto [gamma, jscale] = quench.schedule.eval(s_mid);
    if (method == ExactMethod::trotter2) {
      apply_driver_halfstep(psi.amp, n, kTwoPi * 0.5 * dt * gamma);
      for (std::uint64_t z = 0; z < psi.amp.size(); ++z)
        psi.amp[z] *= std::exp(cplx(0, -kTwoPi * dt * jscale * diag[z]));
      apply_driver_halfstep(psi.amp, n, kTwoPi * 0.5 * dt * gamma);
    } else {
      krylov_exp_step(graph, gamma, jscale, diag, dt, psi.amp, step);
    }
  }
  return psi;
}

double exact_energy_z(const StateVector& psi, const CouplingGraph& graph) {
  const auto diag = detail::diagonal_energy(graph);
  double e = 0.0;
  for (std::uint64_t z = 0; z < psi.amp.size(); ++z) e += std::norm(psi.amp[z]) * diag[z];
  return e;
}

ExactObservables exact_observables(const StateVector& psi, const CouplingGraph& graph) {
  const int n = graph.n;
  const std::uint64_t dim = psi.amp.size();
  ExactObservables obs;
  obs.distribution.resize(dim);
  for (std::uint64_t z = 0; z < dim; ++z) obs.distribution[z] = std::norm(psi.amp[z]);

  const auto diag = detail::diagonal_energy(graph);
  obs.energy_z = 0.0;
  for (std::uint64_t z = 0; z < dim; ++z) obs.energy_z += obs.distribution[z] * diag[z];

  // Correlations in site space, then re-key by node id.
  std::vector<double> m(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<int> spins(n);
  for (std::uint64_t z = 0; z < dim; ++z) {
    const double p = obs.distribution[z];
    if (p < 1e-300) continue;
    for (int a = 0; a < n; ++a) spins[a] = StateVector::spin_at(z, n, a);
    for (int a = 0; a < n; ++a) {
      const double pa = p * spins[a];
      for (int b = a + 1; b < n; ++b) m[static_cast<std::size_t>(a) * n + b] += pa * spins[b];
    }
  }
  obs.correlations = CorrelationMatrix(n);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      const int na = graph.mps_order[a], nb = graph.mps_order[b];
      obs.correlations.set_sym(na, nb, m[static_cast<std::size_t>(a) * n + b]);
    }

  // Schmidt entropy at every MPS-order cut via the Gram matrix of the smaller side.
  obs.entropy_cut.resize(n - 1);
  for (int cut = 1; cut < n; ++cut) {
    const std::uint64_t rows = 1ULL << cut;
    const std::uint64_t cols = dim >> cut;
    Eigen::MatrixXcd a(rows, cols);
    for (std::uint64_t r = 0; r < rows; ++r)
      for (std::uint64_t c = 0; c < cols; ++c) a(r, c) = psi.amp[(r << (n - cut)) | c];
    Eigen::MatrixXcd gram = (rows <= cols) ? (a * a.adjoint()).eval() : (a.adjoint() * a).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
    double s = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
      const double w = es.eigenvalues()(i);
      if (w > 1e-14) s -= w * std::log(w);
    }
    obs.entropy_cut[cut - 1] = s;
  }
  return obs;
}

std::pair<double, std::string> classical_ground_energy(const CouplingGraph& graph, int enum_cap,
                                                       int sa_restarts, std::uint64_t sa_seed) {
  const int n = graph.n;
  std::vector<std::vector<std::pair<int, double>>> adj(n);
  for (const Edge& e : graph.edges) {
    const double j = graph.coupling_value(e);
    adj[e.i].push_back({e.j, j});
    adj[e.j].push_back({e.i, j});
  }

  if (n <= enum_cap) {
    // Exhaustive Gray-code scan with global spin-flip symmetry halving (node
    // n-1 fixed up).
    std::vector<int> spins(n, 1);
    double cur = 0.0;
    for (const Edge& e : graph.edges) cur += graph.coupling_value(e);
    double best = cur;
    const std::uint64_t half = 1ULL << (n - 1);
    for (std::uint64_t k = 1; k < half; ++k) {
      const int p = std::countr_zero(k);
      double h = 0.0;
      for (const auto& [q, j] : adj[p]) h += j * spins[q];
      cur -= 2.0 * spins[p] * h;
      spins[p] = -spins[p];
      if (cur < best) best = cur;
    }
    return {best, "exact-enumeration"};
  }

  // Heuristic fallback: SA best over restarts; consumers must treat the
  // value as an upper bound on E0.
  double best = 1e300;
  for (int r = 0; r < sa_restarts; ++r) {
    SplitMix64 rng(SplitMix64::derive(sa_seed, static_cast<std::uint64_t>(r)));
    std::vector<int> spins(n);
    for (int v = 0; v < n; ++v) spins[v] = (rng.next() & 1) ? 1 : -1;
    double cur = 0.0;
    for (const Edge& e : graph.edges) cur += graph.coupling_value(e) * spins[e.i] * spins[e.j];
    const int sweeps = 3000;
    const double beta0 = 0.2, beta1 = 20.0;
    for (int sw = 0; sw < sweeps; ++sw) {
      const double beta = beta0 * std::pow(beta1 / beta0, sw / double(sweeps - 1));
      for (int v = 0; v < n; ++v) {
        double h = 0.0;
        for (const auto& [q, j] : adj[v]) h += j * spins[q];
        const double delta = -2.0 * spins[v] * h;
        if (delta <= 0 || rng.uniform() < std::exp(-beta * delta)) {
          spins[v] = -spins[v];
          cur += delta;
        }
      }
    }
    best = std::min(best, cur);
  }
  return {best, "heuristic"};
}

SampleSet sample_state(const StateVector& psi, const CouplingGraph& graph, std::int64_t k,
                       std::uint64_t seed) {
  const int n = graph.n;
  const std::uint64_t dim = psi.amp.size();
  std::vector<double> cdf(dim);
  double acc = 0.0;
  for (std::uint64_t z = 0; z < dim; ++z) {
    acc += std::norm(psi.amp[z]);
    cdf[z] = acc;
  }
  SampleSet out;
  out.n = n;
  out.source = "exact seed=" + std::to_string(seed);
  SplitMix64 rng(seed);
  std::map<std::uint64_t, std::int64_t> hist;
  for (std::int64_t i = 0; i < k; ++i) {
    const double u = rng.uniform() * acc;
    const std::uint64_t z =
        std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
    ++hist[std::min<std::uint64_t>(z, dim - 1)];
  }
  for (const auto& [z, c] : hist) {
    std::vector<std::int8_t> row(n);
    for (int p = 0; p < n; ++p) row[graph.mps_order[p]] = static_cast<std::int8_t>(StateVector::spin_at(z, n, p));
    out.add(row, c);
  }
  return out;
}

std::vector<std::pair<std::uint64_t, double>> node_distribution(const StateVector& psi,
                                                                const CouplingGraph& graph) {
  const int n = graph.n;
  std::vector<std::pair<std::uint64_t, double>> out;
  out.reserve(psi.amp.size());
  for (std::uint64_t z = 0; z < psi.amp.size(); ++z) {
    const double p = std::norm(psi.amp[z]);
    std::uint64_t key = 0;
    for (int q = 0; q < n; ++q)
      if (StateVector::spin_at(z, n, q) < 0) key |= (1ULL << graph.mps_order[q]);
    out.push_back({key, p});
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace quenchlab
