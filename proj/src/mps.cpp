#define LAPACK_COMPLEX_CPP
#include <complex>
#include <lapacke.h>

#include "quenchlab/mps.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

#include "quenchlab/rng.hpp"

namespace quenchlab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

using Mat = Eigen::MatrixXcd;
using BlockVec = std::vector<Mat>;  // generic tensor flattened into matrices

// ---------------------------------------------------------------------------
// SVD with truncation
// ---------------------------------------------------------------------------

struct SvdResult {
  Mat u;                  // m x r
  Eigen::VectorXd s;      // r, descending, renormalized to preserve the norm
  Mat vh;                 // r x n
  double discarded = 0.0; // relative discarded weight of this split
  std::vector<double> kept_weights;  // normalized s^2 before renormalization
};

SvdResult svd_truncate(Mat theta, int chi_max, double threshold, int min_keep = 2) {
  const int m = static_cast<int>(theta.rows());
  const int n = static_cast<int>(theta.cols());
  const int k = std::min(m, n);
  Mat u(m, k), vh(k, n);
  Eigen::VectorXd sv(k);
  const int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'S', m, n, theta.data(), m, sv.data(),
                                  u.data(), m, vh.data(), k);
  if (info != 0) {
    Eigen::JacobiSVD<Mat> svd(theta, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = svd.matrixU();
    sv = svd.singularValues();
    vh = svd.matrixV().adjoint();
  }

  double total = 0.0;
  for (int i = 0; i < k; ++i) total += sv(i) * sv(i);
  if (total <= 0.0) throw NumericalError("SVD of a zero block");

  int r = std::min(k, chi_max);
  // Shrink further while the discarded tail stays under the threshold.
  double tail = 0.0;
  for (int i = k - 1; i >= r; --i) tail += sv(i) * sv(i);
  while (r > std::min(min_keep, k) && tail + sv(r - 1) * sv(r - 1) <= threshold * total) {
    tail += sv(r - 1) * sv(r - 1);
    --r;
  }
  r = std::max(r, std::min(min_keep, k));
  tail = 0.0;
  for (int i = r; i < k; ++i) tail += sv(i) * sv(i);

  SvdResult out;
  out.discarded = tail / total;
  const double renorm = std::sqrt(total - tail);
  out.u = u.leftCols(r);
  out.vh = vh.topRows(r);
  out.s = sv.head(r);
  out.kept_weights.resize(r);
  for (int i = 0; i < r; ++i) out.kept_weights[i] = sv(i) * sv(i) / total;
  if (renorm > 0) out.s /= renorm / std::sqrt(total / total);  // keep ||psi|| = 1
  if (renorm > 0) out.s = sv.head(r) / renorm;
  return out;
}

double entropy_of_weights(const std::vector<double>& w) {
  double tot = 0.0;
  for (double x : w) tot += x;
  double s = 0.0;
  for (double x : w) {
    const double p = x / tot;
    if (p > 1e-15) s -= p * std::log(p);
  }
  return s;
}

// ---------------------------------------------------------------------------
// MPO for H = gamma * (-sum sigma^x) + jscale * sum J_ij sigma^z sigma^z
// ---------------------------------------------------------------------------

struct MpoEntry {
  int a = 0;
  int b = 0;
  Eigen::Matrix2cd op;
};

struct MpoSite {
  int wl = 1;
  int wr = 1;
  std::vector<MpoEntry> entries;
};

struct Mpo {
  std::vector<MpoSite> sites;
};

Eigen::Matrix2cd op_identity() { return Eigen::Matrix2cd::Identity(); }
Eigen::Matrix2cd op_sx() {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return m;
}
Eigen::Matrix2cd op_sz() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}

Mpo build_mpo(const CouplingGraph& graph, double gamma, double jscale) {
  const int n = graph.n;
  std::vector<int> pos(n);
  for (int p = 0; p < n; ++p) pos[graph.mps_order[p]] = p;

  // coupling lookup by node pair
  std::map<std::pair<int, int>, double> jmap;
  for (const Edge& e : graph.edges) jmap[{e.i, e.j}] += graph.coupling_value(e);

  // last position each node couples to
  std::vector<int> last_partner(n, -1);
  for (const auto& [key, j] : jmap) {
    const int pi = pos[key.first], pj = pos[key.second];
    last_partner[key.first] = std::max(last_partner[key.first], std::max(pi, pj));
    last_partner[key.second] = std::max(last_partner[key.second], std::max(pi, pj));
  }

  // Bond state layout: 0 = before-identity, 1 = after-identity, 2+k = open
  // node channels carrying sigma^z. Boundary bonds hold a single state.
  std::vector<std::vector<int>> open_at(n + 1);  // open node ids per bond
  for (int b = 1; b < n; ++b) {
    std::vector<int> open;
    for (int p = 0; p < b; ++p) {
      const int v = graph.mps_order[p];
      if (last_partner[v] >= b) open.push_back(v);
    }
    std::sort(open.begin(), open.end());
    open_at[b] = std::move(open);
  }

  auto state_index = [&](int bond, int kind, int node) -> int {
    // kind: 0 init, 1 final, 2 open(node)
    if (bond == 0) return 0;
    if (bond == n) return 0;
    if (kind == 0) return 0;
    if (kind == 1) return 1;
    const auto& open = open_at[bond];
    const auto it = std::lower_bound(open.begin(), open.end(), node);
    return 2 + static_cast<int>(it - open.begin());
  };
  auto bond_dim = [&](int bond) -> int {
    if (bond == 0 || bond == n) return 1;
    return 2 + static_cast<int>(open_at[bond].size());
  };

  Mpo mpo;
  mpo.sites.resize(n);
  for (int p = 0; p < n; ++p) {
    MpoSite& site = mpo.sites[p];
    site.wl = bond_dim(p);
    site.wr = bond_dim(p + 1);
    const int v = graph.mps_order[p];
    const bool init_left = (p == 0) || true;   // bond 0 single state is init
    const bool final_right = true;             // bond n single state is final
    (void)init_left;
    (void)final_right;

    const bool has_init_right = (p + 1 < n);
    const bool has_final_left = (p > 0);

    // identity flows
    if (has_init_right)
      site.entries.push_back({state_index(p, 0, -1), state_index(p + 1, 0, -1), op_identity()});
    if (has_final_left)
      site.entries.push_back({state_index(p, 1, -1), state_index(p + 1, 1, -1), op_identity()});
    // driver term
    site.entries.push_back({state_index(p, 0, -1), state_index(p + 1, 1, -1), -gamma * op_sx()});
    // open this node's sigma^z channel
    if (last_partner[v] > p && p + 1 < n)
      site.entries.push_back({state_index(p, 0, -1), state_index(p + 1, 2, v), op_sz()});
    // channels passing through, and couplings closing here
    if (p > 0) {
      for (int u : open_at[p]) {
        const auto key = std::make_pair(std::min(u, v), std::max(u, v));
        const auto it = jmap.find(key);
        if (it != jmap.end())
          site.entries.push_back(
              {state_index(p, 2, u), state_index(p + 1, 1, -1), jscale * it->second * op_sz()});
        if (p + 1 < n && std::binary_search(open_at[p + 1].begin(), open_at[p + 1].end(), u))
          site.entries.push_back({state_index(p, 2, u), state_index(p + 1, 2, u), op_identity()});
      }
    }
  }
  return mpo;
}

// ---------------------------------------------------------------------------
// Environment blocks
// ---------------------------------------------------------------------------

using EnvBlock = std::vector<Mat>;  // one chi x chi matrix per MPO bond state

EnvBlock boundary_env() { return {Mat::Ones(1, 1)}; }

EnvBlock update_left(const EnvBlock& l, const MpoSite& w, const std::array<Mat, 2>& a) {
  const int chir = static_cast<int>(a[0].cols());
  EnvBlock out(w.wr, Mat::Zero(chir, chir));
  std::vector<std::array<Mat, 2>> la(w.wl);
  std::vector<bool> have(w.wl, false);
  for (const auto& e : w.entries) {
    if (!have[e.a]) {
      la[e.a] = {l[e.a] * a[0], l[e.a] * a[1]};
      have[e.a] = true;
    }
    for (int sp = 0; sp < 2; ++sp)
      for (int s = 0; s < 2; ++s) {
        const cplx c = e.op(sp, s);
        if (c == cplx(0, 0)) continue;
        out[e.b].noalias() += c * (a[sp].adjoint() * la[e.a][s]);
      }
  }
  return out;
}

EnvBlock update_right(const EnvBlock& r, const MpoSite& w, const std::array<Mat, 2>& b) {
  const int chil = static_cast<int>(b[0].rows());
  EnvBlock out(w.wl, Mat::Zero(chil, chil));
  std::vector<std::array<Mat, 2>> rb(w.wr);
  std::vector<bool> have(w.wr, false);
  for (const auto& e : w.entries) {
    if (!have[e.b]) {
      rb[e.b] = {r[e.b] * b[0].transpose(), r[e.b] * b[1].transpose()};
      have[e.b] = true;
    }
    for (int sp = 0; sp < 2; ++sp)
      for (int s = 0; s < 2; ++s) {
        const cplx c = e.op(sp, s);
        if (c == cplx(0, 0)) continue;
        out[e.a].noalias() += c * (b[sp].conjugate() * rb[e.b][s]);
      }
  }
  return out;
}

// theta4 layout: index s1*2+s2, each chi_l x chi_r
BlockVec apply_h2(const EnvBlock& l, const MpoSite& w1, const MpoSite& w2, const EnvBlock& r,
                  const BlockVec& theta) {
  const int chil = static_cast<int>(theta[0].rows());
  const int chir = static_cast<int>(theta[0].cols());
  // L * theta
  std::vector<std::array<std::array<Mat, 2>, 2>> lth(w1.wl);
  std::vector<bool> have(w1.wl, false);
  for (const auto& e : w1.entries)
    if (!have[e.a]) {
      for (int s1 = 0; s1 < 2; ++s1)
        for (int s2 = 0; s2 < 2; ++s2) lth[e.a][s1][s2] = l[e.a] * theta[s1 * 2 + s2];
      have[e.a] = true;
    }
  // W1
  std::vector<std::array<std::array<Mat, 2>, 2>> mid(w1.wr);
  std::vector<bool> have_mid(w1.wr, false);
  for (const auto& e : w1.entries)
    for (int sp = 0; sp < 2; ++sp)
      for (int s = 0; s < 2; ++s) {
        const cplx c = e.op(sp, s);
        if (c == cplx(0, 0)) continue;
        if (!have_mid[e.b]) {
          for (int x = 0; x < 2; ++x)
            for (int y = 0; y < 2; ++y) mid[e.b][x][y] = Mat::Zero(chil, chir);
          have_mid[e.b] = true;
        }
        for (int s2 = 0; s2 < 2; ++s2) mid[e.b][sp][s2].noalias() += c * lth[e.a][s][s2];
      }
  // W2
  std::vector<std::array<std::array<Mat, 2>, 2>> mid2(w2.wr);
  std::vector<bool> have2(w2.wr, false);
  for (const auto& e : w2.entries) {
    if (!have_mid[e.a]) continue;
    for (int sp = 0; sp < 2; ++sp)
      for (int s = 0; s < 2; ++s) {
        const cplx c = e.op(sp, s);
        if (c == cplx(0, 0)) continue;
        if (!have2[e.b]) {
          for (int x = 0; x < 2; ++x)
            for (int y = 0; y < 2; ++y) mid2[e.b][x][y] = Mat::Zero(chil, chir);
          have2[e.b] = true;
        }
        for (int s1 = 0; s1 < 2; ++s1) mid2[e.b][s1][sp].noalias() += c * mid[e.a][s1][s];
      }
  }
  // close with R
  BlockVec out(4, Mat::Zero(chil, chir));
  for (int b = 0; b < w2.wr; ++b) {
    if (!have2[b]) continue;
    for (int s1 = 0; s1 < 2; ++s1)
      for (int s2 = 0; s2 < 2; ++s2) out[s1 * 2 + s2].noalias() += mid2[b][s1][s2] * r[b].transpose();
  }
  return out;
}

BlockVec apply_h1(const EnvBlock& l, const MpoSite& w, const EnvBlock& r, const BlockVec& theta) {
  const int chil = static_cast<int>(theta[0].rows());
  const int chir = static_cast<int>(theta[0].cols());
  std::vector<std::array<Mat, 2>> lth(w.wl);
  std::vector<bool> have(w.wl, false);
  BlockVec out(2, Mat::Zero(chil, chir));
  for (const auto& e : w.entries) {
    if (!have[e.a]) {
      lth[e.a] = {l[e.a] * theta[0], l[e.a] * theta[1]};
      have[e.a] = true;
    }
    for (int sp = 0; sp < 2; ++sp)
      for (int s = 0; s < 2; ++s) {
        const cplx c = e.op(sp, s);
        if (c == cplx(0, 0)) continue;
        out[sp].noalias() += c * (lth[e.a][s] * r[e.b].transpose());
      }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Block-vector Lanczos: exp(-i 2pi tau H) v and lowest eigenpair
// ---------------------------------------------------------------------------

cplx bdot(const BlockVec& a, const BlockVec& b) {
  cplx acc(0, 0);
  for (std::size_t k = 0; k < a.size(); ++k)
    acc += (a[k].conjugate().array() * b[k].array()).sum();
  return acc;
}

double bnorm(const BlockVec& a) { return std::sqrt(std::abs(bdot(a, a).real())); }

void baxpy(BlockVec& y, const cplx& c, const BlockVec& x) {
  for (std::size_t k = 0; k < y.size(); ++k) y[k].noalias() += c * x[k];
}

void bscale(BlockVec& y, double c) {
  for (auto& m : y) m *= c;
}

std::int64_t bdim(const BlockVec& a) {
  std::int64_t d = 0;
  for (const auto& m : a) d += m.size();
  return d;
}

using HMul = std::function<BlockVec(const BlockVec&)>;

BlockVec lanczos_exp(const HMul& hmul, BlockVec v, double tau, int cap, double tol,
                     const std::string& what) {
  const double nv = bnorm(v);
  if (nv == 0) throw NumericalError(what + ": zero vector");
  bscale(v, 1.0 / nv);
  const std::int64_t dim = bdim(v);
  cap = static_cast<int>(std::min<std::int64_t>(cap, dim));

  std::vector<BlockVec> basis;
  std::vector<double> alpha, beta;
  Eigen::VectorXcd coeff_prev;
  int k = 0;
  bool happy = false;
  Eigen::VectorXcd coeff;
  for (int it = 0; it < cap; ++it) {
    basis.push_back(v);
    BlockVec w = hmul(v);
    const cplx a = bdot(v, w);
    alpha.push_back(a.real());
    baxpy(w, -a, v);
    if (it > 0) baxpy(w, -beta[it - 1], basis[it - 1]);
    // one reorthogonalization pass keeps the recurrence stable
    for (const auto& u : basis) baxpy(w, -bdot(u, w), u);
    const double nb = bnorm(w);
    k = it + 1;

    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) t(i, i) = alpha[i];
    for (int i = 0; i + 1 < k; ++i) t(i, i + 1) = t(i + 1, i) = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    Eigen::VectorXcd phases(k);
    for (int i = 0; i < k; ++i)
      phases(i) = std::exp(cplx(0, -kTwoPi * tau * es.eigenvalues()(i)));
    coeff = es.eigenvectors().cast<cplx>() *
            (phases.array() * es.eigenvectors().row(0).transpose().cast<cplx>().array()).matrix();

    double delta = 1.0;
    if (coeff_prev.size() > 0) {
      Eigen::VectorXcd padded = Eigen::VectorXcd::Zero(k);
      padded.head(coeff_prev.size()) = coeff_prev;
      delta = (coeff - padded).norm();
    }
    coeff_prev = coeff;
    if (nb < 1e-13) {
      happy = true;
      break;
    }
    if (delta < tol && it >= 1) {
      happy = true;
      break;
    }
    if (it == cap - 1) break;
    beta.push_back(nb);
    bscale(w, 1.0 / nb);
    v = std::move(w);
  }
  if (!happy && k == cap && cap < dim)
    throw NumericalError(what + ": local Krylov exponential did not converge within " +
                         std::to_string(cap) + " vectors");
  BlockVec out(basis[0].size());
  for (std::size_t m = 0; m < out.size(); ++m)
    out[m] = Mat::Zero(basis[0][m].rows(), basis[0][m].cols());
  for (int i = 0; i < k; ++i) baxpy(out, nv * coeff(i), basis[i]);
  return out;
}

std::pair<double, BlockVec> lanczos_lowest(const HMul& hmul, BlockVec v, int cap, double tol) {
  const double nv = bnorm(v);
  bscale(v, 1.0 / nv);
  const std::int64_t dim = bdim(v);
  cap = static_cast<int>(std::min<std::int64_t>(cap, dim));
  std::vector<BlockVec> basis;
  std::vector<double> alpha, beta;
  double prev = 1e300;
  Eigen::VectorXd ritz;
  int k = 0;
  for (int it = 0; it < cap; ++it) {
    basis.push_back(v);
    BlockVec w = hmul(v);
    const cplx a = bdot(v, w);
    alpha.push_back(a.real());
    baxpy(w, -a, v);
    if (it > 0) baxpy(w, -beta[it - 1], basis[it - 1]);
    for (const auto& u : basis) baxpy(w, -bdot(u, w), u);
    const double nb = bnorm(w);
    k = it + 1;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) t(i, i) = alpha[i];
    for (int i = 0; i + 1 < k; ++i) t(i, i + 1) = t(i + 1, i) = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    const double e0 = es.eigenvalues()(0);
    ritz = es.eigenvectors().col(0);
    if ((it >= 2 && std::abs(e0 - prev) < tol * std::max(1.0, std::abs(e0))) || nb < 1e-13 ||
        it == cap - 1) {
      prev = e0;
      break;
    }
    prev = e0;
    beta.push_back(nb);
    bscale(w, 1.0 / nb);
    v = std::move(w);
  }
  BlockVec out(basis[0].size());
  for (std::size_t m = 0; m < out.size(); ++m)
    out[m] = Mat::Zero(basis[0][m].rows(), basis[0][m].cols());
  for (int i = 0; i < k; ++i) baxpy(out, cplx(ritz(i), 0), basis[i]);
  const double no = bnorm(out);
  bscale(out, 1.0 / no);
  return {prev, out};
}

// ---------------------------------------------------------------------------
// theta assembly / splitting
// ---------------------------------------------------------------------------

BlockVec make_theta2(const std::array<Mat, 2>& left, const std::array<Mat, 2>& right) {
  BlockVec theta(4);
  for (int s1 = 0; s1 < 2; ++s1)
    for (int s2 = 0; s2 < 2; ++s2) theta[s1 * 2 + s2] = left[s1] * right[s2];
  return theta;
}

Mat theta_to_matrix(const BlockVec& theta) {
  const int chil = static_cast<int>(theta[0].rows());
  const int chir = static_cast<int>(theta[0].cols());
  Mat m(2 * chil, 2 * chir);
  for (int s1 = 0; s1 < 2; ++s1)
    for (int s2 = 0; s2 < 2; ++s2) m.block(s1 * chil, s2 * chir, chil, chir) = theta[s1 * 2 + s2];
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// MpsState basics
// ---------------------------------------------------------------------------

std::vector<int> MpsState::bond_dims() const {
  std::vector<int> dims;
  for (int i = 0; i + 1 < n(); ++i) dims.push_back(static_cast<int>(tensors[i][0].cols()));
  return dims;
}

double MpsState::norm() const {
  Mat rho = Mat::Ones(1, 1);
  for (int i = 0; i < n(); ++i) {
    Mat next = tensors[i][0].adjoint() * rho * tensors[i][0];
    next.noalias() += tensors[i][1].adjoint() * rho * tensors[i][1];
    rho = std::move(next);
  }
  return std::sqrt(std::abs(rho(0, 0).real()));
}

void MpsState::move_center_to(int site) {
  while (center < site) {
    const int i = center;
    const int chil = static_cast<int>(tensors[i][0].rows());
    const int chir = static_cast<int>(tensors[i][0].cols());
    Mat m(2 * chil, chir);
    m.topRows(chil) = tensors[i][0];
    m.bottomRows(chil) = tensors[i][1];
    auto svd = svd_truncate(m, std::max(chi_max, chir), 0.0, 2);
    const int r = static_cast<int>(svd.s.size());
    tensors[i][0] = svd.u.topRows(chil).leftCols(r);
    tensors[i][1] = svd.u.bottomRows(chil).leftCols(r);
    const Mat carry = svd.s.asDiagonal() * svd.vh;
    tensors[i + 1][0] = carry * tensors[i + 1][0];
    tensors[i + 1][1] = carry * tensors[i + 1][1];
    ++center;
  }
  while (center > site) {
    const int i = center;
    const int chil = static_cast<int>(tensors[i][0].rows());
    const int chir = static_cast<int>(tensors[i][0].cols());
    Mat m(chil, 2 * chir);
    m.leftCols(chir) = tensors[i][0];
    m.rightCols(chir) = tensors[i][1];
    auto svd = svd_truncate(m, std::max(chi_max, chil), 0.0, 2);
    const int r = static_cast<int>(svd.s.size());
    tensors[i][0] = svd.vh.leftCols(chir).topRows(r);
    tensors[i][1] = svd.vh.rightCols(chir).topRows(r);
    const Mat carry = svd.u.leftCols(r) * svd.s.asDiagonal();
    tensors[i - 1][0] = tensors[i - 1][0] * carry;
    tensors[i - 1][1] = tensors[i - 1][1] * carry;
    --center;
  }
}

double EntropyTrace::s_max() const {
  double best = 0.0;
  for (const auto& row : cut_entropy)
    for (double v : row) best = std::max(best, v);
  return best;
}

// ---------------------------------------------------------------------------
// DMRG
// ---------------------------------------------------------------------------

MpsState dmrg_init(const CouplingGraph& graph, const AnnealSchedule& schedule, int chi,
                   int max_sweeps, double rel_tol) {
  if (chi < 2) throw ValidationError("dmrg_init requires chi >= 2");
  const int n = graph.n;
  if (n < 2) throw ValidationError("MPS engine requires n >= 2");
  const double gamma = schedule.gamma(0.0);
  const double jscale = schedule.jscale(0.0);
  const Mpo mpo = build_mpo(graph, gamma, jscale);

  MpsState st;
  st.chi_max = chi;
  st.svd_threshold = 0.0;  // DMRG keeps everything up to chi
  st.center = 0;
  st.tensors.assign(n, {Mat::Constant(1, 1, cplx(1.0 / std::sqrt(2.0), 0)),
                        Mat::Constant(1, 1, cplx(1.0 / std::sqrt(2.0), 0))});

  std::vector<EnvBlock> lenv(n + 1), renv(n + 1);
  lenv[0] = boundary_env();
  renv[n] = boundary_env();
  for (int p = n - 1; p >= 1; --p) renv[p] = update_right(renv[p + 1], mpo.sites[p], st.tensors[p]);

  std::vector<double> sweep_energies;
  double prev_energy = 1e300;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double energy = 0.0;
    auto local_solve = [&](int i) {
      BlockVec theta = make_theta2(st.tensors[i], st.tensors[i + 1]);
      const auto& w1 = mpo.sites[i];
      const auto& w2 = mpo.sites[i + 1];
      HMul hmul = [&](const BlockVec& x) { return apply_h2(lenv[i], w1, w2, renv[i + 2], x); };
      auto [e, ground] = lanczos_lowest(hmul, std::move(theta), 60, 1e-12);
      energy = e;
      return ground;
    };
    // left-to-right
    for (int i = 0; i <= n - 2; ++i) {
      BlockVec ground = local_solve(i);
      auto svd = svd_truncate(theta_to_matrix(ground), chi, st.svd_threshold, 2);
      const int chil = static_cast<int>(ground[0].rows());
      const int chir = static_cast<int>(ground[0].cols());
      const int r = static_cast<int>(svd.s.size());
      st.tensors[i][0] = svd.u.topRows(chil).leftCols(r);
      st.tensors[i][1] = svd.u.bottomRows(chil).leftCols(r);
      const Mat carry = svd.s.asDiagonal() * svd.vh;
      st.tensors[i + 1][0] = carry.leftCols(chir);
      st.tensors[i + 1][1] = carry.rightCols(chir);
      st.center = i + 1;
      lenv[i + 1] = update_left(lenv[i], mpo.sites[i], st.tensors[i]);
    }
    // right-to-left
    for (int i = n - 2; i >= 0; --i) {
      BlockVec ground = local_solve(i);
      auto svd = svd_truncate(theta_to_matrix(ground), chi, st.svd_threshold, 2);
      const int chil = static_cast<int>(ground[0].rows());
      const int chir = static_cast<int>(ground[0].cols());
      const int r = static_cast<int>(svd.s.size());
      st.tensors[i + 1][0] = svd.vh.leftCols(chir).topRows(r);
      st.tensors[i + 1][1] = svd.vh.rightCols(chir).topRows(r);
      const Mat carry = svd.u * svd.s.asDiagonal();
      st.tensors[i][0] = carry.topRows(chil);
      st.tensors[i][1] = carry.bottomRows(chil);
      st.center = i;
      renv[i + 1] = update_right(renv[i + 2], mpo.sites[i + 1], st.tensors[i + 1]);
    }
    sweep_energies.push_back(energy);
    if (std::abs(energy - prev_energy) < rel_tol * std::max(1.0, std::abs(energy))) return st;
    prev_energy = energy;
  }
  std::string trace = "dmrg_init: no convergence after sweeps; energy trace:";
  for (double e : sweep_energies) trace += " " + std::to_string(e);
  throw NumericalError(trace);
}

// ---------------------------------------------------------------------------
// TDVP
// ---------------------------------------------------------------------------

std::pair<MpsState, EntropyTrace> tdvp_evolve(MpsState state, const CouplingGraph& graph,
                                              const QuenchSpec& quench, int chi,
                                              const TdvpOptions& options) {
  quench.check();
  const int n = state.n();
  if (n != graph.n) throw ValidationError("tdvp_evolve: state and graph size mismatch");
  state.chi_max = chi;
  state.svd_threshold = options.svd_threshold;
  state.move_center_to(0);

  const int nsteps = quench.step_count();
  const double t_end = quench.s_stop * quench.t_a_ns;
  const double dt = t_end / nsteps;

  EntropyTrace trace;
  const int ncp = std::max(2, options.checkpoints);
  std::vector<double> s_grid(ncp);
  for (int k = 0; k < ncp; ++k) s_grid[k] = quench.s_stop * k / (ncp - 1);
  trace.s_values.push_back(0.0);
  trace.cut_entropy.push_back(schmidt_entropies(state));
  int next_cp = 1;

  std::vector<double> last_entropies(n - 1, 0.0);
  std::vector<EnvBlock> lenv(n + 1), renv(n + 1);

  for (int step = 0; step < nsteps; ++step) {
    const double s_mid = (step + 0.5) * dt / quench.t_a_ns;
    const auto [gamma, jscale] = quench.schedule.eval(s_mid);
    const Mpo mpo = build_mpo(graph, gamma, jscale);
    const std::string where = "tdvp step " + std::to_string(step);

    lenv[0] = boundary_env();
    renv[n] = boundary_env();
    for (int p = n - 1; p >= 1; --p)
      renv[p] = update_right(renv[p + 1], mpo.sites[p], state.tensors[p]);

    // left-to-right half step
    for (int i = 0; i <= n - 2; ++i) {
      BlockVec theta = make_theta2(state.tensors[i], state.tensors[i + 1]);
      HMul h2 = [&](const BlockVec& x) {
        return apply_h2(lenv[i], mpo.sites[i], mpo.sites[i + 1], renv[i + 2], x);
      };
      theta = lanczos_exp(h2, std::move(theta), 0.5 * dt, options.krylov_cap, options.krylov_tol,
                          where + " site " + std::to_string(i));
      auto svd = svd_truncate(theta_to_matrix(theta), chi, options.svd_threshold, 2);
      state.cumulative_discarded += svd.discarded;
      const int chil = static_cast<int>(theta[0].rows());
      const int chir = static_cast<int>(theta[0].cols());
      state.tensors[i][0] = svd.u.topRows(chil);
      state.tensors[i][1] = svd.u.bottomRows(chil);
      const Mat carry = svd.s.asDiagonal() * svd.vh;
      state.tensors[i + 1][0] = carry.leftCols(chir);
      state.tensors[i + 1][1] = carry.rightCols(chir);
      state.center = i + 1;
      lenv[i + 1] = update_left(lenv[i], mpo.sites[i], state.tensors[i]);
      if (i < n - 2) {
        BlockVec one = {state.tensors[i + 1][0], state.tensors[i + 1][1]};
        HMul h1 = [&](const BlockVec& x) {
          return apply_h1(lenv[i + 1], mpo.sites[i + 1], renv[i + 2], x);
        };
        one = lanczos_exp(h1, std::move(one), -0.5 * dt, options.krylov_cap, options.krylov_tol,
                          where + " backward site " + std::to_string(i + 1));
        state.tensors[i + 1][0] = one[0];
        state.tensors[i + 1][1] = one[1];
      }
    }
    // right-to-left half step
    for (int i = n - 2; i >= 0; --i) {
      BlockVec theta = make_theta2(state.tensors[i], state.tensors[i + 1]);
      HMul h2 = [&](const BlockVec& x) {
        return apply_h2(lenv[i], mpo.sites[i], mpo.sites[i + 1], renv[i + 2], x);
      };
      theta = lanczos_exp(h2, std::move(theta), 0.5 * dt, options.krylov_cap, options.krylov_tol,
                          where + " site " + std::to_string(i));
      auto svd = svd_truncate(theta_to_matrix(theta), chi, options.svd_threshold, 2);
      state.cumulative_discarded += svd.discarded;
      last_entropies[i] = entropy_of_weights(svd.kept_weights);
      const int chil = static_cast<int>(theta[0].rows());
      const int chir = static_cast<int>(theta[0].cols());
      state.tensors[i + 1][0] = svd.vh.leftCols(chir);
      state.tensors[i + 1][1] = svd.vh.rightCols(chir);
      const Mat carry = svd.u * svd.s.asDiagonal();
      state.tensors[i][0] = carry.topRows(chil);
      state.tensors[i][1] = carry.bottomRows(chil);
      state.center = i;
      renv[i + 1] = update_right(renv[i + 2], mpo.sites[i + 1], state.tensors[i + 1]);
      if (i > 0) {
        BlockVec one = {state.tensors[i][0], state.tensors[i][1]};
        HMul h1 = [&](const BlockVec& x) {
          return apply_h1(lenv[i], mpo.sites[i], renv[i + 1], x);
        };
        one = lanczos_exp(h1, std::move(one), -0.5 * dt, options.krylov_cap, options.krylov_tol,
                          where + " backward site " + std::to_string(i));
        state.tensors[i][0] = one[0];
        state.tensors[i][1] = one[1];
      }
    }

    const double s_now = (step + 1) * dt / quench.t_a_ns;
    while (next_cp < ncp && s_now + 1e-12 >= s_grid[next_cp]) {
      trace.s_values.push_back(s_grid[next_cp]);
      trace.cut_entropy.push_back(last_entropies);
      ++next_cp;
    }
  }
  return {std::move(state), std::move(trace)};
}

// ---------------------------------------------------------------------------
// Observables
// ---------------------------------------------------------------------------

CorrelationMatrix mps_correlations(const MpsState& state, const CouplingGraph& graph) {
  MpsState st = state;
  st.move_center_to(0);
  const int n = st.n();
  CorrelationMatrix c(n);
  for (int i = 0; i < n; ++i) {
    // sigma^z at center i, transfer right through right-isometric tensors
    Mat v = st.tensors[i][0].adjoint() * st.tensors[i][0] -
            st.tensors[i][1].adjoint() * st.tensors[i][1];
    for (int j = i + 1; j < n; ++j) {
      const Mat w0 = st.tensors[j][0].adjoint() * v * st.tensors[j][0];
      const Mat w1 = st.tensors[j][1].adjoint() * v * st.tensors[j][1];
      c.set_sym(graph.mps_order[i], graph.mps_order[j], (w0 - w1).trace().real());
      v = w0 + w1;
    }
    if (i + 1 < n) st.move_center_to(i + 1);
  }
  return c;
}

std::vector<double> mps_magnetization(const MpsState& state, const CouplingGraph& graph) {
  MpsState st = state;
  st.move_center_to(0);
  std::vector<double> m(st.n());
  for (int i = 0; i < st.n(); ++i) {
    const double up = (st.tensors[i][0].adjoint() * st.tensors[i][0]).trace().real();
    const double dn = (st.tensors[i][1].adjoint() * st.tensors[i][1]).trace().real();
    m[graph.mps_order[i]] = up - dn;
    if (i + 1 < st.n()) st.move_center_to(i + 1);
  }
  return m;
}

SampleSet mps_sample(const MpsState& state, const CouplingGraph& graph, std::int64_t k,
                     std::uint64_t seed) {
  MpsState st = state;
  st.move_center_to(0);
  const int n = st.n();
  SampleSet out;
  out.n = n;
  out.source = "mps seed=" + std::to_string(seed);
  SplitMix64 rng(seed);
  std::map<std::vector<std::int8_t>, std::int64_t> hist;
  for (std::int64_t t = 0; t < k; ++t) {
    Mat l = Mat::Ones(1, 1);
    std::vector<std::int8_t> row(n);
    for (int p = 0; p < n; ++p) {
      const Mat l0 = l * st.tensors[p][0];
      const Mat l1 = l * st.tensors[p][1];
      const double w0 = l0.squaredNorm();
      const double w1 = l1.squaredNorm();
      const bool pick1 = rng.uniform() * (w0 + w1) >= w0;
      row[graph.mps_order[p]] = pick1 ? -1 : 1;
      l = pick1 ? l1 : l0;
      l /= std::sqrt(pick1 ? w1 : w0);
    }
    ++hist[row];
  }
  for (const auto& [row, count] : hist) out.add(row, count);
  return out;
}

cplx amplitude(const MpsState& state, const CouplingGraph& graph,
               const std::vector<std::int8_t>& spins) {
  if (static_cast<int>(spins.size()) != state.n())
    throw ValidationError("amplitude: configuration length mismatch");
  Mat a = Mat::Ones(1, 1);
  for (int p = 0; p < state.n(); ++p) {
    const int s = spins[graph.mps_order[p]] > 0 ? 0 : 1;
    a = a * state.tensors[p][s];
  }
  return a(0, 0);
}

std::vector<double> schmidt_entropies(const MpsState& state) {
  MpsState st = state;
  st.move_center_to(0);
  const int n = st.n();
  std::vector<double> out(n - 1, 0.0);
  for (int i = 0; i + 1 < n; ++i) {
    const int chil = static_cast<int>(st.tensors[i][0].rows());
    const int chir = static_cast<int>(st.tensors[i][0].cols());
    Mat m(2 * chil, chir);
    m.topRows(chil) = st.tensors[i][0];
    m.bottomRows(chil) = st.tensors[i][1];
    auto svd = svd_truncate(m, std::max(st.chi_max, chir), 0.0, 2);
    out[i] = entropy_of_weights(svd.kept_weights);
    const int r = static_cast<int>(svd.s.size());
    st.tensors[i][0] = svd.u.topRows(chil).leftCols(r);
    st.tensors[i][1] = svd.u.bottomRows(chil).leftCols(r);
    const Mat carry = svd.s.asDiagonal() * svd.vh;
    st.tensors[i + 1][0] = carry * st.tensors[i + 1][0];
    st.tensors[i + 1][1] = carry * st.tensors[i + 1][1];
    st.center = i + 1;
  }
  return out;
}

double mps_energy(const MpsState& state, const CouplingGraph& graph, double gamma, double jscale) {
  const Mpo mpo = build_mpo(graph, gamma, jscale);
  EnvBlock r = boundary_env();
  for (int p = state.n() - 1; p >= 0; --p) r = update_right(r, mpo.sites[p], state.tensors[p]);
  return r[0](0, 0).real();
}

}  // namespace quenchlab
