#include "conesep/criteria.hpp"

#include "conesep/lp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace conesep {

namespace {

double binomial(Eigen::Index n, int k) {
  double acc = 1.0;
  for (int i = 0; i < k; ++i) acc *= static_cast<double>(n - i) / static_cast<double>(i + 1);
  return acc;
}

/// Visits all index subsets of {0..d-1} of size k in lexicographic order.
template <typename F>
void for_each_support(Eigen::Index d, int k, F&& fn) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    fn(idx);
    int j = k - 1;
    while (j >= 0 && idx[static_cast<std::size_t>(j)] == d - k + j) --j;
    if (j < 0) break;
    ++idx[static_cast<std::size_t>(j)];
    for (int l = j + 1; l < k; ++l)
      idx[static_cast<std::size_t>(l)] = idx[static_cast<std::size_t>(l - 1)] + 1;
  }
}

Vector pattern_vector(const std::vector<Eigen::Index>& T, std::uint64_t mask, Eigen::Index d) {
  Vector e = Vector::Zero(d);
  for (std::size_t k = 0; k < T.size(); ++k) {
    e(T[k]) = (mask >> k) & 1 ? -1.0 : 1.0;
  }
  return e;
}

} // namespace

RipTable rip_constants(const LinearMap& A, int K) {
  const Eigen::Index d = A.cols();
  if (K < 1 || K > d) throw input_error("rip_constants: K must be in [1, d]");
  for (int k = 1; k <= K; ++k) {
    if (binomial(d, k) > 1e6)
      throw input_error("rip_constants: support budget exceeded; subsample the matrix");
  }
  RipTable table;
  table.delta.resize(static_cast<std::size_t>(K), 0.0);
  for (int k = 1; k <= K; ++k) {
    double worst = 0.0;
    for_each_support(d, k, [&](const std::vector<Eigen::Index>& s) {
      Matrix as(A.rows(), k);
      for (int j = 0; j < k; ++j) as.col(j) = A.matrix().col(s[static_cast<std::size_t>(j)]);
      Eigen::SelfAdjointEigenSolver<Matrix> eig(as.transpose() * as);
      const double lo = eig.eigenvalues()(0);
      const double hi = eig.eigenvalues()(k - 1);
      worst = std::max({worst, hi - 1.0, 1.0 - lo});
    });
    table.delta[static_cast<std::size_t>(k - 1)] = worst;
  }
  return table;
}

ExperimentReport check_rip_cross(const LinearMap& A, int s, int trials, RngStream rng) {
  const Eigen::Index d = A.cols();
  if (2 * s > d) throw input_error("check_rip_cross: need 2s <= d");
  const RipTable table = rip_constants(A, 2 * s);
  const double delta2s = table.at(2 * s);

  ExperimentReport rep;
  rep.name = "rip-cross-bound";
  rep.config["s"] = s;
  rep.config["trials"] = trials;
  rep.bounds["delta_2s"] = delta2s;

  double max_ratio = 0.0;
  bool pass = true;
  for (int t = 0; t < trials; ++t) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(t));
    // disjoint supports by construction
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(d));
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size(); i > 1; --i) {
      std::swap(perm[i - 1], perm[sub.next_u64() % i]);
    }
    Vector u = Vector::Zero(d), v = Vector::Zero(d);
    for (int j = 0; j < s; ++j) {
      u(perm[static_cast<std::size_t>(j)]) = sub.next_normal();
      v(perm[static_cast<std::size_t>(s + j)]) = sub.next_normal();
    }
    const double cross = std::abs(A.apply(u).dot(A.apply(v)));
    const double bound = delta2s * u.norm() * v.norm();
    if (cross > bound + 1e-10) pass = false;
    if (bound > 0) max_ratio = std::max(max_ratio, cross / bound);
  }
  rep.observed["max_ratio"] = max_ratio;
  rep.pass = pass;
  return rep;
}

bool nsp_check(const LinearMap& A, const std::vector<Eigen::Index>& S0) {
  const Eigen::Index d = A.cols();
  for (auto i : S0) {
    if (i < 0 || i >= d) throw input_error("nsp_check: support index out of range");
  }
  if (S0.size() > 16) throw input_error("nsp_check: sign-pattern budget exceeded (|S0| <= 16)");
  const Matrix& N = A.kernel_basis();
  if (N.cols() == 0) return true; // trivial kernel

  std::vector<char> on(static_cast<std::size_t>(d), 0);
  for (auto i : S0) on[static_cast<std::size_t>(i)] = 1;
  std::vector<Eigen::Index> off;
  for (Eigen::Index i = 0; i < d; ++i)
    if (!on[static_cast<std::size_t>(i)]) off.push_back(i);

  // variables (c, u): eta = N c, u_j >= |eta_j| off support, sum u_j <= 1;
  // NSP w.r.t. S0 <=> max <sigma, eta_S0> < 1 for every sign pattern sigma
  const auto k = N.cols();
  const auto noff = static_cast<Eigen::Index>(off.size());
  const Eigen::Index nx = k + noff;
  const Eigen::Index rows = 2 * noff + 1 + noff;
  Matrix G = Matrix::Zero(rows, nx);
  Vector h = Vector::Zero(rows);
  for (Eigen::Index j = 0; j < noff; ++j) {
    G.block(2 * j, 0, 1, k) = N.row(off[static_cast<std::size_t>(j)]);
    G(2 * j, k + j) = -1.0;
    G.block(2 * j + 1, 0, 1, k) = -N.row(off[static_cast<std::size_t>(j)]);
    G(2 * j + 1, k + j) = -1.0;
  }
  for (Eigen::Index j = 0; j < noff; ++j) G(2 * noff, k + j) = 1.0;
  h(2 * noff) = 1.0;
  for (Eigen::Index j = 0; j < noff; ++j) G(2 * noff + 1 + j, k + j) = -1.0;

  const auto npat = static_cast<std::uint64_t>(1) << S0.size();
  for (std::uint64_t mask = 0; mask < npat; ++mask) {
    Vector c = Vector::Zero(nx);
    for (std::size_t t = 0; t < S0.size(); ++t) {
      const double sgn = (mask >> t) & 1 ? -1.0 : 1.0;
      c.head(k) += sgn * N.row(S0[t]).transpose();
    }
    LpResult lp = solve_lp_max(c, G, h);
    if (lp.status == LpStatus::unbounded) return false;
    if (lp.status != LpStatus::optimal) throw input_error("nsp_check: LP solve failed");
    if (lp.value >= 1.0 - 1e-9) return false;
  }
  return true;
}

RnspResult rnsp_check(const LinearMap& A, const std::vector<Eigen::Index>& T, double gamma,
                      double tau, const RnspOptions& opts) {
  const Eigen::Index d = A.cols();
  if (T.size() > 16) throw input_error("rnsp_check: sign-pattern budget exceeded (|T| <= 16)");
  if (gamma < 0 || tau < 0) throw input_error("rnsp_check: gamma, tau >= 0 required");
  for (auto i : T) {
    if (i < 0 || i >= d) throw input_error("rnsp_check: index out of range");
  }
  std::vector<char> on(static_cast<std::size_t>(d), 0);
  for (auto i : T) on[static_cast<std::size_t>(i)] = 1;

  const double smax = A.sigma_max();
  RngStream rng(opts.seed, 0);

  auto g_exact = [&](const Vector& e, const Vector& x) {
    double val = e.dot(x);
    for (Eigen::Index i = 0; i < d; ++i)
      if (!on[static_cast<std::size_t>(i)]) val -= gamma * std::abs(x(i));
    val -= tau * A.apply(x).norm();
    return val;
  };

  auto primal_max = [&](const Vector& e, std::uint64_t stream) {
    double best = -std::numeric_limits<double>::infinity();
    std::vector<Vector> starts;
    starts.push_back(e / e.norm());
    const Matrix& K = A.kernel_basis();
    for (Eigen::Index j = 0; j < std::min<Eigen::Index>(K.cols(), 4); ++j) starts.push_back(K.col(j));
    RngStream sub = rng.substream(stream);
    for (int i = 0; i < opts.primal_starts; ++i) starts.push_back(gaussian_vector(sub, d).normalized());

    const double step = 1.0 / (1.0 + gamma * std::sqrt(static_cast<double>(d)) + tau * smax);
    for (auto& x0 : starts) {
      Vector x = x0;
      for (double mu : {1e-2, 1e-4, 1e-7, 1e-10}) {
        for (int it = 0; it < opts.primal_iters; ++it) {
          Vector grad = e;
          for (Eigen::Index i = 0; i < d; ++i) {
            if (!on[static_cast<std::size_t>(i)])
              grad(i) -= gamma * x(i) / std::sqrt(x(i) * x(i) + mu * mu);
          }
          const Vector ax = A.apply(x);
          const double an = std::sqrt(ax.squaredNorm() + mu * mu);
          grad -= (tau / an) * A.apply_adjoint(ax);
          Vector xn = x + step * grad;
          const double nn = xn.norm();
          if (nn < 1e-14) break;
          xn /= nn;
          if ((xn - x).norm() < 1e-14) break;
          x = xn;
        }
      }
      best = std::max(best, g_exact(e, x));
      best = std::max(best, g_exact(e, x0));
    }
    return best;
  };

  auto dual_upper = [&](const Vector& e) {
    // min ||e + v + A^T w|| over |v|<=gamma off T (0 on T), ||w|| <= tau
    Vector v = Vector::Zero(d);
    Vector w = Vector::Zero(A.rows());
    Vector vy = v, wy = w;
    double tk = 1.0;
    const double L = 2.0 * (1.0 + smax * smax) + 1.0;
    double best = std::numeric_limits<double>::infinity();
    for (int it = 0; it < opts.dual_iters; ++it) {
      Vector r = e + vy + A.apply_adjoint(wy);
      Vector v_new = vy - r / L;
      for (Eigen::Index i = 0; i < d; ++i) {
        v_new(i) = on[static_cast<std::size_t>(i)] ? 0.0
                                                   : std::clamp(v_new(i), -gamma, gamma);
      }
      Vector w_new = wy - A.apply(r) / L;
      const double wn = w_new.norm();
      if (wn > tau) w_new *= tau / wn;

      const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
      vy = v_new + ((tk - 1.0) / tn) * (v_new - v);
      wy = w_new + ((tk - 1.0) / tn) * (w_new - w);
      v = v_new;
      w = w_new;
      tk = tn;
      best = std::min(best, (e + v + A.apply_adjoint(w)).norm());
    }
    return best;
  };

  RnspResult out;
  out.worst_slack = -std::numeric_limits<double>::infinity();
  out.certified_upper = 0.0;
  const auto npat = static_cast<std::uint64_t>(1) << T.size();
  for (std::uint64_t mask = 0; mask < npat; ++mask) {
    const Vector e = pattern_vector(T, mask, d);
    out.worst_slack = std::max(out.worst_slack, primal_max(e, mask));
    out.certified_upper = std::max(out.certified_upper, dual_upper(e));
  }
  out.holds = out.worst_slack <= opts.slack;
  return out;
}

std::optional<double> rip_to_asc_angle(double delta_s, double delta_2s, Eigen::Index d, int s) {
  if (!(delta_s < 1.0)) throw input_error("rip_to_asc_angle: delta_s < 1 required");
  if (delta_s < 0 || delta_2s < 0 || s < 1 || d < s)
    throw input_error("rip_to_asc_angle: invalid arguments");
  const double c = (1.0 / (1.0 - delta_s)) *
                   (delta_s + std::sqrt(5.0) * std::sqrt(static_cast<double>(d) / s + 1.0) *
                                  delta_2s / (1.0 + delta_s));
  if (c >= 1.0) return std::nullopt;
  return std::acos(c);
}

std::vector<std::vector<Eigen::Index>> block_partition(const Vector& u,
                                                       const std::vector<Eigen::Index>& S0,
                                                       int s) {
  if (s < 1) throw input_error("block_partition: s >= 1 required");
  std::vector<char> on(static_cast<std::size_t>(u.size()), 0);
  for (auto i : S0) on[static_cast<std::size_t>(i)] = 1;
  std::vector<Eigen::Index> rest;
  for (Eigen::Index i = 0; i < u.size(); ++i)
    if (!on[static_cast<std::size_t>(i)]) rest.push_back(i);
  std::stable_sort(rest.begin(), rest.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double ua = std::abs(u(a)), ub = std::abs(u(b));
    if (ua != ub) return ua > ub;
    return a < b;
  });
  std::vector<std::vector<Eigen::Index>> blocks;
  for (std::size_t pos = 0; pos < rest.size(); pos += static_cast<std::size_t>(s)) {
    const auto end = std::min(rest.size(), pos + static_cast<std::size_t>(s));
    blocks.emplace_back(rest.begin() + static_cast<std::ptrdiff_t>(pos),
                        rest.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return blocks;
}

ExperimentReport check_sqrt5_bound(Eigen::Index d, const Vector& x0, int trials, RngStream rng) {
  if (x0.size() != d) throw input_error("check_sqrt5_bound: dimension mismatch");
  Cone cone = Cone::l1_descent(x0);
  std::vector<Eigen::Index> S0;
  for (Eigen::Index i = 0; i < d; ++i)
    if (x0(i) != 0.0) S0.push_back(i);
  const int s = static_cast<int>(S0.size());

  ExperimentReport rep;
  rep.name = "sqrt5-block-bound";
  rep.config["d"] = d;
  rep.config["s"] = s;
  rep.config["trials"] = trials;
  rep.bounds["sqrt5"] = std::sqrt(5.0);

  double max_ratio = 0.0;
  int used = 0;
  bool pass = true;
  for (int t = 0; t < trials; ++t) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(t));
    Vector u = cone.project(gaussian_vector(sub, d));
    if (u.norm() < 1e-8) continue;
    ++used;
    auto blocks = block_partition(u, S0, s);
    double acc = 0.0;
    for (auto i : S0) acc += u(i) * u(i);
    double total = std::sqrt(acc);
    for (const auto& blk : blocks) {
      double bs = 0.0;
      for (auto i : blk) bs += u(i) * u(i);
      total += std::sqrt(bs);
    }
    const double ratio = total / u.norm();
    max_ratio = std::max(max_ratio, ratio);
    if (ratio > std::sqrt(5.0) - 1e-10) pass = false;
  }
  rep.observed["max_ratio"] = max_ratio;
  rep.observed["samples_used"] = used;
  rep.pass = pass && used > 0;
  return rep;
}

RnspParams asc_to_rnsp(double theta, double sigma_min, const std::vector<Eigen::Index>& T) {
  if (!(theta > 0.0 && theta <= M_PI_2)) throw input_error("asc_to_rnsp: theta in (0, pi/2] required");
  if (!(sigma_min > 0.0)) throw input_error("asc_to_rnsp: sigma_min > 0 required");
  RnspParams p;
  const double half = 0.5 * theta;
  p.gamma = std::cos(half) * std::cos(half);
  p.tau = std::sqrt(static_cast<double>(T.size())) / (sigma_min * std::sin(half));
  return p;
}

double rnsp_to_rsv_bound(double gamma, double tau) {
  if (!(gamma < 1.0) || !(tau > 0.0)) throw input_error("rnsp_to_rsv_bound: need gamma < 1, tau > 0");
  return (1.0 - gamma) / (2.0 * tau);
}

namespace {

/// Euclidean projection onto the probability simplex (sort-based).
Vector project_simplex(const Vector& y) {
  const Eigen::Index n = y.size();
  std::vector<double> u(y.data(), y.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0, theta = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    cum += u[static_cast<std::size_t>(j)];
    const double t = (cum - 1.0) / static_cast<double>(j + 1);
    if (u[static_cast<std::size_t>(j)] - t > 0) theta = t;
  }
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = std::max(y(i) - theta, 0.0);
  return x;
}

} // namespace

double polytope_mu(const Polytope& P, const Vector& x0, const Matrix& U_basis,
                   const MuOptions& opts) {
  P.validate();
  const Eigen::Index d = x0.size();
  if (P.dim() != d || U_basis.rows() != d) throw input_error("polytope_mu: dimension mismatch");
  if (!P.contains(x0, 1e-9)) throw input_error("polytope_mu: x0 must lie in the polytope");

  // orthonormalize U
  Eigen::ColPivHouseholderQR<Matrix> qr(U_basis);
  qr.setThreshold(1e-12);
  const Eigen::Index r = qr.rank();
  if (r == 0) throw input_error("polytope_mu: U must be nontrivial");
  Matrix U = qr.householderQ() * Matrix::Identity(d, r);

  // precondition (x0 + U) cap P = {x0}: every coordinate of c must vanish on
  // the section {c : x0 + U c in P}
  {
    const auto rows = static_cast<Eigen::Index>(P.halfspaces.size());
    Matrix G(rows, r);
    Vector h(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const auto& hs = P.halfspaces[static_cast<std::size_t>(i)];
      G.row(i) = (hs.normal.transpose() * U);
      h(i) = hs.offset - hs.normal.dot(x0);
    }
    for (Eigen::Index j = 0; j < r; ++j) {
      for (double sgn : {1.0, -1.0}) {
        Vector c = Vector::Zero(r);
        c(j) = sgn;
        LpResult lp = solve_lp_max(c, G, h);
        if (lp.status == LpStatus::unbounded || lp.value > 1e-9)
          throw input_error("polytope_mu: x0 + U meets the polytope beyond x0");
      }
    }
  }

  const auto nv = static_cast<Eigen::Index>(P.vertices.size());
  Matrix Vm(d, nv);
  for (Eigen::Index j = 0; j < nv; ++j) Vm.col(j) = P.vertices[static_cast<std::size_t>(j)];

  auto ratio_at = [&](const Vector& x) {
    const Vector w = x - x0;
    const double n = w.norm();
    if (n < 1e-9) return -1.0;
    return (U.transpose() * w).norm() / n;
  };

  double best = 0.0;
  std::vector<std::pair<double, Vector>> top; // candidates for refinement

  auto offer = [&](double val, const Vector& lam) {
    best = std::max(best, val);
    if (static_cast<int>(top.size()) < opts.refinements) {
      top.emplace_back(val, lam);
      return;
    }
    auto worst = std::min_element(top.begin(), top.end(),
                                  [](const auto& a, const auto& b) { return a.first < b.first; });
    if (val > worst->first) *worst = {val, lam};
  };

  for (Eigen::Index j = 0; j < nv; ++j) {
    const double v = ratio_at(Vm.col(j));
    if (v >= 0) {
      Vector lam = Vector::Zero(nv);
      lam(j) = 1.0;
      offer(v, lam);
    }
  }

  RngStream rng(opts.seed, 0);
  for (long t = 0; t < opts.samples; ++t) {
    Vector lam(nv);
    for (Eigen::Index j = 0; j < nv; ++j) lam(j) = -std::log(rng.next_uniform());
    lam /= lam.sum();
    const double v = ratio_at(Vm * lam);
    if (v >= 0) offer(v, lam);
  }

  // simplex-projected ascent on the vertex weights
  for (auto& [val, lam0] : top) {
    Vector lam = lam0;
    double cur = val;
    double step = 0.1;
    for (int it = 0; it < opts.refine_iters; ++it) {
      const Vector x = Vm * lam;
      const Vector w = x - x0;
      const double n2 = w.squaredNorm();
      if (n2 < 1e-18) break;
      const Vector pu = U * (U.transpose() * w);
      const double f = pu.squaredNorm() / n2;
      const Vector grad_x = (2.0 / n2) * (pu - f * w);
      const Vector grad = Vm.transpose() * grad_x;
      Vector cand = project_simplex(lam + step * grad);
      const double cv = ratio_at(Vm * cand);
      if (cv > cur) {
        lam = cand;
        cur = cv;
        step *= 1.2;
      } else {
        step *= 0.5;
        if (step < 1e-12) break;
      }
    }
    best = std::max(best, cur);
  }
  return best;
}

} // namespace conesep
