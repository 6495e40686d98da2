#include "conesep/rsv_cond.hpp"

#include "conesep/parallel.hpp"

#include <cmath>
#include <cstring>
#include <limits>

namespace conesep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct IterOut {
  Vector x;
  double obj = kInf;
  bool converged = false;
};

/// Projected gradient steps for min ||Ax||^2 over C cap S. Step 1/sigma_max^2;
/// stops on relative objective change below tol.
IterOut pgd_min_gain(const Matrix& G, double sigma_max_sq, const Cone& C, Vector x, int max_iter,
                     double tol) {
  IterOut out;
  out.x = x;
  out.obj = x.dot(G * x);
  double prev = kInf;
  for (int it = 0; it < max_iter; ++it) {
    const Vector g = G * x;
    const double obj = x.dot(g);
    if (obj < out.obj) {
      out.obj = obj;
      out.x = x;
    }
    if (std::abs(obj - prev) <= tol * std::max(1.0, std::abs(prev))) {
      out.converged = true;
      break;
    }
    prev = obj;
    Vector p = C.project(x - g / sigma_max_sq);
    const double n = p.norm();
    if (n < 1e-13) {
      out.converged = true;
      break;
    }
    x = p / n;
  }
  const double last = x.dot(G * x);
  if (last < out.obj) {
    out.obj = last;
    out.x = x;
  }
  return out;
}

/// Projected ascent for max ||K^T x||^2 over C cap S.
IterOut pga_kernel_corr(const Matrix& K, const Cone& C, Vector x, int max_iter, double tol) {
  IterOut out;
  out.x = x;
  double best = (K.transpose() * x).squaredNorm();
  double prev = -kInf;
  for (int it = 0; it < max_iter; ++it) {
    const Vector kx = K.transpose() * x;
    const double obj = kx.squaredNorm();
    if (obj > best) {
      best = obj;
      out.x = x;
    }
    if (std::abs(obj - prev) <= tol * std::max(1.0, std::abs(prev))) {
      out.converged = true;
      break;
    }
    prev = obj;
    Vector p = C.project(x + K * kx);
    const double n = p.norm();
    if (n < 1e-13) {
      out.converged = true;
      break;
    }
    x = p / n;
  }
  const double last = (K.transpose() * x).squaredNorm();
  if (last > best) {
    best = last;
    out.x = x;
  }
  out.obj = best;
  return out;
}

std::vector<Vector> descent_starts(const LinearMap& A, const Cone& C, const RsvOptions& opts,
                                   bool for_angle) {
  std::vector<Vector> starts;
  RngStream rng(opts.seed, 0xC0DE);
  auto add_projected = [&](const Vector& v) {
    Vector p = C.project(v);
    const double n = p.norm();
    if (n >= 1e-12) starts.push_back(p / n);
  };

  // structured seeds: extreme right-singular directions and kernel directions
  const Matrix& V = A.right_singular_vectors();
  add_projected(V.col(V.cols() - 1));
  add_projected(-V.col(V.cols() - 1));
  const Matrix& K = A.kernel_basis();
  for (Eigen::Index j = 0; j < std::min<Eigen::Index>(K.cols(), 8); ++j) {
    add_projected(K.col(j));
    add_projected(-K.col(j));
  }
  if (for_angle && K.cols() > 1) {
    for (int t = 0; t < 4; ++t) {
      RngStream sub = rng.substream(1000 + static_cast<std::uint64_t>(t));
      add_projected(K * gaussian_vector(sub, K.cols()));
    }
  }
  if (const auto* s = std::get_if<Subspace>(&C.variant())) {
    // exact extrema within a subspace come from one SVD
    if (s->basis.cols() > 0) {
      Eigen::JacobiSVD<Matrix> svd(A.matrix() * s->basis, Eigen::ComputeFullV);
      starts.push_back(s->basis * svd.matrixV().col(svd.matrixV().cols() - 1));
      if (K.cols() > 0) {
        Eigen::JacobiSVD<Matrix> svd2(K.transpose() * s->basis, Eigen::ComputeFullV);
        starts.push_back(s->basis * svd2.matrixV().col(0));
      }
    }
  }
  for (int i = 0; i < opts.starts; ++i) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(i));
    auto m = sample_unit_member(C, sub);
    if (m) starts.push_back(*m);
  }
  return starts;
}

// ---- grid oracle -----------------------------------------------------------

/// Cheap member/shell classification. 2 = member, 1 = within ~res of the cone
/// (candidate for re-projection), 0 = reject.
struct CheapClassifier {
  const Circular* circ = nullptr;
  const L1Descent* l1 = nullptr;
  double cos_member = 0.0, cos_shell = 0.0;
  double sign_at[4] = {0, 0, 0, 0}; // l1: s_i on support, 0 off support
  char on[4] = {0, 0, 0, 0};
  double shell_tol = 0.0;

  CheapClassifier(const Cone& C, double res) {
    circ = std::get_if<Circular>(&C.variant());
    l1 = std::get_if<L1Descent>(&C.variant());
    if (circ) {
      cos_member = std::cos(circ->alpha);
      cos_shell = std::cos(std::min(circ->alpha + 1.05 * res, M_PI));
    } else if (l1) {
      for (std::size_t k = 0; k < l1->support.size(); ++k) {
        on[l1->support[k]] = 1;
        sign_at[l1->support[k]] = l1->signs[k];
      }
      shell_tol = std::sqrt(static_cast<double>(l1->dim)) * res * 1.2;
    } else {
      throw input_error("grid oracle: supported for circular and l1-descent cones only");
    }
  }

  int classify(const double* x, int d) const {
    if (circ) {
      const double c = circ->axis_sign * x[0];
      if (c >= cos_member) return 2;
      if (c >= cos_shell) return 1;
      return 0;
    }
    double v = 0.0;
    for (int i = 0; i < d; ++i) v += on[i] ? sign_at[i] * x[i] : std::abs(x[i]);
    if (v <= 0.0) return 2;
    if (v <= shell_tol) return 1;
    return 0;
  }
};

struct ScanAccum {
  double min_gain = kInf;
  double argmin[4] = {0, 0, 0, 0};
  double max_corr = -1.0;
  double argmax[4] = {0, 0, 0, 0};

  void absorb(const ScanAccum& o, int d) {
    if (o.min_gain < min_gain) {
      min_gain = o.min_gain;
      std::memcpy(argmin, o.argmin, sizeof(double) * static_cast<std::size_t>(d));
    }
    if (o.max_corr > max_corr) {
      max_corr = o.max_corr;
      std::memcpy(argmax, o.argmax, sizeof(double) * static_cast<std::size_t>(d));
    }
  }
};

struct ScanContext {
  const LinearMap& A;
  const Cone& C;
  CheapClassifier cls;
  double res;
  double sigma_max;
  int d, m, k;
  std::vector<double> Araw; // row-major m x d
  std::vector<double> Kraw; // row-major k x d (kernel basis transposed)

  ScanContext(const LinearMap& a, const Cone& c, double res_)
      : A(a), C(c), cls(c, res_), res(res_), sigma_max(a.sigma_max()),
        d(static_cast<int>(a.cols())), m(static_cast<int>(a.rows())),
        k(static_cast<int>(a.kernel_basis().cols())) {
    Araw.resize(static_cast<std::size_t>(m * d));
    Kraw.resize(static_cast<std::size_t>(k * d));
    for (int r = 0; r < m; ++r)
      for (int j = 0; j < d; ++j) Araw[static_cast<std::size_t>(r * d + j)] = a.matrix()(r, j);
    for (int r = 0; r < k; ++r)
      for (int j = 0; j < d; ++j) Kraw[static_cast<std::size_t>(r * d + j)] = a.kernel_basis()(j, r);
  }

  double gain(const double* x) const {
    double acc = 0.0;
    for (int r = 0; r < m; ++r) {
      double s = 0.0;
      for (int j = 0; j < d; ++j) s += Araw[static_cast<std::size_t>(r * d + j)] * x[j];
      acc += s * s;
    }
    return std::sqrt(acc);
  }

  double corr(const double* x) const {
    double acc = 0.0;
    for (int r = 0; r < k; ++r) {
      double s = 0.0;
      for (int j = 0; j < d; ++j) s += Kraw[static_cast<std::size_t>(r * d + j)] * x[j];
      acc += s * s;
    }
    return std::sqrt(acc);
  }
};

inline void scan_point(const ScanContext& ctx, const double* x, ScanAccum& acc) {
  const int kind = ctx.cls.classify(x, ctx.d);
  if (kind == 0) return;
  const double gain = ctx.gain(x);
  const double corr = ctx.k > 0 ? ctx.corr(x) : 0.0;
  if (kind == 2) {
    if (gain < acc.min_gain) {
      acc.min_gain = gain;
      std::memcpy(acc.argmin, x, sizeof(double) * static_cast<std::size_t>(ctx.d));
    }
    if (corr > acc.max_corr) {
      acc.max_corr = corr;
      std::memcpy(acc.argmax, x, sizeof(double) * static_cast<std::size_t>(ctx.d));
    }
    return;
  }
  // shell point: re-project only when it could still move an extremum
  const bool gain_promising = gain < acc.min_gain + 2.0 * ctx.sigma_max * ctx.res;
  const bool corr_promising = ctx.k > 0 && corr > acc.max_corr - 2.0 * ctx.res;
  if (!gain_promising && !corr_promising) return;
  Eigen::Map<const Vector> xv(x, ctx.d);
  Vector p = ctx.C.project(xv);
  const double n = p.norm();
  if (n < 1e-12) return;
  p /= n;
  const double pg = ctx.gain(p.data());
  const double pc = ctx.k > 0 ? ctx.corr(p.data()) : 0.0;
  if (pg < acc.min_gain) {
    acc.min_gain = pg;
    std::memcpy(acc.argmin, p.data(), sizeof(double) * static_cast<std::size_t>(ctx.d));
  }
  if (pc > acc.max_corr) {
    acc.max_corr = pc;
    std::memcpy(acc.argmax, p.data(), sizeof(double) * static_cast<std::size_t>(ctx.d));
  }
}

void grid_scan_d2(const ScanContext& ctx, ScanAccum& acc) {
  const int n = std::max(16, static_cast<int>(std::ceil(2.0 * M_PI / ctx.res)));
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * M_PI * i / n;
    const double x[2] = {std::cos(a), std::sin(a)};
    scan_point(ctx, x, acc);
  }
}

void grid_scan_d3(const ScanContext& ctx, int threads, ScanAccum& acc) {
  const double golden_angle = M_PI * (3.0 - std::sqrt(5.0));
  const auto n = static_cast<std::size_t>(std::ceil(16.0 / (ctx.res * ctx.res)));
  const int nt = resolve_threads(threads);
  std::vector<ScanAccum> parts(static_cast<std::size_t>(nt));
  parallel_for(static_cast<std::size_t>(nt), nt, [&](std::size_t t) {
    ScanAccum& a = parts[t];
    const std::size_t lo = t * n / static_cast<std::size_t>(nt);
    const std::size_t hi = (t + 1) * n / static_cast<std::size_t>(nt);
    for (std::size_t i = lo; i < hi; ++i) {
      const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double ang = golden_angle * static_cast<double>(i);
      const double x[3] = {r * std::cos(ang), r * std::sin(ang), z};
      scan_point(ctx, x, a);
    }
  });
  for (const auto& p : parts) acc.absorb(p, ctx.d);
}

void grid_scan_d4(const ScanContext& ctx, int threads, ScanAccum& acc) {
  // adaptive tensor grid in angular coordinates: per-coordinate spacing keeps
  // the geodesic offset of any sphere point below res
  const double h = ctx.res * 2.0 / std::sqrt(3.0) * 0.9;
  const int npsi = std::max(2, static_cast<int>(std::ceil(M_PI / h)));
  const double dpsi = M_PI / npsi;

  // circular cones constrain psi directly; skip slices that cannot matter
  double psi_cap = M_PI;
  double psi_floor = 0.0;
  if (ctx.cls.circ) {
    if (ctx.cls.circ->axis_sign == 1) psi_cap = ctx.cls.circ->alpha + 1.1 * ctx.res;
    else psi_floor = M_PI - ctx.cls.circ->alpha - 1.1 * ctx.res;
  }

  const int nt = resolve_threads(threads);
  std::vector<ScanAccum> parts(static_cast<std::size_t>(nt));
  parallel_for(static_cast<std::size_t>(nt), nt, [&](std::size_t t) {
    ScanAccum& a = parts[t];
    for (int i = static_cast<int>(t); i < npsi; i += nt) {
      const double psi = (i + 0.5) * dpsi;
      if (psi - 0.5 * dpsi > psi_cap || psi + 0.5 * dpsi < psi_floor) continue;
      const double c1 = std::cos(psi), s1 = std::sin(psi);
      const int ntheta = std::max(1, static_cast<int>(std::ceil(M_PI * s1 / h)));
      const double dtheta = M_PI / ntheta;
      for (int j = 0; j < ntheta; ++j) {
        const double theta = (j + 0.5) * dtheta;
        const double c2 = std::cos(theta), s2 = std::sin(theta);
        const double rr = s1 * s2;
        const double xa = s1 * c2;
        const int nphi = std::max(1, static_cast<int>(std::ceil(2.0 * M_PI * rr / h)));
        const double dphi = 2.0 * M_PI / nphi;
        for (int q = 0; q < nphi; ++q) {
          const double phi = (q + 0.5) * dphi;
          const double x[4] = {c1, xa, rr * std::cos(phi), rr * std::sin(phi)};
          scan_point(ctx, x, a);
        }
      }
    }
  });
  for (const auto& p : parts) acc.absorb(p, ctx.d);
}

struct GridExtrema {
  double sigma = kInf;
  Vector witness_min;
  double corr = -1.0;
  Vector witness_max;
};

GridExtrema grid_extrema(const LinearMap& A, const Cone& C, const RsvOptions& opts) {
  const int d = static_cast<int>(A.cols());
  if (d < 2 || d > 4) throw input_error("grid oracle: ambient dimension must be in [2, 4]");
  ScanContext ctx(A, C, opts.grid_res);
  ScanAccum acc;
  if (d == 2) grid_scan_d2(ctx, acc);
  else if (d == 3) grid_scan_d3(ctx, opts.threads, acc);
  else grid_scan_d4(ctx, opts.threads, acc);

  GridExtrema out;
  if (!std::isfinite(acc.min_gain)) return out; // no members found

  Eigen::Map<const Vector> xmin(acc.argmin, d);
  const Matrix G = A.matrix().transpose() * A.matrix();
  const double s2 = std::max(A.sigma_max() * A.sigma_max(), 1e-300);
  IterOut pol_min = pgd_min_gain(G, s2, C, xmin, 2000, opts.tol);
  if (std::sqrt(std::max(0.0, pol_min.obj)) <= acc.min_gain) {
    out.witness_min = pol_min.x;
  } else {
    out.witness_min = xmin;
  }
  out.sigma = (A.matrix() * out.witness_min).norm();

  if (acc.max_corr >= 0.0 && A.kernel_basis().cols() > 0) {
    Eigen::Map<const Vector> xmax(acc.argmax, d);
    IterOut pol_max = pga_kernel_corr(A.kernel_basis(), C, xmax, 2000, opts.tol);
    if (std::sqrt(std::max(0.0, pol_max.obj)) >= acc.max_corr) {
      out.witness_max = pol_max.x;
    } else {
      out.witness_max = xmax;
    }
    out.corr = (A.kernel_basis().transpose() * out.witness_max).norm();
  } else if (acc.max_corr >= 0.0) {
    out.corr = 0.0;
    Eigen::Map<const Vector> xmax(acc.argmax, d);
    out.witness_max = xmax;
  }
  return out;
}

AngleResult angle_from_corr(double corr, const Vector& x, const LinearMap& A, RsvMethod method) {
  AngleResult res;
  res.method = method;
  corr = std::min(corr, 1.0);
  res.witness_cone = x;
  const Matrix& K = A.kernel_basis();
  if (corr > 1e-9 && K.cols() > 0) {
    Vector y = K * (K.transpose() * x);
    res.witness_kernel = y / y.norm();
  }
  if (corr >= 1.0 - 1e-12) {
    res.theta_star = 0.0;
    res.status = AngleStatus::intersecting;
  } else {
    res.theta_star = std::acos(corr);
    res.status = AngleStatus::ok;
  }
  return res;
}

} // namespace

std::vector<Vector> fibonacci_sphere(std::size_t n) {
  const double golden_angle = M_PI * (3.0 - std::sqrt(5.0));
  std::vector<Vector> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double a = golden_angle * static_cast<double>(i);
    Vector v(3);
    v << r * std::cos(a), r * std::sin(a), z;
    pts.push_back(v);
  }
  return pts;
}

RsvResult restricted_sv(const LinearMap& A, const Cone& C, const RsvOptions& opts) {
  if (A.cols() != C.dim()) throw input_error("restricted_sv: dimension mismatch");
  if (!C.supports_projection())
    throw input_error("restricted_sv: convex variant with projection required");
  if (const auto* s = std::get_if<Subspace>(&C.variant())) {
    if (s->basis.cols() == 0) throw input_error("restricted_sv: empty cone");
  }

  RsvResult res;
  res.method = opts.method;

  if (opts.method == RsvMethod::grid_oracle) {
    GridExtrema g = grid_extrema(A, C, opts);
    if (!std::isfinite(g.sigma)) throw input_error("restricted_sv: grid found no cone members");
    res.sigma = g.sigma;
    res.witness = g.witness_min;
    res.converged = true;
    return res;
  }

  if (A.sigma_max() == 0.0) {
    RngStream rng(opts.seed, 1);
    auto m = sample_unit_member(C, rng);
    if (!m) throw input_error("restricted_sv: empty cone");
    res.sigma = 0.0;
    res.witness = *m;
    res.converged = true;
    return res;
  }

  const Matrix G = A.matrix().transpose() * A.matrix();
  const double s2 = A.sigma_max() * A.sigma_max();
  auto starts = descent_starts(A, C, opts, false);
  if (starts.empty()) throw input_error("restricted_sv: could not sample the cone");

  std::vector<IterOut> outs(starts.size());
  parallel_for(starts.size(), opts.threads, [&](std::size_t i) {
    outs[i] = pgd_min_gain(G, s2, C, starts[i], opts.max_iter, opts.tol);
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < outs.size(); ++i) {
    if (outs[i].obj < outs[best].obj) best = i;
  }
  res.witness = outs[best].x;
  res.sigma = (A.matrix() * res.witness).norm();
  res.starts = static_cast<int>(starts.size());
  res.converged = outs[best].converged;
  return res;
}

AngleResult separation_angle(const LinearMap& A, const Cone& C, const RsvOptions& opts) {
  if (A.cols() != C.dim()) throw input_error("separation_angle: dimension mismatch");
  if (!C.supports_projection()) throw input_error("separation_angle: convex variant required");

  const Matrix& K = A.kernel_basis();
  if (K.cols() == 0) {
    AngleResult res;
    res.method = opts.method;
    res.status = AngleStatus::no_kernel;
    res.theta_star = M_PI_2;
    return res;
  }

  if (opts.method == RsvMethod::grid_oracle) {
    GridExtrema g = grid_extrema(A, C, opts);
    if (g.corr < 0.0) throw input_error("separation_angle: grid found no cone members");
    return angle_from_corr(g.corr, g.witness_max, A, opts.method);
  }

  auto starts = descent_starts(A, C, opts, true);
  if (starts.empty()) throw input_error("separation_angle: could not sample the cone");
  std::vector<IterOut> outs(starts.size());
  parallel_for(starts.size(), opts.threads, [&](std::size_t i) {
    outs[i] = pga_kernel_corr(K, C, starts[i], opts.max_iter, opts.tol);
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < outs.size(); ++i) {
    if (outs[i].obj > outs[best].obj) best = i;
  }
  return angle_from_corr(std::sqrt(std::max(0.0, outs[best].obj)), outs[best].x, A, opts.method);
}

CondResult grassmann_cond(const LinearMap& A, const Cone& C, const RsvOptions& opts) {
  const AngleResult ang = separation_angle(A, C, opts);
  CondResult r;
  if (ang.theta_star <= 0.0) {
    r.value = kInf;
    r.overflow = true;
    return r;
  }
  r.value = 1.0 / std::sin(ang.theta_star);
  return r;
}

CondResult renegar_cond(const LinearMap& A, const Cone& C, const RsvOptions& opts) {
  const RsvResult rsv = restricted_sv(A, C, opts);
  CondResult r;
  if (!(rsv.sigma > 0.0)) {
    r.value = kInf;
    r.overflow = true;
    return r;
  }
  r.value = A.sigma_max() / rsv.sigma;
  r.overflow = !std::isfinite(r.value);
  return r;
}

ExperimentReport check_sandwich(const LinearMap& A, const Cone& C, const RsvOptions& opts) {
  double sigma = 0.0;
  double theta = 0.0;
  std::string status = "ok";
  if (opts.method == RsvMethod::grid_oracle && A.kernel_basis().cols() > 0) {
    GridExtrema g = grid_extrema(A, C, opts); // one scan feeds both estimates
    if (!std::isfinite(g.sigma)) throw input_error("check_sandwich: grid found no cone members");
    sigma = g.sigma;
    AngleResult ang = angle_from_corr(g.corr, g.witness_max, A, opts.method);
    theta = ang.theta_star;
    status = ang.status == AngleStatus::intersecting ? "intersecting" : "ok";
  } else {
    const RsvResult rsv = restricted_sv(A, C, opts);
    const AngleResult ang = separation_angle(A, C, opts);
    sigma = rsv.sigma;
    theta = ang.theta_star;
    status = ang.status == AngleStatus::ok          ? "ok"
             : ang.status == AngleStatus::no_kernel ? "no-kernel"
                                                    : "intersecting";
  }

  const double smax = A.sigma_max();
  const double smin = A.rank() > 0 ? A.sigma_min_nonzero() : 0.0;
  const double st = std::sin(theta);
  double slack = opts.slack;
  if (slack < 0.0) {
    slack = opts.method == RsvMethod::grid_oracle ? 2.0 * smax * opts.grid_res
                                                  : 1e-6 * (1.0 + smax);
  }

  ExperimentReport rep;
  rep.name = "sandwich";
  rep.config["method"] =
      opts.method == RsvMethod::grid_oracle ? "grid-oracle" : "multi-start-descent";
  rep.config["grid_res"] = opts.grid_res;
  rep.config["slack"] = slack;
  rep.observed["sigma_restricted"] = sigma;
  rep.observed["theta_star"] = theta;
  rep.observed["sigma_min"] = smin;
  rep.observed["sigma_max"] = smax;
  rep.observed["angle_status"] = status;
  rep.bounds["lower"] = st * smin;
  rep.bounds["upper"] = st * smax;

  const double lower_margin = sigma - (st * smin - slack);
  const double upper_margin = (st * smax + slack) - sigma;
  rep.margins["lower"] = lower_margin;
  rep.margins["upper"] = upper_margin;

  bool pass = lower_margin >= 0.0 && upper_margin >= 0.0;

  // condition-number sandwich C <= C_R <= (smax/smin) C on the same numbers
  if (sigma > 0.0 && theta > 0.0 && smin > 0.0) {
    const double cg = 1.0 / st;
    const double cr = smax / sigma;
    rep.observed["cond_grassmann"] = cg;
    rep.observed["cond_renegar"] = cr;
    const double rel = slack / sigma;
    const double m1 = cr - cg * (1.0 - rel);
    const double m2 = (smax / smin) * cg * (1.0 + rel) - cr;
    rep.margins["cond_lower"] = m1;
    rep.margins["cond_upper"] = m2;
    pass = pass && m1 >= -1e-12 && m2 >= -1e-12;
  } else {
    rep.observed["cond_overflow"] = true;
  }

  rep.pass = pass;
  return rep;
}

} // namespace conesep
