#include "conesep/cones.hpp"

#include <algorithm>
#include <cmath>

namespace conesep {

namespace {

double clamp_unit(double t) { return std::min(1.0, std::max(-1.0, t)); }

double soft_threshold(double v, double lambda) {
  if (v > lambda) return v - lambda;
  if (v < -lambda) return v + lambda;
  return 0.0;
}

} // namespace

// ---- Polytope -------------------------------------------------------------

bool Polytope::contains(const Vector& x, double tol) const {
  for (const auto& h : halfspaces) {
    if (h.normal.dot(x) > h.offset + tol) return false;
  }
  return true;
}

void Polytope::validate(double tol) const {
  for (const auto& v : vertices) {
    if (!contains(v, tol)) throw input_error("Polytope: vertex violates a halfspace");
  }
}

std::pair<std::vector<Halfspace>, std::vector<Halfspace>> Polytope::face_split(const Vector& x0,
                                                                               double tol) const {
  std::vector<Halfspace> active, slack;
  for (const auto& h : halfspaces) {
    const double margin = h.offset - h.normal.dot(x0);
    if (margin < -tol) throw input_error("face_split: x0 outside polytope");
    if (margin <= tol) active.push_back(h);
    else slack.push_back(h);
  }
  return {active, slack};
}

Polytope cross_polytope(Eigen::Index d) {
  if (d < 1 || d > 16) throw input_error("cross_polytope: d in [1, 16] required");
  Polytope p;
  for (Eigen::Index i = 0; i < d; ++i) {
    Vector v = Vector::Zero(d);
    v(i) = 1.0;
    p.vertices.push_back(v);
    p.vertices.push_back(-v);
  }
  const std::uint64_t n = std::uint64_t{1} << d;
  for (std::uint64_t mask = 0; mask < n; ++mask) {
    Vector normal(d);
    for (Eigen::Index i = 0; i < d; ++i) normal(i) = (mask >> i) & 1 ? 1.0 : -1.0;
    p.halfspaces.push_back({normal, 1.0});
  }
  return p;
}

// ---- Construction ---------------------------------------------------------

namespace {

Matrix orthonormalize(const Matrix& b) {
  if (b.cols() == 0) return b;
  Eigen::ColPivHouseholderQR<Matrix> qr(b);
  qr.setThreshold(1e-12);
  const Eigen::Index r = qr.rank();
  Matrix q = qr.householderQ() * Matrix::Identity(b.rows(), r);
  return q;
}

Matrix normalize_dedupe_rays(const std::vector<Vector>& rays) {
  if (rays.empty()) throw input_error("generated cone: need at least one ray");
  const Eigen::Index d = rays.front().size();
  std::vector<Vector> kept;
  for (const auto& r : rays) {
    if (r.size() != d) throw input_error("generated cone: inconsistent ray dimensions");
    const double n = r.norm();
    if (n < 1e-14) continue;
    Vector u = r / n;
    bool dup = false;
    for (const auto& k : kept) {
      if (u.dot(k) > 1.0 - 1e-12) {
        dup = true;
        break;
      }
    }
    if (!dup) kept.push_back(u);
  }
  if (kept.empty()) throw input_error("generated cone: all rays vanish");
  Matrix out(d, static_cast<Eigen::Index>(kept.size()));
  for (Eigen::Index j = 0; j < out.cols(); ++j) out.col(j) = kept[static_cast<std::size_t>(j)];
  return out;
}

} // namespace

Cone::Cone(Variant v) : v_(std::move(v)) {
  std::visit(
      [this](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, Subspace>) dim_ = c.basis.rows();
        else if constexpr (std::is_same_v<T, L1Descent>) dim_ = c.dim;
        else if constexpr (std::is_same_v<T, Circular>) dim_ = c.dim;
        else if constexpr (std::is_same_v<T, Generated>) dim_ = c.rays.rows();
        else if constexpr (std::is_same_v<T, PolytopeDescent>) dim_ = c.x0.size();
        else dim_ = std::get<PolarGenerated>(v_).normals.rows();
      },
      v_);
  if (const auto* pd = std::get_if<PolytopeDescent>(&v_)) {
    std::vector<Vector> rays;
    for (const auto& v : pd->polytope.vertices) {
      rays.push_back(v - pd->x0);
    }
    bool any = false;
    for (const auto& r : rays)
      if (r.norm() >= 1e-14) any = true;
    if (!any) throw input_error("polytope descent cone: x0 coincides with all vertices");
    cached_generated_ = Generated{normalize_dedupe_rays(rays)};
  }
}

Cone Cone::subspace(Matrix basis_columns) {
  return Cone(Subspace{orthonormalize(basis_columns)});
}

Cone Cone::full_space(Eigen::Index d) {
  return Cone(Subspace{Matrix::Identity(d, d)});
}

Cone Cone::l1_descent(const Vector& x0) {
  if (x0.size() < 1 || x0.norm() == 0.0)
    throw input_error("l1 descent cone: x0 must be nonzero");
  L1Descent c;
  c.dim = x0.size();
  for (Eigen::Index i = 0; i < x0.size(); ++i) {
    if (x0(i) != 0.0) {
      c.support.push_back(i);
      c.signs.push_back(x0(i) > 0 ? 1.0 : -1.0);
    }
  }
  return Cone(std::move(c));
}

Cone Cone::circular(Eigen::Index d, double alpha, int axis_sign) {
  if (d < 2) throw input_error("circular cone: d >= 2 required");
  if (!(alpha > 0.0 && alpha < M_PI_2)) throw input_error("circular cone: alpha in (0, pi/2) required");
  if (axis_sign != 1 && axis_sign != -1) throw input_error("circular cone: axis_sign must be +-1");
  return Cone(Circular{d, alpha, axis_sign});
}

Cone Cone::generated(const std::vector<Vector>& rays) {
  return Cone(Generated{normalize_dedupe_rays(rays)});
}

Cone Cone::polytope_descent(Polytope p, Vector x0) {
  p.validate();
  if (!p.contains(x0, 1e-9)) throw input_error("polytope descent cone: x0 not in polytope");
  return Cone(PolytopeDescent{std::move(p), std::move(x0)});
}

const char* Cone::variant_name() const {
  switch (v_.index()) {
    case 0: return "subspace";
    case 1: return "l1_descent";
    case 2: return "circular";
    case 3: return "generated";
    case 4: return "polytope_descent";
    default: return "polar_generated";
  }
}

bool Cone::is_convex() const { return true; } // every representable variant is convex

bool Cone::supports_projection() const {
  return !std::holds_alternative<PolarGenerated>(v_);
}

const Generated& Cone::generated_form() const {
  if (const auto* g = std::get_if<Generated>(&v_)) return *g;
  if (cached_generated_) return *cached_generated_;
  throw input_error("generated_form: cone has no generated representation");
}

// ---- Membership -----------------------------------------------------------

namespace {

double l1_violation(const L1Descent& c, const Vector& x) {
  double off = 0.0;
  std::vector<char> on(static_cast<std::size_t>(x.size()), 0);
  for (auto i : c.support) on[static_cast<std::size_t>(i)] = 1;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!on[static_cast<std::size_t>(i)]) off += std::abs(x(i));
  }
  double lin = 0.0;
  for (std::size_t k = 0; k < c.support.size(); ++k) lin += c.signs[k] * x(c.support[k]);
  return off + lin;
}

} // namespace

bool Cone::membership(const Vector& x, double tol) const {
  if (x.size() != dim_) throw input_error("membership: dimension mismatch");
  if (x.norm() == 0.0) return true;
  return std::visit(
      [&](const auto& c) -> bool {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, Subspace>) {
          if (c.basis.cols() == 0) return x.norm() <= tol;
          const Vector r = x - c.basis * (c.basis.transpose() * x);
          return r.norm() <= tol * (1.0 + x.norm());
        } else if constexpr (std::is_same_v<T, L1Descent>) {
          return l1_violation(c, x) <= tol * (1.0 + x.norm());
        } else if constexpr (std::is_same_v<T, Circular>) {
          return c.axis_sign * x(0) >= std::cos(c.alpha) * x.norm() - tol * (1.0 + x.norm());
        } else if constexpr (std::is_same_v<T, PolarGenerated>) {
          const Vector dots = c.normals.transpose() * x;
          return dots.maxCoeff() <= tol * (1.0 + x.norm());
        } else {
          const Vector p = project(x);
          return (x - p).norm() <= tol * (1.0 + x.norm());
        }
      },
      v_);
}

// ---- Projection -----------------------------------------------------------

namespace {

Vector project_circular(const Circular& c, const Vector& x) {
  Vector y = x;
  y(0) *= c.axis_sign;
  const double beta = std::tan(c.alpha);
  const double s = y(0);
  const double r = y.tail(y.size() - 1).norm();
  Vector out = Vector::Zero(y.size());
  if (r <= beta * s) {
    out = y; // inside
  } else if (beta * r <= -s) {
    // inside the polar cone; nearest point is the apex
  } else {
    const double t = (s + beta * r) / (1.0 + beta * beta);
    if (t > 0.0) {
      out(0) = t;
      if (r > 0.0) out.tail(y.size() - 1) = (beta * t / r) * y.tail(y.size() - 1);
    }
  }
  out(0) *= c.axis_sign;
  return out;
}

Vector project_l1_descent(const L1Descent& c, const Vector& eta) {
  const Eigen::Index d = eta.size();
  std::vector<char> on(static_cast<std::size_t>(d), 0);
  for (auto i : c.support) on[static_cast<std::size_t>(i)] = 1;

  auto constraint_at = [&](double lambda) {
    double val = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      if (!on[static_cast<std::size_t>(i)]) val += std::max(std::abs(eta(i)) - lambda, 0.0);
    }
    for (std::size_t k = 0; k < c.support.size(); ++k) val += c.signs[k] * eta(c.support[k]);
    val -= lambda * static_cast<double>(c.support.size());
    return val;
  };

  if (constraint_at(0.0) <= 0.0) return eta;

  double off_mass = 0.0, lin = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!on[static_cast<std::size_t>(i)]) off_mass += std::abs(eta(i));
  }
  for (std::size_t k = 0; k < c.support.size(); ++k) lin += c.signs[k] * eta(c.support[k]);
  double lo = 0.0;
  double hi = (off_mass + lin) / static_cast<double>(c.support.size());

  // constraint value is continuous, nonincreasing in lambda with slope <= -|S0|
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (constraint_at(mid) > 0.0) lo = mid;
    else hi = mid;
  }
  const double lambda = hi; // feasible side

  Vector z(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!on[static_cast<std::size_t>(i)]) z(i) = soft_threshold(eta(i), lambda);
  }
  for (std::size_t k = 0; k < c.support.size(); ++k)
    z(c.support[k]) = eta(c.support[k]) - lambda * c.signs[k];
  return z;
}

} // namespace

Vector nnls(const Matrix& R, const Vector& x, double tol) {
  const Eigen::Index n = R.cols();
  Vector c = Vector::Zero(n);
  std::vector<char> passive(static_cast<std::size_t>(n), 0);
  Vector w = R.transpose() * x;
  const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());

  for (int outer = 0; outer < 3 * static_cast<int>(n) + 10; ++outer) {
    Eigen::Index best = -1;
    double best_w = tol * scale;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = 1;

    for (int inner = 0; inner < 3 * static_cast<int>(n) + 10; ++inner) {
      std::vector<Eigen::Index> idx;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
      Matrix Rp(R.rows(), static_cast<Eigen::Index>(idx.size()));
      for (std::size_t k = 0; k < idx.size(); ++k) Rp.col(static_cast<Eigen::Index>(k)) = R.col(idx[k]);
      const Vector s = Rp.colPivHouseholderQr().solve(x);

      bool all_pos = true;
      for (Eigen::Index k = 0; k < s.size(); ++k)
        if (s(k) <= tol) all_pos = false;
      if (all_pos) {
        c.setZero();
        for (std::size_t k = 0; k < idx.size(); ++k) c(idx[k]) = s(static_cast<Eigen::Index>(k));
        break;
      }
      double alpha = 1.0;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const double sk = s(static_cast<Eigen::Index>(k));
        if (sk <= tol) {
          const double ck = c(idx[k]);
          if (ck - sk > 0) alpha = std::min(alpha, ck / (ck - sk));
        }
      }
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const double sk = s(static_cast<Eigen::Index>(k));
        c(idx[k]) += alpha * (sk - c(idx[k]));
        if (c(idx[k]) <= tol) {
          c(idx[k]) = 0.0;
          passive[static_cast<std::size_t>(idx[k])] = 0;
        }
      }
    }
    w = R.transpose() * (x - R * c);
  }
  return c;
}

Vector Cone::project(const Vector& x) const {
  if (x.size() != dim_) throw input_error("project: dimension mismatch");
  return std::visit(
      [&](const auto& c) -> Vector {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, Subspace>) {
          if (c.basis.cols() == 0) return Vector::Zero(dim_);
          return c.basis * (c.basis.transpose() * x);
        } else if constexpr (std::is_same_v<T, L1Descent>) {
          return project_l1_descent(c, x);
        } else if constexpr (std::is_same_v<T, Circular>) {
          return project_circular(c, x);
        } else if constexpr (std::is_same_v<T, Generated>) {
          return c.rays * nnls(c.rays, x);
        } else if constexpr (std::is_same_v<T, PolytopeDescent>) {
          const auto& g = generated_form();
          return g.rays * nnls(g.rays, x);
        } else {
          throw input_error("project: unsupported cone variant");
        }
      },
      v_);
}

// ---- Support and expansions ------------------------------------------------

double Cone::support_sphere(const Vector& g) const {
  if (g.size() != dim_) throw input_error("support_sphere: dimension mismatch");
  const double gn = g.norm();
  if (gn == 0.0) throw input_error("support_sphere: zero vector");
  if (const auto* s = std::get_if<Subspace>(&v_)) {
    if (s->basis.cols() == 0) return -std::numeric_limits<double>::infinity();
    return (s->basis.transpose() * g).norm() / gn;
  }
  if (const auto* c = std::get_if<Circular>(&v_)) {
    const double beta = std::acos(clamp_unit(c->axis_sign * g(0) / gn));
    return std::cos(std::max(beta - c->alpha, 0.0));
  }
  const Vector p = project(g);
  return p.norm() / gn;
}

bool Cone::theta_expansion_member(const Vector& x, double theta) const {
  if (!(theta >= 0.0 && theta <= M_PI)) throw input_error("theta_expansion_member: theta in [0, pi]");
  if (x.norm() == 0.0) throw input_error("theta_expansion_member: x must be nonzero");
  return support_sphere(x) >= std::cos(theta) - 1e-12;
}

Cone Cone::polar() const {
  return std::visit(
      [&](const auto& c) -> Cone {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, Subspace>) {
          Eigen::ColPivHouseholderQR<Matrix> qr(c.basis);
          qr.setThreshold(1e-12);
          const Eigen::Index r = c.basis.cols() == 0 ? 0 : qr.rank();
          Matrix qfull = Matrix::Identity(dim_, dim_);
          if (c.basis.cols() > 0) qfull = qr.householderQ() * Matrix::Identity(dim_, dim_);
          return Cone(Subspace{qfull.rightCols(dim_ - r)});
        } else if constexpr (std::is_same_v<T, Circular>) {
          return Cone(Circular{c.dim, M_PI_2 - c.alpha, -c.axis_sign});
        } else if constexpr (std::is_same_v<T, Generated>) {
          return Cone(PolarGenerated{c.rays});
        } else {
          throw input_error("polar: unsupported cone variant");
        }
      },
      v_);
}

Cone circ_expansion(const Cone& circular_cone, double theta) {
  const auto* c = std::get_if<Circular>(&circular_cone.variant());
  if (!c) throw input_error("circ_expansion: circular cone required");
  if (!(theta >= 0.0)) throw input_error("circ_expansion: theta >= 0 required");
  if (!(c->alpha + theta < M_PI_2))
    throw input_error("circ_expansion: alpha + theta must stay below pi/2");
  if (theta == 0.0) return circular_cone;
  return Cone(Circular{c->dim, c->alpha + theta, c->axis_sign});
}

double angle_metric(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw input_error("angle_metric: dimension mismatch");
  if (std::abs(x.norm() - 1.0) > 1e-10 || std::abs(y.norm() - 1.0) > 1e-10)
    throw input_error("angle_metric: unit vectors required");
  return std::acos(clamp_unit(x.dot(y)));
}

std::optional<Vector> sample_unit_member(const Cone& cone, RngStream& rng) {
  const Eigen::Index d = cone.dim();
  if (const auto* s = std::get_if<Subspace>(&cone.variant())) {
    if (s->basis.cols() == 0) return std::nullopt;
    Vector g = gaussian_vector(rng, s->basis.cols());
    Vector x = s->basis * g;
    const double n = x.norm();
    if (n < 1e-14) return std::nullopt;
    return x / n;
  }
  if (const auto* gen = std::get_if<Generated>(&cone.variant())) {
    Vector g = gaussian_vector(rng, gen->rays.cols());
    Vector x = gen->rays * g.cwiseAbs();
    const double n = x.norm();
    if (n >= 1e-14) return x / n;
  }
  for (int attempt = 0; attempt < 32; ++attempt) {
    Vector g = gaussian_vector(rng, d);
    if (!cone.supports_projection()) {
      if (cone.membership(g)) return g / g.norm();
      continue;
    }
    Vector p = cone.project(g);
    const double n = p.norm();
    if (n >= 1e-10) return p / n;
  }
  if (const auto* c = std::get_if<Circular>(&cone.variant())) {
    Vector axis = Vector::Zero(d);
    axis(0) = c->axis_sign;
    return axis;
  }
  return std::nullopt;
}

} // namespace conesep
