#pragma once

#include "conesep/numkernel.hpp"

#include <optional>
#include <variant>
#include <vector>

namespace conesep {

/// Halfspace { x : <normal, x> <= offset }.
struct Halfspace {
  Vector normal;
  double offset = 0.0;
};

/// Bounded polytope carrying both an H-representation (halfspaces) and a
/// V-representation (vertices). Consistency of the two is the caller's
/// responsibility; validate() spot-checks it.
struct Polytope {
  std::vector<Halfspace> halfspaces;
  std::vector<Vector> vertices;

  Eigen::Index dim() const { return vertices.empty() ? 0 : vertices.front().size(); }
  bool contains(const Vector& x, double tol = 1e-10) const;
  /// Throws input_error if some vertex violates a halfspace beyond tol.
  void validate(double tol = 1e-10) const;
  /// Split halfspaces into those active at x0 (equality within tol) and the
  /// strictly slack remainder.
  std::pair<std::vector<Halfspace>, std::vector<Halfspace>> face_split(const Vector& x0,
                                                                       double tol = 1e-10) const;
};

/// Cross-polytope (l1 unit ball) in R^d.
Polytope cross_polytope(Eigen::Index d);

// ---- Cone variants -------------------------------------------------------

/// Linear subspace span(basis); basis columns orthonormal. Zero columns is
/// the {0} cone.
struct Subspace {
  Matrix basis; // d x k, orthonormal columns
};

/// Descent cone of the l1 norm at a point with support S0 and signs s:
/// { eta : sum_{i not in S0} |eta_i| <= -sum_{i in S0} s_i eta_i }.
struct L1Descent {
  Eigen::Index dim = 0;
  std::vector<Eigen::Index> support;
  std::vector<double> signs; // +-1, aligned with support
};

/// Circular cone { x : axis_sign * x(1) >= cos(alpha) ||x|| }. axis_sign = -1
/// gives the reflected cone (used by polar()).
struct Circular {
  Eigen::Index dim = 0;
  double alpha = 0.0; // radians in (0, pi/2)
  int axis_sign = 1;
};

/// Finitely generated cone { sum c_i r_i : c >= 0 }; rays normalized and
/// deduplicated at construction.
struct Generated {
  Matrix rays; // d x n, unit columns
};

/// Descent cone of the gauge of `polytope` at boundary point x0. Projection
/// and support go through the generated form cone({v - x0 : v vertex}).
struct PolytopeDescent {
  Polytope polytope;
  Vector x0;
};

/// Polar of a Generated cone: { x : <r_i, x> <= 0 for all rays r_i }.
/// Membership only; no projection support.
struct PolarGenerated {
  Matrix normals; // d x n
};

class Cone {
public:
  using Variant = std::variant<Subspace, L1Descent, Circular, Generated, PolytopeDescent, PolarGenerated>;

  explicit Cone(Variant v);

  static Cone subspace(Matrix basis_columns);            // orthonormalized internally
  static Cone full_space(Eigen::Index d);
  static Cone l1_descent(const Vector& x0);              // x0 != 0
  static Cone circular(Eigen::Index d, double alpha, int axis_sign = 1);
  static Cone generated(const std::vector<Vector>& rays);
  static Cone polytope_descent(Polytope p, Vector x0);

  const Variant& variant() const { return v_; }
  Eigen::Index dim() const { return dim_; }
  const char* variant_name() const;
  bool is_convex() const;
  /// Projection (and hence the projection-based support value) is available.
  bool supports_projection() const;

  bool membership(const Vector& x, double tol = 1e-9) const;
  Vector project(const Vector& x) const;
  /// sup_{y in C, ||y||=1} <g/||g||, y>. Closed form for Subspace and
  /// Circular; ||proj(g)|| / ||g|| otherwise, which equals the supremum
  /// whenever the supremum is nonnegative. For the {0} cone returns -inf.
  double support_sphere(const Vector& g) const;
  bool theta_expansion_member(const Vector& x, double theta) const;

  Cone polar() const;

  /// Internal generated form used for projection of PolytopeDescent.
  const Generated& generated_form() const;

private:
  Variant v_;
  Eigen::Index dim_ = 0;
  std::optional<Generated> cached_generated_; // for PolytopeDescent
};

/// theta-expansion of a circular cone is again circular:
/// Circ(alpha)^theta = Circ(alpha + theta); requires alpha + theta < pi/2.
Cone circ_expansion(const Cone& circular_cone, double theta);

/// Angle metric on the unit sphere: arccos(clamp(<x, y>, -1, 1)).
double angle_metric(const Vector& x, const Vector& y);

/// Draw a unit-norm member of C (Gaussian direction mapped into the cone);
/// returns nullopt if the cone collapses everything to ~0.
std::optional<Vector> sample_unit_member(const Cone& cone, RngStream& rng);

/// Nonnegative least squares min ||R c - x||, c >= 0 (Lawson-Hanson).
Vector nnls(const Matrix& R, const Vector& x, double tol = 1e-12);

} // namespace conesep
