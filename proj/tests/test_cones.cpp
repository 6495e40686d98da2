#include <doctest.h>

#include "conesep/cones.hpp"

#include <cmath>

using namespace conesep;

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Vector vec3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

/// Cone K = cone{ x : x(1)=1, x(2)=0, |x(3)| <= 1 }, generated by two rays.
Cone kcone() {
  return Cone::generated({vec3(1, 0, 1), vec3(1, 0, -1)});
}

/// Closed-form sphere support of the K cone.
double kcone_support_formula(const Vector& x) {
  double v;
  if (std::abs(x(2)) <= x(0)) v = std::hypot(x(0), x(2));
  else v = (x(0) + std::abs(x(2))) / std::sqrt(2.0);
  return v / x.norm();
}

std::vector<Cone> convex_test_cones(RngStream& rng) {
  std::vector<Cone> cones;
  Matrix b(3, 1);
  b << 1.0, 2.0, -1.0;
  cones.push_back(Cone::subspace(b));
  cones.push_back(Cone::l1_descent(vec3(1.5, 0, -0.5)));
  cones.push_back(Cone::circular(3, M_PI / 5));
  cones.push_back(Cone::generated({vec3(1, 0.2, 0), vec3(0.5, 1, 0.1), vec3(1, 0, 1)}));
  Polytope p = cross_polytope(3);
  cones.push_back(Cone::polytope_descent(p, vec3(1, 0, 0)));
  (void)rng;
  return cones;
}

} // namespace

TEST_CASE("l1 descent cone: definitional examples") {
  Cone c = Cone::l1_descent(vec2(1, 0));
  CHECK(c.membership(vec2(-1, 0.5)));
  CHECK(!c.membership(vec2(1, 0.5)));

  Vector x0 = vec3(0.3, -2.0, 0.0);
  Cone d = Cone::l1_descent(x0);
  CHECK(d.membership(-x0));
  CHECK_THROWS_AS(Cone::l1_descent(Vector::Zero(3)), input_error);
}

TEST_CASE("membership: spec instances") {
  Cone circ = Cone::circular(3, M_PI / 4);
  CHECK(circ.membership(vec3(1, 0.5, 0.5)));

  Matrix b = Matrix::Zero(2, 1);
  b(0, 0) = 1.0;
  Cone line = Cone::subspace(b);
  CHECK(!line.membership(vec2(0, 1)));

  CHECK(kcone().membership(vec3(1, 0, 1)));
  CHECK(kcone().membership(Vector::Zero(3)));
}

TEST_CASE("projection: fixed points and axis") {
  Cone circ = Cone::circular(4, M_PI / 6);
  Vector axis = Vector::Zero(4);
  axis(0) = 2.0;
  CHECK((circ.project(axis) - axis).norm() <= 1e-12);

  RngStream rng(3, 0);
  for (auto& c : convex_test_cones(rng)) {
    auto x = sample_unit_member(c, rng);
    REQUIRE(x.has_value());
    CHECK((c.project(*x) - *x).norm() <= 1e-8);
  }
}

TEST_CASE("projection: l1 descent cone against dense grid oracle in d=2") {
  Cone c = Cone::l1_descent(vec2(1, 0));
  Vector x = vec2(1.0, 0.5);
  Vector p = c.project(x);
  CHECK(c.membership(p, 1e-9));

  // grid over unit directions; best point along each member ray
  double best = x.norm();
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double a = 2.0 * M_PI * k / n;
    Vector u = vec2(std::cos(a), std::sin(a));
    if (!c.membership(u, 1e-12)) continue;
    const double t = std::max(0.0, x.dot(u));
    best = std::min(best, std::sqrt(std::max(0.0, x.squaredNorm() - t * t)));
  }
  CHECK(std::abs((x - p).norm() - best) <= 1e-4);
}

TEST_CASE("projection: idempotent, nonexpansive, obtuse") {
  RngStream rng(17, 0);
  for (auto& c : convex_test_cones(rng)) {
    for (int t = 0; t < 100; ++t) {
      Vector x = gaussian_vector(rng, c.dim());
      Vector y = gaussian_vector(rng, c.dim());
      Vector px = c.project(x);
      Vector py = c.project(y);
      CHECK((c.project(px) - px).norm() <= 1e-8 * (1.0 + px.norm()));
      CHECK((px - py).norm() <= (x - y).norm() + 1e-8);
      CHECK(std::abs((x - px).dot(px)) <= 1e-8 * (1.0 + x.squaredNorm()));
      // Moreau obtuseness against sampled members
      auto m = sample_unit_member(c, rng);
      if (m) CHECK((x - px).dot(*m) <= 1e-8);
    }
  }
}

TEST_CASE("cone property: members stay members under scaling") {
  RngStream rng(23, 0);
  for (auto& c : convex_test_cones(rng)) {
    for (int t = 0; t < 100; ++t) {
      auto x = sample_unit_member(c, rng);
      REQUIRE(x.has_value());
      for (double tau : {0.1, 1.0, 10.0}) {
        CHECK(c.membership(tau * *x, 1e-8));
      }
    }
  }
}

TEST_CASE("l1 membership agrees with the descent definition (one-sided)") {
  RngStream rng(29, 0);
  Vector x0 = Vector::Zero(6);
  x0(0) = 1.0;
  x0(3) = -2.0;
  Cone c = Cone::l1_descent(x0);
  const double f0 = x0.lpNorm<1>();
  int definition_members = 0;
  for (int t = 0; t < 1000; ++t) {
    Vector eta = gaussian_vector(rng, 6);
    bool def_member = false;
    for (double tau : {1e-3, 1e-2, 1e-1, 1.0}) {
      if ((x0 + tau * eta).lpNorm<1>() <= f0) def_member = true;
    }
    if (def_member) {
      ++definition_members;
      CHECK(c.membership(eta, 1e-9));
    }
  }
  CHECK(definition_members > 50); // sanity: the sampler hits the cone
}

TEST_CASE("support_sphere: closed forms") {
  Matrix b = Matrix::Zero(2, 1);
  b(0, 0) = 1.0;
  Cone line = Cone::subspace(b);
  CHECK(line.support_sphere(vec2(1, 1)) == doctest::Approx(1.0 / std::sqrt(2.0)));

  Cone circ = Cone::circular(3, M_PI / 6);
  Vector inside = vec3(1, 0.1, 0.0);
  CHECK(circ.support_sphere(inside) == doctest::Approx(1.0));

  // member of any cone has support 1
  RngStream rng(37, 0);
  Cone k = kcone();
  auto m = sample_unit_member(k, rng);
  REQUIRE(m.has_value());
  CHECK(k.support_sphere(*m) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("support_sphere: K-cone matches the piecewise formula") {
  Cone k = kcone();
  RngStream rng(41, 0);
  for (int t = 0; t < 1000; ++t) {
    Vector x = gaussian_vector(rng, 3);
    const double f = kcone_support_formula(x);
    if (f > 1e-6) {
      CHECK(k.support_sphere(x) == doctest::Approx(f).epsilon(1e-9));
    } else {
      // projection-based value clips negative suprema at zero
      CHECK(k.support_sphere(x) <= std::max(f, 0.0) + 1e-9);
    }
  }
}

TEST_CASE("theta expansion: theta=0 is closure membership") {
  Cone circ = Cone::circular(3, M_PI / 4);
  RngStream rng(43, 0);
  for (int t = 0; t < 200; ++t) {
    Vector x = gaussian_vector(rng, 3);
    if (x.norm() < 1e-12) continue;
    CHECK(circ.theta_expansion_member(x, 0.0) == circ.membership(x, 1e-9));
  }
}

TEST_CASE("theta expansion: K-cone witnesses at pi/6") {
  Cone k = kcone();
  const double s23 = std::sqrt(2.0 / 3.0);
  CHECK(k.theta_expansion_member(vec3(1, s23, 1), M_PI / 6));
  CHECK(k.theta_expansion_member(vec3(1, s23, -1), M_PI / 6));
  CHECK(!k.theta_expansion_member(vec3(1, s23, 0), M_PI / 6));
}

TEST_CASE("theta expansion: monotone in theta") {
  Cone c = Cone::circular(4, M_PI / 8);
  RngStream rng(47, 0);
  for (int t = 0; t < 200; ++t) {
    Vector x = gaussian_vector(rng, 4);
    bool prev = c.theta_expansion_member(x, 0.1);
    for (double theta : {0.4, 0.9, 1.6, 2.8}) {
      const bool now = c.theta_expansion_member(x, theta);
      if (prev) CHECK(now);
      prev = now;
    }
  }
}

TEST_CASE("circ_expansion: identity, agreement, boundary") {
  Cone c = Cone::circular(3, M_PI / 6);
  Cone same = circ_expansion(c, 0.0);
  CHECK(std::get<Circular>(same.variant()).alpha == doctest::Approx(M_PI / 6));

  Cone e = circ_expansion(c, M_PI / 6);
  CHECK(std::get<Circular>(e.variant()).alpha == doctest::Approx(M_PI / 3));

  RngStream rng(53, 0);
  for (int t = 0; t < 1000; ++t) {
    Vector x = gaussian_vector(rng, 3);
    const double margin = x(0) - std::cos(M_PI / 3) * x.norm();
    if (std::abs(margin) < 1e-9) continue; // skip knife-edge draws
    CHECK(e.membership(x, 1e-9) == c.theta_expansion_member(x, M_PI / 6));
  }

  // boundary direction at angle alpha + theta from the axis
  const double a = M_PI / 3;
  Vector boundary = vec3(std::cos(a), std::sin(a), 0);
  CHECK(e.membership(boundary, 1e-9));
  CHECK(!c.membership(boundary, 1e-9));

  CHECK_THROWS_AS(circ_expansion(c, M_PI / 2), input_error);
}

TEST_CASE("polar: subspaces and full space") {
  Cone full = Cone::full_space(3);
  Cone zero = full.polar();
  CHECK(!zero.membership(vec3(1e-3, 0, 0), 1e-9));
  CHECK(zero.membership(Vector::Zero(3)));

  Matrix b = Matrix::Zero(2, 1);
  b(0, 0) = 1.0;
  Cone polar_line = Cone::subspace(b).polar();
  CHECK(polar_line.membership(vec2(0, 1), 1e-9));
  CHECK(!polar_line.membership(vec2(1, 0), 1e-9));
}

TEST_CASE("polar: Moreau decomposition for circular cones") {
  Cone c = Cone::circular(5, 0.7);
  Cone cp = c.polar();
  RngStream rng(59, 0);
  for (int t = 0; t < 100; ++t) {
    Vector x = gaussian_vector(rng, 5);
    Vector pc = c.project(x);
    Vector pp = cp.project(x);
    CHECK((pc + pp - x).norm() <= 1e-8 * (1.0 + x.norm()));
    CHECK(std::abs(pc.dot(pp)) <= 1e-8 * (1.0 + x.squaredNorm()));
  }
}

TEST_CASE("polar: generated cone gives halfspace membership") {
  Cone k = kcone();
  Cone kp = k.polar();
  CHECK(kp.membership(vec3(-1, 0, 0), 1e-9));
  CHECK(!kp.membership(vec3(1, 0, 0), 1e-9));
  CHECK_THROWS_AS(kp.project(vec3(1, 0, 0)), input_error);
}

TEST_CASE("angle_metric: values and triangle inequality") {
  CHECK(angle_metric(vec2(1, 0), vec2(1, 0)) == doctest::Approx(0.0));
  CHECK(angle_metric(vec2(1, 0), vec2(0, 1)) == doctest::Approx(M_PI_2));
  CHECK_THROWS_AS(angle_metric(vec2(2, 0), vec2(0, 1)), input_error);

  RngStream rng(61, 0);
  for (int t = 0; t < 1000; ++t) {
    Vector x = gaussian_vector(rng, 4).normalized();
    Vector y = gaussian_vector(rng, 4).normalized();
    Vector z = gaussian_vector(rng, 4).normalized();
    CHECK(angle_metric(x, y) <= angle_metric(x, z) + angle_metric(z, y) + 1e-12);
  }
}

TEST_CASE("non-convexity witness: expansion of K fails midpoint") {
  Cone k = kcone();
  const double s23 = std::sqrt(2.0 / 3.0);
  Vector y1 = vec3(1, s23, 1);
  Vector y2 = vec3(1, s23, -1);
  Vector mid = 0.5 * (y1 + y2);
  CHECK(k.theta_expansion_member(y1, M_PI / 6));
  CHECK(k.theta_expansion_member(y2, M_PI / 6));
  CHECK(!k.theta_expansion_member(mid, M_PI / 6));
}

TEST_CASE("support_sphere: zero cone returns -inf") {
  Cone zero = Cone::full_space(2).polar();
  CHECK(zero.support_sphere(vec2(1, 0)) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("cross_polytope invariants") {
  Polytope p = cross_polytope(3);
  p.validate();
  CHECK(p.vertices.size() == 6);
  CHECK(p.halfspaces.size() == 8);
  CHECK(p.contains(vec3(0.2, 0.3, -0.4)));
  CHECK(!p.contains(vec3(0.9, 0.3, -0.4)));
  auto [active, slack] = p.face_split(vec3(1, 0, 0));
  CHECK(active.size() == 4);
  CHECK(slack.size() == 4);
}
