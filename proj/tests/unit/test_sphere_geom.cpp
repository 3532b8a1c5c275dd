#include "doctest.h"
#include "helpers.hpp"
#include "isospec/iso_maps.hpp"
#include "isospec/sphere_geom.hpp"

using namespace isospec;
using namespace testing_util;

namespace {

SymTensor3 random_tensor(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  SymTensor3 q;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = j; k < 3; ++k) q(i, j, k) = q(i, k, j) = nd(rng);
  return q;
}

Matrix3d random_traceless(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Matrix3d b;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) b(i, j) = nd(rng);
  b -= b.trace() / 3.0 * Matrix3d::Identity();
  return b;
}

Vector3d random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  return Vector3d(nd(rng), nd(rng), nd(rng)).normalized();
}

Vector3d random_tangent(const Vector3d& p, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vector3d x(nd(rng), nd(rng), nd(rng));
  return x - x.dot(p) * p;
}

// <(X1 Y1)* V1, (X2 Y2)* V2> from the definition.
double pure_inner(const Vector3d& x1, const Vector3d& y1, const Vector3d& v1, const Vector3d& x2,
                  const Vector3d& y2, const Vector3d& v2) {
  return 0.5 * (x1.dot(x2) * y1.dot(y2) + x1.dot(y2) * x2.dot(y1)) * v1.dot(v2);
}

SymTensor3 pure(const Vector3d& x, const Vector3d& y, const Vector3d& v) {
  SymTensor3 q;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) q(i, j, k) = 0.5 * (x(j) * y(k) + x(k) * y(j)) * v(i);
  return q;
}

}  // namespace

TEST_CASE("tensor space inner product and projections") {
  std::mt19937_64 rng(22);
  for (int rep = 0; rep < 5; ++rep) {
    const Vector3d x1 = random_unit(rng), y1 = random_unit(rng), v1 = random_unit(rng);
    const Vector3d x2 = random_unit(rng), y2 = random_unit(rng), v2 = random_unit(rng);
    CHECK(pure(x1, y1, v1).dot(pure(x2, y2, v2)) ==
          doctest::Approx(pure_inner(x1, y1, v1, x2, y2, v2)).epsilon(1e-13));
    // P from its defining formula on pure tensors
    SymTensor3 expect;
    expect.v = (pure(x1, y1, v1).v + pure(x1, v1, y1).v + pure(y1, v1, x1).v) / 3.0;
    CHECK((projection_P(pure(x1, y1, v1)).v - expect.v).norm() < 1e-14);
  }
  const auto& p = projection_matrix();
  CHECK((p * p - p).norm() < 1e-13);
  CHECK((p - p.transpose()).norm() < 1e-14);
  const Eigen::JacobiSVD<Eigen::Matrix<double, 27, 27>> svd(p);
  int rank = 0;
  for (int i = 0; i < 27; ++i) rank += svd.singularValues()(i) > 1e-10 ? 1 : 0;
  CHECK(rank == 10);
  const SymTensor3 q = random_tensor(rng), r = random_tensor(rng);
  CHECK((projection_P(projection_P(q)).v - projection_P(q).v).norm() < 1e-12);
  CHECK((projection_P(q).v + projection_Pperp(q).v - q.v).norm() < 1e-14);
  CHECK(std::abs(projection_P(q).dot(projection_Pperp(r))) < 1e-12);
  CHECK(projection_Pperp(q).symmetry_residual() < 1e-15);
}

TEST_CASE("Phi") {
  std::mt19937_64 rng(23);
  const Matrix3d b = random_traceless(rng);
  const SymTensor3 q = phi_map(b);
  CHECK(q.symmetry_residual() == 0.0);
  CHECK(projection_P(q).norm() < 1e-13);
  for (int rep = 0; rep < 5; ++rep) {
    const Vector3d x = random_unit(rng);
    CHECK((q.apply(x, x) - (b * x).cross(x)).norm() < 1e-14);
  }
  // injective on End_0: 8 images of a basis are independent
  Eigen::Matrix<double, 27, 8> imgs;
  int col = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == 2 && j == 2) continue;
      Matrix3d m = Matrix3d::Zero();
      m(i, j) = 1.0;
      if (i == j) m(2, 2) = -1.0;
      imgs.col(col++) = phi_map(m).v;
    }
  const Eigen::JacobiSVD<Eigen::Matrix<double, 27, 8>> svd(imgs);
  CHECK(svd.singularValues().minCoeff() > 0.1);
  // SO(3) equivariance
  for (int rep = 0; rep < 5; ++rep) {
    const Matrix3d a = random_rotation(3, rng);
    CHECK((phi_map(a * b * a.transpose()).v - act(a, q).v).norm() < 1e-10);
  }
  // skew b gives (w x p) x p, whose tangent part is that of the constant field -w
  Vector3d w(0.3, -1.2, 0.7);
  Matrix3d skew;
  skew << 0, -w(2), w(1), w(2), 0, -w(0), -w(1), w(0), 0;
  const SymTensor3 qs = phi_map(skew);
  for (int rep = 0; rep < 10; ++rep) {
    const Vector3d p = random_unit(rng);
    const Vector3d v = qs.apply(p, p);
    const Vector3d a = -w;
    CHECK((v - a + a.dot(p) * p).norm() < 1e-13);
    CHECK((v - (p.cross(a)).cross(p)).norm() < 1e-13);
  }
  CHECK_THROWS_AS(phi_map(Matrix3d::Identity()), DomainError);
}

TEST_CASE("c pair conditions") {
  const auto c = quad_pair_c(), cp = quad_pair_cprime();
  const auto same = check_c_pair(c, c);
  CHECK(same.cond1);
  CHECK(same.disc_c == same.disc_cp);
  CHECK_FALSE(same.not_equivalent);
  const auto r = check_c_pair(c, cp);
  CHECK(r.cond1);
  CHECK(r.normal_form);
  CHECK((r.eq_values_c - Vector3d(2, 0, 0)).norm() < 1e-14);
  CHECK((r.eq_values_cp - Vector3d(2, 0, 0)).norm() < 1e-14);
  CHECK(r.disc_c == doctest::Approx(2.0));
  CHECK(r.disc_cp == doctest::Approx(4.0));
  CHECK(r.not_equivalent);
  const auto [d1, d2] = quad_discriminator(c, cp);
  CHECK(d1 == r.disc_c);
  CHECK(d2 == r.disc_cp);
  // charpoly of s a + u b from the explicit cubic
  for (double s : {-0.7, 0.4}) {
    for (double u : {0.3, 1.1}) {
      const Matrix3d m = s * c.c1 + u * c.c2;
      const double b12 = 1, b13 = 0, b23 = 1;
      const double lin = -(u * u * (b12 * b12 + b13 * b13 + b23 * b23) + s * s);
      const double cst = -s * u * u * (b23 * b23 - b12 * b12) - 2 * u * u * u * b12 * b13 * b23;
      for (double l : {-1.3, 0.2, 2.0})
        CHECK((l * Matrix3d::Identity() - m).determinant() == doctest::Approx(l * l * l + lin * l + cst));
    }
  }
  Matrix3d bad = c.c2;
  bad(0, 1) = 2.0;
  CHECK_THROWS_AS(SphereQuadMap::make(c.c1, bad), DomainError);
}

TEST_CASE("closed-form scalar curvature on S^2 x T^2") {
  const SphereQuadMap zero;
  std::mt19937_64 rng(29);
  for (int rep = 0; rep < 10; ++rep) CHECK(scal_s2t2(zero, random_unit(rng)) == 2.0);
  CHECK(scal_s2t2(quad_pair_cprime(), Vector3d(0, 1, 0)) == 2.0);
  CHECK(scal_s2t2(quad_pair_c(), Vector3d(1, 0, 0)) == -2.5);
  CHECK_THROWS_AS(scal_s2t2(zero, Vector3d(1, 1, 0)), DomainError);
}

TEST_CASE("finite-difference curvature agrees with the closed forms") {
  std::mt19937_64 rng(31);
  const auto c = quad_pair_c(), cp = quad_pair_cprime();
  for (const auto* m : {&c, &cp}) {
    const auto form = quadratic_form(*m);
    for (int rep = 0; rep < 100; ++rep) {
      const Vector3d p = random_unit(rng);
      CHECK(std::abs(scal_from_form(form, 2.0, p) - scal_s2t2(*m, p)) < 1e-6);
      // ||d lambda_Z||^2 = 2 * 9 <c_Z p, p>^2 for each Z separately
      const SphereQuadMap single{m->c2, Matrix3d::Zero()};
      const double r = p.dot(m->c2 * p);
      CHECK(std::abs(dlambda_norm_sq(quadratic_form(single), p) - 18.0 * r * r) < 1e-6);
    }
  }
  // poles use the fallback axis
  CHECK(std::abs(scal_from_form(quadratic_form(c), 2.0, Vector3d(1, 0, 0)) + 2.5) < 1e-6);
  CHECK(std::abs(scal_from_form(quadratic_form(c), 2.0, Vector3d(0, 0, -1)) + 2.5) < 1e-6);

  // S^4 with lambda = 0
  const FormProvider none = [](const VectorXd&) { return std::vector<VectorXd>{}; };
  VectorXd p5 = VectorXd::LinSpaced(5, -1, 1).normalized();
  CHECK(scal_from_form(none, round_sphere_scal(5), p5) == 12.0);
  CHECK(tangent_frame(p5).cols() == 4);
  CHECK((tangent_frame(p5).transpose() * tangent_frame(p5) - MatrixXd::Identity(4, 4)).norm() < 1e-14);

  // linear forms on S^4
  const auto j = family_so5(0.2);
  for (int rep = 0; rep < 20; ++rep) {
    std::normal_distribution<double> nd;
    VectorXd p(5);
    for (int k = 0; k < 5; ++k) p(k) = nd(rng);
    p.normalize();
    CHECK(std::abs(scal_from_form(linear_form(j.images), 12.0, p) - linear_form_scal(j.images, p)) < 1e-6);
  }
}

TEST_CASE("linear forms on S^4 along the so(5) family") {
  const auto j0 = family_so5(0.0), j1 = family_so5(0.1);
  auto sampled = [](const std::vector<MatrixXd>& j) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    double lo = 1e300, hi = -1e300;
    for (int i = 0; i < 20000; ++i) {
      VectorXd p(5);
      for (int k = 0; k < 5; ++k) p(k) = nd(rng);
      p.normalize();
      const double v = linear_form_scal(j, p);
      lo = std::min(lo, v), hi = std::max(hi, v);
    }
    return std::make_pair(lo, hi);
  };
  const auto c0 = linear_form_critical_values(j0.images), c1 = linear_form_critical_values(j1.images);
  // critical values come from eigenvectors of -(j1^2 + j2^2): check at those points
  MatrixXd s = -(j0.images[0] * j0.images[0] + j0.images[1] * j0.images[1]);
  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(s);
  for (int i = 0; i < 5; ++i) CHECK(linear_form_scal(j0.images, es.eigenvectors().col(i)) == doctest::Approx(c0[i]));
  double diff = 0.0;
  for (int i = 0; i < 5; ++i) diff = std::max(diff, std::abs(c0[i] - c1[i]));
  CHECK(diff > 1e-4);
  // the top eigenvalue (3 + sqrt5)/2 is shared along the whole family, so the maxima agree
  CHECK(std::abs(c0.back() - c1.back()) < 1e-12);
  CHECK(std::abs(c0.front() - c1.front()) > 1e-4);
  const auto [lo0, hi0] = sampled(j0.images);
  CHECK(lo0 >= c0.front() - 1e-12);
  CHECK(hi0 <= c0.back() + 1e-12);
  CHECK(hi0 > c0.back() - 0.05);
}

TEST_CASE("quadrature on S^2") {
  for (int deg : {0, 3, 8, 26}) {
    const auto rule = quadrature_rule(deg);
    double w = 0.0;
    for (double x : rule.weights) {
      CHECK(x > 0.0);
      w += x;
    }
    CHECK(w == doctest::Approx(4.0 * 3.14159265358979323846).epsilon(1e-13));
    for (int a = 0; a <= deg; ++a)
      for (int b = 0; a + b <= deg; ++b)
        for (int c = 0; a + b + c <= deg; ++c) {
          double s = 0.0;
          for (size_t i = 0; i < rule.nodes.size(); ++i) {
            const Vector3d& n = rule.nodes[i];
            s += rule.weights[i] * std::pow(n.x(), a) * std::pow(n.y(), b) * std::pow(n.z(), c);
          }
          CHECK(std::abs(s - sphere_monomial_integral(a, b, c)) < 1e-10);
        }
  }
  CHECK(sphere_monomial_integral(2, 0, 0) == doctest::Approx(4.0 * 3.14159265358979323846 / 3.0));
}

TEST_CASE("moments and ranges") {
  const double four_pi = 4.0 * 3.14159265358979323846;
  const auto rule = quadrature_rule(26);
  const auto m0 = scal_moments(SphereQuadMap{}, 6, rule);
  for (int k = 1; k <= 6; ++k) CHECK(m0[k - 1] == doctest::Approx(std::pow(2.0, k) * four_pi).epsilon(1e-13));
  const auto a = scal_moments(quad_pair_c(), 6, rule), b = scal_moments(quad_pair_cprime(), 6, rule);
  for (int k = 0; k < 6; ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-9 * std::abs(a[k]));
  // a generic c changes the moments
  Matrix3d g = Matrix3d::Zero();
  g(0, 1) = g(1, 0) = 1.3;
  CHECK(std::abs(scal_moments(SphereQuadMap::make(quad_pair_c().c1, g), 1, rule)[0] - a[0]) > 1e-3);
  CHECK_THROWS_AS(scal_moments(quad_pair_c(), 7, rule), ConfigError);

  // first moment against the monomial oracle: int <c1 p,p>^2 = int (z^2 - x^2)^2
  const double i2 = sphere_monomial_integral(4, 0, 0) + sphere_monomial_integral(0, 0, 4) -
                    2.0 * sphere_monomial_integral(2, 0, 2);
  // <c2 p,p> = 2 y (x + z)
  const double j2 = 4.0 * (sphere_monomial_integral(2, 2, 0) + sphere_monomial_integral(0, 2, 2));
  CHECK(a[0] == doctest::Approx(2.0 * four_pi - 4.5 * (i2 + j2)).epsilon(1e-12));

  const auto ra = scal_range(quad_pair_c()), rb = scal_range(quad_pair_cprime());
  CHECK(std::abs(ra.max - rb.max) < 1e-6);
  CHECK(std::abs(ra.min - rb.min) < 1e-6);
  CHECK(ra.max == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(ra.min < -2.0);
}

TEST_CASE("max scal preimage") {
  const auto zero = max_scal_preimage(SphereQuadMap{}, 0.08);
  REQUIRE(zero.clusters.size() == 1);
  CHECK(zero.clusters[0].dimension == 2);
  CHECK(zero.max_scal == 2.0);

  const auto pc = max_scal_preimage(quad_pair_c());
  CHECK(pc.max_scal == doctest::Approx(2.0).epsilon(1e-12));
  REQUIRE(pc.clusters.size() == 3);
  int dims[3] = {0, 0, 0};
  const double r2 = 1.0 / std::sqrt(2.0);
  for (const auto& cl : pc.clusters) {
    ++dims[cl.dimension];
    for (const auto& p : cl.points) {
      const double to_circle = std::abs(p(0) + p(2));
      const double to_points = std::min((p - Vector3d(r2, 0, r2)).norm(), (p + Vector3d(r2, 0, r2)).norm());
      CHECK(std::min(to_circle, to_points) < 1e-3);
    }
  }
  CHECK(dims[1] == 1);
  CHECK(dims[0] == 2);

  const auto pp = max_scal_preimage(quad_pair_cprime());
  REQUIRE(pp.clusters.size() == 2);
  for (const auto& cl : pp.clusters) {
    CHECK(cl.dimension == 0);
    CHECK(std::abs(std::abs(cl.centroid(1)) - 1.0) < 1e-3);
  }
}

TEST_CASE("horizontal vectors") {
  std::mt19937_64 rng(41);
  const auto c = quad_pair_c(), cp = quad_pair_cprime();
  const double s2 = std::sqrt(2.0);
  for (int rep = 0; rep < 100; ++rep) {
    const Vector3d p = random_unit(rng), x = random_tangent(p, rng);
    const double p1 = p(0), p2 = p(1), p3 = p(2);
    const Vector3d v1(-p2 * p3, 2 * p1 * p3, -p1 * p2);
    const Vector3d v2(p1 * p3 - p2 * p2 + p3 * p3, p1 * p2 - p2 * p3, -p1 * p3 - p1 * p1 + p2 * p2);
    const Vector3d v2p(-s2 * p1 * p2, s2 * (p1 * p1 - p3 * p3), s2 * p2 * p3);
    const auto h = horizontal_vector(c, p, x);
    CHECK((h.base - x).norm() == 0.0);
    CHECK(std::abs(h.fiber(0) + v1.dot(x)) < 1e-13);
    CHECK(std::abs(h.fiber(1) + v2.dot(x)) < 1e-13);
    const auto hp = horizontal_vector(cp, p, x);
    CHECK(std::abs(hp.fiber(0) + v1.dot(x)) < 1e-13);
    CHECK(std::abs(hp.fiber(1) + v2p.dot(x)) < 1e-13);
    for (const auto* m : {&c, &cp}) {
      const auto hv = horizontal_vector(*m, p, x);
      for (int s = 0; s < 2; ++s) {
        TangentS2T2 fib;
        fib.fiber(s) = 1.0;
        CHECK(std::abs(g_lambda(*m, p, hv, fib)) < 1e-12);
      }
      // projection to the sphere is a Riemannian submersion on horizontal vectors
      const Vector3d y = random_tangent(p, rng);
      CHECK(g_lambda(*m, p, hv, horizontal_vector(*m, p, y)) == doctest::Approx(x.dot(y)).epsilon(1e-12));
    }
  }
  const auto h0 = horizontal_vector(SphereQuadMap{}, Vector3d(0, 0, 1), Vector3d(1, 2, 0));
  CHECK(h0.fiber.norm() == 0.0);
}

TEST_CASE("conjugating the forms") {
  const auto j = family_so5(0.0), jp = family_so5(0.3);
  const VectorXd z = (VectorXd(2) << 0.6, -0.8).finished();
  CHECK(sphere_form_conjugation_check(j.images, j.images, z, MatrixXd::Identity(5, 5)) == 0.0);
  const MatrixXd x = z(0) * j.images[0] + z(1) * j.images[1];
  const MatrixXd xp = z(0) * jp.images[0] + z(1) * jp.images[1];
  const auto w = conjugator_witness<double>(x, xp);
  CHECK(sphere_form_conjugation_check(j.images, jp.images, z, w.a) < 1e-8);
  CHECK_THROWS_AS(sphere_form_conjugation_check(j.images, jp.images, z, MatrixXd::Identity(5, 5)),
                  NotConjugateError);

  const auto c = quad_pair_c(), cp = quad_pair_cprime();
  for (const Vector2d zz : {Vector2d(1, 0), Vector2d(0, 1), Vector2d(0.3, -1.7)}) {
    const Matrix3d a = symmetric_conjugator(c.at(zz), cp.at(zz));
    CHECK(a.determinant() == doctest::Approx(1.0));
    CHECK((a * c.at(zz) * a.transpose() - cp.at(zz)).norm() < 1e-12);
    CHECK(sphere_form_conjugation_check(c, cp, zz, a) < 1e-12);
  }
  Matrix3d other = Matrix3d::Zero();
  other(0, 1) = other(1, 0) = 3.0;
  CHECK_THROWS_AS(symmetric_conjugator(c.c1, other), NotConjugateError);
}
