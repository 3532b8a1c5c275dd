#include "doctest.h"
#include "helpers.hpp"
#include "isospec/iso_maps.hpp"

using namespace isospec;
using namespace testing_util;

namespace {

// Faddeev-LeVerrier, used as an independent check of the eigenvalue expansion.
template <typename Scalar>
VectorXd leverrier(const Mat<Scalar>& a) {
  const int n = static_cast<int>(a.rows());
  VectorXcd c = VectorXcd::Zero(n + 1);
  c(0) = 1.0;
  MatrixXcd ac = a.template cast<Complex>();
  MatrixXcd m = MatrixXcd::Zero(n, n);
  for (int k = 1; k <= n; ++k) {
    m = ac * m + c(k - 1) * MatrixXcd::Identity(n, n);
    c(k) = -(ac * m).trace() / double(k);
  }
  return c.real();
}

template <typename Scalar>
JMap<Scalar> with(const JMap<Scalar>& j, std::vector<Mat<Scalar>> imgs) {
  JMap<Scalar> o = j;
  o.images = std::move(imgs);
  return o;
}

JMap<Complex> example240() {
  const Complex I(0, 1);
  MatrixXcd j1 = MatrixXcd::Zero(3, 3);
  j1(0, 0) = I, j1(1, 1) = 2.0 * I, j1(2, 2) = -3.0 * I;
  MatrixXcd j2(3, 3);
  j2 << 0, 1, 1, -1, 0, 1, -1, -1, 0;
  return JMap<Complex>{standard_basis<Complex>(Family::SU, 3), std::nullopt, {j1, j2}};
}

}  // namespace

TEST_CASE("charpoly coefficients") {
  VectorXd z = charpoly_coeffs<double>(MatrixXd::Zero(5, 5));
  VectorXd expect = VectorXd::Zero(6);
  expect(0) = 1.0;
  CHECK((z - expect).norm() == 0.0);

  const auto j = family_so5(0.17);
  VectorXd c1 = charpoly_coeffs<double>(j.images[0]);
  VectorXd e1(6);
  e1 << 1, 0, 3, 0, 1, 0;
  CHECK((c1 - e1).norm() < 1e-12);

  const auto js = family_su3(0.3);
  VectorXd c2 = charpoly_coeffs<Complex>(js.images[1]);
  VectorXd e2(4);
  e2 << 1, 0, 1, 0;
  CHECK((c2 - e2).norm() < 1e-12);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> d;
  for (int rep = 0; rep < 10; ++rep) {
    MatrixXd g(6, 6);
    for (int i = 0; i < 36; ++i) g.data()[i] = d(rng);
    CHECK((charpoly_coeffs<double>(g) - leverrier<double>(g)).norm() < 1e-9);
    const MatrixXd s = random_skew(6, rng);
    CHECK((charpoly_coeffs<double>(s) - leverrier<double>(s)).norm() < 1e-9);
  }
}

TEST_CASE("p_ab basic values") {
  const auto j = family_so5(0.0);
  CHECK(std::abs(p_ab(j, 1, 0)) < 1e-14);
  for (double t : {kSO5TMin, -0.3, 0.0, 0.2, kSO5TMax})
    CHECK(p_ab(family_so5(t), 2, 0).real() == doctest::Approx(-6.0).epsilon(1e-13));
  CHECK(std::abs(p_ab(family_su3(0.0), 1, 1)) < 1e-14);
  CHECK_THROWS_AS(p_ab(j, 3, 3), ConfigError);
  CHECK_THROWS_AS(p_ab(j, 0, 0), ConfigError);
}

TEST_CASE("p_ab sum over a word length reproduces tr((j1+j2)^n)") {
  std::mt19937_64 rng(4);
  auto su4 = standard_basis<Complex>(Family::SU, 4);
  JMap<Complex> j{su4, std::nullopt, {random_su(4, rng), random_su(4, rng)}};
  MatrixXcd s = j.images[0] + j.images[1];
  MatrixXcd pw = MatrixXcd::Identity(4, 4);
  for (int n = 1; n <= 4; ++n) {
    pw = pw * s;
    Complex sum = 0.0;
    for (int a = 0; a <= n; ++a) sum += p_ab(j, a, n - a);
    CHECK(std::abs(sum - pw.trace()) < 1e-10 * std::max(1.0, std::abs(pw.trace())));
  }
  JMap<Complex> swapped = with(j, {j.images[1], j.images[0]});
  CHECK(std::abs(p_ab(j, 3, 1) - p_ab(swapped, 1, 3)) < 1e-10);
}

TEST_CASE("isospectral pair certificate") {
  const auto a = family_so5(0.0), b = family_so5(0.2);
  CHECK(is_isospectral_pair(a, a).isospectral);
  const auto r = is_isospectral_pair(a, b);
  CHECK(r.isospectral);
  CHECK(r.charpoly_residual < 1e-9);
  CHECK_FALSE(is_isospectral_pair(a, b.scaled(2.0)).isospectral);
  CHECK(is_isospectral_pair(family_su3(-0.5), family_su3(0.6)).isospectral);
}

TEST_CASE("conjugator witnesses") {
  const auto j0 = family_so5(0.0), j2 = family_so5(0.2);
  auto same = conjugator_witness<double>(j0.images[0], j0.images[0]);
  CHECK(same.residual < 1e-12);
  auto w = conjugator_witness<double>(j0.images[0], j2.images[0]);
  CHECK(w.residual < 1e-8);
  CHECK(w.unitarity < 1e-12);
  CHECK(w.a.determinant() == doctest::Approx(1.0));

  const auto s0 = family_su3(0.0), s5 = family_su3(0.5);
  auto wc = conjugator_witness<Complex>(s0.images[1], s5.images[1]);
  CHECK(wc.residual < 1e-8);
  CHECK(wc.unitarity < 1e-12);
  CHECK(std::abs(wc.a.determinant() - Complex(1.0)) < 1e-12);

  std::mt19937_64 rng(9);
  for (int n : {4, 6, 7}) {
    const MatrixXd x = random_skew(n, rng);
    const MatrixXd o = random_rotation(n, rng);
    auto wr = conjugator_witness<double>(x, o * x * o.transpose());
    CHECK(wr.residual < 1e-8);
  }
  CHECK_THROWS_AS(conjugator_witness<double>(j0.images[0], 2.0 * j2.images[0]), NotConjugateError);
}

TEST_CASE("so(5) family values") {
  const auto j = family_so5(0.0);
  int nonzero = 0;
  for (int i = 0; i < 25; ++i)
    if (j.images[0].data()[i] != 0.0) {
      ++nonzero;
      CHECK(std::abs(j.images[0].data()[i]) == 1.0);
    }
  CHECK(nonzero == 6);
  CHECK(discriminators(j).norm4 == doctest::Approx(26.0).epsilon(1e-13));
  for (double t : {kSO5TMin, -0.4, 0.1, 0.3, kSO5TMax}) {
    const auto d = discriminators(family_so5(t));
    CHECK(std::abs(d.norm4 - (4 * t * t - 4 * t + 26)) < 1e-10);
  }
  CHECK_THROWS_AS(family_so5(0.5), DomainError);
  CHECK_THROWS_AS(family_so5(-0.7), DomainError);
}

TEST_CASE("su(3) family values") {
  CHECK(discriminators(family_su3(0.0)).norm4 == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(discriminators(family_su3(0.5)).norm4 == doctest::Approx(7.0).epsilon(1e-14));
  for (double t : {-0.7, -0.2, 0.4})
    for (double s : {-1.0, 0.3})
      for (double u : {-0.6, 0.8}) {
        VectorXd z(2);
        z << s, u;
        VectorXd e(4);
        e << 1, 0, s * s + u * u, 0;
        CHECK((charpoly_coeffs<Complex>(family_su3(t).at(z)) - e).norm() < 1e-12);
      }
  CHECK_THROWS_AS(family_su3(0.8), DomainError);
}

TEST_CASE("su(m) to so(2m) embedding") {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    const MatrixXcd x = random_su(3, rng), y = random_su(3, rng);
    const MatrixXd px = embed_su_in_so(x), py = embed_su_in_so(y);
    CHECK((px + px.transpose()).norm() < 1e-14);
    const MatrixXcd br = x * y - y * x;
    CHECK((embed_su_in_so(br) - (px * py - py * px)).norm() < 1e-12);
    CHECK((px * py).trace() == doctest::Approx(2.0 * (x * y).trace().real()).epsilon(1e-12));
  }
}

TEST_CASE("so(8) data") {
  for (double t : {-0.7, -0.3, 0.0, 0.25, 0.6}) {
    const auto j = family_so8(t);
    REQUIRE(j.torus.has_value());
    for (const auto& x : j.images)
      for (const auto& z : j.torus->elements) {
        CHECK(commutator<double>(x, z).norm() < 1e-12);
        CHECK(std::abs(j.target->inner(x, z)) < 1e-12);
      }
    const MatrixXd s = j.images[0] * j.images[0] + j.images[1] * j.images[1];
    CHECK((s * s).trace() == doctest::Approx(16 - 8 * t * t).epsilon(1e-12));
  }
  // displayed matrices at t = 0
  const auto j = family_so8(0.0);
  MatrixXd a = MatrixXd::Zero(8, 8);
  a(0, 3) = 1, a(2, 5) = -1, a(3, 0) = -1, a(5, 2) = 1;
  CHECK((j.images[0] - a).norm() == 0.0);
  MatrixXd b = MatrixXd::Zero(8, 8);
  b(0, 2) = 1, b(2, 0) = -1, b(3, 5) = 1, b(5, 3) = -1;
  CHECK((j.images[1] - b).norm() == 0.0);
  // The display has -1 at row 5, column 4. Skew symmetry against the t entry at row 4,
  // column 5 forces -t there, which is what the embedding produces.
  const auto jt = family_so8(0.3);
  CHECK(jt.images[1](4, 3) == doctest::Approx(-0.3));
  CHECK(jt.images[1](3, 4) == doctest::Approx(0.3));
  MatrixXd z1 = MatrixXd::Zero(8, 8);
  z1.block(0, 3, 3, 3) = -MatrixXd::Identity(3, 3);
  z1.block(3, 0, 3, 3) = MatrixXd::Identity(3, 3);
  CHECK((j.torus->elements[0] - z1 / std::sqrt(3.0)).norm() < 1e-15);
  CHECK(j.torus->elements[1](6, 7) == -1.0);
  CHECK(j.torus->elements[1](7, 6) == 1.0);
}

TEST_CASE("block embeddings keep images in the centralizer and orthogonal to h") {
  const auto so9 = embed_block(family_so5(0.2), Family::SO, 9);
  const auto su6 = embed_block(family_su3(0.4), Family::SU, 6);
  for (const auto& x : so9.images)
    for (const auto& z : so9.torus->elements) {
      CHECK(commutator<double>(x, z).norm() < 1e-12);
      CHECK(std::abs(so9.target->inner(x, z)) < 1e-12);
    }
  for (const auto& x : su6.images)
    for (const auto& z : su6.torus->elements) {
      CHECK(commutator<Complex>(x, z).norm() < 1e-12);
      CHECK(std::abs(su6.target->inner(x, z)) < 1e-12);
    }
  const auto zero = embed_block(family_so5(0.0).scaled(0.0), Family::SO, 9);
  CHECK(zero.images[0].norm() == 0.0);
  CHECK_THROWS_AS(embed_block(family_so5(0.0), Family::SO, 8), ConfigError);
}

TEST_CASE("flow field") {
  auto j = family_su3(0.0);
  j.images[1] = MatrixXcd(j.images[0] * 2.0);
  CHECK(flow_field_Y(j)[0].norm() == 0.0);
  CHECK(dq_along_Y(example240()) == doctest::Approx(240.0).epsilon(1e-14));
  CHECK_THROWS_AS(flow_field_Y(j, 4), ConfigError);

  // p_22 is a quartic polynomial in eps along j + eps Y, so the five-point stencil is exact.
  std::mt19937_64 rng(21);
  auto su4 = standard_basis<Complex>(Family::SU, 4);
  for (int rep = 0; rep < 10; ++rep) {
    JMap<Complex> p{su4, std::nullopt, {0.5 * random_su(4, rng), 0.5 * random_su(4, rng)}};
    for (int e : {3, 5}) {
      const auto y = flow_field_Y(p, e);
      auto f = [&](double eps) {
        return p_ab(with<Complex>(p, {p.images[0] + eps * y[0], p.images[1] + eps * y[1]}), 2, 2);
      };
      const double h = 0.1 / std::max(1.0, y[0].norm());
      const Complex der = (f(-2 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2 * h)) / (12 * h);
      CHECK(std::abs(der) < 1e-10 * std::max(1.0, y[0].norm()));
    }
  }
}

TEST_CASE("flow integration") {
  const auto j0 = example240();
  const auto still = flow_integrate(j0, 0.0, 1e-3);
  CHECK(still.states.size() == 1);

  const auto run = flow_integrate(j0, 0.2, 1e-3);
  CHECK(run.max_drift < 1e-6);
  CHECK(std::abs(run.q.back() - run.q.front()) > 1e-3);
  CHECK(run.times.back() == doctest::Approx(0.2));
  const auto fam = run.family();
  CHECK(is_isospectral_pair(fam(0.0), fam(0.137), 17, 1e-6).isospectral);

  FlowOptions strict;
  strict.max_halvings = 0;
  CHECK_THROWS_AS(flow_integrate(j0, 0.2, 1e-3, strict), DriftError);

  FlowOptions cubic;
  cubic.exponent = 3;
  const auto run3 = flow_integrate(j0, 0.1, 1e-3, cubic);
  CHECK(run3.max_drift < 1e-6);
}

TEST_CASE("discriminators") {
  auto z = family_so5(0.0).scaled(0.0);
  const auto d = discriminators(z);
  CHECK(d.q == 0.0);
  CHECK(d.norm4 == 0.0);
  for (double e : d.eigs) CHECK(e == 0.0);
  for (double t : {-0.5, 0.0, 0.3}) {
    const auto j = family_so5(t);
    const auto dd = discriminators(j);
    const MatrixXd a2 = j.images[0] * j.images[0], b2 = j.images[1] * j.images[1];
    CHECK(std::abs(dd.norm4 - ((a2 * a2).trace() + (b2 * b2).trace() + 2 * dd.q)) < 1e-10);
    CHECK(std::is_sorted(dd.eigs.begin(), dd.eigs.end()));
  }
}
