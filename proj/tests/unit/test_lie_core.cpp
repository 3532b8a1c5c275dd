#include "doctest.h"
#include "helpers.hpp"

using namespace isospec;
using namespace testing_util;

TEST_CASE("standard bases have the expected dimensions and are orthonormal") {
  CHECK(standard_basis<double>(Family::SO, 2)->dim() == 1);
  CHECK(standard_basis<Complex>(Family::SU, 3)->dim() == 8);
  auto so5 = standard_basis<double>(Family::SO, 5);
  REQUIRE(so5->dim() == 10);
  MatrixXd gram(10, 10);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) gram(i, j) = -(so5->basis(i) * so5->basis(j)).trace();
  CHECK((gram - MatrixXd::Identity(10, 10)).norm() < 1e-14);

  auto su4 = standard_basis<Complex>(Family::SU, 4, 2.5);
  for (int i = 0; i < su4->dim(); ++i) {
    const auto& e = su4->basis(i);
    CHECK((e + e.adjoint()).norm() < 1e-15);
    CHECK(std::abs(e.trace()) < 1e-15);
    for (int j = 0; j < su4->dim(); ++j) {
      const double g = -2.5 * (e * su4->basis(j)).trace().real();
      CHECK(g == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("invalid sizes are configuration errors") {
  CHECK_THROWS_AS(standard_basis<double>(Family::SO, 1), ConfigError);
  CHECK_THROWS_AS(standard_basis<Complex>(Family::SU, 1), ConfigError);
  CHECK_THROWS_AS(standard_basis<double>(Family::SU, 3), ConfigError);
  CHECK_THROWS_AS(standard_basis<double>(Family::SO, 3, -1.0), ConfigError);
}

TEST_CASE("ad of an element kills it and rejects elements outside the span") {
  std::mt19937_64 rng(7);
  auto so5 = standard_basis<double>(Family::SO, 5);
  const MatrixXd x = random_skew(5, rng);
  const MatrixXd ad = ad_matrix(*so5, x);
  CHECK((ad * so5->coords(x)).norm() < 1e-12);
  MatrixXd sym = x;
  sym(0, 1) += 1.0;
  CHECK_THROWS_AS(ad_matrix(*so5, sym), DomainError);
}

TEST_CASE("so(3) structure constants follow the cross product") {
  auto so3 = standard_basis<double>(Family::SO, 3);
  auto hat = [](const Eigen::Vector3d& v) {
    MatrixXd h(3, 3);
    h << 0, -v(2), v(1), v(2), 0, -v(0), -v(1), v(0), 0;
    return h;
  };
  // recover the axis vector of each basis element from its entries
  std::vector<Eigen::Vector3d> axis;
  for (int i = 0; i < 3; ++i) {
    const MatrixXd& b = so3->basis(i);
    axis.emplace_back(b(2, 1), b(0, 2), b(1, 0));
  }
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const Eigen::Vector3d w = axis[a].cross(axis[b]);
      for (int c = 0; c < 3; ++c) {
        const double expected = -(hat(w) * so3->basis(c)).trace();
        CHECK(so3->ad(a)(c, b) == doctest::Approx(expected).epsilon(1e-14));
      }
    }
}

TEST_CASE("Killing form is a fixed multiple of the trace form") {
  std::mt19937_64 rng(11);
  for (int n : {4, 5, 7}) {
    auto so = standard_basis<double>(Family::SO, n);
    for (int rep = 0; rep < 20; ++rep) {
      const MatrixXd x = random_skew(n, rng), y = random_skew(n, rng);
      const double lhs = (ad_matrix(*so, x) * ad_matrix(*so, y)).trace();
      const double rhs = killing_ratio(Family::SO, n) * (x * y).trace();
      CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(rhs));
    }
  }
  for (int n : {2, 3, 4}) {
    auto su = standard_basis<Complex>(Family::SU, n);
    for (int rep = 0; rep < 20; ++rep) {
      const MatrixXcd x = random_su(n, rng), y = random_su(n, rng);
      const double lhs = (ad_matrix(*su, x) * ad_matrix(*su, y)).trace();
      const double rhs = killing_ratio(Family::SU, n) * (x * y).trace().real();
      CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(rhs));
    }
  }
}

TEST_CASE("Jacobi identity on random basis triples") {
  std::mt19937_64 rng(3);
  auto alg = make_direct_sum<Complex>({{Family::SU, 3}, {Family::SO, 4, 0.5}, {Family::Abelian, 2}});
  std::uniform_int_distribution<int> pick(0, alg->dim() - 1);
  for (int rep = 0; rep < 50; ++rep) {
    const int i = pick(rng), j = pick(rng), k = pick(rng);
    VectorXd ei = VectorXd::Unit(alg->dim(), i), ej = VectorXd::Unit(alg->dim(), j),
             ek = VectorXd::Unit(alg->dim(), k);
    const VectorXd jac = alg->bracket(ei, alg->bracket(ej, ek)) + alg->bracket(ej, alg->bracket(ek, ei)) +
                         alg->bracket(ek, alg->bracket(ei, ej));
    CHECK(jac.norm() < 1e-12);
  }
  for (int i = 0; i < alg->dim(); ++i) CHECK((alg->ad(i) + alg->ad(i).transpose()).norm() < 1e-13);
  CHECK(alg->closure_residual() < 1e-12);
}

TEST_CASE("bi-invariant Ricci on simple and abelian summands") {
  auto so5 = standard_basis<double>(Family::SO, 5);
  CHECK((ricci_biinvariant(*so5) - 0.75 * MatrixXd::Identity(10, 10)).norm() < 1e-13);
  auto su3 = standard_basis<Complex>(Family::SU, 3);
  CHECK((ricci_biinvariant(*su3) - 1.5 * MatrixXd::Identity(8, 8)).norm() < 1e-13);
  auto prod = make_direct_sum<double>({{Family::SO, 5}, {Family::Abelian, 2}});
  const MatrixXd r = ricci_biinvariant(*prod);
  CHECK(r.bottomRows(2).norm() == 0.0);
  CHECK(r.rightCols(2).norm() == 0.0);
  // scaling the form by c scales Ric (a bilinear form in an orthonormal basis) by 1/c
  auto so5s = standard_basis<double>(Family::SO, 5, 2.0);
  CHECK((ricci_biinvariant(*so5s) - 0.375 * MatrixXd::Identity(10, 10)).norm() < 1e-13);
}

TEST_CASE("bi-invariant Ricci does not depend on the orthonormal basis") {
  std::mt19937_64 rng(5);
  auto alg = make_direct_sum<double>({{Family::SO, 4}, {Family::SO, 3, 3.0}, {Family::Abelian, 1}});
  const int d = alg->dim();
  const MatrixXd o = random_rotation(d, rng);
  // structure constants in the rotated basis F_i = sum_j o(j,i) E_j
  MatrixXd rotated = MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    MatrixXd adf = MatrixXd::Zero(d, d);
    for (int j = 0; j < d; ++j) adf += o(j, i) * alg->ad(j);
    adf = o.transpose() * adf * o;
    rotated -= 0.25 * adf * adf;
  }
  CHECK((rotated - o.transpose() * ricci_biinvariant(*alg) * o).norm() < 1e-12);
}

TEST_CASE("torus validation") {
  auto so4 = standard_basis<double>(Family::SO, 4);
  MatrixXd a = MatrixXd::Zero(4, 4), b = MatrixXd::Zero(4, 4);
  a(0, 1) = 1, a(1, 0) = -1;
  b(1, 2) = 1, b(2, 1) = -1;
  CHECK_THROWS_AS(make_torus<double>(so4, {a / std::sqrt(2.0), b / std::sqrt(2.0)}), DomainError);
  CHECK_THROWS_AS(make_torus<double>(so4, {a}), DomainError);
  MatrixXd c = MatrixXd::Zero(4, 4);
  c(2, 3) = 1, c(3, 2) = -1;
  auto t = make_torus<double>(so4, {a / std::sqrt(2.0), c / std::sqrt(2.0)});
  CHECK(t.rank() == 2);
  CHECK((t.dual_lattice - MatrixXd::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("centralizer of a central torus is everything") {
  auto prod = make_direct_sum<double>({{Family::SO, 5}, {Family::Abelian, 2}});
  auto h = abelian_torus<double>(prod);
  CHECK(h.rank() == 2);
  const auto split = centralizer_split(*prod, h);
  CHECK(split.zh.cols() == prod->dim());
  CHECK(split.u.cols() == 0);
}

TEST_CASE("centralizer of a torus in the so(4) corner of so(9)") {
  auto so9 = standard_basis<double>(Family::SO, 9);
  std::vector<MatrixXd> z;
  for (int p = 0; p < 2; ++p) {
    MatrixXd e = MatrixXd::Zero(9, 9);
    e(5 + 2 * p, 6 + 2 * p) = 1.0 / std::sqrt(2.0);
    e(6 + 2 * p, 5 + 2 * p) = -1.0 / std::sqrt(2.0);
    z.push_back(e);
  }
  auto h = make_torus<double>(so9, z);
  const auto split = centralizer_split(*so9, h);
  // so(5) + the two torus directions
  CHECK(split.zh.cols() == 12);
  CHECK(split.zh.cols() + split.u.cols() == 36);
  CHECK((split.zh.transpose() * split.u).norm() < 1e-12);
  const MatrixXd proj = split.zh * split.zh.transpose();
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 5; ++rep) {
    MatrixXd x = MatrixXd::Zero(9, 9);
    x.topLeftCorner(5, 5) = random_skew(5, rng);
    const VectorXd c = so9->coords(x);
    CHECK((proj * c - c).norm() < 1e-12 * c.norm());
  }
  for (int k = 0; k < split.zh.cols(); ++k) {
    const MatrixXd x = so9->element(split.zh.col(k));
    for (const auto& zi : z) CHECK(commutator<double>(x, zi).norm() < 1e-12);
  }
}

TEST_CASE("near-degenerate torus makes the rank decision fail loudly") {
  auto so4 = standard_basis<double>(Family::SO, 4);
  MatrixXd z = MatrixXd::Zero(4, 4);
  z(0, 1) = 1.0, z(1, 0) = -1.0;
  z(2, 3) = 1.0 + 1e-9, z(3, 2) = -(1.0 + 1e-9);
  z /= std::sqrt(-(z * z).trace());
  auto h = make_torus<double>(so4, {z});
  try {
    centralizer_split(*so4, h);
    FAIL("expected a rank decision error");
  } catch (const RankDecisionError& e) {
    CHECK(e.singular_values().size() == 6);
  }
}
