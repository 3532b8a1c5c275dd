#include "isospec/layouts.hpp"

#include <memory>
#include <mutex>

namespace isospec {

namespace {

template <typename Scalar>
Layout<Scalar> product_layout(const std::string& key, Family family, int n, IsospectralFamily<Scalar> fam) {
  Layout<Scalar> lay;
  lay.key = key;
  lay.kind = LayoutKind::Product;
  lay.algebra = make_direct_sum<Scalar>({{family, n}, {Family::Abelian, 2}});
  lay.torus = abelian_torus<Scalar>(lay.algebra);
  lay.t_min = fam.t_min;
  lay.t_max = fam.t_max;
  lay.j_at = fam.evaluate;
  auto alg = lay.algebra;
  auto torus = lay.torus;
  auto eval = fam.evaluate;
  lay.lambda_at = [alg, torus, eval](double t) {
    const auto j = eval(t);
    std::vector<Mat<Scalar>> imgs;
    for (const auto& x : j.images) imgs.push_back(alg->embed_block(x, 0));
    return lambda_from_images<Scalar>(alg, torus, imgs);
  };
  return lay;
}

template <typename Scalar>
Layout<Scalar> embedded_layout(const std::string& key, IsospectralFamily<Scalar> fam,
                               std::function<JMap<Scalar>(double)> embed) {
  Layout<Scalar> lay;
  lay.key = key;
  lay.kind = LayoutKind::Embedded;
  const auto j0 = embed(0.0);
  lay.algebra = j0.target;
  lay.torus = *j0.torus;
  lay.t_min = fam.t_min;
  lay.t_max = fam.t_max;
  lay.j_at = embed;
  auto alg = lay.algebra;
  auto torus = lay.torus;
  lay.lambda_at = [alg, torus, embed](double t) {
    return lambda_from_images<Scalar>(alg, torus, embed(t).images);
  };
  return lay;
}

}  // namespace

JMap<Complex> flow_seed() {
  const Complex I(0.0, 1.0);
  MatrixXcd j1 = MatrixXcd::Zero(3, 3);
  j1(0, 0) = I;
  j1(1, 1) = 2.0 * I;
  j1(2, 2) = -3.0 * I;
  MatrixXcd j2(3, 3);
  j2 << 0, 1, 1, -1, 0, 1, -1, -1, 0;
  return JMap<Complex>{standard_basis<Complex>(Family::SU, 3), std::nullopt, {j1, j2}};
}

Layout<double> so5_product_layout() { return product_layout<double>("so5", Family::SO, 5, so5_family()); }

Layout<Complex> su3_product_layout() { return product_layout<Complex>("su3", Family::SU, 3, su3_family()); }

Layout<double> so8_layout() { return embedded_layout<double>("so8", so8_family(), family_so8); }

Layout<double> so9_embedded_layout() {
  return embedded_layout<double>("so9-embedded", so5_family(),
                                 [](double t) { return embed_block(family_so5(t), Family::SO, 9); });
}

Layout<Complex> su6_embedded_layout() {
  return embedded_layout<Complex>("su6-embedded", su3_family(),
                                  [](double t) { return embed_block(family_su3(t), Family::SU, 6); });
}

Layout<Complex> flow_product_layout() {
  static std::once_flag once;
  static std::shared_ptr<IsospectralFamily<Complex>> fam;
  std::call_once(once, [] {
    // finer than the FLOW default so that the family is isospectral to ~1e-12 rather than to the drift budget
    const auto run = flow_integrate(flow_seed(), 0.2, 2e-5);
    fam = std::make_shared<IsospectralFamily<Complex>>(run.family());
  });
  return product_layout<Complex>("flow", Family::SU, 3, *fam);
}

bool is_real_layout(const std::string& key) {
  return key == "so5" || key == "so8" || key == "so9-embedded";
}

bool is_known_layout(const std::string& key) {
  return is_real_layout(key) || key == "su3" || key == "su6-embedded" || key == "flow";
}

}  // namespace isospec
