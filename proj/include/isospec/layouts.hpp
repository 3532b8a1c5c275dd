#pragma once

// Named configurations g, h, t -> lambda(t) used by the workbench and the acceptance suite.

#include <functional>
#include <string>

#include "isospec/leftinv_geom.hpp"

namespace isospec {

enum class LayoutKind {
  Product,   // g = k + h with h the abelian summand (h central)
  Embedded,  // h is a torus inside a simple g
};

template <typename Scalar>
struct Layout {
  std::string key;
  LayoutKind kind = LayoutKind::Product;
  AlgebraPtr<Scalar> algebra;
  TorusSubalgebra<Scalar> torus;
  double t_min = 0.0;
  double t_max = 0.0;
  std::function<JMap<Scalar>(double)> j_at;  // standalone target for product layouts
  std::function<LambdaMap<Scalar>(double)> lambda_at;

  bool contains(double t) const { return t >= t_min - 1e-12 && t <= t_max + 1e-12; }
};

/// so(5) + R^2 with the explicit so(5) family.
Layout<double> so5_product_layout();
/// su(3) + R^2 with the explicit su(3) family.
Layout<Complex> su3_product_layout();
/// so(8) (scale 1/2) with the su(3) family embedded and the two-dimensional torus.
Layout<double> so8_layout();
/// so(5) family in the leading block of so(9), torus in the so(4) corner.
Layout<double> so9_embedded_layout();
/// su(3) family in the leading block of su(6), torus in the su(3) corner.
Layout<Complex> su6_embedded_layout();
/// su(3) + R^2 with j(t) the flow line of Y through the dq = 240 example, t in [0, 0.2] (RK4, dt = 2e-5).
Layout<Complex> flow_product_layout();

/// The dq = 240 starting point: j_1 = diag(i, 2i, -3i), j_2 real skew with ones above the diagonal.
JMap<Complex> flow_seed();

bool is_real_layout(const std::string& key);
bool is_known_layout(const std::string& key);

}  // namespace isospec
