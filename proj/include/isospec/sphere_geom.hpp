#pragma once

// Circle-bundle style metrics on S^{m-1} x T^r built from h-valued 1-forms on the sphere:
// linear forms from j: h -> so(m), quadratic forms on S^2 from c: R^2 -> S_0(R^3).

#include <array>
#include <functional>
#include <random>
#include <vector>

#include "isospec/types.hpp"

namespace isospec {

using Eigen::Matrix3d;
using Eigen::Vector2d;
using Eigen::Vector3d;

/// Element of Sym^2(R^3)^* (x) R^3 stored as q[i][j][k], symmetric in (j, k).
/// The canonically induced scalar product is the plain sum over all 27 components.
struct SymTensor3 {
  Eigen::Matrix<double, 27, 1> v = Eigen::Matrix<double, 27, 1>::Zero();

  static constexpr int index(int i, int j, int k) { return 9 * i + 3 * j + k; }
  double& operator()(int i, int j, int k) { return v(index(i, j, k)); }
  double operator()(int i, int j, int k) const { return v(index(i, j, k)); }

  /// q(X . Y), polarized.
  Vector3d apply(const Vector3d& x, const Vector3d& y) const;
  double dot(const SymTensor3& o) const { return v.dot(o.v); }
  double norm() const { return v.norm(); }
  double symmetry_residual() const;
};

/// 27 x 27 matrix of the projection onto Sym^3(R^3) (full symmetrization).
const Eigen::Matrix<double, 27, 27>& projection_matrix();
SymTensor3 projection_P(const SymTensor3& q);
SymTensor3 projection_Pperp(const SymTensor3& q);

/// Phi(b): X . X -> bX x X. Throws DomainError for tr(b) != 0.
SymTensor3 phi_map(const Matrix3d& b);

/// O(3) action: (A q)(X . Y) = A q(A^-1 X . A^-1 Y).
SymTensor3 act(const Matrix3d& a, const SymTensor3& q);

/// c: R^2 -> S_0(R^3), given by its values on the standard basis.
struct SphereQuadMap {
  Matrix3d c1 = Matrix3d::Zero();
  Matrix3d c2 = Matrix3d::Zero();

  /// Validates symmetry and zero trace to 1e-12.
  static SphereQuadMap make(const Matrix3d& c1, const Matrix3d& c2);
  Matrix3d at(const Vector2d& z) const { return z(0) * c1 + z(1) * c2; }
  const Matrix3d& operator[](int s) const { return s == 0 ? c1 : c2; }
};

/// The explicit pair: c1 = c1' = diag(-1, 0, 1), c2 with ones next to the diagonal, c2' = sqrt2 (E13 + E31).
SphereQuadMap quad_pair_c();
SphereQuadMap quad_pair_cprime();

struct CPairCheck {
  bool cond1 = false;             // s c1 + u c2 and s c1' + u c2' share charpoly on the grid
  double charpoly_residual = 0.0;
  bool normal_form = false;       // c1 = c1' = diag(-1,0,1), c2 and c2' with zero diagonal
  Vector3d eq_values_c = Vector3d::Zero();   // (b12^2+b13^2+b23^2, b23^2-b12^2, b12 b13 b23)
  Vector3d eq_values_cp = Vector3d::Zero();
  double eq_residual = 0.0;
  double disc_c = 0.0;            // tr(c1^2 c2^2)
  double disc_cp = 0.0;
  bool not_equivalent = false;    // normal form, cond1 and different discriminators
};

CPairCheck check_c_pair(const SphereQuadMap& c, const SphereQuadMap& cp, int grid = 17, double tol = 1e-9);

/// (tr(c1^2 c2^2), tr(c1'^2 c2'^2)).
std::pair<double, double> quad_discriminator(const SphereQuadMap& c, const SphereQuadMap& cp);

/// Closed-form scalar curvature of S^2 x T^2 with lambda_Z(X) = <c_Z p x p, X>.
double scal_s2t2(const SphereQuadMap& c, const Vector3d& p);

/// Ambient coefficient fields of an h-valued 1-form: p -> (v_1(p), ..., v_r(p)), lambda_s|_p(X) = <v_s(p), X>.
using FormProvider = std::function<std::vector<VectorXd>(const VectorXd&)>;

FormProvider quadratic_form(const SphereQuadMap& c);
/// lambda_Z(X) = -1/2 <j_Z p, X>.
FormProvider linear_form(const std::vector<MatrixXd>& j);

/// Orthonormal basis of T_p S^{m-1} (columns) by Gram-Schmidt against e_1, ..., e_m in order.
MatrixXd tangent_frame(const VectorXd& p);

/// sum_s ||d lambda_s|_p||^2 with the full-sum tensor norm, d lambda by central differences.
double dlambda_norm_sq(const FormProvider& form, const VectorXd& p, double h = 1e-4);

/// scal_h(p) - 1/4 ||d lambda|_p||^2.
double scal_from_form(const FormProvider& form, double base_scal, const VectorXd& p, double h = 1e-4);

/// Round S^{m-1}: (m-1)(m-2).
inline double round_sphere_scal(int m) { return double(m - 1) * (m - 2); }

/// Closed form for linear forms: (m-1)(m-2) - 1/4 sum_s (||j_s||^2 - 2 |j_s p|^2).
double linear_form_scal(const std::vector<MatrixXd>& j, const VectorXd& p);

/// Critical values of linear_form_scal, ascending: one per eigenvalue of -(sum_s j_s^2).
std::vector<double> linear_form_critical_values(const std::vector<MatrixXd>& j);

/// Quasi-uniform points on S^2.
std::vector<Vector3d> fibonacci_sphere(int n);

struct PreimageCluster {
  std::vector<Vector3d> points;
  Vector3d centroid = Vector3d::Zero();
  int dimension = 0;
};

struct MaxPreimage {
  double max_scal = 0.0;
  double spacing = 0.0;
  int samples = 0;
  std::vector<PreimageCluster> clusters;

  std::vector<int> dimensions() const;
};

/// Sample lattice of the given spacing, local refinement towards the max, single-linkage clusters,
/// dimension by local PCA with a 10% singular value cutoff.
MaxPreimage max_scal_preimage(const SphereQuadMap& c, double spacing = 0.025, double band = 1e-6);

struct QuadratureRuleS2 {
  std::vector<Vector3d> nodes;
  std::vector<double> weights;
  int exactness_degree = 0;
};

/// Gauss-Legendre in cos(theta) times the trapezoid rule in azimuth, exact up to `degree`.
QuadratureRuleS2 quadrature_rule(int degree);

/// Exact integral of x^a y^b z^c over S^2.
double sphere_monomial_integral(int a, int b, int c);

/// int_{S^2} scal^k for k = 1..k_max (torus volume factored out).
std::vector<double> scal_moments(const SphereQuadMap& c, int k_max, const QuadratureRuleS2& rule);

struct ScalRange {
  double min = 0.0;
  double max = 0.0;
};

/// Sampled extrema of scal_s2t2, polished by projected gradient steps.
ScalRange scal_range(const SphereQuadMap& c, int samples = 20000);

/// Columns: c_s p x p.
Eigen::Matrix<double, 3, 2> lambda_coefficients(const SphereQuadMap& c, const Vector3d& p);

struct TangentS2T2 {
  Vector3d base = Vector3d::Zero();
  Vector2d fiber = Vector2d::Zero();
};

/// X - lambda_1(X) Z_1 - lambda_2(X) Z_2.
TangentS2T2 horizontal_vector(const SphereQuadMap& c, const Vector3d& p, const Vector3d& x);

/// g_lambda((X, z), (Y, w)) = <X, Y> + <lambda(X) + z, lambda(Y) + w>.
double g_lambda(const SphereQuadMap& c, const Vector3d& p, const TangentS2T2& a, const TangentS2T2& b);

/// A in SO(3) with A c A^-1 = c' for symmetric c, c'. Throws NotConjugateError on spectrum mismatch.
Matrix3d symmetric_conjugator(const Matrix3d& c, const Matrix3d& cp, double tol = 1e-10);

/// max |lambda'_Z|_p(X) - lambda_Z|_{A^-1 p}(A^-1 X)| over sampled (p, X) for linear forms.
/// Requires A orthogonal with A j_Z A^-1 = j'_Z.
double sphere_form_conjugation_check(const std::vector<MatrixXd>& j, const std::vector<MatrixXd>& jp,
                                     const VectorXd& z, const MatrixXd& a, int samples = 200,
                                     std::uint64_t seed = 11);

/// Quadratic analogue with q_Z = Phi(c_Z).
double sphere_form_conjugation_check(const SphereQuadMap& c, const SphereQuadMap& cp, const Vector2d& z,
                                     const Matrix3d& a, int samples = 200, std::uint64_t seed = 11);

/// Summation in a fixed binary tree order.
double pairwise_sum(const std::vector<double>& v);

}  // namespace isospec
