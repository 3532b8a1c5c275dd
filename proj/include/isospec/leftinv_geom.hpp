#pragma once

// Left-invariant metrics g_lambda = (Id + lambda)^* g_0, their curvature, heat
// invariants and the conformal product construction on K x K x H.

#include <random>
#include <vector>

#include "isospec/iso_maps.hpp"

namespace isospec {

/// lambda: g -> h, lambda(E_i) = sum_s coeffs(i, s) Z_s. Column s holds the coordinates of j_{Z_s}.
template <typename Scalar>
struct LambdaMap {
  AlgebraPtr<Scalar> algebra;
  TorusSubalgebra<Scalar> torus;
  MatrixXd coeffs;  // d x r

  int dim() const { return algebra->dim(); }
  int rank() const { return torus.rank(); }
  /// lambda as an endomorphism of g (image in h).
  MatrixXd endomorphism() const { return torus.coords * coeffs.transpose(); }
  /// j = lambda^T as an endomorphism of g (zero on h^perp).
  MatrixXd transpose_map() const { return coeffs * torus.coords.transpose(); }
  std::vector<Mat<Scalar>> images() const;
};

/// Checks that every j_{Z_s} lies in z(h) and is orthogonal to h.
template <typename Scalar>
LambdaMap<Scalar> lambda_from_images(AlgebraPtr<Scalar> algebra, TorusSubalgebra<Scalar> torus,
                                     const std::vector<Mat<Scalar>>& images, double tol = 1e-10);

template <typename Scalar>
struct LeftInvariantMetric {
  LambdaMap<Scalar> lambda;
  MatrixXd frame;  // columns: coordinates of E_i - lambda(E_i)
  double volume = 1.0;

  int dim() const { return lambda.dim(); }
  /// Gram matrix of g_lambda in the original basis.
  MatrixXd gram() const;
  /// Coordinates in the frame of a vector given in the original basis.
  VectorXd frame_coords(const VectorXd& v) const;
};

template <typename Scalar>
LeftInvariantMetric<Scalar> metric_from_lambda(const LambdaMap<Scalar>& lambda, double volume = 1.0);

struct ConjugacyReport {
  bool pass = false;
  bool charpoly_only = false;      // no separable block found for a witness
  double charpoly_residual = 0.0;
  double witness_residual = 0.0;
  double commute_residual = 0.0;   // max ||[j_Z, Z_i]|| over both maps
};

/// Conjugacy of j_Z and j'_Z for Z on a grid x grid lattice in h.
template <typename Scalar>
ConjugacyReport verify_conjugacy(const LambdaMap<Scalar>& lambda, const LambdaMap<Scalar>& lambda_p,
                         int grid = 5, double tol = 1e-8);

/// Ric^lambda(E~_i, E~_k) from the closed form in terms of Ric^0 and ad_{Z_s}, ad_{j_s}.
template <typename Scalar>
MatrixXd ricci(const LeftInvariantMetric<Scalar>& metric);

/// 1/4 (sum_{i,k} tr(ad_{j_i}^2 ad_{j_k}^2) - the same for j').
template <typename Scalar>
double ricci_norm_diff_rhs(const LambdaMap<Scalar>& lambda, const LambdaMap<Scalar>& lambda_p);

/// Closed form of tr(ad_X^2 ad_Y^2) on so(n) (real X, Y) or su(n) (complex X, Y).
template <typename Scalar>
double ad_square_trace(Family family, const Mat<Scalar>& x, const Mat<Scalar>& y);

/// Levi-Civita data of a left-invariant metric in its orthonormal frame.
struct Curvature {
  std::vector<MatrixXd> structure;  // structure[a](c, b) = C^c_ab
  std::vector<MatrixXd> gamma;      // gamma[a](c, b) = Gamma^c_ab
  std::vector<MatrixXd> riemann;    // riemann[a*d+b](d', c) = <R(e_a, e_b) e_c, e_d'>
  MatrixXd ric;
  double scal = 0.0;
  double ric_norm_sq = 0.0;
  double riem_norm_sq = 0.0;

  const MatrixXd& r(int a, int b) const { return riemann[a * ric.rows() + b]; }
};

/// Structure constants of an orthonormal frame given as columns of `frame` with inverse map `to_frame`.
template <typename Scalar>
std::vector<MatrixXd> frame_structure_constants(const LieAlgebra<Scalar>& algebra, const MatrixXd& frame,
                                                const MatrixXd& to_frame);

Curvature curvature_from_structure(std::vector<MatrixXd> structure);

template <typename Scalar>
Curvature koszul_connection_and_curvature(const LeftInvariantMetric<Scalar>& metric);

struct CurvatureReport {
  double scal = 0.0;
  double ric_norm_sq = 0.0;
  double riem_norm_sq = 0.0;
  double a0 = 0.0, a1 = 0.0, a2_0 = 0.0, a2_1 = 0.0;
};

CurvatureReport heat_invariants(const Curvature& curvature, double volume);

template <typename Scalar>
CurvatureReport heat_invariants(const LeftInvariantMetric<Scalar>& metric);

/// (X, Y) -> lambda(X) + lambda'(Y) on k + k + h, for product layouts g = k + h with h the abelian part.
template <typename Scalar>
LambdaMap<Scalar> barred_lambda(const LambdaMap<Scalar>& lambda, const LambdaMap<Scalar>& lambda_p);

struct ConformalProfile {
  int m = 0;
  int dim_k = 0;
  int n_total = 0;     // N = dim(K x K x H)
  double c2 = 0.0;     // h = c^2 (-B)
  double mu = 0.0;     // Laplace eigenvalue of Re tr(x) on (K, h)
  double alpha = 0.0;  // scal of g_lambda-bar
  double beta = 0.0;
  double bound = 0.0;  // m k(m) / (8 dim K)
  bool bound_ok = false;
  double eps = 0.0;
  double tau_max = 0.0;
  int factor_index = 1;
};

template <typename Scalar>
struct ConformalExample {
  LeftInvariantMetric<Scalar> metric;  // on k + k + h
  ConformalProfile profile;
  int k_summand = 0;                   // summand index of the simple factor K

  /// tau at x in K.
  double tau(const Mat<Scalar>& x) const;
  /// ||d tau_i||^2 at a point whose factor-i coordinate is x.
  double dtau_norm_sq(const Mat<Scalar>& x) const;
  /// Conformal scalar curvature at (x, y, z); depends only on the factor-i coordinate.
  double scal(const Mat<Scalar>& x, const Mat<Scalar>& y) const;
};

template <typename Scalar>
ConformalExample<Scalar> conformal_scal_profile(const LeftInvariantMetric<Scalar>& metric_bar, double eps,
                                                int factor_index = 1);

/// Haar-distributed element of SO(m) (real) or SU(m) (complex).
template <typename Scalar>
Mat<Scalar> haar_sample(int m, std::mt19937_64& rng);

struct ConformalMaxResult {
  double sampled_max = 0.0;
  double refined_max = 0.0;
  double value_at_identity = 0.0;
  double refined_distance = 0.0;  // ||x* - Id|| on the active factor
  double other_distance = 0.0;    // ||y* - Id|| on the inactive factor
  int samples = 0;
};

/// Random sampling over K x K followed by gradient ascent on the active factor.
template <typename Scalar>
ConformalMaxResult conformal_max_search(const ConformalExample<Scalar>& ex, int samples, std::uint64_t seed);

}  // namespace isospec
