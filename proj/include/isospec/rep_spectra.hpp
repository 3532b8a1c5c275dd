#pragma once

// Laplacians of left-invariant metrics restricted to finite-dimensional representation blocks:
// tensor powers of the defining representation, twisted by torus characters on product layouts.

#include <string>
#include <vector>

#include "isospec/layouts.hpp"

namespace isospec {

inline constexpr int kTensorCap = 3;

/// Leibniz-rule action of x on the k-th tensor power of C^n (n^k x n^k). k = 0 gives the 1 x 1 zero matrix.
template <typename Scalar>
MatrixXcd tensor_rep(const Mat<Scalar>& x, int k, int cap = kTensorCap);

struct BlockSpec {
  int k = 1;
  std::vector<int> mu;  // character on the torus; ignored for embedded layouts

  std::string key() const;
};

/// Parses "k=2,mu=1:0" style keys back into a BlockSpec.
BlockSpec parse_block_key(const std::string& key);

template <typename Scalar>
struct RepBlock {
  BlockSpec spec;
  AlgebraPtr<Scalar> algebra;
  TorusSubalgebra<Scalar> torus;
  LayoutKind kind = LayoutKind::Product;
  int dim = 1;

  /// dPi of the algebra element with the given coordinates.
  MatrixXcd generator(const VectorXd& coords) const;
};

template <typename Scalar>
RepBlock<Scalar> make_block(const Layout<Scalar>& layout, const BlockSpec& spec);

/// -sum_i dPi(E~_i)^2 over the g_lambda-orthonormal frame.
template <typename Scalar>
MatrixXcd block_laplacian(const LeftInvariantMetric<Scalar>& metric, const RepBlock<Scalar>& block);

struct SpectrumReport {
  std::string block_key;
  double t = 0.0;
  VectorXd eigenvalues;                              // ascending
  std::vector<std::pair<double, int>> multiplicities;  // clustered at 1e-7
  double hermitian_residual = 0.0;
};

SpectrumReport spectrum_of(const MatrixXcd& op, const std::string& key, double t, double cluster_tol = 1e-7);

struct BlockComparison {
  std::string block_key;
  double max_deviation = 0.0;
  double worst_t0 = 0.0, worst_t1 = 0.0;
  double min_eigenvalue = 0.0;
  std::vector<SpectrumReport> spectra;  // one per t, in input order
};

struct SpectraComparison {
  bool conjugacy_ok = false;
  bool pass = false;
  double max_deviation = 0.0;
  std::vector<BlockComparison> blocks;  // sorted by block key
};

/// Spectra of every block at every t against the first t. Blocks and t samples are independent tasks.
template <typename Scalar>
SpectraComparison spectra_equal_along_family(const Layout<Scalar>& layout, const std::vector<BlockSpec>& blocks,
                                             const std::vector<double>& t_samples, double tol = 1e-8,
                                             int jobs = 1);

struct TwistedLaplacianCheck {
  double residual = 0.0;         // ||Delta_lambda - (Delta_0 + 4 pi i dPi(Y) + 4 pi^2 |Y|^2)||_F
  double y_norm = 0.0;           // |Y_mu(lambda)|
  double commute_residual = 0.0; // max ||[Y, Z_s]||
};

/// Y_mu(lambda) = lambda^T(Z_mu); product layouts only.
template <typename Scalar>
TwistedLaplacianCheck twisted_laplacian_residual(const LambdaMap<Scalar>& lambda, const RepBlock<Scalar>& block);

/// ||M - (tr M / n) Id||_F.
double off_scalar_residual(const MatrixXcd& m);

}  // namespace isospec
