#pragma once

// Concrete compact matrix Lie algebras: so(n), su(n), abelian summands and
// direct sums of these, with a basis orthonormal for a scaled -tr(XY) form.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "isospec/types.hpp"

namespace isospec {

enum class Family { SO, SU, Abelian };

std::string to_string(Family family);

/// Ratio k with tr(ad_X ad_Y) = k * tr(XY) on the simple summand.
int killing_ratio(Family family, int n);

struct SummandSpec {
  Family family;
  int n;               // matrix size for SO/SU, dimension for Abelian
  double scale = 1.0;  // multiplier on -tr(XY); abelian summands are Euclidean
};

/// One summand as realized inside the block-diagonal defining matrix.
struct Summand {
  Family family;
  int n;
  double scale;
  int matrix_offset;  // first row/col of the block
  int matrix_size;    // each abelian direction is its own so(2) block (real) or 1x1 block (complex)
  int first_basis;    // index of the first basis element of this summand
  int dim;
};

/// A compact matrix Lie algebra with an ordered orthonormal basis.
///
/// Elements are stored as block-diagonal matrices of size matrix_size(); coordinates
/// are taken with respect to basis() and the summand-wise scaled form
/// <X,Y> = sum_s scale_s * (-Re tr(X_s Y_s)). Structure constants are cached as the
/// real matrices ad(i) of ad_{E_i}. Instances are immutable once built.
template <typename Scalar>
class LieAlgebra {
 public:
  using Matrix = Mat<Scalar>;

  static LieAlgebra direct_sum(const std::vector<SummandSpec>& specs);

  int dim() const { return static_cast<int>(basis_.size()); }
  int matrix_size() const { return matrix_size_; }
  const std::vector<Summand>& summands() const { return summands_; }
  const Matrix& basis(int i) const { return basis_[i]; }
  const std::vector<Matrix>& basis() const { return basis_; }
  const MatrixXd& ad(int i) const { return ad_[i]; }

  double inner(const Matrix& x, const Matrix& y) const;
  double norm(const Matrix& x) const;

  /// Relative distance of x from the span of the basis.
  double span_residual(const Matrix& x) const;
  /// Coordinates in the orthonormal basis; throws DomainError if x is not in the span.
  VectorXd coords(const Matrix& x, double tol = 1e-9) const;
  Matrix element(const VectorXd& coords) const;

  MatrixXd ad_of(const VectorXd& x) const;
  VectorXd bracket(const VectorXd& x, const VectorXd& y) const;

  /// Restriction of x to one summand's diagonal block.
  Matrix block(const Matrix& x, int summand) const;
  /// Place a block-sized matrix into the given summand's block (zeros elsewhere).
  Matrix embed_block(const Matrix& b, int summand) const;

  /// Largest closure residual of basis brackets found at construction.
  double closure_residual() const { return closure_residual_; }

 private:
  LieAlgebra() = default;
  void finish();

  std::vector<Summand> summands_;
  int matrix_size_ = 0;
  std::vector<Matrix> basis_;
  std::vector<MatrixXd> ad_;
  double closure_residual_ = 0.0;
};

using RealLieAlgebra = LieAlgebra<double>;
using ComplexLieAlgebra = LieAlgebra<Complex>;

template <typename Scalar>
using AlgebraPtr = std::shared_ptr<const LieAlgebra<Scalar>>;

/// so(n) (real skew) or su(n) (complex skew-Hermitian traceless) or R^n, orthonormal
/// under scale * (-tr XY). SO requires a real scalar type, SU a complex one.
template <typename Scalar>
AlgebraPtr<Scalar> standard_basis(Family family, int n, double scale = 1.0);

template <typename Scalar>
AlgebraPtr<Scalar> make_direct_sum(const std::vector<SummandSpec>& specs);

/// Matrix of ad_X = [X, .] in the algebra's basis.
template <typename Scalar>
MatrixXd ad_matrix(const LieAlgebra<Scalar>& algebra, const Mat<Scalar>& x);

/// Ric of the bi-invariant metric, -1/4 sum_i ad_{E_i}^2, as a bilinear form in the basis.
template <typename Scalar>
MatrixXd ricci_biinvariant(const LieAlgebra<Scalar>& algebra);

/// Killing form tr(ad_X ad_Y) on basis pairs.
template <typename Scalar>
MatrixXd killing_form(const LieAlgebra<Scalar>& algebra);

/// r commuting, orthonormal elements Z_1..Z_r spanning a torus algebra.
template <typename Scalar>
struct TorusSubalgebra {
  AlgebraPtr<Scalar> parent;
  std::vector<Mat<Scalar>> elements;
  MatrixXd coords;        // d x r, columns are the Z_i in the parent basis
  MatrixXd dual_lattice;  // r x r, rows are dual covectors (identity: L = Z-span of Z_i)

  int rank() const { return static_cast<int>(elements.size()); }
};

/// Validates commutation and orthonormality, then builds the torus.
template <typename Scalar>
TorusSubalgebra<Scalar> make_torus(AlgebraPtr<Scalar> parent, std::vector<Mat<Scalar>> elements);

/// Torus spanned by all abelian directions of the parent, in basis order.
template <typename Scalar>
TorusSubalgebra<Scalar> abelian_torus(AlgebraPtr<Scalar> parent);

struct CentralizerSplit {
  MatrixXd zh;  // d x a, orthonormal basis of z(h)
  MatrixXd u;   // d x (d-a), orthonormal basis of the complement
  std::vector<double> singular_values;
};

inline constexpr double kRankCutoff = 1e-9;

/// z(h) = common kernel of the ad_{Z_i}. Throws RankDecisionError when a singular value
/// falls within two decades of the cutoff on either side.
template <typename Scalar>
CentralizerSplit centralizer_split(const LieAlgebra<Scalar>& algebra,
                                   const TorusSubalgebra<Scalar>& torus);

}  // namespace isospec
