#pragma once

// Linear maps j: h -> g, explicit isospectral families, conjugator witnesses
// and the isospectral matrix flow.

#include <functional>
#include <optional>
#include <vector>

#include "isospec/lie_core.hpp"

namespace isospec {

template <typename Scalar>
struct JMap {
  AlgebraPtr<Scalar> target;
  /// Set when h lives inside the target (embedded layouts); empty for product layouts.
  std::optional<TorusSubalgebra<Scalar>> torus;
  std::vector<Mat<Scalar>> images;

  int rank() const { return static_cast<int>(images.size()); }
  /// j_Z for Z = sum_i z_i Z_i.
  Mat<Scalar> at(const VectorXd& z) const;
  /// Same images, scaled.
  JMap scaled(double alpha) const;
};

enum class FamilyKind { SO5Explicit, SU3Explicit, SO8Embedded, FlowGenerated, Custom };

template <typename Scalar>
struct IsospectralFamily {
  FamilyKind kind = FamilyKind::Custom;
  double t_min = 0.0;
  double t_max = 0.0;
  std::function<JMap<Scalar>(double)> evaluate;

  JMap<Scalar> operator()(double t) const;
};

template <typename Scalar>
struct ConjugacyWitness {
  Mat<Scalar> a;
  double residual = 0.0;        // ||A X A^-1 - X'||_F
  double unitarity = 0.0;       // ||A A^* - I||_F
};

// ---- invariants ----

/// det(lambda Id - X), highest degree first, real parts.
template <typename Scalar>
VectorXd charpoly_coeffs(const Mat<Scalar>& x);

/// Sum of tr(w) over all words w with a letters j_1 and b letters j_2. The value is
/// complex because odd-length words of skew-Hermitian matrices have imaginary traces.
template <typename Scalar>
Complex p_ab(const JMap<Scalar>& j, int a, int b, int word_cap = -1);

/// All p_ab with 1 <= a+b <= cap, ordered by (a+b, a).
template <typename Scalar>
std::vector<Complex> all_p_ab(const JMap<Scalar>& j, int cap);

struct PairCheck {
  bool isospectral = false;
  double charpoly_residual = 0.0;  // max over the grid, relative to max(1, |coeff|)
  double pab_residual = 0.0;
};

/// Charpoly comparison of s j_1 + u j_2 on a grid x grid lattice of [-1,1]^2, plus
/// p_ab comparison up to word length n.
template <typename Scalar>
PairCheck is_isospectral_pair(const JMap<Scalar>& j, const JMap<Scalar>& jp, int grid = 17,
                              double tol = 1e-9);

/// A with A X A^-1 = X'. Real inputs give A in O(m) (in SO(m) when X has a kernel),
/// complex inputs give A in SU(m).
template <typename Scalar>
ConjugacyWitness<Scalar> conjugator_witness(const Mat<Scalar>& x, const Mat<Scalar>& xp,
                                            double tol = 1e-8);

// ---- explicit families ----

inline constexpr double kSO5TMin = -0.6180339887498949;  // (1 - sqrt 5) / 2
inline constexpr double kSO5TMax = 0.3819660112501051;   // (3 - sqrt 5) / 2
inline constexpr double kSU3TMax = 0.7071067811865476;   // 1 / sqrt 2

JMap<double> family_so5(double t);
JMap<Complex> family_su3(double t);

/// X = A + iB  ->  [[A, -B], [B, A]].
MatrixXd embed_su_in_so(const MatrixXcd& x);

/// su(3) family pushed into so(8) (scale 1/2 form) with the torus Z_1 = J/sqrt3, Z_2 = E_87 - E_78.
JMap<double> family_so8(double t);

/// Images placed in the leading block of so(outer_n) / su(outer_n); torus is a maximal
/// torus of the next so(4) / su(3) block.
template <typename Scalar>
JMap<Scalar> embed_block(const JMap<Scalar>& j, Family outer_family, int outer_n);

IsospectralFamily<double> so5_family();
IsospectralFamily<Complex> su3_family();
IsospectralFamily<double> so8_family();

// ---- flow ----

/// ([j_1^e, j_2], 0). e must be odd so that j_1^e stays in the algebra.
template <typename Scalar>
std::vector<Mat<Scalar>> flow_field_Y(const JMap<Scalar>& j, int exponent = 5);

struct FlowOptions {
  int exponent = 5;
  double drift_budget = 1e-6;  // absolute bound on every |p_ab(t) - p_ab(0)| at t = T
  int max_halvings = 12;
  int word_cap = -1;           // default: matrix size
};

template <typename Scalar>
struct FlowResult {
  std::vector<double> times;
  std::vector<JMap<Scalar>> states;
  std::vector<double> q;        // tr(j_1^2 j_2^2) at each stored time
  double max_drift = 0.0;       // max over trajectory and (a,b)
  int rejected_steps = 0;
  int accepted_steps = 0;

  IsospectralFamily<Scalar> family(const FlowOptions& opts = {}) const;
};

/// RK4 for j' = Y(j) with nominal step dt. A step whose p_ab drift exceeds the pro-rated
/// budget is bisected; if that fails max_halvings times a DriftError is thrown.
template <typename Scalar>
FlowResult<Scalar> flow_integrate(const JMap<Scalar>& j0, double T, double dt,
                                  const FlowOptions& opts = {});

/// dq|_j(Y) for q = tr(j_1^2 j_2^2) and Y = ([j_1^5, j_2], 0).
template <typename Scalar>
double dq_along_Y(const JMap<Scalar>& j);

struct Discriminators {
  double q = 0.0;
  double norm4 = 0.0;
  std::vector<double> eigs;  // of j_1^2 + j_2^2, ascending
};

template <typename Scalar>
Discriminators discriminators(const JMap<Scalar>& j);

}  // namespace isospec
