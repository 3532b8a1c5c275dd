#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

namespace isospec {

using Complex = std::complex<double>;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};
template <typename T>
inline constexpr bool is_complex_v = is_complex<T>::value;

/// Invalid sizes, unknown keys, tolerances out of range, word lengths above cap.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical rank decision could not be made at the fixed cutoff.
class RankDecisionError : public std::runtime_error {
 public:
  RankDecisionError(const std::string& what, std::vector<double> singular_values)
      : std::runtime_error(what), singular_values_(std::move(singular_values)) {}
  const std::vector<double>& singular_values() const { return singular_values_; }

 private:
  std::vector<double> singular_values_;
};

class NotConjugateError : public std::runtime_error {
 public:
  NotConjugateError(const std::string& what, double mismatch)
      : std::runtime_error(what), mismatch_(mismatch) {}
  double mismatch() const { return mismatch_; }

 private:
  double mismatch_;
};

/// Raised by the flow integrator when the conserved invariants move too far.
class DriftError : public std::runtime_error {
 public:
  DriftError(const std::string& what, double drift) : std::runtime_error(what), drift_(drift) {}
  double drift() const { return drift_; }

 private:
  double drift_;
};

template <typename Scalar>
inline double real_part(const Scalar& s) {
  if constexpr (is_complex_v<Scalar>) {
    return s.real();
  } else {
    return s;
  }
}

/// Real part of tr(A B) without forming the product.
template <typename DerivedA, typename DerivedB>
double trace_product(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  return real_part(a.cwiseProduct(b.transpose()).sum());
}

template <typename Scalar>
Mat<Scalar> commutator(const Mat<Scalar>& a, const Mat<Scalar>& b) {
  return a * b - b * a;
}

}  // namespace isospec
