#include "isospec/lie_core.hpp"

#include <algorithm>
#include <cmath>

namespace isospec {

std::string to_string(Family family) {
  switch (family) {
    case Family::SO: return "so";
    case Family::SU: return "su";
    case Family::Abelian: return "abelian";
  }
  return "?";
}

int killing_ratio(Family family, int n) {
  switch (family) {
    case Family::SO: return n - 2;
    case Family::SU: return 2 * n;
    case Family::Abelian: return 0;
  }
  return 0;
}

namespace {

template <typename Scalar>
std::vector<Mat<Scalar>> raw_basis(Family family, int n) {
  std::vector<Mat<Scalar>> out;
  if (family == Family::SO) {
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        Mat<Scalar> e = Mat<Scalar>::Zero(n, n);
        e(a, b) = Scalar(1);
        e(b, a) = Scalar(-1);
        out.push_back(e);
      }
  } else if (family == Family::SU) {
    if constexpr (is_complex_v<Scalar>) {
      const Complex I(0.0, 1.0);
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
          Mat<Scalar> e = Mat<Scalar>::Zero(n, n);
          e(a, b) = 1.0;
          e(b, a) = -1.0;
          out.push_back(e);
          Mat<Scalar> f = Mat<Scalar>::Zero(n, n);
          f(a, b) = I;
          f(b, a) = I;
          out.push_back(f);
        }
      // i * diag(1,..,1,-k,0,..) has squared norm k(k+1)
      for (int k = 1; k < n; ++k) {
        Mat<Scalar> h = Mat<Scalar>::Zero(n, n);
        for (int a = 0; a < k; ++a) h(a, a) = I;
        h(k, k) = -double(k) * I;
        out.push_back(h);
      }
    }
  }
  return out;
}

}  // namespace

template <typename Scalar>
LieAlgebra<Scalar> LieAlgebra<Scalar>::direct_sum(const std::vector<SummandSpec>& specs) {
  if (specs.empty()) throw ConfigError("direct sum needs at least one summand");
  LieAlgebra alg;
  int offset = 0;
  for (const auto& spec : specs) {
    if (!(spec.scale > 0.0) || !std::isfinite(spec.scale))
      throw ConfigError("inner product scale must be positive");
    if (spec.family == Family::SU && !is_complex_v<Scalar>)
      throw ConfigError("su(n) needs complex scalars");
    if (spec.family != Family::Abelian && spec.n < 2)
      throw ConfigError(to_string(spec.family) + "(n) needs n >= 2");
    if (spec.family == Family::Abelian && spec.n < 1)
      throw ConfigError("abelian summand needs dimension >= 1");

    if (spec.family == Family::Abelian) {
      // each direction gets its own so(2) block (real) or 1x1 i*x block (complex)
      const int bs = is_complex_v<Scalar> ? 1 : 2;
      const double base = is_complex_v<Scalar> ? 1.0 : 0.5;
      for (int i = 0; i < spec.n; ++i) {
        Mat<Scalar> e = Mat<Scalar>::Zero(bs, bs);
        if constexpr (is_complex_v<Scalar>) {
          e(0, 0) = Complex(0.0, 1.0);
        } else {
          e(0, 1) = 1.0;
          e(1, 0) = -1.0;
        }
        Summand s{Family::Abelian, 1, base * spec.scale, offset, bs, alg.dim(), 1};
        alg.summands_.push_back(s);
        alg.basis_.push_back(e / std::sqrt(spec.scale));
        offset += bs;
      }
      continue;
    }

    auto raw = raw_basis<Scalar>(spec.family, spec.n);
    Summand s{spec.family, spec.n, spec.scale, offset, spec.n, alg.dim(), static_cast<int>(raw.size())};
    alg.summands_.push_back(s);
    for (auto& e : raw) {
      const double nrm2 = -real_part((e * e).trace());
      alg.basis_.push_back(e / std::sqrt(spec.scale * nrm2));
    }
    offset += spec.n;
  }
  alg.matrix_size_ = offset;

  // place block-sized basis elements into the full block-diagonal matrix
  for (const auto& s : alg.summands_) {
    for (int i = s.first_basis; i < s.first_basis + s.dim; ++i) {
      Mat<Scalar> full = Mat<Scalar>::Zero(offset, offset);
      full.block(s.matrix_offset, s.matrix_offset, s.matrix_size, s.matrix_size) = alg.basis_[i];
      alg.basis_[i] = full;
    }
  }
  alg.finish();
  return alg;
}

template <typename Scalar>
void LieAlgebra<Scalar>::finish() {
  const int d = dim();
  ad_.assign(d, MatrixXd::Zero(d, d));
  closure_residual_ = 0.0;
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      Matrix br = commutator(basis_[i], basis_[j]);
      if (br.norm() == 0.0) continue;
      VectorXd c(d);
      for (int k = 0; k < d; ++k) c(k) = inner(br, basis_[k]);
      closure_residual_ = std::max(closure_residual_, (br - element(c)).norm());
      ad_[i].col(j) = c;
      ad_[j].col(i) = -c;
    }
  }
  if (closure_residual_ > 1e-12) throw DomainError("basis is not closed under the bracket");
}

template <typename Scalar>
double LieAlgebra<Scalar>::inner(const Matrix& x, const Matrix& y) const {
  double acc = 0.0;
  for (const auto& s : summands_) {
    const int o = s.matrix_offset, m = s.matrix_size;
    acc += -s.scale * trace_product(x.block(o, o, m, m), y.block(o, o, m, m));
  }
  return acc;
}

template <typename Scalar>
double LieAlgebra<Scalar>::norm(const Matrix& x) const {
  return std::sqrt(std::max(0.0, inner(x, x)));
}

template <typename Scalar>
double LieAlgebra<Scalar>::span_residual(const Matrix& x) const {
  if (x.rows() != matrix_size_ || x.cols() != matrix_size_) return INFINITY;
  const double nx = x.norm();
  if (nx == 0.0) return 0.0;
  VectorXd c(dim());
  for (int k = 0; k < dim(); ++k) c(k) = inner(x, basis_[k]);
  return (x - element(c)).norm() / nx;
}

template <typename Scalar>
VectorXd LieAlgebra<Scalar>::coords(const Matrix& x, double tol) const {
  if (x.rows() != matrix_size_ || x.cols() != matrix_size_)
    throw DomainError("matrix size does not match the algebra");
  VectorXd c(dim());
  for (int k = 0; k < dim(); ++k) c(k) = inner(x, basis_[k]);
  const double nx = x.norm();
  if (nx > 0.0 && (x - element(c)).norm() > tol * nx)
    throw DomainError("element is not in the span of the basis");
  return c;
}

template <typename Scalar>
typename LieAlgebra<Scalar>::Matrix LieAlgebra<Scalar>::element(const VectorXd& c) const {
  Matrix out = Matrix::Zero(matrix_size_, matrix_size_);
  for (int k = 0; k < dim(); ++k)
    if (c(k) != 0.0) out += c(k) * basis_[k];
  return out;
}

template <typename Scalar>
MatrixXd LieAlgebra<Scalar>::ad_of(const VectorXd& x) const {
  MatrixXd out = MatrixXd::Zero(dim(), dim());
  for (int i = 0; i < dim(); ++i)
    if (x(i) != 0.0) out += x(i) * ad_[i];
  return out;
}

template <typename Scalar>
VectorXd LieAlgebra<Scalar>::bracket(const VectorXd& x, const VectorXd& y) const {
  return ad_of(x) * y;
}

template <typename Scalar>
typename LieAlgebra<Scalar>::Matrix LieAlgebra<Scalar>::block(const Matrix& x, int summand) const {
  const auto& s = summands_.at(summand);
  return x.block(s.matrix_offset, s.matrix_offset, s.matrix_size, s.matrix_size);
}

template <typename Scalar>
typename LieAlgebra<Scalar>::Matrix LieAlgebra<Scalar>::embed_block(const Matrix& b, int summand) const {
  const auto& s = summands_.at(summand);
  if (b.rows() != s.matrix_size || b.cols() != s.matrix_size)
    throw ConfigError("block size mismatch");
  Matrix out = Matrix::Zero(matrix_size_, matrix_size_);
  out.block(s.matrix_offset, s.matrix_offset, s.matrix_size, s.matrix_size) = b;
  return out;
}

template <typename Scalar>
AlgebraPtr<Scalar> standard_basis(Family family, int n, double scale) {
  return make_direct_sum<Scalar>({SummandSpec{family, n, scale}});
}

template <typename Scalar>
AlgebraPtr<Scalar> make_direct_sum(const std::vector<SummandSpec>& specs) {
  return std::make_shared<const LieAlgebra<Scalar>>(LieAlgebra<Scalar>::direct_sum(specs));
}

template <typename Scalar>
MatrixXd ad_matrix(const LieAlgebra<Scalar>& algebra, const Mat<Scalar>& x) {
  return algebra.ad_of(algebra.coords(x));
}

template <typename Scalar>
MatrixXd ricci_biinvariant(const LieAlgebra<Scalar>& algebra) {
  const int d = algebra.dim();
  MatrixXd e = MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) e.noalias() -= 0.25 * algebra.ad(i) * algebra.ad(i);
  return e;
}

template <typename Scalar>
MatrixXd killing_form(const LieAlgebra<Scalar>& algebra) {
  const int d = algebra.dim();
  MatrixXd b(d, d);
  for (int a = 0; a < d; ++a)
    for (int c = a; c < d; ++c) b(a, c) = b(c, a) = trace_product(algebra.ad(a), algebra.ad(c));
  return b;
}

template <typename Scalar>
TorusSubalgebra<Scalar> make_torus(AlgebraPtr<Scalar> parent, std::vector<Mat<Scalar>> elements) {
  if (!parent) throw ConfigError("torus needs a parent algebra");
  const int r = static_cast<int>(elements.size());
  TorusSubalgebra<Scalar> t;
  t.coords.resize(parent->dim(), r);
  for (int i = 0; i < r; ++i) t.coords.col(i) = parent->coords(elements[i], 1e-10);
  const MatrixXd gram = t.coords.transpose() * t.coords;
  if ((gram - MatrixXd::Identity(r, r)).norm() > 1e-10)
    throw DomainError("torus basis is not orthonormal");
  for (int i = 0; i < r; ++i)
    for (int j = i + 1; j < r; ++j)
      if (commutator(elements[i], elements[j]).norm() > 1e-10)
        throw DomainError("torus basis elements do not commute");
  t.parent = std::move(parent);
  t.elements = std::move(elements);
  t.dual_lattice = MatrixXd::Identity(r, r);
  return t;
}

template <typename Scalar>
TorusSubalgebra<Scalar> abelian_torus(AlgebraPtr<Scalar> parent) {
  std::vector<Mat<Scalar>> el;
  for (int s = 0; s < static_cast<int>(parent->summands().size()); ++s) {
    const auto& sm = parent->summands()[s];
    if (sm.family != Family::Abelian) continue;
    for (int i = sm.first_basis; i < sm.first_basis + sm.dim; ++i) el.push_back(parent->basis(i));
  }
  return make_torus<Scalar>(std::move(parent), std::move(el));
}

template <typename Scalar>
CentralizerSplit centralizer_split(const LieAlgebra<Scalar>& algebra,
                                   const TorusSubalgebra<Scalar>& torus) {
  const int d = algebra.dim();
  const int r = torus.rank();
  CentralizerSplit out;
  if (r == 0) {
    out.zh = MatrixXd::Identity(d, d);
    out.u = MatrixXd::Zero(d, 0);
    return out;
  }
  MatrixXd stacked(r * d, d);
  for (int i = 0; i < r; ++i) stacked.middleRows(i * d, d) = algebra.ad_of(torus.coords.col(i));
  Eigen::JacobiSVD<MatrixXd> svd(stacked, Eigen::ComputeFullV);
  const VectorXd& sv = svd.singularValues();
  std::vector<double> sigma(d, 0.0);
  for (int i = 0; i < sv.size() && i < d; ++i) sigma[i] = sv(i);
  out.singular_values = sigma;
  const double smax = sigma.empty() ? 0.0 : sigma[0];

  std::vector<int> kernel, range;
  for (int i = 0; i < d; ++i) {
    const double rel = smax > 0.0 ? sigma[i] / smax : 0.0;
    if (rel > 1e-11 && rel < 1e-7)
      throw RankDecisionError("ambiguous rank in centralizer computation", sigma);
    (rel < kRankCutoff ? kernel : range).push_back(i);
  }
  const MatrixXd& v = svd.matrixV();
  out.zh.resize(d, kernel.size());
  out.u.resize(d, range.size());
  for (size_t i = 0; i < kernel.size(); ++i) out.zh.col(i) = v.col(kernel[i]);
  for (size_t i = 0; i < range.size(); ++i) out.u.col(i) = v.col(range[i]);
  return out;
}

#define ISOSPEC_INSTANTIATE(S)                                                                  \
  template class LieAlgebra<S>;                                                                 \
  template AlgebraPtr<S> standard_basis<S>(Family, int, double);                                \
  template AlgebraPtr<S> make_direct_sum<S>(const std::vector<SummandSpec>&);                   \
  template MatrixXd ad_matrix<S>(const LieAlgebra<S>&, const Mat<S>&);                          \
  template MatrixXd ricci_biinvariant<S>(const LieAlgebra<S>&);                                 \
  template MatrixXd killing_form<S>(const LieAlgebra<S>&);                                      \
  template TorusSubalgebra<S> make_torus<S>(AlgebraPtr<S>, std::vector<Mat<S>>);                \
  template TorusSubalgebra<S> abelian_torus<S>(AlgebraPtr<S>);                             \
  template CentralizerSplit centralizer_split<S>(const LieAlgebra<S>&, const TorusSubalgebra<S>&);

ISOSPEC_INSTANTIATE(double)
ISOSPEC_INSTANTIATE(Complex)

#undef ISOSPEC_INSTANTIATE

}  // namespace isospec
