#include "isospec/iso_maps.hpp"

#include <algorithm>
#include <cmath>

namespace isospec {

namespace {

const Complex kI(0.0, 1.0);

/// Eigenvalues of i X for skew-Hermitian X (real, ascending), with eigenvectors.
template <typename Scalar>
Eigen::SelfAdjointEigenSolver<MatrixXcd> hermitian_eigen(const Mat<Scalar>& x) {
  MatrixXcd h = kI * x.template cast<Complex>();
  h = 0.5 * (h + h.adjoint()).eval();
  return Eigen::SelfAdjointEigenSolver<MatrixXcd>(h);
}

template <typename Scalar>
bool is_skew(const Mat<Scalar>& x) {
  return (x + x.adjoint()).norm() <= 1e-12 * std::max(1.0, x.norm());
}

VectorXcd expand_roots(const VectorXcd& roots) {
  const int n = static_cast<int>(roots.size());
  VectorXcd c = VectorXcd::Zero(n + 1);
  c(0) = 1.0;
  for (int r = 0; r < n; ++r)
    for (int k = r + 1; k >= 1; --k) c(k) -= roots(r) * c(k - 1);
  return c;
}

template <typename Scalar>
Complex trace_of(const Mat<Scalar>& m) {
  return Complex(m.trace());
}

template <typename Scalar>
void word_sum(const Mat<Scalar>& prefix, int a, int b, const Mat<Scalar>& j1, const Mat<Scalar>& j2,
              Complex& acc) {
  if (a == 0 && b == 0) {
    acc += trace_of<Scalar>(prefix);
    return;
  }
  if (a > 0) word_sum<Scalar>(prefix * j1, a - 1, b, j1, j2, acc);
  if (b > 0) word_sum<Scalar>(prefix * j2, a, b - 1, j1, j2, acc);
}

void check_range(double t, double lo, double hi, const char* name) {
  if (!std::isfinite(t) || t < lo - 1e-12 || t > hi + 1e-12)
    throw DomainError(std::string(name) + ": t outside the family domain");
}

double clamped_sqrt(double r) {
  if (r < -1e-12) throw DomainError("negative radicand");
  return std::sqrt(std::max(0.0, r));
}

template <typename Scalar>
Mat<Scalar> power(const Mat<Scalar>& x, int e) {
  Mat<Scalar> out = Mat<Scalar>::Identity(x.rows(), x.cols());
  for (int i = 0; i < e; ++i) out = out * x;
  return out;
}

template <typename Scalar>
std::vector<Mat<Scalar>> add_scaled(const std::vector<Mat<Scalar>>& a, double s,
                                    const std::vector<Mat<Scalar>>& b) {
  std::vector<Mat<Scalar>> out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] + s * b[i];
  return out;
}

template <typename Scalar>
JMap<Scalar> with_images(const JMap<Scalar>& j, std::vector<Mat<Scalar>> images) {
  JMap<Scalar> out = j;
  out.images = std::move(images);
  return out;
}

template <typename Scalar>
std::vector<Mat<Scalar>> rk4_step(const JMap<Scalar>& j, double h, int e) {
  auto k1 = flow_field_Y(j, e);
  auto k2 = flow_field_Y(with_images(j, add_scaled(j.images, 0.5 * h, k1)), e);
  auto k3 = flow_field_Y(with_images(j, add_scaled(j.images, 0.5 * h, k2)), e);
  auto k4 = flow_field_Y(with_images(j, add_scaled(j.images, h, k3)), e);
  std::vector<Mat<Scalar>> out(j.images.size());
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = j.images[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

double max_abs_diff(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

template <typename Scalar>
Mat<Scalar> JMap<Scalar>::at(const VectorXd& z) const {
  if (z.size() != rank()) throw ConfigError("torus vector has wrong length");
  Mat<Scalar> out = Mat<Scalar>::Zero(images.at(0).rows(), images.at(0).cols());
  for (int i = 0; i < rank(); ++i) out += z(i) * images[i];
  return out;
}

template <typename Scalar>
JMap<Scalar> JMap<Scalar>::scaled(double alpha) const {
  JMap out = *this;
  for (auto& m : out.images) m *= alpha;
  return out;
}

template <typename Scalar>
JMap<Scalar> IsospectralFamily<Scalar>::operator()(double t) const {
  if (!evaluate) throw ConfigError("family has no evaluator");
  return evaluate(t);
}

template <typename Scalar>
VectorXd charpoly_coeffs(const Mat<Scalar>& x) {
  if (x.rows() != x.cols()) throw ConfigError("charpoly needs a square matrix");
  const int n = static_cast<int>(x.rows());
  VectorXcd roots(n);
  if (n == 0) return VectorXd::Ones(1);
  if (is_skew(x)) {
    auto es = hermitian_eigen(x);
    roots = -kI * es.eigenvalues().template cast<Complex>();
  } else {
    Eigen::ComplexEigenSolver<MatrixXcd> es(x.template cast<Complex>(), false);
    roots = es.eigenvalues();
  }
  return expand_roots(roots).real();
}

template <typename Scalar>
Complex p_ab(const JMap<Scalar>& j, int a, int b, int word_cap) {
  if (j.rank() != 2) throw ConfigError("p_ab needs a rank-2 map");
  const int cap = word_cap < 0 ? static_cast<int>(j.images[0].rows()) : word_cap;
  if (a < 0 || b < 0 || a + b < 1) throw ConfigError("p_ab needs a+b >= 1");
  if (a + b > cap) throw ConfigError("p_ab word length above cap");
  Complex acc = 0.0;
  const Mat<Scalar> id = Mat<Scalar>::Identity(j.images[0].rows(), j.images[0].cols());
  word_sum<Scalar>(id, a, b, j.images[0], j.images[1], acc);
  return acc;
}

template <typename Scalar>
std::vector<Complex> all_p_ab(const JMap<Scalar>& j, int cap) {
  std::vector<Complex> out;
  for (int len = 1; len <= cap; ++len)
    for (int a = 0; a <= len; ++a) out.push_back(p_ab(j, a, len - a, cap));
  return out;
}

template <typename Scalar>
PairCheck is_isospectral_pair(const JMap<Scalar>& j, const JMap<Scalar>& jp, int grid, double tol) {
  if (j.rank() != jp.rank()) throw ConfigError("maps have different torus rank");
  if (j.rank() < 1 || j.rank() > 2) throw ConfigError("grid certificate supports rank 1 or 2");
  if (j.images[0].rows() != jp.images[0].rows()) throw ConfigError("maps have different targets");
  if (grid < 2) throw ConfigError("grid needs at least 2 points per axis");
  PairCheck out;
  const int gu = j.rank() == 2 ? grid : 1;
  for (int is = 0; is < grid; ++is)
    for (int iu = 0; iu < gu; ++iu) {
      VectorXd z(j.rank());
      z(0) = -1.0 + 2.0 * is / (grid - 1);
      if (j.rank() == 2) z(1) = -1.0 + 2.0 * iu / (grid - 1);
      const VectorXd c = charpoly_coeffs<Scalar>(j.at(z));
      const VectorXd cp = charpoly_coeffs<Scalar>(jp.at(z));
      const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
      out.charpoly_residual = std::max(out.charpoly_residual, (c - cp).cwiseAbs().maxCoeff() / scale);
    }
  if (j.rank() == 2) {
    const int n = static_cast<int>(j.images[0].rows());
    const auto p = all_p_ab(j, n);
    const auto pp = all_p_ab(jp, n);
    for (size_t i = 0; i < p.size(); ++i)
      out.pab_residual =
          std::max(out.pab_residual, std::abs(p[i] - pp[i]) / std::max(1.0, std::abs(p[i])));
  }
  out.isospectral = out.charpoly_residual <= tol && out.pab_residual <= tol;
  return out;
}

template <typename Scalar>
ConjugacyWitness<Scalar> conjugator_witness(const Mat<Scalar>& x, const Mat<Scalar>& xp, double tol) {
  if (x.rows() != xp.rows() || x.rows() != x.cols() || xp.rows() != xp.cols())
    throw ConfigError("witness needs square matrices of equal size");
  if (!is_skew(x) || !is_skew(xp)) throw DomainError("witness needs skew(-Hermitian) inputs");
  const int m = static_cast<int>(x.rows());
  auto es = hermitian_eigen(x);
  auto esp = hermitian_eigen(xp);
  const VectorXd mu = es.eigenvalues();
  const VectorXd mup = esp.eigenvalues();
  const double scale = std::max(1.0, mu.cwiseAbs().maxCoeff());
  const double mismatch = (mu - mup).cwiseAbs().maxCoeff() / scale;
  if (mismatch > tol) throw NotConjugateError("spectra differ", mismatch);

  ConjugacyWitness<Scalar> w;
  if constexpr (is_complex_v<Scalar>) {
    MatrixXcd a = esp.eigenvectors() * es.eigenvectors().adjoint();
    const Complex det = a.determinant();
    a *= std::exp(-kI * (std::arg(det) / m));
    w.a = a;
    w.residual = (a * x * a.adjoint() - xp).norm();
    w.unitarity = (a * a.adjoint() - MatrixXcd::Identity(m, m)).norm();
  } else {
    // Rotation planes by speed descending, kernel last.
    const double cut = 1e-9 * scale;
    auto frame = [&](const Eigen::SelfAdjointEigenSolver<MatrixXcd>& s, const MatrixXd& xr) {
      MatrixXd q(m, m);
      int col = 0;
      for (int i = m - 1; i >= 0 && s.eigenvalues()(i) > cut; --i) {
        const VectorXcd v = s.eigenvectors().col(i);
        q.col(col++) = std::sqrt(2.0) * v.real();
        q.col(col++) = std::sqrt(2.0) * v.imag();
      }
      const int k0 = m - col;
      if (k0 > 0) {
        Eigen::JacobiSVD<MatrixXd> svd(xr, Eigen::ComputeFullV);
        for (int i = 0; i < k0; ++i) q.col(col + i) = svd.matrixV().col(m - k0 + i);
      }
      return q;
    };
    const MatrixXd q = frame(es, x);
    MatrixXd qp = frame(esp, xp);
    MatrixXd a = qp * q.transpose();
    int planes = 0;
    for (int i = 0; i < m; ++i) planes += mu(i) > cut;
    if (a.determinant() < 0.0 && m - 2 * planes > 0) {
      qp.col(m - 1) *= -1.0;
      a = qp * q.transpose();
    }
    w.a = a;
    w.residual = (a * x * a.transpose() - xp).norm();
    w.unitarity = (a * a.transpose() - MatrixXd::Identity(m, m)).norm();
  }
  return w;
}

JMap<double> family_so5(double t) {
  check_range(t, kSO5TMin, kSO5TMax, "so5");
  const double den = 1.0 - 2.0 * t;
  const double t2 = t * t, t3 = t2 * t, t4 = t2 * t2;
  const double ph = clamped_sqrt((t4 - 3.0 * t2 + 1.0) / den);
  const double ps = clamped_sqrt((-t4 + 4.0 * t3 - 3.0 * t2 - 2.0 * t + 1.0) / den);
  MatrixXd j1 = MatrixXd::Zero(5, 5);
  j1(0, 2) = -t;
  j1(1, 3) = t - 1.0;
  j1(2, 0) = t;
  j1(2, 4) = -ph;
  j1(3, 1) = 1.0 - t;
  j1(3, 4) = -ps;
  j1(4, 2) = ph;
  j1(4, 3) = ps;
  MatrixXd j2 = MatrixXd::Zero(5, 5);
  j2(0, 1) = 1.0;
  j2(1, 0) = -1.0;
  j2(2, 3) = 1.0;
  j2(3, 2) = -1.0;
  static const auto so5 = standard_basis<double>(Family::SO, 5);
  return JMap<double>{so5, std::nullopt, {j1, j2}};
}

JMap<Complex> family_su3(double t) {
  check_range(t, -kSU3TMax, kSU3TMax, "su3");
  const double f = clamped_sqrt(1.0 - 2.0 * t * t);
  MatrixXcd j1 = MatrixXcd::Zero(3, 3);
  j1(0, 0) = -kI;
  j1(2, 2) = kI;
  MatrixXcd j2 = MatrixXcd::Zero(3, 3);
  j2(0, 1) = t;
  j2(0, 2) = f;
  j2(1, 0) = -t;
  j2(1, 2) = t;
  j2(2, 0) = -f;
  j2(2, 1) = -t;
  static const auto su3 = standard_basis<Complex>(Family::SU, 3);
  return JMap<Complex>{su3, std::nullopt, {j1, j2}};
}

MatrixXd embed_su_in_so(const MatrixXcd& x) {
  const int m = static_cast<int>(x.rows());
  MatrixXd out(2 * m, 2 * m);
  const MatrixXd a = x.real(), b = x.imag();
  out << a, -b, b, a;
  return out;
}

namespace {

struct SO8Data {
  AlgebraPtr<double> so8;
  TorusSubalgebra<double> torus;
};

const SO8Data& so8_data() {
  static const SO8Data data = [] {
    auto so8 = standard_basis<double>(Family::SO, 8, 0.5);
    MatrixXd z1 = MatrixXd::Zero(8, 8);
    z1.block(0, 3, 3, 3) = -MatrixXd::Identity(3, 3);
    z1.block(3, 0, 3, 3) = MatrixXd::Identity(3, 3);
    z1 /= std::sqrt(3.0);
    MatrixXd z2 = MatrixXd::Zero(8, 8);
    z2(7, 6) = 1.0;
    z2(6, 7) = -1.0;
    return SO8Data{so8, make_torus<double>(so8, {z1, z2})};
  }();
  return data;
}

}  // namespace

JMap<double> family_so8(double t) {
  const auto su = family_su3(t);
  const auto& d = so8_data();
  std::vector<MatrixXd> images;
  for (const auto& x : su.images) {
    MatrixXd m = MatrixXd::Zero(8, 8);
    m.topLeftCorner(6, 6) = embed_su_in_so(x);
    images.push_back(m);
  }
  return JMap<double>{d.so8, d.torus, images};
}

template <typename Scalar>
JMap<Scalar> embed_block(const JMap<Scalar>& j, Family outer_family, int outer_n) {
  if (!j.target || j.target->summands().size() != 1)
    throw ConfigError("embed_block needs a simple target algebra");
  const auto& inner = j.target->summands()[0];
  if (inner.family != outer_family) throw ConfigError("embed_block family mismatch");
  const int m = inner.n;
  const int extra = outer_family == Family::SO ? 4 : 3;
  if (outer_n < m + extra) throw ConfigError("outer algebra too small for the torus block");
  auto outer = standard_basis<Scalar>(outer_family, outer_n, inner.scale);

  std::vector<Mat<Scalar>> z;
  if (outer_family == Family::SO) {
    for (int p = 0; p < 2; ++p) {
      Mat<Scalar> e = Mat<Scalar>::Zero(outer_n, outer_n);
      const int r = m + 2 * p;
      e(r, r + 1) = Scalar(1);
      e(r + 1, r) = Scalar(-1);
      z.push_back(e / std::sqrt(2.0 * inner.scale));
    }
  } else {
    if constexpr (is_complex_v<Scalar>) {
      Mat<Scalar> h1 = Mat<Scalar>::Zero(outer_n, outer_n);
      h1(m, m) = kI;
      h1(m + 1, m + 1) = -kI;
      Mat<Scalar> h2 = Mat<Scalar>::Zero(outer_n, outer_n);
      h2(m, m) = kI;
      h2(m + 1, m + 1) = kI;
      h2(m + 2, m + 2) = -2.0 * kI;
      z.push_back(h1 / std::sqrt(2.0 * inner.scale));
      z.push_back(h2 / std::sqrt(6.0 * inner.scale));
    } else {
      throw ConfigError("su embedding needs complex scalars");
    }
  }
  std::vector<Mat<Scalar>> images;
  for (const auto& x : j.images) {
    Mat<Scalar> e = Mat<Scalar>::Zero(outer_n, outer_n);
    e.topLeftCorner(m, m) = x;
    images.push_back(e);
  }
  return JMap<Scalar>{outer, make_torus<Scalar>(outer, z), images};
}

IsospectralFamily<double> so5_family() {
  return {FamilyKind::SO5Explicit, kSO5TMin, kSO5TMax, family_so5};
}

IsospectralFamily<Complex> su3_family() {
  return {FamilyKind::SU3Explicit, -kSU3TMax, kSU3TMax, family_su3};
}

IsospectralFamily<double> so8_family() {
  return {FamilyKind::SO8Embedded, -kSU3TMax, kSU3TMax, family_so8};
}

template <typename Scalar>
std::vector<Mat<Scalar>> flow_field_Y(const JMap<Scalar>& j, int exponent) {
  if (j.rank() != 2) throw ConfigError("flow field needs a rank-2 map");
  if (exponent < 1 || exponent % 2 == 0) throw ConfigError("flow exponent must be odd and positive");
  const Mat<Scalar> p = power<Scalar>(j.images[0], exponent);
  return {p * j.images[1] - j.images[1] * p, Mat<Scalar>::Zero(j.images[1].rows(), j.images[1].cols())};
}

template <typename Scalar>
FlowResult<Scalar> flow_integrate(const JMap<Scalar>& j0, double T, double dt, const FlowOptions& opts) {
  if (!(dt > 0.0) || !(T >= 0.0)) throw ConfigError("flow needs dt > 0 and T >= 0");
  if (opts.max_halvings < 0 || !(opts.drift_budget > 0.0)) throw ConfigError("invalid flow options");
  const int cap = opts.word_cap < 0 ? static_cast<int>(j0.images.at(0).rows()) : opts.word_cap;
  const auto p0 = all_p_ab(j0, cap);
  auto q_of = [](const JMap<Scalar>& j) { return discriminators(j).q; };

  FlowResult<Scalar> res;
  res.times.push_back(0.0);
  res.states.push_back(j0);
  res.q.push_back(q_of(j0));
  JMap<Scalar> cur = j0;
  double t = 0.0;
  while (t < T - 1e-15 * std::max(1.0, T)) {
    double h = std::min(dt, T - t);
    int halvings = 0;
    for (;;) {
      JMap<Scalar> cand = with_images(cur, rk4_step(cur, h, opts.exponent));
      const double drift = max_abs_diff(all_p_ab(cand, cap), p0);
      const double allowed = T > 0.0 ? opts.drift_budget * (t + h) / T : opts.drift_budget;
      if (drift <= allowed) {
        cur = std::move(cand);
        t += h;
        res.max_drift = std::max(res.max_drift, drift);
        ++res.accepted_steps;
        break;
      }
      if (halvings == opts.max_halvings)
        throw DriftError("invariant drift above budget after step bisection", drift);
      ++halvings;
      ++res.rejected_steps;
      h *= 0.5;
    }
    res.times.push_back(t);
    res.states.push_back(cur);
    res.q.push_back(q_of(cur));
  }
  return res;
}

template <typename Scalar>
IsospectralFamily<Scalar> FlowResult<Scalar>::family(const FlowOptions& opts) const {
  IsospectralFamily<Scalar> fam;
  fam.kind = FamilyKind::FlowGenerated;
  fam.t_min = times.front();
  fam.t_max = times.back();
  auto times_copy = times;
  auto states_copy = states;
  fam.evaluate = [times_copy, states_copy, opts](double t) {
    if (t < times_copy.front() - 1e-15 || t > times_copy.back() + 1e-15)
      throw DomainError("flow family evaluated outside its time range");
    auto it = std::upper_bound(times_copy.begin(), times_copy.end(), t);
    const size_t i = it == times_copy.begin() ? 0 : static_cast<size_t>(it - times_copy.begin()) - 1;
    const double rest = t - times_copy[i];
    if (rest <= 0.0) return states_copy[i];
    // stored steps were accepted, so a sub-step of the same segment is at least as accurate
    JMap<Scalar> j = states_copy[i];
    return with_images(j, rk4_step(j, rest, opts.exponent));
  };
  return fam;
}

template <typename Scalar>
double dq_along_Y(const JMap<Scalar>& j) {
  const auto y = flow_field_Y(j, 5);
  const Mat<Scalar>& a = j.images[0];
  const Mat<Scalar> b2 = j.images[1] * j.images[1];
  return real_part(Complex((y[0] * a * b2 + a * y[0] * b2).trace()));
}

template <typename Scalar>
Discriminators discriminators(const JMap<Scalar>& j) {
  if (j.rank() != 2) throw ConfigError("discriminators need a rank-2 map");
  const Mat<Scalar> a2 = j.images[0] * j.images[0];
  const Mat<Scalar> b2 = j.images[1] * j.images[1];
  Discriminators d;
  d.q = real_part(Complex((a2 * b2).trace()));
  const Mat<Scalar> s = a2 + b2;
  d.norm4 = real_part(Complex((s * s).trace()));
  const MatrixXcd sh = 0.5 * (s.template cast<Complex>() + s.template cast<Complex>().adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(sh, Eigen::EigenvaluesOnly);
  for (int i = 0; i < es.eigenvalues().size(); ++i) d.eigs.push_back(es.eigenvalues()(i));
  return d;
}

#define ISOSPEC_INSTANTIATE(S)                                                                         \
  template struct JMap<S>;                                                                             \
  template struct IsospectralFamily<S>;                                                                \
  template struct FlowResult<S>;                                                                       \
  template VectorXd charpoly_coeffs<S>(const Mat<S>&);                                                 \
  template Complex p_ab<S>(const JMap<S>&, int, int, int);                                             \
  template std::vector<Complex> all_p_ab<S>(const JMap<S>&, int);                                      \
  template PairCheck is_isospectral_pair<S>(const JMap<S>&, const JMap<S>&, int, double);              \
  template ConjugacyWitness<S> conjugator_witness<S>(const Mat<S>&, const Mat<S>&, double);            \
  template JMap<S> embed_block<S>(const JMap<S>&, Family, int);                                        \
  template std::vector<Mat<S>> flow_field_Y<S>(const JMap<S>&, int);                                   \
  template FlowResult<S> flow_integrate<S>(const JMap<S>&, double, double, const FlowOptions&);        \
  template double dq_along_Y<S>(const JMap<S>&);                                                       \
  template Discriminators discriminators<S>(const JMap<S>&);

ISOSPEC_INSTANTIATE(double)
ISOSPEC_INSTANTIATE(Complex)

#undef ISOSPEC_INSTANTIATE

}  // namespace isospec
