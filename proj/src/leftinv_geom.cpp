#include "isospec/leftinv_geom.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace isospec {

namespace {

template <typename Scalar>
void gather(const Mat<Scalar>& x, const std::vector<int>& idx, Mat<Scalar>& out) {
  const int k = static_cast<int>(idx.size());
  out.resize(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) out(a, b) = x(idx[a], idx[b]);
}

double spec_scale(const Summand& s, bool complex_scalar) {
  if (s.family != Family::Abelian) return s.scale;
  return complex_scalar ? s.scale : 2.0 * s.scale;
}

}  // namespace

template <typename Scalar>
std::vector<Mat<Scalar>> LambdaMap<Scalar>::images() const {
  std::vector<Mat<Scalar>> out;
  for (int s = 0; s < rank(); ++s) out.push_back(algebra->element(coeffs.col(s)));
  return out;
}

template <typename Scalar>
LambdaMap<Scalar> lambda_from_images(AlgebraPtr<Scalar> algebra, TorusSubalgebra<Scalar> torus,
                                     const std::vector<Mat<Scalar>>& images, double tol) {
  if (static_cast<int>(images.size()) != torus.rank())
    throw ConfigError("need one image per torus direction");
  LambdaMap<Scalar> lm;
  lm.coeffs.resize(algebra->dim(), torus.rank());
  for (int s = 0; s < torus.rank(); ++s) lm.coeffs.col(s) = algebra->coords(images[s], tol);
  const double scale = std::max(1.0, lm.coeffs.norm());
  if ((torus.coords.transpose() * lm.coeffs).norm() > tol * scale)
    throw DomainError("images are not orthogonal to h");
  const auto split = centralizer_split(*algebra, torus);
  if ((split.u.transpose() * lm.coeffs).norm() > tol * scale)
    throw DomainError("images are not in the centralizer of h");
  lm.algebra = std::move(algebra);
  lm.torus = std::move(torus);
  return lm;
}

template <typename Scalar>
MatrixXd LeftInvariantMetric<Scalar>::gram() const {
  const int d = dim();
  const MatrixXd ipl = MatrixXd::Identity(d, d) + lambda.endomorphism();
  return ipl.transpose() * ipl;
}

template <typename Scalar>
VectorXd LeftInvariantMetric<Scalar>::frame_coords(const VectorXd& v) const {
  return v + lambda.endomorphism() * v;
}

template <typename Scalar>
LeftInvariantMetric<Scalar> metric_from_lambda(const LambdaMap<Scalar>& lambda, double volume) {
  if (!(volume > 0.0)) throw ConfigError("volume normalization must be positive");
  const int d = lambda.dim();
  const MatrixXd l = lambda.endomorphism();
  const double scale = std::max(1.0, l.norm());
  if ((l * l).norm() > 1e-10 * scale * scale) throw DomainError("lambda is not square-zero");
  LeftInvariantMetric<Scalar> m{lambda, MatrixXd::Identity(d, d) - l, volume};
  const MatrixXd g = m.frame.transpose() * m.gram() * m.frame;
  if ((g - MatrixXd::Identity(d, d)).norm() > 1e-12 * scale * scale)
    throw DomainError("frame is not orthonormal for g_lambda");
  return m;
}

template <typename Scalar>
ConjugacyReport verify_conjugacy(const LambdaMap<Scalar>& lambda, const LambdaMap<Scalar>& lambda_p, int grid,
                         double tol) {
  if (lambda.algebra != lambda_p.algebra || lambda.rank() != lambda_p.rank())
    throw ConfigError("maps must share algebra and torus");
  if (grid < 2) throw ConfigError("grid needs at least 2 points per axis");
  const auto imgs = lambda.images(), imgs_p = lambda_p.images();
  const auto& zs = lambda.torus.elements;
  const int n = lambda.algebra->matrix_size();
  const int r = lambda.rank();
  ConjugacyReport rep;

  for (const auto* set : {&imgs, &imgs_p})
    for (const auto& x : *set)
      for (const auto& z : zs) rep.commute_residual = std::max(rep.commute_residual, commutator(x, z).norm());

  // Support of the images; a witness can be built there if h vanishes on it.
  std::vector<int> support;
  for (int i = 0; i < n; ++i) {
    double mass = 0.0;
    for (const auto* set : {&imgs, &imgs_p})
      for (const auto& x : *set) mass += x.row(i).norm() + x.col(i).norm();
    if (mass > 0.0) support.push_back(i);
  }
  bool separable = !support.empty();
  for (const auto& z : zs)
    for (int i : support) separable = separable && z.row(i).norm() == 0.0 && z.col(i).norm() == 0.0;
  rep.charpoly_only = !separable;

  bool ok = true;
  std::vector<VectorXd> points;
  for (int a = 0; a < grid; ++a)
    for (int b = 0; b < (r >= 2 ? grid : 1); ++b) {
      VectorXd z = VectorXd::Zero(r);
      z(0) = -1.0 + 2.0 * a / (grid - 1);
      if (r >= 2) z(1) = -1.0 + 2.0 * b / (grid - 1);
      points.push_back(z);
    }
  for (const auto& z : points) {
    Mat<Scalar> x = Mat<Scalar>::Zero(n, n), xp = Mat<Scalar>::Zero(n, n);
    for (int s = 0; s < r; ++s) {
      x += z(s) * imgs[s];
      xp += z(s) * imgs_p[s];
    }
    const VectorXd c = charpoly_coeffs<Scalar>(x), cp = charpoly_coeffs<Scalar>(xp);
    const double res = (c - cp).cwiseAbs().maxCoeff() / std::max(1.0, c.cwiseAbs().maxCoeff());
    rep.charpoly_residual = std::max(rep.charpoly_residual, res);
    if (separable) {
      Mat<Scalar> xs, xps;
      gather(x, support, xs);
      gather(xp, support, xps);
      try {
        const auto w = conjugator_witness<Scalar>(xs, xps, tol);
        rep.witness_residual = std::max(rep.witness_residual, w.residual);
      } catch (const NotConjugateError& e) {
        rep.witness_residual = std::max(rep.witness_residual, e.mismatch());
        ok = false;
      }
    }
  }
  ok = ok && rep.charpoly_residual <= tol && rep.commute_residual <= tol && rep.witness_residual <= tol;
  rep.pass = ok;
  return rep;
}

template <typename Scalar>
MatrixXd ricci(const LeftInvariantMetric<Scalar>& metric) {
  const auto& lm = metric.lambda;
  const auto& alg = *lm.algebra;
  const int d = alg.dim();
  const MatrixXd ipj = MatrixXd::Identity(d, d) + lm.transpose_map();
  MatrixXd m = ipj.transpose() * ricci_biinvariant(alg) * ipj;
  for (int s = 0; s < lm.rank(); ++s) {
    const MatrixXd adz = alg.ad_of(lm.torus.coords.col(s));
    const MatrixXd adj = alg.ad_of(lm.coeffs.col(s));
    m += (adz * adj).transpose() + 0.5 * (adj * adj).transpose();
  }
  return m;
}

template <typename Scalar>
double ricci_norm_diff_rhs(const LambdaMap<Scalar>& lambda, const LambdaMap<Scalar>& lambda_p) {
  auto sum = [](const LambdaMap<Scalar>& lm) {
    std::vector<MatrixXd> sq;
    for (int s = 0; s < lm.rank(); ++s) {
      const MatrixXd a = lm.algebra->ad_of(lm.coeffs.col(s));
      sq.push_back(a * a);
    }
    double acc = 0.0;
    for (const auto& a : sq)
      for (const auto& b : sq) acc += trace_product(a, b);
    return acc;
  };
  return 0.25 * (sum(lambda) - sum(lambda_p));
}

template <typename Scalar>
double ad_square_trace(Family family, const Mat<Scalar>& x, const Mat<Scalar>& y) {
  if (x.rows() != x.cols() || y.rows() != x.rows() || y.cols() != x.cols())
    throw ConfigError("ad_square_trace needs square matrices of equal size");
  const double n = static_cast<double>(x.rows());
  const double tol = 1e-10 * std::max(1.0, x.norm() + y.norm());
  auto skew = [&](const Mat<Scalar>& a) { return (a + a.adjoint()).norm() <= tol; };
  if (!skew(x) || !skew(y)) throw ConfigError("ad_square_trace inputs are not in the algebra");
  const Mat<Scalar> x2 = x * x, y2 = y * y;
  const double tx2y2 = real_part(Complex((x2 * y2).trace()));
  const double tx2 = real_part(Complex(x2.trace())), ty2 = real_part(Complex(y2.trace()));
  const double txy = trace_product(x, y);
  if (family == Family::SO) {
    if constexpr (is_complex_v<Scalar>) {
      if (x.imag().norm() > tol || y.imag().norm() > tol) throw ConfigError("so(n) inputs must be real");
    }
    const double txyxy = real_part(Complex((x * y * x * y).trace()));
    return (n - 6.0) * tx2y2 - 2.0 * txyxy + tx2 * ty2 + 2.0 * txy * txy;
  }
  if (family == Family::SU) {
    if (std::abs(Complex(x.trace())) > tol || std::abs(Complex(y.trace())) > tol)
      throw ConfigError("su(n) inputs must be traceless");
    return 2.0 * n * tx2y2 + 2.0 * tx2 * ty2 + 4.0 * txy * txy;
  }
  throw ConfigError("ad_square_trace covers so(n) and su(n) only");
}

template <typename Scalar>
std::vector<MatrixXd> frame_structure_constants(const LieAlgebra<Scalar>& algebra, const MatrixXd& frame,
                                                const MatrixXd& to_frame) {
  const int d = algebra.dim();
  std::vector<MatrixXd> c(d);
  for (int a = 0; a < d; ++a) c[a] = to_frame * algebra.ad_of(frame.col(a)) * frame;
  return c;
}

Curvature curvature_from_structure(std::vector<MatrixXd> structure) {
  const int d = static_cast<int>(structure.size());
  Curvature cv;
  cv.gamma.assign(d, MatrixXd::Zero(d, d));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        cv.gamma[a](c, b) = 0.5 * (structure[a](c, b) - structure[b](a, c) + structure[c](b, a));

  cv.riemann.assign(static_cast<size_t>(d) * d, MatrixXd::Zero(d, d));
  cv.ric = MatrixXd::Zero(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      if (a == b) continue;
      MatrixXd r = cv.gamma[a] * cv.gamma[b] - cv.gamma[b] * cv.gamma[a];
      for (int e = 0; e < d; ++e)
        if (structure[a](e, b) != 0.0) r -= structure[a](e, b) * cv.gamma[e];
      cv.riem_norm_sq += r.squaredNorm();
      cv.ric.row(b) += r.row(a);
      cv.riemann[a * d + b] = std::move(r);
    }
  cv.scal = cv.ric.trace();
  cv.ric_norm_sq = cv.ric.squaredNorm();
  cv.structure = std::move(structure);
  return cv;
}

template <typename Scalar>
Curvature koszul_connection_and_curvature(const LeftInvariantMetric<Scalar>& metric) {
  const int d = metric.dim();
  const MatrixXd to_frame = MatrixXd::Identity(d, d) + metric.lambda.endomorphism();
  return curvature_from_structure(frame_structure_constants(*metric.lambda.algebra, metric.frame, to_frame));
}

CurvatureReport heat_invariants(const Curvature& cv, double volume) {
  const int d = static_cast<int>(cv.ric.rows());
  CurvatureReport r;
  r.scal = cv.scal;
  r.ric_norm_sq = cv.ric_norm_sq;
  r.riem_norm_sq = cv.riem_norm_sq;
  r.a0 = volume;
  r.a1 = volume * cv.scal / 6.0;
  r.a2_0 = volume * (5.0 * cv.scal * cv.scal - 2.0 * cv.ric_norm_sq + 2.0 * cv.riem_norm_sq) / 360.0;
  r.a2_1 = r.a2_0 * d - volume * (2.0 * cv.scal * cv.scal - 6.0 * cv.ric_norm_sq + cv.riem_norm_sq) / 12.0;
  return r;
}

template <typename Scalar>
CurvatureReport heat_invariants(const LeftInvariantMetric<Scalar>& metric) {
  return heat_invariants(koszul_connection_and_curvature(metric), metric.volume);
}

template <typename Scalar>
LambdaMap<Scalar> barred_lambda(const LambdaMap<Scalar>& lambda, const LambdaMap<Scalar>& lambda_p) {
  if (lambda.algebra != lambda_p.algebra || lambda.rank() != lambda_p.rank())
    throw ConfigError("barred lambda needs maps on the same algebra and torus");
  const auto& alg = *lambda.algebra;
  std::vector<SummandSpec> simple, abelian;
  int dk = 0;
  bool seen_abelian = false;
  for (const auto& s : alg.summands()) {
    if (s.family == Family::Abelian) {
      seen_abelian = true;
      abelian.push_back({Family::Abelian, 1, spec_scale(s, is_complex_v<Scalar>)});
    } else {
      if (seen_abelian) throw ConfigError("barred lambda needs the abelian summands last");
      simple.push_back({s.family, s.n, s.scale});
      dk += s.dim;
    }
  }
  if (static_cast<int>(abelian.size()) != lambda.rank())
    throw ConfigError("barred lambda needs h to be the whole abelian part");
  const MatrixXd expected = MatrixXd::Identity(alg.dim(), alg.dim()).rightCols(lambda.rank());
  if ((lambda.torus.coords - expected).norm() > 1e-12)
    throw ConfigError("barred lambda needs the torus basis to be the abelian basis");

  std::vector<SummandSpec> specs = simple;
  specs.insert(specs.end(), simple.begin(), simple.end());
  specs.insert(specs.end(), abelian.begin(), abelian.end());
  auto big = make_direct_sum<Scalar>(specs);
  LambdaMap<Scalar> out;
  out.torus = abelian_torus<Scalar>(big);
  out.coeffs = MatrixXd::Zero(big->dim(), lambda.rank());
  out.coeffs.topRows(dk) = lambda.coeffs.topRows(dk);
  out.coeffs.middleRows(dk, dk) = lambda_p.coeffs.topRows(dk);
  out.algebra = std::move(big);
  return out;
}

template <typename Scalar>
double ConformalExample<Scalar>::tau(const Mat<Scalar>& x) const {
  return profile.eps * real_part(Complex(x.trace())) / profile.m;
}

template <typename Scalar>
double ConformalExample<Scalar>::dtau_norm_sq(const Mat<Scalar>& x) const {
  const auto& alg = *metric.lambda.algebra;
  const auto& s = alg.summands()[k_summand];
  double acc = 0.0;
  for (int i = 0; i < metric.dim(); ++i) {
    // factor-K component of the frame vector
    Mat<Scalar> v = Mat<Scalar>::Zero(s.matrix_size, s.matrix_size);
    for (int a = s.first_basis; a < s.first_basis + s.dim; ++a)
      if (metric.frame(a, i) != 0.0) v += metric.frame(a, i) * alg.block(alg.basis(a), k_summand);
    if (v.norm() == 0.0) continue;
    const double dt = profile.eps * trace_product(x, v) / profile.m;
    acc += dt * dt;
  }
  return acc;
}

template <typename Scalar>
double ConformalExample<Scalar>::scal(const Mat<Scalar>& x, const Mat<Scalar>& y) const {
  const Mat<Scalar>& p = profile.factor_index == 1 ? x : y;
  const double t = tau(p);
  const double n = profile.n_total;
  return (profile.alpha + profile.beta * t - (n - 1.0) * (n - 2.0) * dtau_norm_sq(p)) * std::exp(-2.0 * t);
}

template <typename Scalar>
ConformalExample<Scalar> conformal_scal_profile(const LeftInvariantMetric<Scalar>& metric_bar, double eps,
                                                int factor_index) {
  if (!(eps > 0.0 && eps < 0.125)) throw ConfigError("conformal parameter must lie in (0, 1/8)");
  if (factor_index != 1 && factor_index != 2) throw ConfigError("factor index must be 1 or 2");
  const auto& alg = *metric_bar.lambda.algebra;
  const auto& sm = alg.summands();
  if (sm.size() < 3 || sm[0].family == Family::Abelian || sm[0].family != sm[1].family || sm[0].n != sm[1].n)
    throw ConfigError("conformal example needs an algebra k + k + h");
  const auto& k = sm[0];
  if ((k.family == Family::SO && k.n < 5) || (k.family == Family::SU && k.n < 3))
    throw ConfigError("conformal example needs SO(m >= 5) or SU(m >= 3)");

  ConformalExample<Scalar> ex{metric_bar, {}, factor_index == 1 ? 0 : 1};
  ConformalProfile& p = ex.profile;
  p.m = k.n;
  p.dim_k = k.dim;
  p.n_total = alg.dim();
  p.eps = eps;
  p.factor_index = factor_index;
  const MatrixXd& ad0 = alg.ad(k.first_basis);
  p.c2 = 1.0 / (-trace_product(ad0, ad0));
  const int kr = killing_ratio(k.family, k.n);
  p.mu = (1.0 / p.c2) * (1.0 / p.m) * (1.0 / kr) * p.dim_k;
  p.alpha = koszul_connection_and_curvature(metric_bar).scal;
  p.beta = 2.0 * (p.n_total - 1) * p.mu;
  p.bound = double(p.m) * kr / (8.0 * p.dim_k);
  p.bound_ok = p.alpha / p.beta <= p.bound;
  p.tau_max = ex.tau(Mat<Scalar>::Identity(p.m, p.m));
  return ex;
}

template <typename Scalar>
Mat<Scalar> haar_sample(int m, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat<Scalar> g(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if constexpr (is_complex_v<Scalar>) {
        const double re = nd(rng);
        g(i, j) = Complex(re, nd(rng));
      } else {
        g(i, j) = nd(rng);
      }
    }
  Eigen::HouseholderQR<Mat<Scalar>> qr(g);
  Mat<Scalar> q = qr.householderQ();
  const Mat<Scalar> r = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (int i = 0; i < m; ++i) {
    const Scalar d = r(i, i);
    if (std::abs(d) > 0.0) q.col(i) *= d / std::abs(d);
  }
  if constexpr (is_complex_v<Scalar>) {
    const Complex det = q.determinant();
    q *= std::exp(Complex(0.0, -std::arg(det) / m));
  } else {
    if (q.determinant() < 0.0) q.col(0) *= -1.0;
  }
  return q;
}

template <typename Scalar>
ConformalMaxResult conformal_max_search(const ConformalExample<Scalar>& ex, int samples, std::uint64_t seed) {
  const int m = ex.profile.m;
  const auto& alg = *ex.metric.lambda.algebra;
  const auto& s = alg.summands()[ex.k_summand];
  std::vector<Mat<Scalar>> dirs;
  for (int a = s.first_basis; a < s.first_basis + s.dim; ++a) dirs.push_back(alg.block(alg.basis(a), ex.k_summand));
  const Mat<Scalar> id = Mat<Scalar>::Identity(m, m);
  auto f = [&](const Mat<Scalar>& x) { return ex.profile.factor_index == 1 ? ex.scal(x, id) : ex.scal(id, x); };

  std::mt19937_64 rng(seed);
  ConformalMaxResult res;
  res.samples = samples;
  res.sampled_max = -INFINITY;
  Mat<Scalar> best = id, best_other = id;
  for (int i = 0; i < samples; ++i) {
    Mat<Scalar> x = haar_sample<Scalar>(m, rng);
    Mat<Scalar> y = haar_sample<Scalar>(m, rng);
    const double v = ex.scal(x, y);
    if (v > res.sampled_max) {
      res.sampled_max = v;
      best = ex.profile.factor_index == 1 ? x : y;
      best_other = ex.profile.factor_index == 1 ? y : x;
    }
  }

  // gradient ascent along left-invariant directions on the active factor
  Mat<Scalar> x = best;
  double fx = f(x);
  const double h = 1e-6;
  for (int it = 0; it < 2000; ++it) {
    VectorXd g(dirs.size());
    for (size_t a = 0; a < dirs.size(); ++a) {
      const Mat<Scalar> ep = (h * dirs[a]).exp(), em = (-h * dirs[a]).exp();
      g(a) = (f(x * ep) - f(x * em)) / (2.0 * h);
    }
    if (g.norm() < 1e-12) break;
    Mat<Scalar> step = Mat<Scalar>::Zero(m, m);
    for (size_t a = 0; a < dirs.size(); ++a) step += g(a) * dirs[a];
    double len = 1.0 / std::max(1.0, g.norm());
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt, len *= 0.5) {
      Mat<Scalar> cand = x * (len * step).exp();
      const double fc = f(cand);
      if (fc > fx) {
        x = cand;
        fx = fc;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  res.refined_max = fx;
  res.value_at_identity = f(id);
  res.refined_distance = (x - id).norm();
  res.other_distance = (best_other - id).norm();
  return res;
}

#define ISOSPEC_INSTANTIATE(S)                                                                            \
  template struct LambdaMap<S>;                                                                           \
  template struct LeftInvariantMetric<S>;                                                                 \
  template struct ConformalExample<S>;                                                                    \
  template LambdaMap<S> lambda_from_images<S>(AlgebraPtr<S>, TorusSubalgebra<S>, const std::vector<Mat<S>>&, \
                                              double);                                                    \
  template LeftInvariantMetric<S> metric_from_lambda<S>(const LambdaMap<S>&, double);                     \
  template ConjugacyReport verify_conjugacy<S>(const LambdaMap<S>&, const LambdaMap<S>&, int, double);            \
  template MatrixXd ricci<S>(const LeftInvariantMetric<S>&);                                              \
  template double ricci_norm_diff_rhs<S>(const LambdaMap<S>&, const LambdaMap<S>&);                       \
  template double ad_square_trace<S>(Family, const Mat<S>&, const Mat<S>&);                                      \
  template std::vector<MatrixXd> frame_structure_constants<S>(const LieAlgebra<S>&, const MatrixXd&,      \
                                                              const MatrixXd&);                           \
  template Curvature koszul_connection_and_curvature<S>(const LeftInvariantMetric<S>&);                   \
  template CurvatureReport heat_invariants<S>(const LeftInvariantMetric<S>&);                             \
  template LambdaMap<S> barred_lambda<S>(const LambdaMap<S>&, const LambdaMap<S>&);                       \
  template ConformalExample<S> conformal_scal_profile<S>(const LeftInvariantMetric<S>&, double, int);     \
  template Mat<S> haar_sample<S>(int, std::mt19937_64&);                                                  \
  template ConformalMaxResult conformal_max_search<S>(const ConformalExample<S>&, int, std::uint64_t);

ISOSPEC_INSTANTIATE(double)
ISOSPEC_INSTANTIATE(Complex)

#undef ISOSPEC_INSTANTIATE

}  // namespace isospec
