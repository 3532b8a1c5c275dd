#include "isospec/sphere_geom.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>
#include <unordered_map>

namespace isospec {

namespace {

constexpr double kPi = 3.14159265358979323846;

Vector3d e(int i) { return Vector3d::Unit(i); }

Matrix3d diag_a() { return Vector3d(-1.0, 0.0, 1.0).asDiagonal(); }

// Coefficients of det(lambda - m) = lambda^3 + k2 lambda^2 + k1 lambda + k0.
Vector3d charpoly3(const Matrix3d& m) {
  const double tr = m.trace();
  return {-m.determinant(), 0.5 * (tr * tr - (m * m).trace()), -tr};
}

Vector3d eq_values(const Matrix3d& b) {
  const double b12 = b(0, 1), b13 = b(0, 2), b23 = b(1, 2);
  return {b12 * b12 + b13 * b13 + b23 * b23, b23 * b23 - b12 * b12, b12 * b13 * b23};
}

void check_unit(const Vector3d& p) {
  if (std::abs(p.norm() - 1.0) > 1e-10) throw DomainError("base point is not on the unit sphere");
}

double f_quad(const SphereQuadMap& c, const Vector3d& p) {
  const double r1 = p.dot(c.c1 * p), r2 = p.dot(c.c2 * p);
  return r1 * r1 + r2 * r2;
}

Eigen::Matrix<double, 3, 2> frame3(const Vector3d& p) { return tangent_frame(p); }

// Levenberg-Marquardt on r_s = <c_s p, p> with retraction to the sphere; moves to the nearest zero.
Vector3d descend_to_min(const SphereQuadMap& c, Vector3d p) {
  double f = f_quad(c, p);
  double mu = -1.0;
  for (int it = 0; it < 200 && f > 1e-32; ++it) {
    const Eigen::Matrix<double, 3, 2> t = frame3(p);
    Eigen::Matrix2d jac;
    jac.row(0) = 2.0 * (c.c1 * p).transpose() * t;
    jac.row(1) = 2.0 * (c.c2 * p).transpose() * t;
    const Vector2d r(p.dot(c.c1 * p), p.dot(c.c2 * p));
    const Eigen::Matrix2d jtj = jac.transpose() * jac;
    const Vector2d g = jac.transpose() * r;
    if (g.norm() < 1e-18) break;
    if (mu < 0.0) mu = 1e-3 * std::max(1e-12, jtj.trace());
    bool moved = false;
    for (int k = 0; k < 40; ++k) {
      const Vector2d d = (jtj + mu * Eigen::Matrix2d::Identity()).ldlt().solve(-g);
      const Vector3d q = (p + t * d).normalized();
      const double fq = f_quad(c, q);
      if (fq < f) {
        p = q;
        f = fq;
        mu = std::max(mu / 3.0, 1e-20);
        moved = true;
        break;
      }
      mu *= 4.0;
    }
    if (!moved) break;
  }
  return p;
}

// Projected gradient with backtracking on sign * scal.
Vector3d polish(const SphereQuadMap& c, Vector3d p, double sign) {
  auto val = [&](const Vector3d& q) { return sign * scal_s2t2(c, q); };
  double fp = val(p);
  double step = 0.05;
  for (int it = 0; it < 2000; ++it) {
    const double r1 = p.dot(c.c1 * p), r2 = p.dot(c.c2 * p);
    Vector3d g = -18.0 * sign * (r1 * c.c1 * p + r2 * c.c2 * p);
    g -= g.dot(p) * p;
    if (g.norm() < 1e-13) break;
    bool moved = false;
    for (int k = 0; k < 60; ++k, step *= 0.5) {
      const Vector3d q = (p + step * g).normalized();
      const double fq = val(q);
      if (fq > fp) {
        p = q;
        fp = fq;
        moved = true;
        step *= 2.0;
        break;
      }
    }
    if (!moved) break;
  }
  return p;
}

struct CellKey {
  long long x, y, z;
  bool operator==(const CellKey& o) const { return x == o.x && y == o.y && z == o.z; }
};

struct CellHash {
  size_t operator()(const CellKey& k) const {
    return std::hash<long long>()(k.x * 73856093LL ^ k.y * 19349663LL ^ k.z * 83492791LL);
  }
};

class PointGrid {
 public:
  PointGrid(const std::vector<Vector3d>& pts, double cell) : pts_(pts), cell_(cell) {
    for (size_t i = 0; i < pts.size(); ++i) cells_[key(pts[i])].push_back(static_cast<int>(i));
  }

  template <typename F>
  void for_neighbors(const Vector3d& q, double radius, F&& f) const {
    const CellKey k = key(q);
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy)
        for (long long dz = -1; dz <= 1; ++dz) {
          const auto it = cells_.find({k.x + dx, k.y + dy, k.z + dz});
          if (it == cells_.end()) continue;
          for (int i : it->second)
            if ((pts_[i] - q).norm() <= radius) f(i);
        }
  }

 private:
  CellKey key(const Vector3d& q) const {
    return {static_cast<long long>(std::floor(q.x() / cell_)), static_cast<long long>(std::floor(q.y() / cell_)),
            static_cast<long long>(std::floor(q.z() / cell_))};
  }

  const std::vector<Vector3d>& pts_;
  double cell_;
  std::unordered_map<CellKey, std::vector<int>, CellHash> cells_;
};

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) i = parent[i] = parent[parent[i]];
  return i;
}

double pairwise_range(const double* v, size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const size_t h = n / 2;
  return pairwise_range(v, h) + pairwise_range(v + h, n - h);
}

}  // namespace

Vector3d SymTensor3::apply(const Vector3d& x, const Vector3d& y) const {
  Vector3d out = Vector3d::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) out(i) += (*this)(i, j, k) * x(j) * y(k);
  return out;
}

double SymTensor3::symmetry_residual() const {
  double r = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r = std::max(r, std::abs((*this)(i, j, k) - (*this)(i, k, j)));
  return r;
}

const Eigen::Matrix<double, 27, 27>& projection_matrix() {
  static const Eigen::Matrix<double, 27, 27> p = [] {
    Eigen::Matrix<double, 27, 27> m = Eigen::Matrix<double, 27, 27>::Zero();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          const int row = SymTensor3::index(i, j, k);
          const std::array<std::array<int, 3>, 6> perms = {
              {{i, j, k}, {i, k, j}, {j, i, k}, {j, k, i}, {k, i, j}, {k, j, i}}};
          for (const auto& s : perms) m(row, SymTensor3::index(s[0], s[1], s[2])) += 1.0 / 6.0;
        }
    return m;
  }();
  return p;
}

SymTensor3 projection_P(const SymTensor3& q) {
  SymTensor3 out;
  out.v = projection_matrix() * q.v;
  return out;
}

SymTensor3 projection_Pperp(const SymTensor3& q) {
  SymTensor3 out;
  out.v = q.v - projection_matrix() * q.v;
  return out;
}

SymTensor3 phi_map(const Matrix3d& b) {
  if (std::abs(b.trace()) > 1e-12 * std::max(1.0, b.norm())) throw DomainError("Phi needs a traceless endomorphism");
  SymTensor3 q;
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) {
      const Vector3d v = 0.5 * ((b * e(j)).cross(e(k)) + (b * e(k)).cross(e(j)));
      for (int i = 0; i < 3; ++i) q(i, j, k) = v(i);
    }
  return q;
}

SymTensor3 act(const Matrix3d& a, const SymTensor3& q) {
  const Matrix3d ai = a.inverse();
  SymTensor3 out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        double s = 0.0;
        for (int x = 0; x < 3; ++x)
          for (int y = 0; y < 3; ++y)
            for (int z = 0; z < 3; ++z) s += a(i, x) * q(x, y, z) * ai(y, j) * ai(z, k);
        out(i, j, k) = s;
      }
  return out;
}

SphereQuadMap SphereQuadMap::make(const Matrix3d& c1, const Matrix3d& c2) {
  for (const Matrix3d* m : {&c1, &c2}) {
    if ((*m - m->transpose()).norm() > 1e-12) throw DomainError("c values must be symmetric");
    if (std::abs(m->trace()) > 1e-12) throw DomainError("c values must be traceless");
  }
  return SphereQuadMap{c1, c2};
}

SphereQuadMap quad_pair_c() {
  Matrix3d b;
  b << 0, 1, 0, 1, 0, 1, 0, 1, 0;
  return SphereQuadMap::make(diag_a(), b);
}

SphereQuadMap quad_pair_cprime() {
  Matrix3d b = Matrix3d::Zero();
  b(0, 2) = b(2, 0) = std::sqrt(2.0);
  return SphereQuadMap::make(diag_a(), b);
}

CPairCheck check_c_pair(const SphereQuadMap& c, const SphereQuadMap& cp, int grid, double tol) {
  if (grid < 2) throw ConfigError("grid needs at least 2 points per axis");
  CPairCheck r;
  for (int a = 0; a < grid; ++a)
    for (int b = 0; b < grid; ++b) {
      const Vector2d z(-1.0 + 2.0 * a / (grid - 1), -1.0 + 2.0 * b / (grid - 1));
      const Vector3d k = charpoly3(c.at(z)), kp = charpoly3(cp.at(z));
      r.charpoly_residual =
          std::max(r.charpoly_residual, (k - kp).cwiseAbs().maxCoeff() / std::max(1.0, k.cwiseAbs().maxCoeff()));
    }
  r.cond1 = r.charpoly_residual <= tol;
  const Matrix3d a = diag_a();
  r.normal_form = (c.c1 - a).norm() <= 1e-12 && (cp.c1 - a).norm() <= 1e-12 &&
                  c.c2.diagonal().norm() <= 1e-12 && cp.c2.diagonal().norm() <= 1e-12;
  if (r.normal_form) {
    r.eq_values_c = eq_values(c.c2);
    r.eq_values_cp = eq_values(cp.c2);
    r.eq_residual = (r.eq_values_c - r.eq_values_cp).cwiseAbs().maxCoeff();
  }
  std::tie(r.disc_c, r.disc_cp) = quad_discriminator(c, cp);
  r.not_equivalent = r.normal_form && r.cond1 &&
                     std::abs(r.disc_c - r.disc_cp) > tol * std::max(1.0, std::abs(r.disc_c));
  return r;
}

std::pair<double, double> quad_discriminator(const SphereQuadMap& c, const SphereQuadMap& cp) {
  auto d = [](const SphereQuadMap& m) { return (m.c1 * m.c1 * m.c2 * m.c2).trace(); };
  return {d(c), d(cp)};
}

double scal_s2t2(const SphereQuadMap& c, const Vector3d& p) {
  check_unit(p);
  const double r1 = p.dot(c.c1 * p), r2 = p.dot(c.c2 * p);
  return 2.0 - 4.5 * r1 * r1 - 4.5 * r2 * r2;
}

FormProvider quadratic_form(const SphereQuadMap& c) {
  return [c](const VectorXd& p) {
    const Vector3d q = p;
    return std::vector<VectorXd>{(c.c1 * q).cross(q), (c.c2 * q).cross(q)};
  };
}

FormProvider linear_form(const std::vector<MatrixXd>& j) {
  return [j](const VectorXd& p) {
    std::vector<VectorXd> out;
    for (const auto& m : j) out.push_back(-0.5 * m * p);
    return out;
  };
}

MatrixXd tangent_frame(const VectorXd& p) {
  const int m = static_cast<int>(p.size());
  if (m < 2) throw ConfigError("tangent frame needs dimension at least 2");
  const VectorXd u = p.normalized();
  MatrixXd frame(m, m - 1);
  int found = 0;
  for (int i = 0; i < m && found < m - 1; ++i) {
    VectorXd w = VectorXd::Unit(m, i);
    w -= w.dot(u) * u;
    for (int k = 0; k < found; ++k) w -= w.dot(frame.col(k)) * frame.col(k);
    // near-degenerate axes fall through to the next one
    if (w.norm() > 1e-2) frame.col(found++) = w.normalized();
  }
  return frame;
}

double dlambda_norm_sq(const FormProvider& form, const VectorXd& p, double h) {
  if (std::abs(p.norm() - 1.0) > 1e-10) throw DomainError("base point is not on the unit sphere");
  const MatrixXd t = tangent_frame(p);
  const int n = static_cast<int>(t.cols());
  std::vector<MatrixXd> dv;  // dv[s].col(a) = Dv_s e_a
  for (int a = 0; a < n; ++a) {
    const auto plus = form(p + h * t.col(a)), minus = form(p - h * t.col(a));
    if (dv.empty()) dv.assign(plus.size(), MatrixXd::Zero(p.size(), n));
    for (size_t s = 0; s < plus.size(); ++s) dv[s].col(a) = (plus[s] - minus[s]) / (2.0 * h);
  }
  double acc = 0.0;
  for (const auto& d : dv) {
    const MatrixXd m = t.transpose() * d;  // m(b, a) = <Dv e_a, e_b>
    acc += (m - m.transpose()).squaredNorm();
  }
  return acc;
}

double scal_from_form(const FormProvider& form, double base_scal, const VectorXd& p, double h) {
  return base_scal - 0.25 * dlambda_norm_sq(form, p, h);
}

double linear_form_scal(const std::vector<MatrixXd>& j, const VectorXd& p) {
  const int m = static_cast<int>(p.size());
  double acc = 0.0;
  for (const auto& x : j) acc += x.squaredNorm() - 2.0 * (x * p).squaredNorm();
  return round_sphere_scal(m) - 0.25 * acc;
}

std::vector<double> linear_form_critical_values(const std::vector<MatrixXd>& j) {
  if (j.empty()) throw ConfigError("need at least one j");
  const int m = static_cast<int>(j[0].rows());
  MatrixXd s = MatrixXd::Zero(m, m);
  double sq = 0.0;
  for (const auto& x : j) {
    s -= x * x;
    sq += x.squaredNorm();
  }
  const VectorXd ev = Eigen::SelfAdjointEigenSolver<MatrixXd>(s).eigenvalues();
  std::vector<double> out;
  for (int i = 0; i < m; ++i) out.push_back(round_sphere_scal(m) - 0.25 * sq + 0.5 * ev(i));
  return out;
}

std::vector<Vector3d> fibonacci_sphere(int n) {
  if (n < 1) throw ConfigError("need at least one sample point");
  std::vector<Vector3d> out(n);
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    out[i] = Vector3d(r * std::cos(phi), r * std::sin(phi), z);
  }
  return out;
}

std::vector<int> MaxPreimage::dimensions() const {
  std::vector<int> d;
  for (const auto& c : clusters) d.push_back(c.dimension);
  return d;
}

MaxPreimage max_scal_preimage(const SphereQuadMap& c, double spacing, double band) {
  if (!(spacing > 0.0 && spacing < 1.0)) throw ConfigError("sample spacing must lie in (0, 1)");
  if (!(band > 0.0)) throw ConfigError("band must be positive");
  MaxPreimage res;
  res.spacing = spacing;
  res.samples = static_cast<int>(std::ceil(4.0 * kPi / (spacing * spacing)));
  std::vector<Vector3d> pts = fibonacci_sphere(res.samples);
  std::vector<double> vals(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    pts[i] = descend_to_min(c, pts[i]);
    vals[i] = scal_s2t2(c, pts[i]);
  }
  res.max_scal = *std::max_element(vals.begin(), vals.end());

  std::vector<Vector3d> kept;
  for (size_t i = 0; i < pts.size(); ++i)
    if (vals[i] >= res.max_scal - band) kept.push_back(pts[i]);

  const double link = 3.0 * spacing;
  const PointGrid grid(kept, link);
  std::vector<int> parent(kept.size());
  std::iota(parent.begin(), parent.end(), 0);
  for (size_t i = 0; i < kept.size(); ++i)
    grid.for_neighbors(kept[i], link, [&](int k) {
      const int a = find_root(parent, static_cast<int>(i)), b = find_root(parent, k);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    });

  std::map<int, std::vector<int>> members;
  for (size_t i = 0; i < kept.size(); ++i) members[find_root(parent, static_cast<int>(i))].push_back(static_cast<int>(i));

  for (const auto& [root, idx] : members) {
    PreimageCluster cl;
    for (int i : idx) {
      cl.points.push_back(kept[i]);
      cl.centroid += kept[i];
    }
    cl.centroid /= static_cast<double>(idx.size());

    // local PCA around a strided subset of cluster points
    std::map<int, int> votes;
    const size_t stride = std::max<size_t>(1, idx.size() / 64);
    for (size_t s = 0; s < idx.size(); s += stride) {
      const Vector3d& q = kept[idx[s]];
      const Eigen::Matrix<double, 3, 2> t = frame3(q);
      std::vector<Vector2d> local;
      grid.for_neighbors(q, link, [&](int k) {
        if (find_root(parent, k) == root) local.push_back(t.transpose() * (kept[k] - q));
      });
      Eigen::MatrixXd m(local.size(), 2);
      for (size_t r = 0; r < local.size(); ++r) m.row(r) = local[r].transpose();
      double spread = 0.0;
      for (const auto& v : local) spread = std::max(spread, v.norm());
      int dim = 0;
      if (spread > 0.1 * spacing) {
        m.rowwise() -= m.colwise().mean();
        const Eigen::JacobiSVD<MatrixXd> svd(m);
        const VectorXd sv = svd.singularValues();
        for (int k = 0; k < sv.size(); ++k) dim += sv(k) > 0.1 * sv(0) ? 1 : 0;
      }
      ++votes[dim];
    }
    int best = 0, count = -1;
    for (const auto& [d, n] : votes)
      if (n >= count) best = d, count = n;
    cl.dimension = best;
    res.clusters.push_back(std::move(cl));
  }
  return res;
}

QuadratureRuleS2 quadrature_rule(int degree) {
  if (degree < 0) throw ConfigError("quadrature degree must be nonnegative");
  const int n = (degree + 2) / 2;  // 2n - 1 >= degree
  MatrixXd jac = MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) jac(k, k - 1) = jac(k - 1, k) = k / std::sqrt(4.0 * k * k - 1.0);
  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(jac);
  const int m = degree + 1;
  QuadratureRuleS2 rule;
  rule.exactness_degree = degree;
  for (int i = 0; i < n; ++i) {
    const double x = es.eigenvalues()(i);
    const double w = 2.0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
    const double r = std::sqrt(std::max(0.0, 1.0 - x * x));
    for (int j = 0; j < m; ++j) {
      const double phi = 2.0 * kPi * j / m;
      rule.nodes.emplace_back(r * std::cos(phi), r * std::sin(phi), x);
      rule.weights.push_back(w * 2.0 * kPi / m);
    }
  }
  return rule;
}

double sphere_monomial_integral(int a, int b, int c) {
  if (a < 0 || b < 0 || c < 0) throw ConfigError("monomial exponents must be nonnegative");
  if (a % 2 || b % 2 || c % 2) return 0.0;
  return 2.0 * std::tgamma((a + 1) / 2.0) * std::tgamma((b + 1) / 2.0) * std::tgamma((c + 1) / 2.0) /
         std::tgamma((a + b + c + 3) / 2.0);
}

std::vector<double> scal_moments(const SphereQuadMap& c, int k_max, const QuadratureRuleS2& rule) {
  if (k_max < 1) throw ConfigError("need at least one moment");
  if (rule.exactness_degree < 4 * k_max + 2) throw ConfigError("quadrature rule is not exact enough for the moments");
  std::vector<double> s(rule.nodes.size());
  for (size_t i = 0; i < s.size(); ++i) s[i] = scal_s2t2(c, rule.nodes[i].normalized());
  std::vector<double> out;
  std::vector<double> terms(s.size());
  for (int k = 1; k <= k_max; ++k) {
    for (size_t i = 0; i < s.size(); ++i) terms[i] = rule.weights[i] * std::pow(s[i], k);
    out.push_back(pairwise_sum(terms));
  }
  return out;
}

ScalRange scal_range(const SphereQuadMap& c, int samples) {
  const auto pts = fibonacci_sphere(samples);
  std::vector<std::pair<double, int>> vals;
  for (int i = 0; i < samples; ++i) vals.emplace_back(scal_s2t2(c, pts[i]), i);
  std::sort(vals.begin(), vals.end());
  ScalRange r{vals.front().first, vals.back().first};
  const int k = std::min<int>(10, samples);
  for (int i = 0; i < k; ++i) {
    r.min = std::min(r.min, scal_s2t2(c, polish(c, pts[vals[i].second], -1.0)));
    r.max = std::max(r.max, scal_s2t2(c, polish(c, pts[vals[samples - 1 - i].second], 1.0)));
  }
  return r;
}

Eigen::Matrix<double, 3, 2> lambda_coefficients(const SphereQuadMap& c, const Vector3d& p) {
  Eigen::Matrix<double, 3, 2> l;
  l.col(0) = (c.c1 * p).cross(p);
  l.col(1) = (c.c2 * p).cross(p);
  return l;
}

TangentS2T2 horizontal_vector(const SphereQuadMap& c, const Vector3d& p, const Vector3d& x) {
  check_unit(p);
  if (std::abs(x.dot(p)) > 1e-10 * std::max(1.0, x.norm())) throw DomainError("X is not tangent at p");
  return {x, -lambda_coefficients(c, p).transpose() * x};
}

double g_lambda(const SphereQuadMap& c, const Vector3d& p, const TangentS2T2& a, const TangentS2T2& b) {
  const Eigen::Matrix<double, 3, 2> l = lambda_coefficients(c, p);
  return a.base.dot(b.base) + (l.transpose() * a.base + a.fiber).dot(l.transpose() * b.base + b.fiber);
}

Matrix3d symmetric_conjugator(const Matrix3d& c, const Matrix3d& cp, double tol) {
  const Eigen::SelfAdjointEigenSolver<Matrix3d> e1(c), e2(cp);
  const double mismatch = (e1.eigenvalues() - e2.eigenvalues()).norm();
  if (mismatch > tol * std::max(1.0, c.norm())) throw NotConjugateError("spectra differ", mismatch);
  Matrix3d v2 = e2.eigenvectors();
  Matrix3d a = v2 * e1.eigenvectors().transpose();
  if (a.determinant() < 0.0) {
    v2.col(0) *= -1.0;
    a = v2 * e1.eigenvectors().transpose();
  }
  return a;
}

double sphere_form_conjugation_check(const std::vector<MatrixXd>& j, const std::vector<MatrixXd>& jp,
                                     const VectorXd& z, const MatrixXd& a, int samples, std::uint64_t seed) {
  if (j.size() != jp.size() || static_cast<int>(j.size()) != z.size()) throw ConfigError("size mismatch");
  const int m = static_cast<int>(a.rows());
  MatrixXd jz = MatrixXd::Zero(m, m), jpz = MatrixXd::Zero(m, m);
  for (size_t s = 0; s < j.size(); ++s) {
    jz += z(s) * j[s];
    jpz += z(s) * jp[s];
  }
  if ((a.transpose() * a - MatrixXd::Identity(m, m)).norm() > 1e-10) throw DomainError("A is not orthogonal");
  const double res = (a * jz * a.transpose() - jpz).norm();
  if (res > 1e-8 * std::max(1.0, jz.norm())) throw NotConjugateError("A does not conjugate j_Z to j'_Z", res);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    VectorXd p(m), x(m);
    for (int k = 0; k < m; ++k) p(k) = nd(rng), x(k) = nd(rng);
    p.normalize();
    x -= x.dot(p) * p;
    const double lhs = -0.5 * (jpz * p).dot(x);
    const double rhs = -0.5 * (jz * (a.transpose() * p)).dot(a.transpose() * x);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

double sphere_form_conjugation_check(const SphereQuadMap& c, const SphereQuadMap& cp, const Vector2d& z,
                                     const Matrix3d& a, int samples, std::uint64_t seed) {
  const Matrix3d cz = c.at(z), cpz = cp.at(z);
  if ((a.transpose() * a - Matrix3d::Identity()).norm() > 1e-10 || a.determinant() < 0.0)
    throw DomainError("A is not in SO(3)");
  const double res = (a * cz * a.transpose() - cpz).norm();
  if (res > 1e-8 * std::max(1.0, cz.norm())) throw NotConjugateError("A does not conjugate c_Z to c'_Z", res);
  const SymTensor3 q = phi_map(cz), qp = phi_map(cpz), aq = act(a, q);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    Vector3d p(nd(rng), nd(rng), nd(rng)), x(nd(rng), nd(rng), nd(rng));
    p.normalize();
    x -= x.dot(p) * p;
    const double lp = qp.apply(p, p).dot(x);
    const double pushed = aq.apply(p, p).dot(x);
    const Vector3d ap = a.transpose() * p;
    const double pulled = q.apply(ap, ap).dot(a.transpose() * x);
    worst = std::max({worst, std::abs(lp - pushed), std::abs(lp - pulled)});
  }
  return worst;
}

double pairwise_sum(const std::vector<double>& v) { return pairwise_range(v.data(), v.size()); }

}  // namespace isospec
