#include "isospec/rep_spectra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "isospec/parallel.hpp"

namespace isospec {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

template <typename Scalar>
MatrixXcd tensor_rep(const Mat<Scalar>& x, int k, int cap) {
  if (k < 0) throw ConfigError("tensor power must be nonnegative");
  if (k > cap) throw ConfigError("tensor power " + std::to_string(k) + " exceeds cap " + std::to_string(cap));
  if (x.rows() != x.cols()) throw ConfigError("tensor_rep needs a square matrix");
  const int n = static_cast<int>(x.rows());
  const MatrixXcd xc = x.template cast<Complex>();
  if (k == 0) return MatrixXcd::Zero(1, 1);
  MatrixXcd out = xc;
  for (int p = 2; p <= k; ++p) {
    // out (x) Id + Id (x) x, block (a, b) of size n
    const int m = static_cast<int>(out.rows());
    MatrixXcd next = MatrixXcd::Zero(m * n, m * n);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        if (out(a, b) != Complex(0.0)) next.block(a * n, b * n, n, n).diagonal().array() += out(a, b);
        if (a == b) next.block(a * n, b * n, n, n) += xc;
      }
    out = std::move(next);
  }
  return out;
}

std::string BlockSpec::key() const {
  std::ostringstream os;
  os << "k=" << k;
  if (!mu.empty()) {
    os << ",mu=";
    for (size_t i = 0; i < mu.size(); ++i) os << (i ? ":" : "") << mu[i];
  }
  return os.str();
}

BlockSpec parse_block_key(const std::string& key) {
  BlockSpec b;
  std::istringstream is(key);
  std::string part;
  bool have_k = false;
  while (std::getline(is, part, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw ConfigError("bad block key: " + key);
    const std::string name = part.substr(0, eq), val = part.substr(eq + 1);
    try {
      if (name == "k") {
        b.k = std::stoi(val);
        have_k = true;
      } else if (name == "mu") {
        std::istringstream ms(val);
        std::string x;
        while (std::getline(ms, x, ':')) b.mu.push_back(std::stoi(x));
      } else {
        throw ConfigError("bad block key: " + key);
      }
    } catch (const std::invalid_argument&) {
      throw ConfigError("bad block key: " + key);
    }
  }
  if (!have_k) throw ConfigError("block key needs k: " + key);
  return b;
}

template <typename Scalar>
MatrixXcd RepBlock<Scalar>::generator(const VectorXd& coords) const {
  if (kind == LayoutKind::Embedded) return tensor_rep<Scalar>(algebra->element(coords), spec.k);
  const Mat<Scalar> x = algebra->block(algebra->element(coords), 0);
  MatrixXcd g = tensor_rep<Scalar>(x, spec.k);
  const VectorXd h = torus.coords.transpose() * coords;
  double mu_h = 0.0;
  for (int s = 0; s < torus.rank(); ++s) mu_h += spec.mu[s] * h(s);
  if (mu_h != 0.0) g.diagonal().array() += Complex(0.0, 2.0 * kPi * mu_h);
  return g;
}

template <typename Scalar>
RepBlock<Scalar> make_block(const Layout<Scalar>& layout, const BlockSpec& spec) {
  RepBlock<Scalar> b;
  b.spec = spec;
  b.algebra = layout.algebra;
  b.torus = layout.torus;
  b.kind = layout.kind;
  if (spec.k < 0 || spec.k > kTensorCap) throw ConfigError("tensor power out of range in block " + spec.key());
  if (layout.kind == LayoutKind::Product) {
    if (static_cast<int>(spec.mu.size()) != layout.torus.rank())
      throw ConfigError("block " + spec.key() + " needs one character entry per torus direction");
    b.dim = static_cast<int>(std::pow(layout.algebra->summands()[0].matrix_size, spec.k));
  } else {
    b.spec.mu.clear();
    b.dim = static_cast<int>(std::pow(layout.algebra->matrix_size(), spec.k));
  }
  return b;
}

template <typename Scalar>
MatrixXcd block_laplacian(const LeftInvariantMetric<Scalar>& metric, const RepBlock<Scalar>& block) {
  if (metric.lambda.algebra != block.algebra) throw ConfigError("metric and block live on different algebras");
  MatrixXcd lap = MatrixXcd::Zero(block.dim, block.dim);
  for (int i = 0; i < metric.dim(); ++i) {
    const MatrixXcd g = block.generator(metric.frame.col(i));
    lap -= g * g;
  }
  return lap;
}

SpectrumReport spectrum_of(const MatrixXcd& op, const std::string& key, double t, double cluster_tol) {
  SpectrumReport r;
  r.block_key = key;
  r.t = t;
  r.hermitian_residual = (op - op.adjoint()).norm();
  const MatrixXcd herm = 0.5 * (op + op.adjoint());
  r.eigenvalues = Eigen::SelfAdjointEigenSolver<MatrixXcd>(herm, Eigen::EigenvaluesOnly).eigenvalues();
  for (int i = 0; i < r.eigenvalues.size(); ++i) {
    const double v = r.eigenvalues(i);
    if (!r.multiplicities.empty() && v - r.multiplicities.back().first <= cluster_tol)
      ++r.multiplicities.back().second;
    else
      r.multiplicities.emplace_back(v, 1);
  }
  return r;
}

template <typename Scalar>
SpectraComparison spectra_equal_along_family(const Layout<Scalar>& layout, const std::vector<BlockSpec>& blocks,
                                             const std::vector<double>& t_samples, double tol, int jobs) {
  if (t_samples.empty()) throw ConfigError("need at least one t sample");
  if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
  for (double t : t_samples)
    if (!layout.contains(t)) throw DomainError("t outside the family domain for layout " + layout.key);

  std::vector<LambdaMap<Scalar>> lams;
  for (double t : t_samples) lams.push_back(layout.lambda_at(t));
  SpectraComparison out;
  out.conjugacy_ok = true;
  for (size_t i = 1; i < lams.size(); ++i) out.conjugacy_ok = out.conjugacy_ok && verify_conjugacy(lams[0], lams[i]).pass;

  std::vector<LeftInvariantMetric<Scalar>> metrics;
  for (const auto& l : lams) metrics.push_back(metric_from_lambda(l));
  std::vector<RepBlock<Scalar>> reps;
  for (const auto& b : blocks) reps.push_back(make_block(layout, b));

  const int nt = static_cast<int>(t_samples.size());
  std::vector<SpectrumReport> spectra(reps.size() * nt);
  parallel_for(static_cast<int>(spectra.size()), jobs, [&](int idx) {
    const int b = idx / nt, ti = idx % nt;
    spectra[idx] = spectrum_of(block_laplacian(metrics[ti], reps[b]), reps[b].spec.key(), t_samples[ti]);
  });

  for (size_t b = 0; b < reps.size(); ++b) {
    BlockComparison bc;
    bc.block_key = reps[b].spec.key();
    bc.min_eigenvalue = INFINITY;
    for (int ti = 0; ti < nt; ++ti) {
      const auto& s = spectra[b * nt + ti];
      bc.min_eigenvalue = std::min(bc.min_eigenvalue, s.eigenvalues.minCoeff());
      const double dev = (s.eigenvalues - spectra[b * nt].eigenvalues).cwiseAbs().maxCoeff();
      if (ti == 0 || dev > bc.max_deviation) {
        bc.max_deviation = dev;
        bc.worst_t0 = t_samples[0];
        bc.worst_t1 = t_samples[ti];
      }
      bc.spectra.push_back(s);
    }
    out.max_deviation = std::max(out.max_deviation, bc.max_deviation);
    out.blocks.push_back(std::move(bc));
  }
  std::stable_sort(out.blocks.begin(), out.blocks.end(),
                   [](const BlockComparison& a, const BlockComparison& b) { return a.block_key < b.block_key; });
  bool psd = true;
  for (const auto& bc : out.blocks) psd = psd && bc.min_eigenvalue > -1e-10;
  out.pass = out.conjugacy_ok && psd && out.max_deviation <= tol;
  return out;
}

template <typename Scalar>
TwistedLaplacianCheck twisted_laplacian_residual(const LambdaMap<Scalar>& lambda, const RepBlock<Scalar>& block) {
  if (block.kind != LayoutKind::Product) throw ConfigError("the twisted Laplacian identity needs a product layout");
  TwistedLaplacianCheck r;
  VectorXd mu(lambda.rank());
  for (int s = 0; s < lambda.rank(); ++s) mu(s) = block.spec.mu[s];
  const VectorXd y = lambda.coeffs * mu;  // lambda^T(Z_mu) with Z_mu = sum mu_s Z_s
  r.y_norm = y.norm();
  const Mat<Scalar> ym = lambda.algebra->element(y);
  for (const auto& z : lambda.torus.elements) r.commute_residual = std::max(r.commute_residual, commutator(ym, z).norm());

  LambdaMap<Scalar> zero = lambda;
  zero.coeffs.setZero();
  const MatrixXcd lap = block_laplacian(metric_from_lambda(lambda), block);
  const MatrixXcd lap0 = block_laplacian(metric_from_lambda(zero), block);
  MatrixXcd expect = lap0 + Complex(0.0, 4.0 * kPi) * block.generator(y);
  expect.diagonal().array() += 4.0 * kPi * kPi * y.squaredNorm();
  r.residual = (lap - expect).norm();
  return r;
}

double off_scalar_residual(const MatrixXcd& m) {
  const Complex c = m.trace() / static_cast<double>(m.rows());
  MatrixXcd d = m;
  d.diagonal().array() -= c;
  return d.norm();
}

#define ISOSPEC_INSTANTIATE(S)                                                                            \
  template MatrixXcd tensor_rep<S>(const Mat<S>&, int, int);                                             \
  template struct RepBlock<S>;                                                                            \
  template RepBlock<S> make_block<S>(const Layout<S>&, const BlockSpec&);                                 \
  template MatrixXcd block_laplacian<S>(const LeftInvariantMetric<S>&, const RepBlock<S>&);               \
  template SpectraComparison spectra_equal_along_family<S>(const Layout<S>&, const std::vector<BlockSpec>&, \
                                                           const std::vector<double>&, double, int);      \
  template TwistedLaplacianCheck twisted_laplacian_residual<S>(const LambdaMap<S>&, const RepBlock<S>&);

ISOSPEC_INSTANTIATE(double)
ISOSPEC_INSTANTIATE(Complex)

#undef ISOSPEC_INSTANTIATE

}  // namespace isospec
