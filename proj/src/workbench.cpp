#include "isospec/workbench.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "isospec/parallel.hpp"
#include "isospec/sphere_geom.hpp"

#ifndef ISOSPEC_VERSION
#define ISOSPEC_VERSION "0.0.0"
#endif

namespace isospec {

using nlohmann::json;

namespace {

struct CommandInfo {
  Command command;
  const char* name;
  const char* sub;
  std::vector<std::string> families;  // first is the default
  std::map<std::string, double> tolerances;
  std::map<std::string, double> params;
};

const std::vector<std::string> kLayoutKeys = {"so5", "su3", "so8", "so9-embedded", "su6-embedded", "flow"};

const std::vector<CommandInfo>& command_table() {
  static const std::vector<CommandInfo> table = {
      {Command::VerifyFamily, "VERIFY_FAMILY", "verify-family", kLayoutKeys,
       {{"charpoly", 1e-9}, {"pab", 1e-9}, {"closed_form", 1e-9}}, {{"grid", 17}}},
      {Command::Witness, "WITNESS", "witness", kLayoutKeys, {{"witness", 1e-8}, {"commute", 1e-10}}, {{"grid", 5}}},
      {Command::Curvature, "CURVATURE", "curvature", kLayoutKeys,
       {{"koszul", 1e-8}, {"ricci_identity", 1e-8}, {"ricci_variation", 1e-4}}, {}},
      {Command::Heat, "HEAT", "heat", kLayoutKeys, {{"constancy", 1e-8}, {"a2_1_variation", 1e-6}}, {}},
      {Command::Flow, "FLOW", "flow", {"flow"}, {{"dq", 1e-9}, {"drift", 1e-6}, {"q_change", 1e-3}},
       {{"T", 0.2}, {"dt", 1e-3}, {"exponent", 5}}},
      {Command::Sphere, "SPHERE", "sphere", {"s2t2", "s4-so5"},
       {{"fd", 1e-6},
        {"zero_map", 1e-14},
        {"charpoly", 1e-9},
        {"discriminator", 1e-6},
        {"moments", 1e-9},
        {"range", 1e-6},
        {"preimage", 1e-3},
        {"critical_gap", 1e-4},
        {"critical_max", 1e-10}},
       {{"fd_points", 100}, {"spacing", 0.025}, {"moment_k", 6}, {"quad_degree", 26}, {"range_samples", 20000}}},
      {Command::Spectra, "SPECTRA", "spectra", kLayoutKeys,
       {{"spectra", 1e-8}, {"psd", 1e-10}, {"twisted", 1e-10}, {"y_norm", 1e-10}, {"commute", 1e-12}, {"schur", 1e-10}},
       {}},
      {Command::Conformal, "CONFORMAL", "conformal", {"so5", "su3"}, {{"slice", 1e-3}, {"identity_max", 1e-12}},
       {{"eps", 0.1}, {"samples", 2000}}},
  };
  return table;
}

const CommandInfo& info(Command c) {
  for (const auto& i : command_table())
    if (i.command == c) return i;
  throw ConfigError("unknown command");
}

std::string t_label(double t) {
  std::ostringstream os;
  os << "t=" << t;
  return os.str();
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
  return out;
}

std::pair<double, double> layout_domain(const std::string& key) {
  if (key == "so5" || key == "so9-embedded") return {kSO5TMin, kSO5TMax};
  if (key == "su3" || key == "su6-embedded" || key == "so8") return {-kSU3TMax, kSU3TMax};
  if (key == "flow") return {0.0, 0.2};
  return {-INFINITY, INFINITY};
}

std::vector<double> default_t_values(Command c, const std::string& family) {
  if (c == Command::VerifyFamily) {
    const auto [a, b] = layout_domain(family);
    return linspace(a, b, 11);
  }
  if (c == Command::Conformal) return family == "su3" ? std::vector<double>{0.0, 0.5} : std::vector<double>{0.0, 0.3};
  if (family == "s4-so5") return {0.0, 0.1};
  if (family == "su3" || family == "su6-embedded") return {0.0, 0.3, 0.6};
  if (family == "so8") return {0.0, 0.3};
  if (family == "flow") return {0.0, 0.1, 0.2};
  return {0.0, 0.1, 0.3};
}

bool uses_t_values(const ExperimentConfig& cfg) {
  return cfg.command != Command::Flow && !(cfg.command == Command::Sphere && cfg.family == "s2t2");
}

bool is_product_layout(const std::string& key) { return key == "so5" || key == "su3" || key == "flow"; }

std::vector<BlockSpec> default_blocks(const std::string& family) {
  std::vector<BlockSpec> out;
  for (int k : {1, 2}) {
    if (!is_product_layout(family)) {
      out.push_back({k, {}});
      continue;
    }
    for (auto mu : std::vector<std::vector<int>>{{0, 0}, {1, 0}, {0, 1}, {1, 1}, {2, 1}}) out.push_back({k, mu});
  }
  return out;
}

int int_param(const ExperimentConfig& cfg, const std::string& name, int min_value) {
  const double v = cfg.params.at(name);
  if (v != std::floor(v) || v < min_value || v > 1e8)
    throw ConfigError("parameter " + name + " must be an integer >= " + std::to_string(min_value));
  return static_cast<int>(v);
}

BlockSpec block_from_json(const json& b) {
  if (b.is_string()) return parse_block_key(b.get<std::string>());
  BlockSpec s;
  if (b.is_array() && b.size() == 2 && b[0].is_number_integer() && b[1].is_array()) {
    s.k = b[0].get<int>();
    for (const auto& m : b[1]) {
      if (!m.is_number_integer()) throw ConfigError("block characters must be integers");
      s.mu.push_back(m.get<int>());
    }
    return s;
  }
  if (b.is_array() && b.size() == 1 && b[0].is_number_integer()) {
    s.k = b[0].get<int>();
    return s;
  }
  throw ConfigError("block must be \"k=..,mu=..\" or [k, [mu...]]: " + b.dump());
}

void fill_named(std::map<std::string, double>& into, const json& j, const std::string& what, bool positive) {
  if (!j.is_object()) throw ConfigError(what + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!into.count(k)) throw ConfigError("unknown " + what + " entry: " + k);
    if (!v.is_number()) throw ConfigError(what + " entry " + k + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x) || (positive && !(x > 0.0))) throw ConfigError(what + " entry " + k + " must be positive");
    into[k] = x;
  }
}

void validate(const ExperimentConfig& cfg) {
  const auto& fams = info(cfg.command).families;
  if (std::find(fams.begin(), fams.end(), cfg.family) == fams.end())
    throw ConfigError("unknown family \"" + cfg.family + "\" for " + command_name(cfg.command));
  if (uses_t_values(cfg)) {
    if (cfg.t_values.empty()) throw ConfigError("t_values must not be empty");
    const auto [a, b] = cfg.family == "s4-so5" ? layout_domain("so5") : layout_domain(cfg.family);
    for (double t : cfg.t_values)
      if (!std::isfinite(t) || t < a - 1e-12 || t > b + 1e-12)
        throw DomainError(t_label(t) + " outside the domain of family " + cfg.family);
    if (cfg.command == Command::Conformal && cfg.t_values.size() != 2)
      throw ConfigError("CONFORMAL needs exactly two t values");
  }
  for (const auto& [k, v] : cfg.params)
    if (!(v > 0.0)) throw ConfigError("parameter " + k + " must be positive");
  if (cfg.jobs < 1) throw ConfigError("jobs must be positive");
}

// ---- report helpers ----

void check_max(RunReport& r, std::string name, double measured, double tol) {
  r.records.push_back({std::move(name), measured <= tol, measured, tol, false});
}

void check_min(RunReport& r, std::string name, double measured, double bound) {
  r.records.push_back({std::move(name), measured >= bound, measured, bound, true});
}

double tol(const ExperimentConfig& cfg, const std::string& name) { return cfg.tolerances.at(name); }

template <typename F>
void with_layout(const std::string& key, F&& f) {
  if (key == "so5") return f(so5_product_layout());
  if (key == "su3") return f(su3_product_layout());
  if (key == "so8") return f(so8_layout());
  if (key == "so9-embedded") return f(so9_embedded_layout());
  if (key == "su6-embedded") return f(su6_embedded_layout());
  if (key == "flow") return f(flow_product_layout());
  throw ConfigError("unknown family: " + key);
}

// ---- pipelines ----

template <typename S>
void verify_family(const Layout<S>& lay, const ExperimentConfig& cfg, RunReport& r) {
  const int grid = int_param(cfg, "grid", 2);
  const auto& ts = cfg.t_values;
  const auto j0 = lay.j_at(ts[0]);
  double cp = 0.0, pab = 0.0;
  json samples = json::array();
  for (double t : ts) {
    const auto j = lay.j_at(t);
    const auto pc = is_isospectral_pair(j0, j, grid, tol(cfg, "charpoly"));
    cp = std::max(cp, pc.charpoly_residual);
    pab = std::max(pab, pc.pab_residual);
    const auto d = discriminators(j);
    samples.push_back({{"t", t}, {"q", d.q}, {"norm4", d.norm4}, {"eigs", d.eigs}});
  }
  check_max(r, "charpoly_pair", cp, tol(cfg, "charpoly"));
  check_max(r, "pab_pair", pab, tol(cfg, "pab"));

  if (cfg.family == "so5") {
    double worst = 0.0;
    for (double t : ts) {
      const auto j = lay.j_at(t);
      for (double s : linspace(-1.0, 1.0, grid))
        for (double u : linspace(-1.0, 1.0, grid)) {
          const VectorXd c = charpoly_coeffs<S>(S(s) * j.images[0] + S(u) * j.images[1]);
          VectorXd expect = VectorXd::Zero(6);
          expect(0) = 1.0;
          expect(2) = 3 * s * s + 2 * u * u;
          expect(4) = (s * s + u * u) * (s * s + u * u);
          worst = std::max(worst, (c - expect).cwiseAbs().maxCoeff());
        }
    }
    check_max(r, "charpoly_closed_form", worst, tol(cfg, "closed_form"));
  }
  if (cfg.family == "so5" || cfg.family == "su3" || cfg.family == "so9-embedded" || cfg.family == "su6-embedded") {
    const bool so = cfg.family == "so5" || cfg.family == "so9-embedded";
    double worst = 0.0;
    for (const auto& s : samples) {
      const double t = s["t"].get<double>();
      const double expect = so ? 4 * t * t - 4 * t + 26 : 8 - 4 * t * t;
      worst = std::max(worst, std::abs(s["norm4"].get<double>() - expect));
    }
    check_max(r, "norm4_closed_form", worst, tol(cfg, "closed_form"));
  }
  r.data["samples"] = samples;
}

template <typename S>
void witness(const Layout<S>& lay, const ExperimentConfig& cfg, RunReport& r) {
  const int grid = int_param(cfg, "grid", 2);
  const auto l0 = lay.lambda_at(cfg.t_values[0]);
  json pairs = json::array();
  for (size_t i = 1; i < cfg.t_values.size(); ++i) {
    const double t = cfg.t_values[i];
    const auto rep = verify_conjugacy(l0, lay.lambda_at(t), grid, tol(cfg, "witness"));
    const std::string lbl = " " + t_label(t);
    if (rep.charpoly_only)
      check_max(r, "charpoly_residual" + lbl, rep.charpoly_residual, tol(cfg, "witness"));
    else
      check_max(r, "witness_residual" + lbl, rep.witness_residual, tol(cfg, "witness"));
    check_max(r, "commute_residual" + lbl, rep.commute_residual, tol(cfg, "commute"));
    pairs.push_back({{"t0", cfg.t_values[0]},
                     {"t1", t},
                     {"charpoly_only", rep.charpoly_only},
                     {"charpoly_residual", rep.charpoly_residual},
                     {"witness_residual", rep.witness_residual},
                     {"commute_residual", rep.commute_residual}});
  }
  r.data["pairs"] = pairs;
}

template <typename S>
void curvature(const Layout<S>& lay, const ExperimentConfig& cfg, RunReport& r) {
  const auto& ts = cfg.t_values;
  const int n = static_cast<int>(ts.size());
  std::vector<MatrixXd> ric(n);
  std::vector<Curvature> kc(n);
  parallel_for(n, cfg.jobs, [&](int i) {
    const auto m = metric_from_lambda(lay.lambda_at(ts[i]));
    ric[i] = ricci(m);
    kc[i] = koszul_connection_and_curvature(m);
  });
  const auto l0 = lay.lambda_at(ts[0]);
  json records = json::array();
  for (int i = 0; i < n; ++i) {
    const std::string lbl = " " + t_label(ts[i]);
    check_max(r, "ricci_closed_vs_koszul" + lbl, (ric[i] - kc[i].ric).norm(), tol(cfg, "koszul"));
    if (i > 0) {
      const double lhs = ric[0].squaredNorm() - ric[i].squaredNorm();
      check_max(r, "ricci_norm_identity" + lbl, std::abs(lhs - ricci_norm_diff_rhs(l0, lay.lambda_at(ts[i]))),
                tol(cfg, "ricci_identity"));
      check_min(r, "ricci_norm_variation" + lbl, std::abs(lhs), tol(cfg, "ricci_variation"));
    }
    records.push_back({{"family", cfg.family},
                       {"t", ts[i]},
                       {"scal", kc[i].scal},
                       {"ric_norm_sq", ric[i].squaredNorm()},
                       {"ric_min_eigenvalue", Eigen::SelfAdjointEigenSolver<MatrixXd>(ric[i]).eigenvalues()(0)},
                       {"riem_norm_sq", kc[i].riem_norm_sq}});
  }
  r.data["records"] = records;
}

template <typename S>
void heat(const Layout<S>& lay, const ExperimentConfig& cfg, RunReport& r) {
  const auto& ts = cfg.t_values;
  const int n = static_cast<int>(ts.size());
  std::vector<CurvatureReport> reps(n);
  parallel_for(n, cfg.jobs, [&](int i) { reps[i] = heat_invariants(metric_from_lambda(lay.lambda_at(ts[i]))); });
  double ds = 0.0, d20 = 0.0, d21 = 0.0;
  json records = json::array();
  for (int i = 0; i < n; ++i) {
    ds = std::max(ds, std::abs(reps[i].scal - reps[0].scal));
    d20 = std::max(d20, std::abs(reps[i].a2_0 - reps[0].a2_0));
    d21 = std::max(d21, std::abs(reps[i].a2_1 - reps[0].a2_1));
    records.push_back({{"family", cfg.family},
                       {"t", ts[i]},
                       {"scal", reps[i].scal},
                       {"ric_norm_sq", reps[i].ric_norm_sq},
                       {"riem_norm_sq", reps[i].riem_norm_sq},
                       {"a0", reps[i].a0},
                       {"a1", reps[i].a1},
                       {"a2_0", reps[i].a2_0},
                       {"a2_1", reps[i].a2_1}});
  }
  check_max(r, "scal_constancy", ds, tol(cfg, "constancy"));
  check_max(r, "a2_0_constancy", d20, tol(cfg, "constancy"));
  if (n > 1) check_min(r, "a2_1_variation", d21, tol(cfg, "a2_1_variation"));
  r.data["records"] = records;
}

void flow(const ExperimentConfig& cfg, RunReport& r) {
  const auto j0 = flow_seed();
  const double dq = dq_along_Y(j0);
  check_max(r, "dq_at_seed", std::abs(dq - 240.0), tol(cfg, "dq"));
  FlowOptions opts;
  opts.exponent = int_param(cfg, "exponent", 1);
  opts.drift_budget = tol(cfg, "drift");
  const double T = cfg.params.at("T"), dt = cfg.params.at("dt");
  r.data["dq_at_seed"] = dq;
  try {
    const auto run = flow_integrate(j0, T, dt, opts);
    check_max(r, "pab_drift", run.max_drift, tol(cfg, "drift"));
    check_min(r, "q_change", std::abs(run.q.back() - run.q.front()), tol(cfg, "q_change"));
    r.data["q_start"] = run.q.front();
    r.data["q_end"] = run.q.back();
    r.data["accepted_steps"] = run.accepted_steps;
    r.data["rejected_steps"] = run.rejected_steps;
  } catch (const DriftError& e) {
    check_max(r, "pab_drift", e.drift(), tol(cfg, "drift"));
  }
}

std::vector<VectorXd> random_sphere_points(int m, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<VectorXd> out;
  while (static_cast<int>(out.size()) < n) {
    VectorXd p(m);
    for (int i = 0; i < m; ++i) p(i) = nd(rng);
    if (p.norm() > 1e-6) out.push_back(p.normalized());
  }
  return out;
}

void preimage_checks(RunReport& r, const ExperimentConfig& cfg, const std::string& tag, const MaxPreimage& pre,
                     std::vector<int> expected_dims, const std::function<double(const Vector3d&)>& dist) {
  std::vector<int> dims = pre.dimensions();
  std::sort(dims.begin(), dims.end());
  std::sort(expected_dims.begin(), expected_dims.end());
  int mismatch = static_cast<int>(std::max(dims.size(), expected_dims.size()));
  if (dims.size() == expected_dims.size()) {
    mismatch = 0;
    for (size_t i = 0; i < dims.size(); ++i) mismatch += dims[i] != expected_dims[i];
  }
  double worst = 0.0;
  for (const auto& cl : pre.clusters)
    for (const auto& p : cl.points) worst = std::max(worst, dist(p));
  check_max(r, "preimage_dimension_mismatch " + tag, mismatch, 0.0);
  check_max(r, "preimage_set_distance " + tag, worst, tol(cfg, "preimage"));
  r.data["preimage"][tag] = {{"max_scal", pre.max_scal}, {"dimensions", dims}, {"samples", pre.samples}};
}

void sphere_s2t2(const ExperimentConfig& cfg, RunReport& r) {
  const auto c = quad_pair_c(), cp = quad_pair_cprime();
  const auto pair = check_c_pair(c, cp, 17, tol(cfg, "charpoly"));
  check_max(r, "charpoly_pair", pair.charpoly_residual, tol(cfg, "charpoly"));
  check_min(r, "discriminator_gap", std::abs(pair.disc_c - pair.disc_cp), tol(cfg, "discriminator"));
  r.data["discriminators"] = {pair.disc_c, pair.disc_cp};

  const auto pts = random_sphere_points(3, int_param(cfg, "fd_points", 1), cfg.seed);
  double fd = 0.0, zero = 0.0;
  for (const auto* m : {&c, &cp}) {
    const auto form = quadratic_form(*m);
    for (const auto& p : pts) fd = std::max(fd, std::abs(scal_from_form(form, 2.0, p) - scal_s2t2(*m, p)));
  }
  for (const auto& p : pts) zero = std::max(zero, std::abs(scal_s2t2(SphereQuadMap{}, p) - 2.0));
  check_max(r, "fd_vs_closed_form", fd, tol(cfg, "fd"));
  check_max(r, "zero_map_scal", zero, tol(cfg, "zero_map"));

  const int k = int_param(cfg, "moment_k", 1);
  const auto rule = quadrature_rule(int_param(cfg, "quad_degree", 1));
  const auto ma = scal_moments(c, k, rule), mb = scal_moments(cp, k, rule);
  double rel = 0.0;
  for (int i = 0; i < k; ++i) rel = std::max(rel, std::abs(ma[i] - mb[i]) / std::max(1e-300, std::abs(ma[i])));
  check_max(r, "moments_relative", rel, tol(cfg, "moments"));
  r.data["moments"] = {{"c", ma}, {"c_prime", mb}, {"quadrature_degree", rule.exactness_degree}};

  const int rs = int_param(cfg, "range_samples", 1);
  const auto ra = scal_range(c, rs), rb = scal_range(cp, rs);
  check_max(r, "range_min", std::abs(ra.min - rb.min), tol(cfg, "range"));
  check_max(r, "range_max", std::abs(ra.max - rb.max), tol(cfg, "range"));
  r.data["range"] = {{"c", {ra.min, ra.max}}, {"c_prime", {rb.min, rb.max}}};

  const double spacing = cfg.params.at("spacing");
  const auto pc = max_scal_preimage(c, spacing), pp = max_scal_preimage(cp, spacing);
  const double r2 = 1.0 / std::sqrt(2.0);
  preimage_checks(r, cfg, "c", pc, {1, 0, 0}, [&](const Vector3d& p) {
    return std::min({std::abs(p(0) + p(2)), (p - Vector3d(r2, 0, r2)).norm(), (p + Vector3d(r2, 0, r2)).norm()});
  });
  preimage_checks(r, cfg, "c_prime", pp, {0, 0}, [](const Vector3d& p) {
    return std::min((p - Vector3d(0, 1, 0)).norm(), (p + Vector3d(0, 1, 0)).norm());
  });

  r.csv.header = {"map", "x", "y", "z", "scal", "cluster"};
  for (const auto& [tag, pre, m] : {std::tuple{"c", &pc, &c}, std::tuple{"c_prime", &pp, &cp}})
    for (size_t id = 0; id < pre->clusters.size(); ++id)
      for (const auto& p : pre->clusters[id].points)
        r.csv.rows.push_back({tag, format_double(p(0)), format_double(p(1)), format_double(p(2)),
                              format_double(scal_s2t2(*m, p)), std::to_string(id)});
}

void sphere_s4(const ExperimentConfig& cfg, RunReport& r) {
  const auto pts = random_sphere_points(5, int_param(cfg, "fd_points", 1), cfg.seed);
  const double base = round_sphere_scal(5);
  double fd = 0.0;
  std::vector<std::vector<double>> crit;
  for (double t : cfg.t_values) {
    const auto j = family_so5(t);
    const auto form = linear_form(j.images);
    for (const auto& p : pts) fd = std::max(fd, std::abs(scal_from_form(form, base, p) - linear_form_scal(j.images, p)));
    crit.push_back(linear_form_critical_values(j.images));
    r.data["critical_values"].push_back({{"t", t}, {"values", crit.back()}});
  }
  check_max(r, "fd_vs_closed_form", fd, tol(cfg, "fd"));
  for (size_t i = 1; i < crit.size(); ++i) {
    const std::string lbl = " " + t_label(cfg.t_values[i]);
    check_min(r, "critical_min_gap" + lbl, std::abs(crit[i].front() - crit[0].front()), tol(cfg, "critical_gap"));
    check_max(r, "critical_max_equal" + lbl, std::abs(crit[i].back() - crit[0].back()), tol(cfg, "critical_max"));
  }
}

template <typename S>
void spectra(const Layout<S>& lay, const ExperimentConfig& cfg, RunReport& r) {
  const auto cmp = spectra_equal_along_family(lay, cfg.blocks, cfg.t_values, tol(cfg, "spectra"), cfg.jobs);
  check_max(r, "conjugacy_failed", cmp.conjugacy_ok ? 0.0 : 1.0, 0.0);
  r.csv.header = {"block_key", "t", "eigen_index", "eigenvalue"};
  json blocks = json::array();
  for (const auto& bc : cmp.blocks) {
    check_max(r, "spectra_deviation " + bc.block_key, bc.max_deviation, tol(cfg, "spectra"));
    check_min(r, "min_eigenvalue " + bc.block_key, bc.min_eigenvalue, -tol(cfg, "psd"));
    json mult = json::array();
    for (const auto& [v, m] : bc.spectra.front().multiplicities) mult.push_back({v, m});
    blocks.push_back({{"block_key", bc.block_key},
                      {"max_deviation", bc.max_deviation},
                      {"worst_t0", bc.worst_t0},
                      {"worst_t1", bc.worst_t1},
                      {"min_eigenvalue", bc.min_eigenvalue},
                      {"multiplicities", mult}});
    for (const auto& s : bc.spectra)
      for (int i = 0; i < s.eigenvalues.size(); ++i)
        r.csv.rows.push_back({bc.block_key, format_double(s.t), std::to_string(i), format_double(s.eigenvalues(i))});
  }
  r.data["blocks"] = blocks;
  r.data["max_deviation"] = cmp.max_deviation;

  if (lay.kind == LayoutKind::Product) {
    for (const auto& spec : cfg.blocks) {
      const auto blk = make_block(lay, spec);
      double res = 0.0, comm = 0.0, ymin = INFINITY, ymax = 0.0;
      for (double t : cfg.t_values) {
        const auto tw = twisted_laplacian_residual(lay.lambda_at(t), blk);
        res = std::max(res, tw.residual);
        comm = std::max(comm, tw.commute_residual);
        ymin = std::min(ymin, tw.y_norm);
        ymax = std::max(ymax, tw.y_norm);
      }
      check_max(r, "twisted_identity " + spec.key(), res, tol(cfg, "twisted"));
      check_max(r, "y_norm_spread " + spec.key(), ymax - ymin, tol(cfg, "y_norm"));
      check_max(r, "y_commute " + spec.key(), comm, tol(cfg, "commute"));
    }
  }

  // lambda = 0 on the defining representation: a Casimir scalar
  auto zero = lay.lambda_at(cfg.t_values[0]);
  zero.coeffs.setZero();
  BlockSpec def{1, std::vector<int>(lay.kind == LayoutKind::Product ? lay.torus.rank() : 0, 0)};
  const MatrixXcd cas = block_laplacian(metric_from_lambda(zero), make_block(lay, def));
  check_max(r, "schur_off_scalar", off_scalar_residual(cas), tol(cfg, "schur"));
  r.data["casimir"] = cas(0, 0).real();
}

template <typename S>
void conformal(const Layout<S>& lay, const ExperimentConfig& cfg, RunReport& r) {
  const auto bar = barred_lambda(lay.lambda_at(cfg.t_values[0]), lay.lambda_at(cfg.t_values[1]));
  const auto metric = metric_from_lambda(bar);
  const double eps = cfg.params.at("eps");
  const int samples = int_param(cfg, "samples", 1);
  for (int factor : {1, 2}) {
    const auto ex = conformal_scal_profile(metric, eps, factor);
    const auto& p = ex.profile;
    if (factor == 1) {
      check_max(r, "alpha_over_beta", p.alpha / p.beta, p.bound);
      r.data["profile"] = {{"m", p.m},       {"dim_k", p.dim_k}, {"n_total", p.n_total}, {"c2", p.c2},
                           {"mu", p.mu},     {"alpha", p.alpha}, {"beta", p.beta},       {"bound", p.bound},
                           {"eps", p.eps},   {"tau_max", p.tau_max}};
    }
    const auto res = conformal_max_search(ex, samples, cfg.seed + static_cast<std::uint64_t>(factor));
    const std::string lbl = " factor=" + std::to_string(factor);
    check_max(r, "max_off_identity_slice" + lbl, res.refined_distance, tol(cfg, "slice"));
    check_max(r, "sampled_above_identity" + lbl, std::max(res.sampled_max, res.refined_max) - res.value_at_identity,
              tol(cfg, "identity_max"));
    r.data["search"].push_back({{"factor", factor},
                                {"sampled_max", res.sampled_max},
                                {"refined_max", res.refined_max},
                                {"value_at_identity", res.value_at_identity},
                                {"refined_distance", res.refined_distance},
                                {"other_distance", res.other_distance},
                                {"samples", res.samples}});
  }
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  os << text;
  os.close();
  if (!os) throw IoError("write failed: " + path.string());
}

void dump_into(std::string& out, const json& j, int indent) {
  const std::string pad(indent + 2, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {  // std::map storage: sorted keys
        if (!first) out += ",\n";
        first = false;
        out += pad + json(k).dump() + ": ";
        dump_into(out, v, indent + 2);
      }
      out += "\n" + std::string(indent, ' ') + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        dump_into(out, j[i], indent + 2);
      }
      out += "\n" + std::string(indent, ' ') + "]";
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string version_string() { return ISOSPEC_VERSION; }

std::string command_name(Command c) { return info(c).name; }
std::string subcommand_name(Command c) { return info(c).sub; }

Command parse_command(const std::string& s) {
  for (const auto& i : command_table())
    if (s == i.name || s == i.sub) return i.command;
  throw ConfigError("unknown command: " + s);
}

const std::vector<Command>& all_commands() {
  static const std::vector<Command> cmds = [] {
    std::vector<Command> v;
    for (const auto& i : command_table()) v.push_back(i.command);
    return v;
  }();
  return cmds;
}

ExperimentConfig default_config(Command c) {
  const auto& i = info(c);
  ExperimentConfig cfg;
  cfg.command = c;
  cfg.family = i.families.front();
  cfg.t_values = default_t_values(c, cfg.family);
  cfg.blocks = default_blocks(cfg.family);
  cfg.tolerances = i.tolerances;
  cfg.params = i.params;
  cfg.json_name = std::string(i.sub) + ".json";
  if (c == Command::Spectra) cfg.csv_name = "spectra.csv";
  if (c == Command::Sphere) cfg.csv_name = "sphere.csv";
  return cfg;
}

std::vector<ExperimentConfig> suite_configs(std::uint64_t seed) {
  std::vector<ExperimentConfig> out;
  for (Command c : all_commands()) out.push_back(default_config(c));
  auto so8 = default_config(Command::Spectra);
  so8.family = "so8";
  so8.t_values = default_t_values(Command::Spectra, "so8");
  so8.blocks = default_blocks("so8");
  so8.json_name = "spectra-so8.json";
  so8.csv_name = "spectra-so8.csv";
  out.push_back(so8);
  auto s4 = default_config(Command::Sphere);
  s4.family = "s4-so5";
  s4.t_values = default_t_values(Command::Sphere, "s4-so5");
  s4.json_name = "sphere-s4.json";
  s4.csv_name.clear();
  out.push_back(s4);
  for (auto& c : out) c.seed = seed;
  return out;
}

ExperimentConfig parse_config(const json& j) {
  static const std::set<std::string> allowed = {"schema", "command", "family",  "t_values", "blocks",
                                                "tolerances", "seed", "outputs", "params"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError("unknown config field: " + k);
  if (!j.contains("schema") || !j["schema"].is_number_integer() || j["schema"].get<int>() != kConfigSchema)
    throw ConfigError("config needs \"schema\": " + std::to_string(kConfigSchema));
  if (!j.contains("command") || !j["command"].is_string()) throw ConfigError("config needs a command");

  ExperimentConfig cfg = default_config(parse_command(j["command"].get<std::string>()));
  if (j.contains("family")) {
    if (!j["family"].is_string()) throw ConfigError("family must be a string");
    cfg.family = j["family"].get<std::string>();
    const auto& fams = info(cfg.command).families;
    if (std::find(fams.begin(), fams.end(), cfg.family) == fams.end())
      throw ConfigError("unknown family \"" + cfg.family + "\" for " + command_name(cfg.command));
    cfg.t_values = default_t_values(cfg.command, cfg.family);
    cfg.blocks = default_blocks(cfg.family);
    if (cfg.command == Command::Sphere) cfg.csv_name = cfg.family == "s2t2" ? "sphere.csv" : "";
  }
  if (j.contains("t_values")) {
    if (!j["t_values"].is_array()) throw ConfigError("t_values must be an array");
    cfg.t_values.clear();
    for (const auto& t : j["t_values"]) {
      if (!t.is_number()) throw ConfigError("t_values must be numbers");
      cfg.t_values.push_back(t.get<double>());
    }
  }
  if (j.contains("blocks")) {
    if (!j["blocks"].is_array()) throw ConfigError("blocks must be an array");
    cfg.blocks.clear();
    for (const auto& b : j["blocks"]) cfg.blocks.push_back(block_from_json(b));
    if (cfg.blocks.empty()) throw ConfigError("blocks must not be empty");
  }
  if (j.contains("tolerances")) fill_named(cfg.tolerances, j["tolerances"], "tolerances", true);
  if (j.contains("params")) fill_named(cfg.params, j["params"], "params", true);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("seed must be a nonnegative integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("outputs")) {
    const auto& o = j["outputs"];
    if (!o.is_object()) throw ConfigError("outputs must be an object");
    for (const auto& [k, v] : o.items()) {
      if (k != "json" && k != "csv") throw ConfigError("unknown outputs entry: " + k);
      if (!v.is_string()) throw ConfigError("outputs entries must be strings");
    }
    if (o.contains("json")) cfg.json_name = o["json"].get<std::string>();
    if (o.contains("csv")) cfg.csv_name = o["csv"].get<std::string>();
    if (cfg.json_name.empty()) throw ConfigError("outputs.json must not be empty");
  }
  validate(cfg);
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json blocks = json::array();
  for (const auto& b : cfg.blocks) blocks.push_back(b.key());
  json j = {{"schema", kConfigSchema},
            {"command", command_name(cfg.command)},
            {"family", cfg.family},
            {"seed", cfg.seed},
            {"tolerances", cfg.tolerances},
            {"params", cfg.params}};
  if (uses_t_values(cfg)) j["t_values"] = cfg.t_values;
  if (cfg.command == Command::Spectra) j["blocks"] = blocks;
  return j;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

bool RunReport::pass() const {
  return std::all_of(records.begin(), records.end(), [](const CheckRecord& c) { return c.pass; });
}

std::vector<std::string> RunReport::failing() const {
  std::vector<std::string> out;
  for (const auto& c : records)
    if (!c.pass) out.push_back(c.name);
  return out;
}

RunReport run(const ExperimentConfig& cfg) {
  validate(cfg);
  RunReport r;
  r.config = cfg;
  try {
    switch (cfg.command) {
      case Command::VerifyFamily:
        with_layout(cfg.family, [&](const auto& lay) { verify_family(lay, cfg, r); });
        break;
      case Command::Witness:
        with_layout(cfg.family, [&](const auto& lay) { witness(lay, cfg, r); });
        break;
      case Command::Curvature:
        with_layout(cfg.family, [&](const auto& lay) { curvature(lay, cfg, r); });
        break;
      case Command::Heat:
        with_layout(cfg.family, [&](const auto& lay) { heat(lay, cfg, r); });
        break;
      case Command::Flow:
        flow(cfg, r);
        break;
      case Command::Sphere:
        if (cfg.family == "s2t2")
          sphere_s2t2(cfg, r);
        else
          sphere_s4(cfg, r);
        break;
      case Command::Spectra:
        with_layout(cfg.family, [&](const auto& lay) { spectra(lay, cfg, r); });
        break;
      case Command::Conformal:
        with_layout(cfg.family, [&](const auto& lay) {
          if (lay.kind != LayoutKind::Product) throw ConfigError("CONFORMAL needs a product layout");
          conformal(lay, cfg, r);
        });
        break;
    }
  } catch (const DriftError& e) {
    r.records.push_back({"pipeline_error: " + std::string(e.what()), false, e.drift(), 0.0, false});
  } catch (const RankDecisionError& e) {
    r.records.push_back({"pipeline_error: " + std::string(e.what()), false, NAN, 0.0, false});
  } catch (const NotConjugateError& e) {
    r.records.push_back({"pipeline_error: " + std::string(e.what()), false, e.mismatch(), 0.0, false});
  }
  return r;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string dump_canonical(const json& j) {
  std::string out;
  dump_into(out, j, 0);
  out += "\n";
  return out;
}

std::string report_json(const RunReport& report) {
  json checks = json::array();
  for (const auto& c : report.records)
    checks.push_back({{"name", c.name},
                      {"status", c.pass ? "pass" : "fail"},
                      {"measured", c.measured},
                      {"tolerance", c.tolerance},
                      {"comparison", c.lower_bound ? ">=" : "<="}});
  const json cfg = config_to_json(report.config);
  json j = {{"schema", kConfigSchema},
            {"command", command_name(report.config.command)},
            {"family", report.config.family},
            {"checks", checks},
            {"failing", report.failing()},
            {"pass", report.pass()},
            {"data", report.data},
            {"provenance",
             {{"config", cfg}, {"config_hash", fnv1a_hex(dump_canonical(cfg))}, {"version", version_string()}}}};
  return dump_canonical(j);
}

std::string csv_text(const CsvTable& table) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ",";
      if (cells[i].find_first_of(",\"\n") == std::string::npos) {
        out += cells[i];
        continue;
      }
      out += '"';
      for (char ch : cells[i]) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      out += '"';
    }
    out += "\n";
  };
  line(table.header);
  for (const auto& row : table.rows) line(row);
  return out;
}

void emit_report(const RunReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  write_file(dir / report.config.json_name, report_json(report));
  if (!report.config.csv_name.empty() && !report.csv.header.empty())
    write_file(dir / report.config.csv_name, csv_text(report.csv));
}

}  // namespace isospec
