// Command-line front end: trajectory generation with invariant columns,
// convergence-order studies against a fine RK4 reference, and a batch
// verifier that runs every residual identity at seeded sample points.
//
// Exit codes: 0 success, 1 configuration/validation failure (including
// failed verify checks), 2 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hktop/hktop.hpp"

using json = nlohmann::ordered_json;
using namespace hktop;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Vec3 parse_triple(const std::string& text, const std::string& flag) {
  Vec3 v;
  std::stringstream ss(text);
  std::string item;
  int n = 0;
  while (std::getline(ss, item, ',')) {
    if (n >= 3) throw ConfigError(flag + ": expected exactly three comma-separated values");
    try {
      std::size_t used = 0;
      v[n] = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(flag + ": cannot parse '" + item + "' as a number");
    }
    ++n;
  }
  if (n != 3) throw ConfigError(flag + ": expected exactly three comma-separated values");
  return v;
}

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      v.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError(flag + ": cannot parse '" + item + "' as a number");
    }
  }
  if (v.empty()) throw ConfigError(flag + ": empty list");
  return v;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json vec_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

// ---------------------------------------------------------------------------
// Parameter source resolution
// ---------------------------------------------------------------------------

struct SourceFlags {
  std::string inertia;
  std::string formulation;
  std::string alpha;
  std::string delta;
  double eps = 0.0;
  bool eps_set = false;
};

struct ResolvedParams {
  std::optional<AlphaParams> alpha;
  std::optional<DeltaParams> delta;
  std::optional<double> eps;
  std::string source_name;
};

void add_source_flags(CLI::App* cmd, SourceFlags& f) {
  cmd->add_option("--inertia", f.inertia, "principal moments I1,I2,I3");
  cmd->add_option("--formulation", f.formulation, "velocity|momentum (with --inertia)");
  cmd->add_option("--alpha", f.alpha, "raw coefficients a1,a2,a3");
  cmd->add_option("--delta", f.delta, "discrete parameters d1,d2,d3");
  auto* eps = cmd->add_option("--eps", f.eps, "time step");
  eps->each([&f](const std::string&) { f.eps_set = true; });
}

ResolvedParams resolve_params(const SourceFlags& f, bool required) {
  const int n_sources = int(!f.inertia.empty()) + int(!f.alpha.empty()) +
                        int(!f.delta.empty());
  if (!f.formulation.empty() && f.inertia.empty())
    throw ConfigError("--formulation only applies together with --inertia");
  ResolvedParams r;
  if (n_sources == 0) {
    if (required) throw ConfigError("exactly one of --inertia/--alpha/--delta is required");
    return r;
  }
  if (n_sources > 1)
    throw ConfigError("give exactly one parameter source (--inertia, --alpha or --delta)");

  if (f.eps_set) {
    if (!(f.eps > 0.0)) throw ConfigError("--eps must be positive");
    r.eps = f.eps;
  }

  if (!f.inertia.empty()) {
    if (f.formulation != "velocity" && f.formulation != "momentum")
      throw ConfigError("--inertia requires --formulation velocity|momentum");
    Inertia inertia(parse_triple(f.inertia, "--inertia"));
    r.alpha = alpha_from_inertia(inertia, f.formulation == "velocity"
                                              ? Formulation::Velocity
                                              : Formulation::Momentum);
    r.source_name = "inertia";
  } else if (!f.alpha.empty()) {
    r.alpha = AlphaParams{parse_triple(f.alpha, "--alpha"), Formulation::Raw};
    r.source_name = "alpha";
  } else {
    r.delta = DeltaParams{parse_triple(f.delta, "--delta")};
    r.source_name = "delta";
    if (r.eps) r.alpha = AlphaParams{(2.0 / *r.eps) * r.delta->delta, Formulation::Raw};
  }
  if (r.alpha && !r.delta && r.eps)
    r.delta = DeltaParams{0.5 * *r.eps * r.alpha->alpha};
  return r;
}

void write_output(const std::string& out_path, const std::string& payload) {
  if (out_path.empty()) {
    std::cout << payload;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file " + out_path);
  out << payload;
}

// ---------------------------------------------------------------------------
// trajectory
// ---------------------------------------------------------------------------

struct TrajectoryOptions {
  SourceFlags source;
  std::string method = "hk";
  std::string x0_text;
  long steps = -1;
  std::string report;
  std::string format = "csv";
  std::uint64_t seed = 0;
  std::string out;
  double drift_threshold = std::numeric_limits<double>::infinity();
};

int run_trajectory(const TrajectoryOptions& opt) {
  if (opt.steps < 0) throw ConfigError("--steps is required and must be >= 0");
  if (opt.format != "csv" && opt.format != "json")
    throw ConfigError("--format must be csv or json");
  const Vec3 x0 = parse_triple(opt.x0_text, "--x0");

  bool want_f = false, want_h = false, want_g = false, want_phi = false;
  if (!opt.report.empty()) {
    std::stringstream ss(opt.report);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item == "f") want_f = true;
      else if (item == "h") want_h = true;
      else if (item == "g") want_g = true;
      else if (item == "phi") want_phi = true;
      else throw ConfigError("--report: unknown selection '" + item + "'");
    }
  }

  const bool is_jonas = opt.method == "jonas";
  ResolvedParams params = resolve_params(opt.source, /*required=*/!is_jonas);
  if (is_jonas) {
    if (!params.source_name.empty())
      throw ConfigError("jonas takes no parameter source");
    params.delta = DeltaParams{{-1.0, -1.0, -1.0}};
  }

  const bool needs_delta = opt.method == "hk" || opt.method == "elliptic";
  const bool needs_alpha_eps = opt.method == "bls" || opt.method == "rk4";
  if (needs_delta && !params.delta)
    throw ConfigError(opt.method + " needs --delta, or --alpha/--inertia together with --eps");
  if (needs_alpha_eps) {
    if (!params.alpha) throw ConfigError(opt.method + " needs --alpha or --inertia");
    if (!params.eps) throw ConfigError(opt.method + " needs --eps");
  }
  if (opt.method != "hk" && opt.method != "bls" && opt.method != "rk4" &&
      opt.method != "jonas" && opt.method != "elliptic")
    throw ConfigError("--method must be one of hk|bls|rk4|jonas|elliptic");

  if ((want_f || want_h || want_phi) && !params.delta)
    throw ConfigError("reports f/h/phi need delta-compatible parameters");
  if (want_g && !params.alpha)
    throw ConfigError("report g needs alpha-compatible parameters");

  const DeltaParams delta = params.delta.value_or(DeltaParams{});
  const Vec3 beta =
      want_h ? Vec3{delta.delta[1], -delta.delta[0], 0.0} : Vec3{};
  if (want_h && norm(beta) == 0.0)
    throw ConfigError("report h needs nonzero delta_1,delta_2 to build beta");

  std::vector<std::string> columns{"n", "x1", "x2", "x3"};
  if (want_f) columns.insert(columns.end(), {"F1", "F2", "F3"});
  if (want_h) columns.insert(columns.end(), {"H1", "H2", "H3"});
  if (want_g) columns.insert(columns.end(), {"G1", "G2", "G3"});
  if (want_phi) columns.push_back("phi_ratio");

  // one elliptic fit up front when requested
  std::optional<EllipticSolution> sol;
  if (opt.method == "elliptic") sol = fit_solution(x0, delta);

  std::optional<BLSConfig> bls_cfg;
  if (opt.method == "bls") bls_cfg.emplace(*params.alpha, *params.eps);

  std::vector<DriftTracker> trackers(columns.size() - 4,
                                     DriftTracker(opt.drift_threshold));
  std::vector<std::vector<double>> rows;
  rows.reserve(static_cast<std::size_t>(opt.steps) + 1);

  Vec3 x = x0;
  Vec3 x_hk = x0;  // shadow map iteration for the elliptic comparison
  double max_diff_vs_hk = 0.0;
  // The sign of det A along the orbit is not classified by any known result;
  // report observed sign changes instead of claiming one.
  const bool track_det =
      params.delta && (opt.method == "hk" || opt.method == "jonas" ||
                       opt.method == "elliptic");
  long det_sign_changes = 0;
  double det_prev = track_det ? det_A(x0, delta) : 1.0;
  for (long n = 0; n <= opt.steps; ++n) {
    if (n > 0) {
      if (opt.method == "hk") x = hk_step(x, delta);
      else if (opt.method == "jonas") x = jonas_step(x);
      else if (opt.method == "bls") x = bls_step(x, *bls_cfg);
      else if (opt.method == "rk4") x = rk4_step(x, *params.alpha, *params.eps);
      else x = eval_solution(*sol, n);
      if (opt.method == "elliptic") {
        x_hk = hk_step(x_hk, delta);
        max_diff_vs_hk = std::max(max_diff_vs_hk, norm_inf(x - x_hk));
      }
      if (track_det) {
        const double det_now = det_A(x, delta);
        if ((det_now < 0.0) != (det_prev < 0.0)) ++det_sign_changes;
        det_prev = det_now;
      }
    }
    std::vector<double> row{static_cast<double>(n), x[0], x[1], x[2]};
    if (want_f)
      for (int i = 0; i < 3; ++i) row.push_back(integral_F(x, delta, CyclicIndex(i)));
    if (want_h)
      for (int i = 0; i < 3; ++i) row.push_back(integral_H(x, delta, beta, CyclicIndex(i)));
    if (want_g)
      for (int i = 0; i < 3; ++i) row.push_back(integral_G(x, *params.alpha, CyclicIndex(i)));
    if (want_phi)
      row.push_back(density(x, delta, DensityChoice{DensityForm::Product, CyclicIndex(0)}) /
                    density(x, delta, DensityChoice{DensityForm::Square, CyclicIndex(0)}));
    for (std::size_t c = 4; c < row.size(); ++c) trackers[c - 4].add(row[c]);
    rows.push_back(std::move(row));
  }

  DriftSummary total;
  std::optional<long> first;
  for (const auto& t : trackers) {
    const DriftSummary s = t.summary();
    total.max_drift = std::max(total.max_drift, s.max_drift);
    total.rms_drift = std::max(total.rms_drift, s.rms_drift);
    if (s.first_violation && (!first || *s.first_violation < *first))
      first = s.first_violation;
  }
  total.first_violation = first;

  if (opt.format == "csv") {
    std::string payload;
    for (std::size_t c = 0; c < columns.size(); ++c)
      payload += (c ? "," : "") + columns[c];
    payload += "\n";
    for (const auto& row : rows) {
      payload += std::to_string(static_cast<long>(row[0]));
      for (std::size_t c = 1; c < row.size(); ++c) payload += "," + fmt17(row[c]);
      payload += "\n";
    }
    write_output(opt.out, payload);
  } else {
    json doc;
    doc["config"] = {{"command", "trajectory"},
                     {"method", opt.method},
                     {"source", params.source_name},
                     {"x0", vec_json(x0)},
                     {"steps", opt.steps},
                     {"report", opt.report},
                     {"seed", opt.seed}};
    if (params.delta) doc["config"]["delta"] = vec_json(params.delta->delta);
    if (params.alpha) doc["config"]["alpha"] = vec_json(params.alpha->alpha);
    if (params.eps) doc["config"]["eps"] = *params.eps;
    doc["columns"] = columns;
    doc["steps"] = rows;
    doc["summary"] = {{"max_drift", total.max_drift},
                      {"rms_drift", total.rms_drift},
                      {"first_violation",
                       first ? json(*first) : json(nullptr)}};
    if (track_det) doc["summary"]["det_sign_changes"] = det_sign_changes;
    if (opt.method == "elliptic") doc["summary"]["max_diff_vs_hk"] = max_diff_vs_hk;
    write_output(opt.out, doc.dump(2) + "\n");
  }
  return 0;
}

// ---------------------------------------------------------------------------
// order
// ---------------------------------------------------------------------------

struct OrderOptions {
  SourceFlags source;
  std::string method = "hk";
  std::string x0_text;
  std::string eps_list_text = "0.1,0.05,0.025,0.0125";
  double final_time = 1.0;
  std::string out;
};

int run_order(const OrderOptions& opt) {
  if (opt.method != "hk" && opt.method != "bls" && opt.method != "rk4")
    throw ConfigError("order supports --method hk|bls|rk4");
  const Vec3 x0 = parse_triple(opt.x0_text, "--x0");
  const std::vector<double> eps_list = parse_list(opt.eps_list_text, "--eps-list");
  if (eps_list.size() < 4) throw ConfigError("--eps-list needs at least 4 values");
  for (std::size_t t = 1; t < eps_list.size(); ++t)
    if (!(eps_list[t] < eps_list[t - 1]) || !(eps_list[t] > 0.0))
      throw ConfigError("--eps-list must be positive and strictly decreasing");
  if (!(opt.final_time > 0.0)) throw ConfigError("--time must be positive");

  const ResolvedParams params = resolve_params(opt.source, true);
  if (!params.alpha)
    throw ConfigError("order needs alpha-compatible parameters (--alpha, --inertia, or --delta with --eps)");
  const AlphaParams alpha = *params.alpha;

  const double h_ref = eps_list.back() / 50.0;
  std::vector<double> errors;
  for (double eps : eps_list) {
    const long n = std::lround(opt.final_time / eps);
    if (n < 1) throw ConfigError("--time too small for the largest eps");
    const double t_end = static_cast<double>(n) * eps;

    Vec3 y = x0;
    if (opt.method == "hk") {
      const DeltaParams d{0.5 * eps * alpha.alpha};
      for (long s = 0; s < n; ++s) y = hk_step(y, d);
    } else if (opt.method == "bls") {
      const BLSConfig cfg(alpha, eps);
      for (long s = 0; s < n; ++s) y = bls_step(y, cfg);
    } else {
      for (long s = 0; s < n; ++s) y = rk4_step(y, alpha, eps);
    }

    const long n_ref = std::lround(t_end / h_ref);
    Vec3 ref = x0;
    for (long s = 0; s < n_ref; ++s)
      ref = rk4_step(ref, alpha, t_end / static_cast<double>(n_ref));
    errors.push_back(norm_inf(y - ref));
  }
  const double slope = fit_loglog_slope(eps_list, errors);

  json doc;
  doc["config"] = {{"command", "order"},
                   {"method", opt.method},
                   {"source", params.source_name},
                   {"x0", vec_json(x0)},
                   {"eps_list", eps_list},
                   {"time", opt.final_time},
                   {"alpha", vec_json(alpha.alpha)},
                   {"reference_h", h_ref}};
  doc["errors"] = errors;
  doc["observed_order"] = slope;
  write_output(opt.out, doc.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct VerifyOptions {
  SourceFlags source;
  long samples = 1000;
  std::uint64_t seed = 20240101;
  std::string out;
  bool corrupt_bracket = false;
};

struct Check {
  std::string name;
  double max_residual = 0.0;
  double threshold;

  explicit Check(std::string n, double thr) : name(std::move(n)), threshold(thr) {}
  void feed(double r) { max_residual = std::max(max_residual, r); }
  bool pass() const { return max_residual < threshold; }
};

Vec3 sample_regular_point(SplitMix64& rng, const DeltaParams& d) {
  for (;;) {
    Vec3 x;
    for (int i = 0; i < 3; ++i) x[i] = rng.next_symmetric();
    if (norm(d.delta) * norm(x) * norm(x) >= 0.5) continue;
    if (std::abs(det_A(x, d)) < 0.2) continue;
    return x;
  }
}

int run_verify(const VerifyOptions& opt) {
  if (opt.samples < 1) throw ConfigError("--samples must be >= 1");

  ResolvedParams params = resolve_params(opt.source, false);
  if (!params.source_name.empty() && !params.delta)
    throw ConfigError("verify needs delta-compatible parameters");
  if (!params.delta) {
    // documented default: I = (1,2,3), momentum formulation, eps = 0.1
    params.delta = DeltaParams{{-1.0 / 120.0, 1.0 / 30.0, -1.0 / 40.0}};
    params.alpha = AlphaParams{{-1.0 / 6.0, 2.0 / 3.0, -0.5}, Formulation::Momentum};
    params.eps = 0.1;
    params.source_name = "default";
  }
  const DeltaParams d = *params.delta;

  Check lemma_lk("lemma1_lk", 1e-12);
  Check lemma_minors("lemma1_minors", 1e-12);
  Check measure("measure_det_vs_density", 1e-11);
  Check jac_fd("jacobian_finite_difference", 1e-6);
  Check f_prod("f_product_identity", 1e-13);
  Check f_cons("f_conservation_step", 1e-12);
  Check h_cons("h_conservation_step", 1e-12);
  Check jacobi("jacobi_identity", 1e-12);
  Check casimir("casimir", 1e-13);
  Check invariance("map_invariance", 1e-11);
  Check dependence("dependence_relation", 1e-12);
  Check density_match("density_bracket_match", 1e-12);
  Check addition("addition_formulas", 1e-12);

  SplitMix64 rng(opt.seed);
  const Vec3 beta{d.delta[1], -d.delta[0], 0.0};
  const bool have_beta = norm(beta) > 0.0;

  for (long s = 0; s < opt.samples; ++s) {
    const Vec3 x = sample_regular_point(rng, d);
    const Vec3 xt = hk_step(x, d);

    for (int i = 0; i < 3; ++i) {
      const CyclicIndex ci(i);
      const double plus = lemma_ratio(x, d, ci, RatioSign::Plus);
      const double minus = lemma_ratio(xt, d, ci, RatioSign::Minus);
      lemma_lk.feed(mixed_deviation(minus, plus));

      const int j = ci.j(), k = ci.k();
      auto minors_side = [&](const Vec3& p, double sign) {
        const double num = p[i] + sign * d.delta[i] * p[j] * p[k];
        const double den = (1.0 - d.delta[i] * d.delta[k] * p[j] * p[j]) *
                           (1.0 - d.delta[i] * d.delta[j] * p[k] * p[k]);
        return num * num / den;
      };
      lemma_minors.feed(mixed_deviation(minors_side(xt, -1.0), minors_side(x, 1.0)));
    }

    const Mat3 J = jacobian_matrix(x, d);
    const double detj = det3(J);
    for (DensityForm form : {DensityForm::Product, DensityForm::Square})
      for (int i = 0; i < 3; ++i) {
        const DensityChoice choice{form, CyclicIndex(i)};
        measure.feed(std::abs(detj - density(xt, d, choice) / density(x, d, choice)));
      }
    if (s % 10 == 0) {
      const Mat3 fd = finite_difference_jacobian(
          [&d](const Vec3& p) { return hk_step(p, d); }, x, 1e-6);
      jac_fd.feed(norm_max(J - fd));
    }

    double prod = 1.0;
    for (int i = 0; i < 3; ++i) {
      const CyclicIndex ci(i);
      prod *= integral_F(x, d, ci);
      f_cons.feed(mixed_deviation(integral_F(xt, d, ci), integral_F(x, d, ci)));
      if (have_beta)
        h_cons.feed(mixed_deviation(integral_H(xt, d, beta, ci),
                                    integral_H(x, d, beta, ci)));
      casimir.feed(casimir_residual(ci, x, d) /
                   (1.0 + std::abs(integral_F(x, d, ci))));
      dependence.feed(dependence_residual(x, d, ci));

      Vec3 e;
      e[i] = 1.0;
      const PoissonTensor Pi{e, d};
      jacobi.feed(jacobi_residual(Pi, x));
      invariance.feed(invariance_residual(Pi, x));
      if (d.delta[0] != 0.0 && d.delta[1] != 0.0 && d.delta[2] != 0.0)
        density_match.feed(norm_max(
            bracket_from_density(matched_density_field(ci, d), log_F_field(ci, d), x) -
            bracket_matrix(Pi, x)));
    }
    f_prod.feed(std::abs(prod - 1.0));

    const Vec3 C{rng.next_symmetric(), rng.next_symmetric(), rng.next_symmetric()};
    const PoissonTensor P{C, d};
    const double np = norm_max(bracket_matrix(P, x));
    jacobi.feed(jacobi_residual(P, x) / (1.0 + np * np));
    invariance.feed(invariance_residual(P, x));
  }

  if (opt.corrupt_bracket) {
    // Negative control: perturb the (1,2) entry of pb_1 by 0.01*x_1^2 with the
    // matching analytic derivative; the Jacobi sum must pick it up.
    Vec3 e1;
    e1[0] = 1.0;
    const PoissonTensor P1{e1, d};
    for (int s = 0; s < 16; ++s) {
      const Vec3 x = sample_regular_point(rng, d);
      Mat3 M = bracket_matrix(P1, x);
      M(0, 1) += 0.01 * x[0] * x[0];
      M(1, 0) = -M(0, 1);
      std::array<Mat3, 3> D;
      for (int l = 0; l < 3; ++l) D[l] = bracket_partial(P1, x, l);
      D[0](0, 1) += 0.02 * x[0];
      D[0](1, 0) = -D[0](0, 1);
      double res = 0.0;
      for (int l = 0; l < 3; ++l)
        res += M(0, l) * D[l](1, 2) + M(1, l) * D[l](2, 0) + M(2, l) * D[l](0, 1);
      jacobi.feed(std::abs(res));
    }
  }

  for (double k : {0.1, 0.5, 0.9}) {
    const EllipticModulus m(k);
    const double K = agm_K(m);
    for (int t = 0; t < 60; ++t) {
      const double xi = 2.0 * K * rng.next_symmetric();
      const double eta = 2.0 * K * rng.next_symmetric();
      addition.feed(addition_formula_residuals(xi, eta, m));
    }
  }

  std::vector<Check> checks{lemma_lk, lemma_minors, measure,    jac_fd,
                            f_prod,   f_cons,       h_cons,     jacobi,
                            casimir,  invariance,   dependence, density_match,
                            addition};

  if (params.alpha) {
    const std::vector<double> eps_scan{0.1, 0.05, 0.025, 0.0125};
    Check f_exp("f_expansion_order", 0.2);
    const Vec3 probe{1.0, 0.8, 0.6};
    const FExpansionResult fr = f_expansion_check(probe, *params.alpha, eps_scan);
    for (int i = 0; i < 3; ++i) f_exp.feed(std::abs(fr.slope[i] - 2.0));
    checks.push_back(f_exp);

    Check climit("continuum_limit_order", 0.2);
    for (int t = 0; t < 5; ++t) {
      const Vec3 x = sample_regular_point(rng, d);
      for (int i = 0; i < 3; ++i) {
        const ContinuumLimitResult res =
            continuum_limit_check(x, params.alpha->alpha, CyclicIndex(i), eps_scan);
        if (!std::isnan(res.slope)) climit.feed(std::abs(res.slope - 3.0));
      }
    }
    checks.push_back(climit);
  }

  bool all_pass = true;
  json checks_json = json::array();
  for (const Check& c : checks) {
    all_pass = all_pass && c.pass();
    checks_json.push_back({{"name", c.name},
                           {"max_residual", c.max_residual},
                           {"threshold", c.threshold},
                           {"pass", c.pass()}});
  }

  json doc;
  doc["config"] = {{"command", "verify"},
                   {"source", params.source_name},
                   {"delta", vec_json(d.delta)},
                   {"samples", opt.samples},
                   {"seed", opt.seed},
                   {"corrupt_bracket", opt.corrupt_bracket}};
  doc["checks"] = checks_json;
  doc["summary"] = {{"all_pass", all_pass}};
  write_output(opt.out, doc.dump(2) + "\n");
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hirota-Kimura discrete Euler top toolkit"};
  app.require_subcommand(1);

  TrajectoryOptions traj;
  CLI::App* traj_cmd = app.add_subcommand("trajectory", "iterate a map/integrator and report invariants");
  add_source_flags(traj_cmd, traj.source);
  traj_cmd->add_option("--method", traj.method, "hk|bls|rk4|jonas|elliptic");
  traj_cmd->add_option("--x0", traj.x0_text, "initial state v1,v2,v3")->required();
  traj_cmd->add_option("--steps", traj.steps, "number of steps (>= 0)")->required();
  traj_cmd->add_option("--report", traj.report, "comma set from f,h,g,phi");
  traj_cmd->add_option("--format", traj.format, "csv|json");
  traj_cmd->add_option("--seed", traj.seed, "seed recorded in the config");
  traj_cmd->add_option("--out", traj.out, "output path (default stdout)");
  traj_cmd->add_option("--drift-threshold", traj.drift_threshold,
                       "flag the first step whose drift exceeds this");

  OrderOptions order;
  CLI::App* order_cmd = app.add_subcommand("order", "observed convergence order vs a fine RK4 reference");
  add_source_flags(order_cmd, order.source);
  order_cmd->add_option("--method", order.method, "hk|bls|rk4");
  order_cmd->add_option("--x0", order.x0_text, "initial state v1,v2,v3")->required();
  order_cmd->add_option("--eps-list", order.eps_list_text, "decreasing step sizes");
  order_cmd->add_option("--time", order.final_time, "final integration time");
  order_cmd->add_option("--out", order.out, "output path (default stdout)");

  VerifyOptions verify;
  CLI::App* verify_cmd = app.add_subcommand("verify", "run every residual identity at seeded points");
  add_source_flags(verify_cmd, verify.source);
  verify_cmd->add_option("--samples", verify.samples, "number of sample points");
  verify_cmd->add_option("--seed", verify.seed, "sampling seed");
  verify_cmd->add_option("--out", verify.out, "output path (default stdout)");
  verify_cmd->add_flag("--corrupt-bracket", verify.corrupt_bracket,
                       "negative control: corrupt a bracket entry so the Jacobi check fails");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // help/version exit cleanly, parse errors are config errors
  }

  try {
    if (traj_cmd->parsed()) return run_trajectory(traj);
    if (order_cmd->parsed()) return run_order(order);
    return run_verify(verify);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const hktop::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
