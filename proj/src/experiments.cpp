#include "conesep/experiments.hpp"

#include "conesep/gauss_geometry.hpp"
#include "conesep/solvers.hpp"

#include <cmath>
#include <set>

namespace conesep {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw input_error("config: " + what);
}

void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key()))
      throw input_error("config: unknown key '" + it.key() + "' in " + where);
  }
}

} // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  reject_unknown_keys(j,
                      {"schema_version", "experiment", "m", "d", "s", "eps", "delta", "trials",
                       "seed", "threads", "tolerances", "m_values", "samples"},
                      "config");
  ExperimentConfig c;
  c.schema_version = j.at("schema_version").get<int>();
  require(c.schema_version == 1, "unsupported schema_version");
  c.experiment = j.at("experiment").get<std::string>();
  c.m = j.value("m", c.m);
  c.d = j.value("d", c.d);
  c.s = j.value("s", c.s);
  c.eps = j.value("eps", c.eps);
  c.delta = j.value("delta", c.delta);
  c.trials = j.value("trials", c.trials);
  c.seed = j.value("seed", c.seed);
  c.threads = j.value("threads", c.threads);
  c.samples = j.value("samples", c.samples);
  if (j.contains("m_values")) c.m_values = j.at("m_values").get<std::vector<Eigen::Index>>();
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    reject_unknown_keys(t, {"solver_tol", "bound_slack", "sigma_floor", "rsv_starts", "grid_res"},
                        "tolerances");
    c.solver_tol = t.value("solver_tol", c.solver_tol);
    c.bound_slack = t.value("bound_slack", c.bound_slack);
    c.sigma_floor = t.value("sigma_floor", c.sigma_floor);
    c.rsv_starts = t.value("rsv_starts", c.rsv_starts);
    c.grid_res = t.value("grid_res", c.grid_res);
  }
  require(c.m >= 1 && c.d >= 1 && c.s >= 1 && c.trials >= 1, "counts must be >= 1");
  require(c.eps >= 0.0 && c.delta >= 0.0, "eps and delta must be >= 0");
  require(c.s <= c.d, "sparsity cannot exceed the dimension");
  for (auto mv : c.m_values) require(mv >= 1, "m_values entries must be >= 1");
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["schema_version"] = schema_version;
  j["experiment"] = experiment;
  j["m"] = m;
  j["d"] = d;
  j["s"] = s;
  j["eps"] = eps;
  j["delta"] = delta;
  j["trials"] = trials;
  j["seed"] = seed;
  j["threads"] = threads;
  j["samples"] = samples;
  if (!m_values.empty()) j["m_values"] = m_values;
  j["tolerances"] = {{"solver_tol", solver_tol},
                     {"bound_slack", bound_slack},
                     {"sigma_floor", sigma_floor},
                     {"rsv_starts", rsv_starts},
                     {"grid_res", grid_res}};
  return j;
}

Vector sample_sparse_signal(RngStream& rng, Eigen::Index d, int s) {
  Vector x = Vector::Zero(d);
  int placed = 0;
  while (placed < s) {
    const auto i = static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(d));
    if (x(i) != 0.0) continue;
    const double sign = rng.next_uniform() < 0.5 ? -1.0 : 1.0;
    x(i) = sign * (0.5 + std::abs(rng.next_normal()));
    ++placed;
  }
  return x;
}

namespace {

Vector bounded_noise(RngStream& rng, Eigen::Index m, double eps) {
  if (eps == 0.0) return Vector::Zero(m);
  Vector n = gaussian_vector(rng, m);
  const double target = eps * (0.3 + 0.7 * rng.next_uniform());
  return n * (target / n.norm());
}

} // namespace

ExperimentReport run_robustness_experiment(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  rep.name = "robustness";
  rep.config = cfg.to_json();

  RngStream rng(cfg.seed, 0);
  SolverOptions sopts;
  sopts.tol = cfg.solver_tol;
  int verifiable = 0, passed = 0, solver_failures = 0;
  bool all_pass = true;

  for (int t = 0; t < cfg.trials; ++t) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(t));
    LinearMap a = gaussian_matrix(sub, cfg.m, cfg.d);
    const Vector x0 = sample_sparse_signal(sub, cfg.d, cfg.s);
    const Vector noise = bounded_noise(sub, cfg.m, cfg.eps);
    const Vector b = a.apply(x0) + noise;

    RsvOptions ropts;
    ropts.starts = cfg.rsv_starts;
    ropts.threads = cfg.threads;
    ropts.seed = sub.next_u64();
    const RsvResult rsv = restricted_sv(a, Cone::l1_descent(x0), ropts);

    nlohmann::json rec;
    rec["trial"] = t;
    rec["sigma_hat"] = rsv.sigma;
    rec["rsv_converged"] = rsv.converged;

    const bool usable = rsv.converged && rsv.sigma > cfg.sigma_floor;
    rec["verifiable"] = usable;
    if (usable) {
      const SolveResult sol = solve_p1_noisy(a, b, cfg.eps, sopts);
      const double err = (sol.x_star - x0).norm();
      const double bound = 2.0 * cfg.eps / rsv.sigma + cfg.bound_slack;
      const bool ok = sol.status == SolveStatus::optimal && err <= bound;
      rec["error"] = err;
      rec["bound"] = bound;
      rec["solver_status"] = sol.status == SolveStatus::optimal ? "optimal" : "not-optimal";
      rec["pass"] = ok;
      if (sol.status != SolveStatus::optimal) ++solver_failures;
      ++verifiable;
      passed += ok;
      all_pass = all_pass && ok;
    }
    rep.trials.push_back(rec);
  }
  rep.aggregate["verifiable_trials"] = verifiable;
  rep.aggregate["passed"] = passed;
  rep.aggregate["solver_failures"] = solver_failures;
  rep.aggregate["pass_rate"] =
      verifiable > 0 ? static_cast<double>(passed) / verifiable : 0.0;
  rep.bounds["form"] = "2*eps/sigma_hat + slack";
  rep.pass = all_pass && verifiable > 0;
  return rep;
}

ExperimentReport run_stability_experiment(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  rep.name = "stability";
  rep.config = cfg.to_json();

  RngStream rng(cfg.seed, 0);
  SolverOptions sopts;
  sopts.tol = cfg.solver_tol;
  const double gamma_eq = std::sqrt(static_cast<double>(cfg.d));
  int verifiable = 0, passed = 0;
  bool all_pass = true;

  for (int t = 0; t < cfg.trials; ++t) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(t));
    LinearMap a = gaussian_matrix(sub, cfg.m, cfg.d);
    const Vector x0 = sample_sparse_signal(sub, cfg.d, cfg.s);

    // off-support perturbation with exact l1 distance delta to the
    // signed-support cone of x0
    Vector p = Vector::Zero(cfg.d);
    if (cfg.delta > 0.0) {
      for (Eigen::Index i = 0; i < cfg.d; ++i)
        if (x0(i) == 0.0) p(i) = sub.next_normal();
      p *= cfg.delta / p.lpNorm<1>();
    }
    const Vector x_check = x0 + p;
    const Vector noise = bounded_noise(sub, cfg.m, cfg.eps);
    const Vector b = a.apply(x_check) + noise;

    RsvOptions ropts;
    ropts.starts = cfg.rsv_starts;
    ropts.threads = cfg.threads;
    ropts.seed = sub.next_u64();
    const AngleResult ang = separation_angle(a, Cone::l1_descent(x0), ropts);

    nlohmann::json rec;
    rec["trial"] = t;
    rec["theta_hat"] = ang.theta_star;

    const bool usable = ang.status != AngleStatus::intersecting && ang.theta_star > 1e-6;
    rec["verifiable"] = usable;
    if (usable) {
      const double st = std::sin(ang.theta_star);
      const double smin = a.sigma_min_nonzero();
      const double smax = a.sigma_max();
      const double k1 = 2.0 * gamma_eq / (st * smin);
      const double k2 = (gamma_eq * gamma_eq * smax / smin + 1.0) / st + 2.0;
      const SolveResult sol = solve_p1_noisy(a, b, cfg.eps, sopts);
      const double err = (sol.x_star - x_check).lpNorm<1>();
      const double bound = k1 * cfg.eps + k2 * cfg.delta + cfg.bound_slack;
      const bool ok = sol.status == SolveStatus::optimal && err <= bound;
      rec["kappa1"] = k1;
      rec["kappa2"] = k2;
      rec["error_l1"] = err;
      rec["bound"] = bound;
      rec["pass"] = ok;
      ++verifiable;
      passed += ok;
      all_pass = all_pass && ok;
    }
    rep.trials.push_back(rec);
  }
  rep.aggregate["verifiable_trials"] = verifiable;
  rep.aggregate["passed"] = passed;
  rep.bounds["form"] = "kappa1*eps + kappa2*delta + slack, gamma = sqrt(d)";
  rep.pass = all_pass && verifiable > 0;
  return rep;
}

ExperimentReport run_exact_implies_stable(const ExperimentConfig& cfg) {
  if (cfg.d > 4) throw input_error("exact-implies-stable: grid oracle needs d <= 4");
  if (cfg.m >= cfg.d) throw input_error("exact-implies-stable: m < d required for a kernel");

  ExperimentReport rep;
  rep.name = "exact-implies-stable";
  rep.config = cfg.to_json();

  RngStream rng(cfg.seed, 0);
  SolverOptions sopts;
  sopts.tol = cfg.solver_tol;
  RsvOptions gopts;
  gopts.method = RsvMethod::grid_oracle;
  gopts.grid_res = cfg.grid_res;
  gopts.threads = cfg.threads;

  const double angle_floor = 2.0 * cfg.grid_res;
  int recovered_count = 0, passed = 0;
  bool all_pass = true;

  for (int t = 0; t < cfg.trials; ++t) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(t));
    LinearMap a = gaussian_matrix(sub, cfg.m, cfg.d);
    const Vector x0 = sample_sparse_signal(sub, cfg.d, cfg.s);
    const RecoveryResult rec0 = exact_recovery_test(a, x0, 1e-6, sopts);

    nlohmann::json rec;
    rec["trial"] = t;
    rec["recovered"] = rec0.passed();
    const AngleResult ang = separation_angle(a, Cone::l1_descent(x0), gopts);
    rec["theta_hat"] = ang.theta_star;

    if (rec0.passed()) {
      ++recovered_count;
      bool ok = ang.theta_star > angle_floor;
      // noisy recovery within the robustness constant implied by the angle
      const Vector noise = bounded_noise(sub, cfg.m, cfg.eps);
      const SolveResult sol = solve_p1_noisy(a, a.apply(x0) + noise, cfg.eps, sopts);
      const double err = (sol.x_star - x0).norm();
      const double kappa = 2.0 / (std::sin(ang.theta_star) * a.sigma_min_nonzero());
      const double bound = kappa * cfg.eps + cfg.bound_slack;
      ok = ok && sol.status == SolveStatus::optimal && err <= bound;
      rec["error"] = err;
      rec["bound"] = bound;
      rec["pass"] = ok;
      passed += ok;
      all_pass = all_pass && ok;
    }
    rep.trials.push_back(rec);
  }

  // two interior points of the same l1-ball face share a descent cone, so the
  // measured angles must agree (estimator consistency across seeds)
  {
    RngStream sub = rng.substream(0xFACEu);
    LinearMap a = gaussian_matrix(sub, cfg.m, cfg.d);
    Vector xa = Vector::Zero(cfg.d), xb = Vector::Zero(cfg.d);
    xa(0) = 0.7;
    xa(1) = 0.3;
    xb(0) = 0.4;
    xb(1) = 0.6;
    RsvOptions o1 = gopts, o2 = gopts;
    o1.seed = 11;
    o2.seed = 77;
    const double ta = separation_angle(a, Cone::l1_descent(xa), o1).theta_star;
    const double tb = separation_angle(a, Cone::l1_descent(xb), o2).theta_star;
    rep.observed["face_pair_angle_a"] = ta;
    rep.observed["face_pair_angle_b"] = tb;
    rep.observed["face_pair_gap"] = std::abs(ta - tb);
    all_pass = all_pass && std::abs(ta - tb) <= 1e-3;
  }

  rep.aggregate["recovered_trials"] = recovered_count;
  rep.aggregate["passed"] = passed;
  rep.pass = all_pass && recovered_count > 0;
  return rep;
}

ExperimentReport run_phase_sweep(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  rep.name = "phase-sweep";
  rep.config = cfg.to_json();
  rep.csv_columns = {"m", "success_rate", "w_sq", "stat_dim"};

  std::vector<Eigen::Index> ms = cfg.m_values;
  if (ms.empty()) {
    for (Eigen::Index m = 4; m <= std::min<Eigen::Index>(30, cfg.d); m += 2) ms.push_back(m);
  }

  RngStream rng(cfg.seed, 0);

  // reference descent cone: widths depend only on (d, s) by symmetry
  Vector x_ref = Vector::Zero(cfg.d);
  for (int k = 0; k < cfg.s; ++k) x_ref(k) = 1.0;
  Cone ref = Cone::l1_descent(x_ref);
  const WidthEstimate w = gaussian_width_mc(ref, cfg.samples, rng.substream(0xAA), cfg.threads);
  const WidthEstimate sd = statistical_dim_mc(ref, cfg.samples, rng.substream(0xBB), cfg.threads);
  const double w_sq = w.mean * w.mean;

  SolverOptions sopts;
  sopts.tol = cfg.solver_tol;

  for (std::size_t mi = 0; mi < ms.size(); ++mi) {
    const Eigen::Index m = ms[mi];
    int ok = 0;
    for (int t = 0; t < cfg.trials; ++t) {
      RngStream sub = rng.substream(1000 + mi * 1000 + static_cast<std::uint64_t>(t));
      LinearMap a = gaussian_matrix(sub, m, cfg.d);
      const Vector x0 = sample_sparse_signal(sub, cfg.d, cfg.s);
      ok += exact_recovery_test(a, x0, 1e-6, sopts).recovered;
    }
    nlohmann::json row;
    row["m"] = m;
    row["success_rate"] = static_cast<double>(ok) / cfg.trials;
    row["w_sq"] = w_sq;
    row["stat_dim"] = sd.mean;
    rep.trials.push_back(row);
  }

  // transition location: smallest m reaching 50% success
  double transition = std::numeric_limits<double>::quiet_NaN();
  for (const auto& row : rep.trials) {
    if (row["success_rate"].get<double>() >= 0.5) {
      transition = row["m"].get<double>();
      break;
    }
  }
  rep.observed["w_sq"] = w_sq;
  rep.observed["stat_dim"] = sd.mean;
  rep.observed["transition_m"] = transition;
  rep.pass = std::isfinite(transition) && std::abs(transition - sd.mean) <= 4.0;
  return rep;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.experiment == "robustness") return run_robustness_experiment(cfg);
  if (cfg.experiment == "stability") return run_stability_experiment(cfg);
  if (cfg.experiment == "exact-implies-stable") return run_exact_implies_stable(cfg);
  if (cfg.experiment == "phase-sweep") return run_phase_sweep(cfg);
  throw input_error("unknown experiment '" + cfg.experiment + "'");
}

std::string render_phase_sweep_svg(const ExperimentReport& report) {
  const int width = 640, height = 420, margin = 50;
  double m_min = 1e300, m_max = -1e300;
  for (const auto& row : report.trials) {
    const double m = row.at("m").get<double>();
    m_min = std::min(m_min, m);
    m_max = std::max(m_max, m);
  }
  if (!(m_max > m_min)) m_max = m_min + 1.0;
  auto xpix = [&](double m) {
    return margin + (m - m_min) / (m_max - m_min) * (width - 2 * margin);
  };
  auto ypix = [&](double rate) { return height - margin - rate * (height - 2 * margin); };

  std::string svg;
  svg += "<svg xmlns='http://www.w3.org/2000/svg' width='" + std::to_string(width) + "' height='" +
         std::to_string(height) + "'>\n";
  svg += "<rect width='100%' height='100%' fill='white'/>\n";
  // axes
  svg += "<line x1='" + std::to_string(margin) + "' y1='" + std::to_string(height - margin) +
         "' x2='" + std::to_string(width - margin) + "' y2='" + std::to_string(height - margin) +
         "' stroke='black'/>\n";
  svg += "<line x1='" + std::to_string(margin) + "' y1='" + std::to_string(margin) + "' x2='" +
         std::to_string(margin) + "' y2='" + std::to_string(height - margin) +
         "' stroke='black'/>\n";

  std::string pts;
  for (const auto& row : report.trials) {
    const double x = xpix(row.at("m").get<double>());
    const double y = ypix(row.at("success_rate").get<double>());
    pts += std::to_string(x) + "," + std::to_string(y) + " ";
    svg += "<circle cx='" + std::to_string(x) + "' cy='" + std::to_string(y) +
           "' r='3' fill='steelblue'/>\n";
  }
  svg += "<polyline points='" + pts + "' fill='none' stroke='steelblue'/>\n";

  auto vline = [&](double m, const std::string& color, const std::string& label) {
    if (m < m_min || m > m_max) return std::string();
    const double x = xpix(m);
    return "<line x1='" + std::to_string(x) + "' y1='" + std::to_string(margin) + "' x2='" +
           std::to_string(x) + "' y2='" + std::to_string(height - margin) + "' stroke='" + color +
           "' stroke-dasharray='4'/>\n<text x='" + std::to_string(x + 4) + "' y='" +
           std::to_string(margin + 14) + "' fill='" + color + "' font-size='12'>" + label +
           "</text>\n";
  };
  svg += vline(report.observed.at("w_sq").get<double>(), "darkorange", "w^2");
  svg += vline(report.observed.at("stat_dim").get<double>(), "seagreen", "stat dim");
  svg += "<text x='" + std::to_string(width / 2 - 60) + "' y='" + std::to_string(height - 12) +
         "' font-size='13'>measurements m</text>\n";
  svg += "<text x='8' y='" + std::to_string(height / 2) +
         "' font-size='13' transform='rotate(-90 14," + std::to_string(height / 2) +
         ")'>success rate</text>\n";
  svg += "</svg>\n";
  return svg;
}

} // namespace conesep
