#include "conesep/cli.hpp"

#include "conesep/criteria.hpp"
#include "conesep/experiments.hpp"
#include "conesep/gauss_geometry.hpp"
#include "conesep/io.hpp"
#include "conesep/solvers.hpp"
#include "conesep/version.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace conesep {

namespace {

nlohmann::json vector_json(const Vector& v) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

std::vector<Eigen::Index> parse_index_list(const std::string& csv) {
  std::vector<Eigen::Index> out;
  std::string token;
  std::istringstream in(csv);
  while (std::getline(in, token, ',')) {
    if (!token.empty()) out.push_back(std::stol(token));
  }
  if (out.empty()) throw input_error("expected a comma-separated index list");
  return out;
}

/// Key,value table for scalar JSON payloads; reports use their trial table.
std::string json_to_csv(const nlohmann::json& j) {
  std::string out = "key,value\n";
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it->is_structured()) continue;
    out += it.key() + ",";
    if (it->is_number_float()) out += format_double_17(it->get<double>());
    else out += it->dump();
    out += "\n";
  }
  return out;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) std::cout << text;
  else write_text_file(out_path, text);
}

void emit_json(const nlohmann::json& j, const std::string& out_path, const std::string& format) {
  if (format == "csv") emit(json_to_csv(j), out_path);
  else emit(j.dump(2) + "\n", out_path);
}

nlohmann::json solve_result_json(const SolveResult& r) {
  nlohmann::json j;
  j["x"] = vector_json(r.x_star);
  j["objective"] = r.objective;
  j["eq_residual"] = r.eq_residual;
  j["status"] = r.status == SolveStatus::optimal     ? "optimal"
                : r.status == SolveStatus::infeasible ? "infeasible"
                                                      : "max-iter";
  j["iterations"] = r.iterations;
  j["certificate"] = {{"dual_feasibility", r.certificate.dual_feasibility},
                      {"gap", r.certificate.gap}};
  return j;
}

struct CommonFlags {
  std::string config_path;
  std::string out_path;
  std::string format = "json";
  std::string matrix_path;
  std::uint64_t seed = 1;
  bool seed_set = false;
};

} // namespace

int cli_dispatch(const std::vector<std::string>& args) {
  CLI::App app{"conesep: geometry-driven verification of convex signal recovery"};
  app.set_version_flag("--version", std::string(kLibraryVersion));
  app.require_subcommand(0, 1);

  CommonFlags common;
  app.add_option("--config", common.config_path, "JSON config file")->capture_default_str();
  app.add_option("--out", common.out_path, "output path (default stdout)");
  app.add_option("--format", common.format, "output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--matrix", common.matrix_path, "matrix text file ('m d' header)");
  auto* seed_opt = app.add_option("--seed", common.seed, "seed override");

  // rip
  auto* rip = app.add_subcommand("rip", "restricted isometry constants delta_1..delta_K");
  int rip_k = 1;
  rip->add_option("--k", rip_k, "largest order K")->required();

  // nsp
  auto* nsp = app.add_subcommand("nsp", "strict null space property w.r.t. a support");
  std::string nsp_support;
  nsp->add_option("--support", nsp_support, "comma-separated indices (0-based)")->required();

  // rnsp
  auto* rnsp = app.add_subcommand("rnsp", "robust null space property check");
  std::string rnsp_support;
  double rnsp_gamma = 0.0, rnsp_tau = 0.0;
  rnsp->add_option("--support", rnsp_support, "comma-separated indices")->required();
  rnsp->add_option("--gamma", rnsp_gamma, "relaxation weight in [0,1)")->required();
  rnsp->add_option("--tau", rnsp_tau, "measurement weight > 0")->required();

  // rsv / angle
  auto* rsv = app.add_subcommand("rsv", "restricted singular value of a cone");
  auto* angle = app.add_subcommand("angle", "maximal separation angle of a cone vs ker A");
  std::string cone_path;
  bool use_grid = false;
  double grid_res = 0.005;
  int starts = 32;
  int threads = 0;
  for (auto* sc : {rsv, angle}) {
    sc->add_option("--cone", cone_path, "cone description JSON")->required();
    sc->add_flag("--grid", use_grid, "use the grid oracle (d <= 4)");
    sc->add_option("--res", grid_res, "grid resolution in radians");
    sc->add_option("--starts", starts, "number of random starts");
    sc->add_option("--threads", threads, "worker threads (0 = auto)");
  }

  // solve
  auto* solve = app.add_subcommand("solve", "l1/l2 recovery programs");
  std::string solve_mode;
  std::string b_path;
  double solve_eps = 0.0;
  solve->add_option("mode", solve_mode, "one of p1, p1eps, p2, p2eps")
      ->required()
      ->check(CLI::IsMember({"p1", "p1eps", "p2", "p2eps"}));
  solve->add_option("--b", b_path, "right-hand side vector file")->required();
  solve->add_option("--eps", solve_eps, "noise radius");

  // width / statdim
  auto* width = app.add_subcommand("width", "Monte Carlo Gaussian width of a cone");
  auto* statdim = app.add_subcommand("statdim", "Monte Carlo statistical dimension of a cone");
  long mc_samples = 100000;
  for (auto* sc : {width, statdim}) {
    sc->add_option("--cone", cone_path, "cone description JSON")->required();
    sc->add_option("--samples", mc_samples, "sample count (>= 1000)");
    sc->add_option("--threads", threads, "worker threads");
  }

  // mu
  auto* mu = app.add_subcommand("mu", "polytope face constant");
  std::string poly_path, x0_path, u_path;
  long mu_samples = 100000;
  mu->add_option("--polytope", poly_path, "polytope JSON")->required();
  mu->add_option("--x0", x0_path, "base point vector file")->required();
  mu->add_option("--u", u_path, "subspace basis matrix file")->required();
  mu->add_option("--samples", mu_samples, "sampling budget");

  // experiment
  auto* exp = app.add_subcommand("experiment", "end-to-end inequality verification runs");
  std::string exp_name;
  std::string plot_path;
  bool with_timing = false;
  exp->add_option("name", exp_name,
                  "robustness | stability | exact-implies-stable | phase-sweep")
      ->required();
  exp->add_option("--plot", plot_path, "write an SVG chart (phase-sweep)");
  exp->add_flag("--timing", with_timing, "include wall time in the report");

  std::vector<const char*> argv;
  argv.push_back("conesep");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    std::cout << kLibraryVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return 2;
  }
  common.seed_set = seed_opt->count() > 0;

  try {
    if (app.get_subcommands().empty()) {
      std::cerr << app.help();
      return 2;
    }
    CLI::App* sub = app.get_subcommands().front();
    auto need_matrix = [&]() -> LinearMap {
      if (common.matrix_path.empty()) throw input_error("--matrix is required here");
      return factor(read_matrix_text(common.matrix_path));
    };

    if (sub == rip) {
      LinearMap a = need_matrix();
      RipTable t = rip_constants(a, rip_k);
      nlohmann::json j;
      j["delta"] = t.delta;
      if (common.format == "csv") {
        std::string csv = "k,delta\n";
        for (int k = 1; k <= t.max_order(); ++k)
          csv += std::to_string(k) + "," + format_double_17(t.at(k)) + "\n";
        emit(csv, common.out_path);
      } else {
        emit_json(j, common.out_path, "json");
      }
      return 0;
    }
    if (sub == nsp) {
      LinearMap a = need_matrix();
      const bool holds = nsp_check(a, parse_index_list(nsp_support));
      emit_json({{"holds", holds}}, common.out_path, common.format);
      return holds ? 0 : 1;
    }
    if (sub == rnsp) {
      LinearMap a = need_matrix();
      RnspResult r = rnsp_check(a, parse_index_list(rnsp_support), rnsp_gamma, rnsp_tau);
      emit_json({{"holds", r.holds},
                 {"worst_slack", r.worst_slack},
                 {"certified_upper", r.certified_upper}},
                common.out_path, common.format);
      return r.holds ? 0 : 1;
    }
    if (sub == rsv || sub == angle) {
      LinearMap a = need_matrix();
      Cone c = read_cone_json(cone_path);
      RsvOptions opts;
      opts.method = use_grid ? RsvMethod::grid_oracle : RsvMethod::multi_start_descent;
      opts.grid_res = grid_res;
      opts.starts = starts;
      opts.threads = threads;
      if (common.seed_set) opts.seed = common.seed;
      if (sub == rsv) {
        RsvResult r = restricted_sv(a, c, opts);
        emit_json({{"sigma", r.sigma},
                   {"witness", vector_json(r.witness)},
                   {"method", use_grid ? "grid-oracle" : "multi-start-descent"},
                   {"starts", r.starts},
                   {"converged", r.converged}},
                  common.out_path, common.format);
      } else {
        AngleResult r = separation_angle(a, c, opts);
        nlohmann::json j;
        j["theta_star"] = r.theta_star;
        j["status"] = r.status == AngleStatus::ok          ? "ok"
                      : r.status == AngleStatus::no_kernel ? "no-kernel"
                                                           : "intersecting";
        if (r.witness_cone.size() > 0) j["witness_cone"] = vector_json(r.witness_cone);
        if (r.witness_kernel.size() > 0) j["witness_kernel"] = vector_json(r.witness_kernel);
        emit_json(j, common.out_path, common.format);
      }
      return 0;
    }
    if (sub == solve) {
      LinearMap a = need_matrix();
      Vector b = read_vector_text(b_path);
      SolveResult r;
      if (solve_mode == "p1") r = solve_p1(a, b);
      else if (solve_mode == "p1eps") r = solve_p1_noisy(a, b, solve_eps);
      else if (solve_mode == "p2") r = solve_p2(a, b);
      else r = solve_p2_noisy(a, b, solve_eps);
      emit_json(solve_result_json(r), common.out_path, common.format);
      return r.status == SolveStatus::optimal ? 0 : 1;
    }
    if (sub == width || sub == statdim) {
      Cone c = read_cone_json(cone_path);
      RngStream rng(common.seed, 0);
      WidthEstimate e = sub == width ? gaussian_width_mc(c, mc_samples, rng, threads)
                                     : statistical_dim_mc(c, mc_samples, rng, threads);
      emit_json({{"mean", e.mean},
                 {"stderr", e.stderr_},
                 {"samples", e.samples},
                 {"method", e.method}},
                common.out_path, common.format);
      return 0;
    }
    if (sub == mu) {
      Polytope p = polytope_from_json(nlohmann::json::parse(read_text_file(poly_path)));
      Vector x0 = read_vector_text(x0_path);
      Matrix u = read_matrix_text(u_path);
      MuOptions opts;
      opts.samples = mu_samples;
      if (common.seed_set) opts.seed = common.seed;
      const double value = polytope_mu(p, x0, u, opts);
      emit_json({{"mu", value}}, common.out_path, common.format);
      return 0;
    }
    if (sub == exp) {
      if (common.config_path.empty()) throw input_error("experiment: --config is required");
      nlohmann::json cj = nlohmann::json::parse(read_text_file(common.config_path));
      if (!exp_name.empty()) cj["experiment"] = exp_name;
      ExperimentConfig cfg = ExperimentConfig::from_json(cj);
      if (common.seed_set) cfg.seed = common.seed;

      const auto t0 = std::chrono::steady_clock::now();
      ExperimentReport rep = run_experiment(cfg);
      rep.wall_time_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
      if (!plot_path.empty() && cfg.experiment == "phase-sweep")
        write_text_file(plot_path, render_phase_sweep_svg(rep));
      if (common.format == "csv") emit(rep.to_csv(), common.out_path);
      else emit(rep.to_json_string(with_timing), common.out_path);
      return rep.pass ? 0 : 1;
    }
    std::cerr << app.help();
    return 2;
  } catch (const input_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

} // namespace conesep
