#include "dcopt/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <thread>

#include "dcopt/scad.hpp"

namespace dcopt {

namespace fs = std::filesystem;

LineSearchParams profile_line_search(const std::string& profile) {
  LineSearchParams p;  // scad defaults
  if (profile == "scad" || profile.empty() || profile == "none") {
    return p;
  }
  if (profile == "gl") {
    p.omega = 0.001;
    p.eta = 0.3;
    return p;
  }
  throw ConfigError("unknown profile: " + profile);
}

namespace {

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

struct CellSpec {
  Algorithm algorithm;
  double tolerance;
  SolverConfig solver;
  std::string trace_name;
};

// Problem instances shared by every cell of an experiment.
struct ProblemSet {
  std::shared_ptr<DcProblem> standard;  // default problem
  std::shared_ptr<DcProblem> dc_split;  // explicit-step split for dca/bdca_ls
  std::shared_ptr<const LeastSquaresData> ls_data;
  std::shared_ptr<const std::vector<bool>> truth;
  double setup_seconds = 0.0;
  std::string descriptor;
  Index dim = 0;
};

Preconditioner default_precond(const std::string& kind, bool implicit_form,
                               bool bdca_split, const ProblemSet& ps,
                               const ExperimentConfig& cfg) {
  if (kind == "graph_gl") return Preconditioner::jacobi(cfg.jacobi_sweeps);
  if (bdca_split) return Preconditioner::none();
  if (kind == "toy_soft_threshold") return Preconditioner::identity(1.0, ps.dim);
  if (implicit_form)
    return Preconditioner::spectral_gap(ps.ls_data ? ps.ls_data->lambda_ata : 0.0);
  return Preconditioner::identity(1.0, ps.dim);
}

Preconditioner named_precond(const std::string& name, const ProblemSet& ps,
                             const ExperimentConfig& cfg) {
  if (name == "spectral_gap")
    return Preconditioner::spectral_gap(ps.ls_data ? ps.ls_data->lambda_ata : 0.0);
  if (name == "jacobi") return Preconditioner::jacobi(cfg.jacobi_sweeps);
  if (name == "cg") return Preconditioner::cg(cfg.cg_tol, cfg.cg_max_inner);
  if (name == "exact_identity") return Preconditioner::identity(1.0, ps.dim);
  if (name == "none") return Preconditioner::none();
  throw ConfigError("unknown preconditioner: " + name);
}

ProblemSet build_problems(const ExperimentConfig& cfg, std::uint64_t seed) {
  ProblemSet ps;
  const std::string kind = get_or<std::string>(cfg.problem, "kind", "");
  const auto t0 = std::chrono::steady_clock::now();

  if (kind == "scad" || kind == "huber_scad") {
    ScadParams sp;
    sp.mu = get_or(cfg.problem, "mu", 5e-4);
    sp.theta = get_or(cfg.problem, "theta", 10.0);
    sp.alpha = get_or(cfg.problem, "alpha", -1.0);
    ScadVariant variant =
        kind == "huber_scad" ||
                get_or<std::string>(cfg.problem, "variant", "l1") == "huber"
            ? ScadVariant::Huber
            : ScadVariant::L1;

    std::shared_ptr<const LeastSquaresData> data;
    if (cfg.problem.contains("libsvm")) {
      std::ifstream in(cfg.problem.at("libsvm").get<std::string>());
      if (!in) throw ConfigError("cannot open libsvm file");
      Dataset ds = parse_libsvm(in);
      if (ds.samples() == 0) throw ConfigError("empty libsvm dataset");
      Vector b(ds.samples());
      for (Index i = 0; i < b.size(); ++i) b[i] = ds.labels[static_cast<std::size_t>(i)];
      data = std::make_shared<LeastSquaresData>(
          make_least_squares(ds.to_dense(), std::move(b)));
    } else {
      SyntheticSpec spec;
      spec.m = get_or(cfg.problem, "m", 300);
      spec.k = get_or(cfg.problem, "k", 1000);
      spec.sparsity = get_or(cfg.problem, "sparsity", 50);
      spec.noise_std = get_or(cfg.problem, "noise_std", 0.01);
      data = std::make_shared<LeastSquaresData>(synthetic_instance(spec, seed));
    }
    ps.ls_data = data;
    ps.standard = std::make_shared<DcProblem>(
        build_scad_problem(data, sp, variant, ScadSplit::Standard));
    ps.dc_split = std::make_shared<DcProblem>(
        build_scad_problem(data, sp, variant, ScadSplit::Bdca));
    ps.dim = ps.standard->dim();
    ps.descriptor = ps.standard->descriptor + "/m" +
                    std::to_string(data->samples()) + "k" +
                    std::to_string(data->features());
  } else if (kind == "graph_gl") {
    GlParams gp;
    gp.tau = get_or(cfg.problem, "tau", 10.0);
    gp.gamma = get_or(cfg.problem, "gamma", 10.0);
    gp.box = get_or(cfg.problem, "box", 25);
    gp.patch = get_or(cfg.problem, "patch", 5);
    gp.kappa = get_or(cfg.problem, "kappa", 0.0);
    gp.convexify_c = get_or(cfg.problem, "convexify_c", 5.0);

    Matrix image;
    auto prior = std::make_shared<PriorLabels>();
    std::shared_ptr<std::vector<bool>> truth;
    if (cfg.problem.contains("image")) {
      std::ifstream in(cfg.problem.at("image").get<std::string>(), std::ios::binary);
      if (!in) throw ConfigError("cannot open image file");
      image = load_pgm(in);
      std::ifstream min(get_or<std::string>(cfg.problem, "mask", ""), std::ios::binary);
      if (!min) throw ConfigError("cannot open mask file");
      *prior = load_mask(min);
      if (cfg.problem.contains("truth")) {
        std::ifstream tin(cfg.problem.at("truth").get<std::string>(), std::ios::binary);
        if (!tin) throw ConfigError("cannot open truth file");
        Matrix tm = load_pgm(tin);
        truth = std::make_shared<std::vector<bool>>(tm.size());
        for (int i = 0; i < tm.rows(); ++i)
          for (int j = 0; j < tm.cols(); ++j)
            (*truth)[static_cast<std::size_t>(i) * tm.cols() + j] = tm(i, j) > 0.5;
      }
    } else {
      int size = get_or(cfg.problem, "size", 64);
      double frac = get_or(cfg.problem, "prior_fraction", 0.05);
      double noise = get_or(cfg.problem, "noise_std", 0.05);
      TwoPhaseInstance inst = make_two_phase_instance(size, frac, noise, seed);
      image = std::move(inst.image);
      *prior = std::move(inst.prior);
      truth = std::make_shared<std::vector<bool>>(std::move(inst.truth));
    }
    auto weights = std::make_shared<GraphWeights>(build_weights(image, gp, seed));
    ps.standard = std::make_shared<DcProblem>(build_gl_problem(weights, prior, gp));
    ps.dc_split = ps.standard;
    ps.truth = truth;
    ps.dim = ps.standard->dim();
    ps.descriptor = ps.standard->descriptor;
  } else if (kind == "toy_soft_threshold") {
    double target = get_or(cfg.problem, "target", 1.0);
    double weight = get_or(cfg.problem, "weight", 0.5);
    QuadraticForm q;
    q.hessian = std::make_shared<ScaledIdentityOperator>(1.0, 1);
    q.linear = Vector::Constant(1, target);
    q.constant = 0.5 * target * target;
    auto prob = std::make_shared<DcProblem>();
    prob->f = std::make_shared<QuadraticSmooth>(std::move(q), 1.0);
    prob->g1 = std::make_shared<SeparableConvex>(1, std::make_shared<AbsScalar>(weight));
    prob->g2 = std::make_shared<SeparableConvex>(1, std::make_shared<ZeroScalar>());
    prob->g1_upper_modulus = 1e-2;
    prob->descriptor = "toy_soft_threshold";
    ps.standard = prob;
    ps.dc_split = prob;
    ps.dim = 1;
    ps.descriptor = prob->descriptor;
  } else {
    throw ConfigError("unknown problem kind: '" + kind + "'");
  }

  ps.setup_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return ps;
}

void apply_overrides(const nlohmann::json& o, SolverConfig& sc) {
  if (o.is_null()) return;
  sc.line_search.lambda_max = get_or(o, "lambda_max", sc.line_search.lambda_max);
  sc.line_search.rho = get_or(o, "rho", sc.line_search.rho);
  sc.line_search.eta = get_or(o, "eta", sc.line_search.eta);
  sc.line_search.omega = get_or(o, "omega", sc.line_search.omega);
  sc.line_search.max_trials = get_or(o, "n_max", sc.line_search.max_trials);
  sc.line_search.min_step = get_or(o, "min_step", sc.line_search.min_step);
  sc.lsde.b1 = get_or(o, "b1", sc.lsde.b1);
  sc.lsde.b2 = get_or(o, "b2", sc.lsde.b2);
  sc.fista_fixed_period = get_or(o, "fixed_restart_period", sc.fista_fixed_period);
}

std::string tol_tag(double tol) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.0e", tol);
  return buf;
}

}  // namespace

ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  int schema = get_or(j, "schema", 1);
  if (schema != 1) throw ConfigError("unsupported config schema");
  ExperimentConfig c;
  c.name = get_or<std::string>(j, "name", "experiment");
  c.seed = get_or<std::uint64_t>(j, "seed", 1);
  if (!j.contains("problem")) throw ConfigError("config needs a problem block");
  c.problem = j.at("problem");
  c.algorithms = get_or(j, "algorithms", std::vector<std::string>{});
  if (c.algorithms.empty()) throw ConfigError("config needs at least one algorithm");
  for (const auto& a : c.algorithms) {
    try {
      algorithm_from_name(a);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  c.profile = get_or<std::string>(j, "profile", "scad");
  if (j.contains("overrides")) c.overrides = j.at("overrides");
  c.termination = get_or<std::string>(j, "termination", "rel_change");
  c.tolerances = get_or(j, "tolerances", std::vector<double>{});
  c.dice_threshold = get_or(j, "dice_threshold", 0.985);
  if (c.termination == "dice_bound") {
    if (c.tolerances.empty()) c.tolerances = {c.dice_threshold};
  }
  if (c.tolerances.empty()) throw ConfigError("config needs at least one tolerance");
  c.max_iter = get_or<long>(j, "max_iter", 200000);
  if (c.max_iter < 1) throw ConfigError("max_iter must be >= 1");
  c.precond = get_or<std::string>(j, "precond", "");
  c.jacobi_sweeps = get_or(j, "jacobi_sweeps", 5);
  c.cg_tol = get_or(j, "cg_tol", 1e-11);
  c.cg_max_inner = get_or(j, "cg_max_inner", 20000);
  c.trace_level = get_or<std::string>(j, "trace_level", "light");
  if (c.trace_level != "light" && c.trace_level != "full")
    throw ConfigError("trace_level must be light or full");
  c.rate_plot = get_or(j, "rate_plot", false);
  c.out_dir = get_or<std::string>(j, "out_dir", "results");
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_experiment_config(j);
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::string& out_dir, int workers,
                                std::optional<std::uint64_t> seed_override) {
  const std::uint64_t seed = seed_override.value_or(config.seed);
  ProblemSet ps = build_problems(config, seed);
  const std::string kind = get_or<std::string>(config.problem, "kind", "");

  std::vector<CellSpec> cells;
  for (const std::string& aname : config.algorithms) {
    Algorithm alg = algorithm_from_name(aname);
    const AlgorithmShape shape = algorithm_shape(alg);
    const bool bdca_split =
        (alg == Algorithm::Dca || alg == Algorithm::BdcaLs) && ps.dc_split != ps.standard;
    for (double tol : config.tolerances) {
      CellSpec cell;
      cell.algorithm = alg;
      cell.tolerance = tol;
      cell.solver.algorithm = alg;
      cell.solver.line_search = profile_line_search(config.profile);
      cell.solver.max_iter = config.max_iter;
      cell.solver.trace_level =
          config.trace_level == "full" ? TraceLevel::Full : TraceLevel::Light;
      apply_overrides(config.overrides, cell.solver);

      if (config.termination == "rel_change")
        cell.solver.termination = Termination::rel_change(tol);
      else if (config.termination == "step_norm")
        cell.solver.termination = Termination::step_norm(tol);
      else if (config.termination == "grad_norm")
        cell.solver.termination = Termination::grad_norm(tol);
      else if (config.termination == "dice_bound") {
        if (!ps.truth)
          throw ConfigError("dice_bound termination needs a ground-truth mask");
        cell.solver.termination = Termination::dice_bound(ps.truth, tol);
      } else {
        throw ConfigError("unknown termination rule: " + config.termination);
      }

      cell.solver.precond =
          config.precond.empty()
              ? default_precond(kind, shape.form == SubproblemForm::Implicit,
                                bdca_split, ps, config)
              : named_precond(config.precond, ps, config);
      cell.trace_name = "trace_" + aname + "_" + tol_tag(tol) + ".csv";
      cells.push_back(std::move(cell));
    }
  }

  fs::create_directories(out_dir);

  struct CellOut {
    ReportCell report;
    bool nan_abort = false;
  };
  std::vector<CellOut> outs(cells.size());
  std::atomic<std::size_t> next{0};

  auto run_cell = [&](std::size_t idx) {
    const CellSpec& cell = cells[idx];
    const bool use_dc_split =
        cell.algorithm == Algorithm::Dca || cell.algorithm == Algorithm::BdcaLs;
    const DcProblem& prob = use_dc_split ? *ps.dc_split : *ps.standard;

    SolveReport rep = solve(prob, cell.solver);

    // optional second pass recording distances to the converged point
    if (config.rate_plot && rep.status == SolveStatus::Converged) {
      SolverConfig second = cell.solver;
      second.distance_ref = std::make_shared<const Vector>(rep.x);
      rep = solve(prob, second);
    }

    TraceFile tf;
    tf.meta.algorithm = algorithm_name(cell.algorithm);
    tf.meta.profile = config.profile;
    tf.meta.seed = seed;
    tf.meta.problem = ps.descriptor;
    tf.meta.status = to_string(rep.status);
    tf.rows = rep.trace;
    std::ofstream out(fs::path(out_dir) / cell.trace_name);
    write_trace(tf, out);

    if (config.rate_plot && rep.status == SolveStatus::Converged) {
      std::ofstream rout(fs::path(out_dir) /
                         ("rate_" + algorithm_name(cell.algorithm) + "_" +
                          tol_tag(cell.tolerance) + ".csv"));
      rout << rate_plot_csv(tf);
    }

    CellOut& o = outs[idx];
    o.report.algorithm = algorithm_name(cell.algorithm);
    o.report.termination = config.termination;
    o.report.tolerance = cell.tolerance;
    o.report.status = to_string(rep.status);
    o.report.iterations = rep.iterations;
    o.report.wall_seconds = rep.wall_seconds;
    o.report.final_energy = rep.final_energy;
    if (ps.truth) o.report.extra = dice_score(rep.x, *ps.truth);
    o.nan_abort = rep.status == SolveStatus::NanAbort;
  };

  workers = std::max(1, workers);
  if (workers == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (;;) {
          std::size_t i = next.fetch_add(1);
          if (i >= cells.size()) return;
          run_cell(i);
        }
      });
    for (auto& t : pool) t.join();
  }

  ExperimentResult result;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    result.cells.push_back(outs[i].report);
    result.trace_paths.push_back((fs::path(out_dir) / cells[i].trace_name).string());
    if (outs[i].nan_abort) result.exit_code = 3;
  }
  std::ofstream rep_out(fs::path(out_dir) / "report.json");
  rep_out << write_report_json(config.name, ps.descriptor, seed, result.cells,
                               ps.setup_seconds);
  return result;
}

std::string rate_plot_csv(const TraceFile& trace) {
  std::string out = "n,log10_dist,log10_energy_gap,warn\n";
  if (trace.rows.empty()) return out;
  const double e_final = trace.rows.back().energy;
  const int warn = trace.meta.status == "converged" ? 0 : 1;
  char buf[96];
  for (const TraceRow& r : trace.rows) {
    double ld = std::numeric_limits<double>::quiet_NaN();
    if (!std::isnan(r.dist_ref) && r.dist_ref > 0.0) ld = std::log10(r.dist_ref);
    double lg = std::numeric_limits<double>::quiet_NaN();
    double gap = r.energy - e_final;
    if (gap > 0.0) lg = std::log10(gap);
    out += std::to_string(r.n);
    out += ',';
    if (!std::isnan(ld)) {
      std::snprintf(buf, sizeof(buf), "%.17g", ld);
      out += buf;
    }
    out += ',';
    if (!std::isnan(lg)) {
      std::snprintf(buf, sizeof(buf), "%.17g", lg);
      out += buf;
    }
    std::snprintf(buf, sizeof(buf), ",%d\n", warn);
    out += buf;
  }
  return out;
}

}  // namespace dcopt
