// Command line front end: point-prob, survival, sweep, perturb, validate,
// simulate.  JSON configs in, CSV/JSON out.  Exit codes: 0 success, 2 config
// error, 3 numeric failure.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sesqui/exact.hpp"
#include "sesqui/family.hpp"
#include "sesqui/io.hpp"
#include "sesqui/montecarlo.hpp"
#include "sesqui/saddle.hpp"
#include "sesqui/survival.hpp"

namespace {

using namespace sesqui;

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

// Input paths inside a config file resolve relative to the config's
// directory; output paths stay relative to the working directory.
std::string g_config_dir;

std::string resolve_input(const std::string& path) {
  if (path.empty() || g_config_dir.empty()) return path;
  const std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(g_config_dir) / p).string();
}

std::vector<double> parse_grid(const std::string& text) {
  double lo = 0.0, hi = 0.0;
  int count = 0;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> lo >> c1 >> hi >> c2 >> count) || c1 != ':' || c2 != ':' ||
      count < 1)
    fail(ErrorCode::ConfigError, "grid must be lo:hi:count with count >= 1");
  std::vector<double> out;
  out.reserve(count);
  if (count == 1) {
    out.push_back(lo);
    return out;
  }
  for (int i = 0; i < count; ++i)
    out.push_back(lo + (hi - lo) * i / (count - 1));
  return out;
}

std::string grid_to_string(double lo, double hi, int count) {
  return format_double(lo) + ":" + format_double(hi) + ":" +
         std::to_string(count);
}

// Solver options carried by every command config under "options".
struct OptionsConfig {
  SaddleOptions saddle{};

  static OptionsConfig from_json(const ordered_json& j) {
    reject_unknown_keys(j,
                        {"box_radius", "xhat_radius", "ey_window",
                         "enforce_class", "class_R", "class_M", "class_k1",
                         "class_k2", "class_delta"},
                        "options");
    OptionsConfig cfg;
    SaddleOptions& s = cfg.saddle;
    if (j.contains("class_R")) s.class_params.R = j.at("class_R").get<double>();
    if (j.contains("class_M")) s.class_params.M = j.at("class_M").get<double>();
    if (j.contains("class_k1")) s.class_params.k1 = j.at("class_k1").get<int>();
    if (j.contains("class_k2")) s.class_params.k2 = j.at("class_k2").get<int>();
    if (j.contains("class_delta"))
      s.class_params.delta = j.at("class_delta").get<double>();
    s.box_radius = 0.5 * std::log(s.class_params.R);
    if (j.contains("box_radius"))
      s.box_radius = j.at("box_radius").get<double>();
    if (j.contains("xhat_radius"))
      s.xhat_radius = j.at("xhat_radius").get<double>();
    if (j.contains("ey_window")) s.ey_window = j.at("ey_window").get<double>();
    if (j.contains("enforce_class"))
      s.enforce_class = j.at("enforce_class").get<bool>();
    return cfg;
  }

  ordered_json to_json() const {
    ordered_json j;
    j["box_radius"] = saddle.box_radius;
    j["xhat_radius"] = saddle.xhat_radius;
    j["ey_window"] = saddle.ey_window;
    j["enforce_class"] = saddle.enforce_class;
    j["class_R"] = saddle.class_params.R;
    j["class_M"] = saddle.class_params.M;
    j["class_k1"] = saddle.class_params.k1;
    j["class_k2"] = saddle.class_params.k2;
    j["class_delta"] = saddle.class_params.delta;
    return j;
  }
};

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::ConfigError, "cannot open output file: " + path);
  return out;
}

void write_config_or_run(const ordered_json& cfg, bool dump) {
  if (dump) std::cout << cfg.dump(2) << "\n";
}

// ---------------------------------------------------------------- point-prob

struct PointProbConfig {
  std::string spec_path;
  int nmax = 100;
  std::vector<std::string> methods = {"exact", "asymptotic"};
  long long samples = 100000;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out = "point_prob.csv";
  std::string points_out;   // optional (n, m, p, log p) dump
  std::string profile_out;  // optional (x, Psi, Phi) dump
  std::string profile_grid; // lo:hi:count, defaults to x0 +/- 0.1
  OptionsConfig options;

  static PointProbConfig from_json(const ordered_json& j) {
    reject_unknown_keys(j,
                        {"spec", "nmax", "methods", "samples", "seed",
                         "threads", "out", "points_out", "profile_out",
                         "profile_grid", "options"},
                        "point-prob config");
    PointProbConfig cfg;
    if (j.contains("spec")) cfg.spec_path = j.at("spec").get<std::string>();
    if (j.contains("nmax")) cfg.nmax = j.at("nmax").get<int>();
    if (j.contains("methods"))
      cfg.methods = j.at("methods").get<std::vector<std::string>>();
    if (j.contains("samples")) cfg.samples = j.at("samples").get<long long>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
    if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
    if (j.contains("points_out"))
      cfg.points_out = j.at("points_out").get<std::string>();
    if (j.contains("profile_out"))
      cfg.profile_out = j.at("profile_out").get<std::string>();
    if (j.contains("profile_grid"))
      cfg.profile_grid = j.at("profile_grid").get<std::string>();
    if (j.contains("options"))
      cfg.options = OptionsConfig::from_json(j.at("options"));
    return cfg;
  }

  ordered_json to_json() const {
    ordered_json j;
    j["spec"] = spec_path;
    j["nmax"] = nmax;
    j["methods"] = methods;
    j["samples"] = samples;
    j["seed"] = seed;
    j["threads"] = threads;
    j["out"] = out;
    if (!points_out.empty()) j["points_out"] = points_out;
    if (!profile_out.empty()) j["profile_out"] = profile_out;
    if (!profile_grid.empty()) j["profile_grid"] = profile_grid;
    j["options"] = options.to_json();
    return j;
  }
};

int run_point_prob(const PointProbConfig& cfg) {
  if (cfg.spec_path.empty())
    fail(ErrorCode::ConfigError, "point-prob: missing spec path");
  const ProcessSpec spec = load_spec_file(resolve_input(cfg.spec_path));
  const auto has = [&](const char* name) {
    for (const auto& m : cfg.methods)
      if (m == name) return true;
    return false;
  };
  for (const auto& m : cfg.methods)
    if (m != "exact" && m != "asymptotic" && m != "integral" && m != "mc")
      fail(ErrorCode::ConfigError, "point-prob: unknown method '" + m + "'");

  std::optional<TotalProbTable> exact;
  std::optional<PointProbTable> points;
  if (has("exact") || has("integral") || !cfg.points_out.empty()) {
    points = point_prob_table(spec, cfg.nmax);
    exact = total_prob_from_points(*points);
  }
  std::optional<AsymptoticParams> asym;
  if (has("asymptotic")) asym = asymptotic_params(spec, cfg.options.saddle);
  std::optional<PointProbEstimate> mc;
  if (has("mc"))
    mc = estimate_point_probs(spec, cfg.samples, cfg.nmax, cfg.seed,
                              cfg.threads);
  std::vector<double> integral_q;
  if (has("integral")) {
    integral_q.assign(cfg.nmax + 1, 0.0);
    for (int N = 1; N <= cfg.nmax; ++N) {
      double q = spec.initial.prob(0, N);
      for (int n = 1; n <= N; ++n)
        q += integral_point_prob(spec, n, N - n, cfg.options.saddle).value;
      integral_q[N] = q;
    }
  }

  std::ofstream out = open_out(cfg.out);
  out << "N";
  if (has("exact")) out << ",q_exact,log_q_exact";
  if (has("asymptotic")) out << ",q_asymp";
  if (has("integral")) out << ",q_integral";
  if (has("mc")) out << ",q_mc,mc_ci_lo,mc_ci_hi";
  if (has("exact") && has("asymptotic")) out << ",ratio_asymp";
  if (has("exact") && has("mc")) out << ",ratio_mc";
  out << "\n";
  for (int N = 1; N <= cfg.nmax; ++N) {
    out << N;
    if (exact)
      out << "," << format_double(exact->q[N]) << ","
          << format_double(exact->log_q[N]);
    std::optional<double> qa;
    if (asym) {
      qa = asymp_total_prob(*asym, N).value;
      out << "," << format_double(*qa);
    }
    if (has("integral")) out << "," << format_double(integral_q[N]);
    if (mc) {
      const EstimateRow& row = mc->rows[N];
      out << "," << format_double(row.p_hat) << ","
          << format_double(row.ci_lo) << "," << format_double(row.ci_hi);
    }
    if (exact && qa)
      out << "," << format_double(exact->q[N] > 0.0 ? *qa / exact->q[N]
                                                    : std::nan(""));
    if (exact && mc)
      out << "," << format_double(exact->q[N] > 0.0
                                      ? mc->rows[N].p_hat / exact->q[N]
                                      : std::nan(""));
    out << "\n";
  }

  if (!cfg.points_out.empty()) {
    std::ofstream pout = open_out(cfg.points_out);
    pout << "n,m,p_nm,log_p_nm\n";
    for (int n = 0; n <= points->nmax; ++n)
      for (int m = 0; n + m <= points->nmax; ++m)
        pout << n << "," << m << "," << format_double(points->at(n, m)) << ","
             << format_double(points->log_at(n, m)) << "\n";
  }

  if (!cfg.profile_out.empty()) {
    const double x0 =
        1.0 / (1.0 + moments(spec.offspring).mean_z);
    std::vector<double> grid =
        cfg.profile_grid.empty()
            ? parse_grid(grid_to_string(x0 - 0.1, x0 + 0.1, 41))
            : parse_grid(cfg.profile_grid);
    std::ofstream pout = open_out(cfg.profile_out);
    pout << "x,Psi,Phi\n";
    for (double x : grid)
      pout << format_double(x) << ","
           << format_double(capital_psi(spec.offspring, x, cfg.options.saddle))
           << "," << format_double(capital_phi(spec, x, cfg.options.saddle))
           << "\n";
  }
  return 0;
}

// ------------------------------------------------------------------ survival

struct SurvivalConfig {
  std::string spec_path;
  std::string family_path;
  std::string grid;  // for families
  std::string out = "survival.csv";

  static SurvivalConfig from_json(const ordered_json& j) {
    reject_unknown_keys(j, {"spec", "family", "grid", "out"},
                        "survival config");
    SurvivalConfig cfg;
    if (j.contains("spec")) cfg.spec_path = j.at("spec").get<std::string>();
    if (j.contains("family"))
      cfg.family_path = j.at("family").get<std::string>();
    if (j.contains("grid")) cfg.grid = j.at("grid").get<std::string>();
    if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
    return cfg;
  }

  ordered_json to_json() const {
    ordered_json j;
    if (!spec_path.empty()) j["spec"] = spec_path;
    if (!family_path.empty()) j["family"] = family_path;
    if (!grid.empty()) j["grid"] = grid;
    j["out"] = out;
    return j;
  }
};

void write_survival_row(std::ostream& out, const std::string& label,
                        const ProcessSpec& spec) {
  const SurvivalResult r = survival(spec);
  out << label << "," << format_double(moments(spec.offspring).mean_y) << ",";
  out << (r.rho_hat ? format_double(*r.rho_hat) : std::string("nan"));
  out << "," << format_double(r.rho_single) << ","
      << format_double(r.rho_process) << "," << format_double(r.residual)
      << "\n";
}

int run_survival(const SurvivalConfig& cfg) {
  if (cfg.spec_path.empty() == cfg.family_path.empty())
    fail(ErrorCode::ConfigError,
         "survival: exactly one of spec or family is required");
  std::ofstream out = open_out(cfg.out);
  out << "label,mean_y,rho_hat,rho_single,rho_process,residual\n";
  if (!cfg.spec_path.empty()) {
    const std::string label =
        std::filesystem::path(cfg.spec_path).stem().string();
    write_survival_row(out, label, load_spec_file(resolve_input(cfg.spec_path)));
  } else {
    const FamilySpec family = load_family_file(resolve_input(cfg.family_path));
    if (cfg.grid.empty())
      fail(ErrorCode::ConfigError, "survival: family mode needs a grid");
    for (double t : parse_grid(cfg.grid))
      write_survival_row(out, format_double(t), family_eval(family, t));
  }
  return 0;
}

// --------------------------------------------------------------------- sweep

struct SweepConfig {
  std::string family_path;
  std::string grid = "0.9:1.1:21";
  int threads = 0;
  std::string out = "sweep.csv";
  OptionsConfig options;

  static SweepConfig from_json(const ordered_json& j) {
    reject_unknown_keys(j, {"family", "grid", "threads", "out", "options"},
                        "sweep config");
    SweepConfig cfg;
    if (j.contains("family"))
      cfg.family_path = j.at("family").get<std::string>();
    if (j.contains("grid")) cfg.grid = j.at("grid").get<std::string>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
    if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
    if (j.contains("options"))
      cfg.options = OptionsConfig::from_json(j.at("options"));
    return cfg;
  }

  ordered_json to_json() const {
    ordered_json j;
    j["family"] = family_path;
    j["grid"] = grid;
    j["threads"] = threads;
    j["out"] = out;
    j["options"] = options.to_json();
    return j;
  }
};

int run_sweep(const SweepConfig& cfg) {
  if (cfg.family_path.empty())
    fail(ErrorCode::ConfigError, "sweep: missing family path");
  const FamilySpec family = load_family_file(resolve_input(cfg.family_path));
  const std::vector<double> grid = parse_grid(cfg.grid);
  const auto rows = sweep(family, grid, cfg.options.saddle, cfg.threads);
  std::ofstream out = open_out(cfg.out);
  out << "t,mean_y,xi,theta,xhat,rho_single,rho_process,error\n";
  const auto opt = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("nan");
  };
  for (const SweepRow& r : rows)
    out << format_double(r.t) << "," << format_double(r.mean_y) << ","
        << opt(r.xi) << "," << opt(r.theta) << "," << opt(r.xhat) << ","
        << opt(r.rho_single) << "," << opt(r.rho_process) << "," << r.error
        << "\n";
  return 0;
}

// ------------------------------------------------------------------- perturb

struct PerturbConfig {
  std::string family_path;
  std::string perturbed_path;
  std::string grid;  // t values; single value allowed as lo:lo:1
  std::string out = "perturb.csv";
  OptionsConfig options;

  static PerturbConfig from_json(const ordered_json& j) {
    reject_unknown_keys(j, {"family", "perturbed", "grid", "out", "options"},
                        "perturb config");
    PerturbConfig cfg;
    if (j.contains("family"))
      cfg.family_path = j.at("family").get<std::string>();
    if (j.contains("perturbed"))
      cfg.perturbed_path = j.at("perturbed").get<std::string>();
    if (j.contains("grid")) cfg.grid = j.at("grid").get<std::string>();
    if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
    if (j.contains("options"))
      cfg.options = OptionsConfig::from_json(j.at("options"));
    return cfg;
  }

  ordered_json to_json() const {
    ordered_json j;
    j["family"] = family_path;
    j["perturbed"] = perturbed_path;
    j["grid"] = grid;
    j["out"] = out;
    j["options"] = options.to_json();
    return j;
  }
};

int run_perturb(const PerturbConfig& cfg) {
  if (cfg.family_path.empty() || cfg.perturbed_path.empty() ||
      cfg.grid.empty())
    fail(ErrorCode::ConfigError, "perturb: needs family, perturbed and grid");
  const FamilySpec family = load_family_file(resolve_input(cfg.family_path));
  const ProcessSpec perturbed = load_spec_file(resolve_input(cfg.perturbed_path));
  std::ofstream out = open_out(cfg.out);
  out << "t,eta,xi_base,xi_perturbed,xi_gap,rho_base,rho_perturbed,rho_gap,"
         "bound_xi,bound_rho\n";
  for (double t : parse_grid(cfg.grid)) {
    const PerturbationReport r =
        perturbation_check(family, t, perturbed, cfg.options.saddle);
    out << format_double(r.t) << "," << format_double(r.eta) << ","
        << format_double(r.xi_base) << "," << format_double(r.xi_perturbed)
        << "," << format_double(r.xi_gap) << "," << format_double(r.rho_base)
        << "," << format_double(r.rho_perturbed) << ","
        << format_double(r.rho_gap) << "," << format_double(r.bound_xi) << ","
        << format_double(r.bound_rho) << "\n";
  }
  return 0;
}

// ------------------------------------------------------------------ simulate

struct SimulateConfig {
  std::string spec_path;
  long long samples = 100000;
  std::uint64_t seed = 1;
  int nmax = 0;        // point-probability mode when > 0
  long long cap = 0;   // survival mode when > 0
  int threads = 0;
  std::string out = "simulate.csv";

  static SimulateConfig from_json(const ordered_json& j) {
    reject_unknown_keys(
        j, {"spec", "samples", "seed", "nmax", "cap", "threads", "out"},
        "simulate config");
    SimulateConfig cfg;
    if (j.contains("spec")) cfg.spec_path = j.at("spec").get<std::string>();
    if (j.contains("samples")) cfg.samples = j.at("samples").get<long long>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("nmax")) cfg.nmax = j.at("nmax").get<int>();
    if (j.contains("cap")) cfg.cap = j.at("cap").get<long long>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
    if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
    return cfg;
  }

  ordered_json to_json() const {
    ordered_json j;
    j["spec"] = spec_path;
    j["samples"] = samples;
    j["seed"] = seed;
    if (nmax > 0) j["nmax"] = nmax;
    if (cap > 0) j["cap"] = cap;
    j["threads"] = threads;
    j["out"] = out;
    return j;
  }
};

int run_simulate(const SimulateConfig& cfg) {
  if (cfg.spec_path.empty())
    fail(ErrorCode::ConfigError, "simulate: missing spec path");
  if ((cfg.nmax > 0) == (cfg.cap > 0))
    fail(ErrorCode::ConfigError,
         "simulate: exactly one of nmax (point mode) or cap (survival mode)");
  const ProcessSpec spec = load_spec_file(resolve_input(cfg.spec_path));
  ordered_json summary;
  summary["spec"] = cfg.spec_path;
  summary["samples"] = cfg.samples;
  summary["seed"] = cfg.seed;
  if (cfg.nmax > 0) {
    const PointProbEstimate est = estimate_point_probs(
        spec, cfg.samples, cfg.nmax, cfg.seed, cfg.threads);
    std::ofstream out = open_out(cfg.out);
    out << "N,count,p_hat,ci_lo,ci_hi\n";
    for (const EstimateRow& row : est.rows)
      out << row.n << "," << row.count << "," << format_double(row.p_hat)
          << "," << format_double(row.ci_lo) << ","
          << format_double(row.ci_hi) << "\n";
    summary["mode"] = "point";
    summary["nmax"] = cfg.nmax;
    summary["exceeded"] = est.exceeded;
    summary["exceeded_fraction"] =
        static_cast<double>(est.exceeded) / cfg.samples;
  } else {
    const SurvivalEstimate est = estimate_survival(
        spec, cfg.samples, cfg.cap, cfg.seed, cfg.threads);
    std::ofstream out = open_out(cfg.out);
    out << "N,count,p_hat,ci_lo,ci_hi\n";
    for (const EstimateRow* row : {&est.at_cap, &est.at_cap4})
      out << row->n << "," << row->count << "," << format_double(row->p_hat)
          << "," << format_double(row->ci_lo) << ","
          << format_double(row->ci_hi) << "\n";
    summary["mode"] = "survival";
    summary["cap"] = cfg.cap;
    summary["survival_upper"] = est.at_cap.p_hat;
    summary["survival_refined"] = est.at_cap4.p_hat;
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

// ------------------------------------------------------------------ validate

struct ValidateConfig {
  std::string spec_path;
  std::string family_path;
  OptionsConfig options;

  static ValidateConfig from_json(const ordered_json& j) {
    reject_unknown_keys(j, {"spec", "family", "options"}, "validate config");
    ValidateConfig cfg;
    if (j.contains("spec")) cfg.spec_path = j.at("spec").get<std::string>();
    if (j.contains("family"))
      cfg.family_path = j.at("family").get<std::string>();
    if (j.contains("options"))
      cfg.options = OptionsConfig::from_json(j.at("options"));
    return cfg;
  }

  ordered_json to_json() const {
    ordered_json j;
    if (!spec_path.empty()) j["spec"] = spec_path;
    if (!family_path.empty()) j["family"] = family_path;
    j["options"] = options.to_json();
    return j;
  }
};

struct ValidationContext {
  int failures = 0;

  void report(const std::string& name, bool pass,
              const std::string& detail = "") {
    std::cout << (pass ? "PASS " : "FAIL ") << name;
    if (!pass && !detail.empty()) std::cout << ": " << detail;
    std::cout << "\n";
    if (!pass) ++failures;
  }
};

void validate_spec(const std::string& label, const ProcessSpec& spec,
                   const SaddleOptions& opts, ValidationContext& ctx) {
  const auto name = [&](const std::string& check) {
    return label + "/" + check;
  };
  const BivariatePMF& off = spec.offspring;

  ctx.report(name("pgf-at-one"),
             std::abs(pgf_real(off, 1.0, 1.0) - 1.0) <=
                 off.tail_mass_bound() + 1e-12);

  // Gradient against differenced phi, Hessian against differenced gradient.
  bool fd_ok = true;
  for (double a : {-0.2, 0.1})
    for (double b : {-0.1, 0.2}) {
      const LogMgfDerivs d = log_mgf_derivs(off, a, b);
      const double h = 1e-5;
      const auto phi = [&](double x, double y) {
        return std::log(mgf_real(off, x, y));
      };
      const double g0 = (phi(a + h, b) - phi(a - h, b)) / (2.0 * h);
      const double h00 = (log_mgf_derivs(off, a + h, b).grad[0] -
                          log_mgf_derivs(off, a - h, b).grad[0]) /
                         (2.0 * h);
      if (std::abs(d.grad[0] - g0) >
          1e-6 * std::max(1.0, std::abs(d.grad[0])))
        fd_ok = false;
      if (std::abs(d.hess[0] - h00) >
          1e-6 * std::max(1.0, std::abs(d.hess[0])))
        fd_ok = false;
    }
  ctx.report(name("derivatives-vs-fd"), fd_ok);

  ctx.report(name("psi-at-origin"),
             std::abs(psi_small(off, 0.0, 0.0)) <= 1e-10);

  const bool in_class = check_k0(off, opts.class_params).passed &&
                        check_k1(off, opts.class_params).passed;
  if (in_class) {
    bool pd_ok = true;
    const double box = opts.box_radius;
    for (int i = 0; i < 100; ++i) {
      const double a = box * (2.0 * std::fmod(0.6180339887 * i, 1.0) - 1.0);
      const double b = box * (2.0 * std::fmod(0.7548776662 * i, 1.0) - 1.0);
      const LogMgfDerivs d = log_mgf_derivs(off, a, b);
      if (!(d.det_hess() > 0.0 && d.hess[0] + d.hess[3] > 0.0)) pd_ok = false;
    }
    ctx.report(name("hessian-positive-definite"), pd_ok);

    bool torus_ok = true;
    const double f0 = mgf_real(off, 0.0, 0.0);
    for (int iu = 0; iu < 64 && torus_ok; ++iu)
      for (int iv = 0; iv < 64; ++iv) {
        const double u = -M_PI + 2.0 * M_PI * iu / 64;
        const double v = -M_PI + 2.0 * M_PI * iv / 64;
        const double mod = std::abs(mgf(off, {0.0, u}, {0.0, v}));
        if (mod > f0 * (1.0 + 1e-12) ||
            ((u != 0.0 || v != 0.0) && mod >= f0)) {
          torus_ok = false;
          break;
        }
      }
    ctx.report(name("torus-modulus-bound"), torus_ok);

    const MomentSummary mom = moments(off);
    if (std::abs(mom.mean_y - 1.0) <= opts.ey_window) {
      try {
        const double x0 = 1.0 / (1.0 + mom.mean_z);
        const SaddlePoint h = h_of_x(off, x0, opts);
        ctx.report(name("saddle-residual"), h.residual <= 1e-10);
      } catch (const Error& e) {
        ctx.report(name("saddle-residual"), false, e.what());
      }
    }
  }

  try {
    const TotalProbTable a = total_prob_table(spec, 40);
    const TotalProbTable b = oracle_total_size(spec, 40);
    double worst = 0.0;
    for (int N = 0; N <= 40; ++N)
      worst = std::max(worst, std::abs(a.q[N] - b.q[N]));
    ctx.report(name("dual-oracle"), worst <= 1e-10,
               "max gap " + format_double(worst));
  } catch (const Error& e) {
    ctx.report(name("dual-oracle"), false, e.what());
  }

  try {
    const SurvivalResult r = survival(spec);
    const bool zero_iff_subcritical =
        (moments(off).mean_y <= 1.0) == (r.rho_single == 0.0);
    ctx.report(name("survival-residual"),
               r.residual <= 1e-12 && zero_iff_subcritical);
  } catch (const Error& e) {
    ctx.report(name("survival-residual"), false, e.what());
  }

  const PointProbEstimate mc1 = estimate_point_probs(spec, 2000, 10, 99, 1);
  const PointProbEstimate mc2 = estimate_point_probs(spec, 2000, 10, 99, 3);
  long long counted = mc1.exceeded;
  for (const auto& row : mc1.rows) counted += row.count;
  bool mc_ok = counted == mc1.samples && mc1.exceeded == mc2.exceeded;
  for (std::size_t i = 0; i < mc1.rows.size(); ++i)
    if (mc1.rows[i].count != mc2.rows[i].count) mc_ok = false;
  ctx.report(name("mc-partition-and-determinism"), mc_ok);
}

void validate_family(const std::string& label, const FamilySpec& family,
                     const SaddleOptions& opts, ValidationContext& ctx) {
  const auto name = [&](const std::string& check) {
    return label + "/" + check;
  };
  try {
    const double tc = find_tc(family);
    ctx.report(name("tc-critical"),
               std::abs(moments(family_eval(family, tc).offspring).mean_y -
                        1.0) <= 1e-12);
    const auto rows = sweep(family, {tc}, opts, 1);
    const bool ok = rows[0].error.empty() && rows[0].xi && *rows[0].xi <= 1e-10 &&
                    rows[0].rho_single && *rows[0].rho_single <= 1e-10;
    ctx.report(name("critical-point-vanishing"), ok,
               rows[0].error.empty() ? "" : rows[0].error);
  } catch (const Error& e) {
    ctx.report(name("tc-critical"), false, e.what());
  }
}

int run_validate(const ValidateConfig& cfg) {
  ValidationContext ctx;
  const SaddleOptions& opts = cfg.options.saddle;
  if (!cfg.spec_path.empty()) {
    validate_spec(std::filesystem::path(cfg.spec_path).stem().string(),
                  load_spec_file(resolve_input(cfg.spec_path)), opts, ctx);
  } else if (!cfg.family_path.empty()) {
    validate_family(std::filesystem::path(cfg.family_path).stem().string(),
                    load_family_file(resolve_input(cfg.family_path)), opts, ctx);
  } else {
    // Built-in fixture suite.
    const ProcessSpec geometric{
        pmf_from_entries({{0, 0, 0.5}, {1, 0, 0.5}}),
        pmf_from_entries({{1, 0, 1.0}})};
    const ProcessSpec parity{
        pmf_from_entries({{0, 1, 0.5}, {1, 1, 0.5}}),
        pmf_from_entries({{1, 0, 1.0}})};
    const ProcessSpec poisson_sub{pmf_from_product_poisson(0.95, 1.0),
                                  pmf_from_entries({{1, 0, 1.0}})};
    const ProcessSpec poisson_crit{pmf_from_product_poisson(1.0, 1.0),
                                   pmf_from_entries({{1, 0, 1.0}})};
    const ProcessSpec binomial{
        pmf_from_entries({{0, 0, 0.0625}, {1, 0, 0.375}, {2, 0, 0.5625}}),
        pmf_from_entries({{1, 0, 1.0}})};
    validate_spec("geometric", geometric, opts, ctx);
    validate_spec("parity", parity, opts, ctx);
    validate_spec("poisson-0.95-1", poisson_sub, opts, ctx);
    validate_spec("poisson-1-1", poisson_crit, opts, ctx);
    validate_spec("binomial-0.75", binomial, opts, ctx);

    std::vector<PolyEntry> initial = {{1, 0, {1.0}}};
    validate_family("poisson-t",
                    FamilySpec::poisson_t(0.5, 1.5, 1.0, initial), opts, ctx);
  }
  std::cout << (ctx.failures == 0 ? "OK" : "FAILURES") << " ("
            << ctx.failures << " failed)\n";
  return ctx.failures == 0 ? 0 : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sesqui-type branching process toolkit"};
  app.require_subcommand(1);

  std::string config_path, spec_path, family_path, perturbed_path;
  std::string grid, methods_csv, out_path, points_out, profile_out,
      profile_grid;
  int nmax = 0, threads = 0;
  long long samples = 0, cap = 0;
  std::uint64_t seed = 0;
  bool dump_config = false;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_flag("--dump-config", dump_config,
                  "print the effective config as JSON and exit");
    cmd->add_option("--threads", threads, "worker thread cap (0 = auto)");
  };

  CLI::App* pp = app.add_subcommand("point-prob",
                                    "total-size probabilities q_N");
  add_common(pp);
  pp->add_option("--spec", spec_path, "process spec JSON");
  pp->add_option("--nmax", nmax, "largest total size N");
  pp->add_option("--methods", methods_csv,
                 "comma list from exact,asymptotic,integral,mc");
  pp->add_option("--samples", samples, "Monte Carlo samples");
  pp->add_option("--seed", seed, "Monte Carlo master seed");
  pp->add_option("--out", out_path, "output CSV path");
  pp->add_option("--points-out", points_out, "optional (n,m) table CSV");
  pp->add_option("--profile-out", profile_out, "optional (x,Psi,Phi) CSV");
  pp->add_option("--profile-grid", profile_grid, "profile grid lo:hi:count");

  CLI::App* sv = app.add_subcommand("survival", "survival probabilities");
  add_common(sv);
  sv->add_option("--spec", spec_path, "process spec JSON");
  sv->add_option("--family", family_path, "family JSON");
  sv->add_option("--grid", grid, "t grid lo:hi:count (family mode)");
  sv->add_option("--out", out_path, "output CSV path");

  CLI::App* sw = app.add_subcommand("sweep", "xi/theta/rho along a family");
  add_common(sw);
  sw->add_option("--family", family_path, "family JSON");
  sw->add_option("--grid", grid, "t grid lo:hi:count");
  sw->add_option("--out", out_path, "output CSV path");

  CLI::App* pb = app.add_subcommand("perturb",
                                    "compare a perturbed process to a family");
  add_common(pb);
  pb->add_option("--family", family_path, "family JSON");
  pb->add_option("--perturbed", perturbed_path, "perturbed spec JSON");
  pb->add_option("--grid", grid, "t grid lo:hi:count");
  pb->add_option("--out", out_path, "output CSV path");

  CLI::App* va = app.add_subcommand("validate", "run the invariant suite");
  add_common(va);
  va->add_option("--spec", spec_path, "process spec JSON");
  va->add_option("--family", family_path, "family JSON");

  CLI::App* si = app.add_subcommand("simulate", "Monte Carlo estimates");
  add_common(si);
  si->add_option("--spec", spec_path, "process spec JSON");
  si->add_option("--samples", samples, "sample count");
  si->add_option("--seed", seed, "master seed");
  si->add_option("--nmax", nmax, "point mode: largest N");
  si->add_option("--cap", cap, "survival mode: particle cap");
  si->add_option("--out", out_path, "output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    const ordered_json base = config_path.empty()
                                  ? ordered_json::object()
                                  : load_json_file(config_path);
    if (!config_path.empty())
      g_config_dir =
          std::filesystem::path(config_path).parent_path().string();
    if (app.got_subcommand(pp)) {
      PointProbConfig cfg = PointProbConfig::from_json(base);
      if (pp->count("--spec")) cfg.spec_path = spec_path;
      if (pp->count("--nmax")) cfg.nmax = nmax;
      if (pp->count("--samples")) cfg.samples = samples;
      if (pp->count("--seed")) cfg.seed = seed;
      if (pp->count("--threads")) cfg.threads = threads;
      if (pp->count("--out")) cfg.out = out_path;
      if (pp->count("--points-out")) cfg.points_out = points_out;
      if (pp->count("--profile-out")) cfg.profile_out = profile_out;
      if (pp->count("--profile-grid")) cfg.profile_grid = profile_grid;
      if (pp->count("--methods")) {
        cfg.methods.clear();
        std::istringstream in(methods_csv);
        std::string item;
        while (std::getline(in, item, ',')) cfg.methods.push_back(item);
      }
      if (dump_config) {
        write_config_or_run(cfg.to_json(), true);
        return 0;
      }
      return run_point_prob(cfg);
    }
    if (app.got_subcommand(sv)) {
      SurvivalConfig cfg = SurvivalConfig::from_json(base);
      if (sv->count("--spec")) cfg.spec_path = spec_path;
      if (sv->count("--family")) cfg.family_path = family_path;
      if (sv->count("--grid")) cfg.grid = grid;
      if (sv->count("--out")) cfg.out = out_path;
      if (dump_config) {
        write_config_or_run(cfg.to_json(), true);
        return 0;
      }
      return run_survival(cfg);
    }
    if (app.got_subcommand(sw)) {
      SweepConfig cfg = SweepConfig::from_json(base);
      if (sw->count("--family")) cfg.family_path = family_path;
      if (sw->count("--grid")) cfg.grid = grid;
      if (sw->count("--threads")) cfg.threads = threads;
      if (sw->count("--out")) cfg.out = out_path;
      if (dump_config) {
        write_config_or_run(cfg.to_json(), true);
        return 0;
      }
      return run_sweep(cfg);
    }
    if (app.got_subcommand(pb)) {
      PerturbConfig cfg = PerturbConfig::from_json(base);
      if (pb->count("--family")) cfg.family_path = family_path;
      if (pb->count("--perturbed")) cfg.perturbed_path = perturbed_path;
      if (pb->count("--grid")) cfg.grid = grid;
      if (pb->count("--out")) cfg.out = out_path;
      if (dump_config) {
        write_config_or_run(cfg.to_json(), true);
        return 0;
      }
      return run_perturb(cfg);
    }
    if (app.got_subcommand(va)) {
      ValidateConfig cfg = ValidateConfig::from_json(base);
      if (va->count("--spec")) cfg.spec_path = spec_path;
      if (va->count("--family")) cfg.family_path = family_path;
      if (dump_config) {
        write_config_or_run(cfg.to_json(), true);
        return 0;
      }
      return run_validate(cfg);
    }
    if (app.got_subcommand(si)) {
      SimulateConfig cfg = SimulateConfig::from_json(base);
      if (si->count("--spec")) cfg.spec_path = spec_path;
      if (si->count("--samples")) cfg.samples = samples;
      if (si->count("--seed")) cfg.seed = seed;
      if (si->count("--nmax")) cfg.nmax = nmax;
      if (si->count("--cap")) cfg.cap = cap;
      if (si->count("--threads")) cfg.threads = threads;
      if (si->count("--out")) cfg.out = out_path;
      if (dump_config) {
        write_config_or_run(cfg.to_json(), true);
        return 0;
      }
      return run_simulate(cfg);
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what()
              << "\n";
    return e.code() == ErrorCode::ConfigError ? kExitConfig : kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return 0;
}
