#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "sesqui/exact.hpp"
#include "sesqui/family.hpp"
#include "sesqui/io.hpp"
#include "sesqui/montecarlo.hpp"
#include "sesqui/saddle.hpp"
#include "sesqui/survival.hpp"

namespace py = pybind11;
using namespace sesqui;

namespace {

std::vector<Entry> entries_from_tuples(
    const std::vector<std::tuple<int, int, double>>& raw) {
  std::vector<Entry> out;
  out.reserve(raw.size());
  for (const auto& [k, l, p] : raw) out.push_back({k, l, p});
  return out;
}

}  // namespace

PYBIND11_MODULE(_sesqui, m) {
  m.doc() = "Sesqui-type branching processes: exact, asymptotic and "
            "Monte Carlo size distributions, survival probabilities, "
            "parameterized families.";

  py::register_exception<Error>(m, "SesquiError");

  py::class_<BivariatePMF>(m, "BivariatePMF")
      .def_property_readonly("kmax", &BivariatePMF::kmax)
      .def_property_readonly("lmax", &BivariatePMF::lmax)
      .def_property_readonly("tail_mass_bound", &BivariatePMF::tail_mass_bound)
      .def("prob", &BivariatePMF::prob, py::arg("k"), py::arg("l"))
      .def("total_mass", &BivariatePMF::total_mass)
      .def("marginal_y", &BivariatePMF::marginal_y)
      .def("__repr__", [](const BivariatePMF& p) {
        return "BivariatePMF(kmax=" + std::to_string(p.kmax()) +
               ", lmax=" + std::to_string(p.lmax()) + ")";
      });

  py::class_<ProcessSpec>(m, "ProcessSpec")
      .def(py::init<BivariatePMF, BivariatePMF>(), py::arg("offspring"),
           py::arg("initial"))
      .def_readonly("offspring", &ProcessSpec::offspring)
      .def_readonly("initial", &ProcessSpec::initial);

  py::class_<ClassParams>(m, "ClassParams")
      .def(py::init<>())
      .def(py::init([](double R, double M, int k1, int k2, double delta) {
             return ClassParams{R, M, k1, k2, delta};
           }),
           py::arg("R") = 2.0, py::arg("M") = 10.0, py::arg("k1") = 0,
           py::arg("k2") = 0, py::arg("delta") = 0.01)
      .def_readwrite("R", &ClassParams::R)
      .def_readwrite("M", &ClassParams::M)
      .def_readwrite("k1", &ClassParams::k1)
      .def_readwrite("k2", &ClassParams::k2)
      .def_readwrite("delta", &ClassParams::delta);

  py::class_<MomentSummary>(m, "MomentSummary")
      .def_readonly("mean_y", &MomentSummary::mean_y)
      .def_readonly("mean_z", &MomentSummary::mean_z)
      .def_readonly("fact2_y", &MomentSummary::fact2_y);

  py::class_<LogMgfDerivs>(m, "LogMgfDerivs")
      .def_readonly("phi", &LogMgfDerivs::phi)
      .def_readonly("grad", &LogMgfDerivs::grad)
      .def_readonly("hess", &LogMgfDerivs::hess);

  py::class_<ClassReport>(m, "ClassReport")
      .def_readonly("passed", &ClassReport::passed)
      .def_readonly("moment_r", &ClassReport::moment_r)
      .def_readonly("mean_y", &ClassReport::mean_y)
      .def_readonly("corner_probs", &ClassReport::corner_probs);

  m.def("pmf_from_entries",
        [](const std::vector<std::tuple<int, int, double>>& raw,
           bool normalize) {
          return pmf_from_entries(entries_from_tuples(raw), normalize);
        },
        py::arg("entries"), py::arg("normalize") = false);
  m.def("pmf_from_product_poisson", &pmf_from_product_poisson, py::arg("mu"),
        py::arg("nu"), py::arg("tail_tol") = 1e-15);
  m.def("moments", &moments);
  m.def("pgf", &pgf, py::arg("pmf"), py::arg("y"), py::arg("z"));
  m.def("mgf", &mgf, py::arg("pmf"), py::arg("y"), py::arg("z"));
  m.def("log_mgf_derivs", &log_mgf_derivs, py::arg("pmf"), py::arg("alpha"),
        py::arg("beta"));
  m.def("tilde_f0", &tilde_f0, py::arg("initial"), py::arg("alpha"),
        py::arg("beta"));
  m.def("check_k0", &check_k0, py::arg("pmf"), py::arg("params"));
  m.def("check_k1", &check_k1, py::arg("pmf"), py::arg("params"));

  py::class_<PointProbTable>(m, "PointProbTable")
      .def_readonly("nmax", &PointProbTable::nmax)
      .def("at", &PointProbTable::at, py::arg("n"), py::arg("m"))
      .def("log_at", &PointProbTable::log_at, py::arg("n"), py::arg("m"));

  py::class_<TotalProbTable>(m, "TotalProbTable")
      .def_readonly("nmax", &TotalProbTable::nmax)
      .def_readonly("q", &TotalProbTable::q)
      .def_readonly("log_q", &TotalProbTable::log_q);

  m.def("otter_dwass_conditional", &otter_dwass_conditional,
        py::arg("offspring"), py::arg("n"), py::arg("m"), py::arg("n0"),
        py::arg("m0"));
  m.def("point_prob_table", &point_prob_table, py::arg("spec"),
        py::arg("nmax"), py::arg("capacity") = kDefaultExactCapacity);
  m.def("total_prob_table", &total_prob_table, py::arg("spec"),
        py::arg("nmax"), py::arg("capacity") = kDefaultExactCapacity);
  m.def("oracle_total_size", &oracle_total_size, py::arg("spec"),
        py::arg("nmax"), py::arg("capacity") = kDefaultExactCapacity);

  py::class_<SaddleOptions>(m, "SaddleOptions")
      .def(py::init<>())
      .def_readwrite("box_radius", &SaddleOptions::box_radius)
      .def_readwrite("tol", &SaddleOptions::tol)
      .def_readwrite("max_iter", &SaddleOptions::max_iter)
      .def_readwrite("xhat_radius", &SaddleOptions::xhat_radius)
      .def_readwrite("ey_window", &SaddleOptions::ey_window)
      .def_readwrite("fd_step", &SaddleOptions::fd_step)
      .def_readwrite("class_params", &SaddleOptions::class_params)
      .def_readwrite("enforce_class", &SaddleOptions::enforce_class)
      .def_readwrite("integration_box", &SaddleOptions::integration_box)
      .def_static("for_class", &SaddleOptions::for_class);

  py::class_<SaddlePoint>(m, "SaddlePoint")
      .def_readonly("alpha", &SaddlePoint::alpha)
      .def_readonly("beta", &SaddlePoint::beta)
      .def_readonly("residual", &SaddlePoint::residual)
      .def_readonly("iterations", &SaddlePoint::iterations);

  py::class_<AsymptoticParams>(m, "AsymptoticParams")
      .def_readonly("x0", &AsymptoticParams::x0)
      .def_readonly("xhat", &AsymptoticParams::xhat)
      .def_readonly("xi", &AsymptoticParams::xi)
      .def_readonly("theta", &AsymptoticParams::theta)
      .def_readonly("psi_pp", &AsymptoticParams::psi_pp)
      .def_readonly("phi_at_xhat", &AsymptoticParams::phi_at_xhat);

  py::class_<ThetaSum>(m, "ThetaSum")
      .def_readonly("a", &ThetaSum::a)
      .def_readonly("y", &ThetaSum::y)
      .def_readonly("j", &ThetaSum::j)
      .def_readonly("value", &ThetaSum::value);

  py::class_<ProbValue>(m, "ProbValue")
      .def_readonly("value", &ProbValue::value)
      .def_readonly("log_value", &ProbValue::log_value);

  m.def("solve_saddle",
        [](const BivariatePMF& pmf, double t1, double t2,
           const SaddleOptions& opts) {
          return solve_saddle(pmf, {t1, t2}, opts);
        },
        py::arg("offspring"), py::arg("target1"), py::arg("target2"),
        py::arg("options") = SaddleOptions{});
  m.def("psi_small", &psi_small, py::arg("offspring"), py::arg("alpha"),
        py::arg("beta"));
  m.def("h_of_x", &h_of_x, py::arg("offspring"), py::arg("x"),
        py::arg("options") = SaddleOptions{});
  m.def("capital_psi", &capital_psi, py::arg("offspring"), py::arg("x"),
        py::arg("options") = SaddleOptions{});
  m.def("capital_phi", &capital_phi, py::arg("spec"), py::arg("x"),
        py::arg("options") = SaddleOptions{});
  m.def("find_xhat", &find_xhat, py::arg("offspring"),
        py::arg("options") = SaddleOptions{});
  m.def("asymptotic_params", &asymptotic_params, py::arg("spec"),
        py::arg("options") = SaddleOptions{});
  m.def("asymp_point_prob", &asymp_point_prob, py::arg("spec"), py::arg("n"),
        py::arg("m"), py::arg("options") = SaddleOptions{});
  m.def("asymp_total_prob", &asymp_total_prob, py::arg("params"),
        py::arg("N"));
  m.def("integral_point_prob", &integral_point_prob, py::arg("spec"),
        py::arg("n"), py::arg("m"), py::arg("options") = SaddleOptions{});
  m.def("integral_point_prob_at", &integral_point_prob_at, py::arg("spec"),
        py::arg("n"), py::arg("m"), py::arg("alpha"), py::arg("beta"),
        py::arg("options") = SaddleOptions{});
  m.def("theta_sum", &theta_sum, py::arg("a"), py::arg("y"), py::arg("j"));

  py::class_<RhoHatResult>(m, "RhoHatResult")
      .def_readonly("rho_hat", &RhoHatResult::rho_hat)
      .def_readonly("bracketed_roots", &RhoHatResult::bracketed_roots)
      .def_readonly("residual", &RhoHatResult::residual);

  py::class_<SurvivalResult>(m, "SurvivalResult")
      .def_readonly("rho_hat", &SurvivalResult::rho_hat)
      .def_readonly("rho_single", &SurvivalResult::rho_single)
      .def_readonly("rho_process", &SurvivalResult::rho_process)
      .def_readonly("residual", &SurvivalResult::residual);

  m.def("h_y", &h_y, py::arg("offspring"), py::arg("x"));
  m.def("solve_rho_hat", &solve_rho_hat, py::arg("offspring"));
  m.def("survival", &survival, py::arg("spec"));
  m.def("first_order_survival", &first_order_survival, py::arg("offspring"));

  py::class_<FamilySpec>(m, "FamilySpec")
      .def_property_readonly("t_lo", &FamilySpec::t_lo)
      .def_property_readonly("t_hi", &FamilySpec::t_hi)
      .def_property_readonly("class_R", &FamilySpec::class_R);

  py::class_<SweepRow>(m, "SweepRow")
      .def_readonly("t", &SweepRow::t)
      .def_readonly("mean_y", &SweepRow::mean_y)
      .def_readonly("xi", &SweepRow::xi)
      .def_readonly("theta", &SweepRow::theta)
      .def_readonly("xhat", &SweepRow::xhat)
      .def_readonly("rho_single", &SweepRow::rho_single)
      .def_readonly("rho_process", &SweepRow::rho_process)
      .def_readonly("error", &SweepRow::error);

  py::class_<PerturbationReport>(m, "PerturbationReport")
      .def_readonly("t", &PerturbationReport::t)
      .def_readonly("eta", &PerturbationReport::eta)
      .def_readonly("xi_base", &PerturbationReport::xi_base)
      .def_readonly("xi_perturbed", &PerturbationReport::xi_perturbed)
      .def_readonly("xi_gap", &PerturbationReport::xi_gap)
      .def_readonly("rho_base", &PerturbationReport::rho_base)
      .def_readonly("rho_perturbed", &PerturbationReport::rho_perturbed)
      .def_readonly("rho_gap", &PerturbationReport::rho_gap)
      .def_readonly("bound_xi", &PerturbationReport::bound_xi)
      .def_readonly("bound_rho", &PerturbationReport::bound_rho);

  py::class_<SurvivalExpansion>(m, "SurvivalExpansion")
      .def_readonly("a", &SurvivalExpansion::a)
      .def_readonly("max_residual", &SurvivalExpansion::max_residual)
      .def_readonly("tc", &SurvivalExpansion::tc);

  py::class_<MixturePathDerivs>(m, "MixturePathDerivs")
      .def_readonly("dxi_du", &MixturePathDerivs::dxi_du)
      .def_readonly("dtheta_du", &MixturePathDerivs::dtheta_du)
      .def_readonly("drho_du", &MixturePathDerivs::drho_du);

  m.def("family_from_json", [](const std::string& text) {
    return family_from_json(ordered_json::parse(text));
  });
  m.def("load_family_file", &load_family_file, py::arg("path"));
  m.def("spec_from_json", [](const std::string& text) {
    return spec_from_json(ordered_json::parse(text));
  });
  m.def("load_spec_file", &load_spec_file, py::arg("path"));
  m.def("family_eval", &family_eval, py::arg("family"), py::arg("t"));
  m.def("find_tc", &find_tc, py::arg("family"));
  m.def("sweep", &sweep, py::arg("family"), py::arg("grid"),
        py::arg("options") = SaddleOptions{}, py::arg("threads") = 0);
  m.def("survival_expansion", &survival_expansion, py::arg("family"),
        py::arg("order"));
  m.def("mixture", &mixture, py::arg("a"), py::arg("b"), py::arg("u"));
  m.def("eta_distance", &eta_distance, py::arg("a"), py::arg("b"),
        py::arg("R"), py::arg("samples") = 64);
  m.def("perturbation_check", &perturbation_check, py::arg("family"),
        py::arg("t"), py::arg("perturbed"),
        py::arg("options") = SaddleOptions{});
  m.def("finite_diff_family_derivs", &finite_diff_family_derivs, py::arg("a"),
        py::arg("b"), py::arg("u"), py::arg("h"),
        py::arg("options") = SaddleOptions{});

  py::class_<SimOutcome> sim(m, "SimOutcome");
  py::enum_<SimOutcome::Kind>(sim, "Kind")
      .value("Finite", SimOutcome::Kind::Finite)
      .value("Exceeded", SimOutcome::Kind::Exceeded);
  sim.def_readonly("kind", &SimOutcome::kind)
      .def_readonly("total", &SimOutcome::total)
      .def_readonly("cap", &SimOutcome::cap);

  py::class_<EstimateRow>(m, "EstimateRow")
      .def_readonly("n", &EstimateRow::n)
      .def_readonly("count", &EstimateRow::count)
      .def_readonly("p_hat", &EstimateRow::p_hat)
      .def_readonly("ci_lo", &EstimateRow::ci_lo)
      .def_readonly("ci_hi", &EstimateRow::ci_hi);

  py::class_<PointProbEstimate>(m, "PointProbEstimate")
      .def_readonly("rows", &PointProbEstimate::rows)
      .def_readonly("exceeded", &PointProbEstimate::exceeded)
      .def_readonly("samples", &PointProbEstimate::samples);

  py::class_<SurvivalEstimate>(m, "SurvivalEstimate")
      .def_readonly("at_cap", &SurvivalEstimate::at_cap)
      .def_readonly("at_cap4", &SurvivalEstimate::at_cap4)
      .def_readonly("samples", &SurvivalEstimate::samples);

  m.def("sample_total", &sample_total, py::arg("spec"), py::arg("seed"),
        py::arg("cap"));
  m.def("estimate_point_probs", &estimate_point_probs, py::arg("spec"),
        py::arg("samples"), py::arg("nmax"), py::arg("master_seed"),
        py::arg("threads") = 0);
  m.def("estimate_survival", &estimate_survival, py::arg("spec"),
        py::arg("samples"), py::arg("cap"), py::arg("master_seed"),
        py::arg("threads") = 0);
}
