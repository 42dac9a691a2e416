"""Sesqui-type branching processes.

Exact, saddle-point-asymptotic and Monte Carlo size distributions, survival
probabilities, and t-parameterized near-critical families for two-type
Galton-Watson processes in which only the first type reproduces.
"""

from ._sesqui import (  # noqa: F401
    AsymptoticParams,
    BivariatePMF,
    ClassParams,
    ClassReport,
    EstimateRow,
    FamilySpec,
    LogMgfDerivs,
    MixturePathDerivs,
    MomentSummary,
    PerturbationReport,
    PointProbEstimate,
    PointProbTable,
    ProbValue,
    ProcessSpec,
    RhoHatResult,
    SaddleOptions,
    SaddlePoint,
    SesquiError,
    SimOutcome,
    SurvivalEstimate,
    SurvivalExpansion,
    SurvivalResult,
    SweepRow,
    ThetaSum,
    TotalProbTable,
    asymp_point_prob,
    asymp_total_prob,
    asymptotic_params,
    capital_phi,
    capital_psi,
    check_k0,
    check_k1,
    estimate_point_probs,
    estimate_survival,
    eta_distance,
    family_eval,
    family_from_json,
    find_tc,
    find_xhat,
    finite_diff_family_derivs,
    first_order_survival,
    h_of_x,
    h_y,
    integral_point_prob,
    integral_point_prob_at,
    load_family_file,
    load_spec_file,
    log_mgf_derivs,
    mgf,
    mixture,
    moments,
    otter_dwass_conditional,
    perturbation_check,
    pgf,
    pmf_from_entries,
    pmf_from_product_poisson,
    point_prob_table,
    psi_small,
    sample_total,
    solve_rho_hat,
    solve_saddle,
    oracle_total_size,
    survival,
    survival_expansion,
    sweep,
    theta_sum,
    tilde_f0,
    total_prob_table,
)

__version__ = "0.1.0"
