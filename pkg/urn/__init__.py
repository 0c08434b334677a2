from urn.process import (
    Color,
    DrawCapExceeded,
    InsufficientTrace,
    SiteNotVisited,
    UrnState,
    UrnTrace,
    draw,
    draw_until,
    drift_from_urn,
    drift_terms,
    exp_martingale,
    extract_all_urns,
    extract_urn_from_walk,
    martingale_step_check,
    run_to_tau_blue,
    run_to_tau_red,
    sample_reds_at_tau_blue,
    urn_drift,
)
from urn.oracle import (
    DpOracleResult,
    DProfile,
    LimitCheck,
    TailEstimate,
    TothResult,
    TruncationError,
    UrnEstimate,
    concentration_tail,
    expected_D_at_tau,
    expected_D_profile,
    fit_concentration,
    initial_red_cap,
    limit_check,
    mu_distribution,
    sample_D_at_tau,
    tails_from_sample,
    toth_check,
    toth_linear_check,
)
from urn.monitor import RhoReport, rho_monitor
