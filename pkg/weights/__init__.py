from weights.spec import (
    Family,
    SiteSign,
    SpecViolationError,
    ValidationReport,
    Violation,
    WeightSpec,
    dump_spec,
    ensure_valid,
    eval_w,
    load_spec,
    urn_weights,
    validate,
    w_values,
    weight_bounds,
)
from weights.gamma import GammaNotCertified, GammaSeries, gamma, gamma_series, gamma_terms
from weights.table import WeightTable, weight_table

__all__ = [
    "Family", "SiteSign", "SpecViolationError", "ValidationReport", "Violation",
    "WeightSpec", "dump_spec", "ensure_valid", "eval_w", "load_spec",
    "urn_weights", "validate", "w_values", "weight_bounds",
    "GammaNotCertified", "GammaSeries", "gamma", "gamma_series", "gamma_terms",
    "WeightTable", "weight_table",
]
