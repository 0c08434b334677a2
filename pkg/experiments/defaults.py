"""
Single source of numerical defaults and statistical acceptance thresholds.

Library modules take these as default arguments; the CLI exposes the
thresholds as flags and the tests import them directly.
"""

# ----------------------------
# Statistical thresholds
# ----------------------------
P_THRESHOLD = 0.01            # two-sample tests pass when p > P_THRESHOLD
P_THRESHOLD_GRID = 0.001      # per-cell threshold on Bonferroni-adjusted grids
KS_MAX = 0.05                 # KS distance acceptance for limit-law comparisons
KS_MAX_TIGHT = 0.03           # KS distance for exact-oracle comparisons
KS_TREND_SLACK = 0.01         # allowed increase when asserting a non-increasing trend
SE_MULT = 3.0                 # "within SE_MULT standard errors"
SE_MULT_LOOSE = 4.0           # DP vs MC agreement
CONFIDENCE_LEVEL = 0.95
MIN_KS_REPS = 1000            # fewer replicas -> LOW_RESOLUTION warning
MIN_EXPECTED_COUNT = 5.0      # chi-square bin merge target
MIN_BATCHES = 10

# ----------------------------
# Numerical defaults
# ----------------------------
GAMMA_TOL = 1e-10
GAMMA_MAX_TERMS = 1 << 26
DP_TOL = 1e-10
DP_MAX_RED_CAP = 1 << 22
DP_SQRT_FACTOR = 12.0         # a in red_cap = m + ceil(a*sqrt(m)) + C_geo*log(1/tol)
TOTH_GAP_MAX = 1e-8
N_MEMO = 1 << 20              # memoised w(0..N_MEMO-1)
MAX_DRAWS = 10**9             # hard cap on urn draws per run
MAX_RECORDED_STEPS = 1 << 26  # positions/increments recording cap per trace
CHUNK_STEPS = 1 << 20         # uniforms drawn per kernel call
BMPE_RESIDUAL_MAX = 1e-12
BMPE_DT = 1e-3
BESQ_DT = 1e-4

# ----------------------------
# Harness
# ----------------------------
WORKERS_ENV = "SIRW_WORKERS"
CSV_SCHEMA_VERSION = 1
GOOD_EVENT_K_GRID = (0.5, 1.0, 2.0, 5.0, 10.0)
LIPSCHITZ_K = 10.0
TOTH_LAM_GRID = (-0.4, -0.2, 0.0, 0.2, 0.4)
URNLAW_ANCHOR = 4             # x for walk-extracted BLP transitions
URNLAW_VALUES = (1, 2, 3, 5)
