# src/numtheory/constants.py
from __future__ import annotations

# Input budgets (exclusive upper bounds unless noted).
FACTOR_LIMIT = 2**63
NEXT_PRIME_LIMIT = 2**62
DLOG_LIMIT = 2**40
RANGE_SPAN_LIMIT = 2**34
MAX_ADMISSIBLE_K = 16
MAX_CENSUS_K = 8
MIN_CENSUS_X = 3
CENSUS_X_CAP = 10**7           # [x, 2x] sweeps; larger needs allow_large
AVG_ORDER_X_CAP = 10**6
ORDER_TABLE_LIMIT = 2**24
COPRIME_REFERENCE_LIMIT = 200  # exhaustive coprime-pair reference for the sampler

# Tolerances.
CLOSED_FORM_TOL = 1e-9
INDICATOR_TOL_PER_TERM = 1e-6
PROBABILITY_FLOAT_TOL = 1e-12
TRIVIAL_BOUND_SLACK = 1e-9

# Reference constants for bounds stated with unspecified implied constants.
REFERENCE_EPSILON = 0.1
PERIODIC_C0 = 1.0
PERIODIC_C1 = 1.0
DIFFERENCE_BOUND_CONSTANT = 16.0
COPRIME_KERNEL_MIN_P = 100

# Sieve / sweep layout.
SEGMENT_ODD_COUNT = 1 << 18     # odd slots per segment, ~256 KiB of mask
SEGMENTS_PER_TASK = 4
WITNESS_CAP = 32
EXACT_MAIN_TERM_LIMIT = 400     # Fraction accumulation up to this many primes
EXPSUM_CHUNK = 1 << 16          # rows of complex phases materialised at once

THREADS_ENV = "ORDLAB_THREADS"
FLOAT_FORMAT = "%.12g"

# Output column orders, one list per report type (CSV header == JSON keys).
ORDER_COLUMNS = ["p", "u", "ord", "index"]

PRIMITIVE_ROOT_COLUMNS = ["p", "tau", "q", "p_minus_one"]

ADMISSIBLE_COLUMNS = ["bases", "admissible", "witness", "witness_product"]

INDICATOR_COLUMNS = [
    "p", "u", "d", "direct",
    "psi_free_d", "psi_free_d_rounded", "psi_free_d_residual",
    "psi_divisor", "psi_divisor_rounded", "psi_divisor_residual",
]

EXPSUM_COLUMNS = ["kind", "params", "re", "im", "magnitude", "bound", "ratio", "term_count"]

CENSUS_COLUMNS = [
    "x", "two_x", "k", "specs", "primes_total", "R", "skipped",
    "M", "e3_abs", "lower_bound", "ratio",
]

MAIN_TERM_COLUMNS = ["x", "d", "e", "lcm", "de", "primes", "M"]

AUDIT_COLUMNS = [
    "x", "specs", "primes_audited", "R", "main", "e1", "e2", "e3", "total",
    "identity_holds", "vanishing_checks", "vanishing_failures", "e3_abs", "e3_reference", "e3_ratio",
]

TOTIENT_AVG_COLUMNS = ["x", "q", "a", "indices", "primes", "S", "A_hat", "label"]

RELATION_COLUMNS = ["x", "two_x", "bases", "relation", "primes_total", "matching", "skipped", "index_histogram"]

STATS_COLUMNS = [
    "p", "alpha2_num", "alpha2_den", "alpha2", "phi_ratio",
    "trials", "hits", "estimate", "seed", "k", "alpha2_coprime",
]

AVG_ORDER_COLUMNS = ["x", "u", "order_sum", "T"]

VERIFY_COLUMNS = ["criterion", "passed", "checks", "failures", "worst", "detail"]
