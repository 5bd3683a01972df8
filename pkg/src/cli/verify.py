# src/cli/verify.py
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from itertools import islice
from typing import Callable, Dict, List, Tuple

import numpy as np
from sympy import n_order, primerange, totient

from src.numtheory.constants import CENSUS_COLUMNS, CLOSED_FORM_TOL, INDICATOR_TOL_PER_TERM, VERIFY_COLUMNS
from src.numtheory.errors import IdentityViolation
from src.numtheory.factor import divisors, euler_phi
from src.numtheory.modular import order_table, prime_context
from src.sums import expsum
from src.sums.indicator import (
    OrderSpec,
    decompose_terms,
    decompose_terms_numeric,
    indicator_direct,
    psi_divisor_all,
    psi_free,
    psi_free_d_all,
)
from src.sweeps.census import CensusQuery, count_simultaneous, decomposition_audit, lower_bound, main_term
from src.sweeps.reports import build_frame, fingerprint_report
from src.sweeps.stats import (
    avg_order,
    equal_order_probability_exact,
    equal_order_probability_pairs,
    equal_order_probability_sampled,
)

logger = logging.getLogger(__name__)

LEVELS = ("quick", "full")
SAMPLER_SEED = 20240601

# Per-level ranges: quick stays under half a minute, full runs the acceptance ranges.
RANGES: Dict[str, Dict[str, object]] = {
    "quick": {
        "indicator_p": 500, "kernel_primes": 20, "weil_p": 200, "double_p": 300, "rho_p": 500,
        "census_x": (100, 1000), "corollary_x": (1000, 10_000), "audit_x": (100, 1000),
        "main_x": 1000, "chain_p": 2000, "trials": 10_000, "avg_x": 1000, "determinism_x": 1000,
    },
    "full": {
        "indicator_p": 2000, "kernel_primes": 100, "weil_p": 500, "double_p": 1000, "rho_p": 3000,
        "census_x": (100, 1000, 10_000), "corollary_x": (1000, 10_000, 100_000), "audit_x": (100, 1000),
        "main_x": 10_000, "chain_p": 10_000, "trials": 100_000, "avg_x": 1000, "determinism_x": 10_000,
    },
}

CENSUS_SPECS = (
    ("3:1", "2:2"),
    ("2:1",),
    ("3:1", "5:1", "2:2"),
)


@dataclass
class CriterionResult:
    criterion: str
    passed: bool = True
    checks: int = 0
    failures: int = 0
    worst: float = 0.0
    detail: str = ""

    def record(self, ok: bool, value: float = 0.0) -> None:
        self.checks += 1
        if not ok:
            self.failures += 1
            self.passed = False
        if math.isfinite(value):
            self.worst = max(self.worst, value)

    def as_row(self) -> Dict[str, object]:
        return {
            "criterion": self.criterion,
            "passed": self.passed,
            "checks": self.checks,
            "failures": self.failures,
            "worst": self.worst,
            "detail": self.detail,
        }


def _odd_primes(limit: int) -> List[int]:
    return [int(p) for p in primerange(3, limit)]


def _first_odd_primes(count: int) -> List[int]:
    return [int(p) for p in islice(primerange(3, 10**7), count)]


def _specs(texts: Tuple[str, ...]) -> Tuple[OrderSpec, ...]:
    return tuple(OrderSpec.parse(t) for t in texts)


def _oracle_census(x: int, specs: Tuple[OrderSpec, ...]) -> int:
    # Independent scan: sympy orders, no sieve or indicator code.
    count = 0
    for p in primerange(x, 2 * x + 1):
        ok = True
        for s in specs:
            u = int(s.base.value)
            if (p - 1) % s.index or u % p == 0:
                ok = False
                break
            if n_order(u, p) != (p - 1) // s.index:
                ok = False
                break
        count += ok
    return count


# -------------------------
# Criteria
# -------------------------
def check_indicator_equivalence(r: dict) -> CriterionResult:
    res = CriterionResult("indicator_equivalence")
    for p in _odd_primes(r["indicator_p"]):
        ctx = prime_context(p)
        direct_orders = order_table(ctx)[1:]
        div = psi_divisor_all(ctx)
        for d in divisors(ctx.p_minus_one):
            truth = (direct_orders == ctx.n // d).astype(int)
            frames = (psi_free_d_all(d, ctx), div) if d == 1 else (psi_free_d_all(d, ctx),)
            for frame in frames:
                residual = float(frame["residual"].max())
                agrees = bool((frame["rounded"].to_numpy() == truth).all())
                res.record(agrees and residual <= INDICATOR_TOL_PER_TERM * p, residual / p)
        for u in (2, p - 1):
            res.record(psi_free(u, ctx).rounded == indicator_direct(OrderSpec(u, 1), ctx))
    res.detail = f"p < {r['indicator_p']}; worst residual per p (bound {INDICATOR_TOL_PER_TERM:g})"
    return res


def check_element_counts(r: dict) -> CriterionResult:
    res = CriterionResult("element_counts")
    for p in _odd_primes(r["indicator_p"]):
        ctx = prime_context(p)
        orders = order_table(ctx)[1:]
        for d in divisors(ctx.p_minus_one):
            res.record(int(np.count_nonzero(orders == ctx.n // d)) == euler_phi(ctx.n // d))
    res.detail = f"sum_u [index u = d] = phi((p-1)/d), p < {r['indicator_p']}"
    return res


def check_kernel_closed_form(r: dict) -> CriterionResult:
    res = CriterionResult("kernel_closed_form")
    for p in _first_odd_primes(r["kernel_primes"]):
        ctx = prime_context(p)
        q = ctx.q
        for t in sorted({1, 2, q // 2, q - 2, q - 1}):
            try:
                out = expsum.kernel_sum(ctx, t)
            except IdentityViolation:
                res.record(False)
                continue
            res.record(out.ratio <= 1.0, out.ratio)
    res.detail = f"{res.checks} (p, q, t) points; worst |sum| / (2q / (pi min(t, q-t)))"
    return res


def check_mobius_agreement(r: dict) -> CriterionResult:
    res = CriterionResult("mobius_agreement")
    for p in _first_odd_primes(r["kernel_primes"]):
        ctx = prime_context(p)
        for d in divisors(ctx.p_minus_one)[:3]:
            for t in (1, ctx.q - 1):
                try:
                    out = expsum.coprime_kernel_sum(ctx, t, d)
                    gap = abs(out.value - complex(out.extras["mobius_re"], out.extras["mobius_im"]))
                    res.record(gap <= CLOSED_FORM_TOL, gap)
                except IdentityViolation:
                    res.record(False)
    for m in range(3, 3 + r["kernel_primes"]):
        for w in (2, 3, 5, m - 1):
            if math.gcd(w, m) != 1 or w % m in (0, 1):
                continue
            elem = expsum.PeriodicElement.build(m, w)
            for P in sorted({1, max(1, elem.Q // 2), elem.Q}):
                try:
                    out = expsum.coprime_periodic_sum(expsum.PeriodicElement(m, w % m, elem.Q, P), 1)
                    gap = abs(out.value - complex(out.extras["mobius_re"], out.extras["mobius_im"]))
                    res.record(gap <= CLOSED_FORM_TOL, gap)
                except IdentityViolation:
                    res.record(False)
    res.detail = "direct vs Moebius-expanded paths; worst |gap|"
    return res


def check_quadratic_gauss(r: dict) -> CriterionResult:
    res = CriterionResult("quadratic_gauss")
    for p in _odd_primes(r["weil_p"]):
        ctx = prime_context(p)
        root = math.sqrt(p)
        for a in range(1, p):
            gap = abs(expsum.weil_power_sum(ctx, 2, a).extras["complete_magnitude"] - root)
            res.record(gap <= 1e-6, gap)
    res.detail = f"|sum_z e(a z^2 / p)| = sqrt(p), odd p < {r['weil_p']}"
    return res


def check_double_sum(r: dict) -> CriterionResult:
    res = CriterionResult("double_sum_collapse")
    for p in _odd_primes(r["double_p"]):
        ctx = prime_context(p)
        for d in (d for d in divisors(ctx.p_minus_one) if d <= 6):
            for u in (2, 3, 5):
                if u % p == 0:
                    continue
                spec = OrderSpec(u, d)
                try:
                    out = expsum.double_sum(spec, ctx)
                except IdentityViolation:
                    res.record(False)
                    continue
                res.record(True, abs(out.value - out.extras["identity"]) / p)
    res.detail = f"T = p [ord u = (p-1)/d] - phi((p-1)/d), p < {r['double_p']}; worst |gap| / p"
    return res


def check_rho_divisor_bound(r: dict) -> CriterionResult:
    res = CriterionResult("rho_divisor_bound")
    reference = 0.0
    for p in _odd_primes(r["rho_p"]):
        ctx = prime_context(p)
        for d in (d for d in (1, 2, 3, 4) if ctx.n % d == 0):
            for a in sorted({1, 2, 3, p - 1}):
                if a >= p:
                    continue
                try:
                    out = expsum.rho(ctx, d, a)
                except IdentityViolation:
                    res.record(False)
                    continue
                res.record(True, out.magnitude / out.extras["divisor_bound"])
                if p >= 100:
                    reference = max(reference, out.ratio)
    res.detail = f"p < {r['rho_p']}; max |rho| / (sqrt(p) log^3 p) for p >= 100: {reference:.6g}"
    return res


def check_census_oracle(r: dict, workers: int = 1) -> CriterionResult:
    res = CriterionResult("census_oracle")
    for texts in CENSUS_SPECS:
        specs = _specs(texts)
        for x in r["census_x"]:
            report = count_simultaneous(CensusQuery(x=x, specs=specs), workers=workers)
            res.record(report.matching_primes == _oracle_census(x, specs))
    res.detail = f"x in {tuple(r['census_x'])} for {len(CENSUS_SPECS)} spec tuples"
    return res


def check_corollary_positivity(r: dict, workers: int = 1) -> CriterionResult:
    res = CriterionResult("corollary_positivity")
    ratios = []
    for u in (3, 5, 7):
        for x in r["corollary_x"]:
            report = count_simultaneous(CensusQuery(x=x, specs=(OrderSpec(u, 1), OrderSpec(2, 2))), workers=workers)
            res.record(report.matching_primes > 0)
            ratios.append(report.matching_primes / lower_bound(x, 2, 0.0))
    res.detail = f"R > 0; R / (x / (log x (log log x)^2)) in [{min(ratios):.6g}, {max(ratios):.6g}]"
    return res


def check_decomposition(r: dict, workers: int = 1) -> CriterionResult:
    res = CriterionResult("decomposition_audit")
    for x in r["audit_x"]:
        audit = decomposition_audit(CensusQuery(x=x, specs=_specs(("3:1", "2:2"))), workers=workers)
        res.record(audit.identity_holds)
        res.record(audit.vanishing_failures == 0)
    u, v = _specs(("3:1", "2:2"))
    for p in (11, 13, 31, 101):
        ctx = prime_context(p)
        exact = decompose_terms(u, v, ctx)
        approx = decompose_terms_numeric(u, v, ctx)
        gap = max(abs(float(getattr(exact, f)) - getattr(approx, f)) for f in ("main", "e1", "e2", "e3"))
        res.record(gap <= CLOSED_FORM_TOL, gap)
    res.detail = f"sum of blocks = R exactly, vanishing sweeps and float cross-check, x in {tuple(r['audit_x'])}"
    return res


def check_main_term(r: dict, workers: int = 1) -> CriterionResult:
    res = CriterionResult("main_term_oracle")
    hand = Fraction(16, 121) + Fraction(16, 169) + Fraction(64, 289) + Fraction(36, 361)
    gap = abs(main_term(10, 1, 1, workers=workers) - float(hand))
    res.record(gap <= 1e-12, gap)
    x = r["main_x"]
    oracle = math.fsum(int(totient(p - 1)) ** 2 / p**2 for p in primerange(x, 2 * x + 1))
    gap = abs(main_term(x, 1, 1, workers=workers) - oracle)
    res.record(gap <= 1e-9, gap)
    res.detail = f"x = 10 hand value and x = {x} summation oracle"
    return res


def check_probability_chain(r: dict) -> CriterionResult:
    res = CriterionResult("probability_chain")
    for p in _odd_primes(r["chain_p"]):
        try:
            report = equal_order_probability_exact(p)
        except IdentityViolation:
            res.record(False)
            continue
        res.record(True)
        if p < 200:
            res.record(equal_order_probability_pairs(p) == report.alpha_exact)
    worst = 0.0
    for p in (7, 101):
        report = equal_order_probability_sampled(p, r["trials"], SAMPLER_SEED)
        sampled, ref = report.sampled, float(report.alpha_coprime)
        z = abs(sampled.estimate - ref) / sampled.sigma(ref)
        worst = max(worst, z)
        res.record(z <= 4.0)
    res.detail = f"chain for p < {r['chain_p']}; sampler worst z-score {worst:.4g} at {r['trials']} trials"
    return res


def check_avg_order(r: dict, workers: int = 1) -> CriterionResult:
    res = CriterionResult("avg_order_oracle")
    res.record(avg_order(10, 2, workers=workers).order_sum == 15)
    x = r["avg_x"]
    small = {}
    for u in (2, 3, 5):
        oracle = sum(int(n_order(u, n)) for n in range(2, x + 1) if math.gcd(u, n) == 1)
        report = avg_order(x, u, workers=workers)
        res.record(report.order_sum == oracle)
        small[u] = report.T
    for u in (2, 3):
        res.record(avg_order(10 * x, u, workers=workers).T > small[u])
    res.detail = f"T_2(10) = 1.5; oracle at x = {x}; growth to x = {10 * x}"
    return res


def check_determinism(r: dict) -> CriterionResult:
    res = CriterionResult("determinism")
    x = r["determinism_x"]
    query = CensusQuery(x=x, specs=_specs(("3:1", "2:2")))
    prints = []
    for workers in (1, 4):
        report = count_simultaneous(query, workers=workers)
        frame = build_frame([report.as_row()], CENSUS_COLUMNS)
        census_check = check_census_oracle({"census_x": (100,)}, workers=workers)
        verify_frame = build_frame([census_check.as_row()], VERIFY_COLUMNS)
        prints.append((fingerprint_report(frame), fingerprint_report(verify_frame)))
    res.record(prints[0] == prints[1])
    res.detail = f"census x = {x} and census oracle rows hash equal at workers 1 and 4"
    return res


CRITERIA: List[Tuple[str, Callable[..., CriterionResult], bool]] = [
    ("indicator_equivalence", check_indicator_equivalence, False),
    ("element_counts", check_element_counts, False),
    ("kernel_closed_form", check_kernel_closed_form, False),
    ("mobius_agreement", check_mobius_agreement, False),
    ("quadratic_gauss", check_quadratic_gauss, False),
    ("double_sum_collapse", check_double_sum, False),
    ("rho_divisor_bound", check_rho_divisor_bound, False),
    ("census_oracle", check_census_oracle, True),
    ("corollary_positivity", check_corollary_positivity, True),
    ("decomposition_audit", check_decomposition, True),
    ("main_term_oracle", check_main_term, True),
    ("probability_chain", check_probability_chain, False),
    ("avg_order_oracle", check_avg_order, True),
    ("determinism", check_determinism, False),
]


def verify_suite(level: str = "quick", workers: int = 1) -> List[CriterionResult]:
    """Run every acceptance criterion at the given level; one result per criterion."""
    if level not in LEVELS:
        raise ValueError(f"--level must be one of {LEVELS}, got {level!r}")
    ranges = RANGES[level]
    results = []
    for name, check, takes_workers in CRITERIA:
        started = time.perf_counter()
        try:
            result = check(ranges, workers=workers) if takes_workers else check(ranges)
        except IdentityViolation as exc:
            result = CriterionResult(name, passed=False, checks=1, failures=1, detail=str(exc))
        logger.info("%s: %s in %.1fs", name, "pass" if result.passed else "FAIL", time.perf_counter() - started)
        results.append(result)
    return results
