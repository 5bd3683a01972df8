# src/cli/main.py
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

from src.numtheory.admissible import is_admissible
from src.numtheory.constants import (
    ADMISSIBLE_COLUMNS,
    AUDIT_COLUMNS,
    AVG_ORDER_COLUMNS,
    CENSUS_COLUMNS,
    EXPSUM_COLUMNS,
    INDICATOR_COLUMNS,
    MAIN_TERM_COLUMNS,
    ORDER_COLUMNS,
    PRIMITIVE_ROOT_COLUMNS,
    RELATION_COLUMNS,
    STATS_COLUMNS,
    TOTIENT_AVG_COLUMNS,
    VERIFY_COLUMNS,
)
from src.numtheory.errors import DlogFailure, IdentityViolation, NotInvertible
from src.numtheory.factor import divisors
from src.numtheory.modular import Base, RationalBase, index_mod, order_mod, prime_context
from src.numtheory.parallel import resolve_workers
from src.sums import expsum
from src.sums.indicator import (
    OrderSpec,
    indicator_direct,
    psi_divisor,
    psi_divisor_all,
    psi_free_d,
    psi_free_d_all,
)
from src.sweeps.census import (
    RELATIONS,
    CensusQuery,
    count_order_relation,
    count_simultaneous,
    decomposition_audit,
    main_term_report,
    totient_product_avg,
)
from src.sweeps.reports import FORMATS, ReportFrame, build_frame, write_report
from src.sweeps.stats import avg_order, equal_order_probability_exact, equal_order_probability_sampled
from .verify import verify_suite

logger = logging.getLogger(__name__)

COMMANDS = (
    "order", "primitive-root", "admissible", "indicator", "expsum", "census",
    "mainterm", "audit", "stats", "avg-order", "relation", "totient-avg", "verify",
)
EXPSUM_KINDS = (
    "kernel", "coprime-kernel", "gauss", "weil", "power", "incomplete",
    "rho", "rho-diff", "periodic", "coprime-periodic", "double",
)


@dataclass(frozen=True)
class RunConfig:
    command: str
    format: str = "csv"
    output: Optional[str] = None
    worker_count: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ValueError(f"command must be one of {COMMANDS}, got {self.command!r}")
        if self.format not in FORMATS:
            raise ValueError(f"--format must be one of {FORMATS}, got {self.format!r}")
        if self.worker_count < 1:
            raise ValueError(f"--workers must be >= 1, got {self.worker_count}")

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        return cls(
            command=ns.command,
            format=ns.format,
            output=ns.output,
            worker_count=resolve_workers(ns.workers),
            seed=ns.seed,
        )


@dataclass(frozen=True)
class Outcome:
    report: ReportFrame
    ok: bool = True


# -------------------------
# Argument parsing
# -------------------------
def parse_base(text: str) -> Base:
    """Integers stay plain residues; num/den becomes a RationalBase."""
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected an integer or num/den, got {text!r}") from None
    if value.denominator == 1:
        return value.numerator
    return RationalBase(value.numerator, value.denominator)


def parse_spec(text: str) -> OrderSpec:
    try:
        return OrderSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="csv")
    common.add_argument("--output", default=None, help="file path; stdout when omitted")
    common.add_argument("--workers", type=int, default=None, help="worker count (env ORDLAB_THREADS, default 1)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])

    parser = argparse.ArgumentParser(prog="ordlab", description="Prescribed multiplicative orders: sums, censuses and checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("order", parents=[common], help="ord_p(u) and its index")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--u", type=parse_base, required=True)

    p = sub.add_parser("primitive-root", parents=[common], help="canonical primitive root and auxiliary prime")
    p.add_argument("--p", type=int, required=True)

    p = sub.add_parser("admissible", parents=[common], help="multiplicative independence of bases")
    p.add_argument("--u", type=parse_base, action="append", required=True)

    p = sub.add_parser("indicator", parents=[common], help="compare the three order indicators")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--u", type=parse_base, default=None, help="one base; every u in [1, p-1] when omitted")
    p.add_argument("--d", type=int, default=None, help="one index; every d | p-1 when omitted")

    p = sub.add_parser("expsum", parents=[common], help="evaluate one exponential sum against its bound")
    p.add_argument("kind", choices=EXPSUM_KINDS)
    for flag in ("--p", "--t", "--d", "--a", "--x", "--m", "--w", "--P"):
        p.add_argument(flag, type=int, default=None)
    p.add_argument("--u", type=parse_base, default=None)

    p = sub.add_parser("census", parents=[common], help="R(x) for simultaneous prescribed orders")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--spec", type=parse_spec, action="append", required=True, help="u:d, repeat for a k-tuple")
    p.add_argument("--B", type=float, default=0.0)
    p.add_argument("--allow-large", action="store_true")

    p = sub.add_parser("mainterm", parents=[common], help="main term over p = 1 mod lcm(d, e)")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--e", type=int, required=True)

    p = sub.add_parser("audit", parents=[common], help="exact R = M + E1 + E2 + E3 check")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--spec", type=parse_spec, action="append", default=None, help="u:d, give twice; or use --u --d --v --e")
    p.add_argument("--u", type=parse_base, default=None)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--v", type=parse_base, default=None)
    p.add_argument("--e", type=int, default=1)

    p = sub.add_parser("stats", parents=[common], help="equal-order probability")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--k", type=int, default=None, help="tuple size for the exact probability (default 2)")
    p.add_argument("--trials", type=int, default=None, help="run the sampler with this many pairs")

    p = sub.add_parser("avg-order", parents=[common], help="average multiplicative order T_u(x)")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--u", type=parse_base, required=True)

    p = sub.add_parser("relation", parents=[common], help="primes with equal or decreasing orders")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--u", type=parse_base, action="append", required=True)
    p.add_argument("--relation", choices=RELATIONS, default="equal")

    p = sub.add_parser("totient-avg", parents=[common], help="progression constant probe")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--a", type=int, default=1)
    p.add_argument("--d", type=int, action="append", required=True)

    p = sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    p.add_argument("--level", choices=["quick", "full"], default="quick")
    return parser


def _need(ns: argparse.Namespace, name: str, domain: str):
    value = getattr(ns, name)
    if value is None:
        raise ValueError(f"--{name} is required for expsum {ns.kind}; expected {domain}")
    return value


# -------------------------
# Commands
# -------------------------
def cmd_order(ns: argparse.Namespace, cfg: RunConfig) -> Outcome:
    ctx = prime_context(ns.p)
    row = {"p": ns.p, "u": str(ns.u), "ord": order_mod(ns.u, ctx), "index": index_mod(ns.u, ctx)}
    return Outcome(build_frame([row], ORDER_COLUMNS))


def cmd_primitive_root(ns: argparse.Namespace, cfg: RunConfig) -> Outcome:
    ctx = prime_context(ns.p)
    factors = "*".join(f"{q}^{e}" for q, e in ctx.p_minus_one.factors)
    row = {"p": ctx.p, "tau": ctx.tau, "q": ctx.q, "p_minus_one": factors}
    return Outcome(build_frame([row], PRIMITIVE_ROOT_COLUMNS))


def cmd_admissible(ns: argparse.Namespace, cfg: RunConfig) -> Outcome:
    res = is_admissible(ns.u)
    row = {
        "bases": ";".join(str(b) for b in res.bases),
        "admissible": res.admissible,
        "witness": ";".join(str(e) for e in res.witness) if res.witness else "",
        "witness_product": res.witness_product,
    }
    return Outcome(build_frame([row], ADMISSIBLE_COLUMNS, bool_columns=["admissible"]))


def cmd_indicator(ns: argparse.Namespace, cfg: RunConfig) -> Outcome:
    ctx = prime_context(ns.p)
    ds = [ns.d] if ns.d is not None else list(divisors(ctx.p_minus_one))
    rows: List[Dict[str, object]] = []
    if ns.u is not None:
        for d in ds:
            spec = OrderSpec(ns.u, d)
            free = psi_free_d(spec, ctx)
            div = psi_divisor(ns.u, ctx) if d == 1 else None
            rows.append(_indicator_row(ctx.p, str(ns.u), d, indicator_direct(spec, ctx), free, div))
    else:
        div_rows = list(psi_divisor_all(ctx).itertuples(index=False)) if 1 in ds else []
        for d in ds:
            for i, free in enumerate(psi_free_d_all(d, ctx).itertuples(index=False)):
                div = div_rows[i] if d == 1 else None
                direct = indicator_direct(OrderSpec(free.u, d), ctx)
                rows.append(_indicator_row(ctx.p, str(free.u), d, direct, free, div))
    mismatches = sum(
        1 for r in rows
        if r["psi_free_d_rounded"] != r["direct"]
        or (r["psi_divisor_rounded"] is not None and r["psi_divisor_rounded"] != r["direct"])
    )
    if mismatches:
        logger.error("p=%d: %d indicator rows disagree with the direct order test", ctx.p, mismatches)
    return Outcome(build_frame(rows, INDICATOR_COLUMNS), ok=mismatches == 0)


def _indicator_row(p: int, u: str, d: int, direct: int, free, div) -> Dict[str, object]:
    return {
        "p": p, "u": u, "d": d, "direct": direct,
        "psi_free_d": float(free.value),
        "psi_free_d_rounded": int(free.rounded),
        "psi_free_d_residual": float(free.residual),
        "psi_divisor": float(div.value) if div is not None else None,
        "psi_divisor_rounded": int(div.rounded) if div is not None else None,
        "psi_divisor_residual": float(div.residual) if div is not None else None,
    }


def expsum_row(res: expsum.ExpSumResult) -> Dict[str, object]:
    return {
        "kind": res.kind,
        "params": ";".join(f"{k}={v}" for k, v in res.params.items()),
        "re": res.value.real,
        "im": res.value.imag,
        "magnitude": res.magnitude,
        "bound": res.bound,
        "ratio": res.ratio,
        "term_count": res.term_count,
    }


def cmd_expsum(ns: argparse.Namespace, cfg: RunConfig) -> Outcome:
    kind = ns.kind
    if kind in ("periodic", "coprime-periodic"):
        elem = expsum.PeriodicElement.build(_need(ns, "m", "an integer >= 2"), _need(ns, "w", "a unit mod m"), ns.P)
        a = _need(ns, "a", "an integer in [1, m-1]")
        fn = expsum.periodic_sum if kind == "periodic" else expsum.coprime_periodic_sum
        return Outcome(build_frame([expsum_row(fn(elem, a))], EXPSUM_COLUMNS))

    ctx = prime_context(_need(ns, "p", "a prime >= 3"))
    if kind == "kernel":
        res = expsum.kernel_sum(ctx, _need(ns, "t", "an integer in [1, q-1]"))
    elif kind == "coprime-kernel":
        res = expsum.coprime_kernel_sum(ctx, _need(ns, "t", "an integer in [1, q-1]"), ns.d or 1)
    elif kind == "gauss":
        res = expsum.gauss_resolvent(ctx)
    elif kind == "weil":
        res = expsum.weil_power_sum(ctx, _need(ns, "d", "an integer >= 1"), _need(ns, "a", "an integer in [1, p-1]"))
    elif kind == "power":
        res = expsum.power_resolvent(ctx, _need(ns, "d", "a divisor of p-1"))
    elif kind == "incomplete":
        res = expsum.incomplete_sum(
            ctx, ns.d or 1, _need(ns, "a", "an integer in [1, p-1]"), _need(ns, "x", "an integer in [1, p-1]")
        )
    elif kind == "rho":
        res = expsum.rho(ctx, ns.d or 1, _need(ns, "a", "an integer in [1, p-1]"))
    elif kind == "rho-diff":
        res = expsum.rho_diff(ctx, ns.d or 1, _need(ns, "a", "an integer in [1, p-1]"))
    else:
        spec = OrderSpec(_need(ns, "u", "a base coprime to p"), ns.d or 1)
        res = expsum.double_sum(spec, ctx)
    return Outcome(build_frame([expsum_row(res)], EXPSUM_COLUMNS))


def cmd_census(ns: argparse.Namespace, cfg: RunConfig) -> Outcome:
    query = CensusQuery(x=ns.x, specs=tuple(ns.spec), B=ns.B, allow_large=ns.allow_large)
    report = count_simultaneous(query, workers=cfg.worker_count)
    return Outcome(build_frame([report.as_row()], CENSUS_COLUMNS))


def cmd_mainterm(ns: argparse.Namespace, cfg: RunConfig) -> Outcome:
    report = main_term_report(ns.x, ns.d, ns.e, workers=cfg.worker_count)
    return Outcome(build_frame([report.as_row()], MAIN_TERM_COLUMNS))


def _audit_specs(ns: argparse.Namespace) -> tuple[OrderSpec, ...]:
    if ns.spec:
        if ns.u is not None or ns.v is not None:
            raise ValueError("audit takes either --spec twice or --u/--v, not both")
        return tuple(ns.spec)
    if ns.u is None or ns.v is None:
        raise ValueError("audit needs --spec u:d twice, or --u and --v (with --d, --e defaulting to 1)")
    return (OrderSpec(ns.u, ns.d), OrderSpec(ns.v, ns.e))


def cmd_audit(ns: argparse.Namespace, cfg: RunConfig) -> Outcome:
    report = decomposition_audit(CensusQuery(x=ns.x, specs=_audit_specs(ns)), workers=cfg.worker_count)
    return Outcome(build_frame([report.as_row()], AUDIT_COLUMNS, bool_columns=["identity_holds"]), ok=report.passed)


def cmd_stats(ns: argparse.Namespace, cfg: RunConfig) -> Outcome:
    if ns.trials is None:
        report = equal_order_probability_exact(ns.p, k=2 if ns.k is None else ns.k)
    elif ns.k is not None:
        raise ValueError("--k applies to the exact probability only; the sampler draws pairs")
    else:
        report = equal_order_probability_sampled(ns.p, ns.trials, cfg.seed, workers=cfg.worker_count)
    return Outcome(build_frame([report.as_row()], STATS_COLUMNS))


def cmd_avg_order(ns: argparse.Namespace, cfg: RunConfig) -> Outcome:
    report = avg_order(ns.x, ns.u, workers=cfg.worker_count)
    return Outcome(build_frame([report.as_row()], AVG_ORDER_COLUMNS))


def cmd_relation(ns: argparse.Namespace, cfg: RunConfig) -> Outcome:
    report = count_order_relation(ns.x, ns.u, ns.relation, workers=cfg.worker_count)
    return Outcome(build_frame([report.as_row()], RELATION_COLUMNS))


def cmd_totient_avg(ns: argparse.Namespace, cfg: RunConfig) -> Outcome:
    report = totient_product_avg(ns.x, ns.q, ns.a, ns.d, workers=cfg.worker_count)
    return Outcome(build_frame([report.as_row()], TOTIENT_AVG_COLUMNS))


def cmd_verify(ns: argparse.Namespace, cfg: RunConfig) -> Outcome:
    results = verify_suite(ns.level, workers=cfg.worker_count)
    rows = [r.as_row() for r in results]
    return Outcome(build_frame(rows, VERIFY_COLUMNS, bool_columns=["passed"]), ok=all(r.passed for r in results))


HANDLERS: Dict[str, Callable[[argparse.Namespace, RunConfig], Outcome]] = {
    "order": cmd_order,
    "primitive-root": cmd_primitive_root,
    "admissible": cmd_admissible,
    "indicator": cmd_indicator,
    "expsum": cmd_expsum,
    "census": cmd_census,
    "mainterm": cmd_mainterm,
    "audit": cmd_audit,
    "stats": cmd_stats,
    "avg-order": cmd_avg_order,
    "relation": cmd_relation,
    "totient-avg": cmd_totient_avg,
    "verify": cmd_verify,
}


def run(argv: Sequence[str] | None = None) -> int:
    """Exit 0 on success, 1 when a check or identity fails, 2 on a usage error."""
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    logging.basicConfig(level=getattr(logging, ns.log_level), format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = RunConfig.from_args(ns)
        outcome = HANDLERS[cfg.command](ns, cfg)
    except IdentityViolation as exc:
        print(f"ordlab {ns.command}: identity check failed: {exc}", file=sys.stderr)
        return 1
    except (ValueError, NotInvertible, DlogFailure) as exc:
        print(f"ordlab {ns.command}: {exc}", file=sys.stderr)
        return 2

    write_report(outcome.report, cfg.format, cfg.output)
    return 0 if outcome.ok else 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
