import math
from fractions import Fraction

import pytest
from sympy import n_order, primerange, totient

from src.numtheory.errors import InadmissibleTuple
from src.numtheory.factor import factorize
from src.numtheory.modular import order_mod, prime_context
from src.sums.indicator import OrderSpec
from src.sweeps.census import (
    CensusQuery,
    count_order_relation,
    count_simultaneous,
    decomposition_audit,
    has_prescribed_order,
    lower_bound,
    main_term,
    main_term_report,
    totient_product_avg,
)


def specs(*texts):
    return tuple(OrderSpec.parse(t) for t in texts)


def oracle_count(x, pairs):
    count = 0
    for p in primerange(x, 2 * x + 1):
        if any(p % u == 0 or (p - 1) % d for u, d in pairs):
            continue
        if all(n_order(u, p) == (p - 1) // d for u, d in pairs):
            count += 1
    return count


class TestCensusQuery:
    def test_properties(self):
        q = CensusQuery(x=100, specs=specs("3:1", "2:2"))
        assert q.k == 2
        assert q.indices == (1, 2)
        assert q.spec_text == "3:1;2:2"

    def test_rejects_dependent_bases(self):
        with pytest.raises(InadmissibleTuple) as info:
            CensusQuery(x=100, specs=specs("4:1", "8:1"))
        assert info.value.witness == (3, -2)
        assert info.value.witness_product == 1

    @pytest.mark.parametrize("x", [2, 0, 10**7 + 1])
    def test_rejects_x(self, x):
        with pytest.raises(ValueError):
            CensusQuery(x=x, specs=specs("2:1"))

    def test_allow_large_lifts_cap(self):
        assert CensusQuery(x=10**8, specs=specs("2:1"), allow_large=True).x == 10**8

    def test_rejects_k_and_B(self):
        with pytest.raises(ValueError):
            CensusQuery(x=100, specs=())
        with pytest.raises(ValueError):
            CensusQuery(x=100, specs=specs("2:1"), B=-1.0)


class TestCountSimultaneous:
    def test_smallest_window(self):
        report = count_simultaneous(CensusQuery(x=4, specs=specs("3:1", "2:2")))
        assert report.matching_primes == 1
        assert report.sample_witnesses == (7,)
        assert report.prime_count_total == 2

    def test_single_base(self):
        report = count_simultaneous(CensusQuery(x=10, specs=specs("2:1")))
        assert report.matching_primes == 3
        assert report.sample_witnesses == (11, 13, 19)

    @pytest.mark.parametrize("x", [100, 1000])
    def test_matches_sympy_scan(self, x):
        report = count_simultaneous(CensusQuery(x=x, specs=specs("3:1", "2:2")))
        assert report.matching_primes == oracle_count(x, [(3, 1), (2, 2)])

    def test_rational_base(self):
        # 1/2 and 2 share their order, so pair 1/2 with 3
        report = count_simultaneous(CensusQuery(x=500, specs=specs("1/2:1", "3:2")))
        assert report.matching_primes == oracle_count(500, [(2, 1), (3, 2)])

    def test_skipped_primes(self):
        report = count_simultaneous(CensusQuery(x=10, specs=specs("2:4")))
        # 11 and 19 have 4 not dividing p-1
        assert report.skipped_primes == 2

    def test_refinement_is_monotone(self):
        coarse = count_simultaneous(CensusQuery(x=2000, specs=specs("3:1")))
        fine = count_simultaneous(CensusQuery(x=2000, specs=specs("3:1", "2:2")))
        assert fine.matching_primes <= coarse.matching_primes

    def test_worker_count_does_not_change_report(self):
        q = CensusQuery(x=10_000, specs=specs("3:1", "2:2"))
        serial = count_simultaneous(q, workers=1)
        parallel = count_simultaneous(q, workers=2)
        assert serial.as_row() == parallel.as_row()
        assert serial.sample_witnesses == parallel.sample_witnesses

    def test_report_fields(self):
        report = count_simultaneous(CensusQuery(x=1000, specs=specs("3:1", "2:2")))
        row = report.as_row()
        assert row["two_x"] == 2000
        assert row["lower_bound"] == pytest.approx(lower_bound(1000, 2, 0.0))
        assert row["ratio"] == pytest.approx(report.matching_primes / row["lower_bound"])
        assert report.index_lcm == 2
        assert report.index_product == 2

    def test_lower_bound_formula(self):
        lx = math.log(1000)
        assert lower_bound(1000, 2, 0.5) == pytest.approx(1000 / (lx**3 * math.log(lx) ** 2))


class TestPrescribedOrder:
    def test_matches_order(self):
        for p in primerange(3, 200):
            fi = factorize(p - 1)
            ctx = prime_context(p)
            for u in range(2, p):
                ord_u = order_mod(u, ctx)
                for d in (1, 2, 3, 4, 6):
                    expected = (p - 1) % d == 0 and ord_u == (p - 1) // d
                    assert has_prescribed_order(u, d, p, fi) == expected


class TestMainTerm:
    def test_hand_value(self):
        hand = Fraction(16, 121) + Fraction(16, 169) + Fraction(64, 289) + Fraction(36, 361)
        report = main_term_report(10, 1, 1)
        assert report.exact == hand
        assert report.primes == 4
        assert main_term(10, 1, 1) == pytest.approx(float(hand), abs=1e-12)

    def test_index_two(self):
        hand = Fraction(16, 121) + Fraction(4, 169) + Fraction(16, 289) + Fraction(36, 361)
        assert main_term_report(10, 2, 2).exact == hand

    def test_empty_progression(self):
        report = main_term_report(3, 7, 11)
        assert report.lcm == 77
        assert report.primes == 0
        assert report.M == 0.0

    def test_matches_totient_oracle(self):
        oracle = math.fsum(int(totient(p - 1)) ** 2 / p**2 for p in primerange(1000, 2001))
        assert main_term(1000, 1, 1) == pytest.approx(oracle, abs=1e-9)

    def test_row_records_lcm_and_product(self):
        row = main_term_report(100, 2, 3).as_row()
        assert row["lcm"] == 6
        assert row["de"] == 6


class TestDecompositionAudit:
    @pytest.mark.parametrize("x", [100, 1000])
    def test_identity(self, x):
        audit = decomposition_audit(CensusQuery(x=x, specs=specs("3:1", "2:2")))
        assert audit.identity_holds
        assert audit.vanishing_failures == 0
        assert audit.vanishing_checks > 0
        assert audit.passed
        assert audit.R == oracle_count(x, [(3, 1), (2, 2)])

    @pytest.mark.parametrize("workers", [2, 3])
    def test_workers_do_not_change_totals(self, workers):
        query = CensusQuery(x=300, specs=specs("3:1", "2:2"))
        serial = decomposition_audit(query)
        pooled = decomposition_audit(query, workers=workers)
        assert (pooled.R, pooled.primes_audited, pooled.vanishing_checks) == (serial.R, serial.primes_audited, serial.vanishing_checks)
        assert (pooled.main, pooled.e1, pooled.e2, pooled.e3) == (serial.main, serial.e1, serial.e2, serial.e3)
        assert pooled.passed

    def test_empty_census(self):
        audit = decomposition_audit(CensusQuery(x=3, specs=specs("3:1", "2:2")))
        assert audit.R == 0
        assert audit.total == 0

    def test_requires_pair(self):
        with pytest.raises(ValueError):
            decomposition_audit(CensusQuery(x=100, specs=specs("2:1")))


class TestTotientAverage:
    def test_matches_oracle(self):
        report = totient_product_avg(1000, 1, 1, (1,))
        oracle = math.fsum(int(totient(p - 1)) / (p - 1) for p in primerange(1000, 2001))
        assert report.S == pytest.approx(oracle, abs=1e-12)
        assert report.A_hat == pytest.approx(oracle * math.log(1000) / 1000)
        assert report.label == "conjecture probe"

    def test_empty_progression(self):
        report = totient_product_avg(3, 10, 9, (1,))
        assert report.primes == 0
        assert report.S == 0.0

    def test_non_dividing_index_contributes_zero(self):
        # p = 3 mod 4 never has 4 | p-1
        report = totient_product_avg(100, 4, 3, (4,))
        assert report.primes > 0
        assert report.S == 0.0

    def test_rejects_non_coprime_residue(self):
        with pytest.raises(ValueError):
            totient_product_avg(100, 4, 2, (1,))


class TestOrderRelation:
    @pytest.mark.parametrize("relation", ["equal", "decreasing"])
    def test_matches_brute_force(self, relation):
        report = count_order_relation(300, (2, 3), relation)
        expected = 0
        for p in primerange(300, 601):
            a, b = n_order(2, p), n_order(3, p)
            expected += (a == b) if relation == "equal" else (a > b)
        assert report.matching == expected
        assert report.skipped == 0

    def test_histogram_sums_to_matching(self):
        report = count_order_relation(1000, (2, 3), "equal")
        assert sum(report.index_histogram.values()) == report.matching
        assert report.as_row()["relation"] == "equal"

    def test_rejects(self):
        with pytest.raises(ValueError):
            count_order_relation(100, (2,), "equal")
        with pytest.raises(ValueError):
            count_order_relation(100, (2, 3), "sideways")
        with pytest.raises(InadmissibleTuple):
            count_order_relation(100, (2, 4), "equal")
