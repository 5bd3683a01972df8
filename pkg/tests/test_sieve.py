import numpy as np
import pytest
from sympy import primerange

from src.numtheory.sieve import (
    PrimeRange,
    next_prime_above,
    prime_array,
    primes_in_range,
    smallest_factor_table,
)


class TestPrimeRange:
    def test_small_window(self):
        assert list(primes_in_range(PrimeRange(10, 20))) == [11, 13, 17, 19]

    def test_progression(self):
        assert list(primes_in_range(PrimeRange(10, 20, modulus=4, residue=1))) == [13, 17]

    def test_includes_two(self):
        assert list(primes_in_range(PrimeRange(2, 10))) == [2, 3, 5, 7]

    def test_endpoints_are_inclusive(self):
        assert list(primes_in_range(PrimeRange(11, 13))) == [11, 13]

    def test_matches_sympy(self):
        got = prime_array(PrimeRange(2, 100_000))
        assert got.tolist() == list(primerange(2, 100_001))

    def test_offset_window_matches_sympy(self):
        got = prime_array(PrimeRange(999_000, 1_001_000))
        assert got.tolist() == list(primerange(999_000, 1_001_001))

    def test_dyadic_window_count(self):
        rng = PrimeRange.dyadic(10**6)
        assert (rng.lo, rng.hi) == (10**6, 2 * 10**6)
        assert prime_array(rng).size == 70435

    @pytest.mark.parametrize("m", [3, 4, 6, 12])
    def test_progressions_partition(self, m):
        lo, hi = 10_000, 100_000
        total = prime_array(PrimeRange(lo, hi)).size
        parts = sum(
            prime_array(PrimeRange(lo, hi, modulus=m, residue=a)).size
            for a in range(m)
            if np.gcd(a, m) == 1
        )
        assert parts == total

    def test_worker_count_does_not_change_result(self):
        rng = PrimeRange(2, 5_000_000)
        serial = prime_array(rng, workers=1)
        parallel = prime_array(rng, workers=2)
        assert np.array_equal(serial, parallel)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"lo": 1, "hi": 10},
            {"lo": 10, "hi": 10},
            {"lo": 10, "hi": 20, "modulus": 0},
            {"lo": 10, "hi": 20, "modulus": 4, "residue": 2},
            {"lo": 10, "hi": 20, "modulus": 4, "residue": 5},
            {"lo": 2, "hi": 2 + 2**35},
        ],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            PrimeRange(**kwargs)


class TestNextPrime:
    @pytest.mark.parametrize("n,expected", [(2, 3), (7, 11), (13, 17), (10**6, 1_000_003), (89, 97)])
    def test_examples(self, n, expected):
        assert next_prime_above(n) == expected

    @pytest.mark.parametrize("n", [1, 0, 2**62])
    def test_rejects(self, n):
        with pytest.raises(ValueError):
            next_prime_above(n)


class TestSmallestFactor:
    def test_values(self):
        spf = smallest_factor_table(100)
        assert spf[91] == 7
        assert spf[97] == 97
        assert spf[64] == 2
        assert spf[2] == 2
        assert spf[49] == 7

    def test_read_only(self):
        spf = smallest_factor_table(50)
        with pytest.raises(ValueError):
            spf[10] = 3
