"""Tests for the number-theoretic substrate and the safe-prime cache."""

import random
from fractions import Fraction
from pathlib import Path

import pytest
from sympy import isprime

from mcp_cfrit_crunchtools import modmath
from mcp_cfrit_crunchtools.config import get_config
from mcp_cfrit_crunchtools.errors import (
    ConfigurationError,
    DomainError,
    SafePrimeNotFoundError,
    ValidationError,
)
from mcp_cfrit_crunchtools.modmath import (
    SafePrimePair,
    is_prime,
    largest_safe_q,
    legendre,
    minimal_residue,
    mod_pow,
    round_pos,
)
from mcp_cfrit_crunchtools.primecache import get_prime_cache


class TestMinimalResidue:
    """Tests for the smallest-magnitude residue."""

    @pytest.mark.parametrize(
        ("a", "m", "expected"),
        [(3, 7, 3), (5, 7, -2), (-1, 7, -1), (0, 7, 0), (14, 7, 0), (22, 23, -1)],
    )
    def test_examples(self, a: int, m: int, expected: int) -> None:
        assert minimal_residue(a, m) == expected

    def test_bad_modulus(self) -> None:
        with pytest.raises(DomainError):
            minimal_residue(3, 0)


class TestLegendre:
    """Tests for the Euler-criterion Legendre symbol."""

    @pytest.mark.parametrize(
        ("z", "p", "expected"),
        [(2, 7, 1), (3, 7, -1), (1, 3, 1), (2, 3, -1), (4, 3, 1), (8, 3, -1), (2, 23, 1)],
    )
    def test_examples(self, z: int, p: int, expected: int) -> None:
        assert legendre(z, p) == expected

    def test_powers_of_two_mod_three_alternate(self) -> None:
        for m in range(12):
            assert legendre(2**m, 3) == (-1) ** m

    @pytest.mark.parametrize("p", [23, 59])
    def test_completely_multiplicative(self, p: int) -> None:
        source = random.Random(p)
        for _ in range(500):
            a, b = source.randrange(1, p), source.randrange(1, p)
            assert legendre(a * b, p) == legendre(a, p) * legendre(b, p)

    def test_zero_raises(self) -> None:
        with pytest.raises(DomainError):
            legendre(14, 7)

    def test_even_modulus_raises(self) -> None:
        with pytest.raises(DomainError):
            legendre(3, 8)


class TestRoundPos:
    """Tests for rounding to the nearest positive integer."""

    @pytest.mark.parametrize(
        ("sigma", "expected"),
        [(0, 1), (0.49, 1), (0.5, 1), (1.49, 1), (1.5, 2), (2.4999, 2), (2.5, 3), (1e6, 10**6)],
    )
    def test_examples(self, sigma: float, expected: int) -> None:
        assert round_pos(sigma) == expected

    def test_exact_fraction(self) -> None:
        assert round_pos(Fraction(7, 2)) == 4

    def test_never_zero(self) -> None:
        assert all(round_pos(k / 100) >= 1 for k in range(200))

    def test_negative_raises(self) -> None:
        with pytest.raises(DomainError):
            round_pos(-0.1)


class TestModPow:
    def test_matches_builtin(self) -> None:
        assert mod_pow(4, 11, 23) == pow(4, 11, 23) == 1

    def test_rejects_small_modulus(self) -> None:
        with pytest.raises(DomainError):
            mod_pow(2, 3, 1)


class TestIsPrime:
    """Miller-Rabin against sympy."""

    def test_small_range_matches_sympy(self) -> None:
        for n in range(-5, 3000):
            assert is_prime(n) == isprime(n), n

    @pytest.mark.parametrize(
        "n",
        [
            2**61 - 1,
            2**64 - 59,
            2**89 - 1,
            2**67 - 1,
            3215031751,
            561,
            (2**127 - 1) * (2**61 - 1),
        ],
    )
    def test_large_values_match_sympy(self, n: int) -> None:
        assert is_prime(n) == isprime(n)

    def test_rounds_must_be_positive(self) -> None:
        with pytest.raises(ValidationError):
            is_prime(7, rounds=0)


def _largest_safe_q_oracle(kappa: int) -> int:
    for q in range((1 << kappa) - 1, (1 << (kappa - 1)) - 1, -1):
        if isprime(q) and isprime(2 * q + 1):
            return q
    raise AssertionError("no safe prime")


class TestLargestSafeQ:
    """Tests for the safe-prime search."""

    def test_kappa_three(self) -> None:
        assert largest_safe_q(3) == SafePrimePair(q=5, p=11, kappa=3)

    def test_kappa_four(self) -> None:
        pair = largest_safe_q(4)
        assert (pair.q, pair.p) == (11, 23)

    def test_kappa_five(self) -> None:
        assert largest_safe_q(5).p == 59

    @pytest.mark.parametrize("kappa", [6, 8, 10, 12, 16, 20])
    def test_matches_brute_force(self, kappa: int) -> None:
        pair = largest_safe_q(kappa)
        assert pair.q == _largest_safe_q_oracle(kappa)
        assert pair.q.bit_length() == kappa

    def test_large_kappa_is_safe(self) -> None:
        pair = largest_safe_q(128)
        assert isprime(pair.q)
        assert isprime(pair.p)
        assert pair.q.bit_length() == 128

    def test_kappa_below_three_raises(self) -> None:
        with pytest.raises(DomainError):
            largest_safe_q(2)

    def test_not_found(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setattr(modmath, "is_prime", lambda n, rounds=40: False)
        with pytest.raises(SafePrimeNotFoundError) as exc:
            largest_safe_q(9)
        assert "9" in str(exc.value)

    def test_pair_validation(self) -> None:
        with pytest.raises(ValidationError):
            SafePrimePair(q=11, p=21, kappa=4)
        with pytest.raises(ValidationError):
            SafePrimePair(q=11, p=23, kappa=5)


class TestPrimeCache:
    """Tests for the on-disk safe-prime cache."""

    def test_result_is_stored(self) -> None:
        pair = largest_safe_q(24)
        assert get_prime_cache().lookup(24) == (pair.q, pair.p)

    def test_invalid_entry_is_discarded(self) -> None:
        expected = largest_safe_q(14)
        cache = get_prime_cache()
        cache.store(14, 8193, 16387)
        assert largest_safe_q(14) == expected
        assert cache.lookup(14) == (expected.q, expected.p)

    def test_disabled_cache(self, monkeypatch: pytest.MonkeyPatch) -> None:
        import mcp_cfrit_crunchtools.config as config_mod
        import mcp_cfrit_crunchtools.primecache as cache_mod

        monkeypatch.setenv("CFRIT_PRIME_CACHE_DIR", "off")
        config_mod._config = None
        cache_mod._cache = None
        assert largest_safe_q(5).p == 59
        assert get_prime_cache().directory is None

    def test_cache_file_holds_q_then_p(
        self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        import mcp_cfrit_crunchtools.config as config_mod
        import mcp_cfrit_crunchtools.primecache as cache_mod

        monkeypatch.setenv("CFRIT_PRIME_CACHE_DIR", str(tmp_path))
        config_mod._config = None
        cache_mod._cache = None
        pair = largest_safe_q(7)
        lines = (tmp_path / "safe_q_7.txt").read_text(encoding="ascii").split()
        assert [int(v) for v in lines] == [pair.q, pair.p]


class TestConfig:
    """Tests for environment configuration."""

    def test_threads_from_env(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("CFRIT_THREADS", "3")
        assert get_config().threads == 3

    @pytest.mark.parametrize("value", ["zero", "0", "-2"])
    def test_bad_threads(self, monkeypatch: pytest.MonkeyPatch, value: str) -> None:
        monkeypatch.setenv("CFRIT_THREADS", value)
        with pytest.raises(ConfigurationError):
            get_config()

    def test_cache_dir_must_not_be_a_file(
        self, tmp_path: Path, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        target = tmp_path / "file"
        target.write_text("x", encoding="utf-8")
        monkeypatch.setenv("CFRIT_PRIME_CACHE_DIR", str(target))
        with pytest.raises(ConfigurationError):
            get_config()

    def test_log_level_upper_cased(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("CFRIT_LOG_LEVEL", "debug")
        assert get_config().log_level == "DEBUG"
