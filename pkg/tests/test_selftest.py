import pytest

from errors import ConfigurationError
from selftest import run_selftest


def test_selftest_passes():
    results = run_selftest()
    assert [c.name for c in results] == [
        "root_of_unity", "mersenne_catalog", "ntt_vs_dft",
        "mul_ntt_vs_schoolbook", "pipeline_oracle", "universality_gamma5",
    ]
    assert all(c.passed for c in results), [c for c in results if not c.passed]


def test_selftest_is_deterministic():
    first = [(c.name, c.passed, c.detail) for c in run_selftest()]
    assert first == [(c.name, c.passed, c.detail) for c in run_selftest()]


def test_injected_fault_is_caught():
    results = {c.name: c for c in run_selftest(inject_fault=True)}
    assert not results["ntt_vs_dft"].passed
    assert not results["mul_ntt_vs_schoolbook"].passed
    assert results["root_of_unity"].passed


@pytest.mark.parametrize("radix", [2, 4, 16])
def test_selftest_single_radix(radix):
    results = run_selftest(radix=radix)
    assert all(c.passed for c in results), [c for c in results if not c.passed]


@pytest.mark.parametrize("radix", [2, 4])
def test_injected_fault_is_caught_at_any_radix(radix):
    results = {c.name: c for c in run_selftest(inject_fault=True, radix=radix)}
    assert not results["ntt_vs_dft"].passed
    assert not results["mul_ntt_vs_schoolbook"].passed
    assert results["pipeline_oracle"].passed


def test_selftest_rejects_unknown_radix():
    with pytest.raises(ConfigurationError):
        run_selftest(radix=8)
