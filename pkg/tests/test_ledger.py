import pytest
from hypothesis import given
from hypothesis import strategies as st

from medianlab.ledger import Affine, ConstantLedger


def sample():
    return ConstantLedger(1, 0, {3: 1, 4: 2, 5: 1})


def test_sample_values():
    led = sample()
    assert (led.kappa0, led.kappa4, led.kappa5) == (8, 8, 5)
    assert led.rho_n(2) == Affine(2, 0)
    assert led.C_n(1) == 5 and led.C_n(2) == 10
    assert led.D_n(1) == 0 and led.D_n(2) == 20
    assert led.log_bound == (4, -3)
    assert led.zeta_prime(1) == 5


def test_missing_h_raises():
    with pytest.raises(KeyError):
        ConstantLedger(1, 0).kappa4


def test_h_n_recursion():
    led = ConstantLedger(2, 1, {})
    assert led.H_n(1)(7) == 0
    assert led.H_n(2)(7) == 7
    assert led.H_n(3)(7) == led.rho(7) + 7
    assert led.H_n(4)(7) == led.rho(led.rho(7) + 7) + 7


@given(st.integers(0, 5), st.integers(0, 5), st.integers(1, 4), st.integers(0, 10))
def test_rho_n_matches_direct_recursion(K, H0, n, t):
    led = ConstantLedger(K, H0)
    value = t
    for _ in range(n - 1):
        value = led.rho(value + t)
    assert led.rho_n(n)(t) == value


def test_json_keys():
    out = sample().to_json()
    assert out["kappa0"] == 8 and out["C_n"]["2"] == 10 and out["D_n"]["2"] == 20
    assert out["rho_n"]["2"] == {"slope": 2, "offset": 0}
    assert "kappa5" not in ConstantLedger(1, 0, {4: 1}).to_json()
