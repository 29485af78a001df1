import math
import warnings

import pytest

from tiltwire.elements import n_oracle, t1_element, t2_element
from tiltwire.exceptions import AdmissibilityError
from tiltwire.perturbation import (
    as_dict,
    coefficients,
    pole_expansion,
    repulsive_pole,
    s_sum,
    v_coeff,
    w_coeff,
    w_terms,
)
from tiltwire.spectral import classify_modes

PI = math.pi


def test_v_coeff_from_t1_and_real():
    v = v_coeff(1.0, 2)
    assert isinstance(v, float)
    assert v == -(1 / PI) * t1_element(2, 2)
    # T_1 has no diagonal weight once all channels are in
    assert abs(v) < 1e-9


def test_v_coeff_scaling_is_cubic():
    assert v_coeff(2.0, 3) / v_coeff(1.0, 3) == pytest.approx(8.0, rel=1e-12)


def test_v_coeff_inadmissible():
    with pytest.raises(AdmissibilityError):
        v_coeff(1.0, 1)


def test_w_imaginary_part_from_single_open_channel():
    modes = classify_modes(1.0, 2)
    w = w_coeff(1.0, 2)
    t2 = t2_element(2, 2, modes.energy, modes)
    assert w.imag == pytest.approx(-(1 / PI) * t2.imag, abs=1e-14)
    # only k = 1 contributes: -(1/pi) * (-(1/2pi) tau_1 N_{1,2})
    expected = (1 / (2 * PI**2)) * math.sqrt(2.75) * n_oracle(1, 2)
    assert w.imag == pytest.approx(expected, abs=1e-10)
    assert w.imag < 0


def test_w_imaginary_part_matches_s_sum_chain():
    # N_{k,n} = -32 k^2 n^2/(n^2-k^2)^4 on odd pairs gives Im W = -(16 alpha^3/pi^2) S_n
    for alpha, n in [(1.0, 2), (1.0, 3), (0.5, 3), (2.0, 4)]:
        w = w_coeff(alpha, n)
        assert w.imag == pytest.approx(-16 * alpha**3 / PI**2 * s_sum(alpha, n), rel=1e-9)


def test_w_terms_first_and_third_real():
    first, second, third = w_terms(1.0, 2)
    assert isinstance(first, float) and isinstance(third, float)
    assert isinstance(second, complex)


def test_w_small_alpha_scaling():
    ratio = w_coeff(0.1, 2) / w_coeff(0.05, 2)
    assert abs(ratio) == pytest.approx(8.0, rel=0.05)


def test_s_sum_examples():
    assert s_sum(1.0, 2) == pytest.approx(math.sqrt(2.75) * 4 / 81, rel=1e-14)
    assert s_sum(1.0, 2) == pytest.approx(0.081892, abs=1e-6)
    assert s_sum(1.0, 3) == pytest.approx(math.sqrt(4.75) * 36 / 625, rel=1e-14)
    assert s_sum(5.0, 3) == 0.0


@pytest.mark.parametrize("alpha, n", [(0.5, 2), (1.0, 2), (1.0, 3), (1.5, 4)])
def test_s_sum_positive_when_odd_channels_open(alpha, n):
    assert classify_modes(alpha, n).odd_open
    assert s_sum(alpha, n) > 0


def test_coefficients_record():
    c = coefficients(1.0, 2)
    assert c.gamma_rate == 2 * abs(c.W_n.imag)
    rec = c.as_record()
    assert list(rec) == ["alpha", "n", "E_n", "V_n", "Re_W_n", "Im_W_n", "S_n", "gamma_rate"]
    assert rec["E_n"] == 3.75
    d = as_dict(c)
    assert d["W_n"] == [c.W_n.real, c.W_n.imag]


def test_width_candidates_side_by_side():
    c = coefficients(1.0, 2)
    cand = c.width_candidates()
    assert cand["chain"] == c.W_n.imag
    assert cand["printed_display"] == pytest.approx(-4 * c.S_n / PI**3)
    assert cand["printed_elements"] == pytest.approx(-4 * c.S_n / PI**2)
    # the full chain is four times the printed-element version
    assert cand["chain"] == pytest.approx(4 * cand["printed_elements"], rel=1e-9)


def test_pole_expansion_examples():
    assert pole_expansion(1.0, 2, 0.0) == 3.75
    z = pole_expansion(1.0, 2, 0.02)
    assert z == pytest.approx(3.75 + 0.02 * v_coeff(1.0, 2) + 4e-4 * w_coeff(1.0, 2), abs=1e-15)
    assert z.imag < 0


def test_pole_expansion_warns_and_validates():
    with pytest.warns(UserWarning):
        pole_expansion(1.0, 2, 0.2)
    with pytest.raises(ValueError):
        pole_expansion(1.0, 2, -0.01)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        pole_expansion(1.0, 2, 0.05)


def test_repulsive_pole():
    assert repulsive_pole(-1.0, 2, 0.0) == 3.75
    assert repulsive_pole(-1.0, 2, 0.0) == pole_expansion(1.0, 2, 0.0)
    assert repulsive_pole(-1.0, 2, 0.02).imag > 0
    with pytest.raises(ValueError):
        repulsive_pole(1.0, 2, 0.02)


@pytest.mark.parametrize("n", [2, 3])
def test_attractive_repulsive_mirror(n):
    wa, wr = w_coeff(1.0, n), w_coeff(-1.0, n)
    assert wr.imag == pytest.approx(-wa.imag, rel=1e-8)
