import csv
import io
import math

import numpy as np
import pytest
from scipy import integrate

from tiltwire.elements import (
    M_BOUND,
    N_BOUND,
    element_table,
    m_closed,
    m_oracle,
    n_closed,
    n_oracle,
    t1_column,
    t1_element,
    t1_squared_element,
    t2_element,
    t2_terms,
)
from tiltwire.quadrature import q_poly
from tiltwire.sine_integrals import sine4_poly
from tiltwire.spectral import classify_modes, tau

PI = math.pi


def test_m_closed_examples():
    assert m_closed(1, 2).value == pytest.approx(-(PI / 4) * 5 / 9, abs=1e-15)
    assert m_closed(1, 2).value == pytest.approx(-0.436332, abs=1e-6)
    assert m_closed(3, 2).value == pytest.approx(-0.408407, abs=1e-6)
    diag = m_closed(2, 2)
    assert not diag.verified
    assert abs(diag.value) > M_BOUND


def test_n_closed_examples():
    assert n_closed(1, 2).value == pytest.approx(-32 / 81, abs=1e-15)
    assert n_closed(2, 4).value == 0.0
    diag = n_closed(3, 3)
    assert not diag.verified
    assert diag.value == pytest.approx(PI**4 / 12 - PI**2 / 36, abs=1e-14)


def test_closed_forms_reject_bad_indices():
    with pytest.raises(ValueError):
        m_closed(0, 1)
    with pytest.raises(ValueError):
        n_closed(1, 0)


def _dblquad_kink(m, k, n):
    def f(y, x):
        return abs(x - y) ** m * math.sin(k * x) * math.sin(n * x) * math.sin(k * y) * math.sin(n * y)

    lo, _ = integrate.dblquad(f, 0, PI, 0, lambda x: x, epsabs=1e-12, epsrel=1e-12)
    hi, _ = integrate.dblquad(f, 0, PI, lambda x: x, PI, epsabs=1e-12, epsrel=1e-12)
    return lo + hi


def test_m_oracle_diagonal_against_adaptive_quadrature():
    v = m_oracle(2, 2)
    assert -M_BOUND < v < M_BOUND
    assert v == pytest.approx(_dblquad_kink(1, 2, 2), abs=1e-9)


def test_n_oracle_examples():
    assert abs(n_oracle(1, 3)) < 1e-9
    # the quadrature value is four times the printed one; see the discrepancy report
    assert n_oracle(1, 2) == pytest.approx(-128 / 81, abs=1e-10)
    assert n_oracle(1, 2) == pytest.approx(_dblquad_kink(2, 1, 2), abs=1e-9)
    assert abs(n_oracle(1, 2) - n_closed(1, 2).value) > 1.0


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_n_oracle_diagonal_within_bound(n):
    v = n_oracle(n, n)
    assert 0 < v < N_BOUND
    assert v == pytest.approx(PI**4 / 24 - PI**2 / (4 * n * n), abs=1e-10)


def test_m_formula_holds_for_every_off_diagonal_pair():
    # no parity split for M: the off-diagonal form holds for even |k-n| as well
    for k in range(1, 9):
        for n in range(1, 9):
            if k != n:
                expected = -(PI / 2) * (n * n + k * k) / (n * n - k * k) ** 2
                assert abs(m_oracle(k, n) - expected) < 1e-9


def test_tables_symmetric_and_parity():
    for kind in ("M", "N"):
        table = element_table(kind, 8)
        vals = {(r.k, r.n): r.oracle for r in table.rows}
        for (k, n), v in vals.items():
            assert abs(v - vals[(n, k)]) < 1e-12
            if kind == "N" and k != n and (k - n) % 2 == 0:
                assert abs(v) < 1e-9


def test_discrepancy_report_lists_failing_pairs():
    table = element_table("N", 6)
    flagged = {(r.k, r.n) for r in table.discrepancies()}
    odd = {(k, n) for k in range(1, 7) for n in range(1, 7) if (k - n) % 2 == 1}
    diag = {(k, k) for k in range(1, 7)}
    assert flagged == odd | diag

    table = element_table("M", 6)
    flagged = {(r.k, r.n) for r in table.discrepancies()}
    assert flagged == {(k, n) for k in range(1, 7) for n in range(1, 7)}
    for r in table.rows:
        if r.k == r.n:
            assert "exceeds magnitude bound" in r.note(1e-6)


def test_no_silent_pass_for_off_diagonal_pairs():
    for kind in ("M", "N"):
        table = element_table(kind, 8)
        flagged = {(r.k, r.n) for r in table.discrepancies()}
        for r in table.rows:
            if r.k != r.n and abs(r.closed - r.oracle) >= 1e-6:
                assert (r.k, r.n) in flagged


def test_csv_layout():
    text = element_table("N", 2).to_csv()
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["kind", "k", "n", "closed", "oracle", "abs_diff", "note"]
    assert len(rows) == 5
    r12 = rows[2]
    assert r12[:3] == ["N", "1", "2"]
    assert float(r12[4]) == pytest.approx(-128 / 81, abs=1e-10)
    assert "mismatch" in r12[6]


def test_element_table_rejects_kind():
    with pytest.raises(ValueError):
        element_table("X", 2)


def test_t1_plain_sum_matches_direct_quadrature_sum():
    # rule order grows with the channel so every term is resolved
    direct = -sum(q_poly(1, 1, k, k, 2, order=max(128, 2 * k + 32)) for k in range(1, 201)) / PI
    assert t1_element(1, 2, 200, extrapolate=False) == pytest.approx(direct, abs=1e-10)


def test_t1_symmetric_and_bounded():
    assert t1_element(2, 1, 200) == t1_element(1, 2, 200)
    bound = np.sum(np.abs(sine4_poly(1, 1, np.arange(1, 201), np.arange(1, 201), 4))) / PI
    assert abs(t1_element(1, 4, 200)) <= bound


def test_t1_diagonal_tail_and_limit():
    # completeness of the sines makes the full channel sum of T_1 vanish;
    # the plain diagonal partial sum carries a -1/(2K) remainder
    for K in (200, 400):
        plain = t1_element(2, 2, K, extrapolate=False)
        assert plain == pytest.approx(-1 / (2 * K), rel=0.05)
    assert abs(t1_element(2, 2)) < 1e-9
    assert np.max(np.abs(t1_column(np.arange(1, 41), 3))) < 1e-9


def test_t1_rejects_small_K():
    with pytest.raises(ValueError):
        t1_element(5, 2, K=10)


def test_t2_imaginary_part_from_open_channel():
    modes = classify_modes(1.0, 2)
    v = t2_element(2, 2, modes.energy, modes)
    expected = -(1 / (2 * PI)) * math.sqrt(2.75) * n_oracle(1, 2)
    assert v.imag == pytest.approx(expected, abs=1e-10)


def test_t2_real_without_odd_open_channel():
    modes = classify_modes(5.0, 3)
    assert modes.open_channels == (1,) and modes.odd_open == ()
    v = t2_element(3, 3, modes.energy, modes)
    assert abs(v.imag) < 1e-12


def test_t2_closed_channels_contribute_real_parts():
    modes = classify_modes(1.0, 2)
    k, terms = t2_terms(2, modes.energy, modes, K=50)
    closed = k > modes.k1
    assert np.all(np.abs(terms[closed].imag) < 1e-15)
    assert np.all(np.abs(terms[~closed].real) < 1e-15)


def test_t2_bounded():
    modes = classify_modes(1.0, 3)
    z = 7.0 - 0.2j
    for j, n in [(3, 3), (1, 3), (2, 5)]:
        ks = np.arange(1, 801)
        bound = np.sum(np.abs(tau(z, ks, modes)) * np.abs(sine4_poly(2, j, ks, ks, n)))
        assert abs(t2_element(j, n, z, modes)) <= bound / (2 * PI)


def test_t1_squared_properties():
    v = t1_squared_element(2, 60, 200)
    assert v >= 0
    assert v >= (2 / PI) * t1_element(2, 2) ** 2
    assert abs(v - t1_squared_element(2, 120, 400)) < 1e-6
    with pytest.raises(ValueError):
        t1_squared_element(2, J=10)
