import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cavent.core import CavityGeometry
from cavent.density import (
    DensityMatrix,
    RhoCoefficients,
    check_state,
    compute_coefficients,
    coupling_prefactor,
    purity,
    reduce,
    rho_total,
)
from cavent.errors import DomainError, InvalidStateError, PerturbativeRegimeError, PerturbativeWarning
from cavent.oracle import sample_configuration

from conftest import layer_pair, make_layer, unit_cavity


def coeffs_strategy():
    pos = st.floats(0.01, 1.0)
    return st.builds(
        RhoCoefficients,
        l1=pos,
        l2=pos,
        b1=st.floats(-0.05, 0.05),
        b2=st.floats(-0.05, 0.05),
        n_coef=st.complex_numbers(max_magnitude=0.5),
        m_coef=st.complex_numbers(max_magnitude=0.5),
    )


def test_gapless_coherences_vanish_and_population_is_half_propagator():
    l1, l2 = layer_pair(z1=0.4, z2=0.6)
    cav = unit_cavity()
    c = compute_coefficients(l1, l2, cav)
    assert c.b1 == 0.0 and c.b2 == 0.0
    assert c.l1 == pytest.approx(c.delta11 / 2, rel=1e-14)
    assert c.l2 == pytest.approx(c.delta22 / 2, rel=1e-14)
    assert c.delta12 == pytest.approx(math.sin(0.4 * math.pi) * math.sin(0.6 * math.pi) / math.pi)


def test_coupling_prefactor_si_units():
    cav = CavityGeometry(length=1e-6, z1=0.4e-6, z2=0.6e-6, mode_volume=2.0)
    e, hbar, eps0 = 1.602176634e-19, 1.054571817e-34, 8.8541878128e-12
    assert coupling_prefactor(1e6, 5e5, cav) == pytest.approx(e * e / (hbar * eps0 * 2.0) * 5e11, rel=1e-14)
    assert cav.volume == 2.0
    assert CavityGeometry(length=1e-6, z1=0.4e-6, z2=0.6e-6).volume == pytest.approx(4e-14)


def test_rho_total_at_zero_time_is_initial_state():
    c = compute_coefficients(*layer_pair(soi1=0.05, soi2=0.02), unit_cavity())
    np.testing.assert_array_equal(rho_total(c, 0.0).data, np.diag([1, 0, 0, 0]).astype(complex))


def test_rho_total_layout():
    c = RhoCoefficients(l1=0.3, l2=0.2, b1=0.01, b2=-0.02, n_coef=0.1 + 0.05j, m_coef=-0.03j)
    t = 0.5
    rho = rho_total(c, t).data
    t2 = t * t
    expected = np.array(
        [
            [1 - t2 * 0.5, t2 * -0.02, t2 * 0.01, t2 * 0.03j],
            [t2 * -0.02, t2 * 0.2, t2 * (0.1 - 0.05j), 0],
            [t2 * 0.01, t2 * (0.1 + 0.05j), t2 * 0.3, 0],
            [t2 * -0.03j, 0, 0, 0],
        ]
    )
    np.testing.assert_allclose(rho, expected, atol=1e-15)
    assert rho[3, 3] == 0
    np.testing.assert_array_equal(
        rho_total(c, t, diagonal_approximation=True).data[0, 1:3], [0, 0]
    )


@settings(max_examples=200)
@given(coeffs_strategy(), st.floats(0.0, 0.7))
def test_rho_total_hermitian_unit_trace(c, t):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PerturbativeWarning)
        rho = rho_total(c, t).data
    assert np.max(np.abs(rho - rho.conj().T)) == 0.0
    assert abs(np.trace(rho) - 1) <= 1e-12
    assert rho[3, 3] == 0
    for keep in (1, 2):
        r = reduce(rho, keep).data
        assert abs(np.trace(r) - 1) <= 1e-12
        assert np.max(np.abs(r - r.conj().T)) <= 1e-12


def test_admissibility_thresholds():
    c = RhoCoefficients(l1=1.0, l2=0.5, b1=0, b2=0, n_coef=0, m_coef=0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        rho_total(c, math.sqrt(0.49))
    with pytest.warns(PerturbativeWarning):
        rho_total(c, math.sqrt(0.6))
    with pytest.raises(PerturbativeRegimeError):
        rho_total(c, 1.0)
    with pytest.raises(DomainError):
        rho_total(c, -0.1)


def test_reduce_gives_layer_blocks_exactly():
    c = RhoCoefficients(l1=0.3, l2=0.2, b1=0.01, b2=-0.02, n_coef=0.1 + 0.05j, m_coef=-0.03j)
    t = 0.6
    rho = rho_total(c, t)
    t2 = t * t
    np.testing.assert_allclose(
        reduce(rho, 2).data, [[1 - t2 * 0.2, t2 * -0.02], [t2 * -0.02, t2 * 0.2]], atol=1e-15
    )
    np.testing.assert_allclose(
        reduce(rho, 1).data, [[1 - t2 * 0.3, t2 * 0.01], [t2 * 0.01, t2 * 0.3]], atol=1e-15
    )
    np.testing.assert_allclose(
        reduce(rho_total(c, t, diagonal_approximation=True), 2).data,
        np.diag([1 - t2 * 0.2, t2 * 0.2]),
        atol=1e-15,
    )


def test_reduce_trivial_cases():
    np.testing.assert_allclose(reduce(np.eye(4) / 4, 1).data, np.eye(2) / 2)
    np.testing.assert_allclose(reduce(np.diag([1, 0, 0, 0]), 2).data, np.diag([1, 0]))
    with pytest.raises(DomainError):
        reduce(np.eye(4) / 4, 3)
    with pytest.raises(InvalidStateError):
        reduce(np.eye(2) / 2, 1)


def test_reduce_matches_product_state():
    a = np.array([[0.7, 0.1j], [-0.1j, 0.3]])
    b = np.array([[0.4, 0.2], [0.2, 0.6]])
    prod = np.kron(a, b)
    np.testing.assert_allclose(reduce(prod, 1).data, a, atol=1e-15)
    np.testing.assert_allclose(reduce(prod, 2).data, b, atol=1e-15)


def test_relabeling_covariance(rng):
    for _ in range(20):
        cfg = sample_configuration(rng)
        swapped = CavityGeometry(
            length=cfg.cavity.length, z1=cfg.cavity.z2, z2=cfg.cavity.z1, n_max=cfg.cavity.n_max
        )
        fwd = rho_total(compute_coefficients(cfg.layer1, cfg.layer2, cfg.cavity), cfg.t)
        back = rho_total(compute_coefficients(cfg.layer2, cfg.layer1, swapped), cfg.t)
        np.testing.assert_allclose(reduce(fwd, 1).data, reduce(back, 2).data, atol=1e-12)
        np.testing.assert_allclose(reduce(fwd, 2).data, reduce(back, 1).data, atol=1e-12)


def test_purity_simple_values():
    assert purity(np.eye(2) / 2) == pytest.approx(0.5)
    c = RhoCoefficients(l1=0.3, l2=0.2, b1=0.0, b2=0.0, n_coef=0.1, m_coef=0.05)
    assert purity(rho_total(c, 0.0)) == 1.0


def test_purity_quartic_remainder_and_monotone():
    c = RhoCoefficients(l1=0.3, l2=0.2, b1=0.01, b2=0.02, n_coef=0.1 + 0.02j, m_coef=0.05)
    ts = np.geomspace(1e-3, 1e-1, 30)
    rem = [abs(purity(rho_total(c, t)) - (1 - 2 * t * t * (c.l1 + c.l2))) for t in ts]
    ratios = np.array(rem) / ts**4
    assert np.all(np.isfinite(ratios)) and ratios.max() / ratios.min() < 1.01
    # P is quadratic in t^2 and turns around near t^2 L = 1/3, so stay below it
    grid = np.linspace(0, math.sqrt(0.25 / c.max_population_rate()), 50)
    values = [purity(rho_total(c, t)) for t in grid]
    assert all(a >= b for a, b in zip(values, values[1:]))


def test_eq10_state_has_order_t4_negative_eigenvalue():
    # rho44 = 0 with rho14 != 0 forces a negative eigenvalue of order t^4 |M|^2
    c = RhoCoefficients(l1=0.3, l2=0.2, b1=0.0, b2=0.0, n_coef=0.1, m_coef=0.2)
    t = 0.1
    low = np.linalg.eigvalsh(rho_total(c, t).data).min()
    assert low < 0
    assert low == pytest.approx(-(t**4) * 0.04, rel=1e-2)


def test_density_matrix_serialization_round_trip():
    c = RhoCoefficients(l1=0.3, l2=0.2, b1=0.01, b2=0.02, n_coef=0.1 + 0.02j, m_coef=0.05j)
    rho = rho_total(c, 0.4)
    payload = json.loads(json.dumps(rho.to_dict()))
    assert payload["dim"] == 4
    assert payload["basis"][0] == "|+,+>"
    back = DensityMatrix.from_dict(payload)
    np.testing.assert_array_equal(back.data, rho.data)
    assert back.params == {"t": 0.4}


def test_density_matrix_shape_and_state_checks():
    with pytest.raises(InvalidStateError):
        DensityMatrix(np.eye(3) / 3)
    with pytest.raises(InvalidStateError):
        check_state(np.array([[1, 1], [0, 0]]))
    with pytest.raises(InvalidStateError):
        check_state(np.eye(2))


def test_valence_start_uses_excitation_basis():
    l1 = make_layer(soi=0.01, band=-1, position=0.3)
    l2 = make_layer(soi=0.02, band=-1, position=0.7)
    c = compute_coefficients(l1, l2, unit_cavity(0.3, 0.7))
    rho = rho_total(c, 0.3)
    assert rho.basis == ("|-,->", "|-,+>", "|+,->", "|+,+>")
