import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cavent.core import (
    CavityGeometry,
    ElectronState,
    Material,
    band_energies,
    band_to_sublattice,
    chi_pair,
    photon_propagator,
    propagator_terms,
    sigma_band_operator,
    time_of_flight,
)
from cavent.errors import DomainError


def unit_cavity(n_max=1, z1=0.4, z2=0.6):
    return CavityGeometry(length=1.0, z1=z1, z2=z2, n_max=n_max, light_speed=1.0, normalized=True)


@pytest.mark.parametrize(
    "eps, delta, expected",
    [(1.0, 0.0, 1.0), (3.0, 4.0, 5.0), (1.0, 1.0, math.sqrt(2.0))],
)
def test_band_energies(eps, delta, expected):
    e_plus, e_minus = band_energies(eps, delta)
    assert e_plus == pytest.approx(expected, rel=1e-15)
    assert e_minus == -e_plus


@pytest.mark.parametrize("eps", [0.0, -1.0])
def test_band_energies_rejects_nonpositive_epsilon(eps):
    with pytest.raises(DomainError):
        band_energies(eps, 0.1)
    with pytest.raises(DomainError):
        chi_pair(eps, 0.1)


@pytest.mark.parametrize(
    "eps, delta, plus, minus, gap",
    [
        (1.0, 0.0, 1.0, -1.0, 2.0),
        (3.0, 4.0, 1 / 3, -3.0, 10 / 3),
        (1.0, 1.0, math.sqrt(2) - 1, -(math.sqrt(2) + 1), 2 * math.sqrt(2)),
    ],
)
def test_chi_pair_hand_values(eps, delta, plus, minus, gap):
    chi = chi_pair(eps, delta)
    assert chi.chi_plus == pytest.approx(plus, rel=1e-14)
    assert chi.chi_minus == pytest.approx(minus, rel=1e-14)
    assert chi.delta_chi == pytest.approx(gap, rel=1e-14)
    assert chi.delta_chi == chi.chi_plus - chi.chi_minus


def test_chi_pair_matches_definition_for_negative_mass():
    eps, delta = 0.7, -0.3
    e = math.hypot(eps, delta)
    chi = chi_pair(eps, delta)
    assert chi.chi_plus == pytest.approx((e - delta) / eps, rel=1e-14)
    assert chi.chi_minus == pytest.approx((-e - delta) / eps, rel=1e-14)


def chi_identity_residuals(eps, delta):
    p, m, d = chi_pair(eps, delta)
    rel = lambda a, b: abs(a - b) / max(abs(a), abs(b))
    return [
        rel(m * (1 + p * p), -p * (1 + m * m)),
        rel(p * m, -1.0),
        rel(p / m, -p * p),
        rel(m * (1 + p * p), -d),
        rel(m * m, 1 / (p * p)),
        rel(m * m, -m / p),
        rel(m * m, (1 + m * m) / (1 + p * p)),
    ]


@settings(max_examples=300)
@given(
    st.floats(1e-6, 10.0, allow_nan=False),
    st.floats(-10.0, 10.0, allow_nan=False),
)
def test_chi_identities_property(eps, delta):
    assert max(chi_identity_residuals(eps, delta)) <= 1e-12


@settings(max_examples=200)
@given(
    st.floats(1e-4, 10.0),
    st.floats(-5.0, 5.0),
    st.floats(-math.pi, math.pi),
)
def test_sigma_pair_structure(eps, delta, phi):
    chi = chi_pair(eps, delta)
    sp = sigma_band_operator(+1, chi, phi)
    sm = sigma_band_operator(-1, chi, phi)
    np.testing.assert_allclose(sm, sp.conj().T, atol=1e-14)
    np.testing.assert_allclose(sp @ sm + sm @ sp, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(sp @ sp, np.zeros((2, 2)), atol=1e-12)
    # back in the sublattice basis sigma_+ is |A><B|
    np.testing.assert_allclose(
        band_to_sublattice(sp, chi, phi), np.array([[0, 1], [0, 0]]), atol=1e-12
    )


def test_sigma_gapless_has_zero_diagonal_weight():
    chi = chi_pair(1.0, 0.0)
    sp = sigma_band_operator("+", chi, 0.0)
    # chi_-(1+chi_+^2)/dchi^2 = -1/2 sets the diagonal magnitude
    np.testing.assert_allclose(np.diag(sp), [0.5, -0.5], atol=1e-15)
    np.testing.assert_allclose(sp, 0.5 * np.array([[1, -1], [1, -1]]), atol=1e-15)
    assert np.trace(sp) == pytest.approx(0.0, abs=1e-15)


def test_sigma_rejects_bad_polarity():
    with pytest.raises(DomainError):
        sigma_band_operator(0, chi_pair(1.0, 0.0), 0.0)


def test_propagator_hand_values():
    cav = CavityGeometry(length=1.0, z1=0.5, z2=0.6, n_max=1, light_speed=1.0)
    assert photon_propagator(cav, 0.5, 0.5) == pytest.approx(1 / math.pi, rel=1e-14)
    assert photon_propagator(cav, 0.4, 0.6) == pytest.approx(
        math.sin(0.4 * math.pi) * math.sin(0.6 * math.pi) / math.pi, rel=1e-14
    )
    assert photon_propagator(cav, 0.4, 0.6) == pytest.approx(0.287914, abs=5e-7)
    assert photon_propagator(cav, 0.0, 0.3, q=2.0) == 0.0


@settings(max_examples=200)
@given(
    st.floats(0.0, 1.0),
    st.floats(0.0, 1.0),
    st.floats(0.0, 50.0),
    st.integers(1, 12),
)
def test_propagator_symmetric_and_incremental(a, b, q, n_max):
    cav = unit_cavity(n_max)
    assert photon_propagator(cav, a, b, q) == photon_propagator(cav, b, a, q)
    bigger = unit_cavity(n_max + 1)
    extra = propagator_terms(bigger, a, b, q)[-1]
    assert photon_propagator(bigger, a, b, q) == photon_propagator(cav, a, b, q) + extra


def test_propagator_decreasing_in_q_when_terms_positive():
    cav = unit_cavity(1)
    values = [photon_propagator(cav, 0.5, 0.5, q) for q in np.linspace(0, 10, 25)]
    assert all(x > y for x, y in zip(values, values[1:]))


def test_propagator_rejects_outside_positions():
    with pytest.raises(DomainError):
        photon_propagator(unit_cavity(), -0.1, 0.5)
    with pytest.raises(DomainError):
        photon_propagator(unit_cavity(), 0.5, 1.2)


def test_time_of_flight():
    cav = CavityGeometry(length=1.0, z1=0.4, z2=0.6)
    assert time_of_flight(cav) == pytest.approx(0.2 / 2.99792458e8, rel=1e-12)
    assert time_of_flight(cav) == pytest.approx(6.67e-10, rel=2e-3)
    micro = CavityGeometry(length=1e-6, z1=0.4e-6, z2=0.6e-6)
    assert time_of_flight(micro) == pytest.approx(6.67e-16, rel=2e-3)
    with pytest.raises(DomainError):
        time_of_flight(CavityGeometry(length=1.0, z1=0.5, z2=0.5))


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(length=1.0, z1=1.5, z2=0.5),
        dict(length=1.0, z1=0.5, z2=0.0),
        dict(length=1.0, z1=0.5, z2=0.6, n_max=0),
        dict(length=1.0, z1=0.5, z2=0.6, mode_volume=-1.0),
    ],
)
def test_cavity_invariants(kwargs):
    with pytest.raises(DomainError):
        CavityGeometry(**kwargs)


def test_type_invariants():
    with pytest.raises(DomainError):
        Material("x", fermi_velocity=0.0, soi_strength=0.0)
    with pytest.raises(DomainError):
        Material("x", fermi_velocity=1e6, soi_strength=-1e-3)
    with pytest.raises(DomainError):
        ElectronState(energy=0.0)
    with pytest.raises(DomainError):
        ElectronState(energy=1.0, spin=0)
    e = ElectronState(energy=1.0, spin=-1, valley=1)
    assert e.mass(Material("m", 1e6, 0.25)) == -0.25
