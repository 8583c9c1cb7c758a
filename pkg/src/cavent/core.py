"""Single-layer band algebra and the cavity photon propagator.

Band basis ordering for every 2x2 operator in this package is (|+>, |->),
i.e. index 0 is the conduction band and index 1 the valence band.
"""

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class Material:
    name: str
    fermi_velocity: float  # m/s
    soi_strength: float  # eV

    def __post_init__(self):
        if not self.fermi_velocity > 0:
            raise DomainError(f"{self.name}: fermi_velocity must be > 0, got {self.fermi_velocity}")
        if not self.soi_strength >= 0:
            raise DomainError(f"{self.name}: soi_strength must be >= 0, got {self.soi_strength}")


@dataclass(frozen=True)
class ElectronState:
    """One electron of a layer.

    ``energy`` is the kinetic scale hbar*v_f*|k| in eV and ``angle`` the
    momentum azimuth. ``spin``, ``valley`` and ``band`` are each +1 or -1.
    """

    energy: float
    angle: float = 0.0
    spin: int = 1
    valley: int = 1
    band: int = 1

    def __post_init__(self):
        if not self.energy > 0:
            raise DomainError(f"electron energy must be > 0, got {self.energy}")
        for label in ("spin", "valley", "band"):
            if getattr(self, label) not in (1, -1):
                raise DomainError(f"{label} must be +1 or -1, got {getattr(self, label)}")

    def mass(self, material: Material) -> float:
        """Spin-orbit mass term eta*s*lambda_so (eV)."""
        return self.valley * self.spin * material.soi_strength


@dataclass(frozen=True)
class CavityGeometry:
    """Planar cavity of height ``length`` holding two layers at ``z1`` and ``z2``.

    The quantization volume is ``mode_volume`` when given, otherwise
    ``transverse_area * length``. With ``normalized=True`` all coupling
    prefactors are set to one and the volume is never consulted.
    """

    length: float
    z1: float
    z2: float
    n_max: int = 1
    light_speed: float = 2.99792458e8
    mode_volume: Optional[float] = None
    transverse_area: float = 4.0e-8  # (200 um)^2, see README
    normalized: bool = False

    def __post_init__(self):
        if not self.length > 0:
            raise DomainError(f"cavity length must be > 0, got {self.length}")
        for label in ("z1", "z2"):
            z = getattr(self, label)
            if not 0 < z < self.length:
                raise DomainError(f"{label}={z} must lie strictly inside (0, {self.length})")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise DomainError(f"n_max must be a positive integer, got {self.n_max}")
        if not self.light_speed > 0:
            raise DomainError(f"light_speed must be > 0, got {self.light_speed}")
        if self.mode_volume is not None and not self.mode_volume > 0:
            raise DomainError(f"mode_volume must be > 0, got {self.mode_volume}")
        if not self.transverse_area > 0:
            raise DomainError(f"transverse_area must be > 0, got {self.transverse_area}")

    @property
    def volume(self) -> float:
        if self.mode_volume is not None:
            return self.mode_volume
        return self.transverse_area * self.length


class ChiPair(NamedTuple):
    chi_plus: float
    chi_minus: float
    delta_chi: float

    def chi(self, band: int) -> float:
        return self.chi_plus if band == 1 else self.chi_minus


def band_energies(epsilon, delta):
    """Conduction and valence energies of the massive Dirac cone."""
    if not epsilon > 0:
        raise DomainError(f"epsilon must be > 0, got {epsilon}")
    e_plus = float(np.hypot(epsilon, delta))
    return e_plus, -e_plus


def chi_pair(epsilon, delta) -> ChiPair:
    """Band-mixing ratios chi_pm = (E_pm - delta)/epsilon.

    The branch where E_pm - delta cancels (chi_plus for delta > 0, chi_minus
    for delta < 0) is computed through chi_plus * chi_minus = -1 instead, which
    keeps full relative precision when |delta| >> epsilon.
    """
    e_plus, e_minus = band_energies(epsilon, delta)
    if delta >= 0:
        chi_minus = (e_minus - delta) / epsilon
        chi_plus = -1.0 / chi_minus
    else:
        chi_plus = (e_plus - delta) / epsilon
        chi_minus = -1.0 / chi_plus
    return ChiPair(chi_plus, chi_minus, chi_plus - chi_minus)


def sublattice_states(chi: ChiPair, angle):
    """Components of |A,s> and |B,s> in the band basis (|+>, |->)."""
    root_plus = np.sqrt(1.0 + chi.chi_plus**2)
    root_minus = np.sqrt(1.0 + chi.chi_minus**2)
    a = np.array([-chi.chi_minus * root_plus, chi.chi_plus * root_minus], dtype=complex)
    b = np.exp(-1j * angle) * np.array([root_plus, -root_minus], dtype=complex)
    return a / chi.delta_chi, b / chi.delta_chi


def sigma_band_operator(polarity, chi: ChiPair, angle):
    """sigma_+ = |A><B| (polarity +1) or sigma_- = |B><A| (polarity -1) in the band basis."""
    a, b = sublattice_states(chi, angle)
    if polarity in (1, "+"):
        return np.outer(a, b.conj())
    if polarity in (-1, "-"):
        return np.outer(b, a.conj())
    raise DomainError(f"polarity must be +1/-1, got {polarity!r}")


def band_to_sublattice(op, chi: ChiPair, angle):
    """Express a band-basis operator in the sublattice basis (|A>, |B>)."""
    a, b = sublattice_states(chi, angle)
    u = np.column_stack([a, b])
    return u.conj().T @ op @ u


def propagator_terms(cavity: CavityGeometry, zi, zj, q=0.0):
    """Individual summands sin(n pi zj/L) sin(n pi zi/L) / omega_{n,q}, n = 1..n_max."""
    for z in (zi, zj):
        if not 0 <= z <= cavity.length:
            raise DomainError(f"position {z} outside cavity [0, {cavity.length}]")
    if q < 0:
        raise DomainError(f"q must be >= 0, got {q}")
    n = np.arange(1, cavity.n_max + 1)
    k = n * np.pi / cavity.length
    omega = cavity.light_speed * np.sqrt(q * q + k * k)
    return np.sin(k * zi) * np.sin(k * zj) / omega


def photon_propagator(cavity: CavityGeometry, zi, zj, q=0.0) -> float:
    # cumsum accumulates left to right, so raising n_max adds exactly one term
    return float(np.cumsum(propagator_terms(cavity, zi, zj, q))[-1])


def time_of_flight(cavity: CavityGeometry) -> float:
    if cavity.z1 == cavity.z2:
        raise DomainError("time of flight undefined for coincident layers")
    return abs(cavity.z2 - cavity.z1) / cavity.light_speed
