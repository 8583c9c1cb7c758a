"""Second-order two-layer density matrix, reductions and purity.

Four-dimensional matrices are written in the excitation basis of the initial
state |nu1, nu2>::

    (|nu1, nu2>, |nu1, -nu2>, |-nu1, nu2>, |-nu1, -nu2>)

with layer 1 as the first tensor factor. For the conduction-band start
nu1 = nu2 = +1 this is the band ordering (|++>, |+->, |-+>, |-->).
"""

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .constants import CODATA2018, PhysicalConstants
from .core import CavityGeometry, ElectronState, Material, chi_pair, photon_propagator
from .errors import DomainError, InvalidStateError, PerturbativeRegimeError, PerturbativeWarning

WARN_THRESHOLD = 0.5
ERROR_THRESHOLD = 1.0


@dataclass(frozen=True)
class LayerConfig:
    material: Material
    electron: ElectronState
    position: float  # m

    @property
    def mass(self) -> float:
        return self.electron.mass(self.material)

    @property
    def chi(self):
        return chi_pair(self.electron.energy, self.mass)


@dataclass(frozen=True)
class RhoCoefficients:
    """Scalars fixing the second-order density matrix (units 1/s^2, or
    dimensionless in normalized mode).

    ``b1``/``b2`` are the band coherences and ``n_coef``/``m_coef`` the
    interlayer coherences; ``zeta`` is the interlayer coupling prefactor
    (e gamma)^2 v1 v2 / hbar^2 and ``delta11``..``delta12`` the propagators
    that went in.
    """

    l1: float
    l2: float
    b1: float
    b2: float
    n_coef: complex
    m_coef: complex
    zeta: float = 1.0
    delta11: float = float("nan")
    delta22: float = float("nan")
    delta12: float = float("nan")
    band1: int = 1
    band2: int = 1

    def max_population_rate(self) -> float:
        return max(self.l1, self.l2)


@dataclass
class DensityMatrix:
    data: np.ndarray
    basis: Optional[tuple] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        if self.data.shape not in ((2, 2), (4, 4)):
            raise InvalidStateError(f"density matrix must be 2x2 or 4x4, got {self.data.shape}")

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "basis": list(self.basis) if self.basis else None,
            "entries": [[[float(z.real), float(z.imag)] for z in row] for row in self.data],
            "params": self.params,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "DensityMatrix":
        entries = np.array(
            [[complex(re, im) for re, im in row] for row in payload["entries"]], dtype=complex
        )
        if entries.shape[0] != payload["dim"]:
            raise InvalidStateError("dim does not match entries")
        basis = tuple(payload["basis"]) if payload.get("basis") else None
        return cls(entries, basis, dict(payload.get("params") or {}))


def as_array(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.data
    return np.asarray(rho, dtype=complex)


def check_state(rho, tol=1e-8) -> np.ndarray:
    """Return the matrix of ``rho`` after checking Hermiticity and unit trace."""
    m = as_array(rho)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidStateError(f"expected a square matrix, got shape {m.shape}")
    if np.max(np.abs(m - m.conj().T)) > tol:
        raise InvalidStateError("matrix is not Hermitian")
    if abs(np.trace(m) - 1.0) > tol:
        raise InvalidStateError(f"trace {np.trace(m).real:.3g} != 1")
    return m


def excitation_basis(band1: int, band2: int) -> tuple:
    sym = {1: "+", -1: "-"}
    return tuple(
        f"|{sym[a]},{sym[b]}>"
        for a, b in ((band1, band2), (band1, -band2), (-band1, band2), (-band1, -band2))
    )


def coupling_prefactor(v_i, v_j, cavity: CavityGeometry, constants: PhysicalConstants = CODATA2018):
    """(e gamma / hbar)^2 v_i v_j with gamma^2 = hbar/(epsilon0 V); 1 in normalized mode."""
    if cavity.normalized:
        return 1.0
    e = constants.elementary_charge
    return e * e / (constants.hbar * constants.epsilon0 * cavity.volume) * v_i * v_j


def _split_q(q):
    if np.ndim(q) == 0:
        return float(q), float(q), float(q)
    q11, q22, q12 = q
    return float(q11), float(q22), float(q12)


def propagators(layer1: LayerConfig, layer2: LayerConfig, cavity: CavityGeometry, q=0.0):
    """(Delta11, Delta22, Delta12); ``q`` is one wavenumber or a (q11, q22, q12) triple."""
    q11, q22, q12 = _split_q(q)
    z1, z2 = layer1.position, layer2.position
    return (
        photon_propagator(cavity, z1, z1, q11),
        photon_propagator(cavity, z2, z2, q22),
        photon_propagator(cavity, z1, z2, q12),
    )


def compute_coefficients(
    layer1: LayerConfig,
    layer2: LayerConfig,
    cavity: CavityGeometry,
    q=0.0,
    constants: PhysicalConstants = CODATA2018,
) -> RhoCoefficients:
    d11, d22, d12 = propagators(layer1, layer2, cavity, q)
    v1, v2 = layer1.material.fermi_velocity, layer2.material.fermi_velocity
    g11 = coupling_prefactor(v1, v1, cavity, constants) * d11
    g22 = coupling_prefactor(v2, v2, cavity, constants) * d22
    zeta = coupling_prefactor(v1, v2, cavity, constants)

    c1, c2 = layer1.chi, layer2.chi
    nu1, nu2 = layer1.electron.band, layer2.electron.band

    l1 = g11 * (1.0 - 2.0 / c1.delta_chi**2)
    l2 = g22 * (1.0 - 2.0 / c2.delta_chi**2)
    # coherence sign follows the sublattice->band phase convention in core
    b1 = nu1 * g11 * (c1.chi_plus + c1.chi_minus) / c1.delta_chi**2
    b2 = nu2 * g22 * (c2.chi_plus + c2.chi_minus) / c2.delta_chi**2

    dphi = layer1.electron.angle - layer2.electron.angle
    phase = np.exp(1j * dphi)
    pref = zeta * d12 / (c1.delta_chi * c2.delta_chi)
    n_inner = c1.chi(-nu1) * c2.chi(-nu2) / phase + c1.chi(nu1) * c2.chi(nu2) * phase
    m_inner = -c1.chi(nu1) * c2.chi(-nu2) * phase - c1.chi(-nu1) * c2.chi(nu2) / phase
    return RhoCoefficients(
        l1=float(l1),
        l2=float(l2),
        b1=float(b1),
        b2=float(b2),
        n_coef=complex(pref * n_inner),
        m_coef=complex(pref * m_inner),
        zeta=float(zeta),
        delta11=d11,
        delta22=d22,
        delta12=d12,
        band1=nu1,
        band2=nu2,
    )


def check_admissible(t, rate) -> float:
    """Validate t^2 * rate against the perturbative thresholds and return it."""
    if t < 0:
        raise DomainError(f"time must be >= 0, got {t}")
    x = t * t * rate
    if x >= ERROR_THRESHOLD:
        raise PerturbativeRegimeError(
            f"t^2 * L = {x:.3g} >= {ERROR_THRESHOLD}: outside the perturbative regime"
        )
    if x >= WARN_THRESHOLD:
        warnings.warn(f"t^2 * L = {x:.3g} is not small", PerturbativeWarning, stacklevel=3)
    return x


def rho_total(coeffs: RhoCoefficients, t, diagonal_approximation=False) -> DensityMatrix:
    """Two-layer density matrix to second order in t.

    With ``diagonal_approximation`` the band coherences b1, b2 are dropped.
    """
    check_admissible(t, coeffs.max_population_rate())
    t2 = t * t
    b1 = 0.0 if diagonal_approximation else coeffs.b1
    b2 = 0.0 if diagonal_approximation else coeffs.b2
    n, m = coeffs.n_coef, coeffs.m_coef
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 1.0 - t2 * coeffs.l1 - t2 * coeffs.l2
    rho[1, 1] = t2 * coeffs.l2
    rho[2, 2] = t2 * coeffs.l1
    rho[0, 1] = rho[1, 0] = t2 * b2
    rho[0, 2] = rho[2, 0] = t2 * b1
    rho[1, 2] = t2 * np.conj(n)
    rho[2, 1] = t2 * n
    rho[0, 3] = t2 * np.conj(m)
    rho[3, 0] = t2 * m
    return DensityMatrix(rho, excitation_basis(coeffs.band1, coeffs.band2), {"t": t})


def reduce(rho, keep: int) -> DensityMatrix:
    """Partial trace of a two-qubit state onto layer ``keep`` (1 or 2)."""
    m = as_array(rho)
    if m.shape != (4, 4):
        raise InvalidStateError(f"reduce expects a 4x4 matrix, got {m.shape}")
    r = m.reshape(2, 2, 2, 2)
    if keep == 1:
        out = np.einsum("ajbj->ab", r)
    elif keep == 2:
        out = np.einsum("jajb->ab", r)
    else:
        raise DomainError(f"keep must be 1 or 2, got {keep}")
    return DensityMatrix(out)


def purity(rho) -> float:
    m = as_array(rho)
    # Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return float(np.sum(np.abs(m) ** 2))
