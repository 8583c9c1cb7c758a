"""Entanglement entropy and concurrence for the second-order two-layer state.

Entropies are in nats unless a ``base`` is given.
"""

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

from .constants import CODATA2018
from .core import CavityGeometry
from .density import (
    LayerConfig,
    RhoCoefficients,
    as_array,
    check_admissible,
    check_state,
    compute_coefficients,
    coupling_prefactor,
    propagators,
    reduce,
    rho_total,
)
from .errors import DomainError, InvalidStateError
from .oracle import eigen_oracle, finite_difference_check

log = logging.getLogger(__name__)

EIGEN_CLAMP = 1e-10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)


def _entropy_from_probabilities(p, base=math.e) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)) / math.log(base))


def entropy_exact(rho2, base=math.e) -> float:
    """Von Neumann entropy of a single-layer (2x2) state."""
    m = check_state(rho2)
    if m.shape != (2, 2):
        raise InvalidStateError(f"entropy_exact expects a 2x2 matrix, got {m.shape}")
    p = np.linalg.eigvalsh(m)
    if p.min() < -EIGEN_CLAMP or p.max() > 1 + EIGEN_CLAMP:
        raise InvalidStateError(f"eigenvalues {p} outside [0, 1]")
    return _entropy_from_probabilities(np.clip(p, 0.0, 1.0), base)


def von_neumann_entropy(rho, clip_negative=False, base=math.e) -> float:
    """Entropy of any density matrix.

    Second-order states are not positive semidefinite at order t^4; with
    ``clip_negative`` such eigenvalues are dropped instead of rejected.
    """
    m = check_state(rho)
    p = np.linalg.eigvalsh(m)
    if p.min() < -EIGEN_CLAMP and not clip_negative:
        raise InvalidStateError(f"negative eigenvalue {p.min():.3g}")
    return _entropy_from_probabilities(np.clip(p, 0.0, 1.0), base)


def reduced_eigenvalues(t, l, b=0.0):
    """(p_plus, p_minus) of [[1 - t^2 l, t^2 b], [t^2 b, t^2 l]]."""
    x = t * t * l
    root = math.sqrt((1.0 - 2.0 * x) ** 2 + 4.0 * (t * t * b) ** 2)
    # p_minus via the product p+ p- = det, avoiding cancellation for small t
    p_plus = 0.5 * (1.0 + root)
    det = x * (1.0 - x) - (t * t * b) ** 2
    return p_plus, det / p_plus


def layer_entropy(t, l, b=0.0, base=math.e) -> float:
    """Exact entropy of the reduced layer state built from (l, b) at time t."""
    x, y = t * t * l, t * t * b
    return entropy_exact(np.array([[1.0 - x, y], [y, x]]), base)


def entropy_expansion(t, l, b=0.0):
    """Short-time entropy truncations: (leading t^2 term, with the t^4 coherence term)."""
    if t == 0:
        return 0.0, 0.0
    x = t * t * l
    if not 0 < x < 1:
        raise DomainError(f"t^2 L = {x:.3g} must lie in (0, 1)")
    leading = x * (1.0 - math.log(x))
    with_coherence = leading + t**4 * (l * l / 2.0 + b * b * math.log(x))
    return leading, with_coherence


def _rate_domain(t, l):
    if not t > 0:
        raise DomainError("entropy rate diverges at t = 0")
    x = t * t * l
    if not 0 < x < 1:
        raise DomainError(f"t^2 L = {x:.3g} must lie in (0, 1)")
    return x


def entropy_rate(t, l) -> float:
    """Closed-form rate 2 t L [1 - log(t^2 L)] that accompanies the leading expansion."""
    x = _rate_domain(t, l)
    return 2.0 * t * l * (1.0 - math.log(x))


def entropy_rate_leading_derivative(t, l) -> float:
    """d/dt of t^2 L [1 - log(t^2 L)], which is -2 t L log(t^2 L)."""
    x = _rate_domain(t, l)
    return -2.0 * t * l * math.log(x)


def entropy_rate_numeric(t, l, b=0.0, rel_step=1e-4) -> float:
    """Richardson-extrapolated derivative of the exact layer entropy."""
    _rate_domain(t, l)
    return finite_difference_check(
        lambda s: layer_entropy(s, l, b), t, rel_step * t, richardson=True
    )


def entropy_asymmetry(
    layer1: LayerConfig, layer2: LayerConfig, cavity: CavityGeometry, t, q=0.0, constants=CODATA2018
):
    """(leading-order S1 - S2, exact S1 - S2).

    The leading-order value is 2 t^2 [g11 Delta11 - g22 Delta22] with
    g_ii = (e gamma v_i / hbar)^2; it keeps neither the band factor of L_i
    nor the logarithm, so only its sign is meaningful against the exact value.
    """
    d11, d22, _ = propagators(layer1, layer2, cavity, q)
    v1, v2 = layer1.material.fermi_velocity, layer2.material.fermi_velocity
    leading_order = (
        2.0
        * t
        * t
        * (
            coupling_prefactor(v1, v1, cavity, constants) * d11
            - coupling_prefactor(v2, v2, cavity, constants) * d22
        )
    )
    rho = rho_total(compute_coefficients(layer1, layer2, cavity, q, constants), t)
    exact = entropy_exact(reduce(rho, 1)) - entropy_exact(reduce(rho, 2))
    return leading_order, exact


def mutual_information(s1, s2) -> float:
    """Leading-order mutual information S1 + S2 (the joint entropy is dropped)."""
    if s1 < 0 or s2 < 0:
        raise DomainError("entropies must be non-negative")
    return s1 + s2


@dataclass(frozen=True)
class EntropyReport:
    exact: float
    expansion_leading: float
    expansion_with_coherence: float
    rate: float
    rate_leading_derivative: float
    eigenvalues: tuple
    layer: int = 2

    def to_dict(self) -> dict:
        d = asdict(self)
        d["eigenvalues"] = list(self.eigenvalues)
        return d

    CSV_FIELDS = (
        "layer",
        "exact",
        "expansion_leading",
        "expansion_with_coherence",
        "rate",
        "rate_leading_derivative",
        "p_plus",
        "p_minus",
    )

    def csv_row(self) -> dict:
        d = self.to_dict()
        d["p_plus"], d["p_minus"] = self.eigenvalues
        return {k: d[k] for k in self.CSV_FIELDS}


def entropy_report(coeffs: RhoCoefficients, t, layer=2) -> EntropyReport:
    l, b = (coeffs.l1, coeffs.b1) if layer == 1 else (coeffs.l2, coeffs.b2)
    exact = entropy_exact(reduce(rho_total(coeffs, t), layer))
    if t > 0 and l > 0:
        leading, with_coh = entropy_expansion(t, l, b)
        rate, deriv = entropy_rate(t, l), entropy_rate_leading_derivative(t, l)
    else:
        leading, with_coh, rate, deriv = 0.0, 0.0, float("nan"), float("nan")
    return EntropyReport(
        exact=exact,
        expansion_leading=leading,
        expansion_with_coherence=with_coh,
        rate=rate,
        rate_leading_derivative=deriv,
        eigenvalues=reduced_eigenvalues(t, l, b),
        layer=layer,
    )


# --- concurrence -----------------------------------------------------------


def _spin_flip_matrix(flip):
    if flip == "y":
        return np.kron(SIGMA_Y, SIGMA_Y)
    if flip == "x":
        return np.kron(SIGMA_X, SIGMA_X)
    raise DomainError(f"flip must be 'x' or 'y', got {flip!r}")


def spin_flip_product(rho, flip="y") -> np.ndarray:
    """R = rho F rho* F with F the two-qubit spin flip."""
    m = as_array(rho)
    f = _spin_flip_matrix(flip)
    return m @ f @ m.conj() @ f


def wootters_sqrt_eigenvalues(rho, flip="y") -> np.ndarray:
    """Square roots of the eigenvalues of R, sorted descending."""
    m = check_state(rho)
    if m.shape != (4, 4):
        raise InvalidStateError(f"concurrence needs a 4x4 matrix, got {m.shape}")
    ev = eigen_oracle(spin_flip_product(m, flip))
    # R has a real non-negative spectrum for states; drop rounding residue
    return np.sort(np.sqrt(np.abs(ev.real)))[::-1]


def wootters_concurrence(rho, flip="y") -> float:
    """Numerical two-qubit concurrence max(0, s1 - s2 - s3 - s4).

    ``flip='y'`` is the standard sigma_y x sigma_y spin flip. ``'x'`` uses
    sigma_x x sigma_x; the two agree on X-shaped matrices but only 'y' is an
    entanglement measure in general.
    """
    s = wootters_sqrt_eigenvalues(rho, flip)
    return float(max(0.0, s[0] - s[1] - s[2] - s[3]))


def selection_rule_allows(layer1: LayerConfig, layer2: LayerConfig) -> bool:
    e1, e2 = layer1.electron, layer2.electron
    return e1.spin == e2.spin and e1.band == e2.band


def concurrence_from_coefficients(coeffs: RhoCoefficients, t) -> float:
    return max(0.0, 2.0 * t * t * (abs(coeffs.n_coef) - abs(coeffs.m_coef)))


def concurrence_closed_form(
    layer1: LayerConfig, layer2: LayerConfig, cavity: CavityGeometry, t, q=0.0, constants=CODATA2018
) -> float:
    """Closed-form concurrence 2 t^2 (|N| - |M|), clipped at zero.

    Returns 0 for antiparallel spins or different bands.
    """
    if not selection_rule_allows(layer1, layer2):
        log.info("concurrence set to 0: spins or bands differ between layers")
        return 0.0
    coeffs = compute_coefficients(layer1, layer2, cavity, q, constants)
    check_admissible(t, coeffs.max_population_rate())
    return concurrence_from_coefficients(coeffs, t)


def _sqrt_form_radicands(eps1, mass1, eps2, mass2, dphi, mass2_weight):
    a = math.hypot(eps1, mass1)
    b = math.hypot(eps2, mass2)
    e12 = (eps1 * eps2) ** 2
    c = math.cos(2.0 * dphi)
    second = mass2_weight * mass2**2 / eps2**2
    base = 1.0 + second + 2.0 * mass1**2 / eps1**2 + 4.0 * mass1**2 * mass2**2 / e12 + c
    cross = 4.0 * mass1 * mass2 * a * b / e12
    return a, b, base - cross, base + cross


def concurrence_sqrt_terms(eps1, mass1, eps2, mass2, dphi, zeta_t2_delta12, mass2_weight=2.0):
    """The two square-root terms of the explicit concurrence (minus, plus).

    ``mass`` is the signed gap eta*s*lambda. ``mass2_weight=1.0`` gives the
    single-weight variant, whose lambda_2^2/eps_2^2 term lacks the
    factor 2 needed to agree with 2(|N| - |M|).
    """
    a, b, r_minus, r_plus = _sqrt_form_radicands(eps1, mass1, eps2, mass2, dphi, mass2_weight)
    pref = abs(zeta_t2_delta12) * eps1 * eps2 / (math.sqrt(2.0) * a * b)
    return pref * math.sqrt(max(r_minus, 0.0)), pref * math.sqrt(max(r_plus, 0.0))


def concurrence_sqrt_form(eps1, mass1, eps2, mass2, dphi, zeta_t2_delta12, mass2_weight=2.0) -> float:
    """Explicit square-root concurrence for nu1 = nu2, s1 = s2 (not clipped)."""
    minus, plus = concurrence_sqrt_terms(eps1, mass1, eps2, mass2, dphi, zeta_t2_delta12, mass2_weight)
    return plus - minus


def concurrence_identical(epsilon, lam, dphi, zeta_t2_delta12) -> float:
    """Concurrence of two identical layers."""
    if not epsilon > 0:
        raise DomainError(f"epsilon must be > 0, got {epsilon}")
    e2, l2 = epsilon**2, lam**2
    c = abs(math.cos(dphi))
    value = zeta_t2_delta12 / (e2 + l2) * (math.sqrt(e2 * e2 * c * c + 4.0 * l2 * (e2 + l2)) - e2 * c)
    return max(0.0, value)


def concurrence_zero_soi_limit(dphi, zeta_t2_delta12) -> float:
    """The gapless-layer value zeta t^2 Delta12 |cos dphi| expected for lambda -> 0."""
    return zeta_t2_delta12 * abs(math.cos(dphi))


def saturation_threshold(layer_weak: LayerConfig, layer_strong: LayerConfig) -> float:
    """SOI of the weak layer, eps_w * lambda_s / eps_s, where concurrence stops growing."""
    eps_w, eps_s = layer_weak.electron.energy, layer_strong.electron.energy
    if not (eps_w > 0 and eps_s > 0):
        raise DomainError("energies must be positive")
    return eps_w * layer_strong.material.soi_strength / eps_s


def knee_location(x, y) -> float:
    """Abscissa of the largest second difference of y on a uniform grid."""
    y = np.asarray(y, dtype=float)
    d2 = np.abs(np.diff(y, 2))
    return float(np.asarray(x)[1 + int(np.argmax(d2))])


def spin_flip_eigenvalues(coeffs: RhoCoefficients, t):
    """Eigenvalues of R for the state with b1 = b2 = 0, descending.

    (sqrt(L1 L2) + |N|)^2 t^4, (sqrt(L1 L2) - |N|)^2 t^4 and |M|^2 t^4 twice.
    """
    t4 = t**4
    g = math.sqrt(coeffs.l1 * coeffs.l2)
    n, m = abs(coeffs.n_coef), abs(coeffs.m_coef)
    return tuple(sorted(((g + n) ** 2 * t4, (g - n) ** 2 * t4, m * m * t4, m * m * t4), reverse=True))


def unsquared_spin_flip_values(coeffs: RhoCoefficients, t):
    """Unsquared variant sqrt(L1 L2) t^4 +- |N| t^4, |M| t^4, 0 (not the spin-flip spectrum)."""
    t4 = t**4
    g = math.sqrt(coeffs.l1 * coeffs.l2)
    n, m = abs(coeffs.n_coef), abs(coeffs.m_coef)
    return (g * t4 + n * t4, g * t4 - n * t4, m * t4, 0.0)


@dataclass(frozen=True)
class ConcurrenceReport:
    closed_form: float
    oracle: float
    spin_flip_eigen_sqrts: tuple
    sqrt_form: float = float("nan")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["spin_flip_eigen_sqrts"] = list(self.spin_flip_eigen_sqrts)
        return d

    CSV_FIELDS = ("closed_form", "oracle", "sqrt_form", "s1", "s2", "s3", "s4")

    def csv_row(self) -> dict:
        s = self.spin_flip_eigen_sqrts
        return {
            "closed_form": self.closed_form,
            "oracle": self.oracle,
            "sqrt_form": self.sqrt_form,
            "s1": s[0],
            "s2": s[1],
            "s3": s[2],
            "s4": s[3],
        }


def concurrence_report(
    layer1: LayerConfig, layer2: LayerConfig, cavity: CavityGeometry, t, q=0.0, constants=CODATA2018
) -> ConcurrenceReport:
    """Closed form against the Wootters oracle on the coherence-free state."""
    coeffs = compute_coefficients(layer1, layer2, cavity, q, constants)
    rho = rho_total(coeffs, t, diagonal_approximation=True)
    sqrts = wootters_sqrt_eigenvalues(rho)
    closed = concurrence_closed_form(layer1, layer2, cavity, t, q, constants)
    sqrt_form = float("nan")
    if selection_rule_allows(layer1, layer2):
        sqrt_form = max(
            0.0,
            concurrence_sqrt_form(
                layer1.electron.energy,
                layer1.mass,
                layer2.electron.energy,
                layer2.mass,
                layer1.electron.angle - layer2.electron.angle,
                coeffs.zeta * t * t * coeffs.delta12,
            ),
        )
    return ConcurrenceReport(
        closed_form=closed,
        oracle=float(max(0.0, sqrts[0] - sqrts[1] - sqrts[2] - sqrts[3])),
        spin_flip_eigen_sqrts=tuple(float(s) for s in sqrts),
        sqrt_form=sqrt_form,
    )


def full_state_entropy(coeffs: RhoCoefficients, t) -> float:
    """Joint entropy S12 of the two-layer state, negative eigenvalues dropped."""
    return von_neumann_entropy(rho_total(coeffs, t), clip_negative=True)

