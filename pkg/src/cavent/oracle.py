"""Brute-force constructions used to check the closed forms.

Nothing here reads the L/B/N/M coefficients: the density matrix is assembled
from the sublattice->band operators and the propagator mode sum alone.
"""

import math
from dataclasses import dataclass

import numpy as np

from .constants import CODATA2018
from .core import CavityGeometry, ChiPair, ElectronState, Material, chi_pair, photon_propagator
from .core import sigma_band_operator
from .density import (
    ERROR_THRESHOLD,
    DensityMatrix,
    LayerConfig,
    check_admissible,
    coupling_prefactor,
    excitation_basis,
)
from .errors import DomainError, NumericError

IDENTITY2 = np.eye(2, dtype=complex)

# tolerance ladder
TOL_IDENTITY = 1e-12
TOL_MATRIX = 1e-10
TOL_FINITE_DIFFERENCE = 1e-6


def band_ket(band: int) -> np.ndarray:
    return np.array([1.0, 0.0] if band == 1 else [0.0, 1.0], dtype=complex)


def excitation_permutation(band1: int, band2: int):
    """Indices taking the band-ordered 4x4 basis to the excitation ordering."""
    idx = lambda a, b: (0 if a == 1 else 2) + (0 if b == 1 else 1)
    return [idx(band1, band2), idx(band1, -band2), idx(-band1, band2), idx(-band1, -band2)]


def dyson_rho(
    layer1: LayerConfig,
    layer2: LayerConfig,
    cavity: CavityGeometry,
    t,
    q=0.0,
    constants=CODATA2018,
    basis="excitation",
) -> DensityMatrix:
    """Second-order density matrix by explicit operator sums.

    rho = rho_s - t^2/2 sum_{i,j,lam} w_ij (S S rho_s - 2 S rho_s S + rho_s S S)
    with S the per-layer sigma operators lifted to the two-layer space and
    w_ij = (e gamma/hbar)^2 v_i v_j Delta_ij.
    """
    if t < 0:
        raise DomainError(f"time must be >= 0, got {t}")
    q11, q22, q12 = (q, q, q) if np.ndim(q) == 0 else q
    layers = (layer1, layer2)
    z = [layer.position for layer in layers]
    v = [layer.material.fermi_velocity for layer in layers]
    qs = {(0, 0): q11, (1, 1): q22, (0, 1): q12, (1, 0): q12}
    w = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            w[i, j] = coupling_prefactor(v[i], v[j], cavity, constants) * photon_propagator(
                cavity, z[i], z[j], qs[i, j]
            )

    lifted = []
    for k, layer in enumerate(layers):
        chi = chi_pair(layer.electron.energy, layer.mass)
        ops = {}
        for lam in (1, -1):
            s = sigma_band_operator(lam, chi, layer.electron.angle)
            ops[lam] = np.kron(s, IDENTITY2) if k == 0 else np.kron(IDENTITY2, s)
        lifted.append(ops)

    ket = np.kron(band_ket(layer1.electron.band), band_ket(layer2.electron.band))
    rho_s = np.outer(ket, ket.conj())
    acc = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            for lam in (1, -1):
                a, b = lifted[i][-lam], lifted[j][lam]
                acc += w[i, j] * (a @ b @ rho_s - 2.0 * a @ rho_s @ b + rho_s @ a @ b)
    rho = rho_s - 0.5 * t * t * acc

    nu1, nu2 = layer1.electron.band, layer2.electron.band
    perm = excitation_permutation(nu1, nu2)
    populations = np.delete(np.diag(rho).real, perm[0])
    check_admissible(1.0, max(populations.max(), 0.0))

    if basis == "band":
        return DensityMatrix(rho, excitation_basis(1, 1), {"t": t})
    if basis != "excitation":
        raise DomainError(f"unknown basis {basis!r}")
    return DensityMatrix(rho[np.ix_(perm, perm)], excitation_basis(nu1, nu2), {"t": t})


def finite_difference_check(f, t0, h, richardson=False) -> float:
    """Central difference (f(t0+h) - f(t0-h)) / 2h, optionally Richardson-extrapolated."""
    if not t0 - h > 0:
        raise DomainError(f"need t0 - h > 0, got t0={t0}, h={h}")
    if not h > 0 or t0 + h / 2 == t0:
        raise NumericError(f"step {h} underflows at t0={t0}")
    central = lambda step: (f(t0 + step) - f(t0 - step)) / (2.0 * step)
    d_h = central(h)
    if not richardson:
        return d_h
    return (4.0 * central(h / 2) - d_h) / 3.0


def eigen_oracle(matrix, hermitian=None) -> np.ndarray:
    """Eigenvalues of a small dense matrix with a residual check on every pair.

    Hermitian input (auto-detected unless ``hermitian`` is given) goes through
    the symmetric solver and returns real eigenvalues.
    """
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] > 8:
        raise DomainError(f"expected a square matrix of size <= 8, got {a.shape}")
    scale = max(np.linalg.norm(a, 2), np.finfo(float).tiny)
    if hermitian is None:
        hermitian = np.max(np.abs(a - a.conj().T)) <= 1e-12 * scale
    if hermitian:
        vals, vecs = np.linalg.eigh(a)
    else:
        vals, vecs = np.linalg.eig(a)
    residual = np.linalg.norm(a @ vecs - vecs * vals, axis=0)
    worst = float(residual.max()) if residual.size else 0.0
    if worst > 1e-10 * scale:
        raise NumericError(f"eigenpair residual {worst:.3g} exceeds 1e-10 * ||A|| = {1e-10 * scale:.3g}")
    return vals


# --- bracket-formula operator action on band states ----------------------------------


def bracket_formula_sigma(lam: int, chi: ChiPair, angle) -> np.ndarray:
    """Matrix of sigma_lam built from the bracket formula for its band-state action.

    Column nu holds the components of sigma_lam |nu> in the (|+>, |->) basis.
    """
    out = np.zeros((2, 2), dtype=complex)
    for col, nu in enumerate((1, -1)):
        for row, nu_p in enumerate((1, -1)):
            ratio = math.sqrt((1 + chi.chi(nu_p) ** 2) / (1 + chi.chi(nu) ** 2))
            bracket = (1 - lam) - (1 - lam) * chi.chi(-nu_p) * chi.chi(nu)
            out[row, col] = np.exp(1j * lam * angle) / (2 * chi.delta_chi) * nu_p * ratio * bracket
    return out


def bracket_formula_report(energies=(0.1, 1.0, 3.0), masses=(0.0, 0.5, 4.0), angles=(0.0, 0.7, 2.0)):
    """Compare the bracket-formula band-state action with the outer-product operators on a grid.

    The outcome is recorded, never asserted: it is a fact about the bracket
    expression rather than about this code.
    """
    rows = []
    for eps in energies:
        for delta in masses:
            chi = chi_pair(eps, delta)
            for phi in angles:
                for lam in (1, -1):
                    built = sigma_band_operator(lam, chi, phi)
                    bracket = bracket_formula_sigma(lam, chi, phi)
                    rows.append(
                        {
                            "epsilon": eps,
                            "delta": delta,
                            "angle": phi,
                            "polarization": lam,
                            "max_abs_difference": float(np.max(np.abs(built - bracket))),
                        }
                    )
    worst = max(r["max_abs_difference"] for r in rows)
    return {
        "report_version": 1,
        "check": "bracket_formula_sigma_vs_outer_product",
        "points": len(rows),
        "max_abs_difference": worst,
        "match": bool(worst <= TOL_IDENTITY),
        "rows": rows,
    }


# --- random configurations --------------------------------------------------


@dataclass(frozen=True)
class RandomConfiguration:
    layer1: LayerConfig
    layer2: LayerConfig
    cavity: CavityGeometry
    t: float
    q: float = 0.0


def _log_uniform(rng, lo, hi):
    return float(10 ** rng.uniform(math.log10(lo), math.log10(hi)))


def sample_layer(rng, cavity_length, name="random", same_band=None, same_spin=None):
    material = Material(name, _log_uniform(rng, 1e5, 1.5e6), _log_uniform(rng, 1e-6, 0.1))
    electron = ElectronState(
        energy=_log_uniform(rng, 1e-4, 1.0),
        angle=float(rng.uniform(0.0, 2 * math.pi)),
        spin=same_spin if same_spin is not None else int(rng.choice([1, -1])),
        valley=int(rng.choice([1, -1])),
        band=same_band if same_band is not None else int(rng.choice([1, -1])),
    )
    position = float(rng.uniform(0.1, 0.9)) * cavity_length
    return LayerConfig(material, electron, position)


def sample_configuration(
    rng, parallel=False, length=1e-6, max_occupation=0.45, normalized=False
) -> RandomConfiguration:
    """Random admissible two-layer configuration.

    With ``parallel`` both electrons share spin and band, the precondition of
    the closed-form concurrence. The time is drawn so that t^2 max(L) is
    uniform in (0, max_occupation).
    """
    # avoid an import cycle: density depends on nothing here
    from .density import compute_coefficients

    n_max = int(rng.integers(1, 9))
    layer1 = sample_layer(rng, length)
    band = layer1.electron.band if parallel else None
    spin = layer1.electron.spin if parallel else None
    layer2 = sample_layer(rng, length, same_band=band, same_spin=spin)
    cavity = CavityGeometry(
        length=length,
        z1=layer1.position,
        z2=layer2.position,
        n_max=n_max,
        normalized=normalized,
    )
    rate = compute_coefficients(layer1, layer2, cavity).max_population_rate()
    occupation = float(rng.uniform(0.0, max_occupation))
    t = math.sqrt(occupation / rate) if rate > 0 else 0.0
    assert occupation < ERROR_THRESHOLD
    return RandomConfiguration(layer1, layer2, cavity, t)


# --- verification runner ----------------------------------------------------


def chi_identity_residuals(epsilon, delta):
    """Relative residuals of the five band-mixing identities (last one split in three)."""
    p, m, d = chi_pair(epsilon, delta)
    rel = lambda a, b: abs(a - b) / max(abs(a), abs(b))
    return (
        rel(m * (1 + p * p), -p * (1 + m * m)),
        rel(p * m, -1.0),
        rel(p / m, -p * p),
        rel(m * (1 + p * p), -d),
        max(rel(m * m, 1 / (p * p)), rel(m * m, -m / p), rel(m * m, (1 + m * m) / (1 + p * p))),
    )


def _check(name, residual, tolerance, cases, **extra):
    entry = {
        "check": name,
        "cases": cases,
        "max_residual": float(residual),
        "tolerance": tolerance,
        "passed": bool(residual <= tolerance),
    }
    entry.update(extra)
    return entry


def check_dyson_equivalence(rng, cases):
    from .density import compute_coefficients, rho_total

    worst = 0.0
    for _ in range(cases):
        cfg = sample_configuration(rng)
        brute = dyson_rho(cfg.layer1, cfg.layer2, cfg.cavity, cfg.t, cfg.q).data
        coeffs = compute_coefficients(cfg.layer1, cfg.layer2, cfg.cavity, cfg.q)
        closed = rho_total(coeffs, cfg.t).data
        worst = max(worst, float(np.max(np.abs(brute - closed))))
    return _check("dyson_rho_equals_rho_total", worst, TOL_MATRIX, cases)


def check_concurrence(rng, cases):
    """Closed-form concurrence and spin-flip spectrum against the numeric route."""
    from .density import compute_coefficients, rho_total
    from .measures import (
        concurrence_closed_form,
        spin_flip_eigenvalues,
        spin_flip_product,
        wootters_concurrence,
    )

    worst_c = 0.0
    worst_ev = 0.0
    for _ in range(cases):
        cfg = sample_configuration(rng, parallel=True)
        coeffs = compute_coefficients(cfg.layer1, cfg.layer2, cfg.cavity, cfg.q)
        rho = rho_total(coeffs, cfg.t, diagonal_approximation=True)
        closed = concurrence_closed_form(cfg.layer1, cfg.layer2, cfg.cavity, cfg.t, cfg.q)
        worst_c = max(worst_c, abs(closed - wootters_concurrence(rho)))
        numeric = np.sort(eigen_oracle(spin_flip_product(rho)).real)[::-1]
        expected = np.array(spin_flip_eigenvalues(coeffs, cfg.t))
        scale = max(abs(expected[0]), np.finfo(float).tiny)
        worst_ev = max(worst_ev, float(np.max(np.abs(numeric - expected)) / scale))
    return [
        _check("concurrence_closed_form_equals_wootters", worst_c, TOL_MATRIX, cases),
        _check("spin_flip_eigenvalues_closed_form", worst_ev, TOL_MATRIX, cases, relative=True),
    ]


def check_chi_identities(rng, cases):
    eps = 10 ** rng.uniform(-4, 0, cases)
    delta = 10 ** rng.uniform(-6, -1, cases) * rng.choice([1.0, -1.0], cases)
    worst = max(max(chi_identity_residuals(e, d)) for e, d in zip(eps, delta))
    return _check("chi_identities", worst, TOL_MATRIX, cases, relative=True)


def check_hermitian_eigen(rng, cases):
    worst = 0.0
    for _ in range(cases):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        vals = eigen_oracle(a + a.conj().T)
        worst = max(worst, float(np.max(np.abs(np.imag(vals)))))
    return _check("eigen_oracle_hermitian_real", worst, TOL_IDENTITY, cases)


def run_verification(seed=0, cases=500) -> dict:
    """Run every oracle suite from one seed and return a JSON-ready report.

    Each suite draws from its own child generator so that changing ``cases``
    for one suite never shifts the samples of another.
    """
    if cases < 1:
        raise DomainError(f"cases must be >= 1, got {cases}")
    streams = np.random.SeedSequence(seed).spawn(4)
    rngs = [np.random.default_rng(s) for s in streams]
    checks = [check_dyson_equivalence(rngs[0], cases)]
    checks += check_concurrence(rngs[1], cases)
    checks.append(check_chi_identities(rngs[2], max(cases, 10_000)))
    checks.append(check_hermitian_eigen(rngs[3], cases))
    bracket = bracket_formula_report()
    return {
        "report_version": 1,
        "seed": seed,
        "cases": cases,
        "passed": all(c["passed"] for c in checks),
        "checks": checks,
        "informational": [{k: v for k, v in bracket.items() if k != "rows"}],
    }
