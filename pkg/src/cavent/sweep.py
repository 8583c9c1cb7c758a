"""Parameter sweeps, figure recipes and their CSV form.

A sweep varies one setting of a base :class:`Scenario` over a grid, optionally
repeated for several named series (each a set of overrides), and evaluates the
entropy/concurrence observables at every point. Rows that leave the
perturbative regime are kept with a status flag and blank measures.
"""

import csv
import io
import math
import warnings
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from .core import CavityGeometry, ElectronState, time_of_flight
from .density import (
    ERROR_THRESHOLD,
    WARN_THRESHOLD,
    LayerConfig,
    compute_coefficients,
    purity,
    reduce,
    rho_total,
)
from .errors import DomainError, SweepSpecError
from .measures import (
    concurrence_from_coefficients,
    concurrence_sqrt_terms,
    entropy_exact,
    knee_location,
    mutual_information,
    saturation_threshold,
    selection_rule_allows,
)
from .presets import BUILTIN_PRESETS, get_material

VARIABLES = (
    "time",
    "d2_over_L",
    "d1_over_L",
    "lambda_so",
    "delta_phi",
    "n_max",
    "material_pair",
    "d_separation",
)
OUTPUTS = ("entropy1", "entropy2", "concurrence", "purity", "mutual_information", "propagators")
CSV_COLUMNS = (
    "sweep_var",
    "value",
    "S1_nats",
    "S2_nats",
    "concurrence",
    "purity",
    "mutual_info",
    "delta11",
    "delta22",
    "delta12",
    "status",
)
EXTRA_COLUMNS = ("series", "sqrt_minus", "sqrt_plus")
DEFAULT_POINTS = 200
REFERENCE_T_MAX = 6.6e-10  # s, light-crossing time used by the recipes


@dataclass(frozen=True)
class Scenario:
    """Everything a single evaluation needs. ``t_max`` of None means time of flight."""

    layer1: LayerConfig
    layer2: LayerConfig
    cavity: CavityGeometry
    t: float = 0.0
    q: object = 0.0
    t_max: Optional[float] = None

    def resolved_t_max(self) -> float:
        return self.t_max if self.t_max is not None else time_of_flight(self.cavity)

    def with_positions(self, z1, z2) -> "Scenario":
        return replace(
            self,
            cavity=replace(self.cavity, z1=z1, z2=z2),
            layer1=replace(self.layer1, position=z1),
            layer2=replace(self.layer2, position=z2),
        )

    def with_electron(self, layer: int, **changes) -> "Scenario":
        name = "layer1" if layer == 1 else "layer2"
        cfg = getattr(self, name)
        return replace(self, **{name: replace(cfg, electron=replace(cfg.electron, **changes))})

    def with_material(self, layer: int, material) -> "Scenario":
        name = "layer1" if layer == 1 else "layer2"
        return replace(self, **{name: replace(getattr(self, name), material=material)})


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    base: Scenario
    range: Optional[tuple] = None  # (start, stop, count)
    values: tuple = ()
    outputs: tuple = OUTPUTS
    series: tuple = ()  # ((label, ((setting, value), ...)), ...)
    layer_target: object = 1  # 1, 2 or "both" for lambda_so
    sqrt_terms: bool = False
    name: str = "custom"
    description: str = ""

    def __post_init__(self):
        if self.variable not in VARIABLES:
            raise SweepSpecError(f"unknown sweep variable {self.variable!r}; choose from {', '.join(VARIABLES)}")
        if (self.range is None) == (not self.values):
            raise SweepSpecError("give exactly one of range=(start, stop, count) or a discrete values list")
        if self.range is not None:
            if len(self.range) != 3:
                raise SweepSpecError("range must be (start, stop, count)")
            if int(self.range[2]) != self.range[2] or self.range[2] < 2:
                raise SweepSpecError(f"range count must be an integer >= 2, got {self.range[2]}")
        unknown = set(self.outputs) - set(OUTPUTS)
        if unknown:
            raise SweepSpecError(f"unknown outputs {sorted(unknown)}")
        if self.layer_target not in (1, 2, "both"):
            raise SweepSpecError(f"layer_target must be 1, 2 or 'both', got {self.layer_target!r}")

    def grid(self):
        if self.values:
            return list(self.values)
        start, stop, count = self.range
        return [float(v) for v in np.linspace(start, stop, int(count))]


# --- applying settings --------------------------------------------------------


def _material_pair(value):
    names = str(value).split("-")
    if len(names) == 1:
        names = names * 2
    if len(names) != 2:
        raise SweepSpecError(f"material pair must be 'a' or 'a-b', got {value!r}")
    return [get_material(n) for n in names]


def apply_setting(scn: Scenario, key: str, value, spec: Optional[SweepSpec] = None) -> Scenario:
    length = scn.cavity.length
    target = spec.layer_target if spec is not None else 1
    if key == "time":
        return replace(scn, t=float(value) * scn.resolved_t_max())
    if key == "t_seconds":
        return replace(scn, t=float(value))
    if key == "d2_over_L":
        return scn.with_positions((1.0 - value) * length, value * length)
    if key == "d1_over_L":
        return scn.with_positions(value * length, (1.0 - value) * length)
    if key == "d_separation":
        return scn.with_positions(0.5 * length * (1.0 - value), 0.5 * length * (1.0 + value))
    if key == "lambda_so":
        layers = (1, 2) if target == "both" else (target,)
        for k in layers:
            old = scn.layer1.material if k == 1 else scn.layer2.material
            scn = scn.with_material(k, replace(old, soi_strength=float(value)))
        return scn
    if key == "delta_phi":
        return scn.with_electron(1, angle=float(value)).with_electron(2, angle=0.0)
    if key == "n_max":
        return replace(scn, cavity=replace(scn.cavity, n_max=int(value)))
    if key == "material_pair":
        m1, m2 = _material_pair(value)
        return scn.with_material(1, m1).with_material(2, m2)
    if key in ("material1", "material2"):
        return scn.with_material(int(key[-1]), get_material(value))
    if key in ("energy1", "energy2"):
        return scn.with_electron(int(key[-1]), energy=float(value))
    if key in ("soi1", "soi2"):
        k = int(key[-1])
        old = scn.layer1.material if k == 1 else scn.layer2.material
        return scn.with_material(k, replace(old, soi_strength=float(value)))
    raise SweepSpecError(f"unknown setting {key!r}")


# --- evaluation -----------------------------------------------------------------


def evaluate(scn: Scenario, outputs=OUTPUTS, sqrt_terms=False) -> dict:
    """Observables of one scenario as a CSV-ready dict (floats or None)."""
    row = {c: None for c in CSV_COLUMNS[2:]}
    coeffs = compute_coefficients(scn.layer1, scn.layer2, scn.cavity, scn.q)
    if "propagators" in outputs:
        row.update(delta11=coeffs.delta11, delta22=coeffs.delta22, delta12=coeffs.delta12)
    occupation = scn.t**2 * coeffs.max_population_rate()
    if occupation >= ERROR_THRESHOLD:
        row["status"] = "inadmissible"
        return row
    row["status"] = "warn_perturbative" if occupation >= WARN_THRESHOLD else "ok"
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rho = rho_total(coeffs, scn.t)
    s1 = entropy_exact(reduce(rho, 1))
    s2 = entropy_exact(reduce(rho, 2))
    if "entropy1" in outputs:
        row["S1_nats"] = s1
    if "entropy2" in outputs:
        row["S2_nats"] = s2
    if "mutual_information" in outputs:
        row["mutual_info"] = mutual_information(s1, s2)
    if "purity" in outputs:
        row["purity"] = purity(rho)
    allowed = selection_rule_allows(scn.layer1, scn.layer2)
    if "concurrence" in outputs:
        row["concurrence"] = concurrence_from_coefficients(coeffs, scn.t) if allowed else 0.0
    if sqrt_terms and allowed:
        e1, e2 = scn.layer1.electron, scn.layer2.electron
        row["sqrt_minus"], row["sqrt_plus"] = concurrence_sqrt_terms(
            e1.energy,
            scn.layer1.mass,
            e2.energy,
            scn.layer2.mass,
            e1.angle - e2.angle,
            coeffs.zeta * scn.t**2 * coeffs.delta12,
        )
    return row


@dataclass
class Verdict:
    claim: str
    passed: bool
    detail: str = ""


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list
    verdicts: list = field(default_factory=list)

    @property
    def columns(self):
        extra = []
        if self.spec.series:
            extra.append("series")
        if self.spec.sqrt_terms:
            extra += ["sqrt_minus", "sqrt_plus"]
        return CSV_COLUMNS + tuple(extra)

    def series_rows(self, label=None):
        return [r for r in self.rows if r.get("series") == label]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_cell(row.get(c)) for c in self.columns])
        return buf.getvalue()


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(value).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Evaluate every (series, grid point) pair in order. Verdicts are left empty."""
    rows = []
    series = spec.series or ((None, ()),)
    for label, overrides in series:
        base = spec.base
        for key, value in overrides:
            base = apply_setting(base, key, value, spec)
        for value in spec.grid():
            row = {"sweep_var": spec.variable, "value": value, "series": label}
            try:
                scn = apply_setting(base, spec.variable, value, spec)
                row.update(evaluate(scn, spec.outputs, spec.sqrt_terms))
            except DomainError as err:
                row.update({c: None for c in CSV_COLUMNS[2:]})
                row["status"] = f"domain_error: {err}".replace(",", ";")
            rows.append(row)
    return SweepResult(spec, rows)


# --- figure recipes -------------------------------------------------------------


def reference_scenario(material1="graphene", material2="graphene", energy=1e-3, n_max=1) -> Scenario:
    """Two layers at d1/L = 0.4, d2/L = 0.6 in a 1 um cavity, t = t_max = 6.6e-10 s."""
    length = 1e-6
    z1, z2 = 0.4 * length, 0.6 * length
    return Scenario(
        layer1=LayerConfig(get_material(material1), ElectronState(energy=energy), z1),
        layer2=LayerConfig(get_material(material2), ElectronState(energy=energy), z2),
        cavity=CavityGeometry(length=length, z1=z1, z2=z2, n_max=n_max),
        t=REFERENCE_T_MAX,
        t_max=REFERENCE_T_MAX,
    )


def _nmax_series(prefix="", extra=()):
    return tuple((f"{prefix}n_max={n}", tuple(extra) + (("n_max", n),)) for n in (1, 2, 3))


def _recipes(points):
    grid = lambda a, b: (a, b, points)
    knee_grid = lambda a, b: (a, b, max(points, 301))
    return {
        "fig2": lambda: SweepSpec(
            "time",
            reference_scenario(),
            range=grid(0.0, 1.0),
            series=_nmax_series("graphene ", (("material_pair", "graphene"),))
            + _nmax_series("silicene ", (("material_pair", "silicene"),)),
            description="Entropy vs t/t_max for graphene and silicene pairs, n_max = 1..3.",
        ),
        "fig3a": lambda: SweepSpec(
            "d2_over_L",
            reference_scenario("silicene", "silicene"),
            range=grid(0.05, 0.95),
            series=_nmax_series(),
            description="Entropy vs d2/L with d1/L = 1 - d2/L, silicene, n_max = 1..3.",
        ),
        "fig3b": lambda: SweepSpec(
            "time",
            reference_scenario("silicene", "silicene"),
            range=grid(0.0, 1.0),
            series=tuple((f"separation={d}L", (("d_separation", d),)) for d in (0.2, 0.4, 0.6)),
            description="Entropy vs t/t_max for three symmetric separations, silicene, n_max = 1.",
        ),
        "fig4": lambda: SweepSpec(
            "lambda_so",
            reference_scenario(),
            range=grid(0.0, 0.1),
            layer_target="both",
            series=tuple((name, (("material_pair", name),)) for name in BUILTIN_PRESETS),
            description="Entropy vs spin-orbit strength (both layers) for each material's velocity.",
        ),
        "fig5": lambda: SweepSpec(
            "time",
            reference_scenario(),
            range=grid(0.0, 1.0),
            series=tuple((name, (("material_pair", name),)) for name in BUILTIN_PRESETS),
            description="Entropy vs t/t_max for the four materials, n_max = 1.",
        ),
        "fig6": lambda: SweepSpec(
            "delta_phi",
            reference_scenario("graphene", "silicene"),
            range=grid(0.0, math.pi),
            series=_nmax_series(),
            description="Concurrence vs relative momentum angle, graphene-silicene, n_max = 1..3.",
        ),
        "fig7": lambda: SweepSpec(
            "lambda_so",
            _knee_base("silicene"),
            range=knee_grid(0.0, 3 * _knee_threshold("silicene")),
            sqrt_terms=True,
            description="Concurrence and its two square-root terms vs graphene spin-orbit strength, "
            "silicene partner, dphi = pi/2.",
        ),
        "fig8": lambda: SweepSpec(
            "lambda_so",
            _knee_base("germanene"),
            range=knee_grid(0.0, 3 * _knee_threshold("stanene")),
            series=tuple((name, (("material2", name),)) for name in ("germanene", "stanene")),
            sqrt_terms=True,
            description="Concurrence vs graphene spin-orbit strength against germanene and stanene.",
        ),
        "fig9": lambda: SweepSpec(
            "d1_over_L",
            reference_scenario("graphene", "silicene"),
            range=grid(0.05, 0.95),
            series=_nmax_series(),
            description="Concurrence vs d1/L with d2 = L - d1, graphene-silicene, n_max = 1..3.",
        ),
    }


# energies for the saturation scans: weak (graphene) layer and partner
KNEE_ENERGY_WEAK = 0.01
KNEE_ENERGY_PARTNER = 0.1


def _knee_base(partner) -> Scenario:
    scn = reference_scenario("graphene", partner)
    scn = scn.with_electron(1, energy=KNEE_ENERGY_WEAK, angle=math.pi / 2)
    return scn.with_electron(2, energy=KNEE_ENERGY_PARTNER, angle=0.0)


def _knee_threshold(partner) -> float:
    return KNEE_ENERGY_WEAK * get_material(partner).soi_strength / KNEE_ENERGY_PARTNER


RECIPE_NAMES = ("fig2", "fig3a", "fig3b", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9")


def figure_recipe(name: str, points: int = DEFAULT_POINTS, t_max: Optional[float] = None) -> SweepSpec:
    recipes = _recipes(points)
    if name not in recipes:
        raise SweepSpecError(f"unknown recipe {name!r}; available: {', '.join(RECIPE_NAMES)}")
    spec = recipes[name]()
    if t_max is not None:
        spec = replace(spec, base=replace(spec.base, t_max=t_max, t=t_max))
    return replace(spec, name=name)


# --- soft verdicts --------------------------------------------------------------


def _column(rows, key):
    return np.array([np.nan if r.get(key) is None else r[key] for r in rows], dtype=float)


def _grid_step(spec):
    start, stop, count = spec.range
    return (stop - start) / (count - 1)


def _labels(result):
    return [label for label, _ in result.spec.series] or [None]


def verdict_nmax_increasing(result, key) -> Verdict:
    """Entropy grows with n_max at every grid point where all series are admissible."""
    by_n = {}
    for label in _labels(result):
        n = int(label.split("n_max=")[1])
        group = label.split("n_max=")[0]
        by_n.setdefault(group, {})[n] = _column(result.series_rows(label), key)
    bad = 0
    total = 0
    for group in by_n.values():
        ns = sorted(group)
        for a, b in zip(ns, ns[1:]):
            mask = np.isfinite(group[a]) & np.isfinite(group[b]) & (group[a] > 0)
            total += int(mask.sum())
            bad += int(np.sum(group[b][mask] < group[a][mask]))
    return Verdict(
        f"{key} non-decreasing in n_max",
        bad == 0 and total > 0,
        f"{bad} of {total} compared points decrease",
    )


def verdict_peak_at(result, key, target, label=None, tolerance=None) -> Verdict:
    rows = result.series_rows(label)
    x = _column(rows, "value")
    y = _column(rows, key)
    tolerance = _grid_step(result.spec) if tolerance is None else tolerance
    peak = float(x[int(np.nanargmax(y))])
    return Verdict(
        f"{key} maximum at {target:.6g} (series {label})",
        abs(peak - target) <= tolerance * (1 + 1e-9),
        f"peak at {peak:.6g}, tolerance {tolerance:.3g}",
    )


def verdict_monotone(result, key, label, increasing=True) -> Verdict:
    y = _column(result.series_rows(label), key)
    y = y[np.isfinite(y)]
    d = np.diff(y)
    ok = bool(np.all(d >= 0)) if increasing else bool(np.all(d <= 0))
    return Verdict(
        f"{key} {'increasing' if increasing else 'decreasing'} along the sweep (series {label})",
        ok,
        f"{int(np.sum(d < 0 if increasing else d > 0))} reversals over {len(d)} steps",
    )


def verdict_ordering(result, key, labels, at="last") -> Verdict:
    finals = []
    for label in labels:
        y = _column(result.series_rows(label), key)
        finals.append(float(y[-1] if at == "last" else y[at]))
    ok = all(a > b for a, b in zip(finals, finals[1:]))
    detail = ", ".join(f"{l}={v:.4g}" for l, v in zip(labels, finals))
    return Verdict(f"{key} ordering {' > '.join(labels)} at the final point", ok, detail)


def verdict_knee(result, label, weak_layer, strong_layer) -> Verdict:
    rows = result.series_rows(label)
    crit = saturation_threshold(weak_layer, strong_layer)
    knee = knee_location(_column(rows, "value"), _column(rows, "concurrence"))
    rel = abs(knee - crit) / crit
    return Verdict(
        f"concurrence knee within 10% of eps_w*lambda_s/eps_s (series {label})",
        rel <= 0.1,
        f"knee at {knee:.6g}, threshold {crit:.6g}, relative offset {rel:.3g}",
    )


def recipe_verdicts(result: SweepResult) -> list:
    name = result.spec.name
    base = result.spec.base
    if name == "fig2":
        return [verdict_nmax_increasing(result, "S2_nats")]
    if name == "fig3a":
        return [
            verdict_nmax_increasing(result, "S2_nats"),
            verdict_peak_at(result, "S2_nats", 0.5, "n_max=1"),
        ]
    if name == "fig3b":
        labels = [label for label, _ in result.spec.series]
        return [verdict_ordering(result, "S2_nats", labels)]
    if name == "fig4":
        return [verdict_monotone(result, "S2_nats", label) for label in _labels(result)]
    if name == "fig5":
        return [verdict_ordering(result, "S2_nats", list(_labels(result)))]
    if name == "fig6":
        return [verdict_peak_at(result, "concurrence", math.pi / 2, label) for label in _labels(result)]
    if name == "fig7":
        return [verdict_knee(result, None, base.layer1, base.layer2)]
    if name == "fig8":
        out = []
        for label, overrides in result.spec.series:
            strong = apply_setting(base, *overrides[0]).layer2
            out.append(verdict_knee(result, label, base.layer1, strong))
        return out
    if name == "fig9":
        return [
            verdict_peak_at(result, "concurrence", 0.5, "n_max=1"),
            verdict_nmax_increasing(result, "concurrence"),
        ]
    return []


def run_recipe(name: str, points: int = DEFAULT_POINTS, t_max: Optional[float] = None) -> SweepResult:
    result = run_sweep(figure_recipe(name, points, t_max))
    result.verdicts = recipe_verdicts(result)
    return result


def describe_spec(spec: SweepSpec) -> dict:
    """JSON-ready description of a spec, including the materials actually used."""

    def layer(cfg):
        return {
            "material": asdict(cfg.material),
            "electron": asdict(cfg.electron),
            "position_m": cfg.position,
        }

    base = spec.base
    return {
        "name": spec.name,
        "description": spec.description,
        "variable": spec.variable,
        "range": list(spec.range) if spec.range else None,
        "values": list(spec.values) or None,
        "series": [[label, [list(o) for o in overrides]] for label, overrides in spec.series],
        "layer_target": spec.layer_target,
        "base": {
            "layer1": layer(base.layer1),
            "layer2": layer(base.layer2),
            "cavity": asdict(base.cavity),
            "cavity_volume_m3": base.cavity.volume,
            "t_s": base.t,
            "t_max_s": base.resolved_t_max(),
            "q": base.q if np.ndim(base.q) == 0 else list(base.q),
        },
        "presets": {n: {**asdict(p.material), "source": p.source} for n, p in BUILTIN_PRESETS.items()},
    }
