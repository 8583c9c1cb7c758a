"""Run configuration files.

Example::

    [cavity]
    length = 1e-6
    z1 = 0.4e-6
    z2 = 0.6e-6
    n_max = 1

    [layer1]
    material = graphene
    energy = 1e-3

    [layer2]
    material = silicene
    energy = 1e-3
    angle = 1.5708

    [time]
    t = 1e-10

Unknown sections or keys are errors. Every error carries the line number of
the offending entry.
"""

from dataclasses import asdict, dataclass
from typing import Optional

from .core import CavityGeometry, ElectronState, Material
from .density import LayerConfig
from .errors import ConfigError, DomainError
from .presets import BUILTIN_PRESETS
from .sections import parse_sections, to_bool, to_float, to_float_list, to_int

SCHEMA = {
    "cavity": {
        "length": to_float,
        "z1": to_float,
        "z2": to_float,
        "n_max": to_int,
        "light_speed": to_float,
        "mode_volume": to_float,
        "transverse_area": to_float,
        "normalized": to_bool,
    },
    "layer": {
        "material": str,
        "fermi_velocity": to_float,
        "soi_strength": to_float,
        "energy": to_float,
        "angle": to_float,
        "spin": to_int,
        "valley": to_int,
        "band": to_int,
    },
    "propagator": {"q": to_float, "q11": to_float, "q22": to_float, "q12": to_float},
    "time": {"t": to_float, "grid": to_float_list, "t_max": to_float},
    "units": {"system": str},
}


def _convert(entry):
    kind = "layer" if entry.section in ("layer1", "layer2") else entry.section
    if kind not in SCHEMA:
        raise ConfigError(
            f"unknown section [{entry.section}]; expected cavity, layer1, layer2, propagator, time, units",
            line=entry.line,
        )
    conv = SCHEMA[kind].get(entry.key)
    if conv is None:
        raise ConfigError(f"unknown key {entry.key!r} in [{entry.section}]", line=entry.line)
    if conv is str:
        return entry.value
    return conv(entry)


@dataclass(frozen=True)
class RunConfig:
    layer1: LayerConfig
    layer2: LayerConfig
    cavity: CavityGeometry
    q: tuple = (0.0, 0.0, 0.0)  # (q11, q22, q12)
    t: Optional[float] = None
    t_grid: Optional[tuple] = None  # (start, stop, count)
    t_max: Optional[float] = None
    units: str = "SI"

    def echo(self) -> dict:
        """Fully resolved configuration, defaults included."""

        def layer(cfg):
            return {"material": asdict(cfg.material), **asdict(cfg.electron), "position": cfg.position}

        return {
            "cavity": {**asdict(self.cavity), "volume": None if self.cavity.normalized else self.cavity.volume},
            "layer1": layer(self.layer1),
            "layer2": layer(self.layer2),
            "propagator": {"q11": self.q[0], "q22": self.q[1], "q12": self.q[2]},
            "time": {"t": self.t, "grid": list(self.t_grid) if self.t_grid else None, "t_max": self.t_max},
            "units": {"system": self.units},
        }


def _layer(name, values, lines, cavity, presets):
    def fail(msg, key=None):
        return ConfigError(f"[{name}] {msg}", line=lines.get(key, lines.get("__section__")))

    if "material" in values:
        if values["material"] not in presets:
            raise fail(
                f"unknown material {values['material']!r}; available: {', '.join(sorted(presets))}",
                "material",
            )
        base = presets[values["material"]].material
    elif {"fermi_velocity", "soi_strength"} <= set(values):
        base = None
    else:
        raise fail("needs a material preset or both fermi_velocity and soi_strength")
    try:
        material = Material(
            values.get("material", name),
            values.get("fermi_velocity", base.fermi_velocity if base else None),
            values.get("soi_strength", base.soi_strength if base else None),
        )
    except DomainError as err:
        key = "fermi_velocity" if "fermi" in str(err) else "soi_strength"
        raise fail(str(err), key) from err
    if "energy" not in values:
        raise fail("missing electron energy")
    kwargs = {k: values[k] for k in ("energy", "angle", "spin", "valley", "band") if k in values}
    try:
        electron = ElectronState(**kwargs)
    except DomainError as err:
        key = next((k for k in kwargs if k in str(err)), "energy")
        raise fail(str(err), key) from err
    position = cavity.z1 if name == "layer1" else cavity.z2
    return LayerConfig(material, electron, position)


def parse_config(text: str, presets=None) -> RunConfig:
    presets = BUILTIN_PRESETS if presets is None else presets
    values = {}
    lines = {}
    for entry in parse_sections(text):
        values.setdefault(entry.section, {})[entry.key] = _convert(entry)
        sec_lines = lines.setdefault(entry.section, {"__section__": entry.line})
        sec_lines[entry.key] = entry.line

    for required in ("cavity", "layer1", "layer2"):
        if required not in values:
            raise ConfigError(f"missing section [{required}]")

    cav = values["cavity"]
    cav_lines = lines["cavity"]
    units = values.get("units", {}).get("system", "SI")
    if units not in ("SI", "normalized"):
        raise ConfigError(
            f"units.system must be SI or normalized, got {units!r}", line=lines["units"]["system"]
        )
    if "normalized" in cav and (cav["normalized"] != (units == "normalized")) and "units" in values:
        raise ConfigError(
            "cavity.normalized contradicts units.system", line=cav_lines["normalized"]
        )
    normalized = cav.get("normalized", units == "normalized")
    if normalized and "mode_volume" in cav:
        raise ConfigError(
            "normalized units and mode_volume are mutually exclusive", line=cav_lines["mode_volume"]
        )
    for key in ("length", "z1", "z2"):
        if key not in cav:
            raise ConfigError(f"[cavity] missing {key}", line=cav_lines["__section__"])
    try:
        cavity = CavityGeometry(**{k: v for k, v in cav.items() if k != "normalized"}, normalized=normalized)
    except DomainError as err:
        field = next((k for k in cav if k in str(err)), None)
        raise ConfigError(f"[cavity] {err}", line=cav_lines.get(field, cav_lines["__section__"])) from err

    layer1 = _layer("layer1", values["layer1"], lines["layer1"], cavity, presets)
    layer2 = _layer("layer2", values["layer2"], lines["layer2"], cavity, presets)

    prop = values.get("propagator", {})
    q_all = prop.get("q", 0.0)
    q = tuple(prop.get(k, q_all) for k in ("q11", "q22", "q12"))
    for k, v in zip(("q11", "q22", "q12"), q):
        if v < 0:
            raise ConfigError(f"[propagator] {k} must be >= 0", line=lines["propagator"].get(k, lines["propagator"].get("q")))

    tsec = values.get("time", {})
    tlines = lines.get("time", {})
    if "t" in tsec and "grid" in tsec:
        raise ConfigError("give either time.t or time.grid, not both", line=tlines["grid"])
    if "t" in tsec and tsec["t"] < 0:
        raise ConfigError("time.t must be >= 0", line=tlines["t"])
    grid = None
    if "grid" in tsec:
        g = tsec["grid"]
        if len(g) != 3 or int(g[2]) != g[2] or g[2] < 2 or g[0] < 0:
            raise ConfigError("time.grid must be start, stop, count with count >= 2", line=tlines["grid"])
        grid = (g[0], g[1], int(g[2]))
    if "t_max" in tsec and not tsec["t_max"] > 0:
        raise ConfigError("time.t_max must be > 0", line=tlines["t_max"])
    return RunConfig(
        layer1=layer1,
        layer2=layer2,
        cavity=cavity,
        q=q,
        t=tsec.get("t"),
        t_grid=grid,
        t_max=tsec.get("t_max"),
        units="normalized" if normalized else "SI",
    )


def load_config(path, presets=None) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), presets)
