"""Built-in 2D materials and the optional user preset file.

Only the graphene and stanene spin-orbit strengths are reference values; the
silicene and germanene strengths and all four Fermi velocities are
literature-typical placeholders (``source = "placeholder"``).
"""

import os
from dataclasses import dataclass

from .core import Material
from .errors import ConfigError, DomainError
from .sections import parse_sections, to_float

PRESET_ENV_VAR = "CAVENT_PRESETS"


@dataclass(frozen=True)
class MaterialPreset:
    material: Material
    source: str = "placeholder"

    @property
    def name(self) -> str:
        return self.material.name


BUILTIN_PRESETS = {
    p.name: p
    for p in (
        MaterialPreset(Material("graphene", 1.0e6, 1.0e-6), "reference soi; placeholder velocity"),
        MaterialPreset(Material("silicene", 5.5e5, 3.9e-3), "placeholder"),
        MaterialPreset(Material("germanene", 5.2e5, 4.3e-2), "placeholder"),
        MaterialPreset(Material("stanene", 4.8e5, 1.0e-1), "reference soi; placeholder velocity"),
    )
}


def parse_preset_text(text: str) -> dict:
    """One ``[name]`` section per material with fermi_velocity, soi_strength and optional source."""
    fields = {}
    lines = {}
    for e in parse_sections(text):
        if e.key not in ("fermi_velocity", "soi_strength", "source"):
            raise ConfigError(f"unknown preset key {e.key!r} in [{e.section}]", line=e.line)
        fields.setdefault(e.section, {})[e.key] = e.value if e.key == "source" else to_float(e)
        lines.setdefault(e.section, e.line)
    out = {}
    for name, f in fields.items():
        missing = {"fermi_velocity", "soi_strength"} - set(f)
        if missing:
            raise ConfigError(f"preset {name!r} lacks {sorted(missing)}", line=lines[name])
        try:
            material = Material(name, f["fermi_velocity"], f["soi_strength"])
        except DomainError as err:
            raise ConfigError(str(err), line=lines[name]) from err
        out[name] = MaterialPreset(material, f.get("source", "user file"))
    return out


def load_presets(path=None, environ=None) -> dict:
    """Built-ins updated by the preset file at ``path`` or ``$CAVENT_PRESETS``."""
    environ = os.environ if environ is None else environ
    path = path or environ.get(PRESET_ENV_VAR)
    presets = dict(BUILTIN_PRESETS)
    if path:
        with open(path, encoding="utf-8") as fh:
            presets.update(parse_preset_text(fh.read()))
    return presets


def get_material(name: str, presets=None) -> Material:
    presets = BUILTIN_PRESETS if presets is None else presets
    try:
        return presets[name].material
    except KeyError:
        raise DomainError(f"unknown material {name!r}; available: {', '.join(sorted(presets))}") from None
