"""Command-line entry point ``cavent``.

Exit codes: 0 success, 1 usage or config error, 2 physics-domain error,
3 verification failure. Diagnostics go to stderr; results are JSON on stdout.
"""

import argparse
import json
import logging
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import sweep as sweep_mod
from .config import RunConfig, load_config
from .density import compute_coefficients, propagators, rho_total
from .errors import ConfigError, DomainError, InvalidStateError, NumericError, SweepSpecError
from .measures import concurrence_report, entropy_report
from .oracle import dyson_rho, run_verification
from .presets import PRESET_ENV_VAR, load_presets

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _clean(obj):
    """Make an object JSON-safe: NaN/inf become null, numpy scalars become Python."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def _emit(payload, out=None):
    out = out or sys.stdout
    out.write(json.dumps(_clean(payload), indent=2) + "\n")


def _config(args) -> RunConfig:
    presets = load_presets(args.presets)
    return load_config(args.config, presets)


def _times(args, cfg: RunConfig):
    if args.t is not None:
        return [args.t]
    if cfg.t is not None:
        return [cfg.t]
    if cfg.t_grid is not None:
        start, stop, count = cfg.t_grid
        return [float(v) for v in np.linspace(start, stop, count)]
    raise UsageError("no time given: pass --t or set [time] t or grid")


def cmd_propagator(args):
    cfg = _config(args)
    d11, d22, d12 = propagators(cfg.layer1, cfg.layer2, cfg.cavity, cfg.q)
    _emit({"config": cfg.echo(), "result": {"delta11": d11, "delta22": d22, "delta12": d12}})


def cmd_rho(args):
    cfg = _config(args)
    coeffs = compute_coefficients(cfg.layer1, cfg.layer2, cfg.cavity, cfg.q)
    results = []
    for t in _times(args, cfg):
        if args.oracle:
            rho = dyson_rho(cfg.layer1, cfg.layer2, cfg.cavity, t, cfg.q)
        else:
            rho = rho_total(coeffs, t, diagonal_approximation=args.diagonal)
        results.append(rho.to_dict())
    _emit({"config": cfg.echo(), "coefficients": coeffs.__dict__, "result": results})


def cmd_entropy(args):
    cfg = _config(args)
    coeffs = compute_coefficients(cfg.layer1, cfg.layer2, cfg.cavity, cfg.q)
    reports = [
        {"t": t, **entropy_report(coeffs, t, layer=args.layer).to_dict()} for t in _times(args, cfg)
    ]
    _emit({"config": cfg.echo(), "result": reports if len(reports) > 1 else reports[0]})


def cmd_concurrence(args):
    cfg = _config(args)
    reports = [
        {"t": t, **concurrence_report(cfg.layer1, cfg.layer2, cfg.cavity, t, cfg.q).to_dict()}
        for t in _times(args, cfg)
    ]
    _emit({"config": cfg.echo(), "result": reports if len(reports) > 1 else reports[0]})


def _spec_from_config(args):
    cfg = _config(args)
    if args.variable is None or (args.range is None and args.values is None):
        raise UsageError("a config sweep needs --variable and --range or --values")
    base = sweep_mod.Scenario(
        cfg.layer1, cfg.layer2, cfg.cavity, t=cfg.t or 0.0, q=cfg.q, t_max=cfg.t_max
    )
    if args.variable != "time" and cfg.t is None:
        raise UsageError("set [time] t for sweeps over anything but time")
    values = ()
    if args.values is not None:
        values = tuple(v if args.variable == "material_pair" else float(v) for v in args.values)
    rng = None if args.range is None else (args.range[0], args.range[1], int(args.range[2]))
    return sweep_mod.SweepSpec(
        args.variable, base, range=rng, values=values, layer_target=args.layer_target, name="config"
    )


def cmd_sweep(args):
    if (args.recipe is None) == (args.config is None):
        raise UsageError("give exactly one of --recipe or --config")
    if args.recipe:
        spec = sweep_mod.figure_recipe(args.recipe, args.points, args.t_max)
    else:
        spec = _spec_from_config(args)
    result = sweep_mod.run_sweep(spec)
    result.verdicts = sweep_mod.recipe_verdicts(result)
    text = result.to_csv()
    out = Path(args.out)
    out.write_bytes(text.encode("utf-8"))
    meta = {
        "spec": sweep_mod.describe_spec(spec),
        "csv": str(out),
        "rows": len(result.rows),
        "verdicts": [v.__dict__ for v in result.verdicts],
    }
    Path(f"{out}.meta.json").write_text(json.dumps(_clean(meta), indent=2) + "\n", encoding="utf-8")
    _emit(meta)


def cmd_verify(args):
    report = run_verification(args.seed, args.cases)
    if args.out:
        Path(args.out).write_text(json.dumps(_clean(report), indent=2) + "\n", encoding="utf-8")
    _emit(report)
    if not report["passed"]:
        failed = [c["check"] for c in report["checks"] if not c["passed"]]
        print(f"verification failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_presets(args):
    presets = load_presets(args.presets)
    _emit(
        {
            name: {
                "fermi_velocity": p.material.fermi_velocity,
                "soi_strength": p.material.soi_strength,
                "source": p.source,
            }
            for name, p in presets.items()
        }
    )


def cmd_recipes(args):
    _emit({name: sweep_mod.figure_recipe(name, 2).description for name in sweep_mod.RECIPE_NAMES})


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cavent", description="Photon-mediated entanglement of 2D layers in a cavity.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log diagnostics to stderr")
    parser.add_argument(
        "--presets", default=None, help=f"material preset file (default: ${PRESET_ENV_VAR} if set)"
    )
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def point_command(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="run configuration file")
        p.add_argument("--t", type=float, default=None, help="evolution time in s (overrides the config)")
        p.set_defaults(func=func)
        return p

    point_command("propagator", cmd_propagator, "photon propagators Delta11, Delta22, Delta12")
    p = point_command("rho", cmd_rho, "two-layer density matrix")
    p.add_argument("--diagonal", action="store_true", help="drop the band coherences")
    p.add_argument("--oracle", action="store_true", help="build by explicit operator sums instead")
    p = point_command("entropy", cmd_entropy, "entanglement entropy report")
    p.add_argument("--layer", type=int, choices=(1, 2), default=2)
    point_command("concurrence", cmd_concurrence, "concurrence report")

    p = sub.add_parser("sweep", help="parameter sweep to CSV")
    p.add_argument("--recipe", choices=sweep_mod.RECIPE_NAMES)
    p.add_argument("--config")
    p.add_argument("--variable", choices=sweep_mod.VARIABLES)
    p.add_argument("--range", nargs=3, type=float, metavar=("START", "STOP", "COUNT"))
    p.add_argument("--values", nargs="+")
    p.add_argument("--layer-target", type=lambda s: s if s == "both" else int(s), default=1)
    p.add_argument("--points", type=int, default=sweep_mod.DEFAULT_POINTS)
    p.add_argument("--t-max", type=float, default=None, help="override t_max in s")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the oracle suites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cases", type=int, default=500)
    p.add_argument("--out", default=None, help="also write the report here")
    p.set_defaults(func=cmd_verify)

    sub.add_parser("presets", help="list material presets").set_defaults(func=cmd_presets)
    sub.add_parser("recipes", help="list figure recipes").set_defaults(func=cmd_recipes)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required; see --help")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
        warnings.simplefilter("default")
        code = args.func(args)
        return EXIT_OK if code is None else code
    except (UsageError, ConfigError, SweepSpecError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, InvalidStateError) as err:
        print(f"domain error: {err}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericError as err:
        print(f"numeric error: {err}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
