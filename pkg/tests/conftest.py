import math

import numpy as np
import pytest

from cavent.core import CavityGeometry, ElectronState, Material
from cavent.density import LayerConfig


def make_layer(energy=0.1, soi=0.0, v=1e6, position=0.4, angle=0.0, spin=1, valley=1, band=1):
    return LayerConfig(
        Material("test", v, soi),
        ElectronState(energy=energy, angle=angle, spin=spin, valley=valley, band=band),
        position,
    )


def unit_cavity(z1=0.4, z2=0.6, n_max=1):
    """Normalized cavity of length 1 with c = 1: every prefactor is one."""
    return CavityGeometry(length=1.0, z1=z1, z2=z2, n_max=n_max, light_speed=1.0, normalized=True)


def layer_pair(z1=0.4, z2=0.6, **kw):
    a = {k[:-1]: v for k, v in kw.items() if k.endswith("1")}
    b = {k[:-1]: v for k, v in kw.items() if k.endswith("2")}
    return make_layer(position=z1, **a), make_layer(position=z2, **b)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_unitary(rng, n=2):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


TWO_PI = 2 * math.pi


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = []


def record_acceptance(name, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'} | {name} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
