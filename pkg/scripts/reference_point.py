"""Population rate L2 and t_max^2 L2 for the two-graphene reference configuration.

The mode volume is a free choice, so it is swept over a few transverse
areas; the package default is (200 um)^2.
"""

import argparse
from dataclasses import replace

from cavent.density import compute_coefficients
from cavent.sweep import REFERENCE_T_MAX, reference_scenario

REFERENCE_L2 = 2.3e17  # s^-2
REFERENCE_OCCUPATION = 0.10


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--areas", type=float, nargs="+", default=[1e-8, 4e-8, 1e-7], help="transverse areas in m^2")
    parser.add_argument("--t-max", type=float, default=REFERENCE_T_MAX)
    args = parser.parse_args()

    base = reference_scenario("graphene", "graphene")
    print(f"graphene pair: eps = 1e-3 eV, lambda = 1e-6 eV, L = 1 um, d2/L = 0.6, n_max = 1, t_max = {args.t_max:g} s")
    print(f"{'area (m^2)':>12} {'V (m^3)':>10} {'L2 (s^-2)':>11} {'L2/ref':>10} {'t_max^2 L2':>11}")
    for area in args.areas:
        cavity = replace(base.cavity, transverse_area=area)
        c = compute_coefficients(base.layer1, base.layer2, cavity)
        occ = args.t_max**2 * c.l2
        print(f"{area:12.2e} {cavity.volume:10.2e} {c.l2:11.3e} {c.l2 / REFERENCE_L2:10.2f} {occ:11.3f}")
    print(f"reference: L2 ~ {REFERENCE_L2:g} s^-2, t_max^2 L2 ~ {REFERENCE_OCCUPATION}")


if __name__ == "__main__":
    main()
