"""Lattice area law for cubes against the Widom prediction.

Run with ``python3 demos/area_law_sweep.py``; writes area_law.svg here.
"""

from __future__ import annotations

import warnings
from pathlib import Path

from dirac_entropy import DiracParams
from dirac_entropy.area_law_harness import compare_report, format_report, run_sweep, sweep_svg
from dirac_entropy.lattice_model import TorusLattice
from dirac_entropy.widom_coefficient import widom_coefficient


def main():
    params = DiracParams(0.0, 2.0)
    with warnings.catch_warnings():
        # epsilon = 2h is coarser than the default resolution rule
        warnings.simplefilter("ignore")
        record = run_sweep(params, TorusLattice(36.0, 36), "cube", range(4, 11), 1.0, allow_coarse=True)
    widom = widom_coefficient(params, 1.0)
    print(format_report(compare_report(record, widom)))
    out = Path(__file__).with_name("area_law.svg")
    out.write_text(sweep_svg(record))
    print(f"plot written to {out}")


if __name__ == "__main__":
    main()
