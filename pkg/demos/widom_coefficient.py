"""Widom coefficient of the regularized Dirac sea and its epsilon trend.

Each coefficient takes one to two minutes on one core.
Run with ``python3 demos/widom_coefficient.py``.
"""

from __future__ import annotations

from dirac_entropy import DiracParams
from dirac_entropy.widom_coefficient import widom_coefficient


def main():
    print(" eps      M_1            M(f0)      M_1 - 4 M(f0)   positivity")
    for eps in (0.2, 0.1, 0.05, 0.0):
        r = widom_coefficient(DiracParams(1.0, eps), 1.0)
        print(f"{eps:5.2f}  {r.coefficient:.6f} +- {r.coefficient_error:.1e}  {r.f0_coefficient:.6f}"
              f"  {r.coefficient - 4 * r.f0_coefficient:.6f}   {r.positivity_ok}")


if __name__ == "__main__":
    main()
