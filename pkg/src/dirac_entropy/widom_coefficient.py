"""Widom area coefficient from the transverse profile of two-edge section traces.

With rotational symmetry about the normal direction the surface coefficient
reduces to ``M = (2 pi)^-1 int_0^inf M(s) s ds`` where ``M(s) = m_pair(s) / 2``.

Sign convention for the quadratic test function: ``f0(t) = -t^2/2`` is
convex-negative, so with ``a`` the line symbol the two-edge value
``m_pair(f0) = +int_0^inf u |k(u)|^2 du`` is nonnegative. ``coefficient(f0)``
is therefore nonnegative and the positivity bound reads
``M_kappa >= k0 M(f0)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dirac_symbols import DiracParams, LineSymbol
from .entropy_functions import RenyiOrder, as_order, concavity_constant
from .errors import CoverageError, UnsupportedOrderError
from .wiener_hopf import DEFAULT_SECTION, SectionSpec, solve_section

TAIL_FLOOR = 1e-10
COVERAGE_TOL = 5e-3


def smallest_feasible_s(params: DiracParams, spec: SectionSpec = DEFAULT_SECTION, floor: float = 1e-3) -> float:
    """Smallest transverse radius whose section fits the size budget."""
    min_rate = spec.decay_lengths / (spec.n_max * spec.dx_max)
    if params.mu >= min_rate:
        return floor
    return max(floor, math.sqrt(min_rate**2 - params.mu**2) * (1 + 1e-9))


def default_s_grid(params: DiracParams, spec: SectionSpec = DEFAULT_SECTION) -> np.ndarray:
    """Graded transverse grid.

    12 log-spaced points up to 0.3, steps of 0.1 up to 3, then a geometric
    tail (ratio 1.08) until the cutoff falls below ``TAIL_FLOOR``.
    """
    cutoff = params.cutoff
    s_lo = smallest_feasible_s(params, spec)
    s_max = cutoff.tail_length(TAIL_FLOOR)
    head = np.geomspace(s_lo, 0.3, 12)
    mid = np.arange(0.4, 3.0 + 1e-9, 0.1)
    tail = [3.0]
    while tail[-1] < s_max:
        tail.append(tail[-1] * 1.08)
    grid = np.concatenate([head, mid, tail[1:]])
    return np.unique(np.round(grid, 12))


@dataclass(frozen=True)
class Profile:
    """Two-edge values ``m_pair(s)`` with self-convergence errors."""

    s: np.ndarray
    values: np.ndarray
    errors: np.ndarray

    def rows(self) -> list:
        return [[float(a), float(b), float(c)] for a, b, c in zip(self.s, self.values, self.errors)]


def _line(params, s, axis):
    return LineSymbol(float(s), params, transverse_axis=axis)


def solve_lines(lines, spec: SectionSpec = DEFAULT_SECTION, jobs: int = 1):
    """Solve sections for several lines, optionally in worker processes (ordered results)."""
    lines = list(lines)
    if jobs is None or jobs <= 1 or len(lines) < 2:
        return [solve_section(line, spec) for line in lines]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        sols = list(pool.map(solve_section, lines, [spec] * len(lines)))
    from .wiener_hopf import remember_section

    for sol in sols:
        remember_section(sol, spec)
    return sols


def m_profile(params: DiracParams, func, s_grid=None, spec: SectionSpec = DEFAULT_SECTION, transverse_axis: int = 0, jobs: int = 1) -> Profile:
    """Two-edge profile ``m_pair(s)`` of test function `func` along the transverse grid."""
    s = default_s_grid(params, spec) if s_grid is None else np.asarray(s_grid, dtype=float)
    sols = solve_lines([_line(params, x, transverse_axis) for x in s], spec, jobs)
    vals = np.array([sol.m_pair(func) for sol in sols])
    return Profile(s, vals[:, 0], vals[:, 1])


@dataclass(frozen=True)
class Integral:
    value: float
    error: float
    head: float
    innermost_fraction: float


def integrate_mkappa(profile: Profile, cutoff=None, check_coverage: bool = True) -> Integral:
    """``(2 pi)^-1 int_0^inf (m_pair(s)/2) s ds`` by trapezoid on the graded grid.

    The head ``[0, s_0]`` uses the model ``A log(1/s) + B`` fitted to the first
    three points. The error adds the trapezoid estimate (full versus
    every-other-point rule, divided by three), the head model uncertainty and
    the propagated per-point errors.

    Raises
    ------
    CoverageError
        If the last profile point still carries more than 0.5% of the integral.
    """
    s = np.asarray(profile.s, dtype=float)
    m = 0.5 * np.asarray(profile.values, dtype=float)
    e = 0.5 * np.asarray(profile.errors, dtype=float)
    if s.size < 3 or np.any(np.diff(s) <= 0):
        raise ValueError("profile needs at least three strictly increasing radii")
    g = m * s
    full = float(np.trapezoid(g, s))
    idx = np.arange(0, s.size, 2)
    if idx[-1] != s.size - 1:
        idx = np.append(idx, s.size - 1)
    coarse = float(np.trapezoid(g[idx], s[idx]))
    quad_err = abs(full - coarse) / 3.0
    s0 = s[0]
    if s0 > 0:
        A, B = np.polyfit(np.log(1 / s[:3]), m[:3], 1)
        head = 0.5 * s0 * s0 * (A * (math.log(1 / s0) + 0.5) + B)
        head_err = abs(head - 0.5 * s0 * s0 * m[0])
    else:
        head, head_err = 0.0, 0.0
    point_err = float(np.trapezoid(e * s, s)) + 0.5 * s0 * s0 * e[0]
    total = full + head
    innermost = abs(0.5 * (g[0] + g[1]) * (s[1] - s[0]) + head)
    scale = max(abs(total), 1e-300)
    if check_coverage and total != 0:
        tail = abs(g[-1]) * max(s[-1] - s[-2], 1.0)
        if tail > COVERAGE_TOL * scale:
            raise CoverageError(f"profile tail at s = {s[-1]:.3g} carries {tail / scale:.2%} of the integral")
    two_pi = 2 * math.pi
    return Integral(total / two_pi, (quad_err + head_err + point_err) / two_pi, head / two_pi, innermost / scale if total else 0.0)


@dataclass
class WidomResult:
    kappa: float
    epsilon: float
    mass: float
    cutoff: dict
    profile: Profile
    coefficient: float
    coefficient_error: float
    f0_profile: Profile
    f0_coefficient: float
    f0_error: float
    k0: float | None
    positivity_ok: bool | None = None
    report: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "epsilon": self.epsilon,
            "mass": self.mass,
            "cutoff": self.cutoff,
            "m_profile": self.profile.rows(),
            "f0_profile": self.f0_profile.rows(),
            "coefficient": self.coefficient,
            "coefficient_error": self.coefficient_error,
            "f0_coefficient": self.f0_coefficient,
            "f0_error": self.f0_error,
            "k0": self.k0,
            "positivity_ok": self.positivity_ok,
            "positivity": self.report,
        }


def widom_coefficient(
    params: DiracParams,
    order,
    s_grid=None,
    spec: SectionSpec = DEFAULT_SECTION,
    transverse_axis: int = 0,
    jobs: int = 1,
) -> WidomResult:
    """Compute ``M_kappa`` (and ``M(f0)``) with error bars and run the positivity check when applicable."""
    order = as_order(order)
    s = default_s_grid(params, spec) if s_grid is None else np.asarray(s_grid, dtype=float)
    solve_lines([_line(params, x, transverse_axis) for x in s], spec, jobs)
    prof = m_profile(params, order, s, spec, transverse_axis)
    prof0 = m_profile(params, "f0", s, spec, transverse_axis)
    main = integrate_mkappa(prof, params.cutoff)
    base = integrate_mkappa(prof0, params.cutoff)
    k0 = concavity_constant(order) if order.kappa <= 2 else None
    result = WidomResult(
        order.kappa, params.epsilon, params.mass, params.cutoff.to_dict(), prof,
        main.value, main.error, prof0, base.value, base.error, k0,
    )
    if 0 < order.kappa <= 2:
        result.report = positivity_check(result)
        result.positivity_ok = result.report["ok"]
    return result


def positivity_check(result: WidomResult) -> dict:
    """Check ``M_kappa > 0``, ``M(f0) > 0`` and ``M_kappa >= k0 M(f0)`` within error bars.

    Violations are reported (``ok: False``), not raised.

    Raises
    ------
    UnsupportedOrderError
        For ``kappa`` outside ``(0, 2]``.
    """
    kappa = result.kappa
    if not 0 < kappa <= 2:
        raise UnsupportedOrderError(f"positivity check needs kappa in (0, 2], got {kappa}")
    k0 = concavity_constant(RenyiOrder(kappa)) if result.k0 is None else result.k0
    err = result.coefficient_error + k0 * result.f0_error
    bound_margin = result.coefficient - k0 * result.f0_coefficient
    positive_margin = result.coefficient - result.coefficient_error
    checks = {
        "f0_positive": result.f0_coefficient - result.f0_error > 0,
        "bound": bound_margin >= -err,
        "coefficient_positive": positive_margin > 0 if kappa < 2 else result.coefficient >= -result.coefficient_error,
    }
    return {
        "k0": k0,
        "bound_margin": bound_margin,
        "combined_error": err,
        "coefficient_margin": positive_margin,
        "f0_coefficient": result.f0_coefficient,
        **checks,
        "ok": all(checks.values()),
    }


def area_prediction(coefficient: float, epsilon: float, boundary_area: float) -> float:
    """``epsilon^-2 M vol_2(boundary)``, the predicted coefficient of ``L^2``."""
    return coefficient * boundary_area / epsilon**2
