"""Lattice entropy sweeps, quadratic fits and comparison with the Widom prediction."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dirac_symbols import DiracParams
from .entropy_functions import as_order
from .errors import ComparisonError, FitError, SizeError
from .lattice_model import (
    DENSE_CAP,
    Region,
    TorusLattice,
    build_kernel,
    correlation_matrix,
    entanglement_entropy,
)

DEFAULT_TOLERANCE = 0.20
STRUCTURED_RESIDUAL = 1e-3


@dataclass(frozen=True)
class AreaFit:
    c2: float
    c1: float
    c0: float
    residual: float

    def to_dict(self) -> dict:
        return {"c2": self.c2, "c1": self.c1, "c0": self.c0, "residual": self.residual}


@dataclass
class SweepRecord:
    params: DiracParams
    lattice: TorusLattice
    region_kind: str
    kappa: float
    L_values: list
    entropies: list
    clip_counts: list
    boundary_areas: list = field(default_factory=list)
    fit: AreaFit | None = None

    @property
    def unit_area(self) -> float:
        """Boundary area of the unit-size region in site units (``6`` for a cube, ``4 pi`` for a ball)."""
        return self.boundary_areas[-1] / self.L_values[-1] ** 2

    def rows(self) -> list:
        return [[L, S, c] for L, S, c in zip(self.L_values, self.entropies, self.clip_counts)]


def _check_L(L_values) -> list:
    L = [float(v) for v in L_values]
    if len(L) < 3:
        raise ValueError(f"need at least three sizes, got {len(L)}")
    if any(b <= a for a, b in zip(L, L[1:])):
        raise ValueError(f"sizes must be strictly increasing, got {L}")
    return L


def max_size(region_kind: str, cap: int = DENSE_CAP) -> float:
    """Largest integer size whose region fits the dense eigensolver cap."""
    size = 1
    while 4 * len(Region.scaled(region_kind, size + 1)) <= cap:
        size += 1
    return size


def run_sweep(
    params: DiracParams,
    lattice: TorusLattice,
    region_kind: str,
    L_values,
    order,
    allow_coarse: bool = False,
    allow_small_margin: bool = False,
) -> SweepRecord:
    """Entropy of the re-rasterized region at each size in `L_values` (sites).

    Raises
    ------
    ValueError
        Fewer than three sizes, or sizes not strictly increasing.
    SizeError
        The largest region exceeds the dense eigensolver cap.
    """
    L = _check_L(L_values)
    order = as_order(order)
    for size in L:
        if 4 * len(Region.scaled(region_kind, size)) > DENSE_CAP:
            raise SizeError(
                f"size {size:g} exceeds the dense cap {DENSE_CAP}; largest allowed {region_kind} size is "
                f"{max_size(region_kind)}"
            )
    kernel = build_kernel(params, lattice, allow_coarse=allow_coarse)
    record = SweepRecord(params, lattice, region_kind, order.kappa, L, [], [])
    for size in L:
        region = Region.scaled(region_kind, size)
        corr = correlation_matrix(kernel, region, allow_small_margin=allow_small_margin)
        record.entropies.append(entanglement_entropy(corr, order))
        record.clip_counts.append(corr.clip_count)
        record.boundary_areas.append(region.boundary_area)
    record.fit = fit_area_coefficient(record)
    return record


def fit_area_coefficient(record_or_L, entropies=None) -> AreaFit:
    """Least-squares fit ``S = c2 L^2 + c1 L + c0``.

    Accepts a :class:`SweepRecord` or explicit ``(L_values, entropies)``. The
    residual is the RMS misfit divided by ``max |S|``.

    Raises
    ------
    FitError
        Fewer than three distinct sizes (rank-deficient design).
    """
    if isinstance(record_or_L, SweepRecord):
        L, S = record_or_L.L_values, record_or_L.entropies
    else:
        L, S = record_or_L, entropies
    L = np.asarray(L, dtype=float)
    S = np.asarray(S, dtype=float)
    design = np.vstack([L**2, L, np.ones_like(L)]).T
    if np.linalg.matrix_rank(design) < 3:
        raise FitError(f"design matrix is rank deficient for sizes {L.tolist()}")
    coef, *_ = np.linalg.lstsq(design, S, rcond=None)
    resid = S - design @ coef
    scale = float(np.max(np.abs(S))) or 1.0
    residual = float(np.sqrt(np.mean(resid**2)) / scale)
    if L.size > 4 and residual > STRUCTURED_RESIDUAL and np.all(L > 0):
        # a quadratic residual always alternates sign, so test the enhanced term directly
        extended = np.column_stack([design, L * np.log(L)])
        ext, *_ = np.linalg.lstsq(extended, S, rcond=None)
        ext_residual = float(np.sqrt(np.mean((S - extended @ ext) ** 2)) / scale)
        if ext_residual < 0.1 * residual:
            warnings.warn(
                "structured residual in the quadratic fit; an L log L term explains it", stacklevel=2
            )
    return AreaFit(float(coef[0]), float(coef[1]), float(coef[2]), residual)


def predicted_c2(coefficient: float, epsilon: float, spacing: float, unit_area: float) -> float:
    """Coefficient of ``L^2`` (``L`` in sites) predicted by ``epsilon^-2 M vol_2``."""
    return coefficient * unit_area * spacing**2 / epsilon**2


def compare_report(record: SweepRecord, widom, tolerance: float = DEFAULT_TOLERANCE) -> dict:
    """Compare the fitted ``c2`` with the Widom prediction.

    `widom` is a WidomResult or a plain coefficient (then no parameter check).

    Raises
    ------
    ComparisonError
        If the sweep and the coefficient use different parameters or orders.
    """
    fit = record.fit or fit_area_coefficient(record)
    if hasattr(widom, "coefficient"):
        mismatched = [
            name
            for name, a, b in (
                ("kappa", record.kappa, widom.kappa),
                ("epsilon", record.params.epsilon, widom.epsilon),
                ("mass", record.params.mass, widom.mass),
                ("cutoff", record.params.cutoff.to_dict(), widom.cutoff),
            )
            if (a != b if not isinstance(a, float) else not math.isclose(a, b, rel_tol=1e-12))
        ]
        if mismatched:
            raise ComparisonError(f"sweep and coefficient disagree on {', '.join(mismatched)}")
        coefficient, coeff_err = widom.coefficient, widom.coefficient_error
    else:
        coefficient, coeff_err = float(widom), 0.0
    pred = predicted_c2(coefficient, record.params.epsilon, record.lattice.spacing, record.unit_area)
    pred_err = predicted_c2(coeff_err, record.params.epsilon, record.lattice.spacing, record.unit_area)
    gap = abs(fit.c2 - pred) / pred if pred != 0 else math.inf
    return {
        "params": record.params.to_dict(),
        "lattice": record.lattice.to_dict(),
        "region": {"kind": record.region_kind, "unit_area": record.unit_area},
        "kappa": record.kappa,
        "rows": record.rows(),
        "fit": fit.to_dict(),
        "prediction": pred,
        "prediction_error": pred_err,
        "coefficient": coefficient,
        "relative_gap": gap,
        "tolerance": tolerance,
        "pass": bool(gap <= tolerance),
    }


def format_report(report: dict) -> str:
    fit = report["fit"]
    lines = [
        f"kappa = {report['kappa']:g}, epsilon = {report['params']['epsilon']:g}, mass = {report['params']['mass']:g}",
        "   L        S",
    ]
    lines += [f"{L:4g}  {S:12.6f}" for L, S, _ in report["rows"]]
    lines += [
        f"fit: c2 = {fit['c2']:.6g}, c1 = {fit['c1']:.6g}, c0 = {fit['c0']:.6g}, residual = {fit['residual']:.2e}",
        f"prediction c2 = {report['prediction']:.6g} +- {report['prediction_error']:.2g}",
        f"relative gap = {report['relative_gap']:.3%} (tolerance {report['tolerance']:.0%}): "
        + ("PASS" if report["pass"] else "FAIL"),
    ]
    return "\n".join(lines)


def sweep_csv(record: SweepRecord) -> str:
    return "L,S\n" + "".join(f"{L!r},{S!r}\n" for L, S in zip(record.L_values, record.entropies))


def sweep_svg(record: SweepRecord, width: int = 480, height: int = 360) -> str:
    """Static SVG plot of ``S`` against ``L^2`` with the fitted curve."""
    fit = record.fit or fit_area_coefficient(record)
    x = np.asarray(record.L_values) ** 2
    y = np.asarray(record.entropies)
    lf = np.linspace(record.L_values[0], record.L_values[-1], 60)
    yf = fit.c2 * lf**2 + fit.c1 * lf + fit.c0
    x_lo, x_hi = 0.0, float(x.max()) * 1.05
    y_lo, y_hi = min(0.0, float(y.min()), float(yf.min())), max(float(y.max()), float(yf.max())) * 1.05
    pad = 50

    def px(v):
        return pad + (v - x_lo) / (x_hi - x_lo) * (width - 2 * pad)

    def py(v):
        return height - pad - (v - y_lo) / (y_hi - y_lo) * (height - 2 * pad)

    path = " ".join(f"{'M' if i == 0 else 'L'}{px(a * a):.2f},{py(b):.2f}" for i, (a, b) in enumerate(zip(lf, yf)))
    dots = "".join(f'<circle cx="{px(a):.2f}" cy="{py(b):.2f}" r="3.5" fill="#1f4e79"/>' for a, b in zip(x, y))
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">'
        f'<rect width="100%" height="100%" fill="white"/>'
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>'
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>'
        f'<text x="{width / 2}" y="{height - 12}" text-anchor="middle" font-size="13">L^2 (sites^2)</text>'
        f'<text x="14" y="{height / 2}" text-anchor="middle" font-size="13" transform="rotate(-90 14 {height / 2})">S</text>'
        f'<path d="{path}" fill="none" stroke="#c0392b" stroke-width="1.5"/>{dots}'
        f'<text x="{pad + 8}" y="{pad + 4}" font-size="12">c2 = {fit.c2:.4g}</text></svg>\n'
    )
