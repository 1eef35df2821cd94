"""Renyi entropy functions and their concavity constants."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import UnsupportedOrderError

KAPPA_SWITCH = 1e-6


@dataclass(frozen=True)
class RenyiOrder:
    """Renyi index ``kappa > 0``; ``kappa = 1`` is the von Neumann entropy."""

    kappa: float

    def __post_init__(self):
        k = float(self.kappa)
        if not np.isfinite(k) or k <= 0:
            raise ValueError(f"Renyi order must be positive, got {self.kappa!r}")
        object.__setattr__(self, "kappa", k)

    @property
    def holder_exponent(self) -> float:
        return min(self.kappa, 1.0)

    @property
    def is_von_neumann(self) -> bool:
        return abs(self.kappa - 1.0) <= KAPPA_SWITCH


def as_order(order) -> RenyiOrder:
    return order if isinstance(order, RenyiOrder) else RenyiOrder(order)


def eta(order, t):
    """Renyi entropy function, extended by zero outside ``(0, 1)``.

    Parameters
    ----------
    order : RenyiOrder or float
    t : float or array_like

    Returns
    -------
    float or ndarray
        Same shape as `t`.
    """
    kappa = as_order(order).kappa
    t_arr = np.asarray(t, dtype=float)
    out = np.zeros(t_arr.shape)
    inside = (t_arr > 0) & (t_arr < 1)
    x = t_arr[inside]
    if abs(kappa - 1.0) <= KAPPA_SWITCH:
        out[inside] = -x * np.log(x) - (1 - x) * np.log1p(-x)
    else:
        # t^k + (1-t)^k - 1, accurate near both endpoints
        lo = np.minimum(x, 1 - x)
        excess = lo**kappa + np.expm1(kappa * np.log1p(-lo))
        out[inside] = np.log1p(excess) / (1 - kappa)
    if np.ndim(t) == 0:
        return float(out)
    return out


def f0(t):
    """The quadratic test function ``-t^2/2`` of the Berezin lower bound."""
    t = np.asarray(t, dtype=float)
    return -0.5 * t * t


def eta_second_derivative(order, t):
    """Closed-form second derivative of ``eta`` on ``(0, 1)``.

    Uses ``eta'' [t^k + (1-t)^k]^2 = -k [t(1-t)]^(k-2) - k/(1-k) [t^(k-1) - (1-t)^(k-1)]^2``.
    """
    kappa = as_order(order).kappa
    t = np.asarray(t, dtype=float)
    u = 1 - t
    if kappa == 1.0:
        return -1.0 / (t * u)
    lt, lu = np.log(t), np.log1p(-t)
    norm = np.exp(kappa * lt) + np.exp(kappa * lu)
    diff = np.expm1((kappa - 1) * lt) - np.expm1((kappa - 1) * lu)
    rhs = -kappa * np.exp((kappa - 2) * (lt + lu)) - kappa / (1 - kappa) * diff**2
    return rhs / norm**2


def _concavity_grid(size: int = 120_000) -> np.ndarray:
    head = np.geomspace(1e-14, 0.25, size // 4)
    mid = 0.5 + np.geomspace(1e-12, 0.25, size // 8)
    grid = np.concatenate([head, mid, 1 - mid, 1 - head, np.linspace(0, 1, size // 2)[1:-1]])
    return np.unique(grid[(grid > 0) & (grid < 1)])


def concavity_constant(order) -> float:
    """Return ``k0 = -sup_{0<t<1} eta''(t)``.

    The supremum is located on a graded grid (refined near 0, 1/2 and 1) and
    polished with a bounded scalar maximization around the best grid node.

    Raises
    ------
    UnsupportedOrderError
        For ``kappa > 2``.
    """
    kappa = as_order(order).kappa
    if kappa > 2:
        raise UnsupportedOrderError(f"concavity constant is only available for kappa <= 2, got {kappa}")
    if kappa == 1.0:
        return 4.0
    grid = _concavity_grid()
    vals = eta_second_derivative(kappa, grid)
    i = int(np.argmax(vals))
    best = vals[i]
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(
            lambda x: -float(eta_second_derivative(kappa, x)),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-14},
        )
        best = max(best, -res.fun)
    return max(0.0, -float(best))
