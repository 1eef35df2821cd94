"""Matrix-valued Dirac symbols, cutoff functions and spin rotations.

Every symbol here has the form ``1/2 (1 + H/|H|) phi`` with ``H`` a Hermitian
Clifford combination, so its eigenvalues are ``{0, 0, phi, phi}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AccuracyError, PreconditionError, SingularPointError
from .spin_algebra import IDENTITY, SPIN, _GAMMA

CUTOFF_KINDS = ("exponential", "gaussian", "rational")

# gamma^b gamma^0 for b = 1, 2, 3
_ALPHA = np.stack([_GAMMA[b] @ _GAMMA[0] for b in (1, 2, 3)])
_BETA = _GAMMA[0]


@dataclass(frozen=True)
class CutoffSpec:
    """Ultraviolet cutoff ``phi`` on ``[0, inf)`` with ``phi(0) = 1`` and ``0 <= phi <= 1``.

    Parameters
    ----------
    kind : {"exponential", "gaussian", "rational"}
        ``exp(-t)``, ``exp(-t^2)`` or ``(1 + t)^(-rho)``.
    rho : float, optional
        Decay exponent of the rational family; must exceed 3.
    scale : float
        Support stretch, ``phi(t) -> phi(t / scale)``.
    """

    kind: str = "exponential"
    rho: float | None = None
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in CUTOFF_KINDS:
            raise ValueError(f"unknown cutoff kind {self.kind!r}; choose from {CUTOFF_KINDS}")
        if self.kind == "rational":
            if self.rho is None or not float(self.rho) > 3:
                raise ValueError(f"rational cutoff needs rho > 3, got {self.rho!r}")
            object.__setattr__(self, "rho", float(self.rho))
        elif self.rho is not None:
            raise ValueError(f"rho is only meaningful for the rational cutoff, got kind {self.kind!r}")
        if not float(self.scale) > 0:
            raise ValueError(f"cutoff scale must be positive, got {self.scale!r}")
        object.__setattr__(self, "scale", float(self.scale))

    def __call__(self, t):
        t = np.abs(np.asarray(t, dtype=float)) / self.scale
        if self.kind == "exponential":
            out = np.exp(-t)
        elif self.kind == "gaussian":
            out = np.exp(-t * t)
        else:
            out = np.exp(-self.rho * np.log1p(t))
        return float(out) if out.ndim == 0 else out

    def tail_length(self, tol: float = 1e-13) -> float:
        """Smallest ``t`` with ``phi(t) <= tol``."""
        if self.kind == "exponential":
            t = -math.log(tol)
        elif self.kind == "gaussian":
            t = math.sqrt(-math.log(tol))
        else:
            t = tol ** (-1.0 / self.rho) - 1.0
        return t * self.scale

    def tail_integral(self, a: float) -> float:
        """Upper bound for ``int_a^inf phi(t) dt``."""
        a = max(a, 0.0) / self.scale
        if self.kind == "exponential":
            val = math.exp(-a)
        elif self.kind == "gaussian":
            val = 0.5 * math.sqrt(math.pi) * math.erfc(a)
        else:
            val = (1 + a) ** (1 - self.rho) / (self.rho - 1)
        return val * self.scale

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.rho is not None:
            out["rho"] = self.rho
        if self.scale != 1.0:
            out["scale"] = self.scale
        return out

    @classmethod
    def from_dict(cls, data: dict) -> CutoffSpec:
        return cls(kind=data.get("kind", "exponential"), rho=data.get("rho"), scale=data.get("scale", 1.0))


@dataclass(frozen=True)
class DiracParams:
    """Mass, regularization length and cutoff (units with the length scale set to one)."""

    mass: float = 0.0
    epsilon: float = 0.0
    cutoff: CutoffSpec = field(default_factory=CutoffSpec)

    def __post_init__(self):
        for name in ("mass", "epsilon"):
            val = float(getattr(self, name))
            if not np.isfinite(val) or val < 0:
                raise ValueError(f"{name} must be a nonnegative number, got {getattr(self, name)!r}")
            object.__setattr__(self, name, val)
        if isinstance(self.cutoff, dict):
            object.__setattr__(self, "cutoff", CutoffSpec.from_dict(self.cutoff))

    @property
    def mu(self) -> float:
        """The dimensionless combination ``epsilon * mass`` seen by the rescaled symbol."""
        return self.epsilon * self.mass

    def to_dict(self) -> dict:
        return {"mass": self.mass, "epsilon": self.epsilon, "cutoff": self.cutoff.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> DiracParams:
        return cls(
            mass=data.get("mass", 0.0),
            epsilon=data.get("epsilon", 0.0),
            cutoff=CutoffSpec.from_dict(data.get("cutoff", {})),
        )


def _as_vectors(k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    if k.shape[-1] != 3:
        raise ValueError(f"momenta must have a trailing axis of length 3, got shape {k.shape}")
    return k


def _projector_symbol(v, mass_term, weight, singular):
    """``1/2 (1 + (v.alpha + mass_term * (-gamma^0)) / norm) * weight`` for stacks of ``v``."""
    norm = np.sqrt(np.sum(v * v, axis=-1) + mass_term * mass_term)
    zero = norm == 0
    if np.any(zero) and singular == "raise":
        raise SingularPointError("symbol evaluated at its singular point (zero momentum, zero mass)")
    safe = np.where(zero, 1.0, norm)
    h = np.einsum("...b,bij->...ij", v / safe[..., None], _ALPHA) - (mass_term / safe)[..., None, None] * _BETA
    out = 0.5 * (IDENTITY + h)
    return out * np.asarray(weight)[..., None, None]


def momentum_symbol(params: DiracParams, k, regularized: bool = True, singular: str = "raise") -> np.ndarray:
    """Projection symbol onto negative-frequency spinors at momentum ``k``.

    Parameters
    ----------
    params : DiracParams
    k : array_like, shape (..., 3)
    regularized : bool
        Multiply by ``phi(epsilon * sqrt(k^2 + m^2))``.
    singular : {"raise", "convention"}
        At ``k = 0`` with ``m = 0`` either raise or return ``1/2 phi(0)``.

    Returns
    -------
    ndarray, shape (..., 4, 4)
    """
    k = _as_vectors(k)
    m = params.mass
    weight = 1.0
    if regularized:
        weight = params.cutoff(params.epsilon * np.sqrt(np.sum(k * k, axis=-1) + m * m))
    return _projector_symbol(k, np.full(k.shape[:-1], m), weight, singular)


def rescaled_symbol(params: DiracParams, xi, singular: str = "raise") -> np.ndarray:
    """Symbol in the rescaled variable ``xi = epsilon k``; the limit symbol when ``epsilon * m = 0``."""
    xi = _as_vectors(xi)
    mu = params.mu
    weight = params.cutoff(np.sqrt(np.sum(xi * xi, axis=-1) + mu * mu))
    return _projector_symbol(xi, np.full(xi.shape[:-1], mu), weight, singular)


def _rotation_to_axis(axis: int) -> np.ndarray:
    """Proper rotation taking the transverse representative ``(1, 0, 0)`` to ``e_{axis+1}``."""
    if axis == 0:
        return np.eye(3)
    if axis == 1:
        return np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    raise ValueError(f"transverse axis must be 0 or 1, got {axis!r}")


@dataclass(frozen=True)
class LineSymbol:
    """Restriction ``t -> A(xi_hat + t e_3)`` with ``|xi_hat| = s``.

    The transverse vector is ``(s, 0, 0)`` for ``transverse_axis = 0`` and
    ``(0, s, 0)`` for ``transverse_axis = 1``.
    """

    s: float
    params: DiracParams
    transverse_axis: int = 0

    def __post_init__(self):
        s = float(self.s)
        if not np.isfinite(s) or s < 0:
            raise ValueError(f"transverse radius must be nonnegative, got {self.s!r}")
        object.__setattr__(self, "s", s)
        _rotation_to_axis(self.transverse_axis)

    @property
    def decay_rate(self) -> float:
        """``sqrt(s^2 + mu^2)``, the distance of the line from the singular point."""
        return math.hypot(self.s, self.params.mu)

    @property
    def is_singular(self) -> bool:
        return self.decay_rate == 0.0

    def points(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        xi = np.zeros(t.shape + (3,))
        xi[..., self.transverse_axis] = self.s
        xi[..., 2] = t
        return xi

    def __call__(self, t, singular: str = "raise") -> np.ndarray:
        return rescaled_symbol(self.params, self.points(t), singular=singular)

    def radius(self, t):
        t = np.asarray(t, dtype=float)
        return np.sqrt(self.decay_rate**2 + t * t)

    def eigenvalue(self, t):
        """Nonzero eigenvalue ``phi(sqrt(s^2 + t^2 + mu^2))`` (multiplicity two)."""
        return self.params.cutoff(self.radius(t))

    def components(self, t):
        """Scalar coefficients ``(g_id, g_perp, g_axis)`` of the Clifford decomposition.

        ``A(t) = g_id 1 + g_perp (s alpha_axis - mu gamma^0) + g_axis alpha_3`` with
        ``g_id = phi/2`` and ``g_perp = phi/(2r)`` even in ``t`` and ``g_axis = t phi/(2r)`` odd.
        """
        r = self.radius(t)
        phi = self.params.cutoff(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            half_over_r = np.where(r > 0, 0.5 * phi / r, 0.0)
        return 0.5 * phi, half_over_r, np.asarray(t) * half_over_r


def line_symbol(line: LineSymbol, t, singular: str = "raise") -> np.ndarray:
    """Evaluate the line restriction of the rescaled symbol at ``t``."""
    return line(t, singular=singular)


@dataclass(frozen=True)
class ScalarLineSymbol:
    """Test symbol ``a(t) = amplitude * exp(-t^2 / width^2) * 1_4`` with closed-form transforms."""

    amplitude: float = 1.0
    width: float = 1.0

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.profile(t)[..., None, None] * IDENTITY

    def profile(self, t):
        return self.amplitude * np.exp(-((np.asarray(t, dtype=float) / self.width) ** 2))

    def kernel_profile(self, u):
        """``(2 pi)^-1 int exp(iut) a(t) dt`` for the scalar profile."""
        u = np.asarray(u, dtype=float)
        w = self.width
        return self.amplitude * w / (2 * math.sqrt(math.pi)) * np.exp(-(w * u) ** 2 / 4)

    def tail_length(self, tol: float = 1e-13) -> float:
        return self.width * math.sqrt(max(-math.log(tol / max(abs(self.amplitude), 1e-300)), 0.0))


def _spin_exp(axis: int, angle: float) -> np.ndarray:
    # exp(i angle S/2) with S = diag(sigma, sigma); S^2 = 1
    return math.cos(angle / 2) * IDENTITY + 1j * math.sin(angle / 2) * SPIN[axis]


def rotation_spin_matrix(rotation, tol: float = 1e-10) -> np.ndarray:
    """Spinor transformation ``Q`` in SU(4) with ``Q (R v).gamma Q^-1 = v.gamma``.

    ``Q`` commutes with ``gamma^0``. Built from the Euler decomposition
    ``R = Rz(a) Ry(b) Rz(c)``; each factor contributes ``exp(i angle S_axis / 2)``
    and the factors compose in reverse order.

    Raises
    ------
    PreconditionError
        If ``rotation`` is not a proper orthogonal 3x3 matrix.
    """
    r = np.asarray(rotation, dtype=float)
    if r.shape != (3, 3):
        raise PreconditionError(f"rotation must be 3x3, got shape {r.shape}")
    orth = np.max(np.abs(r.T @ r - np.eye(3)))
    det = np.linalg.det(r)
    if orth > tol or abs(det - 1) > tol:
        raise PreconditionError(f"not a proper rotation: |R^T R - 1| = {orth:.2e}, det = {det:.12f}")
    if r[2, 2] > 1 - 1e-9:
        a, b, c = math.atan2(r[1, 0], r[0, 0]), 0.0, 0.0
    elif r[2, 2] < -1 + 1e-9:
        a, b, c = math.atan2(-r[1, 0], -r[0, 0]), math.pi, 0.0
    else:
        a = math.atan2(r[1, 2], r[0, 2])
        b = math.atan2(math.hypot(r[0, 2], r[1, 2]), r[2, 2])
        c = math.atan2(r[2, 1], -r[2, 0])
    q = _spin_exp(2, c) @ _spin_exp(1, b) @ _spin_exp(2, a)
    if np.allclose(r, np.eye(3), atol=tol):
        return IDENTITY.copy()
    return q


def covariance_residual(params: DiracParams, rotation, xi) -> float:
    """``max |A(xi) - Q A(R xi) Q^H|`` over a stack of momenta."""
    q = rotation_spin_matrix(rotation)
    xi = _as_vectors(xi)
    lhs = rescaled_symbol(params, xi)
    rhs = q @ rescaled_symbol(params, xi @ np.asarray(rotation, dtype=float).T) @ q.conj().T
    return float(np.max(np.abs(lhs - rhs)))


def symbol_check(params: DiracParams, samples: int = 1000, rotations: int = 100, seed: int = 0) -> dict:
    """Run the symbol invariant suite on random momenta; returns worst residuals."""
    rng = np.random.default_rng(seed)
    k = rng.normal(size=(samples, 3)) * 2.0
    p_plain = momentum_symbol(replace_mass(params, max(params.mass, 0.0)), k, regularized=False)
    p_reg = momentum_symbol(params, k)
    phi = params.cutoff(params.epsilon * np.sqrt(np.sum(k * k, axis=1) + params.mass**2))
    expected = np.stack([np.zeros_like(phi), np.zeros_like(phi), phi, phi], axis=1)
    from scipy.spatial.transform import Rotation

    rots = Rotation.random(rotations, random_state=seed).as_matrix()
    xi = rng.normal(size=(rotations, 3))
    cov = max(covariance_residual(params, rots[i], xi[i : i + 1]) for i in range(rotations))
    anti = 0.0
    for i in range(4):
        for j in range(4):
            acomm = _GAMMA[i] @ _GAMMA[j] + _GAMMA[j] @ _GAMMA[i]
            anti = max(anti, float(np.max(np.abs(acomm - 2 * (i == j) * (1 if i == 0 else -1) * IDENTITY))))
    return {
        "anticommutator": anti,
        "idempotency": float(np.max(np.abs(p_plain @ p_plain - p_plain))),
        "trace": float(np.max(np.abs(np.trace(p_plain, axis1=1, axis2=2) - 2))),
        "eigenvalues": float(np.max(np.abs(np.linalg.eigvalsh(p_reg) - expected))),
        "covariance": cov,
    }


def replace_mass(params: DiracParams, mass: float) -> DiracParams:
    return DiracParams(mass=mass, epsilon=params.epsilon, cutoff=params.cutoff)


def check_tail(cutoff: CutoffSpec, tol: float, limit: float = 1e6) -> float:
    """Tail length for `tol`, raising when it exceeds `limit` (slowly decaying rational cutoffs)."""
    t = cutoff.tail_length(tol)
    if not np.isfinite(t) or t > limit:
        raise AccuracyError(f"cutoff {cutoff.to_dict()} needs |t| > {t:.3g} for tail {tol:g}; limit {limit:g}")
    return t
