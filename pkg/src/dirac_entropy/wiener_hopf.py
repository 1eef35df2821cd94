"""One-dimensional model operators: line kernels and finite sections.

For a line symbol ``a(t)`` the convolution kernel is
``k(u) = (2 pi)^-1 int exp(iut) a(t) dt``. Its truncation to ``[0, X]``,
discretized with midpoint weights, is the finite section ``C_X``. The
quantity ``tr f(C_X) - X rho`` converges to the sum of the two edge terms.

The Dirac line symbol is ``g_id 1 + g_perp (s alpha_axis - mu gamma^0) + g_axis alpha_3``.
The three Hermitian matrices involved generate a Clifford algebra whose
irreducible representation is two-dimensional, so the 4x4 problem splits into
two isospectral 2x2 blocks. In the block ``alpha_axis -> sigma_x``,
``-gamma^0 -> sigma_z``, ``alpha_3 -> sigma_y`` the block kernel is real and the
section matrix is real symmetric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .dirac_symbols import LineSymbol, ScalarLineSymbol, _ALPHA, _BETA
from .entropy_functions import RenyiOrder, as_order, eta, f0
from .errors import AccuracyError, SectionTooShortError, SizeError
from .spin_algebra import IDENTITY

TAIL_TOL = 1e-13
MAX_TAIL_LENGTH = 400.0
KERNEL_CHECK_TOL = 1e-9
DECAY_RATIO = 2e-2

_GL16 = np.polynomial.legendre.leggauss(16)
_GL12 = np.polynomial.legendre.leggauss(12)


@dataclass(frozen=True)
class SectionSpec:
    """Resolution policy for finite sections.

    ``X = max(x_min, decay_lengths / decay_rate)``; ``dx = max(dx, X / n_max)``.
    A spacing above `dx_max` means the line is too close to the singular
    point for the size budget.
    """

    dx: float = 0.05
    decay_lengths: float = 8.0
    x_min: float = 20.0
    n_max: int = 2000
    dx_max: float = 0.1

    def resolve(self, decay_rate: float) -> tuple[float, int]:
        """Return ``(X, n)`` with even ``n``."""
        if decay_rate <= 0:
            raise SectionTooShortError("line passes through the singular point; kernel does not decay")
        length = max(self.x_min, self.decay_lengths / decay_rate)
        dx = max(self.dx, length / self.n_max)
        if dx > self.dx_max * (1 + 1e-12):
            raise SectionTooShortError(
                f"decay rate {decay_rate:.3g} needs X = {length:.4g}, which exceeds "
                f"n_max * dx_max = {self.n_max * self.dx_max:g}"
            )
        n = int(math.ceil(length / dx / 2 - 1e-9)) * 2
        return n * dx, n

    def to_dict(self) -> dict:
        return {
            "dx": self.dx,
            "decay_lengths": self.decay_lengths,
            "x_min": self.x_min,
            "n_max": self.n_max,
            "dx_max": self.dx_max,
        }


DEFAULT_SECTION = SectionSpec()


# ---------------------------------------------------------------- quadrature


def _panel_nodes(breaks: np.ndarray, rule) -> tuple[np.ndarray, np.ndarray]:
    x, w = rule
    a, b = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (b - a)
    return (a + half * (x + 1)).ravel(), (half * w).ravel()


def _scale_of(line) -> float:
    if isinstance(line, ScalarLineSymbol):
        return line.width
    return line.params.cutoff.scale


def _tail_length(line) -> float:
    if isinstance(line, ScalarLineSymbol):
        t = line.tail_length(TAIL_TOL)
    else:
        cutoff = line.params.cutoff
        t = 1.0
        while cutoff.tail_integral(t) > TAIL_TOL * math.pi and t <= MAX_TAIL_LENGTH:
            t *= 1.25
        if t > MAX_TAIL_LENGTH:
            raise AccuracyError(
                f"cutoff {cutoff.to_dict()} leaves tail mass above {TAIL_TOL:g} beyond |t| = {MAX_TAIL_LENGTH:g}"
            )
    return max(t, 1.0)


def _subdivide(breaks: np.ndarray, width: float) -> np.ndarray:
    pieces = [breaks[:1]]
    for a, b in zip(breaks[:-1], breaks[1:]):
        m = max(1, int(math.ceil((b - a) / width)))
        pieces.append(np.linspace(a, b, m + 1)[1:])
    return np.concatenate(pieces)


def quadrature_nodes(line, u_max: float, refine: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes on ``[0, T]``.

    Panels are graded geometrically towards ``t = 0`` on the scale of the
    decay rate and have width at most ``pi / (2 u_max)`` further out.
    """
    T = _tail_length(line)
    scale = _scale_of(line)
    width = min(0.25 * scale, math.pi / (2 * max(u_max, 1e-12))) / refine
    rate = 0.0 if isinstance(line, ScalarLineSymbol) else line.decay_rate
    graded = np.array([0.0])
    if 0 < rate < 0.5 * scale:
        graded = np.concatenate([[0.0], rate / 8 * 2.0 ** np.arange(0, 64)])
        graded = graded[graded < 0.5 * scale]
        if refine > 1:
            graded = np.sort(np.concatenate([graded, 0.5 * (graded[:-1] + graded[1:])]))
        graded = _subdivide(graded, width)
    start = graded[-1]
    count = max(1, int(math.ceil((T - start) / width)))
    uniform = np.linspace(start, T, count + 1)
    x1, w1 = _panel_nodes(graded, _GL16) if graded.size > 1 else (np.empty(0), np.empty(0))
    x2, w2 = _panel_nodes(uniform, _GL12)
    return np.concatenate([x1, x2]), np.concatenate([w1, w2])


def _transform(values_even, values_odd, nodes, weights, u, chunk_elems: int = 4_000_000):
    """``(1/pi) int_0^T cos(ut) g dt`` for each even row and ``sin`` for each odd row."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    even = np.asarray(values_even) * weights
    odd = np.asarray(values_odd) * weights
    out_even = np.empty((even.shape[0], u.size))
    out_odd = np.empty((odd.shape[0], u.size))
    rows = max(1, chunk_elems // max(nodes.size, 1))
    for start in range(0, u.size, rows):
        phase = np.multiply.outer(u[start : start + rows], nodes)
        if even.shape[0]:
            out_even[:, start : start + rows] = even @ np.cos(phase).T
        if odd.shape[0]:
            out_odd[:, start : start + rows] = odd @ np.sin(phase).T
    return out_even / math.pi, out_odd / math.pi


def _line_coefficients(line, u, refine: int = 1):
    """Transforms ``(A, B, C)`` of the Clifford coefficients, or ``(A,)`` for scalar lines."""
    u = np.atleast_1d(np.abs(np.asarray(u, dtype=float)))
    nodes, weights = quadrature_nodes(line, float(np.max(u, initial=0.0)), refine)
    if isinstance(line, ScalarLineSymbol):
        (a,), _ = _transform(line.profile(nodes)[None], np.empty((0, nodes.size)), nodes, weights, u)
        return (a,)
    g_id, g_perp, g_axis = line.components(nodes)
    even_rows = [g_id]
    if line.decay_rate > 0:
        even_rows.append(g_perp)
    (even, odd) = _transform(np.array(even_rows), g_axis[None], nodes, weights, u)
    b = even[1] if line.decay_rate > 0 else np.zeros(u.size)
    return even[0], b, odd[0]


def _coefficients_checked(line, u):
    u = np.atleast_1d(np.asarray(u, dtype=float))
    coeffs = _line_coefficients(line, u)
    probe = np.unique(np.abs(u)[[0, u.size // 3, -1]]) if u.size else u
    fine = _line_coefficients(line, probe, refine=2)
    coarse = _line_coefficients(line, probe)
    ref = max(1.0, float(np.max(np.abs(coarse[0]))))
    err = max(float(np.max(np.abs(f - c))) for f, c in zip(fine, coarse))
    if err > KERNEL_CHECK_TOL * ref:
        raise AccuracyError(f"kernel quadrature not converged: panel-halving change {err:.2e}")
    return coeffs


def _sign_odd(u, c):
    return np.sign(u) * c


def block_kernel(line, u) -> np.ndarray:
    """Reduced kernel: real 2x2 blocks for Dirac lines, 1x1 for scalar lines; shape (len(u), d, d)."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    coeffs = _coefficients_checked(line, u)
    if isinstance(line, ScalarLineSymbol):
        return coeffs[0][:, None, None]
    a, b, c = coeffs
    c = _sign_odd(u, c)
    s, mu = line.s, line.params.mu
    out = np.empty((u.size, 2, 2))
    out[:, 0, 0] = a + mu * b
    out[:, 1, 1] = a - mu * b
    out[:, 0, 1] = s * b + c
    out[:, 1, 0] = s * b - c
    return out


def line_kernel(line, u) -> np.ndarray:
    """Convolution kernel ``k(u) = (2 pi)^-1 int exp(iut) a(t) dt`` as 4x4 matrices.

    Parameters
    ----------
    line : LineSymbol or ScalarLineSymbol
    u : float or array_like

    Returns
    -------
    ndarray
        Shape (4, 4) for scalar `u`, else (len(u), 4, 4).
    """
    scalar = np.ndim(u) == 0
    uu = np.atleast_1d(np.asarray(u, dtype=float))
    coeffs = _coefficients_checked(line, uu)
    if isinstance(line, ScalarLineSymbol):
        out = coeffs[0][:, None, None] * IDENTITY
    else:
        a, b, c = coeffs
        c = _sign_odd(uu, c)
        perp = line.s * _ALPHA[line.transverse_axis] - line.params.mu * _BETA
        out = a[:, None, None] * IDENTITY + b[:, None, None] * perp + 1j * c[:, None, None] * _ALPHA[2]
    return out[0] if scalar else out


def line_kernel_fft(line, u_step: float, count: int, oversample: int = 16) -> np.ndarray:
    """FFT cross-check of :func:`line_kernel` at ``u = j u_step``, ``0 <= j < count``.

    The symbol is sampled with spacing ``2 pi / (M u_step)`` on a periodic
    window; accuracy is limited by the window length and sampling of the
    symbol near its steepest point.
    """
    T = _tail_length(line)
    m = 1 << int(math.ceil(math.log2(max(2 * T * u_step / (2 * math.pi) * oversample, 2 * count, 16))))
    dt = 2 * math.pi / (m * u_step)
    t = (np.arange(m) - m // 2) * dt
    a = line(t) if isinstance(line, ScalarLineSymbol) else line(t, singular="convention")
    shifted = np.fft.ifftshift(a, axes=0)
    # sum_t exp(i u_j t) a(t) with u_j t_m = 2 pi j m / M
    k = np.fft.ifft(shifted, axis=0) * m * dt / (2 * math.pi)
    return k[:count]


# ---------------------------------------------------------------- sections


def _reduction(line):
    """(block dimension, multiplicity) of the spin reduction."""
    if isinstance(line, ScalarLineSymbol):
        return 1, 4
    return 2, 2


def assemble_section(table: np.ndarray, n: int, dx: float, stride: int = 1) -> np.ndarray:
    """Block Toeplitz matrix ``[k(x_i - x_j) dx]`` from a table ``k(j dx0)``, ``j >= 0``.

    Negative offsets use ``k(-u) = k(u)^H``. `stride` subsamples the table.
    """
    tab = table[: stride * n : stride]
    d = tab.shape[-1]
    idx = np.subtract.outer(np.arange(n), np.arange(n))
    blocks = tab[np.abs(idx)]
    neg = idx < 0
    blocks[neg] = np.conj(np.swapaxes(blocks[neg], -1, -2))
    mat = (blocks * dx).transpose(0, 2, 1, 3).reshape(n * d, n * d)
    return 0.5 * (mat + np.conj(mat.T))


def _eigvalsh(mat):
    return np.linalg.eigvalsh(mat)


@dataclass(frozen=True, eq=False)
class SectionSolution:
    """Spectra of a finite section and its two self-convergence companions."""

    line: object
    X: float
    n: int
    dx: float
    multiplicity: int
    eigenvalues: np.ndarray
    eigenvalues_half_length: np.ndarray
    eigenvalues_coarse: np.ndarray
    decay_ratio: float

    def trace(self, f, which: str = "main") -> float:
        w = {"main": self.eigenvalues, "half": self.eigenvalues_half_length, "coarse": self.eigenvalues_coarse}[which]
        return self.multiplicity * math.fsum(np.asarray(f(w), dtype=float))

    def m_pair(self, func) -> tuple[float, float]:
        """Two-edge value ``tr f(C_X) - X rho`` and its self-convergence error estimate."""
        f, key = resolve_function(func)
        rho = _density(self.line, key)
        main = self.trace(f) - self.X * rho
        half = self.trace(f, "half") - 0.5 * self.X * rho
        coarse = self.trace(f, "coarse") - self.X * rho
        return main, abs(main - half) + abs(main - coarse) / 3.0

    @property
    def spectrum_bounds(self) -> tuple[float, float]:
        return float(self.eigenvalues.min()), float(self.eigenvalues.max())


def resolve_function(func):
    """Map ``"f0"``, a Renyi order, or a callable to ``(callable, cache key)``."""
    if isinstance(func, str):
        if func == "f0":
            return f0, "f0"
        if func == "neg_f0":
            return (lambda t: -f0(t)), "neg_f0"
        raise ValueError(f"unknown test function {func!r}")
    if isinstance(func, (RenyiOrder, int, float)) and not isinstance(func, bool):
        order = as_order(func)
        return (lambda t: eta(order, t)), ("eta", order.kappa)
    if callable(func):
        return func, ("callable", func)
    raise TypeError(f"cannot interpret {func!r} as a test function")


def _function_from_key(key):
    if isinstance(key, tuple):
        return key[1] if key[0] == "callable" else resolve_function(key[1])[0]
    return resolve_function(key)[0]


@lru_cache(maxsize=4096)
def _density(line, key) -> float:
    return _density_integral(line, _function_from_key(key))


def _density_integral(line, f) -> float:
    T = _tail_length(line)
    if isinstance(line, ScalarLineSymbol):
        g = lambda t: 4.0 * float(f(np.array([line.profile(t)]))[0])  # noqa: E731
        brk = None
    else:
        rate = line.decay_rate
        g = lambda t: 2.0 * float(f(np.array([line.eigenvalue(t)]))[0])  # noqa: E731
        brk = [p for p in (rate, 1.0, 4.0) if 0 < p < T] or None
    val, _ = integrate.quad(g, 0.0, T, points=brk, limit=500, epsabs=1e-14, epsrel=1e-12)
    # f(phi) may decay slower than phi itself (eta_kappa ~ phi^kappa for kappa < 1)
    tail, _ = integrate.quad(g, T, np.inf, limit=200, epsabs=1e-15, epsrel=1e-10)
    return (val + tail) / math.pi


def density_rho(line, order) -> float:
    """Volume density ``(2 pi)^-1 int tr f(a(t)) dt`` of a line symbol.

    `order` may be a Renyi order, ``"f0"`` or a callable with ``f(0) = 0``.
    """
    f, key = resolve_function(order)
    return _density(line, key)


def kernel_table(line, n: int, dx: float) -> np.ndarray:
    """Reduced kernel blocks at ``u = j dx`` for ``0 <= j < n``."""
    return block_kernel(line, np.arange(n) * dx)


_SECTIONS: dict = {}


def _canonical(line):
    # sections depend on (s, mu) only through sqrt(s^2 + mu^2): a real rotation
    # about sigma_y maps s sigma_x + mu sigma_z to that radius times sigma_x
    if isinstance(line, LineSymbol):
        c = line.params.cutoff
        return ("dirac", line.decay_rate, c.kind, c.rho, c.scale)
    return ("scalar", line.amplitude, line.width)


def remember_section(sol, spec: SectionSpec = DEFAULT_SECTION) -> None:
    _SECTIONS[(_canonical(sol.line), spec)] = sol


def clear_section_cache() -> None:
    _SECTIONS.clear()
    _density.cache_clear()


def solve_section(line, spec: SectionSpec = DEFAULT_SECTION) -> SectionSolution:
    """Eigenvalues of the reduced section at ``(X, dx)``, ``(X/2, dx)`` and ``(X, 2 dx)``.

    Results are cached by the line's distance to the singular point, on
    which the reduced spectrum depends exclusively.

    Raises
    ------
    SectionTooShortError
        If the kernel at ``X/2`` has not decayed below ``DECAY_RATIO`` of its value at 0.
    """
    key = (_canonical(line), spec)
    hit = _SECTIONS.get(key)
    if hit is not None:
        return hit if hit.line == line else _rebind(hit, line)
    rate = 1.0 if isinstance(line, ScalarLineSymbol) else line.decay_rate
    X, n = spec.resolve(rate)
    sol = solve_section_at(line, X, n)
    _SECTIONS[key] = sol
    return sol


def _rebind(sol, line):
    return SectionSolution(line, sol.X, sol.n, sol.dx, sol.multiplicity, sol.eigenvalues,
                           sol.eigenvalues_half_length, sol.eigenvalues_coarse, sol.decay_ratio)


def solve_section_at(line, X: float, n: int) -> SectionSolution:
    if n < 4 or n % 2:
        raise ValueError(f"section needs an even number of points >= 4, got {n}")
    d, mult = _reduction(line)
    if d * n > 4000:
        raise SizeError(f"reduced section dimension {d * n} exceeds 4000")
    dx = X / n
    table = kernel_table(line, n, dx)
    k0 = float(np.linalg.norm(table[0]))
    tail = float(np.linalg.norm(table[n // 2]))
    ratio = tail / k0 if k0 > 0 else 0.0
    if ratio > DECAY_RATIO:
        raise SectionTooShortError(
            f"kernel at X/2 = {X / 2:.4g} is {ratio:.2e} of its value at 0 (limit {DECAY_RATIO:g})"
        )
    main = _eigvalsh(assemble_section(table, n, dx))
    half = _eigvalsh(assemble_section(table, n // 2, dx))
    coarse = _eigvalsh(assemble_section(table, n // 2, 2 * dx, stride=2))
    return SectionSolution(line, n * dx, n, dx, mult, main, half, coarse, ratio)


def finite_section_trace(line, func, X: float | None = None, n: int | None = None, spec: SectionSpec = DEFAULT_SECTION):
    """Two-edge value ``m_pair = tr f(C_X) - X rho`` with its error estimate.

    Parameters
    ----------
    line : LineSymbol or ScalarLineSymbol
    func : RenyiOrder, float, "f0" or callable
    X, n : optional
        Explicit section length and point count; default from `spec`.

    Returns
    -------
    (value, error) : tuple of float
    """
    sol = solve_section(line, spec) if X is None else solve_section_at(line, float(X), int(n))
    return sol.m_pair(func)


def full_section_matrix(line, X: float, n: int) -> np.ndarray:
    """Unreduced 4n x 4n section, for checking the spin reduction."""
    dx = X / n
    table = line_kernel(line, np.arange(n) * dx)
    return assemble_section(table, n, dx)


def hs_cross_norm(line, rel_tol: float = 1e-9) -> float:
    """``int_0^inf u |k(u)|_F^2 du``, the Hilbert-Schmidt norm of the half-line cross term.

    Integrated with adaptive quadrature up to ``U`` where the kernel has decayed
    by ``exp(-36)``; the remainder is bounded by the exponential envelope.
    """
    d, mult = _reduction(line)
    rate = 1.0 if isinstance(line, ScalarLineSymbol) else max(line.decay_rate, 1e-3)

    def integrand(u):
        k = block_kernel(line, np.array([u]))[0]
        return u * mult * float(np.sum(np.abs(k) ** 2))

    if isinstance(line, ScalarLineSymbol) and line.amplitude == 0:
        return 0.0
    if not isinstance(line, ScalarLineSymbol) and line.params.cutoff(line.decay_rate) == 0:
        return 0.0
    U = 18.0 / rate if not isinstance(line, ScalarLineSymbol) else 12.0 * line.width + 12.0
    pts = [p for p in (0.25 / rate, 1.0 / rate, 4.0 / rate) if p < U]
    val, _ = integrate.quad(integrand, 0.0, U, points=pts, limit=400, epsabs=0.0, epsrel=rel_tol)
    return float(val)
