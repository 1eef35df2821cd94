"""Periodic-lattice discretization of the regularized Dirac projection.

The lattice operator is the exact free-fermion model with momentum-space
symbol sampled on the discrete torus. Its restriction to a voxel region is a
dense Hermitian matrix whose spectrum lies in [0, 1].
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .dirac_symbols import DiracParams, momentum_symbol
from .entropy_functions import as_order, eta
from .errors import (
    FitError,
    NumericalError,
    NumericalQualityError,
    PreconditionError,
    RegionError,
    ResolutionError,
    SizeError,
)

DENSE_CAP = 8192
CLIP_TOL = 1e-8
ROUND_TOL = 1e-12
MARGIN_FACTOR = 6.0
SYMBOL_KINDS = ("dirac", "sharp", "gaussian")


@dataclass(frozen=True)
class TorusLattice:
    """Periodic cubic lattice with ``points_per_dim`` sites of spacing ``box_side / points_per_dim``."""

    box_side: float
    points_per_dim: int

    def __post_init__(self):
        n = self.points_per_dim
        if isinstance(n, bool) or int(n) != n or n < 2 or n % 2:
            raise ValueError(f"points_per_dim must be an even integer >= 2, got {n!r}")
        object.__setattr__(self, "points_per_dim", int(n))
        if not float(self.box_side) > 0:
            raise ValueError(f"box_side must be positive, got {self.box_side!r}")
        object.__setattr__(self, "box_side", float(self.box_side))

    @classmethod
    def from_spacing(cls, spacing: float, points_per_dim: int) -> TorusLattice:
        return cls(spacing * points_per_dim, points_per_dim)

    @property
    def spacing(self) -> float:
        return self.box_side / self.points_per_dim

    @property
    def sites(self) -> int:
        return self.points_per_dim**3

    def momenta(self) -> np.ndarray:
        """Momentum grid of shape (N, N, N, 3) in FFT order."""
        k1 = 2 * np.pi * np.fft.fftfreq(self.points_per_dim, d=self.spacing)
        return np.stack(np.meshgrid(k1, k1, k1, indexing="ij"), axis=-1)

    def to_dict(self) -> dict:
        return {"box_side": self.box_side, "points_per_dim": self.points_per_dim}


@dataclass(frozen=True, eq=False)
class Region:
    """Finite set of lattice sites (integer coordinates) with a boundary area in site units."""

    sites: np.ndarray
    boundary_area: float
    kind: str = "voxels"
    size: float | None = None

    def __post_init__(self):
        sites = np.asarray(self.sites, dtype=np.int64).reshape(-1, 3)
        if sites.shape[0] == 0:
            raise RegionError("region contains no lattice sites")
        sites = np.unique(sites, axis=0)
        sites.setflags(write=False)
        object.__setattr__(self, "sites", sites)

    @classmethod
    def cube(cls, side: int, origin=(0, 0, 0)) -> Region:
        """Cube of ``side**3`` sites; boundary area ``6 side^2``."""
        side = int(side)
        if side < 1:
            raise RegionError(f"cube side must be at least one site, got {side}")
        r = np.arange(side)
        grid = np.stack(np.meshgrid(r, r, r, indexing="ij"), axis=-1).reshape(-1, 3) + np.asarray(origin)
        return cls(grid, 6.0 * side**2, "cube", side)

    @classmethod
    def ball(cls, radius: float, origin=(0, 0, 0)) -> Region:
        """Sites whose centers lie within `radius` of the ball center; analytic area ``4 pi r^2``."""
        if not radius > 0:
            raise RegionError(f"ball radius must be positive, got {radius}")
        n = int(math.ceil(radius))
        r = np.arange(-n, n + 1)
        grid = np.stack(np.meshgrid(r, r, r, indexing="ij"), axis=-1).reshape(-1, 3)
        inside = grid[np.sum(grid.astype(float) ** 2, axis=1) <= radius * radius]
        return cls(inside + np.asarray(origin), 4 * math.pi * radius**2, "ball", float(radius))

    @classmethod
    def from_voxels(cls, sites) -> Region:
        """Raw voxel list; the area counts exposed unit faces."""
        sites = np.unique(np.asarray(sites, dtype=np.int64).reshape(-1, 3), axis=0)
        if sites.shape[0] == 0:
            raise RegionError("region contains no lattice sites")
        return cls(sites, float(exposed_faces(sites)), "voxels", None)

    @classmethod
    def from_dict(cls, data: dict) -> Region:
        kind = data.get("kind", "cube")
        if kind == "cube":
            return cls.cube(int(data["size"]))
        if kind == "ball":
            return cls.ball(float(data["size"]))
        if kind == "voxels":
            return cls.from_voxels(data["sites"])
        raise RegionError(f"unknown region kind {kind!r}")

    @classmethod
    def scaled(cls, kind: str, size: float) -> Region:
        return cls.from_dict({"kind": kind, "size": size})

    def __len__(self) -> int:
        return int(self.sites.shape[0])

    @property
    def extent(self) -> int:
        """Largest coordinate span plus one, in sites."""
        return int(np.max(self.sites.max(axis=0) - self.sites.min(axis=0))) + 1

    def shifted(self, offset) -> Region:
        return Region(self.sites + np.asarray(offset, dtype=np.int64), self.boundary_area, self.kind, self.size)

    def rotated(self, axis: int, quarter_turns: int = 1) -> Region:
        """Rotate by multiples of 90 degrees about a coordinate axis (a lattice symmetry)."""
        a, b = [i for i in range(3) if i != axis]
        sites = self.sites.copy()
        for _ in range(quarter_turns % 4):
            sites[:, a], sites[:, b] = -sites[:, b].copy(), sites[:, a].copy()
        return Region(sites, self.boundary_area, self.kind, self.size)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "sites": len(self), "boundary_area": self.boundary_area}
        if self.size is not None:
            out["size"] = self.size
        return out


def exposed_faces(sites: np.ndarray) -> int:
    occupied = {tuple(s) for s in sites.tolist()}
    count = 0
    for s in occupied:
        for axis in range(3):
            for step in (-1, 1):
                nb = list(s)
                nb[axis] += step
                count += tuple(nb) not in occupied
    return count


def margin_sites(params: DiracParams, lattice: TorusLattice, factor: float = MARGIN_FACTOR) -> int:
    """Required empty padding (in sites) on each side of a region."""
    eps = params.epsilon
    length = max(eps, eps / (eps * params.mass + 1.0))
    return int(math.ceil(factor * length / lattice.spacing - 1e-9))


def check_resolution(params: DiracParams, lattice: TorusLattice, allow_coarse: bool = False) -> None:
    if params.epsilon <= 0:
        raise PreconditionError("the lattice model needs epsilon > 0")
    if lattice.spacing > params.epsilon / 3 * (1 + 1e-12):
        msg = f"spacing h = {lattice.spacing:g} exceeds epsilon/3 = {params.epsilon / 3:g}"
        if not allow_coarse:
            raise ResolutionError(msg + " (pass allow_coarse=True to override)")
        warnings.warn(msg + "; resolution rule overridden", stacklevel=3)


@dataclass(eq=False)
class LatticeKernel:
    """Position-space kernel table ``K(x)`` of shape (N, N, N, 4, 4) plus the symbol spectrum."""

    params: DiracParams
    lattice: TorusLattice
    table: np.ndarray
    symbol_eigenvalues: np.ndarray
    symbol: str = "dirac"
    power: int = 1

    def site_density(self, order, floor: float = 0.0) -> float:
        """``(1/N^3) sum_k tr eta(symbol(k))``, the per-site volume term.

        Symbol eigenvalues within `floor` of 0 or 1 are snapped, matching the
        treatment of the restricted spectrum.
        """
        w = snap(self.symbol_eigenvalues, floor)
        return math.fsum(eta(order, w)) / self.lattice.sites

    def block(self, offset) -> np.ndarray:
        n = self.lattice.points_per_dim
        i, j, k = (int(c) % n for c in offset)
        return self.table[i, j, k]


def symbol_table(params: DiracParams, lattice: TorusLattice, symbol: str = "dirac", singular: str = "convention"):
    """Sample the momentum symbol on the lattice grid.

    Returns
    -------
    table : ndarray, shape (N, N, N, 4, 4)
    eigenvalues : ndarray, shape (N^3 * 4,)
    """
    if symbol not in SYMBOL_KINDS:
        raise ValueError(f"unknown lattice symbol {symbol!r}; choose from {SYMBOL_KINDS}")
    k = lattice.momenta()
    energy = np.sqrt(np.sum(k * k, axis=-1) + params.mass**2)
    if symbol == "gaussian":
        g = np.exp(-((params.epsilon * energy) ** 2))
        table = g[..., None, None] * np.eye(4)
        return table.astype(complex), np.repeat(g.ravel(), 4)
    regularized = symbol == "dirac"
    weight = params.cutoff(params.epsilon * energy) if regularized else np.ones(energy.shape)
    # the grid holds -pi/h but not +pi/h; averaging the symbol over both signs
    # of every Nyquist component restores the reflection and cubic symmetries
    nyquist = np.isclose(np.abs(k), math.pi / lattice.spacing)
    table = np.zeros(energy.shape + (4, 4), dtype=complex)
    for signs in itertools.product((1.0, -1.0), repeat=3):
        flip = np.where(nyquist, np.asarray(signs), 1.0)
        table += momentum_symbol(params, k * flip, regularized=regularized, singular=singular)
    table /= 8.0
    eig = np.zeros(energy.shape + (4,))
    eig[..., 2:] = weight[..., None]
    singular_nodes = energy == 0
    eig[singular_nodes] = 0.5 * weight[singular_nodes][..., None]
    on_edge = np.any(nyquist, axis=-1)
    eig[on_edge] = np.linalg.eigvalsh(table[on_edge])
    return table, eig.ravel()


def build_kernel(
    params: DiracParams,
    lattice: TorusLattice,
    allow_coarse: bool = False,
    symbol: str = "dirac",
    power: int = 1,
) -> LatticeKernel:
    """Inverse lattice Fourier transform ``K(x) = N^-3 sum_k exp(ikx) P(k)``.

    Parameters
    ----------
    params, lattice
    allow_coarse : bool
        Downgrade the ``h <= epsilon/3`` rule to a warning.
    symbol : {"dirac", "sharp", "gaussian"}
        ``"sharp"`` drops the cutoff factor (projection test mode); ``"gaussian"`` is a
        scalar test symbol ``exp(-(epsilon E)^2)`` times the identity.
    power : int
        Use the symbol raised to this power (1 or 2).
    """
    check_resolution(params, lattice, allow_coarse)
    table, eig = symbol_table(params, lattice, symbol)
    if power == 2:
        table = table @ table
        eig = eig**2
    elif power != 1:
        raise ValueError(f"power must be 1 or 2, got {power!r}")
    kx = np.fft.ifftn(table, axes=(0, 1, 2))
    return LatticeKernel(params, lattice, kx, eig, symbol, power)


@dataclass(eq=False)
class CorrelationMatrix:
    """Restriction ``chi K chi`` of a lattice kernel to a region, with cached spectrum."""

    matrix: np.ndarray
    kernel: LatticeKernel
    region: Region
    clip_tol: float = CLIP_TOL
    _clips: int | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def raw_eigenvalues(self) -> np.ndarray:
        try:
            return np.linalg.eigvalsh(self.matrix)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"eigensolver failed on correlation matrix of dim {self.dim}: {exc}") from exc

    @property
    def clip_count(self) -> int:
        """Eigenvalues outside [0, 1] by more than rounding level ``ROUND_TOL``."""
        w = self.raw_eigenvalues
        return int(np.count_nonzero((w < -ROUND_TOL) | (w > 1 + ROUND_TOL)))

    @property
    def noise_floor(self) -> float:
        """Absolute eigensolver accuracy ``dim * eps * max(1, |C|)``."""
        w = self.raw_eigenvalues
        return self.dim * np.finfo(float).eps * max(1.0, float(np.max(np.abs(w))))

    @property
    def eigenvalues(self) -> np.ndarray:
        """Spectrum clipped to [0, 1] and snapped to 0 or 1 within the noise floor.

        Raises if any value lies beyond ``clip_tol`` outside [0, 1].
        """
        w = self.raw_eigenvalues
        worst = max(-float(w.min()), float(w.max()) - 1.0, 0.0)
        if worst > self.clip_tol:
            raise NumericalQualityError(f"eigenvalue outside [0, 1] by {worst:.3e} > clip_tol {self.clip_tol:g}")
        return snap(np.clip(w, 0.0, 1.0), self.noise_floor)

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))


def snap(w: np.ndarray, floor: float) -> np.ndarray:
    """Set values within `floor` of 0 or 1 to exactly 0 or 1.

    Renyi functions with ``kappa < 1`` have infinite slope at the endpoints, so
    rounding noise of size ``1e-16`` would otherwise contribute ``~1e-8`` each.
    """
    if floor <= 0:
        return w
    w = np.array(w, dtype=float)
    w[np.abs(w) <= floor] = 0.0
    w[np.abs(w - 1.0) <= floor] = 1.0
    return w


def check_region(region: Region, lattice: TorusLattice, params: DiracParams, allow_small_margin: bool = False):
    if len(region) == 0:
        raise RegionError("region contains no lattice sites")
    pad = margin_sites(params, lattice)
    free = lattice.points_per_dim - region.extent
    if free < 0:
        raise RegionError(f"region extent {region.extent} exceeds the lattice side {lattice.points_per_dim}")
    if free < 2 * pad:
        msg = f"region extent {region.extent} leaves {free} free sites per axis; margin rule needs {2 * pad}"
        if not allow_small_margin:
            raise RegionError(msg)
        warnings.warn(msg + "; margin rule overridden", stacklevel=3)


def assemble(kernel: LatticeKernel, sites: np.ndarray, chunk: int = 256) -> np.ndarray:
    """Dense block matrix ``[K(x_i - x_j)]`` in row blocks of `chunk` sites."""
    n = kernel.lattice.points_per_dim
    sites = np.asarray(sites) % n
    count = sites.shape[0]
    out = np.empty((count, 4, count, 4), dtype=complex)
    for start in range(0, count, chunk):
        rows = sites[start : start + chunk]
        diff = (rows[:, None, :] - sites[None, :, :]) % n
        out[start : start + chunk] = kernel.table[diff[..., 0], diff[..., 1], diff[..., 2]].transpose(0, 2, 1, 3)
    return out.reshape(4 * count, 4 * count)


def correlation_matrix(
    kernel: LatticeKernel,
    region: Region,
    allow_small_margin: bool = False,
    dense_cap: int = DENSE_CAP,
) -> CorrelationMatrix:
    """Restrict the lattice kernel to `region` (periodic differences).

    Raises
    ------
    RegionError
        Empty region, or not enough padding to the periodic images.
    SizeError
        Matrix dimension above `dense_cap`.
    """
    check_region(region, kernel.lattice, kernel.params, allow_small_margin)
    dim = 4 * len(region)
    if dim > dense_cap:
        raise SizeError(f"correlation matrix dimension {dim} exceeds the dense cap {dense_cap}")
    mat = assemble(kernel, region.sites)
    mat = 0.5 * (mat + mat.conj().T)
    return CorrelationMatrix(mat, kernel, region)


def entanglement_entropy(corr: CorrelationMatrix, order, max_clip_fraction: float = 0.01) -> float:
    """``sum_j eta(lambda_j) - |region| rho_site`` for a correlation matrix.

    Raises
    ------
    NumericalQualityError
        More than `max_clip_fraction` of the eigenvalues needed clipping.
    """
    order = as_order(order)
    lam = corr.eigenvalues
    if corr.clip_count > max_clip_fraction * corr.dim:
        raise NumericalQualityError(f"{corr.clip_count} of {corr.dim} eigenvalues clipped (limit {max_clip_fraction:.0%})")
    volume = len(corr.region) * corr.kernel.site_density(order, corr.noise_floor)
    return float(math.fsum(eta(order, lam)) - volume)


def region_entropy(params, lattice, region, order, allow_coarse=False, allow_small_margin=False) -> float:
    kernel = build_kernel(params, lattice, allow_coarse=allow_coarse)
    return entanglement_entropy(correlation_matrix(kernel, region, allow_small_margin), order)


def full_torus_region(lattice: TorusLattice) -> Region:
    r = np.arange(lattice.points_per_dim)
    grid = np.stack(np.meshgrid(r, r, r, indexing="ij"), axis=-1).reshape(-1, 3)
    return Region(grid, 0.0, "torus", None)


@dataclass(frozen=True)
class SchattenFit:
    slope: float
    intercept: float
    residual: float
    alphas: tuple
    quasi_norms: tuple


def commutator_singular_values(kernel: LatticeKernel, kernel_sq: LatticeKernel, region: Region) -> np.ndarray:
    """Singular values of ``chi A (1 - chi)`` from ``chi A^2 chi - (chi A chi)^2``."""
    a = assemble(kernel, region.sites)
    a2 = assemble(kernel_sq, region.sites)
    gram = a2 - a @ a
    gram = 0.5 * (gram + gram.conj().T)
    return np.sqrt(np.clip(np.linalg.eigvalsh(gram), 0.0, None))


def schatten_commutator_slope(
    params: DiracParams,
    lattice: TorusLattice,
    region_kind: str,
    sigma: float,
    alpha_list,
    symbol: str = "dirac",
    allow_coarse: bool = False,
) -> SchattenFit:
    """Fit ``log sum s_k^sigma`` of ``[A, chi_{alpha Lambda}]`` against ``log alpha``.

    The scaling parameter is realized by re-rasterizing the region at size
    ``alpha`` (in sites). Each singular value of ``chi A (1-chi)`` appears twice
    in the commutator.
    """
    if not 0 < sigma <= 1:
        raise ValueError(f"sigma must lie in (0, 1], got {sigma}")
    alphas = [float(a) for a in alpha_list]
    if len(set(alphas)) < 3:
        raise FitError(f"need at least three distinct scales, got {sorted(set(alphas))}")
    check_resolution(params, lattice, allow_coarse)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        kernel = build_kernel(params, lattice, allow_coarse=True, symbol=symbol)
        kernel_sq = build_kernel(params, lattice, allow_coarse=True, symbol=symbol, power=2)
    norms = []
    for a in alphas:
        region = Region.scaled(region_kind, a)
        if 4 * len(region) > DENSE_CAP:
            raise SizeError(f"region of size {a} gives dimension {4 * len(region)} > {DENSE_CAP}")
        if region.extent > lattice.points_per_dim // 2:
            raise RegionError(f"region of size {a} does not fit half the lattice side")
        sv = commutator_singular_values(kernel, kernel_sq, region)
        norms.append(2.0 * float(np.sum(sv**sigma)))
    x, y = np.log(alphas), np.log(norms)
    coef, res, *_ = np.linalg.lstsq(np.vstack([x, np.ones_like(x)]).T, y, rcond=None)
    residual = float(np.sqrt(np.mean((y - (coef[0] * x + coef[1])) ** 2)))
    return SchattenFit(float(coef[0]), float(coef[1]), residual, tuple(alphas), tuple(norms))
