from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from dirac_entropy.dirac_symbols import CutoffSpec, DiracParams, momentum_symbol
from dirac_entropy.entropy_functions import eta
from dirac_entropy.errors import FitError, PreconditionError, RegionError, ResolutionError, SizeError
from dirac_entropy.io import read_container, write_container
from dirac_entropy.lattice_model import (
    Region,
    TorusLattice,
    build_kernel,
    correlation_matrix,
    entanglement_entropy,
    full_torus_region,
    margin_sites,
    schatten_commutator_slope,
)

PARAMS = DiracParams(0.0, 2.0)
LATTICE = TorusLattice(36.0, 36)


@pytest.fixture(scope="module")
def kernel():
    with pytest.warns(UserWarning):
        return build_kernel(PARAMS, LATTICE, allow_coarse=True)


def lattice_symbol(params, lattice, k):
    """Symbol at a grid momentum, averaged over the two signs of each Nyquist component."""
    nyq = math.pi / lattice.spacing
    choices = [(c, -c) if abs(abs(c) - nyq) < 1e-9 else (c,) for c in k]
    pts = list(itertools.product(*choices))
    return sum(momentum_symbol(params, np.array(p), singular="convention") for p in pts) / len(pts)


def grid_momenta(lattice):
    n, h = lattice.points_per_dim, lattice.spacing
    k1 = [2 * math.pi * j / (n * h) for j in range(-n // 2, n // 2)]
    return list(itertools.product(k1, repeat=3))


def brute_kernel(params, lattice, x):
    """Direct momentum sum N^-3 sum_k exp(ikx) P(k) at one site offset."""
    n, h = lattice.points_per_dim, lattice.spacing
    total = np.zeros((4, 4), dtype=complex)
    for k in grid_momenta(lattice):
        total += np.exp(1j * h * np.dot(k, x)) * lattice_symbol(params, lattice, k)
    return total / n**3


def test_lattice_validation():
    with pytest.raises(ValueError):
        TorusLattice(1.0, 7)
    with pytest.raises(ValueError):
        TorusLattice(0.0, 8)
    lat = TorusLattice.from_spacing(0.25, 8)
    assert lat.box_side == 2.0 and lat.sites == 512


def test_momenta_are_folded():
    k = TorusLattice(8.0, 8).momenta()[:, 0, 0, 0]
    assert np.allclose(np.sort(k), 2 * np.pi / 8 * np.arange(-4, 4))


def test_epsilon_zero_rejected():
    with pytest.raises(PreconditionError):
        build_kernel(DiracParams(1.0, 0.0), LATTICE)


def test_resolution_rule():
    with pytest.raises(ResolutionError):
        build_kernel(PARAMS, LATTICE)
    with pytest.warns(UserWarning):
        build_kernel(PARAMS, LATTICE, allow_coarse=True)
    build_kernel(DiracParams(0.0, 3.0), LATTICE)


def test_two_point_torus_matches_brute_force():
    params = DiracParams(0.8, 1.5, CutoffSpec("gaussian"))
    lat = TorusLattice(1.0, 2)
    ker = build_kernel(params, lat)
    for x in itertools.product(range(2), repeat=3):
        assert np.allclose(ker.table[x], brute_kernel(params, lat, np.array(x)), atol=1e-14)


def test_kernel_origin_trace_and_parseval(kernel):
    k = LATTICE.momenta()
    phi = PARAMS.cutoff(PARAMS.epsilon * np.sqrt(np.sum(k * k, axis=-1)))
    k0 = kernel.table[0, 0, 0]
    assert np.max(np.abs(k0 - k0.conj().T)) < 1e-14
    # the singular node contributes tr(phi(0)/2 * 1) = 2 phi(0), and the Nyquist
    # averages keep the trace 2 phi, so the regular formula holds
    assert abs(np.trace(k0) - 2 * phi.sum() / LATTICE.sites) < 1e-12
    from dirac_entropy.lattice_model import symbol_table

    table, _ = symbol_table(PARAMS, LATTICE)
    lhs = np.sum(np.abs(kernel.table) ** 2)
    rhs = np.sum(np.abs(table) ** 2) / LATTICE.sites
    assert abs(lhs - rhs) < 1e-10 * rhs


def test_kernel_reflection(kernel):
    n = LATTICE.points_per_dim
    for x in [(1, 0, 0), (3, 5, 2), (17, 1, 30)]:
        neg = tuple((-c) % n for c in x)
        assert np.allclose(kernel.table[neg], kernel.table[x].conj().T, atol=1e-15)


def test_single_site_matches_momentum_average():
    params = DiracParams(0.0, 0.5)
    lat = TorusLattice(1.0, 8)
    ker = build_kernel(params, lat)
    corr = correlation_matrix(ker, Region.cube(1), allow_small_margin=True)
    oracle = brute_kernel(params, lat, np.zeros(3))
    assert np.allclose(np.sort(corr.eigenvalues), np.linalg.eigvalsh(oracle), atol=1e-13)
    # entropy oracle: direct eigensolve plus explicit momentum sum of 2 eta(phi)
    rho = sum(np.sum(eta(1.0, np.linalg.eigvalsh(lattice_symbol(params, lat, k)))) for k in grid_momenta(lat))
    expected = sum(eta(1.0, w) for w in np.linalg.eigvalsh(oracle)) - rho / lat.sites
    with pytest.warns(UserWarning):
        s = entanglement_entropy(correlation_matrix(ker, Region.cube(1), allow_small_margin=True), 1.0)
    assert abs(s - expected) < 1e-12


def test_full_torus_spectrum_and_zero_entropy():
    params = DiracParams(0.5, 0.6)
    lat = TorusLattice.from_spacing(0.2, 8)
    ker = build_kernel(params, lat)
    with pytest.warns(UserWarning):
        corr = correlation_matrix(ker, full_torus_region(lat), allow_small_margin=True)
    expected = np.sort(np.concatenate([np.linalg.eigvalsh(lattice_symbol(params, lat, k)) for k in grid_momenta(lat)]))
    assert np.max(np.abs(np.sort(corr.eigenvalues) - expected)) < 1e-12
    # away from the Nyquist planes the symbol spectrum is {0, 0, phi, phi}
    k = np.array([0.0, 2 * math.pi / lat.box_side, 0.0])
    phi = params.cutoff(params.epsilon * math.sqrt(k @ k + 0.25))
    assert np.allclose(np.linalg.eigvalsh(lattice_symbol(params, lat, k)), [0, 0, phi, phi], atol=1e-15)
    for kappa in (0.5, 1.0, 1.5):
        assert abs(entanglement_entropy(corr, kappa)) < 1e-9


def test_far_sites_block_matches_direct_kernel():
    params = DiracParams(1.0, 0.6)
    lat = TorusLattice.from_spacing(0.2, 8)
    ker = build_kernel(params, lat)
    region = Region.from_voxels([[0, 0, 0], [4, 4, 4]])
    from dirac_entropy.lattice_model import assemble

    block = assemble(ker, region.sites)[:4, 4:]
    direct = brute_kernel(params, lat, np.array([-4, -4, -4]))
    assert np.allclose(block, direct, atol=1e-13)
    assert np.linalg.norm(block) < np.linalg.norm(ker.table[0, 0, 0])


def test_correlation_block_structure(kernel):
    region = Region.cube(3)
    corr = correlation_matrix(kernel, region)
    sites = region.sites
    for i, j in [(0, 5), (7, 2), (26, 13)]:
        d = tuple((sites[i] - sites[j]) % 36)
        assert np.allclose(corr.matrix[4 * i : 4 * i + 4, 4 * j : 4 * j + 4], kernel.table[d], atol=1e-15)
    assert corr.hermiticity_defect() < 1e-10


@pytest.mark.parametrize("side", [2, 4, 6])
def test_spectrum_inside_unit_interval(kernel, side):
    w = correlation_matrix(kernel, Region.cube(side)).raw_eigenvalues
    assert w.min() >= -1e-8 and w.max() <= 1 + 1e-8


def test_translation_invariance(kernel):
    base = entanglement_entropy(correlation_matrix(kernel, Region.cube(4)), 1.0)
    moved = entanglement_entropy(correlation_matrix(kernel, Region.cube(4).shifted([7, -3, 11])), 1.0)
    assert abs(base - moved) < 1e-9 * abs(base)


def test_rotation_invariance_on_lattice(kernel):
    region = Region.from_voxels([[x, y, z] for x in range(4) for y in range(3) for z in range(2)] + [[4, 0, 0]])
    base = entanglement_entropy(correlation_matrix(kernel, region), 1.0)
    for axis in range(3):
        for turns in (1, 2, 3):
            rot = entanglement_entropy(correlation_matrix(kernel, region.rotated(axis, turns)), 1.0)
            assert abs(rot - base) < 1e-9 * abs(base)


@pytest.mark.parametrize("kappa", [0.5, 1.0, 1.5])
@pytest.mark.parametrize("region", [Region.cube(3), Region.ball(2.5), Region.from_voxels([[0, 0, 0], [1, 0, 0], [1, 1, 0]])],
                         ids=["cube", "ball", "voxels"])
def test_entropy_nonnegative(kernel, kappa, region):
    assert entanglement_entropy(correlation_matrix(kernel, region), kappa) >= -1e-9


def test_sharp_projection_mode_nonnegative():
    params = DiracParams(0.0, 2.0)
    with pytest.warns(UserWarning):
        ker = build_kernel(params, LATTICE, allow_coarse=True, symbol="sharp")
    corr = correlation_matrix(ker, Region.cube(3))
    w = corr.eigenvalues
    s = entanglement_entropy(corr, 1.0)
    assert s >= 0
    assert abs(s - (np.sum(eta(1.0, w)) - 27 * ker.site_density(1.0))) < 1e-9


def test_region_constructors():
    cube = Region.cube(3)
    assert len(cube) == 27 and cube.boundary_area == 54 and cube.extent == 3
    ball = Region.ball(2.0)
    assert ball.boundary_area == pytest.approx(16 * math.pi)
    assert len(ball) == 33
    vox = Region.from_voxels([[0, 0, 0], [1, 0, 0]])
    assert vox.boundary_area == 10
    with pytest.raises(RegionError):
        Region.from_voxels(np.empty((0, 3)))
    with pytest.raises(RegionError):
        Region.cube(0)


def test_margin_rule(kernel):
    assert margin_sites(PARAMS, LATTICE) == 12
    with pytest.raises(RegionError):
        correlation_matrix(kernel, Region.cube(13))
    with pytest.raises(RegionError):
        correlation_matrix(kernel, Region.cube(40), allow_small_margin=True)


def test_dense_cap(kernel):
    with pytest.raises(SizeError):
        correlation_matrix(kernel, Region.cube(4), dense_cap=200)


def test_clip_tolerance_enforced(kernel):
    from dirac_entropy.errors import NumericalQualityError

    corr = correlation_matrix(kernel, Region.cube(2))
    corr.matrix[0, 0] += 1.0
    corr.__dict__.pop("raw_eigenvalues", None)
    with pytest.raises(NumericalQualityError):
        corr.eigenvalues


def test_kernel_is_deterministic():
    with pytest.warns(UserWarning):
        a = build_kernel(PARAMS, LATTICE, allow_coarse=True).table
    with pytest.warns(UserWarning):
        b = build_kernel(PARAMS, LATTICE, allow_coarse=True).table
    assert np.array_equal(a, b)


def test_container_round_trip(tmp_path, kernel):
    path = write_container(tmp_path / "k.bin", kernel.table[:4, :4, :4], PARAMS.to_dict())
    arr, header = read_container(path)
    assert header["dims"] == [4, 4, 4, 4, 4]
    assert header["dtype"] == "complex64" and header["order"] == "row-major"
    assert np.allclose(arr, kernel.table[:4, :4, :4], atol=1e-7)
    raw = path.read_bytes()
    assert raw[:8] == b"DIRACMAT"


def test_schatten_needs_three_scales():
    with pytest.raises(FitError):
        schatten_commutator_slope(PARAMS, LATTICE, "cube", 0.9, [3, 3, 3, 3], allow_coarse=True)
    with pytest.raises(ValueError):
        schatten_commutator_slope(PARAMS, LATTICE, "cube", 1.5, [3, 4, 5], allow_coarse=True)


def test_schatten_small_gaussian_runs():
    lat = TorusLattice(20.0, 20)
    fit = schatten_commutator_slope(PARAMS, lat, "cube", 0.9, [2, 3, 4, 5], symbol="gaussian", allow_coarse=True)
    assert 1.5 < fit.slope < 2.5
    assert len(fit.quasi_norms) == 4
