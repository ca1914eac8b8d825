"""Uniform periodic grids, complex fields, polar decomposition and the
quantum potential.

All quantities are in dimensionless simulation units (hbar, m, omega of
order 1 by default). Grids are periodic on [-L/2, L/2) per axis, which
lets every spatial derivative be spectral.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy import ndimage


class GridError(ValueError):
    pass


class FieldError(ValueError):
    pass


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid in 1 or 2 dimensions (square in 2D)."""

    dim: int
    length: float
    npoints: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise GridError(f"dim must be 1 or 2, got {self.dim}")
        if self.length <= 0:
            raise GridError(f"grid length must be positive, got {self.length}")
        if not _is_power_of_two(self.npoints) or self.npoints < 16:
            raise GridError(
                f"points per axis must be a power of two >= 16, got {self.npoints}"
            )

    @property
    def dx(self) -> float:
        return self.length / self.npoints

    @property
    def shape(self) -> tuple:
        return (self.npoints,) * self.dim

    @property
    def size(self) -> int:
        return self.npoints ** self.dim

    @property
    def cell_volume(self) -> float:
        return self.dx ** self.dim

    @property
    def axis_coords(self) -> np.ndarray:
        """Coordinates along one axis: x_j = -L/2 + j*dx."""
        return -0.5 * self.length + self.dx * np.arange(self.npoints)

    def meshgrid(self) -> tuple:
        """Per-axis coordinate arrays broadcast to the full grid shape."""
        axes = [self.axis_coords] * self.dim
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def wavenumbers(self, axis: int) -> np.ndarray:
        """Angular wavenumbers along `axis`, broadcastable to grid shape."""
        k = 2.0 * np.pi * np.fft.fftfreq(self.npoints, d=self.dx)
        shape = [1] * self.dim
        shape[axis] = self.npoints
        return k.reshape(shape)

    def ksq(self) -> np.ndarray:
        """|k|^2 on the full grid."""
        out = np.zeros(self.shape)
        for ax in range(self.dim):
            out = out + self.wavenumbers(ax) ** 2
        return out

    def wrap(self, x: np.ndarray) -> np.ndarray:
        """Fold positions into the periodic box [-L/2, L/2)."""
        half = 0.5 * self.length
        return (np.asarray(x) + half) % self.length - half


def make_grid(dim: int, length: float, npoints: int) -> Grid:
    """Build a periodic grid; rejects non-power-of-two point counts."""
    return Grid(dim=dim, length=length, npoints=npoints)


@dataclass(frozen=True)
class PhysicalParams:
    """Mass, action scale, diffusion scale and the quantum-potential weight.

    lam = 1 is the fully quantum regime, lam = 0 the classical ensemble
    regime; intermediate values are mesoscopic.  sigma is the diffusion
    scale of the underlying stochastic kinematics; the operational
    diffusion coefficient used by the stochastic integrator is
    nu = hbar / (2 m) (see trajectories.SdeConfig for the reconciliation
    of the two conventions).
    """

    m: float = 1.0
    hbar: float = 1.0
    sigma: float = 1.0
    lam: float = 1.0

    def __post_init__(self):
        if self.m <= 0:
            raise ValueError(f"mass must be positive, got {self.m}")
        if self.hbar <= 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda weight must lie in [0, 1], got {self.lam}")

    @classmethod
    def consistent(cls, m: float, sigma: float) -> "PhysicalParams":
        """Construct with hbar = m*sigma and lam = m*sigma/hbar (== 1)."""
        hbar = m * sigma
        return cls(m=m, hbar=hbar, sigma=sigma, lam=m * sigma / hbar)

    @classmethod
    def quantum(cls, m: float = 1.0, hbar: float = 1.0) -> "PhysicalParams":
        return cls(m=m, hbar=hbar, sigma=hbar / m, lam=1.0)

    @classmethod
    def classical(cls, m: float = 1.0, hbar: float = 1.0) -> "PhysicalParams":
        return cls(m=m, hbar=hbar, sigma=0.0, lam=0.0)

    def with_lambda(self, lam: float) -> "PhysicalParams":
        return replace(self, lam=lam)

    @property
    def nu(self) -> float:
        """Diffusion coefficient of the stochastic kinematics."""
        return self.hbar / (2.0 * self.m)


@dataclass(frozen=True)
class PotentialSpec:
    """External potential V(q), evaluated lazily on a grid."""

    kind: str
    params: dict = field(default_factory=dict)

    @classmethod
    def free(cls) -> "PotentialSpec":
        return cls("free")

    @classmethod
    def harmonic(cls, omega: float = 1.0, m: float = 1.0) -> "PotentialSpec":
        return cls("harmonic", {"omega": omega, "m": m})

    @classmethod
    def double_well(cls, a: float, b: float) -> "PotentialSpec":
        """V = a*x^4 - b*x^2 (radial coordinate in 2D)."""
        return cls("double_well", {"a": a, "b": b})

    @classmethod
    def barrier(cls, v0: float, width: float) -> "PotentialSpec":
        """Gaussian barrier of height v0 and rms width `width` at the origin."""
        return cls("barrier", {"v0": v0, "width": width})

    @classmethod
    def custom(cls, fn: Callable) -> "PotentialSpec":
        return cls("custom", {"fn": fn})

    def evaluate(self, grid: Grid) -> np.ndarray:
        coords = grid.meshgrid()
        rsq = sum(c ** 2 for c in coords)
        if self.kind == "free":
            v = np.zeros(grid.shape)
        elif self.kind == "harmonic":
            v = 0.5 * self.params["m"] * self.params["omega"] ** 2 * rsq
        elif self.kind == "double_well":
            v = self.params["a"] * rsq ** 2 - self.params["b"] * rsq
        elif self.kind == "barrier":
            w = self.params["width"]
            v = self.params["v0"] * np.exp(-0.5 * rsq / w ** 2)
        elif self.kind == "custom":
            v = np.asarray(self.params["fn"](*coords), dtype=float)
            if v.shape != grid.shape:
                raise FieldError("custom potential shape does not match grid")
        else:
            raise FieldError(f"unknown potential kind {self.kind!r}")
        if not np.all(np.isfinite(v)):
            raise FieldError("potential evaluates to non-finite values")
        return v


@dataclass(frozen=True)
class Wavefunction:
    """Complex field on a grid, kept at unit discrete L2 norm."""

    grid: Grid
    values: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != self.grid.shape:
            raise FieldError(
                f"values shape {v.shape} does not match grid shape {self.grid.shape}"
            )
        object.__setattr__(self, "values", v)

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.cell_volume))

    def normalized(self) -> "Wavefunction":
        n = self.norm
        if n == 0 or not np.isfinite(n):
            raise FieldError("cannot normalize a zero or non-finite field")
        return Wavefunction(self.grid, self.values / n, self.t)

    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    @classmethod
    def from_callable(cls, grid: Grid, fn: Callable, t: float = 0.0) -> "Wavefunction":
        values = np.asarray(fn(*grid.meshgrid()), dtype=complex)
        return cls(grid, values, t).normalized()


@dataclass(frozen=True)
class PolarField:
    """Amplitude/phase pair (R, S) with S in action units and unwrapped."""

    grid: Grid
    R: np.ndarray
    S: np.ndarray
    node_mask: np.ndarray
    hbar: float = 1.0

    def density(self) -> np.ndarray:
        return self.R ** 2


def gaussian_packet(grid: Grid, center=0.0, rho_width=1.0, momentum=0.0,
                    hbar: float = 1.0) -> Wavefunction:
    """Gaussian wave packet whose *density* has rms width `rho_width`.

    In 2D `center` and `momentum` may be sequences (one entry per axis);
    the width is isotropic.
    """
    coords = grid.meshgrid()
    centers = np.broadcast_to(np.atleast_1d(center), (grid.dim,))
    moms = np.broadcast_to(np.atleast_1d(momentum), (grid.dim,))
    arg = np.zeros(grid.shape, dtype=complex)
    for ax in range(grid.dim):
        dxc = coords[ax] - centers[ax]
        arg = arg - dxc ** 2 / (4.0 * rho_width ** 2) + 1j * moms[ax] * coords[ax] / hbar
    return Wavefunction(grid, np.exp(arg), 0.0).normalized()


def plane_wave(grid: Grid, k, hbar: float = 1.0) -> Wavefunction:
    coords = grid.meshgrid()
    ks = np.broadcast_to(np.atleast_1d(k), (grid.dim,))
    phase = sum(ks[ax] * coords[ax] for ax in range(grid.dim))
    return Wavefunction(grid, np.exp(1j * phase), 0.0).normalized()


def harmonic_ground_state(grid: Grid, omega: float = 1.0, m: float = 1.0,
                          hbar: float = 1.0) -> Wavefunction:
    coords = grid.meshgrid()
    rsq = sum(c ** 2 for c in coords)
    return Wavefunction(grid, np.exp(-m * omega * rsq / (2.0 * hbar)), 0.0).normalized()


def differentiate(values: np.ndarray, grid: Grid, axis: int = 0, order: int = 1,
                  scheme: str = "spectral") -> np.ndarray:
    """Spatial derivative of a gridded field along one axis.

    The spectral scheme is exact for band-limited fields; central_fd2 is a
    second-order finite-difference cross-check.
    """
    if order not in (1, 2):
        raise FieldError(f"derivative order must be 1 or 2, got {order}")
    if axis >= grid.dim:
        raise FieldError(f"axis {axis} out of range for dim {grid.dim}")
    values = np.asarray(values)
    if scheme == "spectral":
        k = grid.wavenumbers(axis)
        spec = np.fft.fft(values, axis=axis)
        if order == 1:
            spec = spec * (1j * k)
        else:
            spec = spec * (-(k ** 2))
        out = np.fft.ifft(spec, axis=axis)
        return out if np.iscomplexobj(values) else out.real
    if scheme == "central_fd2":
        up = np.roll(values, -1, axis=axis)
        dn = np.roll(values, 1, axis=axis)
        if order == 1:
            return (up - dn) / (2.0 * grid.dx)
        return (up - 2.0 * values + dn) / grid.dx ** 2
    raise FieldError(f"unknown derivative scheme {scheme!r}")


def laplacian(values: np.ndarray, grid: Grid, scheme: str = "spectral") -> np.ndarray:
    out = np.zeros_like(np.asarray(values, dtype=complex if np.iscomplexobj(values) else float))
    for ax in range(grid.dim):
        out = out + differentiate(values, grid, axis=ax, order=2, scheme=scheme)
    return out


def _nearest_valid_fill(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Replace entries where mask is True with the nearest unmasked value."""
    if not mask.any():
        return values
    idx = ndimage.distance_transform_edt(mask, return_distances=False,
                                         return_indices=True)
    return values[tuple(idx)]


def _neighbors_flat(shape, flat_index):
    coords = np.unravel_index(flat_index, shape)
    for ax in range(len(shape)):
        for step in (-1, 1):
            c = list(coords)
            c[ax] = (c[ax] + step) % shape[ax]
            yield np.ravel_multi_index(c, shape)


def polar_decompose(psi: Wavefunction, eps_node: float | None = None,
                    hbar: float = 1.0) -> PolarField:
    """Split psi into (R, S) with the phase unwrapped across the grid.

    Unwrapping seeds at the global maximum of R and spreads breadth-first
    to periodic neighbors, skipping node points (R < eps_node); node-point
    phases are then filled by nearest-neighbor continuation and flagged in
    node_mask.
    """
    R = np.abs(psi.values)
    if eps_node is None:
        eps_node = 1e-6 * float(R.max())
    mask = R < eps_node
    if mask.mean() > 0.9:
        raise FieldError("nearly all of the grid is at a node; phase undefined")

    raw = np.angle(psi.values)
    shape = psi.grid.shape
    phase = np.full(psi.grid.size, np.nan)
    raw_flat = raw.ravel()
    mask_flat = mask.ravel()

    start = int(np.argmax(R))
    phase[start] = raw_flat[start]
    queue = deque([start])
    visited = np.zeros(psi.grid.size, dtype=bool)
    visited[start] = True
    visited[mask_flat] = True  # nodes are filled afterwards, not traversed
    while queue:
        cur = queue.popleft()
        for nb in _neighbors_flat(shape, cur):
            if visited[nb]:
                continue
            visited[nb] = True
            phase[nb] = raw_flat[nb] + 2.0 * np.pi * round(
                (phase[cur] - raw_flat[nb]) / (2.0 * np.pi)
            )
            queue.append(nb)

    phase = phase.reshape(shape)
    phase = _nearest_valid_fill(phase, ~np.isfinite(phase))
    return PolarField(grid=psi.grid, R=R, S=hbar * phase, node_mask=mask, hbar=hbar)


def polar_compose(polar: PolarField) -> Wavefunction:
    """Reassemble R * exp(i S / hbar) and renormalize."""
    if np.any(polar.R < 0):
        raise FieldError("amplitude must be nonnegative")
    values = polar.R * np.exp(1j * polar.S / polar.hbar)
    return Wavefunction(polar.grid, values, 0.0).normalized()


def quantum_potential_from_abs(R: np.ndarray, grid: Grid, params: PhysicalParams,
                               eps_node: float | None = None) -> np.ndarray:
    """Quantum potential -(hbar^2/2m) * lap(R)/R from an amplitude field.

    At near-node points the value is clamped to the nearest unmasked
    point; the dynamics keeps equilibrium densities ~R^2 there, so the
    clamp affects a vanishing fraction of probability mass.
    """
    if eps_node is None:
        eps_node = 1e-6 * float(R.max())
    return _quantum_potential_masked(R, R < eps_node, grid, params)


def _quantum_potential_masked(R, mask, grid, params) -> np.ndarray:
    safe_R = np.where(mask, 1.0, R)
    q = -(params.hbar ** 2 / (2.0 * params.m)) * laplacian(R, grid).real / safe_R
    return _nearest_valid_fill(q, mask)


def quantum_potential(polar: PolarField, params: PhysicalParams) -> np.ndarray:
    """Quantum potential of a polar field; depends on R only."""
    return _quantum_potential_masked(polar.R, polar.node_mask, polar.grid, params)
