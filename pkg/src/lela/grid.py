"""Discrete reference domain T^2 x (-1,1) and its derivative operators.

Tangential directions (y1, y2) are periodic and differentiated spectrally;
the normal direction y3 uses 4th-order finite differences with one-sided
closures at the plates.  In torus mode y3 is periodic as well and all three
directions are spectral.

Field layout: scalar fields are arrays whose last three axes are
(n1, n2, n3); vector fields carry a leading component axis (3, n1, n2, n3)
and rank-2 tensors two of them, T[i, j] = T_ij.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

TWO_PI = 2.0 * math.pi


def fd_weights(x, x0, deriv_order):
    """Finite-difference weights for d^m/dx^m at x0 from the nodes x.

    Solves the small Vandermonde moment system; exact for polynomials of
    degree < len(x).
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    A = np.vander(x - x0, n, increasing=True).T
    b = np.zeros(n)
    b[deriv_order] = math.factorial(deriv_order)
    return np.linalg.solve(A, b)


def _fd_matrix(nodes, width, deriv_order):
    """Dense differentiation matrix, centered stencils inside and
    one-sided/lopsided rows near the ends."""
    n = nodes.size
    half = width // 2
    D = np.zeros((n, n))
    for i in range(n):
        lo = min(max(i - half, 0), n - width)
        D[i, lo:lo + width] = fd_weights(nodes[lo:lo + width], nodes[i], deriv_order)
    return D


def _is_pow2(n):
    return n >= 1 and (n & (n - 1)) == 0


def _deriv_multiplier(n):
    """i*k with the Nyquist mode zeroed (no well-defined odd derivative)."""
    ik = 1j * np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        ik[n // 2] = 0.0
    return ik


@dataclass(frozen=True, eq=False)
class Grid:
    """Static description of the discrete domain plus cached operators.

    Instances are immutable and compared by identity, so they can key caches.
    """

    n1: int
    n2: int
    n3: int
    mode: str  # "slab" | "torus"
    y1: np.ndarray = field(repr=False)
    y2: np.ndarray = field(repr=False)
    y3: np.ndarray = field(repr=False)
    d1: float
    d2: float
    d3: float
    D1: np.ndarray | None = field(repr=False)  # slab: 4th-order d/dy3
    w3: np.ndarray = field(repr=False)         # y3 quadrature weights

    @property
    def k1(self):
        return np.fft.fftfreq(self.n1, d=1.0 / self.n1)

    @property
    def k2(self):
        return np.fft.fftfreq(self.n2, d=1.0 / self.n2)

    @property
    def shape(self):
        return (self.n1, self.n2, self.n3)

    @property
    def npoints(self):
        return self.n1 * self.n2 * self.n3

    @property
    def cell_area(self):
        return self.d1 * self.d2

    @property
    def volume(self):
        return self.cell_area * float(np.sum(self.w3))

    def mesh(self):
        """Node coordinates as a (3, n1, n2, n3) array."""
        Y1, Y2, Y3 = np.meshgrid(self.y1, self.y2, self.y3, indexing="ij")
        return np.stack([Y1, Y2, Y3])

    def min_spacing(self):
        return min(self.d1, self.d2, self.d3)


def build_grid(n1, n2, n3, mode="slab"):
    """Construct the discrete domain.

    Tangential counts must be powers of two and >= 8.  In slab mode n3 must
    be odd and >= 9 with nodes spanning [-1, 1]; torus mode accepts any
    n3 >= 8 (y3 then periodic with period 2*pi).
    """
    for name, n in (("n1", n1), ("n2", n2)):
        if n < 8 or not _is_pow2(n):
            raise ConfigError(f"{name}={n}: tangential counts must be powers of two >= 8")
    if mode not in ("slab", "torus"):
        raise ConfigError(f"unknown grid mode {mode!r}")
    if mode == "slab":
        if n3 < 9 or n3 % 2 == 0:
            raise ConfigError(f"n3={n3}: slab mode needs an odd count >= 9")
        y3 = np.linspace(-1.0, 1.0, n3)
        d3 = 2.0 / (n3 - 1)
        D1 = _fd_matrix(y3, 5, 1)
        w3 = np.full(n3, d3)
        w3[0] = w3[-1] = 0.5 * d3  # trapezoid
    else:
        if n3 < 8:
            raise ConfigError(f"n3={n3}: torus mode needs n3 >= 8")
        y3 = TWO_PI * np.arange(n3) / n3
        d3 = TWO_PI / n3
        D1 = None
        w3 = np.full(n3, d3)
    y1 = TWO_PI * np.arange(n1) / n1
    y2 = TWO_PI * np.arange(n2) / n2
    return Grid(n1=n1, n2=n2, n3=n3, mode=mode, y1=y1, y2=y2, y3=y3,
                d1=TWO_PI / n1, d2=TWO_PI / n2, d3=d3, D1=D1, w3=w3)


# -- differentiation --------------------------------------------------------

def tangential_derivative(grid, f, axis):
    """Spectral d/dy_axis, axis in (1, 2); exact for band-limited data."""
    if axis not in (1, 2):
        raise ConfigError(f"tangential axis must be 1 or 2, got {axis}")
    ax = -3 if axis == 1 else -2
    n = grid.n1 if axis == 1 else grid.n2
    ik = _deriv_multiplier(n)
    shape = [1] * f.ndim
    shape[ax] = n
    fh = np.fft.fft(f, axis=ax)
    return np.fft.ifft(ik.reshape(shape) * fh, axis=ax).real


def normal_derivative(grid, f):
    """d/dy3: 4th-order FD in slab mode, spectral in torus mode."""
    if grid.mode == "torus":
        ik = _deriv_multiplier(grid.n3)
        shape = [1] * f.ndim
        shape[-1] = grid.n3
        fh = np.fft.fft(f, axis=-1)
        return np.fft.ifft(ik.reshape(shape) * fh, axis=-1).real
    return np.matmul(f, grid.D1.T)


def derivative(grid, f, axis):
    """d/dy_axis for axis in (1, 2, 3)."""
    if axis == 3:
        return normal_derivative(grid, f)
    return tangential_derivative(grid, f, axis)


def gradient(grid, f):
    """All three partials, stacked on a new leading axis."""
    return np.stack([derivative(grid, f, ax) for ax in (1, 2, 3)])


def tangential_laplacian(grid, f):
    """d1^2 + d2^2 applied spectrally."""
    fh = np.fft.fft2(f, axes=(-3, -2))
    k1 = grid.k1.reshape(-1, 1, 1)
    k2 = grid.k2.reshape(1, -1, 1)
    return np.fft.ifft2(-(k1 ** 2 + k2 ** 2) * fh, axes=(-3, -2)).real


def dealias(grid, f):
    """2/3-rule truncation of the tangential spectrum."""
    fh = np.fft.fft2(f, axes=(-3, -2))
    m1 = np.abs(grid.k1) <= grid.n1 / 3.0
    m2 = np.abs(grid.k2) <= grid.n2 / 3.0
    fh *= m1.reshape(-1, 1, 1)
    fh *= m2.reshape(1, -1, 1)
    return np.fft.ifft2(fh, axes=(-3, -2)).real


def exp_filter(grid, f, strength=1e-2, cutoff=2.0 / 3.0):
    """Mild exponential damping of the top (1-cutoff) band of tangential modes."""
    fh = np.fft.fft2(f, axes=(-3, -2))

    def sigma(k, n):
        kmax = n // 2
        kc = cutoff * kmax
        theta = np.clip((np.abs(k) - kc) / max(kmax - kc, 1), 0.0, 1.0)
        return np.exp(-strength * theta ** 4)

    fh *= sigma(grid.k1, grid.n1).reshape(-1, 1, 1)
    fh *= sigma(grid.k2, grid.n2).reshape(1, -1, 1)
    return np.fft.ifft2(fh, axes=(-3, -2)).real


# -- quadrature and norms ----------------------------------------------------

def integral(grid, f):
    """Volume integral of a scalar field: exact tangential sum, trapezoid in y3."""
    if f.shape[-3:] != grid.shape:
        raise ValueError(f"field shape {f.shape} does not end in {grid.shape}")
    col = f.sum(axis=(-3, -2))
    return grid.cell_area * np.tensordot(col, grid.w3, axes=([-1], [0]))


def l2_norm(grid, f):
    """Discrete L^2 norm; component axes of vectors/tensors are summed."""
    sq = np.asarray(f) ** 2
    while sq.ndim > 3:
        sq = sq.sum(axis=0)
    return math.sqrt(max(float(integral(grid, sq)), 0.0))


def linf(f):
    return float(np.max(np.abs(f)))


def assert_finite(name, *arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise FloatingPointError(f"non-finite values in {name}")
