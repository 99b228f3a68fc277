"""Slab Poisson/Laplace solvers and the inverse tangential Laplacian.

All solves reduce to a two-point boundary-value problem per tangential
Fourier mode.  The 1-D operator is the square of the 4th-order first
derivative matrix, so that the discrete identity div(grad f) = Lap f holds
exactly and constraint residuals are limited only by solver roundoff.
The per-mode systems are tiny and inverted directly once per grid.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import grid as gridmod
from .errors import ConfigError

ELLIPTIC_TOL = 1e-10


@dataclass
class EllipticProblem:
    """-Lap u = rhs with Dirichlet data or zero-flux Neumann data.

    bc_lo/bc_hi are (n1, n2) fields on the plates y3 = -1 and y3 = +1.
    """

    rhs: np.ndarray
    bc_kind: str = "dirichlet"
    bc_lo: np.ndarray | None = None
    bc_hi: np.ndarray | None = None


class NeumannSolution(NamedTuple):
    u: np.ndarray
    projection_magnitude: float  # |subtracted constant| * vol(Omega)


class SlabPoisson:
    """Direct per-mode solver for the slab; factorizations cached per grid."""

    def __init__(self, grid):
        if grid.mode != "slab":
            raise ConfigError("SlabPoisson requires a slab grid")
        self.grid = grid
        n3 = grid.n3
        self.D1 = grid.D1
        self.D2 = grid.D1 @ grid.D1
        k1 = grid.k1
        k2 = grid.k2
        K2 = (k1[:, None] ** 2 + k2[None, :] ** 2)
        vals, gidx = np.unique(np.round(K2).astype(np.int64), return_inverse=True)
        self.k2_values = vals.astype(float)
        self.group = gidx.reshape(K2.shape)

        eye = np.eye(n3)
        dir_inv = np.empty((vals.size, n3, n3))
        neu_inv = np.empty((vals.size, n3, n3))
        for g, ksq in enumerate(self.k2_values):
            M = ksq * eye - self.D2
            Md = M.copy()
            Md[0] = 0.0
            Md[0, 0] = 1.0
            Md[-1] = 0.0
            Md[-1, -1] = 1.0
            dir_inv[g] = np.linalg.inv(Md)
            Mn = M.copy()
            Mn[0] = self.D1[0]
            Mn[-1] = self.D1[-1]
            if ksq == 0.0:
                self._neu0 = Mn
                self._neu0_pinv = np.linalg.pinv(Mn)
                # left null vector: consistency direction of the singular system
                _, _, vt = np.linalg.svd(Mn.T)
                self._neu0_left_null = vt[-1]
                neu_inv[g] = 0.0  # zero mode handled separately in solve_neumann
            else:
                neu_inv[g] = np.linalg.inv(Mn)
        self._dir_inv = dir_inv[self.group]   # (n1, n2, n3, n3)
        self._neu_inv = neu_inv[self.group]
        self._zero_mode_mask = self.group == self.group[0, 0]

    # -- operators --------------------------------------------------------

    def laplacian(self, u):
        """Assembled discrete Laplacian (spectral tangential + FD normal)."""
        return gridmod.tangential_laplacian(self.grid, u) + np.matmul(u, self.D2.T)

    def dirichlet_residual(self, u, rhs):
        """Interior max-norm of -Lap u - rhs (boundary rows excluded)."""
        r = -self.laplacian(u) - rhs
        return gridmod.linf(r[..., 1:-1])

    # -- solves ------------------------------------------------------------

    def solve_dirichlet(self, rhs, bc_lo=None, bc_hi=None):
        """-Lap u = rhs, u(-1) = bc_lo, u(+1) = bc_hi."""
        g = self.grid
        if rhs is None:
            b = np.zeros(g.shape, dtype=complex)
        else:
            b = np.fft.fft2(rhs, axes=(-3, -2))
        b[..., 0] = 0.0 if bc_lo is None else np.fft.fft2(bc_lo, axes=(-2, -1))
        b[..., -1] = 0.0 if bc_hi is None else np.fft.fft2(bc_hi, axes=(-2, -1))
        uh = np.einsum("abij,abj->abi", self._dir_inv, b)
        return np.fft.ifft2(uh, axes=(-3, -2)).real

    def harmonic_extension(self, bc_lo, bc_hi):
        """Lap u = 0 with the given plate traces."""
        return self.solve_dirichlet(None, bc_lo, bc_hi)

    def solve_neumann(self, rhs):
        """-Lap u = rhs with zero flux; tangential zero mode projected.

        The zero-mode right-hand side is shifted by the constant that makes
        the singular 1-D system consistent (a y3-mean-zero projection); the
        subtracted amount times the domain volume is reported so its scaling
        can be monitored.  The returned solution has zero trapezoid mean.
        """
        g = self.grid
        rh = np.fft.fft2(rhs, axes=(-3, -2))
        b = rh.copy()
        b[..., 0] = 0.0
        b[..., -1] = 0.0
        uh = np.einsum("abij,abj->abi", self._neu_inv, b)

        # zero mode: real 1-D singular problem in physical normalization
        r0 = rh[0, 0].real / (g.n1 * g.n2)
        b0 = r0.copy()
        b0[0] = 0.0
        b0[-1] = 0.0
        ell = self._neu0_left_null
        w = np.zeros(g.n3)
        w[1:-1] = 1.0
        c = float(ell @ b0) / float(ell @ w)
        b0 = b0 - c * w
        u0 = self._neu0_pinv @ b0
        u0 -= (u0 @ g.w3) / np.sum(g.w3)  # mean-zero representative
        uh[0, 0] = u0 * (g.n1 * g.n2)

        u = np.fft.ifft2(uh, axes=(-3, -2)).real
        return NeumannSolution(u, abs(c) * g.volume)


@functools.lru_cache(maxsize=8)
def get_poisson(grid):
    return SlabPoisson(grid)


def solve_dirichlet(grid, problem):
    """Solve an EllipticProblem with Dirichlet data."""
    if problem.bc_kind != "dirichlet":
        raise ConfigError("solve_dirichlet needs bc_kind == 'dirichlet'")
    return get_poisson(grid).solve_dirichlet(problem.rhs, problem.bc_lo, problem.bc_hi)


def solve_neumann(grid, problem):
    """Solve an EllipticProblem with zero-flux Neumann data."""
    if problem.bc_kind != "neumann":
        raise ConfigError("solve_neumann needs bc_kind == 'neumann'")
    return get_poisson(grid).solve_neumann(problem.rhs)


def inv_tangential_laplacian(grid, g_plate):
    """Fourier multiplier -1/|k|^2 on a plate field; zero mode annihilated."""
    gh = np.fft.fft2(g_plate, axes=(-2, -1))
    k1 = grid.k1.reshape(-1, 1)
    k2 = grid.k2.reshape(1, -1)
    ksq = k1 ** 2 + k2 ** 2
    mult = np.zeros_like(ksq)
    nz = ksq > 0
    mult[nz] = -1.0 / ksq[nz]
    return np.fft.ifft2(gh * mult, axes=(-2, -1)).real


def project_nonzero_modes(g_plate):
    """P_{!=0}: remove the tangential zero mode of a plate field."""
    return g_plate - np.mean(g_plate, axis=(-2, -1), keepdims=True)
