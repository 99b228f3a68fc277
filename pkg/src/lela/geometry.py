"""Flow-map geometry: gradients, cofactor matrix, Jacobian, Piola residual.

The flow map eta is stored as a periodic displacement u = eta - Id so that
all tangential operations (FFT derivatives, mollification) act on periodic
data; the identity part is differentiated analytically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import grid as gridmod
from .errors import DegenerateMapError

JAC_FLOOR = 1e-6


@dataclass
class FlowState:
    """Unknowns (eta, v, h, F) at one instant; eta kept as displacement."""

    t: float
    eta_disp: np.ndarray   # (3, n1, n2, n3)
    v: np.ndarray          # (3, n1, n2, n3)
    h: np.ndarray          # (n1, n2, n3)
    F: np.ndarray          # (3, 3, n1, n2, n3), F[i, j] = F_ij

    def copy(self):
        return FlowState(self.t, self.eta_disp.copy(), self.v.copy(),
                         self.h.copy(), self.F.copy())

    def eta(self, grid):
        return grid.mesh() + self.eta_disp


@dataclass(frozen=True)
class ReferenceDeformation:
    """Reference deformation field F0 with its precomputed column divergence."""

    F0: np.ndarray      # (3, 3, n1, n2, n3), columns F0[:, j]
    div_F0: np.ndarray  # (3, n1, n2, n3), div_F0[j] = d_k F0_kj

    @classmethod
    def from_field(cls, grid, F0):
        F0 = np.asarray(F0, dtype=float)
        div = np.stack([
            sum(gridmod.derivative(grid, F0[k, j], k + 1) for k in range(3))
            for j in range(3)
        ])
        return cls(F0=F0, div_F0=div)

    @classmethod
    def zero(cls, grid):
        shp = (3, 3) + grid.shape
        return cls(F0=np.zeros(shp), div_F0=np.zeros((3,) + grid.shape))

    def column(self, j):
        return self.F0[:, j]

    def boundary_tangential(self, tol=0.0):
        """Max |F0_3j| on the two plates (must vanish in slab mode)."""
        plates = self.F0[2, :, :, :, [0, -1]]
        return float(np.max(np.abs(plates))) if plates.size else 0.0

    def divergence_constraint_residual(self, grid, h0, eos):
        """Max-norm of div F0_j + e'(h0) (F0_j . d) h0 over columns j."""
        worst = 0.0
        ep = eos.e_prime(h0)
        for j in range(3):
            r = self.div_F0[j] + ep * directional_derivative(grid, self.F0[:, j], h0)
            worst = max(worst, gridmod.linf(r))
        return worst


def flowmap_gradient(grid, eta_disp):
    """d eta as M[i, l] = d_l eta_i = delta_il + d_l u_i."""
    n = grid.shape
    M = np.empty((3, 3) + n)
    for i in range(3):
        for l in range(3):
            M[i, l] = gridmod.derivative(grid, eta_disp[i], l + 1)
            if i == l:
                M[i, l] += 1.0
    return M


def cofactor_jacobian(grid, eta_disp, jac_floor=JAC_FLOOR):
    """Cofactor matrix a = [d eta]^(-1), Jacobian J, and A = J a.

    Closed-form 3x3 adjugate per node; raises if J falls below jac_floor.
    Returns (a, J, A) with a[l, i] = a^{li}.
    """
    M = flowmap_gradient(grid, eta_disp)
    return cofactor_from_gradient(M, jac_floor=jac_floor)


def cofactor_from_gradient(M, jac_floor=JAC_FLOOR):
    """(a, J, A) from a gradient tensor M[i, l] = d_l eta_i."""
    c = np.empty_like(M)  # c[i, l]: cofactor of M[i, l]; cyclic pairs fix the signs
    for i, (i1, i2) in [(0, (1, 2)), (1, (2, 0)), (2, (0, 1))]:
        for l, (l1, l2) in [(0, (1, 2)), (1, (2, 0)), (2, (0, 1))]:
            c[i, l] = M[i1, l1] * M[i2, l2] - M[i1, l2] * M[i2, l1]
    J = M[0, 0] * c[0, 0] + M[0, 1] * c[0, 1] + M[0, 2] * c[0, 2]
    if np.min(J) <= jac_floor:
        raise DegenerateMapError(
            f"Jacobian minimum {np.min(J):.3e} <= floor {jac_floor:.1e}")
    # inverse: a[l, i] = cof(M)[i, l] / J  (adjugate transpose)
    a = np.transpose(c, (1, 0) + tuple(range(2, c.ndim))) / J
    A = J * a
    return a, J, A


def piola_residual(grid, A):
    """max_i || d_l A^{li} ||_inf, the discrete Piola-identity defect."""
    worst = 0.0
    for i in range(3):
        r = sum(gridmod.derivative(grid, A[l, i], l + 1) for l in range(3))
        worst = max(worst, gridmod.linf(r))
    return worst


def directional_derivative(grid, w, f):
    """(w . d) f = w_k d_k f for a direction field w and scalar/vector f."""
    out = np.zeros_like(f)
    for k in range(3):
        out += w[k] * gridmod.derivative(grid, f, k + 1)
    return out


def directional_derivative_flowmap(grid, w, eta_disp):
    """(w . d) eta computed through the displacement: w + (w . d) u."""
    return w + directional_derivative(grid, w, eta_disp)


def grad_a(grid, a, f):
    """Eulerian gradient (nabla_a f)^i = a^{li} d_l f of a scalar field."""
    df = [gridmod.derivative(grid, f, l + 1) for l in range(3)]
    return np.stack([sum(a[l, i] * df[l] for l in range(3)) for i in range(3)])


def div_a(grid, a, X):
    """Eulerian divergence a^{li} d_l X_i of a vector field."""
    out = np.zeros(X.shape[1:])
    for i in range(3):
        for l in range(3):
            out += a[l, i] * gridmod.derivative(grid, X[i], l + 1)
    return out


def curl_a(grid, a, X):
    """Eulerian curl (curl_a X)_k = eps_kli a^{ml} d_m X_i."""
    dX = np.empty((3, 3) + X.shape[1:])  # dX[m, i] = d_m X_i
    for m in range(3):
        for i in range(3):
            dX[m, i] = gridmod.derivative(grid, X[i], m + 1)
    eul = np.einsum("ml...,mi...->li...", a, dX)  # eul[l, i] = (nabla_a)_l X_i
    return np.stack([
        eul[1, 2] - eul[2, 1],
        eul[2, 0] - eul[0, 2],
        eul[0, 1] - eul[1, 0],
    ])
