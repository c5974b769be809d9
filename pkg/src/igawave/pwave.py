"""Implicit scalar wave (P-wave) stepping with a direction-split left-hand side.

The semi-discrete problem is ``M u'' + K u = F`` with ``M`` the tensor mass
matrix and ``K`` the sum over directions of stiffness-in-one-direction,
mass-in-the-others Kronecker terms.  Each step solves

    (M_x + eta K_x) (x) (M_y + eta K_y) [(x) ...]  a_{n+1} = rhs,   eta = tau^2 / 4

so the only linear solves are one-dimensional banded ones.
"""
from dataclasses import dataclass, replace

import numpy as np

from .assembly import assemble_mass, assemble_stiffness, l2_project
from .linalg import KroneckerOperator, kron_solve

SCHEMES = ("newmark", "literal")


@dataclass
class WaveState:
    U: np.ndarray
    Udot: np.ndarray
    Uddot: np.ndarray
    t: float = 0.0
    n: int = 0

    @classmethod
    def zeros(cls, dims):
        z = lambda: np.zeros(dims, order="F")  # noqa: E731
        return cls(z(), z(), z())

    def copy(self):
        return replace(self, U=self.U.copy(), Udot=self.Udot.copy(), Uddot=self.Uddot.copy())


def apply_mass(M, U):
    """(M_x (x) M_y [(x) M_z]) U."""
    for axis, A in enumerate(M):
        U = A.matmul_axis(U, axis)
    return U


def apply_laplacian(M, K, U):
    """Sum over directions i of (K in direction i, M elsewhere) applied to U."""
    # P carries the all-mass product, S the single-stiffness sum, built axis by axis
    P, S = U, None
    last = len(M) - 1
    for axis, (Ma, Ka) in enumerate(zip(M, K)):
        KP = Ka.matmul_axis(P, axis)
        S = KP if S is None else Ma.matmul_axis(S, axis) + KP
        if axis < last:
            P = Ma.matmul_axis(P, axis)
    return S


class SplitOperator:
    """Factored directional factors M_i + tau^2/4 K_i plus the raw 1D matrices."""

    def __init__(self, spaces, tau, M=None, K=None):
        if not tau > 0:
            raise ValueError(f"time step must be positive, got {tau}")
        if any(s.degree < 1 for s in spaces):
            raise ValueError("split operator needs spline degree >= 1")
        self.spaces = list(spaces)
        self.tau = float(tau)
        self.eta = 0.25 * self.tau ** 2
        self.M = M if M is not None else [assemble_mass(s) for s in spaces]
        self.K = K if K is not None else [assemble_stiffness(s) for s in spaces]
        self.factors = [m.combine(k, 1.0, self.eta) for m, k in zip(self.M, self.K)]
        self.lhs = KroneckerOperator(self.factors)
        self._mass_op = None

    @property
    def dims(self):
        return tuple(m.n for m in self.M)

    @property
    def mass_op(self):
        if self._mass_op is None:
            self._mass_op = KroneckerOperator(self.M)
        return self._mass_op

    def apply_mass(self, U):
        return apply_mass(self.M, U)

    def apply_stiffness(self, U):
        return apply_laplacian(self.M, self.K, U)

    def solve_lhs(self, rhs):
        return kron_solve(self.lhs, rhs)


def build_split_operator(spaces, tau):
    return SplitOperator(spaces, tau)


def initial_state(op, u0, v0=None, forcing=None):
    """Project initial displacement/velocity and get the acceleration from M a0 = F0 - K U0.

    `u0`, `v0` are callables of the coordinates (or coefficient arrays);
    `forcing` is a coefficient tensor (already a load vector) or None.
    """
    def coeffs(g):
        if g is None:
            return np.zeros(op.dims, order="F")
        if callable(g):
            return l2_project(g, op.spaces, op.mass_op)
        return np.asfortranarray(np.asarray(g, dtype=float))

    U, V = coeffs(u0), coeffs(v0)
    r = -op.apply_stiffness(U)
    if forcing is not None:
        r = r + forcing
    A = kron_solve(op.mass_op, r)
    return WaveState(U, V, A)


def step(state, op, forcing=None, scheme="newmark"):
    """Advance one time step.

    ``scheme="newmark"`` is the average-acceleration Newmark method
    (beta = 1/4, gamma = 1/2) with the split left-hand side G::

        G abar = F - K (U + tau/2 V)
        V1     = V + tau abar
        U1     = U + tau V + tau^2/2 abar

    It never reads the stored acceleration, so an initial acceleration that
    is inconsistent with the split mass cannot pollute the run; ``Uddot`` of
    the new state holds ``abar``, the mean acceleration over the step, and
    ``forcing`` is the load averaged over the step.

    ``scheme="literal"`` applies the three-line update exactly as printed::

        G a1 = F1 - K (U + tau V)
        V1   = V + tau/2 a1
        U1   = U + tau V1 - tau^2/2 a1

    which is stable but only reaches u'' = -Ku/2, so it does not converge.
    """
    tau = op.tau
    if state.U.shape != op.dims:
        raise ValueError(f"state shape {state.U.shape} does not match operator dims {op.dims}")
    if scheme == "newmark":
        pred = state.U + 0.5 * tau * state.Udot
    elif scheme == "literal":
        pred = state.U + tau * state.Udot
    else:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    rhs = op.apply_stiffness(pred)
    np.negative(rhs, out=rhs)
    if forcing is not None:
        rhs += forcing
    A1 = op.solve_lhs(rhs)
    if scheme == "newmark":
        V1 = state.Udot + tau * A1
        # U + tau V + tau^2/2 A1 written as the predictor plus tau/2 V1
        U1 = pred + (0.5 * tau) * V1
    else:
        V1 = state.Udot + 0.5 * tau * A1
        U1 = state.U + tau * V1 - 0.5 * tau ** 2 * A1
    return WaveState(U1, V1, A1, t=state.t + tau, n=state.n + 1)


def energies(state, op, rho=1.0):
    """(kinetic, potential, total) = (rho/2 V^T M V, 1/2 U^T K U, sum)."""
    if isinstance(op, (list, tuple)):
        M = [assemble_mass(s) for s in op]
        K = [assemble_stiffness(s) for s in op]
        mass = lambda X: apply_mass(M, X)  # noqa: E731
        stiff = lambda X: apply_laplacian(M, K, X)  # noqa: E731
    else:
        mass, stiff = op.apply_mass, op.apply_stiffness
    kin = 0.5 * rho * float(np.vdot(state.Udot, mass(state.Udot)))
    pot = 0.5 * float(np.vdot(state.U, stiff(state.U)))
    return kin, pot, kin + pot


def dense_matrices(op):
    """Dense (M, K, G) for small problems: tensor mass, stiffness and split LHS."""
    from .linalg import dense_kron

    Md = [m.to_dense() for m in op.M]
    Kd = [k.to_dense() for k in op.K]
    Mt = dense_kron(Md)
    Kt = sum(dense_kron([Kd[j] if j == i else Md[j] for j in range(len(Md))])
             for i in range(len(Md)))
    G = dense_kron([f.to_dense() for f in op.factors])
    return Mt, Kt, G
