"""1D Gram matrices (mass, stiffness, mixed) and L2 projection on tensor spaces."""
import numpy as np

from .linalg import BandedMatrix, KroneckerOperator, kron_solve
from .splines import element_basis


def _gram(space, d_left, d_right):
    # G[a, c] = int N_a^(d_left) N_c^(d_right) dx, accumulated span by span
    p = space.degree
    first, v_left = element_basis(space, d_left)
    _, v_right = element_basis(space, d_right) if d_right != d_left else (first, v_left)
    w = space.quadrature.weights
    G = BandedMatrix.zeros(space.n, p)
    for e in range(len(first)):
        local = np.einsum("iq,jq,q->ij", v_left[e], v_right[e], w[e])
        a0 = first[e]
        for i in range(p + 1):
            # local[i, j] -> global (a0 + i, a0 + j), band column p + j - i
            G.data[a0 + i, p - i:2 * p + 1 - i] += local[i]
    return G


def assemble_mass(space):
    """M[a, c] = int_0^1 N_a N_c dx."""
    return _gram(space, 0, 0)


def assemble_stiffness(space):
    """K[a, c] = int_0^1 N_a' N_c' dx."""
    if space.degree < 1:
        raise ValueError("stiffness matrix needs degree >= 1")
    return _gram(space, 1, 1)


def assemble_mixed(space):
    """B[a, c] = int_0^1 N_a' N_c dx; the transpose holds int N_a N_c'."""
    if space.degree < 1:
        raise ValueError("mixed matrix needs degree >= 1")
    return _gram(space, 1, 0)


def quadrature_grid(spaces):
    """Flattened quadrature points and weights of every direction."""
    pts = [s.quadrature.points.ravel() for s in spaces]
    wts = [s.quadrature.weights.ravel() for s in spaces]
    return pts, wts


def _weighted_basis(space):
    # C[a, q] = w_q N_a(x_q) over all quadrature points of the space
    first, vals = element_basis(space, 0)
    n_spans, _, nq = vals.shape
    w = space.quadrature.weights
    C = np.zeros((space.n, n_spans * nq))
    for e in range(n_spans):
        C[first[e]:first[e] + space.degree + 1, e * nq:(e + 1) * nq] = vals[e] * w[e]
    return C


def load_vector(f, spaces):
    """b[a, b(, c)] = int f N_a(x) N_b(y) (N_c(z)) by Gauss quadrature per element.

    `f` is called once with broadcastable coordinate arrays of all quadrature
    points (``f(X, Y)`` or ``f(X, Y, Z)``).
    """
    pts, _ = quadrature_grid(spaces)
    grids = np.meshgrid(*pts, indexing="ij")
    F = np.asarray(f(*grids), dtype=float)
    F = np.broadcast_to(F, grids[0].shape)
    for axis, space in enumerate(spaces):
        C = _weighted_basis(space)
        F = np.moveaxis(np.tensordot(C, F, axes=([1], [axis])), 0, axis)
    return np.asfortranarray(F)


def l2_project(f, spaces, solver=None):
    """Coefficients of the L2 projection of f onto the tensor-product spline space.

    Solves (M_x (x) M_y [(x) M_z]) c = b with the directional Kronecker solver.
    """
    if solver is None:
        solver = KroneckerOperator([assemble_mass(s) for s in spaces])
    return kron_solve(solver, load_vector(f, spaces))
