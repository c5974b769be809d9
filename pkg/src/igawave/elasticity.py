"""2D isotropic elastic waves with alternating-triangular, direction-split stepping.

The stiffness operator Y = [[Y11, Y12], [Y21, Y22]] acts on the displacement
pair (U_x, U_y); with x the first and y the second Kronecker factor

    Y11 = (2 mu + lam) K_x (x) M_y + mu M_x (x) K_y
    Y22 = mu K_x (x) M_y + (2 mu + lam) M_x (x) K_y
    Y12 = mu B^T_x (x) B_y + lam B_x (x) B^T_y,     Y21 = Y12^T

where B[a, c] = int N_a' N_c.  Y is split into a block-lower part Y1 and a
block-upper part Y2 that share half of each diagonal block.  One step is

    S1 w~ = f - Y U^n                  (x component first, then y)
    S2 w  = rho M w~                   (y component first, then x)
    U^{n+1} = 2 U^n - U^{n-1} + tau^2 w

with S1 = rho M + 2 sigma tau^2 Y1~ and S2 = rho M + 2 sigma tau^2 Y2~, the
tilde meaning every diagonal block rho M (x) M + sigma tau^2 Y_ii is replaced
by its Kronecker factorization.  For sigma = 1/4 this is exactly the
predictor (Y1 (U~ + U^{n-1})/2 + Y2 U^n) / corrector form with factors
M_i + tau^2/(4 rho) c K_i.
"""
from dataclasses import dataclass, field

import numpy as np

from .assembly import assemble_mass, assemble_mixed, assemble_stiffness, l2_project
from .linalg import KroneckerOperator, dense_kron, kron_apply, kron_solve


@dataclass(frozen=True)
class MaterialParams:
    rho: float = 1.0
    mu: float = 1.0
    lam: float = 1.0

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError(f"density must be positive, got {self.rho}")
        if not self.mu > 0:
            raise ValueError(f"shear modulus must be positive, got {self.mu}")
        if not self.lam >= 0:
            raise ValueError(f"lambda must be non-negative, got {self.lam}")

    @property
    def p_modulus(self):
        return 2 * self.mu + self.lam


@dataclass
class ElasticState:
    """Displacements at the current and previous levels, arrays of shape (2, n, m)."""
    U: np.ndarray
    U_prev: np.ndarray
    t: float = 0.0
    n: int = 0
    U_pred: np.ndarray = field(default=None, repr=False)

    @classmethod
    def zeros(cls, dims):
        return cls(np.zeros((2,) + tuple(dims)), np.zeros((2,) + tuple(dims)))


def _apply_terms(terms, u):
    out = np.zeros(u.shape)
    for coef, Ax, Ay in terms:
        if coef != 0.0:
            out += coef * Ay.matmul_axis(Ax.matmul_axis(u, 0), 1)
    return out


class ElasticOperator:
    """Operator blocks, triangular splitting and factored split diagonal solves.

    ``literal=True`` builds the blocks exactly as typeset (repeated
    K_x (x) M_y in the diagonal blocks, off-diagonal blocks with the B
    factors transposed); it exists for comparison only.
    """

    def __init__(self, spaces, mat, tau, sigma=0.25, literal=False):
        if len(spaces) != 2:
            raise ValueError("elasticity is implemented in 2D only")
        if any(s.degree < 1 for s in spaces):
            raise ValueError("elasticity needs spline degree >= 1")
        if not tau > 0:
            raise ValueError(f"time step must be positive, got {tau}")
        if not sigma > 0:
            raise ValueError(f"sigma must be positive, got {sigma}")
        self.spaces = list(spaces)
        self.mat = mat
        self.tau = float(tau)
        self.sigma = float(sigma)
        self.literal = literal
        sx, sy = spaces
        self.M = [assemble_mass(sx), assemble_mass(sy)]
        self.K = [assemble_stiffness(sx), assemble_stiffness(sy)]
        self.B = [assemble_mixed(sx), assemble_mixed(sy)]
        self.BT = [b.T for b in self.B]
        self.blocks = self._blocks(literal)

        # split diagonal factors: rho M(x)M + sigma tau^2 Y_ii ~ rho (M_x + a K_x)(x)(M_y + b K_y)
        c = self.sigma * self.tau ** 2 / mat.rho
        Mx, My = self.M
        Kx, Ky = self.K
        P, mu = mat.p_modulus, mat.mu
        self.split_coefs = ((c * P, c * mu), (c * mu, c * P))
        self.split = [KroneckerOperator([Mx.combine(Kx, 1.0, a), My.combine(Ky, 1.0, b)])
                      for a, b in self.split_coefs]
        self.mass_op = KroneckerOperator([Mx, My])

    @property
    def dims(self):
        return (self.M[0].n, self.M[1].n)

    def _blocks(self, literal):
        Mx, My = self.M
        Kx, Ky = self.K
        Bx, By = self.B
        BTx, BTy = self.BT
        mu, lam, P = self.mat.mu, self.mat.lam, self.mat.p_modulus
        if literal:
            return {
                (0, 0): [(P, Kx, My), (mu, Kx, My)],
                (0, 1): [(mu, Bx, BTy), (lam, BTx, By)],
                (1, 0): [(mu, BTx, By), (lam, Bx, BTy)],
                (1, 1): [(mu, Kx, My), (P, Kx, My)],
            }
        return {
            (0, 0): [(P, Kx, My), (mu, Mx, Ky)],
            (0, 1): [(mu, BTx, By), (lam, Bx, BTy)],
            (1, 0): [(mu, Bx, BTy), (lam, BTx, By)],
            (1, 1): [(mu, Kx, My), (P, Mx, Ky)],
        }

    # -- operator actions -------------------------------------------------
    def apply_block(self, i, j, u):
        return _apply_terms(self.blocks[(i, j)], u)

    def apply(self, U):
        """Y U for a displacement pair."""
        return np.stack([self.apply_block(0, 0, U[0]) + self.apply_block(0, 1, U[1]),
                         self.apply_block(1, 0, U[0]) + self.apply_block(1, 1, U[1])])

    def apply_lower(self, U):
        """Y1 U with Y1 = [[Y11/2, 0], [Y21, Y22/2]]."""
        return np.stack([0.5 * self.apply_block(0, 0, U[0]),
                         self.apply_block(1, 0, U[0]) + 0.5 * self.apply_block(1, 1, U[1])])

    def apply_upper(self, U):
        """Y2 U with Y2 = [[Y11/2, Y12], [0, Y22/2]]."""
        return np.stack([0.5 * self.apply_block(0, 0, U[0]) + self.apply_block(0, 1, U[1]),
                         0.5 * self.apply_block(1, 1, U[1])])

    def apply_mass(self, U):
        return np.stack([kron_apply(self.M, u) for u in U])

    def solve_mass(self, R):
        return np.stack([kron_solve(self.mass_op, r) for r in R])

    def _solve_split(self, i, r):
        return kron_solve(self.split[i], r) / self.mat.rho

    def _split_factors(self, weight):
        # diagonal blocks of rho M + weight tau^2 Y1~ carry weight/2 tau^2 Y_ii
        if np.isclose(weight, 2 * self.sigma):
            return [op.factors for op in self.split]
        c = 0.5 * weight * self.tau ** 2 / self.mat.rho
        Mx, My = self.M
        Kx, Ky = self.K
        P, mu = self.mat.p_modulus, self.mat.mu
        return [[Mx.combine(Kx, 1.0, c * P), My.combine(Ky, 1.0, c * mu)],
                [Mx.combine(Kx, 1.0, c * mu), My.combine(Ky, 1.0, c * P)]]

    def apply_S1(self, V, weight=None):
        """(rho M + w tau^2 Y1~) V, with w = 2 sigma unless given."""
        w = 2 * self.sigma if weight is None else weight
        f = self._split_factors(w)
        rho, c = self.mat.rho, w * self.tau ** 2
        return np.stack([rho * kron_apply(f[0], V[0]),
                         c * self.apply_block(1, 0, V[0]) + rho * kron_apply(f[1], V[1])])

    def apply_S2(self, V, weight=None):
        """(rho M + w tau^2 Y2~) V, with w = 2 sigma unless given."""
        w = 2 * self.sigma if weight is None else weight
        f = self._split_factors(w)
        rho, c = self.mat.rho, w * self.tau ** 2
        return np.stack([rho * kron_apply(f[0], V[0]) + c * self.apply_block(0, 1, V[1]),
                         rho * kron_apply(f[1], V[1])])

    def solve_S1(self, R):
        c = 2 * self.sigma * self.tau ** 2
        wx = self._solve_split(0, R[0])
        wy = self._solve_split(1, R[1] - c * self.apply_block(1, 0, wx))
        return np.stack([wx, wy])

    def solve_S2(self, R):
        c = 2 * self.sigma * self.tau ** 2
        wy = self._solve_split(1, R[1])
        wx = self._solve_split(0, R[0] - c * self.apply_block(0, 1, wy))
        return np.stack([wx, wy])

    def apply_D(self, V, weight=None):
        """D V = S1 (rho M)^-1 S2 V for the weight w (default 2 sigma, the stepping operator)."""
        return self.apply_S1(self.solve_mass(self.apply_S2(V, weight)) / self.mat.rho, weight)

    # -- dense views for small problems ----------------------------------
    def dense_block(self, i, j):
        return sum(c * dense_kron([Ax.to_dense(), Ay.to_dense()])
                   for c, Ax, Ay in self.blocks[(i, j)])

    def dense(self, part="full"):
        """Dense Y ('full'), Y1 ('lower') or Y2 ('upper') on the stacked (x, y) vector."""
        Y = [[self.dense_block(i, j) for j in range(2)] for i in range(2)]
        Z = np.zeros_like(Y[0][0])
        if part == "full":
            rows = Y
        elif part == "lower":
            rows = [[0.5 * Y[0][0], Z], [Y[1][0], 0.5 * Y[1][1]]]
        elif part == "upper":
            rows = [[0.5 * Y[0][0], Y[0][1]], [Z, 0.5 * Y[1][1]]]
        else:
            raise ValueError(f"unknown part {part!r}")
        return np.block(rows)

    def dense_mass(self):
        Mt = dense_kron([m.to_dense() for m in self.M])
        Z = np.zeros_like(Mt)
        return np.block([[Mt, Z], [Z, Mt]])

    def dense_split_diag(self, i):
        """rho (M_x + a K_x) (x) (M_y + b K_y) for component i."""
        return self.mat.rho * self.split[i].to_dense()


def build_elastic_operator(spaces, mat, tau, sigma=0.25, literal=False):
    return ElasticOperator(spaces, mat, tau, sigma=sigma, literal=literal)


def _increment(U_next, state, tau):
    return (U_next - 2 * state.U + state.U_prev) / tau ** 2


def predictor_step(state, op, f=None):
    """Provisional U~^{n+1}: x component solved first, then y using the new x."""
    R = -op.apply(state.U)
    if f is not None:
        R = R + f
    w = op.solve_S1(R)
    return 2 * state.U - state.U_prev + op.tau ** 2 * w


def corrector_step(state, op, U_pred):
    """Corrected U^{n+1}: y component first, then x; returns the rotated state."""
    w_pred = _increment(U_pred, state, op.tau)
    w = op.solve_S2(op.mat.rho * op.apply_mass(w_pred))
    U_next = 2 * state.U - state.U_prev + op.tau ** 2 * w
    return ElasticState(U=U_next, U_prev=state.U, t=state.t + op.tau, n=state.n + 1,
                        U_pred=U_pred)


def step(state, op, f=None):
    return corrector_step(state, op, predictor_step(state, op, f))


def initial_acceleration(U0, op, f0=None):
    """A^0 from rho M A^0 = f^0 - Y U^0."""
    R = -op.apply(U0)
    if f0 is not None:
        R = R + f0
    return op.solve_mass(R) / op.mat.rho


def bootstrap_first_step(U0, V0, op, f0=None):
    """U^1 = U^0 + tau V^0 + tau^2/2 A^0 with rho M A^0 = f^0 - Y U^0."""
    U0 = np.asarray(U0, dtype=float)
    V0 = np.zeros_like(U0) if V0 is None else np.asarray(V0, dtype=float)
    A0 = initial_acceleration(U0, op, f0)
    U1 = U0 + op.tau * V0 + 0.5 * op.tau ** 2 * A0
    return ElasticState(U=U1, U_prev=U0, t=op.tau, n=1)


def initial_state(U0, V0, op, f0=None):
    """State at step 0 whose previous level is the backward Taylor value U^0 - tau V^0 + tau^2/2 A^0.

    Only used so that level-0 diagnostics share the two-level definitions.
    """
    U0 = np.asarray(U0, dtype=float)
    V0 = np.zeros_like(U0) if V0 is None else np.asarray(V0, dtype=float)
    A0 = initial_acceleration(U0, op, f0)
    return ElasticState(U=U0, U_prev=U0 - op.tau * V0 + 0.5 * op.tau ** 2 * A0, t=0.0, n=0)


def project_displacement(op, ux, uy):
    """L2-project a displacement field given as two callables (None for zero)."""
    comps = []
    for g in (ux, uy):
        comps.append(np.zeros(op.dims) if g is None else l2_project(g, op.spaces, op.mass_op))
    return np.stack(comps)


STAR_VARIANTS = ("printed", "scheme", "energy")


def star_norm(state, op, variant="printed"):
    """Discrete energy norm of the last two levels, v = (U^n - U^{n-1})/tau.

    ``"printed"``: |v|_D^2 + |(U^n + U^{n-1})/2|_Y^2 with
                   D = (rho M + sigma tau^2 Y1~)(rho M)^-1 (rho M + sigma tau^2 Y2~)
    ``"scheme"``: the same with the operator the step actually inverts,
                  D = S1 (rho M)^-1 S2 (weight 2 sigma)
    ``"energy"``: the "scheme" form minus tau^2/4 |v|_Y^2, which the two-level
                  recursion conserves exactly when f = 0
    """
    if variant not in STAR_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {STAR_VARIANTS}")
    v = (state.U - state.U_prev) / op.tau
    ubar = 0.5 * (state.U + state.U_prev)
    weight = op.sigma if variant == "printed" else 2 * op.sigma
    sq = float(np.vdot(v, op.apply_D(v, weight))) + float(np.vdot(ubar, op.apply(ubar)))
    if variant == "energy":
        sq -= 0.25 * op.tau ** 2 * float(np.vdot(v, op.apply(v)))
    return float(np.sqrt(max(sq, 0.0)))


def energies(state, op):
    """(kinetic, potential, total) with velocity (U^n - U^{n-1})/tau.

    The potential uses the time-centred displacement (U^n + U^{n-1})/2 so that
    both parts refer to the same half level.
    """
    v = (state.U - state.U_prev) / op.tau
    ubar = 0.5 * (state.U + state.U_prev)
    kin = 0.5 * op.mat.rho * float(np.vdot(v, op.apply_mass(v)))
    pot = 0.5 * float(np.vdot(ubar, op.apply(ubar)))
    return kin, pot, kin + pot
