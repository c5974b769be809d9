"""Modal amplification analysis of the split P-wave step.

Each directional pair (K_i, M_i) is diagonalized by its generalized
eigenvectors, so the step acts on every tensor mode independently through a
3x3 matrix over the scaled triple (U, tau U', tau^2 U'').  With
``e_i = 1 / (1 + tau^2/4 lambda_i)``, ``E = prod e_i`` and
``zeta = sum_i lambda_i E`` the matrices are functions of ``s = tau^2 zeta``
and ``E`` alone.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg

DENSE_EIG_MAX = 512
FORMS = ("newmark", "literal", "printed")


@dataclass(frozen=True)
class EigenPencil:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    direction: str = "x"


def generalized_eig(K, M, direction="x"):
    """Solve K v = lambda M v; eigenvalues ascending, eigenvectors M-orthonormal."""
    Kd = K.to_dense() if hasattr(K, "to_dense") else np.asarray(K, dtype=float)
    Md = M.to_dense() if hasattr(M, "to_dense") else np.asarray(M, dtype=float)
    if Kd.shape != Md.shape:
        raise ValueError(f"pencil dimensions differ: {Kd.shape} vs {Md.shape}")
    if Kd.shape[0] > DENSE_EIG_MAX:
        raise ValueError(f"dense eigensolve limited to n <= {DENSE_EIG_MAX}")
    try:
        lam, P = scipy.linalg.eigh(Kd, Md)
    except np.linalg.LinAlgError as exc:
        raise ValueError("mass matrix of the pencil is not positive definite") from exc
    return EigenPencil(eigenvalues=lam, eigenvectors=P, direction=direction)


def _modal_factors(lams, tau):
    # broadcast the directional eigenvalues over all tensor modes
    eta = 0.25 * tau ** 2
    grids = np.meshgrid(*lams, indexing="ij")
    e = [1.0 / (1.0 + eta * g) for g in grids]
    E = np.prod(e, axis=0)
    zeta = sum(g * E for g in grids)
    return (tau ** 2 * zeta).ravel(), E.ravel()


def amplification_blocks(s, E, form="newmark"):
    """Stack of 3x3 amplification matrices for arrays of (s, E)."""
    s = np.asarray(s, dtype=float)
    E = np.asarray(E, dtype=float)
    one, zero = np.ones_like(s), np.zeros_like(s)
    if form == "newmark":
        rows = [[1 - s / 2, 1 - s / 4, zero],
                [-s, 1 - s / 2, zero],
                [-s, -s / 2, zero]]
    elif form == "literal":
        rows = [[one, one, zero],
                [-s / 2, 1 - s / 2, zero],
                [-s, -s, zero]]
    elif form == "printed":
        rows = [[1 - s, 1 - s, 0.5 - E - s / 2],
                [-s / 2, 1 - s / 2, 1 - E / 2 - s / 4],
                [-s, -s, 1 - E - s / 2]]
    else:
        raise ValueError(f"unknown form {form!r}; expected one of {FORMS}")
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


@dataclass
class AmplificationMatrix:
    """Per-mode 3x3 amplification matrices, modes in x-fastest order."""
    tau: float
    s: np.ndarray
    E: np.ndarray
    blocks: np.ndarray
    form: str
    dims: tuple

    def mode(self, *idx):
        return self.blocks[np.ravel_multi_index(idx[::-1], self.dims[::-1])]

    def eigenvalues(self):
        return np.linalg.eigvals(self.blocks)

    def spectral_radii(self):
        return np.abs(self.eigenvalues()).max(axis=-1)


def build_amplification(pencils, tau, form="newmark"):
    """Modal amplification matrices of one step for the given directional pencils.

    ``form`` selects the step being analysed: ``"newmark"`` (the default step),
    ``"literal"`` (the printed three-line update) or ``"printed"`` (the block
    matrix as published, with its bare E read as prod e_i).
    """
    if tau < 0:
        raise ValueError("time step must be non-negative")
    lams = [np.asarray(p.eigenvalues, dtype=float) for p in pencils]
    # x-fastest mode ordering to match coefficient tensors
    s, E = _modal_factors(lams[::-1], tau)
    return AmplificationMatrix(tau=float(tau), s=s, E=E,
                               blocks=amplification_blocks(s, E, form), form=form,
                               dims=tuple(len(v) for v in lams))


def spectral_radius_sweep(pencils, taus, form="newmark"):
    """[(tau, max modal spectral radius)] for every tau."""
    taus = list(taus)
    if not taus:
        raise ValueError("empty time-step list")
    return [(float(t), float(build_amplification(pencils, t, form).spectral_radii().max()))
            for t in taus]

