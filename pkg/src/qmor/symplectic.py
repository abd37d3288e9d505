"""Constructive normal form of nonsingular real skew-symmetric matrices.

Any full-rank real skew-symmetric ``Theta`` can be scaled into the canonical
symplectic form: there is a nonsingular real ``T`` with ``T Theta T^T = J_r``.
The construction here is deterministic: a real Schur reduction brings
``Theta`` to 2x2 skew blocks ``[[0, beta], [-beta, 0]]`` by an orthogonal
similarity, the block signs are normalized, and a diagonal ``1/sqrt(beta)``
scaling finishes the job.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from . import linalg
from .errors import RankDeficiencyError, StructureError
from .systems import symplectic_form

#: Condition-number ceiling beyond which Theta is treated as singular.
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class SkewNormalForm:
    """Transformation ``T`` with ``T @ theta @ T.T = J_r`` and its residual."""

    T: np.ndarray
    residual: float


def skew_normal_form(theta, tol=1e-9):
    """Compute ``T`` with ``T Theta T^T = J_r`` for nonsingular skew ``Theta``.

    ``Theta`` is symmetrized when its asymmetry is below ``tol`` relative to
    its norm (products like ``W^T J W`` are skew only up to rounding); larger
    asymmetry raises :class:`StructureError`.  Near-singular input (condition
    number above ``MAX_CONDITION``) raises :class:`RankDeficiencyError`.
    """
    theta = linalg.as_matrix(theta, "theta")
    if theta.shape[0] != theta.shape[1] or theta.shape[0] % 2:
        raise StructureError(f"theta must be square of even size, got {theta.shape}")
    if np.iscomplexobj(theta):
        theta = linalg.real_if_close(theta)
        if np.iscomplexobj(theta):
            raise StructureError("theta must be real")
    scale = np.linalg.norm(theta)
    if scale == 0.0:
        raise RankDeficiencyError("theta is zero, hence singular")
    asymmetry = np.linalg.norm(theta + theta.T)
    if asymmetry > tol * scale:
        raise StructureError(
            f"theta is not skew-symmetric: asymmetry {asymmetry:.3e} vs scale {scale:.3e}"
        )
    theta = (theta - theta.T) / 2

    # Real Schur form of a skew-symmetric (hence normal) matrix is block
    # diagonal with 2x2 blocks [[0, beta], [-beta, 0]].
    t_schur, z = la.schur(theta, output="real")
    size = theta.shape[0]
    betas = np.empty(size // 2)
    for k in range(size // 2):
        block = t_schur[2 * k : 2 * k + 2, 2 * k : 2 * k + 2]
        beta = block[0, 1]
        if beta < 0:
            # Swap the two Schur vectors to flip the block sign.
            z[:, [2 * k, 2 * k + 1]] = z[:, [2 * k + 1, 2 * k]]
            beta = -beta
        betas[k] = beta
    if betas.min() <= 0.0 or betas.max() / betas.min() > MAX_CONDITION:
        raise RankDeficiencyError(
            "theta is numerically singular; its canonical block scales are "
            f"{np.sort(betas)}"
        )
    inv_sqrt = np.repeat(1.0 / np.sqrt(betas), 2)
    t = inv_sqrt[:, None] * z.T
    residual = np.linalg.norm(t @ theta @ t.T - symplectic_form(size // 2))
    return SkewNormalForm(T=t, residual=float(residual))


def is_symplectic(m, n_in=None, n_out=None, tol=1e-9):
    """True when ``M J_{n_in} M^T = J_{n_out}`` within ``tol``.

    Sizes default to ``cols/2`` and ``rows/2``; rectangular matrices (output
    truncation) are allowed.
    """
    m = linalg.as_matrix(m)
    if m.shape[0] % 2 or m.shape[1] % 2:
        raise StructureError(f"matrix dimensions must be even, got {m.shape}")
    if n_in is None:
        n_in = m.shape[1] // 2
    if n_out is None:
        n_out = m.shape[0] // 2
    if m.shape != (2 * n_out, 2 * n_in):
        raise StructureError(
            f"matrix has shape {m.shape}, expected ({2 * n_out}, {2 * n_in})"
        )
    defect = m @ symplectic_form(n_in) @ m.T - symplectic_form(n_out)
    return bool(np.linalg.norm(defect) <= tol)
