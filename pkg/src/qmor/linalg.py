"""Dense linear-algebra kernel used by every other module.

All routines accept real or complex 2-D arrays; real input is simply the
imaginary-part-zero special case.  Matrices here are small (state dimension
of every target system is below twenty), so everything is dense and direct.
"""

import numpy as np
import scipy.linalg as la

from .errors import RankDeficiencyError, SingularMatrixError, StabilityError, StructureError

#: Relative magnitude below which an imaginary part is considered rounding noise.
IMAG_NOISE = 1e-12


def as_matrix(m, name="matrix"):
    """Coerce to a 2-D inexact ndarray and reject non-finite entries."""
    arr = np.asarray(m)
    if not np.issubdtype(arr.dtype, np.inexact):
        arr = arr.astype(float)
    if arr.ndim != 2:
        raise StructureError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise StructureError(f"{name} contains non-finite entries")
    return arr


def auto_rank_tolerance(m, singular_values):
    """Standard numerical-rank threshold: max(rows, cols) * eps * sigma_max."""
    if singular_values.size == 0:
        return 0.0
    eps = np.finfo(m.dtype if np.issubdtype(m.dtype, np.inexact) else float).eps
    return max(m.shape) * eps * singular_values[0]


def rank_and_bases(m, tol=None):
    """Numerical rank plus orthonormal range and kernel bases via SVD.

    Returns ``(rank, range_basis, kernel_basis)`` where ``range_basis`` has
    ``rank`` orthonormal columns spanning the column space and
    ``kernel_basis`` has ``cols - rank`` orthonormal columns spanning the
    null space.  ``tol=None`` selects the scale-invariant default threshold.
    """
    m = as_matrix(m)
    if m.size == 0:
        return 0, np.zeros((m.shape[0], 0)), np.eye(m.shape[1])
    u, s, vh = la.svd(m)
    if tol is None:
        tol = auto_rank_tolerance(m, s)
    rank = int(np.sum(s > tol))
    range_basis = u[:, :rank]
    kernel_basis = vh[rank:].conj().T
    return rank, range_basis, kernel_basis


def orthonormal_range(m, tol=None):
    """Orthonormal basis of the column space of ``m``."""
    return rank_and_bases(m, tol)[1]


def kernel_basis(m, tol=None):
    """Orthonormal basis of the null space of ``m``."""
    return rank_and_bases(m, tol)[2]


def orthogonal_projector(basis):
    """Orthogonal projector onto the column span of a full-column-rank basis.

    Raises :class:`RankDeficiencyError` when the columns are dependent, since
    the projector onto a degenerate "subspace" is ill-defined for callers.
    """
    basis = as_matrix(basis, "basis")
    if basis.shape[1] == 0:
        return np.zeros((basis.shape[0], basis.shape[0]), dtype=basis.dtype)
    rank, rng, _ = rank_and_bases(basis)
    if rank < basis.shape[1]:
        raise RankDeficiencyError(
            f"basis has {basis.shape[1]} columns but numerical rank {rank}"
        )
    return rng @ rng.conj().T


def eigenpairs(m):
    """Eigenvalues and unit-norm eigenvectors of a square matrix.

    Returns ``(values, vectors)`` with ``vectors[:, k]`` the eigenvector of
    ``values[k]``.  No diagonalizability assumption is made by callers; for
    defective matrices the returned vectors are whatever the QR algorithm
    yields for each eigenvalue.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise StructureError(f"eigendecomposition needs a square matrix, got {m.shape}")
    values, vectors = la.eig(m)
    norms = np.linalg.norm(vectors, axis=0)
    norms[norms == 0] = 1.0
    return values, vectors / norms


def eigenvalues(m):
    m = as_matrix(m)
    return la.eigvals(m)


def solve(m, rhs, context=None):
    """Solve ``m @ x = rhs`` for square nonsingular ``m``.

    ``context`` is folded into the error message so callers can name the
    interpolation point (or other object) that produced a singular system.
    """
    m = as_matrix(m)
    rhs = np.asarray(rhs)
    label = f" while evaluating {context}" if context else ""
    try:
        # Singular inputs are caught by the checks below; silence the
        # intermediate divide-by-zero noise they produce.
        with np.errstate(all="ignore"):
            x = la.solve(m, rhs)
    except la.LinAlgError as exc:
        raise SingularMatrixError(f"singular matrix{label}: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SingularMatrixError(f"singular or ill-conditioned matrix{label}")
    residual = np.linalg.norm(m @ x - rhs)
    scale = np.linalg.norm(m) * max(np.linalg.norm(x), 1e-300)
    if residual > 1e-8 * scale:
        raise SingularMatrixError(
            f"solve residual {residual:.3e} exceeds 1e-8 of scale {scale:.3e}{label}"
        )
    return x


def is_hurwitz(m, margin=0.0):
    """True when every eigenvalue has real part strictly below ``-margin``."""
    return bool(np.all(eigenvalues(m).real < -margin))


def lyapunov_solve(a, q):
    """Solve ``a @ p + p @ a^H + q = 0`` for Hurwitz ``a`` and Hermitian ``q``.

    The result is symmetrized before returning.  A non-Hurwitz ``a`` raises
    :class:`StabilityError` because the Gramian integral does not converge.
    """
    a = as_matrix(a, "state matrix")
    q = as_matrix(q, "right-hand side")
    if not is_hurwitz(a):
        raise StabilityError("state matrix is not Hurwitz; Lyapunov solution undefined")
    p = la.solve_continuous_lyapunov(a, -q)
    p = (p + p.conj().T) / 2
    if np.isrealobj(a) and np.isrealobj(q):
        p = p.real
    return p


def spectral_norm(m):
    """Largest singular value (operator 2-norm)."""
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def frobenius_norm(m):
    return float(np.linalg.norm(np.asarray(m)))


def largest_principal_angle(x_basis, y_basis):
    """Largest principal angle (radians) between two subspaces.

    Inputs are matrices whose columns span the subspaces; they are
    orthonormalized internally, so any bases may be passed.
    """
    qx = orthonormal_range(as_matrix(x_basis))
    qy = orthonormal_range(as_matrix(y_basis))
    if qx.shape[1] == 0 or qy.shape[1] == 0:
        return 0.0 if qx.shape[1] == qy.shape[1] else np.pi / 2
    cosines = la.svd(qx.conj().T @ qy, compute_uv=False)
    c = float(np.clip(cosines.min(), -1.0, 1.0))
    return float(np.arccos(c))


def real_if_close(m, tol=IMAG_NOISE):
    """Drop an imaginary part that is below ``tol`` relative to the matrix scale."""
    m = np.asarray(m)
    if np.isrealobj(m):
        return m
    scale = max(np.abs(m).max(initial=0.0), 1.0)
    if np.abs(m.imag).max(initial=0.0) <= tol * scale:
        return np.ascontiguousarray(m.real)
    return m
