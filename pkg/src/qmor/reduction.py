"""Interpolatory projection reductions that keep the reduced model realizable.

Given interpolation points ``sigma_i`` with tangent directions, the reduced
model is a Petrov-Galerkin compression ``(W^T A V, W^T B, C V, D)`` whose
transfer function matches the original tangentially at every data point.
The projection pair is completed through the symplectic form so that the
realizability constraints survive the compression:

* left data spans ``{((sigma_i I - A)^-H C^H mu_i)}``; ``W = What T^T`` with
  ``T (What^T J_n What) T^T = J_r`` and ``V = J_n W (W^T J_n W)^-1``;
* right data spans ``{(sigma_i I - A)^-1 B nu_i}``; the same scaling recipe
  is applied to ``Vhat`` and ``W`` is completed symplectically from ``V``;
* passive (annihilation-form) models use a plain Galerkin projection onto an
  orthonormal basis, which preserves realizability and passivity at once.

For real reduced matrices the quadrature-form data must be closed under
complex conjugation; the real basis pairs ``(Re v, Im v)`` per conjugate
pair.
"""

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DataValidationError, RankDeficiencyError
from .symplectic import skew_normal_form
from .systems import (
    AnnihilationSystem,
    QuadratureSystem,
    RealizabilityReport,
    check_realizability,
    symplectic_form,
    transfer,
)

#: Relative tolerance for matching conjugate partners in interpolation data.
CONJUGATION_TOL = 1e-9


@dataclass(frozen=True)
class InterpolationData:
    """Interpolation points with matching tangent directions.

    ``side`` is ``"left"`` (output directions) or ``"right"`` (input
    directions).  ``points[i]`` pairs with the row ``directions[i]``.
    """

    side: str
    points: np.ndarray
    directions: np.ndarray

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise DataValidationError(f"side must be 'left' or 'right', got {self.side!r}")
        points = np.atleast_1d(np.array(self.points, dtype=complex))
        directions = np.atleast_2d(np.array(self.directions, dtype=complex))
        if points.ndim != 1:
            raise DataValidationError("points must be a 1-D sequence")
        if directions.shape[0] != points.shape[0]:
            raise DataValidationError(
                f"{points.shape[0]} points but {directions.shape[0]} directions"
            )
        norms = np.linalg.norm(directions, axis=1)
        if np.any(norms == 0.0):
            bad = int(np.flatnonzero(norms == 0.0)[0])
            raise DataValidationError(f"direction {bad} is the zero vector")
        points.setflags(write=False)
        directions.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "directions", directions)

    def __len__(self):
        return self.points.shape[0]


@dataclass(frozen=True)
class ReductionDiagnostics:
    """Numerical evidence attached to every reduction result."""

    interpolation_residuals: np.ndarray
    interpolation_references: np.ndarray
    realizability: RealizabilityReport
    biorthogonality: float
    poles: np.ndarray
    scaling_convention: str | None = None
    scaling_residuals: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ReductionResult:
    """Projection pair, reduced model, and diagnostics.

    ``w`` and ``v`` carry the state maps (a reduced initial condition is
    ``w^H x``); no trajectory semantics are attached.  ``diagnostics`` is
    ``None`` for results reconstructed from serialized projection matrices;
    the reducers always populate it.
    """

    w: np.ndarray
    v: np.ndarray
    reduced: QuadratureSystem | AnnihilationSystem
    data: InterpolationData
    diagnostics: ReductionDiagnostics | None


def _conjugate_pairing(points, directions):
    """Pair data items with their conjugates.

    Returns a list of ``("real", i)`` and ``("pair", i, j)`` entries covering
    every index exactly once, in order of first appearance.  Raises when the
    multiset is not conjugation-closed.
    """
    k = points.shape[0]
    point_scale = max(1.0, np.abs(points).max(initial=0.0))
    dir_scale = max(1.0, np.abs(directions).max(initial=0.0))
    p_tol = CONJUGATION_TOL * point_scale
    d_tol = CONJUGATION_TOL * dir_scale

    def is_real(i):
        return (
            abs(points[i].imag) <= p_tol
            and np.abs(directions[i].imag).max(initial=0.0) <= d_tol
        )

    def conjugates(i, j):
        return (
            abs(points[j] - points[i].conjugate()) <= p_tol
            and np.abs(directions[j] - directions[i].conjugate()).max() <= d_tol
        )

    used = np.zeros(k, dtype=bool)
    pairing = []
    for i in range(k):
        if used[i]:
            continue
        used[i] = True
        if is_real(i):
            pairing.append(("real", i))
            continue
        partner = next((j for j in range(i + 1, k) if not used[j] and conjugates(i, j)), None)
        if partner is None:
            raise DataValidationError(
                f"data item {i} (point {points[i]}) has no conjugate partner; "
                "quadrature-form reductions need conjugation-closed data"
            )
        used[partner] = True
        pairing.append(("pair", i, partner))
    return pairing


def real_basis_from_conjugate_data(points, directions, vectors):
    """Real matrix spanning (over C) the same space as the complex columns.

    ``vectors[:, i]`` belongs to ``(points[i], directions[i])``.  Each
    conjugate pair contributes ``(Re v, Im v)``; each real datum contributes
    ``Re v``; the column count is preserved.
    """
    points = np.asarray(points, dtype=complex)
    directions = np.atleast_2d(np.asarray(directions, dtype=complex))
    vectors = np.asarray(vectors, dtype=complex)
    columns = []
    for entry in _conjugate_pairing(points, directions):
        if entry[0] == "real":
            columns.append(vectors[:, entry[1]].real)
        else:
            columns.append(vectors[:, entry[1]].real)
            columns.append(vectors[:, entry[1]].imag)
    return np.column_stack(columns)


def _normalized_columns(m):
    norms = np.linalg.norm(m, axis=0)
    norms = np.where(norms == 0.0, 1.0, norms)
    return m / norms


def _check_dimension(basis, points, what):
    k = basis.shape[1]
    rank = linalg.rank_and_bases(basis)[0]
    if rank < k:
        raise RankDeficiencyError(
            f"{what} spanned by points {np.array2string(points, precision=6)} has "
            f"dimension {rank}, expected {k}; interpolation data are degenerate"
        )


def left_subspace_vectors(system, points, directions):
    """Complex defining vectors ``(sigma_i I - A)^-H C^H mu_i`` as columns."""
    a, c = system.A, system.C
    eye = np.eye(a.shape[0])
    cols = []
    for sigma, mu in zip(points, directions):
        rhs = c.conj().T @ mu
        cols.append(
            linalg.solve(
                np.conj(sigma) * eye - a.conj().T,
                rhs,
                context=f"left interpolation point {sigma}",
            )
        )
    return np.column_stack(cols)


def right_subspace_vectors(system, points, directions):
    """Complex defining vectors ``(sigma_i I - A)^-1 B nu_i`` as columns."""
    a, b = system.A, system.B
    eye = np.eye(a.shape[0])
    cols = []
    for sigma, nu in zip(points, directions):
        cols.append(
            linalg.solve(
                sigma * eye - a,
                b @ nu,
                context=f"right interpolation point {sigma}",
            )
        )
    return np.column_stack(cols)


def left_subspace_basis(system, data):
    """Real basis of the left interpolation subspace (columns unit-scaled)."""
    _validate_quadrature_data(system, data, "left")
    vectors = _normalized_columns(left_subspace_vectors(system, data.points, data.directions))
    basis = real_basis_from_conjugate_data(data.points, data.directions, vectors)
    _check_dimension(basis, data.points, "left interpolation subspace")
    return basis


def right_subspace_basis(system, data):
    """Real basis of the right interpolation subspace (columns unit-scaled)."""
    _validate_quadrature_data(system, data, "right")
    vectors = _normalized_columns(right_subspace_vectors(system, data.points, data.directions))
    basis = real_basis_from_conjugate_data(data.points, data.directions, vectors)
    _check_dimension(basis, data.points, "right interpolation subspace")
    return basis


def passive_subspace_vectors(system, points, directions):
    """Complex defining vectors ``(sigma_i I - F)^-H H^H mu_i`` as columns."""
    f, h = system.F, system.H
    eye = np.eye(f.shape[0])
    cols = []
    for sigma, mu in zip(points, directions):
        cols.append(
            linalg.solve(
                np.conj(sigma) * eye - f.conj().T,
                h.conj().T @ mu,
                context=f"passive interpolation point {sigma}",
            )
        )
    return np.column_stack(cols)


def passive_subspace_basis(system, data):
    """Orthonormal complex basis used by the passivity-preserving reduction."""
    if not isinstance(system, AnnihilationSystem):
        raise DataValidationError("passive reductions need an annihilation-form system")
    if data.side != "left":
        raise DataValidationError("the passive Galerkin construction uses left data")
    if data.directions.shape[1] != system.n_outputs:
        raise DataValidationError(
            f"directions live in C^{data.directions.shape[1]} but the system has "
            f"{system.n_outputs} outputs"
        )
    raw = _normalized_columns(
        passive_subspace_vectors(system, data.points, data.directions)
    )
    _check_dimension(raw, data.points, "passive interpolation subspace")
    return linalg.orthonormal_range(raw)


def _validate_quadrature_data(system, data, side):
    if not isinstance(system, QuadratureSystem):
        raise DataValidationError("left/right reductions need a quadrature-form system")
    if data.side != side:
        raise DataValidationError(f"expected {side}-side data, got {data.side}")
    if len(data) % 2:
        raise DataValidationError("quadrature reductions need an even number of data items")
    expected = 2 * (system.n_outputs if side == "left" else system.n_inputs)
    if data.directions.shape[1] != expected:
        raise DataValidationError(
            f"directions live in C^{data.directions.shape[1]} but the {side} side of "
            f"this system needs C^{expected}"
        )
    _conjugate_pairing(data.points, data.directions)


def _interpolation_residuals(full, reduced, data):
    abs_res = np.empty(len(data))
    refs = np.empty(len(data))
    for i, (sigma, direction) in enumerate(zip(data.points, data.directions)):
        full_tf = transfer(full, sigma)
        red_tf = transfer(reduced, sigma)
        if data.side == "left":
            target = direction.conj() @ full_tf
            got = direction.conj() @ red_tf
        else:
            target = full_tf @ direction
            got = red_tf @ direction
        abs_res[i] = np.linalg.norm(got - target)
        refs[i] = np.linalg.norm(target)
    return abs_res, refs


def _sorted_poles(state_matrix):
    poles = linalg.eigenvalues(state_matrix)
    order = np.lexsort((poles.imag, poles.real))
    return poles[order]


def _quadrature_result(system, data, w, v, pr_tol, convention=None, scores=None):
    a_r = w.T @ system.A @ v
    b_r = w.T @ system.B
    c_r = system.C @ v
    reduced = QuadratureSystem(A=a_r, B=b_r, C=c_r, D=system.D)
    abs_res, refs = _interpolation_residuals(system, reduced, data)
    diagnostics = ReductionDiagnostics(
        interpolation_residuals=abs_res,
        interpolation_references=refs,
        realizability=check_realizability(reduced, pr_tol),
        biorthogonality=float(np.linalg.norm(w.T @ v - np.eye(w.shape[1]))),
        poles=_sorted_poles(a_r),
        scaling_convention=convention,
        scaling_residuals=scores or {},
    )
    return ReductionResult(w=w, v=v, reduced=reduced, data=data, diagnostics=diagnostics)


def reduce_left(system, data, pr_tol=1e-8):
    """Left-tangential reduction of a quadrature-form system.

    The reduced transfer matches ``mu_i^H Xi(sigma_i)`` at every data item,
    and the reduced model satisfies the same realizability constraints as the
    original (up to the accuracy of the input model itself).
    """
    w_hat = left_subspace_basis(system, data)
    jn = symplectic_form(system.n_modes)
    pairing = w_hat.T @ jn @ w_hat
    try:
        form = skew_normal_form(pairing)
    except RankDeficiencyError as exc:
        raise RankDeficiencyError(
            "the skew pairing matrix of the left interpolation subspace is singular; "
            "choose different points or directions"
        ) from exc
    w = w_hat @ form.T.T
    v = jn @ w @ np.linalg.inv(w.T @ jn @ w)
    return _quadrature_result(system, data, w, v, pr_tol)


def _right_candidate(v_hat, jn, system, data, pr_tol, flavor):
    pairing = v_hat.T @ jn @ v_hat
    if flavor == "inverse-pairing":
        # Scale so that T J_r T^T equals the inverse of the transposed pairing.
        skew_normal_form(pairing)  # reject singular pairing before inverting
        form = skew_normal_form(np.linalg.inv(-pairing))
        t = np.linalg.inv(form.T)
    else:
        # Scale the pairing matrix itself onto J_r, mirroring the left recipe.
        form = skew_normal_form(pairing)
        t = form.T
    v = v_hat @ t.T
    w = jn @ v @ np.linalg.inv(v.T @ jn @ v)
    return _quadrature_result(system, data, w, v, pr_tol, convention=flavor)


def reduce_right(system, data, pr_tol=1e-8):
    """Right-tangential reduction of a quadrature-form system.

    The reduced transfer matches ``Xi(sigma_i) nu_i`` at every data item.
    Two sign/transpose conventions exist for the skew scaling step; both are
    evaluated and the one whose reduced model actually satisfies the
    realizability constraints is kept (the residuals of both are recorded in
    the diagnostics).
    """
    v_hat = right_subspace_basis(system, data)
    jn = symplectic_form(system.n_modes)
    try:
        candidates = [
            _right_candidate(v_hat, jn, system, data, pr_tol, flavor)
            for flavor in ("inverse-pairing", "direct-pairing")
        ]
    except RankDeficiencyError as exc:
        raise RankDeficiencyError(
            "the skew pairing matrix of the right interpolation subspace is singular; "
            "choose different points or directions"
        ) from exc

    def structural_score(result):
        # The third residual is convention-independent (D is untouched).
        return max(result.diagnostics.realizability.residuals[:2])

    scores = {c.diagnostics.scaling_convention: structural_score(c) for c in candidates}
    best = min(candidates, key=structural_score)
    if scores["inverse-pairing"] <= 1.5 * scores["direct-pairing"]:
        best = candidates[0]
    diag = best.diagnostics
    diagnostics = ReductionDiagnostics(
        interpolation_residuals=diag.interpolation_residuals,
        interpolation_references=diag.interpolation_references,
        realizability=diag.realizability,
        biorthogonality=diag.biorthogonality,
        poles=diag.poles,
        scaling_convention=diag.scaling_convention,
        scaling_residuals=scores,
    )
    return ReductionResult(
        w=best.w, v=best.v, reduced=best.reduced, data=data, diagnostics=diagnostics
    )


def reduce_passive(system, data, pr_tol=1e-10):
    """Galerkin reduction of a passive annihilation-form system.

    Uses an orthonormal basis of the left interpolation subspace for both
    projection sides, so the reduced model stays realizable and completely
    passive.
    """
    v_a = passive_subspace_basis(system, data)
    f_r = v_a.conj().T @ system.F @ v_a
    g_r = v_a.conj().T @ system.G
    h_r = system.H @ v_a
    reduced = AnnihilationSystem(F=f_r, G=g_r, H=h_r, K=system.K)
    abs_res, refs = _interpolation_residuals(system, reduced, data)
    diagnostics = ReductionDiagnostics(
        interpolation_residuals=abs_res,
        interpolation_references=refs,
        realizability=check_realizability(reduced, pr_tol),
        biorthogonality=float(
            np.linalg.norm(v_a.conj().T @ v_a - np.eye(v_a.shape[1]))
        ),
        poles=_sorted_poles(f_r),
    )
    return ReductionResult(w=v_a, v=v_a, reduced=reduced, data=data, diagnostics=diagnostics)


@dataclass(frozen=True)
class StabilityCertificate:
    """Stability/minimality evidence for a passive reduction.

    The reduced model is asymptotically stable (equivalently minimal) exactly
    when no eigenvector of the reduced state matrix is annihilated by
    ``G^H V_a``; ``condition_values`` holds those norms per eigenvector.
    """

    stable: bool
    minimal: bool
    eigenvalues: np.ndarray
    condition_values: np.ndarray
    threshold: float
    range_condition: bool
    separation_condition: bool


def passive_stability_certificate(result, g=None, tol_scale=1e-10, axis_tol=1e-8):
    """Evaluate the stability certificate of a passive reduction.

    ``g`` defaults to the coupling matrix the reduction was built from; pass
    the original full-order coupling when the result was assembled by hand.
    Two sufficient conditions are also reported: containment of the
    projection subspace in the orthogonal complement of ``ker(G^H)``, and
    separation of every interpolation point from the imaginary-axis
    eigenvalues of the reduced state matrix.
    """
    if g is None:
        raise DataValidationError("the original coupling matrix is required")
    g = np.asarray(g, dtype=complex)
    v_a = np.asarray(result.v, dtype=complex)
    f_r = result.reduced.F
    values, vectors = linalg.eigenpairs(f_r)
    condition_values = np.array(
        [np.linalg.norm(g.conj().T @ v_a @ vectors[:, k]) for k in range(values.size)]
    )
    threshold = tol_scale * max(linalg.spectral_norm(g), 1e-300)
    stable = bool(np.all(values.real < 0.0))
    minimal = bool(np.all(condition_values > threshold))

    coupled_range = linalg.orthonormal_range(g)
    if coupled_range.shape[1] == 0:
        range_condition = False
    else:
        projector = coupled_range @ coupled_range.conj().T
        defect = linalg.spectral_norm(v_a - projector @ v_a)
        range_condition = bool(defect <= 1e-10 * max(1.0, linalg.spectral_norm(v_a)))

    scale = max(linalg.spectral_norm(f_r), 1e-300)
    axis_eigs = values[np.abs(values.real) <= axis_tol * scale]
    if axis_eigs.size == 0:
        separation_condition = True
    else:
        points = np.asarray(result.data.points, dtype=complex)
        gaps = np.abs(points[:, None] - axis_eigs[None, :])
        separation_condition = bool(gaps.min() > axis_tol * scale)

    return StabilityCertificate(
        stable=stable,
        minimal=minimal,
        eigenvalues=values,
        condition_values=condition_values,
        threshold=float(threshold),
        range_condition=range_condition,
        separation_condition=separation_condition,
    )
