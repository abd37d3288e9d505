"""Heuristic tangent-direction templates and interpolation-frequency search.

Tangent directions are picked so the most important output (or input) pairs
are matched at the largest number of frequencies; interpolation points are
placed on the imaginary axis in conjugate pairs ``(i w_j, -i w_j)`` so a real
basis exists.  The frequencies themselves come from derivative-free local
minimization of either an H-infinity or an H2 error cost, both evaluated
through a complex orthonormal basis of the candidate interpolation subspace
(the reduced transfer only depends on the subspace, so this matches the cost
of the real-basis reduction built at the same frequencies).
"""

import dataclasses
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from . import linalg
from .analysis import _h2_integral, default_grid, grid_supremum
from .errors import InfeasiblePointError, QmorError, StructureError
from .reduction import (
    left_subspace_vectors,
    passive_subspace_vectors,
    right_subspace_vectors,
)
from .systems import AnnihilationSystem, QuadratureSystem, symplectic_form

SCAN_POINTS_1D = 64
SCAN_POINTS_ND = 16
SCAN_POINTS_CAP = 4096
PENALTY_FACTOR = 1e6
REFINE_REL_TOL = 1e-4


def tangent_directions(r, n_output_pairs, permutation=None):
    """Heuristic stack of ``2r`` tangent directions (rows) in ``R^{2l}``.

    With ``E_k = (e_1, e_1, e_2, e_2, ..., e_k, e_k)`` the pattern is ``E_r``
    when ``r <= l`` and ``(E_l, ..., E_l, e_1, e_1, ...)`` otherwise, then
    re-ordered by the output-importance permutation.  Real vectors, so the
    conjugate-closure requirement is trivially met.
    """
    ell = n_output_pairs
    dim = 2 * ell
    if r < 1 or ell < 1:
        raise StructureError("need r >= 1 and at least one output pair")
    indices = []
    if r <= ell:
        for k in range(r):
            indices += [k, k]
    else:
        full_blocks, remainder = divmod(r, ell)
        for _ in range(full_blocks):
            for k in range(ell):
                indices += [k, k]
        for k in range(remainder):
            indices += [k, k]
    directions = np.zeros((2 * r, dim))
    directions[np.arange(2 * r), indices] = 1.0
    if permutation is not None:
        permutation = linalg.as_matrix(permutation, "permutation")
        if permutation.shape != (dim, dim):
            raise StructureError(
                f"permutation has shape {permutation.shape}, expected ({dim}, {dim})"
            )
        directions = directions @ permutation  # rows become Pi^T e_i
    return directions


def conjugate_pair_points(omegas):
    """Interleaved conjugate template ``(i w_1, -i w_1, ..., i w_r, -i w_r)``."""
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    if np.any(omegas < 0):
        raise StructureError("template frequencies must be nonnegative")
    points = np.empty(2 * omegas.size, dtype=complex)
    points[0::2] = 1j * omegas
    points[1::2] = -1j * omegas
    return points


def symmetric_dc_points(omegas):
    """Odd-count template ``(i w_1, ..., i w_k, 0, -i w_k, ..., -i w_1)``."""
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    if np.any(omegas < 0):
        raise StructureError("template frequencies must be nonnegative")
    ups = 1j * omegas
    return np.concatenate([ups, [0.0 + 0.0j], -ups[::-1]])


@dataclass(frozen=True)
class SelectionProblem:
    """Specification of an interpolation-frequency search."""

    system: QuadratureSystem | AnnihilationSystem
    side: str
    r: int
    directions: np.ndarray
    omega_bounds: tuple | None = None
    cost: str = "hinf"
    tie_omegas: bool = True
    template: str = "conjugate_pairs"

    def __post_init__(self):
        if self.side not in ("left", "right", "passive"):
            raise StructureError(f"side must be left/right/passive, got {self.side!r}")
        if self.cost not in ("hinf", "h2"):
            raise StructureError(f"cost must be hinf or h2, got {self.cost!r}")
        if self.template not in ("conjugate_pairs", "symmetric_with_dc"):
            raise StructureError(f"unknown template {self.template!r}")
        if self.template == "symmetric_with_dc" and self.r % 2 == 0:
            raise StructureError("the symmetric-with-dc template needs an odd point count")
        directions = np.atleast_2d(np.array(self.directions, dtype=complex))
        expected = self.r if self.side == "passive" else 2 * self.r
        if directions.shape[0] != expected:
            raise StructureError(
                f"{directions.shape[0]} directions supplied, expected {expected}"
            )
        if self.omega_bounds is not None:
            lo, hi = self.omega_bounds
            if not (0 < lo < hi < math.inf):
                raise StructureError("omega bounds must satisfy 0 < lo < hi < inf")
        directions.setflags(write=False)
        object.__setattr__(self, "directions", directions)

    @property
    def n_free(self):
        if self.tie_omegas:
            return 1
        if self.template == "symmetric_with_dc":
            return (self.r - 1) // 2
        return self.r

    def expand_points(self, omegas):
        omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
        if self.template == "symmetric_with_dc":
            k = (self.r - 1) // 2
            tiled = np.full(k, omegas[0]) if self.tie_omegas else omegas
            return symmetric_dc_points(tiled)
        tiled = np.full(self.r, omegas[0]) if self.tie_omegas else omegas
        return conjugate_pair_points(tiled)

    def state_matrix(self):
        if isinstance(self.system, QuadratureSystem):
            return self.system.A
        return self.system.F


def _orth_or_infeasible(vectors, points):
    rank, basis, _ = linalg.rank_and_bases(_unit_columns(vectors))
    if rank < vectors.shape[1]:
        raise InfeasiblePointError(
            f"interpolation subspace at points {np.array2string(points, precision=6)} "
            f"has dimension {rank} < {vectors.shape[1]}"
        )
    return basis


def _unit_columns(m):
    norms = np.linalg.norm(m, axis=0)
    norms = np.where(norms == 0.0, 1.0, norms)
    return m / norms


def _projected_difference(problem, points):
    """Full and projected ``(A, B, C)`` triples for the candidate subspace."""
    system = problem.system
    if problem.side == "passive":
        if not isinstance(system, AnnihilationSystem):
            raise StructureError("passive selection needs an annihilation-form system")
        v_a = _orth_or_infeasible(
            passive_subspace_vectors(system, points, problem.directions), points
        )
        f, g, h = system.F, system.G, system.H
        return (f, g, h), (v_a.conj().T @ f @ v_a, v_a.conj().T @ g, h @ v_a)

    if not isinstance(system, QuadratureSystem):
        raise StructureError("left/right selection needs a quadrature-form system")
    a, b, c = system.A, system.B, system.C
    jn = symplectic_form(system.n_modes)
    if problem.side == "left":
        w = _orth_or_infeasible(
            left_subspace_vectors(system, points, problem.directions), points
        )
        pairing = w.conj().T @ jn @ w
        if np.linalg.cond(pairing) > 1e12:
            raise InfeasiblePointError(
                f"skew pairing matrix is singular at points "
                f"{np.array2string(points, precision=6)}"
            )
        v = jn @ w @ np.linalg.inv(pairing)
    else:
        v = _orth_or_infeasible(
            right_subspace_vectors(system, points, problem.directions), points
        )
        pairing = v.conj().T @ jn @ v
        if np.linalg.cond(pairing) > 1e12:
            raise InfeasiblePointError(
                f"skew pairing matrix is singular at points "
                f"{np.array2string(points, precision=6)}"
            )
        w = jn @ v @ np.linalg.inv(pairing)
    return (a, b, c), (w.conj().T @ a @ v, w.conj().T @ b, c @ v)


def cost_hinf(problem, omegas, penalty=None):
    """Supremum over frequency of the projected error for candidate ``omegas``.

    Infeasible candidates raise :class:`InfeasiblePointError` unless a finite
    ``penalty`` substitute is supplied (the optimizer does this).
    """
    try:
        points = problem.expand_points(omegas)
        (a, b, c), (a_r, b_r, c_r) = _projected_difference(problem, points)
    except QmorError:
        if penalty is not None:
            return penalty
        raise
    # The projected matrices are complex even for real systems, but the error
    # norm is symmetric in omega whenever the full system is real, so mirror
    # the grid only for genuinely complex models.
    spec = dataclasses.replace(default_grid(a, a_r), two_sided=np.iscomplexobj(a))

    def f(omega):
        s = 1j * omega
        e = c @ np.linalg.solve(s * np.eye(a.shape[0]) - a, b) - c_r @ np.linalg.solve(
            s * np.eye(a_r.shape[0]) - a_r, b_r
        )
        return linalg.spectral_norm(e)

    return grid_supremum(f, spec.frequencies())[0]


def cost_h2(problem, omegas, penalty=None):
    """Frequency-integrated squared error for candidate ``omegas``."""
    try:
        points = problem.expand_points(omegas)
        (a, b, c), (a_r, b_r, c_r) = _projected_difference(problem, points)
        if not (linalg.is_hurwitz(a) and linalg.is_hurwitz(a_r)):
            raise InfeasiblePointError("projected model is unstable; H2 cost diverges")
        two_sided = np.iscomplexobj(a)
        return _h2_integral((a, b, c), (a_r, b_r, c_r), two_sided)
    except QmorError:
        if penalty is not None:
            return penalty
        raise


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of the frequency search with its full evaluation trace."""

    omegas: np.ndarray
    cost: float
    points: np.ndarray
    trace: list = field(default_factory=list)


def optimize_points(problem):
    """Deterministic coarse-scan plus simplex refinement of the point cost.

    The scan uses a logarithmic lattice (64 points for one free frequency,
    16 per dimension otherwise, capped at 4096 evaluations); the best lattice
    point seeds a Nelder-Mead refinement in log-frequency space.  Candidates
    whose subspace construction fails receive a large finite penalty so the
    search continues; an all-infeasible scan raises with per-point reasons.
    """
    cost_fn = cost_hinf if problem.cost == "hinf" else cost_h2
    if problem.omega_bounds is not None:
        lo, hi = problem.omega_bounds
    else:
        mags = np.abs(linalg.eigenvalues(problem.state_matrix()))
        mags = mags[mags > 0]
        if mags.size == 0:
            lo, hi = 1e-2, 1e2
        else:
            lo, hi = 1e-2 * mags.min(), 1e2 * mags.max()

    d = problem.n_free
    if d == 1:
        per_dim = SCAN_POINTS_1D
    else:
        per_dim = SCAN_POINTS_ND
        while per_dim**d > SCAN_POINTS_CAP:
            per_dim -= 1
    axis = np.logspace(math.log10(lo), math.log10(hi), per_dim)

    trace = []
    evaluations = []
    for combo in itertools.product(axis, repeat=d):
        omegas = np.array(combo)
        try:
            value = cost_fn(problem, omegas)
            feasible = True
            reason = ""
        except QmorError as exc:
            value = math.nan
            feasible = False
            reason = str(exc)
        evaluations.append((omegas, value, feasible, reason))

    feasible_values = [v for _, v, ok, _ in evaluations if ok and math.isfinite(v)]
    if not feasible_values:
        reasons = "; ".join(
            f"omega={np.array2string(o, precision=4)}: {r}" for o, _, ok, r in evaluations if not ok
        )
        raise InfeasiblePointError(f"every scanned candidate was infeasible: {reasons}")
    baseline = feasible_values[0]
    penalty = PENALTY_FACTOR * max(baseline, 1e-300)

    best_omegas, best_cost = None, math.inf
    for omegas, value, feasible, reason in evaluations:
        effective = value if feasible and math.isfinite(value) else penalty
        trace.append(
            {
                "phase": "scan",
                "omegas": omegas.tolist(),
                "cost": effective,
                "feasible": bool(feasible and math.isfinite(value)),
                "reason": reason,
            }
        )
        if effective < best_cost:
            best_cost, best_omegas = effective, omegas

    log_lo, log_hi = math.log10(lo), math.log10(hi)

    def refine_objective(x):
        if np.any(x < log_lo) or np.any(x > log_hi):
            value, feasible, reason = penalty, False, "outside the search interval"
        else:
            omegas = 10.0**x
            value = cost_fn(problem, omegas, penalty=penalty)
            feasible = value < penalty
            reason = "" if feasible else "construction failed (penalized)"
        trace.append(
            {
                "phase": "refine",
                "omegas": (10.0**x).tolist(),
                "cost": float(value),
                "feasible": feasible,
                "reason": reason,
            }
        )
        return value

    sol = scipy.optimize.minimize(
        refine_objective,
        np.log10(best_omegas),
        method="Nelder-Mead",
        options={
            "xatol": math.log10(1.0 + REFINE_REL_TOL) / 2,
            "fatol": 1e-6 * max(abs(best_cost), 1e-300),
            "maxiter": 400 * d,
            "disp": False,
        },
    )
    refined = 10.0**sol.x
    refined_cost = float(sol.fun)
    if refined_cost < best_cost:
        best_omegas, best_cost = refined, refined_cost
    return SelectionResult(
        omegas=np.asarray(best_omegas, dtype=float),
        cost=float(best_cost),
        points=problem.expand_points(best_omegas),
        trace=trace,
    )
