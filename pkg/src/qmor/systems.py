"""System types for open harmonic-oscillator networks and their structure checks.

Two equivalent descriptions are supported.  The quadrature form uses real
matrices ``(A, B, C, D)`` acting on stacked position/momentum pairs, with
doubled dimensions ``2n, 2m, 2l``.  The annihilation-operator form uses
complex matrices ``(F, G, H, K)`` of plain dimensions ``n, m, l`` and exists
exactly for completely passive systems.

A system represents a genuine physical device only when its matrices satisfy
the realizability constraints checked by :func:`check_realizability`:

* quadrature:   ``A J_n + J_n A^T + B J_m B^T = 0``,
                ``J_n C^T + B J_m D^T = 0``,
                ``D J_m D^T = J_l``;
* annihilation: ``F + F^H + G G^H = 0``,
                ``H^H + G K^H = 0``,
                rows of ``K`` orthonormal (so ``K`` extends to a unitary).
"""

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import StructureError


def symplectic_form(n):
    """Block-diagonal matrix of ``n`` copies of ``[[0, 1], [-1, 0]]``."""
    if n < 1:
        raise StructureError("symplectic form needs at least one mode")
    return np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _frozen_array(value, name, *, real):
    arr = linalg.as_matrix(value, name)
    if real:
        if np.iscomplexobj(arr):
            if np.abs(arr.imag).max(initial=0.0) > 0.0:
                raise StructureError(f"{name} must be real")
            arr = arr.real
        arr = arr.astype(float, copy=True)
    else:
        arr = arr.astype(complex, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class QuadratureSystem:
    """Real state-space model ``(A, B, C, D)`` in quadrature coordinates.

    Shapes are ``A: 2n x 2n``, ``B: 2n x 2m``, ``C: 2l x 2n``, ``D: 2l x 2m``
    with ``l <= m``.  ``D`` is stored with its possibly non-square output
    block; selecting ``l < m`` output pairs just drops rows.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A", _frozen_array(self.A, "A", real=True))
        object.__setattr__(self, "B", _frozen_array(self.B, "B", real=True))
        object.__setattr__(self, "C", _frozen_array(self.C, "C", real=True))
        object.__setattr__(self, "D", _frozen_array(self.D, "D", real=True))
        two_n = self.A.shape[0]
        two_m = self.B.shape[1]
        two_l = self.C.shape[0]
        if self.A.shape != (two_n, two_n):
            raise StructureError(f"A must be square, got {self.A.shape}")
        if any(dim % 2 for dim in (two_n, two_m, two_l)):
            raise StructureError("quadrature dimensions must be even")
        if self.B.shape != (two_n, two_m):
            raise StructureError(f"B has shape {self.B.shape}, expected ({two_n}, {two_m})")
        if self.C.shape != (two_l, two_n):
            raise StructureError(f"C has shape {self.C.shape}, expected ({two_l}, {two_n})")
        if self.D.shape != (two_l, two_m):
            raise StructureError(f"D has shape {self.D.shape}, expected ({two_l}, {two_m})")
        if two_l > two_m:
            raise StructureError("output pair count exceeds input pair count")

    @property
    def n_modes(self):
        return self.A.shape[0] // 2

    @property
    def n_inputs(self):
        return self.B.shape[1] // 2

    @property
    def n_outputs(self):
        return self.C.shape[0] // 2

    def poles(self):
        return linalg.eigenvalues(self.A)


@dataclass(frozen=True)
class AnnihilationSystem:
    """Complex state-space model ``(F, G, H, K)`` in annihilation operators.

    Shapes are ``F: n x n``, ``G: n x m``, ``H: l x n``, ``K: l x m`` with
    ``l <= m``.
    """

    F: np.ndarray
    G: np.ndarray
    H: np.ndarray
    K: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "F", _frozen_array(self.F, "F", real=False))
        object.__setattr__(self, "G", _frozen_array(self.G, "G", real=False))
        object.__setattr__(self, "H", _frozen_array(self.H, "H", real=False))
        object.__setattr__(self, "K", _frozen_array(self.K, "K", real=False))
        n = self.F.shape[0]
        m = self.G.shape[1]
        ell = self.H.shape[0]
        if self.F.shape != (n, n):
            raise StructureError(f"F must be square, got {self.F.shape}")
        if self.G.shape != (n, m):
            raise StructureError(f"G has shape {self.G.shape}, expected ({n}, {m})")
        if self.H.shape != (ell, n):
            raise StructureError(f"H has shape {self.H.shape}, expected ({ell}, {n})")
        if self.K.shape != (ell, m):
            raise StructureError(f"K has shape {self.K.shape}, expected ({ell}, {m})")
        if ell > m:
            raise StructureError("output count exceeds input count")

    @property
    def n_modes(self):
        return self.F.shape[0]

    @property
    def n_inputs(self):
        return self.G.shape[1]

    @property
    def n_outputs(self):
        return self.H.shape[0]

    def poles(self):
        return linalg.eigenvalues(self.F)


@dataclass(frozen=True)
class RealizabilityReport:
    """Frobenius-norm residuals of the three realizability constraints."""

    residuals: tuple
    tol: float

    @property
    def passes(self):
        return max(self.residuals) <= self.tol

    @property
    def max_residual(self):
        return max(self.residuals)


def check_realizability(system, tol=1e-8):
    """Residuals of the physical-realizability constraints for either form."""
    if isinstance(system, QuadratureSystem):
        jn = symplectic_form(system.n_modes)
        jm = symplectic_form(system.n_inputs)
        jl = symplectic_form(system.n_outputs)
        r1 = system.A @ jn + jn @ system.A.T + system.B @ jm @ system.B.T
        r2 = jn @ system.C.T + system.B @ jm @ system.D.T
        r3 = system.D @ jm @ system.D.T - jl
    elif isinstance(system, AnnihilationSystem):
        r1 = system.F + system.F.conj().T + system.G @ system.G.conj().T
        r2 = system.H.conj().T + system.G @ system.K.conj().T
        r3 = system.K @ system.K.conj().T - np.eye(system.n_outputs)
    else:
        raise StructureError(f"unsupported system type {type(system).__name__}")
    residuals = tuple(linalg.frobenius_norm(r) for r in (r1, r2, r3))
    return RealizabilityReport(residuals=residuals, tol=float(tol))


def transfer(system, s):
    """Transfer function ``D + C (sI - A)^-1 B`` (or its annihilation analogue)."""
    if isinstance(system, QuadratureSystem):
        a, b, c, d = system.A, system.B, system.C, system.D
    elif isinstance(system, AnnihilationSystem):
        a, b, c, d = system.F, system.G, system.H, system.K
    else:
        raise StructureError(f"unsupported system type {type(system).__name__}")
    resolvent_rhs = linalg.solve(
        s * np.eye(a.shape[0]) - a, b, context=f"resolvent at s = {s}"
    )
    return d + c @ resolvent_rhs


def strictly_proper_transfer(system, s):
    """Transfer function without the feedthrough term."""
    if isinstance(system, QuadratureSystem):
        a, b, c = system.A, system.B, system.C
    else:
        a, b, c = system.F, system.G, system.H
    resolvent_rhs = linalg.solve(
        s * np.eye(a.shape[0]) - a, b, context=f"resolvent at s = {s}"
    )
    return c @ resolvent_rhs


def real_embedding(m):
    """Real 2p x 2q image of a complex p x q matrix.

    Each entry ``x + iy`` becomes the 2x2 block ``[[x, -y], [y, x]]`` so the
    embedding is a ring homomorphism that commutes with the symplectic form.
    """
    m = np.asarray(m, dtype=complex)
    p, q = m.shape
    out = np.zeros((2 * p, 2 * q))
    out[0::2, 0::2] = m.real
    out[0::2, 1::2] = -m.imag
    out[1::2, 0::2] = m.imag
    out[1::2, 1::2] = m.real
    return out


def annihilation_to_quadrature(system):
    """Quadrature-form model of a passive system via the real embedding.

    With modes split as ``a_j = (q_j + i p_j) / 2`` and fields carried as
    doubled real quadrature pairs, the scale factors cancel and each matrix
    maps through :func:`real_embedding` unchanged; realizability is preserved
    exactly.
    """
    return QuadratureSystem(
        A=real_embedding(system.F),
        B=real_embedding(system.G),
        C=real_embedding(system.H),
        D=real_embedding(system.K),
    )


def random_realizable_quadrature(n, m, ell, seed):
    """Random exactly-realizable quadrature system (deterministic per seed).

    Construction: draw a symmetric Hamiltonian matrix ``R`` and arbitrary
    ``B``, pick an orthogonal-symplectic ``D`` (real embedding of a random
    unitary, truncated to ``2*ell`` rows), then set
    ``A = 2 J_n R + B J_m B^T J_n / 2`` and ``C^T = J_n B J_m D^T`` so all
    three constraints hold by algebra.
    """
    if ell > m:
        raise StructureError("need ell <= m")
    rng = np.random.default_rng(seed)
    jn = symplectic_form(n)
    jm = symplectic_form(m)
    r_sym = rng.standard_normal((2 * n, 2 * n))
    r_sym = (r_sym + r_sym.T) / 2
    b = rng.standard_normal((2 * n, 2 * m))
    unitary = np.linalg.qr(
        rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    )[0]
    d = real_embedding(unitary)[: 2 * ell, :]
    a = 2 * jn @ r_sym + 0.5 * b @ jm @ b.T @ jn
    c = (jn @ b @ jm @ d.T).T
    return QuadratureSystem(A=a, B=b, C=c, D=d)


def random_realizable_annihilation(n, m, ell, seed):
    """Random exactly-realizable annihilation-form system (deterministic per seed).

    Draws a Hermitian ``Omega`` and coupling ``G``, a ``K`` with orthonormal
    rows, and closes the constraints with ``F = -i Omega - G G^H / 2`` and
    ``H = -K G^H``.
    """
    if ell > m:
        raise StructureError("need ell <= m")
    rng = np.random.default_rng(seed)
    omega = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    omega = (omega + omega.conj().T) / 2
    g = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    unitary = np.linalg.qr(
        rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    )[0]
    k = unitary[:ell, :]
    f = -1j * omega - 0.5 * g @ g.conj().T
    h = -k @ g.conj().T
    return AnnihilationSystem(F=f, G=g, H=h, K=k)


def closed_loop_state_matrix(plant, controller):
    """State matrix of the feedback interconnection of a plant and controller.

    ``plant`` is ``(A, B_u, C)`` and ``controller`` is ``(A_c, B_c, C_c)``
    where the controller is driven by the plant output and its own output
    drives the actuation channel:  the loop matrix is
    ``[[A, B_u C_c], [B_c C, A_c]]``.
    """
    a, b_u, c = (linalg.as_matrix(m) for m in plant)
    a_c, b_c, c_c = (linalg.as_matrix(m) for m in controller)
    if b_u.shape[0] != a.shape[0] or c.shape[1] != a.shape[1]:
        raise StructureError("plant matrices have inconsistent dimensions")
    if b_c.shape[0] != a_c.shape[0] or c_c.shape[1] != a_c.shape[1]:
        raise StructureError("controller matrices have inconsistent dimensions")
    if b_u.shape[1] != c_c.shape[0] or b_c.shape[1] != c.shape[0]:
        raise StructureError("plant/controller port dimensions do not match")
    return np.block([[a, b_u @ c_c], [b_c @ c, a_c]])
