"""Row tuples of matrices and their defect/kernel structure.

A row tuple is an n-tuple of d x d complex matrices whose row operator
[T_1 ... T_n] is a contraction, certified at construction.  This module
computes the two defect operators and spaces, the truncated Poisson
kernel, the limit of the completely positive map X -> sum T_i X T_i*, the
largest subspace on which the adjoint tuple acts isometrically, and the
purity verdict.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import fock
from .errors import NotARowContraction, ShapeMismatch
from .numerics import (
    DEFAULT_TOL,
    Subspace,
    ToleranceConfig,
    col_space,
    herm_norm,
    null_space,
    op_norm,
    psd_sqrt,
)

__all__ = [
    "RowTuple",
    "new_row_tuple",
    "DefectData",
    "defects",
    "PoissonKernelMatrix",
    "poisson_kernel",
    "CPLimit",
    "cp_limit",
    "hc_subspace",
    "is_pure",
    "invariant_closure",
    "row_isometry_defect",
]


@dataclass(frozen=True)
class RowTuple:
    """Certified row contraction; construct through new_row_tuple."""

    mats: tuple
    tol: ToleranceConfig = DEFAULT_TOL

    @property
    def n(self) -> int:
        return len(self.mats)

    @property
    def dim(self) -> int:
        return self.mats[0].shape[0]

    def row(self) -> np.ndarray:
        """The row operator [T_1 ... T_n], mapping C^(n d) to C^d."""
        return np.hstack(self.mats)

    def row_gram(self) -> np.ndarray:
        """sum T_i T_i*, the d x d Gram of the row."""
        return sum(t @ t.conj().T for t in self.mats)

    def col_gram(self) -> np.ndarray:
        """T* T as an (n d) x (n d) block matrix [T_i* T_j]."""
        r = self.row()
        return r.conj().T @ r

    def cp_map(self, x: np.ndarray) -> np.ndarray:
        """The completely positive map X -> sum T_i X T_i*."""
        return sum(t @ x @ t.conj().T for t in self.mats)

    def word_product(self, word) -> np.ndarray:
        """T_alpha, the product of the tuple along a word."""
        out = np.eye(self.dim, dtype=complex)
        for letter in word:
            out = out @ self.mats[letter - 1]
        return out


def new_row_tuple(mats, tol: ToleranceConfig | None = None) -> RowTuple:
    """Certify and wrap a list of matrices as a row contraction."""
    tol = tol or DEFAULT_TOL
    ms = tuple(np.asarray(m, dtype=complex) for m in mats)
    if not ms:
        raise ShapeMismatch("need at least one matrix")
    d = ms[0].shape
    if len(d) != 2 or d[0] != d[1]:
        raise ShapeMismatch(f"matrices must be square, got {d}")
    for m in ms:
        if m.shape != d:
            raise ShapeMismatch(f"inconsistent shapes {d} vs {m.shape}")
    gram = sum(m @ m.conj().T for m in ms)
    top = float(np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))[-1]) if d[0] else 0.0
    if top > 1.0 + tol.residual_abs:
        raise NotARowContraction(f"largest eigenvalue of sum T_i T_i* is {top:.12f}")
    return RowTuple(ms, tol)


@dataclass(frozen=True)
class DefectData:
    """Defect operators and spaces of a row tuple."""

    delta_T: np.ndarray       # d x d, sqrt(I - sum T_i T_i*)
    delta_Tstar: np.ndarray   # nd x nd, sqrt(I - T* T)
    D_T: Subspace             # range of delta_T
    D_Tstar: Subspace         # range of delta_Tstar


def defects(t: RowTuple) -> DefectData:
    d = t.dim
    delta_sq = np.eye(d) - t.row_gram()
    delta_star_sq = np.eye(t.n * d) - t.col_gram()
    # rank decisions on the squared defects: the square root lifts roundoff
    # noise from eps to sqrt(eps), which would pollute the rank
    return DefectData(
        delta_T=psd_sqrt(delta_sq, t.tol, scale_floor=1.0),
        delta_Tstar=psd_sqrt(delta_star_sq, t.tol, scale_floor=1.0),
        D_T=col_space(delta_sq, t.tol, scale_floor=1.0),
        D_Tstar=col_space(delta_star_sq, t.tol, scale_floor=1.0),
    )


@dataclass(frozen=True)
class PoissonKernelMatrix:
    """Truncated Poisson kernel h -> sum e_alpha (x) Delta T_alpha* h."""

    depth: int
    matrix: np.ndarray       # (dim Fock * rank Delta) x d
    defect_space: Subspace   # D_T, fixing the coordinates of the target

    @property
    def defect_rank(self) -> int:
        return self.defect_space.dim


def poisson_kernel(t: RowTuple, depth: int, dd: DefectData | None = None) -> PoissonKernelMatrix:
    """Assemble the kernel up to word length `depth`.

    Satisfies K^H K = I - Phi^(depth+1)(I) exactly, Phi being the row's
    completely positive map.
    """
    dd = dd or defects(t)
    ctx = fock.FockContext(t.n, depth)
    f = dd.D_T.frame
    head = f.conj().T @ dd.delta_T          # rank x d
    adjoints = {(): np.eye(t.dim, dtype=complex)}
    blocks = []
    for w in ctx.words:
        if w:
            adjoints[w] = t.mats[w[-1] - 1].conj().T @ adjoints[w[:-1]]
        blocks.append(head @ adjoints[w])
    return PoissonKernelMatrix(depth, np.vstack(blocks) if blocks else head, dd.D_T)


@dataclass(frozen=True)
class CPLimit:
    """Monotone limit of Phi^k(I) with convergence report."""

    Q: np.ndarray
    iterations: int
    converged: bool


def cp_limit(t: RowTuple) -> CPLimit:
    """Iterate Phi^k(I); the sequence decreases monotonically for row contractions."""
    x = np.eye(t.dim, dtype=complex)
    for k in range(t.tol.max_iter):
        x_next = t.cp_map(x)
        if op_norm(x_next - x) <= t.tol.fixed_point_abs:
            return CPLimit(x_next, k + 1, True)
        x = x_next
    return CPLimit(x, t.tol.max_iter, False)


def invariant_closure(seed: Subspace, mats, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """Smallest subspace containing the seed and invariant under all mats.

    Incremental Krylov sweep: each round only the images of the directions
    added last round are orthogonalized against the accumulated frame.
    """
    ambient = seed.ambient_dim
    frame = seed.frame
    fresh = frame
    while frame.shape[1] < ambient and fresh.shape[1]:
        cand = np.hstack([m @ fresh for m in mats])
        if frame.shape[1]:
            cand = cand - frame @ (frame.conj().T @ cand)
            cand = cand - frame @ (frame.conj().T @ cand)
        fresh = col_space(cand, tol, scale_floor=1.0).frame
        if fresh.shape[1]:
            frame = np.hstack([frame, fresh])
    return Subspace(frame, tol.rank_rel)


def hc_subspace(t: RowTuple) -> Subspace:
    """Largest adjoint-invariant subspace annihilated by the defect operator.

    Computed by the exact stabilizing iteration
    W_{k+1} = { h in W_k : T_i* h in W_k for all i },
    starting from ker Delta_T; stabilizes in at most d steps and equals the
    kernel of the Poisson kernel at any depth >= d.
    """
    delta_sq = np.eye(t.dim) - t.row_gram()
    cur = null_space(delta_sq, t.tol, scale_floor=1.0)
    # orthobasis of the complement of W_k, grown by the directions cut off
    comp = col_space(delta_sq, t.tol, scale_floor=1.0).frame
    for _ in range(t.dim + 1):
        if cur.dim == 0:
            return cur
        constraints = np.vstack([comp.conj().T @ m.conj().T @ cur.frame for m in t.mats])
        _, s, vh = scipy.linalg.svd(constraints, full_matrices=False, check_finite=False)
        cutoff = t.tol.rank_rel * max(float(s[0]) if s.size else 0.0, 1.0) * max(constraints.shape)
        rank = int(np.sum(s > cutoff))
        if rank == 0:
            return cur
        q = np.linalg.qr(vh[:rank].conj().T, mode="complete")[0]
        comp = np.hstack([comp, cur.frame @ q[:, :rank]])
        cur = Subspace(cur.frame @ q[:, rank:], t.tol.rank_rel)
    return cur


def is_pure(t: RowTuple, limit: CPLimit | None = None) -> str:
    """Three-valued purity verdict: 'pure', 'not_pure' or 'indeterminate'."""
    limit = limit or cp_limit(t)
    if not limit.converged:
        return "indeterminate"
    top = float(np.linalg.eigvalsh(0.5 * (limit.Q + limit.Q.conj().T))[-1])
    return "pure" if top <= t.tol.residual_abs else "not_pure"


def row_isometry_defect(t: RowTuple, frame: np.ndarray) -> float:
    """Norm of the compressed isometry defect [delta_ij I - T_i* T_j] on a frame."""
    if frame.shape[1] == 0:
        return 0.0
    stacked = np.hstack([m @ frame for m in t.mats])
    big = stacked.conj().T @ stacked
    eye = np.kron(np.eye(t.n), frame.conj().T @ frame)
    return herm_norm(eye - big)
