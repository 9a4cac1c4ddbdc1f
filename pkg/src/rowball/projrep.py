"""Unitary projective representation of the automorphism group.

Each automorphism is sent to the operator built from the Poisson kernel of
its boundary function on the truncated Fock space: the kernel maps into
Fock space tensored with an essentially one-dimensional defect space, and
flattening that direction yields a single matrix.  On the full space the
construction is unitary and intertwines the shifts with the boundary
function; truncation confines all claims to an interior block of degrees
with an explicit geometric tail budget.  Keep the center norm at or below
0.6: beyond that the tail budget degrades quickly at desk-scale depths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fock
from .contraction import RowTuple, new_row_tuple
from .errors import CertificationFailed, DefectNotRankOne, ValidationError
from .mobius import AutElement, aut_apply, compose
from .numerics import (
    DEFAULT_TOL,
    Subspace,
    hermitize,
    op_norm,
    psd_sqrt,
    subspace_from_indices,
)

__all__ = [
    "boundary_function",
    "ProjRepElement",
    "u_operator",
    "intertwining_residual",
    "Cocycle",
    "cocycle",
    "continuity_probe",
    "tail_budget",
    "boundary_isometry_budget",
    "intertwining_budget",
]


def tail_budget(lam_norm: float, depth: int, buffer: int) -> float:
    """Interior error allowance for the truncated representation operator.

    Truncation cuts the paths a length-(depth+1) product of boundary
    components can take: on inputs of degree depth-buffer the surviving
    amplitude is governed by binom(depth+1, buffer+1) * rho^(buffer+1),
    and the isometry defect is its square.  A geometric term
    10 rho^(depth-buffer)/(1-rho) is kept as a lower floor; it dominates
    deep below the cut but underestimates the top interior degrees.
    """
    if lam_norm >= 1.0:
        raise ValidationError("center norm must be < 1")
    if lam_norm == 0.0:
        return 1e-10
    geometric = 10.0 * lam_norm ** (depth - buffer) / (1.0 - lam_norm)
    amplitude = min(1.0, math.comb(depth + 1, buffer + 1) * lam_norm ** (buffer + 1))
    binomial = min(4.0 * amplitude ** 2, 2.0)
    return max(1e-10, geometric, binomial)


def boundary_isometry_budget(lam_norm: float, buffer: int) -> float:
    """Row-isometry defect allowance for a truncated boundary tuple.

    On the span of degrees <= depth-buffer the defect of
    [delta_ij - phi_i* phi_j] is rho^(2 buffer) up to roundoff (the missing
    mass of the cut paths), independent of the depth.
    """
    return max(1e-10, 1.5 * lam_norm ** (2 * buffer))


def intertwining_budget(lam_norm: float, depth: int, buffer: int) -> float:
    """Interior allowance for the shift-conjugation identity.

    Scales like the amplitude (not the square) of the cut-path law in
    tail_budget; saturates at 2 where truncation certifies nothing.
    """
    if lam_norm == 0.0:
        return 1e-9
    amplitude = math.comb(depth + 1, buffer + 1) * lam_norm ** (buffer + 1)
    return max(1e-9, min(3.0 * amplitude, 2.0))


def boundary_function(elem: AutElement, depth: int) -> RowTuple:
    """The automorphism evaluated at the truncated left creation operators."""
    ctx = fock.FockContext(elem.n, depth)
    shifts = fock.creation_ops(ctx, "left")
    return new_row_tuple(aut_apply(elem, shifts), elem.tol)


@dataclass(frozen=True)
class ProjRepElement:
    """Representation operator with its interior certificate."""

    elem: AutElement
    depth: int
    buffer: int
    u_op: np.ndarray
    interior: Subspace
    isometry_residual: float
    boundary: RowTuple

    @property
    def dim(self) -> int:
        return self.u_op.shape[0]


def _interior_indices(ctx: fock.FockContext, buffer: int) -> range:
    return ctx.indices_up_to_degree(ctx.N - buffer)


def u_operator(
    elem: AutElement,
    depth: int,
    buffer: int = 2,
    u_convention: str = "vacuum",
) -> ProjRepElement:
    """Build the representation operator of one automorphism.

    Rows are indexed by words: row alpha is (phi_alpha applied to the
    normalized defect image of the vacuum), conjugated.  The defect of the
    boundary function must be essentially rank one; its secondary singular
    value above the tail budget means the truncation is too shallow.
    """
    if buffer < 2:
        raise ValidationError("need buffer >= 2")
    ctx = fock.FockContext(elem.n, depth)
    bt = boundary_function(elem, depth)
    dim = ctx.dim
    lam_norm = float(np.linalg.norm(elem.lam))
    budget = tail_budget(lam_norm, depth, buffer)

    defect_sq = hermitize(np.eye(dim) - bt.row_gram())
    eigvals, eigvecs = np.linalg.eigh(defect_sq)
    if dim > 1 and np.sqrt(max(eigvals[-2], 0.0)) > budget:
        raise DefectNotRankOne(
            f"secondary defect singular value {np.sqrt(eigvals[-2]):.3e} above {budget:.3e}"
        )
    delta = psd_sqrt(defect_sq, elem.tol)

    if u_convention == "vacuum":
        u_vec = delta[:, 0]
    elif u_convention == "eigen":
        u_vec = eigvecs[:, -1]
    else:
        raise ValidationError(f"unknown u_convention {u_convention!r}")
    nrm = np.linalg.norm(u_vec)
    if nrm <= 1e-8:
        raise DefectNotRankOne("defect direction collapsed under truncation")
    u_vec = u_vec / nrm

    seed = delta @ u_vec
    vecs = {(): seed}
    u_op = np.zeros((dim, dim), dtype=complex)
    for row, word in enumerate(ctx.words):
        if word:
            vecs[word] = bt.mats[word[0] - 1] @ vecs[word[1:]]
        u_op[row, :] = vecs[word].conj()

    inter = list(_interior_indices(ctx, buffer))
    interior = subspace_from_indices(dim, inter, elem.tol)
    gram = u_op.conj().T @ u_op - np.eye(dim)
    residual = op_norm(gram[np.ix_(inter, inter)])
    if residual > budget:
        raise CertificationFailed(
            f"interior isometry defect {residual:.3e} exceeds budget {budget:.3e}"
        )
    return ProjRepElement(elem, depth, buffer, u_op, interior, residual, bt)


def intertwining_residual(rep: ProjRepElement) -> float:
    """Interior defect of the relation boundary_i = U* S_i U."""
    ctx = fock.FockContext(rep.elem.n, rep.depth)
    shifts = fock.creation_ops(ctx, "left")
    inter = list(_interior_indices(ctx, rep.buffer))
    worst = 0.0
    for b_i, s_i in zip(rep.boundary.mats, shifts):
        diff = b_i - rep.u_op.conj().T @ s_i @ rep.u_op
        worst = max(worst, op_norm(diff[:, inter]))
    return worst


@dataclass(frozen=True)
class Cocycle:
    """Scalar relating the product of two representation operators to the composite."""

    c: complex
    residual: float

    @property
    def modulus_defect(self) -> float:
        return abs(abs(self.c) - 1.0)


def cocycle(
    a: AutElement,
    b: AutElement,
    depth: int,
    buffer: int = 2,
    rep_a: ProjRepElement | None = None,
    rep_b: ProjRepElement | None = None,
    rep_ab: ProjRepElement | None = None,
) -> Cocycle:
    """Extract the scalar from U_a U_b = c U_(a b) and its interior residual."""
    rep_a = rep_a or u_operator(a, depth, buffer)
    rep_b = rep_b or u_operator(b, depth, buffer)
    rep_ab = rep_ab or u_operator(compose(a, b), depth, buffer)
    prod = rep_a.u_op @ rep_b.u_op
    vac = np.zeros(prod.shape[0], dtype=complex)
    vac[0] = 1.0
    c_raw = complex(np.vdot(rep_ab.u_op @ vac, prod @ vac))
    phase = c_raw / abs(c_raw) if abs(c_raw) > 0 else 1.0
    inter = list(_interior_indices(fock.FockContext(a.n, depth), buffer))
    residual = op_norm((prod - phase * rep_ab.u_op)[:, inter])
    return Cocycle(c_raw, residual)


def continuity_probe(
    elems,
    limit: AutElement,
    depth: int,
    buffer: int = 2,
    probes=None,
) -> list:
    """Strong-operator convergence probe: max adjoint deviation on fixed vectors."""
    rep_limit = u_operator(limit, depth, buffer)
    ctx = fock.FockContext(limit.n, depth)
    if probes is None:
        rng = np.random.default_rng(7)
        inter = list(_interior_indices(ctx, buffer))
        v = np.zeros(ctx.dim, dtype=complex)
        v[inter] = rng.standard_normal(len(inter)) + 1j * rng.standard_normal(len(inter))
        v /= np.linalg.norm(v)
        probes = [ctx.basis_vector(()), ctx.basis_vector((1,)), v]
    out = []
    for elem in elems:
        rep = u_operator(elem, depth, buffer)
        diff = rep.u_op.conj().T - rep_limit.u_op.conj().T
        out.append(max(float(np.linalg.norm(diff @ p)) for p in probes))
    return out
