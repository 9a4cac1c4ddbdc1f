"""The (p, m, q) invariant, classification, triangularization and models.

For a row tuple, m is the polynomial degree of its characteristic
function, q the dimension of the kernel of the Poisson kernel, and p the
dimension of the wandering slice D_m (-) D_(m+1) of the defect chain (the
rank of the defect operator when m is infinite).  The triple is invariant
under unitary conjugation and classifies pure row isometries completely.

Finite-dimensional dense tuples with n >= 2 and finite degree always have
a trivial isometric part, so pure-isometry behaviour is exercised through
model tuples built on a truncated Fock block, with the top-degree slice
excluded from isometry tests as a truncation artifact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fock
from .charfun import _defect_space, _degree_data
from .contraction import (
    RowTuple,
    hc_subspace,
    invariant_closure,
    new_row_tuple,
    row_isometry_defect,
)
from .errors import (
    CertificationFailed,
    CouplingsNotZero,
    NotAnIsometry,
    NotPolynomial,
    ShapeMismatch,
    ValidationError,
)
from .numerics import (
    DEFAULT_TOL,
    Subspace,
    ToleranceConfig,
    col_space,
    complement_of,
    full_space,
    op_norm,
    subspace_from_indices,
    subspace_minus,
    subspace_sum,
    zero_subspace,
)

__all__ = [
    "GammaValue",
    "gamma",
    "classify",
    "Decomposition",
    "decompose",
    "WoldResult",
    "wold",
    "ModelTuple",
    "RealizedModel",
    "realize",
    "gamma_structural",
]

INF = math.inf


@dataclass(frozen=True)
class GammaValue:
    """Triple (p, m, q) with entries in the naturals extended by infinity."""

    p: int | float
    m: int | float
    q: int | float

    def as_tuple(self):
        return (self.p, self.m, self.q)

    def encode(self):
        """JSON-friendly form with 'inf' literals."""
        return ["inf" if math.isinf(v) else int(v) for v in self.as_tuple()]

    def __str__(self):
        vals = ", ".join("inf" if math.isinf(v) else str(int(v)) for v in self.as_tuple())
        return f"({vals})"


def gamma(t: RowTuple, exclude: Subspace | None = None) -> GammaValue:
    """Compute the invariant triple of a row tuple."""
    seed = _defect_space(t)
    report, chain = _degree_data(t, exclude, seed)
    q = hc_subspace(t).dim
    if math.isinf(report.degree):
        p = seed.dim
    else:
        m = int(report.degree)
        slice_ = subspace_minus(chain[m], chain[m + 1], t.tol)
        p = subspace_minus(slice_, exclude, t.tol).dim
    return GammaValue(p, report.degree, q)


def classify(g: GammaValue) -> set:
    """Membership labels determined by the invariant triple alone."""
    labels = set()
    m_fin = not math.isinf(g.m)
    if g.m == 0 and g.q == 0:
        labels.add("pure_isometry")
    if m_fin and g.q == 0:
        labels.add("pure_polynomial")
    if g.q == 0:
        labels.add("cnc")
    if g.m == 0:
        labels.add("constant_charfun")
    if g.p == 0 and m_fin and g.q == 0:
        labels.add("nilpotent_form")
    if g.p == 0 and g.m == 0:
        labels.add("coisometry_form")
    return labels


@dataclass(frozen=True)
class Decomposition:
    """Certified upper-triangular form in the adapted orthonormal basis."""

    H_v: Subspace
    H_nil: Subspace
    H_c: Subspace
    blocks: list      # per matrix: 3x3 nested list of compressed blocks
    degree: int

    def frames(self):
        return [self.H_v.frame, self.H_nil.frame, self.H_c.frame]

    def reconstruct(self) -> list:
        """Reassemble the tuple from its blocks in the adapted basis."""
        frames = self.frames()
        out = []
        for b in self.blocks:
            m = sum(
                frames[p] @ b[p][q] @ frames[q].conj().T
                for p in range(3)
                for q in range(3)
            )
            out.append(m)
        return out


def decompose(t: RowTuple, exclude: Subspace | None = None) -> Decomposition:
    """Canonical triangularization for tuples with polynomial degree.

    The first summand carries the row-isometric action (modulo the
    excluded truncation slice), the middle one a nilpotent compression of
    order at most the degree, the last a coisometry.
    """
    report, chain = _degree_data(t, exclude)
    if math.isinf(report.degree):
        raise NotPolynomial("characteristic function is not a polynomial")
    m = int(report.degree)
    h_v = chain[m]
    h_c = hc_subspace(t)
    budget = t.tol.residual_abs * (1.0 + t.dim)

    if h_v.dim and h_c.dim and op_norm(h_v.frame.conj().T @ h_c.frame) > budget:
        raise CertificationFailed("isometric and coisometric parts are not orthogonal")
    h_nil = complement_of(subspace_sum(h_v, h_c, t.tol), t.tol)
    if h_v.dim + h_nil.dim + h_c.dim != t.dim:
        raise CertificationFailed("adapted subspaces do not span the space")

    frames = [h_v.frame, h_nil.frame, h_c.frame]
    blocks = []
    for mat in t.mats:
        blocks.append(
            [[frames[p].conj().T @ mat @ frames[q] for q in range(3)] for p in range(3)]
        )

    for b in blocks:
        for p in range(3):
            for q in range(p):
                if op_norm(b[p][q]) > budget:
                    raise CertificationFailed(
                        f"strictly lower block ({p},{q}) has norm {op_norm(b[p][q]):.2e}"
                    )

    iso_frame = subspace_minus(h_v, exclude, t.tol).frame
    if row_isometry_defect(t, iso_frame) > budget:
        raise CertificationFailed("leading block is not row-isometric modulo exclude")

    nil_mats = [b[1][1] for b in blocks]
    level = [np.eye(h_nil.dim, dtype=complex)]
    for _ in range(max(m, 1)):
        level = [x @ nmat for x in level for nmat in nil_mats]
    if any(op_norm(x) > budget for x in level):
        raise CertificationFailed(f"middle block is not nilpotent of order <= {max(m, 1)}")

    w_mats = [b[2][2] for b in blocks]
    if h_c.dim:
        coiso_defect = op_norm(
            np.eye(h_c.dim) - sum(w @ w.conj().T for w in w_mats)
        )
        if coiso_defect > budget:
            raise CertificationFailed(f"trailing block coisometry defect {coiso_defect:.2e}")

    return Decomposition(h_v, h_nil, h_c, blocks, m)


@dataclass(frozen=True)
class WoldResult:
    """Wandering data of a row isometry on an invariant subspace."""

    wandering: Subspace
    pure_part: Subspace
    unitary_part: Subspace
    multiplicity: int


def wold(
    t: RowTuple,
    subspace: Subspace | None = None,
    exclude: Subspace | None = None,
) -> WoldResult:
    """Wold decomposition of the restriction of the tuple to a subspace.

    The restriction must act row-isometrically modulo the excluded slice.
    """
    s = subspace if subspace is not None else full_space(t.dim, t.tol)
    test_frame = subspace_minus(s, exclude, t.tol).frame
    defect = row_isometry_defect(t, test_frame)
    if defect > t.tol.residual_abs * (1.0 + t.dim):
        raise NotAnIsometry(f"isometry defect {defect:.2e} on the given subspace")
    if s.dim == 0:
        z = zero_subspace(t.dim, t.tol)
        return WoldResult(z, z, z, 0)
    image = col_space(np.hstack([m @ s.frame for m in t.mats]), t.tol, scale_floor=1.0)
    wandering = subspace_minus(s, image, t.tol)
    pure = invariant_closure(wandering, t.mats, t.tol)
    unitary = subspace_minus(s, pure, t.tol)
    return WoldResult(wandering, pure, unitary, wandering.dim)


@dataclass(frozen=True)
class ModelTuple:
    """Structural model: Fock shift block, nilpotent block, coisometry block.

    Couplings, when present, sit in the strictly upper block positions and
    are rescaled at realization if they push the row norm above one.
    """

    n: int
    iso_multiplicity: int
    fock_depth: int
    nil_block: RowTuple | None = None
    coiso_block: RowTuple | None = None
    couplings: dict | None = None
    tol: ToleranceConfig = DEFAULT_TOL

    def __post_init__(self):
        if self.n < 1 or self.iso_multiplicity < 0 or self.fock_depth < 0:
            raise ValidationError("bad model parameters")
        if self.iso_multiplicity == 0 and self.nil_block is None and self.coiso_block is None:
            raise ValidationError("model has no blocks")
        if self.nil_block is not None:
            if self.nil_block.n != self.n:
                raise ShapeMismatch("nilpotent block has wrong generator count")
            if math.isinf(nilpotent_order(self.nil_block)):
                raise ValidationError("nil_block is not nilpotent")
        if self.coiso_block is not None:
            if self.coiso_block.n != self.n:
                raise ShapeMismatch("coisometry block has wrong generator count")
            w = self.coiso_block
            defect = op_norm(np.eye(w.dim) - w.row_gram())
            if defect > w.tol.residual_abs * (1.0 + w.dim):
                raise ValidationError(f"coiso_block coisometry defect {defect:.2e}")

    @property
    def nil_order(self) -> int:
        return 0 if self.nil_block is None else int(nilpotent_order(self.nil_block))

    @property
    def coiso_dim(self) -> int:
        return 0 if self.coiso_block is None else self.coiso_block.dim


def nilpotent_order(t: RowTuple) -> int | float:
    """Smallest m with all length-m products zero; inf if none within dim."""
    level = [np.eye(t.dim, dtype=complex)]
    for m in range(t.dim + 1):
        if all(op_norm(x) <= t.tol.residual_abs for x in level):
            return m
        level = [x @ mat for x in level for mat in t.mats]
    return INF


@dataclass(frozen=True)
class RealizedModel:
    """Dense realization of a model with its truncation-exclude subspace."""

    tuple: RowTuple
    exclude: Subspace
    coupling_scale: float


def realize(model: ModelTuple) -> RealizedModel:
    """Assemble the dense tuple (Fock shifts (x) identity) + nil + coiso.

    The exclude subspace is the top-degree slice of the Fock block; when
    couplings make the assembled row exceed norm one they are scaled back
    by bisection and the factor is reported.
    """
    n, big_k, depth = model.n, model.iso_multiplicity, model.fock_depth
    ctx = fock.FockContext(n, depth) if big_k else None
    dim_v = (ctx.dim * big_k) if big_k else 0
    d_nil = model.nil_block.dim if model.nil_block else 0
    d_co = model.coiso_block.dim if model.coiso_block else 0
    dim = dim_v + d_nil + d_co
    if dim == 0:
        raise ValidationError("model has no blocks")

    shifts = fock.creation_ops(ctx, "left") if big_k else []

    def assemble(scale: float) -> list:
        mats = []
        for i in range(n):
            m = np.zeros((dim, dim), dtype=complex)
            if big_k:
                m[:dim_v, :dim_v] = np.kron(shifts[i], np.eye(big_k))
            if d_nil:
                m[dim_v:dim_v + d_nil, dim_v:dim_v + d_nil] = model.nil_block.mats[i]
            if d_co:
                m[dim_v + d_nil:, dim_v + d_nil:] = model.coiso_block.mats[i]
            if model.couplings:
                _add_coupling(m, model.couplings.get("vn"), i, 0, dim_v, dim_v, d_nil, scale)
                _add_coupling(m, model.couplings.get("vc"), i, 0, dim_v + d_nil, dim_v, d_co, scale)
                _add_coupling(m, model.couplings.get("nc"), i, dim_v, dim_v + d_nil, d_nil, d_co, scale)
            mats.append(m)
        return mats

    scale = 1.0
    mats = assemble(scale)
    if model.couplings:
        norm = op_norm(np.hstack(mats))
        if norm > 1.0:
            lo, hi = 0.0, 1.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if op_norm(np.hstack(assemble(mid))) <= 1.0:
                    lo = mid
                else:
                    hi = mid
            scale = lo
            mats = assemble(scale)

    if big_k:
        top = list(ctx.degree_indices(depth))
        idx = [f * big_k + c for f in top for c in range(big_k)]
        exclude = subspace_from_indices(dim, idx, model.tol)
    else:
        exclude = zero_subspace(dim, model.tol)
    return RealizedModel(new_row_tuple(mats, model.tol), exclude, scale)


def _add_coupling(m, blocks, i, row0, col0, rows, cols, scale):
    if blocks is None or rows == 0 or cols == 0:
        return
    blk = np.asarray(blocks[i], dtype=complex)
    if blk.shape != (rows, cols):
        raise ShapeMismatch(f"coupling block {blk.shape} expected {(rows, cols)}")
    m[row0:row0 + rows, col0:col0 + cols] = scale * blk


def gamma_structural(model: ModelTuple) -> GammaValue:
    """Invariant predicted from the block data of a zero-coupling model.

    The isometric part of the canonical form absorbs the low-degree slice
    of the Fock block, so its multiplicity is K * n^order, matching the
    realized invariant whenever the truncation depth leaves room.
    """
    if model.couplings:
        for blocks in model.couplings.values():
            if blocks is not None and any(op_norm(np.asarray(b)) > 0 for b in blocks):
                raise CouplingsNotZero("structural prediction needs zero couplings")
    order = model.nil_order
    p = model.iso_multiplicity * model.n ** order
    return GammaValue(p, order, model.coiso_dim)
