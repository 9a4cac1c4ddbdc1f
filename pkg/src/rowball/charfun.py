"""Characteristic-function data of a row tuple.

The characteristic function of a row contraction is an operator-coefficient
power series from the adjoint defect space to the defect space.  Its
constant term is minus the row operator compressed to those spaces; the
coefficient at the word alpha.g_i is Delta_T (T_reverse(alpha))* P_i
Delta_T* compressed the same way, P_i being the i-th block projection of
the n-fold direct sum.

The polynomial degree is decided by the exact subspace criterion: the
degree is the smallest m such that the tuple acts row-isometrically on the
m-th term of the decreasing chain D_m generated by the defect space.
Coefficient scanning cannot certify that all longer coefficients vanish,
so it is kept only as a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .contraction import (
    DefectData,
    RowTuple,
    defects,
    invariant_closure,
    poisson_kernel,
    row_isometry_defect,
)
from .errors import (
    CompressionResidualExceeded,
    DimensionMismatch,
    NotStrictlyInsideBall,
    ValidationError,
)
from .fock import FockContext, RowSymbol, boundary_matrix, reverse, words_of_length
from .numerics import (
    Subspace,
    col_space,
    op_norm,
    polar_unitary,
    subspace_minus,
)

__all__ = [
    "CharFun",
    "charfun_coeffs",
    "DegreeReport",
    "charfun_degree",
    "charfun_eval",
    "factorization_residual",
    "coincidence_verify",
    "Witness",
    "coincidence_search",
    "scan_degree",
]


@dataclass(frozen=True)
class CharFun:
    """Constant term plus word-indexed coefficients up to a length cutoff."""

    constant: np.ndarray   # maps defect-star coordinates to defect coordinates
    coeffs: dict           # word -> matrix of the same shape
    cutoff: int

    @property
    def out_dim(self) -> int:
        return self.constant.shape[0]

    @property
    def in_dim(self) -> int:
        return self.constant.shape[1]

    def coefficient(self, word) -> np.ndarray:
        w = tuple(word)
        if w in self.coeffs:
            return self.coeffs[w]
        return np.zeros_like(self.constant)

    def as_symbol(self) -> RowSymbol:
        return RowSymbol(self.constant, self.coeffs)


def charfun_coeffs(t: RowTuple, cutoff: int, dd: DefectData | None = None) -> CharFun:
    """Fourier coefficients of the characteristic function up to the cutoff."""
    if cutoff < 0:
        raise ValidationError("cutoff must be >= 0")
    dd = dd or defects(t)
    d, n = t.dim, t.n
    f = dd.D_T.frame
    g = dd.D_Tstar.frame
    proj_out = np.eye(d) - f @ f.conj().T
    budget = t.tol.residual_abs * (1.0 + d)

    raw_const = t.row() @ g
    if op_norm(proj_out @ raw_const) > budget:
        raise CompressionResidualExceeded("constant term leaves the defect space")
    constant = -(f.conj().T @ raw_const)

    dstar_g = dd.delta_Tstar @ g                      # nd x rank*
    star_blocks = [dstar_g[i * d:(i + 1) * d, :] for i in range(n)]
    head = dd.delta_T                                 # d x d

    coeffs = {}
    adjoints = {(): np.eye(d, dtype=complex)}
    for length in range(1, cutoff + 1):
        for w in words_of_length(n, length):
            alpha, i = w[:-1], w[-1]
            raw = head @ _adjoint_product(t, adjoints, reverse(alpha)) @ star_blocks[i - 1]
            if op_norm(proj_out @ raw) > budget:
                raise CompressionResidualExceeded(f"coefficient {w} leaves the defect space")
            mat = f.conj().T @ raw
            if op_norm(mat) > 0.0:
                coeffs[w] = mat
    return CharFun(constant, coeffs, cutoff)


def _adjoint_product(t: RowTuple, cache: dict, word) -> np.ndarray:
    """(T_word)* built by right-to-left recursion with memoization."""
    w = tuple(word)
    if w in cache:
        return cache[w]
    val = t.mats[w[-1] - 1].conj().T @ _adjoint_product(t, cache, w[:-1])
    cache[w] = val
    return val


@dataclass(frozen=True)
class DegreeReport:
    """Degree verdict with the dimension chain that produced it."""

    degree: int | float       # math.inf when the chain stabilizes non-isometric
    chain: list
    stabilized_at: int


def _defect_space(t: RowTuple) -> Subspace:
    """Range of the defect operator, decided on its square (no sqrt noise)."""
    return col_space(np.eye(t.dim) - t.row_gram(), t.tol, scale_floor=1.0)


def _degree_data(t: RowTuple, exclude: Subspace | None = None, seed: Subspace | None = None):
    """Chain subspaces D_0 >= D_1 >= ... and the degree verdict.

    Returns (report, subspaces); when the degree m is finite the list holds
    D_0 .. D_(m+1) so the wandering slice D_m (-) D_(m+1) is available.
    """
    if exclude is not None and exclude.ambient_dim != t.dim:
        raise ValidationError("exclude subspace has wrong ambient dimension")
    seed = seed or _defect_space(t)
    d0 = invariant_closure(seed, t.mats, t.tol)
    subspaces = [d0]

    def step(s: Subspace) -> Subspace:
        if s.dim == 0:
            return s
        return col_space(np.hstack([m @ s.frame for m in t.mats]), t.tol, scale_floor=1.0)

    degree: int | float = math.inf
    m = 0
    while True:
        cur = subspaces[m]
        frame = subspace_minus(cur, exclude, t.tol).frame
        if row_isometry_defect(t, frame) <= t.tol.residual_abs:
            degree = m
            if len(subspaces) == m + 1:
                subspaces.append(step(cur))
            break
        nxt = step(cur)
        subspaces.append(nxt)
        if nxt.dim == cur.dim:
            break
        m += 1

    if math.isinf(degree):
        chain = [s.dim for s in subspaces]
        stabilized = len(chain) - 1
    else:
        chain = [s.dim for s in subspaces[: int(degree) + 1]]
        stabilized = int(degree)
    return DegreeReport(degree, chain, stabilized), subspaces


def charfun_degree(t: RowTuple, exclude: Subspace | None = None) -> DegreeReport:
    """Polynomial degree by the subspace/isometry criterion (exact, finite)."""
    report, _ = _degree_data(t, exclude)
    return report


def scan_degree(c: CharFun, tol: float) -> int:
    """Largest word length carrying a coefficient above tol (0 if none)."""
    best = 0
    for w, mat in c.coeffs.items():
        if op_norm(mat) > tol:
            best = max(best, len(w))
    return best


def charfun_eval(t: RowTuple, x_mats, dd: DefectData | None = None) -> np.ndarray:
    """Closed-form evaluation at a matrix tuple strictly inside the unit ball.

    Exact finite-matrix arithmetic; agrees with the truncated coefficient
    sum up to the geometric tail of the series.
    """
    x_mats = [np.asarray(x, dtype=complex) for x in x_mats]
    if len(x_mats) != t.n:
        raise DimensionMismatch(f"expected {t.n} argument matrices, got {len(x_mats)}")
    k = x_mats[0].shape[0]
    row_norm = op_norm(np.hstack(x_mats))
    if row_norm >= 1.0:
        raise NotStrictlyInsideBall(f"argument row norm {row_norm:.6f} >= 1")
    dd = dd or defects(t)
    d = t.dim
    f, g = dd.D_T.frame, dd.D_Tstar.frame

    constant = -(f.conj().T @ t.row() @ g)
    dstar_g = dd.delta_Tstar @ g
    blocks = [dstar_g[i * d:(i + 1) * d, :] for i in range(t.n)]

    m = np.eye(k * d, dtype=complex)
    for x, mat in zip(x_mats, t.mats):
        m -= np.kron(x, mat.conj().T)
    right = sum(np.kron(x, blk) for x, blk in zip(x_mats, blocks))
    solved = np.linalg.solve(m, right)
    left = np.kron(np.eye(k), f.conj().T @ dd.delta_T)
    return np.kron(np.eye(k), constant) + left @ solved


def factorization_residual(t: RowTuple, r: float, depth: int) -> float:
    """Defect of I - Theta Theta^H = K K^H for the scaled tuple at a boundary depth.

    Both sides are assembled for r*T on the truncated Fock space and
    compared on the block of degrees <= depth-1.
    """
    if not 0.0 < r < 1.0:
        raise ValidationError("need 0 < r < 1")
    scaled = RowTuple(tuple(r * m for m in t.mats), t.tol)
    dd = defects(scaled)
    cf = charfun_coeffs(scaled, depth, dd)
    ctx = FockContext(t.n, depth)
    theta = boundary_matrix(cf.as_symbol(), ctx)
    kernel = poisson_kernel(scaled, depth, dd).matrix
    rank = dd.D_T.dim
    lhs = np.eye(ctx.dim * rank) - theta @ theta.conj().T
    rhs = kernel @ kernel.conj().T
    interior = [i * rank + j for i in ctx.indices_up_to_degree(depth - 1) for j in range(rank)]
    if not interior:
        return 0.0
    diff = (lhs - rhs)[np.ix_(interior, interior)]
    return op_norm(diff)


def coincidence_verify(c1: CharFun, c2: CharFun, tau1: np.ndarray, tau2: np.ndarray) -> float:
    """Max deviation of tau2 . theta_alpha - theta'_alpha . tau1 over all terms."""
    tau1 = np.asarray(tau1, dtype=complex)
    tau2 = np.asarray(tau2, dtype=complex)
    if c1.cutoff != c2.cutoff:
        raise DimensionMismatch("characteristic functions have different cutoffs")
    if c1.in_dim != c2.in_dim or c1.out_dim != c2.out_dim:
        raise DimensionMismatch(
            "defect dimensions differ; no unitary intertwiners can exist"
        )
    if tau1.shape != (c2.in_dim, c1.in_dim) or tau2.shape != (c2.out_dim, c1.out_dim):
        raise DimensionMismatch(
            f"intertwiner shapes {tau1.shape}/{tau2.shape} do not match defect spaces"
        )
    words = set(c1.coeffs) | set(c2.coeffs)
    best = op_norm(tau2 @ c1.constant - c2.constant @ tau1)
    for w in words:
        best = max(best, op_norm(tau2 @ c1.coefficient(w) - c2.coefficient(w) @ tau1))
    return best


@dataclass(frozen=True)
class Witness:
    """Unitary pair intertwining all coefficients simultaneously."""

    tau1: np.ndarray
    tau2: np.ndarray
    residual: float


def _terms(c: CharFun, words) -> list:
    return [c.constant] + [c.coefficient(w) for w in words]


def coincidence_search(
    c1: CharFun,
    c2: CharFun,
    iters: int = 60,
    seed: int = 0,
    random_seeds: int = 8,
    threshold: float | None = None,
) -> Witness | None:
    """Alternating polar-factor search for a coincidence witness.

    Heuristic: a returned witness is a certificate, but None is
    inconclusive, never a disproof.
    """
    if c1.cutoff != c2.cutoff:
        return None
    if c1.in_dim != c2.in_dim or c1.out_dim != c2.out_dim:
        return None
    threshold = 1e-8 if threshold is None else threshold
    r_in, r_out = c1.in_dim, c1.out_dim
    words = sorted(set(c1.coeffs) | set(c2.coeffs))
    a_terms = _terms(c1, words)
    b_terms = _terms(c2, words)

    if r_in == 0 and r_out == 0:
        return Witness(np.zeros((0, 0)), np.zeros((0, 0)), 0.0)

    def sweep(tau1):
        tau2 = _procrustes_out(a_terms, b_terms, tau1, r_out)
        tau1 = _procrustes_in(a_terms, b_terms, tau2, r_in)
        return tau1, tau2

    rng = np.random.default_rng(seed)
    starts = [np.eye(r_in, dtype=complex), _constant_seed(c1, c2)]
    for _ in range(random_seeds):
        starts.append(_random_unitary(rng, r_in))

    best = None
    for tau1 in starts:
        if tau1 is None:
            continue
        tau2 = _procrustes_out(a_terms, b_terms, tau1, r_out)
        for _ in range(iters):
            tau1, tau2 = sweep(tau1)
        res = coincidence_verify(c1, c2, tau1, tau2)
        if best is None or res < best.residual:
            best = Witness(tau1, tau2, res)
        if res <= threshold:
            return best
    return None


def _procrustes_out(a_terms, b_terms, tau1, r_out):
    if r_out == 0:
        return np.zeros((0, 0), dtype=complex)
    acc = np.zeros((r_out, r_out), dtype=complex)
    for a, b in zip(a_terms, b_terms):
        acc += b @ tau1 @ a.conj().T
    if op_norm(acc) == 0.0:
        return np.eye(r_out, dtype=complex)
    return polar_unitary(acc)


def _procrustes_in(a_terms, b_terms, tau2, r_in):
    if r_in == 0:
        return np.zeros((0, 0), dtype=complex)
    acc = np.zeros((r_in, r_in), dtype=complex)
    for a, b in zip(a_terms, b_terms):
        acc += b.conj().T @ tau2 @ a
    if op_norm(acc) == 0.0:
        return np.eye(r_in, dtype=complex)
    return polar_unitary(acc)


def _constant_seed(c1: CharFun, c2: CharFun):
    """Initial tau1 aligning the right singular bases of the constants."""
    if c1.in_dim == 0:
        return np.zeros((0, 0), dtype=complex)
    try:
        _, _, vh1 = np.linalg.svd(c1.constant)
        _, _, vh2 = np.linalg.svd(c2.constant)
    except np.linalg.LinAlgError:
        return None
    return vh2.conj().T @ vh1


def _random_unitary(rng, k):
    if k == 0:
        return np.zeros((0, 0), dtype=complex)
    g = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    q, r = np.linalg.qr(g)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))
