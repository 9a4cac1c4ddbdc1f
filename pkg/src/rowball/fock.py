"""Free monoid words and the truncated full Fock space.

Words over n generators are tuples of integers in 1..n; the empty tuple is
the monoid identity.  The truncated Fock space keeps words of length <= N
in graded lexicographic order, so degree blocks are contiguous index
ranges.  Creation operators annihilate top-degree vectors, which makes
them compressions of the untruncated operators and keeps every operator a
contraction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeMismatch, ValidationError
from .numerics import DEFAULT_TOL, Subspace, ToleranceConfig, subspace_from_indices

__all__ = [
    "Word",
    "words_of_length",
    "reverse",
    "concat",
    "FockContext",
    "creation_ops",
    "RowSymbol",
    "eval_symbol",
    "boundary_matrix",
]

Word = tuple  # tuple of generator indices in 1..n

MAX_BASIS = 200000


def words_of_length(n: int, k: int) -> list:
    """All n^k words of length k, lexicographic."""
    return [tuple(w) for w in itertools.product(range(1, n + 1), repeat=k)]


def reverse(word: Word) -> Word:
    return tuple(word[::-1])


def concat(a: Word, b: Word) -> Word:
    return tuple(a) + tuple(b)


@dataclass(frozen=True)
class FockContext:
    """Truncated Fock space on n generators up to degree N.

    Basis order is graded lexicographic with the vacuum at position 0.
    """

    n: int
    N: int
    words: list = field(init=False, repr=False)
    index: dict = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 1 or self.N < 0:
            raise ValidationError("need n >= 1 and N >= 0")
        total = sum(self.n ** k for k in range(self.N + 1))
        if total > MAX_BASIS:
            raise ValidationError(f"basis size {total} exceeds guard {MAX_BASIS}")
        words = []
        for k in range(self.N + 1):
            words.extend(words_of_length(self.n, k))
        object.__setattr__(self, "words", words)
        object.__setattr__(self, "index", {w: i for i, w in enumerate(words)})

    @property
    def dim(self) -> int:
        return len(self.words)

    def degree_offsets(self) -> list:
        """Start index of each degree block (length N+2, last is dim)."""
        offs = [0]
        for k in range(self.N + 1):
            offs.append(offs[-1] + self.n ** k)
        return offs

    def degree_indices(self, k: int) -> range:
        offs = self.degree_offsets()
        return range(offs[k], offs[k + 1])

    def indices_up_to_degree(self, k: int) -> range:
        k = min(k, self.N)
        return range(self.degree_offsets()[k + 1])

    def basis_vector(self, word: Word) -> np.ndarray:
        e = np.zeros(self.dim, dtype=complex)
        e[self.index[tuple(word)]] = 1.0
        return e

    def span_of_degrees(self, degrees, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
        idx = []
        for k in degrees:
            idx.extend(self.degree_indices(k))
        return subspace_from_indices(self.dim, idx, tol)

    def vacuum_projector(self) -> np.ndarray:
        p = np.zeros((self.dim, self.dim), dtype=complex)
        p[0, 0] = 1.0
        return p


def creation_ops(ctx: FockContext, side: str = "left") -> list:
    """The n creation operators as dense matrices.

    Left: e_alpha -> e_(g_i alpha); right: e_alpha -> e_(alpha g_i); both
    send top-degree vectors to zero.
    """
    if side not in ("left", "right"):
        raise ValidationError(f"side must be 'left' or 'right', got {side!r}")
    ops = []
    for i in range(1, ctx.n + 1):
        m = np.zeros((ctx.dim, ctx.dim), dtype=complex)
        for w, col in ctx.index.items():
            if len(w) < ctx.N:
                target = (i,) + w if side == "left" else w + (i,)
                m[ctx.index[target], col] = 1.0
        ops.append(m)
    return ops


@dataclass(frozen=True)
class RowSymbol:
    """Operator-coefficient power series: constant plus word-indexed terms.

    All coefficient matrices share the constant's shape; absent words are
    treated as zero.
    """

    constant: np.ndarray
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.asarray(self.constant, dtype=complex)
        object.__setattr__(self, "constant", c)
        fixed = {}
        for w, m in self.coeffs.items():
            m = np.asarray(m, dtype=complex)
            if m.shape != c.shape:
                raise ShapeMismatch(
                    f"coefficient for {w} has shape {m.shape}, constant {c.shape}"
                )
            fixed[tuple(w)] = m
        object.__setattr__(self, "coeffs", fixed)

    @property
    def out_dim(self) -> int:
        return self.constant.shape[0]

    @property
    def in_dim(self) -> int:
        return self.constant.shape[1]

    def max_word_length(self) -> int:
        return max((len(w) for w in self.coeffs), default=0)


def _word_products(x_mats, max_len: int, needed=None) -> dict:
    """Products X_alpha indexed by word, built by appending letters."""
    n = len(x_mats)
    k = x_mats[0].shape[0]
    prods = {(): np.eye(k, dtype=complex)}
    for length in range(1, max_len + 1):
        for w in words_of_length(n, length):
            if needed is not None and w not in needed:
                continue
            prods[w] = prods[w[:-1]] @ x_mats[w[-1] - 1]
    return prods


def eval_symbol(sym: RowSymbol, x_mats, max_len: int) -> np.ndarray:
    """Finite sum  I (x) constant + sum_{|alpha|<=max_len} X_alpha (x) coeff(alpha).

    The result acts from C^k (x) C^in to C^k (x) C^out with k the size of
    the argument matrices.
    """
    x_mats = [np.asarray(x, dtype=complex) for x in x_mats]
    k = x_mats[0].shape[0]
    for x in x_mats:
        if x.shape != (k, k):
            raise ShapeMismatch("argument matrices must be square and equal-sized")
    needed = {w for w in sym.coeffs if 0 < len(w) <= max_len}
    prefixes = set()
    for w in needed:
        for j in range(len(w) + 1):
            prefixes.add(w[:j])
    prods = _word_products(x_mats, max_len, needed=prefixes)
    out = np.kron(np.eye(k, dtype=complex), sym.constant)
    for w in sorted(needed, key=len):
        out = out + np.kron(prods[w], sym.coeffs[w])
    return out


def boundary_matrix(sym: RowSymbol, ctx: FockContext) -> np.ndarray:
    """The symbol evaluated at the truncated right creation operators.

    Equals eval_symbol(sym, R, N) but assembled directly from the shift
    structure: the (gamma, beta) block is coeff(reverse(suffix)) whenever
    beta is a prefix of gamma.
    """
    r_out, r_in = sym.out_dim, sym.in_dim
    dim = ctx.dim
    out = np.zeros((dim * r_out, dim * r_in), dtype=complex)
    for g_idx, gamma in enumerate(ctx.words):
        rows = slice(g_idx * r_out, (g_idx + 1) * r_out)
        for cut in range(len(gamma) + 1):
            beta, suffix = gamma[:cut], gamma[cut:]
            block = sym.constant if not suffix else sym.coeffs.get(reverse(suffix))
            if block is None:
                continue
            b_idx = ctx.index[beta]
            out[rows, b_idx * r_in:(b_idx + 1) * r_in] += block
    return out
