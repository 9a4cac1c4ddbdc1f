"""Dense complex matrix kernel.

Positive-semidefinite square roots, rank and kernel decisions through
singular values, and subspace algebra with one global tolerance policy.
Matrices are plain ``numpy.ndarray`` objects with complex entries; a
subspace is an orthonormal column frame plus the tolerance it was built
with.

Rank decisions use a relative cutoff ``rank_rel * sigma_max * max(rows,
cols)`` so every construction is invariant under rescaling of the input.
Frames come out of SVD factorizations and are therefore deterministic only
up to column phases; compare subspaces through their projectors, never
through raw frames.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    AmbientMismatch,
    NotContained,
    NotHermitian,
    SignificantlyNegativeEigenvalue,
    ValidationError,
)

__all__ = [
    "ToleranceConfig",
    "DEFAULT_TOL",
    "Subspace",
    "op_norm",
    "hermitize",
    "psd_sqrt",
    "col_space",
    "null_space",
    "full_space",
    "zero_subspace",
    "subspace_from_indices",
    "subspace_sum",
    "subspace_intersect",
    "subspace_minus",
    "ortho_complement_in",
    "complement_of",
    "compress",
    "polar_unitary",
]


@dataclass(frozen=True)
class ToleranceConfig:
    """Global tolerance policy.

    rank_rel:        relative singular-value cutoff for rank decisions
    residual_abs:    absolute residual accepted by certification checks
    fixed_point_abs: stopping threshold for fixed-point iterations
    max_iter:        iteration budget for fixed-point loops
    """

    rank_rel: float = 1e-9
    residual_abs: float = 1e-8
    fixed_point_abs: float = 1e-12
    max_iter: int = 10000

    def __post_init__(self):
        if not (self.rank_rel > 0 and self.residual_abs > 0 and self.fixed_point_abs > 0):
            raise ValidationError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValidationError("max_iter must be at least 1")


DEFAULT_TOL = ToleranceConfig()


def _as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise ValidationError(f"expected a matrix, got ndim={a.ndim}")
    if a.size and not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    return a


def op_norm(a) -> float:
    """Spectral norm; 0 for matrices with an empty axis."""
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def herm_norm(a) -> float:
    """Spectral norm of a Hermitian matrix via eigenvalues."""
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return 0.0
    w = np.linalg.eigvalsh(hermitize(a))
    return float(max(abs(w[0]), abs(w[-1])))


def hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def _svd(a: np.ndarray):
    return scipy.linalg.svd(a, full_matrices=False, check_finite=False)


def _rank_cutoff(s: np.ndarray, shape, rank_rel: float, scale_floor: float | None) -> float:
    if s.size == 0:
        return 0.0
    scale = float(s[0]) if scale_floor is None else max(float(s[0]), scale_floor)
    return rank_rel * scale * max(shape)


@dataclass(frozen=True)
class Subspace:
    """Orthonormal column frame with the tolerance it was computed at."""

    frame: np.ndarray
    tol: float = DEFAULT_TOL.rank_rel

    @property
    def ambient_dim(self) -> int:
        return self.frame.shape[0]

    @property
    def dim(self) -> int:
        return self.frame.shape[1]

    def projector(self) -> np.ndarray:
        return self.frame @ self.frame.conj().T

    def orthonormality_defect(self) -> float:
        f = self.frame
        return op_norm(f.conj().T @ f - np.eye(self.dim))

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim})"


def zero_subspace(ambient_dim: int, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    return Subspace(np.zeros((ambient_dim, 0), dtype=complex), tol.rank_rel)


def full_space(ambient_dim: int, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    return Subspace(np.eye(ambient_dim, dtype=complex), tol.rank_rel)


def subspace_from_indices(ambient_dim: int, indices, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """Coordinate subspace spanned by the given basis positions."""
    idx = list(indices)
    frame = np.zeros((ambient_dim, len(idx)), dtype=complex)
    for col, i in enumerate(idx):
        frame[i, col] = 1.0
    return Subspace(frame, tol.rank_rel)


def psd_sqrt(a, tol: ToleranceConfig = DEFAULT_TOL, scale_floor: float | None = None) -> np.ndarray:
    """Hermitian PSD square root via eigendecomposition.

    Eigenvalues in [-rank_rel*scale, 0) are clamped to zero; anything more
    negative raises, since it indicates the input was not a defect-type
    matrix suffering only from roundoff.  The scale is ||a||, floored at
    scale_floor when given: defect matrices I - (gram of a contraction)
    carry natural scale one even when they vanish.
    """
    a = _as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise NotHermitian(f"matrix is {a.shape}, not square")
    if a.size == 0:
        return a.copy()
    scale = op_norm(a)
    if op_norm(a - a.conj().T) > tol.residual_abs * (1.0 + scale):
        raise NotHermitian("matrix is not Hermitian within residual_abs")
    w, v = np.linalg.eigh(hermitize(a))
    if scale_floor is not None:
        scale = max(scale, scale_floor)
    floor = -tol.rank_rel * max(scale, 1e-300)
    if np.any(w < floor):
        raise SignificantlyNegativeEigenvalue(
            f"eigenvalue {w.min():.3e} below clamp threshold {floor:.3e}"
        )
    w = np.clip(w, 0.0, None)
    return hermitize((v * np.sqrt(w)) @ v.conj().T)


def col_space(a, tol: ToleranceConfig = DEFAULT_TOL, scale_floor: float | None = None) -> Subspace:
    """Orthonormal basis of the column space, rank cut at rank_rel*sigma_max.

    Pass scale_floor=1.0 for matrices assembled from orthonormal frames
    and contraction images, whose natural scale is one: a column space at
    pure roundoff scale then collapses to zero instead of picking up noise
    directions.
    """
    a = _as_matrix(a)
    if a.size == 0:
        return zero_subspace(a.shape[0], tol)
    u, s, _ = _svd(a)
    r = int(np.sum(s > _rank_cutoff(s, a.shape, tol.rank_rel, scale_floor)))
    return Subspace(u[:, :r], tol.rank_rel)


def null_space(a, tol: ToleranceConfig = DEFAULT_TOL, scale_floor: float | None = None) -> Subspace:
    """Orthonormal basis of the kernel, complementary to col_space of a*.

    Tall inputs read the kernel off the economy SVD; wide inputs complete
    the row-space basis to a full orthobasis by QR.
    """
    a = _as_matrix(a)
    rows, cols = a.shape
    if a.size == 0:
        return full_space(cols, tol)
    _, s, vh = _svd(a)
    r = int(np.sum(s > _rank_cutoff(s, a.shape, tol.rank_rel, scale_floor)))
    if rows >= cols:
        return Subspace(vh[r:, :].conj().T, tol.rank_rel)
    if r == 0:
        return full_space(cols, tol)
    q = np.linalg.qr(vh[:r, :].conj().T, mode="complete")[0]
    return Subspace(q[:, r:], tol.rank_rel)


def _check_ambient(*spaces: Subspace):
    dims = {s.ambient_dim for s in spaces}
    if len(dims) > 1:
        raise AmbientMismatch(f"ambient dimensions differ: {sorted(dims)}")


def subspace_sum(s1: Subspace, s2: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    _check_ambient(s1, s2)
    return col_space(np.hstack([s1.frame, s2.frame]), tol, scale_floor=1.0)


def subspace_intersect(s1: Subspace, s2: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """Intersection via the kernel of [F1, -F2]."""
    _check_ambient(s1, s2)
    if s1.dim == 0 or s2.dim == 0:
        return zero_subspace(s1.ambient_dim, tol)
    ns = null_space(np.hstack([s1.frame, -s2.frame]), tol, scale_floor=1.0)
    if ns.dim == 0:
        return zero_subspace(s1.ambient_dim, tol)
    return col_space(s1.frame @ ns.frame[: s1.dim, :], tol, scale_floor=1.0)


def subspace_minus(s: Subspace, e: Subspace | None, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """Part of s orthogonal to e, i.e. s intersected with the complement of e."""
    if e is None or e.dim == 0:
        return s
    _check_ambient(s, e)
    if s.dim == 0:
        return s
    ns = null_space(e.frame.conj().T @ s.frame, tol, scale_floor=1.0)
    if ns.dim == 0:
        return zero_subspace(s.ambient_dim, tol)
    return Subspace(s.frame @ ns.frame, tol.rank_rel)


def ortho_complement_in(s_small: Subspace, s_big: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """Complement of s_small inside s_big; requires containment."""
    _check_ambient(s_small, s_big)
    if s_small.dim:
        defect = op_norm(s_small.frame - s_big.projector() @ s_small.frame)
        if defect > tol.residual_abs * (1.0 + s_small.dim):
            raise NotContained(f"containment defect {defect:.3e}")
    ns = null_space(s_small.frame.conj().T @ s_big.frame, tol, scale_floor=1.0)
    if ns.dim == 0:
        return zero_subspace(s_big.ambient_dim, tol)
    return Subspace(s_big.frame @ ns.frame, tol.rank_rel)


def complement_of(s: Subspace, tol: ToleranceConfig = DEFAULT_TOL) -> Subspace:
    """Orthogonal complement in the full ambient space."""
    return null_space(s.frame.conj().T, tol, scale_floor=1.0)


def compress(a, dom: Subspace, cod: Subspace) -> np.ndarray:
    """Compression cod^H . a . dom of an operator to frame coordinates."""
    a = _as_matrix(a)
    if a.shape[1] != dom.ambient_dim or a.shape[0] != cod.ambient_dim:
        raise AmbientMismatch(
            f"operator {a.shape} does not match dom/cod ambients "
            f"({dom.ambient_dim}, {cod.ambient_dim})"
        )
    return cod.frame.conj().T @ a @ dom.frame


def polar_unitary(a) -> np.ndarray:
    """Unitary factor of the polar decomposition (identity for 0x0)."""
    a = _as_matrix(a)
    if a.size == 0:
        return np.zeros(a.shape, dtype=complex)
    u, _, vh = scipy.linalg.svd(a, full_matrices=False, check_finite=False)
    return u @ vh
