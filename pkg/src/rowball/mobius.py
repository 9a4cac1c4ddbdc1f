"""Free holomorphic automorphisms of the noncommutative unit ball.

Every automorphism factors as a linear map X -> X U following an
involutive Moebius map that swaps 0 with a point lambda of the open
Euclidean ball.  Elements are stored in that standard form (U, lambda)
with lambda recoverable as the preimage of 0.

The sup-norm distance between two automorphisms is only accessible through
their boundary functions on a truncated Fock space, so it is reported as
an interval: the truncated boundary norm from below, plus a geometric tail
budget from above.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fock
from .errors import (
    CertificationFailed,
    DimensionMismatch,
    NearSingularResolvent,
    ValidationError,
)
from .numerics import DEFAULT_TOL, ToleranceConfig, op_norm, psd_sqrt

__all__ = [
    "AutElement",
    "identity_element",
    "psi_eval",
    "aut_apply",
    "apply_point",
    "compose",
    "invert",
    "sup_norm_est",
    "dE",
]

BALL_MARGIN = 1e-12


@dataclass(frozen=True)
class AutElement:
    """Standard form (U, lambda): the Moebius swap at lambda followed by U."""

    unitary: np.ndarray
    lam: np.ndarray
    tol: ToleranceConfig = DEFAULT_TOL

    def __post_init__(self):
        u = np.asarray(self.unitary, dtype=complex)
        lam = np.asarray(self.lam, dtype=complex).reshape(-1)
        object.__setattr__(self, "unitary", u)
        object.__setattr__(self, "lam", lam)
        n = lam.size
        if u.shape != (n, n):
            raise DimensionMismatch(f"unitary is {u.shape}, lambda has length {n}")
        if op_norm(u.conj().T @ u - np.eye(n)) > self.tol.residual_abs:
            raise ValidationError("matrix is not unitary within residual_abs")
        if np.linalg.norm(lam) >= 1.0 - BALL_MARGIN:
            raise ValidationError("lambda is not strictly inside the ball")

    @property
    def n(self) -> int:
        return self.lam.size


def identity_element(n: int) -> AutElement:
    """The identity map; its standard form is (-I, 0) since the swap at 0 is X -> -X."""
    return AutElement(-np.eye(n, dtype=complex), np.zeros(n, dtype=complex))


def _lam_defects(lam: np.ndarray):
    """Scalar defect (1-|lam|^2)^(1/2) and the n x n defect of the adjoint."""
    norm2 = float(np.real(np.vdot(lam, lam)))
    delta = np.sqrt(max(1.0 - norm2, 0.0))
    gram = np.outer(lam.conj(), lam)          # lambda* lambda as an n x n matrix
    delta_star = psd_sqrt(np.eye(lam.size) - gram)
    return delta, delta_star


def psi_eval(lam, x_mats) -> list:
    """The involutive Moebius map at lambda applied to a matrix tuple.

    Component j is lambda_j I - delta (I - sum conj(lambda_i) X_i)^(-1)
    (sum_i X_i D*_ij) with D* the adjoint defect of the row lambda.
    """
    lam = np.asarray(lam, dtype=complex).reshape(-1)
    if np.linalg.norm(lam) >= 1.0:
        raise ValidationError("lambda must lie strictly inside the ball")
    x_mats = [np.asarray(x, dtype=complex) for x in x_mats]
    if len(x_mats) != lam.size:
        raise DimensionMismatch(f"expected {lam.size} components, got {len(x_mats)}")
    k = x_mats[0].shape[0]
    delta, delta_star = _lam_defects(lam)
    resolvent = np.eye(k, dtype=complex)
    for li, x in zip(lam, x_mats):
        resolvent -= np.conj(li) * x
    sigma_min = float(np.linalg.svd(resolvent, compute_uv=False)[-1]) if k else 1.0
    if sigma_min <= 1e-10:
        raise NearSingularResolvent(f"resolvent sigma_min {sigma_min:.3e}")
    out = []
    for j in range(lam.size):
        mixed = sum(x_mats[i] * delta_star[i, j] for i in range(lam.size))
        out.append(lam[j] * np.eye(k) - delta * np.linalg.solve(resolvent, mixed))
    return out


def aut_apply(elem: AutElement, x_mats) -> list:
    """Apply the automorphism: Moebius swap at lambda, then the linear map."""
    y = psi_eval(elem.lam, x_mats)
    u = elem.unitary
    return [sum(y[i] * u[i, j] for i in range(elem.n)) for j in range(elem.n)]


def apply_point(elem: AutElement, point) -> np.ndarray:
    """Evaluate at a scalar row point of the Euclidean ball."""
    point = np.asarray(point, dtype=complex).reshape(-1)
    mats = [np.array([[z]]) for z in point]
    return np.array([m[0, 0] for m in aut_apply(elem, mats)])


def _psi_point(lam, point) -> np.ndarray:
    lam = np.asarray(lam, dtype=complex).reshape(-1)
    mats = [np.array([[z]]) for z in np.asarray(point, dtype=complex).reshape(-1)]
    return np.array([m[0, 0] for m in psi_eval(lam, mats)])


_PROBE_RNG_SEED = 20251231
_N_PROBES = 20


def _probe_points(n: int, count: int = _N_PROBES) -> list:
    rng = np.random.default_rng(_PROBE_RNG_SEED + n)
    pts = []
    for _ in range(count):
        z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        r = rng.uniform(0.05, 0.8)
        pts.append(r * z / np.linalg.norm(z))
    return pts


def _linear_part(mapping, n: int) -> np.ndarray:
    """Recover U of a linear automorphism x -> x U from scalar probes at radius 1/2."""
    rows = []
    for i in range(n):
        e = np.zeros(n, dtype=complex)
        e[i] = 0.5
        rows.append(2.0 * mapping(e))
    return np.vstack(rows)


def _fix_ball(z: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(z)
    if nrm >= 1.0 - BALL_MARGIN:
        raise ValidationError(f"standard-form center has norm {nrm:.12f}")
    return z


def _certified_form(mapping, center, n: int, tol: ToleranceConfig) -> AutElement:
    """Standard form from a point map and its known preimage of 0.

    The map composed with the swap at the center fixes 0, so it is linear
    on scalar points and its matrix is read off from probes at radius 1/2.
    The result is certified against the map on random scalar probes.
    """
    center = _fix_ball(np.asarray(center, dtype=complex).reshape(-1))
    swap = AutElement(np.eye(n, dtype=complex), center, tol)

    def centered(x):
        return mapping(apply_point(swap, x))

    omega = _linear_part(centered, n)
    candidate = AutElement(omega, center, tol)
    worst = 0.0
    for pt in _probe_points(n):
        worst = max(worst, float(np.linalg.norm(apply_point(candidate, pt) - mapping(pt))))
    if worst > 1e-9:
        raise CertificationFailed(f"standard form deviates {worst:.2e} on scalar probes")
    return candidate


def compose(a: AutElement, b: AutElement) -> AutElement:
    """Standard form of a after b, certified on random scalar probes.

    The composite sends the Moebius swap of b applied to lambda_a W_b* to
    zero, which fixes the new center in closed form.
    """
    if a.n != b.n:
        raise DimensionMismatch("automorphisms act on different ball dimensions")

    def mapping(x):
        return apply_point(a, apply_point(b, x))

    center = _psi_point(b.lam, a.lam @ b.unitary.conj().T)
    return _certified_form(mapping, center, a.n, a.tol)


def invert(a: AutElement) -> AutElement:
    """Standard form of the inverse map, certified on random scalar probes.

    The inverse sends a(0) = lambda U to zero, so the new center is that
    point; the linear part is recovered by probing as in compose.
    """

    def mapping(y):
        return _psi_point(a.lam, y @ a.unitary.conj().T)

    candidate = _certified_form(mapping, a.lam @ a.unitary, a.n, a.tol)
    worst = 0.0
    for pt in _probe_points(a.n):
        worst = max(worst, float(np.linalg.norm(apply_point(candidate, apply_point(a, pt)) - pt)))
    if worst > 1e-9:
        raise CertificationFailed(f"inverse deviates {worst:.2e} on round-trip probes")
    return candidate


def sup_norm_est(a: AutElement, b: AutElement, depth: int) -> tuple:
    """Bracket of the sup-norm distance from the truncated boundary functions.

    Lower bound: row-operator norm of the difference of the boundary
    tuples at the given depth.  Upper bound adds the geometric tail
    4 rho^(depth-1) / (1-rho)^2 with rho the larger center norm.
    """
    if depth < 2:
        raise ValidationError("need depth >= 2")
    if a.n != b.n:
        raise DimensionMismatch("automorphisms act on different ball dimensions")
    ctx = fock.FockContext(a.n, depth)
    shifts = fock.creation_ops(ctx, "left")
    fa = aut_apply(a, shifts)
    fb = aut_apply(b, shifts)
    lower = op_norm(np.hstack([x - y for x, y in zip(fa, fb)]))
    rho = max(np.linalg.norm(a.lam), np.linalg.norm(b.lam))
    tail = 0.0 if rho == 0.0 else (4.0 / (1.0 - rho)) * rho ** (depth - 1) / (1.0 - rho)
    return lower, lower + tail


def dE(a: AutElement, b: AutElement, depth: int) -> tuple:
    """Metric interval: sup-norm bracket plus the exact Euclidean center term."""
    lower, upper = sup_norm_est(a, b, depth)
    eucl = float(np.linalg.norm(a.lam - b.lam))
    return lower + eucl, upper + eucl
