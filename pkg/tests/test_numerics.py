import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from genmat import cgauss, rand_psd, rand_unitary
from rowball.errors import NotContained, NotHermitian, SignificantlyNegativeEigenvalue, ValidationError
from rowball.numerics import (
    DEFAULT_TOL,
    Subspace,
    ToleranceConfig,
    col_space,
    complement_of,
    compress,
    null_space,
    op_norm,
    ortho_complement_in,
    psd_sqrt,
    subspace_from_indices,
    subspace_intersect,
    subspace_minus,
    subspace_sum,
)


def test_tolerance_validation():
    with pytest.raises(ValidationError):
        ToleranceConfig(rank_rel=-1.0)
    with pytest.raises(ValidationError):
        ToleranceConfig(max_iter=0)


def test_psd_sqrt_identity():
    assert np.allclose(psd_sqrt(np.eye(2)), np.eye(2))


def test_psd_sqrt_diagonal():
    assert np.allclose(psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))


def test_psd_sqrt_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        psd_sqrt(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_psd_sqrt_rejects_negative():
    with pytest.raises(SignificantlyNegativeEigenvalue):
        psd_sqrt(np.diag([1.0, -0.5]))


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=2 ** 31 - 1))
def test_psd_sqrt_multiply_back(k, seed):
    rng = np.random.default_rng(seed)
    a = rand_psd(rng, k)
    b = psd_sqrt(a)
    assert op_norm(b @ b - a) <= DEFAULT_TOL.residual_abs * (1.0 + op_norm(a))


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=2 ** 31 - 1))
def test_psd_sqrt_eigenvalues_are_roots(k, seed):
    rng = np.random.default_rng(seed)
    a = rand_psd(rng, k)
    w_a = np.linalg.eigvalsh(a)
    w_b = np.linalg.eigvalsh(psd_sqrt(a))
    assert np.max(np.abs(np.sqrt(np.clip(w_a, 0, None)) - w_b)) < 1e-8


def test_col_space_zero_matrix():
    assert col_space(np.zeros((3, 3))).dim == 0


def test_null_space_identity():
    assert null_space(np.eye(4)).dim == 0


def test_known_rank_splits():
    rng = np.random.default_rng(7)
    b = cgauss(rng, 4, 2)
    c = cgauss(rng, 2, 4)
    a = b @ c
    assert col_space(a).dim == 2
    assert null_space(a).dim == 2


def test_rank_stability_under_tiny_noise():
    rng = np.random.default_rng(8)
    b = cgauss(rng, 5, 3)
    a = b @ b.conj().T
    sigma = op_norm(a)
    noise = cgauss(rng, 5, 5)
    noise *= 0.1 * DEFAULT_TOL.rank_rel * sigma / op_norm(noise)
    assert col_space(a + noise).dim == col_space(a).dim == 3


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=1, max_value=7), st.integers(min_value=0, max_value=2 ** 31 - 1))
def test_projector_idempotent(k, seed):
    rng = np.random.default_rng(seed)
    s = col_space(cgauss(rng, k, max(1, k - 1)))
    p = s.projector()
    assert op_norm(p @ p - p) < 1e-10


def test_intersect_of_coordinate_lines():
    e1 = subspace_from_indices(2, [0])
    e2 = subspace_from_indices(2, [1])
    assert subspace_intersect(e1, e2).dim == 0


def test_ortho_complement_of_line_in_plane():
    e1 = subspace_from_indices(2, [0])
    full = col_space(np.eye(2))
    comp = ortho_complement_in(e1, full)
    assert comp.dim == 1
    assert abs(abs(comp.frame[1, 0]) - 1.0) < 1e-12


def test_ortho_complement_requires_containment():
    rng = np.random.default_rng(5)
    line = col_space(cgauss(rng, 3, 1))
    plane = subspace_from_indices(3, [0, 1])
    with pytest.raises(NotContained):
        ortho_complement_in(line, plane)


def test_dimension_identity_random_pair():
    rng = np.random.default_rng(11)
    s1 = col_space(cgauss(rng, 6, 3))
    s2 = col_space(np.hstack([s1.frame[:, :1], cgauss(rng, 6, 2)]))
    inter = subspace_intersect(s1, s2)
    total = subspace_sum(s1, s2)
    assert total.dim + inter.dim == s1.dim + s2.dim
    # cross-check via projector algebra: intersection projector from the
    # limit structure P1 P2 P1 having eigenvalue one exactly on the overlap
    p = s1.projector() @ s2.projector() @ s1.projector()
    ones = np.sum(np.linalg.eigvalsh(p) > 1 - 1e-9)
    assert ones == inter.dim


def test_subspace_minus_and_complement():
    rng = np.random.default_rng(13)
    u = rand_unitary(rng, 5)
    s = Subspace(u[:, :3])
    e = Subspace(u[:, :1])
    left = subspace_minus(s, e)
    assert left.dim == 2
    assert op_norm(e.frame.conj().T @ left.frame) < 1e-10
    comp = complement_of(s)
    assert comp.dim == 2
    assert op_norm(s.frame.conj().T @ comp.frame) < 1e-10


def test_compress_matches_dense_projection():
    rng = np.random.default_rng(17)
    a = cgauss(rng, 4, 4)
    dom = col_space(cgauss(rng, 4, 2))
    cod = col_space(cgauss(rng, 4, 3))
    c = compress(a, dom, cod)
    assert c.shape == (3, 2)
    dense = cod.projector() @ a @ dom.projector()
    assert op_norm(cod.frame @ c @ dom.frame.conj().T - dense) < 1e-12
