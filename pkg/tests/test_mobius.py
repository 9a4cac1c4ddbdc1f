import numpy as np
import pytest
import scipy.linalg

from genmat import cgauss, rand_aut, rand_ball_tuple, rand_unitary
from rowball.errors import NearSingularResolvent, ValidationError
from rowball.fock import FockContext, creation_ops
from rowball.mobius import (
    AutElement,
    apply_point,
    aut_apply,
    compose,
    dE,
    identity_element,
    invert,
    psi_eval,
    sup_norm_est,
)
from rowball.numerics import op_norm


def row_norm(mats):
    return op_norm(np.hstack(mats))


def test_element_validation():
    with pytest.raises(ValidationError):
        AutElement(np.array([[1.0, 1.0], [0.0, 1.0]]), np.zeros(2))
    with pytest.raises(ValidationError):
        AutElement(np.eye(2), np.array([1.0, 0.0]))


def test_swap_at_zero_is_minus():
    rng = np.random.default_rng(0)
    x = rand_ball_tuple(rng, 2, 3)
    out = psi_eval(np.zeros(2), x)
    assert max(op_norm(a + b) for a, b in zip(out, x)) < 1e-14


def test_swap_sends_zero_to_center():
    rng = np.random.default_rng(1)
    lam = cgauss(rng, 2)
    lam = 0.7 * lam / np.linalg.norm(lam)
    out = psi_eval(lam, [np.zeros((1, 1)), np.zeros((1, 1))])
    assert np.allclose([m[0, 0] for m in out], lam)


def test_swap_sends_center_to_zero():
    rng = np.random.default_rng(2)
    lam = cgauss(rng, 3)
    lam = 0.6 * lam / np.linalg.norm(lam)
    x = [z * np.eye(2) for z in lam]
    out = psi_eval(lam, x)
    assert max(op_norm(m) for m in out) < 1e-12


def test_near_singular_resolvent():
    lam = np.array([0.9, 0.0])
    x = [np.array([[1.0 / 0.9]]), np.zeros((1, 1))]
    with pytest.raises(NearSingularResolvent):
        psi_eval(lam, x)


def test_apply_identity_pair_is_minus():
    rng = np.random.default_rng(3)
    x = rand_ball_tuple(rng, 2, 2)
    out = aut_apply(AutElement(np.eye(2), np.zeros(2)), x)
    assert max(op_norm(a + b) for a, b in zip(out, x)) < 1e-14


def test_apply_linear_on_scalar_row():
    rng = np.random.default_rng(4)
    u = rand_unitary(rng, 3)
    x = cgauss(rng, 3)
    x = 0.5 * x / np.linalg.norm(x)
    out = apply_point(AutElement(u, np.zeros(3)), x)
    assert np.allclose(out, -x @ u)


def test_apply_at_zero_gives_center():
    rng = np.random.default_rng(5)
    lam = cgauss(rng, 2)
    lam = 0.4 * lam / np.linalg.norm(lam)
    out = apply_point(AutElement(np.eye(2), lam), np.zeros(2))
    assert np.allclose(out, lam)


def test_identity_element_is_identity_map():
    rng = np.random.default_rng(6)
    e = identity_element(2)
    x = rand_ball_tuple(rng, 2, 3)
    out = aut_apply(e, x)
    assert max(op_norm(a - b) for a, b in zip(out, x)) < 1e-14


@pytest.mark.parametrize("seed", range(6))
def test_involution(seed):
    rng = np.random.default_rng(10 + seed)
    lam = cgauss(rng, 2)
    lam = rng.uniform(0.1, 0.9) * lam / np.linalg.norm(lam)
    x = rand_ball_tuple(rng, 2, 3, row_norm=rng.uniform(0.2, 1.0))
    twice = psi_eval(lam, psi_eval(lam, x))
    assert max(op_norm(a - b) for a, b in zip(twice, x)) < 1e-9


@pytest.mark.parametrize("seed", range(6))
def test_ball_preservation(seed):
    rng = np.random.default_rng(20 + seed)
    elem = rand_aut(rng, 2, lam_max=0.9)
    x = rand_ball_tuple(rng, 2, 3, row_norm=1.0)
    out = aut_apply(elem, x)
    assert row_norm(out) <= 1.0 + 1e-9


def test_compose_with_inverse_is_identity():
    rng = np.random.default_rng(30)
    a = rand_aut(rng, 2, lam_max=0.7)
    e = compose(a, invert(a))
    assert np.linalg.norm(e.lam) < 1e-9
    for _ in range(5):
        x = cgauss(rng, 2)
        x = 0.5 * x / np.linalg.norm(x)
        assert np.linalg.norm(apply_point(e, x) - x) < 1e-9


def test_swap_composed_with_itself_is_identity():
    rng = np.random.default_rng(31)
    lam = cgauss(rng, 2)
    lam = 0.5 * lam / np.linalg.norm(lam)
    a = AutElement(np.eye(2), lam)
    e = compose(a, a)
    assert np.linalg.norm(e.lam) < 1e-10
    for _ in range(5):
        x = cgauss(rng, 2)
        x = 0.4 * x / np.linalg.norm(x)
        assert np.linalg.norm(apply_point(e, x) - x) < 1e-9


def test_invert_linear_element():
    rng = np.random.default_rng(32)
    u = rand_unitary(rng, 2)
    inv = invert(AutElement(u, np.zeros(2)))
    assert np.linalg.norm(inv.lam) < 1e-12
    assert op_norm(inv.unitary - u.conj().T) < 1e-9


@pytest.mark.parametrize("seed", range(3))
def test_associativity_on_probes(seed):
    rng = np.random.default_rng(40 + seed)
    a, b, c = (rand_aut(rng, 2, lam_max=0.6) for _ in range(3))
    left = compose(compose(a, b), c)
    right = compose(a, compose(b, c))
    for _ in range(20):
        x = cgauss(rng, 2)
        x = rng.uniform(0.0, 0.8) * x / np.linalg.norm(x)
        assert np.linalg.norm(apply_point(left, x) - apply_point(right, x)) < 1e-8


def test_sup_norm_self_is_zero_lower():
    rng = np.random.default_rng(50)
    a = rand_aut(rng, 2)
    lower, upper = sup_norm_est(a, a, 6)
    assert lower < 1e-12
    assert upper >= lower


def test_sup_norm_linear_pair_exact():
    a = AutElement(np.eye(2), np.zeros(2))
    b = AutElement(-np.eye(2), np.zeros(2))
    lower, upper = sup_norm_est(a, b, 5)
    assert abs(lower - 2.0) < 1e-12
    assert abs(upper - 2.0) < 1e-12  # zero centers leave no tail


def test_right_shift_row_calibration():
    # the boundary machinery measures scalar rows exactly
    rng = np.random.default_rng(51)
    lam = cgauss(rng, 2)
    lam = 0.7 * lam / np.linalg.norm(lam)
    ctx = FockContext(2, 5)
    r_ops = creation_ops(ctx, "right")
    m = sum(np.conj(li) * ri for li, ri in zip(lam, r_ops))
    assert abs(op_norm(m) - np.linalg.norm(lam)) < 1e-12


def test_metric_contains_euclidean_term():
    rng = np.random.default_rng(52)
    a = rand_aut(rng, 2, lam_max=0.5)
    b = rand_aut(rng, 2, lam_max=0.5)
    lower, upper = dE(a, b, 5)
    assert lower >= np.linalg.norm(a.lam - b.lam) - 1e-12
    assert upper >= lower


def test_metric_convergent_sequence():
    rng = np.random.default_rng(53)
    target = rand_aut(rng, 2, lam_max=0.5)
    skew = cgauss(rng, 2, 2)
    skew = skew - skew.conj().T
    lowers = []
    for k in range(1, 7):
        u_k = scipy.linalg.expm(2.0 ** -k * skew) @ target.unitary
        lam_k = (1 - 2.0 ** -k) * target.lam
        lower, _ = dE(AutElement(u_k, lam_k), target, 6)
        lowers.append(lower)
    assert all(lowers[i + 1] < lowers[i] for i in range(len(lowers) - 1))
    assert lowers[-1] < 0.1
    # and the truncation tail of the upper bound vanishes with the depth
    a_last = AutElement(scipy.linalg.expm(2.0 ** -6 * skew) @ target.unitary, (1 - 2.0 ** -6) * target.lam)
    tails = []
    for depth in (4, 6, 8):
        lower, upper = dE(a_last, target, depth)
        tails.append(upper - lower)
    assert tails[2] < tails[1] < tails[0]


def test_metric_non_convergent_sequence():
    rng = np.random.default_rng(54)
    target = rand_aut(rng, 2, lam_max=0.3)
    flip = AutElement(-target.unitary, -target.lam)
    lowers = []
    for k in range(6):
        elem = target if k % 2 == 0 else flip
        lower, _ = dE(elem, target, 5)
        lowers.append(lower)
    assert max(lowers) > 0.1


def test_path_connectedness_probe():
    rng = np.random.default_rng(55)
    u = rand_unitary(rng, 2)
    lam = cgauss(rng, 2)
    lam = 0.5 * lam / np.linalg.norm(lam)
    log_u = scipy.linalg.logm(u)

    def at(t):
        return AutElement(scipy.linalg.expm(t * log_u), t * lam)

    for mesh, bound in ((4, None), (8, None)):
        steps = [dE(at(i / mesh), at((i + 1) / mesh), 5)[0] for i in range(mesh)]
        if mesh == 4:
            coarse = max(steps)
        else:
            assert max(steps) < coarse
