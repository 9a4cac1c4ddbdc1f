import numpy as np
import pytest
import scipy.linalg

from genmat import cgauss, rand_aut, rand_unitary
from rowball.contraction import defects, poisson_kernel, row_isometry_defect
from rowball.errors import ValidationError
from rowball.fock import FockContext, creation_ops
from rowball.mobius import AutElement, identity_element
from rowball.projrep import (
    boundary_function,
    boundary_isometry_budget,
    cocycle,
    continuity_probe,
    intertwining_budget,
    intertwining_residual,
    tail_budget,
    u_operator,
)
from rowball.numerics import op_norm

N = 6


def ctx_and_shifts():
    ctx = FockContext(2, N)
    return ctx, creation_ops(ctx, "left")


def test_boundary_of_zero_center_is_minus_shift():
    ctx, shifts = ctx_and_shifts()
    bt = boundary_function(AutElement(np.eye(2), np.zeros(2)), N)
    assert max(op_norm(b + s) for b, s in zip(bt.mats, shifts)) < 1e-14


def test_boundary_vacuum_expectation_is_center():
    rng = np.random.default_rng(0)
    lam = cgauss(rng, 2)
    lam = 0.4 * lam / np.linalg.norm(lam)
    bt = boundary_function(AutElement(np.eye(2), lam), N)
    vac = np.zeros(bt.dim)
    vac[0] = 1.0
    got = np.array([np.vdot(vac, m @ vac) for m in bt.mats])
    assert np.allclose(got, lam, atol=1e-12)


def test_boundary_defect_norm_identity():
    # the defect of the boundary tuple applied to the vacuum has norm
    # (1 - |center|^2)^(1/2), exactly at any truncation depth
    rng = np.random.default_rng(1)
    for target in (0.2, 0.5, 0.6):
        lam = cgauss(rng, 2)
        lam = target * lam / np.linalg.norm(lam)
        bt = boundary_function(AutElement(rand_unitary(rng, 2), lam), N)
        dd = defects(bt)
        nrm = np.linalg.norm(dd.delta_T[:, 0])
        assert abs(nrm ** 2 + target ** 2 - 1.0) < 1e-8


def test_boundary_row_isometric_on_interior():
    rng = np.random.default_rng(2)
    ctx, _ = ctx_and_shifts()
    for _ in range(3):
        a = rand_aut(rng, 2, lam_min=0.1, lam_max=0.5)
        rho = float(np.linalg.norm(a.lam))
        bt = boundary_function(a, N)
        for buf in (1, 2):
            frame = np.eye(ctx.dim)[:, list(ctx.indices_up_to_degree(N - buf))]
            assert row_isometry_defect(bt, frame) <= boundary_isometry_budget(rho, buf)


def test_u_operator_identity_element_is_identity():
    ctx, _ = ctx_and_shifts()
    rep = u_operator(identity_element(2), N, 2)
    assert op_norm(rep.u_op - np.eye(ctx.dim)) < 1e-12
    assert rep.isometry_residual < 1e-12


def test_u_operator_parity_for_zero_center():
    ctx, shifts = ctx_and_shifts()
    rep = u_operator(AutElement(np.eye(2), np.zeros(2)), N, 2)
    parity = np.array([(-1.0) ** len(w) for w in ctx.words])
    assert op_norm(rep.u_op - np.diag(parity)) < 1e-12
    for s, b in zip(shifts, rep.boundary.mats):
        assert op_norm(rep.u_op.conj().T @ s @ rep.u_op - b) < 1e-12


def test_u_operator_linear_case_exact():
    rng = np.random.default_rng(3)
    ctx, shifts = ctx_and_shifts()
    u = rand_unitary(rng, 2)
    rep = u_operator(AutElement(u, np.zeros(2)), N, 2)
    assert rep.isometry_residual < 1e-12
    # conjugation folds the shifts through the (sign-carrying) linear map
    for j in range(2):
        lhs = rep.u_op.conj().T @ shifts[j] @ rep.u_op
        rhs = -sum(u[i, j] * shifts[i] for i in range(2))
        assert op_norm(lhs - rhs) < 1e-8


def test_u_operator_buffer_validation():
    with pytest.raises(ValidationError):
        u_operator(identity_element(2), N, 1)


@pytest.mark.parametrize("seed", range(3))
def test_u_operator_certificates_and_intertwining(seed):
    rng = np.random.default_rng(10 + seed)
    a = rand_aut(rng, 2, lam_min=0.1, lam_max=0.3)
    rho = float(np.linalg.norm(a.lam))
    rep = u_operator(a, N, 2)
    assert rep.isometry_residual <= tail_budget(rho, N, 2)
    assert intertwining_residual(rep) <= intertwining_budget(rho, N, 2)


def test_vacuum_probe_follows_geometric_law():
    rng = np.random.default_rng(20)
    ctx, shifts = ctx_and_shifts()
    vac = ctx.basis_vector(())
    for _ in range(3):
        a = rand_aut(rng, 2, lam_min=0.15, lam_max=0.35)
        rho = float(np.linalg.norm(a.lam))
        rep = u_operator(a, N, 2)
        probe = max(
            float(np.linalg.norm((b - rep.u_op.conj().T @ s @ rep.u_op) @ vac))
            for b, s in zip(rep.boundary.mats, shifts)
        )
        assert probe <= rho ** N


def test_poisson_kernel_of_boundary_near_unitary_at_low_degrees():
    rng = np.random.default_rng(21)
    a = rand_aut(rng, 2, lam_min=0.25, lam_max=0.3)
    bt = boundary_function(a, N)
    dd = defects(bt)
    assert dd.D_T.dim == 1
    k = poisson_kernel(bt, N, dd).matrix
    dev = k @ k.conj().T - np.eye(k.shape[0])
    ctx = FockContext(2, N)
    vac_rows = list(ctx.indices_up_to_degree(0))
    low_rows = list(ctx.indices_up_to_degree(1))
    assert op_norm(dev[np.ix_(vac_rows, vac_rows)]) < 1e-6
    assert op_norm(dev[np.ix_(low_rows, low_rows)]) < 1e-3


def test_cocycle_with_identity_is_one():
    rng = np.random.default_rng(30)
    a = rand_aut(rng, 2, lam_min=0.1, lam_max=0.3)
    coc = cocycle(a, identity_element(2), N, 2)
    assert abs(coc.c - 1.0) < 1e-8


def test_cocycle_linear_pair_exact():
    rng = np.random.default_rng(31)
    a = AutElement(rand_unitary(rng, 2), np.zeros(2))
    b = AutElement(rand_unitary(rng, 2), np.zeros(2))
    coc = cocycle(a, b, N, 2)
    assert abs(coc.c - 1.0) < 1e-9
    assert coc.residual < 1e-9


@pytest.mark.parametrize("seed", range(3))
def test_cocycle_modulus_random(seed):
    rng = np.random.default_rng(40 + seed)
    a = rand_aut(rng, 2, lam_min=0.1, lam_max=0.3)
    b = rand_aut(rng, 2, lam_min=0.1, lam_max=0.3)
    coc = cocycle(a, b, N, 2)
    assert coc.modulus_defect <= 2e-6


def test_continuity_probe_center_sequence():
    rng = np.random.default_rng(50)
    target = rand_aut(rng, 2, lam_min=0.3, lam_max=0.4)
    seq = [
        AutElement(target.unitary, (1 - 2.0 ** -k) * target.lam)
        for k in range(1, 7)
    ]
    vals = continuity_probe(seq, target, N, 2)
    assert all(vals[i + 1] < vals[i] for i in range(2, len(vals) - 1))
    assert vals[-1] < 1e-2
    const = continuity_probe([target, target], target, N, 2)
    assert max(const) < 1e-12


def test_continuity_probe_unitary_sequence():
    rng = np.random.default_rng(51)
    target = rand_aut(rng, 2, lam_min=0.2, lam_max=0.3)
    skew = cgauss(rng, 2, 2)
    skew = skew - skew.conj().T
    seq = [
        AutElement(scipy.linalg.expm(2.0 ** -k * skew) @ target.unitary, target.lam)
        for k in range(1, 7)
    ]
    vals = continuity_probe(seq, target, N, 2)
    assert vals[-1] < vals[0]
    assert vals[-1] < 1e-2


def test_independent_constructions_agree_up_to_scalar():
    rng = np.random.default_rng(52)
    a = rand_aut(rng, 2, lam_min=0.2, lam_max=0.3)
    r1 = u_operator(a, N, 2, u_convention="vacuum")
    r2 = u_operator(a, N, 3, u_convention="eigen")
    prod = r1.u_op @ r2.u_op.conj().T
    c = np.trace(prod) / prod.shape[0]
    assert abs(abs(c) - 1.0) < 1e-6
    assert op_norm(prod - c * np.eye(prod.shape[0])) < 1e-6
