import numpy as np
import pytest

from extlab import calculus as calc
from extlab import models
from extlab.errors import (DimensionMismatch, EpsOutOfRange, InsufficientProbes,
                           NotInDomain)
from extlab.exppoly import ExpPoly
from extlab.models import element, inner, norm

EPS_GRID = [4e-4, 2e-4, 1e-4]


@pytest.fixture(params=["halfline", "twohalflines"])
def model(request):
    return models.MODELS[request.param]()


def random_probes(model, n=3, seed=0):
    rng = np.random.default_rng(seed)
    return [models.random_adjoint_element(model, rng) for _ in range(n)]


def test_eps_range_is_enforced(model):
    g = random_probes(model, 1)[0]
    for eps in (0.0, 1e-6, 0.6):
        with pytest.raises(EpsOutOfRange):
            calc.gamma1_eps(model, g, eps, "-")
    with pytest.raises(ValueError):
        calc.gamma1_eps(model, g, 1e-3, "x")


def test_kernel_projection_is_idempotent(model):
    g = random_probes(model, 1)[0]
    p = calc.project_kernel(model, g, 1e-3j)
    assert norm(calc.project_kernel(model, p, 1e-3j) - p) < 1e-12 * norm(g)


def test_boundary_map_images(model):
    # Gamma0 lands in ker S*, Gamma1 in ker S*, and on D(S-bar) both vanish
    g = random_probes(model, 1)[0]
    u0 = calc.gamma0(model, g)
    u1 = calc.gamma1(model, g)
    assert norm(model.apply_adjoint(u0)) < 1e-9 * max(norm(g), 1.0)
    assert norm(calc.project_kernel(model, u1, 0.0) - u1) < 1e-12 * max(norm(g), 1.0)
    f = models._closure_element(model)
    assert norm(calc.gamma0(model, f)) < 1e-9 * norm(f)
    assert norm(calc.gamma1(model, f)) < 1e-9 * norm(f)


def test_direct_sum_decompositions(model):
    for g in random_probes(model, 3):
        dec = calc.decompose_kvb(model, g)
        recon = dec.f + model.distinguished_resolvent(dec.u1) + dec.u0
        assert norm(recon - g) < 1e-9 * norm(g)
        dv = calc.decompose_vn(model, g, 1e-3)
        assert norm((dv.f_eps + dv.u_eps - dv.v_eps) - g) < 1e-9 * norm(g)


def test_eps_family_error_bounds_pointwise(model):
    for g in random_probes(model, 3, seed=4):
        c = norm(g) + norm(model.apply_adjoint(g))
        u1 = calc.gamma1(model, g)
        u0 = calc.gamma0(model, g)
        for eps in (1e-2, 1e-3, 1e-4):
            for sign in ("-", "+"):
                err = norm(calc.gamma1_eps(model, g, eps, sign) - u1)
                assert err <= eps * c * (1 + 1e-12)
            err0 = norm(calc.gamma0_eps(model, g, eps) - u0)
            assert err0 <= 2.0 * eps * c * (1 + 1e-12)


def test_adjoint_of_upsilon_identity(model):
    # S* Upsilon_eps = (Gamma1eps- + Gamma1eps+) / 2 on D(S*)
    for g in random_probes(model, 2, seed=7):
        eps = 1e-3
        lhs = model.apply_adjoint(calc.upsilon_eps(model, g, eps))
        rhs = 0.5 * (calc.gamma1_eps(model, g, eps, "-")
                     + calc.gamma1_eps(model, g, eps, "+"))
        assert norm(lhs - rhs) < 1e-9 * max(norm(g), 1.0)


def test_projection_gap_matches_subspace_gap(model):
    for eps in (1e-2, 1e-3):
        for sign in ("-", "+"):
            z = 1j * eps if sign == "-" else -1j * eps
            gap = calc.projection_gap_norm(model, eps, sign)
            _, _, dhat = calc.subspace_gap(model, model.deficiency_basis(z),
                                           model.deficiency_basis(0.0))
            assert gap <= eps
            assert abs(gap - dhat) < 1e-10


def test_subspace_gap_trivial_cases(model):
    basis = model.deficiency_basis(0.0)
    assert calc.subspace_gap(model, basis, basis) == pytest.approx((0.0, 0.0, 0.0), abs=1e-12)
    a = element(*([ExpPoly.single(1.0, 0, 1.0)] + [ExpPoly.zero()] * (model.channel_count - 1)))
    b = element(*([ExpPoly.single(1.0, 1, 1.0)] + [ExpPoly.zero()] * (model.channel_count - 1)))
    bo = b - inner(a, b) * (1.0 / inner(a, a).real) * a   # orthogonal 1d spans
    assert calc.subspace_gap(model, [a], [bo]) == pytest.approx((1.0, 1.0, 1.0), abs=1e-12)


def test_vn_components_requires_domain_membership():
    model = models.make_halfline_model()
    ext = models.make_friedrichs_extension(model)
    with pytest.raises(NotInDomain):
        calc.vn_components(model, ext, element(ExpPoly.single(1.0, 0, 1.0)), 1e-3)


def test_reconstruct_u_is_unitary(model):
    ext = (models.make_friedrichs_extension(model) if model.channel_count == 1
           else models.make_salpha_extension(model, 1.0))
    probes = models.canonical_probes(model, ext)
    par = calc.reconstruct_U(model, ext, 1e-3j, probes)
    d = model.deficiency_index
    assert np.abs(par.matrix.conj().T @ par.matrix - np.eye(d)).max() < 1e-9


def test_reconstruct_u_validates_input():
    model = models.make_halfline_model()
    ext = models.make_friedrichs_extension(model)
    probes = models.canonical_probes(model, ext)
    with pytest.raises(ValueError):
        calc.reconstruct_U(model, ext, 1e-3 + 1e-3j, probes)
    with pytest.raises(InsufficientProbes):
        # a closure element alone has vanishing deficiency images
        calc.reconstruct_U(model, ext, 1e-3j, [models._closure_element(model)])


def test_friedrichs_phase_is_zero():
    model = models.make_halfline_model()
    ext = models.make_friedrichs_extension(model)
    probes = models.canonical_probes(model, ext)
    for eps in (1e-2, 1e-3, 1e-4):
        par = calc.reconstruct_U(model, ext, 1j * eps, probes)
        assert abs(par.matrix[0, 0] - 1.0) < 1e-10
        assert min(par.theta, 2.0 * np.pi - par.theta) < 1e-10


def test_richardson_and_neville_are_exact_on_polynomials():
    lin = lambda e: 3.0 - 2.0 * e
    assert calc.richardson_pair(lin(1e-2), lin(5e-3), 1e-2, 5e-3) == pytest.approx(3.0)
    quad = lambda e: 1.0 + e - 4.0 * e * e
    grid = [4e-3, 2e-3, 1e-3]
    got = calc.extrapolate_to_zero(grid, [quad(e) for e in grid], order=2)
    assert got == pytest.approx(1.0, abs=1e-12)


def test_reconstruct_t_validates_input():
    model = models.make_twohalflines_model()
    ext = models.make_salpha_extension(model, 1.0)
    probes = models.canonical_probes(model, ext)
    with pytest.raises(ValueError):
        calc.reconstruct_T(model, ext, probes, [1e-4, 2e-4, 4e-4])
    with pytest.raises(ValueError):
        calc.reconstruct_T(model, ext, probes, [2e-4, 1e-4])
    with pytest.raises(InsufficientProbes):
        calc.reconstruct_T(model, ext, [], EPS_GRID)


def test_two_t_routes_agree():
    # the eps-limit route and the direct canonical-decomposition route give
    # the same matrix for the relative parameter
    model = models.make_twohalflines_model()
    for alpha in (-1.0, 2.0):
        ext = models.make_salpha_extension(model, alpha)
        probes = models.canonical_probes(model, ext)
        kvb = calc.reconstruct_T(model, ext, probes, EPS_GRID)
        assert len(kvb.domain_basis) == 1
        assert kvb.asymmetry < 1e-8
        q = kvb.domain_basis[0]
        direct = []
        for g in probes:
            _, u, tu_w = calc.kvb_components(model, ext, g)
            cu = inner(q, u)
            if abs(cu) > 1e-8:
                direct.append((inner(q, tu_w) / cu).real)
        assert direct
        for t in direct:
            assert abs(t - kvb.t_matrix[0, 0].real) < 1e-6


def test_friedrichs_has_empty_t_domain(model):
    ext = (models.make_friedrichs_extension(model))
    probes = models.canonical_probes(model, ext)
    kvb = calc.reconstruct_T(model, ext, probes, EPS_GRID)
    assert kvb.domain_basis == []
    assert kvb.t_matrix.shape == (0, 0)
    _, _, gap = calc.subspace_gap(model, kvb.complement_basis,
                                  model.deficiency_basis(0.0))
    assert gap < 1e-9


def test_build_kvb_domain_vector_round_trip():
    model = models.make_twohalflines_model()
    ext = models.make_salpha_extension(model, 0.5)
    probes = models.canonical_probes(model, ext)
    kvb = calc.reconstruct_T(model, ext, probes, EPS_GRID)
    for g in probes:
        f, u, tu_w = calc.kvb_components(model, ext, g)
        uc = [inner(q, u) for q in kvb.domain_basis]
        wc = [inner(r, tu_w) for r in kvb.complement_basis]
        g2 = calc.build_kvb_domain_vector(model, kvb, f, uc, wc)
        assert norm(g2 - g) < 1e-9 * max(norm(g), 1.0)
    with pytest.raises(DimensionMismatch):
        calc.build_kvb_domain_vector(model, kvb, model.zero(), [], [0.0])


def test_kvb_to_vn_unitary_and_consistent(model):
    ext = (models.make_friedrichs_extension(model) if model.channel_count == 1
           else models.make_salpha_extension(model, -1.0))
    probes = models.canonical_probes(model, ext)
    kvb = calc.reconstruct_T(model, ext, probes, EPS_GRID)
    z = 1e-3j
    vn = calc.kvb_to_vn(model, kvb, z)
    d = model.deficiency_index
    assert np.abs(vn.matrix.conj().T @ vn.matrix - np.eye(d)).max() < 1e-9
    direct = calc.reconstruct_U(model, ext, z, probes)
    assert np.abs(vn.matrix - direct.matrix).max() < 1e-7


def test_extension_from_vn_recovers_boundary_conditions():
    model = models.make_twohalflines_model()
    ext = models.make_salpha_extension(model, 3.0)
    probes = models.canonical_probes(model, ext)
    vn = calc.reconstruct_U(model, ext, 1e-3j, probes)
    ext2 = calc.extension_from_vn(model, vn)
    for g in probes:
        assert ext2.membership(g, tol=1e-7)
    outsider = element(ExpPoly.single(1.0, 0, 1.0), ExpPoly.zero())
    assert not ext2.membership(outsider)
