import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wittenhodge import witten as wt
from wittenhodge.witten import D, N

from conftest import problem_for

SURFACES = [
    ("disk", dict(rings=4, sectors=16)),
    ("annulus", dict(inner=1.0, outer=2.0, rings=4, sectors=16)),
    ("sphere", dict(bands=8, sectors=16)),
    ("torus", dict(sectors=16, tube=12)),
]


def test_boundary_condition_and_parity_parsing():
    assert wt.BoundaryCondition.parse("n") is N
    assert wt.BoundaryCondition.parse("DIRICHLET") is D
    assert wt.parse_parity("odd") == 1 and wt.parse_parity("+") == 0
    with pytest.raises(ValueError):
        wt.BoundaryCondition.parse("R")
    with pytest.raises(ValueError):
        wt.parse_parity("both")


@pytest.mark.parametrize("kind,params", SURFACES)
def test_classical_operator_squares_to_zero(kind, params):
    b = problem_for(kind, **params).bundle(0.0)
    for p in (0, 1):
        assert np.abs(b.A(1 - p) @ b.A(p)).max() == 0.0


@pytest.mark.parametrize("kind,params", SURFACES)
@pytest.mark.parametrize("s", [0.0, 0.5, 2.0])
def test_green_identities(kind, params, s):
    rep = wt.green_probe(problem_for(kind, **params).bundle(s), pairs=100, seed=1)
    assert rep.r1 <= 1e-12 and rep.r2 <= 1e-12


@pytest.mark.parametrize("kind,params", SURFACES)
def test_stiffness_is_sum_of_squared_norms(kind, params):
    b = problem_for(kind, **params).bundle(1.0)
    for p in (0, 1):
        for bc in (N, D):
            assert wt.gram_defect(b, bc, p, probes=20) <= 1e-10
            S, M = wt.stiffness(b, bc, p)
            assert np.array_equal(S, S.T)
            assert np.linalg.eigvalsh(S).min() >= -1e-10 * np.abs(S).max()


def test_dirichlet_restriction_removes_boundary_coordinates():
    b = problem_for("disk", rings=4, sectors=16).bundle(1.0)
    for p in (0, 1):
        nb = int(b.boundary_mask(p).sum())
        assert nb > 0
        assert b.size(p, D) == b.size(p) - nb
        x = np.arange(b.size(p, D), dtype=float) + 1.0
        full = b.embed(p, x, D)
        assert np.all(full[b.boundary_mask(p)] == 0.0)
        assert np.array_equal(b.restrict(p, full, D), x)


@given(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
@settings(max_examples=10, deadline=None)
def test_rescaling_matches_fresh_assembly(s0, s1):
    p = problem_for("annulus", inner=1.0, outer=2.0, rings=3, sectors=8)
    fresh = wt.assemble_bundle(p.complex, p.geometry, p.action, p.field, s1,
                               invariant=p.invariant)
    rescaled = wt.with_scale(p.bundle(s0), s1)
    assert wt.scale_equivariance_defect(fresh, rescaled) <= 1e-14


def test_contraction_is_linear_in_s():
    p = problem_for("disk", rings=4, sectors=16)
    b0, b1, b2 = p.bundle(0.0), p.bundle(1.0), p.bundle(2.0)
    for q in (0, 1):
        assert np.allclose(b2.A(q) - b0.A(q), 2 * (b1.A(q) - b0.A(q)), atol=1e-14)


def test_nilpotency_defect_decreases_under_refinement():
    etas = []
    for rings, sectors in ((16, 64), (32, 128)):
        b = problem_for("disk", rings=rings, sectors=sectors).bundle(1.0)
        etas.append(wt.nilpotency_defect(b, 0)[0])
    assert etas[1] / etas[0] <= 0.75


def test_stokes_probe_on_disk():
    b = problem_for("disk", rings=8, sectors=32).bundle(1.0)
    rep = wt.stokes_probe(b)
    assert rep.discrete_gap <= 1e-12 * abs(rep.analytic)
    assert rep.gap <= 0.05 * rep.analytic


def test_stokes_probe_needs_a_surface():
    class Solid:
        n = 3

    with pytest.raises(ValueError):
        wt.stokes_probe(Solid())
