import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wittenhodge import generate_mesh, load_problem
from wittenhodge import geometry as geo
from wittenhodge.complex import MeshError, build_complex


def p1_integral(a, b, area):
    """Integral of lambda_a * lambda_b over a triangle."""
    return area * (2.0 if a == b else 1.0) / 12.0


def whitney_mass_oracle(points):
    """Closed-form Whitney 1-form mass matrix of one triangle.

    Expands (l_i dl_j - l_j dl_i) . (l_k dl_l - l_l dl_k) and integrates
    the barycentric products exactly.
    """
    P = np.asarray(points, float)
    T = np.array([[1, 1, 1], list(P[:, 0]), list(P[:, 1])])
    area = abs(np.linalg.det(T)) / 2
    grads = np.linalg.inv(T)[:, 1:]
    g = grads @ grads.T
    edges = list(itertools.combinations(range(3), 2))
    M = np.zeros((3, 3))
    for r, (i, j) in enumerate(edges):
        for c, (k, l) in enumerate(edges):
            M[r, c] = (p1_integral(i, k, area) * g[j, l]
                       - p1_integral(i, l, area) * g[j, k]
                       - p1_integral(j, k, area) * g[i, l]
                       + p1_integral(j, l, area) * g[i, k])
    return M, area


TRIANGLES = [
    [(0, 0), (1, 0), (0, 1)],
    [(0.3, -0.2), (2.0, 0.5), (-0.4, 1.7)],
]


@pytest.mark.parametrize("pts", TRIANGLES)
def test_whitney_masses_match_closed_form(pts):
    c = build_complex([[0, 1, 2]])
    g = geo.embed(c, pts)
    M1 = geo.mass_matrix(g, c, 1).toarray()
    oracle, area = whitney_mass_oracle(pts)
    assert np.allclose(M1, oracle, atol=1e-14)
    M0 = geo.mass_matrix(g, c, 0).toarray()
    assert np.allclose(M0, area / 12 * (np.ones((3, 3)) + np.eye(3)), atol=1e-14)
    M2 = geo.mass_matrix(g, c, 2).toarray()
    assert np.allclose(M2, [[1.0 / area]], rtol=1e-13)


def test_quadrature_weights_and_exactness():
    bary, w = geo.simplex_quadrature(2, 4)
    assert w.sum() == pytest.approx(1.0)
    # mean of l0^2 l1^2 over a triangle is 2! 2! 2! / 6!
    val = (w * bary[:, 0] ** 2 * bary[:, 1] ** 2).sum()
    assert val == pytest.approx(2 * 2 * 2 / 720, rel=1e-13)


def test_embedding_in_space_matches_plane():
    c = build_complex([[0, 1, 2]])
    flat = geo.embed(c, TRIANGLES[1])
    rot = np.linalg.qr(np.random.default_rng(3).standard_normal((3, 3)))[0]
    lifted = np.c_[np.asarray(TRIANGLES[1]), np.zeros(3)] @ rot.T + [1.0, -2.0, 0.5]
    space = geo.embed(c, lifted)
    for k in range(3):
        assert np.allclose(geo.mass_matrix(flat, c, k).toarray(),
                           geo.mass_matrix(space, c, k).toarray(), atol=1e-13)


def test_degenerate_triangle_rejected():
    c = build_complex([[0, 1, 2]])
    with pytest.raises(MeshError):
        geo.embed(c, [(0, 0), (1, 0), (2, 0)])


@given(st.sampled_from(["disk", "annulus", "sphere", "torus"]), st.integers(0, 2))
@settings(max_examples=12, deadline=None)
def test_mass_matrices_are_symmetric_positive_definite(kind, k):
    params = {"disk": dict(rings=3, sectors=8), "annulus": dict(rings=3, sectors=8),
              "sphere": dict(bands=4, sectors=8), "torus": dict(sectors=8, tube=6)}
    doc = generate_mesh(kind, **params[kind])
    c = build_complex(doc["simplices"])
    M = geo.mass_matrix(geo.embed(c, doc["vertices"]), c, k).toarray()
    assert np.abs(M - M.T).max() <= 1e-15 * np.abs(M).max()
    assert np.linalg.eigvalsh(M).min() > 0


def test_total_area_from_zero_form_mass():
    doc = generate_mesh("annulus", inner=1.0, outer=2.0, rings=4, sectors=32)
    c = build_complex(doc["simplices"])
    M0 = geo.mass_matrix(geo.embed(c, doc["vertices"]), c, 0)
    ones = np.ones(M0.shape[0])
    polygon = 0.5 * 32 * np.sin(2 * np.pi / 32) * (4 - 1)
    assert ones @ M0 @ ones == pytest.approx(polygon, rel=1e-12)


def test_rotation_field_is_tangent_and_vanishes_at_fixed_points():
    p = load_problem(generate_mesh("sphere", bands=6, sectors=12))
    assert p.diagnostics["field"]["tangency_defect"] <= 1e-12
    X = p.field.values
    assert np.allclose(X[list(p.fixed_vertices)], 0.0)
    d = load_problem(generate_mesh("disk", rings=3, sectors=8))
    assert d.diagnostics["field"]["fixed_zero_defect"] == 0.0


def test_nontangent_field_rejected():
    from wittenhodge.errors import ValidationError
    doc = generate_mesh("disk", rings=2, sectors=8)
    V = np.asarray(doc["vertices"])
    doc["field"] = {"kind": "explicit", "vectors": V.tolist(), "scale": 1.0}
    with pytest.raises(ValidationError):
        load_problem(doc)
