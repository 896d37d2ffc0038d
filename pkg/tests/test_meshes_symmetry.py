import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wittenhodge import ValidationError, generate_mesh, load_problem
from wittenhodge.complex import build_complex
from wittenhodge.meshes import ParameterError, refine_params
from wittenhodge.schemas import validate
from wittenhodge.symmetry import (ActionError, fixed_subcomplex,
                                  induced_action, invariant_basis)


@pytest.mark.parametrize("kind,params,nv,nt", [
    ("disk", dict(rings=2, sectors=4), 9, 12),
    ("annulus", dict(rings=3, sectors=6), 24, 36),
    ("torus", dict(sectors=16, tube=12), 192, 384),
    ("sphere", dict(bands=4, sectors=6), 20, 36),
])
def test_generator_counts(kind, params, nv, nt):
    doc = generate_mesh(kind, **params)
    assert len(doc["vertices"]) == nv
    assert len(doc["simplices"]) == nt
    validate(doc, "mesh")


def test_unknown_kind_and_bad_order():
    with pytest.raises(ParameterError):
        generate_mesh("klein")
    with pytest.raises(ParameterError):
        generate_mesh("disk", rings=2, sectors=6, order=4)


def test_refine_doubles_resolution_only():
    assert refine_params("annulus", dict(inner=1.0, outer=2.0, rings=16, sectors=64)) \
        == dict(inner=1.0, outer=2.0, rings=32, sectors=128)


@given(st.sampled_from(["disk", "annulus", "sphere", "torus"]),
       st.sampled_from([1, 2, 3, 6]))
@settings(max_examples=16, deadline=None)
def test_action_has_declared_order(kind, order):
    key = {"disk": "rings", "annulus": "rings", "sphere": "bands",
           "torus": "tube"}[kind]
    doc = generate_mesh(kind, **{key: 4, "sectors": 6, "order": order})
    perm = np.asarray(doc["action"]["vertex_perm"])
    g = np.arange(len(perm))
    for i in range(1, order + 1):
        g = perm[g]
        assert np.array_equal(g, np.arange(len(perm))) == (i == order)
    diag = load_problem(doc).diagnostics["action"]
    assert diag["chain_map_defect"] == 0
    assert diag["isometry_defect"] <= 1e-12


@given(st.sampled_from([2, 4, 8]))
@settings(max_examples=3, deadline=None)
def test_invariant_basis_columns_are_invariant(order):
    doc = generate_mesh("disk", rings=3, sectors=8, order=order)
    c = build_complex(doc["simplices"])
    a = induced_action(c, doc["action"]["vertex_perm"], order)
    inv = invariant_basis(c, a)
    for k in range(3):
        J = inv.J[k]
        assert abs(a.R[k] @ J - J).max() == 0
        assert np.array_equal(np.asarray(abs(J).sum(axis=0)).ravel(), inv.lengths[k])
        # invariant coboundary commutes with the orbit-sum embedding
        if k < 2:
            d = inv.restrict(k, c.coboundary[k], k + 1)
            assert abs(c.coboundary[k] @ J - inv.J[k + 1] @ d).max() == 0


def test_invariant_dimension_counts_orbits():
    doc = generate_mesh("disk", rings=2, sectors=4)
    c = build_complex(doc["simplices"])
    a = induced_action(c, doc["action"]["vertex_perm"], 4)
    inv = invariant_basis(c, a)
    # orbits: centre + 2 rings of vertices; 5 edge orbits; 3 triangle orbits
    assert [J.shape[1] for J in inv.J] == [3, 5, 3]


def test_non_permutation_rejected():
    c = build_complex([[0, 1, 2]])
    with pytest.raises(ActionError):
        induced_action(c, [0, 0, 1], 2)


def test_non_isometric_action_rejected():
    doc = generate_mesh("annulus", inner=1.0, outer=2.0, rings=2, sectors=8)
    perm = np.asarray(doc["action"]["vertex_perm"])
    # swap two vertices on the outer ring only: still a bijection, not a symmetry
    perm[[16, 17]] = perm[[17, 16]]
    doc["action"]["vertex_perm"] = perm.tolist()
    with pytest.raises(ValidationError):
        load_problem(doc)


def test_fixed_sets():
    d = load_problem(generate_mesh("disk", rings=3, sectors=8))
    sub, _ = fixed_subcomplex(d.complex, d.action, d.field)
    assert sub.counts == [1]
    s = load_problem(generate_mesh("sphere", bands=4, sectors=8))
    sub, _ = s.fixed_set()
    assert sub.counts == [2]
    t = load_problem(generate_mesh("torus", sectors=8, tube=6))
    sub, _ = t.fixed_set()
    assert not sub.simplices or sum(sub.counts) == 0


@pytest.mark.parametrize("mutate", [
    lambda d: d.pop("vertices"),
    lambda d: d.__setitem__("schema", "wittenhodge.mesh/0"),
    lambda d: d.__setitem__("simplices", [[0, 1]]),
    lambda d: d["vertices"].__setitem__(0, [float("nan"), 0.0]),
])
def test_malformed_mesh_documents(mutate):
    doc = generate_mesh("disk", rings=2, sectors=4)
    mutate(doc)
    with pytest.raises(ValidationError):
        load_problem(doc)
