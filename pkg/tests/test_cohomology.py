import pytest

from wittenhodge import cohomology as co

from conftest import problem_for

ANNULUS = dict(inner=1.0, outer=2.0, rings=4, sectors=16)


def test_parity_sums():
    assert co.parity_sums([1, 2, 1]) == (2, 2)
    assert co.parity_sums([1]) == (1, 0)


@pytest.mark.parametrize("kind,params,expected", [
    ("disk", dict(rings=16, sectors=64), (1, 0, 1, 0)),
    ("sphere", dict(bands=8, sectors=16), (2, 0, 2, 0)),
    ("annulus", ANNULUS, (0, 0, 0, 0)),
    ("torus", dict(sectors=16, tube=12), (0, 0, 0, 0)),
])
def test_fixed_point_reference(kind, params, expected):
    p = problem_for(kind, **params)
    ref = co.fixed_point_reference(p.complex, p.action, p.field, p.fixed_vertices)
    assert ref.as_tuple() == expected


def test_fixed_point_from_field_zeros_matches_generator_metadata():
    p = problem_for("disk", rings=4, sectors=16)
    trusted = co.fixed_point_reference(p.complex, p.action, p.field, p.fixed_vertices)
    derived = co.fixed_point_reference(p.complex, p.action, p.field, None)
    assert trusted.as_tuple() == derived.as_tuple()


@pytest.mark.parametrize("kind,params,expected", [
    ("annulus", ANNULUS, (1, 1, 1, 1)),
    ("disk", dict(rings=4, sectors=16), (1, 0, 1, 0)),
    ("torus", dict(sectors=16, tube=12), (2, 2, 2, 2)),
])
def test_classical_reference(kind, params, expected):
    assert co.classical_reference(problem_for(kind, **params).complex) == expected


def test_x_dims_at_zero_are_classical():
    p = problem_for("annulus", **ANNULUS)
    xd = co.x_cohomology_dims(p.bundle(0.0))
    assert xd.clean
    assert xd.as_tuple() == co.classical_reference(p.complex)


def test_disk_isomorphism_verdict():
    p = problem_for("disk", rings=16, sectors=64)
    v = co.verify_isomorphisms(p, 1.0, "disk")
    assert v.passed, v.as_dict()
    assert v.rows["even_N"] == [1, 1] and v.rows["odd_D"] == [0, 0]
    assert v.split_rows["even"] == {"M": [1, 0, 0], "N": [1, 0, 0]}
    with pytest.raises(ValueError):
        co.verify_isomorphisms(p, 0.0)


def test_classical_split_of_a_point_and_a_segment():
    p = problem_for("disk", rings=4, sectors=16)
    sub, _ = p.fixed_set()
    assert co.classical_split(sub) == {0: (1, 0, 0), 1: (0, 0, 0)}


@pytest.mark.parametrize("kind,params", [
    ("disk", dict(rings=4, sectors=16)),
    ("annulus", ANNULUS),
    ("sphere", dict(bands=8, sectors=16)),
    ("torus", dict(sectors=16, tube=12)),
])
def test_euler_identities(kind, params):
    rep = co.euler_identities(problem_for(kind, **params))
    assert rep.passed
    assert [r[0] for r in rep.rows] == ["chi(M)=chi(N)", "chi(M,dM)=chi(N,dN)",
                                       "chi(dM)=chi(dN)"]


def test_s_sweep_table():
    p = problem_for("sphere", bands=24, sectors=48)
    table = co.s_sweep_dims(p, [0.0, 0.25, 0.5, 1.0])
    assert table.passed and table.constant_nonzero
    assert table.expected_zero == (2, 0, 2, 0)
    with pytest.raises(ValueError):
        co.s_sweep_dims(p, [0.5, 1.0, 2.0])
    with pytest.raises(ValueError):
        co.s_sweep_dims(p, [0.0, 1.0, 2.0])
