import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wittenhodge import decomp as dc
from wittenhodge.radial import duality_angle_closed
from wittenhodge.witten import D, N

from conftest import problem_for

ANNULUS = dict(inner=1.0, outer=2.0, rings=4, sectors=16)
DISK = dict(rings=16, sectors=64)


def mnorm(b, p, x):
    return math.sqrt(max(x @ b.M(p) @ x, 0.0))


def test_exact_input_is_all_exact_at_s0():
    b = problem_for("annulus", **ANNULUS).bundle(0.0)
    x = np.random.default_rng(0).standard_normal(b.size(0, D))
    omega = b.A(0) @ b.embed(0, x, D)
    dec = dc.morrey_decompose(b, omega, 1)
    assert mnorm(b, 1, dec.parts["e"] - omega) <= 1e-10 * mnorm(b, 1, omega)


def test_harmonic_angle_form_is_all_harmonic():
    b = problem_for("annulus", **ANNULUS).bundle(0.0)
    omega = dc.harmonic_fields(b, N, 1).basis[:, 0]
    dec = dc.morrey_decompose(b, omega, 1)
    assert mnorm(b, 1, dec.parts["kappa"] - omega) <= 1e-8


@given(st.integers(0, 2 ** 31 - 1), st.sampled_from([0, 1]),
       st.sampled_from([0.0, 1.0]))
@settings(max_examples=12, deadline=None)
def test_five_term_reconstructs_and_is_orthogonal(seed, parity, s):
    b = problem_for("annulus", **ANNULUS).bundle(s)
    omega = np.random.default_rng(seed).standard_normal(b.size(parity))
    dec = dc.five_term_decompose(b, omega, parity)
    assert dec.reconstruction <= 1e-9
    assert dec.orthogonality <= 1e-9
    assert set(dec.parts) == {"e", "c", "h_N", "h_D", "h_exco"}


def test_dirichlet_field_lands_in_h_D():
    b = problem_for("disk", **DISK).bundle(1.0)
    z = dc.harmonic_fields(b, D, 0).require().basis[:, 0]
    dec = dc.five_term_decompose(b, z, 0)
    assert mnorm(b, 0, dec.parts["h_D"] - z) <= 1e-5
    assert mnorm(b, 0, dec.parts["h_N"]) <= 1e-5


def test_closed_surface_has_no_exact_coexact_harmonic_part():
    b = problem_for("sphere", bands=8, sectors=16).bundle(0.0)
    omega = np.random.default_rng(1).standard_normal(b.size(0))
    dec = dc.five_term_decompose(b, omega, 0)
    assert mnorm(b, 0, dec.parts["h_exco"]) <= 1e-10 * mnorm(b, 0, omega)
    assert mnorm(b, 0, dec.parts["h_D"]) == 0.0


def test_harmonic_representative_is_unique_at_s0():
    """Two bases of the same class differ by nothing after projection."""
    b = problem_for("annulus", **ANNULUS).bundle(0.0)
    h = dc.harmonic_fields(b, N, 1).basis[:, 0]
    x = np.random.default_rng(2).standard_normal(b.size(0, D))
    shifted = h + b.A(0) @ b.embed(0, x, D)
    k1 = dc.morrey_decompose(b, h, 1).parts["kappa"]
    k2 = dc.morrey_decompose(b, shifted, 1).parts["kappa"]
    assert mnorm(b, 1, k1 - k2) <= 1e-10


def test_poisson_solver():
    b = problem_for("disk", **DISK).bundle(1.0)
    for p in (0, 1):
        for bc in (N, D):
            n = b.size(p, bc)
            assert np.abs(dc.solve_poisson(b, bc, np.zeros(n), p)).max() == 0.0
    h = b.restrict(0, dc.harmonic_fields(b, N, 0).basis[:, 0], N)
    with pytest.raises(dc.DecompositionError):
        dc.solve_poisson(b, N, h, 0)


def test_poisson_solution_has_the_right_load():
    from wittenhodge.witten import stiffness
    b = problem_for("annulus", **ANNULUS).bundle(1.0)
    eta = np.random.default_rng(3).standard_normal(b.size(1, D))
    w = dc.solve_poisson(b, D, eta, 1)
    S, M = stiffness(b, D, 1)
    assert np.linalg.norm(S @ w - M @ eta) <= 1e-9 * np.linalg.norm(M @ eta)


def test_principal_angle_examples():
    m = np.eye(2)
    e1, diag = np.array([[1.0], [0.0]]), np.array([[1.0], [1.0]]) / math.sqrt(2)
    assert dc.principal_angles(e1, diag, m)[0] == pytest.approx(math.pi / 4)
    rep = dc.duality_angles(e1, e1, m)
    assert rep.angles[0] == pytest.approx(0.0, abs=1e-8) and not rep.acute
    assert dc.duality_angles(e1, diag, m).acute
    with pytest.raises(dc.DecompositionError):
        dc.duality_angles(e1, np.eye(2), m)


@given(st.integers(0, 2 ** 31 - 1), st.integers(1, 3), st.integers(1, 3))
@settings(max_examples=30, deadline=None)
def test_principal_angles_are_symmetric_and_bounded(seed, k, l):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((8, 8))
    m = B @ B.T + 8 * np.eye(8)
    from wittenhodge.spectral import m_orthonormalize
    U = m_orthonormalize(rng.standard_normal((8, k)), m)
    V = m_orthonormalize(rng.standard_normal((8, l)), m)
    a, b = dc.principal_angles(U, V, m), dc.principal_angles(V, U, m)
    assert np.allclose(a, b, atol=1e-7)
    assert np.all((a >= 0) & (a <= math.pi / 2 + 1e-12))


def test_disk_split_and_acute_angle():
    b = problem_for("disk", **DISK).bundle(1.0)
    sN, sD = dc.interior_bases(b, 0)
    assert sN.dims == (1, 0) and sD.dims == (1, 0)
    assert sN.evidence["span_angle"] <= 1e-6
    reps = dc.angles_at(b)
    assert list(reps) == [0]
    theta = reps[0].angles[0]
    assert reps[0].acute
    assert abs(theta - duality_angle_closed(1.0)) <= 0.05


def test_full_and_interior_angles_agree_without_boundary_fields():
    b = problem_for("disk", **DISK).bundle(1.0)
    hN = dc.harmonic_fields(b, N, 0).basis
    hD = dc.harmonic_fields(b, D, 0).basis
    full = dc.principal_angles(hN, hD, b.M(0)).min()
    sN, sD = dc.interior_bases(b, 0)
    inner = dc.principal_angles(sN.interior, sD.interior, b.M(0)).min()
    assert full == pytest.approx(inner, abs=1e-10)


def test_classical_annulus_is_all_boundary():
    b = problem_for("annulus", **ANNULUS).bundle(0.0)
    for p in (0, 1):
        sN, sD = dc.interior_bases(b, p)
        assert sN.dims == (0, 1) and sD.dims == (0, 1)
        assert sN.cross_gram_max <= 1e-9
    assert dc.angles_at(b) == {}


def test_angle_sweep_and_csv():
    p = problem_for("disk", **DISK)
    entries = dc.angle_sweep(p, [0.5, 1.0])
    assert [e.status for e in entries] == ["ok", "ok"]
    assert entries[0].angles[0] > entries[1].angles[0]
    buf = io.StringIO()
    dc.write_sweep_csv(entries, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == ",".join(dc.CSV_COLUMNS)
    s, idx, ang, m0, m1 = lines[1].split(",")
    assert float(m0) == float(ang)
    assert float(m1) == pytest.approx(math.pi / 2 - float(ang))


def test_empty_and_classical_sweeps():
    p = problem_for("disk", **DISK)
    assert dc.angle_sweep(p, []) == []
    buf = io.StringIO()
    dc.write_sweep_csv([], buf)
    assert buf.getvalue().strip() == ",".join(dc.CSV_COLUMNS)
    annulus = problem_for("annulus", **ANNULUS)
    assert [e.status for e in dc.angle_sweep(annulus, [0.0])] == ["empty"]


def test_sweep_needs_boundary():
    with pytest.raises(dc.DecompositionError):
        dc.angle_sweep(problem_for("sphere", bands=8, sectors=16), [1.0])
