"""X-cohomology dimensions checked against the fixed-point set.

For s != 0 the X-harmonic dimensions of M must match the ordinary even/odd
Betti sums of the zero set N(X) (absolute for Neumann, relative to
N meet dM for Dirichlet); at s = 0 they are the Betti sums of M.  All
reference numbers here are exact integers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import decomp
from .complex import euler_characteristic, reference_betti
from .symmetry import fixed_subcomplex
from .witten import D, N, PARITIES

KEYS = ("even_N", "odd_N", "even_D", "odd_D")


def _key(parity, bc):
    return f"{('even', 'odd')[parity]}_{bc.value}"


def parity_sums(betti):
    return (sum(betti[0::2]), sum(betti[1::2]))


@dataclass
class XDims:
    s: float
    dims: dict
    verdicts: dict
    kernels: dict = field(default_factory=dict)

    @property
    def clean(self):
        return all(v == "clean" for v in self.verdicts.values())

    def as_tuple(self):
        return tuple(self.dims[k] for k in KEYS)


def x_cohomology_dims(bundle, **kernel_opts):
    """Dimensions of the four harmonic near-kernels (even/odd x N/D)."""
    dims, verdicts, kernels = {}, {}, {}
    for bc in (N, D):
        for p in PARITIES:
            hb = decomp.harmonic_fields(bundle, bc, p, **kernel_opts)
            k = _key(p, bc)
            dims[k] = hb.dim
            verdicts[k] = hb.kernel.verdict
            kernels[k] = hb.kernel.as_dict()
    return XDims(bundle.s, dims, verdicts, kernels)


@dataclass
class FixedPointReference:
    betti_abs: list
    betti_rel: list
    n_simplices: list
    boundary_meets: bool

    @property
    def even_abs(self):
        return parity_sums(self.betti_abs)[0]

    @property
    def odd_abs(self):
        return parity_sums(self.betti_abs)[1]

    @property
    def even_rel(self):
        return parity_sums(self.betti_rel)[0]

    @property
    def odd_rel(self):
        return parity_sums(self.betti_rel)[1]

    def as_tuple(self):
        return (self.even_abs, self.odd_abs, self.even_rel, self.odd_rel)


def fixed_point_reference(c, a, X=None, fixed_vertices=None):
    """Exact even/odd Betti sums of N(X), absolute and relative to dN."""
    sub, _ = fixed_subcomplex(c, a, X, fixed_vertices)
    if not sub.simplices:
        return FixedPointReference([0], [0], [0], False)
    b_abs = reference_betti(sub, exact=True)
    b_rel = reference_betti(sub, relative=True, exact=True)
    meets = any(f.any() for f in sub.boundary_flag)
    return FixedPointReference(b_abs, b_rel, list(sub.counts), meets)


def classical_reference(c):
    """Even/odd Betti sums of M in the order of :data:`KEYS`."""
    ea, oa = parity_sums(reference_betti(c))
    er, orel = parity_sums(reference_betti(c, relative=True))
    return (ea, oa, er, orel)


# ---------------------------------------------------------------------------
# interior / boundary refinement on the fixed set


def _null(A, n):
    if A is None or A.shape[0] == 0:
        return np.eye(n)
    return sla.null_space(np.asarray(A.toarray(), dtype=float))


def classical_split(sub):
    """Per-parity (IH, BH_N, BH_D) dimensions of a small complex.

    IH^k is the image of H^k(N, dN) in H^k(N).  Computed with dense SVDs, so
    only meant for fixed-point sets, which are tiny.
    """
    if not sub.simplices:
        return {p: (0, 0, 0) for p in PARITIES}
    abs_b = reference_betti(sub, exact=True)
    rel_b = reference_betti(sub, relative=True, exact=True)
    cob = sub.coboundary
    out = {p: [0, 0, 0] for p in PARITIES}
    for k, simp in enumerate(sub.simplices):
        nk = len(simp)
        Dk = cob[k] if k < len(cob) else None
        keep = np.flatnonzero(~sub.boundary_flag[k])
        Zrel = np.zeros((nk, 0))
        if len(keep):
            sub_D = Dk[:, keep] if Dk is not None else None
            Zr = _null(sub_D, len(keep))
            Zrel = np.zeros((nk, Zr.shape[1]))
            Zrel[keep] = Zr
        if k > 0:
            B = np.asarray(cob[k - 1].toarray(), dtype=float)
        else:
            B = np.zeros((nk, 0))
        rank_b = np.linalg.matrix_rank(B) if B.size else 0
        both = np.hstack([Zrel, B])
        rank_sum = np.linalg.matrix_rank(both) if both.size else 0
        ih = int(rank_sum - rank_b)
        p = k % 2
        out[p][0] += ih
        out[p][1] += abs_b[k] - ih
        out[p][2] += rel_b[k] - ih
    return {p: tuple(v) for p, v in out.items()}


def x_split_dims(problem, s):
    """Per-parity (IH, BH_N, BH_D) on M at ``s`` from the cross-validated split."""
    b = problem.bundle(s)
    bb = decomp.boundary_bundle(b)
    out, evidence = {}, {}
    for p in PARITIES:
        hN = decomp.harmonic_fields(b, N, p).require()
        hD = decomp.harmonic_fields(b, D, p).require()
        sN = decomp.interior_boundary_split(hN, hD, bb, b)
        sD = decomp.interior_boundary_split(hD, hN, bb, b)
        if sN.dims[0] != sD.dims[0]:
            raise decomp.DecompositionError(
                f"interior dimensions differ in parity {p}: "
                f"{sN.dims[0]} (N) vs {sD.dims[0]} (D)")
        out[p] = (sN.dims[0], sN.dims[1], sD.dims[1])
        evidence[p] = {"N": sN.evidence, "D": sD.evidence,
                       "cross_gram_max": max(sN.cross_gram_max,
                                             sD.cross_gram_max)}
    return out, evidence


# ---------------------------------------------------------------------------
# verdicts


@dataclass
class IsomorphismVerdict:
    scenario: str
    s: float
    rows: dict
    split_rows: dict
    euler_rows: list
    verdicts: dict
    passed: bool
    notes: list = field(default_factory=list)

    def as_dict(self):
        return {"scenario": self.scenario, "s": self.s, "rows": self.rows,
                "split_rows": self.split_rows, "euler_rows": self.euler_rows,
                "verdicts": self.verdicts, "passed": self.passed,
                "notes": self.notes}


def verify_isomorphisms(problem, s, scenario_id="", **kernel_opts):
    """Pair X-harmonic dimensions at ``s != 0`` with the fixed-point Betti sums."""
    if s == 0.0:
        raise ValueError("the fixed-point comparison needs s != 0")
    xd = x_cohomology_dims(problem.bundle(s), **kernel_opts)
    ref = fixed_point_reference(problem.complex, problem.action, problem.field,
                                problem.fixed_vertices)
    expect = dict(zip(KEYS, ref.as_tuple()))
    rows = {k: [xd.dims[k], expect[k]] for k in KEYS}
    passed = xd.clean and all(a == b for a, b in rows.values())
    notes = []
    split_rows = {}
    if xd.clean:
        try:
            xs, _ = x_split_dims(problem, s)
            sub, _ = problem.fixed_set()
            cs = classical_split(sub)
            for p in PARITIES:
                name = ("even", "odd")[p]
                split_rows[name] = {"M": list(xs[p]), "N": list(cs[p])}
                passed &= tuple(xs[p]) == tuple(cs[p])
        except decomp.DecompositionError as exc:
            notes.append(f"split failed: {exc}")
            passed = False
    eu = euler_identities(problem)
    passed &= eu.passed
    return IsomorphismVerdict(scenario_id, float(s), rows, split_rows,
                              eu.rows, xd.verdicts, bool(passed), notes)


@dataclass
class EulerReport:
    rows: list

    @property
    def passed(self):
        return all(r[3] for r in self.rows)


def euler_identities(problem):
    """chi(M) = chi(N), chi(M, dM) = chi(N, dN), chi(dM) = chi(dN), by counting."""
    c = problem.complex
    sub, _ = problem.fixed_set()
    rows = []
    for mode, name in (("absolute", "chi(M)=chi(N)"),
                       ("relative", "chi(M,dM)=chi(N,dN)"),
                       ("boundary", "chi(dM)=chi(dN)")):
        lhs = euler_characteristic(c, mode)
        rhs = euler_characteristic(sub, mode) if sub.simplices else 0
        rows.append([name, int(lhs), int(rhs), bool(lhs == rhs)])
    return EulerReport(rows)


@dataclass
class SweepTable:
    rows: list
    expected_nonzero: tuple
    expected_zero: tuple

    @property
    def passed(self):
        ok = True
        for r in self.rows:
            if not r["clean"]:
                ok = False
            elif r["s"] == 0.0:
                ok &= tuple(r["dims"]) == self.expected_zero
            else:
                ok &= tuple(r["dims"]) == self.expected_nonzero
        return bool(ok)

    @property
    def constant_nonzero(self):
        vals = {tuple(r["dims"]) for r in self.rows if r["s"] != 0.0}
        return len(vals) == 1


def s_sweep_dims(problem, s_values, **kernel_opts):
    """Four dimensions per ``s``; the jump can only happen at ``s = 0``."""
    s_values = [float(s) for s in s_values]
    if 0.0 not in s_values or sum(s != 0.0 for s in s_values) < 3:
        raise ValueError("s_values must contain 0 and at least three nonzero values")
    if not all(np.isfinite(s_values)):
        raise ValueError("s_values must be finite")
    ref = fixed_point_reference(problem.complex, problem.action, problem.field,
                                problem.fixed_vertices)
    rows = []
    for s in s_values:
        xd = x_cohomology_dims(problem.bundle(s), **kernel_opts)
        rows.append({"s": s, "dims": list(xd.as_tuple()), "clean": xd.clean,
                     "verdicts": xd.verdicts})
    return SweepTable(rows, ref.as_tuple(), classical_reference(problem.complex))
