"""Witten operators d_X = d + s*iota_X on invariant cochains.

The bundle stores, per degree, the invariant-reduced mass ``m_k``, the
integer coboundary ``d_k`` and the weak contraction ``b_k``.  Everything
downstream works on parity blocks: the even block concatenates degrees
0, 2, ... and the odd block degrees 1, 3, ...; ``A[p]`` maps parity ``p``
to parity ``1 - p``.  Reduced sizes are a few times the number of radial
rings, so these blocks are small dense matrices.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from dataclasses import field as dc_field

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from . import geometry as geo
from .symmetry import invariant_basis

EVEN, ODD = 0, 1
PARITIES = (EVEN, ODD)


class BoundaryCondition(enum.Enum):
    NEUMANN = "N"
    DIRICHLET = "D"

    @classmethod
    def parse(cls, tag):
        if isinstance(tag, cls):
            return tag
        t = str(tag).strip().upper()
        for bc in cls:
            if t in (bc.value, bc.name):
                return bc
        raise ValueError(f"unknown boundary condition {tag!r}")


N, D = BoundaryCondition.NEUMANN, BoundaryCondition.DIRICHLET


def parse_parity(p):
    if p in (EVEN, ODD):
        return int(p)
    names = {"even": EVEN, "odd": ODD, "+": EVEN, "-": ODD}
    try:
        return names[str(p).lower()]
    except KeyError:
        raise ValueError(f"unknown parity {p!r}") from None


@dataclass(eq=False)
class WittenBundle:
    """Invariant-reduced Witten operator data for one value of ``s``.

    ``boundary[k]`` flags the invariant k-cochain coordinates whose orbit
    lies in dM; Dirichlet spaces drop exactly those coordinates.
    """

    n: int
    s: float
    mass: list
    cob: list
    contraction: list
    boundary: list
    complex: object = None
    geometry: object = None
    action: object = None
    invariant: object = None
    field: object = None
    _cache: dict = dc_field(default_factory=dict, repr=False)

    # -- layout -----------------------------------------------------------

    def degrees(self, parity):
        return [k for k in range(self.n + 1) if k % 2 == parity]

    def free(self, k, bc=N):
        bc = BoundaryCondition.parse(bc)
        nk = len(self.boundary[k])
        if bc is N:
            return np.arange(nk)
        return np.flatnonzero(~self.boundary[k])

    def offsets(self, parity, bc=N):
        sizes = [len(self.free(k, bc)) for k in self.degrees(parity)]
        return np.concatenate([[0], np.cumsum(sizes)]).astype(int)

    def size(self, parity, bc=N):
        return int(self.offsets(parity, bc)[-1])

    def components(self, parity, x, bc=N):
        """Split a parity-block vector into ``{degree: coefficients}``."""
        off = self.offsets(parity, bc)
        return {k: x[off[i]:off[i + 1]]
                for i, k in enumerate(self.degrees(parity))}

    def embed(self, parity, x, bc):
        """Dirichlet-space vector -> full parity space (zeros on dM)."""
        bc = BoundaryCondition.parse(bc)
        if bc is N:
            return np.array(x, dtype=float)
        full = np.zeros((self.size(parity),) + np.shape(x)[1:])
        off_f = self.offsets(parity)
        off_d = self.offsets(parity, D)
        for i, k in enumerate(self.degrees(parity)):
            idx = off_f[i] + self.free(k, D)
            full[idx] = x[off_d[i]:off_d[i + 1]]
        return full

    def restrict(self, parity, x, bc):
        """Full parity vector -> coordinates of the bc-constrained space."""
        return np.asarray(x)[self.dof_index(parity, bc)]

    def dof_index(self, parity, bc):
        off = self.offsets(parity)
        return np.concatenate([off[i] + self.free(k, bc)
                               for i, k in enumerate(self.degrees(parity))]
                              ).astype(int)

    def boundary_mask(self, parity):
        return np.concatenate([self.boundary[k] for k in self.degrees(parity)])

    # -- operators ----------------------------------------------------------

    def contraction_op(self, k, bc=N):
        """Galerkin ``c_k = m_{k-1}^{-1} b_k`` on the bc-constrained spaces."""
        key = ("c", k, BoundaryCondition.parse(bc))
        if key not in self._cache:
            r, q = self.free(k - 1, bc), self.free(k, bc)
            m = self.mass[k - 1][np.ix_(r, r)]
            b = self.contraction[k][np.ix_(r, q)]
            if len(r) and len(q):
                cf = sla.cho_factor(m)
                self._cache[key] = sla.cho_solve(cf, b)
            else:
                self._cache[key] = np.zeros((len(r), len(q)))
        return self._cache[key]

    def A(self, parity, bc=N):
        """Matrix of d_X from parity ``parity`` to the opposite parity."""
        bc = BoundaryCondition.parse(bc)
        key = ("A", parity, bc)
        if key in self._cache:
            return self._cache[key]
        src, dst = self.degrees(parity), self.degrees(1 - parity)
        so, do = self.offsets(parity, bc), self.offsets(1 - parity, bc)
        out = np.zeros((do[-1], so[-1]))
        for i, k in enumerate(src):
            cols = slice(so[i], so[i + 1])
            if k + 1 <= self.n:
                j = dst.index(k + 1)
                r, q = self.free(k + 1, bc), self.free(k, bc)
                out[do[j]:do[j + 1], cols] = self.cob[k][np.ix_(r, q)]
            if k >= 1 and self.s != 0.0:
                j = dst.index(k - 1)
                out[do[j]:do[j + 1], cols] = self.s * self.contraction_op(k, bc)
        self._cache[key] = out
        return out

    def M(self, parity, bc=N):
        """Block-diagonal mass of the bc-constrained parity space."""
        bc = BoundaryCondition.parse(bc)
        key = ("M", parity, bc)
        if key not in self._cache:
            blocks = [self.mass[k][np.ix_(self.free(k, bc), self.free(k, bc))]
                      for k in self.degrees(parity)]
            self._cache[key] = sla.block_diag(*blocks)
        return self._cache[key]

    def mass_factor(self, parity, bc=N):
        bc = BoundaryCondition.parse(bc)
        key = ("chol", parity, bc)
        if key not in self._cache:
            M = self.M(parity, bc)
            self._cache[key] = sla.cho_factor(M) if M.size else None
        return self._cache[key]

    def mass_solve(self, parity, y, bc=N):
        cf = self.mass_factor(parity, bc)
        if cf is None:
            return np.zeros_like(y)
        return sla.cho_solve(cf, y)


def assemble_bundle(c, g, a, X, s, invariant=None):
    """Reduce mass, coboundary and weak contraction to invariant cochains.

    ``c`` is the oriented complex, ``g`` its :class:`EmbeddedGeometry`,
    ``a`` a validated :class:`CyclicAction` and ``X`` a
    :class:`PLVectorField`.  ``s`` scales the contraction.
    """
    inv = invariant if invariant is not None else invariant_basis(c, a)
    n = c.dim
    J = [inv.J[k].astype(float) for k in range(n + 1)]
    mass = []
    for k in range(n + 1):
        mk = (J[k].T @ geo.mass_matrix(g, c, k) @ J[k]).toarray()
        mass.append(0.5 * (mk + mk.T))
    cob = [inv.restrict(k, c.coboundary[k], k + 1).toarray().astype(float)
           for k in range(n)]
    contraction = [None]
    for k in range(1, n + 1):
        bk = J[k - 1].T @ geo.contraction_weak(g, c, X, k) @ J[k]
        contraction.append(np.asarray(bk.toarray()))
    boundary = [c.boundary_flag[k][inv.reps[k]] for k in range(n + 1)]
    bundle = WittenBundle(n, float(s), mass, cob, contraction, boundary,
                          complex=c, geometry=g, action=a, invariant=inv,
                          field=X)
    _check_bundle(bundle)
    return bundle


def _check_bundle(b):
    for k in range(b.n + 1):
        if b.mass[k].size:
            sla.cho_factor(b.mass[k])
    for k in range(b.n - 1):
        prod = b.cob[k + 1] @ b.cob[k]
        if prod.size and np.abs(prod).max() != 0.0:
            raise ArithmeticError("reduced coboundary does not square to zero")
    if b.s == 0.0:
        for p in PARITIES:
            K = b.A(1 - p) @ b.A(p)
            if K.size and np.abs(K).max() != 0.0:
                raise ArithmeticError("d_X does not square to zero at s = 0")


def with_scale(bundle, s):
    """Same geometry and field, new ``s`` (operators re-derived lazily)."""
    return WittenBundle(bundle.n, float(s), bundle.mass, bundle.cob,
                        bundle.contraction, bundle.boundary, bundle.complex,
                        bundle.geometry, bundle.action, bundle.invariant,
                        bundle.field)


# ---------------------------------------------------------------------------
# adjoint and quadratic forms


def adjoint(bundle, bc):
    """Mass adjoint of d_X on the bc-constrained spaces.

    Returns ``{parity: LinearOperator}`` where the operator for parity ``p``
    maps the opposite parity back to ``p``: ``delta = m_p^{-1} A_p^T m_{1-p}``.
    Mass solves use cached Cholesky factors.
    """
    bc = BoundaryCondition.parse(bc)
    ops = {}
    for p in PARITIES:
        q = 1 - p
        Ap = bundle.A(p, bc)
        Mq = bundle.M(q, bc)

        def matvec(y, p=p, Ap=Ap, Mq=Mq):
            return bundle.mass_solve(p, Ap.T @ (Mq @ y), bc)

        ops[p] = spla.LinearOperator((bundle.size(p, bc), bundle.size(q, bc)),
                                     matvec=matvec, matmat=matvec, dtype=float)
    return ops


def stiffness(bundle, bc, parity):
    """Quadratic form ``x^T S x = ||d_X x||^2 + ||delta x||^2`` and mass.

    The codifferential part is assembled in Schur form
    ``m A_q m_q^{-1} A_q^T m`` with a Cholesky solve, never an inverse.
    """
    bc = BoundaryCondition.parse(bc)
    p, q = parity, 1 - parity
    A, Mp = bundle.A(p, bc), bundle.M(p, bc)
    Aq, Mq = bundle.A(q, bc), bundle.M(q, bc)
    W = Aq.T @ Mp                                     # weak divergence
    S = A.T @ Mq @ A
    if W.size:
        S = S + W.T @ bundle.mass_solve(q, W, bc)
    S = 0.5 * (S + S.T)
    return S, Mp


def gram_defect(bundle, bc, parity, probes=20, seed=0):
    """Max relative gap between ``x^T S x`` and the two squared norms."""
    bc = BoundaryCondition.parse(bc)
    S, Mp = stiffness(bundle, bc, parity)
    A, Mq = bundle.A(parity, bc), bundle.M(1 - parity, bc)
    delta = adjoint(bundle, bc)[1 - parity]
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(probes):
        x = rng.standard_normal(S.shape[0])
        ax = A @ x
        dx = delta @ x
        direct = ax @ Mq @ ax + dx @ Mq @ dx
        form = x @ S @ x
        worst = max(worst, abs(form - direct) / max(abs(direct), 1e-300))
    return worst


# ---------------------------------------------------------------------------
# residual probes


@dataclass
class GreenReport:
    r1: float
    r2: float
    pairs: int
    tolerance: float = 1e-12

    @property
    def passed(self):
        return self.r1 <= self.tolerance and self.r2 <= self.tolerance


def green_residual(bundle, alpha, beta, parity):
    """Relative Green residuals for one pair.

    ``alpha`` lives in parity ``parity`` (full space), ``beta`` in the
    opposite parity.  ``r1`` uses ``alpha`` as given and ``r2`` its Dirichlet
    projection (boundary coordinates zeroed).
    """
    p, q = parity, 1 - parity
    A = bundle.A(p)
    Mp, Mq = bundle.M(p), bundle.M(q)
    delta = adjoint(bundle, N)[p]
    db = delta @ beta

    def rel(a):
        lhs = (A @ a) @ Mq @ beta
        rhs = a @ Mp @ db
        scale = (np.sqrt((A @ a) @ Mq @ (A @ a)) * np.sqrt(beta @ Mq @ beta)
                 + np.sqrt(a @ Mp @ a) * np.sqrt(db @ Mp @ db))
        return abs(lhs - rhs) / max(scale, 1e-300)

    a2 = np.where(bundle.boundary_mask(p), 0.0, alpha)
    return rel(alpha), rel(a2)


def green_probe(bundle, pairs=100, seed=0):
    """Worst r1, r2 over random pairs in both parities."""
    rng = np.random.default_rng(seed)
    r1 = r2 = 0.0
    for i in range(pairs):
        p = i % 2
        a = rng.standard_normal(bundle.size(p))
        b = rng.standard_normal(bundle.size(1 - p))
        x, y = green_residual(bundle, a, b, p)
        r1, r2 = max(r1, x), max(r2, y)
    return GreenReport(r1, r2, pairs)


def nilpotency_defect(bundle, parity, modes=6, bc=N):
    """Nilpotency defect of ``A_{1-p} A_p`` in the mass norms.

    Returns ``(eta_resolved, eta_full)``.  ``eta_full`` is the operator norm
    over all unit invariant cochains; it carries the O(1/h) grid-scale
    commutator of the weak contraction with d and so grows under
    refinement.  ``eta_resolved`` is the same norm restricted to the span
    of the ``modes`` lowest stiffness eigenvectors, the mesh-converging part
    of the space; this is the quantity that decays with h.
    """
    p = parity
    K = bundle.A(1 - p, bc) @ bundle.A(p, bc)
    Mp = bundle.M(p, bc)
    G = K.T @ Mp @ K
    G = 0.5 * (G + G.T)
    full = float(np.sqrt(max(sla.eigh(G, Mp, eigvals_only=True)[-1], 0.0)))
    S, _ = stiffness(bundle, bc, p)
    k = min(modes, S.shape[0])
    _, V = sla.eigh(S, Mp, subset_by_index=[0, k - 1])
    Gk = V.T @ G @ V
    resolved = float(np.sqrt(max(np.linalg.eigvalsh(0.5 * (Gk + Gk.T))[-1], 0.0)))
    return resolved, full


def scale_equivariance_defect(bundle_a, bundle_b):
    """Max relative difference of the A blocks of two bundles."""
    worst = 0.0
    for p in PARITIES:
        for bc in (N, D):
            A1, A2 = bundle_a.A(p, bc), bundle_b.A(p, bc)
            if A1.size:
                worst = max(worst, float(np.abs(A1 - A2).max()
                                         / max(np.abs(A1).max(), 1e-300)))
    return worst


# ---------------------------------------------------------------------------
# Stokes probe


def _rotation_one_form(points):
    """Ambient components of x dy - y dx (= r^2 dtheta)."""
    out = np.zeros_like(points)
    out[:, 0] = -points[:, 1]
    out[:, 1] = points[:, 0]
    return out


@dataclass
class StokesReport:
    interior: float
    boundary: float
    analytic: float

    @property
    def discrete_gap(self):
        return abs(self.interior - self.boundary)

    @property
    def gap(self):
        return abs(self.interior - self.analytic)


def stokes_probe(bundle, form=_rotation_one_form, analytic=2.0 * np.pi):
    """Integral of the top-degree part of d_X(omega_h) against the trace of omega_h.

    ``omega_h`` is the L2 (mass) projection of the invariant 1-form ``form``
    onto invariant Whitney 1-forms of a 2-dimensional bundle.  Both sides are
    exact integrals of the discrete form; ``gap`` compares against the
    continuum value ``analytic``.
    """
    if bundle.n != 2:
        raise ValueError("the Stokes probe is defined for surfaces")
    c, g, inv = bundle.complex, bundle.geometry, bundle.invariant
    J1 = inv.J[1].astype(float)
    load = J1.T @ geo.form_load(g, c, 1, form)
    w = sla.cho_solve(sla.cho_factor(bundle.mass[1]), load)
    full1 = J1 @ w
    # top-degree component of d_X w is d w (iota_X w has degree 0)
    top = c.coboundary[1] @ full1
    interior = float(c.orientation @ top)
    bsel = np.flatnonzero(c.boundary_flag[1])
    signed = (c.coboundary[1].T @ c.orientation)[bsel]
    boundary = float(signed @ full1[bsel])
    return StokesReport(interior, boundary, analytic)
