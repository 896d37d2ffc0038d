"""Harmonic fields, Morrey and five-term splittings, duality angles.

For s != 0 the discrete d_X is nearly injective on each parity block, so the
literal ranges of d_X (on Dirichlet cochains) and of its adjoint overlap and
together fill the space.  The exact and coexact spaces are therefore built
from the stiffness eigenmodes of the source parity, split by the share of
their energy carried by d_X: modes dominated by ``||d_X v||`` are coexact
type and generate E through d_X, modes dominated by ``||delta v||`` are
exact type and generate C through delta.  At s = 0 this reproduces the
classical ranges exactly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import spectral
from .spectral import NearKernel
from .complex import boundary_subcomplex
from .geometry import PLVectorField, embed
from .symmetry import induced_action
from .witten import (BoundaryCondition, D, N, adjoint, assemble_bundle,
                     stiffness)

TAU_FIELD = math.sqrt(spectral.TAU_ABS)
TAU_TRACE = 1e-6
TAU_SPLIT = 1e-6
ORTHO_TOL = 1e-10
ANGLE_MARGIN = 1e-3


class AmbiguousKernel(RuntimeError):
    def __init__(self, message, kernel=None):
        super().__init__(message)
        self.kernel = kernel


class DecompositionError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# harmonic fields


@dataclass
class HarmonicBasis:
    """Near-kernel of the (bc, parity) stiffness in full parity coordinates.

    Columns are m-orthonormal in the full parity mass.  Dirichlet columns
    are zero on every boundary coordinate.  ``residuals`` holds, per column,
    ``||d_X z||`` and ``||delta z||`` normalized by the square root of the
    eigenvalue normalizer.
    """

    parity: int
    bc: BoundaryCondition
    kernel: NearKernel
    basis: np.ndarray
    component_norms: np.ndarray
    residuals: np.ndarray
    tau_field: float = TAU_FIELD

    @property
    def dim(self):
        return self.kernel.dimension

    @property
    def clean(self):
        return self.kernel.clean

    def require(self):
        if not self.clean:
            raise AmbiguousKernel(
                f"ambiguous kernel for parity {self.parity}, bc {self.bc.value}",
                self.kernel)
        return self


def harmonic_fields(bundle, bc, parity, **kernel_opts):
    """Gap-detected X-harmonic fields for one boundary condition and parity."""
    bc = BoundaryCondition.parse(bc)
    key = ("harm", bc, parity, tuple(sorted(kernel_opts.items())))
    if key in bundle._cache:
        return bundle._cache[key]
    S, M = stiffness(bundle, bc, parity)
    nk = spectral.near_kernel(S, M, **kernel_opts)
    Z = nk.basis
    A = bundle.A(parity, bc)
    Mq = bundle.M(1 - parity, bc)
    delta = adjoint(bundle, bc)[1 - parity]
    scale = math.sqrt(nk.normalizer)
    res = np.zeros((2, Z.shape[1]))
    for i in range(Z.shape[1]):
        az = A @ Z[:, i]
        dz = delta @ Z[:, i]
        res[0, i] = math.sqrt(max(az @ Mq @ az, 0.0)) / scale
        res[1, i] = math.sqrt(max(dz @ Mq @ dz, 0.0)) / scale
    full = bundle.embed(parity, Z, bc)
    norms = _component_norms(bundle, parity, full)
    hb = HarmonicBasis(parity, bc, nk, full, norms, res)
    if nk.clean and Z.shape[1] and res.max() > hb.tau_field:
        raise DecompositionError(
            f"harmonic field residual {res.max():.3e} exceeds {hb.tau_field:.3e}")
    bundle._cache[key] = hb
    return hb


def _component_norms(bundle, parity, Z):
    out = np.zeros((len(bundle.degrees(parity)), Z.shape[1]))
    off = bundle.offsets(parity)
    for i, k in enumerate(bundle.degrees(parity)):
        blk = Z[off[i]:off[i + 1]]
        mk = bundle.mass[k]
        out[i] = np.sqrt(np.maximum(np.einsum("ij,ik,kj->j", blk, mk, blk), 0))
    return out


def degree_dimensions(bundle, hb, tol=1e-8):
    """Per-degree dimensions of a harmonic basis (meaningful at s = 0)."""
    off = bundle.offsets(hb.parity)
    dims = {}
    for i, k in enumerate(bundle.degrees(hb.parity)):
        blk = hb.basis[off[i]:off[i + 1]]
        if blk.size == 0 or blk.shape[1] == 0:
            dims[k] = 0
            continue
        sv = np.linalg.svd(blk, compute_uv=False)
        dims[k] = int((sv > tol * max(1.0, sv.max())).sum())
    return dims


# ---------------------------------------------------------------------------
# exact / coexact generators


def _chol(bundle, parity):
    key = ("cholL", parity)
    if key not in bundle._cache:
        bundle._cache[key] = sla.cholesky(bundle.M(parity), lower=True)
    return bundle._cache[key]


def _modes(bundle, q, bc):
    """Non-kernel stiffness modes of parity ``q`` split by d_X energy share."""
    bc = BoundaryCondition.parse(bc)
    key = ("modes", q, bc)
    if key in bundle._cache:
        return bundle._cache[key]
    S, M = stiffness(bundle, bc, q)
    if S.shape[0] == 0:
        out = (np.zeros((0, 0)), np.zeros((0, 0)))
        bundle._cache[key] = out
        return out
    lam, V = sla.eigh(S, M)
    hb = harmonic_fields(bundle, bc, q)
    r = hb.dim if hb.dim is not None else 0
    lam, V = lam[r:], V[:, r:]
    A = bundle.A(q, bc)
    Mo = bundle.M(1 - q, bc)
    AV = A @ V
    share = np.einsum("ij,ik,kj->j", AV, Mo, AV) / np.maximum(lam, 1e-300)
    out = (V[:, share >= 0.5], V[:, share < 0.5])
    bundle._cache[key] = out
    return out


def exact_generators(bundle, parity):
    """Columns spanning the discrete E (d_X of Dirichlet cochains) in ``parity``."""
    q = 1 - parity
    coexact_type, _ = _modes(bundle, q, D)
    full = bundle.embed(q, coexact_type, D)
    return bundle.A(q) @ full


def coexact_generators(bundle, parity):
    """Columns spanning the discrete C (delta of unconstrained cochains)."""
    q = 1 - parity
    _, exact_type = _modes(bundle, q, N)
    W = bundle.A(parity).T @ (bundle.M(q) @ exact_type)
    return bundle.mass_solve(parity, W)


def _orth(Y, rtol=1e-10):
    """Orthonormal basis (Euclidean) of span(Y) with rank truncation."""
    if Y.shape[1] == 0:
        return Y
    U, sv, _ = sla.svd(Y, full_matrices=False)
    keep = sv > rtol * max(sv.max(), 1e-300)
    return U[:, keep]


def _spaces(bundle, parity):
    """Cholesky-coordinate orthonormal bases of E and of C orthogonalized to E."""
    key = ("spaces", parity)
    if key in bundle._cache:
        return bundle._cache[key]
    L = _chol(bundle, parity)
    QE = _orth(L.T @ exact_generators(bundle, parity))
    YC = L.T @ coexact_generators(bundle, parity)
    YC = YC - QE @ (QE.T @ YC)
    QC = _orth(YC)
    QH = sla.null_space(np.hstack([QE, QC]).T) if QE.shape[1] + QC.shape[1] \
        else np.eye(L.shape[0])
    bundle._cache[key] = (QE, QC, QH)
    return QE, QC, QH


def harmonic_field_space(bundle, parity):
    """m-orthonormal basis of the discrete harmonic fields (no boundary condition)."""
    L = _chol(bundle, parity)
    _, _, QH = _spaces(bundle, parity)
    return sla.solve_triangular(L.T, QH, lower=False)


# ---------------------------------------------------------------------------
# decompositions


def _ip(bundle, parity, x, y):
    return float(x @ bundle.M(parity) @ y)


def _norm(bundle, parity, x):
    return math.sqrt(max(_ip(bundle, parity, x, x), 0.0))


@dataclass
class Decomposition:
    parity: int
    parts: dict
    reconstruction: float
    orthogonality: float
    diagnostics: dict = field(default_factory=dict)

    def __getitem__(self, name):
        return self.parts[name]


def _pairwise(bundle, parity, parts, scale):
    names = list(parts)
    worst = 0.0
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            v = abs(_ip(bundle, parity, parts[names[i]], parts[names[j]]))
            worst = max(worst, v / max(scale * scale, 1e-300))
    return worst


def morrey_decompose(bundle, omega, parity):
    """Split ``omega`` into exact, coexact and harmonic-field parts.

    Two least-squares projections in Cholesky coordinates: ``e`` onto E,
    then ``c`` onto the part of C orthogonal to E.  ``kappa`` is the rest.
    """
    omega = np.asarray(omega, dtype=float)
    L = _chol(bundle, parity)
    QE, QC, _ = _spaces(bundle, parity)
    y = L.T @ omega
    ye = QE @ (QE.T @ y)
    yc = QC @ (QC.T @ (y - ye))
    e = sla.solve_triangular(L.T, ye, lower=False)
    c = sla.solve_triangular(L.T, yc, lower=False)
    kappa = omega - e - c
    scale = max(_norm(bundle, parity, omega), 1e-300)
    parts = {"e": e, "c": c, "kappa": kappa}
    rec = _norm(bundle, parity, omega - e - c - kappa) / scale
    diag = _field_residuals(bundle, parity, kappa, scale)
    diag["c_membership"] = _membership(bundle, parity, c)
    return Decomposition(parity, parts, rec, _pairwise(bundle, parity, parts,
                                                       scale), diag)


def _field_residuals(bundle, parity, x, scale):
    A = bundle.A(parity)
    Mq = bundle.M(1 - parity)
    ax = A @ x
    dN = adjoint(bundle, N)[1 - parity] @ x
    # Codifferential tested only against cochains vanishing on dM.
    idx = bundle.dof_index(1 - parity, D)
    Aq = bundle.A(1 - parity)
    g = (Aq[:, idx]).T @ (bundle.M(parity) @ x)
    MqD = bundle.M(1 - parity, D)
    dD = sla.solve(MqD, g, assume_a="pos") if len(idx) else np.zeros(0)
    return {
        "d_X": math.sqrt(max(ax @ Mq @ ax, 0.0)) / scale,
        "delta_N": math.sqrt(max(dN @ Mq @ dN, 0.0)) / scale,
        "delta_D": math.sqrt(max(dD @ MqD @ dD, 0.0)) / scale if len(idx) else 0.0,
    }


def _membership(bundle, parity, c):
    """Relative distance of ``c`` from the unorthogonalized coexact span."""
    nrm = _norm(bundle, parity, c)
    if nrm == 0.0:
        return 0.0
    L = _chol(bundle, parity)
    Q = _orth(L.T @ coexact_generators(bundle, parity))
    y = L.T @ c
    return float(np.linalg.norm(y - Q @ (Q.T @ y)) / nrm)


def _project_into(bundle, parity, B):
    """Orthogonal projection of columns of B onto the discrete harmonic fields."""
    L = _chol(bundle, parity)
    _, _, QH = _spaces(bundle, parity)
    Y = L.T @ B
    return sla.solve_triangular(L.T, QH @ (QH.T @ Y), lower=False)


def principal_angles(U, V, m):
    """Principal angles between spans of m-orthonormal column sets."""
    if U.shape[1] == 0 or V.shape[1] == 0:
        return np.zeros(0)
    G = U.T @ m @ V
    sv = np.clip(np.linalg.svd(G, compute_uv=False), 0.0, 1.0)
    return np.sort(np.arccos(sv))


def five_term_decompose(bundle, omega, parity):
    """Refine the Morrey harmonic part through H_N + H_D and its complement.

    The harmonic bases are projected into the discrete harmonic-field space
    (a change of order the field residual) so that the split is exactly
    orthogonal to e and c.  On a closed manifold H_N and H_D coincide and
    the whole harmonic part is reported as ``h_N``.
    """
    mor = morrey_decompose(bundle, omega, parity)
    kappa = mor.parts["kappa"]
    hN = harmonic_fields(bundle, N, parity).require().basis
    hD = harmonic_fields(bundle, D, parity).require().basis
    M = bundle.M(parity)
    closed = not bundle.boundary_mask(parity).any() and not _has_boundary(bundle)
    PN = _project_into(bundle, parity, hN)
    PD = _project_into(bundle, parity, hD) if not closed else hD[:, :0]
    drift = 0.0
    for B, P in ((hN, PN), (hD, PD)):
        if P.shape[1]:
            drift = max(drift, float(np.sqrt(np.abs(np.diag(
                (B - P).T @ M @ (B - P)))).max()))
    angle = np.inf
    if PN.shape[1] and PD.shape[1]:
        ang = principal_angles(_m_orth(PN, M), _m_orth(PD, M), M)
        angle = float(ang.min())
        if angle < TAU_SPLIT:
            raise DecompositionError(
                f"H_N and H_D nearly intersect (angle {angle:.3e} rad)")
    W = np.hstack([PN, PD])
    if W.shape[1]:
        L = _chol(bundle, parity)
        coef, *_ = np.linalg.lstsq(L.T @ W, L.T @ kappa, rcond=None)
        h_N = PN @ coef[:PN.shape[1]]
        h_D = PD @ coef[PN.shape[1]:]
    else:
        h_N = np.zeros_like(kappa)
        h_D = np.zeros_like(kappa)
    h_exco = kappa - h_N - h_D
    parts = {"e": mor.parts["e"], "c": mor.parts["c"], "h_N": h_N,
             "h_D": h_D, "h_exco": h_exco}
    scale = max(_norm(bundle, parity, omega), 1e-300)
    rec = _norm(bundle, parity, omega - sum(parts.values())) / scale
    grouped = {"e": parts["e"], "c": parts["c"], "h": h_N + h_D,
               "h_exco": h_exco}
    diag = dict(mor.diagnostics)
    diag.update({"harmonic_projection_drift": drift,
                 "min_angle_HN_HD": angle})
    return Decomposition(parity, parts, rec,
                         _pairwise(bundle, parity, grouped, scale), diag)


def _has_boundary(bundle):
    return any(b.any() for b in bundle.boundary)


def _m_orth(B, M):
    return spectral.m_orthonormalize(B, M)


# ---------------------------------------------------------------------------
# Poisson problem


def solve_poisson(bundle, bc, eta, parity, tol=1e-10):
    """Solve ``S w = m eta`` with ``w`` orthogonal to the harmonic basis.

    ``eta`` is given in the bc-constrained coordinates of ``parity``.
    Raises :class:`DecompositionError` when ``eta`` has a harmonic component.
    """
    bc = BoundaryCondition.parse(bc)
    hb = harmonic_fields(bundle, bc, parity).require()
    S, M = stiffness(bundle, bc, parity)
    H = bundle.restrict(parity, hb.basis, bc)
    eta = np.asarray(eta, dtype=float)
    proj = H.T @ M @ eta
    nrm = math.sqrt(max(eta @ M @ eta, 0.0))
    if H.shape[1] and np.abs(proj).max() > tol * max(nrm, 1.0):
        raise DecompositionError(
            "right-hand side is not orthogonal to the harmonic fields "
            f"(projection norm {np.linalg.norm(proj):.3e})")
    r = H.shape[1]
    K = np.zeros((S.shape[0] + r, S.shape[0] + r))
    K[:S.shape[0], :S.shape[0]] = S
    K[:S.shape[0], S.shape[0]:] = M @ H
    K[S.shape[0]:, :S.shape[0]] = (M @ H).T
    rhs = np.concatenate([M @ eta, np.zeros(r)])
    sol = sla.solve(K, rhs, assume_a="sym")
    w = sol[:S.shape[0]]
    res = np.linalg.norm(S @ w - M @ eta) / max(np.linalg.norm(M @ eta), 1e-300)
    if nrm == 0.0:
        res = float(np.linalg.norm(S @ w))
    if res > 1e-9:
        raise DecompositionError(f"Poisson residual {res:.3e} exceeds 1e-9")
    return w


# ---------------------------------------------------------------------------
# interior / boundary split


@dataclass
class SplitBases:
    interior: np.ndarray
    boundary: np.ndarray
    method_agreement: bool
    cross_gram_max: float
    evidence: dict = field(default_factory=dict)

    @property
    def dims(self):
        return self.interior.shape[1], self.boundary.shape[1]


class SplitDisagreement(DecompositionError):
    def __init__(self, message, verdicts):
        super().__init__(message)
        self.verdicts = verdicts


def gram_split(basis, other, M, tau=TAU_SPLIT):
    """Method A: boundary part = subspace of ``basis`` orthogonal to ``other``."""
    k = basis.shape[1]
    if k == 0:
        return basis, basis, np.zeros(0)
    if other.shape[1] == 0:
        return basis[:, :0], basis, np.zeros(0)
    G = basis.T @ M @ other
    U, sv, _ = np.linalg.svd(G, full_matrices=True)
    sv_full = np.zeros(k)
    sv_full[:len(sv)] = sv
    big = sv_full > tau
    return basis @ U[:, big], basis @ U[:, ~big], sv_full


def boundary_bundle(bundle):
    """Witten bundle of dM with the restricted field and action, or ``None``."""
    if "boundary_bundle" in bundle._cache:
        return bundle._cache["boundary_bundle"]
    bcx, selector = boundary_subcomplex(bundle.complex)
    out = None
    if bcx is not None:
        verts = selector.selection[0]
        coords = bundle.geometry.coordinates[verts]
        X = PLVectorField(np.asarray(bundle.field.vectors)[verts],
                          bundle.field.scale)
        remap = -np.ones(bundle.complex.n_vertices, dtype=np.int64)
        remap[verts] = np.arange(len(verts))
        perm = remap[np.asarray(bundle.action.perm)[verts]]
        action = induced_action(bcx, perm, bundle.action.order)
        out = assemble_bundle(bcx, embed(bcx, coords), action, X, bundle.s)
        out._cache["selection"] = selector.selection
    bundle._cache["boundary_bundle"] = out
    return out


def boundary_pullback(bundle, bbundle, parity, Z):
    """Restrict invariant cochains of M to invariant cochains of dM."""
    inv = bundle.invariant
    sel = bbundle._cache["selection"]
    binv = bbundle.invariant
    out = []
    off = bundle.offsets(parity)
    for i, k in enumerate(bundle.degrees(parity)):
        if k > bbundle.n:
            continue
        full = inv.J[k].astype(float) @ Z[off[i]:off[i + 1]]
        restricted = full[sel[k]]
        Jb = binv.J[k].astype(float)
        out.append((Jb.T @ restricted) / binv.lengths[k][:, None])
    if not out:
        return np.zeros((0, Z.shape[1]))
    return np.vstack(out)


def boundary_extension(bundle, bbundle, parity, Y):
    """Extend invariant cochains of dM by zero to invariant cochains of M."""
    inv = bundle.invariant
    sel = bbundle._cache["selection"]
    binv = bbundle.invariant
    boff = bbundle.offsets(parity)
    blocks = []
    for i, k in enumerate(bundle.degrees(parity)):
        nk = inv.J[k].shape[1]
        if k > bbundle.n:
            blocks.append(np.zeros((nk, Y.shape[1])))
            continue
        j = bbundle.degrees(parity).index(k)
        full_b = binv.J[k].astype(float) @ Y[boff[j]:boff[j + 1]]
        full = np.zeros((len(bundle.complex.simplices[k]), Y.shape[1]))
        full[sel[k]] = full_b
        blocks.append((inv.J[k].astype(float).T @ full) / inv.lengths[k][:, None])
    return np.vstack(blocks)


def trace_split(bundle, bbundle, hb, tau=TAU_TRACE):
    """Method B: interior part = columns whose boundary class vanishes.

    Neumann bases: harmonic component of the pullback to dM.  Dirichlet
    bases: pairing of the normal trace (the boundary residual of the weak
    codifferential) with the boundary harmonic fields of the opposite
    parity.
    """
    Z = hb.basis
    p = hb.parity
    k = Z.shape[1]
    if k == 0:
        return Z, Z, np.zeros(0)
    if bbundle is None:
        return Z, Z[:, :0], np.zeros(k)
    if hb.bc is N:
        Hb = harmonic_fields(bbundle, N, p).require().basis
        Y = boundary_pullback(bundle, bbundle, p, Z)
        Mb = bbundle.M(p)
        scale = max(np.linalg.norm(sla.cholesky(Mb).dot(Y), 2), 1e-300) \
            if Y.size else 1.0
        T = Hb.T @ Mb @ Y / scale
    else:
        q = 1 - p
        Hb = harmonic_fields(bbundle, N, q).require().basis
        E = boundary_extension(bundle, bbundle, q, Hb)
        AE = bundle.A(q) @ E
        M = bundle.M(p)
        scale = max(np.linalg.norm(sla.cholesky(M).dot(AE), 2), 1e-300) \
            if AE.size else 1.0
        T = AE.T @ M @ Z / scale
    if T.shape[0] == 0:
        return Z, Z[:, :0], np.zeros(k)
    _, sv, Vt = np.linalg.svd(T, full_matrices=True)
    sv_full = np.zeros(k)
    sv_full[:len(sv)] = sv
    small = sv_full <= tau
    V = Vt.T
    return Z @ V[:, small], Z @ V[:, ~small], sv_full


def interior_boundary_split(basis, other, boundary_bundle, bundle,
                            tau_split=TAU_SPLIT, tau_trace=TAU_TRACE):
    """Cross-validated interior/boundary split of one harmonic basis."""
    M = bundle.M(basis.parity)
    intA, bndA, svA = gram_split(basis.basis, other.basis, M, tau_split)
    intB, bndB, svB = trace_split(bundle, boundary_bundle, basis, tau_trace)
    cross = float(np.abs(bndA.T @ M @ other.basis).max()) \
        if bndA.size and other.basis.size else 0.0
    same_dim = intA.shape[1] == intB.shape[1]
    span_angle = 0.0
    if same_dim and intA.shape[1]:
        span_angle = float(principal_angles(intA, intB, M).max())
    agree = same_dim and span_angle <= tau_split
    evidence = {"method_A_singular_values": svA.tolist(),
                "method_B_singular_values": svB.tolist(),
                "dims_A": [intA.shape[1], bndA.shape[1]],
                "dims_B": [intB.shape[1], bndB.shape[1]],
                "span_angle": span_angle}
    if not agree:
        raise SplitDisagreement("interior/boundary methods disagree", evidence)
    return SplitBases(intA, bndA, agree, cross, evidence)


# ---------------------------------------------------------------------------
# duality angles


@dataclass
class AngleReport:
    angles: list
    dims: tuple
    min_singular_gap: float
    acute: bool
    margins: list

    def as_dict(self):
        return {"angles": self.angles, "dims": list(self.dims),
                "acute": self.acute, "margins": self.margins,
                "min_singular_gap": self.min_singular_gap}


def duality_angles(iN, iD, m, margin=ANGLE_MARGIN):
    """Principal angles between interior Neumann and Dirichlet subspaces."""
    if iN.shape[1] != iD.shape[1]:
        raise DecompositionError(
            f"interior dimensions differ: {iN.shape[1]} vs {iD.shape[1]}")
    ang = principal_angles(iN, iD, m)
    margins = [[float(a), float(np.pi / 2 - a)] for a in ang]
    acute = bool(len(ang) and all(lo > margin and hi > margin
                                  for lo, hi in margins))
    sv = np.cos(ang)
    gap = float(np.min(np.abs(np.diff(sv)))) if len(sv) > 1 else float("inf")
    return AngleReport([float(a) for a in ang], (iN.shape[1], iD.shape[1]),
                       gap, acute, margins)


# ---------------------------------------------------------------------------
# angle sweeps

CSV_COLUMNS = ("s", "angle_index", "angle_radians", "margin_to_0",
               "margin_to_halfpi")


@dataclass
class SweepEntry:
    s: float
    status: str
    angles: list
    parities: list
    message: str = ""

    def as_dict(self):
        return {"s": self.s, "status": self.status, "angles": self.angles,
                "parities": self.parities, "message": self.message}


def interior_bases(bundle, parity):
    """Cross-validated interior Neumann and Dirichlet bases of one parity."""
    hN = harmonic_fields(bundle, N, parity).require()
    hD = harmonic_fields(bundle, D, parity).require()
    bb = boundary_bundle(bundle)
    sN = interior_boundary_split(hN, hD, bb, bundle)
    sD = interior_boundary_split(hD, hN, bb, bundle)
    return sN, sD


def angles_at(bundle, margin=ANGLE_MARGIN):
    """``{parity: AngleReport}`` for every parity with nonzero interiors."""
    out = {}
    for p in (0, 1):
        sN, sD = interior_bases(bundle, p)
        if sN.interior.shape[1] or sD.interior.shape[1]:
            out[p] = duality_angles(sN.interior, sD.interior, bundle.M(p),
                                    margin)
    return out


def angle_sweep(problem, s_values, margin=ANGLE_MARGIN):
    """Duality angles for each ``s`` on one fixed mesh.

    Failures at one ``s`` are recorded in its entry and the sweep goes on.
    An ``s`` without interior subspaces is flagged ``"empty"``.
    """
    if not problem.has_boundary:
        raise DecompositionError("duality angles need a manifold with boundary")
    entries = []
    for s in s_values:
        s = float(s)
        try:
            reps = angles_at(problem.bundle(s), margin)
        except (DecompositionError, AmbiguousKernel, ArithmeticError) as exc:
            entries.append(SweepEntry(s, "error", [], [], str(exc)))
            continue
        angles, parities = [], []
        for p, rep in sorted(reps.items()):
            angles.extend(rep.angles)
            parities.extend([p] * len(rep.angles))
        status = "ok" if angles else "empty"
        if angles and not all(margin < a < np.pi / 2 - margin for a in angles):
            status = "not_acute"
        entries.append(SweepEntry(s, status, angles, parities))
    return entries


def sweep_rows(entries):
    """CSV rows (see :data:`CSV_COLUMNS`) of an angle sweep."""
    rows = []
    for e in entries:
        for i, a in enumerate(e.angles):
            rows.append((e.s, i, a, a, np.pi / 2 - a))
    return rows


def write_sweep_csv(entries, stream):
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for s, i, a, m0, m1 in sweep_rows(entries):
        w.writerow([repr(float(s)), i, repr(float(a)), repr(float(m0)),
                    repr(float(m1))])
