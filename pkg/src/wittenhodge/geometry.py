"""Whitney-form mass matrices and the weak interior product.

All element computations happen in an orthonormal frame of each top
simplex's affine hull, so surfaces embedded in R^3 use the induced flat
metric of every triangle.  Per-vertex vectors are projected into that frame
(tangent-plane projection) and interpolated linearly.

A k-form at a point is stored by its components on the orthonormal basis
``dx_I`` for sorted index sets ``I`` of size k; with that basis the pointwise
inner product of forms is the Euclidean dot product of component vectors.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.special import roots_jacobi

from .complex import MeshError

# ---------------------------------------------------------------------------
# quadrature


@lru_cache(maxsize=None)
def simplex_quadrature(n, degree=4):
    """Collapsed Gauss-Jacobi rule on the reference n-simplex.

    Returns ``(bary, weights)`` with barycentric nodes of shape
    ``(Q, n + 1)`` and positive weights summing to 1 (multiply by the simplex
    volume).  Exact for polynomials of total degree ``<= degree``.
    """
    q = degree // 2 + 1
    pts1d, wts1d = [], []
    for i in range(n):
        alpha = n - 1 - i
        x, w = roots_jacobi(q, alpha, 0)
        pts1d.append((1.0 + x) / 2.0)
        wts1d.append(w / 2.0 ** (alpha + 1))
    nodes, weights = [], []
    for idx in itertools.product(range(q), repeat=n):
        t = [pts1d[i][j] for i, j in enumerate(idx)]
        w = math.prod(wts1d[i][j] for i, j in enumerate(idx))
        y = []
        rest = 1.0
        for ti in t:
            y.append(ti * rest)
            rest *= 1.0 - ti
        nodes.append([rest] + y)
        weights.append(w)
    weights = np.array(weights)
    return np.array(nodes), weights / weights.sum()


# ---------------------------------------------------------------------------
# exterior algebra on R^n


@lru_cache(maxsize=None)
def form_basis(n, k):
    """Sorted k-subsets of range(n) indexing k-form components."""
    return tuple(itertools.combinations(range(n), k))


@lru_cache(maxsize=None)
def contraction_table(n, k):
    """Entries ``(J, I, i, sign)`` with ``(iota_v dx_I)_J += sign * v_i``."""
    out = []
    lower = {J: a for a, J in enumerate(form_basis(n, k - 1))}
    for b, I in enumerate(form_basis(n, k)):
        for pos, i in enumerate(I):
            J = I[:pos] + I[pos + 1:]
            out.append((lower[J], b, i, (-1) ** pos))
    return tuple(out)


def wedge_components(vectors):
    """Components of ``v_1 ^ ... ^ v_k`` for stacked 1-forms.

    ``vectors`` has shape ``(..., k, n)``; returns ``(..., C(n, k))``.
    """
    k, n = vectors.shape[-2:]
    if k == 0:
        return np.ones(vectors.shape[:-2] + (1,))
    cols = []
    for I in form_basis(n, k):
        cols.append(np.linalg.det(vectors[..., list(I)]))
    return np.stack(cols, axis=-1)


def contract(v, omega, n, k):
    """Interior product of vectors ``v (..., n)`` with k-forms ``omega (..., C(n,k))``."""
    out = np.zeros(omega.shape[:-1] + (math.comb(n, k - 1),))
    for J, I, i, sign in contraction_table(n, k):
        out[..., J] += sign * v[..., i] * omega[..., I]
    return out


# ---------------------------------------------------------------------------
# geometry


@dataclass(frozen=True, eq=False)
class EmbeddedGeometry:
    """Vertex coordinates plus per-simplex frames and quadrature.

    Attributes
    ----------
    coordinates : ndarray ``(V, d)``
    frames : ndarray ``(E, d, n)``
        Orthonormal basis of each top simplex's affine hull.
    grads : ndarray ``(E, n + 1, n)``
        Gradients of the barycentric coordinates in the local frame.
    volumes : ndarray ``(E,)``
    quad_bary, quad_weights : quadrature nodes (barycentric) and weights
        summing to 1, exact for degree <= 4.
    """

    coordinates: np.ndarray
    frames: np.ndarray
    grads: np.ndarray
    volumes: np.ndarray
    quad_bary: np.ndarray
    quad_weights: np.ndarray

    @property
    def n(self):
        return self.grads.shape[-1]

    def quadrature_points(self, top):
        """Physical quadrature points, shape ``(E, Q, d)``."""
        P = self.coordinates[top]
        return np.einsum("qa,ead->eqd", self.quad_bary, P)

    @property
    def mesh_scale(self):
        c = self.coordinates
        return float(np.ptp(c, axis=0).max()) if len(c) else 1.0


def embed(c, coordinates, degree=4):
    """Build :class:`EmbeddedGeometry`; rejects degenerate simplices."""
    X = np.asarray(coordinates, dtype=float)
    top = c.simplices[c.dim]
    n = c.dim
    if X.shape[1] < n:
        raise MeshError("embedding dimension smaller than simplex dimension")
    P = X[top]
    E = P[:, 1:] - P[:, :1]                      # (E, n, d)
    Q, R = np.linalg.qr(np.swapaxes(E, 1, 2))    # Q: (E, d, n)
    e = np.swapaxes(R, 1, 2)                     # edge vectors in frame (E, n, n)
    det = np.linalg.det(e)
    vol = np.abs(det) / math.factorial(n)
    scale = np.linalg.norm(E, axis=2).max(axis=1) ** n
    bad = np.flatnonzero(vol <= 1e-14 * scale)
    if len(bad):
        raise MeshError("degenerate simplex (zero volume)",
                        simplex=top[bad[0]].tolist())
    g = np.swapaxes(np.linalg.inv(e), 1, 2)      # rows: grad lambda_1..n
    g0 = -g.sum(axis=1, keepdims=True)
    grads = np.concatenate([g0, g], axis=1)
    bary, w = simplex_quadrature(n, degree)
    return EmbeddedGeometry(X, Q, grads, vol, bary, w)


def whitney_values(geom, k):
    """Whitney k-forms of every local k-face at every quadrature point.

    Returns ``(faces, values)``: ``faces`` is the tuple of local vertex
    subsets (sorted, so local order matches the global sorted order) and
    ``values`` has shape ``(E, Q, F, C(n, k))``.
    """
    n = geom.n
    faces = tuple(itertools.combinations(range(n + 1), k + 1))
    lam = geom.quad_bary                           # (Q, n+1)
    G = geom.grads                                 # (E, n+1, n)
    vals = np.zeros((len(G), len(lam), len(faces), math.comb(n, k)))
    for f, face in enumerate(faces):
        for i, a in enumerate(face):
            others = [b for b in face if b != a]
            dl = wedge_components(G[:, others, :])  # (E, C)
            vals[:, :, f, :] += ((-1) ** i * math.factorial(k)
                                 * lam[None, :, a, None] * dl[:, None, :])
    return faces, vals


def local_to_global(c, k, faces):
    """Global k-simplex index of each local face of each top simplex."""
    top = c.simplices[c.dim]
    out = np.empty((len(top), len(faces)), dtype=np.int64)
    for f, face in enumerate(faces):
        verts = top[:, list(face)]
        out[:, f] = [c._index[k][tuple(v)] for v in verts.tolist()]
    return out


def _assemble(local, rows, cols, shape):
    E, a, b = local.shape
    R = np.repeat(rows, b, axis=1).reshape(E, a, b)
    C = np.tile(cols, (1, a)).reshape(E, a, b)
    return sp.csr_matrix((local.ravel(), (R.ravel(), C.ravel())), shape=shape)


def mass_matrix(geom, c, k):
    """Galerkin mass matrix of Whitney k-forms (symmetric by construction)."""
    faces, W = whitney_values(geom, k)
    wq = geom.quad_weights[None, :] * geom.volumes[:, None]
    local = np.einsum("eq,eqfc,eqgc->efg", wq, W, W)
    local = 0.5 * (local + np.swapaxes(local, 1, 2))
    idx = local_to_global(c, k, faces)
    N = len(c.simplices[k])
    M = _assemble(local, idx, idx, (N, N))
    return sp.csr_matrix(0.5 * (M + M.T))


@dataclass(frozen=True)
class PLVectorField:
    """Piecewise-linear vector field: one ambient vector per vertex, times ``scale``."""

    vectors: np.ndarray
    scale: float = 1.0

    def scaled(self, s):
        return PLVectorField(self.vectors, self.scale * s)

    @property
    def values(self):
        return self.scale * np.asarray(self.vectors, dtype=float)


def field_at_quadrature(geom, c, X):
    """Field in the local frame at quadrature points, shape ``(E, Q, n)``."""
    top = c.simplices[c.dim]
    V = X.values[top]                                    # (E, n+1, d)
    Vl = np.einsum("ead,edn->ean", V, geom.frames)       # tangent projection
    return np.einsum("qa,ean->eqn", geom.quad_bary, Vl)


def contraction_weak(geom, c, X, k):
    """Weak interior product B_k with ``(B_k)[rho, sigma] = <iota_X W_sigma, W_rho>``.

    Shape ``(N_{k-1}, N_k)``.  The contraction operator itself is
    ``C_k = M_{k-1}^{-1} B_k``; see :func:`contraction_matrix`.
    """
    n = geom.n
    if not 1 <= k <= n:
        raise ValueError("contraction degree must satisfy 1 <= k <= n")
    fk, Wk = whitney_values(geom, k)
    fl, Wl = whitney_values(geom, k - 1)
    Xq = field_at_quadrature(geom, c, X)
    iW = contract(Xq[:, :, None, :], Wk, n, k)           # (E, Q, Fk, C(n,k-1))
    wq = geom.quad_weights[None, :] * geom.volumes[:, None]
    local = np.einsum("eq,eqgc,eqfc->egf", wq, Wl, iW)
    rows = local_to_global(c, k - 1, fl)
    cols = local_to_global(c, k, fk)
    return _assemble(local, rows, cols,
                     (len(c.simplices[k - 1]), len(c.simplices[k])))


def contraction_matrix(geom, c, X, k, mass=None):
    """Implicit C_k = M_{k-1}^{-1} B_k as a LinearOperator (factorized solve)."""
    from scipy.sparse.linalg import LinearOperator, factorized

    B = contraction_weak(geom, c, X, k)
    M = mass if mass is not None else mass_matrix(geom, c, k - 1)
    solve = factorized(sp.csc_matrix(M))
    return LinearOperator(B.shape, matvec=lambda x: solve(B @ x),
                          dtype=float), B


def directional_load(geom, c, X, grad_f):
    """Load vector ``<X . grad f, W_v>`` for 0-forms, with ``grad_f`` callable on points."""
    top = c.simplices[c.dim]
    pts = geom.quadrature_points(top)                    # (E, Q, d)
    G = grad_f(pts.reshape(-1, pts.shape[-1])).reshape(pts.shape)
    Gl = np.einsum("eqd,edn->eqn", G, geom.frames)
    Xq = field_at_quadrature(geom, c, X)
    integrand = (Xq * Gl).sum(axis=-1)
    wq = geom.quad_weights[None, :] * geom.volumes[:, None]
    local = np.einsum("eq,eq,qa->ea", wq, integrand, geom.quad_bary)
    out = np.zeros(len(c.simplices[0]))
    np.add.at(out, top, local)
    return out


def form_load(geom, c, k, form):
    """Load vector ``<omega, W_sigma>`` for a smooth k-form.

    ``form`` maps ambient points ``(P, d)`` to the ambient k-form components
    on the sorted basis of R^d, shape ``(P, C(d, k))``.
    """
    top = c.simplices[c.dim]
    pts = geom.quadrature_points(top)
    d = pts.shape[-1]
    vals = form(pts.reshape(-1, d)).reshape(pts.shape[:2] + (-1,))
    local_form = pullback_components(geom, vals, k)
    faces, W = whitney_values(geom, k)
    wq = geom.quad_weights[None, :] * geom.volumes[:, None]
    local = np.einsum("eq,eqc,eqfc->ef", wq, local_form, W)
    idx = local_to_global(c, k, faces)
    out = np.zeros(len(c.simplices[k]))
    np.add.at(out, idx, local)
    return out


def pullback_components(geom, ambient, k):
    """Restrict ambient k-form components to each simplex's local frame."""
    d = geom.frames.shape[1]
    n = geom.n
    if k == 0:
        return ambient
    basis_d = form_basis(d, k)
    out = np.zeros(ambient.shape[:2] + (math.comb(n, k),))
    for b, I in enumerate(form_basis(n, k)):
        for a, J in enumerate(basis_d):
            # <dx_J restricted, e_I> = det(F[J, I]) for the frame F.
            minor = np.linalg.det(geom.frames[:, list(J)][:, :, list(I)])
            out[..., b] += ambient[..., a] * minor[:, None]
    return out


def derham_map_1form(c, coordinates, form, points=8):
    """Integrate a smooth ambient 1-form over every edge (Gauss-Legendre)."""
    X = np.asarray(coordinates, dtype=float)
    e = c.simplices[1]
    a, b = X[e[:, 0]], X[e[:, 1]]
    t, w = np.polynomial.legendre.leggauss(points)
    t = (t + 1) / 2
    w = w / 2
    total = np.zeros(len(e))
    for ti, wi in zip(t, w):
        p = a + ti * (b - a)
        total += wi * (form(p) * (b - a)).sum(axis=1)
    return total


# ---------------------------------------------------------------------------
# field validation


@dataclass
class FieldDiagnostics:
    tangency_defect: float
    fixed_zero_defect: float
    zero_vertices: list
    invariance_defect: float | None = None


def boundary_conormals(c, coordinates):
    """Unit conormal (in the tangent space of M) at each boundary vertex.

    Returns ``(vertex_ids, normals)``.  The boundary tangent space at a
    vertex is spanned by its boundary neighbours; the manifold tangent space
    by all its neighbours.
    """
    X = np.asarray(coordinates, dtype=float)
    n = c.dim
    if not c.has_boundary:
        return np.zeros(0, dtype=int), np.zeros((0, X.shape[1]))
    bverts = np.flatnonzero(c.boundary_flag[0])
    edges = c.simplices[1]
    bedges = edges[c.boundary_flag[1]]
    nbr_all = {v: [] for v in bverts}
    nbr_b = {v: [] for v in bverts}
    for u, v in edges.tolist():
        if u in nbr_all:
            nbr_all[u].append(v)
        if v in nbr_all:
            nbr_all[v].append(u)
    for u, v in bedges.tolist():
        nbr_b[u].append(v)
        nbr_b[v].append(u)
    normals = np.zeros((len(bverts), X.shape[1]))
    for i, v in enumerate(bverts):
        tb = X[nbr_b[v]] - X[v]
        if n == 2:
            # Symmetric chord through the two boundary neighbours.
            tb = (X[nbr_b[v][1]] - X[nbr_b[v][0]])[None, :]
        Ub = np.linalg.svd(tb, full_matrices=False)[2][: n - 1]
        ta = X[nbr_all[v]] - X[v]
        Ua = np.linalg.svd(ta, full_matrices=False)[2][:n]
        # Component of the manifold tangent space orthogonal to the boundary.
        resid = Ua - (Ua @ Ub.T) @ Ub
        j = np.argmax(np.linalg.norm(resid, axis=1))
        normals[i] = resid[j] / np.linalg.norm(resid[j])
    return bverts, normals


def validate_field(c, coordinates, X, fixed_vertices=(), tau_tan=1e-12):
    """Check boundary tangency and exact zeros of a vertex field.

    Tangency is measured relative to the field's maximum magnitude.  Raises
    :class:`MeshError` when it exceeds ``tau_tan``.
    """
    V = X.values
    scale = max(float(np.linalg.norm(V, axis=1).max()), 1e-300)
    bverts, normals = boundary_conormals(c, coordinates)
    tan = 0.0
    if len(bverts):
        tan = float(np.abs((V[bverts] * normals).sum(axis=1)).max()) / scale
    fixed = np.asarray(sorted(fixed_vertices), dtype=int)
    fz = float(np.abs(V[fixed]).max()) if len(fixed) else 0.0
    zeros = np.flatnonzero(np.linalg.norm(V, axis=1) == 0.0).tolist()
    diag = FieldDiagnostics(tan, fz, zeros)
    if tan > tau_tan:
        raise MeshError("vector field is not tangent to the boundary",
                        tangency_defect=tan, tolerance=tau_tan)
    if fz != 0.0:
        raise MeshError("vector field is nonzero at a fixed vertex",
                        defect=fz)
    return diag
