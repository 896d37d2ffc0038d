"""Cyclic isometry actions, invariant cochain bases and fixed-point sets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import orthogonal_procrustes

from .complex import MeshError, permutation_sign, select_subcomplex, subcomplex


class ActionError(MeshError):
    pass


@dataclass(frozen=True, eq=False)
class CyclicAction:
    """Generator ``perm`` of a Z_m action on vertices and its induced maps.

    ``R[k]`` is the signed permutation matrix with ``R[k][g(s), s] = sign``,
    where ``sign`` is the parity of the vertex permutation taking the image of
    the sorted simplex ``s`` back to sorted order.
    """

    order: int
    perm: np.ndarray
    R: list
    images: list
    signs: list


def induced_action(c, perm, order):
    perm = np.asarray(perm, dtype=np.int64)
    if perm.shape != (c.n_vertices,) or set(perm.tolist()) != set(range(len(perm))):
        raise ActionError("vertex_perm is not a permutation of the vertices")
    R, images, signs = [], [], []
    for k, S in enumerate(c.simplices):
        mapped = perm[S]
        order_idx = np.argsort(mapped, axis=1)
        sorted_img = np.take_along_axis(mapped, order_idx, axis=1)
        img = np.array([c._index[k].get(tuple(t), -1) for t in sorted_img.tolist()],
                       dtype=np.int64)
        if (img < 0).any():
            bad = S[np.flatnonzero(img < 0)[0]]
            raise ActionError("action does not map the complex to itself",
                              simplex=bad.tolist(), degree=k)
        sg = np.array([permutation_sign(o) for o in order_idx.tolist()],
                      dtype=np.int64)
        N = len(S)
        R.append(sp.csr_matrix((sg, (img, np.arange(N))), shape=(N, N),
                               dtype=np.int64))
        images.append(img)
        signs.append(sg)
    return CyclicAction(int(order), perm, R, images, signs)


@dataclass
class ActionDiagnostics:
    order: int
    isometry_defect: float
    chain_map_defect: int
    boundary_preserved: bool
    orientation_signs: np.ndarray
    field_invariance_defect: float


def _rigid_motion(coords, perm):
    """Best orthogonal map Q with coords[perm] ~ coords @ Q (about centroid)."""
    c0 = coords.mean(axis=0)
    A = coords - c0
    B = coords[perm] - c0
    Q, _ = orthogonal_procrustes(A, B)
    return Q


def validate_action(c, coordinates, action, X=None, tol=1e-12):
    """Verify every :class:`CyclicAction` invariant; raise on failure.

    Checks ``perm**order == id``, edge-length preservation, the chain-map
    identity ``R_{k+1} D_k = D_k R_k`` (integers), boundary preservation and
    orientation preservation.  If ``X`` is given, also the invariance of the
    field: ``X(perm v) = Q X(v)`` for the rigid motion Q realizing the action.
    """
    coords = np.asarray(coordinates, dtype=float)
    p = action.perm
    q = np.arange(len(p))
    for _ in range(action.order):
        q = p[q]
    if not np.array_equal(q, np.arange(len(p))):
        raise ActionError("perm**order is not the identity", order=action.order)

    e = c.simplices[1]
    len0 = np.linalg.norm(coords[e[:, 0]] - coords[e[:, 1]], axis=1)
    len1 = np.linalg.norm(coords[p[e[:, 0]]] - coords[p[e[:, 1]]], axis=1)
    iso = float(np.abs(len0 - len1).max() / max(len0.max(), 1e-300))
    if iso > tol:
        j = int(np.argmax(np.abs(len0 - len1)))
        raise ActionError("action is not an isometry", edge=e[j].tolist(),
                          defect=iso)

    cm = 0
    for k, D in enumerate(c.coboundary):
        diff = action.R[k + 1] @ D - D @ action.R[k]
        cm = max(cm, int(abs(diff).max()) if diff.nnz else 0)
    if cm:
        raise ActionError("induced maps do not commute with the coboundary")

    for k, flags in enumerate(c.boundary_flag):
        if not np.array_equal(flags[action.images[k]], flags):
            bad = np.flatnonzero(flags[action.images[k]] != flags)[0]
            raise ActionError("action does not preserve the boundary",
                              simplex=c.simplices[k][bad].tolist())

    n = c.dim
    o = c.orientation
    signs = o * action.signs[n] * o[action.images[n]]
    if (signs < 0).any():
        bad = int(np.flatnonzero(signs < 0)[0])
        raise ActionError("orientation-reversing action",
                          simplex=c.simplices[n][bad].tolist())

    inv = 0.0
    if X is not None:
        Q = _rigid_motion(coords, p)
        V = X.values
        inv = float(np.abs(V[p] - V @ Q).max())
        scale = max(float(np.abs(V).max()), 1e-300)
        if inv > 1e-10 * scale:
            raise ActionError("vector field is not invariant under the action",
                              defect=inv)
    return ActionDiagnostics(action.order, iso, cm, True, signs, inv)


@dataclass(frozen=True, eq=False)
class InvariantBasis:
    """Orbit-sum cochains: ``J[k]`` has one column per orientable orbit.

    ``reps[k]`` holds one representative simplex per column and
    ``lengths[k]`` the orbit sizes (diagonal of ``J^T J``).
    """

    J: list
    reps: list
    lengths: list

    def projector(self, k):
        """Dense orthogonal projector onto invariant k-cochains."""
        J = self.J[k].toarray().astype(float)
        return J @ np.diag(1.0 / self.lengths[k]) @ J.T

    def restrict(self, k, D, l=None):
        """Invariant restriction of an equivariant operator C^k -> C^l.

        Exact for operators commuting with the action: returns the matrix d
        with ``D J_k = J_l d``, read off at orbit representatives.
        """
        l = k if l is None else l
        DJ = sp.csr_matrix(D @ self.J[k])
        rows = DJ[self.reps[l]]
        sign = np.asarray(self.J[l][self.reps[l], np.arange(len(self.reps[l]))]).ravel()
        return sp.csr_matrix(sp.diags(sign) @ rows)


def invariant_basis(c, action):
    """Orbit sums of basis cochains, dropping orbits that cancel.

    An orbit cancels when the action returns a simplex to itself with
    reversed orientation; such simplices carry no invariant cochain.
    """
    Js, reps, lengths = [], [], []
    for k, S in enumerate(c.simplices):
        N = len(S)
        seen = np.zeros(N, dtype=bool)
        img, sg = action.images[k], action.signs[k]
        rows, cols, vals, rk, lk = [], [], [], [], []
        col = 0
        for s0 in range(N):
            if seen[s0]:
                continue
            coeff = {}
            s, sign = s0, 1
            cancelled = False
            while True:
                if s in coeff:
                    if coeff[s] != sign:
                        cancelled = True
                    break
                coeff[s] = sign
                seen[s] = True
                sign = sign * sg[s]
                s = img[s]
            if cancelled:
                continue
            for s, v in coeff.items():
                rows.append(s)
                cols.append(col)
                vals.append(v)
            rk.append(s0)
            lk.append(len(coeff))
            col += 1
        Js.append(sp.csr_matrix((vals, (rows, cols)), shape=(N, col),
                                dtype=np.int64))
        reps.append(np.array(rk, dtype=np.int64))
        lengths.append(np.array(lk, dtype=np.int64))
    return InvariantBasis(Js, reps, lengths)


def fixed_subcomplex(c, action, X=None, fixed_vertices=None, scale=1.0):
    """Subcomplex of simplices whose vertices are all fixed zeros of X.

    Generator metadata (``fixed_vertices``) is trusted when given; otherwise a
    vertex is fixed when the permutation fixes it and ``|X| <= 1e-12 * scale``.
    Returns ``(subcomplex, selector)``; the subcomplex flags N meet dM.
    """
    nv = c.n_vertices
    if fixed_vertices is not None:
        mask = np.zeros(nv, dtype=bool)
        mask[list(fixed_vertices)] = True
    else:
        mask = action.perm == np.arange(nv)
        if X is not None:
            mask &= np.linalg.norm(X.values, axis=1) <= 1e-12 * scale
    selector = select_subcomplex(c, mask)
    sub = subcomplex(c, selector, boundary_vertices=c.boundary_flag[0])
    return sub, selector
