"""Oriented simplicial complexes with boundary.

Every k-simplex is stored as a sorted vertex tuple; the sorted order is its
reference orientation.  Top-dimensional simplices additionally carry an
``orientation`` sign recording whether the manifold orientation agrees with
the sorted order.  Coboundary matrices are integer and built from sorted
orientations only, so they are reproducible from the vertex lists alone.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


class MeshError(ValueError):
    """Raised when a mesh violates a manifold or orientation invariant.

    ``detail`` carries a machine-readable description naming the failing
    simplex.
    """

    def __init__(self, message, **detail):
        super().__init__(message)
        self.detail = {"message": message, **detail}


def permutation_sign(seq):
    """Sign of the permutation sorting ``seq`` (distinct entries)."""
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@dataclass(frozen=True, eq=False)
class OrientedComplex:
    """Combinatorial n-manifold with (possibly empty) boundary.

    Attributes
    ----------
    dim : int
        Top simplicial dimension n.
    simplices : list of ndarray
        ``simplices[k]`` is an ``(N_k, k + 1)`` int array of sorted vertex
        tuples in lexicographic order.
    orientation : ndarray
        Sign (+1/-1) of each top simplex relative to its sorted order.
    coboundary : list of csr_matrix
        ``coboundary[k]`` is the integer matrix D_k: C^k -> C^{k+1}.
    boundary_flag : list of ndarray
        Per-degree boolean masks of simplices lying in the boundary.
    """

    dim: int
    simplices: list
    orientation: np.ndarray
    coboundary: list
    boundary_flag: list
    _index: list = field(default_factory=list, repr=False)

    @property
    def counts(self):
        return [len(s) for s in self.simplices]

    @property
    def n_vertices(self):
        return len(self.simplices[0])

    def index(self, k, vertices):
        """Index of the k-simplex with the given vertex set, or -1."""
        return self._index[k].get(tuple(sorted(int(v) for v in vertices)), -1)

    @property
    def has_boundary(self):
        return bool(self.dim > 0 and self.boundary_flag[self.dim - 1].any())

    def interior(self, k):
        """Indices of k-simplices not on the boundary."""
        return np.flatnonzero(~self.boundary_flag[k])


def _faces(simplex_array, k):
    """All k-faces (sorted tuples) of a stack of sorted simplices."""
    n1 = simplex_array.shape[1]
    out = []
    for comb in itertools.combinations(range(n1), k + 1):
        out.append(simplex_array[:, comb])
    return np.unique(np.concatenate(out, axis=0), axis=0)


def _coboundary(lower, upper, lower_index):
    """Integer coboundary D: C^k -> C^{k+1} for sorted simplices."""
    rows, cols, vals = [], [], []
    k1 = upper.shape[1]
    for i in range(k1):
        face = np.delete(upper, i, axis=1)
        idx = np.fromiter((lower_index[tuple(f)] for f in face.tolist()),
                          dtype=np.int64, count=len(face))
        rows.append(np.arange(len(upper)))
        cols.append(idx)
        vals.append(np.full(len(upper), (-1) ** i, dtype=np.int64))
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(upper), len(lower)), dtype=np.int64)


def build_complex(top, n_vertices=None):
    """Build and validate an :class:`OrientedComplex` from oriented top simplices.

    ``top`` is an integer array of shape ``(N, n + 1)`` whose row order
    defines the orientation of each top simplex.  Raises :class:`MeshError`
    on non-manifold incidence, inconsistent orientation, a non-closed
    boundary or dangling vertices.
    """
    top = np.asarray(top, dtype=np.int64)
    if top.ndim != 2 or top.shape[0] == 0:
        raise MeshError("mesh has no top-dimensional simplices")
    n = top.shape[1] - 1
    if n < 1:
        raise MeshError("top simplices must have dimension >= 1")
    if n_vertices is None:
        n_vertices = int(top.max()) + 1
    if top.min() < 0 or top.max() >= n_vertices:
        raise MeshError("simplex references a vertex out of range")
    for row in top:
        if len(set(row.tolist())) != n + 1:
            raise MeshError("degenerate simplex with repeated vertex",
                            simplex=row.tolist())

    order = np.argsort(top, axis=1)
    sorted_top = np.take_along_axis(top, order, axis=1)
    orientation = np.array([permutation_sign(r) for r in order.tolist()],
                           dtype=np.int64)
    uniq, inverse = np.unique(sorted_top, axis=0, return_inverse=True)
    if len(uniq) != len(sorted_top):
        dup = sorted_top[np.bincount(inverse.ravel()).argmax()]
        raise MeshError("duplicate top simplex", simplex=dup.tolist())
    lex = np.lexsort(sorted_top.T[::-1])
    sorted_top = sorted_top[lex]
    orientation = orientation[lex]

    simplices = [None] * (n + 1)
    simplices[n] = sorted_top
    for k in range(n - 1, -1, -1):
        simplices[k] = _faces(simplices[k + 1], k)

    used = np.zeros(n_vertices, dtype=bool)
    used[simplices[0][:, 0]] = True
    if not used.all():
        v = int(np.flatnonzero(~used)[0])
        raise MeshError("dangling vertex not contained in any top simplex",
                        vertex=v)
    index = [{tuple(s): i for i, s in enumerate(arr.tolist())}
             for arr in simplices]
    cob = [_coboundary(simplices[k], simplices[k + 1], index[k])
           for k in range(n)]

    # Manifold incidence: each (n-1)-face has one or two cofaces.
    incidence = abs(cob[n - 1])
    cofaces = np.asarray(incidence.sum(axis=0)).ravel()
    bad = np.flatnonzero(cofaces > 2)
    if len(bad):
        raise MeshError("non-manifold face incidence",
                        simplex=simplices[n - 1][bad[0]].tolist(),
                        cofaces=int(cofaces[bad[0]]))

    # Orientation: induced orientations cancel on interior faces.
    signed = sp.diags(orientation) @ cob[n - 1]
    flux = np.asarray(signed.sum(axis=0)).ravel()
    inconsistent = np.flatnonzero((cofaces == 2) & (flux != 0))
    if len(inconsistent):
        raise MeshError("inconsistent orientation across shared face",
                        simplex=simplices[n - 1][inconsistent[0]].tolist())

    flags = [None] * (n + 1)
    flags[n] = np.zeros(len(simplices[n]), dtype=bool)
    flags[n - 1] = cofaces == 1
    for k in range(n - 2, -1, -1):
        hits = abs(cob[k]).T @ flags[k + 1].astype(np.int64)
        flags[k] = np.asarray(hits).ravel() > 0

    if n >= 2 and flags[n - 1].any():
        # The boundary must itself be a closed (n-1)-manifold.
        sub = abs(cob[n - 2])[flags[n - 1]][:, flags[n - 2]]
        cnt = np.asarray(sub.sum(axis=0)).ravel()
        bad = np.flatnonzero(cnt != 2)
        if len(bad):
            ridge = simplices[n - 2][np.flatnonzero(flags[n - 2])[bad[0]]]
            raise MeshError("boundary is not a closed manifold",
                            simplex=ridge.tolist(), cofaces=int(cnt[bad[0]]))

    return OrientedComplex(dim=n, simplices=simplices, orientation=orientation,
                           coboundary=cob, boundary_flag=flags, _index=index)


@dataclass(frozen=True)
class SubcomplexSelector:
    """Per-degree 0/1 inclusion matrices of a face-closed subcomplex.

    ``selection[k]`` lists the selected k-simplex indices of the parent;
    ``P(k)`` returns the sparse ``(N_k, len(selection[k]))`` inclusion.
    """

    parent_counts: tuple
    selection: tuple

    def P(self, k):
        sel = self.selection[k]
        return sp.csr_matrix((np.ones(len(sel)), (sel, np.arange(len(sel)))),
                             shape=(self.parent_counts[k], len(sel)))

    @property
    def empty(self):
        return all(len(s) == 0 for s in self.selection)


def select_subcomplex(c, vertex_mask):
    """Selector of all simplices whose vertices are all in ``vertex_mask``."""
    vertex_mask = np.asarray(vertex_mask, dtype=bool)
    sel = tuple(np.flatnonzero(vertex_mask[s].all(axis=1))
                for s in c.simplices)
    return SubcomplexSelector(tuple(c.counts), sel)


@dataclass(frozen=True, eq=False)
class Subcomplex:
    """A face-closed subcomplex given by explicit simplices (no manifold checks).

    Used for fixed-point sets and for boundary complexes, where the relative
    structure is carried by ``boundary_flag``.
    """

    simplices: list
    coboundary: list
    boundary_flag: list

    @property
    def dim(self):
        return len(self.simplices) - 1

    @property
    def counts(self):
        return [len(s) for s in self.simplices]


def subcomplex(c, selector, boundary_vertices=None):
    """Materialize the subcomplex selected by ``selector``.

    Empty trailing degrees are dropped; ``boundary_vertices`` (a vertex mask)
    flags the simplices of the subcomplex lying in it.
    """
    top = -1
    for k, s in enumerate(selector.selection):
        if len(s):
            top = k
    simplices = [c.simplices[k][selector.selection[k]] for k in range(top + 1)]
    cob = []
    for k in range(top):
        D = c.coboundary[k][selector.selection[k + 1]][:, selector.selection[k]]
        cob.append(sp.csr_matrix(D))
    if boundary_vertices is None:
        flags = [np.zeros(len(s), dtype=bool) for s in simplices]
    else:
        bv = np.asarray(boundary_vertices, dtype=bool)
        flags = [bv[s].all(axis=1) for s in simplices]
    return Subcomplex(simplices, cob, flags)


def boundary_subcomplex(c):
    """Boundary of ``c`` as a closed oriented (n-1)-complex plus its selector.

    The returned complex carries the induced (outward-first) orientation on
    its top simplices.  For a closed manifold the boundary is empty and
    ``None`` is returned in place of the complex.
    """
    n = c.dim
    sel = tuple(np.flatnonzero(f) for f in c.boundary_flag)
    selector = SubcomplexSelector(tuple(c.counts), sel)
    if not len(sel[n - 1]):
        return None, selector
    # Induced orientation of each boundary face from its unique coface.
    signed = (sp.diags(c.orientation) @ c.coboundary[n - 1]).tocsc()
    faces = c.simplices[n - 1][sel[n - 1]]
    induced = np.asarray(signed[:, sel[n - 1]].sum(axis=0)).ravel()
    oriented = faces.copy()
    if n - 1 >= 1:
        flip = induced < 0
        oriented[flip, 0], oriented[flip, 1] = faces[flip, 1], faces[flip, 0]
    if n == 1:
        # Boundary of a 1-manifold is a set of points; nothing to orient.
        return None, selector
    used = np.unique(oriented)
    remap = -np.ones(c.n_vertices, dtype=np.int64)
    remap[used] = np.arange(len(used))
    bc = build_complex(remap[oriented], n_vertices=len(used))
    return bc, selector


# ---------------------------------------------------------------------------
# exact ranks

EXACT_RANK_LIMIT = 100_000


def exact_rank(matrix):
    """Rank over Q of an integer sparse matrix by fraction-free elimination.

    Rows are kept as sparse dictionaries; each elimination step replaces
    ``r_j <- p * r_j - a * r_i`` (invertible over Q) and divides out the row
    gcd, so all arithmetic stays in Python integers.
    """
    A = sp.csr_matrix(matrix)
    if A.shape[0] == 0 or A.shape[1] == 0:
        return 0
    rows = []
    for i in range(A.shape[0]):
        lo, hi = A.indptr[i], A.indptr[i + 1]
        r = {int(j): int(v) for j, v in zip(A.indices[lo:hi], A.data[lo:hi])
             if v != 0}
        if r:
            rows.append(r)
    col_rows = {}
    for ri, r in enumerate(rows):
        for j in r:
            col_rows.setdefault(j, set()).add(ri)
    alive = set(range(len(rows)))
    # Lazy heap of (row length, row); stale entries are skipped on pop.
    heap = [(len(r), i) for i, r in enumerate(rows)]
    heapq.heapify(heap)
    rank = 0
    while heap:
        # Markowitz-style pivot: shortest row, then shortest column.
        ln, ri = heapq.heappop(heap)
        if ri not in alive or ln != len(rows[ri]):
            continue
        r = rows[ri]
        alive.discard(ri)
        if not r:
            continue
        pc = min(r, key=lambda j: (len(col_rows[j]), abs(r[j]), j))
        p = r[pc]
        rank += 1
        for j in r:
            col_rows[j].discard(ri)
        for rj in list(col_rows[pc]):
            row = rows[rj]
            a = row[pc]
            g = math.gcd(p, a)
            pp, aa = p // g, a // g
            for j in row:
                col_rows[j].discard(rj)
            new = {j: pp * v for j, v in row.items()}
            for j, v in r.items():
                w = new.get(j, 0) - aa * v
                if w:
                    new[j] = w
                else:
                    new.pop(j, None)
            if new:
                gg = 0
                for v in new.values():
                    gg = math.gcd(gg, v)
                    if gg == 1:
                        break
                if gg > 1:
                    new = {j: v // gg for j, v in new.items()}
                for j in new:
                    col_rows.setdefault(j, set()).add(rj)
                heapq.heappush(heap, (len(new), rj))
            else:
                alive.discard(rj)
            rows[rj] = new
        rows[ri] = {}
    return rank


def float_rank(matrix, rtol=1e-10):
    """Floating-point rank via thresholded singular values (fallback)."""
    A = sp.csr_matrix(matrix).toarray().astype(float)
    if A.size == 0:
        return 0
    sv = np.linalg.svd(A, compute_uv=False)
    return int((sv > rtol * max(sv.max(), 1.0)).sum())


def _rank(matrix, exact):
    return exact_rank(matrix) if exact else float_rank(matrix)


def cochain_complex(c, relative=False):
    """Coboundary matrices, optionally with boundary rows/columns deleted."""
    mats = list(c.coboundary)
    if not relative:
        return mats, list(c.counts)
    keep = [np.flatnonzero(~f) for f in c.boundary_flag]
    out = [sp.csr_matrix(D[keep[k + 1]][:, keep[k]]) for k, D in enumerate(mats)]
    return out, [len(kk) for kk in keep]


def reference_betti(c, relative=False, exact=None):
    """Betti numbers b_0..b_n over Q (absolute, or relative to the boundary).

    Works for any complex-like object with ``simplices``, ``coboundary`` and
    ``boundary_flag``.  Exact ranks are used up to
    :data:`EXACT_RANK_LIMIT` simplices, thresholded SVD ranks above.
    """
    counts = [len(s) for s in c.simplices]
    if exact is None:
        exact = sum(counts) <= EXACT_RANK_LIMIT
    mats, dims = cochain_complex(c, relative=relative)
    ranks = [_rank(D, exact) if D.shape[0] and D.shape[1] else 0
             for D in mats]
    betti = []
    for k, dk in enumerate(dims):
        r_out = ranks[k] if k < len(ranks) else 0
        r_in = ranks[k - 1] if k > 0 else 0
        betti.append(dk - r_out - r_in)
    return betti


def euler_characteristic(c, mode="absolute"):
    """Alternating simplex count: ``absolute``, ``relative`` or ``boundary``."""
    if mode == "absolute":
        counts = [len(s) for s in c.simplices]
    elif mode == "relative":
        counts = [int((~f).sum()) for f in c.boundary_flag]
    elif mode == "boundary":
        counts = [int(f.sum()) for f in c.boundary_flag]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return sum((-1) ** k * n for k, n in enumerate(counts))
