"""Structured meshes with exact cyclic rotational symmetry.

Each generator returns a mesh document (a JSON-ready dict) with vertices,
oriented top simplices, the rotation action of the requested order, the
rotation generator field (by axis and center) and the exactly marked
fixed vertices.  Sector ``j`` of every ring sits at angle ``2*pi*j/sectors``
and rotation by one sector is a vertex permutation, so every divisor of
``sectors`` is an admissible action order.
"""

from __future__ import annotations

import numpy as np

MESH_SCHEMA = "wittenhodge.mesh/1"


class ParameterError(ValueError):
    pass


def _angles(sectors):
    j = np.arange(sectors)
    return 2.0 * np.pi * j / sectors


def _rotation_perm(ring_offsets, sectors, step, fixed=()):
    """Vertex permutation rotating every ring by ``step`` sectors."""
    n = max(ring_offsets) + sectors
    perm = np.arange(n)
    for off in ring_offsets:
        j = np.arange(sectors)
        perm[off + j] = off + (j + step) % sectors
    for v in fixed:
        perm[v] = v
    return perm


def _check_order(sectors, order):
    if order is None:
        return sectors
    if order < 1 or sectors % order:
        raise ParameterError(
            f"action order {order} must divide the sector count {sectors}")
    return order


def _document(kind, params, vertices, triangles, perm, order, fixed):
    vertices = np.asarray(vertices, dtype=float)
    dim = vertices.shape[1]
    return {
        "schema": MESH_SCHEMA,
        "dim": int(np.asarray(triangles).shape[1] - 1),
        "generator": {"kind": kind, **params},
        "vertices": vertices.tolist(),
        "simplices": np.asarray(triangles, dtype=int).tolist(),
        "action": {"order": int(order), "vertex_perm": perm.tolist()},
        "field": {"kind": "rotation", "center": [0.0] * dim,
                  "axis": [0.0, 0.0, 1.0], "scale": 1.0},
        "fixed_vertices": sorted(int(v) for v in fixed),
    }


def _band(tri, inner, outer, sectors):
    """Triangulate the quad strip between two rings of equal size."""
    for j in range(sectors):
        a, b = inner + j, inner + (j + 1) % sectors
        c, d = outer + j, outer + (j + 1) % sectors
        tri.append((a, d, b))
        tri.append((a, c, d))


def disk(rings=8, sectors=32, radius=1.0, order=None):
    """Disk of ``rings`` concentric rings with ``sectors`` vertices each.

    ``1 + rings*sectors`` vertices and ``sectors*(2*rings - 1)`` triangles,
    counter-clockwise oriented.
    """
    if rings < 2 or sectors < 3:
        raise ParameterError("disk needs rings >= 2 and sectors >= 3")
    order = _check_order(sectors, order)
    th = _angles(sectors)
    verts = [(0.0, 0.0)]
    for i in range(1, rings + 1):
        r = radius * i / rings
        verts.extend(zip(r * np.cos(th), r * np.sin(th)))
    tri = []
    for j in range(sectors):
        tri.append((0, 1 + j, 1 + (j + 1) % sectors))
    for i in range(1, rings):
        _band(tri, 1 + (i - 1) * sectors, 1 + i * sectors, sectors)
    offsets = [1 + i * sectors for i in range(rings)]
    perm = _rotation_perm(offsets, sectors, sectors // order, fixed=(0,))
    params = {"rings": rings, "sectors": sectors, "radius": radius}
    return _document("disk", params, verts, tri, perm, order, (0,))


def annulus(inner=0.5, outer=1.0, rings=4, sectors=32, order=None):
    """Annulus with ``rings`` radial bands: ``(rings+1)*sectors`` vertices."""
    if not 0 < inner < outer:
        raise ParameterError("annulus needs 0 < inner < outer")
    if rings < 1 or sectors < 3:
        raise ParameterError("annulus needs rings >= 1 and sectors >= 3")
    order = _check_order(sectors, order)
    th = _angles(sectors)
    verts = []
    for i in range(rings + 1):
        r = inner + (outer - inner) * i / rings
        verts.extend(zip(r * np.cos(th), r * np.sin(th)))
    tri = []
    for i in range(rings):
        _band(tri, i * sectors, (i + 1) * sectors, sectors)
    offsets = [i * sectors for i in range(rings + 1)]
    perm = _rotation_perm(offsets, sectors, sectors // order)
    params = {"inner": inner, "outer": outer, "rings": rings,
              "sectors": sectors}
    return _document("annulus", params, verts, tri, perm, order, ())


def sphere(bands=8, sectors=16, radius=1.0, order=None):
    """Latitude-longitude sphere: ``bands`` latitude bands, two pole vertices."""
    if bands < 3 or sectors < 3:
        raise ParameterError("sphere needs bands >= 3 and sectors >= 3")
    order = _check_order(sectors, order)
    th = _angles(sectors)
    verts = [(0.0, 0.0, radius)]
    for i in range(1, bands):
        phi = np.pi * i / bands
        z = radius * np.cos(phi)
        rho = radius * np.sin(phi)
        verts.extend(zip(rho * np.cos(th), rho * np.sin(th), np.full(sectors, z)))
    south = len(verts)
    verts.append((0.0, 0.0, -radius))
    tri = []
    for j in range(sectors):
        tri.append((0, 1 + j, 1 + (j + 1) % sectors))
    for i in range(1, bands - 1):
        _band(tri, 1 + (i - 1) * sectors, 1 + i * sectors, sectors)
    last = 1 + (bands - 2) * sectors
    for j in range(sectors):
        tri.append((south, last + (j + 1) % sectors, last + j))
    offsets = [1 + i * sectors for i in range(bands - 1)]
    perm = np.arange(len(verts))
    perm[:south] = _rotation_perm(offsets, sectors, sectors // order,
                                  fixed=(0,))[:south]
    perm[south] = south
    params = {"bands": bands, "sectors": sectors, "radius": radius}
    return _document("sphere", params, verts, tri, perm, order, (0, south))


def torus(major=2.0, minor=1.0, sectors=16, tube=12, order=None):
    """Torus of revolution about the z-axis on a ``sectors x tube`` grid."""
    if not 0 < minor < major:
        raise ParameterError("torus needs 0 < minor < major")
    if sectors < 3 or tube < 3:
        raise ParameterError("torus needs both grid counts >= 3")
    order = _check_order(sectors, order)
    th = _angles(sectors)
    verts = []
    # Ring i is the circle of tube angle psi_i swept around the axis.
    for i in range(tube):
        psi = 2.0 * np.pi * i / tube
        rho = major + minor * np.cos(psi)
        z = minor * np.sin(psi)
        verts.extend(zip(rho * np.cos(th), rho * np.sin(th),
                         np.full(sectors, z)))
    tri = []
    for i in range(tube):
        _band(tri, i * sectors, ((i + 1) % tube) * sectors, sectors)
    offsets = [i * sectors for i in range(tube)]
    perm = _rotation_perm(offsets, sectors, sectors // order)
    params = {"major": major, "minor": minor, "sectors": sectors, "tube": tube}
    return _document("torus", params, verts, tri, perm, order, ())


def field_vectors(doc):
    """Per-vertex field vectors of a mesh document (scale not applied).

    ``rotation`` fields are ``axis x (p - center)`` (in the plane for 2-D
    meshes) and are set to exactly zero at ``fixed_vertices``; ``explicit``
    fields list their vectors directly.
    """
    spec = doc["field"]
    kind = spec.get("kind")
    V = np.asarray(doc["vertices"], dtype=float)
    if kind == "explicit":
        vec = np.asarray(spec["vectors"], dtype=float)
        if vec.shape != V.shape:
            raise ParameterError("explicit field needs one vector per vertex")
        return vec
    if kind != "rotation":
        raise ParameterError(f"unknown field kind {kind!r}")
    center = np.asarray(spec.get("center", [0.0] * V.shape[1]), dtype=float)
    P = V - center
    if V.shape[1] == 2:
        vec = np.stack([-P[:, 1], P[:, 0]], axis=1)
    else:
        axis = np.asarray(spec.get("axis", [0.0, 0.0, 1.0]), dtype=float)
        vec = np.cross(axis, P)
    vec[list(doc.get("fixed_vertices", []))] = 0.0
    return vec


GENERATORS = {"disk": disk, "annulus": annulus, "sphere": sphere,
              "torus": torus}


def generate_mesh(kind, **params):
    """Dispatch to a named generator (``disk``, ``annulus``, ``sphere``, ``torus``)."""
    try:
        gen = GENERATORS[kind]
    except KeyError:
        raise ParameterError(f"unknown mesh kind {kind!r}") from None
    return gen(**params)


def refine_params(kind, params):
    """Next level of a refinement ladder: resolution parameters doubled."""
    p = dict(params)
    for key in ("rings", "sectors", "bands", "tube"):
        if key in p:
            p[key] = 2 * p[key]
    return p
