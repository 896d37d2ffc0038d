"""A validated mesh with its action and field, ready for bundle assembly."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .complex import MeshError, build_complex
from .errors import ValidationError
from .meshes import MESH_SCHEMA, ParameterError, field_vectors
from .schemas import validate as validate_schema
from .symmetry import (fixed_subcomplex, induced_action, invariant_basis,
                       validate_action)
from .witten import assemble_bundle, with_scale


__all__ = ["Problem", "ValidationError", "load_problem"]

REQUIRED_KEYS = ("schema", "dim", "vertices", "simplices", "action", "field")


@dataclass(eq=False)
class Problem:
    doc: dict
    complex: object
    geometry: object
    action: object
    field: geo.PLVectorField
    fixed_vertices: tuple
    invariant: object
    diagnostics: dict
    _bundles: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self):
        return self.complex.dim

    @property
    def has_boundary(self):
        return self.complex.has_boundary

    def bundle(self, s):
        """Witten bundle at ``s``; assembly happens once, later ``s`` rescale."""
        s = float(s)
        if s not in self._bundles:
            if self._bundles:
                base = next(iter(self._bundles.values()))
                self._bundles[s] = with_scale(base, s)
            else:
                self._bundles[s] = assemble_bundle(
                    self.complex, self.geometry, self.action, self.field, s,
                    invariant=self.invariant)
        return self._bundles[s]

    def fixed_set(self):
        return fixed_subcomplex(self.complex, self.action, self.field,
                                self.fixed_vertices)


def load_problem(doc):
    """Validate a mesh document and build every derived structure.

    Raises :class:`ValidationError` for malformed documents and for meshes
    failing the manifold, action or field checks.
    """
    if not isinstance(doc, dict):
        raise ValidationError("mesh document must be a JSON object")
    missing = [k for k in REQUIRED_KEYS if k not in doc]
    if missing:
        raise ValidationError("mesh document is missing keys", missing=missing)
    if doc["schema"] != MESH_SCHEMA:
        raise ValidationError("unsupported mesh schema", schema=doc["schema"],
                              expected=MESH_SCHEMA)
    validate_schema(doc, "mesh")
    try:
        vertices = np.asarray(doc["vertices"], dtype=float)
        top = np.asarray(doc["simplices"], dtype=np.int64)
        if top.ndim != 2 or top.shape[1] != int(doc["dim"]) + 1:
            raise ValidationError("simplices do not match the declared dim")
        if vertices.ndim != 2 or not np.isfinite(vertices).all():
            raise ValidationError("vertices must be a finite 2-D array")
        c = build_complex(top, n_vertices=len(vertices))
        g = geo.embed(c, vertices)
        act = doc["action"]
        a = induced_action(c, act["vertex_perm"], int(act["order"]))
        vec = field_vectors(doc)
        X = geo.PLVectorField(vec, float(doc["field"].get("scale", 1.0)))
        fixed = tuple(int(v) for v in doc.get("fixed_vertices", []))
        adiag = validate_action(c, vertices, a, X)
        fdiag = geo.validate_field(c, vertices, X, fixed)
    except (MeshError, ParameterError, KeyError, TypeError) as exc:
        detail = {k: v for k, v in getattr(exc, "detail", {}).items()
                  if k != "message"}
        raise ValidationError(str(exc), **detail) from exc
    diagnostics = {
        "action": {"order": adiag.order,
                   "isometry_defect": adiag.isometry_defect,
                   "chain_map_defect": adiag.chain_map_defect,
                   "field_invariance_defect": adiag.field_invariance_defect},
        "field": {"tangency_defect": fdiag.tangency_defect,
                  "fixed_zero_defect": fdiag.fixed_zero_defect},
        "counts": [int(x) for x in c.counts],
    }
    return Problem(doc, c, g, a, X, fixed, invariant_basis(c, a), diagnostics)
