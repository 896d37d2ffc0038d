"""Witten-deformed Hodge theory on meshes with a cyclic rotational symmetry.

Layers, bottom up: :mod:`complex` (simplicial complexes and exact Betti
numbers), :mod:`geometry` (Whitney forms, mass and contraction matrices),
:mod:`symmetry` (the cyclic action and invariant cochains), :mod:`witten`
(d_X on invariant cochains), :mod:`spectral` (near-kernels),
:mod:`decomp` (harmonic fields, decompositions, duality angles),
:mod:`cohomology` (fixed-point checks) and :mod:`scenarios` / :mod:`cli`.
"""

from .meshes import generate_mesh
from .problem import Problem, ValidationError, load_problem
from .witten import BoundaryCondition, WittenBundle, assemble_bundle

__version__ = "0.1.0"

__all__ = ["generate_mesh", "load_problem", "Problem", "ValidationError",
           "BoundaryCondition", "WittenBundle", "assemble_bundle"]
