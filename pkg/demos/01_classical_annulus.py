"""Start without a symmetry: the annulus at s = 0.

With the contraction switched off, the harmonic fields are the ordinary
absolute and relative cohomology of the annulus.  The Neumann fields live in
degrees 0 and 1 and the Dirichlet fields in degrees 1 and 2.  A random
cochain then splits into five mutually orthogonal pieces.

Run:  python demos/01_classical_annulus.py
"""

import numpy as np

from wittenhodge import decomp, generate_mesh, load_problem
from wittenhodge.complex import reference_betti
from wittenhodge.witten import D, N

problem = load_problem(generate_mesh("annulus", inner=1.0, outer=2.0,
                                     rings=16, sectors=64))
bundle = problem.bundle(0.0)

print("exact Betti numbers (absolute, relative):",
      reference_betti(problem.complex), reference_betti(problem.complex, relative=True))

for bc in (N, D):
    dims = [0, 0, 0]
    for parity in (0, 1):
        hb = decomp.harmonic_fields(bundle, bc, parity).require()
        for k, v in decomp.degree_dimensions(bundle, hb).items():
            dims[k] += v
    print(f"harmonic fields, bc={bc.value}: by degree {dims}")

omega = np.random.default_rng(0).standard_normal(bundle.size(1))
dec = decomp.five_term_decompose(bundle, omega, 1)
M = bundle.M(1)
print("\nodd-parity random cochain, squared mass norms of its parts:")
for name, part in dec.parts.items():
    print(f"  {name:7s} {part @ M @ part:10.4f}")
print(f"reconstruction error {dec.reconstruction:.1e}, "
      f"worst pairwise inner product {dec.orthogonality:.1e}")

sN, sD = decomp.interior_bases(bundle, 1)
print(f"\nodd Neumann field: interior {sN.dims[0]}, boundary {sN.dims[1]}")
print("(the angular form is a boundary class: it restricts to both circles)")
