"""Generalized symmetric eigenproblems and near-kernel detection.

Near-kernels of the discrete Witten stiffness are only approximately
singular for s != 0 (the discrete d_X fails to square to zero at grid
scale), so kernel dimension is decided by a spectral gap rather than by a
machine-zero test.  Eigenvalues are normalized by the largest of the
``count`` smallest computed eigenvalues, which is mesh-converged and
independent of the solver used.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

DENSE_LIMIT = 500

RHO_MIN = 100.0
TAU_ABS = 1e-7
TAU_FLOOR = 1e-15
TAU_EMPTY = 1e-4
DEFAULT_COUNT = 16


class ConvergenceError(RuntimeError):
    pass


def _as_dense(A):
    return A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)


def solve_gevp(S, m, count=DEFAULT_COUNT, method="auto", seed=0,
               tol=1e-9, maxiter=2000):
    """Smallest ``count`` eigenpairs of ``S x = lam m x``, ascending.

    ``method`` is ``"dense"`` (LAPACK ``eigh``), ``"iterative"`` (shift-invert
    Lanczos with a deterministic seeded start vector) or
    ``"auto"`` (dense below :data:`DENSE_LIMIT` unknowns).  Eigenvectors
    are m-orthonormal.  Raises :class:`ConvergenceError` if any pair fails
    the residual bound ``||S x - lam m x|| <= tol * ||S||``.
    """
    N = S.shape[0]
    count = min(count, N)
    if count == 0:
        return np.zeros(0), np.zeros((N, 0))
    if method == "auto":
        method = "dense" if N <= DENSE_LIMIT else "iterative"
    if method == "dense":
        Sd, md = _as_dense(S), _as_dense(m)
        lam, V = sla.eigh(Sd, md, subset_by_index=[0, count - 1])
    elif method == "iterative":
        lam, V = _lanczos(S, m, count, seed, tol, maxiter)
    else:
        raise ValueError(f"unknown method {method!r}")
    Sd = S
    snorm = max(_norm_est(S), 1e-300)
    R = Sd @ V - (m @ V) * lam
    res = np.linalg.norm(R, axis=0)
    if (res > tol * snorm).any():
        raise ConvergenceError(
            f"eigenpair residual {res.max():.3e} exceeds {tol:g}*||S||")
    return lam, V


def _norm_est(A):
    if sp.issparse(A):
        return float(spla.norm(A, 1))
    return float(np.abs(A).sum(axis=0).max())


def _lanczos(S, m, count, seed, tol, maxiter):
    """Shift-invert Lanczos about a small negative shift (ARPACK)."""
    N = S.shape[0]
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(N)
    S_ = sp.csc_matrix(S) if not sp.issparse(S) else S.tocsc()
    m_ = sp.csc_matrix(m) if not sp.issparse(m) else m.tocsc()
    # The shift keeps S + shift*m positive definite when S is singular.
    shift = 1e-8 * _norm_est(S_) / max(_norm_est(m_), 1e-300)
    if count >= N - 1:
        return sla.eigh(_as_dense(S), _as_dense(m), subset_by_index=[0, count - 1])
    try:
        lam, V = spla.eigsh(S_, k=count, M=m_, sigma=-shift, which="LM",
                            v0=v0, tol=tol * 1e-3, maxiter=maxiter)
    except spla.ArpackNoConvergence as exc:
        raise ConvergenceError(f"Lanczos did not converge: {exc}") from exc
    order = np.argsort(lam)
    lam, V = lam[order], V[:, order]
    # Rayleigh-Ritz cleanup restores exact m-orthonormality.
    G = V.T @ (m_ @ V)
    H = V.T @ (S_ @ V)
    mu, W = sla.eigh(0.5 * (H + H.T), 0.5 * (G + G.T))
    return mu, V @ W


@dataclass
class NearKernel:
    """Gap-detected near-kernel of a generalized eigenproblem.

    ``eigenvalues`` are the normalized spectrum that was searched;
    ``dimension`` is ``None`` when the verdict is ``"ambiguous"``.
    """

    basis: np.ndarray
    dimension: int | None
    eigenvalues: np.ndarray
    normalizer: float
    gap_ratio: float
    verdict: str
    params: dict = field(default_factory=dict)

    @property
    def clean(self):
        return self.verdict == "clean"

    @property
    def lambda_min(self):
        return float(self.eigenvalues[0]) if len(self.eigenvalues) else np.inf

    def as_dict(self):
        return {
            "dimension": self.dimension,
            "verdict": self.verdict,
            "gap_ratio": _finite(self.gap_ratio),
            "normalizer": self.normalizer,
            "eigenvalues": [float(x) for x in self.eigenvalues],
            **self.params,
        }


def _finite(x):
    return float(x) if np.isfinite(x) else None


def detect_kernel(eigs, rho_min=RHO_MIN, tau_abs=TAU_ABS, tau_floor=TAU_FLOOR,
                  tau_empty=TAU_EMPTY):
    """Kernel dimension from normalized ascending eigenvalues.

    Returns ``(r, gap_ratio, verdict)``.  ``r`` is the largest prefix length
    with ``lam_r <= tau_abs`` and ``lam_{r+1} / max(lam_r, tau_floor) >=
    rho_min``.  An empty kernel is clean only when ``lam_1 >= tau_empty``;
    a first eigenvalue between ``tau_abs`` and ``tau_empty`` is neither
    zero nor separated, so it is ambiguous.  For ``r = 0`` the reported gap
    ratio is ``lam_1 / tau_abs``.  A spectrum exhausted below ``tau_abs``
    counts as all-kernel.
    """
    lam = np.asarray(eigs, dtype=float)
    if len(lam) == 0:
        return 0, np.inf, "clean"
    for r in range(len(lam), 0, -1):
        if lam[r - 1] > tau_abs:
            continue
        if r == len(lam):
            return r, np.inf, "clean"
        ratio = lam[r] / max(lam[r - 1], tau_floor)
        if ratio >= rho_min:
            return r, ratio, "clean"
    if lam[0] >= tau_empty:
        return 0, lam[0] / tau_abs, "clean"
    return None, 0.0, "ambiguous"


def near_kernel(S, m, count=DEFAULT_COUNT, rho_min=RHO_MIN, tau_abs=TAU_ABS,
                tau_floor=TAU_FLOOR, tau_empty=TAU_EMPTY, method="auto", seed=0):
    """Solve, normalize and gap-detect; basis columns are m-orthonormal."""
    lam, V = solve_gevp(S, m, count=count, method=method, seed=seed)
    if len(lam) == 0:
        return NearKernel(V, 0, lam, 1.0, np.inf, "clean")
    normalizer = max(float(lam[-1]), 1e-300)
    lam_n = np.maximum(lam, 0.0) / normalizer
    r, ratio, verdict = detect_kernel(lam_n, rho_min, tau_abs, tau_floor,
                                      tau_empty)
    basis = V[:, :r] if r is not None else V[:, :0]
    return NearKernel(basis, r, lam_n, normalizer, ratio, verdict,
                      {"rho_min": rho_min, "tau_abs": tau_abs,
                       "tau_empty": tau_empty, "count": int(len(lam))})


def m_orthonormalize(B, m, rtol=1e-10):
    """m-orthonormal basis for span(B), dropping numerically dependent columns."""
    if B.shape[1] == 0:
        return B
    L = sla.cholesky(_as_dense(m), lower=True)
    Y = L.T @ B
    U, sv, _ = sla.svd(Y, full_matrices=False)
    keep = sv > rtol * max(sv.max(), 1e-300)
    return sla.solve_triangular(L.T, U[:, keep], lower=False)
