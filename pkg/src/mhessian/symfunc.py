"""m-traces of symmetric matrices and the facts built on them.

``T_m(S)`` is the sum of all ``m x m`` principal minors of ``S``, equal to
the elementary symmetric polynomial ``S_m`` of the eigenvalues.  The default
evaluation goes through a symmetric eigensolve followed by the product
recursion for elementary symmetric polynomials; the Faddeev-LeVerrier
recursion is available as an alternative and :func:`minor_sum` enumerates
principal minors directly (only meant as a test oracle).
"""
from dataclasses import dataclass
from itertools import combinations
from math import comb, exp, log
from typing import Optional

import numpy as np

from . import kernels
from .errors import ArgumentError, DomainError

N_MIN, N_MAX = 2, 8
CONE_RTOL = 1e-12


def sym_matrix(a) -> np.ndarray:
    """Validate and symmetrize ``a`` into an ``n x n`` float array, ``2 <= n <= 8``."""
    S = np.array(a, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ArgumentError(f"expected a square matrix, got shape {S.shape}")
    n = S.shape[0]
    if not N_MIN <= n <= N_MAX:
        raise ArgumentError(f"matrix dimension {n} outside supported range [{N_MIN}, {N_MAX}]")
    if not np.all(np.isfinite(S)):
        raise ArgumentError("matrix has non-finite entries")
    return 0.5 * (S + S.T)


def _check_order(m, lo, hi, name="m"):
    if not isinstance(m, (int, np.integer)) or not lo <= m <= hi:
        raise ArgumentError(f"{name}={m} outside [{lo}, {hi}]")


# ---------------------------------------------------------------------------
# traces

def m_trace_from_eigenvalues(lam, m: int) -> float:
    """Elementary symmetric polynomial ``S_m(lam)``."""
    lam = np.asarray(lam, dtype=float)
    if lam.ndim != 1:
        raise ArgumentError("eigenvalues must be a one-dimensional sequence")
    _check_order(m, 0, lam.size)
    return float(kernels.esp(lam[None, :])[0, m])


def traces(S, method: str = "eig") -> np.ndarray:
    """Return the trace vector ``[T_0(S), ..., T_n(S)]`` (``T_0 = 1``)."""
    S = sym_matrix(S)
    if method == "eig":
        return kernels.esp(np.linalg.eigvalsh(S)[None, :])[0]
    if method == "faddeev":
        return faddeev_leverrier(S)
    raise ArgumentError(f"unknown method {method!r}")


def m_trace(S, m: int, method: str = "eig") -> float:
    """m-trace ``T_m(S)``, the sum of all principal minors of order ``m``."""
    S = sym_matrix(S)
    _check_order(m, 0, S.shape[0])
    return float(traces(S, method)[m])


def faddeev_leverrier(S) -> np.ndarray:
    """Trace vector from the Faddeev-LeVerrier recursion.

    With ``det(tI - S) = sum_k c_k t^(n-k)`` the traces are
    ``T_k = (-1)^k c_k``.
    """
    S = np.asarray(S, dtype=float)
    n = S.shape[0]
    out = np.empty(n + 1)
    out[0] = 1.0
    M = np.zeros_like(S)
    c = 1.0
    eye = np.eye(n)
    for k in range(1, n + 1):
        M = S @ M + c * eye
        c = -np.trace(S @ M) / k
        out[k] = (-1) ** k * c
    return out


def minor_sum(S, m: int) -> float:
    """Brute-force sum of all principal minors of order ``m`` (test oracle)."""
    S = np.asarray(S, dtype=float)
    n = S.shape[0]
    _check_order(m, 0, n)
    if m == 0:
        return 1.0
    total = 0.0
    for idx in combinations(range(n), m):
        total += np.linalg.det(S[np.ix_(idx, idx)])
    return float(total)


def trace_scale(S, m: int) -> float:
    """First-order perturbation scale of ``T_m`` at ``S``.

    ``max(|T_m|, ||S||_2 (n-m+1) S_{m-1}(|lambda|))`` bounds how much a
    relative perturbation of size one in ``S`` can move ``T_m(S)``; errors of
    any backward-stable evaluation are measured against it.
    """
    S = np.asarray(S, dtype=float)
    n = S.shape[0]
    if m == 0:
        return 1.0
    lam = np.linalg.eigvalsh(S)
    e = kernels.esp(np.abs(lam)[None, :])[0]
    t = kernels.esp(lam[None, :])[0, m]
    return float(max(abs(t), np.abs(lam).max() * (n - m + 1) * e[m - 1]))


# ---------------------------------------------------------------------------
# gradients

def m_trace_gradient(S, m: int) -> np.ndarray:
    """Matrix of partial derivatives ``dT_m / ds_ij``.

    For symmetric ``S = Q diag(lam) Q^T`` this is
    ``Q diag(S_{m-1}(lam without i)) Q^T``.
    """
    S = sym_matrix(S)
    n = S.shape[0]
    _check_order(m, 0, n)
    return batch_gradient(S[None], m)[0]


def deleted_trace(S, m: int, i: int) -> float:
    """``(m-1)``-trace of ``S`` with row and column ``i`` deleted."""
    S = sym_matrix(S)
    n = S.shape[0]
    _check_order(m, 1, n)
    if not 0 <= i < n:
        raise ArgumentError(f"index {i} outside [0, {n})")
    if m == 1:
        return 1.0
    sub = np.delete(np.delete(S, i, axis=0), i, axis=1)
    lam = np.linalg.eigvalsh(sub)
    return float(kernels.esp(lam[None, :])[0, m - 1])


# ---------------------------------------------------------------------------
# batched forms used by the grid code

def batch_eigh(H):
    """Eigen-decomposition of a stack ``(K, n, n)`` of symmetric matrices."""
    H = np.asarray(H, dtype=float)
    return np.linalg.eigh(0.5 * (H + np.swapaxes(H, -1, -2)))


def batch_traces(H) -> np.ndarray:
    """Trace vectors for a stack of symmetric matrices; shape ``(K, n+1)``."""
    H = np.asarray(H, dtype=float)
    lam = np.linalg.eigvalsh(0.5 * (H + np.swapaxes(H, -1, -2)))
    return kernels.esp(lam)


def batch_gradient(H, p: int, eig=None) -> np.ndarray:
    """``dT_p/ds_ij`` for each matrix in the stack ``H``."""
    H = np.asarray(H, dtype=float)
    K, n, _ = H.shape
    if p == 0:
        return np.zeros_like(H)
    lam, Q = batch_eigh(H) if eig is None else eig
    d = kernels.deleted_esp(lam)[:, :, p - 1]
    return np.einsum("kia,ka,kja->kij", Q, d, Q)


# ---------------------------------------------------------------------------
# cones

@dataclass(frozen=True)
class ConeVerdict:
    m: int
    member: bool
    first_failure: Optional[int]
    margin: float
    threshold: float


def cone_threshold(S, m: int) -> float:
    """Cutoff below which an m-trace counts as nonpositive."""
    scale = max(1.0, float(np.linalg.norm(np.asarray(S, dtype=float), np.inf)))
    return CONE_RTOL * scale ** m


def _verdict(tr, m, tau) -> ConeVerdict:
    vals = tr[1:m + 1]
    fails = np.nonzero(vals <= tau)[0]
    first = int(fails[0]) + 1 if fails.size else None
    return ConeVerdict(m=m, member=first is None, first_failure=first,
                       margin=float(vals.min()), threshold=tau)


def cone_membership(S, m: int) -> ConeVerdict:
    """Test ``S`` against the Garding cone ``K_m = {T_p(S) > 0, p = 1..m}``."""
    S = sym_matrix(S)
    _check_order(m, 1, S.shape[0])
    return _verdict(traces(S), m, cone_threshold(S, m))


def in_cone(S, m: int) -> bool:
    return cone_membership(S, m).member


def batch_in_cone(H, m: int, tr=None) -> np.ndarray:
    """Boolean mask of cone membership for a stack of matrices."""
    H = np.asarray(H, dtype=float)
    if tr is None:
        tr = batch_traces(H)
    scale = np.maximum(1.0, np.abs(H).sum(axis=-1).max(axis=-1))
    tau = CONE_RTOL * scale ** m
    return np.all(tr[:, 1:m + 1] > tau[:, None], axis=1)


def _require_cone(S, m):
    v = cone_membership(S, m)
    if not v.member:
        raise DomainError(f"matrix is not in K_{m}: T_{v.first_failure} = "
                          f"{traces(S)[v.first_failure]:.3e}")
    return v


# ---------------------------------------------------------------------------
# quotients and inequalities on the cone

def quotient(S, m: int, l: int) -> float:
    """Hessian quotient ``T_m(S) / T_l(S)`` for ``S`` in ``K_m``."""
    S = sym_matrix(S)
    n = S.shape[0]
    _check_order(m, 1, n)
    _check_order(l, 0, m - 1, "l")
    _require_cone(S, m)
    tr = traces(S)
    return float(tr[m] / tr[l])


def quotient_gradient(S, m: int, l: int) -> np.ndarray:
    """Gradient of ``T_m / T_l``; positive definite on ``K_m``."""
    S = sym_matrix(S)
    n = S.shape[0]
    _check_order(m, 1, n)
    _check_order(l, 0, m - 1, "l")
    _require_cone(S, m)
    tr = traces(S)
    eig = batch_eigh(S[None])
    gm = batch_gradient(S[None], m, eig)[0]
    gl = batch_gradient(S[None], l, eig)[0]
    return (gm * tr[l] - tr[m] * gl) / tr[l] ** 2


def maclaurin_margin(S, l: int, m: int) -> float:
    """``(T_l/C(n,l))^(1/l) - (T_m/C(n,m))^(1/m)``; nonnegative on ``K_m``."""
    S = sym_matrix(S)
    n = S.shape[0]
    _check_order(m, 2, n)
    _check_order(l, 1, m - 1, "l")
    _require_cone(S, m)
    tr = traces(S)
    lhs = exp(log(tr[l] / comb(n, l)) / l)
    rhs = exp(log(tr[m] / comb(n, m)) / m)
    return lhs - rhs


def monotonicity_margin(S, S0, m: int, l: int, psd_tol: float = 1e-12) -> float:
    """``T_{m,l}(S + S0) - T_{m,l}(S)`` for ``S`` in ``K_m`` and nonzero PSD ``S0``."""
    S = sym_matrix(S)
    S0 = sym_matrix(S0)
    if S0.shape != S.shape:
        raise ArgumentError("S and S0 must have the same dimension")
    lam0 = np.linalg.eigvalsh(S0)
    scale = max(1.0, float(np.abs(lam0).max()))
    if lam0.min() < -psd_tol * scale:
        raise ArgumentError(f"S0 is not positive semidefinite (min eigenvalue {lam0.min():.3e})")
    if not np.any(S0):
        raise ArgumentError("S0 must be nonzero")
    return quotient(S + S0, m, l) - quotient(S, m, l)


# ---------------------------------------------------------------------------
# sampling

def sample_cone(rng, n: int, m: int, size: int, spread: float = 1.0, batch: int = 4096):
    """Rejection-sample ``size`` matrices from ``K_m``.

    Candidates are ``spread * G + c I`` with ``G`` a symmetrized standard
    Gaussian matrix and ``c`` uniform on ``[-0.5, 2]*sqrt(n)``; those outside
    ``K_m`` are rejected.

    Returns
    -------
    samples : ndarray, shape (size, n, n)
    acceptance : float
        Fraction of candidates accepted.
    """
    _check_order(m, 1, n)
    kept, drawn, total = [], 0, 0
    while total < size:
        G = rng.standard_normal((batch, n, n))
        G = (G + np.swapaxes(G, 1, 2)) / np.sqrt(2.0)
        c = rng.uniform(-0.5, 2.0, size=batch) * np.sqrt(n)
        H = spread * G + c[:, None, None] * np.eye(n)
        ok = batch_in_cone(H, m)
        kept.append(H[ok])
        total += int(ok.sum())
        drawn += batch
    return np.concatenate(kept)[:size], total / drawn
