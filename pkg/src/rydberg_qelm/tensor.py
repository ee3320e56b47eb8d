"""Dense tensor kernels shared by the MPS, MPO and TDVP code.

Tensors are plain ``numpy.ndarray`` objects in C (row-major) order with
complex128 entries. Everything here is a pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

DEFAULT_SVD_CUTOFF = 1e-12
DEFAULT_KRYLOV_DIM = 25
DEFAULT_KRYLOV_TOL = 1e-10
KRYLOV_CHECK_EVERY = 3


def as_tensor(data) -> np.ndarray:
    """Return ``data`` as a C-contiguous complex128 array."""
    return np.ascontiguousarray(data, dtype=np.complex128)


def contract(a: np.ndarray, axes_a: Sequence[int], b: np.ndarray, axes_b: Sequence[int]) -> np.ndarray:
    """Contract ``a`` and ``b`` over paired axes.

    The free axes of ``a`` come first, followed by the free axes of ``b``,
    each in their original order.
    """
    axes_a = [int(x) for x in axes_a]
    axes_b = [int(x) for x in axes_b]
    if len(axes_a) != len(axes_b):
        raise ValueError(f"axis lists differ in length: {axes_a} vs {axes_b}")
    for ia, ib in zip(axes_a, axes_b):
        if a.shape[ia] != b.shape[ib]:
            raise ValueError(
                f"cannot contract axis {ia} (extent {a.shape[ia]}) with axis {ib} (extent {b.shape[ib]})"
            )
    return np.tensordot(a, b, axes=(axes_a, axes_b))


@dataclass(frozen=True)
class SvdResult:
    u: np.ndarray
    s: np.ndarray
    vh: np.ndarray
    discarded_weight: float

    @property
    def rank(self) -> int:
        return len(self.s)


def _svd(m: np.ndarray):
    try:
        return np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError:
        # gesdd occasionally fails to converge; gesvd is slower but robust
        return scipy.linalg.svd(m, full_matrices=False, lapack_driver="gesvd")


def truncated_svd(
    t: np.ndarray,
    n_left: int,
    chi_max: int,
    cutoff: float = DEFAULT_SVD_CUTOFF,
) -> SvdResult:
    """Split ``t`` between its first ``n_left`` axes and the rest.

    Singular values are kept while the count stays at most ``chi_max`` and
    ``s_i**2 / sum(s**2) >= cutoff``. ``u`` has shape ``t.shape[:n_left] +
    (k,)`` and ``vh`` has shape ``(k,) + t.shape[n_left:]``.

    An all-zero input returns a single zero singular value with discarded
    weight 0.
    """
    if not 0 < n_left < t.ndim:
        raise ValueError(f"split position {n_left} must leave axes on both sides of a rank-{t.ndim} tensor")
    if chi_max < 1:
        raise ValueError("chi_max must be positive")
    if cutoff < 0:
        raise ValueError("cutoff must be non-negative")
    left_shape = t.shape[:n_left]
    right_shape = t.shape[n_left:]
    m = t.reshape(int(np.prod(left_shape)), int(np.prod(right_shape)))
    u, s, vh = _svd(m)
    total = float(np.sum(s**2))
    if total == 0.0:
        u0 = np.zeros((m.shape[0], 1), dtype=np.complex128)
        u0[0, 0] = 1.0
        v0 = np.zeros((1, m.shape[1]), dtype=np.complex128)
        v0[0, 0] = 1.0
        return SvdResult(u0.reshape(left_shape + (1,)), np.zeros(1), v0.reshape((1,) + right_shape), 0.0)
    keep = int(np.count_nonzero(s**2 / total >= cutoff))
    keep = max(1, min(keep, chi_max))
    discarded = float(np.sum(s[keep:] ** 2)) / total
    return SvdResult(
        np.ascontiguousarray(u[:, :keep]).reshape(left_shape + (keep,)),
        s[:keep].copy(),
        np.ascontiguousarray(vh[:keep, :]).reshape((keep,) + right_shape),
        discarded,
    )


def krylov_expm_apply(
    apply_h: Callable[[np.ndarray], np.ndarray],
    v: np.ndarray,
    prefactor: complex,
    krylov_dim: int = DEFAULT_KRYLOV_DIM,
    tol: float = DEFAULT_KRYLOV_TOL,
) -> tuple[np.ndarray, bool]:
    """Compute ``exp(prefactor * H) @ v`` in a Lanczos subspace.

    ``apply_h`` must act as a Hermitian linear map on arrays shaped like
    ``v``. Returns the result (same shape as ``v``) and a flag telling
    whether the residual estimate dropped below ``tol`` within
    ``krylov_dim`` iterations. Happy breakdown counts as converged.
    """
    v = np.asarray(v)
    shape = v.shape
    x = v.reshape(-1).astype(np.complex128)
    beta0 = np.linalg.norm(x)
    if beta0 == 0.0:
        raise ValueError("krylov_expm_apply needs a nonzero start vector")
    q0 = x / beta0
    dim = min(int(krylov_dim), x.size)
    basis = np.empty((dim + 1, x.size), dtype=np.complex128)
    basis[0] = q0
    alphas = []
    betas = []
    converged = False
    coeffs = None
    for j in range(dim):
        w = np.asarray(apply_h(basis[j].reshape(shape))).reshape(-1)
        alpha = np.vdot(basis[j], w).real
        w = w - alpha * basis[j]
        if j > 0:
            w = w - betas[-1] * basis[j - 1]
        # full reorthogonalization; the subspaces here are tiny
        w = w - basis[: j + 1].T @ (basis[: j + 1].conj() @ w)
        beta = np.linalg.norm(w)
        alphas.append(alpha)
        m = j + 1
        if beta < 1e-13 * max(1.0, abs(alpha)):
            converged = True
            break
        # the residual check costs a small eigensolve; do it every few steps
        if m % KRYLOV_CHECK_EVERY == 0 or m == dim:
            coeffs = _tridiag_expm_e1(np.array(alphas), np.array(betas), prefactor)
            if abs(beta * coeffs[-1]) < tol:
                converged = True
                break
        betas.append(beta)
        if j + 1 < dim:
            basis[j + 1] = w / beta
    if coeffs is None or len(coeffs) != m:
        coeffs = _tridiag_expm_e1(np.array(alphas), np.array(betas), prefactor)
    out = beta0 * (coeffs @ basis[:m])
    return out.reshape(shape), converged


def _tridiag_expm_e1(alphas: np.ndarray, betas: np.ndarray, prefactor: complex) -> np.ndarray:
    """First column of ``exp(prefactor * T)`` for the Lanczos matrix ``T``."""
    if len(alphas) == 1:
        return np.array([np.exp(prefactor * alphas[0])])
    evals, evecs = scipy.linalg.eigh_tridiagonal(alphas, betas[: len(alphas) - 1])
    return evecs @ (np.exp(prefactor * evals) * evecs[0])
