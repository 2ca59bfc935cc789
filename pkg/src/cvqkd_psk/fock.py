"""Truncated Fock-space linear algebra.

States and operators are plain numpy arrays. Bob's mode is truncated to the
photon numbers ``0..n_cutoff``; joint operators are ordered ``A (x) B``.
"""

import numpy as np

DEFAULT_LOG_FLOOR = 1e-14


class EigenDecompositionError(np.linalg.LinAlgError):
    """The Hermitian eigensolver did not converge."""


def hermitian(M):
    """Return the Hermitian part of ``M`` as a complex array."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    return 0.5 * (M + M.conj().T)


def coherent_state(alpha, n_cutoff):
    """Fock amplitudes <n|alpha> for n = 0..n_cutoff.

    Uses the recurrence c_{n+1} = c_n * alpha / sqrt(n + 1), which avoids
    overflowing factorials for large cutoffs.
    """
    if n_cutoff < 0:
        raise ValueError("n_cutoff must be >= 0")
    alpha = complex(alpha)
    c = np.empty(n_cutoff + 1, dtype=complex)
    c[0] = np.exp(-0.5 * abs(alpha) ** 2)
    for n in range(n_cutoff):
        c[n + 1] = c[n] * alpha / np.sqrt(n + 1)
    return c


def annihilation(n_cutoff):
    """Truncated annihilation operator, a|n> = sqrt(n)|n-1>."""
    return np.diag(np.sqrt(np.arange(1, n_cutoff + 1, dtype=float)), k=1).astype(complex)


def quadratures(n_cutoff):
    """Return the truncated operators ``(q, p, n, d)``.

    q = (a + a^dag)/sqrt(2) and p = i(a^dag - a)/sqrt(2), so that
    <alpha|q|alpha> = sqrt(2) Re(alpha) (vacuum variance 1/2). The photon
    number n = (q^2 + p^2 - 1)/2 and d = q^2 - p^2 are formed from the
    truncated q and p, so the top Fock levels carry the usual edge effects.
    """
    if n_cutoff < 1:
        raise ValueError("n_cutoff must be >= 1")
    a = annihilation(n_cutoff)
    ad = a.conj().T
    q = (a + ad) / np.sqrt(2)
    p = 1j * (ad - a) / np.sqrt(2)
    q2 = q @ q
    p2 = p @ p
    eye = np.eye(n_cutoff + 1)
    n = 0.5 * (q2 + p2 - eye)
    d = q2 - p2
    return hermitian(q), hermitian(p), hermitian(n), hermitian(d)


def hermitian_eig(M):
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Returns ``(w, V)`` with ``M = V @ diag(w) @ V^dag``.
    """
    M = np.asarray(M)
    try:
        w, V = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise EigenDecompositionError(
            f"eigensolver failed on a {M.shape[0]}x{M.shape[0]} matrix: {exc}"
        ) from exc
    return w[::-1], V[:, ::-1]


def matrix_function(M, func):
    """Apply ``func`` to the eigenvalues of Hermitian ``M``."""
    w, V = hermitian_eig(M)
    return hermitian((V * func(w)) @ V.conj().T)


def matrix_log_clipped(M, floor=DEFAULT_LOG_FLOOR):
    """Base-2 logarithm of a Hermitian matrix, eigenvalues clipped at ``floor``."""
    if floor <= 0:
        raise ValueError("floor must be positive")
    return matrix_function(M, lambda w: np.log2(np.maximum(w, floor)))


def sqrtm_psd(M, tol=1e-8):
    """Square root of a PSD matrix; eigenvalues in [-tol, 0) are set to zero."""
    w, V = hermitian_eig(M)
    if w[-1] < -tol:
        raise ValueError(f"matrix is not PSD (min eigenvalue {w[-1]:.3e})")
    return hermitian((V * np.sqrt(np.clip(w, 0.0, None))) @ V.conj().T)


def entropy_bits(rho):
    """von Neumann entropy in bits of a (possibly subnormalised) PSD matrix."""
    w = np.linalg.eigvalsh(rho)
    w = w[w > 0]
    return float(-np.sum(w * np.log2(w)))


def kron(*ops):
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def partial_trace(rho, dims, keep):
    """Partial trace of a bipartite operator on ``dims = (dA, dB)``.

    ``keep`` is ``"A"`` (trace out B) or ``"B"`` (trace out A).
    """
    dA, dB = dims
    rho = np.asarray(rho)
    if rho.shape != (dA * dB, dA * dB):
        raise ValueError(f"operator shape {rho.shape} does not match dims {dims}")
    r = rho.reshape(dA, dB, dA, dB)
    if keep == "A":
        return np.einsum("ajbj->ab", r)
    if keep == "B":
        return np.einsum("iaib->ab", r)
    raise ValueError("keep must be 'A' or 'B'")


def is_psd(M, tol=1e-9):
    return bool(np.linalg.eigvalsh(hermitian(M))[0] >= -tol)
