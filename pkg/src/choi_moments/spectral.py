"""Dense Hermitian spectral primitives: spectra, Schatten norms, trace moments.

Everything downstream (Choi diagnostics, moment witnesses, measures) is built
on these three operations. All functions are pure and safe to call from
multiple threads.
"""

import numpy as np

# Absolute tolerance on entrywise asymmetry |m - m^dag|.
HERMITICITY_ATOL = 1e-12


def require_hermitian(m: np.ndarray, atol: float = HERMITICITY_ATOL) -> np.ndarray:
    """Check Hermiticity of ``m`` and return the symmetrized copy (m + m^dag)/2.

    Symmetrizing after the check stabilizes the eigensolve without masking
    genuinely non-Hermitian input.

    Raises:
        ValueError: if ``m`` is not square or the maximum entrywise asymmetry
            exceeds ``atol`` (the offending magnitude is reported).
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    asymmetry = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if asymmetry > atol:
        raise ValueError(
            f"matrix is not Hermitian: max |m - m^dag| = {asymmetry:.3e} "
            f"exceeds tolerance {atol:.1e}"
        )
    return 0.5 * (m + m.conj().T)


def hermitian_spectrum(m: np.ndarray) -> np.ndarray:
    """All real eigenvalues of a Hermitian matrix, descending, with multiplicity."""
    return np.linalg.eigvalsh(require_hermitian(m))[::-1]


def schatten_norm(m: np.ndarray, p: float) -> float:
    """Schatten-p norm (sum_i |lambda_i|^p)^(1/p) of a Hermitian matrix.

    p = 1 is the trace norm, p = 2 the Frobenius norm.

    Raises:
        ValueError: if p < 1 (not a norm).
    """
    if p < 1:
        raise ValueError(f"Schatten norm requires p >= 1, got p = {p}")
    lam = hermitian_spectrum(m)
    return float(np.sum(np.abs(lam) ** p) ** (1.0 / p))


def trace_moment(m: np.ndarray, n: int) -> float:
    """n-th trace moment sum_i lambda_i^n of a Hermitian matrix (n >= 1).

    Computed from the spectrum rather than repeated matrix products: this
    avoids accumulation error and keeps negative-eigenvalue contributions
    explicit.

    Raises:
        ValueError: if n < 1 (n = 0 would degenerately equal the dimension).
    """
    if int(n) != n or n < 1:
        raise ValueError(f"moment order must be a positive integer, got n = {n}")
    lam = hermitian_spectrum(m)
    return float(np.sum(lam ** int(n)))


def moments_from_spectrum(lam: np.ndarray, n_max: int) -> np.ndarray:
    """Trace moments [sum lam, sum lam^2, ..., sum lam^n_max] of a spectrum."""
    lam = np.asarray(lam, dtype=float)
    return np.array([np.sum(lam ** n) for n in range(1, n_max + 1)])
