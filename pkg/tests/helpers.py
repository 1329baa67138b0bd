"""Shared random-object factories for the test suite (all seeded by callers)."""

import numpy as np

from choi_moments.lindblad import LindbladGenerator
from choi_moments.rates import ConstantRate


def random_hermitian(rng, n):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (g + g.conj().T)


def random_unitary(rng, n):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_psd_unit_trace(rng, n):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_normal_operator(rng, n):
    """U D U^dag with complex diagonal D: commutes with its adjoint by construction."""
    u = random_unitary(rng, n)
    d = rng.normal(size=n) + 1j * rng.normal(size=n)
    return u @ np.diag(d) @ u.conj().T


def random_generator(rng, dim, n_ops=2, rate_range=(-1.0, 1.0)):
    """Generic generator: Gaussian jump operators, constant rates (any sign)."""
    ops = [rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)) for _ in range(n_ops)]
    rates = [ConstantRate(float(rng.uniform(*rate_range))) for _ in range(n_ops)]
    return LindbladGenerator(dim, random_hermitian(rng, dim), tuple(zip(ops, rates)))


def random_unital_generator(rng, dim, n_ops=2):
    """Normal jump operators with non-negative constant rates: unital and divisible."""
    ops = [random_normal_operator(rng, dim) for _ in range(n_ops)]
    rates = [ConstantRate(float(rng.uniform(0.1, 1.0))) for _ in range(n_ops)]
    return LindbladGenerator(dim, random_hermitian(rng, dim), tuple(zip(ops, rates)))


def random_kraus_choi(rng, d, n_kraus):
    """Choi state of a random CPTP map, built directly from Kraus vectors.

    A (n_kraus*d) x d isometry sliced into Kraus blocks A_k satisfies
    sum_k A_k^dag A_k = I; the Choi state is sum_k |v_k><v_k| with
    v_k = vec(A_k^T)/sqrt(d). Independent of the package's construction.
    """
    g = rng.normal(size=(n_kraus * d, d)) + 1j * rng.normal(size=(n_kraus * d, d))
    q, _ = np.linalg.qr(g)
    choi = np.zeros((d * d, d * d), dtype=complex)
    for k in range(n_kraus):
        v = q[k * d:(k + 1) * d].T.reshape(-1) / np.sqrt(d)
        choi += np.outer(v, v.conj())
    return choi
