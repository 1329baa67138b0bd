"""Choi states of intermediate dynamical maps and complete-positivity checks.

The normalized convention is used throughout: the Choi state of a map M is
(I kron M) applied to the projector onto (1/sqrt(d)) sum_i |ii>, so it has
unit trace for trace-preserving M. The unnormalized d*C convention is
deliberately not used anywhere -- the moment formulas downstream assume unit
trace.

Two constructions are provided: the first-order small-time Choi built directly
from the generator, and the finite-interval Choi of the map bridging two times
of a propagated evolution.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .lindblad import LindbladGenerator, _superoperator_parts, rates_at
from .spectral import require_hermitian

__all__ = [
    "SuperoperatorMatrix",
    "ChoiMatrix",
    "CPTPDiagnostics",
    "max_entangled_projector",
    "choi_small_time",
    "propagate_map",
    "intermediate_map",
    "choi_of_superoperator",
    "cptp_diagnostics",
    "partial_trace_output",
]

# Fixed-step integrator resolution: steps per unit time.
DEFAULT_STEPS_PER_UNIT = 1000
# Condition number above which a propagator counts as non-invertible.
CONDITION_LIMIT = 1e12
# |eps * gamma| above which the first-order small-time Choi is dubious.
SMALL_TIME_RATE_LIMIT = 0.1
# Tolerances for Choi construction sanity checks.
_CHOI_TRACE_ATOL = 1e-6
_CHOI_ASYMMETRY_ATOL = 1e-8


@dataclass(frozen=True)
class SuperoperatorMatrix:
    """A d^2 x d^2 map matrix (row-major vectorization) over a time interval."""

    matrix: np.ndarray
    interval: tuple[float, float]

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(self.matrix.shape[0])))


@dataclass(frozen=True)
class ChoiMatrix:
    """Unit-trace Hermitian d^2 x d^2 Choi state of an intermediate map."""

    matrix: np.ndarray
    interval: tuple[float, float]
    mode: str  # "small-time" | "finite-interval"

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(self.matrix.shape[0])))


@dataclass(frozen=True)
class CPTPDiagnostics:
    min_eigenvalue: float
    trace_deviation: float
    partial_trace_deviation: float
    is_cp: bool
    is_tp: bool


def max_entangled_projector(d: int) -> np.ndarray:
    """Rank-1 projector onto (1/sqrt(d)) sum_i |ii>; trace 1, purity 1."""
    if d < 2:
        raise ValueError(f"maximally entangled state needs d >= 2, got d = {d}")
    phi = np.zeros(d * d, dtype=complex)
    phi[:: d + 1] = 1.0 / np.sqrt(d)
    return np.outer(phi, phi.conj())


def _choi_from_superop(phi: np.ndarray, d: int) -> np.ndarray:
    """(1/d) sum_ij E_ij kron M(E_ij) for the map with row-major matrix phi.

    With row-major vec, M(E_ij)[a, b] = phi[(a, b), (i, j)], so the Choi state
    is a reshuffle of phi.
    """
    return phi.reshape(d, d, d, d).transpose(2, 0, 3, 1).reshape(d * d, d * d) / d


def partial_trace_output(c: np.ndarray, d: int) -> np.ndarray:
    """Trace a Choi matrix over its output (second) subsystem."""
    return np.einsum("iaja->ij", c.reshape(d, d, d, d))


def _symmetrized_choi(c: np.ndarray) -> np.ndarray:
    asym = float(np.max(np.abs(c - c.conj().T)))
    if asym > _CHOI_ASYMMETRY_ATOL:
        raise ValueError(
            f"constructed Choi matrix is not Hermitian: asymmetry {asym:.3e}"
        )
    return 0.5 * (c + c.conj().T)


class SmallTimeChoiBuilder:
    """Precomputed pieces of the first-order Choi C = bell + eps * (I kron L)(bell).

    The generator enters linearly through its rates, so grid sweeps only pay
    for rate evaluations and a cheap linear combination per point.
    """

    def __init__(self, gen: LindbladGenerator):
        self.gen = gen
        d = gen.dim
        self.bell = max_entangled_projector(d)
        h_part, d_parts = _superoperator_parts(gen)
        self.h_block = _choi_from_superop(h_part, d)
        self.d_blocks = [_choi_from_superop(p, d) for p in d_parts]

    def rates(self, t: float) -> np.ndarray:
        return rates_at(self.gen, t)

    def matrix(self, gammas: np.ndarray, epsilon: float) -> np.ndarray:
        c = self.bell + epsilon * self.h_block
        for g, block in zip(gammas, self.d_blocks):
            c = c + (epsilon * g) * block
        return c


def choi_small_time(gen: LindbladGenerator, t: float, epsilon: float) -> ChoiMatrix:
    """First-order Choi state of the map acting between t and t + epsilon.

    Valid while |epsilon * gamma_i(t)| << 1 for every rate; a warning is
    emitted past |eps * gamma| = 0.1. Non-finite rates are refused.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    builder = SmallTimeChoiBuilder(gen)
    gammas = builder.rates(t)
    if not np.all(np.isfinite(gammas)):
        raise ValueError(f"non-finite rate at t = {t:.6g}: {gammas}")
    worst = float(np.max(np.abs(epsilon * gammas))) if gammas.size else 0.0
    if worst >= SMALL_TIME_RATE_LIMIT:
        warnings.warn(
            f"small-time expansion is dubious: max |eps*gamma| = {worst:.3g} "
            f"at t = {t:.6g} (limit {SMALL_TIME_RATE_LIMIT})",
            stacklevel=2,
        )
    c = _symmetrized_choi(builder.matrix(gammas, epsilon))
    return ChoiMatrix(c, (t, t + epsilon), "small-time")


def _superop_at(h_part: np.ndarray, d_parts, gen: LindbladGenerator, t: float) -> np.ndarray:
    gammas = rates_at(gen, t)
    if not np.all(np.isfinite(gammas)):
        raise ValueError(f"non-finite rate encountered at t = {t:.6g}: {gammas}")
    out = h_part.copy()
    for g, part in zip(gammas, d_parts):
        out += g * part
    return out


def _rk4_propagate(
    gen: LindbladGenerator,
    h_part: np.ndarray,
    d_parts,
    t0: float,
    t1: float,
    steps: int,
    phi0: np.ndarray,
) -> np.ndarray:
    """Classical fourth-order fixed-step integration of dPhi/dt = Lhat(t) Phi."""
    phi = phi0
    h = (t1 - t0) / steps
    for k in range(steps):
        t = t0 + k * h
        a1 = _superop_at(h_part, d_parts, gen, t)
        a2 = _superop_at(h_part, d_parts, gen, t + 0.5 * h)
        a4 = _superop_at(h_part, d_parts, gen, t + h)
        k1 = a1 @ phi
        k2 = a2 @ (phi + 0.5 * h * k1)
        k3 = a2 @ (phi + 0.5 * h * k2)
        k4 = a4 @ (phi + h * k3)
        phi = phi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return phi


def _resolve_steps(t0: float, t1: float, steps: int | None) -> int:
    if steps is None:
        return max(1, round(DEFAULT_STEPS_PER_UNIT * (t1 - t0)))
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    return int(steps)


def propagate_map(
    gen: LindbladGenerator, t0: float, t1: float, steps: int | None = None
) -> SuperoperatorMatrix:
    """Time-ordered propagator Phi(t1, t0) of the generator, as a superoperator.

    Fixed-step fourth-order integration with step (t1 - t0)/steps; the default
    resolution is 1000 steps per unit time. Doubling the steps must not move
    the result by more than ~1e-8 in max-entry norm at the default resolution
    for the rate scales in scope.
    """
    if t1 < t0:
        raise ValueError(f"require t1 >= t0, got t0 = {t0}, t1 = {t1}")
    d2 = gen.dim * gen.dim
    eye = np.eye(d2, dtype=complex)
    if t1 == t0:
        return SuperoperatorMatrix(eye, (t0, t1))
    h_part, d_parts = _superoperator_parts(gen)
    phi = _rk4_propagate(gen, h_part, d_parts, t0, t1, _resolve_steps(t0, t1, steps), eye)
    return SuperoperatorMatrix(phi, (t0, t1))


def _solve_intermediate(phi_s: np.ndarray, phi_t: np.ndarray, s: float) -> np.ndarray:
    """Phi(t,0) Phi(s,0)^(-1) by linear solve, refusing near-singular Phi(s,0)."""
    cond = float(np.linalg.cond(phi_s))
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise ValueError(
            f"propagator at s = {s:.6g} is numerically non-invertible "
            f"(condition number {cond:.3e} exceeds {CONDITION_LIMIT:.1e}); "
            "the intermediate map is undefined"
        )
    return np.linalg.solve(phi_s.T, phi_t.T).T


def intermediate_map(
    gen: LindbladGenerator, s: float, t: float, steps: int | None = None
) -> SuperoperatorMatrix:
    """Map bridging times s and t of the evolution: Phi(t,0) composed with
    the inverse of Phi(s,0).

    This is the object whose complete positivity decides divisibility; it
    need not be CP even though both propagators are.
    """
    if not (0 <= s <= t):
        raise ValueError(f"require 0 <= s <= t, got s = {s}, t = {t}")
    phi_s = propagate_map(gen, 0.0, s, steps).matrix
    phi_t = propagate_map(gen, 0.0, t, steps).matrix
    return SuperoperatorMatrix(_solve_intermediate(phi_s, phi_t, s), (s, t))


def choi_of_superoperator(
    phi: SuperoperatorMatrix | np.ndarray,
    interval: tuple[float, float] | None = None,
) -> ChoiMatrix:
    """Choi state of a trace-preserving map given as a superoperator matrix.

    Refuses maps whose Choi trace deviates from 1 by more than 1e-6 (i.e. maps
    that are not trace preserving).
    """
    if isinstance(phi, SuperoperatorMatrix):
        interval = phi.interval if interval is None else interval
        mat = phi.matrix
    else:
        mat = np.asarray(phi, dtype=complex)
    d2 = mat.shape[0]
    d = int(round(np.sqrt(d2)))
    if mat.shape != (d2, d2) or d * d != d2:
        raise ValueError(f"superoperator must be d^2 x d^2, got shape {mat.shape}")
    c = _choi_from_superop(mat, d)
    trace_dev = abs(float(np.trace(c).real) - 1.0) + abs(float(np.trace(c).imag))
    if trace_dev > _CHOI_TRACE_ATOL:
        raise ValueError(
            f"map is not trace preserving: Choi trace deviation {trace_dev:.3e} "
            f"exceeds {_CHOI_TRACE_ATOL:.1e}"
        )
    return ChoiMatrix(_symmetrized_choi(c), interval if interval else (0.0, 0.0),
                      "finite-interval")


def cptp_diagnostics(c: ChoiMatrix | np.ndarray, tol: float = 1e-10) -> CPTPDiagnostics:
    """Complete-positivity and trace-preservation diagnostics of a Choi state.

    is_cp holds iff the minimum eigenvalue is >= -tol; is_tp holds iff the
    partial trace over the output subsystem is I/d within tol entrywise.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    mat = c.matrix if isinstance(c, ChoiMatrix) else np.asarray(c, dtype=complex)
    mat = require_hermitian(mat, atol=_CHOI_ASYMMETRY_ATOL)
    d = int(round(np.sqrt(mat.shape[0])))
    eigs = np.linalg.eigvalsh(mat)
    min_eig = float(eigs[0])
    trace_dev = abs(float(np.sum(eigs)) - 1.0)
    pt_dev = float(np.max(np.abs(partial_trace_output(mat, d) - np.eye(d) / d)))
    return CPTPDiagnostics(
        min_eigenvalue=min_eig,
        trace_deviation=trace_dev,
        partial_trace_deviation=pt_dev,
        is_cp=bool(min_eig >= -tol),
        is_tp=bool(pt_dev <= tol),
    )
