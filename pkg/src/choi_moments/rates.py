"""Time-dependent dissipation rate models.

Units are dimensionless throughout: hbar = k_B = 1, and where a model carries
a frequency constant ``k`` the physical time enters as t' = k*t. A negative
rate at some instant is the signature exploited by the detection machinery;
the models themselves just evaluate gamma(t).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

__all__ = [
    "ConstantRate",
    "ExpCosRate",
    "LorentzianRate",
    "OhmicDephasingRate",
    "TabulatedRate",
    "RateModel",
    "rate_eval",
]

# Below this |x|, coth(x) is replaced by its leading series term 1/x.
_COTH_SERIES_CUTOFF = 1e-4
# Absolute quadrature target for the Ohmic rate integral.
_OHMIC_QUAD_ATOL = 1e-8
# Quadrature error estimates above this are treated as non-convergence.
_OHMIC_QUAD_REJECT = 1e-6


@dataclass(frozen=True)
class ConstantRate:
    """gamma(t) = value for all t."""

    value: float

    def evaluate(self, t: float) -> float:
        return float(self.value)


@dataclass(frozen=True)
class ExpCosRate:
    """gamma(t) = exp(-t') cos(t') with t' = k*t.

    Negative on (pi/2 + 2*pi*n, 3*pi/2 + 2*pi*n) in t'.
    """

    k: float = 1.0

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError(f"ExpCosRate requires k > 0, got k = {self.k}")

    def evaluate(self, t: float) -> float:
        tp = self.k * t
        return float(math.exp(-tp) * math.cos(tp))


@dataclass(frozen=True)
class LorentzianRate:
    """Dephasing rate of a qubit coupled to a Lorentzian reservoir.

    With g = sqrt(lam^2 - 2*gamma0*lam) and t' = k*t:

        gamma(t) = 2*lam*gamma0*sinh(t'g/2) / (g*cosh(t'g/2) + lam*sinh(t'g/2))

    For lam < 2*gamma0, g is imaginary and the same expression is evaluated on
    the trigonometric branch

        gamma(t) = 2*lam*gamma0*sin(t'|g|/2) / (|g|*cos(t'|g|/2) + lam*sin(t'|g|/2))

    which keeps the arithmetic real. Only on this branch can the rate turn
    negative, i.e. only when gamma0 > lam/2; it also has poles where the
    denominator vanishes, at which evaluation is refused.
    """

    lam: float
    gamma0: float
    k: float = 1.0

    def __post_init__(self):
        if self.lam <= 0 or self.gamma0 <= 0 or self.k <= 0:
            raise ValueError(
                "LorentzianRate requires lam > 0, gamma0 > 0, k > 0; got "
                f"lam = {self.lam}, gamma0 = {self.gamma0}, k = {self.k}"
            )

    def evaluate(self, t: float) -> float:
        tp = self.k * t
        g_sq = self.lam * self.lam - 2.0 * self.gamma0 * self.lam
        scale = max(1.0, self.lam * self.lam)
        if abs(g_sq) < 1e-12 * scale:
            # g -> 0 limit: gamma = lam*gamma0*t' / (1 + lam*t'/2)
            return float(self.lam * self.gamma0 * tp / (1.0 + 0.5 * self.lam * tp))
        if g_sq > 0:
            # Overdamped branch; tanh form avoids overflow of sinh/cosh.
            g = math.sqrt(g_sq)
            th = math.tanh(0.5 * tp * g)
            return float(2.0 * self.lam * self.gamma0 * th / (g + self.lam * th))
        g_abs = math.sqrt(-g_sq)
        x = 0.5 * tp * g_abs
        denom = g_abs * math.cos(x) + self.lam * math.sin(x)
        if abs(denom) < 1e-12 * math.hypot(g_abs, self.lam):
            raise ValueError(
                f"Lorentzian rate has a pole at t = {self._nearest_pole(t):.12g}; "
                f"evaluation at t = {t:.12g} is undefined"
            )
        return float(2.0 * self.lam * self.gamma0 * math.sin(x) / denom)

    def _nearest_pole(self, t: float) -> float:
        # Poles at t'|g|/2 = n*pi - arctan(|g|/lam), n = 1, 2, ...
        g_abs = math.sqrt(2.0 * self.gamma0 * self.lam - self.lam * self.lam)
        phase = math.atan2(g_abs, self.lam)
        n = max(1, round((0.5 * self.k * t * g_abs + phase) / math.pi))
        return (2.0 / (self.k * g_abs)) * (n * math.pi - phase)


@dataclass(frozen=True)
class OhmicDephasingRate:
    """Dephasing rate for an Ohmic reservoir, J(w) = w * exp(-w/omega_c).

    gamma(t) = integral_0^inf J(w) coth(w / (2 T)) sin(w t) / w dw, evaluated
    by adaptive quadrature on [0, 50*omega_c]; the exponential cutoff makes the
    truncation error negligible. At T = 0, coth -> 1 and the integral has the
    closed form omega_c^2 t / (1 + omega_c^2 t^2). Non-negative for every
    (omega_c, T), so this reservoir never drives the dynamics non-Markovian.
    """

    omega_c: float = 1.0
    temperature: float = 0.0

    def __post_init__(self):
        if self.omega_c <= 0:
            raise ValueError(f"OhmicDephasingRate requires omega_c > 0, got {self.omega_c}")
        if self.temperature < 0:
            raise ValueError(
                f"OhmicDephasingRate requires temperature >= 0, got {self.temperature}"
            )

    def evaluate(self, t: float) -> float:
        if t == 0.0:
            return 0.0
        wc, temp = self.omega_c, self.temperature

        def integrand(w: float) -> float:
            if w == 0.0:
                return 2.0 * temp * t if temp > 0 else 0.0
            if temp == 0.0:
                coth = 1.0
            else:
                x = w / (2.0 * temp)
                coth = 1.0 / x if x < _COTH_SERIES_CUTOFF else 1.0 / math.tanh(x)
            return math.exp(-w / wc) * coth * math.sin(w * t)

        value, abserr = quad(
            integrand, 0.0, 50.0 * wc,
            epsabs=_OHMIC_QUAD_ATOL, epsrel=_OHMIC_QUAD_ATOL, limit=500,
        )
        if abserr > _OHMIC_QUAD_REJECT:
            raise ValueError(
                f"Ohmic rate quadrature did not converge at t = {t:.6g}: "
                f"residual estimate {abserr:.3e} exceeds {_OHMIC_QUAD_REJECT:.1e}"
            )
        return float(value)


@dataclass(frozen=True)
class TabulatedRate:
    """User-supplied rate samples with linear interpolation between knots.

    Knot times must be strictly increasing. Extrapolation outside the knot
    range is refused rather than guessed.
    """

    knots: tuple[tuple[float, float], ...]

    def __post_init__(self):
        knots = tuple((float(t), float(g)) for t, g in self.knots)
        if len(knots) < 2:
            raise ValueError("TabulatedRate needs at least two knots")
        times = [t for t, _ in knots]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError(f"TabulatedRate knot times must be strictly increasing: {times}")
        object.__setattr__(self, "knots", knots)

    def evaluate(self, t: float) -> float:
        times = [k[0] for k in self.knots]
        if t < times[0] or t > times[-1]:
            raise ValueError(
                f"t = {t:.6g} is outside the tabulated range "
                f"[{times[0]:.6g}, {times[-1]:.6g}]; extrapolation is not supported"
            )
        return float(np.interp(t, times, [k[1] for k in self.knots]))


RateModel = (
    ConstantRate | ExpCosRate | LorentzianRate | OhmicDephasingRate | TabulatedRate
)


def rate_eval(model: RateModel, t: float) -> float:
    """Evaluate a rate model at time t >= 0."""
    if t < 0:
        raise ValueError(f"rate models are defined for t >= 0, got t = {t}")
    return model.evaluate(t)
