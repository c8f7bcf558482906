"""Flow of the polynomial field ``z' = kappa * z**n``.

Two forms are provided.  :func:`pointwise_flow` is the separable closed
form for a single complex value.  :func:`coefficient_flow` integrates the
induced lattice system ``a' = kappa * power(a, n)`` with classical RK4; it
is the canonical flow used by the splitting, and the closed form only
serves as its oracle.

The lattice system is lower triangular: mode ``m`` is driven by modes no
higher than ``m - (n - 1)``, so modes ``1..n-1`` never move and truncation
does not feed back into retained modes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .apseries import ApSeries, _lattice_power, l1_norm

__all__ = [
    "BLOWUP_THRESHOLD",
    "ClosedFormError",
    "FlowResult",
    "FlowStatus",
    "coefficient_flow",
    "default_substeps",
    "half_interval_flow",
    "pointwise_flow",
]

BLOWUP_THRESHOLD = 1e8
RADICAND_FLOOR = 1e-12
# Near blow-up the norm-scaled count explodes; past this cap RK4 is left to
# overshoot, which the threshold then reports.
MAX_DEFAULT_SUBSTEPS = 4096


class FlowStatus(str, enum.Enum):
    COMPLETED = "completed"
    BLOWUP = "blowup"


class ClosedFormError(ArithmeticError):
    """The principal-branch closed form is not continuous along the path."""


@dataclass(frozen=True)
class FlowResult:
    """Outcome of a flow.

    On completion ``state`` holds the value at the requested time.  On
    blow-up it holds the last finite state reached (``None`` for the closed
    form) and ``blowup_time_estimate`` is set.
    """

    state: Union[ApSeries, complex, None]
    status: FlowStatus = FlowStatus.COMPLETED
    blowup_time_estimate: float | None = None

    def __post_init__(self):
        if self.status is FlowStatus.BLOWUP and self.blowup_time_estimate is None:
            raise ValueError("blow-up result needs a time estimate")

    @property
    def blew_up(self) -> bool:
        return self.status is FlowStatus.BLOWUP


def _check_degree(n: int) -> int:
    if int(n) != n or n < 2:
        raise ValueError(f"degree must be an integer >= 2, got {n!r}")
    return int(n)


def _crosses_branch_cut(c: complex, t: float) -> bool:
    # Radicand path r(s) = 1 - c s, s in [0, t]; it can only meet the real
    # axis again when c is real.
    if c.imag != 0.0 or c.real <= 0.0:
        return False
    return c.real * t > 1.0


def pointwise_flow(z0: complex, kappa: complex, n: int, t: float) -> FlowResult:
    """Closed form ``z0 * (1 - (n-1) kappa z0**(n-1) t) ** (-1/(n-1))``.

    The radicand moves along a straight segment from 1.  Blow-up is reported
    when that segment passes within ``1e-12`` of the origin, with the time of
    closest approach as the estimate.

    Raises:
        ClosedFormError: if the radicand path crosses the negative real axis.
    """
    n = _check_degree(n)
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t!r}")
    z0, kappa = complex(z0), complex(kappa)
    if z0 == 0 or t == 0:
        return FlowResult(z0)
    c = (n - 1) * kappa * z0 ** (n - 1)
    if c == 0:
        return FlowResult(z0)
    s_closest = min(max(c.real / abs(c) ** 2, 0.0), t)
    if abs(1.0 - c * s_closest) < RADICAND_FLOOR:
        return FlowResult(None, FlowStatus.BLOWUP, c.real / abs(c) ** 2)
    if _crosses_branch_cut(c, t):
        raise ClosedFormError(f"radicand path crosses the branch cut (c={c!r}, t={t})")
    return FlowResult(z0 * (1.0 - c * t) ** (-1.0 / (n - 1)))


def default_substeps(u: ApSeries, kappa: complex, n: int, t: float) -> int:
    """``ceil(64 * t * |u|^(n-1) * |kappa|)``, clipped to ``[8, 4096]``."""
    size = 64.0 * t * l1_norm(u) ** (n - 1) * abs(kappa)
    if not size < MAX_DEFAULT_SUBSTEPS:
        return MAX_DEFAULT_SUBSTEPS
    return max(8, int(math.ceil(size)))


def _rk4(u: ApSeries, kappa: complex, n: int, duration: float, substeps: int,
         threshold: float) -> FlowResult:
    a = np.array(u.coeffs)
    if duration == 0 or kappa == 0 or u.M < n:
        return FlowResult(u)
    dt = duration / substeps
    half = dt / 2
    sixth = dt / 6
    lo = n - 1

    def field(x):
        return kappa * _lattice_power(x, n)[lo:]

    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(substeps):
            k1 = field(a)
            b = a.copy()
            b[lo:] = a[lo:] + half * k1
            k2 = field(b)
            b[lo:] = a[lo:] + half * k2
            k3 = field(b)
            b[lo:] = a[lo:] + dt * k3
            k4 = field(b)
            b[lo:] = a[lo:] + sixth * (k1 + 2 * k2 + 2 * k3 + k4)
            norm = np.abs(b).sum()
            if not math.isfinite(norm) or norm > threshold:
                return FlowResult(u.with_coeffs(a), FlowStatus.BLOWUP,
                                  (step + 1) * dt)
            a = b
    return FlowResult(u.with_coeffs(a))


def coefficient_flow(u: ApSeries, kappa: complex, n: int, t: float,
                     substeps: int | None = None,
                     threshold: float = BLOWUP_THRESHOLD) -> FlowResult:
    """Integrate ``a' = kappa * power(a, n)`` over ``[0, t]`` with RK4.

    Modes ``1..n-1`` are copied through untouched.  Blow-up is declared when
    the l1 norm exceeds ``threshold`` or a coefficient stops being finite;
    the state returned is the last one that passed the check.
    """
    n = _check_degree(n)
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t!r}")
    kappa = complex(kappa)
    if substeps is None:
        substeps = default_substeps(u, kappa, n, t)
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    return _rk4(u, kappa, n, t, substeps, threshold)


def half_interval_flow(u: ApSeries, kappa: complex, n: int, h: float,
                       substeps: int | None = None,
                       threshold: float = BLOWUP_THRESHOLD) -> FlowResult:
    """Flow of the doubled field ``2 * kappa * z**n`` over ``h / 2``.

    This is the nonlinear half of a toggled splitting step.  Rescaling time
    makes it the same map as ``coefficient_flow(u, kappa, n, h)``; the
    blow-up estimate is reported on the doubled field's own clock, so it is
    half the one reported by the undoubled form.
    """
    n = _check_degree(n)
    if h < 0:
        raise ValueError(f"h must be >= 0, got {h!r}")
    kappa = complex(kappa)
    if substeps is None:
        substeps = default_substeps(u, kappa, n, h)
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    return _rk4(u, 2 * kappa, n, h / 2, substeps, threshold)
