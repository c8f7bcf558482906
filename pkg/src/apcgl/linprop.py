"""Linear semigroup of ``u_t = (alpha + i beta) u_xx + gamma u`` on lattice series.

On the lattice ``{j * lam}`` the semigroup is diagonal: mode ``j`` is
multiplied by ``exp((-(j lam)^2 (alpha + i beta) + gamma) t)``.  The kernel
utilities below integrate the complex heat kernel numerically and are used
only to check that multiplier independently.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .apseries import ApSeries

__all__ = [
    "CglParams",
    "QuadratureError",
    "gaussian_integral",
    "kernel_convolve_mode",
    "kernel_eval",
    "linear_multiplier",
    "linear_rate",
    "linear_step",
]


class QuadratureError(RuntimeError):
    """Kernel quadrature failed to reach its tolerance."""


@dataclass(frozen=True)
class CglParams:
    """Constants of ``u_t = (alpha + i beta) u_xx + gamma u + kappa u**degree``.

    ``kappa`` defaults to ``-(a + i b)``, the sign used for the nonlinear
    flow ``z' = -(a + i b) z**n``.  Pass ``kappa=a + 1j*b`` explicitly to get
    the ``+(a + i b)`` sign of the full equation instead.
    """

    alpha: float
    beta: float
    gamma: float
    a: float
    b: float
    degree: int = 3
    kappa: complex | None = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha!r}")
        if not self.beta >= 0:
            raise ValueError(f"beta must be >= 0, got {self.beta!r}")
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma!r}")
        if not self.a > 0:
            raise ValueError(f"a must be > 0, got {self.a!r}")
        if not self.b >= 0:
            raise ValueError(f"b must be >= 0, got {self.b!r}")
        if int(self.degree) != self.degree or self.degree < 2:
            raise ValueError(f"degree must be an integer >= 2, got {self.degree!r}")
        object.__setattr__(self, "degree", int(self.degree))
        kappa = -(self.a + 1j * self.b) if self.kappa is None else complex(self.kappa)
        object.__setattr__(self, "kappa", kappa)

    @property
    def diffusion(self) -> complex:
        return complex(self.alpha, self.beta)

    def with_kappa(self, kappa: complex) -> CglParams:
        return CglParams(self.alpha, self.beta, self.gamma, self.a, self.b,
                         self.degree, kappa)


def linear_rate(p: CglParams, wavenumber):
    """Growth rate ``-(k)^2 (alpha + i beta) + gamma`` for wavenumber ``k``."""
    k = np.asarray(wavenumber, dtype=float)
    return -(k * k) * p.diffusion + p.gamma


def linear_multiplier(p: CglParams, lam: float, j, t: float):
    """Multiplier applied to mode ``j`` by ``U(t)``."""
    return np.exp(linear_rate(p, np.asarray(j) * lam) * t)


def linear_step(u: ApSeries, p: CglParams, t: float) -> ApSeries:
    """Apply ``U(t)`` exactly, mode by mode."""
    if t < 0:
        raise ValueError(f"linear semigroup is forward-only, got t={t!r}")
    if t == 0:
        return u
    j = np.arange(1, u.M + 1)
    return u.with_coeffs(u.coeffs * linear_multiplier(p, u.lam, j, t))


def gaussian_integral(a: complex, b: complex, c: complex) -> complex:
    """Closed form of ``int_R exp(-a x^2 - b x + c) dx`` for ``Re(a) > 0``."""
    a, b, c = complex(a), complex(b), complex(c)
    if not a.real > 0:
        raise ValueError(f"integral diverges unless Re(a) > 0, got a={a!r}")
    return cmath.exp(b * b / (4 * a) + c) * math.sqrt(math.pi) / cmath.sqrt(a)


def kernel_eval(p: CglParams, t: float, x):
    """Complex heat kernel ``G_t(x)``; principal branch for the prefactor root."""
    if not t > 0:
        raise ValueError(f"kernel defined for t > 0, got t={t!r}")
    d = 4.0 * t * p.diffusion
    pref = 1.0 / cmath.sqrt(math.pi * d)
    x = np.asarray(x, dtype=float)
    out = pref * np.exp(-(x * x) / d + p.gamma * t)
    return complex(out) if out.ndim == 0 else out


def kernel_halfwidth(p: CglParams, t: float) -> float:
    # |G_t| ~ exp(-alpha y^2 / (4 t (alpha^2 + beta^2))); e^-50 at the cut.
    return 10.0 * math.sqrt(2.0 * t * (p.alpha ** 2 + p.beta ** 2) / p.alpha)


def _panel_rule(lo: float, hi: float, panels: int, order: int):
    xg, wg = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    return nodes, weights


def kernel_convolve_mode(p: CglParams, t: float, j: int, lam: float,
                         tol: float = 1e-10, order: int = 16,
                         max_panels: int = 1 << 14) -> complex:
    """Multiplier of ``exp(i j lam x)`` under convolution with ``G_t``.

    Integrates ``G_t(y) exp(-i j lam y)`` over ``|y| <= kernel_halfwidth``
    with composite Gauss-Legendre panels, doubling the panel count until two
    successive estimates agree to ``tol``.

    Raises:
        QuadratureError: if the panel count would exceed ``max_panels``.
    """
    if not t > 0:
        raise ValueError(f"kernel defined for t > 0, got t={t!r}")
    if j < 1:
        raise ValueError(f"mode index must be >= 1, got {j}")
    L = kernel_halfwidth(p, t)
    omega = j * lam
    # Start with a few panels per oscillation of the carrier and of the chirp.
    chirp = p.beta * L / (2.0 * t * (p.alpha ** 2 + p.beta ** 2))
    panels = max(8, int(math.ceil(2 * L * (omega + chirp) / (2 * math.pi))))
    previous = None
    while panels <= max_panels:
        y, w = _panel_rule(-L, L, panels, order)
        value = complex(np.sum(w * kernel_eval(p, t, y) * np.exp(-1j * omega * y)))
        if previous is not None and abs(value - previous) <= tol:
            return value
        previous = value
        panels *= 2
    raise QuadratureError(
        f"kernel quadrature did not converge for j={j}, lam={lam}, t={t}")
