"""Reference solvers used to check the splitting.

Every lattice frequency ``j * lam`` is a multiple of ``lam``, so the problem
on the real line reduces exactly to one period ``[0, 2*pi/lam)``.  The
pseudospectral solver works on that period with the full discrete spectrum
(negative and zero wavenumbers included), which makes it a genuine test of
whether mass ever leaves the positive lattice.
"""

from __future__ import annotations

import math

import numpy as np

from .apseries import ApSeries, GridField, _lattice_power, evaluate, l1_norm
from .linprop import CglParams, linear_rate, linear_step

__all__ = [
    "BlowupError",
    "GridField",
    "NonContractionError",
    "grid_to_series",
    "picard_iterate",
    "pseudospectral_solve",
    "pseudospectral_trajectory",
    "sample",
    "spectral_leakage",
]

SCHEMES = ("etdrk4", "expeuler")


class BlowupError(ArithmeticError):
    """The reference solve produced non-finite values."""

    def __init__(self, message: str, last_stable_time: float):
        super().__init__(message)
        self.last_stable_time = last_stable_time


class NonContractionError(ArithmeticError):
    """Picard iterates grew instead of settling."""


def sample(u: ApSeries, N: int) -> GridField:
    """Evaluate ``u`` at ``x_k = 2*pi*k / (lam*N)``, ``k = 0..N-1``."""
    if N <= 2 * u.M:
        raise ValueError(f"N={N} too small for M={u.M}; need N > 2M")
    x = 2.0 * np.pi * np.arange(N) / (u.lam * N)
    return GridField(u.lam, evaluate(u, x))


def _spectrum(field: GridField) -> np.ndarray:
    return np.fft.fft(field.values, norm="forward")


def grid_to_series(field: GridField, M: int) -> ApSeries:
    """Lattice coefficients ``1..M`` of a sampled field."""
    if M >= field.N:
        raise ValueError(f"M={M} not resolved by N={field.N}")
    return ApSeries(field.lam, _spectrum(field)[1:M + 1])


def spectral_leakage(field: GridField, lam: float, M: int) -> float:
    """Fraction of spectral mass outside the lattice modes ``1..M``.

    Includes the mean and every negative-frequency bin.  A zero field has
    no leakage.
    """
    if not math.isclose(field.lam, lam, rel_tol=1e-14):
        raise ValueError(f"field period is 2*pi/{field.lam}, not 2*pi/{lam}")
    if not 1 <= M < field.N:
        raise ValueError(f"M must lie in 1..N-1, got {M}")
    mags = np.abs(_spectrum(field))
    total = math.fsum(mags.tolist())
    if total == 0.0:
        return 0.0
    on_lattice = math.fsum(mags[1:M + 1].tolist())
    return max(total - on_lattice, 0.0) / total


def _contour(Ldt: np.ndarray, points: int) -> np.ndarray:
    # Full unit circle around each L*dt: the rate is complex, so the
    # half-circle-plus-real-part shortcut for real operators does not apply.
    roots = np.exp(2j * np.pi * (np.arange(1, points + 1) - 0.5) / points)
    return Ldt[:, None] + roots[None, :]


def _etdrk4_coefficients(Ldt: np.ndarray, dt: float, contour: int = 64):
    # Contour-integral evaluation of the phi functions, stable at small |L dt|.
    z = _contour(Ldt, contour)
    ez = np.exp(z)
    ez2 = np.exp(z / 2)
    q = dt * ((ez2 - 1) / z).mean(axis=1)
    f1 = dt * ((-4 - z + ez * (4 - 3 * z + z ** 2)) / z ** 3).mean(axis=1)
    f2 = dt * ((2 + z + ez * (z - 2)) / z ** 3).mean(axis=1)
    f3 = dt * ((-4 - 3 * z - z ** 2 + ez * (4 - z)) / z ** 3).mean(axis=1)
    return q, f1, f2, f3


def _phi1(Ldt: np.ndarray, dt: float, contour: int = 64) -> np.ndarray:
    z = _contour(Ldt, contour)
    return dt * ((np.exp(z) - 1) / z).mean(axis=1)


class _Pseudospectral:
    """Periodic ETD integrator for ``u_t = L u + kappa u**n`` on ``N`` points."""

    def __init__(self, p: CglParams, lam: float, N: int, dt: float, scheme: str):
        if scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")
        self.p, self.N, self.dt, self.scheme = p, N, dt, scheme
        self.half = N // 2
        # Zero padding that keeps products of degree n alias-free on retained modes.
        self.padded = max(2, math.ceil((p.degree + 1) / 2)) * N
        wavenumber = np.fft.fftfreq(N, d=1.0 / N) * lam
        L = linear_rate(p, wavenumber)
        self.E = np.exp(L * dt)
        self.E2 = np.exp(L * dt / 2)
        if scheme == "etdrk4":
            self.q, self.f1, self.f2, self.f3 = _etdrk4_coefficients(L * dt, dt)
        else:
            self.phi = _phi1(L * dt, dt)
        self.keep = np.ones(N, dtype=bool)
        if N % 2 == 0:
            self.keep[self.half] = False

    def nonlinear(self, c: np.ndarray) -> np.ndarray:
        if self.p.kappa == 0:
            return np.zeros_like(c)
        P, h = self.padded, self.half
        cp = np.zeros(P, dtype=np.complex128)
        cp[:h] = c[:h]
        cp[P - h:] = c[self.N - h:]
        values = np.fft.ifft(cp, norm="forward")
        cw = np.fft.fft(self.p.kappa * values ** self.p.degree, norm="forward")
        out = np.zeros(self.N, dtype=np.complex128)
        out[:h] = cw[:h]
        out[self.N - h:] = cw[P - h:]
        return out * self.keep

    def step(self, c: np.ndarray) -> np.ndarray:
        if self.scheme == "expeuler":
            return self.E * c + self.phi * self.nonlinear(c)
        Nc = self.nonlinear(c)
        a = self.E2 * c + self.q * Nc
        Na = self.nonlinear(a)
        b = self.E2 * c + self.q * Na
        Nb = self.nonlinear(b)
        cc = self.E2 * a + self.q * (2 * Nb - Nc)
        Ncc = self.nonlinear(cc)
        return self.E * c + self.f1 * Nc + 2 * self.f2 * (Na + Nb) + self.f3 * Ncc


def _step_count(T: float, dt: float) -> int:
    if not T > 0 or not dt > 0:
        raise ValueError("T and dt must be positive")
    return max(1, int(math.ceil(T / dt - 1e-9)))


def pseudospectral_trajectory(u0: ApSeries, p: CglParams, T: float, N: int,
                              dt: float, record_every: int = 1,
                              scheme: str = "etdrk4") -> list[tuple[float, GridField]]:
    """Fields at ``t = 0`` and every ``record_every`` steps up to ``T``.

    ``dt`` is shrunk so that a whole number of steps lands on ``T``.

    Raises:
        BlowupError: when the state stops being finite.
    """
    need = 2 * (p.degree + 1) * u0.M
    if N < need:
        raise ValueError(f"N={N} below the dealiasing floor {need} for M={u0.M}")
    steps = _step_count(T, dt)
    dt = T / steps
    solver = _Pseudospectral(p, u0.lam, N, dt, scheme)
    c = _spectrum(sample(u0, N))
    out = [(0.0, GridField(u0.lam, np.fft.ifft(c, norm="forward")))]
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(steps):
            nxt = solver.step(c)
            if not np.all(np.isfinite(nxt)):
                raise BlowupError(f"non-finite state after step {k + 1}", k * dt)
            c = nxt
            if (k + 1) % record_every == 0 or k + 1 == steps:
                t = T if k + 1 == steps else (k + 1) * dt
                out.append((t, GridField(u0.lam, np.fft.ifft(c, norm="forward"))))
    return out


def pseudospectral_solve(u0: ApSeries, p: CglParams, T: float, N: int, dt: float,
                         scheme: str = "etdrk4") -> GridField:
    """Field at time ``T`` from the dealiased pseudospectral reference."""
    steps = _step_count(T, dt)
    return pseudospectral_trajectory(u0, p, T, N, dt, record_every=steps,
                                     scheme=scheme)[-1][1]


def picard_iterate(u0: ApSeries, p: CglParams, T: float, iters: int,
                   quad_nodes: int, nodes_per_panel: int = 8) -> ApSeries:
    """Fixed-point iteration of the mild (Duhamel) equation on ``[0, T]``.

    Iterates ``u <- U(t) u0 + int_0^t U(t - s) kappa u(s)**n ds`` with
    ``u(s)`` stored at composite Gauss-Legendre nodes. The semigroup is
    applied exactly; only the nonlinear term is interpolated in time,
    panel by panel, for integrals ending inside a panel.

    Raises:
        NonContractionError: if an iterate's l1 norm exceeds ten times the
            initial one.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    if iters < 0:
        raise ValueError("iters must be >= 0")
    G = nodes_per_panel if quad_nodes % nodes_per_panel == 0 else quad_nodes
    panels = quad_nodes // G
    H = T / panels
    xg, wg = np.polynomial.legendre.leggauss(G)
    starts = H * np.arange(panels)
    nodes = starts[:, None] + 0.5 * H * (xg[None, :] + 1.0)      # (P, G)

    lam, M, n, kappa = u0.lam, u0.M, p.degree, p.kappa
    rate = linear_rate(p, lam * np.arange(1, M + 1))              # (M,)
    a0 = u0.coeffs

    # Barycentric weights for Lagrange interpolation on the reference nodes.
    bw = np.array([1.0 / np.prod([xg[i] - xg[k] for k in range(G) if k != i])
                   for i in range(G)])

    def lagrange(y: np.ndarray) -> np.ndarray:
        diff = y[:, None] - xg[None, :]
        exact = np.isclose(diff, 0.0, atol=1e-15)
        diff[exact] = 1.0
        terms = bw[None, :] / diff
        mat = terms / terms.sum(axis=1, keepdims=True)
        rows = exact.any(axis=1)
        mat[rows] = exact[rows].astype(float)
        return mat

    def duhamel(t: float, g: np.ndarray) -> np.ndarray:
        """``int_0^t exp(rate (t - s)) g(s) ds`` from node values ``g``."""
        q = min(int(t // H), panels - 1)
        total = np.zeros(M, dtype=np.complex128)
        for r in range(q):
            kern = np.exp(np.outer(t - nodes[r], rate))            # (G, M)
            total += (0.5 * H * wg[:, None] * kern * g[r]).sum(axis=0)
        width = t - starts[q]
        if width > 0.0:
            s = starts[q] + 0.5 * width * (xg + 1.0)
            ref = 2.0 * (s - starts[q]) / H - 1.0
            g_sub = lagrange(ref) @ g[q]                             # (G, M)
            kern = np.exp(np.outer(t - s, rate))
            total += (0.5 * width * wg[:, None] * kern * g_sub).sum(axis=0)
        return total

    free = np.exp(nodes[..., None] * rate) * a0                     # (P, G, M)
    free_T = linear_step(u0, p, T).coeffs
    u_nodes = free.copy()
    u_T = free_T.copy()
    base = max(l1_norm(u0), np.finfo(float).tiny)
    if l1_norm(u0) == 0.0 or kappa == 0:
        return u0.with_coeffs(u_T)
    for _ in range(iters):
        g = kappa * _lattice_power(u_nodes, n)
        new_nodes = np.empty_like(u_nodes)
        for r in range(panels):
            for i in range(G):
                new_nodes[r, i] = free[r, i] + duhamel(nodes[r, i], g)
        u_T = free_T + duhamel(T, g)
        u_nodes = new_nodes
        grown = max(np.abs(u_nodes).sum(axis=-1).max(), np.abs(u_T).sum())
        if not np.isfinite(grown) or grown > 10.0 * base:
            raise NonContractionError(
                f"Picard iterate norm {grown:.3g} exceeds 10x initial {base:.3g}")
    return u0.with_coeffs(u_T)
