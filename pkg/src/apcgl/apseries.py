"""Truncated almost periodic series on a one-sided frequency lattice.

An :class:`ApSeries` stores the coefficients ``a_1 .. a_M`` of

    u(x) = sum_{j=1}^{M} a_j exp(i j lam x)

Position ``p`` of the coefficient array holds ``a_{p+1}``; there is no
constant mode. Because every index is at least one, the product of two
series only raises indices: mode ``m`` of a product uses indices strictly
below ``m``. Truncating at ``M`` is therefore exact for the retained modes
and no dealiasing is needed in coefficient space.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ApSeries",
    "GridField",
    "ParameterMismatchError",
    "UnresolvedFrequencyError",
    "bohr_coefficient",
    "cauchy_product",
    "evaluate",
    "l1_norm",
    "power",
]


class ParameterMismatchError(ValueError):
    """Two series live on different lattices or truncations."""


class UnresolvedFrequencyError(ValueError):
    """A requested mode is not resolved by the sampling grid."""


def _frozen_complex(values) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ApSeries:
    """Coefficients ``a_1..a_M`` of a series on the lattice ``{j * lam}``."""

    lam: float
    coeffs: np.ndarray

    def __post_init__(self):
        lam = float(self.lam)
        if not lam > 0.0:
            raise ValueError(f"lambda must be positive, got {self.lam!r}")
        coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if coeffs.ndim != 1 or coeffs.size < 1:
            raise ValueError("coeffs must be a non-empty 1-D sequence")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "coeffs", _frozen_complex(coeffs))

    @property
    def M(self) -> int:
        return int(self.coeffs.size)

    def __len__(self):
        return self.M

    def __getitem__(self, j: int) -> complex:
        """Coefficient ``a_j`` using the lattice index (``j >= 1``)."""
        if not 1 <= j <= self.M:
            raise IndexError(f"mode {j} outside 1..{self.M}")
        return complex(self.coeffs[j - 1])

    @classmethod
    def zeros(cls, lam: float, M: int) -> ApSeries:
        return cls(lam, np.zeros(M, dtype=np.complex128))

    @classmethod
    def from_modes(cls, lam: float, M: int, modes: dict[int, complex]) -> ApSeries:
        """Build a series from a sparse ``{j: a_j}`` mapping."""
        coeffs = np.zeros(M, dtype=np.complex128)
        for j, value in modes.items():
            if not 1 <= j <= M:
                raise ValueError(f"mode index {j} outside 1..{M}")
            coeffs[j - 1] = value
        return cls(lam, coeffs)

    def with_coeffs(self, coeffs) -> ApSeries:
        return ApSeries(self.lam, coeffs)

    def truncate(self, M: int) -> ApSeries:
        """Keep modes ``1..M``, zero-extending when ``M`` exceeds the current order."""
        if M < 1:
            raise ValueError("truncation order must be >= 1")
        out = np.zeros(M, dtype=np.complex128)
        keep = min(M, self.M)
        out[:keep] = self.coeffs[:keep]
        return ApSeries(self.lam, out)

    def scaled(self, factor: complex) -> ApSeries:
        return ApSeries(self.lam, factor * self.coeffs)

    def __add__(self, other: ApSeries) -> ApSeries:
        _check_compatible(self, other)
        return ApSeries(self.lam, self.coeffs + other.coeffs)

    def __sub__(self, other: ApSeries) -> ApSeries:
        _check_compatible(self, other)
        return ApSeries(self.lam, self.coeffs - other.coeffs)

    def __eq__(self, other):
        if not isinstance(other, ApSeries):
            return NotImplemented
        return self.lam == other.lam and np.array_equal(self.coeffs, other.coeffs)

    __hash__ = None

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs],
        }

    @classmethod
    def from_dict(cls, data: dict) -> ApSeries:
        coeffs = [complex(re, im) for re, im in data["coeffs"]]
        return cls(float(data["lambda"]), coeffs)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> ApSeries:
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class GridField:
    """Samples of a ``2*pi/lam``-periodic field at ``x_k = 2*pi*k / (lam*N)``."""

    lam: float
    values: np.ndarray

    def __post_init__(self):
        lam = float(self.lam)
        if not lam > 0.0:
            raise ValueError(f"lambda must be positive, got {self.lam!r}")
        values = np.asarray(self.values, dtype=np.complex128)
        if values.ndim != 1 or values.size < 1:
            raise ValueError("values must be a non-empty 1-D sequence")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "values", _frozen_complex(values))

    @property
    def N(self) -> int:
        return int(self.values.size)

    @property
    def x(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.N) / (self.lam * self.N)

    def to_csv(self, path) -> None:
        """Write ``k, x_k, re_u, im_u`` rows."""
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("k,x_k,re_u,im_u\n")
            for k, (xk, v) in enumerate(zip(self.x, self.values)):
                fh.write(f"{k},{xk:.17g},{v.real:.17g},{v.imag:.17g}\n")


def _check_compatible(u: ApSeries, v: ApSeries) -> None:
    if u.lam != v.lam:
        raise ParameterMismatchError(f"lattice mismatch: lambda {u.lam!r} vs {v.lam!r}")
    if u.M != v.M:
        raise ParameterMismatchError(f"truncation mismatch: M {u.M} vs {v.M}")


def l1_norm(u: ApSeries) -> float:
    """Return ``sum_j |a_j|`` with compensated summation."""
    return math.fsum(np.abs(u.coeffs).tolist())


def evaluate(u: ApSeries, x):
    """Evaluate ``sum_j a_j exp(i j lam x)`` at a scalar or array ``x``."""
    x_arr = np.asarray(x, dtype=float)
    j = np.arange(1, u.M + 1)
    phases = np.exp(1j * u.lam * np.multiply.outer(x_arr, j))
    out = phases @ u.coeffs
    if x_arr.ndim == 0:
        return complex(out)
    return out


def _lattice_convolve(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Truncated one-sided product along the last axis.

    ``w[..., m-1] = sum_{j+k=m} u[..., j-1] * v[..., k-1]`` for ``m <= M``.

    The outer product is laid out in a ``(M, 2M)`` zero-padded buffer and
    re-read with row length ``2M - 1``, which shifts row ``j`` right by ``j``
    so that anti-diagonals become columns.  Summing down the columns adds
    each output's terms in increasing ``j`` followed by exact zeros, so the
    retained modes are bit-identical under any larger truncation.
    """
    M = u.shape[-1]
    lead = np.broadcast_shapes(u.shape[:-1], v.shape[:-1])
    buf = np.zeros(lead + (M, 2 * M), dtype=np.complex128)
    np.multiply(u[..., :, None], v[..., None, :], out=buf[..., :M])
    skew = buf.reshape(lead + (2 * M * M,))[..., :M * (2 * M - 1)]
    skew = skew.reshape(lead + (M, 2 * M - 1))
    w = np.zeros(lead + (M,), dtype=np.complex128)
    w[..., 1:] = skew[..., :M - 1].sum(axis=-2)
    return w


def _lattice_power(u: np.ndarray, n: int) -> np.ndarray:
    w = _lattice_convolve(u, u)
    for _ in range(n - 2):
        w = _lattice_convolve(u, w)
    return w


def cauchy_product(u: ApSeries, v: ApSeries) -> ApSeries:
    """Product of two series, exact on the retained modes ``1..M``."""
    _check_compatible(u, v)
    return ApSeries(u.lam, _lattice_convolve(u.coeffs, v.coeffs))


def power(u: ApSeries, n: int) -> ApSeries:
    """``u**n`` by iterated pairwise products; modes below ``n`` vanish."""
    if int(n) != n or n < 2:
        raise ValueError(f"power degree must be an integer >= 2, got {n!r}")
    return ApSeries(u.lam, _lattice_power(u.coeffs, int(n)))


def bohr_coefficient(samples: GridField, j: int) -> complex:
    """Discrete Bohr mean ``(1/N) sum_k u(x_k) exp(-i j lam x_k)``.

    On a grid covering exactly one period the pairing with
    ``exp(-i j lam x)`` plays the role of complex conjugation, so no
    conjugate is applied to the samples themselves.
    """
    N = samples.N
    if j < 1:
        raise ValueError(f"mode index must be >= 1, got {j}")
    if j >= N:
        raise UnresolvedFrequencyError(f"mode {j} not resolved by N={N} samples")
    k = np.arange(N)
    kernel = np.exp(-2j * np.pi * ((j * k) % N) / N)
    return complex(np.dot(samples.values, kernel) / N)
