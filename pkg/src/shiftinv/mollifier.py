"""The compactly supported smooth bump and its scaled product form.

``b(x) = c0 * exp(-x^2 / (1 - x^2))`` on (-1, 1), zero outside.  The
normalizer ``c0`` is computed once by quadrature so that ``b`` integrates to
exactly 1 (to quadrature tolerance); it comes out to about 0.82857.

The d-dimensional mollifier at scale ``gamma`` is the product density
``b_{d,gamma}(x) = gamma^{-d} * prod_j b(x_j / gamma)``, supported in
``[-gamma, gamma]^d`` and hence in the ball of radius ``gamma * sqrt(d)``.
Convolving a density with it damps Fourier coefficients at frequencies
``xi`` like ``exp(-sqrt(gamma * ||xi||_inf))`` while displacing mass by at
most ``gamma * sqrt(d)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, ParameterError


def _bump_unnormalized(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    xi = x[inside]
    out[inside] = np.exp(-(xi * xi) / (1.0 - xi * xi))
    return out


@lru_cache(maxsize=1)
def bump_normalizer() -> float:
    """``c0`` with ``int b = 1``, via adaptive quadrature (rtol 1e-10)."""
    val, _ = quad(
        lambda x: float(np.exp(-x * x / (1.0 - x * x))) if abs(x) < 1 else 0.0,
        -1.0,
        1.0,
        epsabs=0.0,
        epsrel=1e-12,
        limit=200,
    )
    return 1.0 / val


def eval_b(x) -> np.ndarray | float:
    """Density of the bump at ``x``; total function, zero for |x| >= 1."""
    out = bump_normalizer() * _bump_unnormalized(x)
    return out if np.ndim(x) else float(out)


def sample_b(rng: np.random.Generator, size: int = 1) -> np.ndarray:
    """Exact draws from ``b`` by rejection against U([-1,1] x [0,c0]).

    Acceptance probability is ``1 / (2 c0)``, about 0.60, so the loop
    terminates almost surely with expected ``2 c0`` proposals per draw.
    """
    c0 = bump_normalizer()
    out = np.empty(size, dtype=float)
    filled = 0
    while filled < size:
        k = max(size - filled, 1)
        # modest oversampling keeps the expected number of rounds near 1
        k = int(k * 2 * c0 * 1.15) + 16
        u = rng.uniform(-1.0, 1.0, size=k)
        v = rng.uniform(0.0, c0, size=k)
        acc = u[v <= c0 * _bump_unnormalized(u)]
        take = min(acc.size, size - filled)
        out[filled : filled + take] = acc[:take]
        filled += take
    return out


@dataclass(frozen=True)
class MollifierParams:
    """Dimension and scale of the product mollifier; ``0 < gamma <= 1/2``."""

    d: int
    gamma: float

    def __post_init__(self):
        if self.d < 1:
            raise ParameterError("dimension must be >= 1")
        if not 0.0 < self.gamma <= 0.5:
            raise ParameterError(f"gamma must lie in (0, 1/2], got {self.gamma}")

    @property
    def sup_density(self) -> float:
        """``||b_{d,gamma}||_inf = (c0/gamma)^d``, attained at the origin."""
        return (bump_normalizer() / self.gamma) ** self.d


def sample_b_dgamma(params: MollifierParams, rng: np.random.Generator, size: int = 1) -> np.ndarray:
    """``(size, d)`` draws from ``b_{d,gamma}``: independent scaled bumps."""
    flat = sample_b(rng, size * params.d)
    return params.gamma * flat.reshape(size, params.d)


def fourier_bound(xi, gamma: float) -> float:
    """Magnitude bound ``exp(-sqrt(g*t)) * (g*t)^(-3/4)`` with ``t = ||xi||_inf``.

    Undefined at ``xi = 0`` (the transform there is exactly 1).
    """
    xi_arr = np.atleast_1d(np.asarray(xi))
    t = float(np.max(np.abs(xi_arr)))
    if t == 0:
        raise DomainError("fourier_bound is undefined at xi = 0")
    gt = gamma * t
    return float(np.exp(-np.sqrt(gt)) * gt ** (-0.75))


def fourier_b_numeric(xi: float) -> complex:
    """``\\int_{-1}^{1} b(x) e^{-i pi xi x} dx`` by adaptive quadrature.

    Only used by tests to validate the analytic decay bounds.  ``b`` is even,
    so the imaginary part vanishes identically and the transform is real and
    even in ``xi``.
    """
    c0 = bump_normalizer()
    w = np.pi * float(xi)
    f = lambda x: float(np.exp(-x * x / (1.0 - x * x))) if abs(x) < 1 else 0.0
    if xi == 0:
        re, _ = quad(f, -1.0, 1.0, epsabs=1e-10, limit=400)
        return complex(c0 * re, 0.0)
    re, _ = quad(f, -1.0, 1.0, weight="cos", wvar=w, epsabs=1e-10, limit=400)
    im, _ = quad(f, -1.0, 1.0, weight="sin", wvar=-w, epsabs=1e-10, limit=400)
    return complex(c0 * re, c0 * im)
