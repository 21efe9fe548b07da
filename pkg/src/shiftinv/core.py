"""Shared domain types: randomness streams, tail bounds, class parameters.

Conventions used throughout the package:

* Points are rows of ``(n, d)`` float arrays; a single point is a length-``d``
  vector.
* All total-variation distances are *un-halved*: ``dtv(f, g) = \\int |f - g|``
  with range ``[0, 2]``.
* Every stochastic operation receives an explicit ``numpy.random.Generator``.
  Streams are split with :func:`substream`, a counter-based scheme (Philox
  keyed by an integer path), so a fixed root seed reproduces results exactly
  regardless of how work is distributed.

A tail bound is a nonincreasing function ``g: [0, inf) -> [0, 1]`` with
``g(t) -> 0``; a density has ``g``-light tails when ``Pr[||x - mu|| > t]
<= g(t)`` for all ``t``.  The quantity ``I_g = \\int_0^inf g(sqrt(z)) dz``
bounds ``E||x - mu||^2`` and drives mean-estimation sample counts; it is
finite exactly when the tail decays faster than the Chebyshev rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import quad

from .errors import DivergenceError, DomainError, ParameterError

# Radius below which an admissible tail bound may not drop under 1/2.
TAIL_FLOOR_RADIUS = 0.1

_LATTICE_CAP_DEFAULT = 10**8


def substream(seed: int, *key: int) -> np.random.Generator:
    """Derive an independent generator from ``seed`` and an integer path.

    Distinct key paths give statistically independent Philox streams; the
    mapping is pure, so any worker can recreate any stream.
    """
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def worker_count() -> int:
    """Parallelism degree from ``SHIFTINV_WORKERS`` (default: all cores).

    Results never depend on this value; reductions follow a fixed chunk
    order.
    """
    import os

    raw = os.environ.get("SHIFTINV_WORKERS", "")
    if raw.strip():
        n = int(raw)
        if n < 1:
            raise ParameterError(f"SHIFTINV_WORKERS must be >= 1, got {n}")
        return n
    return os.cpu_count() or 1


def as_points(x, d: int | None = None) -> np.ndarray:
    """Validate and return an ``(n, d)`` float array of finite points."""
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    if pts.ndim != 2:
        raise DomainError(f"points must be a 2-D array, got shape {pts.shape}")
    if d is not None and pts.shape[1] != d:
        raise DomainError(f"expected dimension {d}, got {pts.shape[1]}")
    if pts.shape[1] < 1:
        raise DomainError("dimension must be >= 1")
    if not np.all(np.isfinite(pts)):
        raise DomainError("points must contain only finite coordinates")
    return pts


class DrawOracle:
    """Single-consumer i.i.d. sample source with draw accounting.

    ``fn(n, rng)`` must return ``n`` fresh points as an ``(n, d)`` array.
    The oracle owns its generator; total draws are tracked so experiments
    can report sample budgets.
    """

    def __init__(self, fn, rng: np.random.Generator, d: int):
        self._fn = fn
        self._rng = rng
        self.d = d
        self.total = 0

    def draw(self, n: int) -> np.ndarray:
        if n < 0:
            raise ParameterError("draw count must be nonnegative")
        self.total += n
        if n == 0:
            return np.empty((0, self.d))
        return as_points(self._fn(n, self._rng), d=self.d)


@dataclass(frozen=True)
class SampleSet:
    """An ordered batch of same-dimension points with seed provenance."""

    points: np.ndarray
    seed_provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "points", as_points(self.points))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def require_nonempty(self) -> "SampleSet":
        if self.n == 0:
            raise ParameterError("estimator called with an empty sample set")
        return self

    @staticmethod
    def from_csv(path) -> "SampleSet":
        """Read one point per row; an optional ``x1,...,xd`` header is skipped."""
        with open(path, "r", encoding="utf-8") as fh:
            first = fh.readline()
            skip = 1 if first and not _is_numeric_row(first) else 0
        pts = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2)
        return SampleSet(pts, seed_provenance=f"csv:{path}")

    def to_csv(self, path, header: bool = True) -> None:
        head = ",".join(f"x{j + 1}" for j in range(self.d)) if header else ""
        np.savetxt(path, self.points, delimiter=",", header=head, comments="")


def _is_numeric_row(line: str) -> bool:
    try:
        [float(tok) for tok in line.strip().split(",")]
        return True
    except ValueError:
        return False


@dataclass(frozen=True)
class TailBound:
    """Nonincreasing tail function ``g`` with closed-form inverse/integral.

    Kinds:

    * ``exponential(beta)``: ``g(t) = min(1, exp(1 - t/beta))``
    * ``gaussian(beta)``:    ``g(t) = exp(-(t/beta)^2)``
    * ``bounded(R)``:        ``g(t) = 1`` for ``t < R``, else ``0``
    * ``table``:             monotone piecewise-linear on a log-spaced grid,
      clamped to 1 left of the grid and 0 right of it.

    ``floor_enforced`` marks that the Remark-2.2-style admissibility floor
    (``min{r: g(r) <= 1/2} >= 1/10``) has been applied.
    """

    kind: str
    beta: float = 1.0
    radius: float = 1.0
    grid_t: np.ndarray | None = None
    grid_g: np.ndarray | None = None
    floor_enforced: bool = False

    def __post_init__(self):
        if self.kind not in ("exponential", "gaussian", "bounded", "table"):
            raise ParameterError(f"unknown tail kind {self.kind!r}")
        if self.kind in ("exponential", "gaussian") and self.beta <= 0:
            raise ParameterError("decay scale beta must be positive")
        if self.kind == "bounded" and self.radius <= 0:
            raise ParameterError("support radius must be positive")
        if self.kind == "table":
            t = np.asarray(self.grid_t, dtype=float)
            g = np.asarray(self.grid_g, dtype=float)
            if t.ndim != 1 or t.shape != g.shape or t.size < 2:
                raise ParameterError("table tail needs matching 1-D grids")
            if np.any(np.diff(t) <= 0):
                raise ParameterError("table abscissae must be increasing")
            if np.any(np.diff(g) > 1e-12) or g.min() < 0 or g.max() > 1:
                raise ParameterError("table values must be nonincreasing in [0,1]")
            object.__setattr__(self, "grid_t", t)
            object.__setattr__(self, "grid_g", g)

    # -- evaluation ------------------------------------------------------

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "exponential":
            base = np.minimum(1.0, np.exp(1.0 - t / self.beta))
        elif self.kind == "gaussian":
            base = np.exp(-((t / self.beta) ** 2))
        elif self.kind == "bounded":
            base = np.where(t < self.radius, 1.0, 0.0)
        else:
            base = np.interp(t, self.grid_t, self.grid_g, left=1.0, right=0.0)
        if self.floor_enforced:
            base = np.maximum(base, np.where(t < TAIL_FLOOR_RADIUS, 1.0, 0.0))
        return base if base.ndim else float(base)

    @staticmethod
    def exponential(beta: float = 1.0) -> "TailBound":
        return TailBound("exponential", beta=beta)

    @staticmethod
    def gaussian(beta: float = 1.0) -> "TailBound":
        return TailBound("gaussian", beta=beta)

    @staticmethod
    def bounded(radius: float) -> "TailBound":
        return TailBound("bounded", radius=radius)

    @staticmethod
    def table_from(fn, t_lo: float, t_hi: float, n: int = 512) -> "TailBound":
        """Tabulate a nonincreasing ``fn`` on a log-spaced grid."""
        t = np.geomspace(t_lo, t_hi, n)
        g = np.minimum(1.0, np.maximum.accumulate(np.asarray(fn(t), float)[::-1])[::-1])
        return TailBound("table", grid_t=t, grid_g=np.clip(g, 0.0, 1.0))


def tail_inverse(tail: TailBound, eps: float) -> float:
    """``inf{t : g(t) <= eps}`` for ``eps`` in (0, 1).

    Closed form for analytic kinds; bisection to absolute tolerance 1e-9 for
    tabulated ones.
    """
    if not 0.0 < eps < 1.0:
        raise DomainError(f"tail_inverse needs 0 < eps < 1, got {eps}")
    if tail.kind == "exponential":
        t = tail.beta * (1.0 - math.log(eps))
    elif tail.kind == "gaussian":
        t = tail.beta * math.sqrt(math.log(1.0 / eps))
    elif tail.kind == "bounded":
        t = tail.radius
    else:
        t = _bisect_inverse(tail, eps)
    if tail.floor_enforced:
        # the floor keeps g = 1 on [0, 1/10)
        t = max(t, TAIL_FLOOR_RADIUS)
    return max(t, 0.0)


def _bisect_inverse(tail: TailBound, eps: float, tol: float = 1e-9) -> float:
    lo, hi = 0.0, float(tail.grid_t[-1])
    if tail(hi) > eps:
        # clamped to 0 immediately right of the grid
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if tail(mid) <= eps:
            hi = mid
        else:
            lo = mid
    return hi


def tail_integral(tail: TailBound) -> float:
    """``I_g = \\int_0^inf g(sqrt(z)) dz``; closed form when available.

    Analytic kinds use closed forms (with exact corrections when the
    admissibility floor is active); tabulated tails are integrated piecewise
    exactly via ``I_g = \\int 2 t g(t) dt``.  Raises
    :class:`DivergenceError` when the decay is at or below the Chebyshev
    rate ``1/z``.
    """
    f2 = TAIL_FLOOR_RADIUS**2
    if tail.kind == "exponential":
        b = tail.beta
        if not tail.floor_enforced or b >= TAIL_FLOOR_RADIUS:
            # beta^2 head + 2 e beta^2 * int_1^inf u e^-u du = 5 beta^2
            return 5.0 * b**2
        return 2.0 * math.e * b * (TAIL_FLOOR_RADIUS + b) * math.exp(-TAIL_FLOOR_RADIUS / b) + f2
    if tail.kind == "gaussian":
        b = tail.beta
        if not tail.floor_enforced:
            return b**2
        return b**2 * math.exp(-f2 / b**2) + f2
    if tail.kind == "bounded":
        if not tail.floor_enforced:
            return tail.radius**2
        return max(tail.radius, TAIL_FLOOR_RADIUS) ** 2
    return _table_tail_integral(tail)


def _table_tail_integral(tail: TailBound) -> float:
    """Exact ``\\int 2 t g(t) dt`` for the piecewise-linear table kind."""
    t = np.asarray(tail.grid_t, float)
    g = np.asarray(tail.grid_g, float)
    lo = TAIL_FLOOR_RADIUS if tail.floor_enforced else 0.0
    # clamp region left of the grid has g = 1
    head_hi = max(t[0], lo)
    total = head_hi**2  # int_0^{head_hi} of max(g, floor) = 1 there
    for t0, t1, g0, g1 in zip(t[:-1], t[1:], g[:-1], g[1:]):
        a, b = max(t0, lo), t1
        if b <= a:
            continue
        m = (g1 - g0) / (t1 - t0)
        c = g0 - m * t0
        seg = (2.0 * m / 3.0) * (b**3 - a**3) + c * (b**2 - a**2)
        total += max(seg, 0.0)
    return float(total)


def _quadrature_tail_integral(tail: TailBound, rel_tol: float = 1e-6) -> float:
    integrand = lambda z: float(tail(math.sqrt(z)))
    if tail.kind == "table":
        z_max = float(tail.grid_t[-1]) ** 2
    else:
        z_max = max(4.0 * tail_inverse(tail, 1e-12) ** 2, 1.0)
    total, _ = quad(integrand, 0.0, z_max, epsrel=rel_tol, epsabs=0.0, limit=400)
    # divergence check: tail beyond z_max must vanish faster than 1/z
    probe = z_max
    tail_sum = 0.0
    for _ in range(60):
        seg, _ = quad(integrand, probe, 2 * probe, epsrel=rel_tol, epsabs=1e-14, limit=200)
        tail_sum += seg
        probe *= 2
        if seg < rel_tol * max(total, 1e-300) or seg < 1e-15:
            return total + tail_sum
        if seg > 0.35 * (total + tail_sum):
            break
    raise DivergenceError("tail integral I_g does not converge (decay <= 1/z)")


def enforce_tail_floor(tail: TailBound) -> TailBound:
    """Pointwise max of ``g`` with the unit step on [0, 1/10); idempotent.

    Never lowers ``g`` anywhere and guarantees ``min{r: g(r) <= 1/2} >= 1/10``.
    Tails already meeting the criterion are returned unchanged.
    """
    if tail.floor_enforced:
        return tail
    # compliant iff g stays above 1/2 strictly left of the floor radius
    probe = TAIL_FLOOR_RADIUS * (1.0 - 1e-12)
    if tail(probe) > 0.5:
        return tail
    return replace(tail, floor_enforced=True)


@dataclass(frozen=True)
class ClassParams:
    """Membership parameters of a shift-invariance class.

    ``c`` is the per-unit-shift TV rate (``SI(f, kappa) <= c`` for all
    ``kappa``), ``d`` the dimension, and ``tail`` the decay bound on
    ``Pr[||x - mu|| > t]``.
    """

    c: float
    d: int
    tail: TailBound

    def __post_init__(self):
        if self.c <= 0:
            raise ParameterError("shift-invariance constant c must be positive")
        if self.d < 1:
            raise ParameterError("dimension must be >= 1")

    @property
    def I_g(self) -> float:
        return tail_integral(self.tail)

    def g_inv(self, eps: float) -> float:
        return tail_inverse(self.tail, eps)
