"""Ground-truth distribution zoo, contamination, and SI/TV measurement.

Every zoo member carries an exact sampler, a vectorized pdf, its true
mean/covariance, and a declared class membership ``(c, tail)`` that the
test suite validates empirically.  TV distances are un-halved
(``\\int |f - g|``, range [0, 2]); shift-invariance is measured as

    SI(f, v, kappa) = (1/kappa) * max over a 32-point grid of kappa' in
    [0, kappa] of \\int |f(x + kappa' v) - f(x)| dx

by tensor-grid quadrature on the declared support box padded by kappa.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from .core import ClassParams, DrawOracle, TailBound, as_points
from .errors import CoverageError, DomainError, ParameterError

SI_GRID_POINTS = 32


@dataclass(frozen=True)
class GroundTruth:
    """A named density with sampler, optional pdf, and declared class."""

    name: str
    d: int
    sampler: object  # fn(n, rng) -> (n, d)
    pdf: object | None
    mean: np.ndarray
    cov: np.ndarray
    klass: ClassParams | None
    box: tuple[np.ndarray, np.ndarray]
    log_concave: bool = False
    in_half_ball: bool = False

    def oracle(self, rng: np.random.Generator) -> DrawOracle:
        return DrawOracle(self.sampler, rng, self.d)

    def density(self, points) -> np.ndarray:
        if self.pdf is None:
            raise DomainError(f"zoo member {self.name!r} has no pdf")
        return self.pdf(as_points(points, self.d))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return as_points(self.sampler(n, rng), self.d)


def contaminate(f: GroundTruth, f_noise: GroundTruth, eps: float) -> GroundTruth:
    """Huber mixture ``(1-eps) f + eps f_noise`` with a faithful sampler."""
    if f.d != f_noise.d:
        raise ParameterError(f"dimension mismatch: {f.d} vs {f_noise.d}")
    if not 0.0 <= eps <= 1.0:
        raise ParameterError(f"contamination level must be in [0,1], got {eps}")
    if eps == 0.0:
        return f
    if eps == 1.0:
        return f_noise

    def sampler(n, rng):
        take_noise = rng.random(n) < eps
        clean = f.sample(n, rng)
        noisy = f_noise.sample(n, rng)
        return np.where(take_noise[:, None], noisy, clean)

    pdf = None
    if f.pdf is not None and f_noise.pdf is not None:
        pdf = lambda pts: (1 - eps) * f.pdf(pts) + eps * f_noise.pdf(pts)
    lo = np.minimum(f.box[0], f_noise.box[0])
    hi = np.maximum(f.box[1], f_noise.box[1])
    mean = (1 - eps) * f.mean + eps * f_noise.mean
    return GroundTruth(
        name=f"{f.name}+{eps:g}*{f_noise.name}",
        d=f.d,
        sampler=sampler,
        pdf=pdf,
        mean=mean,
        cov=np.full((f.d, f.d), np.nan),
        klass=None,
        box=(lo, hi),
        in_half_ball=f.in_half_ball and f_noise.in_half_ball,
    )


# ---------------------------------------------------------------------------
# quadrature oracles
# ---------------------------------------------------------------------------


def _grid_axes(lo, hi, n_per_axis):
    axes, steps = [], []
    for a, b, n in zip(lo, hi, n_per_axis):
        step = (b - a) / n
        axes.append(a + (np.arange(n) + 0.5) * step)
        steps.append(step)
    return axes, steps


def grid_points(lo, hi, n_per_axis):
    """Midpoint tensor grid; returns ``(points, cell_volume)``."""
    axes, steps = _grid_axes(lo, hi, n_per_axis)
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    return pts, float(np.prod(steps))


def default_grid(d: int) -> int:
    """Per-axis resolution keeping the total budget at >= 2^12 points."""
    return {1: 1 << 13, 2: 1 << 8, 3: 1 << 4}.get(d, 8)


def estimate_tv(
    a,
    b,
    box,
    mode: str = "grid",
    n_per_axis: int | None = None,
    n_mc: int = 200_000,
    rng: np.random.Generator | None = None,
    nominal_mass: tuple[float, float] = (1.0, 1.0),
    check_coverage: bool = True,
    coverage_tol: float = 1e-3,
):
    """Un-halved TV between two density evaluators over ``box``.

    Grid mode returns a float; Monte-Carlo mode returns ``(tv, stderr)``.
    Raises :class:`CoverageError` when the box misses more than
    ``coverage_tol`` of either density's nominal mass.
    """
    lo = np.atleast_1d(np.asarray(box[0], float))
    hi = np.atleast_1d(np.asarray(box[1], float))
    d = lo.shape[0]
    if mode == "grid":
        if d > 3:
            raise ParameterError("grid mode supports d <= 3")
        n = n_per_axis or default_grid(d)
        pts, vol = grid_points(lo, hi, [n] * d)
        va, vb = np.asarray(a(pts), float), np.asarray(b(pts), float)
        if check_coverage:
            _check_coverage(va.sum() * vol, vb.sum() * vol, nominal_mass, coverage_tol)
        return float(np.abs(va - vb).sum() * vol)
    if mode != "montecarlo":
        raise ParameterError(f"unknown TV mode {mode!r}")
    rng = np.random.default_rng(0) if rng is None else rng
    pts = rng.uniform(lo, hi, size=(n_mc, d))
    volume = float(np.prod(hi - lo))
    vals = np.abs(np.asarray(a(pts), float) - np.asarray(b(pts), float)) * volume
    if check_coverage:
        ma = float(np.mean(np.asarray(a(pts), float)) * volume)
        mb = float(np.mean(np.asarray(b(pts), float)) * volume)
        slack = 3.0 * volume / math.sqrt(n_mc)
        _check_coverage(ma, mb, nominal_mass, coverage_tol + slack)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n_mc))


def _check_coverage(mass_a, mass_b, nominal, tol):
    if nominal[0] - mass_a > tol or nominal[1] - mass_b > tol:
        raise CoverageError(
            f"integration box misses mass: got ({mass_a:.6f}, {mass_b:.6f}), "
            f"nominal {nominal}"
        )


def estimate_si(
    gt: GroundTruth,
    v,
    kappa: float,
    n_per_axis: int | None = None,
) -> float:
    """Grid-quadrature shift-invariance of ``gt`` in direction ``v``."""
    if gt.pdf is None:
        raise DomainError(f"estimate_si needs a pdf; {gt.name!r} has none")
    if kappa <= 0:
        raise ParameterError("kappa must be positive")
    v = np.asarray(v, float).ravel()
    norm = np.linalg.norm(v)
    if not math.isclose(norm, 1.0, rel_tol=1e-9):
        raise ParameterError("direction must be a unit vector")
    lo = np.asarray(gt.box[0], float) - kappa
    hi = np.asarray(gt.box[1], float) + kappa
    n = n_per_axis or default_grid(gt.d)
    pts, vol = grid_points(lo, hi, [n] * gt.d)
    base = gt.pdf(pts)
    worst = 0.0
    for kp in np.linspace(0.0, kappa, SI_GRID_POINTS):
        if kp == 0.0:
            continue
        shifted = gt.pdf(pts + kp * v)
        worst = max(worst, float(np.abs(shifted - base).sum() * vol))
    return worst / kappa


# ---------------------------------------------------------------------------
# the zoo
# ---------------------------------------------------------------------------


def _gauss(name, mean, cov, c, tail, **kw):
    mean = np.atleast_1d(np.asarray(mean, float))
    cov = np.atleast_2d(np.asarray(cov, float))
    d = mean.shape[0]
    dist = stats.multivariate_normal(mean=mean, cov=cov)
    chol = np.linalg.cholesky(cov)
    sig = np.sqrt(np.diag(cov))
    lo, hi = mean - 9 * sig, mean + 9 * sig
    return GroundTruth(
        name=name,
        d=d,
        sampler=lambda n, rng: mean + rng.standard_normal((n, d)) @ chol.T,
        pdf=lambda pts: np.asarray(dist.pdf(pts), float).reshape(pts.shape[0] if pts.ndim > 1 else 1),
        mean=mean,
        cov=cov,
        klass=ClassParams(c=c, d=d, tail=tail),
        box=(lo, hi),
        log_concave=True,
        **kw,
    )


def _uniform_interval() -> GroundTruth:
    return GroundTruth(
        name="uniform-interval",
        d=1,
        sampler=lambda n, rng: rng.uniform(-0.5, 0.5, size=(n, 1)),
        pdf=lambda pts: np.where(np.abs(pts[:, 0]) <= 0.5, 1.0, 0.0),
        mean=np.zeros(1),
        cov=np.array([[1.0 / 12]]),
        klass=ClassParams(c=2.0, d=1, tail=TailBound.bounded(0.5)),
        box=(np.array([-0.5]), np.array([0.5])),
        log_concave=True,
        in_half_ball=True,
    )


def _uniform_ball_2d() -> GroundTruth:
    r = 0.5

    def sampler(n, rng):
        # polar with sqrt-radius: exact uniform on the disc
        u = rng.random(n)
        th = rng.uniform(0.0, 2 * np.pi, n)
        rad = r * np.sqrt(u)
        return np.stack([rad * np.cos(th), rad * np.sin(th)], axis=1)

    dens = 1.0 / (np.pi * r * r)
    return GroundTruth(
        name="uniform-ball",
        d=2,
        sampler=sampler,
        pdf=lambda pts: np.where(np.einsum("ij,ij->i", pts, pts) <= r * r, dens, 0.0),
        mean=np.zeros(2),
        cov=np.eye(2) * r * r / 4,
        klass=ClassParams(c=2.6, d=2, tail=TailBound.bounded(r)),
        box=(np.array([-r, -r]), np.array([r, r])),
        log_concave=True,
        in_half_ball=True,
    )


def _gauss_narrow(truncated: bool) -> GroundTruth:
    sigma = 0.1
    tail = TailBound.exponential(sigma)
    if not truncated:
        gt = _gauss("gauss-narrow", [0.0], [[sigma**2]], c=8.0, tail=tail)
        return replace(gt, box=(np.array([-0.8]), np.array([0.8])))
    # mass outside [-1/2, 1/2] is ~6e-7; the renormalized pdf stays in class
    zc = 2 * stats.norm.cdf(0.5 / sigma) - 1

    def sampler(n, rng):
        out = np.empty((n, 1))
        filled = 0
        while filled < n:
            xs = rng.normal(0.0, sigma, size=(2 * (n - filled) + 8, 1))
            xs = xs[np.abs(xs[:, 0]) <= 0.5]
            take = min(xs.shape[0], n - filled)
            out[filled : filled + take] = xs[:take]
            filled += take
        return out

    return GroundTruth(
        name="trunc-gauss-narrow",
        d=1,
        sampler=sampler,
        pdf=lambda pts: np.where(
            np.abs(pts[:, 0]) <= 0.5, stats.norm.pdf(pts[:, 0], scale=sigma) / zc, 0.0
        ),
        mean=np.zeros(1),
        cov=np.array([[sigma**2]]),
        klass=ClassParams(c=8.0, d=1, tail=tail),
        box=(np.array([-0.5]), np.array([0.5])),
        log_concave=True,
        in_half_ball=True,
    )


def _laplace(truncated: bool) -> GroundTruth:
    if not truncated:
        return GroundTruth(
            name="laplace",
            d=1,
            sampler=lambda n, rng: rng.laplace(0.0, 1.0, size=(n, 1)),
            pdf=lambda pts: 0.5 * np.exp(-np.abs(pts[:, 0])),
            mean=np.zeros(1),
            cov=np.array([[2.0]]),
            klass=ClassParams(c=1.05, d=1, tail=TailBound.exponential(1.0)),
            box=(np.array([-26.0]), np.array([26.0])),
            log_concave=True,
        )
    R = 8.0
    zc = 1.0 - math.exp(-R)

    def sampler(n, rng):
        out = np.empty((n, 1))
        filled = 0
        while filled < n:
            xs = rng.laplace(0.0, 1.0, size=(n - filled + 8, 1))
            xs = xs[np.abs(xs[:, 0]) <= R]
            take = min(xs.shape[0], n - filled)
            out[filled : filled + take] = xs[:take]
            filled += take
        return out

    return GroundTruth(
        name="trunc-laplace",
        d=1,
        sampler=sampler,
        pdf=lambda pts: np.where(np.abs(pts[:, 0]) <= R, 0.5 * np.exp(-np.abs(pts[:, 0])) / zc, 0.0),
        mean=np.zeros(1),
        cov=np.array([[2.0 - (R * R + 2 * R + 2) * math.exp(-R) / zc]]),
        klass=ClassParams(c=1.1, d=1, tail=TailBound.exponential(1.0)),
        box=(np.array([-R]), np.array([R])),
        log_concave=True,
    )


def _product_exponential(d: int) -> GroundTruth:
    c = 2.2 if d == 1 else 3.2
    beta = 1.0 if d == 1 else math.sqrt(2.0)

    def pdf(pts):
        inside = np.all(pts >= -1.0, axis=1)
        vals = np.exp(-(pts + 1.0).sum(axis=1))
        return np.where(inside, vals, 0.0)

    return GroundTruth(
        name=f"product-exp-{d}d",
        d=d,
        sampler=lambda n, rng: rng.exponential(1.0, size=(n, d)) - 1.0,
        pdf=pdf,
        mean=np.zeros(d),
        cov=np.eye(d),
        klass=ClassParams(c=c, d=d, tail=TailBound.exponential(beta)),
        box=(np.full(d, -1.0), np.full(d, 24.0)),
        log_concave=True,
    )


def uniform_box(name: str, lo, hi) -> GroundTruth:
    """Axis-aligned uniform density, mainly used as a noise component."""
    lo = np.atleast_1d(np.asarray(lo, float))
    hi = np.atleast_1d(np.asarray(hi, float))
    if np.any(hi <= lo):
        raise ParameterError("box must have positive side lengths")
    d = lo.shape[0]
    dens = 1.0 / float(np.prod(hi - lo))
    widths = hi - lo
    return GroundTruth(
        name=name,
        d=d,
        sampler=lambda n, rng: rng.uniform(lo, hi, size=(n, d)),
        pdf=lambda pts: np.where(np.all((pts >= lo) & (pts <= hi), axis=1), dens, 0.0),
        mean=(lo + hi) / 2,
        cov=np.diag(widths**2 / 12),
        klass=None,
        box=(lo, hi),
        in_half_ball=bool(np.all(np.abs(lo) <= 0.5) and np.all(np.abs(hi) <= 0.5)),
    )


def zoo() -> dict[str, GroundTruth]:
    members = [
        _uniform_interval(),
        _uniform_ball_2d(),
        _gauss("gauss-std-1d", [0.0], [[1.0]], c=1.0, tail=TailBound.gaussian(math.sqrt(2.0))),
        _gauss(
            "gauss-std-2d",
            [0.0, 0.0],
            np.eye(2),
            c=1.0,
            tail=TailBound.gaussian(math.sqrt(2.0)),
        ),
        _gauss(
            "gauss-aniso",
            [0.0, 0.0],
            np.diag([4.0, 1.0]),
            c=1.0,
            tail=TailBound.gaussian(2.0 * math.sqrt(2.0)),
        ),
        _gauss_narrow(truncated=False),
        _gauss_narrow(truncated=True),
        _laplace(truncated=False),
        _laplace(truncated=True),
        _product_exponential(1),
        _product_exponential(2),
    ]
    return {m.name: m for m in members}


class GroundTruthEntry:
    """Adapter exposing the tournament protocol for a known density."""

    def __init__(self, gt: GroundTruth):
        if gt.pdf is None:
            raise DomainError("tournament entries need a pdf")
        self.gt = gt

    def sample(self, n, rng):
        return self.gt.sample(n, rng)

    def density(self, points):
        return self.gt.density(points)
