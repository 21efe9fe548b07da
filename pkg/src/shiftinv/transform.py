"""Tail truncation and rescaling between original space and B(1/2).

``compute_transformation`` estimates a center from ``ceil(100 I_g)`` draws
and picks the squared radius ``t = 2 (g^{-1}(eps)^2 + 1/10)``; with
probability at least 9/10 over clean draws the ball
``B_t = {x : ||x - mu|| <= sqrt(t)}`` then carries mass at least ``1 - eps``.
The affine frame maps ``B_t`` onto ``B(1/2)`` via ``y = (x - mu) / (2
sqrt(t))``.

Densities and hypotheses transport with the full d-dimensional Jacobian:

    f_scaled(y) = (2 sqrt(t))^d * f(2 sqrt(t) y + mu)
    h(x)        = (2 sqrt(t))^{-d} * h_scond((x - mu) / (2 sqrt(t)))

so that masses are preserved in every dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DrawOracle, SampleSet, TailBound, as_points, tail_integral, tail_inverse
from .errors import CandidateDiscard, ParameterError


@dataclass(frozen=True)
class AffineFrame:
    """Center estimate and squared-radius parameter of a truncation ball."""

    mu: np.ndarray
    t: float

    def __post_init__(self):
        object.__setattr__(self, "mu", np.asarray(self.mu, dtype=float).ravel())
        if not self.t > 0:
            raise ParameterError(f"frame radius parameter t must be positive, got {self.t}")

    @property
    def d(self) -> int:
        return self.mu.shape[0]

    @property
    def scale(self) -> float:
        """Length ratio between original space and conditioned coordinates."""
        return 2.0 * math.sqrt(self.t)

    def forward(self, x) -> np.ndarray:
        """Original -> conditioned; maps B_t onto B(1/2) exactly."""
        return (as_points(x, self.d) - self.mu) / self.scale

    def inverse(self, y) -> np.ndarray:
        return as_points(y, self.d) * self.scale + self.mu

    def jacobian_forward(self) -> float:
        """``dy/dx`` volume factor ``(2 sqrt(t))^{-d}``."""
        return self.scale**-self.d

    def in_ball(self, x) -> np.ndarray:
        pts = as_points(x, self.d)
        return np.einsum("ij,ij->i", pts - self.mu, pts - self.mu) <= self.t


def required_sample_count(tail: TailBound) -> int:
    """``M = ceil(100 I_g)`` draws feed one transformation attempt."""
    return int(math.ceil(100.0 * tail_integral(tail)))


def compute_transformation(samples: SampleSet, tail: TailBound, eps: float) -> AffineFrame:
    """Empirical-mean center plus the closed-form radius for level ``eps``.

    Succeeds (mass of B_t at least ``1 - eps``) with probability >= 9/10
    over clean draws from a class member; the caller handles retries.
    """
    if not 0.0 < eps < 0.5:
        raise ParameterError(f"need 0 < eps < 1/2, got {eps}")
    samples.require_nonempty()
    M = required_sample_count(tail)
    if samples.n != M:
        raise ParameterError(f"transformation requires exactly {M} samples, got {samples.n}")
    mu = samples.points.mean(axis=0)
    t = 2.0 * (tail_inverse(tail, eps) ** 2 + 0.1)
    return AffineFrame(mu=mu, t=t)


class ConditionedOracle:
    """Rejection-filter a base oracle through a frame, tracking acceptance.

    Yields forward-mapped samples of the conditioned density on B(1/2).
    Aborts with :class:`CandidateDiscard` after ``max_rejects`` consecutive
    rejections: when true acceptance is >= 1/2 a false abort has probability
    at most ``2^-max_rejects``.
    """

    def __init__(self, base: DrawOracle, frame: AffineFrame, max_rejects: int = 64):
        if max_rejects < 1:
            raise ParameterError("max_rejects must be >= 1")
        self.base = base
        self.frame = frame
        self.max_rejects = max_rejects
        self.accepted = 0
        self.proposed = 0
        self._run = 0  # current streak of consecutive rejections

    @property
    def d(self) -> int:
        return self.frame.d

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.proposed if self.proposed else float("nan")

    def draw(self, n: int) -> np.ndarray:
        out = np.empty((n, self.d))
        filled = 0
        while filled < n:
            want = n - filled
            batch = max(2 * want, 64)
            xs = self.base.draw(batch)
            keep = self.frame.in_ball(xs)
            self.proposed += batch
            self.accepted += int(keep.sum())
            self._check_streak(keep)
            ys = self.frame.forward(xs[keep])
            take = min(ys.shape[0], want)
            out[filled : filled + take] = ys[:take]
            filled += take
        return out

    def _check_streak(self, keep: np.ndarray) -> None:
        # longest rejection run, carrying the streak across batch boundaries
        idx = np.flatnonzero(keep)
        n = keep.size
        if idx.size == 0:
            worst = self._run + n
            self._run = worst
        else:
            gaps = np.diff(idx) - 1
            worst = max(
                self._run + int(idx[0]),
                int(gaps.max()) if gaps.size else 0,
                n - 1 - int(idx[-1]),
            )
            self._run = n - 1 - int(idx[-1])
        if worst > self.max_rejects:
            raise CandidateDiscard(
                f"{worst} consecutive rejections (> {self.max_rejects}); "
                "frame looks inefficient"
            )


def pull_back_hypothesis(h_scond, frame: AffineFrame):
    """Wrap a conditioned-space hypothesis as an unnormalized original-space
    candidate (mass still to be estimated)."""
    from .select import CandidateHypothesis

    return CandidateHypothesis(h_scond=h_scond, frame=frame)
