"""Bounded-support learner: mollify by sampling, estimate, invert, clip.

For a target density supported in the ball B(1/2) whose shift-invariance
satisfies ``kappa * SI(f, kappa) <= eps/2``, the learner draws S samples,
perturbs each by an independent mollifier draw (producing samples of
``q = f * b_{d,gamma}``, supported in B(1) and hence in [-1,1]^d),
estimates the Fourier coefficients of ``q`` on the cutoff-T lattice, and
returns the clipped inverse transform.  With probability ``1 - delta`` over
the draws, ``\\int |h - f| <= eps``; on an eps-corrupted target the same run
yields ``\\int |h - f'| <= 2 eps``.

Parameter formulas (defaults reproduce the analysis exactly; the
multipliers ``c_T``/``c_S`` rescale them for desk-scale runs):

    gamma = kappa / sqrt(d)
    T     = ceil(c_T * ((4 d^2 / gamma) ln^2(d/gamma) + (1/gamma) ln^2(8/eps)))
    eta   = sqrt((2T+1)^(-d) * eps^2 / 8)
    S     = ceil(c_S * (4 / eta^2) * ln(4 (2T+1)^d / delta))
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation, ParameterError
from .fourier import LATTICE_CAP_DEFAULT, FourierHypothesis, build_low, estimate_coefficients
from .mollifier import MollifierParams, sample_b_dgamma


@dataclass(frozen=True)
class BoundedLearnerParams:
    """Target error ``eps``, shift scale ``kappa``, failure prob ``delta``.

    ``c_T`` and ``c_S`` default to 1 (the analysis formulas verbatim); they
    may be lowered for desk-scale experiments where the worst-case constants
    are far too conservative.
    """

    d: int
    eps: float
    kappa: float
    delta: float
    c_T: float = 1.0
    c_S: float = 1.0
    lattice_cap: int = LATTICE_CAP_DEFAULT

    def __post_init__(self):
        if self.d < 1:
            raise ParameterError("dimension must be >= 1")
        if not 0.0 < self.kappa < self.eps < 0.5:
            raise ParameterError(
                f"need 0 < kappa < eps < 1/2, got kappa={self.kappa}, eps={self.eps}"
            )
        if not 0.0 < self.delta < 1.0:
            raise ParameterError(f"failure probability must be in (0,1), got {self.delta}")
        if self.c_T <= 0 or self.c_S <= 0:
            raise ParameterError("constant multipliers must be positive")


def derive_parameters(p: BoundedLearnerParams) -> tuple[float, int, float, int]:
    """``(gamma, T, eta, S)`` from the closed-form schedule."""
    gamma = p.kappa / math.sqrt(p.d)
    base = (4.0 * p.d**2 / gamma) * math.log(p.d / gamma) ** 2
    base += (1.0 / gamma) * math.log(8.0 / p.eps) ** 2
    T = int(math.ceil(p.c_T * base))
    low_size = (2 * T + 1) ** p.d
    if low_size > p.lattice_cap:
        from .errors import ResourceError

        raise ResourceError(
            f"derived T={T} gives |Low|={low_size} above cap {p.lattice_cap}; "
            "lower c_T or raise the cap"
        )
    eta = math.sqrt(low_size**-1 * p.eps**2 / 8.0)
    S = int(math.ceil(p.c_S * (4.0 / eta**2) * math.log(4.0 * low_size / p.delta)))
    return gamma, T, eta, S


def default_kappa(eps: float, c: float, g_inv_eps: float) -> float:
    """Pipeline default ``kappa = min(eps/2, eps / (4 g^{-1}(eps) c))``."""
    return min(eps / 2.0, eps / (4.0 * g_inv_eps * c))


def h_max_bound(T: int, d: int) -> float:
    """Worst-case sup of any estimated hypothesis: ``(2T+1)^d / 2^d``."""
    return (2 * T + 1) ** d / 2**d


def learn_bounded(oracle, params: BoundedLearnerParams, rng: np.random.Generator) -> FourierHypothesis:
    """Run the bounded learner against ``oracle`` (draws from f in B(1/2)).

    The (sample, mollifier-draw) pairing is deterministic given the oracle's
    stream and ``rng``.  Each convolved sample must land in [-1,1]^d; one
    outside signals that the caller's support contract was broken.
    """
    gamma, T, _, S = derive_parameters(params)
    moll = MollifierParams(d=params.d, gamma=min(gamma, 0.5))
    xs = oracle.draw(S)
    if xs.shape != (S, params.d):
        raise ParameterError(f"oracle returned shape {xs.shape}, expected {(S, params.d)}")
    ys = xs + sample_b_dgamma(moll, rng, S)
    if np.abs(ys).max() > 1.0:
        raise InvariantViolation(
            "convolved sample escaped [-1,1]^d; target is not supported in B(1/2)"
        )
    low = build_low(params.d, T, cap=params.lattice_cap)
    return estimate_coefficients(ys, low).clipped()
