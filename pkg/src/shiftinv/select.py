"""Mass estimation, hypothesis sampling, and the selection tournament.

A candidate is a conditioned-space hypothesis pulled back through its
affine frame; as a function on the original space it is a nonnegative
measure of unknown total mass.  Mass is estimated by uniform Monte Carlo
on [-1,1]^d (never consuming data draws), candidates with estimated mass
below 1/2 are infeasible, and the remaining ones compete in a pairwise
Scheffe tournament against fresh draws from the target.

For the pair (i, j) the witness set is ``W_ij = {x : dens_i(x) >
dens_j(x)}`` (strict inequality; ties count as non-membership).  With
``p_i = Pr_{H_i}[W_ij]``, ``p_j = Pr_{H_j}[W_ij]`` and ``tau =
Pr_target[W_ij]``, each estimated from ``m = ceil((48/eps^2)(ln M +
ln(3/delta)))`` draws: a gap ``p_i - p_j <= 6 eps`` is a draw, otherwise
the candidate whose membership probability is closer to ``tau`` wins.  The
output is the candidate with the most non-losses (lowest index on ties).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CandidateDiscard, ParameterError
from .fourier import FourierHypothesis, evaluate, evaluate_grid_fft
from .transform import AffineFrame

FEASIBLE_MASS = 0.5

#: default safety inflation applied to a grid-estimated sup bound
SUP_SAFETY = 1.05


def identity_frame(d: int) -> AffineFrame:
    """Frame with ``mu = 0``, ``t = 1/4``: conditioned coords == original."""
    return AffineFrame(mu=np.zeros(d), t=0.25)


@dataclass
class CandidateHypothesis:
    """A pulled-back hypothesis with estimated mass and sampling envelope.

    ``sup_bound`` dominates ``h_scond`` on [-1,1]^d and is the rejection
    envelope height; ``mass`` is the Monte-Carlo estimate of the total
    measure (equal in conditioned and original coordinates).
    """

    h_scond: FourierHypothesis
    frame: AffineFrame
    mass: float | None = None
    sup_bound: float | None = None
    status: str = "pending"
    diagnostics: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return self.h_scond.d

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"

    # -- evaluation ------------------------------------------------------

    def eval_scond(self, points) -> np.ndarray:
        return evaluate(self.h_scond, points)

    def eval_original(self, points) -> np.ndarray:
        """Unnormalized measure on the original space; 0 outside the image
        of [-1,1]^d."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        ys = self.frame.forward(pts)
        inside = np.all(np.abs(ys) <= 1.0, axis=1)
        out = np.zeros(pts.shape[0])
        if inside.any():
            out[inside] = self.frame.jacobian_forward() * self.eval_scond(ys[inside])
        return out

    def density(self, points) -> np.ndarray:
        """Normalized evaluation oracle ``h(x) / mass``; needs feasibility."""
        self._require_feasible()
        return self.eval_original(points) / self.mass

    def compute_sup_bound(self, grid_per_axis: int | None = None) -> float:
        """Envelope from a fine synthesis grid, capped by the analytic bound.

        The grid maximum is inflated by a safety factor; exactness of the
        rejection sampler is preserved as long as the envelope dominates the
        hypothesis, which :meth:`sample` asserts on every evaluation.
        """
        worst = (2 * self.h_scond.T + 1) ** self.d / 2**self.d
        if grid_per_axis is None:
            grid_per_axis = _default_sup_grid(self.h_scond.T, self.d)
        vals = evaluate_grid_fft(self.h_scond, grid_per_axis)
        bound = min(worst, SUP_SAFETY * float(vals.max()) + 1e-12)
        self.sup_bound = bound
        return bound

    # -- sampling --------------------------------------------------------

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Exact draws from the normalized density, pulled back to the
        original space, by rejection against ``[-1,1]^d x [0, sup_bound]``."""
        self._require_feasible()
        H = self.sup_bound
        out = np.empty((n, self.d))
        filled = 0
        stall_budget = 64 * math.ceil(2**self.d * H) * max(n, 1)
        proposed = 0
        while filled < n:
            batch = max(int(2.5 * 2**self.d * H * (n - filled)), 128)
            zs = rng.uniform(-1.0, 1.0, size=(batch, self.d))
            v = rng.uniform(0.0, H, size=batch)
            hv = self.eval_scond(zs)
            if np.any(hv > H):
                raise CandidateDiscard("sup envelope violated; refusing biased sampler")
            acc = zs[v <= hv]
            proposed += batch
            if acc.shape[0] == 0 and proposed > stall_budget:
                raise CandidateDiscard(
                    f"rejection sampler stalled after {proposed} proposals"
                )
            take = min(acc.shape[0], n - filled)
            out[filled : filled + take] = acc[:take]
            filled += take
        return self.frame.inverse(out)

    def _require_feasible(self):
        if not self.feasible or self.mass is None or self.sup_bound is None:
            raise ParameterError(f"candidate is not feasible (status={self.status!r})")


def _default_sup_grid(T: int, d: int) -> int:
    per_axis = {1: 1 << 13, 2: 1 << 9}.get(d, 1 << 6)
    return max(per_axis, 2 * T + 2)


def estimate_mass(
    h_scond: FourierHypothesis,
    eps: float,
    delta: float,
    rng: np.random.Generator,
    sup_bound: float,
) -> float:
    """Uniform Monte-Carlo mass of ``h_scond`` over [-1,1]^d, +-eps w.p. 1-delta.

    Hoeffding on values in [0, sup_bound] gives the draw count
    ``N = ceil(2 (2^d sup_bound / eps)^2 ln(2/delta))``.  Uses its own
    uniform stream, never the data oracle.
    """
    if not (0 < eps and 0 < delta < 1):
        raise ParameterError("need eps > 0 and delta in (0,1)")
    d = h_scond.d
    if sup_bound <= 0:
        return 0.0
    N = int(math.ceil(2.0 * (2**d * sup_bound / eps) ** 2 * math.log(2.0 / delta)))
    total = 0.0
    remaining = N
    while remaining > 0:
        batch = min(remaining, 1 << 16)
        pts = rng.uniform(-1.0, 1.0, size=(batch, d))
        total += float(evaluate(h_scond, pts).sum())
        remaining -= batch
    return 2**d * total / N


def finalize_candidate(
    cand: CandidateHypothesis,
    eps: float,
    delta: float,
    rng: np.random.Generator,
    grid_per_axis: int | None = None,
) -> CandidateHypothesis:
    """Compute envelope and mass, then set the feasibility flag."""
    bound = cand.compute_sup_bound(grid_per_axis)
    cand.mass = estimate_mass(cand.h_scond, eps, delta, rng, bound)
    cand.status = "feasible" if cand.mass >= FEASIBLE_MASS else "discarded"
    if cand.status == "discarded":
        cand.diagnostics["discard_reason"] = f"estimated mass {cand.mass:.4f} < 1/2"
    return cand


def eval_oracle(cand: CandidateHypothesis, eps: float, beta: float | None = None):
    """Deterministic (1+O(eps))-approximate density oracle ``x -> h(x)/Z_hat``."""
    beta = eps / 32.0 if beta is None else beta
    if (1.0 + beta) ** 2 > 1.0 + eps / 8.0 + 1e-12:
        raise ParameterError(f"approximation level beta={beta} too coarse for eps={eps}")
    cand._require_feasible()
    return cand.density


def scheffe_select(
    candidates: list,
    target_oracle,
    eps: float,
    delta: float,
    rng: np.random.Generator,
    pair_constant: float = 48.0,
    draw_threshold: float = 6.0,
) -> tuple[int, list[dict]]:
    """Pairwise tournament; returns ``(winner_index, pair_report)``.

    ``candidates`` may be any objects exposing ``sample(n, rng)`` and
    ``density(points)`` over a common space; ``target_oracle.draw(m)``
    supplies fresh target samples.  Draws happen once, in candidate order
    then target, so the result is deterministic given ``rng``.
    """
    M = len(candidates)
    if M == 0:
        raise ParameterError("selection needs at least one candidate")
    if M == 1:
        return 0, []
    m = int(math.ceil((pair_constant / eps**2) * (math.log(M) + math.log(3.0 / delta))))
    blocks = [cand.sample(m, rng) for cand in candidates]
    target_block = target_oracle.draw(m)
    # dens[k][b]: candidate k's density on block b (blocks: 0..M-1, then target)
    all_blocks = blocks + [target_block]
    dens = [[cand.density(b) for b in all_blocks] for cand in candidates]

    losses = np.zeros(M, dtype=int)
    report = []
    for i in range(M):
        for j in range(i + 1, M):
            p_i = float(np.mean(dens[i][i] > dens[j][i]))
            p_j = float(np.mean(dens[i][j] > dens[j][j]))
            tau = float(np.mean(dens[i][M] > dens[j][M]))
            if p_i - p_j <= draw_threshold * eps:
                outcome = "draw"
            elif abs(p_i - tau) < abs(p_j - tau):
                outcome = "i"
                losses[j] += 1
            else:
                outcome = "j"
                losses[i] += 1
            report.append({"i": i, "j": j, "p_i": p_i, "p_j": p_j, "tau": tau, "outcome": outcome})
    non_losses = (M - 1) - losses
    winner = int(np.argmax(non_losses))  # argmax takes the lowest index on ties
    return winner, report
