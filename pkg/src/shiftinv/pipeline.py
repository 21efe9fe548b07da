"""End-to-end learners for clean and eps-corrupted shift-invariant targets.

``construct_candidates`` runs the truncation frame D times; each run
conditions the oracle on its ball, learns the conditioned density with the
bounded learner at ``kappa = min(eps/2, eps/(4 g^{-1}(eps) c))``, pulls the
hypothesis back, estimates its mass, and flags feasibility.  Frames whose
rejection sampling is too inefficient are discarded, never fatal.  ``learn``
then picks a winner by the Scheffe tournament; with probability ``1 -
O(delta)`` the winner is within ``6 eps`` (plus analysis slack) of the
target in (un-halved) total variation.

The candidate count honors the analysis schedule ``D = ceil(exp(a * I_g) *
ln(1/delta))``; desk mode (default) caps it at ``ceil(20 ln(1/delta))``
because the exponential factor prices in a worst case that desk-scale
contamination never realizes.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .core import ClassParams, DrawOracle, SampleSet, substream
from .errors import CandidateDiscard, ParameterError, PipelineFailure
from .learn_bounded import BoundedLearnerParams, default_kappa, learn_bounded
from .select import CandidateHypothesis, finalize_candidate, scheffe_select
from .transform import ConditionedOracle, compute_transformation, pull_back_hypothesis, required_sample_count


@dataclass
class PipelineConfig:
    """Class membership, accuracy targets, and desk-scale knobs."""

    klass: ClassParams
    eps: float
    delta: float
    D: int | None = None
    desk_mode: bool = True
    schedule_a: float = 1.0
    kappa: float | None = None
    c_T: float = 1.0
    c_S: float = 1.0
    max_rejects: int = 64
    pair_constant: float = 48.0
    draw_threshold: float = 6.0
    mass_delta: float | None = None
    sup_grid_per_axis: int | None = None

    def __post_init__(self):
        if not 0.0 < self.eps < 0.5:
            raise ParameterError(f"eps must lie in (0, 1/2), got {self.eps}")
        if not 0.0 < self.delta < 1.0:
            raise ParameterError(f"delta must lie in (0, 1), got {self.delta}")
        if self.D is not None and self.D < 1:
            raise ParameterError("candidate count D must be >= 1")

    def candidate_count(self) -> int:
        if self.D is not None:
            return self.D
        lg = max(math.log(1.0 / self.delta), 1.0)
        full = math.ceil(math.exp(self.schedule_a * self.klass.I_g) * lg)
        if self.desk_mode:
            return int(min(full, math.ceil(20.0 * lg)))
        return int(full)

    def effective_kappa(self) -> float:
        if self.kappa is not None:
            return self.kappa
        return default_kappa(self.eps, self.klass.c, self.klass.g_inv(self.eps))


@dataclass
class LearnResult:
    """Winner plus the run report the CLI serializes."""

    winner: CandidateHypothesis
    winner_index: int
    candidates: list[CandidateHypothesis]
    pair_report: list[dict]
    total_samples: int
    wall_time_s: float
    per_candidate: list[dict] = field(default_factory=list)

    def report(self, config_echo: dict | None = None) -> dict:
        return {
            "config": config_echo or {},
            "candidates": self.per_candidate,
            "winner": self.winner_index,
            "total_samples": self.total_samples,
            "wall_time_s": self.wall_time_s,
            "pairs": self.pair_report,
        }


def construct_candidates(oracle: DrawOracle, cfg: PipelineConfig, seed: int) -> list[CandidateHypothesis]:
    """Build D candidates; discarded ones stay in the list with diagnostics."""
    D = cfg.candidate_count()
    kappa = cfg.effective_kappa()
    M = required_sample_count(cfg.klass.tail)
    params = BoundedLearnerParams(
        d=cfg.klass.d,
        eps=cfg.eps,
        kappa=kappa,
        delta=cfg.delta,
        c_T=cfg.c_T,
        c_S=cfg.c_S,
    )
    mass_delta = cfg.mass_delta if cfg.mass_delta is not None else cfg.delta / max(D, 1)
    out: list[CandidateHypothesis] = []
    for i in range(D):
        used_before = oracle.total
        frame = compute_transformation(
            SampleSet(oracle.draw(M), seed_provenance=f"frame-{i}"),
            cfg.klass.tail,
            cfg.eps,
        )
        cond = ConditionedOracle(oracle, frame, max_rejects=cfg.max_rejects)
        try:
            h_scond = learn_bounded(cond, params, substream(seed, 2, i))
            cand = pull_back_hypothesis(h_scond, frame)
            finalize_candidate(
                cand,
                cfg.eps,
                mass_delta,
                substream(seed, 3, i),
                grid_per_axis=cfg.sup_grid_per_axis,
            )
        except CandidateDiscard as exc:
            cand = CandidateHypothesis(
                h_scond=None,  # type: ignore[arg-type]
                frame=frame,
                status="discarded",
                diagnostics={"discard_reason": str(exc)},
            )
        cand.diagnostics.setdefault("samples_used", oracle.total - used_before)
        cand.diagnostics.setdefault("acceptance_rate", cond.acceptance_rate)
        out.append(cand)
    return out


def learn(oracle: DrawOracle, cfg: PipelineConfig, seed: int) -> LearnResult:
    """Candidates plus selection; raises :class:`PipelineFailure` when no
    candidate is feasible."""
    t0 = time.perf_counter()
    candidates = construct_candidates(oracle, cfg, seed)
    feasible_idx = [i for i, c in enumerate(candidates) if c.feasible]
    per_candidate = [
        {
            "index": i,
            "feasible": c.feasible,
            "mass": c.mass,
            "frame": {"mu": c.frame.mu.tolist(), "t": c.frame.t},
            **c.diagnostics,
        }
        for i, c in enumerate(candidates)
    ]
    if not feasible_idx:
        raise PipelineFailure("no feasible candidate survived", diagnostics=per_candidate)
    pool = [candidates[i] for i in feasible_idx]
    local_winner, pair_report = scheffe_select(
        pool,
        oracle,
        cfg.eps,
        cfg.delta,
        substream(seed, 4),
        pair_constant=cfg.pair_constant,
        draw_threshold=cfg.draw_threshold,
    )
    winner_index = feasible_idx[local_winner]
    return LearnResult(
        winner=candidates[winner_index],
        winner_index=winner_index,
        candidates=candidates,
        pair_report=pair_report,
        total_samples=oracle.total,
        wall_time_s=time.perf_counter() - t0,
        per_candidate=per_candidate,
    )
