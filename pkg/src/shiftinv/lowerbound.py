"""Checkerboard density family with exact TV/KL and the Fano-style experiment.

Members are piecewise-constant densities on the unit cubes of [-T, T)^d,
indexed by binary codewords ``z`` over the cube lattice ``A``:

    f_z(x) = (T + z_{a(x)}) / Z,   Z = T * (2T)^d + weight(z).

Codewords are balanced (weight exactly |A|/2), so every family member
shares one normalizer ``Z`` and pairwise metrics are exact rationals:

    dtv(f_u, f_v) = Hamming(u, v) / Z
    KL(f_u || f_v) = n_10 * ((T+1)/Z) ln((T+1)/T) + n_01 * (T/Z) ln(T/(T+1))

where ``n_10`` counts cells with ``u_a = 1, v_a = 0`` and vice versa.
Pairs closer than ``|A|/4`` in Hamming distance are rejected during
construction, which keeps the family TV-separated while KL stays O(1); an
error-vs-samples experiment over such a family is the empirical face of
the Fano sample-complexity bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import as_points, substream
from .errors import ParameterError, ResourceError


@dataclass(frozen=True)
class CheckerboardDensity:
    """One family member: dimension, half-width ``T``, codeword ``z``."""

    d: int
    T: int
    z: np.ndarray  # uint8, length (2T)^d, lexicographic over A = {-T..T-1}^d

    def __post_init__(self):
        z = np.asarray(self.z, dtype=np.uint8).ravel()
        if z.shape[0] != self.n_cells:
            raise ParameterError(f"codeword length {z.shape[0]} != (2T)^d = {self.n_cells}")
        if not np.all((z == 0) | (z == 1)):
            raise ParameterError("codeword must be binary")
        object.__setattr__(self, "z", z)

    @property
    def n_cells(self) -> int:
        return (2 * self.T) ** self.d

    @property
    def weight(self) -> int:
        return int(self.z.sum())

    @property
    def Z(self) -> int:
        return self.T * self.n_cells + self.weight

    def cell_index(self, points) -> np.ndarray:
        """Lexicographic index of the containing cube; -1 outside support."""
        pts = as_points(points, self.d)
        a = np.floor(pts).astype(np.int64)
        inside = np.all((a >= -self.T) & (a <= self.T - 1), axis=1)
        idx = np.zeros(pts.shape[0], dtype=np.int64)
        for j in range(self.d):
            idx = idx * (2 * self.T) + (a[:, j] + self.T)
        return np.where(inside, idx, -1)

    def density(self, points) -> np.ndarray:
        idx = self.cell_index(points)
        vals = np.zeros(idx.shape[0], dtype=float)
        ok = idx >= 0
        vals[ok] = (self.T + self.z[idx[ok]].astype(float)) / self.Z
        return vals

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        probs = (self.T + self.z.astype(float)) / self.Z
        cells = rng.choice(self.n_cells, size=n, p=probs)
        corners = np.empty((n, self.d))
        rem = cells.copy()
        for j in range(self.d - 1, -1, -1):
            corners[:, j] = rem % (2 * self.T) - self.T
            rem //= 2 * self.T
        return corners + rng.random((n, self.d))

    def codeword_string(self) -> str:
        return "".join("1" if b else "0" for b in self.z)


def build_family(
    eps: float,
    d: int,
    N: int,
    seed: int,
    C: float = 1.0,
    max_draw_factor: int = 10_000,
) -> list[CheckerboardDensity]:
    """Draw ``N`` balanced codewords with pairwise Hamming >= |A|/4.

    Deterministic given ``seed``; raises :class:`ResourceError` when
    rejection stalls (more than ``max_draw_factor * N`` proposals).
    """
    if eps <= 0:
        raise ParameterError("eps must be positive")
    T = int(math.ceil(C / eps))
    n_cells = (2 * T) ** d
    if n_cells < 8:
        raise ParameterError(f"eps={eps} gives only {n_cells} cells; need >= 8")
    if N > 2 ** (n_cells // 8):
        raise ParameterError(f"family size {N} exceeds 2^(|A|/8) = {2 ** (n_cells // 8)}")
    rng = substream(seed, 60)
    weight = n_cells // 2
    min_dist = n_cells // 4
    accepted: list[np.ndarray] = []
    tries = 0
    budget = max_draw_factor * N
    while len(accepted) < N:
        tries += 1
        if tries > budget:
            raise ResourceError(
                f"family construction stalled after {tries} draws "
                f"({len(accepted)}/{N} accepted)"
            )
        z = np.zeros(n_cells, dtype=np.uint8)
        z[rng.permutation(n_cells)[:weight]] = 1
        if all(int(np.sum(z != w)) >= min_dist for w in accepted):
            accepted.append(z)
    return [CheckerboardDensity(d=d, T=T, z=z) for z in accepted]


def _require_compatible(u: CheckerboardDensity, v: CheckerboardDensity):
    if u.d != v.d or u.T != v.T:
        raise ParameterError("family members have mismatched (d, T)")
    if u.Z != v.Z:
        raise ParameterError("members have different normalizers (unbalanced codewords)")


def exact_tv(u: CheckerboardDensity, v: CheckerboardDensity) -> float:
    """``Hamming(u, v) / Z`` exactly (piecewise-constant integral)."""
    _require_compatible(u, v)
    return float(np.sum(u.z != v.z)) / u.Z


def exact_kl(u: CheckerboardDensity, v: CheckerboardDensity) -> float:
    """Closed-form KL divergence between two members."""
    _require_compatible(u, v)
    n10 = int(np.sum((u.z == 1) & (v.z == 0)))
    n01 = int(np.sum((u.z == 0) & (v.z == 1)))
    T, Z = u.T, u.Z
    return n10 * ((T + 1) / Z) * math.log((T + 1) / T) + n01 * (T / Z) * math.log(T / (T + 1))


def family_to_json(family: list[CheckerboardDensity]) -> dict:
    f0 = family[0]
    return {"d": f0.d, "T": f0.T, "codewords": [f.codeword_string() for f in family]}


def family_from_json(obj: dict) -> list[CheckerboardDensity]:
    d, T = int(obj["d"]), int(obj["T"])
    return [
        CheckerboardDensity(d=d, T=T, z=np.frombuffer(cw.encode(), dtype=np.uint8) - ord("0"))
        for cw in obj["codewords"]
    ]


def pair_metrics(family: list[CheckerboardDensity]) -> list[dict]:
    rows = []
    for i in range(len(family)):
        for j in range(i + 1, len(family)):
            rows.append(
                {
                    "i": i,
                    "j": j,
                    "tv": exact_tv(family[i], family[j]),
                    "kl": exact_kl(family[i], family[j]),
                }
            )
    return rows


# ---------------------------------------------------------------------------
# learners for the error-vs-samples experiment
# ---------------------------------------------------------------------------


def family_mle_learner(family: list[CheckerboardDensity]):
    """Maximum-likelihood identification within the known family.

    The canonical best learner for the Fano setting: consistency drives the
    error to zero as the sample budget grows.
    """
    mat = np.stack([f.z for f in family]).astype(float)  # (N, cells)
    T = family[0].T

    def learner(samples: np.ndarray, rng=None):
        counts = np.bincount(
            family[0].cell_index(samples).clip(min=0), minlength=family[0].n_cells
        ).astype(float)
        # log f_z = sum_cells count * ln(T + z); Z is shared so it drops out
        scores = counts @ np.log(T + mat).T
        best = int(np.argmax(scores))
        return family[best].density

    return learner


def histogram_learner(d: int, T: int):
    """Cube-level empirical frequencies; family-agnostic baseline."""
    template = CheckerboardDensity(d=d, T=T, z=np.zeros((2 * T) ** d, dtype=np.uint8))

    def learner(samples: np.ndarray, rng=None):
        idx = template.cell_index(samples)
        inside = idx >= 0
        counts = np.bincount(idx[inside], minlength=template.n_cells).astype(float)
        dens = counts / max(samples.shape[0], 1)  # unit cubes: prob == density

        def evaluator(points):
            ix = template.cell_index(points)
            vals = np.zeros(ix.shape[0])
            ok = ix >= 0
            vals[ok] = dens[ix[ok]]
            return vals

        return evaluator

    return learner


def fano_experiment(
    family: list[CheckerboardDensity],
    learner,
    m_values: list[int],
    trials: int,
    seed: int,
    n_grid_per_axis: int | None = None,
) -> list[dict]:
    """Mean quadrature-TV error of ``learner`` vs sample count.

    For each ``m``: pick a uniformly random member, hand the learner ``m``
    i.i.d. draws, and measure grid TV to the truth; averages over
    ``trials``.  Rows: ``{"m", "mean_tv", "stderr"}``.
    """
    from .synthetic import estimate_tv

    f0 = family[0]
    lo = np.full(f0.d, -float(f0.T) - 0.25)
    hi = np.full(f0.d, float(f0.T) + 0.25)
    rows = []
    for mi, m in enumerate(m_values):
        errs = []
        for trial in range(trials):
            rng = substream(seed, 61, mi, trial)
            truth = family[int(rng.integers(len(family)))]
            samples = truth.sample(int(m), rng)
            evaluator = learner(samples, rng)
            tv = estimate_tv(
                truth.density,
                evaluator,
                (lo, hi),
                mode="grid",
                n_per_axis=n_grid_per_axis,
                check_coverage=False,
            )
            errs.append(tv)
        errs = np.asarray(errs)
        rows.append(
            {
                "m": int(m),
                "mean_tv": float(errs.mean()),
                "stderr": float(errs.std(ddof=1) / math.sqrt(len(errs))) if len(errs) > 1 else 0.0,
            }
        )
    return rows
