"""Integer-lattice Fourier analysis on [-1,1]^d.

Sign convention: analysis uses ``exp(-i pi <xi, x>)`` and synthesis uses
``exp(+i pi <xi, x>)``, i.e.

    u_hat(xi) = (1/S) * sum_t exp(-i pi <xi, x_t>)          (estimation)
    u(x)      = (1/2^d) * sum_{xi in Low} u_hat(xi) exp(+i pi <xi, x>)

so that estimating, inverting, and re-estimating is a fixed point.  A
hypothesis density is the clipped real part ``h(x) = max(0, Re u(x))``.

Coefficients are estimated only for one representative of each ``+-xi``
pair and mirrored by conjugation, which enforces ``u_hat(-xi) =
conj(u_hat(xi))`` structurally (real data).  Accumulation is chunked with a
fixed chunk size and partial sums are reduced in chunk order, so results
are bit-identical regardless of the worker count used to compute chunks.
"""

from __future__ import annotations

import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .core import as_points, worker_count
from .errors import DomainError, ParameterError, ResourceError

CHUNK = 1 << 15

LATTICE_CAP_DEFAULT = 10**8


@dataclass(frozen=True)
class FrequencySet:
    """All ``xi in Z^d`` with ``||xi||_inf <= T`` in lexicographic order."""

    d: int
    T: int

    def __post_init__(self):
        if self.d < 1 or self.T < 0:
            raise ParameterError("need d >= 1 and T >= 0")

    @property
    def size(self) -> int:
        return (2 * self.T + 1) ** self.d

    @property
    def frequencies(self) -> np.ndarray:
        """``(size, d)`` int array; row order is the canonical storage order."""
        rng = np.arange(-self.T, self.T + 1)
        grids = np.meshgrid(*([rng] * self.d), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)


def build_low(d: int, T: int, cap: int = LATTICE_CAP_DEFAULT) -> FrequencySet:
    """Enumerate the cutoff-``T`` lattice; refuse sizes above ``cap``."""
    if T < 0:
        raise ParameterError(f"cutoff T must be >= 0, got {T}")
    size = (2 * T + 1) ** d
    if size > cap:
        raise ResourceError(f"frequency lattice of size {size} exceeds cap {cap} (T={T}, d={d})")
    return FrequencySet(d=d, T=T)


@dataclass(frozen=True)
class FourierHypothesis:
    """Coefficients on a frequency lattice plus the clipping rule.

    ``coeffs`` is aligned with ``freqs.frequencies``.  With ``clip`` set the
    hypothesis evaluates to ``max(0, Re u(x))``; otherwise to ``Re u(x)``.
    """

    freqs: FrequencySet
    coeffs: np.ndarray
    clip: bool = False

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.freqs.size,):
            raise ParameterError(
                f"coefficient vector of length {c.shape} does not match lattice size {self.freqs.size}"
            )
        object.__setattr__(self, "coeffs", c)

    @property
    def d(self) -> int:
        return self.freqs.d

    @property
    def T(self) -> int:
        return self.freqs.T

    def clipped(self) -> "FourierHypothesis":
        return replace(self, clip=True)

    def coeff_tensor(self) -> np.ndarray:
        """Coefficients as a ``(2T+1,)*d`` tensor (lexicographic = C order)."""
        n = 2 * self.T + 1
        return self.coeffs.reshape((n,) * self.d)


# ---------------------------------------------------------------------------
# estimation
# ---------------------------------------------------------------------------


def _chunk_slices(n: int):
    return [slice(i, min(i + CHUNK, n)) for i in range(0, n, CHUNK)]


def _powers(z: np.ndarray, T: int) -> np.ndarray:
    """``(len(z), T+1)`` table of ``z**k`` built by iterated multiplication."""
    out = np.empty((z.shape[0], T + 1), dtype=complex)
    out[:, 0] = 1.0
    for k in range(1, T + 1):
        np.multiply(out[:, k - 1], z, out=out[:, k])
    return out


def _chunk_sums_1d(z: np.ndarray, T: int) -> np.ndarray:
    """Sums of ``z**k`` for ``k = 0..T`` over one chunk."""
    out = np.empty(T + 1, dtype=complex)
    running = np.ones_like(z)
    out[0] = z.shape[0]
    for k in range(1, T + 1):
        running = running * z
        out[k] = running.sum()
    return out


def _chunk_sums_2d(z: np.ndarray, T: int) -> np.ndarray:
    """Sums of ``z1**k1 * z2**k2`` for ``k1 = 0..T``, ``k2 = -T..T``."""
    p1 = _powers(z[:, 0], T)  # (n, T+1)
    p2_pos = _powers(z[:, 1], T)  # (n, T+1)
    p2 = np.concatenate([np.conj(p2_pos[:, :0:-1]), p2_pos], axis=1)  # k2 = -T..T
    return p1.T @ p2  # (T+1, 2T+1)


def _chunk_sums_nd(z: np.ndarray, T: int, half: np.ndarray) -> np.ndarray:
    tables = [_powers(z[:, j], T) for j in range(z.shape[1])]
    out = np.empty(half.shape[0], dtype=complex)
    for i, xi in enumerate(half):
        prod = np.ones(z.shape[0], dtype=complex)
        for j, k in enumerate(xi):
            col = tables[j][:, abs(int(k))]
            prod = prod * (col if k >= 0 else np.conj(col))
        out[i] = prod.sum()
    return out


def _half_lattice(freqs: FrequencySet) -> np.ndarray:
    """One representative per ``+-xi`` pair: first nonzero coordinate > 0."""
    xs = freqs.frequencies
    keep = np.zeros(xs.shape[0], dtype=bool)
    for i, xi in enumerate(xs):
        nz = xi[xi != 0]
        keep[i] = nz.size == 0 or nz[0] > 0
    return xs[keep]


def _map_reduce_chunks(fn, slices, workers: int):
    """Apply ``fn`` per chunk and reduce partials in fixed chunk order."""
    if workers > 1 and len(slices) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(fn, slices))
    else:
        partials = [fn(s) for s in slices]
    return np.sum(np.stack(partials, axis=0), axis=0)


def estimate_coefficients(
    samples: np.ndarray,
    freqs: FrequencySet,
    workers: int | None = None,
) -> FourierHypothesis:
    """Empirical characteristic-function values on the lattice (unclipped).

    Every sample must lie in ``[-1, 1]^d``.  Deterministic given the sample
    order; independent of ``workers``.
    """
    pts = as_points(samples, d=freqs.d)
    if pts.shape[0] == 0:
        raise ParameterError("cannot estimate coefficients from zero samples")
    if np.abs(pts).max() > 1.0:
        raise DomainError("estimate_coefficients requires samples in [-1,1]^d")
    w = worker_count() if workers is None else workers
    n = pts.shape[0]
    T, d = freqs.T, freqs.d
    z = np.exp(-1j * np.pi * pts)
    slices = _chunk_slices(n)

    if d == 1:
        sums = _map_reduce_chunks(lambda s: _chunk_sums_1d(z[s, 0], T), slices, w)
        pos = sums / n  # xi = 0..T
        full = np.concatenate([np.conj(pos[:0:-1]), pos])
    elif d == 2:
        sums = _map_reduce_chunks(lambda s: _chunk_sums_2d(z[s], T), slices, w)
        upper = sums / n  # xi1 = 0..T, xi2 = -T..T
        full = np.empty((2 * T + 1, 2 * T + 1), dtype=complex)
        full[T:, :] = upper
        full[:T, :] = np.conj(upper[:0:-1, ::-1])
        full = full.ravel()
    else:
        half = _half_lattice(freqs)
        sums = _map_reduce_chunks(lambda s: _chunk_sums_nd(z[s], T, half), slices, w)
        est = sums / n
        full = np.empty(freqs.size, dtype=complex)
        index = {tuple(xi): i for i, xi in enumerate(freqs.frequencies)}
        for xi, val in zip(half, est):
            full[index[tuple(xi)]] = val
            full[index[tuple(-xi)]] = np.conj(val)
    return FourierHypothesis(freqs=freqs, coeffs=full, clip=False)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def evaluate(h: FourierHypothesis, points: np.ndarray) -> np.ndarray:
    """Direct ``O(|Low|)``-per-point synthesis at arbitrary points.

    Points must lie in ``[-1,1]^d``; returns ``Re u`` (clipped at 0 when the
    hypothesis carries the clipping rule).
    """
    pts = as_points(points, d=h.d)
    if pts.size and np.abs(pts).max() > 1.0 + 1e-12:
        raise DomainError("evaluate requires points in [-1,1]^d")
    xs = h.freqs.frequencies.astype(float)
    out = np.empty(pts.shape[0], dtype=float)
    step = max(1, (1 << 22) // max(xs.shape[0], 1))
    for s in _chunk_slices_of(pts.shape[0], step):
        phases = np.exp(1j * np.pi * (pts[s] @ xs.T))
        out[s] = np.real(phases @ h.coeffs) / 2**h.d
    if h.clip:
        np.maximum(out, 0.0, out=out)
    return out


def _chunk_slices_of(n: int, step: int):
    return [slice(i, min(i + step, n)) for i in range(0, n, step)]


def evaluate_grid(h: FourierHypothesis, axes: list[np.ndarray]) -> np.ndarray:
    """Synthesis on a tensor grid via per-axis contraction.

    ``axes[j]`` holds the grid coordinates along dimension ``j``; the result
    has shape ``tuple(len(a) for a in axes)``.  Agrees with :func:`evaluate`
    to well below 1e-9; used by the evaluation harness only.
    """
    if len(axes) != h.d:
        raise ParameterError("one coordinate axis per dimension required")
    k = np.arange(-h.T, h.T + 1)
    mats = [np.exp(1j * np.pi * np.outer(np.asarray(ax, float), k)) for ax in axes]
    out = h.coeff_tensor()
    for j, mat in enumerate(mats):
        out = np.moveaxis(np.tensordot(mat, out, axes=([1], [j])), 0, j)
    vals = np.real(out) / 2**h.d
    if h.clip:
        vals = np.maximum(vals, 0.0)
    return vals


def evaluate_grid_fft(h: FourierHypothesis, n_per_axis: int, midpoint: bool = True) -> np.ndarray:
    """Synthesis on the uniform [-1,1)^d grid of ``n_per_axis`` cells per axis.

    Fast multidimensional transform path for the evaluation harness; must
    agree with the direct sum to 1e-9.  With ``midpoint`` the grid points are
    the cell centers ``-1 + (j + 1/2) * (2/n)``, otherwise the left edges.
    """
    n = int(n_per_axis)
    if n < 2 * h.T + 1:
        raise ParameterError(f"grid of {n} per axis aliases a T={h.T} hypothesis")
    k = np.arange(-h.T, h.T + 1)
    offset = -1.0 + (1.0 / n if midpoint else 0.0)
    twiddle = np.exp(1j * np.pi * k * offset)
    spec = np.zeros((n,) * h.d, dtype=complex)
    idx = np.ix_(*([k % n] * h.d))
    tensor = h.coeff_tensor()
    tw = tensor
    for j in range(h.d):
        shape = [1] * h.d
        shape[j] = k.size
        tw = tw * twiddle.reshape(shape)
    spec[idx] = tw
    vals = np.real(np.fft.ifftn(spec)) * n**h.d / 2**h.d
    if h.clip:
        vals = np.maximum(vals, 0.0)
    return vals


def grid_axes(n_per_axis: int, d: int, midpoint: bool = True) -> list[np.ndarray]:
    """Coordinates matching :func:`evaluate_grid_fft` for each axis."""
    j = np.arange(n_per_axis)
    ax = -1.0 + (j + (0.5 if midpoint else 0.0)) * (2.0 / n_per_axis)
    return [ax.copy() for _ in range(d)]


def parseval_norm(h: FourierHypothesis) -> float:
    """``(1/2^d) * sum |u_hat(xi)|^2 = \\int_{[-1,1]^d} |u|^2``."""
    return float(np.sum(np.abs(h.coeffs) ** 2)) / 2**h.d


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def hypothesis_to_json(h: FourierHypothesis, frame=None) -> str:
    """Serialize with coefficients in lattice lexicographic order.

    ``frame``, when given, must expose ``mu`` (vector) and ``t`` (scalar);
    floats carry 17 significant digits so round trips are byte-stable.
    """
    parts = [f'{{"version":1,"d":{h.d},"T":{h.T},"clip":{"true" if h.clip else "false"}']
    if frame is not None:
        mu = ",".join(_fmt(v) for v in np.asarray(frame.mu, float).ravel())
        parts.append(f',"frame":{{"mu":[{mu}],"t":{_fmt(frame.t)}}}')
    else:
        parts.append(',"frame":null')
    rows = []
    for xi, c in zip(h.freqs.frequencies, h.coeffs):
        xi_s = ",".join(str(int(v)) for v in xi)
        rows.append(f'{{"xi":[{xi_s}],"re":{_fmt(c.real)},"im":{_fmt(c.imag)}}}')
    parts.append(',"coeffs":[' + ",".join(rows) + "]}")
    return "".join(parts)


def hypothesis_from_json(text: str):
    """Inverse of :func:`hypothesis_to_json`; returns ``(hypothesis, frame_dict)``."""
    obj = json.loads(text)
    if obj.get("version") != 1:
        raise ParameterError(f"unsupported hypothesis version {obj.get('version')!r}")
    freqs = build_low(int(obj["d"]), int(obj["T"]))
    coeffs = np.empty(freqs.size, dtype=complex)
    if len(obj["coeffs"]) != freqs.size:
        raise ParameterError("coefficient count does not match lattice size")
    for i, (row, xi) in enumerate(zip(obj["coeffs"], freqs.frequencies)):
        if list(map(int, row["xi"])) != [int(v) for v in xi]:
            raise ParameterError("coefficients are not in lattice lexicographic order")
        coeffs[i] = complex(row["re"], row["im"])
    h = FourierHypothesis(freqs=freqs, coeffs=coeffs, clip=bool(obj["clip"]))
    return h, obj.get("frame")
