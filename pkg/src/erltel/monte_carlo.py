"""Monte Carlo simulation of the alternating-velocity motion.

The particle starts at 0 with velocity ``+v`` and flips direction at the end
of each sojourn; sojourns are i.i.d. m-Erlang(lam), drawn as sums of ``m``
inverse-CDF exponentials.

Samples are produced in fixed-size chunks. Chunk ``i`` of a run seeded with
``seed`` uses the stream ``SeedSequence(seed, spawn_key=(i,))``, so results do
not depend on how many workers process the chunks.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .closed_form import ModelParams

__all__ = [
    "SimConfig",
    "Histogram",
    "WindowEstimate",
    "CHUNK_SIZE",
    "make_rng",
    "sample_erlang",
    "erlang_draws",
    "sample_position",
    "simulate_positions",
    "estimate_histogram",
    "estimate_window",
    "estimate_windows",
    "histogram_to_csv",
    "resolve_workers",
]

CHUNK_SIZE = 1 << 18
THREADS_ENV = "ERLTEL_THREADS"


def make_rng(seed, chunk=0):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def resolve_workers(workers=None):
    """Worker count: explicit value, else ``ERLTEL_THREADS``, else CPU count (0 = auto)."""
    if workers is None:
        raw = os.environ.get(THREADS_ENV, "0")
        try:
            workers = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if workers < 0:
        raise ValueError("worker count must be >= 0")
    return workers or (os.cpu_count() or 1)


def erlang_draws(m, lam, rng, size):
    """``size`` m-Erlang(lam) variates as sums of ``-log(1 - U) / lam``."""
    u = rng.random((m, size))
    return -np.log1p(-u).sum(axis=0) / lam


def sample_erlang(m, lam, rng):
    """One m-Erlang(lam) variate."""
    return float(erlang_draws(m, lam, rng, 1)[0])


def sample_position(params: ModelParams, t, rng):
    """Position at time ``t`` of a single path."""
    if not t > 0:
        raise ValueError("t must be positive")
    elapsed = 0.0
    pos = 0.0
    sign = 1.0
    while True:
        theta = sample_erlang(params.m, params.lam, rng)
        if elapsed + theta >= t:
            return params.v * (pos + sign * (t - elapsed))
        pos += sign * theta
        elapsed += theta
        sign = -sign


def simulate_positions(params: ModelParams, t, n, rng):
    """Vectorized positions of ``n`` paths.

    Returns ``(positions, atom)`` where ``atom`` flags paths whose first
    sojourn outlasted ``t`` (those sit exactly at ``v t``).
    """
    pos = np.zeros(n)
    elapsed = np.zeros(n)
    sign = np.ones(n)
    atom = np.zeros(n, dtype=bool)
    active = np.arange(n)
    first = True
    while active.size:
        theta = erlang_draws(params.m, params.lam, rng, active.size)
        remaining = t - elapsed[active]
        done = theta >= remaining
        if first:
            atom[active[done]] = True
            first = False
        step = np.where(done, remaining, theta)
        pos[active] += sign[active] * step
        elapsed[active] += theta
        sign[active] = -sign[active]
        active = active[~done]
    pos *= params.v
    pos[atom] = params.v * t
    return pos, atom


@dataclass(frozen=True)
class SimConfig:
    params: ModelParams
    t: float
    n_samples: int
    seed: int = 0
    n_bins: int = 100

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("t must be positive")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.n_bins < 1:
            raise ValueError("n_bins must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    bin_counts: np.ndarray
    atom_count: int
    n_samples: int
    seed: int
    config: SimConfig = field(repr=False)

    @property
    def widths(self):
        return np.diff(self.bin_edges)

    @property
    def bin_density(self):
        return self.bin_counts / (self.n_samples * self.widths)

    @property
    def stderr_per_bin(self):
        p = self.bin_counts / self.n_samples
        return np.sqrt(p * (1 - p) / self.n_samples) / self.widths

    @property
    def atom_fraction(self):
        return self.atom_count / self.n_samples

    @property
    def atom_stderr(self):
        p = self.atom_fraction
        return math.sqrt(p * (1 - p) / self.n_samples)


def _chunks(n):
    return [(i, min(CHUNK_SIZE, n - i * CHUNK_SIZE)) for i in range(-(-n // CHUNK_SIZE))]


def _run_chunks(job, n, workers):
    chunks = _chunks(n)
    workers = min(resolve_workers(workers), len(chunks))
    if workers <= 1:
        return [job(i, size) for i, size in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: job(*c), chunks))


def estimate_histogram(config: SimConfig, workers=None) -> Histogram:
    """Empirical density on ``n_bins`` equal bins over ``[-v t, v t]`` plus atom count."""
    p = config.params
    vt = p.v * config.t
    edges = np.linspace(-vt, vt, config.n_bins + 1)

    def job(i, size):
        pos, atom = simulate_positions(p, config.t, size, make_rng(config.seed, i))
        counts, _ = np.histogram(pos[~atom], bins=edges)
        return counts, int(atom.sum())

    results = _run_chunks(job, config.n_samples, workers)
    counts = np.sum([c for c, _ in results], axis=0)
    atoms = sum(a for _, a in results)
    return Histogram(edges, counts, atoms, config.n_samples, config.seed, config)


@dataclass(frozen=True)
class WindowEstimate:
    side: str
    eps: float
    p_hat: float
    rate_hat: float
    stderr: float
    n_samples: int


def estimate_window(params: ModelParams, t, side, eps, n_samples, seed=0, workers=None):
    """Estimate ``P{0 < vt - x(t) < eps v}/eps`` (upper) or ``P{vt + x(t) < eps v}/eps`` (lower).

    The upper window excludes the atom. ``stderr`` is the binomial standard
    error of ``rate_hat``.
    """
    if side not in ("upper", "lower"):
        raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")
    if not eps > 0:
        raise ValueError("eps must be positive")
    return estimate_windows(params, t, eps, n_samples, seed, workers)[side]


def estimate_windows(params: ModelParams, t, eps, n_samples, seed=0, workers=None):
    """Both window estimates from one simulation; returns ``{side: WindowEstimate}``."""
    vt = params.v * t
    width = eps * params.v

    def job(i, size):
        pos, atom = simulate_positions(params, t, size, make_rng(seed, i))
        gap_up = vt - pos
        upper = int(np.count_nonzero((gap_up > 0) & (gap_up < width) & ~atom))
        lower = int(np.count_nonzero(vt + pos < width))
        return upper, lower

    results = _run_chunks(job, n_samples, workers)
    out = {}
    for idx, side in enumerate(("upper", "lower")):
        count = sum(r[idx] for r in results)
        p_hat = count / n_samples
        se = math.sqrt(p_hat * (1 - p_hat) / n_samples) / eps
        out[side] = WindowEstimate(side, eps, p_hat, p_hat / eps, se, n_samples)
    return out


def histogram_to_csv(hist: Histogram, header_lines=()) -> str:
    """CSV with columns bin_left, bin_right, density, stderr and a final ATOM row."""
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bin_left", "bin_right", "density", "stderr"])
    dens = hist.bin_density
    se = hist.stderr_per_bin
    for i in range(len(dens)):
        w.writerow([_fmt(hist.bin_edges[i]), _fmt(hist.bin_edges[i + 1]), _fmt(dens[i]), _fmt(se[i])])
    vt = hist.bin_edges[-1]
    w.writerow(["ATOM", _fmt(vt), _fmt(hist.atom_fraction), _fmt(hist.atom_stderr)])
    return buf.getvalue()


def _fmt(x):
    return f"{float(x):.9g}"
