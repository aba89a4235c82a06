"""Monte Carlo estimation of the arm-event probabilities.

Trial ``t`` under master seed ``s`` draws its coloring from a Philox stream
with key ``s`` and counter ``(0, 0, 0, t)``, so each trial's coloring is a
pure function of (s, t) and the success counts do not depend on how trials
are spread over workers.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from statistics import NormalDist

import numpy as np

from ..exceptions import DomainError
from .detect import Workspace, _events
from .lattice import Lattice, build_lattice

EVENTS = ("B", "BW", "BB")
CSV_COLUMNS = ("event", "tau", "n", "trials", "successes", "p_hat", "stderr",
               "ci_low", "ci_high", "exact", "abs_err", "seed")

_Z95 = NormalDist().inv_cdf(0.975)
_SEED_MAX = 2**64


def trial_stream(seed: int, trial: int) -> np.random.Generator:
    """Independent generator for one trial."""
    seed = int(seed)
    if not 0 <= seed < _SEED_MAX:
        raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, int(trial)]))


def sample_coloring(lat: Lattice, stream: np.random.Generator) -> np.ndarray:
    """Fair i.i.d. colors, 1 = black; one random bit per vertex."""
    V = lat.num_vertices
    raw = np.frombuffer(stream.bytes((V + 7) // 8), dtype=np.uint8)
    return np.unpackbits(raw, count=V, bitorder="little")


def wilson_interval(successes: int, trials: int, z: float = _Z95):
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise DomainError("trials must be positive")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    centre = (p + z2 / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom
    lo = max(0.0, centre - half)
    hi = min(1.0, centre + half)
    # guard against rounding pushing p_hat a hair outside
    return min(lo, p), max(hi, p)


@dataclass(frozen=True)
class Estimate:
    event: str
    tau: float
    n: int
    trials: int
    successes: int
    p_hat: float
    stderr: float
    ci_low: float
    ci_high: float
    seed: int
    geometry: str = "cylinder"

    @classmethod
    def from_counts(cls, event, tau, n, trials, successes, seed, geometry="cylinder"):
        p = successes / trials
        lo, hi = wilson_interval(successes, trials)
        return cls(event, float(tau), int(n), int(trials), int(successes), p,
                   math.sqrt(p * (1.0 - p) / trials), lo, hi, int(seed), geometry)


def exact_value(event: str, tau: float) -> float:
    from ..formulas import p_b_eta, p_bb, p_bw_eta

    if event == "B":
        return p_b_eta(tau)
    if event == "BW":
        return p_bw_eta(tau)
    if event == "BB":
        return p_bb(tau).value
    raise ValueError(f"unknown event {event!r}")


def _workers(workers):
    cap = os.environ.get("ANNULUS_XING_THREADS")
    if workers is None:
        workers = os.cpu_count() or 1
    workers = max(1, int(workers))
    if cap:
        workers = min(workers, max(1, int(cap)))
    return workers


def _run_block(lat, seed, start, stop, need_bb):
    V = lat.num_vertices
    ws = Workspace(V)
    out = np.zeros(3, dtype=np.bool_)
    counts = np.zeros(3, dtype=np.int64)
    nbr, back, side = lat.nbr, lat.back, lat.side
    for t in range(start, stop):
        col = sample_coloring(lat, trial_stream(seed, t))
        _events(nbr, back, side, col, out, ws.uf, ws.flag, ws.f_int, ws.f_edge,
                ws.f_src, ws.f_snk, ws.parent, ws.queue, need_bb)
        counts[0] += out[0]
        counts[1] += out[0] and out[1]
        counts[2] += out[2]
    return counts


def count_events(lat: Lattice, trials: int, seed: int, workers=None, need_bb=True,
                 block: int = 256) -> np.ndarray:
    """Success counts of (B, BW, BB) over trials 0..trials-1."""
    trials = int(trials)
    edges = list(range(0, trials, block)) + [trials]
    spans = list(zip(edges[:-1], edges[1:]))
    w = _workers(workers)
    if w == 1 or len(spans) == 1:
        parts = [_run_block(lat, seed, a, b, need_bb) for a, b in spans]
    else:
        with ThreadPoolExecutor(max_workers=w) as pool:
            parts = list(pool.map(lambda ab: _run_block(lat, seed, ab[0], ab[1], need_bb), spans))
    return np.sum(parts, axis=0) if parts else np.zeros(3, dtype=np.int64)


def estimate_events(events, tau: float, n: int, trials: int, seed: int, workers=None,
                    geometry: str = "cylinder", lattice: Lattice | None = None):
    """Estimates for several events from one shared set of colorings.

    Identical to calling :func:`estimate` once per event with the same seed.
    """
    events = tuple(events)
    for e in events:
        if e not in EVENTS:
            raise ValueError(f"event must be one of {EVENTS}, got {e!r}")
    if int(trials) < 100:
        raise DomainError(f"need at least 100 trials, got {trials}")
    lat = lattice if lattice is not None else build_lattice(tau, n, geometry)
    counts = count_events(lat, trials, seed, workers, need_bb="BB" in events)
    return [Estimate.from_counts(e, tau, n, trials, int(counts[EVENTS.index(e)]), seed, lat.geometry)
            for e in events]


def estimate(event: str, tau: float, n: int, trials: int, seed: int, workers=None,
             geometry: str = "cylinder") -> Estimate:
    """Monte Carlo estimate of P[event] at modulus tau and mesh n."""
    return estimate_events([event], tau, n, trials, seed, workers, geometry)[0]


def estimate_row(est: Estimate, exact: float | None = None) -> dict:
    if exact is None:
        exact = exact_value(est.event, est.tau)
    row = {k: getattr(est, k) for k in CSV_COLUMNS if hasattr(est, k)}
    row["exact"] = exact
    row["abs_err"] = abs(est.p_hat - exact)
    return {k: row[k] for k in CSV_COLUMNS}


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[k]) for k in CSV_COLUMNS])
    return buf.getvalue()


def to_json_lines(rows) -> str:
    return "".join(json.dumps(r) + "\n" for r in rows)


def estimate_to_dict(est: Estimate) -> dict:
    return asdict(est)
