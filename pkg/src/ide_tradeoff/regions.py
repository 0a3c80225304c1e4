"""Rate vs detection-error tradeoff regions for IDE channels.

A region is the convex hull of points ``(P_e(p), R(p))`` over input pmfs
``p`` on ``D`` symbols, closed to the right in ``P_e`` and downward in
``R``. Its upper-left boundary is stored as a :class:`Frontier`.

Rates are evaluated as a sum of nonnegative KL-type terms rather than the
textbook difference of entropies; the two agree exactly, but the latter
loses all precision when the averaged channel is nearly fully depolarizing
(rates of order ``1e-11`` bits against ``log2 D``-sized terms).
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .channels import AvgParams, IdeParams, apply_ide, average_params, compose_unreliable
from .qmath import ValidationError, check_density, check_prob_vec, trace_norm, von_neumann_entropy

LN2 = math.log(2.0)
PE_TOL = 1e-12
CSV_HEADER = ("pe", "rate", "n", "p1", "p2")
MAX_BRUTEFORCE_D = 6


def _phi(x):
    """``(1 + x) ln(1 + x) - x`` for ``x >= -1``, accurate near zero."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 1e-4
    xs = x[small]
    out[small] = xs * xs * (0.5 - xs / 6.0 + xs * xs / 12.0)
    xl = x[~small]
    with np.errstate(divide="ignore", invalid="ignore"):
        out[~small] = np.where(xl <= -1.0, 1.0, (1.0 + xl) * np.log1p(np.maximum(xl, -1.0)) - xl)
    return out


def _rate_terms(D: int, avg: AvgParams, p) -> np.ndarray:
    """Per-symbol contribution (nats) to the mutual information of the averaged channel."""
    p = np.asarray(p, dtype=float)
    a = avg.alpha_bar
    y = a * p + avg.beta_bar / D
    safe = np.where(y > 0, y, 1.0)
    keep = y * _phi(a * (1.0 - p) / safe)
    leak = y * _phi(-a * p / safe)
    return np.where(y > 0, p * keep + (1.0 - p) * leak, 0.0)


def _check_len(D: int, p) -> np.ndarray:
    p = check_prob_vec(p)
    if p.size != D:
        raise ValidationError(f"distribution has length {p.size}, expected D = {D}")
    return p


def rate_bound(D: int, avg: AvgParams, p) -> float:
    """Mutual information (bits) of the averaged D-ary IDE classical channel under input ``p``."""
    p = _check_len(D, p)
    return float(_rate_terms(D, avg, p).sum() / LN2)


def _min_branch(D: int, params: IdeParams, p) -> np.ndarray:
    (p1, p2), (a1, a2), (b1, b2) = params.pi, params.alpha, params.beta
    return np.minimum(p1 * a1 * p + p1 * b1 / D, p2 * a2 * p + p2 * b2 / D)


def _erasure_floor(params: IdeParams) -> float:
    return min(params.pi[0] * params.gamma[0], params.pi[1] * params.gamma[1])


def detection_bound(D: int, params: IdeParams, p) -> float:
    """Lowest weighted detection error ``sum_i min_s pi_s P(y=i|s) + min_s pi_s gamma_s``."""
    p = _check_len(D, p)
    return float(_min_branch(D, params, p).sum() + _erasure_floor(params))


def rate_bound_many(D: int, avg: AvgParams, P: np.ndarray) -> np.ndarray:
    """Row-wise :func:`rate_bound` for an ``(N, D)`` array of pmfs (no validation)."""
    return _rate_terms(D, avg, P).sum(axis=-1) / LN2


def detection_bound_many(D: int, params: IdeParams, P: np.ndarray) -> np.ndarray:
    return _min_branch(D, params, P).sum(axis=-1) + _erasure_floor(params)


@dataclass(frozen=True)
class ClosedForms:
    r_max: float
    pe_min: float
    pe_star: float
    p_th: Optional[float]
    no_tradeoff: bool


def r_max_closed_form(D: int, avg: AvgParams) -> float:
    """Maximum rate, attained by the uniform input.

    Written as ``(c/D) [phi(a) + (D-1) phi(-b)] / ln 2`` with ``c`` the
    non-erased mass, which is algebraically the usual entropy difference.
    """
    c = avg.alpha_bar + avg.beta_bar
    if c <= 0.0 or avg.alpha_bar == 0.0:
        return 0.0
    a = avg.alpha_bar * (D - 1) / c
    b = avg.alpha_bar / c
    return float((c / D) * (_phi(a) + (D - 1) * _phi(-b)) / LN2)


def threshold(D: int, params: IdeParams) -> Optional[float]:
    """Crossing point of the two weighted likelihood lines, or None when parallel."""
    (p1, p2), (a1, a2), (b1, b2) = params.pi, params.alpha, params.beta
    slope = p1 * a1 - p2 * a2
    if abs(slope) <= PE_TOL:
        return None
    return (p2 * b2 - p1 * b1) / (slope * D)


def closed_forms(D: int, params: IdeParams) -> ClosedForms:
    (p1, p2), (a1, a2), (b1, b2) = params.pi, params.alpha, params.beta
    floor = _erasure_floor(params)
    pe_min = min(p1 * (a1 + b1 / D), p2 * (a2 + b2 / D)) + (D - 1) / D * min(p1 * b1, p2 * b2) + floor
    pe_star = min(p1 * (a1 + b1), p2 * (a2 + b2)) + floor
    p_th = threshold(D, params)
    # p_th is symmetric under swapping the states, so one test covers both orientations
    no_tradeoff = p_th is None or p_th <= 0.0 or p_th >= 1.0
    return ClosedForms(
        r_max=r_max_closed_form(D, average_params(params)),
        pe_min=pe_min,
        pe_star=pe_star,
        p_th=p_th,
        no_tradeoff=no_tradeoff,
    )


@dataclass(frozen=True)
class RatePoint:
    pe: float
    rate: float


@dataclass
class Frontier:
    """Upper-left boundary of a tradeoff region.

    ``pe`` is nondecreasing; the only repeated value is a vertical jump at
    the first ``pe`` (rate 0 first, then the best rate there). Past the
    last point the boundary stays flat at the last rate.
    ``witness[k]`` is the generating ``(n, p1, p2)`` or None.
    """

    pe: np.ndarray
    rate: np.ndarray
    witness: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.pe = np.asarray(self.pe, dtype=float)
        self.rate = np.asarray(self.rate, dtype=float)
        if not self.witness:
            self.witness = [None] * len(self.pe)

    def __len__(self) -> int:
        return len(self.pe)

    @property
    def points(self) -> list[RatePoint]:
        return [RatePoint(float(e), float(r)) for e, r in zip(self.pe, self.rate)]

    @property
    def pe_min(self) -> float:
        return float(self.pe[0])

    @property
    def r_max(self) -> float:
        return float(self.rate[-1])

    @property
    def pe_at_r_max(self) -> float:
        return float(self.pe[-1])

    def rate_at(self, pe):
        """Best rate at detection error ``pe`` (NaN below ``pe_min``)."""
        pe_arr = np.asarray(pe, dtype=float)
        xp, fp = self.pe, self.rate
        if len(xp) > 1 and xp[1] == xp[0]:
            xp, fp = xp[1:], fp[1:]
        out = np.interp(pe_arr, xp, fp)
        out = np.where(pe_arr < self.pe[0] - PE_TOL, np.nan, out)
        return float(out) if out.ndim == 0 else out

    def rows(self):
        for e, r, w in zip(self.pe, self.rate, self.witness):
            if w is None:
                yield (fmt(e), fmt(r), "", "", "")
            else:
                n, p1, p2 = w
                yield (fmt(e), fmt(r), str(int(n)), fmt(p1), fmt(p2))

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(self.rows())
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path) -> "Frontier":
        return cls.from_csv_text(Path(path).read_text())

    @classmethod
    def from_csv_text(cls, text: str) -> "Frontier":
        reader = csv.reader(io.StringIO(text))
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValidationError(f"unexpected frontier CSV header {header}")
        pe, rate, wit = [], [], []
        for row in reader:
            pe.append(float(row[0]))
            rate.append(float(row[1]))
            wit.append((int(row[2]), float(row[3]), float(row[4])) if row[2] else None)
        return cls(np.array(pe), np.array(rate), wit)


def fmt(x: float) -> str:
    """Stable 12-significant-digit rendering used in all CSV output."""
    x = float(x)
    if x == 0.0:
        return "0"
    return format(x, ".12g")


def _pareto_filter(pe, rate):
    """Indices of points not dominated (lower-or-equal pe with higher rate), sorted by pe."""
    order = np.lexsort((-rate, pe))
    r_sorted = rate[order]
    prev_best = np.concatenate(([-np.inf], np.maximum.accumulate(r_sorted)[:-1]))
    return order[r_sorted > prev_best]


def _hull_indices(pe, rate, pe_tol=PE_TOL) -> list[int]:
    """Upper concave chain through the Pareto points, stopping at the max rate."""
    idx = _pareto_filter(pe, rate)
    # plain floats: scalar indexing into numpy arrays dominates this loop otherwise
    xs, ys = pe[idx].tolist(), rate[idx].tolist()
    chain: list[int] = []
    for k, (x, y) in enumerate(zip(xs, ys)):
        if chain and x - xs[chain[-1]] <= pe_tol:
            # near-equal pe: the later point has the higher rate
            chain.pop()
        while len(chain) >= 2:
            i, j = chain[-2], chain[-1]
            cross = (xs[j] - xs[i]) * (y - ys[i]) - (ys[j] - ys[i]) * (x - xs[i])
            if cross >= 0:
                chain.pop()
            else:
                break
        chain.append(k)
    return [int(idx[k]) for k in chain]


def _frontier_from(pe, rate, witness=None, meta=None, pe_tol=PE_TOL) -> Frontier:
    pe = np.asarray(pe, dtype=float)
    rate = np.asarray(rate, dtype=float)
    if pe.size == 0:
        raise ValueError("cannot take the hull of an empty point set")
    chain = _hull_indices(pe, rate, pe_tol)
    h_pe = [float(pe[k]) for k in chain]
    h_rate = [float(rate[k]) for k in chain]
    h_wit = [witness[k] if witness is not None else None for k in chain]
    if h_rate[0] > 0.0:
        # rate 0 is always admissible at the smallest error; record it as a jump
        lowest = np.flatnonzero(np.abs(pe - h_pe[0]) <= pe_tol)
        base = lowest[np.argmin(rate[lowest])]
        h_pe.insert(0, h_pe[0])
        h_rate.insert(0, 0.0)
        h_wit.insert(0, witness[base] if witness is not None and rate[base] == 0.0 else None)
    return Frontier(np.array(h_pe), np.array(h_rate), h_wit, dict(meta or {}))


def upper_convex_hull(points) -> Frontier:
    """Upper-left convex boundary of a point set.

    ``points`` holds :class:`RatePoint` objects or ``(pe, rate)`` pairs.
    """
    pts = [(p.pe, p.rate) if isinstance(p, RatePoint) else tuple(p) for p in points]
    if not pts:
        raise ValueError("cannot take the hull of an empty point set")
    arr = np.asarray(pts, dtype=float)
    return _frontier_from(arr[:, 0], arr[:, 1])


def feasible_p1(D: int, n: int) -> tuple[float, float]:
    """Interval of ``p1`` for which ``p2 = (1 - n p1)/(D - n)`` lies in ``[0, 1]``."""
    if n == D:
        return 1.0 / D, 1.0 / D
    return max(0.0, (1.0 - (D - n)) / n), min(1.0, 1.0 / n)


def _p2_of(D: int, n, p1):
    n = np.asarray(n, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        p2 = np.where(n < D, (1.0 - n * p1) / np.maximum(D - n, 1.0), 0.0)
    return np.clip(p2, 0.0, 1.0)


def two_value_points(D: int, params: IdeParams, n, p1):
    """``(pe, rate, p2)`` for two-value pmfs ``p1`` on ``n`` symbols and ``p2`` on the rest."""
    avg = average_params(params)
    n = np.asarray(n, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    p2 = _p2_of(D, n, p1)
    rest = D - n
    rate = (n * _rate_terms(D, avg, p1) + rest * _rate_terms(D, avg, p2)) / LN2
    pe = n * _min_branch(D, params, p1) + rest * _min_branch(D, params, p2) + _erasure_floor(params)
    return pe, rate, p2


def _grid_for(D: int, n: int, grid: int, p_th: Optional[float]) -> np.ndarray:
    lo, hi = feasible_p1(D, n)
    if hi <= lo:
        return np.array([lo])
    pts = [np.linspace(lo, hi, grid)]
    if p_th is not None:
        # kinks of the detection bound: p1 or p2 sitting exactly on the threshold
        extra = [p_th]
        if n < D:
            extra.append((1.0 - (D - n) * p_th) / n)
        pts.append(np.array([v for v in extra if lo <= v <= hi]))
    return np.unique(np.concatenate(pts))


def _sweep_chunk(D, params, ns, grid, p_th):
    n_list, p1_list = [], []
    for n in ns:
        g = _grid_for(D, n, grid, p_th)
        n_list.append(np.full(g.size, n))
        p1_list.append(g)
    n_arr = np.concatenate(n_list)
    p1_arr = np.concatenate(p1_list)
    pe, rate, p2 = two_value_points(D, params, n_arr, p1_arr)
    keep = _pareto_filter(pe, rate)
    return n_arr[keep], p1_arr[keep], p2[keep], pe[keep], rate[keep]


def sweep_points(D: int, params: IdeParams, grid: int = 512):
    """Every grid point ``(n, p1, p2, pe, rate)`` of the two-value family (no filtering)."""
    p_th = threshold(D, params)
    n_arr, p1_arr = [], []
    for n in range(1, D + 1):
        g = _grid_for(D, n, grid, p_th)
        n_arr.append(np.full(g.size, n))
        p1_arr.append(g)
    n_arr = np.concatenate(n_arr)
    p1_arr = np.concatenate(p1_arr)
    pe, rate, p2 = two_value_points(D, params, n_arr, p1_arr)
    return n_arr, p1_arr, p2, pe, rate


def frontier_r1(
    D: int,
    params: IdeParams,
    grid: int = 512,
    refine: int = 16,
    workers: int = 1,
    chunk: int = 64,
) -> Frontier:
    """Frontier of the region generated by two-value input pmfs.

    Every ``n`` in ``[1, D]`` is swept on a ``grid``-point ``p1`` mesh.
    One refinement pass then adds ``refine`` extra ``p1`` samples inside
    the mesh cells adjacent to each hull vertex (0 disables it).
    """
    if grid < 2:
        raise ValueError(f"grid must be >= 2, got {grid}")
    p_th = threshold(D, params)
    chunks = [range(s, min(s + chunk, D + 1)) for s in range(1, D + 1, chunk)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda ns: _sweep_chunk(D, params, ns, grid, p_th), chunks))
    else:
        parts = [_sweep_chunk(D, params, ns, grid, p_th) for ns in chunks]
    n_arr, p1_arr, p2_arr, pe, rate = (np.concatenate(col) for col in zip(*parts))

    if refine > 0:
        chain = _hull_indices(pe, rate)
        add_n, add_p1 = [], []
        for k in chain:
            n = int(n_arr[k])
            lo, hi = feasible_p1(D, n)
            if hi <= lo:
                continue
            h = (hi - lo) / (grid - 1)
            local = np.linspace(max(lo, p1_arr[k] - h), min(hi, p1_arr[k] + h), refine + 2)[1:-1]
            add_n.append(np.full(local.size, n))
            add_p1.append(local)
        if add_n:
            new_n = np.concatenate(add_n)
            new_p1 = np.concatenate(add_p1)
            new_pe, new_rate, new_p2 = two_value_points(D, params, new_n, new_p1)
            n_arr = np.concatenate([n_arr, new_n])
            p1_arr = np.concatenate([p1_arr, new_p1])
            p2_arr = np.concatenate([p2_arr, new_p2])
            pe = np.concatenate([pe, new_pe])
            rate = np.concatenate([rate, new_rate])
            keep = _pareto_filter(pe, rate)
            n_arr, p1_arr, p2_arr, pe, rate = n_arr[keep], p1_arr[keep], p2_arr[keep], pe[keep], rate[keep]

    witness = [(int(n), float(a), float(b)) for n, a, b in zip(n_arr, p1_arr, p2_arr)]
    meta = {"D": D, "grid": grid, "refine": refine, "params": params.to_dict()}
    return _frontier_from(pe, rate, witness, meta)


def _sample_simplex(rng, D: int, samples: int) -> np.ndarray:
    conc = (0.05, 0.2, 1.0, 5.0)
    per = -(-samples // len(conc))
    blocks = [rng.dirichlet(np.full(D, c), size=per) for c in conc]
    blocks.append(np.eye(D))
    blocks.append(np.full((1, D), 1.0 / D))
    return np.vstack(blocks)


def frontier_r2_bruteforce(
    D: int,
    params: IdeParams,
    samples: int = 100_000,
    rng_seed: int = 0,
    rounds: int = 6,
) -> Frontier:
    """Frontier over unrestricted pmfs by random search; an oracle for small ``D``.

    Dirichlet draws at several concentrations (plus vertices and the
    uniform pmf) seed the hull, then each round perturbs the current hull
    witnesses on a shrinking scale, spending about ``samples`` new pmfs per round.
    """
    if D < 1:
        raise ValueError(f"D must be positive, got {D}")
    if D > MAX_BRUTEFORCE_D:
        raise ValueError(f"brute force limited to D <= {MAX_BRUTEFORCE_D}, got {D}")
    avg = average_params(params)
    meta = {"D": D, "samples": samples, "rng_seed": rng_seed, "params": params.to_dict()}
    if D == 1:
        P = np.ones((1, 1))
        return _frontier_from(detection_bound_many(D, params, P), rate_bound_many(D, avg, P), meta=meta)

    rng = np.random.default_rng(rng_seed)
    P = _sample_simplex(rng, D, samples)
    pe = detection_bound_many(D, params, P)
    rate = rate_bound_many(D, avg, P)
    for r in range(rounds):
        chain = _hull_indices(pe, rate)
        # fixed budget per round: on a dense hull, seed from an evenly spaced subset
        seeds = np.asarray(chain)
        max_seeds = max(1, samples // 8)
        if seeds.size > max_seeds:
            seeds = seeds[np.linspace(0, seeds.size - 1, max_seeds).astype(int)]
        per_vertex = max(1, samples // seeds.size)
        scale = 0.3 * 0.4**r
        base = P[seeds]
        reps = np.repeat(base, per_vertex, axis=0)
        noise = rng.dirichlet(np.ones(D), size=reps.shape[0])
        eps = rng.uniform(0.0, scale, size=(reps.shape[0], 1))
        mixed = (1.0 - eps) * reps + eps * noise
        logn = reps * np.exp(scale * rng.standard_normal(reps.shape))
        logn /= logn.sum(axis=1, keepdims=True)
        Q = np.vstack([mixed, logn])
        P = np.vstack([P[chain], Q])
        pe = np.concatenate([pe[chain], detection_bound_many(D, params, Q)])
        rate = np.concatenate([rate[chain], rate_bound_many(D, avg, Q)])
        # only hull vertices seed the next round, so nothing else is kept
        keep = _hull_indices(pe, rate)
        P, pe, rate = P[keep], pe[keep], rate[keep]
    return _frontier_from(pe, rate, meta=meta)


def frontier_gap(a: Frontier, b: Frontier, points: int = 2001) -> float:
    """Largest rate difference ``|a - b|`` on a common pe grid where both are defined."""
    lo = max(a.pe_min, b.pe_min)
    hi = max(a.pe_at_r_max, b.pe_at_r_max, lo)
    grid = np.linspace(lo, hi, points)
    return float(np.max(np.abs(a.rate_at(grid) - b.rate_at(grid))))


def converse_outer_point(params: IdeParams, ensemble, weights=None) -> RatePoint:
    """Holevo-type rate cap and trace-norm detection floor for one input ensemble.

    Only uniform weights are supported.
    """
    states = [check_density(s) for s in ensemble]
    if not states:
        raise ValueError("ensemble must be nonempty")
    dims = {s.shape[0] for s in states}
    if len(dims) != 1:
        raise ValidationError(f"ensemble states have mixed dimensions {sorted(dims)}")
    if dims.pop() != params.d:
        raise ValidationError(f"ensemble dimension does not match d = {params.d}")
    if weights is not None:
        w = np.asarray(weights, dtype=float)
        if w.shape != (len(states),) or np.max(np.abs(w - 1.0 / len(states))) > 1e-12:
            raise ValueError("only uniform ensemble weights are supported")
    sigma = sum(states) / len(states)
    avg_out = von_neumann_entropy(apply_ide(params, "avg", sigma))
    cond = np.mean([von_neumann_entropy(apply_ide(params, "avg", s)) for s in states])
    rate = max(avg_out - cond, 0.0)
    diff = params.pi[0] * apply_ide(params, 1, sigma) - params.pi[1] * apply_ide(params, 2, sigma)
    pe = 0.5 * (1.0 - trace_norm(diff))
    return RatePoint(pe=float(pe), rate=float(rate))


def unreliable_frontier(params: IdeParams, alpha_tilde: float, grid: int = 512, refine: int = 16) -> Frontier:
    """Hull of superdense coding over noisy entanglement together with the unentangled region."""
    d = params.d
    sdc = frontier_r1(d * d, compose_unreliable(params, alpha_tilde), grid=grid, refine=refine)
    plain = frontier_r1(d, params, grid=grid, refine=refine)
    pe = np.concatenate([sdc.pe, plain.pe])
    rate = np.concatenate([sdc.rate, plain.rate])
    witness = list(sdc.witness) + list(plain.witness)
    meta = {"d": d, "alpha_tilde": alpha_tilde, "grid": grid, "params": params.to_dict()}
    return _frontier_from(pe, rate, witness, meta)
