"""Seeded Monte Carlo of the per-slot detection and communication protocols.

Trials run over the classical channel induced by measuring each channel
output (computational basis without entanglement, Bell basis with it).
Outputs are drawn from the physical branch structure (keep / depolarize /
erase), not from a precomputed table, so the simulation is an independent
check on :func:`ide_tradeoff.channels.induced_classical_channel`.

Randomness: every block of ``BLOCK`` consecutive samples gets its own
Philox stream keyed by ``(seed, purpose, block index)``. Results are
therefore identical for any number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channels import (
    CondPmfTable,
    IdeParams,
    apply_ide,
    average_params,
    induced_classical_channel,
    lift_entangled_output,
)
from .qmath import bell_basis, check_prob_vec
from .regions import detection_bound, fmt, rate_bound

BLOCK = 1 << 16
MAX_QUANTUM_D = 4

_DETECT, _CHANNEL, _MI, _CODEBOOK, _DECODE = range(5)

REPORT_HEADER = ("seed", "trials", "D", "empirical_p1", "empirical_p2", "empirical_pd", "analytic_pd", "std_err")


def block_rng(seed: int, purpose: int, block: int) -> np.random.Generator:
    """Independent counter-based stream for one block of samples."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(purpose, block))
    return np.random.Generator(np.random.Philox(ss))


def _blocks(total: int):
    for b, start in enumerate(range(0, total, BLOCK)):
        yield b, start, min(BLOCK, total - start)


def _run_blocks(fn, total: int, workers: int):
    jobs = list(_blocks(total))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda job: fn(*job), jobs))
    return [fn(*job) for job in jobs]


def _check_D(params: IdeParams, D: int) -> None:
    if D not in (params.d, params.d * params.d):
        raise ValueError(f"D must be d={params.d} or d^2={params.d ** 2}, got {D}")


def sample_outputs(rng, params: IdeParams, D: int, x, s) -> np.ndarray:
    """Draw ``y`` for inputs ``x`` (1-based) in states ``s``: keep, depolarize, or erase (``y = 0``)."""
    x = np.asarray(x)
    s = np.asarray(s)
    alpha = np.asarray(params.alpha)[s - 1]
    beta = np.asarray(params.beta)[s - 1]
    u = rng.random(x.shape)
    noise = rng.integers(1, D + 1, size=x.shape)
    return np.where(u < alpha, x, np.where(u < alpha + beta, noise, 0))


def sample_states(rng, params: IdeParams, n: int) -> np.ndarray:
    return np.where(rng.random(n) < params.theta[0], 1, 2)


def sample_inputs(rng, p_x: np.ndarray, n: int) -> np.ndarray:
    return rng.choice(p_x.size, size=n, p=p_x) + 1


def map_decisions(table: CondPmfTable, p_x, pi) -> np.ndarray:
    """MAP decision for every output ``y`` in ``0..D``; ties go to state 1."""
    like = table.output_given_state(p_x)
    w1 = pi[0] * like[0]
    w2 = pi[1] * like[1]
    # likelihoods are sums of D terms; treat relative differences at rounding level as ties
    slack = 1e-12 * np.maximum(np.abs(w1), np.abs(w2))
    return np.where(w1 >= w2 - slack, 1, 2)


def map_detect(y: int, table: CondPmfTable, p_x, pi) -> int:
    """State estimate for one observed symbol ``y``."""
    if not 0 <= y <= table.D:
        raise ValueError(f"symbol {y} outside [0, {table.D}]")
    return int(map_decisions(table, p_x, pi)[y])


@dataclass
class SimConfig:
    seed: int
    trials: int
    D: int
    p_x: np.ndarray
    params: IdeParams
    slots: int = 1
    workers: int = 1

    def __post_init__(self):
        self.p_x = check_prob_vec(self.p_x)
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.slots < 1:
            raise ValueError(f"slots must be >= 1, got {self.slots}")
        if self.p_x.size != self.D:
            raise ValueError(f"p_x has length {self.p_x.size}, expected D = {self.D}")
        _check_D(self.params, self.D)


@dataclass
class DetectionReport:
    """Empirical vs analytic per-slot detection error.

    ``slot_tallies[t] = (n1, e1, n2, e2)``: trials in state 1, type I
    errors, trials in state 2, type II errors, for slot ``t``. A type whose
    state never occurred is reported as NaN.
    """

    seed: int
    trials: int
    D: int
    empirical_p1: float
    empirical_p2: float
    empirical_pd: float
    analytic_pd: float
    std_err: float
    slot_tallies: np.ndarray = field(repr=False, default=None)

    def row(self) -> tuple:
        return (
            str(self.seed),
            str(self.trials),
            str(self.D),
            fmt(self.empirical_p1),
            fmt(self.empirical_p2),
            fmt(self.empirical_pd),
            fmt(self.analytic_pd),
            fmt(self.std_err),
        )

    def to_csv(self) -> str:
        return ",".join(REPORT_HEADER) + "\n" + ",".join(self.row()) + "\n"


def _rate(errors: int, count: int) -> float:
    return errors / count if count else math.nan


def report_from_tallies(tallies, pi, seed, trials, D, analytic_pd) -> DetectionReport:
    n1, e1, n2, e2 = (int(v) for v in np.asarray(tallies).reshape(-1, 4).sum(axis=0))
    p_1 = _rate(e1, n1)
    p_2 = _rate(e2, n2)
    pd = pi[0] * p_1 + pi[1] * p_2
    var = 0.0
    for w, p, n in ((pi[0], p_1, n1), (pi[1], p_2, n2)):
        if n:
            var += w * w * p * (1.0 - p) / n
    return DetectionReport(seed, trials, D, p_1, p_2, pd, analytic_pd, math.sqrt(var), np.asarray(tallies))


def run_detection_trials(cfg: SimConfig) -> DetectionReport:
    """Simulate ``cfg.trials`` detection slots with the MAP detector."""
    params, D, p_x = cfg.params, cfg.D, cfg.p_x
    table = induced_classical_channel(params, D, "per_state")
    decide = map_decisions(table, p_x, params.pi)

    def work(block, start, n):
        rng = block_rng(cfg.seed, _DETECT, block)
        s = sample_states(rng, params, n)
        x = sample_inputs(rng, p_x, n)
        y = sample_outputs(rng, params, D, x, s)
        err = decide[y] != s
        slot = (start + np.arange(n)) % cfg.slots
        out = np.zeros((cfg.slots, 4), dtype=np.int64)
        out[:, 0] = np.bincount(slot[s == 1], minlength=cfg.slots)
        out[:, 1] = np.bincount(slot[(s == 1) & err], minlength=cfg.slots)
        out[:, 2] = np.bincount(slot[s == 2], minlength=cfg.slots)
        out[:, 3] = np.bincount(slot[(s == 2) & err], minlength=cfg.slots)
        return out

    tallies = sum(_run_blocks(work, cfg.trials, cfg.workers))
    analytic = detection_bound(D, params, p_x)
    return report_from_tallies(tallies, params.pi, cfg.seed, cfg.trials, D, analytic)


def empirical_channel_estimate(params: IdeParams, D: int, trials: int, seed: int, workers: int = 1) -> CondPmfTable:
    """Frequency estimate of ``P(y | x, s)`` with ``(x, s)`` drawn uniformly.

    The returned table carries the raw ``counts`` array.
    """
    _check_D(params, D)
    if trials < 10_000:
        raise ValueError(f"need at least 10^4 trials, got {trials}")
    cells = 2 * D * (D + 1)

    def work(block, start, n):
        rng = block_rng(seed, _CHANNEL, block)
        s = rng.integers(1, 3, size=n)
        x = rng.integers(1, D + 1, size=n)
        y = sample_outputs(rng, params, D, x, s)
        return np.bincount(((s - 1) * D + (x - 1)) * (D + 1) + y, minlength=cells)

    counts = sum(_run_blocks(work, trials, workers)).reshape(2, D, D + 1)
    rows = counts.sum(axis=2, keepdims=True)
    if np.any(rows == 0):
        raise ValueError("some (x, s) cells were never sampled; increase trials")
    return CondPmfTable(D, counts / rows, counts=counts)


def plugin_mutual_information(joint_counts) -> float:
    """Plug-in mutual information (bits) of a 2-d contingency table."""
    c = np.asarray(joint_counts, dtype=float)
    n = c.sum()
    px = c.sum(axis=1, keepdims=True)
    py = c.sum(axis=0, keepdims=True)
    nz = c > 0
    return float(np.sum(c[nz] / n * np.log2((c * n)[nz] / (px * py)[nz])))


def empirical_mutual_information(
    params: IdeParams, D: int, p_x, trials: int, seed: int, workers: int = 1
) -> float:
    """Plug-in estimate of ``I(X; Y)`` for the state-averaged channel (bits)."""
    _check_D(params, D)
    p_x = check_prob_vec(p_x)
    if p_x.size != D:
        raise ValueError(f"p_x has length {p_x.size}, expected D = {D}")

    def work(block, start, n):
        rng = block_rng(seed, _MI, block)
        s = sample_states(rng, params, n)
        x = sample_inputs(rng, p_x, n)
        y = sample_outputs(rng, params, D, x, s)
        return np.bincount((x - 1) * (D + 1) + y, minlength=D * (D + 1))

    joint = sum(_run_blocks(work, trials, workers)).reshape(D, D + 1)
    return plugin_mutual_information(joint)


def analytic_mutual_information(params: IdeParams, D: int, p_x) -> float:
    return rate_bound(D, average_params(params), p_x)


def quantum_measurement_sim(params: IdeParams, d: int, x: int, s: int) -> np.ndarray:
    """Born probabilities of the Bell-basis PVM plus erasure projector.

    Index 0 is the erasure outcome; index ``y`` in ``1..d^2`` is
    ``|phi_{i_y, j_y}>``.
    """
    if d > MAX_QUANTUM_D:
        raise ValueError(f"density-matrix path limited to d <= {MAX_QUANTUM_D}, got {d}")
    if d != params.d:
        raise ValueError(f"d = {d} does not match params.d = {params.d}")
    rho = lift_entangled_output(params, s, x)
    n = d * d
    vecs = np.zeros((n + 1, n + 1), dtype=complex)
    vecs[0, n] = 1.0
    vecs[1:, :n] = bell_basis(d)
    probs = np.einsum("ki,ij,kj->k", vecs.conj(), rho, vecs).real
    return np.clip(probs, 0.0, None)


def computational_measurement_sim(params: IdeParams, x: int, s: int) -> np.ndarray:
    """Born probabilities of the computational PVM on the unentangled channel output.

    Index 0 is erasure, index ``y`` in ``1..d`` is ``|y>``.
    """
    d = params.d
    rho = np.zeros((d, d))
    rho[x - 1, x - 1] = 1.0
    diag = np.real(np.diag(apply_ide(params, s, rho)))
    return np.concatenate(([diag[d]], diag[:d]))


@dataclass(frozen=True)
class Codebook:
    """``M x T`` matrix of 1-based input symbols."""

    entries: np.ndarray
    seed: int


def sample_codebook(p_x, M: int, T: int, seed: int) -> Codebook:
    p_x = check_prob_vec(p_x)
    if M < 1 or T < 1:
        raise ValueError(f"M and T must be >= 1, got M={M}, T={T}")
    total = M * T
    parts = []
    for block, start, n in _blocks(total):
        rng = block_rng(seed, _CODEBOOK, block)
        parts.append(sample_inputs(rng, p_x, n))
    return Codebook(np.concatenate(parts).reshape(M, T), seed)


def ml_decoding_error(
    params: IdeParams, D: int, p_x, M: int, T: int, trials: int, seed: int
) -> float:
    """Block error rate of maximum-likelihood decoding with fresh random codebooks.

    Toy-scale demonstration only (``M <= 8``, ``T <= 16``); ties count as errors.
    """
    if M > 8 or T > 16:
        raise ValueError("demo decoder limited to M <= 8 and T <= 16")
    _check_D(params, D)
    p_x = check_prob_vec(p_x)
    marg = induced_classical_channel(params, D, "marginal").probs[0]
    with np.errstate(divide="ignore"):
        loglik = np.log(marg)
    rng = block_rng(seed, _DECODE, 0)
    errors = 0
    for _ in range(trials):
        book = sample_inputs(rng, p_x, M * T).reshape(M, T)
        w = rng.integers(M)
        s = sample_states(rng, params, T)
        y = sample_outputs(rng, params, D, book[w], s)
        scores = loglik[book - 1, y[None, :]].sum(axis=1)
        best = np.flatnonzero(scores == scores.max())
        errors += not (best.size == 1 and best[0] == w)
    return errors / trials
