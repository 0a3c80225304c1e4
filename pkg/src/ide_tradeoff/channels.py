"""Identity-depolarizing-erasure channels and their induced classical channels.

An IDE channel on a d-level input keeps the state with probability
``alpha``, replaces it by ``I/d`` with probability ``beta`` and erases it
(flag ``|0>``, stored as the last basis vector) with probability ``gamma``.
The binary channel state ``s`` selects one of two such triples.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .qmath import (
    PROB_TOL,
    ValidationError,
    bell_state,
    boxplus,
    check_density,
    projector,
)

CONFIG_KEYS = ("d", "alpha1", "beta1", "gamma1", "alpha2", "beta2", "gamma2", "theta1", "pi1")


@dataclass(frozen=True)
class IdeParams:
    """Full parameterization ``d, (alpha_s, beta_s, gamma_s, theta_s, pi_s)``.

    Per-state values are stored as pairs indexed by ``s - 1``.
    """

    d: int
    alpha: tuple[float, float]
    beta: tuple[float, float]
    gamma: tuple[float, float]
    theta: tuple[float, float]
    pi: tuple[float, float]

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "theta", "pi"):
            val = tuple(float(v) for v in getattr(self, name))
            if len(val) != 2:
                raise ValidationError(f"{name} must have two entries, got {len(val)}")
            object.__setattr__(self, name, val)
        if int(self.d) != self.d or self.d < 2:
            raise ValidationError(f"d must be an integer >= 2, got {self.d!r}")
        object.__setattr__(self, "d", int(self.d))
        for name in ("alpha", "beta", "gamma", "theta", "pi"):
            for s, v in enumerate(getattr(self, name), start=1):
                if not (np.isfinite(v) and 0.0 <= v <= 1.0):
                    raise ValidationError(f"{name}{s} = {v!r} is outside [0, 1]")
        for s in (1, 2):
            total = self.alpha[s - 1] + self.beta[s - 1] + self.gamma[s - 1]
            if abs(total - 1.0) > PROB_TOL:
                raise ValidationError(
                    f"alpha{s} + beta{s} + gamma{s} = {total!r}, must equal 1"
                )
        if abs(sum(self.theta) - 1.0) > PROB_TOL:
            raise ValidationError(f"theta1 + theta2 = {sum(self.theta)!r}, must equal 1")
        if abs(sum(self.pi) - 1.0) > PROB_TOL:
            raise ValidationError(f"pi1 + pi2 = {sum(self.pi)!r}, must equal 1")
        if not all(0.0 < v < 1.0 for v in self.pi):
            raise ValidationError(f"pi must lie strictly inside (0, 1), got {self.pi}")

    @classmethod
    def from_states(cls, d, state1, state2, theta1, pi1=0.5) -> "IdeParams":
        """Build from two ``(alpha, beta, gamma)`` triples."""
        return cls(
            d=d,
            alpha=(state1[0], state2[0]),
            beta=(state1[1], state2[1]),
            gamma=(state1[2], state2[2]),
            theta=(theta1, 1.0 - theta1),
            pi=(pi1, 1.0 - pi1),
        )

    def triple(self, s: int) -> tuple[float, float, float]:
        if s not in (1, 2):
            raise ValueError(f"channel state must be 1 or 2, got {s!r}")
        return self.alpha[s - 1], self.beta[s - 1], self.gamma[s - 1]

    def replace(self, **changes) -> "IdeParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "alpha1": self.alpha[0],
            "beta1": self.beta[0],
            "gamma1": self.gamma[0],
            "alpha2": self.alpha[1],
            "beta2": self.beta[1],
            "gamma2": self.gamma[1],
            "theta1": self.theta[0],
            "pi1": self.pi[0],
        }

    @classmethod
    def from_dict(cls, cfg: dict) -> "IdeParams":
        missing = [k for k in CONFIG_KEYS if k not in cfg]
        if missing:
            raise ValidationError(f"config is missing keys: {', '.join(missing)}")
        unknown = sorted(set(cfg) - set(CONFIG_KEYS))
        if unknown:
            raise ValidationError(f"config has unknown keys: {', '.join(unknown)}")
        try:
            vals = {k: float(cfg[k]) for k in CONFIG_KEYS}
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"non-numeric config value: {exc}") from None
        return cls.from_states(
            vals["d"],
            (vals["alpha1"], vals["beta1"], vals["gamma1"]),
            (vals["alpha2"], vals["beta2"], vals["gamma2"]),
            vals["theta1"],
            vals["pi1"],
        )


@dataclass(frozen=True)
class AvgParams:
    """State-averaged triple ``(alpha_bar, beta_bar, gamma_bar)``."""

    alpha_bar: float
    beta_bar: float
    gamma_bar: float


def average_params(p: IdeParams) -> AvgParams:
    t1, t2 = p.theta
    return AvgParams(
        t1 * p.alpha[0] + t2 * p.alpha[1],
        t1 * p.beta[0] + t2 * p.beta[1],
        t1 * p.gamma[0] + t2 * p.gamma[1],
    )


def _triple(p: IdeParams, s) -> tuple[float, float, float]:
    if s == "avg":
        a = average_params(p)
        return a.alpha_bar, a.beta_bar, a.gamma_bar
    return p.triple(s)


def apply_ide(p: IdeParams, s, rho) -> np.ndarray:
    """Output ``alpha rho ⊞ beta I/d ⊞ gamma |0><0|`` of dimension ``d + 1``.

    ``s`` is 1, 2, or ``"avg"`` for the theta-averaged channel.
    """
    rho = check_density(rho)
    d = p.d
    if rho.shape[0] != d:
        raise ValidationError(f"input has dimension {rho.shape[0]}, channel expects {d}")
    a, b, g = _triple(p, s)
    flag = np.zeros((d + 1, d + 1))
    flag[d, d] = g
    return boxplus(a * rho, b * np.eye(d) / d, flag)


def symbol_to_bell(d: int, x: int) -> tuple[int, int]:
    """Map ``x`` in ``[1, d^2]`` to ``(i_x, j_x)`` in ``[0, d-1]^2``."""
    if not 1 <= x <= d * d:
        raise IndexError(f"symbol {x} outside [1, {d * d}]")
    return (x - 1) // d, (x - 1) % d


def lift_entangled_output(p: IdeParams, s: int, x: int) -> np.ndarray:
    """Receiver-side joint state after superdense-encoding ``x`` and one channel use.

    Returns ``alpha_s |phi_x><phi_x| ⊞ (beta_s/d^2) I ⊞ gamma_s |0><0|`` of
    dimension ``d^2 + 1`` in the product computational basis.
    """
    d = p.d
    i, j = symbol_to_bell(d, x)
    a, b, g = p.triple(s)
    n = d * d
    flag = np.zeros((n + 1, n + 1))
    flag[n, n] = g
    return boxplus(a * projector(bell_state(d, i, j)), b * np.eye(n) / n, flag)


@dataclass(frozen=True)
class CondPmfTable:
    """Conditional pmf ``P(y | x, s)``.

    ``probs[s-1, x-1, y]`` with ``y = 0`` the erasure symbol and
    ``y = 1..D`` the signal outputs. Empirical tables also carry the
    raw sample ``counts`` in the same layout.
    """

    D: int
    probs: np.ndarray
    counts: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.shape != (2, self.D, self.D + 1):
            raise ValidationError(f"table shape {probs.shape} != (2, {self.D}, {self.D + 1})")
        if np.any(probs < 0):
            raise ValidationError("table has negative entries")
        if np.max(np.abs(probs.sum(axis=2) - 1.0)) > PROB_TOL:
            raise ValidationError("table rows do not sum to 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    def row(self, x: int, s: int) -> np.ndarray:
        return self.probs[s - 1, x - 1]

    def output_given_state(self, p_x) -> np.ndarray:
        """``P(y | s) = sum_x p_x(x) P(y | x, s)`` as a ``(2, D+1)`` array."""
        return np.einsum("x,sxy->sy", np.asarray(p_x, dtype=float), self.probs)


def _table_from_triples(D: int, triples) -> np.ndarray:
    probs = np.empty((2, D, D + 1))
    for k, (a, b, g) in enumerate(triples):
        probs[k, :, 0] = g
        probs[k, :, 1:] = b / D
        probs[k, np.arange(D), np.arange(1, D + 1)] += a
    return probs


def induced_classical_channel(p: IdeParams, D: int, mode: str = "per_state") -> CondPmfTable:
    """Classical channel seen after the computational (D = d) or Bell (D = d^2) PVM.

    ``mode="marginal"`` fills both state slices with the theta-averaged
    channel ``P(y | x)``.
    """
    if D not in (p.d, p.d * p.d):
        raise ValueError(f"D must be d={p.d} or d^2={p.d ** 2}, got {D}")
    if mode == "per_state":
        triples = [p.triple(1), p.triple(2)]
    elif mode == "marginal":
        avg = _triple(p, "avg")
        triples = [avg, avg]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    probs = _table_from_triples(D, triples)
    # sum-to-one can drift by an ulp for large D; renormalize rows
    probs /= probs.sum(axis=2, keepdims=True)
    return CondPmfTable(D, probs)


def compose_unreliable(p: IdeParams, alpha_tilde: float) -> IdeParams:
    """Fold a receiver-side depolarizing channel into the IDE parameters.

    ``alpha_s -> alpha_s * alpha_tilde`` and
    ``beta_s -> alpha_s * (1 - alpha_tilde) + beta_s``; gamma is unchanged.
    """
    if not 0.0 <= alpha_tilde <= 1.0:
        raise ValidationError(f"alpha_tilde = {alpha_tilde!r} is outside [0, 1]")
    beta_tilde = 1.0 - alpha_tilde
    alpha = tuple(a * alpha_tilde for a in p.alpha)
    beta = tuple(a * beta_tilde + b for a, b in zip(p.alpha, p.beta))
    return p.replace(alpha=alpha, beta=beta)


def parse_config(text: str) -> dict:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    cfg = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in cfg:
            raise ValidationError(f"line {lineno}: duplicate key {key!r}")
        cfg[key] = value
    return cfg


def load_params(path) -> IdeParams:
    return IdeParams.from_dict(parse_config(Path(path).read_text()))


def dump_params(p: IdeParams) -> str:
    lines = [f"{k} = {v!r}" if k != "d" else f"d = {v}" for k, v in p.to_dict().items()]
    return "\n".join(lines) + "\n"


def save_params(p: IdeParams, path) -> None:
    Path(path).write_text(dump_params(p))
