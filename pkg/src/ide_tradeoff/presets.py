"""Named parameter sets for the three worked examples."""

from __future__ import annotations

from .channels import IdeParams

D_EXAMPLE = 16
NOISELESS = (1.0, 0.0, 0.0)
BROKEN = (0.0, 1.0, 0.0)

EXAMPLE1_THETAS = (0.01, 0.02, 0.05)
EXAMPLE2_STATE1 = (0.8, 0.1, 0.1)
EXAMPLE2_STATE2S = ((0.2, 0.7, 0.1), (0.4, 0.5, 0.1), (0.6, 0.3, 0.1), (0.8, 0.1, 0.1))
EXAMPLE3_THETAS = (0.05, 0.5)
EXAMPLE3_ALPHA_TILDES = (0.95, 0.8, 0.5)


def example1(theta1: float = 0.05) -> IdeParams:
    """Obstacle absent: noiseless; obstacle present: fully depolarizing."""
    return IdeParams.from_states(D_EXAMPLE, NOISELESS, BROKEN, theta1, 0.5)


def example2(state2=(0.4, 0.5, 0.1)) -> IdeParams:
    return IdeParams.from_states(D_EXAMPLE, EXAMPLE2_STATE1, state2, 0.5, 0.5)


def example3(theta1: float = 0.05) -> IdeParams:
    return example1(theta1)


PRESETS = {
    **{f"example1-theta{t:g}": example1(t) for t in EXAMPLE1_THETAS},
    **{f"example2-alpha2-{s[0]:g}": example2(s) for s in EXAMPLE2_STATE2S},
    **{f"example3-theta{t:g}": example3(t) for t in EXAMPLE3_THETAS},
}
PRESETS["example1"] = example1()
PRESETS["example2"] = example2()
PRESETS["example3"] = example3()
