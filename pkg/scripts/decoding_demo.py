"""Toy maximum-likelihood decoding: block error falls with blocklength below capacity."""

import argparse

import numpy as np

from ide_tradeoff.channels import IdeParams
from ide_tradeoff.regions import closed_forms
from ide_tradeoff.sim import ml_decoding_error


def run(trials: int, seed: int) -> None:
    params = IdeParams.from_states(4, (0.9, 0.1, 0.0), (0.6, 0.4, 0.0), 0.5)
    D, M = 4, 8
    u = np.full(D, 1.0 / D)
    cap = closed_forms(D, params).r_max
    print(f"capacity of averaged channel: {cap:.4f} bits/use")
    print("T   rate(bits/use)  block_error")
    for T in (2, 4, 6, 8, 12, 16):
        err = ml_decoding_error(params, D, u, M=M, T=T, trials=trials, seed=seed)
        print(f"{T:<3d} {np.log2(M) / T:<15.4f} {err:.4f}")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=5000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    run(args.trials, args.seed)
