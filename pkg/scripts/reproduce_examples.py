"""Print the headline numbers of the three worked examples and write their curve bundles."""

import argparse
from pathlib import Path

from ide_tradeoff.cli import main
from ide_tradeoff.presets import EXAMPLE1_THETAS, example1
from ide_tradeoff.regions import closed_forms, frontier_r1


def summary() -> None:
    print("theta1  r_max(D=16)  r_max(D=256)  pe_min(16)  pe_min(256)  gain@pe=0.0312")
    for t in EXAMPLE1_THETAS:
        p = example1(t)
        plain, ent = closed_forms(16, p), closed_forms(256, p)
        gain = frontier_r1(256, p).rate_at(0.0312) / plain.r_max
        print(f"{t:<7g} {plain.r_max:<12.6f} {ent.r_max:<13.6f} {plain.pe_min:<11.6g} {ent.pe_min:<12.6g} {gain:.3f}")
    tiny = example1(1e-6)
    ratio = closed_forms(256, tiny).r_max / closed_forms(16, tiny).r_max
    print(f"r_max ratio at theta1=1e-6: {ratio:.4f}")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("examples_out"))
    args = parser.parse_args()
    summary()
    for ex_id in (1, 2, 3):
        main(["example", str(ex_id), "--out", str(args.out / f"example{ex_id}")])
