"""Regenerate the checked-in golden curve bundles under tests/golden/.

Run only when a deliberate change to the frontier output is made, then
re-run the acceptance suite and review the diff.
"""

import argparse
import shutil
from pathlib import Path

from ide_tradeoff.cli import main

ROOT = Path(__file__).resolve().parents[1]


def regen(dest: Path) -> None:
    for ex_id in (1, 2, 3):
        out = dest / f"example{ex_id}"
        if out.exists():
            shutil.rmtree(out)
        code = main(["example", str(ex_id), "--out", str(out)])
        if code:
            raise SystemExit(code)
        # the manifest carries timings and absolute paths; only curves are golden
        (out / "manifest.json").unlink()


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dest", type=Path, default=ROOT / "tests" / "golden")
    regen(parser.parse_args().dest)
