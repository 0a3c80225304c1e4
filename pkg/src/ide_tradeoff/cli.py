"""Command-line front end.

Every command that writes a CSV also writes a JSON manifest next to it
recording the exact argv, resolved parameters, seed, tool version and
SHA-256 of each output; ``ide-tradeoff rerun MANIFEST`` replays it.

Exit codes: 0 success, 2 invalid input, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .channels import IdeParams, average_params, load_params
from .presets import (
    EXAMPLE1_THETAS,
    EXAMPLE2_STATE2S,
    EXAMPLE3_ALPHA_TILDES,
    EXAMPLE3_THETAS,
    PRESETS,
    example1,
    example2,
    example3,
)
from .qmath import ValidationError
from .regions import (
    closed_forms,
    converse_outer_point,
    fmt,
    frontier_r1,
    rate_bound,
    unreliable_frontier,
)
from .sim import SimConfig, empirical_mutual_information, run_detection_trials

OUT_ENV = "IDE_TRADEOFF_OUT"
EXIT_INVALID = 2
EXIT_IO = 3


def resolve_params(spec: str) -> IdeParams:
    """``preset:NAME`` or a path to a flat ``key = value`` config file."""
    if spec.startswith("preset:"):
        name = spec.split(":", 1)[1]
        if name not in PRESETS:
            raise ValidationError(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}")
        return PRESETS[name]
    return load_params(spec)


def resolve_out(out, default_name: str):
    if out is not None:
        return Path(out)
    env = os.environ.get(OUT_ENV)
    if env:
        return Path(env) / default_name
    return None


def parse_dist(spec: str, D: int) -> np.ndarray:
    """``uniform``, ``e1`` / ``vertex:K``, or comma-separated weights (normalized)."""
    if spec == "uniform":
        return np.full(D, 1.0 / D)
    if spec == "e1":
        spec = "vertex:1"
    if spec.startswith("vertex:"):
        k = int(spec.split(":", 1)[1])
        if not 1 <= k <= D:
            raise ValidationError(f"vertex index {k} outside [1, {D}]")
        p = np.zeros(D)
        p[k - 1] = 1.0
        return p
    try:
        w = np.array([float(v) for v in spec.split(",")])
    except ValueError:
        raise ValidationError(f"cannot parse distribution {spec!r}") from None
    if w.size != D or np.any(w < 0) or w.sum() <= 0:
        raise ValidationError(f"distribution needs {D} nonnegative weights, got {spec!r}")
    return w / w.sum()


def load_ensemble(spec: str, d: int, size: int) -> list:
    if spec == "computational-basis":
        states = []
        for k in range(d):
            rho = np.zeros((d, d), dtype=complex)
            rho[k, k] = 1.0
            states.append(rho)
        return states
    if spec == "repeated-maximally-mixed":
        return [np.eye(d, dtype=complex) / d for _ in range(size)]
    if spec.startswith("file:"):
        path = spec.split(":", 1)[1]
        if not Path(path).is_file():
            raise OSError(f"ensemble file {path} not found")
        try:
            arr = np.load(path, allow_pickle=False)
        except (ValueError, EOFError, OSError) as exc:
            raise ValidationError(f"malformed ensemble file {path}: {exc}") from None
        if arr.ndim == 2:
            arr = arr[None]
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise ValidationError(f"ensemble file must hold an (M, d, d) array, got shape {arr.shape}")
        return list(arr.astype(complex))
    raise ValidationError(f"unknown ensemble {spec!r}")


def sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(path: Path, command: str, argv, params, seed, outputs, started: float) -> None:
    manifest = {
        "command": command,
        "argv": list(argv),
        "params": params,
        "seed": seed,
        "outputs": {str(p): sha256(p) for p in outputs},
        "version": __version__,
        "duration_s": round(time.perf_counter() - started, 3),
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def manifest_path_for(csv_path: Path) -> Path:
    return csv_path.with_name(csv_path.name + ".manifest.json")


def cmd_region(args, argv) -> int:
    started = time.perf_counter()
    params = resolve_params(args.config)
    D = params.d * params.d if args.entangled else params.d
    if args.alpha_tilde is not None:
        front = unreliable_frontier(params, args.alpha_tilde, grid=args.grid)
    else:
        front = frontier_r1(D, params, grid=args.grid)
    text = front.to_csv()
    out = resolve_out(args.out, "region.csv")
    if out is None:
        sys.stdout.write(text)
        return 0
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    write_manifest(manifest_path_for(out), "region", argv, params.to_dict(), None, [out], started)
    return 0


def example_curves(ex_id: int, grid: int):
    """Yield ``(filename, frontier)`` for every curve of one worked example."""
    if ex_id == 1:
        for t in EXAMPLE1_THETAS:
            p = example1(t)
            yield f"ex1_theta{t:g}_unentangled.csv", frontier_r1(p.d, p, grid=grid)
            yield f"ex1_theta{t:g}_entangled.csv", frontier_r1(p.d**2, p, grid=grid)
    elif ex_id == 2:
        for state2 in EXAMPLE2_STATE2S:
            p = example2(state2)
            tag = f"alpha2_{state2[0]:g}"
            yield f"ex2_{tag}_unentangled.csv", frontier_r1(p.d, p, grid=grid)
            yield f"ex2_{tag}_entangled.csv", frontier_r1(p.d**2, p, grid=grid)
    elif ex_id == 3:
        for t in EXAMPLE3_THETAS:
            p = example3(t)
            yield f"ex3_theta{t:g}_entangled.csv", frontier_r1(p.d**2, p, grid=grid)
            for at in EXAMPLE3_ALPHA_TILDES:
                yield f"ex3_theta{t:g}_unreliable{at:g}.csv", unreliable_frontier(p, at, grid=grid)
            yield f"ex3_theta{t:g}_unentangled.csv", frontier_r1(p.d, p, grid=grid)
    else:
        raise ValidationError(f"unknown example id {ex_id}; choose 1, 2 or 3")


def cmd_example(args, argv) -> int:
    started = time.perf_counter()
    if args.id not in (1, 2, 3):
        raise ValidationError(f"unknown example id {args.id}; choose 1, 2 or 3")
    out_dir = Path(args.out) if args.out else Path(os.environ.get(OUT_ENV, ".")) / f"example{args.id}"
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, front in example_curves(args.id, args.grid):
        path = out_dir / name
        front.to_csv(path)
        written.append(path)
    presets = {k: v.to_dict() for k, v in PRESETS.items() if k.startswith(f"example{args.id}")}
    write_manifest(out_dir / "manifest.json", "example", argv, presets, None, written, started)
    for path in written:
        print(path)
    return 0


def cmd_simulate(args, argv) -> int:
    started = time.perf_counter()
    params = resolve_params(args.config)
    D = params.d * params.d if args.entangled else params.d
    p_x = parse_dist(args.dist, D)
    cfg = SimConfig(args.seed, args.trials, D, p_x, params, workers=args.workers)
    report = run_detection_trials(cfg)
    text = report.to_csv()
    sys.stdout.write(text)
    mi_trials = args.mi_trials if args.mi_trials is not None else args.trials
    mi = empirical_mutual_information(params, D, p_x, mi_trials, args.seed, workers=args.workers)
    analytic_mi = rate_bound(D, average_params(params), p_x)
    print(f"mutual information: empirical {fmt(mi)} bits, analytic {fmt(analytic_mi)} bits", file=sys.stderr)
    out = resolve_out(args.out, "simulate.csv")
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
        mi_path = out.with_name(out.stem + "_mi.csv")
        mi_path.write_text(
            "seed,trials,D,empirical_mi,analytic_mi\n"
            f"{args.seed},{mi_trials},{D},{fmt(mi)},{fmt(analytic_mi)}\n"
        )
        write_manifest(manifest_path_for(out), "simulate", argv, params.to_dict(), args.seed, [out, mi_path], started)
    return 0


def cmd_converse(args, argv) -> int:
    started = time.perf_counter()
    params = resolve_params(args.config)
    ensemble = load_ensemble(args.ensemble, params.d, args.size)
    point = converse_outer_point(params, ensemble)
    text = f"rate_upper,pe_lower\n{fmt(point.rate)},{fmt(point.pe)}\n"
    sys.stdout.write(text)
    out = resolve_out(args.out, "converse.csv")
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
        write_manifest(manifest_path_for(out), "converse", argv, params.to_dict(), None, [out], started)
    return 0


def cmd_closed_forms(args, argv) -> int:
    params = resolve_params(args.config)
    D = params.d * params.d if args.entangled else params.d
    cf = closed_forms(D, params)
    p_th = "" if cf.p_th is None else fmt(cf.p_th)
    sys.stdout.write(
        "D,r_max,pe_min,pe_star,p_th,no_tradeoff\n"
        f"{D},{fmt(cf.r_max)},{fmt(cf.pe_min)},{fmt(cf.pe_star)},{p_th},{str(cf.no_tradeoff).lower()}\n"
    )
    return 0


def cmd_rerun(args, argv) -> int:
    manifest = json.loads(Path(args.manifest).read_text())
    code = main(manifest["argv"])
    if code != 0 or not args.check:
        return code
    bad = [p for p, digest in manifest["outputs"].items() if sha256(Path(p)) != digest]
    for p in bad:
        print(f"mismatch: {p}", file=sys.stderr)
    return 1 if bad else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ide-tradeoff",
        description="Rate vs instantaneous-detection-error regions for IDE channels.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("region", help="frontier of the achievable (pe, rate) region")
    p.add_argument("config", help="config file path or preset:NAME")
    p.add_argument("--entangled", action="store_true", help="superdense-coding region (D = d^2)")
    p.add_argument("--alpha-tilde", type=float, default=None, help="unreliable entanglement retention")
    p.add_argument("--grid", type=int, default=512)
    p.add_argument("--out")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("example", help="write the curve bundle of a worked example")
    p.add_argument("id", type=int)
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV}/exampleN or ./exampleN)")
    p.add_argument("--grid", type=int, default=512)
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("simulate", help="Monte Carlo detection and mutual information")
    p.add_argument("config")
    p.add_argument("--dist", default="uniform", help="uniform | e1 | vertex:K | w1,w2,...")
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--mi-trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--entangled", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("converse", help="outer-bound point for one input ensemble")
    p.add_argument("config")
    p.add_argument(
        "--ensemble",
        default="computational-basis",
        help="computational-basis | repeated-maximally-mixed | file:PATH.npy",
    )
    p.add_argument("--size", type=int, default=1, help="copies for repeated-maximally-mixed")
    p.add_argument("--out")
    p.set_defaults(func=cmd_converse)

    p = sub.add_parser("closed-forms", help="r_max, pe_min, pe_star, p_th")
    p.add_argument("config")
    p.add_argument("--entangled", action="store_true")
    p.set_defaults(func=cmd_closed_forms)

    p = sub.add_parser("rerun", help="replay a manifest")
    p.add_argument("manifest")
    p.add_argument("--check", action="store_true", help="verify output hashes")
    p.set_defaults(func=cmd_rerun)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, argv)
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
