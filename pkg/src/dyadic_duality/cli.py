"""Command-line entry points.

Exit codes: 0 = verified, 1 = a mathematical check failed, 2 = input or usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from .bellman import CandidateError, GridSpec, InfeasibleFamilyError, family_candidate, sample_candidate, verify_conditions
from .generate import random_admissible_pair, random_step_function
from .haar import ValidationError, bmo_norm, haar_step_function, make_atom, tl_norm
from .io import (
    FormatError,
    RunManifest,
    load_function_pair,
    load_grid_candidate,
    load_pair,
    load_step_function,
    pair_to_dict,
    step_function_to_dict,
    write_csv,
    write_json,
)
from .lattice import LatticeError, LatticeSpec, leaf_range, measure
from .lemma import InadmissibleError, build_pair, duality_sum, verify_key_lemma
from .search import CEILING, MAX_DEPTH, STRATEGIES, SearchConfig, certify, search

SEED_ENV = "DYADIC_DUALITY_SEED"
GEN_MAX_LEVELS = 12  # dim * depth cap for generated files


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer")


def _manifest(args, command: str, seed=None) -> RunManifest:
    # the output directory is left out so results are relocatable byte-for-byte
    config = {k: v for k, v in vars(args).items() if k not in ("func", "timing", "output")}
    return RunManifest(command=command, config=config, seed=seed)


def _finish(args, manifest: RunManifest, started: float) -> None:
    if args.timing:
        manifest.wall_clock_seconds = time.perf_counter() - started


def _parse_node(text: str) -> tuple[int, int]:
    try:
        k, i = (int(p) for p in text.split(","))
    except ValueError:
        raise UsageError(f"node must look like 'generation,index', got {text!r}")
    return k, i


def _parse_family(text: str) -> float:
    key, _, val = text.partition("=")
    if key.strip() != "A" or not val:
        raise UsageError(f"--family expects A=<real>, got {text!r}")
    try:
        return float(val)
    except ValueError:
        raise UsageError(f"--family expects A=<real>, got {text!r}")


def _parse_grid_spec(text: str) -> GridSpec:
    try:
        x_min, x_max, nx, ny = text.split(",")
        return GridSpec(float(x_min), float(x_max), int(nx), int(ny))
    except ValueError:
        raise UsageError(f"--grid-spec expects x_min,x_max,nx,ny, got {text!r}")


def _parse_depths(text: str) -> list[int]:
    try:
        if "-" in text:
            a, b = (int(p) for p in text.split("-"))
            return list(range(a, b + 1))
        return [int(p) for p in text.split(",")]
    except ValueError:
        raise UsageError(f"--depth expects N, A-B or a comma list, got {text!r}")


def cmd_verify_bellman(args) -> int:
    started = time.perf_counter()
    if args.grid:
        cand = load_grid_candidate(args.grid)
    else:
        if args.family is None or args.mbar is None:
            raise UsageError("give --family A=<r> --mbar <r>, or --grid <file>")
        cand = family_candidate(_parse_family(args.family), args.mbar)
    grid = _parse_grid_spec(args.grid_spec) if args.grid_spec else None
    report = verify_conditions(cand, grid, args.tol)
    m = _manifest(args, "verify-bellman")
    m.outcome = {"passed": report.passed, "failed": report.failed()}
    _finish(args, m, started)
    out = write_json(Path(args.output) / "bellman_report.json", report.to_dict(), m)
    status = "PASS" if report.passed else "FAIL (" + ", ".join(report.failed()) + ")"
    print(f"verify-bellman: {status} -> {out}")
    return 0 if report.passed else 1


def cmd_run_lemma(args) -> int:
    started = time.perf_counter()
    seed = None
    if args.pair:
        f, phi = load_function_pair(args.pair)
        pair = build_pair(f, phi)
    elif args.sm:
        pair = load_pair(args.sm, tol=args.admissibility_tol)
    else:
        if args.depth is None:
            raise UsageError("give --pair, --sm, or --depth (with optional --dim) for a random pair")
        seed = _default_seed() if args.seed is None else args.seed
        spec = LatticeSpec(args.dim or 1, args.depth)
        rng = np.random.default_rng(seed)
        if args.adversarial:
            pair = random_admissible_pair(spec, rng)
        else:
            pair = build_pair(random_step_function(spec, rng), random_step_function(spec, rng))
    if args.dim is not None and pair.spec.dim != args.dim:
        raise UsageError(f"--dim {args.dim} does not match the input lattice (dim {pair.spec.dim})")
    B = sample_candidate(pair.mbar if pair.mbar > 0 else 1.0)
    trace = verify_key_lemma(B, pair, args.depth_n, args.tol)
    m = _manifest(args, "run-lemma", seed)
    m.outcome = {"passed": trace.passed, "lhs": trace.lhs, "rhs": trace.rhs}
    _finish(args, m, started)
    out = write_json(Path(args.output) / "lemma_trace.json", trace.to_dict(), m)
    print(f"run-lemma: LHS={trace.lhs!r} RHS={trace.rhs!r} {'PASS' if trace.passed else 'FAIL'} -> {out}")
    return 0 if trace.passed else 1


def cmd_check_duality(args) -> int:
    started = time.perf_counter()
    f, phi = load_step_function(args.f), load_step_function(args.phi)
    if f.spec != phi.spec:
        raise UsageError(f"mismatched lattices: {f.spec} vs {phi.spec}")
    d, b, t = duality_sum(f, phi), bmo_norm(phi), tl_norm(f)
    bound = CEILING * b * t
    holds = d <= bound * (1 + 1e-12) + 1e-300 if bound > 0 else d <= 1e-12 * max(1.0, b * t)
    r = d / (b * t) if b > 0 and t > 0 else None
    payload = {
        "duality_sum": d,
        "bmo_norm": b,
        "tl_norm": t,
        "bound": bound,
        "ratio": r,
        "ratio_status": "defined" if r is not None else "undefined (a norm vanishes)",
        "bound_holds": bool(holds),
    }
    m = _manifest(args, "check-duality")
    m.outcome = {"bound_holds": bool(holds)}
    _finish(args, m, started)
    out = write_json(Path(args.output) / "duality_report.json", payload, m)
    shown = "undefined" if r is None else repr(r)
    print(f"duality_sum={d!r} bmo={b!r} tl={t!r} bound={bound!r} ratio={shown} -> {out}")
    return 0 if holds else 1


def cmd_search_extremal(args) -> int:
    started = time.perf_counter()
    seed = _default_seed() if args.seed is None else args.seed
    depths = _parse_depths(args.depth)
    for d in depths:
        if not 1 <= d <= MAX_DEPTH:
            raise UsageError(f"depth {d} outside 1..{MAX_DEPTH} (desk-scale guard)")
    outdir = Path(args.output)
    rows, all_ok = [], True
    for d in depths:
        cfg = SearchConfig(d, args.iters, seed, args.strategy, args.restarts)
        res = search(cfg, workers=args.workers)
        cert = certify(res)
        all_ok &= cert.passed
        rows.append([d, res.best_ratio, args.iters, args.strategy])
        m = _manifest(args, "search-extremal", seed)
        m.outcome = {"best_ratio": res.best_ratio, "certified": cert.passed}
        _finish(args, m, started)
        suffix = "" if len(depths) == 1 else f"_depth{d}"
        payload = res.to_dict()
        payload["certification"] = cert.to_dict()
        write_json(outdir / f"search_result{suffix}.json", payload, m)
        f, phi = res.step_functions()
        write_json(outdir / f"f_star{suffix}.json", step_function_to_dict(f))
        write_json(outdir / f"phi_star{suffix}.json", step_function_to_dict(phi))
        print(f"depth {d}: best_ratio={res.best_ratio!r} (ceiling {CEILING!r}) certified={cert.passed}")
    write_csv(outdir / "ratio_vs_depth.csv", ["depth", "best_ratio", "iterations", "strategy"], rows)
    return 0 if all_ok else 1


def _random_atom_profile(spec: LatticeSpec, node, rng) -> np.ndarray:
    width = len(leaf_range(spec, node))
    if width < 2:
        return np.zeros(width)
    p = rng.uniform(-1.0, 1.0, size=width)
    p -= p.mean()
    cap = 1.0 / measure(spec, node)
    top = np.max(np.abs(p))
    return p * (cap / top) if top > 0 else p


def cmd_gen(args) -> int:
    started = time.perf_counter()
    seed = _default_seed() if args.seed is None else args.seed
    dim = args.dim
    if dim * args.depth > GEN_MAX_LEVELS:
        raise UsageError(f"dim*depth = {dim * args.depth} exceeds the generator guard {GEN_MAX_LEVELS}")
    spec = LatticeSpec(dim, args.depth)
    rng = np.random.default_rng(seed)
    if args.kind in ("haar", "atom"):
        if dim != 1:
            raise UsageError(f"--kind {args.kind} is 1-D only")
        if args.node is None:
            raise UsageError(f"--kind {args.kind} needs --node k,i")
        node = _parse_node(args.node)
        if args.kind == "haar":
            f = haar_step_function(spec, node)
        else:
            f = make_atom(spec, node, _random_atom_profile(spec, node, rng))
        second = f
    elif args.kind == "random":
        f = random_step_function(spec, rng, args.flavour)
        second = random_step_function(spec, rng, args.flavour)
    elif args.kind == "admissible":
        pair = random_admissible_pair(spec, rng)
        m = _manifest(args, "gen", seed)
        _finish(args, m, started)
        out = write_json(Path(args.output) / args.name, pair_to_dict(pair), m)
        print(f"gen: wrote admissible pair -> {out}")
        return 0
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(args.kind)
    m = _manifest(args, "gen", seed)
    _finish(args, m, started)
    if args.pair:
        payload = {"f": step_function_to_dict(f), "phi": step_function_to_dict(second)}
    else:
        payload = step_function_to_dict(f)
    out = write_json(Path(args.output) / args.name, payload, m)
    print(f"gen: wrote {args.kind} -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dyadic-duality", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--output", default=".", help="output directory")
        sp.add_argument("--timing", action="store_true", help="record wall-clock time in the manifest")

    sp = sub.add_parser("verify-bellman", help="check the Bellman conditions for a candidate")
    sp.add_argument("--family", help="closed-form family member, A=<real>")
    sp.add_argument("--mbar", type=float)
    sp.add_argument("--grid", help="grid-sampled candidate JSON")
    sp.add_argument("--grid-spec", help="x_min,x_max,nx,ny")
    sp.add_argument("--tol", type=float, default=1e-12)
    common(sp)
    sp.set_defaults(func=cmd_verify_bellman)

    sp = sub.add_parser("run-lemma", help="run the induction on scales for a pair")
    src = sp.add_mutually_exclusive_group()
    src.add_argument("--pair", help='JSON {"f": ..., "phi": ...} of step functions')
    src.add_argument("--sm", help="JSON admissible pair (S, M)")
    sp.add_argument("--dim", type=int, default=None)
    sp.add_argument("--depth", type=int, help="lattice depth for a random pair")
    sp.add_argument("--depth-n", type=int, default=None, help="truncation level (default: full depth)")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--adversarial", action="store_true", help="random (S, M) not derived from functions")
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.add_argument("--admissibility-tol", type=float, default=1e-12)
    common(sp)
    sp.set_defaults(func=cmd_run_lemma)

    sp = sub.add_parser("check-duality", help="evaluate the duality bound for f and phi")
    sp.add_argument("--f", required=True)
    sp.add_argument("--phi", required=True)
    common(sp)
    sp.set_defaults(func=cmd_check_duality)

    sp = sub.add_parser("search-extremal", help="search for pairs with a large duality ratio")
    sp.add_argument("--depth", required=True, help="N, A-B or comma list")
    sp.add_argument("--iters", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--strategy", choices=STRATEGIES, default="hybrid")
    sp.add_argument("--restarts", type=int, default=8)
    sp.add_argument("--workers", type=int, default=1)
    common(sp)
    sp.set_defaults(func=cmd_search_extremal)

    sp = sub.add_parser("gen", help="generate step functions or pairs")
    sp.add_argument("--kind", choices=("random", "haar", "atom", "admissible"), required=True)
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--dim", type=int, default=1)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--node", help="generation,index (haar and atom)")
    sp.add_argument("--flavour", default=None, help="random flavour (gaussian, cauchy, ...)")
    sp.add_argument("--pair", action="store_true", help='emit {"f", "phi"} for run-lemma --pair')
    sp.add_argument("--name", default="function.json", help="output file name")
    common(sp)
    sp.set_defaults(func=cmd_gen)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    try:
        return args.func(args)
    except InadmissibleError as e:
        print(f"error: {e}", file=sys.stderr)
        write_json(Path(args.output) / "admissibility_report.json", e.report.to_dict(), _manifest(args, args.command))
        return 1
    except (UsageError, FormatError, ValidationError, LatticeError, CandidateError, InfeasibleFamilyError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
