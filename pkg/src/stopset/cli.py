"""Command-line front end: ``stopset <command> [options]``.

Every command writes into ``--out`` and is fully determined by its
configuration and seed. CSV files end with a ``# config_sha256=...`` line
carrying the hash and the configuration itself.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import secrets
import sys
from pathlib import Path

import numpy as np

from . import analytics, experiments
from .channel import ChannelTopology, run_e2e
from .codec import gen_scrambler
from .experiments import CodeSpec, child_seed
from .ldpc import ConstructionError, LdpcCode, code_from_matrix, read_alist, write_alist
from .stopping import PuncturePattern, find_acceptable_pattern, verify_acceptable

log = logging.getLogger("stopset")

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_INTERNAL = 0, 1, 2, 3
# flags that do not influence results
_UNHASHED = {"out", "config", "threads", "command", "func"}


class UsageError(Exception):
    pass


class ValidationFailed(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text: str) -> list[float]:
    return [float(x) for x in str(text).split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in str(text).split(",") if x.strip()]


# --- output helpers ---------------------------------------------------------


def run_config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _UNHASHED}


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


def write_csv(path: Path, header, rows, cfg: dict) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    buf.write(f"# config_sha256={config_hash(cfg)} config={json.dumps(cfg, sort_keys=True)}\n")
    path.write_text(buf.getvalue())
    log.info("wrote %s", path)


def write_json(path: Path, data: dict, cfg: dict) -> None:
    out = dict(data, config=cfg, config_sha256=config_hash(cfg))
    path.write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")
    log.info("wrote %s", path)


# --- shared option groups ---------------------------------------------------


def _add_code_spec(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--regular", action="store_true", help="(wc, wr)-regular ensemble")
    g.add_argument("--irregular", metavar="NAME", help="irregular ensemble; only 'example1' is built in")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--wc", type=int, default=4)
    p.add_argument("--wr", type=int, default=8)
    p.add_argument("--parallel-edges", choices=["repair", "cancel"], default=None)


def _code_spec(args) -> CodeSpec:
    if args.regular:
        return CodeSpec("regular", args.n, args.wc, args.wr, args.parallel_edges)
    name = args.irregular or "example1"
    if name != "example1":
        raise UsageError(f"unknown irregular ensemble {name!r}")
    return CodeSpec("irregular", args.n, parallel_edges=args.parallel_edges)


def _load_code(path) -> LdpcCode:
    return code_from_matrix(read_alist(path), source=str(path))


# --- commands ---------------------------------------------------------------


def cmd_gen_code(args, out: Path, cfg: dict) -> int:
    spec = _code_spec(args)
    code = spec.build(args.seed)
    write_alist(code.H, out / "code.alist")
    meta = {
        "seed": args.seed,
        "N": code.N,
        "k": code.k,
        "checks": code.H.rows,
        "distribution": code.meta,
        "systematic_positions": code.systematic_positions.tolist(),
    }
    write_json(out / "code.json", meta, cfg)
    print(f"N={code.N} k={code.k} seed={args.seed}")
    return EXIT_OK


def cmd_find_pattern(args, out: Path, cfg: dict) -> int:
    code = _load_code(args.code)
    pattern = find_acceptable_pattern(code.graph, args.seed)
    ok, offender = verify_acceptable(code.graph, pattern)
    if not ok:
        raise RuntimeError(f"search returned a pattern that fails verification at variable {offender}")
    data = pattern.to_json(str(args.code))
    data["N_minus_k"] = code.redundancy
    write_json(out / "pattern.json", data, cfg)
    print(f"|R|={len(pattern.R)} n={pattern.n} N-k={code.redundancy}")
    return EXIT_OK


def cmd_pattern_stats(args, out: Path, cfg: dict) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be at least 1")
    sizes = experiments.pattern_sizes(_code_spec(args), args.samples, args.seed, args.patterns_per_code, args.threads)
    write_csv(out / "pattern_stats.csv", ["size", "count", "fraction"], experiments.histogram(sizes), cfg)
    summary = {
        "samples": len(sizes),
        "mean": float(sizes.mean()),
        "variance": float(sizes.var(ddof=1)) if len(sizes) > 1 else 0.0,
        "min": int(sizes.min()),
        "max": int(sizes.max()),
    }
    write_json(out / "pattern_stats.json", summary, cfg)
    print(f"mean |R| = {summary['mean']:.2f}, variance {summary['variance']:.2f}")
    return EXIT_OK


def cmd_surface(args, out: Path, cfg: dict) -> int:
    axis = np.linspace(0.0, 1.0, args.grid)
    pts = analytics.surface(args.beta, args.alpha, args.eta, axis, axis)
    rows = [(p.delta, p.eps, p.pr_ref, p.pr_d_geq, p.expected_d) for p in pts]
    write_csv(out / "surface.csv", ["delta", "epsilon", "pr_ref", "pr_d_geq", "expected_d"], rows, cfg)
    if args.contour:
        c = analytics.threshold_contour(args.beta, args.alpha, args.eta, axis, axis, args.level)
        write_csv(out / "contour.csv", ["delta", "epsilon"], c.points, cfg)
        if c.missing:
            log.warning("no %.2f crossing for %d delta values", args.level, len(c.missing))
    return EXIT_OK


def cmd_attack_sim(args, out: Path, cfg: dict) -> int:
    spec = _code_spec(args)
    if spec.kind != "irregular":
        log.warning("attack-sim expects an irregular code with |R| close to N-k")
    records = experiments.attack_sim(
        spec,
        gammas=tuple(_ints(args.gammas)),
        trials=args.trials,
        seed=args.seed,
        pattern_every=args.pattern_every,
        code_every=args.code_every,
        min_r_gap=args.min_r_gap,
        threads=args.threads,
    )
    header = ["gamma", "trial", "code_index", "pattern_index", "R_size", "erased", "dof_ml", "ber_ml", "ber_mp"]
    rows = [
        (r.gamma, r.trial, r.code_index, r.pattern_index, r.R_size, r.erased, r.dof_ml, r.ber_ml, r.ber_mp)
        for r in records
    ]
    write_csv(out / "attack_trials.csv", header, rows, cfg)
    summary = experiments.attack_summary(records)
    write_csv(
        out / "attack_summary.csv",
        ["gamma", "path", "trials", "mean", "min", "max"],
        [(s["gamma"], s["path"], s["trials"], s["mean"], s["min"], s["max"]) for s in summary],
        cfg,
    )
    for s in summary:
        print(f"gamma={s['gamma']:<4} {s['path']}: mean BER {s['mean']:.4f} [{s['min']:.3f}, {s['max']:.3f}]")
    return EXIT_OK


def cmd_validate(args, out: Path, cfg: dict) -> int:
    if args.packets < 10**4:
        raise UsageError("--packets must be at least 10^4")
    rows = experiments.validate_grid(args.m, args.l, _floats(args.grid), args.packets, args.seed)
    header = ["m", "l", "delta", "epsilon", "packets", "empirical", "closed_form", "z", "printed_form", "z_printed"]
    write_csv(
        out / "validate.csv",
        header,
        [(r.m, r.l, r.delta, r.eps, r.packets, r.empirical, r.closed_form, r.z, r.printed_form, r.z_printed) for r in rows],
        cfg,
    )
    worst = max(abs(r.z) for r in rows)
    print(f"m={args.m} l={args.l}: max |z| = {worst:.2f} over {len(rows)} points")
    if args.m > 1:
        print(f"printed final-term variant: max |z| = {max(abs(r.z_printed) for r in rows):.2f}")
    if worst > args.z_max:
        raise ValidationFailed(f"max |z| = {worst:.2f} exceeds {args.z_max}")
    return EXIT_OK


def cmd_e2e(args, out: Path, cfg: dict) -> int:
    topo = ChannelTopology(tuple(_floats(args.deltas)), tuple(_floats(args.epsilons)))
    code = _load_code(args.code) if args.code else _code_spec(args).build(child_seed(args.seed, 0))
    if args.pattern:
        pattern = PuncturePattern.load(args.pattern)
        if pattern.N != code.N:
            raise UsageError("pattern and code blocklengths differ")
    else:
        pattern = find_acceptable_pattern(code.graph, child_seed(args.seed, 1))
    if pattern.n % args.alpha:
        raise UsageError(f"--alpha {args.alpha} does not divide n={pattern.n}")
    scrambler = gen_scrambler(code.k, child_seed(args.seed, 2))
    M = np.random.default_rng(child_seed(args.seed, 3)).integers(0, 2, (args.L, code.k), dtype=np.uint8)
    res = run_e2e(topo, M, code, scrambler, pattern, args.alpha, child_seed(args.seed, 4), args.guess_attack)

    pr = analytics.pr_ref_general(topo.deltas, topo.epsilons)
    n = args.alpha * res.trace.eta
    mean = analytics.expected_d(pr, n)
    sd = args.alpha * math.sqrt(res.trace.eta * pr * (1 - pr))
    report = {
        "N": code.N,
        "k": code.k,
        "R_size": len(pattern.R),
        "n": pattern.n,
        "alpha": args.alpha,
        "L": args.L,
        "receivers_ok": res.receivers_ok,
        "eve_decoded": res.eve_decoded,
        "pr_ref": pr,
        "D": res.trace.D,
        "expected_d": mean,
        "sd_d": sd,
        "z_d": (res.trace.D - mean) / sd if sd > 0 else 0.0,
        "eve_blocks": res.eve_blocks,
        "attack_ber_mean": None if res.attack_ber is None else float(np.mean(res.attack_ber)),
    }
    write_json(out / "e2e.json", report, cfg)
    t = res.trace
    write_csv(out / "session.csv", ["packet_index", "W", "eve_received"], zip(range(t.eta), t.W.tolist(), t.eve_received), cfg)
    print(
        f"receivers ok: {all(res.receivers_ok)}  eve decoded: {res.eve_decoded}  "
        f"D={res.trace.D} (expected {mean:.1f} +- {sd:.1f})"
    )
    return EXIT_OK


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="stopset", description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=None, help="master seed (drawn from entropy if omitted)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--config", default=None, help="JSON file of option defaults")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("gen-code", help="sample an LDPC code and write it as alist")
    _add_code_spec(s)
    s.set_defaults(func=cmd_gen_code)

    s = sub.add_parser("find-pattern", help="search an acceptable puncturing pattern")
    s.add_argument("--code", required=True, help="alist file")
    s.set_defaults(func=cmd_find_pattern)

    s = sub.add_parser("pattern-stats", help="histogram of |R| over repeated searches")
    _add_code_spec(s)
    s.add_argument("--samples", type=int, default=100)
    s.add_argument("--patterns-per-code", type=int, default=10)
    s.set_defaults(func=cmd_pattern_stats)

    s = sub.add_parser("surface", help="Pr(D >= beta) over a (delta, eps) grid")
    s.add_argument("--beta", type=float, default=1.0)
    s.add_argument("--alpha", type=int, default=1)
    s.add_argument("--eta", type=int, default=100)
    s.add_argument("--grid", type=int, default=101, help="points per axis on [0, 1]")
    s.add_argument("--contour", action="store_true", help="also write the threshold contour")
    s.add_argument("--level", type=float, default=0.5)
    s.set_defaults(func=cmd_surface)

    s = sub.add_parser("attack-sim", help="BER of guessing attacks with gamma wrong bits")
    _add_code_spec(s)
    s.add_argument("--gammas", default=",".join(map(str, experiments.DEFAULT_GAMMAS)))
    s.add_argument("--trials", type=int, default=300)
    s.add_argument("--pattern-every", type=int, default=10)
    s.add_argument("--code-every", type=int, default=30)
    s.add_argument("--min-r-gap", type=int, default=2, help="require |R| >= N-k-gap")
    s.set_defaults(func=cmd_attack_sim)

    s = sub.add_parser("validate", help="simulated vs closed-form Pr(R_ef)")
    s.add_argument("--m", type=int, default=1, help="legitimate receivers")
    s.add_argument("--l", type=int, default=1, help="eavesdroppers")
    s.add_argument("--grid", default="0.1,0.3,0.5,0.7,0.9", help="values used for both delta and eps")
    s.add_argument("--packets", type=int, default=10**5)
    s.add_argument("--z-max", type=float, default=4.0)
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("e2e", help="one full session: encode, ARQ, decode")
    _add_code_spec(s)
    s.add_argument("--code", default=None, help="alist file (sampled from the code spec if omitted)")
    s.add_argument("--pattern", default=None, help="pattern JSON (searched if omitted)")
    s.add_argument("--deltas", default="0.1")
    s.add_argument("--epsilons", default="0.5")
    s.add_argument("--L", type=int, default=100)
    s.add_argument("--alpha", type=int, default=1)
    s.add_argument("--guess-attack", action="store_true")
    s.set_defaults(func=cmd_e2e)
    return p


def _explicit_options(argv) -> set[str]:
    """Names of options given on the command line (defaults suppressed)."""
    parser = build_parser()
    stack = [parser]
    while stack:
        p = stack.pop()
        for a in p._actions:
            if isinstance(a, argparse._SubParsersAction):
                stack.extend(a.choices.values())
            elif a.dest != "help":
                a.default = argparse.SUPPRESS
        p.set_defaults(func=argparse.SUPPRESS)
    return set(vars(parser.parse_args(argv)))


def parse_args(argv):
    args = build_parser().parse_args(argv)
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read config {args.config}: {e}")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        bad = sorted(set(cfg) - set(vars(args)) - {"func"})
        if bad:
            raise UsageError(f"unknown config keys: {', '.join(bad)}")
        # explicit command-line flags win over the file
        explicit = _explicit_options(argv)
        for k, v in cfg.items():
            if k not in explicit:
                setattr(args, k, v)
    if args.seed is None:
        args.seed = secrets.randbits(63)
    return args


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("STOPSET_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args = parse_args(sys.argv[1:] if argv is None else argv)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        cfg = run_config(args)
        return args.func(args, out, cfg)
    except UsageError as e:
        print(f"stopset: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationFailed as e:
        print(f"stopset: validation failed: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConstructionError, ValueError, FileNotFoundError) as e:
        print(f"stopset: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:
        log.exception("internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
