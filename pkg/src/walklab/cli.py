"""Command-line front end: ``walklab {gen,analyze,verify,simulate,sweep}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .chains import MIX_THRESHOLD, lazy_walk_chain, mixing_time
from .coalescing import DEFAULT_CAP, estimate_tcoal
from .errors import WalklabError
from .graphs import FAMILIES, FamilySpec, Graph, degree_stats, generate
from .hitting import GraphAnalysis
from .suite import CHECK_FAMILIES, SuiteConfig, run_suite, sweep_sharpness


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8", newline="")
    else:
        sys.stdout.write(text)


def _add_family_args(p: argparse.ArgumentParser, required: bool = False) -> None:
    p.add_argument("--family", choices=FAMILIES, required=required)
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--n0", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=int, default=0)


def _family_from_args(args) -> FamilySpec:
    params = {k: getattr(args, k) for k in ("n", "d", "n0", "k") if getattr(args, k) is not None}
    return FamilySpec(args.family, params, args.seed)


def parse_family_spec(text: str) -> FamilySpec:
    """``"lollipop:d=3,n=16,seed=1"`` -> FamilySpec."""
    name, _, rest = text.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        k, _, v = item.partition("=")
        params[k.strip()] = int(v)
    seed = params.pop("seed", 0)
    return FamilySpec(name.strip(), params, seed)


def _load_graph(args, parser) -> Graph:
    if getattr(args, "graph", None):
        text = Path(args.graph).read_text(encoding="utf-8")
        return Graph.from_json(text, label=Path(args.graph).stem)
    if not args.family:
        parser.error("give --graph FILE or --family with its parameters")
    try:
        return generate(_family_from_args(args))
    except WalklabError as exc:
        parser.error(str(exc))


def cmd_gen(args, parser) -> int:
    try:
        g = generate(_family_from_args(args))
    except WalklabError as exc:
        parser.error(str(exc))
    _emit(g.to_json() + "\n", args.out)
    return 0


def cmd_analyze(args, parser) -> int:
    g = _load_graph(args, parser)
    a = GraphAnalysis.of(g)
    st = degree_stats(g)
    report = {
        "graph_label": g.label,
        "n": g.n,
        "edge_count": g.edge_count,
        "d_min": st.d_min,
        "d_max": st.d_max,
        "d_avg": str(st.d_avg),
        "pi": [str(q) for q in a.chain.pi_exact],
        "eigenvalues": a.spectrum.eigenvalues.tolist(),
        "t_rel": a.t_rel,
        "t_mix": mixing_time(a.chain),
        "mix_threshold": MIX_THRESHOLD,
        "t_hit": a.profile.t_hit,
        "from_pi": a.profile.from_pi.tolist(),
        "expected_hit": a.profile.expected_hit.tolist(),
    }
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    return 0


def cmd_verify(args, parser) -> int:
    cfg_dict = {}
    if args.config:
        cfg_dict = json.loads(Path(args.config).read_text(encoding="utf-8"))
    cfg = SuiteConfig.from_dict(cfg_dict)
    if args.family_spec:
        cfg.families = [parse_family_spec(s) for s in args.family_spec]
    for key in ("horizon", "replicas", "seed", "output_dir", "domination_replicas", "meeting_trials"):
        if getattr(args, key) is not None:
            setattr(cfg, key, getattr(args, key))
    if args.checks:
        cfg.checks = tuple(s.strip() for s in args.checks.split(",") if s.strip())
    if args.negative_control:
        cfg.negative_control = True
    try:
        cfg.validate()
    except ValueError as exc:
        parser.error(str(exc))
    outcome = run_suite(cfg)
    s = outcome.summary
    print(f"checks: {s['total_checks']}  failures: {len(s['failures'])}  "
          f"expected failures: {len(s['expected_failures'])}  reports in {cfg.output_dir}")
    return 0 if outcome.ok else 1


def cmd_simulate(args, parser) -> int:
    g = _load_graph(args, parser)
    if args.replicas < 1:
        parser.error("--replicas must be >= 1")
    c = lazy_walk_chain(g)
    est = estimate_tcoal(c, args.replicas, args.sim_seed, cap=args.cap)
    _emit(json.dumps(est.report(g.label, g.n), indent=2, sort_keys=True) + "\n", args.out)
    return 0


def cmd_sweep(args, parser) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    if len(sizes) < 3:
        parser.error("--sizes needs at least 3 values")
    res = sweep_sharpness(args.kind, sizes, seed=args.seed, d=args.d, n0=args.n0)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"sweep_{args.kind}.csv").write_text(res.table_csv(), encoding="utf-8", newline="")
    (out / f"sweep_{args.kind}.json").write_text(
        json.dumps({"kind": args.kind, "sizes": sizes, "seed": args.seed, "slopes": res.slopes}, indent=2) + "\n",
        encoding="utf-8")
    for k, v in res.slopes.items():
        print(f"{k}: {v:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="walklab", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a generated graph as canonical JSON")
    _add_family_args(p, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("analyze", help="spectrum, mixing and hitting-time profile of a graph")
    p.add_argument("--graph")
    _add_family_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("verify", help="run the verification suite")
    p.add_argument("--config")
    p.add_argument("--family-spec", action="append", help="e.g. lollipop:d=3,n=16,seed=0 (repeatable)")
    p.add_argument("--horizon", type=int)
    p.add_argument("--replicas", type=int)
    p.add_argument("--domination-replicas", type=int)
    p.add_argument("--meeting-trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--output-dir")
    p.add_argument("--checks", help=f"comma-separated subset of {','.join(CHECK_FAMILIES)}")
    p.add_argument("--negative-control", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="Monte Carlo estimate of the full coalescence time")
    p.add_argument("--graph")
    _add_family_args(p)
    p.add_argument("--replicas", type=int, default=1000)
    p.add_argument("--sim-seed", type=int, default=0)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="scaling sweep for the sharpness examples")
    p.add_argument("--kind", choices=("lollipop", "stretched_expander"), required=True)
    p.add_argument("--sizes", required=True, help="lollipop: n values; stretched_expander: k values")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--n0", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output-dir", default="walklab-out")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    sub_parser = parser._subparsers._group_actions[0].choices[args.command]
    return args.func(args, sub_parser)


if __name__ == "__main__":
    sys.exit(main())
