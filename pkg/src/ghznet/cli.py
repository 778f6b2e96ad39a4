"""Command-line entry point: ``ghznet {simulate,trim,cluster,metrics}``.

Exit codes: 0 success, 1 usage/input error, 2 infeasible instance,
3 slot limit exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import analysis
from .errors import InfeasibleRoutingError, TimeslotLimitExceeded, TopologyError
from .linkmodel import LinkModel
from .montecarlo import SimulationConfig, derive_seed, run_simulation
from .protocols import ProtocolKind, precompute_route, run_protocol
from .report import MANIFEST, write_csv, write_json, write_manifest
from .topology import compute_metrics, read_topology, rescale, select_users
from .trimming import run_trimming, trimmable_fraction

log = logging.getLogger("ghznet")

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_LIMIT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv_list(text):
    return [s.strip() for s in text.split(",") if s.strip()]


def _add_common(p, protocol_choices):
    p.add_argument("-t", "--topology", required=True, help="topology file (.json or .csv edge list)")
    p.add_argument("-p", "--protocol", type=str.lower, choices=protocol_choices, required=True)
    p.add_argument("-n", "--iterations", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--users", type=_csv_list, help="comma-separated user node ids")
    p.add_argument("--num-users", type=int, default=4)
    p.add_argument("--max-timeslots", type=int, default=1_000_000)
    p.add_argument("--attenuation-db-per-km", type=float, default=0.2)
    p.add_argument("--p-op", type=float, default=1.0)
    p.add_argument("--rescale-max-km", type=float, default=100.0, help="0 disables rescaling")
    p.add_argument("--out", default="out")
    p.add_argument("--threads", type=int, default=1, help="worker processes for Monte Carlo runs")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ghznet", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="Monte Carlo E[T] for one or all protocols")
    _add_common(sim, ["sps", "spt", "mps", "mpt", "all"])
    sim.add_argument("--trace", help="write a JSON-lines slot trace of iteration 0 per protocol to this directory")

    trim = sub.add_parser("trim", help="repeater trimming trace for a multi-path protocol")
    _add_common(trim, ["sps", "spt", "mps", "mpt"])
    trim.add_argument("--threshold", type=lambda s: [float(x) for x in _csv_list(s)], default=[])

    clu = sub.add_parser("cluster", help="k-means over per-topology E[T] summaries")
    clu.add_argument("--summaries", required=True, help="directory holding *.summary.json files")
    clu.add_argument("--k", type=int, default=4)
    clu.add_argument("--seed", type=int, default=0)
    clu.add_argument("--restarts", type=int, default=50)
    clu.add_argument("--k-max", type=int, default=10, help="largest k in the elbow table")
    clu.add_argument("--out", default="out")

    met = sub.add_parser("metrics", help="graph metrics per topology plus corpus means")
    met.add_argument("-t", "--topology", nargs="+", required=True)
    met.add_argument("--rescale-max-km", type=float, default=100.0)
    met.add_argument("--out", default="out")
    return parser


def _config_echo(args) -> dict:
    skip = {"out", "threads", "verbose", "trace"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _prepare(args):
    topo = read_topology(args.topology)
    if args.rescale_max_km > 0:
        topo = rescale(topo, args.rescale_max_km)
    if args.users:
        unknown = [u for u in args.users if u not in topo.adjacency]
        if unknown:
            raise UsageError(f"unknown user nodes: {', '.join(unknown)}")
        if len(set(args.users)) != len(args.users) or len(args.users) < 2:
            raise UsageError("--users needs at least two distinct node ids")
        users = tuple(args.users)
    else:
        users = select_users(topo, args.num_users)
    model = LinkModel(args.attenuation_db_per_km, args.p_op)
    cfg = SimulationConfig(args.iterations, args.seed, args.max_timeslots, max(1, args.threads))
    return topo, users, model, cfg


def cmd_simulate(args) -> int:
    topo, users, model, cfg = _prepare(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    kinds = list(ProtocolKind) if args.protocol == "all" else [ProtocolKind.parse(args.protocol)]
    outputs, code = [], EXIT_OK
    for kind in kinds:
        stem = f"{topo.name}.{kind.value.lower()}"
        try:
            summary = run_simulation(topo, users, kind, model, cfg)
        except InfeasibleRoutingError as exc:
            log.error("%s infeasible on %s: %s", kind.value, topo.name, exc)
            code = max(code, EXIT_INFEASIBLE)
            continue
        doc = {
            "topology": topo.name,
            "protocol": kind.value,
            "users": list(users),
            "manifest": MANIFEST,
            **summary.to_dict(),
        }
        if not kind.multi_path:
            doc["route"] = precompute_route(kind, topo, users).to_dict()
        outputs.append(write_json(out / f"{stem}.summary.json", doc))
        outputs.append(write_csv(out / f"{stem}.samples.csv", ["iteration", "timeslots"], enumerate(summary.samples)))
        outputs.append(
            write_csv(out / f"{stem}.usage.csv", ["node_id", "usage_fraction"], sorted(summary.usage.items()))
        )
        if args.trace:
            trace_dir = Path(args.trace)
            trace_dir.mkdir(parents=True, exist_ok=True)
            records: list = []
            run_protocol(kind, topo, users, model, derive_seed(cfg.master_seed, 0), cfg.max_timeslots, trace=records)
            path = trace_dir / f"{stem}.trace.jsonl"
            path.write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in records), encoding="utf-8")
        print(f"{topo.name} {kind.value}: E[T]={summary.expected_timeslots:.4f} lambda={summary.rate:.6f}")
    write_manifest(out, "simulate", {**_config_echo(args), "users": list(users)}, [args.topology], outputs)
    return code


def cmd_trim(args) -> int:
    kind = ProtocolKind.parse(args.protocol)
    if not kind.multi_path:
        raise UsageError(
            f"trimming {kind.value} is a single pass: every repeater off the precomputed route is "
            "redundant and nothing else can be removed; use mps or mpt"
        )
    topo, users, model, cfg = _prepare(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    trace = run_trimming(topo, users, kind, model, cfg)
    stem = f"{topo.name}.{kind.value.lower()}"
    rows = trace.rows()
    fields = ["step", "removed_nodes", "remaining_active", "lambda", "lambda_over_lambda0"]
    outputs = [write_csv(out / f"{stem}.trim_trace.csv", fields, ([r[f] for f in fields] for r in rows))]
    usage_rows = [(i, v, u) for i, s in enumerate(trace.steps) for v, u in sorted(s.usage.items())]
    outputs.append(write_csv(out / f"{stem}.trim_usage.csv", ["step", "node_id", "usage_fraction"], usage_rows))
    if args.threshold:
        frac = [(th, trimmable_fraction(trace, th)) for th in args.threshold]
        outputs.append(write_csv(out / f"{stem}.trimmable_fraction.csv", ["threshold", "trimmable_fraction"], frac))
    write_manifest(out, "trim", {**_config_echo(args), "users": list(users)}, [args.topology], outputs)
    for r in rows:
        print(f"step {r['step']}: removed [{r['removed_nodes']}] lambda/lambda0={r['lambda_over_lambda0']:.4f}")
    return EXIT_OK


def _load_summaries(directory: Path):
    files = sorted(directory.glob("*.summary.json"))
    if not files:
        raise UsageError(f"no *.summary.json files in {directory}")
    table: dict[str, dict[str, float]] = {}
    for path in files:
        doc = json.loads(path.read_text(encoding="utf-8"))
        table.setdefault(doc["topology"], {})[doc["protocol"].upper()] = doc["expected_timeslots"]
    return table, files


def cmd_cluster(args) -> int:
    table, files = _load_summaries(Path(args.summaries))
    try:
        features = analysis.build_features(table)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    n = len(features.names)
    if not 1 <= args.k <= n:
        raise UsageError(f"--k {args.k} must lie in [1, {n}]")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = analysis.kmeans(features, args.k, args.seed, args.restarts)
    elbow = analysis.elbow_curve(features, range(1, min(args.k_max, n) + 1), args.seed, args.restarts)
    labels = analysis.label_clusters(result, features)
    cols = list(features.columns)
    outputs = [
        write_csv(
            out / "features.csv",
            ["topology"] + cols + [f"{c}_z" for c in cols],
            ([name, *raw, *z] for name, raw, z in zip(features.names, features.raw.tolist(), features.standardized.tolist())),
        ),
        write_csv(out / "clusters.csv", ["topology", "cluster"], sorted(result.by_name(features).items())),
        write_json(
            out / "diagnostics.json",
            {
                "k": args.k,
                "centroids": result.centroids.tolist(),
                "inertia": result.inertia,
                "silhouette": result.silhouette,
                "elbow": {str(k): v for k, v in elbow.items()},
                "manifest": MANIFEST,
            },
        ),
        write_json(out / "labels.json", {str(c): v for c, v in labels.items()}),
        write_csv(
            out / "protocol_means.csv",
            ["protocol", "mean_expected_timeslots"],
            zip(cols, features.raw.mean(axis=0).tolist()),
        ),
    ]
    write_manifest(out, "cluster", _config_echo(args), files, outputs)
    print(f"k={args.k} inertia={result.inertia:.4f} silhouette={result.silhouette}")
    return EXIT_OK


def cmd_metrics(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    reports, outputs = [], []
    for path in args.topology:
        topo = read_topology(path)
        if args.rescale_max_km > 0:
            topo = rescale(topo, args.rescale_max_km)
        rep = compute_metrics(topo).to_dict()
        reports.append(rep)
        outputs.append(write_json(out / f"{topo.name}.metrics.json", {"topology": topo.name, **rep}))
    keys = list(reports[0])
    means = {k: sum(r[k] for r in reports) / len(reports) for k in keys}
    outputs.append(write_json(out / "metrics_mean.json", {"topologies": len(reports), **means}))
    outputs.append(write_csv(out / "metrics_table.csv", ["metric", "mean"], means.items()))
    write_manifest(out, "metrics", _config_echo(args), args.topology, outputs)
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "trim": cmd_trim, "cluster": cmd_cluster, "metrics": cmd_metrics}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, TopologyError, OSError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except InfeasibleRoutingError as exc:
        log.error("%s", exc)
        return EXIT_INFEASIBLE
    except TimeslotLimitExceeded as exc:
        log.error("%s", exc)
        return EXIT_LIMIT


if __name__ == "__main__":
    sys.exit(main())
