"""Command-line entry point.

Every command writes CSV to ``--out`` or to stdout. A ``--config`` JSON
file may supply any flag by its long name (``snapshot-date`` or
``snapshot_date``); flags given on the command line win. All randomness
comes from ``--seed`` (default 0).

Exit status: 0 on success, 2 on usage errors, 1 on data errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import fields, replace
from datetime import date
from pathlib import Path

from .corpus import iter_corpus, tokenize
from .errors import SnapSearchError
from .index import build_index, index_ratio, read_index, search, to_bytes, write_index


class UsageError(Exception):
    pass


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(args, text: str) -> None:
    out = args.get("out")
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _need(args, *names):
    for name in names:
        if args.get(name) in (None, ""):
            raise UsageError(f"--{name.replace('_', '-')} is required")


def _date(value, flag="snapshot-date") -> date:
    if isinstance(value, date):
        return value
    try:
        return date.fromisoformat(str(value))
    except ValueError:
        raise UsageError(f"--{flag} must be YYYY-MM-DD, got {value!r}") from None


def _query_terms(args) -> list[str]:
    q = args["query"]
    return tokenize(" ".join(q) if isinstance(q, list) else q)


# index

def cmd_index_build(args):
    _need(args, "corpus", "out")
    docs = iter_corpus(args["corpus"])
    index = build_index(docs)
    write_index(index, args["out"])
    size = len(to_bytes(index))
    ratio = index_ratio(index) if len(index) and index.text_bytes else ""
    row = [len(index), len(index.dictionary), index.text_bytes, size, ratio]
    sys.stdout.write(_csv([row], ["docs", "terms", "text_bytes", "index_bytes", "ratio"]))


def cmd_index_search(args):
    _need(args, "index", "query")
    index = read_index(args["index"])
    result = search(index, _query_terms(args), int(args["k"]))
    rows = [(i + 1, h.doc_id, repr(h.score)) for i, h in enumerate(result)]
    _emit(args, _csv(rows, ["rank", "doc_id", "score"]))


# shards

def cmd_shard_plan(args):
    from .datacentre import build_topology, save_topology

    _need(args, "corpus", "out")
    topo = build_topology(
        iter_corpus(args["corpus"]),
        granularity_days=int(args["granularity_days"]),
        mode=args["mode"],
        n_shards=int(args["n_shards"]),
        seed=int(args["seed"]),
    )
    save_topology(topo, args["out"])
    rows = []
    for sid in topo.shard_ids:
        s = topo.shards[sid]
        rows.append([sid, s.range_start or "", s.range_end or "", len(s.index)])
    sys.stdout.write(_csv(rows, ["shard_id", "range_start", "range_end", "docs"]))


def cmd_shard_route(args):
    from .datacentre import ClientSnapshot, DataCentre, load_topology
    from .updates import ChangeLog, state_at

    _need(args, "manifest")
    topo = load_topology(args["manifest"])
    snapshot = _date(args["snapshot_date"]) if args.get("snapshot_date") else None
    if not args.get("query"):
        dc = DataCentre(topo)
        plan = dc.plan([], snapshot)
        rows = []
        for sid in sorted(plan.selected_shards):
            s = topo.shards[sid]
            rows.append([sid, s.range_start or "", s.range_end or ""])
        _emit(args, _csv(rows, ["shard_id", "range_start", "range_end"]))
        return
    client = None
    log = []
    if snapshot is not None:
        _need(args, "log")
        log = ChangeLog(args["log"]).replay(1) if Path(args["log"]).exists() else []
        client = ClientSnapshot(build_index(state_at(log, snapshot).values()), snapshot)
    dc = DataCentre(topo, log)
    result = dc.query(_query_terms(args), int(args["k"]), client)
    rows = [(i + 1, h.doc_id, repr(h.score)) for i, h in enumerate(result)]
    _emit(args, _csv(rows, ["rank", "doc_id", "score"]))


def _read_snapshots(args) -> list[date]:
    dates = [_date(d) for d in args.get("snapshot_date_list") or []]
    if args.get("snapshots"):
        for lineno, line in enumerate(Path(args["snapshots"]).read_text().splitlines(), 1):
            line = line.strip()
            if not line or line == "snapshot_date":
                continue
            try:
                dates.append(date.fromisoformat(line.split(",")[0]))
            except ValueError:
                raise SnapSearchError(f"{args['snapshots']}:{lineno}: bad date {line!r}") from None
    if not dates:
        raise UsageError("give client snapshot dates with --snapshot-date or --snapshots")
    return dates


def cmd_replicate_plan(args):
    from .datacentre import (
        FleetDistribution, expected_shard_load, load_topology, plan_replicas, write_routing_csv,
    )

    _need(args, "manifest", "budget")
    topo = load_topology(args["manifest"])
    fleet = FleetDistribution.from_snapshots(_read_snapshots(args))
    loads = expected_shard_load(fleet, topo, float(args["rate"]))
    alloc = plan_replicas(loads, int(args["budget"]))
    buf = io.StringIO()
    write_routing_csv(buf, topo, loads, alloc)
    _emit(args, buf.getvalue())


# change log

def cmd_log_append(args):
    from .corpus import Document
    from .updates import Change, ChangeLog

    _need(args, "log", "changes")
    log = ChangeLog(args["log"])
    path = args["changes"]
    changes = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                payload = rec.get("payload")
                changes.append(Change(
                    rec["kind"], date.fromisoformat(rec["date"]), rec["doc_id"],
                    None if payload is None else Document.from_record(payload),
                ))
            except (ValueError, KeyError, TypeError) as exc:
                raise SnapSearchError(f"{path}:{lineno}: bad change record ({exc})") from None
    seqs = log.extend(changes)
    rows = [[len(seqs), seqs[0] if seqs else "", seqs[-1] if seqs else "", log.head_seq]]
    sys.stdout.write(_csv(rows, ["appended", "first_seq", "last_seq", "head_seq"]))


def cmd_log_replay(args):
    from .updates import ChangeLog

    _need(args, "log")
    if not Path(args["log"]).exists():
        raise SnapSearchError(f"{args['log']}: no such change log")
    log = ChangeLog(args["log"])
    start = int(args.get("from_seq") or 1)
    end = int(args["to_seq"]) if args.get("to_seq") else log.head_seq
    rows = []
    for c in log.replay(start, end):
        doc = c.payload
        rows.append([c.seq, c.kind.value, c.date.isoformat(), c.doc_id,
                     "" if doc is None else doc.uri, "" if doc is None else doc.text])
    _emit(args, _csv(rows, ["seq", "kind", "date", "doc_id", "uri", "text"]))


def cmd_log_broadcast_sim(args):
    from .updates import ChangeLog, ClientState, LossModel, broadcast_round

    _need(args, "log")
    if not Path(args["log"]).exists():
        raise SnapSearchError(f"{args['log']}: no such change log")
    log = ChangeLog(args["log"])
    clients = [ClientState(i) for i in range(int(args["clients"]))]
    loss = LossModel(int(args["seed"]), float(args["loss"]))
    per_round = int(args["round_size"])
    rows = []
    first = 1
    round_no = 0
    while first <= log.head_seq:
        last = min(log.head_seq, first + per_round - 1)
        records = log.replay(first, last)
        # replay the log as if it grew one round at a time
        report = broadcast_round(_Prefix(log, last), clients, loss, records, round_no)
        rows.append([round_no, report.first_seq, report.last_seq, report.delivered, report.lost,
                     report.catch_up_calls, len(report.stale_clients),
                     all(c.applied_seq == last for c in clients)])
        first = last + 1
        round_no += 1
    _emit(args, _csv(rows, ["round", "first_seq", "last_seq", "delivered", "lost",
                            "catch_up_calls", "stale_clients", "converged"]))


class _Prefix:
    """A read-only view of the archive up to ``head``."""

    def __init__(self, log, head):
        self._log, self.head_seq, self.online = log, head, True

    def replay(self, a, b=None):
        return self._log.replay(a, self.head_seq if b is None else b)


# simulation

def _sim_config(args):
    from .simulate import SimConfig

    names = {f.name for f in fields(SimConfig)}
    values = {k: v for k, v in args.items() if k in names and v is not None}
    return SimConfig.from_dict(values)


def cmd_simulate_run(args):
    from .simulate import compare, report_csv

    config = _sim_config(args)
    _emit(args, report_csv(compare([config])))


def cmd_simulate_compare(args):
    from .simulate import SimMode, compare, report_csv

    config = _sim_config(args)
    modes = args.get("modes") or [m.value for m in SimMode]
    if isinstance(modes, str):
        modes = modes.split(",")
    _emit(args, report_csv(compare([replace(config, mode=m) for m in modes])))


# projections

def _scales(args) -> list[float]:
    raw = args.get("scale", 1.0)
    if isinstance(raw, (int, float)):
        return [float(raw)]
    try:
        return [float(s) for s in str(raw).split(",")]
    except ValueError:
        raise UsageError(f"--scale must be a number or comma-separated numbers, got {raw!r}") from None


def cmd_project_curve(args):
    from .projections import web

    if args.get("quantity"):
        name = args["quantity"]
        if name not in web.QUANTITIES:
            raise UsageError(f"--quantity must be one of {sorted(web.QUANTITIES)}")
        model = web.QUANTITIES[name]
    elif args.get("demand"):
        model = web.demand_model(args["demand"])
    elif args.get("capacity"):
        model = web.capacity_model(args["capacity"])
    else:
        raise UsageError("give one of --quantity, --demand or --capacity")
    start = float(args.get("start") if args.get("start") is not None else max(model.lo, 1990))
    end = float(args.get("end") if args.get("end") is not None else min(model.hi, 2050))
    rows = web.curve(model, start, end, float(args["step"]))
    _emit(args, web.curve_csv(rows))


def _crossovers(args, scales):
    from .projections import web

    _need(args, "capacity", "demand")
    cap = web.capacity_model(args["capacity"])
    demands = args["demand"] if isinstance(args["demand"], list) else [args["demand"]]
    out = []
    for spec in demands:
        dem = web.demand_model(spec)
        for s in scales:
            rep = web.sensitivity(s, cap, dem, args.get("start"), args.get("end"))
            out.append((args["capacity"], spec, s, rep))
    _emit(args, web.crossover_csv(out))


def cmd_project_crossover(args):
    _crossovers(args, [1.0])


def cmd_project_sensitivity(args):
    _crossovers(args, _scales(args))


def cmd_project_estimate_size(args):
    from .projections import SampleEngine, estimate_web_size, zipf_probes

    _need(args, "reference", "engine")
    reference = build_index(iter_corpus(args["reference"]))
    engines = args["engine"] if isinstance(args["engine"], list) else [args["engine"]]
    probes = zipf_probes(reference, int(args["probes"]))
    samples = [SampleEngine(iter_corpus(p), name=Path(p).name) for p in engines]
    est = estimate_web_size(samples, probes, int(args["k"]))
    rows = [[e.name, repr(s), repr(u)] for e, s, u in zip(samples, est.sizes, est.uniqueness)]
    rows.append(["total", repr(est.total), ""])
    _emit(args, _csv(rows, ["engine", "size", "uniqueness"]))


def cmd_project_broadcast_feasible(args):
    from .projections import broadcast_feasible

    rep = broadcast_feasible(float(args["year"]), float(args["mu"]))
    header = ["year", "users", "new_bytes", "modified_bytes", "daily_bytes"]
    row = [f"{rep.year:g}", repr(rep.users), repr(rep.new_bytes), repr(rep.modified_bytes), repr(rep.daily_bytes)]
    for model in sorted(rep.capacity):
        header += [f"{model}_bytes_per_day", f"{model}_feasible"]
        row += [repr(rep.capacity[model]), rep.feasible[model]]
    _emit(args, _csv([row], header))


# parser

DEFAULTS = {
    "seed": 0,
    "k": 10,
    "granularity_days": 365,
    "mode": None,
    "n_shards": 8,
    "rate": 1.0,
    "clients": 50,
    "loss": 0.0,
    "round_size": 1000,
    "step": 1.0,
    "probes": 50,
    "year": 2050.0,
    "mu": 1.0,
    "scale": 1.0,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="snapsearch", allow_abbrev=False, argument_default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="group", metavar="COMMAND")

    def command(group_parser, name, func, help_text):
        c = group_parser.add_parser(name, help=help_text, allow_abbrev=False, argument_default=argparse.SUPPRESS)
        c.set_defaults(func=func, parser=c)
        c.add_argument("--config", help="JSON file of flag values")
        c.add_argument("--seed", type=int, help="random seed (default 0)")
        return c

    def group(name, help_text):
        g = sub.add_parser(name, help=help_text, allow_abbrev=False)
        return g.add_subparsers(dest="command", metavar="SUBCOMMAND")

    g = group("index", "build and search single indexes")
    c = command(g, "build", cmd_index_build, "index a corpus file")
    c.add_argument("--corpus"); c.add_argument("--out")
    c = command(g, "search", cmd_index_search, "top-k search of an index file")
    c.add_argument("--index"); c.add_argument("--query"); c.add_argument("--k", type=int); c.add_argument("--out")

    g = group("shard", "date sharding and routing")
    c = command(g, "plan", cmd_shard_plan, "shard a corpus and write a manifest")
    c.add_argument("--corpus"); c.add_argument("--out", help="output directory")
    c.add_argument("--granularity-days", type=int); c.add_argument("--mode", choices=["date", "random"])
    c.add_argument("--n-shards", type=int)
    c = command(g, "route", cmd_shard_route, "list shards a snapshot must search, or run a query")
    c.add_argument("--manifest"); c.add_argument("--snapshot-date"); c.add_argument("--query")
    c.add_argument("--log"); c.add_argument("--k", type=int); c.add_argument("--out")

    g = group("replicate", "replica planning")
    c = command(g, "plan", cmd_replicate_plan, "expected shard loads and replica counts")
    c.add_argument("--manifest"); c.add_argument("--budget", type=int); c.add_argument("--rate", type=float)
    c.add_argument("--snapshot-date", dest="snapshot_date_list", action="append")
    c.add_argument("--snapshots", help="file with one client snapshot date per line"); c.add_argument("--out")

    g = group("log", "change log")
    c = command(g, "append", cmd_log_append, "append JSONL changes to a log")
    c.add_argument("--log"); c.add_argument("--changes")
    c = command(g, "replay", cmd_log_replay, "dump records as CSV")
    c.add_argument("--log"); c.add_argument("--from-seq", type=int); c.add_argument("--to-seq", type=int); c.add_argument("--out")
    c = command(g, "broadcast-sim", cmd_log_broadcast_sim, "lossy broadcast of a log to simulated clients")
    c.add_argument("--log"); c.add_argument("--clients", type=int); c.add_argument("--loss", type=float)
    c.add_argument("--round-size", type=int); c.add_argument("--out")

    g = group("simulate", "workload simulation")
    for name, func in (("run", cmd_simulate_run), ("compare", cmd_simulate_compare)):
        c = command(g, name, func, f"simulation {name}")
        c.add_argument("--mode", choices=["centralized", "date", "broadcast"])
        c.add_argument("--n-clients", type=int); c.add_argument("--horizon-days", type=int)
        c.add_argument("--device-lifetime-days", type=float); c.add_argument("--queries-per-client-per-month", type=int)
        c.add_argument("--docs-per-day", type=float); c.add_argument("--vocab-size", type=int)
        c.add_argument("--zipf-s", type=float); c.add_argument("--granularity-days", type=int)
        c.add_argument("--k", type=int); c.add_argument("--fleet-policy", choices=["uniform", "epoch", "current"])
        c.add_argument("--out")
        if name == "compare":
            c.add_argument("--modes", help="comma-separated modes (default all)")

    g = group("project", "growth projections")
    c = command(g, "curve", cmd_project_curve, "dump a model curve")
    c.add_argument("--quantity"); c.add_argument("--demand"); c.add_argument("--capacity")
    c.add_argument("--start", type=float); c.add_argument("--end", type=float); c.add_argument("--step", type=float)
    c.add_argument("--out")
    for name, func in (("crossover", cmd_project_crossover), ("sensitivity", cmd_project_sensitivity)):
        c = command(g, name, func, f"{name} report")
        c.add_argument("--capacity"); c.add_argument("--demand", action="append")
        c.add_argument("--start", type=float); c.add_argument("--end", type=float); c.add_argument("--out")
        if name == "sensitivity":
            c.add_argument("--scale", help="demand multiplier(s), comma-separated")
    c = command(g, "estimate-size", cmd_project_estimate_size, "combined engine size estimate")
    c.add_argument("--reference"); c.add_argument("--engine", action="append")
    c.add_argument("--probes", type=int); c.add_argument("--k", type=int); c.add_argument("--out")
    c = command(g, "broadcast-feasible", cmd_project_broadcast_feasible, "daily change bytes vs bandwidth")
    c.add_argument("--year", type=float); c.add_argument("--mu", type=float); c.add_argument("--out")
    return p


def _merge(ns: argparse.Namespace) -> dict:
    given = vars(ns)
    merged = dict(DEFAULTS)
    if given.get("config"):
        try:
            config = json.loads(Path(given["config"]).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise SnapSearchError(f"{given['config']}: cannot read config ({exc})") from None
        if not isinstance(config, dict):
            raise SnapSearchError(f"{given['config']}: config must be a JSON object")
        config = {k.replace("-", "_"): v for k, v in config.items()}
        known = {a.dest for a in given["parser"]._actions} - {"help", "config"}
        unknown = sorted(set(config) - known)
        if unknown:
            raise UsageError(f"{given['config']}: unknown config keys {unknown}")
        merged.update(config)
    merged.update(given)
    if merged.get("mode") is None:
        merged.pop("mode")
        if given["group"] == "shard":
            merged["mode"] = "date"
    return merged


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not getattr(ns, "group", None) or not getattr(ns, "func", None):
        parser.print_usage(sys.stderr)
        print("snapsearch: error: a command and subcommand are required", file=sys.stderr)
        return 2
    try:
        args = _merge(ns)
        args["func"](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"snapsearch: error: {exc}", file=sys.stderr)
        return 2
    except (SnapSearchError, ValueError, OSError, KeyError) as exc:
        message = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"snapsearch: {message}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
