"""Command-line front end: scenario runs, stage sweeps and one-shot localization."""
from __future__ import annotations

import argparse
import csv
import io
import random
import sys
import time

from .cils import Diagnostic, LocalizationReport, default_threshold, examine_tap, localize
from .crosstalk import DEFAULT_TOL, CrosstalkParams
from .errors import ScenarioError, ToadnetError
from .scenario import ScenarioConfig, db_to_linear, parse_scenario
from .simulator import FaultSpec, propagate, simulate_slots
from .topology import NodeCoord, build_banyan, route

RUN_COLUMNS = [
    "packet_id", "src", "dst", "p0_mw", "s_out_mw", "x_meas", "verdict",
    "N", "fault_x", "fault_y", "residual", "slots",
]
SWEEP_COLUMNS = ["k", "x_meas", "N", "localize_ns", "iterations"]
SWEEP_K_MAX = 20


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def cmd_run(config: ScenarioConfig):
    """Simulate a scenario and run CILS on every tap.

    Returns ``(report_text, csv_text)``. Both are deterministic for a given
    config, including the noise draws (seeded from ``config.seed``).
    """
    topo = build_banyan(config.k)
    rng = random.Random(config.seed)
    result = simulate_slots(topo, config.traffic, config.params, config.faults,
                            noise_r=config.noise_r, rng=rng)
    by_id = {p.id: p for p in config.traffic}

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RUN_COLUMNS)
    lines = []
    counts = {"clean": 0, "fault": 0, "diagnostic": 0}
    for tap in result.taps:
        verdict, outcome = examine_tap(tap, config.params, config.threshold, config.tol)
        pkt = by_id[tap.packet_id]
        x_meas = verdict.x_meas if verdict is not None else None
        n = fx = fy = residual = None
        if isinstance(outcome, LocalizationReport):
            label = "fault"
            n, fx, fy, residual = outcome.n_count, outcome.fault_node.x, outcome.fault_node.y, outcome.residual
            lines.append(f"  packet {tap.packet_id} {pkt.src}->{pkt.dst}: crosstalk {x_meas:.6g}, "
                         f"N={n}, origin router {outcome.fault_node}")
        elif isinstance(outcome, Diagnostic):
            label = f"diagnostic:{outcome.kind}"
            lines.append(f"  packet {tap.packet_id} {pkt.src}->{pkt.dst}: {outcome.kind}: {outcome.message}")
        else:
            label = "clean"
        counts[label.split(":")[0]] += 1
        writer.writerow([_fmt(v) for v in (
            tap.packet_id, pkt.src, pkt.dst, pkt.p0, tap.s_out, x_meas, label,
            n, fx, fy, residual, tap.latency,
        )])

    p = config.params
    head = [
        f"scenario: {config.name or '(unnamed)'}",
        f"fabric: {topo.num_ports}x{topo.num_ports} Banyan, {topo.k} stages, "
        f"{topo.routers_per_stage} routers per stage",
        f"crosstalk: x_inter={p.x_inter:g} x_intra={p.x_intra:g} n={p.n} mode={p.mode.value} "
        f"threshold={config.threshold:g} tol={config.tol:g}",
        f"injected faults: {', '.join(str(f.node) for f in config.faults) or 'none'}",
        f"packets: {len(config.traffic)} injected, {len(result.taps)} delivered, "
        f"{len(result.dropped)} dropped, {result.buffered_events} buffering events, "
        f"{result.slots_elapsed} slots",
        f"verdicts: {counts['clean']} clean, {counts['fault']} localized, {counts['diagnostic']} diagnostics",
    ]
    if result.dropped:
        head.append(f"dropped packet ids: {', '.join(map(str, result.dropped))}")
    return "\n".join(head + lines) + "\n", buf.getvalue()


def sweep_rows(k_min, k_max, params: CrosstalkParams, tol=DEFAULT_TOL, repeats=1):
    """Worst-case localization for each fabric size in ``k_min..k_max``.

    The fault sits at stage 1 on the path 0 -> 2**k - 1, so every hop is
    contaminated. ``localize_ns`` is the fastest of ``repeats`` timed calls.
    """
    if not (isinstance(k_min, int) and isinstance(k_max, int) and 1 <= k_min <= k_max <= SWEEP_K_MAX):
        raise ScenarioError(f"need 1 <= k_min <= k_max <= {SWEEP_K_MAX}, got {k_min}..{k_max}")
    if repeats < 1:
        raise ScenarioError("repeats must be >= 1")
    rows = []
    for k in range(k_min, k_max + 1):
        topo = build_banyan(k)
        path = route(topo, 0, topo.num_ports - 1)
        s_out = propagate(topo, path, 1.0, params, FaultSpec(path.node_at(1)))
        x_meas = s_out - 1.0
        best = None
        for _ in range(repeats):
            t0 = time.perf_counter_ns()
            report = localize(x_meas, path, params, tol)
            elapsed = time.perf_counter_ns() - t0
            best = elapsed if best is None else min(best, elapsed)
        rows.append({"k": k, "x_meas": x_meas, "N": report.n_count,
                     "localize_ns": best, "iterations": report.iterations})
    return rows


def cmd_sweep(k_min, k_max, params: CrosstalkParams, tol=DEFAULT_TOL, repeats=1) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in sweep_rows(k_min, k_max, params, tol, repeats):
        writer.writerow({key: _fmt(v) for key, v in row.items()})
    return buf.getvalue()


def _write(text, path):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _params_from_args(args):
    x_inter, x_intra = args.x_inter, args.x_intra
    if args.db:
        x_inter, x_intra = db_to_linear(x_inter), db_to_linear(x_intra)
    return CrosstalkParams(x_inter, x_intra, args.n, args.mode)


def _add_param_args(p):
    p.add_argument("--x-inter", type=float, required=True, help="interchannel crosstalk per router")
    p.add_argument("--x-intra", type=float, required=True, help="intrachannel crosstalk per router")
    p.add_argument("--n", type=int, default=2, help="parallel degree (default 2)")
    p.add_argument("--mode", choices=["linear", "multiplicative"], default="multiplicative")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--db", action="store_true", help="crosstalk coefficients are given in dB")


def build_parser():
    parser = argparse.ArgumentParser(prog="toadnet", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate a scenario file and localize crosstalk")
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--out", help="CSV output path (default: stdout, report goes to stderr)")
    p.add_argument("--db", action="store_true", help="x_inter/x_intra in the scenario are in dB")

    p = sub.add_parser("sweep", help="worst-case localization cost versus stage count")
    p.add_argument("--k-min", type=int, required=True)
    p.add_argument("--k-max", type=int, required=True)
    p.add_argument("--repeats", type=int, default=1, help="timed calls per k; the minimum is kept")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    _add_param_args(p)

    p = sub.add_parser("localize", help="localize a measured crosstalk value on one lightpath")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--src", type=int, required=True)
    p.add_argument("--dst", type=int, required=True)
    p.add_argument("--x-meas", type=float, required=True)
    _add_param_args(p)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            with open(args.scenario) as fh:
                config = parse_scenario(fh.read(), db=args.db)
            report, table = cmd_run(config)
            (sys.stdout if args.out else sys.stderr).write(report)
            _write(table, args.out)
        elif args.command == "sweep":
            _write(cmd_sweep(args.k_min, args.k_max, _params_from_args(args), args.tol, args.repeats), args.out)
        else:
            topo = build_banyan(args.k)
            path = route(topo, args.src, args.dst)
            rep = localize(args.x_meas, path, _params_from_args(args), args.tol)
            hops = " ".join(f"{h.node}" for h in path.hops)
            print(f"lightpath {args.src}->{args.dst}: {hops}")
            print(f"N={rep.n_count} fault_x={rep.fault_node.x} fault_y={rep.fault_node.y} "
                  f"residual={rep.residual:.3g}")
    except (OSError, ToadnetError) as exc:
        print(f"toadnet {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
