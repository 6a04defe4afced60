"""Command-line entry point.

Exit codes: 0 when every assertion passes, 1 when at least one FAILs,
2 for usage or configuration errors.  Reports are written atomically
(temp file + rename) and are byte-stable for a fixed configuration and
seed; the timestamp is attached as a separate top-level field.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from fractions import Fraction

from . import experiments
from .cayley import build_ball, estimate_delta, load_ball, save_ball
from .errors import BoundarylexError, ConfigError
from .group_oracle import parse_presentation
from .presets import PRESETS, get_preset
from .rays import make_periodic_ray, phi_hat, boundary_ball, stabilization_probe
from .shift_space import (
    PeriodicSeq,
    TruncatedSeq,
    asdim_cover,
    audit_cover,
    shift_closure,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _write_json(payload: dict, path: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path is None:
        print(text)
        return
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(text + "\n")
    os.replace(tmp, path)


def _write_csv(rows: list[dict], path: str) -> None:
    if not rows:
        rows = [{}]
    cols = sorted({k for row in rows for k in row})
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=cols)
        writer.writeheader()
        writer.writerows(rows)
    os.replace(tmp, path)


def _oracle_from_args(args) -> tuple[object, object]:
    if getattr(args, "preset", None):
        preset = get_preset(args.preset)
        return preset.oracle(), preset
    if getattr(args, "presentation", None):
        with open(args.presentation) as fh:
            return parse_presentation(fh.read()), None
    raise ConfigError("one of --preset / --presentation is required")


def _stamp(payload: dict, no_timestamp: bool) -> dict:
    if not no_timestamp:
        payload["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    return payload


def _cmd_build_ball(args) -> int:
    oracle, _ = _oracle_from_args(args)
    ball = build_ball(oracle, args.radius, max_vertices=args.max_vertices)
    if args.out:
        save_ball(ball, args.out)
    summary = {"radius": ball.radius, "vertices": len(ball),
               "levels": [len(ball.vertices_at_level(k))
                          for k in range(ball.radius + 1)],
               "oracle": ball.oracle.describe()}
    print(json.dumps(summary))
    return EXIT_OK


def _cmd_estimate_delta(args) -> int:
    if args.ball:
        ball = load_ball(args.ball)
    else:
        oracle, preset = _oracle_from_args(args)
        radius = args.radius or (preset.ball_radius if preset else args.side_bound)
        ball = build_ball(oracle, radius)
    est = estimate_delta(ball, args.side_bound, sample=args.sample,
                         seed=args.seed, alternates=args.alternates)
    payload = _stamp({"delta_slim": str(est.delta_slim),
                      "delta_4pt": str(est.delta_4pt),
                      "scope": est.scope}, args.no_timestamp)
    _write_json(payload, args.out)
    return EXIT_OK


def _cmd_phi(args) -> int:
    oracle, preset = _oracle_from_args(args)
    radius = args.radius or max(args.horizon + (args.slack or 0), args.depth)
    ball = build_ball(oracle, radius)
    slack = args.slack
    if slack is None:
        slack = preset.slack if preset else 0
    eta = make_periodic_ray(oracle, args.eta, args.depth,
                            max(0, radius - args.depth))
    horizons = args.probe_horizons or [args.horizon]
    if len(horizons) > 1:
        probe = stabilization_probe(ball, eta, args.n or args.horizon,
                                    horizons, slack)
        payload = _stamp({"eta": args.eta, "horizons": probe.horizons,
                          "prefixes": probe.prefixes,
                          "common_prefix_len": probe.common_prefix_len,
                          "stable": probe.stable,
                          "stable_from": probe.stable_from}, args.no_timestamp)
    else:
        sg = phi_hat(ball, eta, args.n or args.horizon, args.horizon, slack)
        payload = _stamp({"eta": args.eta, "sigma": sg.letters,
                          "depth": sg.depth, "horizon": sg.horizon,
                          "slack": sg.slack}, args.no_timestamp)
    _write_json(payload, args.out)
    return EXIT_OK


def _cmd_boundary_ball(args) -> int:
    oracle, preset = _oracle_from_args(args)
    delta = Fraction(args.delta) if args.delta is not None else (
        preset.delta if preset else Fraction(0))
    radius = args.radius or (args.r + args.horizon)
    ball = build_ball(oracle, radius)
    eta = make_periodic_ray(oracle, args.eta, args.horizon,
                            max(0, radius - args.horizon))
    result = boundary_ball(ball, eta, args.r, args.horizon, delta)
    payload = _stamp({
        "eta": args.eta, "r": args.r, "horizon": args.horizon,
        "delta": str(delta),
        "points": [{"witness": p.witness, "surrogate": p.surrogate.to_json(),
                    "all_witnesses": list(p.all_witnesses)}
                   for p in result.points],
        "unresolved_pairs": [list(p) for p in result.unresolved_pairs],
        "caveats": list(result.caveats),
    }, args.no_timestamp)
    _write_json(payload, args.out)
    return EXIT_OK


def _load_carrier(path: str):
    with open(path) as fh:
        data = json.load(fh)
    items = []
    for entry in data:
        if "period" in entry:
            items.append(PeriodicSeq(entry.get("preperiod", ""), entry["period"]))
        elif "word" in entry:
            items.append(TruncatedSeq(entry["word"]))
        else:
            raise ConfigError(f"carrier entry {entry!r} needs 'period' or 'word'")
    return items


def _cmd_asdim_cover(args) -> int:
    items = shift_closure(_load_carrier(args.carrier))
    cover = asdim_cover(items, args.scale)
    audit = audit_cover(cover, args.scale, items)
    ok = audit["max_diam"] <= 8 * args.scale
    payload = _stamp({
        "carrier_size": len(items), "scale": args.scale,
        "classes": audit["classes"], "max_class_diameter": audit["max_diam"],
        "diameter_bound": 8 * args.scale,
        "ball_class_constant": audit["max_ball_classes"],
        "diameter_ok": ok,
    }, args.no_timestamp)
    _write_json(payload, args.out)
    return EXIT_OK if ok else EXIT_FAIL


def _csv_rows_for_report(report) -> list[dict]:
    rows = []
    kind = report.kind
    if kind == "lemma-bound":
        for w, s, pair in zip(report.results["witnesses"],
                              report.results["sigma"],
                              report.results["tubular_pairs"]):
            rows.append({"witness": w, "sigma": s, "T0": pair["T0"],
                         "T1": pair["T1"], "ok_bound": pair["ok_bound"]})
    elif kind == "claim":
        rows = [dict(r) for r in report.results["pairs"]]
    elif kind == "free-shift":
        rows = [dict(v) for v in report.results["violations"]] or [
            {"checked": report.results["checked"], "violations": 0}]
    elif kind == "asdim-boundary":
        rows = [dict(b) for b in report.results["per_ball"]]
    elif kind == "hyperfinite":
        rows = [{"n": n, "classes": c}
                for n, c in zip(report.results["filtration_n"],
                                report.results["filtration_classes"])]
    for row in rows:
        row["kind"] = kind
    return rows


def _cmd_audit(args) -> int:
    kind = args.which
    kwargs = {}
    if kind == "free-shift":
        report = experiments.audit_free_shift(args.preset or "f2",
                                              count=args.count, seed=args.seed)
    else:
        preset = get_preset(args.preset)
        ball = None
        if args.radius:
            ball = build_ball(preset.oracle(), args.radius)
        if kind == "lemma-bound":
            report = experiments.audit_lemma_bound(
                args.preset, args.eta, r=args.r, N=args.depth,
                M=args.horizon, ball=ball)
        elif kind == "claim":
            report = experiments.audit_claim(
                args.preset, args.eta, r=args.r, N=args.depth,
                M=args.horizon, ball=ball)
        elif kind == "asdim":
            etas = args.eta.split(",") if args.eta else None
            report = experiments.audit_asdim_boundary(
                args.preset, etas, r=args.r, ball=ball,
                scale_override=args.scale)
        elif kind == "hyperfinite":
            ns = [int(x) for x in args.n_list.split(",")] if args.n_list else (0, 1, 2, 4, 8)
            report = experiments.audit_hyperfiniteness_witness(
                args.preset, args.eta, r=args.r, n_list=ns, ball=ball)
        else:  # pragma: no cover - argparse limits choices
            raise ConfigError(f"unknown audit {kind!r}")
    payload = _stamp(report.to_json(), args.no_timestamp)
    payload["seed"] = args.seed
    _write_json(payload, args.out)
    if args.csv:
        _write_csv(_csv_rows_for_report(report), args.csv)
    for a in report.assertions:
        print(f"[{a.status}] {report.kind}:{a.name}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


def _add_common(p: argparse.ArgumentParser, preset: bool = True) -> None:
    if preset:
        p.add_argument("--preset", choices=sorted(PRESETS),
                       help="built-in group preset")
        p.add_argument("--presentation", help="presentation config file")
    p.add_argument("--out", help="write the JSON report here (atomic)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-timestamp", action="store_true",
                   help="omit the timestamp field (byte-stable output)")
    p.add_argument("--workers", type=int, default=0,
                   help="reserved; the current implementation is single-process")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boundarylex",
        description="Desk-scale audits of boundary actions of hyperbolic groups")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-ball", help="build and serialize a Cayley ball")
    _add_common(p)
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--max-vertices", type=int, default=None,
                   help=f"vertex cap (env {os.environ.get('BOUNDARYLEX_MAX_VERTICES', 'BOUNDARYLEX_MAX_VERTICES')} overrides the default)")
    p.set_defaults(func=_cmd_build_ball)

    p = sub.add_parser("estimate-delta", help="measure slimness / 4-point defects")
    _add_common(p)
    p.add_argument("--ball", help="load a serialized ball instead of building")
    p.add_argument("--radius", type=int, default=None)
    p.add_argument("--side-bound", type=int, required=True)
    p.add_argument("--sample", type=int, default=50_000)
    p.add_argument("--alternates", type=int, default=2)
    p.set_defaults(func=_cmd_estimate_delta)

    p = sub.add_parser("phi", help="finite-horizon lex-minimal sequence")
    _add_common(p)
    p.add_argument("--eta", required=True, help="periodic seed word")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--n", type=int, default=None, help="prefix length (default horizon)")
    p.add_argument("--slack", type=int, default=None)
    p.add_argument("--radius", type=int, default=None)
    p.add_argument("--probe-horizons", type=int, nargs="*", default=None)
    p.set_defaults(func=_cmd_phi)

    p = sub.add_parser("boundary-ball", help="deduplicated translated boundary points")
    _add_common(p)
    p.add_argument("--eta", required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--delta", default=None, help="override delta (rational)")
    p.add_argument("--radius", type=int, default=None)
    p.set_defaults(func=_cmd_boundary_ball)

    p = sub.add_parser("asdim-cover", help="bounded cover of a serialized carrier")
    _add_common(p, preset=False)
    p.add_argument("--carrier", required=True, help="JSON carrier file")
    p.add_argument("--scale", type=int, required=True)
    p.set_defaults(func=_cmd_asdim_cover)

    p = sub.add_parser("audit", help="run a shipped audit")
    p.add_argument("which", choices=sorted(experiments.AUDITS))
    _add_common(p)
    p.add_argument("--eta", default=None)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--radius", type=int, default=None)
    p.add_argument("--scale", type=int, default=None)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--n-list", default=None, help="comma-separated filtration depths")
    p.add_argument("--csv", help="also emit flat per-point rows")
    p.set_defaults(func=_cmd_audit)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except BoundarylexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
