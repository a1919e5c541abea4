"""Command-line front end.

Thin adapter: parses config + flags, sends requests to the service (in
process by default), and serializes results.  No numeric logic lives here.

CSV conventions: 12 significant digits in scientific notation, absent values
as the literal token "NA", fixed column order, "\n" line endings.  Repeated
runs with the same config produce byte-identical files.
"""
from __future__ import annotations

import argparse
import sys
from typing import Iterable, Sequence

from .client import ServiceClient, ServiceError
from .config import ConfigError, RunConfig, parse_config
from .protocol import ProtocolParams

SWEEP_COLUMN = {
    "distance": "distance_km",
    "gain": "gain",
    "inherent_noise": "inherent_noise",
}


def fmt(value: float | None) -> str:
    """Serialize one CSV cell: 12 significant digits, or NA when absent."""
    if value is None:
        return "NA"
    return f"{value:.11e}"


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[str]]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(",".join(header) + "\n")
        for row in rows:
            handle.write(",".join(row) + "\n")
            count += 1
    return count


def params_payload(params: ProtocolParams) -> dict:
    return {
        "channel": {
            "distance_km": params.channel.distance_km,
            "excess_noise": params.channel.excess_noise,
            "loss_db_per_km": params.channel.loss_db_per_km,
        },
        "detector": {
            "kind": params.detector.kind,
            "efficiency": params.detector.efficiency,
            "electronic_noise": params.detector.electronic_noise,
        },
        "amplifier": {
            "kind": params.amplifier.kind,
            "gain": params.amplifier.gain,
            "inherent_noise": params.amplifier.inherent_noise,
        },
        "v_a": params.v_a,
        "v_b": params.v_b,
        "t_a": params.t_a,
        "beta": params.beta,
    }


def variants_payload(config: RunConfig) -> list[dict] | None:
    if config.variants is None:
        return None
    return [
        {
            "label": v.label,
            "amplifier": {
                "kind": v.amplifier.kind,
                "gain": v.amplifier.gain,
                "inherent_noise": v.amplifier.inherent_noise,
            },
            "perfect_detector": v.perfect_detector,
        }
        for v in config.variants
    ]


def cmd_keyrate(client: ServiceClient, config: RunConfig, args: argparse.Namespace) -> int:
    result = client.post("/api/keyrate", params_payload(config.params))
    print(
        f"K = {result['key_rate']:.6e} bits/pulse "
        f"(I = {result['mutual_information']:.6e}, "
        f"chi = {result['holevo_bound']:.6e}, "
        f"optimal k = {result['estimator_gain']:.6e})"
    )
    if args.out:
        write_csv(
            args.out,
            ["distance_km", "K", "I", "chi", "v_alice", "v_alice_given_bob", "estimator_gain"],
            [[
                fmt(config.params.channel.distance_km),
                fmt(result["key_rate"]),
                fmt(result["mutual_information"]),
                fmt(result["holevo_bound"]),
                fmt(result["v_alice"]),
                fmt(result["v_alice_given_bob"]),
                fmt(result["estimator_gain"]),
            ]],
        )
        print(f"wrote {args.out}")
    return 0


def cmd_sweep(client: ServiceClient, config: RunConfig, args: argparse.Namespace) -> int:
    start, stop, step = config.sweep_range
    payload = {
        "params": params_payload(config.params),
        "variable": config.sweep_variable,
        "start": start,
        "stop": stop,
        "step": step,
    }
    variants = variants_payload(config)
    if variants is not None:
        payload["variants"] = variants
    result = client.post("/api/sweep", payload)
    labels = result["labels"]
    header = [SWEEP_COLUMN[config.sweep_variable]]
    for label in labels:
        header += [f"{label}.K", f"{label}.I", f"{label}.chi"]
    rows = []
    for row in result["rows"]:
        cells = [fmt(row["value"])]
        for label in labels:
            r = row["results"][label]
            cells += [fmt(r["key_rate"]), fmt(r["mutual_information"]), fmt(r["holevo_bound"])]
        rows.append(cells)
    out = args.out or "sweep.csv"
    count = write_csv(out, header, rows)
    print(f"wrote {count} rows x {len(header)} columns to {out}")
    return 0


def cmd_max_distance(client: ServiceClient, config: RunConfig, args: argparse.Namespace) -> int:
    result = client.post("/api/max-distance", params_payload(config.params))
    distance = result["distance_km"]
    print(f"max distance = {distance:.3f} km")
    if args.out:
        write_csv(args.out, ["max_distance_km"], [[fmt(distance)]])
        print(f"wrote {args.out}")
    return 0


def cmd_tolerable_noise(client: ServiceClient, config: RunConfig, args: argparse.Namespace) -> int:
    result = client.post("/api/tolerable-noise", {"params": params_payload(config.params)})
    n_tol = result["n_tol"]
    gain = config.params.amplifier.gain
    distance = config.params.channel.distance_km
    if n_tol is None:
        print(f"no improvement: the amplifier does not help at gain {gain:g}, {distance:g} km")
    else:
        print(f"N_tol = {n_tol:.3f} (gain {gain:g}, {distance:g} km, full value {n_tol:.11e})")
    if args.out:
        write_csv(
            args.out,
            ["gain", "distance_km", "n_tol"],
            [[fmt(gain), fmt(distance), fmt(n_tol)]],
        )
        print(f"wrote {args.out}")
    return 0


def cmd_surface(client: ServiceClient, config: RunConfig, args: argparse.Namespace) -> int:
    payload = {
        "params": params_payload(config.params),
        "gain_range": list(config.surface_gains),
        "distance_range": list(config.surface_distances),
    }
    result = client.post("/api/surface", payload)
    cells = result["cells"]
    rows = []
    absent = 0
    for cell in cells:
        if cell["n_tol"] is None:
            absent += 1
        if cell.get("error"):
            print(f"note: gain {cell['gain']:g}, {cell['distance_km']:g} km: {cell['error']}",
                  file=sys.stderr)
        rows.append([fmt(cell["gain"]), fmt(cell["distance_km"]), fmt(cell["n_tol"])])
    out = args.out or "surface.csv"
    count = write_csv(out, ["gain", "distance_km", "n_tol"], rows)
    print(f"wrote {count} cells to {out} ({absent} with no tolerable noise)")
    return 0


def cmd_validate(client: ServiceClient, config: RunConfig, args: argparse.Namespace) -> int:
    payload = {
        "params": params_payload(config.params),
        "seed": config.seed,
        "samples": config.samples,
    }
    result = client.post("/api/validate", payload)
    for check in result["checks"]:
        status = "PASS" if check["passed"] else "FAIL"
        print(f"{status} {check['name']}: {check['detail']}")
    if args.out:
        write_csv(
            args.out,
            ["check", "passed"],
            [[c["name"], str(c["passed"]).lower()] for c in result["checks"]],
        )
        print(f"wrote {args.out}")
    if not result["all_passed"]:
        return 1
    print(f"all {len(result['checks'])} checks passed (seed {config.seed}, n {config.samples})")
    return 0


COMMANDS = {
    "keyrate": cmd_keyrate,
    "sweep": cmd_sweep,
    "tolerable-noise": cmd_tolerable_noise,
    "surface": cmd_surface,
    "max-distance": cmd_max_distance,
    "validate": cmd_validate,
}

HELP = {
    "keyrate": "secret key rate at one parameter point",
    "sweep": "key-rate curves over a parameter grid (CSV)",
    "tolerable-noise": "largest amplifier inherent noise that still helps",
    "surface": "tolerable noise over a (gain, distance) grid (CSV)",
    "max-distance": "largest distance with a positive key rate",
    "validate": "Monte Carlo cross-check of the covariance model",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twoway-cvqkd",
        description="Key rates for amplifier-assisted two-way continuous-variable QKD.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in HELP.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", metavar="PATH", help="INI config file")
        p.add_argument("--out", metavar="PATH", help="output CSV path")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override one config key (section.key=value); repeatable",
        )
        p.add_argument("--seed", type=int, metavar="INT", help="override run.seed")
        p.add_argument("--samples", type=int, metavar="INT", help="override run.samples")
        p.add_argument(
            "--server",
            metavar="URL",
            help="base URL of a running service; default serves requests in process",
        )
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = list(args.overrides)
        if args.seed is not None:
            overrides.append(f"run.seed={args.seed}")
        if args.samples is not None:
            overrides.append(f"run.samples={args.samples}")
        config = parse_config(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        client = ServiceClient(args.server)
        return COMMANDS[args.command](client, config, args)
    except ServiceError as exc:
        print(f"error: {exc.detail}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
