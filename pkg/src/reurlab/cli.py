"""Command-line client for the experiment drivers.

Runs in-process by default; with --server it posts the same validated
payload to a running service instance and renders the response
identically, so output bytes do not depend on the transport. Exit codes:
0 success, 1 property violation, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import httpx
import pydantic

from .entropy import density_to_dict, read_density_json, read_histogram_csv
from .experiments import run_angular, run_continuous, run_maxent_fit, run_verify
from .schemas import REQUEST_TYPES
from .serialize import canonical_csv, canonical_json


class UsageError(Exception):
    """Bad flags or config; maps to exit code 2."""


RUNNERS = {
    "verify": run_verify,
    "continuous": run_continuous,
    "angular": run_angular,
    "maxent-fit": run_maxent_fit,
}
ENDPOINTS = {
    "verify": "/verify",
    "continuous": "/continuous",
    "angular": "/angular",
    "maxent-fit": "/maxent/fit",
}


def _int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part]


def _float_list(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part]


def _parse_moment(text: str) -> dict:
    """Parse a --moment spec: kind[:parameter][=target].

    The parameter is the degree for power moments and the location for
    indicator moments; cos and sin take none. Without =target the
    constraint targets the input data's own moment.
    """
    body, _, target = text.partition("=")
    parts = body.split(":")
    if not parts or len(parts) > 2:
        raise UsageError(f"bad moment spec {text!r}")
    spec: dict = {"kind": parts[0]}
    if len(parts) == 2:
        if parts[0] == "power":
            spec["degree"] = int(parts[1])
        elif parts[0] == "indicator":
            spec["at"] = float(parts[1])
        else:
            raise UsageError(f"moment kind {parts[0]!r} takes no parameter")
    if target:
        spec["target"] = float(target)
    return spec


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reurlab",
        description="Uncertainty-relation experiment runner and service client.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, default_format: str) -> None:
        p.add_argument("--config", help="JSON config file; flags override its keys")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument(
            "--format",
            choices=("json", "csv"),
            default=default_format,
            help=f"report format (default {default_format})",
        )
        p.add_argument("--server", help="base URL of a running service instance")

    p = sub.add_parser("verify", help="random-instance sweep of discrete relations")
    p.add_argument("--seed", type=int)
    p.add_argument("--instances", type=int, help="instances per dimension")
    p.add_argument("--dims", type=_int_list, help="comma list, e.g. 2,3,4")
    p.add_argument("--models", choices=("uniform", "boltzmann", "moments"))
    p.add_argument("--tolerance", type=float)
    p.add_argument(
        "--inject-entropy-sign-bug",
        action="store_const",
        const=True,
        dest="flip_entropy_sign",
        help="negative control: flip the state-entropy sign in every bound",
    )
    add_common(p, "json")

    p = sub.add_parser("continuous", help="position-momentum bounds for a preset")
    p.add_argument(
        "--preset",
        help="gaussian | squeezed | hermite | gaussian-superposition | hermite-<n>",
    )
    p.add_argument("--order", type=int, help="hermite preset: excitation number")
    p.add_argument("--alpha", type=float, help="squeezed preset: scale factor")
    p.add_argument("--separation", type=float, help="superposition preset: center")
    p.add_argument("--grid-points", type=int, dest="grid_points")
    p.add_argument("--tolerance", type=float)
    add_common(p, "json")

    p = sub.add_parser("angular", help="angle / angular-momentum J-sweep")
    p.add_argument("--j-values", type=_float_list, dest="j_values")
    p.add_argument("--state", choices=("phase", "mixed"))
    p.add_argument("--m-sigma", type=float, dest="m_sigma")
    p.add_argument("--theta0", type=float)
    p.add_argument("--angle-model", choices=("uniform", "von_mises"), dest="angle_model")
    p.add_argument(
        "--momentum-model",
        choices=("uniform", "gaussian_moments"),
        dest="momentum_model",
    )
    p.add_argument("--grid-points", type=int, dest="grid_points")
    p.add_argument("--scale-r", type=_float_list, dest="scale_r")
    add_common(p, "csv")

    p = sub.add_parser("maxent-fit", help="fit one max-entropy model to data")
    p.add_argument(
        "--family",
        choices=("uniform", "boltzmann", "moments", "gaussian", "von_mises"),
    )
    p.add_argument("--histogram", dest="histogram_path", help="two-column CSV file")
    p.add_argument("--density", dest="density_path", help="gridded density JSON file")
    p.add_argument("--moment-modulus", type=float, dest="moment_modulus")
    p.add_argument("--moment-angle", type=float, dest="moment_angle")
    p.add_argument(
        "--moment",
        action="append",
        dest="moments",
        metavar="SPEC",
        help="moments family constraint, kind[:parameter][=target]; repeatable",
    )
    add_common(p, "json")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


SCHEMA_KEYS = {
    "verify": (
        "seed",
        "instances",
        "dims",
        "models",
        "tolerance",
        "flip_entropy_sign",
    ),
    "continuous": (
        "preset",
        "order",
        "alpha",
        "separation",
        "grid_points",
        "tolerance",
    ),
    "angular": (
        "j_values",
        "state",
        "m_sigma",
        "theta0",
        "angle_model",
        "momentum_model",
        "grid_points",
        "scale_r",
    ),
    "maxent-fit": ("family", "moment_modulus", "moment_angle"),
}


def _build_payload(args: argparse.Namespace) -> dict:
    payload: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as handle:
            loaded = json.load(handle)
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        payload.update(loaded)
    for key in SCHEMA_KEYS[args.command]:
        value = getattr(args, key, None)
        if value is not None:
            payload[key] = value
    if args.command == "maxent-fit":
        if args.histogram_path is not None:
            dist = read_histogram_csv(args.histogram_path)
            payload["histogram"] = [
                [float(x), float(p)] for x, p in zip(dist.outcomes, dist.probs)
            ]
        if args.density_path is not None:
            payload["density"] = density_to_dict(read_density_json(args.density_path))
        if args.moments:
            payload["constraints"] = [_parse_moment(spec) for spec in args.moments]
    return payload


def _client_factory(server: str) -> httpx.Client:
    return httpx.Client(base_url=server, timeout=httpx.Timeout(600.0))


def _post(server: str, path: str, payload: dict) -> dict:
    with _client_factory(server) as client:
        response = client.post(path, json=payload)
        if response.status_code == 422:
            raise UsageError(f"server rejected the config: {response.text}")
        response.raise_for_status()
        return response.json()


def _csv_document(command: str, report: dict) -> str:
    if command == "verify":
        columns = [
            "index",
            "sub_seed",
            "dim",
            "rank",
            "relation_id",
            "lhs",
            "rhs",
            "gap",
            "satisfied",
            "c",
        ]
        return canonical_csv(columns, report["rows"])
    if command == "continuous":
        columns = ["relation", "lhs", "rhs", "gap", "satisfied", "c"]
        rows = []
        for name in ("birula", "frank_lieb"):
            rep = report["reports"][name]
            rows.append({"relation": name, **{col: rep[col] for col in columns[1:]}})
        rob = report["robertson"]
        rows.append(
            {
                "relation": "robertson_strengthened",
                "lhs": rob["sigma_product"],
                "rhs": rob["strengthened_bound"],
                "gap": rob["sigma_product"] - rob["strengthened_bound"],
                "satisfied": rob["satisfied"],
                "c": "",
            }
        )
        return canonical_csv(columns, rows)
    if command == "angular":
        columns = ["J", "mode", "c", "S_rho", "lhs", "rhs", "gap", "satisfied"]
        return canonical_csv(columns, report["rows"])
    raise UsageError(f"{command} has no CSV form; use --format json")


def _fmt(value) -> str:
    if isinstance(value, (int, float)) and math.isfinite(value):
        return f"{value:.6g}"
    return str(value)


def _summary(command: str, report: dict) -> str:
    if command == "verify":
        worst = report["worst"]
        worst_text = _fmt(worst["gap"]) if worst else "n/a"
        return (
            f"verify: {report['evaluation_count']} evaluations on "
            f"{report['instance_count']} instances, "
            f"{report['violation_count']} violations, worst gap {worst_text}"
        )
    if command == "continuous":
        reports = report["reports"]
        rob = report["robertson"]
        return (
            f"continuous[{report['config']['preset']}]: "
            f"birula gap {_fmt(reports['birula']['gap'])}, "
            f"frank_lieb gap {_fmt(reports['frank_lieb']['gap'])}, "
            f"sigma product {_fmt(rob['sigma_product'])} "
            f"(floor {_fmt(rob['strengthened_bound'])})"
        )
    if command == "angular":
        return (
            f"angular: {len(report['rows'])} rows, final lhs difference "
            f"{_fmt(report['final_lhs_difference'])}, "
            f"all satisfied: {report['all_satisfied']}"
        )
    model = report["model"]
    residuals = report["diagnostics"]["constraint_residuals"]
    residual_text = _fmt(max(residuals)) if residuals else "n/a"
    return (
        f"maxent-fit[{model['family']}]: entropy {_fmt(model['entropy'])}, "
        f"max residual {residual_text}"
    )


def _emit(args: argparse.Namespace, report: dict) -> None:
    if args.format == "json":
        document = canonical_json(report)
        sidecar = None
    else:
        document = _csv_document(args.command, report)
        # the CSV is a projection; keep the full report next to it
        sidecar = canonical_json(report) if args.command == "angular" else None
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as handle:
            handle.write(document)
        print(f"wrote {args.out}", file=sys.stderr)
        if sidecar is not None:
            sidecar_path = args.out + ".json"
            with open(sidecar_path, "w", encoding="utf-8", newline="") as handle:
                handle.write(sidecar)
            print(f"wrote {sidecar_path}", file=sys.stderr)
    else:
        sys.stdout.write(document)
    print(_summary(args.command, report), file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "serve":
        import uvicorn

        from .service import create_app

        uvicorn.run(create_app(), host=args.host, port=args.port)
        return 0
    try:
        payload = _build_payload(args)
        request = REQUEST_TYPES[args.command].model_validate(payload)
        if args.server:
            report = _post(
                args.server, ENDPOINTS[args.command], request.model_dump(mode="json")
            )
        else:
            report = RUNNERS[args.command](request)
        _emit(args, report)
    except pydantic.ValidationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except httpx.HTTPError as exc:
        print(f"server error: {exc}", file=sys.stderr)
        return 2
    return 0 if report.get("all_satisfied", True) else 1


if __name__ == "__main__":
    sys.exit(main())
