"""Command-line front end: ``fedosov-star --config job.json``.

A job file is a JSON object with exactly the fields ``n``, ``hpower``,
``gamma``, ``A`` and ``B``::

    {"n": 1, "hpower": 5,
     "gamma": [{"i": 1, "j": 1, "k": 1, "expr": "-x[2]"}],
     "A": "x[2]", "B": "w(x[1],x[2])"}

Connection components not listed are zero.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from .pipeline import ConnectionData, FedosovStar, StarResult
from .scalar import ParseError, ScalarCoeff, parse_expr, render_expr

CONFIG_FIELDS = ("n", "hpower", "gamma", "A", "B")
GAMMA_FIELDS = ("i", "j", "k", "expr")


class ConfigError(ValueError):
    pass


@dataclass
class JobConfig:
    n: int
    hpower: int
    A: str
    B: str
    gamma: list = field(default_factory=list)  # dicts with i, j, k, expr
    print_intermediate: bool = False
    output: str = "human"

    def connection(self) -> ConnectionData:
        coeffs = {}
        for entry in self.gamma:
            coeffs[(entry["i"], entry["j"], entry["k"])] = parse_expr(entry["expr"], self.n)
        return ConnectionData(self.n, coeffs)

    def functions(self) -> tuple[ScalarCoeff, ScalarCoeff]:
        return parse_expr(self.A, self.n), parse_expr(self.B, self.n)


def _positive_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(f"field {name!r} must be a positive integer, got {value!r}")
    return value


def validate_config(data) -> JobConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(data) - set(CONFIG_FIELDS))
    if unknown:
        raise ConfigError(f"unknown config field(s): {', '.join(unknown)}")
    for name in ("n", "hpower", "A", "B"):
        if name not in data:
            raise ConfigError(f"missing config field {name!r}")
    n = _positive_int(data["n"], "n")
    hpower = _positive_int(data["hpower"], "hpower")

    gamma = data.get("gamma", [])
    if not isinstance(gamma, list):
        raise ConfigError("field 'gamma' must be a list")
    seen = set()
    for pos, entry in enumerate(gamma):
        where = f"gamma[{pos}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"{where} must be an object")
        extra = sorted(set(entry) - set(GAMMA_FIELDS))
        missing = [f for f in GAMMA_FIELDS if f not in entry]
        if extra or missing:
            raise ConfigError(f"{where} must have exactly the fields i, j, k, expr")
        triple = tuple(_positive_int(entry[f], f"{where}.{f}") for f in "ijk")
        if not triple[0] <= triple[1] <= triple[2] <= 2 * n:
            raise ConfigError(f"{where}: indices must satisfy 1 <= i <= j <= k <= {2 * n}, got {triple}")
        if triple in seen:
            raise ConfigError(f"{where}: duplicate triple {triple}")
        seen.add(triple)
        if not isinstance(entry["expr"], str):
            raise ConfigError(f"{where}.expr must be a string")
        try:
            parse_expr(entry["expr"], n)
        except ParseError as exc:
            raise ConfigError(f"{where}.expr: {exc}") from exc

    for name in ("A", "B"):
        if not isinstance(data[name], str):
            raise ConfigError(f"field {name!r} must be a string")
        try:
            parse_expr(data[name], n)
        except ParseError as exc:
            raise ConfigError(f"field {name!r}: {exc}") from exc

    return JobConfig(n=n, hpower=hpower, A=data["A"], B=data["B"], gamma=list(gamma))


def load_config(path) -> JobConfig:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return validate_config(data)


def _series_lines(result: StarResult, style: str) -> list[str]:
    lines = []
    for k, c in enumerate(result.by_hpower):
        if c:
            lines.append(f"  h^{k}: {render_expr(c, style)}")
    return lines or ["  0"]


def _lift_text(lift, style: str) -> str:
    return lift.total().render(style)


def render_human(cfg: JobConfig, result: StarResult) -> str:
    out = []
    if cfg.print_intermediate and result.intermediates:
        inter = result.intermediates
        out.append(f"Gamma = {inter['gamma'].render('human')}")
        out.append(f"R_Gamma = {inter['curvature'].render('human')}")
        out.append(f"Gamma + r = {inter['gamma_plus_r'].render('human')}")
        out.append(f"sigma^-1(A) = {_lift_text(inter['lift_A'], 'human')}")
        out.append(f"sigma^-1(B) = {_lift_text(inter['lift_B'], 'human')}")
    out.append("A * B =")
    out.extend(_series_lines(result, "human"))
    return "\n".join(out) + "\n"


def render_machine(cfg: JobConfig, result: StarResult) -> str:
    doc = {
        "n": cfg.n,
        "hpower": cfg.hpower,
        "A": cfg.A,
        "B": cfg.B,
        "star": [
            {"h": k, "coefficient": render_expr(c, "machine")}
            for k, c in enumerate(result.by_hpower)
        ],
    }
    if cfg.print_intermediate and result.intermediates:
        inter = result.intermediates
        doc["intermediates"] = {
            "gamma": inter["gamma"].render(),
            "curvature": inter["curvature"].render(),
            "gamma_plus_r": inter["gamma_plus_r"].render(),
            "r": {str(z): f.render() for z, f in sorted(inter["r"].items())},
            "lift_A": _lift_text(inter["lift_A"], "machine"),
            "lift_B": _lift_text(inter["lift_B"], "machine"),
        }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def parse_machine_output(text: str) -> list[ScalarCoeff]:
    """Read the star coefficients back from a machine-style report."""
    doc = json.loads(text)
    n = doc["n"]
    records = sorted(doc["star"], key=lambda rec: rec["h"])
    return [parse_expr(rec["coefficient"], n) for rec in records]


def run_job(cfg: JobConfig) -> tuple[StarResult, str]:
    t0 = time.perf_counter()
    engine = FedosovStar(cfg.connection(), cfg.hpower)
    a0, b0 = cfg.functions()
    result = engine.star(a0, b0, keep_intermediates=cfg.print_intermediate)
    result.timings["total"] = time.perf_counter() - t0
    if cfg.output == "json":
        return result, render_machine(cfg, result)
    return result, render_human(cfg, result)


def timing_report(timings: dict) -> str:
    order = ("connection", "curvature", "abelian", "lift_A", "lift_B", "projection", "total")
    return "\n".join(f"{name:>10}: {timings[name]:.4f} s" for name in order if name in timings) + "\n"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fedosov-star",
        description="Fedosov star product of two functions in Darboux coordinates",
    )
    parser.add_argument("--config", required=True, help="JSON job file")
    parser.add_argument("--hpower", type=int, help="override the highest power of h")
    parser.add_argument("--output", choices=("human", "json"), default="human")
    parser.add_argument("--print-intermediate", action="store_true",
                        help="also print Gamma, R_Gamma, Gamma + r and both flat sections")
    parser.add_argument("--timing", action="store_true", help="print per-stage wall-clock times to stderr")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if args.hpower is not None:
            cfg.hpower = _positive_int(args.hpower, "--hpower")
        cfg.output = args.output
        cfg.print_intermediate = args.print_intermediate
        result, report = run_job(cfg)
    except (OSError, ConfigError, ParseError) as exc:
        print(f"fedosov-star: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pipeline failure
        print(f"fedosov-star: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1

    sys.stdout.write(report)
    if args.timing:
        sys.stderr.write(timing_report(result.timings))
    return 0


if __name__ == "__main__":
    sys.exit(main())
