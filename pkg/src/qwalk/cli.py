"""Command line front end.

Exit codes: 0 success, 2 usage or validation error, 3 numerical
non-convergence, 4 cost guard.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import criteria, firstreturn, fourier, kac, monitored, walkmodel
from .errors import QWalkError, ValidationError
from .walkmodel import BALANCED, DOWN, E11, E22, UP

NAMED_STATES = {
    "up": UP,
    "down": DOWN,
    "balanced": BALANCED,
    "E11": E11,
    "E22": E22,
}


@dataclass
class RunConfig:
    command: str
    preset: Optional[str] = None
    params: dict = field(default_factory=dict)
    L: Optional[np.ndarray] = None
    R: Optional[np.ndarray] = None
    state: str = "down"
    horizon: int = 1
    output: Optional[str] = None
    seed: int = 0
    fmt: str = "csv"

    def __post_init__(self):
        if (self.preset is None) == (self.L is None and self.R is None):
            raise ValidationError("give exactly one of --preset or inline --L/--R")
        if self.preset is None and (self.L is None or self.R is None):
            raise ValidationError("inline coins need both --L and --R")
        if self.horizon < 1 and self.command not in ("distribution",):
            raise ValidationError("horizon must be >= 1")

    def coin(self) -> walkmodel.CoinPair:
        if self.preset is not None:
            return walkmodel.preset(self.preset, **self.params)
        return walkmodel.validate_coin_pair(self.L, self.R)

    def initial_state(self) -> np.ndarray:
        return parse_state(self.state)


def parse_complex_matrix(text: str) -> np.ndarray:
    try:
        rows = json.loads(text)
        return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)
    except (ValueError, TypeError) as exc:
        raise ValidationError(f"cannot parse matrix {text!r}: expected [[[re, im], ...], ...]") from exc


def parse_state(text: str) -> np.ndarray:
    if text in NAMED_STATES:
        return NAMED_STATES[text].copy()
    try:
        obj = json.loads(text)
    except ValueError:
        raise ValidationError(
            f"unknown state {text!r}; use {sorted(NAMED_STATES)} or JSON [re, im] pairs"
        ) from None
    a = np.asarray(obj, dtype=float)
    if a.shape == (2, 2):
        v = a[:, 0] + 1j * a[:, 1]
        return v / np.linalg.norm(v)
    if a.shape == (2, 2, 2):
        return a[..., 0] + 1j * a[..., 1]
    raise ValidationError("explicit states are a spinor [[re, im], [re, im]] or a 2x2 density")


def fmt_value(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def to_jsonable(x):
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return to_jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def render_rows(rows: list[dict], fmt: str, columns: Optional[list[str]] = None) -> str:
    if fmt == "json":
        return json.dumps(to_jsonable(rows), indent=2) + "\n"
    columns = columns or (list(rows[0]) if rows else [])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt_value(row.get(c)) for c in columns])
    return buf.getvalue()


def render_object(obj: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(to_jsonable(obj), indent=2) + "\n"
    flat = {}

    def walk(prefix, v):
        if isinstance(v, dict):
            for k, w in v.items():
                walk(f"{prefix}.{k}" if prefix else str(k), w)
        else:
            flat[prefix] = v

    walk("", to_jsonable(obj))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["field", "value"])
    for k, v in flat.items():
        writer.writerow([k, json.dumps(v) if isinstance(v, list) else fmt_value(v)])
    return buf.getvalue()


def emit(text: str, output: Optional[str]) -> None:
    if output:
        with open(output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- commands ----------------------------------------------------------------


def cmd_first_return(cfg: RunConfig, args) -> str:
    coin = cfg.coin()
    state = cfg.initial_state()
    if args.compare == "uqw" and (state.shape != (2,) or not coin.walk_unitary):
        raise ValidationError("--compare uqw needs a spinor state and L + R unitary")
    use_state = state if args.compare == "uqw" else walkmodel.as_density(state)
    if args.exact:
        table = firstreturn.cumulative_return(coin, use_state, args.max_steps // 2)
    else:
        table = monitored.monitored_table(coin, use_state, args.max_steps)
    columns = ["steps", "oqw_term", "uqw_term", "interference", "oqw_cumulative", "uqw_cumulative"]
    return render_rows(table.rows(), cfg.fmt, columns)


def cmd_distribution(cfg: RunConfig, args) -> str:
    coin = cfg.coin()
    state = cfg.initial_state()
    n = args.time
    walks = ["oqw", "uqw"] if args.walk == "both" else [args.walk]
    if "uqw" in walks and state.shape != (2,):
        raise ValidationError("the unitary walk needs a spinor state")
    dists = {w: walkmodel.site_distribution(state, n, coin, walk=w) for w in walks}
    sites = sorted(next(iter(dists.values())))
    if len(walks) == 1:
        rows = [{"site": s, "probability": dists[walks[0]][s]} for s in sites]
    else:
        rows = [
            {"site": s, "oqw_probability": dists["oqw"][s], "uqw_probability": dists["uqw"][s]}
            for s in sites
        ]
    return render_rows(rows, cfg.fmt)


def cmd_monitored(cfg: RunConfig, args) -> str:
    coin = cfg.coin()
    state = cfg.initial_state()
    n = cfg.horizon
    if args.kind == "uqw":
        series = monitored.uqw_monitored_series(coin, state, n)
    elif args.kind == "oqw":
        series = monitored.oqw_monitored_series(coin, state, n)
    else:
        series = monitored.unmonitored_p0_series(coin, walkmodel.as_density(state), n)
    rows = monitored.series_rows(series)
    if cfg.fmt == "json":
        return render_object({"summary": monitored.series_summary(series), "rows": rows}, "json")
    return render_rows(rows, "csv", ["n", "term", "cumulative", "survival"])


def cmd_fourier(cfg: RunConfig, args) -> str:
    coin = cfg.coin()
    if args.series:
        rho = walkmodel.as_density(cfg.initial_state())
        methods = ["quadrature", "dual", "lattice"] if args.method == "all" else [args.method]
        lattice = monitored.unmonitored_p0_series(coin, rho, max(args.max_n, 1))
        rows = []
        for n in range(0, args.max_n + 1):
            for method in methods:
                if method == "quadrature":
                    p = fourier.p0_by_quadrature(coin, rho, n)
                elif method == "dual":
                    p = fourier.konno_dual_p0(coin, rho, n)
                else:
                    p = 1.0 if n == 0 else lattice.term(n)
                rows.append({"n": n, "p0": p, "method": method})
        return render_rows(rows, cfg.fmt, ["n", "p0", "method"])
    if args.curve == "spectrum":
        return render_rows(fourier.spectral_curves(coin, args.grid).rows(), cfg.fmt)
    if coin.name != "sec7":
        raise ValidationError(f"--curve {args.curve} is the closed form of the sec7 preset")
    if args.curve == "lambda1":
        k = fourier.grid(args.grid)
        lam = fourier.sec7_lambda1(k)
        rows = [{"k": float(a), "lambda1": float(b)} for a, b in zip(k, lam)]
        return render_rows(rows, cfg.fmt)
    return render_rows(fourier.power_comparison_rows(args.grid, args.power), cfg.fmt)


def cmd_criteria(cfg: RunConfig, args) -> str:
    coin = cfg.coin()
    return render_object(criteria.verdict_json(coin), cfg.fmt)


def build_site_walk(args) -> kac.SiteWalkSpec:
    if args.spec:
        with open(args.spec) as fh:
            return kac.site_walk_from_json(fh.read())
    if args.preset == "barrier":
        return kac.barrier_walk(args.p11, args.p22, m=args.M, variant=args.variant)
    if args.preset == "swap":
        return kac.two_site_swap()
    raise ValidationError("kac needs --preset barrier|swap or --spec FILE")


def cmd_kac(args) -> str:
    spec = build_site_walk(args)
    rho = parse_state(args.state) if spec.dim == 2 else np.eye(spec.dim, dtype=complex)
    if rho.shape == (2,):
        rho = walkmodel.as_density(rho)
    report = kac.kac_identity_check(spec, rho, args.x, args.horizon)
    return render_object(report.to_json(), args.format)


def cmd_trajectory(cfg: RunConfig, args) -> str:
    coin = cfg.coin()
    rho = walkmodel.as_density(cfg.initial_state())
    if args.batch:
        times = walkmodel.first_return_times(coin, rho, cfg.horizon, args.batch, seed=cfg.seed)
        returned = times > 0
        counts = {int(t): int(np.sum(times == t)) for t in np.unique(times[returned])}
        obj = {
            "seed": cfg.seed,
            "trajectories": args.batch,
            "horizon": cfg.horizon,
            "first_return_frequency": float(returned.mean()),
            "first_return_counts": counts,
        }
        return render_object(obj, cfg.fmt)
    sample = walkmodel.sample_trajectory(coin, rho, 0, cfg.horizon, cfg.seed)
    rows = [
        {
            "step": t,
            "site": int(sample.positions[t]),
            "rho11": sample.densities[t, 0, 0].real,
            "rho12_re": sample.densities[t, 0, 1].real,
            "rho12_im": sample.densities[t, 0, 1].imag,
            "rho22": sample.densities[t, 1, 1].real,
        }
        for t in range(sample.horizon + 1)
    ]
    return render_rows(rows, cfg.fmt)


# -- argument parsing --------------------------------------------------------


def _add_coin_args(p: argparse.ArgumentParser, default_state: str = "down") -> None:
    p.add_argument("--preset", help="hadamard, bitflip, sec7, diag-trichotomy")
    p.add_argument("--p", type=float, default=None, help="bit-flip parameter")
    p.add_argument("--L", help="inline L as JSON [[[re, im], ...], ...]")
    p.add_argument("--R", help="inline R as JSON [[[re, im], ...], ...]")
    p.add_argument("--state", default=default_state, help="up, down, balanced, E11, E22 or JSON")


def _add_output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output", "-o", help="output file (default stdout)")
    p.add_argument("--format", choices=["csv", "json"], default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qwalk", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file whose keys mirror the command line flags")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("first-return", help="first-return table (monitored or exact path sums)")
    _add_coin_args(p)
    _add_output_args(p)
    p.add_argument("--max-steps", type=int, default=16)
    p.add_argument("--compare", choices=["oqw", "uqw"], default="oqw")
    p.add_argument("--exact", action="store_true", help="use exhaustive path enumeration")

    p = sub.add_parser("distribution", help="site distribution after n steps")
    _add_coin_args(p)
    _add_output_args(p)
    p.add_argument("--time", type=int, default=12)
    p.add_argument("--walk", choices=["both", "oqw", "uqw"], default="both")

    p = sub.add_parser("monitored", help="monitored or unmonitored return series")
    _add_coin_args(p)
    _add_output_args(p)
    p.add_argument("--kind", choices=["oqw", "uqw", "p0"], default="oqw")
    p.add_argument("--horizon", type=int, default=100)

    p = sub.add_parser("fourier", help="symbol spectra, closed-form curves and p0 series")
    _add_coin_args(p, default_state="E11")
    _add_output_args(p)
    p.add_argument("--curve", choices=["lambda1", "spectrum", "powers"], default="spectrum")
    p.add_argument("--grid", type=int, default=512)
    p.add_argument("--power", type=int, default=100)
    p.add_argument("--series", action="store_true", help="emit p0(n) instead of curves")
    p.add_argument("--method", choices=["quadrature", "dual", "lattice", "all"], default="all")
    p.add_argument("--max-n", type=int, default=14)

    p = sub.add_parser("criteria", help="closed-form recurrence verdict")
    _add_coin_args(p)
    _add_output_args(p)

    p = sub.add_parser("kac", help="expected return time and the Kac identity on a finite walk")
    p.add_argument("--preset", default="barrier", help="barrier or swap")
    p.add_argument("--spec", help="site walk JSON file")
    p.add_argument("--p11", type=float, default=1 / 3)
    p.add_argument("--p22", type=float, default=None)
    p.add_argument("--M", type=int, default=60)
    p.add_argument("--variant", choices=["retaining", "literal"], default="retaining")
    p.add_argument("--x", type=int, default=0)
    p.add_argument("--horizon", type=int, default=4000)
    p.add_argument("--state", default="E11")
    _add_output_args(p)

    p = sub.add_parser("trajectory", help="quantum trajectory sampling")
    _add_coin_args(p, default_state="down")
    _add_output_args(p)
    p.add_argument("--horizon", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--batch", type=int, default=0, help="sample this many trajectories")
    return parser


def _config_tokens(path: str) -> list[str]:
    with open(path) as fh:
        obj = json.load(fh)
    tokens = [str(obj.pop("command"))] if "command" in obj else []
    for key, value in obj.items():
        flag = "--" + key.replace("_", "-") if len(key) > 1 else "--" + key
        if key in ("L", "R", "M", "p", "x"):
            flag = "--" + key
        if value is True:
            tokens.append(flag)
        elif value is False or value is None:
            continue
        elif isinstance(value, (list, dict)):
            tokens += [flag, json.dumps(value)]
        else:
            tokens += [flag, str(value)]
    return tokens


def _expand_config(argv: list[str]) -> list[str]:
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        return argv
    path = argv[i + 1]
    rest = argv[:i] + argv[i + 2:]
    tokens = _config_tokens(path)
    # command-line flags after the config's own override them
    if tokens and rest and not rest[0].startswith("-"):
        return [rest[0]] + tokens[1:] + rest[1:]
    return tokens + rest


def _run_config(args, command: str) -> RunConfig:
    if args.preset is not None and not args.preset.strip():
        raise SystemExit(_usage_error(f"{command}: --preset must not be empty"))
    params = {}
    if args.p is not None:
        if args.preset != "bitflip":
            raise ValidationError("--p only applies to the bitflip preset")
        params["p"] = args.p
    L = parse_complex_matrix(args.L) if args.L else None
    R = parse_complex_matrix(args.R) if args.R else None
    preset = args.preset
    if preset is None and L is None and R is None:
        raise ValidationError("give --preset or inline --L/--R")
    return RunConfig(
        command=command,
        preset=preset,
        params=params,
        L=L,
        R=R,
        state=args.state,
        horizon=getattr(args, "horizon", 1),
        output=args.output,
        seed=getattr(args, "seed", 0),
        fmt=args.format or ("json" if command == "criteria" else "csv"),
    )


def _usage_error(message: str) -> int:
    sys.stderr.write(f"qwalk: error: {message}\n")
    return 2


def main(argv: Optional[list[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _expand_config(argv)
    except (OSError, ValueError) as exc:
        return _usage_error(f"cannot read config: {exc}")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "kac":
            args.format = args.format or "json"
            if args.horizon < 1:
                raise ValidationError("horizon must be >= 1")
            emit(cmd_kac(args), args.output)
            return 0
        cfg = _run_config(args, args.command)
        handler = {
            "first-return": cmd_first_return,
            "distribution": cmd_distribution,
            "monitored": cmd_monitored,
            "fourier": cmd_fourier,
            "criteria": cmd_criteria,
            "trajectory": cmd_trajectory,
        }[args.command]
        emit(handler(cfg, args), cfg.output)
        return 0
    except SystemExit as exc:
        return int(exc.code or 0)
    except QWalkError as exc:
        sys.stderr.write(f"qwalk: {type(exc).__name__}: {exc}\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
