"""Command-line interface: ``python -m roughheston <command> [options]``.

Settings come from an optional INI file (``--config``) and are overridden by
flags. Every emitted table starts with ``#`` header lines echoing the full run
configuration, so identical inputs give byte-identical outputs.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from .charfn import cf
from .hawkes import (
    HawkesMicroConfig,
    integrated_baseline,
    monte_carlo_summary,
    simulate_cluster_hawkes,
)
from .heston_classical import heston_cf
from .hawkes import HawkesCfConvergenceError
from .pricing import (
    ImpliedVolError,
    PricingError,
    QuadratureSettings,
    atm_skew_curve,
    lewis_call_prices,
    implied_vol,
    rough_cf_provider,
    write_quotes_csv,
    write_skew_csv,
    OptionQuote,
)
from .riccati import RiccatiDivergenceError, RoughHestonParams
from .special_functions import MittagLefflerConvergenceError
from .validation import Tolerances, run_all

DEFAULTS = {
    "model": {"alpha": "0.6", "lambda": "2.0", "theta": "0.04", "rho": "-0.5", "nu": "0.05", "v0": "0.4"},
    "numerics": {"steps": "1000", "eps_k": "0.001", "abs_tol": "1e-10", "tail_tol": "1e-11"},
    "cf": {"a": "-5, -2, -1, -0.5, 0, 0.5, 1, 2, 5", "t": "0.5, 1"},
    "price": {"spot": "1.0", "strikes": "0.8, 0.9, 1.0, 1.1, 1.2", "maturity": "1.0"},
    "smile": {"maturities": "0.25, 1.0"},
    "skew": {"maturities": "0.025, 0.05, 0.1, 0.25, 0.5, 1.0", "alphas": "1.0, 0.6"},
    "hawkes": {
        "horizons": "25, 50, 100",
        "alpha": "0.6",
        "lambda": "2.0",
        "mu": "1.0",
        "beta": "1.0",
        "xi": "1.0",
        "theta": "1.0",
        "paths": "10000",
        "seed": "20240611",
        "a": "0.5, 1.0",
        "event_paths": "0",
    },
}


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]


@dataclass(frozen=True)
class RunConfig:
    params: RoughHestonParams
    n_steps: int
    eps_k: float
    quadrature: QuadratureSettings
    hawkes: HawkesMicroConfig
    horizons: tuple
    n_paths: int
    seed: int
    hawkes_a: tuple
    event_paths: int
    cf_a: tuple
    cf_t: tuple
    spot: float
    strikes: tuple
    maturity: float
    smile_maturities: tuple
    skew_maturities: tuple
    skew_alphas: tuple
    out: Path | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("eps_k",):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        if self.quadrature.abs_tol <= 0.0 or self.quadrature.tail_tol <= 0.0:
            raise ValueError("quadrature tolerances must be positive")
        if self.n_steps < 10:
            raise ValueError("steps must be at least 10")
        if self.out is not None:
            self.out.mkdir(parents=True, exist_ok=True)

    def metadata(self, command: str) -> dict:
        meta = {"program": f"roughheston {__version__}", "command": command, "adams_backend": _kernels.backend()}
        meta.update({f"model.{k}": v for k, v in asdict(self.params).items() if k != "outside_theorem_range"})
        meta.update({"numerics.steps": self.n_steps, "numerics.eps_k": self.eps_k})
        meta.update({f"quadrature.{k}": v for k, v in asdict(self.quadrature).items()})
        meta.update({f"hawkes.{k}": v for k, v in asdict(self.hawkes).items()})
        meta.update({
            "hawkes.horizons": list(self.horizons), "hawkes.paths": self.n_paths, "hawkes.seed": self.seed,
            "hawkes.a": list(self.hawkes_a),
            "cf.a": list(self.cf_a), "cf.t": list(self.cf_t),
            "price.spot": self.spot, "price.strikes": list(self.strikes), "price.maturity": self.maturity,
            "smile.maturities": list(self.smile_maturities),
            "skew.maturities": list(self.skew_maturities), "skew.alphas": list(self.skew_alphas),
        })
        meta.update(self.extra)
        return meta


def load_config(args: argparse.Namespace) -> RunConfig:
    ini = configparser.ConfigParser()
    ini.read_dict(DEFAULTS)
    if args.config:
        if not ini.read(args.config):
            raise FileNotFoundError(f"config file {args.config} not found")
    m, n, h = ini["model"], ini["numerics"], ini["hawkes"]
    # alpha, lambda and theta mean the same thing in both models; for the hawkes
    # command they set the microstructure section, elsewhere the rough Heston one
    target = h if getattr(args, "command", None) == "hawkes" else m
    for flag, key in (("alpha", "alpha"), ("lam", "lambda"), ("theta", "theta")):
        value = getattr(args, flag)
        if value is not None:
            target[key] = repr(value)
    for flag in ("rho", "nu", "v0"):
        if getattr(args, flag) is not None:
            m[flag] = repr(getattr(args, flag))
    if args.steps is not None:
        n["steps"] = str(args.steps)
    if args.seed is not None:
        h["seed"] = str(args.seed)
    if args.paths is not None:
        h["paths"] = str(args.paths)
    for flag in ("xi", "beta", "mu"):
        if getattr(args, flag, None) is not None:
            h[flag] = repr(getattr(args, flag))
    if getattr(args, "horizons", None):
        h["horizons"] = args.horizons

    params = RoughHestonParams(
        lam=m.getfloat("lambda"), theta=m.getfloat("theta"), rho=m.getfloat("rho"),
        nu=m.getfloat("nu"), v0=m.getfloat("v0"), alpha=m.getfloat("alpha"),
    )
    horizons = tuple(_floats(h["horizons"]))
    hawkes = HawkesMicroConfig(
        horizon_T=horizons[0], alpha=h.getfloat("alpha"), lam=h.getfloat("lambda"), mu=h.getfloat("mu"),
        beta=h.getfloat("beta"), xi=h.getfloat("xi"), theta=h.getfloat("theta"),
    )
    quad = replace(QuadratureSettings(), abs_tol=n.getfloat("abs_tol"), tail_tol=n.getfloat("tail_tol"))
    cfg = RunConfig(
        params=params,
        n_steps=n.getint("steps"),
        eps_k=n.getfloat("eps_k"),
        quadrature=quad,
        hawkes=hawkes,
        horizons=horizons,
        n_paths=h.getint("paths"),
        seed=h.getint("seed"),
        hawkes_a=tuple(_floats(h["a"])),
        event_paths=h.getint("event_paths"),
        cf_a=tuple(_floats(args.a if getattr(args, "a", None) else ini["cf"]["a"])),
        cf_t=tuple(_floats(args.t if getattr(args, "t", None) else ini["cf"]["t"])),
        spot=ini["price"].getfloat("spot"),
        strikes=tuple(_floats(args.strikes if getattr(args, "strikes", None) else ini["price"]["strikes"])),
        maturity=args.maturity if getattr(args, "maturity", None) is not None else ini["price"].getfloat("maturity"),
        smile_maturities=tuple(_floats(ini["smile"]["maturities"])),
        skew_maturities=tuple(_floats(args.maturities if getattr(args, "maturities", None) else ini["skew"]["maturities"])),
        skew_alphas=tuple(_floats(ini["skew"]["alphas"])),
        out=Path(args.out) if args.out else None,
    )
    if getattr(args, "command", None) == "smile" and getattr(args, "maturities", None):
        cfg = replace(cfg, smile_maturities=tuple(_floats(args.maturities)))
    return cfg


# ------------------------------------------------------------------ output helpers


def _header(meta: dict) -> str:
    return "".join(f"# {k} = {v}\n" for k, v in meta.items())


def _emit(cfg: RunConfig, name: str, text: str) -> None:
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        path = cfg.out / name
        path.write_text(text)
        print(f"wrote {path}")


def _csv_table(meta: dict, columns: list[str], rows) -> str:
    body = ",".join(columns) + "\n"
    body += "".join(",".join(repr(float(x)) for x in row) + "\n" for row in rows)
    return _header(meta) + body


# ------------------------------------------------------------------ commands


def cmd_cf(cfg: RunConfig, oracle: str = "rough") -> int:
    rows = []
    a = np.array(cfg.cf_a, dtype=float)
    for t in cfg.cf_t:
        if oracle == "heston":
            values = np.asarray(heston_cf(cfg.params.replace(alpha=1.0), a, t))
        else:
            values = np.atleast_1d(cf(cfg.params, a, t, cfg.n_steps))
        rows.extend((ai, t, v.real, v.imag) for ai, v in zip(a, values))
    meta = cfg.metadata("cf") | {"cf.oracle": oracle}
    _emit(cfg, "cf.csv", _csv_table(meta, ["a", "t", "re_cf", "im_cf"], rows))
    return 0


def _quotes(cfg: RunConfig, maturities) -> list[OptionQuote]:
    out = []
    for t in maturities:
        prices = lewis_call_prices(rough_cf_provider(cfg.params, t, cfg.n_steps), cfg.spot, cfg.strikes, t, cfg.quadrature)
        for k, c in zip(cfg.strikes, prices):
            try:
                vol = implied_vol(float(c), cfg.spot, k, t)
            except ImpliedVolError:
                vol = float("nan")
            out.append(OptionQuote(float(k), float(t), float(c), vol))
    return out


def _write_quotes(cfg: RunConfig, command: str, quotes) -> None:
    if cfg.out is None:
        import io

        buf = io.StringIO()
        buf.write(_header(cfg.metadata(command)))
        buf.write("maturity,strike,price,implied_vol\n")
        for q in quotes:
            buf.write(f"{q.maturity!r},{q.strike!r},{q.call_price!r},{q.implied_vol!r}\n")
        sys.stdout.write(buf.getvalue())
    else:
        path = cfg.out / f"{command}.csv"
        write_quotes_csv(path, quotes, cfg.metadata(command))
        print(f"wrote {path}")


def cmd_price(cfg: RunConfig) -> int:
    _write_quotes(cfg, "price", _quotes(cfg, [cfg.maturity]))
    return 0


def cmd_smile(cfg: RunConfig) -> int:
    _write_quotes(cfg, "smile", _quotes(cfg, cfg.smile_maturities))
    return 0


def cmd_skew(cfg: RunConfig) -> int:
    columns = {}
    for alpha in cfg.skew_alphas:
        p = cfg.params.replace(alpha=alpha)
        columns[f"alpha={alpha!r}"] = atm_skew_curve(p, cfg.skew_maturities, cfg.eps_k, cfg.spot, cfg.n_steps, cfg.quadrature)
    meta = cfg.metadata("skew")
    if cfg.out is None:
        labels = list(columns)
        rows = [[t] + [columns[lab][i].atm_skew for lab in labels] for i, t in enumerate(cfg.skew_maturities)]
        sys.stdout.write(_csv_table(meta, ["maturity"] + [f"atm_skew_{lab}" for lab in labels], rows))
    else:
        path = cfg.out / "skew.csv"
        write_skew_csv(path, columns, meta)
        print(f"wrote {path}")
    return 0


def cmd_hawkes(cfg: RunConfig) -> int:
    base = cfg.hawkes
    targets = [cf(base.rough_params(), a, 1.0, cfg.n_steps) for a in cfg.hawkes_a]
    runs = []
    for T in cfg.horizons:
        hc = base.replace(horizon_T=T)
        summary = monte_carlo_summary(hc, cfg.n_paths, cfg.seed, cfg.hawkes_a, targets)
        migrants = integrated_baseline(hc, T)
        summary["expected_migrants_per_type"] = migrants
        summary["mean_count_upper_bound"] = T**hc.alpha / hc.lam * migrants
        runs.append(summary)
        for i in range(cfg.event_paths):
            seed = np.random.SeedSequence(cfg.seed).spawn(i + 1)[i]
            stream = simulate_cluster_hawkes(hc, 1.0, seed)
            if cfg.out is not None:
                stream.to_csv(cfg.out / f"events_T{T:g}_path{i}.csv", cfg.metadata("hawkes") | {"path": i, "T": T})
    report = {
        "metadata": cfg.metadata("hawkes"),
        "rough_heston_limit": {k: v for k, v in asdict(base.rough_params()).items() if k != "outside_theorem_range"},
        "targets": [{"a": a, "re": t.real, "im": t.imag} for a, t in zip(cfg.hawkes_a, targets)],
        "runs": runs,
    }
    _emit(cfg, "hawkes.json", json.dumps(report, indent=2, sort_keys=True, default=_json_default) + "\n")
    return 0


def cmd_validate(cfg: RunConfig, overrides: dict, only) -> int:
    tol = Tolerances().override(**overrides)
    lines = [f"# {k} = {v}" for k, v in cfg.metadata("validate").items() if k.startswith(("program", "command", "adams"))]
    for k, v in asdict(tol).items():
        tag = " (override)" if k in overrides else ""
        lines.append(f"# tolerance.{k} = {v!r}{tag}")
    print("\n".join(lines), flush=True)
    results = []
    for res in run_all(tol, only):
        print(res.line(), flush=True)
        results.append(res)
    failed = [r.number for r in results if not r.passed]
    print(f"summary: {len(results) - len(failed)}/{len(results)} criteria passed")
    if cfg.out is not None:
        report = {
            "tolerances": asdict(tol),
            "overrides": overrides,
            "results": [r.as_dict() for r in results],
        }
        path = cfg.out / "validate.json"
        path.write_text(json.dumps(report, indent=2, sort_keys=True, default=_json_default) + "\n")
        print(f"wrote {path}")
    return 1 if failed else 0


def _json_default(x):
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    raise TypeError(type(x).__name__)


# ------------------------------------------------------------------ parser


def _parse_tol(items) -> dict:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"--tol expects KEY=VALUE, got {item!r}")
        out[key.strip()] = float(value)
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI file with [model], [numerics], [hawkes], ... sections")
    common.add_argument("--alpha", type=float)
    common.add_argument("--lambda", dest="lam", type=float)
    common.add_argument("--theta", type=float)
    common.add_argument("--rho", type=float)
    common.add_argument("--nu", type=float)
    common.add_argument("--v0", type=float)
    common.add_argument("--steps", type=int, help="Adams steps per maturity")
    common.add_argument("--seed", type=int)
    common.add_argument("--paths", type=int)
    common.add_argument("--out", metavar="DIR", help="write files here instead of stdout")

    parser = argparse.ArgumentParser(prog="roughheston", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cf", parents=[common], help="characteristic function table")
    p.add_argument("--a", help="comma-separated Fourier arguments")
    p.add_argument("--t", help="comma-separated maturities")
    p.add_argument("--oracle", choices=["rough", "heston"], default="rough",
                   help="'heston' uses the alpha=1 closed form instead of the Adams solver")

    p = sub.add_parser("price", parents=[common], help="Lewis call prices and implied vols")
    p.add_argument("--strikes")
    p.add_argument("--maturity", type=float)

    p = sub.add_parser("smile", parents=[common], help="prices and implied vols on a maturity x strike grid")
    p.add_argument("--strikes")
    p.add_argument("--maturities")

    p = sub.add_parser("skew", parents=[common], help="ATM skew term structure for each configured alpha")
    p.add_argument("--maturities")

    p = sub.add_parser("hawkes", parents=[common], help="Hawkes Monte Carlo vs rough Heston CF")
    p.add_argument("--horizons", help="comma-separated values of T")
    p.add_argument("--xi", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--mu", type=float)

    p = sub.add_parser("validate", parents=[common], help="run the acceptance suite")
    p.add_argument("--tol", action="append", metavar="KEY=VALUE", help="override a tolerance (repeatable)")
    p.add_argument("--only", help="comma-separated criterion numbers")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        if args.command == "cf":
            return cmd_cf(cfg, args.oracle)
        if args.command == "price":
            return cmd_price(cfg)
        if args.command == "smile":
            return cmd_smile(cfg)
        if args.command == "skew":
            return cmd_skew(cfg)
        if args.command == "hawkes":
            return cmd_hawkes(cfg)
        only = {int(x) for x in args.only.split(",")} if args.only else None
        return cmd_validate(cfg, _parse_tol(args.tol), only)
    except (
        RiccatiDivergenceError,
        PricingError,
        ImpliedVolError,
        MittagLefflerConvergenceError,
        HawkesCfConvergenceError,
        ValueError,
        KeyError,
        FileNotFoundError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
