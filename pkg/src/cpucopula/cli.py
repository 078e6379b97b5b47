"""Command-line interface.

Subcommands ``simulate``, ``density``, ``taildep``, ``var`` and ``corr``.
Matrices are written as CSV, reports as JSON. Exit codes: 0 success,
2 configuration error, 3 parse error, 4 numerical or quadrature failure.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from cpucopula import gamma_copula, tail
from cpucopula.datasets import Table, format_float, ingest_csv, load_dataset, write_matrix_csv
from cpucopula.drivers import DriverSpec, empirical_correlations, ranks_from_data
from cpucopula.errors import CopulaError, EvaluationError, ParseError, QuadratureError, SpecError
from cpucopula.gamma_copula import GammaParams
from cpucopula.power_copula import PowerParams
from cpucopula.risk import aggregate_var, fit_lognormal
from cpucopula.simulation import CHUNK_SIZE, simulate

SEED_ENV = "CPUCOPULA_SEED"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_NUMERIC = 4

logger = logging.getLogger("cpucopula")


class ConfigError(SpecError):
    """Invalid command line or configuration file."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


@dataclass(frozen=True)
class RunConfig:
    """Validated parameters of one subcommand invocation."""

    command: str
    options: dict = field(default_factory=dict)

    def __getattr__(self, name):
        try:
            return self.options[name]
        except KeyError:
            raise AttributeError(name) from None


def parse_float_list(text: str, name: str) -> list[float]:
    try:
        values = [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"--{name}: expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise ConfigError(f"--{name}: empty list")
    return values


def parse_int_range(text: str, name: str) -> list[int]:
    """``'1..5'`` or ``'1,3,7'`` as a list of integers."""
    text = str(text)
    try:
        if ".." in text:
            lo, hi = text.split("..")
            values = list(range(int(lo), int(hi) + 1))
        else:
            values = [int(x) for x in text.split(",")]
    except ValueError:
        raise ConfigError(f"--{name}: expected 'lo..hi' or a comma list of integers") from None
    if not values:
        raise ConfigError(f"--{name}: empty range")
    return values


def broadcast(values: list[float], d: int, name: str) -> tuple:
    if len(values) == 1:
        return tuple(values * d)
    if len(values) != d:
        raise ConfigError(f"--{name}: got {len(values)} values for {d} dimensions")
    return tuple(values)


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _observations(cfg: RunConfig) -> Table:
    if cfg.input is not None:
        return ingest_csv(cfg.input)
    return load_dataset(cfg.dataset)


def build_driver(kind: str, observations: np.ndarray, rho=None, dof=None,
                 corr_transform: str = "log") -> DriverSpec:
    if kind in ("gaussian", "t"):
        corr = empirical_correlations(observations, corr_transform)
        if kind == "gaussian":
            return DriverSpec.gaussian(corr)
        if dof is None:
            raise ConfigError("the t driver needs --dof")
        return DriverSpec.student_t(corr, dof)
    ranks = ranks_from_data(observations)
    if kind == "rook":
        return DriverSpec.rook(ranks)
    if kind == "uf":
        return DriverSpec.upper_frechet(ranks)
    if kind == "lf":
        return DriverSpec.lower_frechet(ranks)
    if kind == "patchwork":
        if rho is None:
            raise ConfigError("the patchwork driver needs --rho")
        return DriverSpec.patchwork(ranks, rho)
    raise ConfigError(f"unknown driver {kind!r}")


def build_params(family: str, d: int, a=None, beta=None):
    if family == "gamma":
        if a is None:
            raise ConfigError("the gamma copula needs --a")
        return GammaParams(broadcast(parse_float_list(a, "a"), d, "a"))
    if family == "power":
        if beta is None:
            raise ConfigError("the power copula needs --beta")
        return PowerParams(broadcast(parse_float_list(beta, "beta"), d, "beta"))
    return None


def _json(record) -> str:
    return json.dumps(record, sort_keys=True, indent=2, allow_nan=True) + "\n"


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    return value


def _emit(outputs: list[tuple[str | None, str]], stdout) -> None:
    """Write every output once, in order; ``None`` means stdout."""
    for path, text in outputs:
        if path is None or path == "-":
            stdout.write(text)
        else:
            with open(path, "w", encoding="utf-8", newline="") as handle:
                handle.write(text)


def cmd_simulate(cfg: RunConfig) -> list:
    table = _observations(cfg)
    family = "driver" if cfg.copula in ("gaussian", "t") else cfg.copula
    driver_kind = cfg.copula if family == "driver" else cfg.driver
    driver = build_driver(driver_kind, table.data, cfg.rho, cfg.dof, cfg.corr_transform)
    params = build_params(family, driver.d, cfg.a, cfg.beta)
    if cfg.sims < 1:
        raise ConfigError("--sims must be positive")
    batch = simulate(family, driver, cfg.sims, cfg.seed, params, chunk_size=cfg.chunk_size,
                     keep_latent=cfg.latent)
    d = batch.d
    columns = [f"v_{k + 1}" for k in range(d)]
    matrix = batch.values
    if cfg.latent and batch.latent is not None:
        columns += [f"s_{k + 1}" for k in range(d)]
        matrix = np.hstack([matrix, batch.latent])
    buffer = io.StringIO()
    write_matrix_csv(buffer, columns, matrix)
    meta = dict(batch.meta, n=batch.n, d=d, source=cfg.input or f"dataset {cfg.dataset}",
                columns=table.columns)
    outputs = [(cfg.output, buffer.getvalue())]
    meta_path = cfg.meta or (f"{cfg.output}.json" if cfg.output not in (None, "-") else None)
    if meta_path is not None:
        outputs.append((meta_path, _json(_jsonable(meta))))
    return outputs


def cmd_density(cfg: RunConfig) -> list:
    if cfg.grid < 1:
        raise ConfigError("--grid must be positive")
    a = float(cfg.a)
    nodes = np.arange(1, cfg.grid + 1) / (cfg.grid + 1)
    uu, vv = np.meshgrid(nodes, nodes, indexing="ij")
    if cfg.kind == "closed":
        if a != int(a):
            raise ConfigError("the closed form needs integer --a; use --kind quad")
        dens = gamma_copula.density_singular_int(int(a), uu, vv)
    elif cfg.kind == "quad":
        dens = np.array([gamma_copula.density_singular_quad(a, u, v)
                         for u, v in zip(uu.ravel(), vv.ravel())]).reshape(uu.shape)
    else:
        if a != int(a):
            raise ConfigError("the negative binomial density needs integer --a")
        dens = tail.nb_density(int(a), uu, vv)
    buffer = io.StringIO()
    write_matrix_csv(buffer, ["u", "v", "density"],
                     np.column_stack([uu.ravel(), vv.ravel(), np.ravel(dens)]))
    return [(cfg.output, buffer.getvalue())]


def cmd_taildep(cfg: RunConfig) -> list:
    if not cfg.analytic and cfg.samples is None:
        raise ConfigError("taildep needs --analytic and/or --samples")
    record = {}
    if cfg.analytic:
        rows = []
        for a in parse_int_range(cfg.a, "a"):
            if a < 1:
                raise ConfigError("--a values must be positive integers")
            exact = tail.lambda_u_gamma_analytic(a)
            quad = tail.lambda_u_gamma_quadrature(a)
            rows.append({"a": a, "lambda_u": exact, "quadrature": quad,
                         "abs_diff": abs(quad - exact)})
        record["analytic"] = rows
    if cfg.samples is not None:
        values = ingest_csv(cfg.samples).data
        dims = [int(x) - 1 for x in str(cfg.dims).split(",")]
        if len(dims) != 2 or min(dims) < 0 or max(dims) >= values.shape[1]:
            raise ConfigError(f"--dims must name two of the {values.shape[1]} columns (1-based)")
        rows = []
        for t in parse_float_list(cfg.thresholds, "thresholds"):
            est = tail.empirical_tail(values, dims=tuple(dims), t=t, side=cfg.side)
            rows.append({"threshold": t, "side": est.side, "value": est.value,
                         "std_err": est.std_err, "joint_count": est.joint_count,
                         "sample_count": est.sample_count, "warning": est.warning})
            if est.warning:
                logger.warning("t=%s: %s", t, est.warning)
        record["empirical"] = rows
    return [(cfg.output, _json(record))]


def cmd_var(cfg: RunConfig) -> list:
    table = _observations(cfg)
    marginals = [fit_lognormal(table.data[:, k]) for k in range(table.data.shape[1])]
    levels = parse_float_list(cfg.levels, "levels")
    if cfg.copula in ("gaussian", "t"):
        family, driver_kind, label = "driver", cfg.copula, cfg.copula
    else:
        family, driver_kind = cfg.copula, cfg.driver
        label = f"{cfg.driver} {cfg.copula}"
    driver = build_driver(driver_kind, table.data, cfg.rho, cfg.dof, cfg.corr_transform)
    params = build_params(family, driver.d, cfg.a, cfg.beta)
    if cfg.sims < 1:
        raise ConfigError("--sims must be positive")
    batch = simulate(family, driver, cfg.sims, cfg.seed, params, chunk_size=cfg.chunk_size,
                     keep_latent=False)
    report = aggregate_var(batch, marginals, levels, copula_label=label)
    record = dict(report.as_dict(), seed=cfg.seed, driver=driver.describe(),
                  marginals=[{"column": name, "mu": m.mu, "sigma": m.sigma}
                             for name, m in zip(table.columns, marginals)])
    if params is not None:
        record["params"] = _jsonable(params.__dict__)
    return [(cfg.output, _json(_jsonable(record)))]


def cmd_corr(cfg: RunConfig) -> list:
    table = _observations(cfg)
    corr = empirical_correlations(table.data, cfg.transform)
    fmt = format_float if cfg.decimals is None else (lambda x: f"{x:.{cfg.decimals}f}")
    buffer = io.StringIO()
    write_matrix_csv(buffer, [""] + table.columns,
                     [[name] + list(row) for name, row in zip(table.columns, corr)],
                     fmt=lambda x: x if isinstance(x, str) else fmt(x))
    return [(cfg.output, buffer.getvalue())]


COMMANDS = {
    "simulate": cmd_simulate,
    "density": cmd_density,
    "taildep": cmd_taildep,
    "var": cmd_var,
    "corr": cmd_corr,
}


def _add_data_source(p):
    group = p.add_mutually_exclusive_group()
    group.add_argument("--dataset", choices=["A", "B", "a", "b"], default="A",
                       help="bundled dataset (default A)")
    group.add_argument("--input", help="CSV file with a header row")


def _add_model(p, default_copula):
    p.add_argument("--copula", default=default_copula,
                   choices=["gamma", "power", "driver", "gaussian", "t"])
    p.add_argument("--driver", default="rook", choices=["rook", "uf", "lf", "patchwork"])
    p.add_argument("--a", help="Gamma shapes: scalar or comma list")
    p.add_argument("--beta", help="Power shapes: scalar or comma list")
    p.add_argument("--rho", type=float, help="cell correlation of the patchwork driver")
    p.add_argument("--dof", type=float, default=2.0, help="t degrees of freedom (default 2)")
    p.add_argument("--corr-transform", choices=["none", "log"], default="log",
                   help="data transform for Gaussian/t correlations (default log)")
    p.add_argument("--sims", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=None, help=f"default ${SEED_ENV} or 0")
    p.add_argument("--chunk-size", type=int, default=CHUNK_SIZE, help=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cpucopula", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file of option defaults for the subcommand")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="sample a copula and write v_1..v_d as CSV")
    _add_data_source(p)
    _add_model(p, "gamma")
    p.add_argument("--latent", action="store_true", help="also write s_1..s_d")
    p.add_argument("--output", default="-")
    p.add_argument("--meta", help="metadata path (default OUTPUT.json)")

    p = sub.add_parser("density", help="Gamma or negative binomial density on a grid")
    p.add_argument("--kind", choices=["closed", "quad", "nb"], default="closed")
    p.add_argument("--a", type=float, required=False, default=1.0)
    p.add_argument("--grid", type=int, default=50, help="interior points per axis")
    p.add_argument("--output", default="-")

    p = sub.add_parser("taildep", help="upper tail dependence table and estimates")
    p.add_argument("--analytic", action="store_true")
    p.add_argument("--a", default="1..10", help="range 'lo..hi' or comma list")
    p.add_argument("--samples", help="CSV written by simulate")
    p.add_argument("--dims", default="1,2")
    p.add_argument("--thresholds", default="0.99")
    p.add_argument("--side", choices=["upper", "lower"], default="upper")
    p.add_argument("--output", default="-")

    p = sub.add_parser("var", help="aggregate VaR with lognormal marginals")
    _add_data_source(p)
    _add_model(p, "gamma")
    p.add_argument("--levels", default="0.1,0.05,0.01,0.005")
    p.add_argument("--output", default="-")

    p = sub.add_parser("corr", help="Pearson correlations of the data")
    _add_data_source(p)
    p.add_argument("--transform", choices=["none", "log"], default="none")
    p.add_argument("--decimals", type=int)
    p.add_argument("--output", default="-")
    return parser


def _subparser(parser, command):
    for action in parser._subparsers._group_actions:
        if command in action.choices:
            return action.choices[command]
    raise ConfigError(f"unknown command {command!r}")


def parse_config(argv) -> RunConfig:
    """Parse ``argv`` (plus an optional JSON defaults file) into a RunConfig."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as handle:
                defaults = json.load(handle)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ParseError(f"config file is not valid JSON: {exc.msg}", row=exc.lineno,
                             column=exc.colno) from None
        if not isinstance(defaults, dict):
            raise ConfigError("config file must hold a JSON object")
        sub = _subparser(parser, args.command)
        known = {a.dest for a in sub._actions if a.dest != "help"}
        unknown = sorted(set(defaults) - known)
        if unknown:
            raise ConfigError(f"unknown config keys for {args.command}: {', '.join(unknown)}")
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    options = {k: v for k, v in vars(args).items() if k not in ("command", "config", "verbose")}
    if "seed" in options and options["seed"] is None:
        options["seed"] = default_seed()
    if "dataset" in options:
        options["dataset"] = options["dataset"].upper()
    if options.get("chunk_size", 1) < 1:
        raise ConfigError("chunk size must be positive")
    return RunConfig(args.command, options)


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, ParseError):
        return EXIT_PARSE
    if isinstance(exc, (QuadratureError, EvaluationError)):
        return EXIT_NUMERIC
    if isinstance(exc, SpecError):
        return EXIT_CONFIG
    return EXIT_NUMERIC


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    argv = sys.argv[1:] if argv is None else list(argv)
    logging.basicConfig(level=logging.INFO if "-v" in argv or "--verbose" in argv else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=stderr)
    try:
        cfg = parse_config(argv)
        outputs = COMMANDS[cfg.command](cfg)
        _emit(outputs, stdout)
    except SystemExit as exc:
        return int(exc.code or 0)
    except FileNotFoundError as exc:
        stderr.write(f"error [parse]: {exc.filename}: file not found\n")
        return EXIT_PARSE
    except CopulaError as exc:
        code = exit_code_for(exc)
        category = {EXIT_CONFIG: "config", EXIT_PARSE: "parse"}.get(
            code, "quadrature" if isinstance(exc, QuadratureError) else "numeric")
        stderr.write(f"error [{category}]: {exc}\n")
        return code
    except (FloatingPointError, ArithmeticError) as exc:
        stderr.write(f"error [numeric]: {exc}\n")
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
