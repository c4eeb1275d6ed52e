#!/usr/bin/env python3
"""
Command line entry point.

    python cli.py norm    --target gauss:d=1 --domain box:-1,1 --weight const --ell 0 --p 2
    python cli.py apcheck --upsilon pow:1.5 --p 2 --d 1
    python cli.py embed   --case cor-barron --p 2 --domain box:-1,1
    python cli.py approx  --variant unbounded --target gauss:d=1 --N 256 --seed 3
    python cli.py rates   --config example.toml
    python cli.py tau     --variant unbounded --taus 0.5,1,2

Flags override values from --config. Every run writes the effective values to
<out>/config.echo.toml; passing that file back as --config reproduces the run.
Results go to stdout, logging to stderr.
"""
import argparse
import logging
import os
import sys
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence

from config import OUTPUT_DIR, configure_logging, set_log_level, set_workers
from embedding_verifier import (
    ALL_CASES,
    CaseKind,
    EmbeddingCase,
    embedding_constant_scan,
    gaussian_family,
    write_records,
)
from errors import (
    EXIT_OK,
    BarronError,
    ParseError,
    UsageError,
    exit_code_for,
)
from experiments import (
    EXPERIMENT_KEYS,
    approximation_error,
    config_from_values,
    emit_report,
    experiment_values,
    load_experiment,
    read_toml,
    run_rate_sweep_stream,
    run_tau_sweep,
    write_config_echo,
    write_tau_records,
)
from experiments import DEFAULTS as EXPERIMENT_DEFAULTS
from function_catalog import parse_target, target_id
from maurey_sampler import assemble_network, config_dict, sample_atoms, write_representation
from norms import build_quadrature, domain_id, parse_domain, weighted_sobolev_norm
from weights import check_ap, parse_weight, weight_id

log = logging.getLogger("cli")

ECHO_FILE = "config.echo.toml"

FLOAT_KEYS = {"tau", "gamma", "s", "r", "u", "p", "q", "kappa", "t", "tau0", "tau1", "tau2"}
INT_KEYS = {"ell", "d", "seed", "grid_resolution", "family_size"}
INT_LIST_KEYS = {"N_list", "seeds"}
FLOAT_LIST_KEYS = {"taus"}


class CliParser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting on bad flags."""

    def error(self, message):
        raise UsageError(message)


def _add_flags(parser: argparse.ArgumentParser):
    # Every flag defaults to None so config-file values survive unless overridden
    add = parser.add_argument
    add("--config", help="flat TOML file with default values")
    add("--seed")
    add("--out", dest="output_dir", help=f"output directory (default {OUTPUT_DIR})")
    add("--workers", type=int, help="parallel sweep cells")
    add("--log-level", dest="log_level")
    add("--target", help='e.g. "gauss:d=1:scale=1"')
    add("--activation", help='e.g. "gaussian:v=3"')
    add("--variant", help="bounded | unbounded")
    add("--domain", help='"box:-1,1", "ball:0,0:1" or "rd:1"')
    add("--weight", help="weight of the error norm")
    add("--upsilon", help="Muckenhoupt weight")
    for name in ("tau", "gamma", "s", "r", "u", "p", "q", "kappa", "t", "tau0", "tau1", "tau2", "ell", "d"):
        add(f"--{name}")
    add("--N", dest="N_list", help="width, or comma list of widths for rates")
    add("--seeds", help="comma list of seeds")
    add("--grid", "--resolution", dest="grid_resolution")
    add("--case", choices=ALL_CASES)
    add("--family", dest="family_size", help="number of Gaussians in the embedding scan")
    add("--taus", help="comma list of tau values")


def build_parser() -> CliParser:
    parser = CliParser(prog="cli.py", description="Barron space approximation rates", allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", parser_class=CliParser)
    for name, text in (
        ("norm", "weighted Sobolev norm of a catalog target"),
        ("apcheck", "Muckenhoupt A_p check of a weight"),
        ("embed", "embedding inequality ratios over a Gaussian family"),
        ("approx", "sample one network and measure its error"),
        ("rates", "rate sweep over N and seeds"),
        ("tau", "variation norm and dictionary bound against tau"),
    ):
        _add_flags(sub.add_parser(name, help=text, allow_abbrev=False))
    return parser


# ---------------------------------------------------------------------------
# Values
# ---------------------------------------------------------------------------

_META_KEYS = {"command", "config", "workers", "log_level"}


def _coerce(key: str, value: Any) -> Any:
    try:
        if key in FLOAT_KEYS:
            return float(value)
        if key in INT_KEYS:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(f"{value!r} is not an integer")
            return int(value)
        if key in INT_LIST_KEYS or key in FLOAT_LIST_KEYS:
            items = value.split(",") if isinstance(value, str) else list(value)
            cast: Callable = float if key in FLOAT_LIST_KEYS else int
            return [cast(v) for v in items if str(v).strip()]
    except (TypeError, ValueError) as exc:
        raise ParseError(f"cannot parse {key}={value!r}: {exc}")
    return value


def _read_config(path: Optional[str]) -> Dict[str, Any]:
    return read_toml(path) if path else {}


def resolve_values(args: argparse.Namespace, defaults: Mapping[str, Any], allowed: Sequence[str]) -> Dict[str, Any]:
    """Defaults, then config file, then flags; every key must belong to the command."""
    flags = {k: v for k, v in vars(args).items() if k not in _META_KEYS and v is not None}
    stray = sorted(set(flags) - set(allowed))
    if stray:
        raise UsageError(f"{args.command} does not take " + ", ".join(f"--{k}" for k in stray))
    file_values = _read_config(args.config)
    unknown = sorted(set(file_values) - set(allowed))
    if unknown:
        raise UsageError(f"unknown keys in {args.config} for {args.command}: {', '.join(unknown)}")
    values = dict(defaults)
    values.update(file_values)
    values.update(flags)
    return {k: _coerce(k, v) for k, v in values.items()}


def _require(values: Mapping[str, Any], *keys: str):
    missing = [k for k in keys if not values.get(k)]
    if missing:
        raise UsageError("missing " + ", ".join(f"--{k}" for k in missing))


def _output_dir(values: Mapping[str, Any]) -> str:
    out = str(values.get("output_dir") or OUTPUT_DIR)
    os.makedirs(out, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

NORM_KEYS = ("target", "domain", "weight", "ell", "p", "grid_resolution", "output_dir")
NORM_DEFAULTS = {"weight": "const", "ell": 0, "p": 2.0, "grid_resolution": 48, "output_dir": OUTPUT_DIR}


def cmd_norm(args) -> int:
    values = resolve_values(args, NORM_DEFAULTS, NORM_KEYS)
    _require(values, "target", "domain")
    fn = parse_target(values["target"])
    dom = parse_domain(values["domain"])
    w = parse_weight(values["weight"], fn.d)
    values.update(target=target_id(fn), domain=domain_id(dom), weight=weight_id(w))
    out = _output_dir(values)
    write_config_echo(values, os.path.join(out, ECHO_FILE))
    grid = build_quadrature(dom, w, values["grid_resolution"], values["p"])
    res = weighted_sobolev_norm(fn, values["ell"], values["p"], w, grid)
    print(f"{res.value!r} +/- {res.tail_bound!r}")
    return EXIT_OK


APCHECK_KEYS = ("upsilon", "p", "d", "output_dir")
APCHECK_DEFAULTS = {"p": 2.0, "d": 1, "output_dir": OUTPUT_DIR}


def cmd_apcheck(args) -> int:
    values = resolve_values(args, APCHECK_DEFAULTS, APCHECK_KEYS)
    _require(values, "upsilon")
    upsilon = parse_weight(values["upsilon"], values["d"])
    values["upsilon"] = weight_id(upsilon)
    out = _output_dir(values)
    write_config_echo(values, os.path.join(out, ECHO_FILE))
    report = check_ap(upsilon, values["p"])
    print(f"verdict: {report.verdict}")
    print(f"supremum: {report.supremum!r}")
    print(f"balls: {report.family}")
    return EXIT_OK


EMBED_KEYS = ("case", "d", "ell", "p", "q", "gamma", "tau0", "tau1", "tau2", "r", "u", "t", "kappa",
              "domain", "upsilon", "target", "family_size", "grid_resolution", "output_dir")
EMBED_DEFAULTS = {"case": CaseKind.BARRON, "d": 1, "ell": 0, "p": 2.0, "gamma": 0.0, "kappa": 0.0,
                  "family_size": 10, "grid_resolution": 48, "output_dir": OUTPUT_DIR}


def cmd_embed(args) -> int:
    values = resolve_values(args, EMBED_DEFAULTS, EMBED_KEYS)
    d = values["d"]
    dom = parse_domain(values["domain"]) if values.get("domain") else None
    upsilon = parse_weight(values["upsilon"], d) if values.get("upsilon") else None
    case = EmbeddingCase(
        which=values["case"], d=d, ell=values["ell"], p=values["p"], q=values.get("q"),
        gamma=values["gamma"], tau0=values.get("tau0"), tau1=values.get("tau1"), tau2=values.get("tau2"),
        r=values.get("r"), u=values.get("u"), t=values.get("t"), kappa=values["kappa"],
        domain=dom, upsilon=upsilon, resolution=values["grid_resolution"],
    )
    if values.get("target"):
        family = [parse_target(values["target"])]
        values["target"] = target_id(family[0])
    else:
        family = gaussian_family(d, values["family_size"])
    if dom is not None:
        values["domain"] = domain_id(dom)
    if upsilon is not None:
        values["upsilon"] = weight_id(upsilon)
    out = _output_dir(values)
    write_config_echo(values, os.path.join(out, ECHO_FILE))
    worst, records = embedding_constant_scan(case, family)
    write_records(records, os.path.join(out, "embed.csv"))
    for rec in records:
        print(f"{rec.function_id}  ratio={rec.ratio!r}  lhs={rec.lhs!r}  rhs={rec.rhs!r}")
    print(f"max ratio: {worst!r} (C_d,ell = {records[0].constant})")
    return EXIT_OK


def _sampler_values(cfg) -> Dict[str, Any]:
    values = config_dict(cfg)
    if cfg.upsilon is None:
        values.pop("upsilon", None)
    return values


APPROX_KEYS = tuple(k for k in EXPERIMENT_KEYS if k != "seeds")


def cmd_approx(args) -> int:
    defaults = {k: v for k, v in EXPERIMENT_DEFAULTS.items() if k in APPROX_KEYS}
    defaults["N_list"] = [256]
    values = resolve_values(args, defaults, APPROX_KEYS)
    if len(values["N_list"]) != 1:
        raise UsageError(f"approx takes one width, got --N {values['N_list']}")
    n = values["N_list"][0]
    cfg = config_from_values(values)
    weight = parse_weight(values["weight"], cfg.d) if values.get("weight") else None
    echo = _sampler_values(cfg)
    echo.update(N_list=[n], grid_resolution=values["grid_resolution"], output_dir=values["output_dir"])
    if weight is not None:
        echo["weight"] = weight_id(weight)
    out = _output_dir(values)
    write_config_echo(echo, os.path.join(out, ECHO_FILE))

    rep = sample_atoms(cfg, n)
    net = assemble_network(rep, cfg)
    error = approximation_error(cfg, net, weight, values["grid_resolution"])
    sidecar = write_representation(rep, cfg, os.path.join(out, "network.txt"), {"error": error})
    print(f"N={n} M={rep.mass!r} error={error!r}")
    log.info("sidecar at %s", sidecar)
    return EXIT_OK


def cmd_rates(args) -> int:
    flags = {k: v for k, v in vars(args).items() if k not in _META_KEYS and v is not None}
    stray = sorted(set(flags) - set(EXPERIMENT_KEYS))
    if stray:
        raise UsageError("rates does not take " + ", ".join(f"--{k}" for k in stray))
    exp = load_experiment(args.config, {k: _coerce(k, v) for k, v in flags.items()})
    out = _output_dir({"output_dir": exp.output_dir})
    write_config_echo(experiment_values(exp), os.path.join(out, ECHO_FILE))
    report = None
    for update in run_rate_sweep_stream(exp):
        if update['done']:
            report = update['report']
        else:
            log.debug("%d/%d cells", update['cells_done'], update['cells_total'])
    emit_report(report, os.path.join(out, "report.csv"), "csv")
    emit_report(report, os.path.join(out, "report.svg"), "svg")
    for n in report.n_values:
        print(f"N={n}  median={report.median[n]!r}  mean={report.mean[n]!r}")
    print(f"slope={report.slope!r} intercept={report.intercept!r} r_squared={report.r_squared!r}")
    return EXIT_OK


TAU_KEYS = tuple(k for k in EXPERIMENT_KEYS if k not in ("seeds", "N_list", "weight")) + ("taus",)


def cmd_tau(args) -> int:
    defaults = {k: v for k, v in EXPERIMENT_DEFAULTS.items() if k in TAU_KEYS}
    defaults.update(taus=[0.25, 0.5, 1.0, 2.0, 4.0], grid_resolution=32)
    values = resolve_values(args, defaults, TAU_KEYS)
    cfg = config_from_values(values)
    echo = _sampler_values(cfg)
    echo.pop("tau", None)
    echo.update(taus=values["taus"], grid_resolution=values["grid_resolution"], output_dir=values["output_dir"])
    out = _output_dir(values)
    write_config_echo(echo, os.path.join(out, ECHO_FILE))
    records = run_tau_sweep(cfg, values["taus"], values["grid_resolution"])
    write_tau_records(records, os.path.join(out, "tau.csv"))
    for rec in records:
        print(f"tau={rec.tau!r}  |rho^|={rec.rho_hat!r}  M={rec.mass!r}  K_D={rec.dictionary_bound!r}"
              f"  M*K_D={rec.product!r}")
    return EXIT_OK


COMMANDS = {
    "norm": cmd_norm,
    "apcheck": cmd_apcheck,
    "embed": cmd_embed,
    "approx": cmd_approx,
    "rates": cmd_rates,
    "tau": cmd_tau,
}


def main(argv: Optional[List[str]] = None) -> int:
    configure_logging()
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("missing subcommand: " + " | ".join(COMMANDS))
        if args.log_level:
            set_log_level(args.log_level)
        if args.workers is not None:
            set_workers(args.workers)
        return COMMANDS[args.command](args)
    except (BarronError, OSError) as exc:
        code = exit_code_for(exc)
        print(f"error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
