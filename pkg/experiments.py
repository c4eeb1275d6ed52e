"""
Rate sweeps: sample Maurey networks for a range of widths N and seeds,
measure the weighted Sobolev error of each, and fit log(error) against log(N).

The sweep is exposed both as a generator of progress updates
(run_rate_sweep_stream) and as a blocking call (run_rate_sweep).
"""
import csv
import json
import logging
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

try:
    import tomllib  # noqa: E402
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib  # noqa: E402

from config import OUTPUT_DIR, get_workers  # noqa: E402
from dictionary import activation_fourier, activation_id, parse_activation  # noqa: E402
from errors import (  # noqa: E402
    ConfigError,
    ContractViolation,
    FitError,
    ParameterError,
    ParseError,
    UsageError,
)
from function_catalog import parse_target, target_id  # noqa: E402
from maurey_sampler import (  # noqa: E402
    MaureyConfig,
    Variant,
    assemble_network,
    dictionary_bound,
    sample_atoms,
    total_mass,
)
from norms import (  # noqa: E402
    DomainKind,
    DomainSpec,
    Difference,
    build_quadrature,
    domain_id,
    full_space,
    parse_domain,
    weighted_sobolev_norm,
)
from weights import WeightSpec, parse_weight, weight_id  # noqa: E402

log = logging.getLogger(__name__)

# Global stop flag for cancellation
_stop_sweep_flag = threading.Event()

GUIDE_SLOPE = -0.5
SVG_SALT = "barron-rates"


def request_stop():
    """Ask a running sweep to stop after the current cell."""
    _stop_sweep_flag.set()


def clear_stop():
    _stop_sweep_flag.clear()


@dataclass(frozen=True)
class RateExperiment:
    """
    One sweep over widths and seeds. Unset error-norm fields follow the
    sampler config: its ell, p, domain and weight omega.
    """
    config: MaureyConfig
    n_values: Tuple[int, ...]
    seeds: Tuple[int, ...]
    ell: Optional[int] = None
    p: Optional[float] = None
    weight: Optional[WeightSpec] = None
    domain: Optional[DomainSpec] = None
    grid_resolution: int = 48
    output_dir: str = OUTPUT_DIR

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        ns = self.n_values
        if len(ns) < 2:
            raise ContractViolation(f"a sweep needs at least 2 values of N, got {list(ns)}")
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ContractViolation(f"N values must be strictly increasing, got {list(ns)}")
        if ns[0] < 1:
            raise ContractViolation(f"N values must be positive, got {list(ns)}")
        if not self.seeds:
            raise ContractViolation("a sweep needs at least one seed")
        if len(set(self.seeds)) != len(self.seeds):
            raise ContractViolation(f"seeds must be distinct, got {list(self.seeds)}")
        if any(s < 0 for s in self.seeds):
            raise ContractViolation("seeds must be nonnegative")
        if self.grid_resolution < 1:
            raise ContractViolation(f"grid resolution must be positive, got {self.grid_resolution}")

    @property
    def error_ell(self) -> int:
        return self.config.ell if self.ell is None else int(self.ell)

    @property
    def error_p(self) -> float:
        return self.config.p if self.p is None else float(self.p)

    @property
    def error_weight(self) -> WeightSpec:
        return self.weight or self.config.omega

    @property
    def error_domain(self) -> DomainSpec:
        return self.domain or self.config.domain

    def validate(self):
        self.config.validate()
        dom = self.error_domain
        if dom.d != self.config.d:
            raise ContractViolation(f"error domain has dimension {dom.d}, target has {self.config.d}")
        if self.config.variant == Variant.BOUNDED and not dom.bounded:
            raise ParameterError("the bounded variant measures errors on a box or ball")
        if self.config.variant == Variant.UNBOUNDED and dom.kind != DomainKind.FULL:
            raise ParameterError("the unbounded variant measures errors on truncated R^d")
        ell = self.error_ell
        if ell > self.config.activation.max_order:
            raise ParameterError(f"error order {ell} exceeds what {self.config.activation.kind} supports")
        max_target = self.config.target.max_order
        if max_target is not None and ell > max_target:
            raise ParameterError(f"error order {ell} exceeds what {self.config.target.kind} supports")


@dataclass
class RateReport:
    rows: List[Tuple[int, int, float]] = field(default_factory=list)   # (N, seed, error)
    median: Dict[int, float] = field(default_factory=dict)
    mean: Dict[int, float] = field(default_factory=dict)
    slope: float = math.nan
    intercept: float = math.nan
    r_squared: float = math.nan
    mass: float = math.nan

    def __post_init__(self):
        if any(not (err >= 0.0) for _, _, err in self.rows):
            raise ContractViolation("errors must be nonnegative")

    @property
    def n_values(self) -> List[int]:
        return sorted(self.median)

    @property
    def complete(self) -> bool:
        return bool(self.rows) and math.isfinite(self.slope)


@dataclass(frozen=True)
class TauRecord:
    tau: float
    rho_hat: float
    mass: float
    dictionary_bound: float

    @property
    def product(self) -> float:
        return self.mass * self.dictionary_bound


# ---------------------------------------------------------------------------
# Fitting
# ---------------------------------------------------------------------------

def fit_rate(points: Sequence[Tuple[float, float]]) -> Tuple[float, float, float]:
    """
    Least squares line through (log N, log error).

    Returns (slope, intercept, R^2); R^2 is 1 when the errors are constant.
    """
    pts = [(float(n), float(e)) for n, e in points]
    for n, e in pts:
        if not e > 0.0:
            raise FitError(f"error {e!r} at N={n:g} is not positive; cannot take its logarithm", n=int(n))
    if len({n for n, _ in pts}) < 2:
        raise FitError("fitting a rate needs at least 2 distinct N")
    x = np.log([n for n, _ in pts])
    y = np.log([e for _, e in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r_squared = 1.0 if ss_tot <= 1e-300 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r_squared


def summarize(rows: Sequence[Tuple[int, int, float]], mass: float = math.nan) -> RateReport:
    """Per-N median and mean, and the fit on the medians."""
    rows = sorted((int(n), int(s), float(e)) for n, s, e in rows)
    report = RateReport(rows=rows, mass=mass)
    if not rows:
        return report
    by_n: Dict[int, List[float]] = {}
    for n, _, err in rows:
        by_n.setdefault(n, []).append(err)
    report.median = {n: float(np.median(v)) for n, v in by_n.items()}
    report.mean = {n: float(np.mean(v)) for n, v in by_n.items()}
    if len(by_n) >= 2:
        report.slope, report.intercept, report.r_squared = fit_rate(sorted(report.median.items()))
    return report


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def approximation_error(cfg: MaureyConfig, net, weight: Optional[WeightSpec] = None,
                        resolution: int = 48, grid=None) -> float:
    """||f - net||_{W^(ell,p)(omega)} on the config domain."""
    weight = weight or cfg.omega
    grid = grid or build_quadrature(cfg.domain, weight, resolution, cfg.p)
    return float(weighted_sobolev_norm(Difference(cfg.target, net), cfg.ell, cfg.p, weight, grid))


def _cell_error(exp: RateExperiment, grid, mass: float, cell: Tuple[int, int]) -> float:
    n, seed = cell
    cfg = exp.config
    rep = sample_atoms(cfg, n, seed)
    net = assemble_network(rep, cfg)
    used = float(np.sum(np.abs(net.coefficient)))
    if used > mass * (1.0 + 1e-12):
        raise ParameterError(f"network for N={n}, seed={seed} spends {used!r} > M={mass!r}")
    err = weighted_sobolev_norm(Difference(cfg.target, net), exp.error_ell, exp.error_p,
                                exp.error_weight, grid)
    return float(err)


def run_rate_sweep_stream(exp: RateExperiment, workers: Optional[int] = None) -> Iterator[Dict[str, Any]]:
    """
    Run the sweep and yield a progress dict after every (N, seed) cell.

    Cells run in parallel but are consumed in (N, seed) order, so the final
    report does not depend on the worker count. The last dict carries
    done=True and the RateReport under "report".
    """
    clear_stop()
    exp.validate()
    cfg = exp.config
    mass, _ = total_mass(cfg)
    grid = build_quadrature(exp.error_domain, exp.error_weight, exp.grid_resolution, exp.error_p)
    reference = weighted_sobolev_norm(cfg.target, exp.error_ell, exp.error_p, exp.error_weight, grid)
    log.info("sweep %s: M=%.6g, target norm %.6g, %d grid nodes",
             target_id(cfg.target), mass, float(reference), grid.size)

    cells = [(n, s) for n in exp.n_values for s in sorted(exp.seeds)]
    rows: List[Tuple[int, int, float]] = []
    workers = workers or get_workers()

    def run(cell):
        return _cell_error(exp, grid, mass, cell)

    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        results = pool.map(run, cells) if pool else map(run, cells)
        for idx, (cell, err) in enumerate(zip(cells, results)):
            rows.append((cell[0], cell[1], err))
            log.info("cell N=%d seed=%d: error %.6g", cell[0], cell[1], err)
            if _stop_sweep_flag.is_set():
                log.warning("sweep stopped after %d of %d cells", idx + 1, len(cells))
                yield {
                    'cells_done': idx + 1,
                    'cells_total': len(cells),
                    'last': rows[-1],
                    'report': summarize(rows, mass),
                    'cancelled': True,
                    'done': True
                }
                return
            yield {
                'cells_done': idx + 1,
                'cells_total': len(cells),
                'last': rows[-1],
                'cancelled': False,
                'done': False
            }
    finally:
        if pool:
            pool.shutdown(cancel_futures=True)

    report = summarize(rows, mass)
    log.info("sweep done: slope %.4f, R^2 %.4f", report.slope, report.r_squared)
    yield {
        'cells_done': len(cells),
        'cells_total': len(cells),
        'last': rows[-1] if rows else None,
        'report': report,
        'cancelled': False,
        'done': True
    }


def run_rate_sweep(exp: RateExperiment, workers: Optional[int] = None) -> RateReport:
    """Blocking form of run_rate_sweep_stream."""
    for update in run_rate_sweep_stream(exp, workers):
        if update.get('done', False):
            return update['report']
    return RateReport()


def run_tau_sweep(cfg: MaureyConfig, taus: Sequence[float], resolution: int = 32) -> List[TauRecord]:
    """Variation norm M and dictionary bound K_D as functions of tau."""
    out = []
    for tau in taus:
        tau = float(tau)
        rho_hat = abs(activation_fourier(cfg.activation, tau)) if tau != 0.0 else 0.0
        if rho_hat < 1e-12:
            log.warning("skipping tau=%g: rho^ vanishes", tau)
            continue
        trial = replace(cfg, tau=tau)
        mass, _ = total_mass(trial)
        bound = dictionary_bound(trial, resolution)
        out.append(TauRecord(tau, rho_hat, mass, bound))
        log.debug("tau=%g: |rho^|=%.6g M=%.6g K=%.6g", tau, rho_hat, mass, bound)
    return out


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

REPORT_FIELDS = ["N", "seed", "error"]


def _write_csv(report: RateReport, path: str):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(REPORT_FIELDS)
        for n, seed, err in report.rows:
            writer.writerow([n, seed, repr(err)])
        if not report.rows:
            return
        # Summary block after one blank line
        writer.writerow([])
        writer.writerow(["summary", "N", "median", "mean"])
        for n in report.n_values:
            writer.writerow(["summary", n, repr(report.median[n]), repr(report.mean[n])])
        writer.writerow(["fit", "slope", "intercept", "r_squared"])
        writer.writerow(["fit", repr(report.slope), repr(report.intercept), repr(report.r_squared)])
        writer.writerow(["mass", repr(report.mass)])


def _write_svg(report: RateReport, path: str):
    if not report.complete:
        raise ContractViolation("an SVG plot needs a complete report with a fitted slope")
    matplotlib.rcParams["svg.hashsalt"] = SVG_SALT
    ns = np.array([n for n, _, _ in report.rows], dtype=float)
    errs = np.array([e for _, _, e in report.rows], dtype=float)
    grid_n = np.array(report.n_values, dtype=float)
    medians = np.array([report.median[int(n)] for n in grid_n])
    fitted = np.exp(report.intercept) * grid_n ** report.slope
    guide = medians[0] * (grid_n / grid_n[0]) ** GUIDE_SLOPE

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    try:
        ax.scatter(ns, np.maximum(errs, 1e-300), s=8, alpha=0.4, color="tab:blue", label="error per seed")
        ax.scatter(grid_n, medians, s=24, color="tab:red", zorder=3, label="median")
        ax.plot(grid_n, fitted, color="tab:red", gid="fit",
                label=f"fit: slope {report.slope:.3f}, R² {report.r_squared:.3f}")
        ax.plot(grid_n, guide, color="gray", linestyle="--", gid="guide", label="N^(-1/2)")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("N")
        ax.set_ylabel("weighted Sobolev error")
        ax.legend(loc="lower left", fontsize=8)
        fig.savefig(path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)


def emit_report(report: RateReport, path: str, fmt: str = "csv") -> str:
    """Write the report as csv or svg; returns path."""
    if fmt == "csv":
        _write_csv(report, path)
    elif fmt == "svg":
        _write_svg(report, path)
    else:
        raise ContractViolation(f"unknown report format {fmt!r}")
    log.info("wrote %s report to %s", fmt, path)
    return path


def read_report_rows(path: str) -> List[Tuple[int, int, float]]:
    """The (N, seed, error) rows of a CSV report."""
    rows = []
    with open(path, "r", newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != REPORT_FIELDS:
            raise ParseError(f"{path} is not a rate report")
        for row in reader:
            if not row:
                break
            rows.append((int(row[0]), int(row[1]), float(row[2])))
    return rows


def write_tau_records(records: Sequence[TauRecord], path: str):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["tau", "rho_hat", "M", "K_D", "M_K_D"])
        for rec in records:
            writer.writerow([repr(rec.tau), repr(rec.rho_hat), repr(rec.mass),
                             repr(rec.dictionary_bound), repr(rec.product)])
    log.info("wrote %d tau records to %s", len(records), path)


# ---------------------------------------------------------------------------
# Config files
# ---------------------------------------------------------------------------

EXPERIMENT_KEYS = (
    "variant", "target", "activation", "tau", "gamma", "ell", "s", "r", "u", "p",
    "domain", "upsilon", "weight", "N_list", "seeds", "seed", "grid_resolution", "output_dir",
)

DEFAULTS: Dict[str, Any] = {
    "variant": Variant.UNBOUNDED,
    "target": "gauss:d=1",
    "activation": "gaussian",
    "tau": 1.0,
    "gamma": 0.0,
    "ell": 0,
    "s": 2.0,
    "r": 2.0,
    "u": 4.5,
    "p": 2.0,
    "N_list": [16, 32, 64, 128, 256, 512, 1024],
    "seeds": list(range(20)),
    "seed": 0,
    "grid_resolution": 48,
    "output_dir": OUTPUT_DIR,
}


def read_toml(path: str) -> Dict[str, Any]:
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"cannot parse {path}: {exc}")


def read_config_file(path: str) -> Dict[str, Any]:
    values = read_toml(path)
    unknown = sorted(set(values) - set(EXPERIMENT_KEYS))
    if unknown:
        raise UsageError(f"unknown keys in {path}: {', '.join(unknown)}")
    return values


def merge_values(file_values: Optional[Mapping[str, Any]], overrides: Optional[Mapping[str, Any]]) -> Dict[str, Any]:
    """Defaults, then file values, then non-None overrides."""
    values = dict(DEFAULTS)
    values.update(file_values or {})
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    unknown = sorted(set(values) - set(EXPERIMENT_KEYS))
    if unknown:
        raise UsageError(f"unknown experiment keys: {', '.join(unknown)}")
    return values


def _int_list(values: Mapping[str, Any], key: str) -> List[int]:
    raw = values[key]
    if isinstance(raw, str):
        raw = [v for v in raw.split(",") if v.strip()]
    try:
        return [int(v) for v in raw]
    except (TypeError, ValueError):
        raise ParseError(f"{key} must be a list of integers, got {raw!r}")


def config_from_values(values: Mapping[str, Any]) -> MaureyConfig:
    """Sampler config from merged flat values."""
    try:
        target = parse_target(str(values["target"]))
        variant = str(values["variant"])
        if variant not in (Variant.BOUNDED, Variant.UNBOUNDED):
            raise ParseError(f"unknown variant {variant!r}")
        domain_text = values.get("domain")
        if domain_text:
            domain = parse_domain(str(domain_text))
        elif variant == Variant.UNBOUNDED:
            domain = full_space(target.d)
        else:
            raise ConfigError("the bounded variant needs a domain")
        upsilon = values.get("upsilon")
        return MaureyConfig(
            variant=variant,
            target=target,
            domain=domain,
            activation=parse_activation(str(values["activation"])),
            tau=float(values["tau"]),
            ell=int(values["ell"]),
            p=float(values["p"]),
            gamma=float(values["gamma"]),
            s=float(values["s"]),
            upsilon=parse_weight(str(upsilon), target.d) if upsilon else None,
            r=float(values["r"]),
            u=float(values["u"]),
            seed=int(values["seed"]),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ContractViolation):
            raise
        raise ParseError(f"malformed experiment value: {exc}")


def experiment_from_values(values: Mapping[str, Any]) -> RateExperiment:
    cfg = config_from_values(values)
    weight = values.get("weight")
    return RateExperiment(
        config=cfg,
        n_values=tuple(_int_list(values, "N_list")),
        seeds=tuple(_int_list(values, "seeds")),
        weight=parse_weight(str(weight), cfg.d) if weight else None,
        grid_resolution=int(values["grid_resolution"]),
        output_dir=str(values["output_dir"]),
    )


def load_experiment(path: Optional[str], overrides: Optional[Mapping[str, Any]] = None) -> RateExperiment:
    """RateExperiment from a flat TOML file; overrides win over file values."""
    file_values = read_config_file(path) if path else {}
    return experiment_from_values(merge_values(file_values, overrides))


def experiment_values(exp: RateExperiment) -> Dict[str, Any]:
    """Flat canonical values of exp; experiment_from_values inverts it."""
    cfg = exp.config
    out: Dict[str, Any] = {
        "variant": cfg.variant,
        "target": target_id(cfg.target),
        "activation": activation_id(cfg.activation),
        "tau": cfg.tau,
        "gamma": cfg.gamma,
        "ell": cfg.ell,
        "s": cfg.s,
        "r": cfg.r,
        "u": cfg.u,
        "p": cfg.p,
        "domain": domain_id(cfg.domain),
        "N_list": list(exp.n_values),
        "seeds": list(exp.seeds),
        "seed": cfg.seed,
        "grid_resolution": exp.grid_resolution,
        "output_dir": exp.output_dir,
    }
    if cfg.upsilon is not None:
        out["upsilon"] = weight_id(cfg.upsilon)
    if exp.weight is not None:
        out["weight"] = weight_id(exp.weight)
    return out


def _toml_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return repr(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    return json.dumps(str(value))


def write_config_echo(values: Mapping[str, Any], path: str) -> str:
    """Flat key = value TOML, keys sorted."""
    with open(path, "w", encoding="utf-8") as f:
        for key in sorted(values):
            if values[key] is None:
                continue
            f.write(f"{key} = {_toml_value(values[key])}\n")
    log.info("wrote effective config to %s", path)
    return path
