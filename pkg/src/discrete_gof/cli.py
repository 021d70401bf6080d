"""Command-line harness: ``fit``, ``test``, ``simulate`` and ``mc``.

Configuration is an INI file.  Example::

    [run]
    seed = 20240101
    threads = 1

    [data]
    path = rates.csv
    rate = d_rate          ; discretized at -0.25, 0, 0.25
    x = inflation, output_gap

    [model.I]
    family = ordered
    link = probit
    K = 4
    dynamic = false

    [test]
    columns = S2, R2M(50), R2M(25), R2, S1, R1M(50), R1M(25), R1, Z
    norms = KS, CvM
    B = 199
    alpha = 0.05

    [mc]
    scenarios = size1, power2
    R = 500
    T = 100
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import logging
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .bootstrap import DEFAULT_COLUMNS, NORMS, BootstrapResult, StatPlan, WarpResult, parametric_bootstrap, warp_mc
from .data import RATE_THRESHOLDS, ingest_csv, series_csv
from .errors import (
    ConvergenceError,
    DiscreteGofError,
    InvalidLikelihoodError,
    InvalidStateError,
)
from .estimate import FitResult, fit_mle
from .model import ModelSpec, ObservationSeries, OrderedChoiceSpec, PoissonSpec, simulate
from .scenarios import BUILTIN_SCENARIOS, get_scenario

log = logging.getLogger("discrete_gof")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3
WIDE_CI_R = 100


class ConfigError(DiscreteGofError, ValueError):
    """The run configuration is incomplete or inconsistent."""


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelConfig:
    name: str
    spec: ModelSpec
    theta: tuple | None = None


@dataclass(frozen=True)
class DataConfig:
    path: str | None = None
    y: str = "y"
    x: tuple[str, ...] = ()
    rate: str | None = None
    thresholds: tuple[float, ...] = RATE_THRESHOLDS


@dataclass(frozen=True)
class TestConfig:
    plan: StatPlan = field(default_factory=StatPlan)
    B: int = 199
    alpha: float = 0.05
    burn_in: int = 0

    __test__ = False


@dataclass(frozen=True)
class MCConfig:
    scenarios: tuple[str, ...] = ("size1",)
    R: int = 500
    T: int = 100


@dataclass(frozen=True)
class RunConfig:
    models: tuple[ModelConfig, ...] = ()
    data: DataConfig = field(default_factory=DataConfig)
    test: TestConfig = field(default_factory=TestConfig)
    mc: MCConfig = field(default_factory=MCConfig)
    seed: int | None = None
    threads: int = 1
    simulate_T: int | None = None


def _list(value: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in value.split(",") if v.strip())


def _model_from_section(name: str, sec) -> ModelConfig:
    family = sec.get("family", "ordered")
    theta = tuple(float(v) for v in _list(sec["theta"])) if "theta" in sec else None
    if family == "ordered":
        spec = OrderedChoiceSpec(
            link=sec.get("link", "probit"), K=sec.getint("K", 4), dynamic=sec.getboolean("dynamic", False)
        )
    elif family == "poisson":
        spec = PoissonSpec(link=sec.get("link", "identity-ar"))
    else:
        raise ConfigError(f"[{name}] unknown family {family!r}")
    return ModelConfig(name=name, spec=spec, theta=theta)


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str  # keep key case (K, B, R, T)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None

    models = []
    for sec_name in cp.sections():
        if sec_name == "model" or sec_name.startswith("model."):
            label = sec_name.split(".", 1)[1] if "." in sec_name else "model"
            models.append(_model_from_section(label, cp[sec_name]))

    data = DataConfig()
    if cp.has_section("data"):
        d = cp["data"]
        data = DataConfig(
            path=d.get("path"),
            y=d.get("y", "y"),
            x=_list(d.get("x", "")),
            rate=d.get("rate"),
            thresholds=tuple(float(v) for v in _list(d.get("thresholds", "-0.25, 0, 0.25"))),
        )

    test = TestConfig()
    if cp.has_section("test"):
        t = cp["test"]
        plan = StatPlan(
            columns=_list(t.get("columns", ", ".join(DEFAULT_COLUMNS))),
            norms=_list(t.get("norms", ", ".join(NORMS))),
            cvm_mode=t.get("cvm_mode", "auto"),
        )
        test = TestConfig(plan=plan, B=t.getint("B", 199), alpha=t.getfloat("alpha", 0.05), burn_in=t.getint("burn_in", 0))

    mc = MCConfig()
    if cp.has_section("mc"):
        m = cp["mc"]
        mc = MCConfig(scenarios=_list(m.get("scenarios", "size1")), R=m.getint("R", 500), T=m.getint("T", 100))
        for s in mc.scenarios:
            if s not in BUILTIN_SCENARIOS:
                raise ConfigError(f"unknown scenario {s!r}; choose from {sorted(BUILTIN_SCENARIOS)}")

    run = cp["run"] if cp.has_section("run") else {}
    seed = run.get("seed") if run else None
    return RunConfig(
        models=tuple(models),
        data=data,
        test=test,
        mc=mc,
        seed=int(seed) if seed is not None else None,
        threads=int(run.get("threads", 1)) if run else 1,
        simulate_T=int(run["T"]) if run and "T" in run else None,
    )


def load_config(path) -> RunConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file {p} not found")
    cfg = parse_config(p.read_text())
    # a relative data path is read next to the config file
    if cfg.data.path and not Path(cfg.data.path).is_absolute():
        cfg = replace(cfg, data=replace(cfg.data, path=str(p.parent / cfg.data.path)))
    return cfg


def load_series(cfg: RunConfig, model: ModelConfig, mapping_out=None) -> ObservationSeries:
    d = cfg.data
    if not d.path:
        raise ConfigError("[data] path is required")
    return ingest_csv(
        d.path,
        y=d.y,
        x=d.x,
        K=model.spec.K,
        counts=model.spec.family == "poisson",
        rate=d.rate,
        thresholds=d.thresholds,
        mapping_out=mapping_out,
    )


# ---------------------------------------------------------------------------
# Table emission
# ---------------------------------------------------------------------------


def _fmt(v: float, digits: int = 4) -> str:
    return "nan" if not np.isfinite(v) else f"{v:.{digits}f}"


def csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def aligned_text(header: list[str], rows: list[list]) -> str:
    cells = [header] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    return "\n".join(lines) + "\n"


def emit_tables(out: str | None, stem: str, header, rows, text: str) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    (d / f"{stem}.csv").write_text(csv_text(header, rows))
    (d / f"{stem}.txt").write_text(text)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _require_seed(cfg: RunConfig, seed: int | None) -> int:
    s = seed if seed is not None else cfg.seed
    if s is None:
        raise ConfigError("a seed is required (--seed or [run] seed)")
    return int(s)


def run_fit(cfg: RunConfig) -> list[tuple[str, FitResult]]:
    if not cfg.models:
        raise ConfigError("no [model] section")
    out = []
    for m in cfg.models:
        series = load_series(cfg, m)
        out.append((m.name, fit_mle(m.spec, series)))
    return out


def fit_tables(fits) -> tuple[list[str], list[list], str]:
    header = ["model", "parameter", "estimate", "se", "loglik", "converged", "iterations"]
    rows = []
    for name, f in fits:
        for pname, est, se in f.table():
            rows.append([name, pname, _fmt(est, 6), _fmt(se, 6), _fmt(f.loglik, 6), int(f.converged), f.iterations])
    return header, rows, aligned_text(header, rows)


def run_test(cfg: RunConfig, seed: int, threads: int = 1, out: str | None = None) -> list[tuple[str, BootstrapResult]]:
    """Bootstrap every configured model; one result per model."""
    if not cfg.models:
        raise ConfigError("no [model] section")
    results = []
    for m in cfg.models:
        mapping = Path(out) / f"category_map_{m.name}.json" if out and m.spec.family == "ordered" else None
        if mapping is not None:
            mapping.parent.mkdir(parents=True, exist_ok=True)
        series = load_series(cfg, m, mapping_out=mapping)
        res = parametric_bootstrap(
            series,
            m.spec,
            cfg.test.plan,
            B=cfg.test.B,
            alpha=cfg.test.alpha,
            seed=seed,
            burn_in=cfg.test.burn_in,
            n_jobs=threads,
        )
        if res.unreliable:
            log.warning("model %s: %d of %d bootstrap refits failed", m.name, res.n_failed, res.B)
        results.append((m.name, res))
    return results


def test_tables(results) -> tuple[list[str], list[list], str]:
    header = ["model", "column", "norm", "statistic", "critical", "pvalue", "B", "B_ok", "alpha", "seed"]
    rows = []
    for name, r in results:
        for (col, norm), s, c, p in zip(r.labels, r.observed, r.critical, r.pvalues):
            rows.append([name, col, norm, _fmt(s), _fmt(c), _fmt(p), r.B, r.replicates.shape[0], r.alpha, r.seed])
    # wide layout: rows are models, columns are the statistics, one block per norm
    blocks = []
    for norm in NORMS:
        cols = list(dict.fromkeys(c for _, r in results for c, n in r.labels if n == norm))
        if not cols:
            continue
        wide_header = [f"p-value ({norm})"] + cols + ["B", "seed"]
        wide_rows = []
        for name, r in results:
            lookup = dict(zip(r.labels, r.pvalues))
            wide_rows.append([name] + [_fmt(lookup.get((c, norm), np.nan), 3) for c in cols] + [r.B, r.seed])
        blocks.append(aligned_text(wide_header, wide_rows))
    return header, rows, "\n".join(blocks)


def run_mc(cfg: RunConfig, seed: int, threads: int = 1) -> list[WarpResult]:
    if cfg.mc.R < WIDE_CI_R:
        half = 1.96 * np.sqrt(0.05 * 0.95 / cfg.mc.R)
        log.warning("R=%d: rejection rates carry a 95%% half-width of about %.1f points at a 5%% level", cfg.mc.R, 100 * half)
    out = []
    for i, name in enumerate(cfg.mc.scenarios):
        sc = get_scenario(name, cfg.mc.T)
        # each scenario gets its own stream so adding scenarios does not shift the others
        sc_seed = int(np.random.SeedSequence([seed, i]).generate_state(1)[0])
        out.append(warp_mc(sc, cfg.mc.R, sc_seed, plan=cfg.test.plan, alpha=cfg.test.alpha, n_jobs=threads))
    return out


def mc_tables(results: list[WarpResult], T: int) -> tuple[list[str], list[list], str]:
    header = ["scenario", "column", "norm", "rejection_pct", "mc_se_pct", "critical", "R", "R_ok", "T", "alpha", "seed"]
    rows = []
    for r in results:
        for (col, norm), rej, se, c in zip(r.labels, r.rejection, r.mc_se, r.critical):
            rows.append([r.scenario, col, norm, _fmt(100 * rej, 1), _fmt(100 * se, 1), _fmt(c), r.R, r.observed.shape[0], T, r.alpha, r.seed])
    blocks = []
    for norm in NORMS:
        cols = list(dict.fromkeys(c for r in results for c, n in r.labels if n == norm))
        if not cols:
            continue
        wide_rows = []
        for r in results:
            lookup = dict(zip(r.labels, r.rejection))
            wide_rows.append(
                [r.scenario] + [_fmt(100 * lookup.get((c, norm), np.nan), 1) for c in cols] + [r.R, T, r.seed]
            )
        blocks.append(aligned_text([f"reject % ({norm})"] + cols + ["R", "T", "seed"], wide_rows))
    return header, rows, "\n".join(blocks)


def run_simulate(cfg: RunConfig, seed: int) -> ObservationSeries:
    if not cfg.models:
        raise ConfigError("no [model] section")
    m = cfg.models[0]
    if m.theta is None:
        raise ConfigError(f"[model.{m.name}] needs theta for simulate")
    rng = np.random.default_rng(seed)
    if cfg.data.path:
        x = load_series(cfg, m).x
    else:
        T = cfg.simulate_T or cfg.mc.T
        spec, n = m.spec, len(m.theta)
        if spec.family == "ordered":
            p = n - int(spec.dynamic) - (spec.K - 1)
        elif spec.link == "identity-ar":
            p = 0
        else:
            p = n - int(spec.link == "log-ar")
        sc = get_scenario("size1")
        x = sc.covariates(T, rng)[:, :p] if p <= sc.p else rng.standard_normal((T, p))
    return simulate(m.spec, np.asarray(m.theta), x, rng)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="discrete-gof", description="Goodness-of-fit tests for discrete response models")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("fit", "fit the configured models by maximum likelihood"),
        ("test", "bootstrap p-values for the configured statistics"),
        ("simulate", "simulate a series from a configured model"),
        ("mc", "warp-bootstrap size/power study over built-in scenarios"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="INI configuration file")
        p.add_argument("--seed", type=int, default=None, help="master seed (overrides [run] seed)")
        p.add_argument("--threads", type=int, default=None, help="worker processes (default: all cores)")
        p.add_argument("--out", default=None, help="output directory (default: print to stdout)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = load_config(args.config)
        threads = args.threads if args.threads is not None else (cfg.threads or os.cpu_count() or 1)
        status = EXIT_OK
        if args.command == "fit":
            fits = run_fit(cfg)
            emit_tables(args.out, "fit", *fit_tables(fits))
            if not all(f.converged for _, f in fits):
                status = EXIT_NUMERICAL
        elif args.command == "test":
            seed = _require_seed(cfg, args.seed)
            results = run_test(cfg, seed, threads, args.out)
            emit_tables(args.out, "test", *test_tables(results))
            if any(r.unreliable for _, r in results):
                status = EXIT_NUMERICAL
        elif args.command == "simulate":
            seed = _require_seed(cfg, args.seed)
            series = run_simulate(cfg, seed)
            text = series_csv(series, counts=cfg.models[0].spec.family == "poisson")
            if args.out:
                Path(args.out).mkdir(parents=True, exist_ok=True)
                (Path(args.out) / "simulated.csv").write_text(text)
            else:
                sys.stdout.write(text)
        else:
            seed = _require_seed(cfg, args.seed)
            results = run_mc(cfg, seed, threads)
            emit_tables(args.out, "mc", *mc_tables(results, cfg.mc.T))
            if any(r.n_failed > 0.05 * r.R for r in results):
                log.warning("more than 5% of replications failed to fit in at least one scenario")
                status = EXIT_NUMERICAL
        return status
    except (ConvergenceError, InvalidStateError, InvalidLikelihoodError, np.linalg.LinAlgError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    except (DiscreteGofError, ValueError, KeyError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
