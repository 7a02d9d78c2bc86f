"""Command-line entry point: experiment orchestration, CSV and manifest
emission, and the acceptance-suite runner.

Commands: fig2 (per-port SIR CDFs), fig3 (cross-port SIR correlation),
fig4 (selection outage with bounds), fig5 (asymptotic overlays),
sweep (outage over a parameter grid), validate (acceptance suite).

Every run writes one CSV per curve family plus a manifest that pins the
configuration, seed, sample counts, and counters needed to reproduce the
CSVs byte for byte.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from dataclasses import dataclass, field, fields

import numpy as np

from . import __version__
from .acceptance import run_all_criteria
from .analytic_stats import (
    asymptote_small_gamma,
    asymptote_tail,
    betaprime_cdf,
    betaprime_params,
    betaprime_sf,
)
from .channel_geom import SystemConfig
from .mc_engine import (
    resolve_workers,
    run_cdf_experiment,
    run_correlation_experiment,
    run_outage_experiment,
)

_CONFIG_KEYS = {
    "M": int,
    "U": int,
    "N": int,
    "W": float,
    "scheme": str,
    "seed": int,
    "realizations": int,
    "reference_mode": str,
    "include_reference_in_selection": bool,
    "beta": tuple,
    "powers": tuple,
}

_FIG5_GRID = np.logspace(-3.0, 3.0, 241)
_Z95 = 1.959963984540054


class ConfigError(ValueError):
    pass


def _parse_value(key: str, raw: str):
    kind = _CONFIG_KEYS[key]
    try:
        if kind is bool:
            lowered = raw.strip().lower()
            if lowered in ("true", "1", "yes"):
                return True
            if lowered in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        if kind is tuple:
            return tuple(float(v) for v in raw.split(","))
        return kind(raw)
    except ValueError as exc:
        raise ConfigError(f"config key {key!r}: cannot parse value {raw!r}") from exc


def parse_config(path: str | None = None, overrides: dict | None = None) -> SystemConfig:
    """Read `key = value` lines (with # comments), then apply flag overrides."""
    values: dict = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                stripped = line.split("#", 1)[0].strip()
                if not stripped:
                    continue
                if "=" not in stripped:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, raw = (part.strip() for part in stripped.split("=", 1))
                if key not in _CONFIG_KEYS:
                    raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
                values[key] = _parse_value(key, raw)
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        values[key] = val
    try:
        return SystemConfig(**values)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass
class RunManifest:
    """Everything needed to regenerate a run's CSVs byte for byte."""

    command: str
    config: SystemConfig
    workers: int
    experiments: list = field(default_factory=list)  # (name, key, value) rows
    outputs: list = field(default_factory=list)
    wall_seconds: float = 0.0

    def write(self, path: str) -> None:
        cfg = self.config
        lines = [
            "fama-lab run manifest",
            f"version: {__version__}",
            f"command: {self.command}",
            f"seed: {cfg.seed}",
        ]
        for f in fields(cfg):
            if f.name == "seed":
                continue
            lines.append(f"config.{f.name}: {getattr(cfg, f.name)}")
        lines.append(f"config.reference_mode_resolved: {cfg.resolved_reference_mode()}")
        lines.append(f"workers: {self.workers}")
        lines.extend(f"experiment.{name}.{key}: {value}"
                     for name, key, value in self.experiments)
        lines.append(f"outputs: {', '.join(self.outputs)}")
        lines.append(f"wall_seconds: {self.wall_seconds:.3f}")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def write_curve_csv(path: str, rows: list[tuple]) -> None:
    """Gamma-indexed curve family: one row per (gamma, curve) pair."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("gamma,gamma_db,value,ci_low,ci_high,curve_id\n")
        for gamma, value, ci_low, ci_high, curve_id in rows:
            gamma_db = 10.0 * math.log10(gamma)
            fh.write(
                f"{_fmt(gamma)},{_fmt(gamma_db)},{_fmt(value)},"
                f"{_fmt(ci_low)},{_fmt(ci_high)},{curve_id}\n"
            )


def write_pair_csv(path: str, rows: list[tuple]) -> None:
    """Port-pair-indexed curve family: one row per (pair, curve)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("port_k,port_l,value,ci_low,ci_high,curve_id\n")
        for k, l, value, ci_low, ci_high, curve_id in rows:
            fh.write(f"{k},{l},{_fmt(value)},{_fmt(ci_low)},{_fmt(ci_high)},{curve_id}\n")


def _analytic_rows(grid, values, curve_id):
    return [(g, v, v, v, curve_id) for g, v in zip(grid, values)]


def _empirical_rows(grid, p, n, curve_id):
    ci = _Z95 * np.sqrt(p * (1.0 - p) / n)
    return [
        (g, v, max(0.0, v - c), min(1.0, v + c), curve_id)
        for g, v, c in zip(grid, p, ci)
    ]


def _config_for_scheme(config: SystemConfig, scheme: str) -> SystemConfig:
    if config.scheme == scheme:
        return config
    if scheme == "ZF" and config.M < config.U:
        return None
    return SystemConfig(
        M=config.M, U=config.U, N=config.N, W=config.W, scheme=scheme,
        beta=config.beta, powers=config.powers,
        reference_mode=config.reference_mode,
        include_reference_in_selection=config.include_reference_in_selection,
        seed=config.seed, realizations=config.realizations,
    )


def run_fig2(config: SystemConfig, out_dir: str, workers: int,
             manifest: RunManifest) -> None:
    for scheme in ("MRT", "ZF"):
        cfg = _config_for_scheme(config, scheme)
        if cfg is None:
            continue
        rows = []
        marginal = run_cdf_experiment(cfg, mode="marginal", workers=workers)
        physical = run_cdf_experiment(cfg, mode="physical_reference", workers=workers)
        rows += _analytic_rows(marginal.gamma_grid, marginal.analytic, "analytic_cdf")
        rows += _empirical_rows(marginal.gamma_grid, marginal.empirical.values(),
                                marginal.realizations, "empirical_marginal")
        rows += _empirical_rows(physical.gamma_grid, physical.empirical.values(),
                                physical.realizations, "empirical_physical_reference")
        name = f"fig2_{scheme.lower()}.csv"
        write_curve_csv(os.path.join(out_dir, name), rows)
        manifest.outputs.append(name)
        tag = f"fig2_{scheme.lower()}"
        manifest.experiments += [
            (tag, "marginal_realizations", marginal.realizations),
            (tag, "physical_realizations", physical.realizations),
            (tag, "resampled", physical.resampled_count),
            (tag, "infinite", physical.infinite_count),
        ]
        print(f"fig2 {scheme}: KS marginal={marginal.ks:.5f} "
              f"physical_reference={physical.ks:.5f}")


def run_fig3(config: SystemConfig, out_dir: str, workers: int,
             manifest: RunManifest) -> None:
    for scheme in ("MRT", "ZF"):
        cfg = _config_for_scheme(config, scheme)
        if cfg is None:
            continue
        res = run_correlation_experiment(cfg, workers=workers)
        rows = []
        p = len(res.ports)
        for i in range(p):
            for j in range(i + 1, p):
                k, l = int(res.ports[i]), int(res.ports[j])
                v = res.empirical.matrix[i, j]
                rows.append((k, l, v, v, v, "empirical_rho_x"))
                o = res.overlay[i, j]
                rows.append((k, l, o, o, o, "analytic_rho_x"))
        name = f"fig3_{scheme.lower()}.csv"
        write_pair_csv(os.path.join(out_dir, name), rows)
        manifest.outputs.append(name)
        tag = f"fig3_{scheme.lower()}"
        manifest.experiments += [
            (tag, "realizations", res.realizations),
            (tag, "reference_mode", res.reference_mode),
            (tag, "dropped_rows", res.empirical.n_dropped),
            (tag, "resampled", res.resampled_count),
        ]
        print(f"fig3 {scheme}: max |empirical - analytic| = "
              f"{res.max_abs_deviation:.4f} ({res.reference_mode} mode)")


def _outage_rows(res) -> list[tuple]:
    rows = []
    rows += _empirical_rows(res.gamma_grid, res.correlated, res.realizations,
                            "empirical_correlated")
    rows += _empirical_rows(res.gamma_grid, res.iid, res.realizations,
                            "empirical_iid")
    rows += _analytic_rows(res.gamma_grid, res.upper, "upper_bound")
    rows += _analytic_rows(res.gamma_grid, res.lower, "lower_bound")
    rows += _analytic_rows(res.gamma_grid, res.iid_analytic, "iid_benchmark")
    rows += _analytic_rows(res.gamma_grid, res.large_n, "large_n_approx")
    rows += _analytic_rows(res.gamma_grid, res.single_port, "single_port")
    return rows


def run_fig4(config: SystemConfig, out_dir: str, workers: int,
             manifest: RunManifest, name_suffix: str = "") -> None:
    for scheme in ("MRT", "ZF"):
        cfg = _config_for_scheme(config, scheme)
        if cfg is None:
            continue
        res = run_outage_experiment(cfg, workers=workers)
        name = f"fig4_{scheme.lower()}{name_suffix}.csv"
        write_curve_csv(os.path.join(out_dir, name), _outage_rows(res))
        manifest.outputs.append(name)
        tag = f"fig4_{scheme.lower()}{name_suffix}"
        ports = [int(p) for p in res.selection_ports]
        manifest.experiments += [
            (tag, "realizations", res.realizations),
            (tag, "reference_mode", res.reference_mode),
            (tag, "selection_ports", ports),
            (tag, "resampled", res.resampled_count),
            (tag, "infinite", res.infinite_count),
        ]
        print(f"fig4 {scheme}: {res.reference_mode} mode, "
              f"selection ports {ports}, infinite SIRs {res.infinite_count}")


def run_fig5(config: SystemConfig, out_dir: str, workers: int,
             manifest: RunManifest) -> None:
    grid = _FIG5_GRID
    for scheme in ("MRT", "ZF"):
        cfg = _config_for_scheme(config, scheme)
        if cfg is None:
            continue
        params = betaprime_params(cfg.scheme, cfg.M, cfg.U)
        emp = run_cdf_experiment(cfg, mode="marginal", gamma_grid=grid,
                                 workers=workers)
        rows = []
        f = np.array([betaprime_cdf(g, params) for g in grid])
        sf = np.array([betaprime_sf(g, params) for g in grid])
        small = np.array(
            [asymptote_small_gamma(g, cfg.scheme, cfg.M, cfg.U) for g in grid]
        )
        tail = np.array([asymptote_tail(g, params) for g in grid])
        rows += _analytic_rows(grid, f, "analytic_cdf")
        rows += _analytic_rows(grid, sf, "analytic_sf")
        rows += _analytic_rows(grid, small, "small_gamma_asymptote")
        rows += _analytic_rows(grid, tail, "tail_asymptote")
        rows += _empirical_rows(grid, 1.0 - emp.empirical.values(),
                                emp.realizations, "empirical_sf")
        name = f"fig5_{scheme.lower()}.csv"
        write_curve_csv(os.path.join(out_dir, name), rows)
        manifest.outputs.append(name)
        manifest.experiments.append(
            (f"fig5_{scheme.lower()}", "realizations", emp.realizations)
        )
        print(f"fig5 {scheme}: grid {len(grid)} points, "
              f"marginal n={emp.realizations}")


def run_sweep(config: SystemConfig, out_dir: str, workers: int,
              manifest: RunManifest, grids: dict) -> None:
    for scheme in grids["scheme"]:
        for M in grids["M"]:
            for U in grids["U"]:
                if scheme == "ZF" and M < U:
                    print(f"sweep: skipping ZF M={M} < U={U}")
                    continue
                for N in grids["N"]:
                    for W in grids["W"]:
                        cfg = SystemConfig(
                            M=M, U=U, N=N, W=W, scheme=scheme,
                            seed=config.seed, realizations=config.realizations,
                            reference_mode=config.reference_mode,
                        )
                        res = run_outage_experiment(cfg, workers=workers)
                        name = (f"sweep_{scheme.lower()}_M{M}_U{U}_N{N}_"
                                f"W{W:g}.csv")
                        write_curve_csv(os.path.join(out_dir, name),
                                        _outage_rows(res))
                        manifest.outputs.append(name)
                        manifest.experiments.append(
                            (name[:-4], "realizations", res.realizations)
                        )
                        print(f"sweep: wrote {name}")


def run_validate(config: SystemConfig, out_dir: str | None) -> int:
    results = run_all_criteria(seed=config.seed)
    width = max(len(r.name) for r in results)
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"[{r.index:2d}] {r.name:<{width}} {status:4s} "
                     f"({r.seconds:6.1f}s)  {r.detail}")
    table = "\n".join(lines)
    print(table)
    failed = [r.index for r in results if not r.passed]
    summary = (f"{len(results) - len(failed)}/{len(results)} criteria passed"
               + (f"; FAILED: {failed}" if failed else ""))
    print(summary)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "validate_report.txt"), "w",
                  encoding="utf-8") as fh:
            fh.write(table + "\n" + summary + "\n")
    return 1 if failed else 0


def _split_list(raw: str | None, kind, fallback):
    if raw is None:
        return [fallback]
    return [kind(v) for v in str(raw).split(",")]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fama-lab",
        description="Fluid-antenna multiple access statistics laboratory",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in [
        ("fig2", "per-port SIR CDFs: simulated vs analytic"),
        ("fig3", "cross-port SIR correlation vs analytic overlay"),
        ("fig4", "FAMA selection outage with analytic bounds"),
        ("fig5", "small/large-SIR asymptotic overlays"),
        ("sweep", "outage experiments over a parameter grid"),
        ("validate", "run the acceptance suite"),
    ]:
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", help="plain-text key = value config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--realizations", type=int)
        p.add_argument("--scheme", choices=["MRT", "ZF"])
        p.add_argument("--M", type=int)
        p.add_argument("--U", type=int)
        p.add_argument("--N", type=int)
        p.add_argument("--W", type=float)
        p.add_argument("--reference-mode", choices=["member", "external"],
                       dest="reference_mode")
        p.add_argument("--out", default="fama_lab_out", help="output directory")
        if name == "sweep":
            for flag in ("M", "U", "N", "W", "scheme"):
                p.add_argument(f"--sweep-{flag}", dest=f"sweep_{flag}",
                               help=f"comma list of {flag} values")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        key: getattr(args, key)
        for key in ("M", "U", "N", "W", "scheme", "seed", "realizations",
                    "reference_mode")
        if getattr(args, key, None) is not None
    }
    try:
        config = parse_config(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        return run_validate(config, args.out)

    workers = resolve_workers(None)
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    manifest = RunManifest(command=args.command, config=config, workers=workers)
    start = time.monotonic()
    try:
        if args.command == "fig2":
            run_fig2(config, out_dir, workers, manifest)
        elif args.command == "fig3":
            run_fig3(config, out_dir, workers, manifest)
        elif args.command == "fig4":
            run_fig4(config, out_dir, workers, manifest)
        elif args.command == "fig5":
            run_fig5(config, out_dir, workers, manifest)
        elif args.command == "sweep":
            grids = {
                "M": _split_list(args.sweep_M, int, config.M),
                "U": _split_list(args.sweep_U, int, config.U),
                "N": _split_list(args.sweep_N, int, config.N),
                "W": _split_list(args.sweep_W, float, config.W),
                "scheme": _split_list(args.sweep_scheme, str, config.scheme),
            }
            run_sweep(config, out_dir, workers, manifest, grids)
    except Exception as exc:
        # Remove partial outputs so a failed run leaves no half-written files.
        for name in manifest.outputs:
            path = os.path.join(out_dir, name)
            if os.path.exists(path):
                os.remove(path)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    manifest.wall_seconds = time.monotonic() - start
    manifest.write(os.path.join(out_dir, "manifest.txt"))
    print(f"wrote {len(manifest.outputs)} file(s) + manifest.txt to {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
