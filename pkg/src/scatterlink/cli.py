"""Command-line front end: figure-data regeneration and one-shot queries.

Subcommands
-----------
fig2     truncation and bound relative-error tables versus series length
fig3     outage versus average SNR (exact, asymptote, optional Monte Carlo)
fig4     outage versus tag-to-reader distance for two SNR settings
eval     one outage evaluation printed as a JSON record
selftest oracle-agreement suite, exits nonzero on any disagreement

Every figure command reads an optional TOML scenario (--config), applies
flag overrides, evaluates its sweep, and writes <prefix>_<command>.<ext>
plus a matching <prefix>_<command>_plot.py rendering script into --out-dir.
Given the same scenario and seed the outputs are byte-identical across
runs. Exit codes: 0 success, 2 usage, 3 convergence failure, 4 domain or
configuration error.
"""
from __future__ import annotations

import argparse
import csv
import importlib.resources
import io
import json
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .model import (
    ABSORBING,
    REFLECTING,
    OutageQuery,
    ScenarioParams,
    channel_pdf,
    db_to_linear,
    derive_effective,
    product_pdf,
    snr_pdf,
)
from .oracle import (
    McConfig,
    mc_outage,
    quad_convolution_pdf,
    quad_outage,
    sample_effective_channel,
)
from .outage import (
    InfeasibleTargetError,
    UnboundedDistanceError,
    diversity_gain_estimate,
    max_distance_for_outage,
    outage_asymptotic,
    outage_exact,
    outage_partial_sum,
    truncation_bound,
)
from . import specfun
from .specfun import Accuracy, ConvergenceError, DomainError

__all__ = ["Scenario", "SweepSpec", "load_scenario", "main"]

_AXES = ("snr_db", "d_tr", "threshold_db", "terms")


@dataclass(frozen=True)
class SweepSpec:
    """One sweep axis with an inclusive linear grid."""

    axis: str
    lo: float
    hi: float
    n_points: int

    def __post_init__(self) -> None:
        if self.axis not in _AXES:
            raise DomainError(f"unknown sweep axis {self.axis!r}; expected one of {_AXES}")
        if not self.lo < self.hi:
            raise DomainError(f"sweep needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.n_points < 2:
            raise DomainError(f"sweep needs n_points >= 2, got {self.n_points}")

    def grid(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n_points)


@dataclass(frozen=True)
class Scenario:
    """Everything a figure command needs, assembled from TOML plus flags."""

    params: ScenarioParams
    sweeps: tuple[SweepSpec, ...]
    thresholds_db: tuple[float, ...]
    rho_bars_db: tuple[float, ...]
    abs_tol: float
    accuracy: Accuracy
    mc: McConfig
    mc_enabled: bool
    out_format: str
    prefix: str

    def __post_init__(self) -> None:
        if self.out_format not in ("csv", "json"):
            raise DomainError(f"output format must be csv or json, got {self.out_format!r}")
        if not self.prefix:
            raise DomainError("output prefix must be non-empty")
        if not self.abs_tol > 0:
            raise DomainError(f"query abs_tol must be positive, got {self.abs_tol}")
        if not self.thresholds_db:
            raise DomainError("at least one threshold_db is required")
        if not self.rho_bars_db:
            raise DomainError("at least one rho_bar_db is required")

    def sweep(self, axis: str) -> SweepSpec:
        for sweep in self.sweeps:
            if sweep.axis == axis:
                return sweep
        raise DomainError(f"scenario defines no sweep over {axis!r}")

    def query(self, rho_t_db: float, rho_bar_db: float) -> OutageQuery:
        return OutageQuery(rho_t_db=rho_t_db, rho_bar_db=rho_bar_db,
                           abs_tol=self.abs_tol)


def _builtin_config(command: str) -> dict:
    """Built-in scenario presets; the files under scenarios/ mirror these."""
    base = {
        "params": {"eta": 0.7, "var_sr_raw": 1.0, "var_st_raw": 1.0,
                   "var_tr_raw": 3.0, "d_sr": 1.0, "d_st": 1.0, "d_tr": 1.0,
                   "alpha": 3.0},
        "query": {"thresholds_db": [2.0, 15.0], "rho_bars_db": [3.0],
                  "abs_tol": 1e-9},
        "accuracy": {"abs_tol": 1e-12, "max_terms": 200, "max_quad_nodes": 4096},
        "mc": {"enabled": False, "n_samples": 1_000_000, "seed": 20260816,
               "batch_size": 250_000},
        "sweep": [],
        "output": {"format": "csv", "prefix": "ref"},
    }
    if command == "fig2":
        base["query"]["thresholds_db"] = [-3.0, 7.0]
        base["sweep"] = [{"axis": "terms", "lo": 0, "hi": 15, "n_points": 16}]
    elif command == "fig3":
        base["mc"]["enabled"] = True
        base["sweep"] = [{"axis": "snr_db", "lo": 0.0, "hi": 40.0, "n_points": 21}]
    elif command == "fig4":
        base["params"].update({"d_sr": 20.0, "d_st": 20.0})
        base["query"]["thresholds_db"] = [2.0]
        base["query"]["rho_bars_db"] = [10.0, 20.0]
        # the normalized threshold is large here, so the series needs far
        # more terms than the default budget
        base["accuracy"]["max_terms"] = 2000
        base["sweep"] = [{"axis": "d_tr", "lo": 0.5, "hi": 10.0, "n_points": 96}]
    elif command != "eval":
        raise DomainError(f"no builtin scenario for command {command!r}")
    return base


def _deep_merge(base: dict, override: dict) -> dict:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _build_scenario(data: dict) -> Scenario:
    params = ScenarioParams(**data["params"])
    sweeps = tuple(SweepSpec(**entry) for entry in data.get("sweep", []))
    query = data["query"]
    accuracy = Accuracy(**data["accuracy"])
    mc_data = dict(data["mc"])
    mc_enabled = bool(mc_data.pop("enabled", False))
    mc = McConfig(**mc_data)
    output = data["output"]
    return Scenario(
        params=params,
        sweeps=sweeps,
        thresholds_db=tuple(float(t) for t in query["thresholds_db"]),
        rho_bars_db=tuple(float(r) for r in query["rho_bars_db"]),
        abs_tol=float(query["abs_tol"]),
        accuracy=accuracy,
        mc=mc,
        mc_enabled=mc_enabled,
        out_format=str(output["format"]),
        prefix=str(output["prefix"]),
    )


def load_scenario(command: str, config_path: str | None = None,
                  args: argparse.Namespace | None = None) -> Scenario:
    """Assemble the scenario: builtin preset, then TOML file, then flags."""
    data = _builtin_config(command)
    if config_path is not None:
        with open(config_path, "rb") as fh:
            data = _deep_merge(data, tomllib.load(fh))
    if args is not None:
        if getattr(args, "seed", None) is not None:
            data["mc"]["seed"] = args.seed
        if getattr(args, "mc_samples", None) is not None:
            data["mc"]["n_samples"] = args.mc_samples
        if getattr(args, "tol", None) is not None:
            data["query"]["abs_tol"] = args.tol
        if getattr(args, "mc", None) is not None:
            data["mc"]["enabled"] = args.mc
        if getattr(args, "out_format", None) is not None:
            data["output"]["format"] = args.out_format
        if getattr(args, "prefix", None) is not None:
            data["output"]["prefix"] = args.prefix
    return _build_scenario(data)


# ---------------------------------------------------------------------------
# table builders

FIG2_COLUMNS = ("threshold_db", "n_terms", "rel_err_truncation", "rel_err_bound")
FIG3_COLUMNS = ("snr_db", "threshold_db", "po_exact_b0", "po_exact_b1",
                "po_asym_b0", "po_asym_b1", "po_mc_b0", "po_mc_b1",
                "mc_stderr_b0", "mc_stderr_b1")
FIG4_COLUMNS = ("rho_bar_db", "d_tr", "po_b0", "po_b1")


def build_fig2_rows(scenario: Scenario) -> list[dict]:
    """Relative truncation error and relative bound versus series length."""
    sweep = scenario.sweep("terms")
    terms = [int(t) for t in sweep.grid()]
    if [float(t) for t in terms] != list(sweep.grid()):
        raise DomainError("terms sweep must land on integers")
    eff = derive_effective(scenario.params)
    rho_bar_db = scenario.rho_bars_db[0]
    rows = []
    for threshold_db in scenario.thresholds_db:
        query = scenario.query(threshold_db, rho_bar_db)
        exact = quad_outage(query, REFLECTING, eff, scenario.accuracy)
        for n_terms in terms:
            partial = outage_partial_sum(n_terms, query, eff, scenario.accuracy)
            bound = truncation_bound(n_terms, query, eff, scenario.accuracy)
            rows.append({
                "threshold_db": threshold_db,
                "n_terms": n_terms,
                "rel_err_truncation": abs(exact - partial) / exact,
                "rel_err_bound": bound / exact,
            })
    return rows


def build_fig3_rows(scenario: Scenario) -> list[dict]:
    """Outage versus average SNR: exact, asymptote, optional Monte Carlo."""
    sweep = scenario.sweep("snr_db")
    eff = derive_effective(scenario.params)
    rows = []
    for threshold_db in scenario.thresholds_db:
        for snr_db in sweep.grid():
            query = scenario.query(threshold_db, float(snr_db))
            row = {"snr_db": float(snr_db), "threshold_db": threshold_db}
            for state, tag in ((ABSORBING, "b0"), (REFLECTING, "b1")):
                row[f"po_exact_{tag}"] = outage_exact(
                    query, state, eff, scenario.accuracy).value
                row[f"po_asym_{tag}"] = outage_asymptotic(
                    query, state, eff, scenario.accuracy)
                if scenario.mc_enabled:
                    est = mc_outage(query, state, eff, scenario.mc)
                    row[f"po_mc_{tag}"] = est.p_hat
                    row[f"mc_stderr_{tag}"] = est.stderr
                else:
                    row[f"po_mc_{tag}"] = None
                    row[f"mc_stderr_{tag}"] = None
            rows.append(row)
    return rows


def build_fig4_rows(scenario: Scenario) -> list[dict]:
    """Outage versus tag-to-reader distance, one block per SNR setting."""
    sweep = scenario.sweep("d_tr")
    threshold_db = scenario.thresholds_db[0]
    rows = []
    for rho_bar_db in scenario.rho_bars_db:
        for d_tr in sweep.grid():
            params = replace(scenario.params, d_tr=float(d_tr))
            eff = derive_effective(params)
            query = scenario.query(threshold_db, rho_bar_db)
            rows.append({
                "rho_bar_db": rho_bar_db,
                "d_tr": float(d_tr),
                "po_b0": outage_exact(query, ABSORBING, eff,
                                      scenario.accuracy).value,
                "po_b1": outage_exact(query, REFLECTING, eff,
                                      scenario.accuracy).value,
            })
    return rows


# ---------------------------------------------------------------------------
# emission

def _format_cell(value) -> str:
    if value is None:
        return ""
    return str(value)


def write_csv(path: Path, columns: tuple[str, ...], rows: list[dict]) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, quoting=csv.QUOTE_MINIMAL)
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format_cell(row[c]) for c in columns])
    path.write_bytes(buffer.getvalue().encode("utf-8"))


def write_json(path: Path, command: str, columns: tuple[str, ...],
               rows: list[dict]) -> None:
    ordered = [{c: row[c] for c in columns} for row in rows]
    document = {"command": command, "columns": list(columns), "rows": ordered}
    path.write_bytes((json.dumps(document, indent=2, allow_nan=False) + "\n")
                     .encode("utf-8"))


_PLOT_HEADER = """\
#!/usr/bin/env python3
# Rendering template for {name}. Generated alongside the data file;
# edit freely, regeneration overwrites.
import json

import matplotlib.pyplot as plt


def load_rows(path):
    if path.endswith(".json"):
        with open(path) as fh:
            return json.load(fh)["rows"]
    import csv
    with open(path, newline="") as fh:
        rows = []
        for row in csv.DictReader(fh):
            rows.append({{k: (float(v) if v else None) for k, v in row.items()}})
        return rows


rows = load_rows("{datafile}")
"""

_PLOT_BODIES = {
    "fig2": """\
fig, ax = plt.subplots()
for threshold in sorted({r["threshold_db"] for r in rows}):
    sub = [r for r in rows if r["threshold_db"] == threshold]
    t = [r["n_terms"] for r in sub]
    ax.semilogy(t, [r["rel_err_truncation"] for r in sub],
                marker="o", label=f"truncation, threshold {threshold:g} dB")
    ax.semilogy(t, [r["rel_err_bound"] for r in sub],
                marker="s", linestyle="--", label=f"bound, threshold {threshold:g} dB")
ax.set_xlabel("number of series terms T")
ax.set_ylabel("relative error")
ax.grid(True, which="both", alpha=0.3)
ax.legend()
fig.tight_layout()
plt.show()
""",
    "fig3": """\
fig, ax = plt.subplots()
for threshold in sorted({r["threshold_db"] for r in rows}):
    sub = [r for r in rows if r["threshold_db"] == threshold]
    snr = [r["snr_db"] for r in sub]
    ax.semilogy(snr, [r["po_exact_b0"] for r in sub], label=f"exact B=0, {threshold:g} dB")
    ax.semilogy(snr, [r["po_exact_b1"] for r in sub], label=f"exact B=1, {threshold:g} dB")
    ax.semilogy(snr, [r["po_asym_b0"] for r in sub], ":", label=f"asymptote B=0, {threshold:g} dB")
    ax.semilogy(snr, [r["po_asym_b1"] for r in sub], ":", label=f"asymptote B=1, {threshold:g} dB")
    if sub[0]["po_mc_b0"] is not None:
        ax.semilogy(snr, [r["po_mc_b0"] for r in sub], "x", label=f"MC B=0, {threshold:g} dB")
        ax.semilogy(snr, [r["po_mc_b1"] for r in sub], "+", label=f"MC B=1, {threshold:g} dB")
ax.set_ylim(1e-4, 1.5)
ax.set_xlabel("average transmit SNR (dB)")
ax.set_ylabel("outage probability")
ax.grid(True, which="both", alpha=0.3)
ax.legend(fontsize=7)
fig.tight_layout()
plt.show()
""",
    "fig4": """\
fig, ax = plt.subplots()
for rho_bar in sorted({r["rho_bar_db"] for r in rows}):
    sub = [r for r in rows if r["rho_bar_db"] == rho_bar]
    d = [r["d_tr"] for r in sub]
    ax.semilogy(d, [r["po_b0"] for r in sub], "--", label=f"B=0, SNR {rho_bar:g} dB")
    ax.semilogy(d, [r["po_b1"] for r in sub], label=f"B=1, SNR {rho_bar:g} dB")
ax.set_xlabel("tag-to-reader distance d_tr (m)")
ax.set_ylabel("outage probability")
ax.grid(True, which="both", alpha=0.3)
ax.legend()
fig.tight_layout()
plt.show()
""",
}


def write_plot_script(path: Path, command: str, datafile: str) -> None:
    text = _PLOT_HEADER.format(name=command, datafile=datafile) + _PLOT_BODIES[command]
    path.write_bytes(text.encode("utf-8"))


def _emit(command: str, scenario: Scenario, columns: tuple[str, ...],
          rows: list[dict], out_dir: str) -> list[Path]:
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    ext = scenario.out_format
    data_path = directory / f"{scenario.prefix}_{command}.{ext}"
    if ext == "csv":
        write_csv(data_path, columns, rows)
    else:
        write_json(data_path, command, columns, rows)
    plot_path = directory / f"{scenario.prefix}_{command}_plot.py"
    write_plot_script(plot_path, command, data_path.name)
    return [data_path, plot_path]


# ---------------------------------------------------------------------------
# subcommands

def cmd_fig2(args: argparse.Namespace) -> int:
    scenario = load_scenario("fig2", args.config, args)
    written = _emit("fig2", scenario, FIG2_COLUMNS, build_fig2_rows(scenario),
                    args.out_dir)
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_fig3(args: argparse.Namespace) -> int:
    scenario = load_scenario("fig3", args.config, args)
    written = _emit("fig3", scenario, FIG3_COLUMNS, build_fig3_rows(scenario),
                    args.out_dir)
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_fig4(args: argparse.Namespace) -> int:
    scenario = load_scenario("fig4", args.config, args)
    written = _emit("fig4", scenario, FIG4_COLUMNS, build_fig4_rows(scenario),
                    args.out_dir)
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    scenario = load_scenario("eval", args.config, args)
    state = REFLECTING if args.state == 1 else ABSORBING
    eff = derive_effective(scenario.params)
    query = OutageQuery(rho_t_db=args.threshold_db, rho_bar_db=args.snr_db,
                        abs_tol=scenario.abs_tol)
    result = outage_exact(query, state, eff, scenario.accuracy)
    record = {
        "command": "eval",
        "state": state.b,
        "snr_db": args.snr_db,
        "threshold_db": args.threshold_db,
        "abs_tol": scenario.abs_tol,
        "po_exact": result.value,
        "terms_used": result.terms_used,
        "error_bound": result.error_bound,
        "converged": result.converged,
        "po_asymptotic": outage_asymptotic(query, state, eff, scenario.accuracy),
        "po_mc": None,
        "mc_stderr": None,
        "max_d_tr": None,
    }
    if args.mc_samples is not None:
        cfg = replace(scenario.mc, n_samples=args.mc_samples)
        est = mc_outage(query, state, eff, cfg)
        record["po_mc"] = est.p_hat
        record["mc_stderr"] = est.stderr
    if args.target_po is not None:
        record["max_d_tr"] = max_distance_for_outage(
            args.target_po, query, scenario.params, state, scenario.accuracy)
    print(json.dumps(record, indent=2, allow_nan=False))
    return 0


# ---------------------------------------------------------------------------
# selftest

def _erf_series(x: float) -> float:
    """Maclaurin series of erf, summed to machine convergence (|x| small)."""
    total = 0.0
    term = x
    n = 0
    while abs(term) > 1e-18 * max(abs(total), 1.0):
        total += term / (2 * n + 1)
        n += 1
        term *= -x * x / n
    return 2.0 / math.sqrt(math.pi) * total


def _selftest_checks():
    from scipy import integrate
    from scipy.special import exp1

    acc = specfun.DEFAULT_ACCURACY
    params = ScenarioParams()
    eff = derive_effective(params)

    def check_erf():
        worst = max(abs(specfun.erf(x) - _erf_series(x))
                    for x in np.linspace(-3.0, 3.0, 25))
        return worst < 1e-12, f"max deviation {worst:.2e}"

    def check_gamma():
        worst = 0.0
        for a, x in [(0.5, 0.3), (1.0, 2.0), (2.5, 1.7), (7.5, 3.0)]:
            if a < 1.0:
                # substitute t = u**2 so the quadrature sees no endpoint
                # singularity
                ref = integrate.quad(
                    lambda u: 2.0 * math.exp(-u * u) * u**(2.0 * a - 1.0),
                    0.0, math.sqrt(x), limit=200)[0]
            else:
                ref = integrate.quad(lambda t: math.exp(-t) * t**(a - 1.0),
                                     0.0, x, limit=200, epsabs=1e-14,
                                     epsrel=1e-13)[0]
            worst = max(worst, abs(specfun.lower_inc_gamma(a, x) - ref) / ref)
        return worst < 1e-12, f"max relative deviation {worst:.2e}"

    def check_ln_gamma():
        cases = [(1.0, 0.0), (0.5, math.log(math.sqrt(math.pi))),
                 (5.0, math.log(24.0)),
                 (2.5, math.log(1.5 * 0.5 * math.sqrt(math.pi)))]
        worst = max(abs(specfun.ln_gamma(a) - ref) for a, ref in cases)
        return worst < 1e-13, f"max deviation {worst:.2e}"

    def check_k0():
        worst = 0.0
        for x in (0.5, 1.0, 2.0, 10.0):
            ref = integrate.quad(lambda t: math.exp(-x * math.cosh(t)),
                                 0.0, math.acosh(746.0 / x), limit=400)[0]
            worst = max(worst, abs(specfun.bessel_k0(x) - ref) / ref)
        return worst < 1e-10, f"max relative deviation {worst:.2e}"

    def check_psi():
        z = 1.0
        ref = math.exp(z) * exp1(z)
        d1 = abs(specfun.tricomi_psi(1.0, 1.0, z, acc) - ref) / ref
        ref2 = integrate.quad(
            lambda t: math.exp(-2.0 * t) * t**(-0.5) * (1.0 + t)**(-1.5),
            0.0, math.inf, limit=400)[0] / math.gamma(0.5)
        d2 = abs(specfun.tricomi_psi(0.5, 0.0, 2.0, acc) - ref2) / ref2
        worst = max(d1, d2)
        return worst < 1e-10, f"max relative deviation {worst:.2e}"

    def check_whittaker():
        k = 5
        nu = eff.nu
        a = k + 0.5
        integral = integrate.quad(
            lambda t: math.exp(-nu * t + (a - 1.0) * math.log(t)
                               - a * math.log1p(t)),
            0.0, math.inf, limit=400)[0]
        ref = math.log(math.exp(-nu / 2.0) * math.sqrt(nu) * integral
                       / math.gamma(a))
        got = specfun.whittaker_w_neg_k_0(k, nu, acc).log_abs
        dev = abs(got - ref)
        return dev < 1e-9, f"log deviation {dev:.2e}"

    def check_channel_series():
        worst = 0.0
        for x in (0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 4.0, -4.0):
            dev = abs(channel_pdf(x, REFLECTING, eff, acc)
                      - quad_convolution_pdf(x, eff, acc))
            worst = max(worst, dev)
        at0 = abs(channel_pdf(0.0, REFLECTING, eff, acc)
                  - quad_convolution_pdf(0.0, eff, acc))
        return worst < 1e-7 and at0 < 1e-8, \
            f"max deviation {worst:.2e}, at origin {at0:.2e}"

    def check_outage_vs_quad():
        worst = 0.0
        for rho_t_db in (-3.0, 7.0):
            query = OutageQuery(rho_t_db=rho_t_db, rho_bar_db=3.0, abs_tol=1e-10)
            exact = outage_exact(query, REFLECTING, eff, acc).value
            ref = quad_outage(query, REFLECTING, eff, acc)
            worst = max(worst, abs(exact - ref))
        return worst < 1e-8, f"max deviation {worst:.2e}"

    def check_snr_pdf_norm():
        # integrate over sqrt(snr) to tame the 1/sqrt density edge; the
        # omitted tail beyond u=24 (about 10 effective standard deviations)
        # is far below the tolerance
        query = OutageQuery(rho_t_db=0.0, rho_bar_db=3.0, abs_tol=1e-9)
        wide = Accuracy(abs_tol=acc.abs_tol, max_terms=1200,
                        max_quad_nodes=acc.max_quad_nodes)
        val = integrate.quad(
            lambda u: 2.0 * u * snr_pdf(u * u, REFLECTING, query, eff, wide),
            0.0, 24.0, limit=400)[0]
        return abs(val - 1.0) < 1e-6, f"integral {val:.9f}"

    def check_mc():
        query = OutageQuery(rho_t_db=2.0, rho_bar_db=10.0, abs_tol=1e-9)
        cfg = McConfig(n_samples=100_000, seed=7, batch_size=30_000)
        est = mc_outage(query, REFLECTING, eff, cfg)
        exact = outage_exact(query, REFLECTING, eff, acc).value
        dev = abs(est.p_hat - exact) / est.stderr
        return dev < 5.0, f"deviation {dev:.2f} standard errors"

    def check_schema():
        try:
            import jsonschema
        except ImportError:
            return None, "jsonschema not installed"
        schema = json.loads(importlib.resources.files("scatterlink")
                            .joinpath("output_schema.json").read_text())
        record = {"command": "eval", "state": 1, "snr_db": 3.0,
                  "threshold_db": 7.0, "abs_tol": 1e-9, "po_exact": 0.5,
                  "terms_used": 4, "error_bound": 1e-10, "converged": True,
                  "po_asymptotic": 0.6, "po_mc": None, "mc_stderr": None,
                  "max_d_tr": None}
        jsonschema.validate(record, schema)
        return True, "eval record validates"

    return [
        ("erf vs Maclaurin series", check_erf),
        ("lower incomplete gamma vs quadrature", check_gamma),
        ("ln_gamma vs closed forms", check_ln_gamma),
        ("bessel_k0 vs quadrature", check_k0),
        ("tricomi_psi vs identities and quadrature", check_psi),
        ("whittaker reduction vs quadrature", check_whittaker),
        ("channel series vs convolution", check_channel_series),
        ("outage series vs quadrature", check_outage_vs_quad),
        ("snr density normalization", check_snr_pdf_norm),
        ("Monte Carlo vs exact outage", check_mc),
        ("JSON schema validation", check_schema),
    ]


def cmd_selftest(args: argparse.Namespace) -> int:
    failures = 0
    for name, check in _selftest_checks():
        try:
            ok, detail = check()
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        if ok is None:
            print(f"skip  {name}: {detail}")
        elif ok:
            print(f"ok    {name}: {detail}")
        else:
            failures += 1
            print(f"FAIL  {name}: {detail}")
    if failures:
        print(f"{failures} check(s) failed", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# argument parsing

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML scenario file")
    parser.add_argument("--seed", type=int, help="Monte Carlo stream seed")
    parser.add_argument("--mc-samples", type=int, dest="mc_samples",
                        help="Monte Carlo sample count")
    parser.add_argument("--tol", type=float,
                        help="absolute tolerance for the outage series")
    parser.add_argument("--format", dest="out_format", choices=("csv", "json"),
                        help="output file format")
    parser.add_argument("--prefix", help="output file name prefix")
    parser.add_argument("--out-dir", default=".", dest="out_dir",
                        help="directory for output files")
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--mc", dest="mc", action="store_true", default=None,
                       help="force Monte Carlo columns on")
    group.add_argument("--no-mc", dest="mc", action="store_false",
                       help="force Monte Carlo columns off")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scatterlink",
        description="Outage analysis of a two-state ambient backscatter link.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, func, doc in (
        ("fig2", cmd_fig2, "series truncation and bound error tables"),
        ("fig3", cmd_fig3, "outage versus average SNR"),
        ("fig4", cmd_fig4, "outage versus tag-to-reader distance"),
    ):
        p = sub.add_parser(name, help=doc)
        _add_common(p)
        p.set_defaults(func=func)

    p = sub.add_parser("eval", help="single outage evaluation as JSON")
    _add_common(p)
    p.add_argument("--state", type=int, choices=(0, 1), required=True,
                   help="tag state (0 absorbing, 1 reflecting)")
    p.add_argument("--snr-db", type=float, required=True, dest="snr_db",
                   help="average transmit SNR in dB")
    p.add_argument("--threshold-db", type=float, required=True,
                   dest="threshold_db", help="threshold SNR in dB")
    p.add_argument("--target-po", type=float, dest="target_po",
                   help="also report the largest d_tr meeting this outage")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("selftest", help="run the oracle-agreement suite")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConvergenceError as exc:
        print(f"convergence error: {exc}", file=sys.stderr)
        return 3
    except (DomainError, UnboundedDistanceError, InfeasibleTargetError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 4
    except (OSError, tomllib.TOMLDecodeError, KeyError, TypeError) as exc:
        print(f"configuration error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
