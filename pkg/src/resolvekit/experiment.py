"""Benchmark harness: sampled ensembles, per-method replicates, aggregated tables.

Every random draw is keyed by a seed derived from the configured base seed
plus the (method, graph index, replicate index) coordinates, so reports are
bit-reproducible for a given config and independent of execution order; the
reducer is an associative merge over graph indices, which also makes the
optional process-level parallelism output-invariant.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__ as _version
from .errors import MalformedInputError, ResolvekitError
from .graph import count_pairs_distance_gt2
from .mine import mine
from .presets import get_preset
from .resolve import (
    greedy_baseline,
    ich,
    is_resolving,
    modified_adjacency_target,
    preorder_baseline,
    random_baseline,
)
from .sbm import SbmParams, expected_long_pairs, sample, scale_communities

KNOWN_METHODS = ("MINE", "ICH", "GREEDY", "PREORDER", "RANDOM")

# Methods whose output is a deterministic function of the sampled graph;
# the harness runs them once per graph since replicates would be identical.
DETERMINISTIC_METHODS = frozenset({"ICH", "PREORDER"})


def derive_seed(base_seed: int, *parts) -> int:
    """Stable 63-bit seed from the base seed and arbitrary tags."""
    tag = "|".join(str(p) for p in parts)
    digest = hashlib.sha256(tag.encode("utf-8")).digest()
    return (int(base_seed) ^ int.from_bytes(digest[:8], "big")) & (2**63 - 1)


def threads_from_env() -> int:
    raw = os.environ.get("RESOLVEKIT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class ExperimentConfig:
    """One benchmark: a parameter set, the methods to run, and replicate counts."""

    params: SbmParams
    name: str = "custom"
    n_target: Optional[int] = None
    methods: tuple = KNOWN_METHODS
    alphas: tuple = (0.005, 0.01, 0.1, 0.2)
    n_graphs: int = 30
    replicates: int = 50
    ich_replicates: int = 10
    base_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(str(m).upper() for m in self.methods))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        for m in self.methods:
            if m not in KNOWN_METHODS:
                raise MalformedInputError(
                    f"unknown method {m!r}; known: {', '.join(KNOWN_METHODS)}"
                )
        if self.n_graphs < 1:
            raise MalformedInputError("n_graphs must be >= 1")
        if self.replicates < 1 or self.ich_replicates < 1:
            raise MalformedInputError("replicate counts must be >= 1")
        for a in self.alphas:
            if not 0.0 < a < 1.0:
                raise MalformedInputError(f"alpha {a} must lie in (0, 1)")

    def scaled_params(self) -> SbmParams:
        if self.n_target is None:
            return self.params
        return scale_communities(self.params, self.n_target)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "params": self.params.to_dict(),
            "n_target": self.n_target,
            "methods": list(self.methods),
            "alphas": list(self.alphas),
            "n_graphs": self.n_graphs,
            "replicates": self.replicates,
            "ich_replicates": self.ich_replicates,
            "base_seed": self.base_seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise MalformedInputError("experiment config must be a JSON object")
        data = dict(data)
        preset = data.pop("preset", None)
        if preset is not None:
            params = get_preset(preset)
            name = data.pop("name", preset)
        elif "params" in data:
            params = SbmParams.from_dict(data.pop("params"))
            name = data.pop("name", "custom")
        else:
            raise MalformedInputError("config needs either 'preset' or 'params'")
        known = {
            "n_target",
            "methods",
            "alphas",
            "n_graphs",
            "replicates",
            "ich_replicates",
            "base_seed",
        }
        unknown = set(data) - known
        if unknown:
            raise MalformedInputError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {k: v for k, v in data.items() if k in known}
        if "methods" in kwargs:
            kwargs["methods"] = tuple(kwargs["methods"])
        if "alphas" in kwargs:
            kwargs["alphas"] = tuple(kwargs["alphas"])
        return cls(params=params, name=name, **kwargs)


def config_hash(cfg: ExperimentConfig) -> str:
    canon = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


@dataclass
class _Cell:
    method: str
    alpha: Optional[float]
    sizes: list = field(default_factory=list)
    seconds: list = field(default_factory=list)
    successes: int = 0
    runs: int = 0
    failures: int = 0

    def merge(self, other: "_Cell") -> None:
        self.sizes.extend(other.sizes)
        self.seconds.extend(other.seconds)
        self.successes += other.successes
        self.runs += other.runs
        self.failures += other.failures

    def row(self, network: str) -> dict:
        sizes = np.array(self.sizes, dtype=np.float64)
        secs = np.array(self.seconds, dtype=np.float64)
        return {
            "network": network,
            "method": self.method,
            "alpha": self.alpha,
            "mean_size": float(sizes.mean()) if sizes.size else None,
            "std_size": float(sizes.std()) if sizes.size else None,
            "mean_seconds": float(secs.mean()) if secs.size else None,
            "std_seconds": float(secs.std()) if secs.size else None,
            "validity_rate": self.successes / self.runs if self.runs else None,
            "runs": self.runs,
            "failures": self.failures,
        }


@dataclass(frozen=True)
class ExperimentReport:
    """Aggregated per-(method, alpha) statistics plus provenance."""

    name: str
    config: dict
    config_hash: str
    rows: tuple
    mine_solutions: dict
    version: str = _version
    std_divisor: str = "population (N)"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "version": self.version,
            "config": self.config,
            "config_hash": self.config_hash,
            "std_divisor": self.std_divisor,
            "mine_solutions": self.mine_solutions,
            "rows": list(self.rows),
        }


def _cell_key(method: str, alpha: Optional[float]):
    return (method, alpha)


def _replicates_for(cfg: ExperimentConfig, method: str) -> int:
    if method in DETERMINISTIC_METHODS:
        return 1
    if method == "ICH":
        return cfg.ich_replicates
    return cfg.replicates


def _draw_allocation_nodes(params: SbmParams, allocation, rng) -> list:
    offs = params.offsets()
    nodes: list = []
    for i, k in enumerate(allocation):
        if k:
            picks = rng.choice(params.community_sizes[i], size=int(k), replace=False)
            nodes.extend(int(offs[i] + p) for p in picks)
    return nodes


def _run_graph(cfg: ExperimentConfig, params: SbmParams, allocations: dict, g_idx: int) -> dict:
    """All method runs on one sampled graph; returns partial cells keyed by (method, alpha)."""
    g = sample(params, derive_seed(cfg.base_seed, "graph", g_idx))
    target = modified_adjacency_target(g)
    cells: dict = {}

    def cell(method, alpha) -> _Cell:
        key = _cell_key(method, alpha)
        if key not in cells:
            cells[key] = _Cell(method, alpha)
        return cells[key]

    for method in cfg.methods:
        if method == "MINE":
            for alpha in cfg.alphas:
                c = cell("MINE", alpha)
                allocation = allocations.get(alpha)
                if allocation is None:
                    c.failures += cfg.replicates
                    continue
                for rep in range(cfg.replicates):
                    rng = np.random.Generator(
                        np.random.Philox(
                            key=derive_seed(cfg.base_seed, "MINE", alpha, g_idx, rep)
                        )
                    )
                    t0 = time.perf_counter()
                    nodes = _draw_allocation_nodes(params, allocation, rng)
                    ok = is_resolving(target, nodes)
                    dt = time.perf_counter() - t0
                    c.sizes.append(len(nodes))
                    c.seconds.append(dt)
                    c.successes += int(ok)
                    c.runs += 1
            continue
        c = cell(method, None)
        for rep in range(_replicates_for(cfg, method)):
            seed = derive_seed(cfg.base_seed, method, g_idx, rep)
            try:
                t0 = time.perf_counter()
                if method == "ICH":
                    nodes = ich(target)
                elif method == "GREEDY":
                    nodes = greedy_baseline(g, params, seed)
                elif method == "PREORDER":
                    nodes = preorder_baseline(g, params)
                else:
                    nodes = random_baseline(g, seed)
                dt = time.perf_counter() - t0
            except ResolvekitError:
                c.failures += 1
                continue
            ok = is_resolving(target, nodes)
            c.sizes.append(len(nodes))
            c.seconds.append(dt)
            c.successes += int(ok)
            c.runs += 1
    return cells


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Sample ``n_graphs`` networks and run every configured method on each.

    MINE allocations are solved once per alpha up front; each replicate then
    draws that many nodes per community and records whether the draw
    resolves the modified adjacency matrix, which is the empirical success
    rate the threshold alpha bounds from below by 1 - alpha.
    """
    params = cfg.scaled_params()
    allocations: dict = {}
    mine_solutions: dict = {}
    if "MINE" in cfg.methods:
        for alpha in cfg.alphas:
            t0 = time.perf_counter()
            try:
                sol = mine(params, alpha)
            except ResolvekitError as exc:
                allocations[alpha] = None
                mine_solutions[f"alpha={alpha}"] = {"error": str(exc)}
                continue
            dt = time.perf_counter() - t0
            allocations[alpha] = sol.allocation
            mine_solutions[f"alpha={alpha}"] = {
                "allocation": list(sol.allocation),
                "total": sol.total,
                "f_value": sol.f_value,
                "evaluations": sol.evaluations,
                "solve_seconds": dt,
            }

    merged: dict = {}
    workers = min(threads_from_env(), cfg.n_graphs)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            partials = list(
                pool.map(
                    _run_graph,
                    [cfg] * cfg.n_graphs,
                    [params] * cfg.n_graphs,
                    [allocations] * cfg.n_graphs,
                    range(cfg.n_graphs),
                )
            )
    else:
        partials = [_run_graph(cfg, params, allocations, g) for g in range(cfg.n_graphs)]
    for part in partials:  # graph-index order keeps float reductions identical
        for key, cell in sorted(part.items(), key=lambda kv: (kv[0][0], kv[0][1] or 0.0)):
            if key not in merged:
                merged[key] = _Cell(cell.method, cell.alpha)
            merged[key].merge(cell)

    ordered = sorted(
        merged.values(), key=lambda c: (c.method, c.alpha if c.alpha is not None else -1.0)
    )
    rows = tuple(c.row(cfg.name) for c in ordered)
    return ExperimentReport(
        name=cfg.name,
        config=cfg.to_dict(),
        config_hash=config_hash(cfg),
        rows=rows,
        mine_solutions=mine_solutions,
    )


@dataclass(frozen=True)
class LongPathReport:
    """Empirical vs analytic share of vertex pairs at hop distance > 2."""

    name: str
    analytic_fraction: float
    analytic_total: float
    fractions: tuple
    mode: str  # "empirical+analytic" | "analytic-only"

    @property
    def empirical_mean(self) -> Optional[float]:
        return float(np.mean(self.fractions)) if self.fractions else None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "analytic_fraction": self.analytic_fraction,
            "analytic_total": self.analytic_total,
            "empirical_fractions": list(self.fractions),
            "empirical_mean": self.empirical_mean,
            "mode": self.mode,
        }


def long_path_fraction(cfg: ExperimentConfig, *, pair_cap: int = 5000) -> LongPathReport:
    """Fraction of pairs at distance > 2, sampled and in expectation.

    Above ``pair_cap`` vertices the dense pair scan is refused and only the
    analytic expectation is reported.
    """
    params = cfg.scaled_params()
    analytic = expected_long_pairs(params)
    if params.n > pair_cap:
        return LongPathReport(
            cfg.name, analytic.fraction, analytic.total, (), "analytic-only"
        )
    npairs = params.n * (params.n - 1) // 2
    fractions = []
    for g_idx in range(cfg.n_graphs):
        g = sample(params, derive_seed(cfg.base_seed, "longpath", g_idx))
        cnt = count_pairs_distance_gt2(g)
        fractions.append(cnt / npairs if npairs else 0.0)
    return LongPathReport(
        cfg.name, analytic.fraction, analytic.total, tuple(fractions), "empirical+analytic"
    )


def _format_pm(mean, std) -> str:
    if mean is None:
        return "n/a"
    return f"{round(mean, 2)} ± {round(std, 2)}"


_QUANTITY_FIELDS = {
    "sizes": ("mean_size", "std_size"),
    "seconds": ("mean_seconds", "std_seconds"),
}


def _as_report_list(report) -> list:
    if isinstance(report, ExperimentReport):
        return [report]
    return list(report)


def emit_tables(report, format: str = "csv", quantity: str = "sizes") -> str:
    """Render aggregated results as csv, json or markdown.

    Column order is deterministic; markdown cells carry the "mean ± std"
    style rounded to two decimals.  ``quantity`` selects sizes, seconds or
    validity.
    """
    reports = _as_report_list(report)
    rows = [row for rep in reports for row in rep.rows]
    rows.sort(
        key=lambda r: (
            r["network"],
            r["method"],
            r["alpha"] if r["alpha"] is not None else -1.0,
        )
    )
    if format == "json":
        return json.dumps([rep.to_dict() for rep in reports], indent=2) + "\n"
    if format == "csv":
        if quantity == "validity":
            header = "network,method,alpha,validity_rate,runs,failures"
            lines = [header]
            for r in rows:
                alpha = "" if r["alpha"] is None else repr(r["alpha"])
                rate = "" if r["validity_rate"] is None else repr(r["validity_rate"])
                lines.append(
                    f"{r['network']},{r['method']},{alpha},{rate},{r['runs']},{r['failures']}"
                )
            return "\n".join(lines) + "\n"
        mean_f, std_f = _QUANTITY_FIELDS[quantity]
        header = "network,method,alpha,mean,std,runs,failures"
        lines = [header]
        for r in rows:
            alpha = "" if r["alpha"] is None else repr(r["alpha"])
            mean = "" if r[mean_f] is None else repr(r[mean_f])
            std = "" if r[std_f] is None else repr(r[std_f])
            lines.append(
                f"{r['network']},{r['method']},{alpha},{mean},{std},{r['runs']},{r['failures']}"
            )
        return "\n".join(lines) + "\n"
    if format == "markdown":
        alphas = sorted({r["alpha"] for r in rows if r["alpha"] is not None})
        columns = [str(a) for a in alphas] + ["-"]
        lines = [
            "| network | method | " + " | ".join(columns) + " |",
            "|---|---|" + "|".join(["---"] * len(columns)) + "|",
        ]
        seen = []
        for r in rows:
            key = (r["network"], r["method"])
            if key not in seen:
                seen.append(key)
        for network, method in seen:
            cells = []
            for a in alphas + [None]:
                match = [
                    r for r in rows
                    if r["network"] == network and r["method"] == method and r["alpha"] == a
                ]
                if not match:
                    cells.append("")
                elif quantity == "validity":
                    v = match[0]["validity_rate"]
                    cells.append("n/a" if v is None else f"{v:.4f}")
                else:
                    mean_f, std_f = _QUANTITY_FIELDS[quantity]
                    cells.append(_format_pm(match[0][mean_f], match[0][std_f]))
            lines.append(f"| {network} | {method} | " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"
    raise MalformedInputError(f"unknown table format {format!r}")


def load_table_csv(text: str) -> list:
    """Parse a CSV produced by :func:`emit_tables` back into row dicts."""
    lines = [ln for ln in text.splitlines() if ln]
    if not lines:
        return []
    header = lines[0].split(",")
    out = []
    for line in lines[1:]:
        parts = line.split(",")
        if len(parts) != len(header):
            raise MalformedInputError(f"malformed CSV row: {line!r}")
        row: dict = {}
        for key, value in zip(header, parts):
            if key in ("network", "method"):
                row[key] = value
            elif key in ("runs", "failures"):
                row[key] = int(value)
            else:
                row[key] = None if value == "" else float(value)
        out.append(row)
    return out


def rows_to_csv(rows: list, quantity: str = "sizes") -> str:
    """Re-serialize loaded rows; inverse of :func:`load_table_csv`."""
    if quantity == "validity":
        header = "network,method,alpha,validity_rate,runs,failures"
        keys = ("alpha", "validity_rate")
    else:
        header = "network,method,alpha,mean,std,runs,failures"
        keys = ("alpha", "mean", "std")
    lines = [header]
    for r in rows:
        vals = [r["network"], r["method"]]
        vals.extend("" if r[k] is None else repr(r[k]) for k in keys)
        vals.extend([str(r["runs"]), str(r["failures"])])
        lines.append(",".join(vals))
    return "\n".join(lines) + "\n"


def write_report_files(reports, out_dir) -> list:
    """Write the five benchmark artifacts; filenames carry the config hash."""
    reports = _as_report_list(reports)
    combined = hashlib.sha256(
        "|".join(rep.config_hash for rep in reports).encode("utf-8")
    ).hexdigest()[:12]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, text in (
        (f"report_{combined}.json", emit_tables(reports, "json")),
        (f"sizes_{combined}.csv", emit_tables(reports, "csv", "sizes")),
        (f"sizes_{combined}.md", emit_tables(reports, "markdown", "sizes")),
        (f"seconds_{combined}.csv", emit_tables(reports, "csv", "seconds")),
        (f"validity_{combined}.csv", emit_tables(reports, "csv", "validity")),
    ):
        path = out / name
        path.write_text(text, encoding="utf-8")
        paths.append(path)
    return paths
