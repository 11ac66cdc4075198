"""Command-line front door.

JSON results go to stdout, human-readable summaries to stderr, so output
can be piped without extra flags.  Exit codes: 0 ok, 2 input error,
3 infeasible threshold, 4 no resolving set exists, 5 size-cap refusal.
Randomness is opt-in: every randomized subcommand defaults to seed 0 and
echoes the seed it used.
"""

from __future__ import annotations

import functools
import hashlib
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .errors import (
    InfeasibleError,
    MalformedInputError,
    NoResolvingSetError,
    ResolvekitError,
    SizeCapError,
)
from .experiment import (
    ExperimentConfig,
    run_experiment,
    threads_from_env,
    write_report_files,
)
from .graph import read_edge_list, write_edge_list
from .mine import mine
from .presets import PRESETS, get_preset
from .resolve import (
    BRUTE_FORCE_CAP,
    brute_force_beta,
    distance_target,
    greedy_baseline,
    ich,
    is_resolving,
    modified_adjacency_target,
    preorder_baseline,
    random_baseline,
)
from .sbm import (
    LabeledGraph,
    SbmParams,
    diam2_condition,
    diam_gt2_condition,
    er_any_set_size,
    er_beta_upper,
    estimate_params,
    load_params,
    read_labels,
    sample,
    scale_communities,
    write_labels,
)

_EXIT_CODES = (
    (MalformedInputError, 2),
    (InfeasibleError, 3),
    (NoResolvingSetError, 4),
    (SizeCapError, 5),
)


def _exit_mapped(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ResolvekitError as exc:
            for cls, code in _EXIT_CODES:
                if isinstance(exc, cls):
                    click.echo(f"error: {exc}", err=True)
                    sys.exit(code)
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)

    return wrapper


def _load_params_arg(value: str) -> tuple:
    """Accept either a bundled preset name or a params JSON path."""
    if value in PRESETS:
        return get_preset(value), value
    path = Path(value)
    if not path.exists():
        raise MalformedInputError(
            f"{value!r} is neither a preset ({', '.join(sorted(PRESETS))}) nor a file"
        )
    return load_params(path), str(path)


def _invocation_hash(payload: dict) -> str:
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


def _emit(payload: dict, invocation: dict) -> None:
    payload = dict(payload)
    payload["version"] = __version__
    payload["config_hash"] = _invocation_hash(invocation)
    click.echo(json.dumps(payload, indent=2))


@click.group()
@click.version_option(version=__version__, prog_name="resolvekit")
def main() -> None:
    """Resolving sets and landmark embeddings for block-model graphs."""


@main.command("sample")
@click.argument("params")
@click.option("--n", "n_target", type=int, default=None, help="Rescale total vertex count.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Edge-list output path.")
@click.option("--labels-out", type=click.Path(dir_okay=False), default=None,
              help="Community-label output path [default: OUT.labels].")
@_exit_mapped
def cmd_sample(params, n_target, seed, out, labels_out):
    """Sample one graph from PARAMS (a preset name or params JSON path)."""
    sbm_params, params_id = _load_params_arg(params)
    if n_target is not None:
        sbm_params = scale_communities(sbm_params, n_target)
    g = sample(sbm_params, seed)
    write_edge_list(out, g)
    labels = sbm_params.labels()
    labels_path = labels_out if labels_out is not None else out + ".labels"
    write_labels(labels_path, labels)
    densities = estimate_params(LabeledGraph(g, labels)).P
    invocation = {"cmd": "sample", "params": params_id, "n": n_target, "seed": seed}
    _emit(
        {
            "n": g.n,
            "edges": g.edge_count,
            "community_sizes": list(sbm_params.community_sizes),
            "block_densities": [[round(float(x), 6) for x in row] for row in densities],
            "seed": seed,
            "out": str(out),
            "labels_out": str(labels_path),
        },
        invocation,
    )
    click.echo(f"sampled n={g.n} |E|={g.edge_count} -> {out}", err=True)


@main.command("mine")
@click.argument("params")
@click.option("--alpha", type=float, required=True, help="Failure-probability threshold.")
@click.option("--n", "n_target", type=int, default=None, help="Rescale total vertex count first.")
@_exit_mapped
def cmd_mine(params, alpha, n_target):
    """Minimal per-community allocation with collision bound <= ALPHA."""
    sbm_params, params_id = _load_params_arg(params)
    if n_target is not None:
        sbm_params = scale_communities(sbm_params, n_target)
    solution = mine(sbm_params, alpha)
    invocation = {"cmd": "mine", "params": params_id, "alpha": alpha, "n": n_target}
    payload = solution.to_dict()
    payload["seed"] = None  # deterministic solve
    _emit(payload, invocation)
    click.echo(
        f"allocation total={solution.total} f={solution.f_value:.3g} "
        f"({solution.evaluations} evaluations)",
        err=True,
    )


@main.command("resolve")
@click.argument("edge_list", type=click.Path(exists=True, dir_okay=False))
@click.option("--method", type=click.Choice(["ich", "greedy", "preorder", "random", "brute"]),
              required=True)
@click.option("--target", "target_kind", type=click.Choice(["astar", "dist"]),
              default="astar", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--labels", "labels_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Community labels (required for greedy/preorder).")
@click.option("--params", "params_path", default=None,
              help="Params preset/JSON; estimated from labels when omitted.")
@click.option("--cap", type=int, default=BRUTE_FORCE_CAP, show_default=True,
              help="Vertex cap for brute force and for ich over distances.")
@click.option("--force-distance", is_flag=True,
              help="Run ich over the distance matrix beyond the cap anyway.")
@_exit_mapped
def cmd_resolve(edge_list, method, target_kind, seed, labels_path, params_path, cap,
                force_distance):
    """Find a resolving set for the graph stored in EDGE_LIST."""
    labels = read_labels(labels_path) if labels_path else None
    g = read_edge_list(edge_list, n=len(labels) if labels is not None else None)
    notes = []
    if target_kind == "dist":
        if method == "ich" and g.n > cap and not force_distance:
            raise SizeCapError(
                f"ich over the distance matrix needs all-pairs BFS; n = {g.n} exceeds "
                f"cap {cap} (pass --force-distance to override)"
            )
        target = distance_target(g)
        verified_against = "D"
    else:
        target = modified_adjacency_target(g)
        verified_against = "A*"

    if method in ("greedy", "preorder"):
        if labels is None:
            raise MalformedInputError(f"--labels is required for method {method}")
        if params_path is not None:
            params, _ = _load_params_arg(params_path)
        else:
            params = estimate_params(LabeledGraph(g, labels))
            notes.append("params estimated from the labeled input graph")
        if target_kind == "dist":
            raise MalformedInputError(f"method {method} verifies against A*; use --target astar")

    if method == "brute":
        result = brute_force_beta(target, cap=cap)
        nodes = result.nodes
    elif method == "ich":
        nodes = ich(target)
    elif method == "greedy":
        nodes = greedy_baseline(g, params, seed)
    elif method == "preorder":
        nodes = preorder_baseline(g, params)
        notes.append(
            "preorder scores substitute per-vertex empirical neighbor fractions "
            "into the collision bound"
        )
    else:
        nodes = random_baseline(g, seed)

    verified = is_resolving(target, nodes)
    invocation = {
        "cmd": "resolve", "edge_list": str(edge_list), "method": method,
        "target": target_kind, "seed": seed,
    }
    payload = {
        "method": method,
        "seed": seed,
        "set": [int(v) for v in nodes],
        "size": len(nodes),
        "verified": bool(verified),
        "verified_against": verified_against,
    }
    if notes:
        payload["notes"] = notes
    _emit(payload, invocation)
    click.echo(f"{method}: size {len(nodes)} (verified against {verified_against})", err=True)


@main.command("bench")
@click.argument("config_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="results",
              show_default=True)
@_exit_mapped
def cmd_bench(config_file, out_dir):
    """Run the benchmark suite described by CONFIG_FILE and write report files."""
    try:
        data = json.loads(Path(config_file).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedInputError(f"invalid config JSON: {exc}") from exc
    entries = data["experiments"] if isinstance(data, dict) and "experiments" in data else [data]
    configs = [ExperimentConfig.from_dict(entry) for entry in entries]
    reports = []
    for cfg in configs:
        click.echo(
            f"running {cfg.name}: n={cfg.scaled_params().n} methods={','.join(cfg.methods)} "
            f"graphs={cfg.n_graphs} (threads={threads_from_env()})",
            err=True,
        )
        reports.append(run_experiment(cfg))
    paths = write_report_files(reports, out_dir)
    invocation = {"cmd": "bench", "config": str(config_file)}
    _emit(
        {
            "experiments": [rep.name for rep in reports],
            "seed": configs[0].base_seed if configs else None,
            "files": [str(p) for p in paths],
            "failures": int(sum(row["failures"] for rep in reports for row in rep.rows)),
        },
        invocation,
    )
    click.echo(f"wrote {len(paths)} report files to {out_dir}", err=True)


@main.command("bounds")
@click.argument("params", required=False)
@click.option("--n", "n_er", type=int, default=None, help="Vertex count for the single-community bounds.")
@click.option("--p", "p_er", type=float, default=None, help="Edge probability for the single-community bounds.")
@click.option("--C", "c_upper", type=float, default=1.5, show_default=True,
              help="Constant (>1) for the diameter <= 2 condition.")
@click.option("--C2", "c_lower", type=float, default=0.5, show_default=True,
              help="Constant in (0,1) for the diameter > 2 condition.")
@_exit_mapped
def cmd_bounds(params, n_er, p_er, c_upper, c_lower):
    """Probabilistic bound calculators (single community or block model)."""
    if params is None:
        if n_er is None or p_er is None:
            raise MalformedInputError("provide PARAMS, or both --n and --p")
        payload = {
            "n": n_er,
            "p": p_er,
            "beta_upper": er_beta_upper(n_er, p_er),
            "any_set": er_any_set_size(n_er, p_er),
            "seed": None,
        }
        invocation = {"cmd": "bounds", "n": n_er, "p": p_er}
        _emit(payload, invocation)
        click.echo(
            f"beta_upper={payload['beta_upper']} any_set={payload['any_set']}", err=True
        )
        return
    sbm_params, params_id = _load_params_arg(params)
    diam2 = diam2_condition(sbm_params, c_upper)
    gt2 = diam_gt2_condition(sbm_params, c_lower)
    invocation = {"cmd": "bounds", "params": params_id, "C": c_upper, "C2": c_lower}
    _emit(
        {
            "diam_le_2_condition": diam2.to_dict(),
            "diam_gt_2_condition": gt2.to_dict(),
            "seed": None,
        },
        invocation,
    )
    click.echo(
        f"diam<=2 condition holds for all in-scope pairs: {diam2.all_hold}; "
        f"diam>2 witness: {gt2.witness}",
        err=True,
    )


if __name__ == "__main__":
    main()
