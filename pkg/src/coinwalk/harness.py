"""Batch experiment harness: JSON specs in, deterministic tables out.

A spec file describes one experiment of a given kind:

* ``analyze``  -- build each graph in a parameter grid and record its
  degree statistics, stationary collision mass and closed-form moments;
* ``simulate`` -- additionally run the two-walker Monte Carlo and compare
  against the coincidence-time predictions;
* ``ensemble`` -- estimate mean/variance of D and D2 over replicate
  graphs per grid point;
* ``sweep``    -- power-law moment sweep over (n, gamma, d, m) grids,
  recording the measured meeting-rate ratio n * sum(pi_v^2) against its
  predicted scaling regime.

Every run is reproducible byte for byte: grid point i draws all its
randomness from the derived seed (master_seed, i), rows are emitted in
grid order regardless of worker count, floats are serialized with
``repr`` (shortest round-trip form), and wall-clock timings are kept on
the row objects but never written to the output.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from itertools import product
from typing import Any

import numpy as np

from .generators import GenSpec, GenerationError, generate, sampler_for, weights_for
from .graph_core import degree_statistics, is_connected
from .moments import closed_form_moments, ensemble_estimate, er_moments, predict_scaling
from .rng import derive_seed
from .walk_sim import SimConfig, verify_theorem1

KINDS = ("analyze", "simulate", "ensemble", "sweep")
FORMATS = ("csv", "json")


class SpecError(ValueError):
    """The spec file failed to parse or validate."""


@dataclass
class ResultRow:
    """One grid point's outputs; unfilled fields stay None.

    Field order defines the output column order.  ``wall_time_s`` is
    measured per point but excluded from emission so that output bytes
    depend only on the spec.
    """

    row: int | None = None
    kind: str | None = None
    family: str | None = None
    n: int | None = None
    k: int | None = None
    r: int | None = None
    p: float | None = None
    gamma: float | None = None
    d: float | None = None
    m: float | None = None
    w: float | None = None
    seed: int | None = None
    edges: int | None = None
    self_loops: int | None = None
    D: int | None = None
    D2: int | None = None
    sum_pi_sq: float | None = None
    n_sum_pi_sq: float | None = None
    connected: bool | None = None
    ED: float | None = None
    VarD: float | None = None
    ED2: float | None = None
    VarD2_bound: float | None = None
    regime: str | None = None
    leading_estimate: float | None = None
    growth_exponent_in_md: float | None = None
    log_factor: bool | None = None
    t_horizon: float | None = None
    beta: float | None = None
    replicates: int | None = None
    mean_tau: float | None = None
    stderr_tau: float | None = None
    mean_infection_prob: float | None = None
    stderr_infection_prob: float | None = None
    predicted_tau: float | None = None
    gamma_upper: float | None = None
    tau_z_score: float | None = None
    jensen_satisfied: bool | None = None
    ens_replicates: int | None = None
    mean_D: float | None = None
    var_D: float | None = None
    mean_D2: float | None = None
    var_D2: float | None = None
    seeds_per_point: int | None = None
    sd_n_sum_pi_sq: float | None = None
    error: str | None = None
    wall_time_s: float | None = None


#: Emitted column order; everything on ResultRow except wall-clock time.
COLUMNS = tuple(f.name for f in fields(ResultRow) if f.name != "wall_time_s")


@dataclass(frozen=True)
class ExperimentSpec:
    """A parsed, validated experiment description."""

    kind: str
    seed: int
    graph: dict[str, Any] | None = None
    sim: dict[str, Any] | None = None
    ensemble_replicates: int | None = None
    sweep: dict[str, Any] | None = None
    out_path: str | None = None
    out_format: str = "csv"
    description: str | None = None


# ---------------------------------------------------------------------------
# parsing and validation


def _reject_unknown(obj: dict, allowed: set[str], context: str) -> None:
    for key in obj:
        if key not in allowed:
            raise SpecError(f"unknown key {key!r} in {context}")


def _need(obj: dict, key: str, context: str) -> Any:
    if key not in obj:
        raise SpecError(f"missing required key {key!r} in {context}")
    return obj[key]


def _as_int(value: Any, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SpecError(f"{name} must be an integer, got {value!r}")
    return value


def _as_number(value: Any, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SpecError(f"{name} must be a number, got {value!r}")
    return float(value)


def _as_bool(value: Any, name: str) -> bool:
    if not isinstance(value, bool):
        raise SpecError(f"{name} must be true or false, got {value!r}")
    return value


def _scalar_or_list(value: Any, name: str, convert) -> list:
    """Normalize a grid parameter to a list, validating each element."""
    if isinstance(value, list):
        if not value:
            raise SpecError(f"{name} must not be an empty list")
        return [convert(v, name) for v in value]
    return [convert(value, name)]


def _check_positive_int(value: Any, name: str) -> int:
    out = _as_int(value, name)
    if out < 1:
        raise SpecError(f"{name} must be at least 1, got {out}")
    return out


_GRAPH_KEYS = {
    "complete": set(),
    "circulant": {"k"},
    "random_regular": {"r"},
    "gnp": {"p", "require_connected"},
    "expected_degree": {"gamma", "d", "m", "w", "allow_self_loops",
                        "require_connected", "strict"},
}


def _parse_graph(block: Any) -> dict[str, Any]:
    if not isinstance(block, dict):
        raise SpecError("'graph' must be an object")
    family = _need(block, "family", "'graph'")
    if family not in _GRAPH_KEYS:
        raise SpecError(f"unknown graph family {family!r}")
    _reject_unknown(block, {"family", "n"} | _GRAPH_KEYS[family], f"'graph' ({family})")
    out: dict[str, Any] = {"family": family}
    out["n"] = _scalar_or_list(_need(block, "n", "'graph'"), "graph.n", _check_positive_int)
    if family == "circulant":
        out["k"] = _scalar_or_list(_need(block, "k", "'graph'"), "graph.k", _check_positive_int)
    elif family == "random_regular":
        out["r"] = _scalar_or_list(_need(block, "r", "'graph'"), "graph.r", _check_positive_int)
    elif family == "gnp":
        def conv_p(v, name):
            x = _as_number(v, name)
            if not 0.0 <= x <= 1.0:
                raise SpecError(f"{name} must lie in [0, 1], got {x}")
            return x
        out["p"] = _scalar_or_list(_need(block, "p", "'graph'"), "graph.p", conv_p)
        out["require_connected"] = _as_bool(block.get("require_connected", False),
                                            "graph.require_connected")
    elif family == "expected_degree":
        has_w = "w" in block
        has_plaw = any(key in block for key in ("gamma", "d", "m"))
        if has_w and has_plaw:
            raise SpecError("graph block takes either 'w' or 'gamma'/'d'/'m', not both")
        if has_w:
            def conv_w(v, name):
                x = _as_number(v, name)
                if x <= 0:
                    raise SpecError(f"{name} must be positive, got {x}")
                return x
            out["w"] = _scalar_or_list(block["w"], "graph.w", conv_w)
        elif has_plaw:
            def conv_gamma(v, name):
                x = _as_number(v, name)
                if x <= 2:
                    raise SpecError(f"{name} must exceed 2, got {x}")
                return x

            def conv_pos(v, name):
                x = _as_number(v, name)
                if x <= 0:
                    raise SpecError(f"{name} must be positive, got {x}")
                return x

            def conv_m(v, name):
                if v == "sqrt_nd":
                    return v
                return conv_pos(v, name)
            out["gamma"] = _scalar_or_list(_need(block, "gamma", "'graph'"),
                                           "graph.gamma", conv_gamma)
            out["d"] = _scalar_or_list(_need(block, "d", "'graph'"), "graph.d", conv_pos)
            out["m"] = _scalar_or_list(_need(block, "m", "'graph'"), "graph.m", conv_m)
        else:
            raise SpecError("expected_degree graph needs 'w' or 'gamma'/'d'/'m'")
        out["allow_self_loops"] = _as_bool(block.get("allow_self_loops", True),
                                           "graph.allow_self_loops")
        out["require_connected"] = _as_bool(block.get("require_connected", False),
                                            "graph.require_connected")
        out["strict"] = _as_bool(block.get("strict", True), "graph.strict")
    return out


def _parse_sim(block: Any) -> dict[str, Any]:
    if not isinstance(block, dict):
        raise SpecError("'sim' must be an object")
    _reject_unknown(block, {"t_horizon", "beta", "replicates"}, "'sim'")
    t_horizon = _as_number(_need(block, "t_horizon", "'sim'"), "sim.t_horizon")
    if not (math.isfinite(t_horizon) and t_horizon >= 0):
        raise SpecError(f"sim.t_horizon must be finite and non-negative, got {t_horizon}")
    beta = _as_number(block.get("beta", 0.0), "sim.beta")
    if not (math.isfinite(beta) and beta >= 0):
        raise SpecError(f"sim.beta must be finite and non-negative, got {beta}")
    replicates = _as_int(_need(block, "replicates", "'sim'"), "sim.replicates")
    if replicates < 2:
        raise SpecError(f"sim.replicates must be at least 2, got {replicates}")
    return {"t_horizon": t_horizon, "beta": beta, "replicates": replicates}


def _parse_sweep(block: Any) -> dict[str, Any]:
    if not isinstance(block, dict):
        raise SpecError("'sweep' must be an object")
    _reject_unknown(block, {"n", "gamma", "d", "m", "seeds_per_point",
                            "allow_self_loops", "strict"}, "'sweep'")

    def conv_gamma(v, name):
        x = _as_number(v, name)
        if x <= 2:
            raise SpecError(f"{name} must exceed 2, got {x}")
        return x

    def conv_pos(v, name):
        x = _as_number(v, name)
        if x <= 0:
            raise SpecError(f"{name} must be positive, got {x}")
        return x

    def conv_m(v, name):
        if v == "sqrt_nd":
            return v
        return conv_pos(v, name)

    out = {
        "n": _scalar_or_list(_need(block, "n", "'sweep'"), "sweep.n", _check_positive_int),
        "gamma": _scalar_or_list(_need(block, "gamma", "'sweep'"), "sweep.gamma", conv_gamma),
        "d": _scalar_or_list(_need(block, "d", "'sweep'"), "sweep.d", conv_pos),
        "m": _scalar_or_list(_need(block, "m", "'sweep'"), "sweep.m", conv_m),
        "seeds_per_point": _check_positive_int(block.get("seeds_per_point", 1),
                                               "sweep.seeds_per_point"),
        "allow_self_loops": _as_bool(block.get("allow_self_loops", True),
                                     "sweep.allow_self_loops"),
        "strict": _as_bool(block.get("strict", True), "sweep.strict"),
    }
    return out


def parse_spec(text: str) -> ExperimentSpec:
    """Parse and validate a JSON experiment spec.

    Raises :class:`SpecError` with the offending location or key for any
    syntax error, unknown key, missing key or out-of-range value.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(
            f"spec is not valid JSON: {exc.msg} at line {exc.lineno}, column {exc.colno}"
        ) from exc
    if not isinstance(doc, dict):
        raise SpecError("spec must be a JSON object")
    kind = _need(doc, "kind", "spec")
    if kind not in KINDS:
        raise SpecError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
    _reject_unknown(doc, {"kind", "seed", "description", "output", "graph", "sim",
                          "ensemble", "sweep"}, "spec")
    seed = _as_int(_need(doc, "seed", "spec"), "seed")
    if seed < 0:
        raise SpecError(f"seed must be non-negative, got {seed}")
    description = doc.get("description")
    if description is not None and not isinstance(description, str):
        raise SpecError("description must be a string")
    out_path, out_format = None, "csv"
    if "output" in doc:
        blk = doc["output"]
        if not isinstance(blk, dict):
            raise SpecError("'output' must be an object")
        _reject_unknown(blk, {"path", "format"}, "'output'")
        out_path = _need(blk, "path", "'output'")
        if not isinstance(out_path, str):
            raise SpecError("output.path must be a string")
        out_format = blk.get("format", "csv")
        if out_format not in FORMATS:
            raise SpecError(f"output.format must be one of {', '.join(FORMATS)}")

    graph = sim = sweep = None
    ens_reps = None
    if kind in ("analyze", "simulate", "ensemble"):
        graph = _parse_graph(_need(doc, "graph", "spec"))
        for key in ("sweep",):
            if key in doc:
                raise SpecError(f"key {key!r} is not valid for kind {kind!r}")
    if kind == "simulate":
        sim = _parse_sim(_need(doc, "sim", "spec"))
    elif "sim" in doc:
        raise SpecError(f"key 'sim' is not valid for kind {kind!r}")
    if kind == "ensemble":
        blk = _need(doc, "ensemble", "spec")
        if not isinstance(blk, dict):
            raise SpecError("'ensemble' must be an object")
        _reject_unknown(blk, {"replicates"}, "'ensemble'")
        ens_reps = _as_int(_need(blk, "replicates", "'ensemble'"), "ensemble.replicates")
        if ens_reps < 2:
            raise SpecError(f"ensemble.replicates must be at least 2, got {ens_reps}")
    elif "ensemble" in doc:
        raise SpecError(f"key 'ensemble' is not valid for kind {kind!r}")
    if kind == "sweep":
        sweep = _parse_sweep(_need(doc, "sweep", "spec"))
        if "graph" in doc:
            raise SpecError("key 'graph' is not valid for kind 'sweep'")
    return ExperimentSpec(kind=kind, seed=seed, graph=graph, sim=sim,
                          ensemble_replicates=ens_reps, sweep=sweep,
                          out_path=out_path, out_format=out_format,
                          description=description)


def load_spec(path: str) -> ExperimentSpec:
    """Read and parse a spec file."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_spec(fh.read())


# ---------------------------------------------------------------------------
# grid expansion

#: Grid axes in expansion order: the leftmost present axis varies slowest.
_GRID_AXES = ("n", "k", "r", "p", "gamma", "d", "m", "w")


def expand_grid(spec: ExperimentSpec) -> list[dict[str, Any]]:
    """Enumerate grid points in deterministic order.

    The cartesian product runs over the axes present in the spec, ordered
    ``n, k, r, p, gamma, d, m, w`` with the last axis varying fastest.
    Each point carries its scalar parameters; an ``m`` of "sqrt_nd" is
    resolved to sqrt(n * d) here.
    """
    block = spec.sweep if spec.kind == "sweep" else spec.graph
    axes = [name for name in _GRID_AXES if name in block]
    combos = product(*(block[name] for name in axes))
    points = []
    for combo in combos:
        point = dict(zip(axes, combo))
        if point.get("m") == "sqrt_nd":
            point["m"] = math.sqrt(point["n"] * point["d"])
        points.append(point)
    return points


# ---------------------------------------------------------------------------
# execution


def _gen_spec_for(spec: ExperimentSpec, point: dict[str, Any], seed: int) -> GenSpec:
    if spec.kind == "sweep":
        return GenSpec(family="expected_degree", n=point["n"], seed=seed,
                       gamma=point["gamma"], d=point["d"], m=point["m"],
                       allow_self_loops=spec.sweep["allow_self_loops"],
                       strict=spec.sweep["strict"])
    graph = spec.graph
    return GenSpec(
        family=graph["family"], n=point["n"], seed=seed,
        k=point.get("k"), r=point.get("r"), p=point.get("p"),
        gamma=point.get("gamma"), d=point.get("d"), m=point.get("m"),
        w=point.get("w"),
        allow_self_loops=graph.get("allow_self_loops", True),
        require_connected=graph.get("require_connected", False),
        strict=graph.get("strict", True),
    )


def _fill_closed_forms(row: ResultRow, gen: GenSpec) -> None:
    """Closed-form moment predictions, where the pair model defines them."""
    if gen.family == "gnp":
        er = er_moments(gen.n, gen.p)
        row.ED, row.VarD, row.ED2, row.VarD2_bound = er.ED, er.VarD, er.ED2, er.VarD2_bound
    elif gen.family == "expected_degree":
        cf = closed_form_moments(weights_for(gen), strict=gen.strict)
        row.ED, row.VarD, row.ED2, row.VarD2_bound = cf.ED, cf.VarD, cf.ED2, cf.VarD2_bound
        if gen.gamma is not None:
            pred = predict_scaling(gen.gamma, gen.d, gen.m)
            row.regime = pred.regime
            row.leading_estimate = pred.leading_estimate
            row.growth_exponent_in_md = pred.growth_exponent_in_md
            row.log_factor = pred.has_log_factor


def _run_point(spec: ExperimentSpec, index: int, point: dict[str, Any]) -> ResultRow:
    start = time.perf_counter()
    point_seed = derive_seed(spec.seed, index)
    family = "expected_degree" if spec.kind == "sweep" else spec.graph["family"]
    row = ResultRow(row=index, kind=spec.kind, family=family, seed=point_seed,
                    n=point.get("n"), k=point.get("k"), r=point.get("r"),
                    p=point.get("p"), gamma=point.get("gamma"), d=point.get("d"),
                    m=point.get("m"), w=point.get("w"))
    try:
        gen = _gen_spec_for(spec, point, derive_seed(point_seed, 0))
        _fill_closed_forms(row, gen)
        if spec.kind in ("analyze", "simulate"):
            g = generate(gen)
            stats = degree_statistics(g)
            row.edges = g.edge_count
            row.self_loops = g.self_loop_count
            row.D = stats.D
            row.D2 = stats.D2
            row.sum_pi_sq = stats.coincidence_rate
            row.n_sum_pi_sq = g.n * stats.coincidence_rate
            row.connected = is_connected(g)
            if spec.kind == "simulate":
                cfg = SimConfig(t_horizon=spec.sim["t_horizon"], beta=spec.sim["beta"],
                                replicates=spec.sim["replicates"],
                                master_seed=derive_seed(point_seed, 1))
                check = verify_theorem1(g, cfg)
                row.t_horizon = cfg.t_horizon
                row.beta = cfg.beta
                row.replicates = cfg.replicates
                row.mean_tau = check.mc.mean_tau
                row.stderr_tau = check.mc.stderr_tau
                row.mean_infection_prob = check.mc.mean_infection_prob
                row.stderr_infection_prob = check.mc.stderr_infection_prob
                row.predicted_tau = check.predicted_tau
                row.gamma_upper = check.gamma_upper
                row.tau_z_score = check.tau_z_score
                row.jensen_satisfied = check.jensen_satisfied
        elif spec.kind == "ensemble":
            ens = ensemble_estimate(gen, spec.ensemble_replicates,
                                    seed=derive_seed(point_seed, 0))
            row.ens_replicates = ens.replicates
            row.mean_D = ens.mean_D
            row.var_D = ens.var_D
            row.mean_D2 = ens.mean_D2
            row.var_D2 = ens.var_D2
        else:
            draw = sampler_for(gen)
            per_point = spec.sweep["seeds_per_point"]
            base = derive_seed(point_seed, 0)
            ratios = np.empty(per_point)
            for j in range(per_point):
                g = draw(derive_seed(base, j))
                ratios[j] = g.n * degree_statistics(g).coincidence_rate
            row.seeds_per_point = per_point
            row.n_sum_pi_sq = float(ratios.mean())
            if per_point >= 2:
                row.sd_n_sum_pi_sq = float(ratios.std(ddof=1))
    except (ValueError, GenerationError) as exc:
        row.error = str(exc)
    row.wall_time_s = time.perf_counter() - start
    return row


def run_experiment(spec: ExperimentSpec, jobs: int = 1) -> list[ResultRow]:
    """Execute every grid point; rows come back in grid order.

    Grid point i derives its seed as (spec.seed, i), so results do not
    depend on ``jobs``.  A point that fails validation or generation
    produces a row with its ``error`` field set instead of aborting the
    whole run.
    """
    if jobs < 1:
        raise ValueError("jobs must be at least 1")
    points = expand_grid(spec)
    if jobs == 1:
        return [_run_point(spec, i, pt) for i, pt in enumerate(points)]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda args: _run_point(spec, *args),
                             enumerate(points)))


# ---------------------------------------------------------------------------
# emission


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit(rows: list[ResultRow], fmt: str = "csv", path: str | None = None) -> str:
    """Serialize rows to CSV or JSON; optionally also write them to a file.

    Output is byte-deterministic: fixed column order, repr float
    formatting (shortest round-trip decimal), lowercase booleans, empty
    cell / null for absent values, and "\\n" line endings.
    """
    if not rows:
        raise ValueError("no rows to emit")
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {', '.join(FORMATS)}")
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in rows:
            writer.writerow([_cell(getattr(row, name)) for name in COLUMNS])
        text = buf.getvalue()
    else:
        records = [{name: getattr(row, name) for name in COLUMNS} for row in rows]
        text = json.dumps(records, indent=2) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text
