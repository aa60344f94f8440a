"""Config-driven experiment runner.

Experiments are described by a JSON spec file (one object per run; unknown
keys are hard errors, so typos cannot silently change an experiment) and
executed by one of six subcommands:

    hetcache <eval|optimize|simulate|tradeoff|sweep|compare>
        --spec FILE [--out PATH] [--seed N] [--realizations N]
        [--plot] [--dump-defaults]

Every run writes a CSV artifact (comma separated, '.' decimal, header row,
LF line endings) and prints a one-line summary.  --plot additionally renders
a PNG next to the CSV.  Exit codes: 0 success, 2 validation error,
3 numerical failure.  --dump-defaults prints the default spec for the chosen
subcommand; the dump re-parses to an identical spec.
"""
from __future__ import annotations

import argparse
import copy
import dataclasses
import json
import sys

import numpy as np

from .analytics import (association_matrix, total_sdp_general,
                        total_sdp_interference_limited)
from .model import (CachingPolicy, ContentCatalog, NetworkConfig, TierParams,
                    db_to_linear, dbm_to_watts, density_per_m2,
                    make_zipf_catalog, validate_policy, watts_to_dbm)
from .optimize import (SolveOptions, baseline_popular, baseline_uniform,
                       solve_p1, solve_p2_equivalent)
from .simulate import SimSettings, estimate_sdp
from .specfun import NumericalError, channel_constants
from .tradeoff import (cross_tier_curves, same_tier_density_curve,
                       same_tier_power_curve)

COMMANDS = ("eval", "optimize", "simulate", "tradeoff", "sweep", "compare")

SWEEP_PARAMETERS = ("zipf_exponent", "sinr_threshold_db", "cache_size",
                    "power_dbm", "density_per_m2")

DEFAULT_NETWORK = {
    "path_loss_exponent": 4.0,
    "sinr_threshold_db": -10.0,
    "noise_power_watts": 0.0,
    "tiers": [
        {"power_dbm": 53.0, "density": {"k": 1.0, "r": 500.0}, "cache_size": 25.0},
        {"power_dbm": 33.0, "density": {"k": 5.0, "r": 500.0}, "cache_size": 10.0},
    ],
}

DEFAULT_SIM = {"window_side": 5000.0, "realizations": 10000, "seed": 1,
               "noise_power_watts": 0.0}

DEFAULT_SPECS = {
    "eval": {
        "command": "eval",
        "network": DEFAULT_NETWORK,
        "catalog": {"size": 200, "zipf_exponent": 0.8},
        "policy": {"kind": "uniform"},
        "model": "interference-limited",
        "output": "eval.csv",
        "plot": False,
    },
    "optimize": {
        "command": "optimize",
        "network": DEFAULT_NETWORK,
        "catalog": {"size": 200, "zipf_exponent": 0.8},
        "solver": {"method": "block-kkt"},
        "output": "optimize.csv",
        "plot": False,
    },
    "simulate": {
        "command": "simulate",
        "network": DEFAULT_NETWORK,
        "catalog": {"size": 200, "zipf_exponent": 0.8},
        "policy": {"kind": "uniform"},
        "sim": DEFAULT_SIM,
        "output": "simulate.csv",
        "plot": False,
    },
    "tradeoff": {
        "command": "tradeoff",
        "network": DEFAULT_NETWORK,
        "catalog": {"size": 200, "zipf_exponent": 0.8},
        "tradeoff": {
            "kind": "same-tier-density",
            "tier": 1,
            "target_qe": 20.0,
            "grid": {"start": 0.5, "stop": 40.0, "count": 80},
            "cases": [
                {"name": "case1", "powers_dbm": [43.0, 33.0]},
                {"name": "case2", "powers_dbm": [53.0, 33.0]},
            ],
        },
        "output": "tradeoff.csv",
        "plot": False,
    },
    "sweep": {
        "command": "sweep",
        "network": DEFAULT_NETWORK,
        "catalog": {"size": 200, "zipf_exponent": 0.8},
        "sweep": {"parameter": "cache_size", "tier": 1,
                  "values": [5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0]},
        "policies": ["optimal", "popular", "uniform"],
        "output": "sweep.csv",
        "plot": False,
    },
    "compare": {
        "command": "compare",
        "network": {
            "path_loss_exponent": 4.0,
            "sinr_threshold_db": -10.0,
            "noise_power_watts": 0.0,
            "tiers": [
                {"power_dbm": 53.0, "density": {"k": 1.0, "r": 500.0}, "cache_size": 200.0},
                {"power_dbm": 33.0, "density": {"k": 5.0, "r": 500.0}, "cache_size": 50.0},
            ],
        },
        "catalog": {"size": 1000},
        "gammas": [0.2, 0.6, 1.0, 1.4, 1.8],
        "sim": DEFAULT_SIM,
        "output": "compare.csv",
        "plot": False,
    },
}


class SpecError(ValueError):
    """Invalid experiment spec; the message names the offending field."""


# ---------------------------------------------------------------------------
# Spec parsing (strict: unknown keys are hard errors)
# ---------------------------------------------------------------------------

def _check_keys(obj, path, allowed, required=()):
    if not isinstance(obj, dict):
        raise SpecError(f"{path}: expected an object, got {type(obj).__name__}")
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise SpecError(f"{path}: unknown key(s) {unknown}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise SpecError(f"{path}: missing required key(s) {missing}")


def _number(obj, path):
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise SpecError(f"{path}: expected a number, got {obj!r}")
    return float(obj)


def _integer(obj, path):
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise SpecError(f"{path}: expected an integer, got {obj!r}")
    return obj


def _parse_density(obj, path) -> float:
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return float(obj)
    _check_keys(obj, path, allowed=("k", "r", "per_m2"))
    if "per_m2" in obj:
        if "k" in obj or "r" in obj:
            raise SpecError(f"{path}: give either per_m2 or the (k, r) shorthand")
        return _number(obj["per_m2"], f"{path}.per_m2")
    if "k" not in obj or "r" not in obj:
        raise SpecError(f"{path}: the density shorthand needs both k and r")
    return density_per_m2(_number(obj["k"], f"{path}.k"), _number(obj["r"], f"{path}.r"))


def _parse_tier(obj, path) -> TierParams:
    _check_keys(obj, path, allowed=("power_dbm", "power_watts", "density", "cache_size"),
                required=("density", "cache_size"))
    if ("power_dbm" in obj) == ("power_watts" in obj):
        raise SpecError(f"{path}: give exactly one of power_dbm, power_watts")
    power = dbm_to_watts(_number(obj["power_dbm"], f"{path}.power_dbm")) \
        if "power_dbm" in obj else _number(obj["power_watts"], f"{path}.power_watts")
    try:
        return TierParams(density=_parse_density(obj["density"], f"{path}.density"),
                          power=power,
                          cache_size=_number(obj["cache_size"], f"{path}.cache_size"))
    except ValueError as exc:
        raise SpecError(f"{path}: {exc}") from exc


def _parse_network(obj, path="network") -> NetworkConfig:
    _check_keys(obj, path,
                allowed=("path_loss_exponent", "sinr_threshold_db", "sinr_threshold",
                         "noise_power_watts", "tiers"),
                required=("path_loss_exponent", "tiers"))
    if ("sinr_threshold_db" in obj) == ("sinr_threshold" in obj):
        raise SpecError(f"{path}: give exactly one of sinr_threshold_db, sinr_threshold")
    tau = db_to_linear(_number(obj["sinr_threshold_db"], f"{path}.sinr_threshold_db")) \
        if "sinr_threshold_db" in obj \
        else _number(obj["sinr_threshold"], f"{path}.sinr_threshold")
    tiers_obj = obj["tiers"]
    if not isinstance(tiers_obj, list) or not tiers_obj:
        raise SpecError(f"{path}.tiers: expected a non-empty array")
    tiers = tuple(_parse_tier(t, f"{path}.tiers[{k}]") for k, t in enumerate(tiers_obj))
    try:
        return NetworkConfig(
            tiers=tiers,
            path_loss_exponent=_number(obj["path_loss_exponent"], f"{path}.path_loss_exponent"),
            sinr_threshold=tau,
            noise_power=_number(obj.get("noise_power_watts", 0.0), f"{path}.noise_power_watts"))
    except ValueError as exc:
        raise SpecError(f"{path}: {exc}") from exc


def _parse_catalog(obj, path="catalog", size_only=False) -> ContentCatalog | int:
    if size_only:
        _check_keys(obj, path, allowed=("size",), required=("size",))
        return _integer(obj["size"], f"{path}.size")
    _check_keys(obj, path, allowed=("size", "zipf_exponent", "popularity"),
                required=("size",))
    size = _integer(obj["size"], f"{path}.size")
    if ("zipf_exponent" in obj) == ("popularity" in obj):
        raise SpecError(f"{path}: give exactly one of zipf_exponent, popularity")
    try:
        if "zipf_exponent" in obj:
            return make_zipf_catalog(size, _number(obj["zipf_exponent"],
                                                   f"{path}.zipf_exponent"))
        pop = obj["popularity"]
        if not isinstance(pop, list):
            raise SpecError(f"{path}.popularity: expected an array")
        return ContentCatalog(size=size, popularity=np.array(
            [_number(t, f"{path}.popularity[{k}]") for k, t in enumerate(pop)]))
    except ValueError as exc:
        raise SpecError(f"{path}: {exc}") from exc


def _parse_policy(obj, path, config: NetworkConfig, catalog: ContentCatalog,
                  solver: SolveOptions = SolveOptions()) -> CachingPolicy:
    _check_keys(obj, path, allowed=("kind", "matrix"), required=("kind",))
    kind = obj["kind"]
    if kind not in ("uniform", "popular", "optimal", "explicit"):
        raise SpecError(f"{path}.kind: unknown policy kind {kind!r}")
    if (kind == "explicit") != ("matrix" in obj):
        raise SpecError(f"{path}: a matrix is required iff kind is 'explicit'")
    try:
        if kind == "uniform":
            return baseline_uniform(config, catalog)
        if kind == "popular":
            return baseline_popular(config, catalog)
        if kind == "optimal":
            policy, cert, _ = solve_p1(config, catalog, solver)
            if not cert.accepted:
                raise NumericalError(
                    f"optimal-policy solve did not certify "
                    f"(stationarity residual {cert.stationarity_residual:.3e})")
            return policy
        policy = CachingPolicy(np.array(obj["matrix"], dtype=float))
    except NumericalError:
        raise
    except ValueError as exc:
        raise SpecError(f"{path}: {exc}") from exc
    violations = validate_policy(policy, config, catalog)
    if violations:
        first = violations[0]
        raise SpecError(
            f"{path}.matrix: {len(violations)} constraint violation(s); first is "
            f"{first.kind} at tier {first.tier}"
            + ("" if first.content is None else f", content {first.content}")
            + f" (amount {first.amount:.3g})")
    return policy


def _parse_solver(obj, path="solver") -> SolveOptions:
    if obj is None:
        return SolveOptions()
    _check_keys(obj, path, allowed=("method", "max_outer_iters", "convergence_tol",
                                    "bisection_tol"))
    try:
        return SolveOptions(
            max_outer_iters=_integer(obj.get("max_outer_iters", 5000),
                                     f"{path}.max_outer_iters"),
            convergence_tol=_number(obj.get("convergence_tol", 1e-9),
                                    f"{path}.convergence_tol"),
            bisection_tol=_number(obj.get("bisection_tol", 1e-12),
                                  f"{path}.bisection_tol"),
            method=obj.get("method", "block-kkt"))
    except ValueError as exc:
        raise SpecError(f"{path}: {exc}") from exc


def _parse_sim(obj, path, overrides, default_noise=0.0) -> SimSettings:
    if obj is None:
        obj = {}
    _check_keys(obj, path, allowed=("window_side", "realizations", "seed",
                                    "noise_power_watts"))
    seed = overrides.seed if overrides.seed is not None else obj.get("seed")
    if seed is None:
        raise SpecError(f"{path}.seed: randomized commands need an explicit seed "
                        "(in the spec or via --seed)")
    realizations = overrides.realizations if overrides.realizations is not None \
        else obj.get("realizations", 10000)
    try:
        return SimSettings(
            seed=_integer(seed, f"{path}.seed"),
            window_side=_number(obj.get("window_side", 5000.0), f"{path}.window_side"),
            realizations=_integer(realizations, f"{path}.realizations"),
            noise_power=_number(obj.get("noise_power_watts", default_noise),
                                f"{path}.noise_power_watts"))
    except ValueError as exc:
        raise SpecError(f"{path}: {exc}") from exc


def _tier_index(obj, path, config: NetworkConfig) -> int:
    idx = _integer(obj, path)
    if not 1 <= idx <= config.n_tiers:
        raise SpecError(f"{path}: tier index {idx} outside 1..{config.n_tiers}")
    return idx - 1


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".12g")


def _write_csv(path: str, columns: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


# ---------------------------------------------------------------------------
# Command runners: each returns (columns, rows, summary, exit_code)
# ---------------------------------------------------------------------------

def _run_eval(spec, overrides):
    _check_keys(spec, "spec", allowed=("command", "network", "catalog", "policy",
                                       "model", "output", "plot"),
                required=("command", "network", "catalog", "policy"))
    config = _parse_network(spec["network"])
    catalog = _parse_catalog(spec["catalog"])
    policy = _parse_policy(spec["policy"], "policy", config, catalog)
    model = spec.get("model", "interference-limited")
    if model == "interference-limited":
        report = total_sdp_interference_limited(config, catalog, policy)
    elif model == "general":
        report = total_sdp_general(config, catalog, policy)
    else:
        raise SpecError(f"model: expected interference-limited or general, got {model!r}")
    n = config.n_tiers
    w = association_matrix(config, catalog, policy).w
    columns = (["content", "popularity"]
               + [f"w_tier{i+1}" for i in range(n)]
               + [f"joint_tier{i+1}" for i in range(n)]
               + ["success_given_request", "contribution"])
    rows = []
    for j in range(catalog.size):
        given = float(report.per_pair[:, j].sum())
        rows.append([j + 1, catalog.popularity[j]]
                    + [w[i, j] for i in range(n)]
                    + [report.per_pair[i, j] for i in range(n)]
                    + [given, catalog.popularity[j] * given])
    summary = (f"eval: sdp={report.total:.6g} mode={report.mode} "
               f"tiers={n} contents={catalog.size}")
    return columns, rows, summary, 0


def _run_optimize(spec, overrides):
    _check_keys(spec, "spec", allowed=("command", "network", "catalog", "solver",
                                       "output", "plot"),
                required=("command", "network", "catalog"))
    config = _parse_network(spec["network"])
    catalog = _parse_catalog(spec["catalog"])
    options = _parse_solver(spec.get("solver"))
    policy, cert, achieved = solve_p1(config, catalog, options)
    try:
        _x, q_e, bound = solve_p2_equivalent(config, catalog)
    except ValueError:
        q_e, bound = None, None
    n = config.n_tiers
    columns = ["content", "popularity"] + [f"p_tier{i+1}" for i in range(n)]
    rows = [[j + 1, catalog.popularity[j]] + [policy.probs[i, j] for i in range(n)]
            for j in range(catalog.size)]
    summary = (f"optimize: sdp={achieved:.6g}"
               + (f" bound={bound:.6g} q_e={q_e:.6g}" if bound is not None else "")
               + f" kkt={'ok' if cert.accepted else 'FAILED'}"
               + f" stationarity={cert.stationarity_residual:.2e}"
               + f" budget={cert.budget_residual:.2e}")
    return columns, rows, summary, 0 if cert.accepted else 3


def _run_simulate(spec, overrides):
    _check_keys(spec, "spec", allowed=("command", "network", "catalog", "policy",
                                       "sim", "output", "plot"),
                required=("command", "network", "catalog", "policy", "sim"))
    config = _parse_network(spec["network"])
    catalog = _parse_catalog(spec["catalog"])
    policy = _parse_policy(spec["policy"], "policy", config, catalog)
    settings = _parse_sim(spec["sim"], "sim", overrides,
                          default_noise=config.noise_power)
    estimate = estimate_sdp(config, catalog, policy, settings)
    if settings.noise_power == 0.0:
        analytic = total_sdp_interference_limited(config, catalog, policy).total
    else:
        analytic_cfg = dataclasses.replace(config, noise_power=settings.noise_power)
        analytic = total_sdp_general(analytic_cfg, catalog, policy).total
    columns = ["realizations", "seed", "window_side", "sdp_hat", "stderr",
               "analytic_sdp", "abs_error"]
    rows = [[estimate.realizations, settings.seed, settings.window_side,
             estimate.sdp_hat, estimate.stderr, analytic,
             abs(estimate.sdp_hat - analytic)]]
    summary = (f"simulate: sdp_hat={estimate.sdp_hat:.6g} "
               f"stderr={estimate.stderr:.3g} analytic={analytic:.6g} "
               f"realizations={estimate.realizations}")
    return columns, rows, summary, 0


def _tradeoff_case_config(base: NetworkConfig, case, path) -> tuple[str, NetworkConfig]:
    _check_keys(case, path, allowed=("name", "powers_dbm", "densities", "cache_sizes"),
                required=("name",))
    name = case["name"]
    if not isinstance(name, str) or not name:
        raise SpecError(f"{path}.name: expected a non-empty string")
    config = base
    if "powers_dbm" in case:
        vals = case["powers_dbm"]
        if not isinstance(vals, list) or len(vals) != base.n_tiers:
            raise SpecError(f"{path}.powers_dbm: expected {base.n_tiers} values")
        for i, v in enumerate(vals):
            config = config.with_tier(i, power=dbm_to_watts(
                _number(v, f"{path}.powers_dbm[{i}]")))
    if "densities" in case:
        vals = case["densities"]
        if not isinstance(vals, list) or len(vals) != base.n_tiers:
            raise SpecError(f"{path}.densities: expected {base.n_tiers} values")
        for i, v in enumerate(vals):
            config = config.with_tier(i, density=_parse_density(
                v, f"{path}.densities[{i}]"))
    if "cache_sizes" in case:
        vals = case["cache_sizes"]
        if not isinstance(vals, list) or len(vals) != base.n_tiers:
            raise SpecError(f"{path}.cache_sizes: expected {base.n_tiers} values")
        for i, v in enumerate(vals):
            config = config.with_tier(i, cache_size=_number(
                v, f"{path}.cache_sizes[{i}]"))
    return name, config


def _run_tradeoff(spec, overrides):
    _check_keys(spec, "spec", allowed=("command", "network", "catalog", "tradeoff",
                                       "output", "plot"),
                required=("command", "network", "catalog", "tradeoff"))
    config = _parse_network(spec["network"])
    catalog = _parse_catalog(spec["catalog"])
    section = spec["tradeoff"]
    _check_keys(section, "tradeoff",
                allowed=("kind", "tier", "affected_tier", "target_qe", "grid", "cases"),
                required=("kind", "tier", "target_qe", "grid"))
    kind = section["kind"]
    kinds = ("same-tier-density", "same-tier-power",
             "cross-tier-density", "cross-tier-power")
    if kind not in kinds:
        raise SpecError(f"tradeoff.kind: expected one of {kinds}, got {kind!r}")
    tier = _tier_index(section["tier"], "tradeoff.tier", config)
    target_qe = _number(section["target_qe"], "tradeoff.target_qe")
    cross = kind.startswith("cross-tier")
    if cross:
        if "affected_tier" not in section:
            raise SpecError("tradeoff.affected_tier: required for cross-tier kinds")
        affected = _tier_index(section["affected_tier"], "tradeoff.affected_tier", config)
        if affected == tier:
            raise SpecError("tradeoff.affected_tier: must differ from tradeoff.tier")
    elif "affected_tier" in section:
        raise SpecError("tradeoff.affected_tier: only valid for cross-tier kinds")
    grid_obj = section["grid"]
    if isinstance(grid_obj, dict) and "values" in grid_obj:
        _check_keys(grid_obj, "tradeoff.grid", allowed=("values",))
        grid = [_number(v, f"tradeoff.grid.values[{k}]")
                for k, v in enumerate(grid_obj["values"])]
    else:
        _check_keys(grid_obj, "tradeoff.grid", allowed=("start", "stop", "count"),
                    required=("start", "stop", "count"))
        grid = np.linspace(_number(grid_obj["start"], "tradeoff.grid.start"),
                           _number(grid_obj["stop"], "tradeoff.grid.stop"),
                           _integer(grid_obj["count"], "tradeoff.grid.count")).tolist()
    cases_obj = section.get("cases", [{"name": "case1"}])
    if not isinstance(cases_obj, list) or not cases_obj:
        raise SpecError("tradeoff.cases: expected a non-empty array")
    cases = [_tradeoff_case_config(config, c, f"tradeoff.cases[{k}]")
             for k, c in enumerate(cases_obj)]

    value_tier = affected if cross else tier
    value_stub = f"lambda{value_tier+1}" if kind.endswith("density") \
        else f"s{value_tier+1}_dbm"
    columns = [f"Q{tier+1}"]
    for name, _cfg in cases:
        columns += [f"{value_stub}_{name}", f"flag_{name}"]
    per_case = []
    n_rejected = 0
    for name, cfg in cases:
        if kind == "same-tier-density":
            curve = same_tier_density_curve(cfg, tier, target_qe, grid)
        elif kind == "same-tier-power":
            curve = same_tier_power_curve(cfg, tier, target_qe, grid)
        else:
            density_curve, power_curve = cross_tier_curves(
                cfg, tier, affected, target_qe, grid)
            curve = density_curve if kind == "cross-tier-density" else power_curve
        accepted = dict(curve.points)
        rejected = dict(curve.rejected)
        n_rejected += len(curve.rejected)
        per_case.append((accepted, rejected, curve))
    rows = []
    for q in grid:
        row = [q]
        for accepted, rejected, curve in per_case:
            if q in accepted:
                value = accepted[q]
                if curve.kind.endswith("power"):
                    value = watts_to_dbm(value)
                row += [value, "ok"]
            else:
                row += [None, rejected.get(q, "singular")]
        rows.append(row)
    sdp = None
    if target_qe <= catalog.size:
        cc = channel_constants(config.sinr_threshold, config.path_loss_exponent)
        sdp = target_qe / (cc.T * target_qe + cc.D * catalog.size)
    summary = (f"tradeoff: kind={kind} cases={len(cases)} grid={len(grid)} "
               f"rejected={n_rejected}"
               + (f" target_sdp={sdp:.6g}" if sdp is not None else ""))
    return columns, rows, summary, 0


def _policy_for(name, config, catalog):
    if name == "uniform":
        return baseline_uniform(config, catalog)
    if name == "popular":
        return baseline_popular(config, catalog)
    policy, cert, _ = solve_p1(config, catalog)
    if not cert.accepted:
        raise NumericalError(
            f"optimal-policy solve did not certify "
            f"(stationarity residual {cert.stationarity_residual:.3e})")
    return policy


def _run_sweep(spec, overrides):
    _check_keys(spec, "spec", allowed=("command", "network", "catalog", "sweep",
                                       "policies", "output", "plot"),
                required=("command", "network", "catalog", "sweep"))
    config = _parse_network(spec["network"])
    catalog = _parse_catalog(spec["catalog"])
    section = spec["sweep"]
    _check_keys(section, "sweep", allowed=("parameter", "values", "tier"),
                required=("parameter", "values"))
    parameter = section["parameter"]
    if parameter not in SWEEP_PARAMETERS:
        raise SpecError(f"sweep.parameter: expected one of {SWEEP_PARAMETERS}, "
                        f"got {parameter!r}")
    per_tier = parameter in ("cache_size", "power_dbm", "density_per_m2")
    if per_tier != ("tier" in section):
        raise SpecError(f"sweep.tier: required iff parameter is per-tier, "
                        f"parameter={parameter!r}")
    tier = _tier_index(section["tier"], "sweep.tier", config) if per_tier else None
    values_obj = section["values"]
    if not isinstance(values_obj, list) or not values_obj:
        raise SpecError("sweep.values: expected a non-empty array")
    policies = spec.get("policies", ["optimal"])
    if (not isinstance(policies, list) or not policies
            or any(p not in ("optimal", "popular", "uniform") for p in policies)):
        raise SpecError("policies: expected a non-empty subset of "
                        "['optimal', 'popular', 'uniform']")
    columns = [parameter] + [f"sdp_{p}" for p in policies]
    rows = []
    for k, raw in enumerate(values_obj):
        path = f"sweep.values[{k}]"
        point_catalog = catalog
        point_config = config
        if parameter == "zipf_exponent":
            x = _number(raw, path)
            point_catalog = make_zipf_catalog(catalog.size, x)
        elif parameter == "sinr_threshold_db":
            x = _number(raw, path)
            point_config = dataclasses.replace(config, sinr_threshold=db_to_linear(x))
        elif parameter == "cache_size":
            x = _number(raw, path)
            point_config = config.with_tier(tier, cache_size=x)
        elif parameter == "power_dbm":
            x = _number(raw, path)
            point_config = config.with_tier(tier, power=dbm_to_watts(x))
        else:
            x = _parse_density(raw, path)
            point_config = config.with_tier(tier, density=x)
        try:
            point_config.check_cache_sizes(point_catalog)
        except ValueError as exc:
            raise SpecError(f"{path}: {exc}") from exc
        row = [x]
        for p in policies:
            policy = _policy_for(p, point_config, point_catalog)
            row.append(total_sdp_interference_limited(
                point_config, point_catalog, policy).total)
        rows.append(row)
    summary = (f"sweep: parameter={parameter} points={len(rows)} "
               f"policies={','.join(policies)}")
    return columns, rows, summary, 0


def _run_compare(spec, overrides):
    _check_keys(spec, "spec", allowed=("command", "network", "catalog", "gammas",
                                       "sim", "output", "plot"),
                required=("command", "network", "catalog", "gammas", "sim"))
    config = _parse_network(spec["network"])
    size = _parse_catalog(spec["catalog"], size_only=True)
    gammas = spec["gammas"]
    if not isinstance(gammas, list) or not gammas:
        raise SpecError("gammas: expected a non-empty array")
    settings = _parse_sim(spec["sim"], "sim", overrides,
                          default_noise=config.noise_power)
    columns = ["gamma", "sdp_optimal", "sdp_popular", "sdp_uniform",
               "sdp_sim_optimal", "sim_stderr"]
    rows = []
    for k, raw in enumerate(gammas):
        gamma = _number(raw, f"gammas[{k}]")
        catalog = make_zipf_catalog(size, gamma)
        config.check_cache_sizes(catalog)
        optimal = _policy_for("optimal", config, catalog)
        sdp_optimal = total_sdp_interference_limited(config, catalog, optimal).total
        sdp_popular = total_sdp_interference_limited(
            config, catalog, baseline_popular(config, catalog)).total
        sdp_uniform = total_sdp_interference_limited(
            config, catalog, baseline_uniform(config, catalog)).total
        row_settings = dataclasses.replace(settings, seed=settings.seed + k)
        estimate = estimate_sdp(config, catalog, optimal, row_settings)
        rows.append([gamma, sdp_optimal, sdp_popular, sdp_uniform,
                     estimate.sdp_hat, estimate.stderr])
    summary = (f"compare: {len(rows)} gamma points, "
               f"realizations={settings.realizations} per point")
    return columns, rows, summary, 0


_RUNNERS = {
    "eval": _run_eval,
    "optimize": _run_optimize,
    "simulate": _run_simulate,
    "tradeoff": _run_tradeoff,
    "sweep": _run_sweep,
    "compare": _run_compare,
}


def default_spec(command: str) -> dict:
    return copy.deepcopy(DEFAULT_SPECS[command])


def run_spec(spec: dict, command: str, overrides) -> int:
    """Validate and execute one parsed spec; returns the process exit code."""
    if not isinstance(spec, dict):
        raise SpecError("spec: expected a JSON object at the top level")
    if spec.get("command") != command:
        raise SpecError(f"command: spec says {spec.get('command')!r} but the "
                        f"{command!r} subcommand was invoked")
    plot = spec.get("plot", False)
    if not isinstance(plot, bool):
        raise SpecError("plot: expected true or false")
    out_path = overrides.out if overrides.out is not None else spec.get("output")
    if not out_path:
        raise SpecError("output: an output CSV path is required "
                        "(spec key 'output' or --out)")
    columns, rows, summary, code = _RUNNERS[command](spec, overrides)
    _write_csv(out_path, columns, rows)
    if plot or overrides.plot:
        from . import plots  # deferred: pulls in matplotlib
        png = out_path[:-4] + ".png" if out_path.endswith(".csv") else out_path + ".png"
        plots.render(command, columns, rows, png)
    print(summary)
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hetcache",
        description="Probabilistic-caching experiments on N-tier cellular networks")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run a {name} experiment spec")
        p.add_argument("--spec", help="path to the JSON experiment spec")
        p.add_argument("--out", help="output CSV path (overrides spec 'output')")
        p.add_argument("--seed", type=int, help="override the spec's random seed")
        p.add_argument("--realizations", type=int,
                       help="override the spec's Monte Carlo realization count")
        p.add_argument("--plot", action="store_true",
                       help="render a PNG figure next to the CSV")
        p.add_argument("--dump-defaults", action="store_true",
                       help="print the default spec for this subcommand and exit")
    args = parser.parse_args(argv)
    if args.dump_defaults:
        text = json.dumps(default_spec(args.command), indent=2)
        if args.out:
            with open(args.out, "w", newline="\n", encoding="utf-8") as fh:
                fh.write(text + "\n")
        else:
            print(text)
        return 0
    if not args.spec:
        print("error: --spec is required (or use --dump-defaults)", file=sys.stderr)
        return 2
    try:
        with open(args.spec, "r", encoding="utf-8") as fh:
            spec = json.load(fh)
    except OSError as exc:
        print(f"error: cannot read spec file: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: spec is not valid JSON: {exc}", file=sys.stderr)
        return 2
    try:
        return run_spec(spec, args.command, args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (SpecError, ValueError) as exc:
        print(f"invalid spec: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
