"""End-to-end Monte-Carlo campaigns.

The analog beamformer is built once per campaign (it depends only on the
configured group supports, which vary slowly); each realization redraws UE
drops and fast fading, reduces the channel through the beamformer, then
optimizes the 2K agent components for every requested transmit power,
fairness level and algorithm. The equal-allocation agent is always scored
alongside as the un-optimized baseline.

Reproducibility: every random stream is derived from (master_seed,
realization index, purpose), so realizations are independent of execution
order and worker count, and extending a campaign reproduces its prefix.
"""

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .bb_stage import (
    EffectiveChannel,
    FairnessSpec,
    effective_channel,
    objective,
    objective_batch,
    rates_for_agent,
    uniform_agent,
)
from .channel import draw_placement, generate_channel
from .config import SystemConfig
from .errors import CampaignError
from .metrics import MetricRecord, dbm_to_watt
from .optimizers import BoxProblem, OptimizationTrace, run as run_optimizer
from .rf_stage import RfBeamformer, build_for_groups

# Stream purposes under one master seed.
_STREAM_CHANNEL = 0
_STREAM_OPTIMIZER = 1

BASELINE_NAME = "baseline"

# A campaign aborts once more than this fraction of realizations fail.
FAILURE_TOLERANCE = 0.01


def child_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Counter-derived child stream; identical keys give identical streams."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=key))


@dataclass(frozen=True)
class RealizationRecord:
    """Metrics of one (realization, power, fairness, algorithm) cell."""

    realization: int
    algorithm: str
    fairness: str
    p_t_dbm: float
    objective: float
    metrics: MetricRecord
    trace: Optional[OptimizationTrace] = None


@dataclass(frozen=True)
class AggregateRow:
    """Mean and standard error of each metric over the realizations."""

    algorithm: str
    fairness: str
    p_t_dbm: float
    n: int
    sum_rate_mean: float
    sum_rate_se: float
    jain_mean: float
    jain_se: float
    rate_gap_mean: float
    rate_gap_se: float
    energy_efficiency_mean: float
    energy_efficiency_se: float
    objective_mean: float
    objective_se: float


@dataclass
class CampaignResult:
    config: SystemConfig
    records: list
    aggregates: list
    failures: list


def build_beamformer(cfg: SystemConfig) -> RfBeamformer:
    return build_for_groups(cfg.resolved_groups(), cfg.array_geometry(),
                            cfg.n_rf_per_group)


def run_realization(cfg: SystemConfig, index: int,
                    rf: Optional[RfBeamformer] = None) -> list:
    """All records of one channel drop, in canonical order."""
    if rf is None:
        rf = build_beamformer(cfg)
    geom = cfg.array_geometry()
    groups = cfg.resolved_groups()
    bounds = cfg.placement_bounds()
    k = cfg.k

    rng = child_rng(cfg.master_seed, index, _STREAM_CHANNEL)
    placements = [draw_placement(rng, bounds) for _ in range(k)]
    realization = generate_channel(geom, groups, placements, cfg.n_paths,
                                   cfg.pathloss_exponent, rng,
                                   cfg.pathloss_convention)
    h_eff = effective_channel(realization.h, rf.f)
    noise_w = cfg.noise_power_w

    records = []
    for pt_i, p_t_dbm in enumerate(cfg.p_t_dbm):
        p_t_w = dbm_to_watt(p_t_dbm)
        eff = EffectiveChannel(h_eff=h_eff, noise_power_w=noise_w, total_power_w=p_t_w)
        for fair_i, spec in enumerate(cfg.fairness_specs()):
            base = uniform_agent(k)
            records.append(_record(index, BASELINE_NAME, spec, p_t_dbm, base, eff,
                                   rf.n_rf, None))
            for algo_i, name in enumerate(cfg.optimizer.algorithms):
                problem = BoxProblem(
                    dim=2 * k,
                    evaluate=lambda a, e=eff, s=spec: objective(a, e, s),
                    evaluate_batch=lambda a, e=eff, s=spec: objective_batch(a, e, s),
                )
                opt_rng = child_rng(cfg.master_seed, index, _STREAM_OPTIMIZER,
                                    pt_i, fair_i, algo_i)
                trace = run_optimizer(problem, cfg.optimizer_config(name), opt_rng)
                records.append(_record(index, name, spec, p_t_dbm,
                                       trace.best_point, eff, rf.n_rf, trace))
    return records


def _record(index, algorithm, spec: FairnessSpec, p_t_dbm, agent,
            eff: EffectiveChannel, n_rf: int, trace) -> RealizationRecord:
    rates = rates_for_agent(agent, eff)
    return RealizationRecord(
        realization=index,
        algorithm=algorithm,
        fairness=spec.label,
        p_t_dbm=float(p_t_dbm),
        objective=objective(agent, eff, spec),
        metrics=MetricRecord.from_rates(rates, eff.total_power_w, n_rf),
        trace=trace,
    )


def run_campaign(cfg: SystemConfig, workers: int = 1) -> CampaignResult:
    """Run every realization, aggregate, and report per-realization failures.

    Individual realization failures are tolerated up to FAILURE_TOLERANCE of
    the campaign; beyond that a CampaignError is raised.
    """
    rf = build_beamformer(cfg)
    per_index: dict = {}
    failures = []

    def one(index: int):
        return index, run_realization(cfg, index, rf)

    indices = range(cfg.n_realizations)
    if workers <= 1:
        outcomes = map(_guarded(one), indices)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_guarded(one), indices))
    for index, result, error in outcomes:
        if error is None:
            per_index[index] = result
        else:
            failures.append((index, error))

    if len(failures) > FAILURE_TOLERANCE * cfg.n_realizations:
        detail = "; ".join(f"realization {i}: {msg}" for i, msg in failures[:5])
        raise CampaignError(
            f"{len(failures)}/{cfg.n_realizations} realizations failed: {detail}")

    records = [rec for index in sorted(per_index) for rec in per_index[index]]
    return CampaignResult(
        config=cfg,
        records=records,
        aggregates=aggregate(cfg, records),
        failures=failures,
    )


def _guarded(fn):
    def wrapped(index):
        try:
            _, result = fn(index)
            return index, result, None
        except Exception as exc:  # noqa: BLE001 — recorded, campaign continues
            return index, None, f"{type(exc).__name__}: {exc}"
    return wrapped


def aggregate(cfg: SystemConfig, records) -> list:
    """Group records by (algorithm, fairness, power) in canonical order."""
    by_key: dict = {}
    for rec in records:
        by_key.setdefault((rec.algorithm, rec.fairness, rec.p_t_dbm), []).append(rec)

    def mean_se(values):
        values = np.asarray(values, dtype=float)
        mean = float(values.mean())
        se = float(values.std(ddof=1) / math.sqrt(len(values))) if len(values) > 1 else 0.0
        return mean, se

    rows = []
    names = [BASELINE_NAME] + list(cfg.optimizer.algorithms)
    for p_t_dbm in cfg.p_t_dbm:
        for spec in cfg.fairness_specs():
            for name in names:
                group = by_key.get((name, spec.label, p_t_dbm))
                if not group:
                    continue
                sr = mean_se([r.metrics.sum_rate for r in group])
                ja = mean_se([r.metrics.jain for r in group])
                rg = mean_se([r.metrics.rate_gap for r in group])
                ee = mean_se([r.metrics.energy_efficiency for r in group])
                ob = mean_se([r.objective for r in group])
                rows.append(AggregateRow(
                    algorithm=name, fairness=spec.label, p_t_dbm=p_t_dbm,
                    n=len(group),
                    sum_rate_mean=sr[0], sum_rate_se=sr[1],
                    jain_mean=ja[0], jain_se=ja[1],
                    rate_gap_mean=rg[0], rate_gap_se=rg[1],
                    energy_efficiency_mean=ee[0], energy_efficiency_se=ee[1],
                    objective_mean=ob[0], objective_se=ob[1],
                ))
    return rows


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


RECORD_COLUMNS = ["realization", "algorithm", "fairness", "p_t_dbm", "objective",
                  "sum_rate", "jain", "rate_gap", "energy_efficiency", "per_ue_rates"]
TRACE_COLUMNS = ["realization", "algorithm", "fairness", "p_t_dbm", "iteration",
                 "best_objective"]


def emit_results(result: CampaignResult, out_dir) -> dict:
    """Write records.csv, traces.csv and summary.json; returns their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {name: out / name for name in ("records.csv", "traces.csv", "summary.json")}

    with open(paths["records.csv"], "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORD_COLUMNS)
        for rec in result.records:
            m = rec.metrics
            writer.writerow([
                rec.realization, rec.algorithm, rec.fairness, _fmt(rec.p_t_dbm),
                _fmt(rec.objective), _fmt(m.sum_rate), _fmt(m.jain),
                _fmt(m.rate_gap), _fmt(m.energy_efficiency),
                ";".join(_fmt(r) for r in m.per_ue_rates),
            ])

    with open(paths["traces.csv"], "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for rec in result.records:
            if rec.trace is None:
                continue
            for q, best in enumerate(rec.trace.per_iteration_best):
                writer.writerow([rec.realization, rec.algorithm, rec.fairness,
                                 _fmt(rec.p_t_dbm), q, _fmt(best)])

    summary = {
        "version": __version__,
        "master_seed": result.config.master_seed,
        "config": json.loads(result.config.model_dump_json()),
        "n_records": len(result.records),
        "failures": [{"realization": i, "error": msg} for i, msg in result.failures],
        "aggregates": [vars(row) for row in result.aggregates],
    }
    with open(paths["summary.json"], "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    return paths
