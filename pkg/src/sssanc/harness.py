"""Deterministic execution of scenarios: trials, aggregation and CSV output.

Trials are advanced together as one batch (a leading trial axis on every
state array).  Each row depends only on its own trial, so any subset of
trials, including a single one, reproduces the same rows bit for bit.
"""
from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .core import (WEIGHT_NORM_LIMIT, ControllerState, Plant, anc_step)
from .errors import AllTrialsDiverged
from .metrics import AnrTracker, anr_step, true_msd
from .noise import RngStream, gen_white
from .paths import pairwise_sum
from .scenario import Scenario, format_scenario
from .sss import FullMsdOracle, SssState
from .theory import (convergence_factor, ms_stability_bound, optimal_step,
                     theoretical_steady_msd)

log = logging.getLogger(__name__)

CSV_FIELDS = ("e", "d", "anr_db", "selected_mu", "J", "true_msd")
ALL_FIELDS = CSV_FIELDS + ("g",)


@dataclass
class RunResult:
    """Per-iteration records of one trial."""

    trial: int
    records: dict
    diverged: bool = False
    diverged_at: int | None = None
    reason: str | None = None
    wall_time: float = 0.0

    def __len__(self):
        return len(self.records["e"])


@dataclass
class BatchResult:
    trials: tuple
    records: dict            # field -> (B, N) or (B, N, K)
    diverged_at: np.ndarray  # -1 where the trial completed
    reasons: list
    wall_time: float = 0.0

    def trial(self, b) -> RunResult:
        stop = int(self.diverged_at[b])
        n = None if stop < 0 else stop
        rec = {k: v[b, :n] for k, v in self.records.items()}
        return RunResult(self.trials[b], rec, stop >= 0, None if stop < 0 else stop,
                         self.reasons[b], self.wall_time / len(self.trials))


def _trial_inputs(scenario: Scenario, trials, seed):
    N = scenario.iterations
    x = np.empty((len(trials), N))
    v = np.zeros((len(trials), N))
    for b, r in enumerate(trials):
        stream = RngStream(seed, r)
        x[b] = scenario.noise.generate(N, stream.generator(0))
        if scenario.measurement_noise_variance > 0:
            v[b] = gen_white(N, 0.0, scenario.measurement_noise_variance, stream.generator(1))
    return x, v


def simulate(scenario: Scenario, trials=None, seed=None, record=CSV_FIELDS,
             chunk_size=None) -> BatchResult:
    """Run trials and collect records.

    ``trials`` is a count (indices ``0..n-1``) or an iterable of trial
    indices; the default is every trial of the scenario.

    ``record`` selects which per-iteration fields are kept; ``J`` is only
    available for switched algorithms and ``true_msd`` in identification
    mode.  ``chunk_size`` bounds how many trials are held in memory at once.
    """
    if trials is None:
        trials = scenario.trials
    trials = tuple(range(trials)) if isinstance(trials, (int, np.integer)) else tuple(trials)
    seed = scenario.seed if seed is None else seed
    if chunk_size and len(trials) > chunk_size:
        parts = [simulate(scenario, trials[i:i + chunk_size], seed, record)
                 for i in range(0, len(trials), chunk_size)]
        return BatchResult(
            trials,
            {k: np.concatenate([p.records[k] for p in parts]) for k in parts[0].records},
            np.concatenate([p.diverged_at for p in parts]),
            [r for p in parts for r in p.reasons],
            sum(p.wall_time for p in parts))

    t0 = time.perf_counter()
    alg = scenario.algorithm
    record = [f for f in record
              if not (f == "J" and not alg.switched)
              and not (f == "true_msd" and not scenario.identification_mode)]
    B, N, L = len(trials), scenario.iterations, scenario.filter_length
    batch = (B,)
    x, v = _trial_inputs(scenario, trials, seed)

    plant = Plant(scenario.primary, scenario.secondary, batch)
    state = ControllerState(L, scenario.secondary.length, scenario.secondary_estimate.length,
                            scenario.epsilon, batch)
    if alg.switched:
        step = SssState(alg.step_sizes, L, alg.rho, batch, scenario.epsilon,
                        clamp=scenario.clamp_trends)
    else:
        step = alg.step_sizes[0]
    tracker = AnrTracker(scenario.anr_beta, batch)
    w_opt = np.array(scenario.optimal_weights) if scenario.identification_mode else None

    out = {f: np.empty((N, B, alg.K) if f == "J" else (N, B)) for f in record}
    diverged_at = np.full(B, -1)
    reasons = [None] * B
    limit2 = WEIGHT_NORM_LIMIT ** 2

    with np.errstate(all="ignore"):
        for m in range(N):
            tick = anc_step(plant, state, scenario.secondary_estimate, x[:, m], v[:, m],
                            step, alg.scaling, alg.lam, check=False)
            anr = anr_step(tracker, tick.e, tick.d)
            for f in record:
                if f == "e":
                    out[f][m] = tick.e
                elif f == "d":
                    out[f][m] = tick.d
                elif f == "anr_db":
                    out[f][m] = anr
                elif f == "selected_mu":
                    out[f][m] = tick.mu
                elif f == "J":
                    out[f][m] = tick.J
                elif f == "g":
                    out[f][m] = tick.g
                elif f == "true_msd":
                    out[f][m] = true_msd(state.w, w_opt)

            norm2 = pairwise_sum(state.w * state.w)
            bad = ~(norm2 <= limit2)  # catches NaN too
            trend_bad = None
            if alg.switched:
                trend_bad = ~np.all(np.isfinite(step.J), axis=-1)
                bad |= trend_bad
            bad &= diverged_at < 0
            if bad.any():
                for b in np.flatnonzero(bad):
                    diverged_at[b] = m
                    if trend_bad is not None and trend_bad[b]:
                        reasons[b] = "MSD trend non-finite"
                    elif not np.isfinite(norm2[b]):
                        reasons[b] = "weights non-finite"
                    else:
                        reasons[b] = "weight norm above limit"
                    log.warning("trial %d diverged at iteration %d: %s",
                                trials[b], m, reasons[b])
                state.reset(bad)
                plant.reset(bad)
                tracker.reset(bad)
                if alg.switched:
                    step.reset(bad)

    records = {f: np.moveaxis(a, 0, 1) for f, a in out.items()}
    return BatchResult(trials, records, diverged_at, reasons, time.perf_counter() - t0)


def run_trial(scenario: Scenario, trial_index: int, seed=None, record=CSV_FIELDS) -> RunResult:
    """One trial; a deterministic function of (scenario, seed, trial_index)."""
    return simulate(scenario, [trial_index], seed, record).trial(0)


# ---- CSV ----

def _cell(v):
    v = float(v)
    return "NA" if v != v else repr(v)


def csv_header(scenario: Scenario):
    K = max(scenario.algorithm.K, 1)
    return ["iter", "e", "d", "anr_db", "selected_mu"] + [f"J_{k + 1}" for k in range(K)] \
        + ["true_msd"]


def format_csv(scenario: Scenario, records: dict) -> str:
    """CSV text for one record set; absent fields become empty cells."""
    K = max(scenario.algorithm.K, 1)
    n = len(records["e"])
    cols = []
    for f in ("e", "d", "anr_db", "selected_mu"):
        cols.append([_cell(v) for v in records[f]] if f in records else [""] * n)
    if "J" in records:
        J = records["J"]
        cols += [[_cell(v) for v in J[:, k]] for k in range(K)]
    else:
        cols += [[""] * n] * K
    cols.append([_cell(v) for v in records["true_msd"]] if "true_msd" in records else [""] * n)
    lines = [",".join(csv_header(scenario))]
    lines += [",".join(row) for row in zip(map(str, range(n)), *cols)]
    return "\n".join(lines) + "\n"


# ---- experiments ----

@dataclass
class ExperimentResult:
    aggregate: dict
    used: int
    excluded: int
    diverged_trials: list
    out_dir: Path | None
    files: list = field(default_factory=list)
    wall_time: float = 0.0
    per_trial: dict = field(default_factory=dict)  # field -> list of arrays, trial order


def run_experiment(scenario: Scenario, out_dir=None, seed=None, trials=None,
                   write_trials=True, chunk_size=25, record=CSV_FIELDS,
                   keep=()) -> ExperimentResult:
    """Run all trials, average the completed ones, and write CSV + metadata.

    Writes ``trial_<r>.csv`` per trial (unless ``write_trials`` is false),
    ``aggregate.csv`` and ``metadata.json`` into ``out_dir`` when given.
    Fields named in ``keep`` are also returned per trial, diverged trials
    included (truncated).
    """
    t0 = time.perf_counter()
    if trials is not None:
        scenario = scenario.replace(trials=trials)
    seed = scenario.seed if seed is None else seed
    out_dir = Path(out_dir) if out_dir is not None else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    per_trial = {k: [] for k in keep}
    totals, used, diverged = None, 0, []
    indices = range(scenario.trials)
    for start in range(0, scenario.trials, chunk_size):
        chunk = indices[start:start + chunk_size]
        batch = simulate(scenario, chunk, seed, record)
        for b in range(len(chunk)):
            res = batch.trial(b)
            for k in keep:
                per_trial[k].append(res.records[k])
            if out_dir is not None and write_trials:
                p = out_dir / f"trial_{res.trial:03d}.csv"
                p.write_text(format_csv(scenario, res.records))
                files.append(p)
            if res.diverged:
                diverged.append(res.trial)
                continue
            if totals is None:
                totals = {k: np.zeros_like(v) for k, v in res.records.items()}
            for k, v in res.records.items():
                totals[k] += v
            used += 1
    if used == 0:
        raise AllTrialsDiverged(f"all {scenario.trials} trials of '{scenario.name}' diverged")
    aggregate = {k: v / used for k, v in totals.items()}
    wall = time.perf_counter() - t0
    if out_dir is not None:
        p = out_dir / "aggregate.csv"
        p.write_text(format_csv(scenario, aggregate))
        files.append(p)
        meta = {
            "scenario": scenario.name,
            "seed": seed,
            "trials": scenario.trials,
            "iterations": scenario.iterations,
            "excluded_trials": len(diverged),
            "diverged_trials": diverged,
            "parameters": format_scenario(scenario.replace(seed=seed)),
            "version": __version__,
            "created": datetime.now(timezone.utc).isoformat(),
            "wall_time_s": wall,
        }
        p = out_dir / "metadata.json"
        p.write_text(json.dumps(meta, indent=2) + "\n")
        files.append(p)
    return ExperimentResult(aggregate, used, len(diverged), diverged, out_dir, files, wall,
                            per_trial)


# ---- diagnostics ----

@dataclass
class OracleReport:
    agreement: float
    iterations: int
    matches: int


def oracle_agreement(scenario: Scenario, trial=0, seed=None, iterations=None) -> OracleReport:
    """Fraction of ticks where diagonal and full-matrix trends pick the same step."""
    alg = scenario.algorithm
    if not alg.switched:
        raise ValueError("the oracle comparison needs a switched step-size algorithm")
    if iterations is not None:
        scenario = scenario.replace(iterations=iterations)
    seed = scenario.seed if seed is None else seed
    x, v = _trial_inputs(scenario, [trial], seed)
    L = scenario.filter_length
    plant = Plant(scenario.primary, scenario.secondary)
    state = ControllerState(L, scenario.secondary.length, scenario.secondary_estimate.length,
                            scenario.epsilon)
    sss = SssState(alg.step_sizes, L, alg.rho, epsilon=scenario.epsilon,
                   clamp=scenario.clamp_trends)
    oracle = FullMsdOracle(alg.step_sizes, L, alg.rho, scenario.epsilon)
    matches = 0
    N = scenario.iterations
    for m in range(N):
        tick = anc_step(plant, state, scenario.secondary_estimate, x[0, m], v[0, m], sss,
                        alg.scaling, alg.lam)
        j = oracle.step(state.x_f, state.sigma_e2, tick.g)
        matches += int(j == int(sss.selected))
    return OracleReport(matches / N, N, matches)


def theory_report(L, mu=None, sigma_e2=None, sigma_f2=None) -> str:
    """Closed-form step-size theory, 6 significant digits."""
    bound = ms_stability_bound(L)
    mu_opt = optimal_step(L)
    lines = [f"L                 = {L}",
             f"stability bound   = {bound:.6g}",
             f"mu_opt            = {mu_opt:.6g}",
             f"h(mu_opt)         = {convergence_factor(mu_opt, L):.6g}"]
    if mu is not None:
        lines.append(f"h(mu)             = {convergence_factor(mu, L):.6g}")
        if sigma_e2 is not None and sigma_f2 is not None:
            J = theoretical_steady_msd(mu, L, sigma_e2, sigma_f2)
            lines.append(f"J(inf)            = {J:.6g}")
    return "\n".join(lines) + "\n"
