"""The main Bayesian-optimization loop and the random-search baseline.

Each outer iteration refits the GP on everything evaluated so far, picks
an acquisition from the adaptive ensemble, and optimizes it by a random
walk on the synthesis graph: repeatedly draw a reagent subset and a
condition subset, ask the oracle for products, and keep novel molecules
until the required number of successful steps; the iteration then
evaluates the acquisition argmax over the whole (persistent) pool.  The
baseline shares the exploration dynamics but spends its budget
evaluating the objective on every new unique product directly.

Randomness flows from a single seed split into two child streams: one
drives exploration draws (shared verbatim by both methods, so paired
seeds explore identically), the other drives model fitting and
acquisition sampling.
"""

from __future__ import annotations

import enum
import json
import time
from dataclasses import dataclass

import numpy as np

from .acquisition import (
    DEFAULT_TT_EPSILON,
    AcquisitionKind,
    EnsembleWeights,
    ei,
    ensemble_pick,
    ttei,
    ucb,
    ucb_beta_schedule,
)
from .errors import FitFailure
from .gp import GpHyperparams, build_posterior, fit, posterior_batch
from .kernel import FingerprintTanimoto, KernelCache, KernelSpec, OTExpSum, SumKernel
from .molgraph import Molecule, add_explicit_hydrogens, parse_smiles
from .objectives import Band, Objective, evaluate
from .synthesis import (
    CONDITION_LIBRARY,
    Condition,
    OracleKind,
    SynthesisDag,
    record_synthesis,
    synthesize_detailed,
)

REAGENT_PAIR_PROBABILITY = 0.8  # else a single-reagent self-transformation attempt
STALL_FACTOR = 100


class Method(enum.Enum):
    CHEMBO = "chembo"
    RAND = "rand"


@dataclass(frozen=True)
class RunConfig:
    initial_pool: tuple[str, ...]
    objective: Objective
    kernel_family: KernelSpec
    budget_t: int
    seed: int
    method: Method = Method.CHEMBO
    oracle: OracleKind = OracleKind.TEMPLATE
    conditions: tuple[Condition, ...] = CONDITION_LIBRARY
    explorer_steps: int = 20

    def __post_init__(self):
        if len(self.initial_pool) < 2:
            raise ValueError("initial pool needs at least two molecules")
        if self.budget_t < 0:
            raise ValueError("budget_t must be nonnegative")
        if self.explorer_steps < 1:
            raise ValueError("explorer_steps must be at least 1")
        if not self.conditions:
            raise ValueError("condition library must not be empty")


@dataclass(frozen=True)
class EvaluationRecord:
    iteration: int
    molecule: str
    value: float
    acquisition_used: str | None
    pool_size_after: int
    wall_ms: int


@dataclass
class RunResult:
    records: list[EvaluationRecord]
    best_molecule: str
    best_value: float
    dag: SynthesisDag
    initial_evaluations: list[tuple[str, float]]
    stalled: bool = False

    def best_so_far(self) -> np.ndarray:
        """Running maximum: entry 0 is the bootstrap best, entry t the
        best after iteration t."""
        curve = [max(v for _, v in self.initial_evaluations)]
        for rec in self.records:
            curve.append(max(curve[-1], rec.value))
        return np.array(curve)


# ---------------------------------------------------------------------------
# Random-walk exploration
# ---------------------------------------------------------------------------


def _draw_step(pool, keys, past, conditions, oracle, rng):
    """One Rand-Select draw: returns (new products, reagents, conditions,
    template) with an empty product list on failure."""
    size = 2 if rng.random() < REAGENT_PAIR_PROBABILITY else 1
    size = min(size, len(pool))
    idx = rng.choice(len(pool), size=size, replace=False)
    reagents = [pool[int(k)] for k in idx]
    q_size = min(int(rng.integers(1, 3)), len(conditions))
    q_idx = rng.choice(len(conditions), size=q_size, replace=False)
    conds = [conditions[int(k)] for k in sorted(q_idx)]
    outcome = synthesize_detailed(reagents, conds, oracle)
    if outcome is None:
        return [], reagents, conds, None
    products, template = outcome
    new = [
        p
        for p in sorted(products, key=lambda m: m.canonical_form)
        if p.canonical_form not in keys and p.canonical_form not in past
    ]
    return new, reagents, conds, template


def explore_acquisition(
    pool: list[Molecule],
    conditions,
    past: set[str],
    n: int,
    oracle: OracleKind,
    scorer,
    rng: np.random.Generator,
    dag: SynthesisDag | None = None,
    start_step: int = 1,
):
    """Random walk on the synthesis graph, then argmax of the scorer.

    Runs until ``n`` successful steps (a success adds at least one
    molecule outside ``past`` and the pool); products are appended to
    ``pool`` in place so growth persists across outer iterations.  After
    ``100 * n`` consecutive failed draws the walk stops early and the
    argmax is taken over the current pool with the stalled flag set.

    Returns ``(best candidate, stalled, steps taken)``.
    """
    if not pool:
        raise ValueError("pool must not be empty")
    conditions = tuple(conditions)
    keys = {m.canonical_form for m in pool}
    successes = 0
    failures = 0
    step = start_step
    stalled = False
    while successes < n:
        if failures >= STALL_FACTOR * n:
            stalled = True
            break
        new, reagents, conds, template = _draw_step(
            pool, keys, past, conditions, oracle, rng
        )
        if not new:
            failures += 1
            continue
        failures = 0
        successes += 1
        if dag is not None:
            record_synthesis(
                dag, new, [r.canonical_form for r in reagents], template, conds, step
            )
        for p in new:
            pool.append(p)
            keys.add(p.canonical_form)
        step += 1

    candidates = [m for m in pool if m.canonical_form not in past]
    if not candidates:
        candidates = list(pool)
    scores = np.asarray(scorer(candidates), dtype=float)
    best_idx = 0
    for i in range(1, len(candidates)):
        if scores[i] > scores[best_idx] or (
            scores[i] == scores[best_idx]
            and candidates[i].canonical_form < candidates[best_idx].canonical_form
        ):
            best_idx = i
    return candidates[best_idx], stalled, successes


# ---------------------------------------------------------------------------
# Logging
# ---------------------------------------------------------------------------


def _band_to_json(band: Band) -> dict:
    return {"a": band.a, "b": band.b, "c": band.c, "d": band.d, "floor": band.floor}


def kernel_family_to_json(spec: KernelSpec) -> dict:
    if isinstance(spec, FingerprintTanimoto):
        return {"family": "fingerprint", "n_bits": spec.n_bits,
                "max_path_len": spec.max_path_len}
    if isinstance(spec, OTExpSum):
        return {"family": "ot", "betas": list(spec.betas)}
    if isinstance(spec, SumKernel):
        return {
            "family": "sum",
            "alpha1": spec.alpha1,
            "alpha2": spec.alpha2,
            "n_bits": spec.fingerprint.n_bits,
            "max_path_len": spec.fingerprint.max_path_len,
            "betas": list(spec.ot.betas),
        }
    raise TypeError(f"unknown kernel spec {spec!r}")


def config_to_json(cfg: RunConfig) -> dict:
    return {
        "initial_pool": list(cfg.initial_pool),
        "objective": {
            "kind": cfg.objective.kind.value,
            "target": cfg.objective.target,
            "contribution_table": dict(sorted(cfg.objective.contributions.items())),
            "qed_bands": {k: _band_to_json(b) for k, b in sorted(cfg.objective.qed_bands.items())},
        },
        "kernel": kernel_family_to_json(cfg.kernel_family),
        "budget_t": cfg.budget_t,
        "seed": cfg.seed,
        "method": cfg.method.value,
        "oracle": cfg.oracle.value,
        "conditions": [c.id for c in cfg.conditions],
        "explorer_steps": cfg.explorer_steps,
    }


class RunLogWriter:
    """Incremental JSONL run log: one header line with the full config
    and bootstrap evaluations, then one line per evaluation record,
    flushed as written.  Timings are kept out of the file so identical
    configs and seeds produce byte-identical logs."""

    def __init__(self, path):
        self._fh = open(path, "w", encoding="utf-8")

    def write_header(self, cfg: RunConfig, initial_evaluations):
        payload = {
            "config": config_to_json(cfg),
            "initial_evaluations": [[k, v] for k, v in initial_evaluations],
        }
        self._write(payload)

    def write_record(self, rec: EvaluationRecord):
        self._write(
            {
                "iteration": rec.iteration,
                "molecule": rec.molecule,
                "value": rec.value,
                "acquisition_used": rec.acquisition_used,
                "pool_size_after": rec.pool_size_after,
            }
        )

    def _write(self, payload):
        self._fh.write(json.dumps(payload, sort_keys=True))
        self._fh.write("\n")
        self._fh.flush()

    def close(self):
        self._fh.close()


# ---------------------------------------------------------------------------
# Runs
# ---------------------------------------------------------------------------


def _bootstrap(cfg: RunConfig):
    """Parse, expand and dedup the initial pool; evaluate it; seed the DAG."""
    pool: list[Molecule] = []
    seen: set[str] = set()
    for smiles in cfg.initial_pool:
        mol = add_explicit_hydrogens(parse_smiles(smiles))
        if mol.canonical_form in seen:
            continue
        seen.add(mol.canonical_form)
        pool.append(mol)
    if len(pool) < 2:
        raise ValueError("initial pool needs at least two distinct molecules")
    dag = SynthesisDag()
    evaluated: dict[str, float] = {}
    molecules: dict[str, Molecule] = {}
    for mol in pool:
        dag.add_initial(mol)
        value = evaluate(cfg.objective, mol)
        evaluated[mol.canonical_form] = value
        molecules[mol.canonical_form] = mol
    return pool, dag, evaluated, molecules


def _streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    explore_seq, model_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(explore_seq), np.random.default_rng(model_seq)


def _default_hyper(cfg: RunConfig, ys) -> GpHyperparams:
    return GpHyperparams(
        kernel_spec=cfg.kernel_family,
        noise_var=1e-4,
        mean_const=float(np.mean(ys)),
        signal_scale=1.0,
    )


def _make_scorer(kind, gp_post, best, t, model_rng):
    def scorer(candidates):
        mu, var = posterior_batch(gp_post, candidates)
        sigma = np.sqrt(var)
        if kind is AcquisitionKind.EI:
            return np.atleast_1d(ei(mu, sigma, best))
        if kind is AcquisitionKind.UCB:
            return np.atleast_1d(ucb(mu, sigma, ucb_beta_schedule(t)))
        return ttei(list(zip(mu, sigma)), best, DEFAULT_TT_EPSILON, model_rng)

    return scorer


def chembo_run(cfg: RunConfig, log_path=None) -> RunResult:
    """The GP-guided loop: bootstrap on the initial pool, then for each
    of ``budget_t`` iterations refit the GP, sample an acquisition from
    the ensemble, explore, and evaluate the acquisition argmax."""
    if cfg.method is not Method.CHEMBO:
        raise ValueError("chembo_run requires method=chembo")
    explore_rng, model_rng = _streams(cfg.seed)
    pool, dag, evaluated, molecules = _bootstrap(cfg)
    initial_evaluations = list(evaluated.items())
    writer = RunLogWriter(log_path) if log_path else None
    if writer:
        writer.write_header(cfg, initial_evaluations)

    cache = KernelCache()
    weights = EnsembleWeights()
    records: list[EvaluationRecord] = []
    best_key = max(evaluated, key=lambda k: (evaluated[k], k))
    best_value = evaluated[best_key]
    prev_hyper: GpHyperparams | None = None
    next_step = 1
    any_stall = False

    try:
        for t in range(1, cfg.budget_t + 1):
            tic = time.perf_counter()
            train_keys = list(evaluated)
            train_mols = [molecules[k] for k in train_keys]
            train_ys = np.array([evaluated[k] for k in train_keys])
            if len(train_mols) >= 3:
                try:
                    hyper = fit(train_mols, train_ys, cfg.kernel_family, model_rng, cache)
                except FitFailure:
                    if prev_hyper is None:
                        raise
                    hyper = prev_hyper
            else:
                hyper = _default_hyper(cfg, train_ys)
            prev_hyper = hyper
            gp_post = build_posterior(train_mols, train_ys, hyper, cache)

            kind = ensemble_pick(weights, model_rng)
            scorer = _make_scorer(kind, gp_post, best_value, t, model_rng)
            candidate, stalled, steps = explore_acquisition(
                pool,
                cfg.conditions,
                set(evaluated),
                cfg.explorer_steps,
                cfg.oracle,
                scorer,
                explore_rng,
                dag=dag,
                start_step=next_step,
            )
            next_step += steps
            any_stall = any_stall or stalled

            key = candidate.canonical_form
            if key in evaluated:  # stalled walk with nothing new to rate
                value = evaluated[key]
            else:
                value = evaluate(cfg.objective, candidate)
                evaluated[key] = value
                molecules[key] = candidate
            improved = value > best_value
            if improved:
                best_key, best_value = key, value
            weights.update(kind, improved)

            rec = EvaluationRecord(
                iteration=t,
                molecule=key,
                value=value,
                acquisition_used=kind.value,
                pool_size_after=len(pool),
                wall_ms=int((time.perf_counter() - tic) * 1000),
            )
            records.append(rec)
            if writer:
                writer.write_record(rec)
    finally:
        if writer:
            writer.close()

    return RunResult(
        records=records,
        best_molecule=best_key,
        best_value=best_value,
        dag=dag,
        initial_evaluations=initial_evaluations,
        stalled=any_stall,
    )


def rand_run(cfg: RunConfig, log_path=None) -> RunResult:
    """Random-search baseline: identical exploration dynamics, but every
    new unique product is rated directly with the objective, one budget
    unit per rating, until ``budget_t`` ratings are spent."""
    if cfg.method is not Method.RAND:
        raise ValueError("rand_run requires method=rand")
    explore_rng, _ = _streams(cfg.seed)
    pool, dag, evaluated, molecules = _bootstrap(cfg)
    initial_evaluations = list(evaluated.items())
    writer = RunLogWriter(log_path) if log_path else None
    if writer:
        writer.write_header(cfg, initial_evaluations)

    records: list[EvaluationRecord] = []
    best_key = max(evaluated, key=lambda k: (evaluated[k], k))
    best_value = evaluated[best_key]
    keys = {m.canonical_form for m in pool}
    conditions = tuple(cfg.conditions)
    iteration = 0
    failures = 0
    step = 1
    stalled = False

    try:
        while iteration < cfg.budget_t:
            if failures >= STALL_FACTOR * cfg.explorer_steps:
                stalled = True
                break
            tic = time.perf_counter()
            new, reagents, conds, template = _draw_step(
                pool, keys, set(evaluated), conditions, cfg.oracle, explore_rng
            )
            if not new:
                failures += 1
                continue
            failures = 0
            record_synthesis(
                dag, new, [r.canonical_form for r in reagents], template, conds, step
            )
            step += 1
            for p in new:
                pool.append(p)
                keys.add(p.canonical_form)
            for p in new:
                if iteration >= cfg.budget_t:
                    break
                iteration += 1
                value = evaluate(cfg.objective, p)
                evaluated[p.canonical_form] = value
                molecules[p.canonical_form] = p
                if value > best_value:
                    best_key, best_value = p.canonical_form, value
                rec = EvaluationRecord(
                    iteration=iteration,
                    molecule=p.canonical_form,
                    value=value,
                    acquisition_used=None,
                    pool_size_after=len(pool),
                    wall_ms=int((time.perf_counter() - tic) * 1000),
                )
                records.append(rec)
                if writer:
                    writer.write_record(rec)
    finally:
        if writer:
            writer.close()

    return RunResult(
        records=records,
        best_molecule=best_key,
        best_value=best_value,
        dag=dag,
        initial_evaluations=initial_evaluations,
        stalled=stalled,
    )


def run(cfg: RunConfig, log_path=None) -> RunResult:
    if cfg.method is Method.CHEMBO:
        return chembo_run(cfg, log_path)
    return rand_run(cfg, log_path)
