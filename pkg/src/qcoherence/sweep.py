"""Sweep execution, lemma batteries and report writing."""

from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .bounds import CSV_COLUMNS, TOL_INEQ, BoundReport, StateCoherences, best_bound_from, check_lemma1, check_lemma2, verify_proof_chain
from .config import ExperimentConfig
from .errors import ArgumentError
from .qmatrix import TOL_PHYS, PureState, QubitState, from_pure
from .sampling import RNG_ALGORITHM, SamplerSpec, ginibre_mixed, haar_pure

SWEEP_COLUMNS = ("sample", "sampler") + CSV_COLUMNS + ("chain_ok",)


@dataclass(frozen=True)
class SweepRow:
    sample: int
    sampler: str
    report: BoundReport
    chain_ok: bool | None = None

    def csv_fields(self) -> list[str]:
        chain = "" if self.chain_ok is None else ("true" if self.chain_ok else "false")
        return [str(self.sample), self.sampler] + self.report.csv_fields() + [chain]


@dataclass
class SweepSummary:
    total: int = 0
    conditions_satisfied: int = 0
    violations: int = 0
    chain_failures: int = 0
    min_gap: float | None = None
    mean_gap: float | None = None
    tightness_wins: int = 0

    @property
    def ok(self) -> bool:
        return self.violations == 0 and self.chain_failures == 0

    def to_dict(self) -> dict:
        return asdict(self)


def as_density(state: PureState | QubitState) -> QubitState:
    return from_pure(state) if isinstance(state, PureState) else state


def evaluate_sample(
    spec: SamplerSpec,
    index: int,
    alphas: Sequence[float],
    betas: Sequence[float],
    check_chain: bool = False,
    tol_ineq: float = TOL_INEQ,
    tol_phys: float = TOL_PHYS,
) -> list[SweepRow]:
    rho = as_density(spec.sample(index))
    coh = StateCoherences.from_state(rho, tol_phys)
    rows = []
    for alpha, beta in itertools.product(alphas, betas):
        report = best_bound_from(coh, alpha, beta, tol_ineq, spec.form)
        chain_ok = None
        if check_chain and report.conditions_met:
            steps = verify_proof_chain(coh, report.params, tol_ineq, spec.form)
            chain_ok = all(step.passed for step in steps)
        rows.append(SweepRow(index, spec.kind, report, chain_ok))
    return rows


def _evaluate_range(args) -> list[SweepRow]:
    spec, start, stop, alphas, betas, check_chain, tol_ineq, tol_phys = args
    rows = []
    for i in range(start, stop):
        rows.extend(evaluate_sample(spec, i, alphas, betas, check_chain, tol_ineq, tol_phys))
    return rows


def summarize(rows: Iterable[SweepRow], tol: float = TOL_INEQ) -> SweepSummary:
    summary = SweepSummary()
    gaps = []
    for row in rows:
        r = row.report
        summary.total += 1
        if row.chain_ok is False:
            summary.chain_failures += 1
        if not r.conditions_met:
            continue
        summary.conditions_satisfied += 1
        gaps.append(r.gap)
        if r.violated(tol):
            summary.violations += 1
        if r.rhs_theorem > r.rhs_baseline_k1 + tol:
            summary.tightness_wins += 1
    if gaps:
        summary.min_gap = min(gaps)
        summary.mean_gap = math.fsum(gaps) / len(gaps)
    return summary


def run_sweep(config: ExperimentConfig, workers: int = 1, chunk: int = 256) -> tuple[list[SweepRow], SweepSummary]:
    """Evaluate every sample x alpha x beta; rows come back in sample order.

    Samples are independent, so they can be split across ``workers``
    processes; chunks are reassembled in index order.
    """
    spec = config.sampler_spec()
    tol = config.tolerances
    ranges = [
        (spec, lo, min(lo + chunk, config.samples), tuple(config.alphas), tuple(config.betas),
         config.check_chain, tol.tol_ineq, tol.tol_phys)
        for lo in range(0, config.samples, chunk)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_evaluate_range, ranges))
    else:
        parts = [_evaluate_range(r) for r in ranges]
    rows = [row for part in parts for row in part]
    return rows, summarize(rows, tol.tol_ineq)


def rows_to_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow(row.csv_fields())
    return buf.getvalue()


def write_csv(rows: Iterable[SweepRow], path: str | Path) -> None:
    Path(path).write_text(rows_to_csv(rows))


def provenance() -> dict:
    return {"package_version": __version__, "numpy_version": np.__version__, "rng": RNG_ALGORITHM}


# -- lemma batteries --------------------------------------------------------

LEMMA2_XS = (0.0, 0.25, 0.5, 0.75, 1.0)  # fractions of k
LEMMA2_KS = tuple(round(0.1 * i, 1) for i in range(1, 11))
LEMMA2_ALPHAS = (1.0, 1.5, 2.0, 3.0, 5.0)


@dataclass(frozen=True)
class LemmaBattery:
    lemma2_points: int
    lemma2_failures: int
    lemma1_checks: int
    lemma1_failures: int

    @property
    def ok(self) -> bool:
        return self.lemma2_failures == 0 and self.lemma1_failures == 0


def lemma2_grid(
    x_fractions: Sequence[float] = LEMMA2_XS,
    ks: Sequence[float] = LEMMA2_KS,
    alphas: Sequence[float] = LEMMA2_ALPHAS,
    tol: float = TOL_INEQ,
) -> tuple[int, int]:
    points = failures = 0
    for frac, k, alpha in itertools.product(x_fractions, ks, alphas):
        if not 0 <= frac <= 1:
            raise ArgumentError(f"x fraction {frac} outside [0, 1]")
        points += 1
        if not check_lemma2(min(frac * k, k), k, alpha, tol):
            failures += 1
    return points, failures


def lemma1_battery(
    states: int = 1000,
    n_qubits: Sequence[int] = (3,),
    betas: Sequence[float] = (1.0, 2.0, 3.0),
    seed: int = 0,
    tol: float = TOL_INEQ,
) -> tuple[int, int]:
    """Bipartite check over every one-qubit split of seeded random states.

    Even indices are Haar pure states, odd indices full-rank Ginibre states.
    """
    checks = failures = 0
    for i in range(states):
        n = n_qubits[i % len(n_qubits)]
        if i % 2 == 0:
            rho = from_pure(haar_pure(n, seed, i))
        else:
            rho = ginibre_mixed(n, 1 << n, seed, i)
        for q in range(n):
            for beta in betas:
                checks += 1
                if not check_lemma1(rho, q, beta, tol).holds:
                    failures += 1
    return checks, failures


def run_lemmas(grid: dict | None = None, tol: float = TOL_INEQ) -> LemmaBattery:
    """Run both batteries; ``grid`` may override any of the keys below.

    ``x_fractions``, ``ks``, ``alphas`` (scalar grid) and ``states``,
    ``n_qubits``, ``betas``, ``seed`` (random-state battery).
    """
    grid = dict(grid or {})
    allowed = {"x_fractions", "ks", "alphas", "states", "n_qubits", "betas", "seed"}
    unknown = set(grid) - allowed
    if unknown:
        raise ArgumentError(f"unknown grid keys: {sorted(unknown)}")
    points, f2 = lemma2_grid(
        grid.get("x_fractions", LEMMA2_XS), grid.get("ks", LEMMA2_KS), grid.get("alphas", LEMMA2_ALPHAS), tol
    )
    checks, f1 = lemma1_battery(
        grid.get("states", 1000), grid.get("n_qubits", (3,)), grid.get("betas", (1.0, 2.0, 3.0)),
        grid.get("seed", 0), tol,
    )
    return LemmaBattery(points, f2, checks, f1)
