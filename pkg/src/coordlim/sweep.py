"""Parameter sweeps over interference scenarios, with CSV output.

Each sweep point builds the coordination instance for one operating point
(an SNR or a bandwidth-ratio value), solves it, evaluates the blind and
costless baselines, and records the optimal policy's action marginals.
Runs are deterministic for a fixed configuration and seed; failures at
individual points are flagged and do not abort the sweep.
"""

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .distributions import marginal_x1, marginal_x2
from .errors import BracketError, ConvergenceError, ValidationError
from .solver import SolverOptions, random_feasible_start, solve
from .wireless import (
    build_problem,
    evaluate_blind,
    evaluate_costless,
    load_scenario,
    preset_scenario,
    relative_gain,
    uniform_action_index,
    with_parameters,
)

_PRESETS = ("hir", "lir")


@dataclass
class SweepConfig:
    """What to sweep and how.

    ``regime`` is 'hir', 'lir' or a scenario file path.  ``snr_grid`` and
    ``beta_grid`` are inclusive (min, max, step) triples; the beta sweep
    holds the SNR at ``beta_snr_db`` and reallocates a fixed total
    bandwidth between the two bands with ratio beta = B1/B2.  The seed
    drives the random strictly feasible starting points; warm starting
    reuses the previous point's optimum instead (sequential by contract).
    """

    regime: str = "hir"
    snr_grid: tuple = (-10.0, 20.0, 1.0)
    beta_grid: tuple = None
    beta_snr_db: float = 10.0
    solver: SolverOptions = field(default_factory=SolverOptions)
    seed: int = 0
    warm_start: bool = True
    parallel: int = 1
    b1: float = 10.0
    b2: float = 10.0


@dataclass(frozen=True)
class SweepRecord:
    """One sweep point; ``ordering`` is 'strict', 'ties' or 'failed'."""

    regime: str
    snr_db: float
    beta: float
    op_value: float
    bp_value: float
    costless_value: float
    gain_op_bp_pct: float
    gain_costless_bp_pct: float
    ic_at_optimum: float
    stationarity_residual: float
    ordering: str
    qx1: tuple
    qx2: tuple
    failed: bool = False


def grid_points(triple):
    """Inclusive arithmetic grid from a (min, max, step) triple."""
    lo, hi, step = triple
    if step <= 0.0:
        raise ValidationError("grid step must be positive")
    if hi < lo:
        raise ValidationError("grid max must be at least its min")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + i * step for i in range(count)]


def _base_scenario(config):
    if config.regime in _PRESETS:
        return preset_scenario(config.regime, snr_db=0.0, b1=config.b1, b2=config.b2)
    return load_scenario(config.regime, snr_db=0.0)


def _solve_point(regime, scenario, opts, seed, start_q):
    spec = build_problem(scenario)
    bp = evaluate_blind(spec, uniform_action_index(scenario.m))
    costless = evaluate_costless(spec)
    snr_db = scenario.snr_db
    beta = float(scenario.bandwidths[0] / scenario.bandwidths[1]) if scenario.m > 1 else 1.0
    start = start_q
    if start is None:
        start = random_feasible_start(spec, np.random.default_rng(seed))
    try:
        sol = solve(spec, opts, start=start)
    except (ConvergenceError, BracketError):
        nan = float("nan")
        record = SweepRecord(
            regime=regime, snr_db=snr_db, beta=beta,
            op_value=nan, bp_value=bp, costless_value=costless,
            gain_op_bp_pct=nan, gain_costless_bp_pct=nan,
            ic_at_optimum=nan, stationarity_residual=nan,
            ordering="failed",
            qx1=(nan,) * spec.dims.n1, qx2=(nan,) * spec.dims.n2,
            failed=True,
        )
        return record, None
    return SweepRecord(
        regime=regime,
        snr_db=snr_db,
        beta=beta,
        op_value=sol.value,
        bp_value=bp,
        costless_value=costless,
        gain_op_bp_pct=relative_gain(sol.value, bp),
        gain_costless_bp_pct=relative_gain(costless, bp),
        ic_at_optimum=sol.ic_at_optimum,
        stationarity_residual=sol.stationarity_residual,
        ordering=sol.ordering.value,
        qx1=tuple(float(x) for x in marginal_x1(sol.q_star)),
        qx2=tuple(float(x) for x in marginal_x2(sol.q_star)),
        failed=False,
    ), sol


def _point_task(payload):
    regime, scenario, opts, seed = payload
    record, _ = _solve_point(regime, scenario, opts, seed, None)
    return record


def _run(config, scenarios):
    seeds = [int(s.generate_state(1)[0]) for s in
             np.random.SeedSequence(config.seed).spawn(len(scenarios))]
    if config.parallel > 1:
        if config.warm_start:
            raise ValidationError(
                "warm starting is sequential by contract; pass warm_start=False "
                "to run points in parallel"
            )
        payloads = [
            (config.regime, sc, config.solver, seeds[i])
            for i, sc in enumerate(scenarios)
        ]
        with ProcessPoolExecutor(max_workers=config.parallel) as pool:
            return list(pool.map(_point_task, payloads))
    records = []
    carry = None
    for i, sc in enumerate(scenarios):
        start = carry if config.warm_start else None
        record, sol = _solve_point(config.regime, sc, config.solver, seeds[i], start)
        records.append(record)
        if config.warm_start and sol is not None:
            carry = sol.q_star
    return records


def run_snr_sweep(config):
    """Solve one instance per SNR grid point; see :class:`SweepRecord`."""
    base = _base_scenario(config)
    scenarios = [with_parameters(base, snr_db=snr) for snr in grid_points(config.snr_grid)]
    return _run(config, scenarios)


def run_beta_sweep(config):
    """Solve one instance per bandwidth ratio at a fixed SNR.

    The total bandwidth of the base scenario's two bands is preserved;
    beta only splits it (B1 = beta*B2).  Requires a two-band scenario.
    """
    if config.beta_grid is None:
        raise ValidationError("beta sweep requires beta_grid")
    base = _base_scenario(config)
    if base.m != 2:
        raise ValidationError("beta sweep is defined for two-band scenarios")
    total = float(base.bandwidths.sum())
    scenarios = []
    for beta in grid_points(config.beta_grid):
        b2 = total / (1.0 + beta)
        scenarios.append(
            with_parameters(base, snr_db=config.beta_snr_db, bandwidths=(beta * b2, b2))
        )
    return _run(config, scenarios)


# ---------------------------------------------------------------------------
# CSV persistence
# ---------------------------------------------------------------------------

_FIXED_COLUMNS = (
    "regime", "snr_db", "beta", "op_value", "bp_value", "costless_value",
    "gain_op_bp_pct", "gain_costless_bp_pct", "ic_at_optimum",
    "stationarity_residual", "ordering",
)


def _fmt(x):
    return f"{x:.12g}"


def emit_csv(records, path):
    """Write sweep records with a fixed schema; reals carry 12 significant
    digits so a round-trip parse reproduces them."""
    if not records:
        raise ValidationError("no records to write")
    n1 = len(records[0].qx1)
    n2 = len(records[0].qx2)
    for r in records:
        if len(r.qx1) != n1 or len(r.qx2) != n2:
            raise ValidationError("records have inconsistent marginal lengths")
    header = list(_FIXED_COLUMNS)
    header += [f"qx1_a{i + 1}" for i in range(n1)]
    header += [f"qx2_a{i + 1}" for i in range(n2)]
    with open(path, "w", encoding="ascii", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for r in records:
            row = [
                r.regime, _fmt(r.snr_db), _fmt(r.beta), _fmt(r.op_value),
                _fmt(r.bp_value), _fmt(r.costless_value), _fmt(r.gain_op_bp_pct),
                _fmt(r.gain_costless_bp_pct), _fmt(r.ic_at_optimum),
                _fmt(r.stationarity_residual), r.ordering,
            ]
            row += [_fmt(x) for x in r.qx1]
            row += [_fmt(x) for x in r.qx2]
            writer.writerow(row)


def read_sweep_csv(path):
    """Parse a CSV written by :func:`emit_csv` back into records."""
    with open(path, encoding="ascii", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        n1 = sum(1 for h in header if h.startswith("qx1_"))
        n2 = sum(1 for h in header if h.startswith("qx2_"))
        records = []
        for row in reader:
            fixed = row[: len(_FIXED_COLUMNS)]
            qx1 = tuple(float(x) for x in row[len(_FIXED_COLUMNS):len(_FIXED_COLUMNS) + n1])
            qx2 = tuple(float(x) for x in row[len(_FIXED_COLUMNS) + n1:])
            records.append(
                SweepRecord(
                    regime=fixed[0],
                    snr_db=float(fixed[1]),
                    beta=float(fixed[2]),
                    op_value=float(fixed[3]),
                    bp_value=float(fixed[4]),
                    costless_value=float(fixed[5]),
                    gain_op_bp_pct=float(fixed[6]),
                    gain_costless_bp_pct=float(fixed[7]),
                    ic_at_optimum=float(fixed[8]),
                    stationarity_residual=float(fixed[9]),
                    ordering=fixed[10],
                    qx1=qx1,
                    qx2=qx2,
                    failed=fixed[10] == "failed",
                )
            )
    return records
