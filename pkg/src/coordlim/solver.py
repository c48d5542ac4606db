"""Solver for expected-payoff maximization under the information constraint.

The program: maximize ``E_q[w]`` over joint distributions q whose state
marginal is pinned to ``alpha``, subject to ``ic(q) <= 0``.  Strategy:

* If the per-state best action pair already satisfies the constraint, that
  linear-programming vertex is optimal and the constraint multiplier is 0.
* Otherwise the constraint is active at the optimum, so the multiplier is
  the root of ``lambda -> ic(q*(lambda))``, located by bisection in log
  space.  Each inner problem (minimize ``-w.q + lambda*ic(q)`` over the
  marginal polytope) is solved by alternating minimization: for a fixed
  X2 marginal the blockwise minimizer is a closed-form scaled softmax, and
  the X2 marginal is then recomputed.  Iterates stay strictly positive via
  a tiny floor, and convergence is certified by a projected-gradient
  stationarity residual, not by the iteration count.

A grid-search oracle (:func:`brute_force_solve`) is provided for tiny
instances so the solver can be cross-checked end to end.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import backend
from .distributions import (
    Dims,
    JointDistribution,
    StateMarginal,
    entropy_bits,
    marginal_x2,
    slater_point,
)
from .errors import (
    BracketError,
    CapacityError,
    ConvergenceError,
    ValidationError,
)

LN2 = math.log(2.0)

# Pairwise payoff gap below which two entries count as tied.
DEFAULT_TIE_TOL = 1e-9

# Components within this factor of the interior floor are treated as
# pinned by the floor when assessing stationarity.
_FLOOR_ACTIVE_FACTOR = 8.0

# Accept a grid point as constraint-feasible up to this slack.
_FEAS_EPS = 1e-12

# Refuse to materialize more grid candidates than this per block.
_MAX_CANDIDATES = 5_000_000


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """One instance: dimensions, payoff vector (lexicographic order) and
    the pinned state marginal."""

    dims: Dims
    w: np.ndarray
    alpha: StateMarginal

    def __post_init__(self):
        w = np.ascontiguousarray(self.w, dtype=np.float64)
        if w.shape != (self.dims.n,):
            raise ValidationError(f"w has shape {w.shape}, expected ({self.dims.n},)")
        if not np.all(np.isfinite(w)):
            raise ValidationError("w must be finite")
        if self.alpha.n0 != self.dims.n0:
            raise ValidationError(
                f"alpha has {self.alpha.n0} entries, dims expect {self.dims.n0}"
            )
        w.setflags(write=False)
        object.__setattr__(self, "w", w)


@dataclass(frozen=True)
class SolverOptions:
    feas_tol: float = 1e-8
    stat_tol: float = 1e-6
    interior_floor: float = 1e-12
    max_outer_iters: int = 200
    max_inner_iters: int = 10000
    bisection_bracket: tuple = (1e-6, 1e4)

    def __post_init__(self):
        if min(self.feas_tol, self.stat_tol, self.interior_floor) <= 0.0:
            raise ValidationError("tolerances must be strictly positive")
        if self.max_outer_iters < 1 or self.max_inner_iters < 1:
            raise ValidationError("iteration limits must be at least 1")
        lo, hi = self.bisection_bracket
        if not 0.0 < lo < hi:
            raise ValidationError("bisection bracket must satisfy 0 < lower < upper")


class Ordering(Enum):
    STRICTLY_ORDERED = "strict"
    HAS_TIES = "ties"


@dataclass(frozen=True)
class OrderingReport:
    """Whether the payoff vector is strictly ordered; tied pairs are
    1-based index pairs (i, j) with i < j."""

    ordering: Ordering
    tied_pairs: tuple

    @property
    def is_strict(self):
        return self.ordering is Ordering.STRICTLY_ORDERED


@dataclass(frozen=True, eq=False)
class KktMultipliers:
    """Multipliers of the Lagrangian: normalization (mu0), one per state
    block (mu), componentwise nonnegativity (lam) and the information
    constraint (lambda_ic)."""

    mu0: float
    mu: np.ndarray
    lam: np.ndarray
    lambda_ic: float

    def __post_init__(self):
        if self.lambda_ic < 0.0:
            raise ValidationError("lambda_ic must be nonnegative")
        lam = np.asarray(self.lam, dtype=np.float64)
        if np.any(lam < 0.0):
            raise ValidationError("nonnegativity multipliers must be nonnegative")


@dataclass(frozen=True)
class KktResiduals:
    stationarity: float
    feasibility: float
    complementarity: float


@dataclass(frozen=True, eq=False)
class Solution:
    q_star: JointDistribution
    multipliers: KktMultipliers
    value: float
    stationarity_residual: float
    feasibility_residual: float
    ic_at_optimum: float
    iterations: int
    ordering: Ordering
    x2_deterministic: bool


@dataclass(frozen=True, eq=False)
class BruteForceResult:
    value: float
    q: JointDistribution


def check_payoff_ordering(w, tie_tol=DEFAULT_TIE_TOL):
    """Scan a payoff vector for ties.

    Strictly ordered means every pairwise gap exceeds ``tie_tol`` (i.e.
    some permutation sorts it strictly).  Otherwise the report lists the
    offending 1-based pairs.
    """
    w = np.asarray(w, dtype=np.float64)
    if w.size == 0:
        raise ValidationError("payoff vector must be nonempty")
    order = np.argsort(w, kind="stable")
    ws = w[order]
    gaps = np.diff(ws)
    if w.size == 1 or np.all(gaps > tie_tol):
        return OrderingReport(Ordering.STRICTLY_ORDERED, ())
    pairs = []
    # chain adjacent near-equal entries into clusters, then confirm each
    # pair directly (a chain can drift beyond tie_tol end to end)
    start = 0
    for pos in range(1, w.size + 1):
        if pos == w.size or ws[pos] - ws[pos - 1] > tie_tol:
            cluster = order[start:pos]
            if cluster.size > 1:
                for a in range(cluster.size):
                    for b in range(a + 1, cluster.size):
                        i, j = cluster[a], cluster[b]
                        if abs(w[i] - w[j]) <= tie_tol:
                            pairs.append((int(min(i, j)) + 1, int(max(i, j)) + 1))
            start = pos
    pairs.sort()
    return OrderingReport(Ordering.HAS_TIES, tuple(pairs))


def _stationarity_at(qv, w, lambda_ic, dims, floor):
    """Optimality residual of the inner objective at q (payoff units).

    Interior components must share a common per-block gradient value;
    components pinned at the interior floor only need their gradient at or
    above it (their excess is the bound multiplier).  Cells belonging to a
    fully collapsed X2 column are governed by a column-level condition
    instead: collapsing the column is optimal iff its profile-optimized
    growth rate rho_k = sum_b alpha_b U_bk / Z_b is at most one (this is
    the deterministic-X2 boundary case, where coordinatewise gradients are
    meaningless because the entropy terms of a column cancel jointly).
    Returns (residual, per-block constants, componentwise bound
    multipliers).
    """
    kern = backend.active()
    n0, n1, n2 = dims.n0, dims.n1, dims.n2
    k = dims.block
    if lambda_ic > 0.0:
        _, grad = kern.ic_and_grad(qv, n0, n1, n2)
        g = -w + lambda_ic * grad
    else:
        g = -np.asarray(w, dtype=np.float64)

    t = qv.reshape(n0 * n1, n2).sum(axis=0)
    dead_cols = t <= 8.0 * n0 * n1 * floor if lambda_ic > 0.0 else np.zeros(n2, bool)
    live_cell = np.tile(~dead_cols, n0 * n1).reshape(n0, k)

    g2 = g.reshape(n0, k)
    q2 = qv.reshape(n0, k)
    pinned = q2 <= floor * _FLOOR_ACTIVE_FACTOR
    interior = ~pinned & live_cell
    # guard: anchor each block at its largest cell if everything is pinned
    empty = ~interior.any(axis=1)
    if empty.any():
        interior[empty, q2[empty].argmax(axis=1)] = True
    cnt = interior.sum(axis=1)
    c = np.where(interior, g2, 0.0).sum(axis=1) / cnt
    dev = g2 - c[:, None]
    res = float(np.abs(dev[interior]).max())
    pinned_live = pinned & live_cell
    if pinned_live.any():
        res = max(res, float(np.maximum(-dev[pinned_live], 0.0).max()))
    lam = np.where(pinned & live_cell, np.maximum(dev, 0.0), 0.0).ravel()

    if dead_cols.any():
        # ln Z_b recovered from the stationary live cells, then
        # rho_k = sum_b alpha_b U_bk / Z_b checked per dead column
        a = (w * (LN2 / lambda_ic)).reshape(n0, n1, n2)
        alpha_b = q2.sum(axis=1)
        ln_t = np.log(np.maximum(t, 1e-300))
        est = (
            np.log(alpha_b)[:, None]
            + np.tile(ln_t, n1)[None, :]
            + a.reshape(n0, k)
            - np.log(np.maximum(q2, 1e-300))
        )
        ln_z = np.where(interior, est, -np.inf).max(axis=1)
        col_hi = a.max(axis=1)
        ln_u = col_hi + np.log(np.exp(a - col_hi[:, None, :]).sum(axis=1))
        terms = np.log(alpha_b)[:, None] + ln_u - ln_z[:, None]
        hi = terms.max(axis=0)
        ln_rho = hi + np.log(np.exp(terms - hi[None, :]).sum(axis=0))
        dead_gap = lambda_ic * np.maximum(ln_rho[dead_cols], 0.0) / LN2
        res = max(res, float(dead_gap.max()))
    return res, c, lam


def _prepare_start(q0, alpha, dims, floor):
    q = np.maximum(np.ascontiguousarray(q0, dtype=np.float64), floor)
    q2 = q.reshape(dims.n0, dims.block)
    q2 *= (alpha / q2.sum(axis=1))[:, None]
    return q


def _inner_engine(w, alpha, dims, lambda_ic, q0, opts, stat_tol=None):
    """Minimize -w.q + lambda_ic*ic(q) over the marginal polytope.

    The blockwise minimizer for a fixed X2 marginal r is a closed-form
    scaled softmax, so the problem reduces to minimizing the analytic
    convex function psi(r) = -(lambda/ln 2) * sum_b alpha_b ln(U_b . r)
    over the (small) X2 simplex, with U the per-block column weights
    exp(w * ln2/lambda) aggregated over X1.  That tiny program is solved
    by an active-set Newton method (released/killed columns correspond to
    the deterministic-X2 boundary cases), the joint distribution is
    reassembled from the optimal r, and the result is certified by the
    projected-gradient stationarity residual on q itself.

    Returns (q, newton_iterations); raises ConvergenceError with the last
    iterate if the certificate fails.
    """
    kern = backend.active()
    floor = opts.interior_floor
    if stat_tol is None:
        stat_tol = opts.stat_tol
    n0, n2 = dims.n0, dims.n2
    c = lambda_ic / LN2

    # Per-block, per-X2-column weights in a shifted log scale so that
    # extreme payoff/multiplier ratios cannot overflow.
    ws = (w * (LN2 / lambda_ic)).reshape(n0, dims.n1, n2)
    col_max = ws.max(axis=1)
    log_u = col_max + np.log(np.exp(ws - col_max[:, None, :]).sum(axis=1))
    shift = log_u.max(axis=1)
    u = np.exp(log_u - shift[:, None])

    def psi(r_vec):
        z = u @ r_vec
        if np.any(z <= 0.0):
            return math.inf
        return -c * float(alpha @ np.log(z))

    r = np.asarray(q0, dtype=np.float64).reshape(n0 * dims.n1, n2).sum(axis=0)
    r = np.maximum(r, 0.0)
    r /= r.sum()

    release_eps = 1e-10
    released = np.zeros(n2, dtype=bool)
    used = 0
    for _ in range(min(200, opts.max_inner_iters)):
        used += 1
        z = u @ r
        e = u / z[:, None]
        rho = alpha @ e
        free = r > 0.0
        err = float(np.abs(rho[free] - 1.0).max())
        if err <= 1e-13:
            violated = ~free & ~released & (rho > 1.0 + 1e-12)
            if not violated.any():
                break
            # a zeroed column pays off: release it and let Newton size it
            # (once; a re-killed column stays killed, the caller's
            # certificate arbitrates)
            r[violated] = release_eps
            released |= violated
            r /= r.sum()
            continue
        idx = np.nonzero(free)[0]
        h = c * (e[:, idx].T * alpha) @ e[:, idx]
        g = -c * rho[idx]
        f = idx.size
        kkt = np.zeros((f + 1, f + 1))
        kkt[:f, :f] = h + (1e-12 * max(1.0, np.trace(h) / f)) * np.eye(f)
        kkt[:f, f] = 1.0
        kkt[f, :f] = 1.0
        rhs = np.concatenate([-g, [0.0]])
        try:
            d = np.linalg.solve(kkt, rhs)[:f]
        except np.linalg.LinAlgError:
            d = -g + g.mean()
        t_max = 1.0
        shrink = d < 0.0
        if shrink.any():
            t_max = min(1.0, float((r[idx][shrink] / -d[shrink]).min()))
        if float(np.abs(d).max()) <= 1e-6:
            # local Newton phase: objective differences are below float
            # resolution here, so a sufficient-decrease test would only
            # compare noise; take the (feasibility-capped) full step
            trial = r.copy()
            trial[idx] = np.maximum(r[idx] + t_max * d, 0.0)
            trial /= trial.sum()
            if np.array_equal(trial, r):
                break
            r = trial
            continue
        # global phase: longest feasible step, then backtrack on psi
        base = psi(r)
        slope = float(g @ d)
        t = t_max
        r_new = None
        for _ in range(60):
            trial = r.copy()
            trial[idx] = np.maximum(r[idx] + t * d, 0.0)
            trial /= trial.sum()
            if psi(trial) <= base + 1e-4 * t * slope:
                r_new = trial
                break
            t *= 0.5
        if r_new is None or np.array_equal(r_new, r):
            break
        r = r_new

    # Reassemble the joint distribution from r.
    with np.errstate(divide="ignore"):
        log_r = np.where(r > 0.0, np.log(np.maximum(r, 1e-300)), -np.inf)
    s = ws + log_r[None, None, :]
    block = s.reshape(n0, dims.block)
    m = block.max(axis=1)
    lse = m + np.log(np.exp(block - m[:, None]).sum(axis=1))
    q = np.exp(np.log(alpha)[:, None] + block - lse[:, None])
    q = _prepare_start(q.ravel(), alpha, dims, floor)

    residual, _, _ = _stationarity_at(q, w, lambda_ic, dims, floor)
    if residual <= stat_tol:
        return q, used
    raise ConvergenceError(
        f"inner minimization at lambda_ic={lambda_ic:.6g} stalled at "
        f"stationarity {residual:.3g} after {used} iterations",
        last_iterate=q,
        residual=residual,
    )


def inner_minimize(spec, lambda_ic, start, opts=None):
    """Public wrapper around the inner penalized minimization.

    ``start`` must match the marginal and be componentwise at or above the
    interior floor; the result has exact block marginals and certified
    stationarity for the fixed-multiplier objective.
    """
    opts = opts or SolverOptions()
    if lambda_ic <= 0.0:
        raise ValidationError("lambda_ic must be strictly positive")
    if start.dims != spec.dims:
        raise ValidationError("start has mismatched dimensions")
    if np.any(start.q < opts.interior_floor):
        raise ValidationError("start must be componentwise >= interior_floor")
    blocks = start.as_table().sum(axis=(1, 2))
    if np.abs(blocks - spec.alpha.alpha).max() > 1e-9:
        raise ValidationError("start does not match the state marginal")
    q, _ = _inner_engine(spec.w, spec.alpha.alpha, spec.dims, lambda_ic, start.q, opts)
    return JointDistribution(dims=spec.dims, q=q / q.sum())


def _lp_vertex(spec):
    """Per-block best action pair: the optimum with the constraint dropped."""
    k = spec.dims.block
    w2 = spec.w.reshape(spec.dims.n0, k)
    q2 = np.zeros_like(w2)
    best = np.argmax(w2, axis=1)
    q2[np.arange(spec.dims.n0), best] = spec.alpha.alpha
    return q2.ravel()


def _assemble(spec, qv, lambda_ic, report, iterations, opts):
    kern = backend.active()
    d = spec.dims
    qv = np.ascontiguousarray(qv, dtype=np.float64)
    qv = qv / qv.sum()
    ic = float(kern.ic_value(qv, d.n0, d.n1, d.n2))
    stat, c, lam = _stationarity_at(qv, spec.w, lambda_ic, d, opts.interior_floor)
    mu_sum = -c
    mu0 = float(mu_sum.mean())
    mu = mu_sum - mu0
    q2 = qv.reshape(d.n0, d.block)
    feas = max(
        abs(float(qv.sum()) - 1.0),
        float(np.abs(q2.sum(axis=1) - spec.alpha.alpha).max()),
        max(0.0, ic),
    )
    q_star = JointDistribution(dims=d, q=qv)
    return Solution(
        q_star=q_star,
        multipliers=KktMultipliers(mu0=mu0, mu=mu, lam=lam, lambda_ic=lambda_ic),
        value=float(qv @ spec.w),
        stationarity_residual=stat,
        feasibility_residual=feas,
        ic_at_optimum=ic,
        iterations=iterations,
        ordering=report.ordering,
        x2_deterministic=entropy_bits(marginal_x2(q_star)) < 1e-9,
    )


def solve(spec, opts=None, start=None):
    """Solve the constrained program to the configured tolerances.

    Returns a :class:`Solution` whose residual fields certify the answer:
    feasibility (marginals, normalization, constraint) within ``feas_tol``
    and stationarity within ``stat_tol``.  With a strictly ordered payoff
    vector the constraint is active and the solution unique; with ties the
    problem is still solved but uniqueness is not certified, which the
    ``ordering`` field records.

    ``start`` optionally seeds the first inner solve with a strictly
    positive warm start (the result does not depend on it beyond the
    certified tolerances).
    """
    opts = opts or SolverOptions()
    kern = backend.active()
    d = spec.dims
    report = check_payoff_ordering(spec.w)

    # Constraint-free optimum first: if it is feasible the multiplier is 0.
    q_lp = _lp_vertex(spec)
    if kern.ic_value(q_lp, d.n0, d.n1, d.n2) <= opts.feas_tol:
        return _assemble(spec, q_lp, 0.0, report, 0, opts)

    if start is not None:
        if start.dims != d:
            raise ValidationError("start has mismatched dimensions")
        q_warm = start.q
    else:
        q_warm = slater_point(spec.alpha, d).q
    q_warm = _prepare_start(q_warm, spec.alpha.alpha, d, opts.interior_floor)

    iterations = 0
    stat_floor = 1e-14 * max(1.0, float(np.abs(spec.w).max()))

    def probe(lam):
        # the dual value inherits roughly (inner residual)/lam of error,
        # so pin the inner solve well below what bisection must resolve
        nonlocal q_warm, iterations
        tol = max(min(opts.stat_tol, 0.05 * lam * opts.feas_tol), stat_floor)
        q_warm, used = _inner_engine(
            spec.w, spec.alpha.alpha, d, lam, q_warm, opts, stat_tol=tol
        )
        iterations += used
        return float(kern.ic_value(q_warm, d.n0, d.n1, d.n2))

    lo, hi = opts.bisection_bracket
    ic_lo = probe(lo)
    if ic_lo <= opts.feas_tol:
        # effectively unconstrained already at the smallest multiplier
        return _assemble(spec, q_warm, lo, report, iterations, opts)

    # Walk the multiplier up in decades (warm-started probes stay cheap)
    # until the constraint value changes sign, then bisect in log space.
    a, b = lo, None
    lam = lo
    while b is None:
        lam = min(lam * 100.0, hi)
        ic_lam = probe(lam)
        if abs(ic_lam) <= opts.feas_tol:
            return _assemble(spec, q_warm, lam, report, iterations, opts)
        if ic_lam < 0.0:
            b = lam
        else:
            a = lam
            if lam >= hi:
                raise BracketError(
                    f"ic({hi:g}) = {ic_lam:.3g} is still positive; "
                    "widen bisection_bracket"
                )

    q_a = q_b = None
    mid, ic_mid = b, math.nan
    for _ in range(opts.max_outer_iters):
        mid = math.sqrt(a * b)
        ic_mid = probe(mid)
        if abs(ic_mid) <= opts.feas_tol:
            return _assemble(spec, q_warm, mid, report, iterations, opts)
        if ic_mid > 0.0:
            a, q_a = mid, q_warm
        else:
            b, q_b = mid, q_warm
        if b - a <= 1e-12 * b:
            break

    # The multiplier bracket has collapsed with the constraint value still
    # jumping across zero: the penalized argmin moves across a nearly flat
    # face (an X2 column collapsing, i.e. the deterministic-X2 boundary
    # case).  The constrained optimum then lies on the segment between the
    # two limit points; pick the mixture with zero constraint value.
    if q_a is not None and q_b is not None:
        t_lo, t_hi = 0.0, 1.0
        for _ in range(100):
            t = 0.5 * (t_lo + t_hi)
            q_mix = (1.0 - t) * q_b + t * q_a
            ic_mix = float(kern.ic_value(q_mix, d.n0, d.n1, d.n2))
            if abs(ic_mix) <= 0.5 * opts.feas_tol:
                break
            if ic_mix > 0.0:
                t_hi = t
            else:
                t_lo = t
        lam_star = math.sqrt(a * b)
        sol = _assemble(spec, q_mix, lam_star, report, iterations, opts)
        if sol.stationarity_residual <= opts.stat_tol:
            return sol
    raise ConvergenceError(
        f"bisection did not pin the constraint to |ic| <= {opts.feas_tol:g} "
        f"(last ic = {ic_mid:.3g} at lambda_ic = {mid:.6g})",
        last_iterate=q_warm,
        residual=abs(ic_mid),
    )


def kkt_residuals(q, mult, spec):
    """Residuals of the first-order system at (q, multipliers).

    Stationarity is the max absolute violation of the gradient equation;
    feasibility covers normalization, block marginals and the constraint;
    complementarity covers both multiplier products.  Requires an interior
    q since the constraint gradient blows up on the boundary.
    """
    d = spec.dims
    qv = q.q
    if q.dims != d:
        raise ValidationError("q has mismatched dimensions")
    if np.any(qv <= 0.0):
        raise ValidationError("kkt_residuals requires an interior q")
    kern = backend.active()
    ic, grad = kern.ic_and_grad(np.ascontiguousarray(qv), d.n0, d.n1, d.n2)
    blocks = np.repeat(np.arange(d.n0), d.block)
    stat_vec = -spec.w + mult.mu0 + np.asarray(mult.mu)[blocks] + mult.lambda_ic * grad
    stat_vec -= np.asarray(mult.lam)
    q2 = qv.reshape(d.n0, d.block)
    feas = max(
        abs(float(qv.sum()) - 1.0),
        float(np.abs(q2.sum(axis=1) - spec.alpha.alpha).max()),
        max(0.0, float(ic)),
    )
    comp = max(
        float(np.abs(np.asarray(mult.lam) * qv).max()),
        abs(mult.lambda_ic * float(ic)),
    )
    return KktResiduals(
        stationarity=float(np.abs(stat_vec).max()),
        feasibility=feas,
        complementarity=comp,
    )


def random_feasible_start(spec, rng):
    """A random strictly feasible distribution (exact marginals, ic < 0).

    Blends one Dirichlet conditional per state with the uniform one until
    the constraint value is strictly negative.
    """
    d = spec.dims
    k = d.block
    kern = backend.active()
    cond = rng.dirichlet(np.ones(k), size=d.n0)
    uniform = np.full((1, k), 1.0 / k)
    for t in (0.9, 0.7, 0.5, 0.3, 0.15, 0.05):
        mix = (1.0 - t) * uniform + t * cond
        qv = (spec.alpha.alpha[:, None] * mix).ravel()
        if kern.ic_value(qv, d.n0, d.n1, d.n2) < -1e-9:
            return JointDistribution(dims=d, q=qv / qv.sum())
    return slater_point(spec.alpha, d)


# ---------------------------------------------------------------------------
# Grid-search oracle
# ---------------------------------------------------------------------------


def _compositions(k, total, lower=None, upper=None):
    """Integer k-tuples with the given sum, optionally box-constrained."""
    lower = [0] * k if lower is None else list(lower)
    upper = [total] * k if upper is None else list(upper)
    suffix_lo = [0] * (k + 1)
    suffix_hi = [0] * (k + 1)
    for j in range(k - 1, -1, -1):
        suffix_lo[j] = suffix_lo[j + 1] + lower[j]
        suffix_hi[j] = suffix_hi[j + 1] + upper[j]
    out = []
    current = [0] * k

    def rec(j, remaining):
        if j == k - 1:
            if lower[j] <= remaining <= upper[j]:
                current[j] = remaining
                out.append(tuple(current))
            return
        lo_j = max(lower[j], remaining - suffix_hi[j + 1])
        hi_j = min(upper[j], remaining - suffix_lo[j + 1])
        for v in range(lo_j, hi_j + 1):
            current[j] = v
            rec(j + 1, remaining - v)
            if len(out) > _MAX_CANDIDATES:
                raise CapacityError(
                    "grid too fine: candidate enumeration exceeds "
                    f"{_MAX_CANDIDATES} per block"
                )

    rec(0, total)
    return np.array(out, dtype=np.float64)


def _block_stats(cands, w_block, dims):
    """Per-candidate payoff, X2 marginal and entropy, sorted value-descending."""
    v = cands @ w_block
    m = cands.reshape(-1, dims.n1, dims.n2).sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(cands > 0.0, np.log2(np.where(cands > 0.0, cands, 1.0)), 0.0)
    h = -(cands * logs).sum(axis=1)
    order = np.argsort(-v, kind="stable")
    return (
        np.ascontiguousarray(cands[order]),
        np.ascontiguousarray(v[order]),
        np.ascontiguousarray(m[order]),
        np.ascontiguousarray(h[order]),
    )


def _grid_search(spec, block_sets, incumbent_value, incumbent_conds):
    """Exhaustive DFS over per-block candidates with value-bound pruning."""
    kern = backend.active()
    d = spec.dims
    alpha = spec.alpha.alpha
    n0 = d.n0
    suffix = np.zeros(n0 + 1)
    for b in range(n0 - 1, -1, -1):
        suffix[b] = suffix[b + 1] + alpha[b] * block_sets[b][1][0]

    best_value = incumbent_value
    best_conds = list(incumbent_conds)
    chosen = [None] * n0

    def rec(level, t_partial, pv, hp):
        nonlocal best_value, best_conds
        cands, v, m, h = block_sets[level]
        a = alpha[level]
        if level == n0 - 1:
            idx, val = kern.scan_block(
                t_partial, pv, hp, v, m, h, a, best_value, _FEAS_EPS
            )
            if idx >= 0:
                best_value = val
                chosen[level] = cands[idx]
                best_conds = [c.copy() for c in chosen]
            return
        for ci in range(v.shape[0]):
            pv_next = pv + a * v[ci]
            if pv_next + suffix[level + 1] <= best_value:
                break
            chosen[level] = cands[ci]
            rec(level + 1, t_partial + a * m[ci], pv_next, hp + a * h[ci])

    rec(0, np.zeros(d.n2), 0.0, 0.0)
    return best_value, best_conds


def brute_force_solve(spec, grid_step=0.1):
    """Independent grid-search oracle over the marginal-feasible polytope.

    Each state block carries a conditional distribution over action pairs,
    discretized with the given step; all feasible combinations are scanned
    (with pruning that cannot discard the optimum), then the search is
    repeated once on a 10x finer grid restricted to a one-coarse-step box
    around the incumbent.  Only for tiny instances.
    """
    d = spec.dims
    if d.n > 8:
        raise CapacityError(f"brute force limited to n <= 8 cells, got {d.n}")
    if not 0.0 < grid_step <= 0.1 + 1e-12:
        raise ValidationError("grid_step must lie in (0, 0.1]")
    k = d.block
    res = max(1, round(1.0 / grid_step))
    alpha = spec.alpha.alpha
    w2 = spec.w.reshape(d.n0, k)

    cands = _compositions(k, res) / res
    block_sets = [_block_stats(cands, w2[b], d) for b in range(d.n0)]

    # Seed: best state-independent conditional; always feasible since it
    # makes the actions independent of the state.
    v_shared = cands @ (alpha @ w2)
    j = int(np.argmax(v_shared))
    incumbent_value = float(v_shared[j])
    incumbent_conds = [cands[j].copy() for _ in range(d.n0)]

    value, conds = _grid_search(spec, block_sets, incumbent_value, incumbent_conds)

    # One refinement pass: 10x finer grid in a +-grid_step box per block.
    fine = res * 10
    fine_sets = []
    for b in range(d.n0):
        counts = np.rint(conds[b] * fine).astype(int)
        drift = fine - counts.sum()
        counts[int(np.argmax(counts))] += drift
        lower = np.maximum(counts - 10, 0)
        upper = np.minimum(counts + 10, fine)
        box = _compositions(k, fine, lower=lower, upper=upper) / fine
        fine_sets.append(_block_stats(box, w2[b], d))
    value, conds = _grid_search(spec, fine_sets, value, conds)

    qv = (alpha[:, None] * np.vstack(conds)).ravel()
    q = JointDistribution(dims=d, q=qv / qv.sum())
    return BruteForceResult(value=float(q.q @ spec.w), q=q)


# ---------------------------------------------------------------------------
# Regression-fixture serialization
# ---------------------------------------------------------------------------


def write_solution_record(path, sol):
    """Text record: value, constraint, residuals, multiplier, then q."""
    d = sol.q_star.dims
    lines = [
        f"value {sol.value:.17g}",
        f"ic {sol.ic_at_optimum:.17g}",
        f"stationarity {sol.stationarity_residual:.17g}",
        f"feasibility {sol.feasibility_residual:.17g}",
        f"lambda_ic {sol.multipliers.lambda_ic:.17g}",
        f"dims {d.n0} {d.n1} {d.n2}",
    ]
    lines.extend(f"{x:.17g}" for x in sol.q_star.q)
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


_RECORD_KEYS = ("value", "ic", "stationarity", "feasibility", "lambda_ic")


def read_solution_record(path):
    """Parse :func:`write_solution_record` output into a plain dict."""
    scalars = {}
    dims = None
    values = []
    with open(path, encoding="ascii") as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "dims":
                dims = Dims(*(int(p) for p in parts[1:]))
            elif parts[0] in _RECORD_KEYS:
                scalars[parts[0]] = float(parts[1])
            else:
                values.append(float(parts[0]))
    if dims is None:
        raise ValidationError(f"{path}: missing dims line")
    scalars["q"] = JointDistribution(dims=dims, q=np.array(values))
    return scalars
