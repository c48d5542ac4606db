"""NumPy implementations of the hot numerical kernels.

Selected by :mod:`coordlim.backend` when the compiled extension is not
available.  Semantics match ``_fastcore`` (the Cython build) up to float
round-off from different summation orders.

Layout convention: a joint distribution over (X0, X1, X2) is a flat,
C-contiguous float64 vector of length ``n0*n1*n2`` in lexicographic order,
so the X0 block of index ``b`` is ``q[b*n1*n2:(b+1)*n1*n2]`` and the X2
cell of flat index ``i`` is ``i % n2``.
"""

import numpy as np

NAME = "python"

_INV_LN2 = 1.0 / np.log(2.0)


def _xlog2x(x):
    out = np.zeros_like(x)
    mask = x > 0.0
    out[mask] = x[mask] * np.log2(x[mask])
    return out


def ic_value(q, n0, n1, n2):
    """Information-constraint value in bits; tolerates zero components."""
    q3 = np.asarray(q).reshape(n0, n1 * n2)
    s = q3.sum(axis=1)
    t = np.asarray(q).reshape(n0 * n1, n2).sum(axis=0)
    return float(_xlog2x(q3).sum() - _xlog2x(s).sum() - _xlog2x(t).sum())


def ic_and_grad(q, n0, n1, n2):
    """Constraint value (bits) and its exact gradient at a strictly
    positive ``q``.  Gradient component: -log2(block sum) - log2(strided
    sum) + log2(q_i) - 1/ln 2."""
    q3 = np.asarray(q).reshape(n0, n1 * n2)
    s = q3.sum(axis=1)
    t = np.asarray(q).reshape(n0 * n1, n2).sum(axis=0)
    log_q = np.log2(q3)
    log_s = np.log2(s)
    log_t = np.log2(np.tile(t, n1))
    value = float((q3 * log_q).sum() - (s * log_s).sum() - (t * np.log2(t)).sum())
    grad = log_q - log_s[:, None] - log_t[None, :] - _INV_LN2
    return value, grad.ravel()


def ba_step(q, w_scaled, alpha, log_alpha, floor, n0, n1, n2, q_out):
    """One alternating-minimization update of the penalized objective.

    Given the current iterate, recompute the X2 marginal and move every
    block to its closed-form minimizer ``q_i proportional to
    T[x2(i)] * exp(w_scaled_i)`` rescaled to the block mass ``alpha_b``,
    working in the log domain so extreme payoff/multiplier ratios cannot
    overflow.  Components below ``floor`` are clamped and the block is
    renormalized.  Returns the max-norm change.
    """
    q = np.asarray(q)
    t = q.reshape(n0 * n1, n2).sum(axis=0)
    s2 = np.tile(np.log(t), n1)[None, :] + np.asarray(w_scaled).reshape(n0, n1 * n2)
    m = s2.max(axis=1, keepdims=True)
    lse = m + np.log(np.exp(s2 - m).sum(axis=1, keepdims=True))
    qn = np.exp(np.asarray(log_alpha)[:, None] + s2 - lse)
    np.maximum(qn, floor, out=qn)
    qn *= (np.asarray(alpha) / qn.sum(axis=1))[:, None]
    out = np.asarray(q_out)
    out[:] = qn.ravel()
    return float(np.abs(out - q).max())


def scan_block(t_partial, pv, hp, cand_v, cand_m, cand_h, alpha_b, incumbent, feas_eps):
    """Best feasible candidate for the last X0 block of a grid search.

    ``cand_v``/``cand_m``/``cand_h`` hold, per candidate conditional, its
    payoff contribution, X2 marginal and entropy (bits).  Candidates are
    value-descending (the compiled twin exploits that to break early; here
    everything is vectorized).  Returns ``(index, value)`` of the best
    candidate whose completed point beats ``incumbent`` and satisfies the
    information constraint, or ``(-1, incumbent)``.
    """
    vals = pv + alpha_b * np.asarray(cand_v)
    better = vals > incumbent
    if not better.any():
        return -1, incumbent
    idx = np.nonzero(better)[0]
    t_full = t_partial[None, :] + alpha_b * np.asarray(cand_m)[idx]
    h_t = -_xlog2x(t_full).sum(axis=1)
    feasible = h_t - (hp + alpha_b * np.asarray(cand_h)[idx]) <= feas_eps
    if not feasible.any():
        return -1, incumbent
    idx = idx[feasible]
    best = idx[np.argmax(vals[idx])]
    return int(best), float(vals[best])
