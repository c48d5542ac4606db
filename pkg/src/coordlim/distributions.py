"""Joint distributions over a random state and two agent actions.

A triple (X0, X1, X2) collects the random state seen by agent 1, agent 1's
action and agent 2's action.  Joint distributions are stored as flat
vectors in lexicographic order: the vector is split into ``n0`` blocks of
size ``n1*n2`` (one block per state value), and within a block the X2
coordinate varies fastest.  Public coordinate indices are 1-based to match
that tabulated layout; storage is 0-based NumPy.

Everything here is pure and immutable: entropies in bits, the convention
0*log 0 = 0 throughout, and no silent renormalization (inputs that fail a
probability invariant are rejected).
"""

import warnings
from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import ValidationError

# Tolerance on probability-vector sums at construction.  Violations are
# rejected rather than renormalized so upstream errors cannot hide.
PROB_SUM_TOL = 1e-12


@dataclass(frozen=True)
class Dims:
    """Alphabet sizes of the state (n0) and the two action sets (n1, n2)."""

    n0: int
    n1: int
    n2: int

    def __post_init__(self):
        for name in ("n0", "n1", "n2"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise ValidationError(f"{name} must be a positive integer, got {value!r}")

    @property
    def n(self):
        """Total number of (x0, x1, x2) cells."""
        return self.n0 * self.n1 * self.n2

    @property
    def block(self):
        """Cells per state block."""
        return self.n1 * self.n2


def _freeze(arr):
    out = np.array(arr, dtype=np.float64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class StateMarginal:
    """Fixed full-support distribution of the state X0."""

    alpha: np.ndarray

    def __post_init__(self):
        alpha = _freeze(np.atleast_1d(self.alpha))
        if alpha.ndim != 1 or alpha.size < 1:
            raise ValidationError("alpha must be a nonempty vector")
        if not np.all(alpha > 0.0):
            raise ValidationError("state marginal must have full support (all alpha_j > 0)")
        if abs(float(alpha.sum()) - 1.0) > PROB_SUM_TOL:
            raise ValidationError(f"alpha sums to {alpha.sum()!r}, not 1 within {PROB_SUM_TOL}")
        object.__setattr__(self, "alpha", alpha)

    @property
    def n0(self):
        return self.alpha.size


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Probability vector over (X0, X1, X2) in lexicographic layout."""

    dims: Dims
    q: np.ndarray

    def __post_init__(self):
        q = _freeze(np.atleast_1d(self.q))
        if q.ndim != 1 or q.size != self.dims.n:
            raise ValidationError(f"q has length {q.size}, expected {self.dims.n}")
        if not np.all(q >= 0.0):
            raise ValidationError("q must be componentwise nonnegative")
        if abs(float(q.sum()) - 1.0) > PROB_SUM_TOL:
            raise ValidationError(f"q sums to {q.sum()!r}, not 1 within {PROB_SUM_TOL}")
        object.__setattr__(self, "q", q)

    def as_table(self):
        """Read-only view shaped (n0, n1, n2)."""
        return self.q.reshape(self.dims.n0, self.dims.n1, self.dims.n2)


@dataclass(frozen=True)
class IcValue:
    """Information-constraint value and the entropies it decomposes into.

    ``value = h_x0 + h_x2 - h_joint`` (all in bits); the constraint is
    satisfied when ``value <= 0``.
    """

    value: float
    h_x0: float
    h_x2: float
    h_joint: float


def lex_index(x0, x1, x2, dims):
    """Flat 1-based index of the coordinate triple (1-based per axis)."""
    if not 1 <= x0 <= dims.n0:
        raise ValidationError(f"x0={x0} out of range 1..{dims.n0}")
    if not 1 <= x1 <= dims.n1:
        raise ValidationError(f"x1={x1} out of range 1..{dims.n1}")
    if not 1 <= x2 <= dims.n2:
        raise ValidationError(f"x2={x2} out of range 1..{dims.n2}")
    return (x0 - 1) * dims.n1 * dims.n2 + (x1 - 1) * dims.n2 + x2


def lex_unindex(i, dims):
    """Inverse of :func:`lex_index`; returns the 1-based triple."""
    if not 1 <= i <= dims.n:
        raise ValidationError(f"index {i} out of range 1..{dims.n}")
    r = i - 1
    x2 = r % dims.n2
    r //= dims.n2
    x1 = r % dims.n1
    x0 = r // dims.n1
    return x0 + 1, x1 + 1, x2 + 1


def entropy_bits(p):
    """Shannon entropy in bits of a nonnegative vector, with 0*log 0 = 0."""
    p = np.asarray(p, dtype=np.float64)
    if np.any(p < 0.0):
        raise ValidationError("entropy input must be nonnegative")
    pos = p[p > 0.0]
    return float(-(pos * np.log2(pos)).sum())


def marginal_state(q):
    """Marginal of X0: per-block sums of the joint vector."""
    return q.as_table().sum(axis=(1, 2))


def marginal_x1(q):
    """Marginal of X1 (agent 1's action distribution)."""
    return q.as_table().sum(axis=(0, 2))


def marginal_x2(q):
    """Marginal of X2: strided sums with stride n2."""
    return q.as_table().sum(axis=(0, 1))


def pair_marginal_x0_x2(q):
    """Joint marginal of (X0, X2), shaped (n0, n2)."""
    return q.as_table().sum(axis=1)


def expected_payoff(q, w):
    """Inner product of the joint distribution with a payoff vector."""
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (q.dims.n,):
        raise ValidationError(f"payoff vector has shape {w.shape}, expected ({q.dims.n},)")
    return float(q.q @ w)


def info_constraint(q):
    """Constraint value ic(q) = H(X0) + H(X2) - H(X0,X1,X2), in bits.

    Returns the value together with the three entropies; ``value <= 0``
    is the feasibility condition for implementable coordination.
    """
    h_x0 = entropy_bits(marginal_state(q))
    h_x2 = entropy_bits(marginal_x2(q))
    h_joint = entropy_bits(q.q)
    return IcValue(value=h_x0 + h_x2 - h_joint, h_x0=h_x0, h_x2=h_x2, h_joint=h_joint)


def info_constraint_vector(vec, dims):
    """ic of a raw nonnegative vector, without simplex validation.

    The entropy expressions extend to arbitrary nonnegative vectors, which
    is what finite-difference checks of the gradient need (perturbed
    vectors no longer sum to one).
    """
    vec = np.ascontiguousarray(vec, dtype=np.float64)
    if vec.shape != (dims.n,):
        raise ValidationError(f"vector has shape {vec.shape}, expected ({dims.n},)")
    if np.any(vec < 0.0):
        raise ValidationError("vector must be componentwise nonnegative")
    return float(backend.active().ic_value(vec, dims.n0, dims.n1, dims.n2))


def info_constraint_gradient(q):
    """Exact gradient of ic at an interior distribution.

    Component i is ``-log2(S_b) - log2(T_t) + log2(q_i) - 1/ln 2`` where
    S_b is the state-block sum containing i and T_t the X2-strided sum.
    Unbounded on the boundary, hence the strict positivity requirement.
    """
    qv = q.q
    if np.any(qv <= 0.0):
        raise ValidationError("gradient requires a strictly positive q")
    d = q.dims
    _, grad = backend.active().ic_and_grad(
        np.ascontiguousarray(qv), d.n0, d.n1, d.n2
    )
    return grad


def mutual_information_x0_x2(q):
    """I(X0; X2) in bits, computed from the definitional double sum."""
    pair = pair_marginal_x0_x2(q)
    px0 = pair.sum(axis=1)
    px2 = pair.sum(axis=0)
    mask = pair > 0.0
    ratio = pair[mask] / np.outer(px0, px2)[mask]
    return float((pair[mask] * np.log2(ratio)).sum())


def conditional_entropy_x1_given_x0_x2(q):
    """H(X1 | X0, X2) in bits, computed from the definitional sum."""
    table = q.as_table()
    pair = table.sum(axis=1)
    mask = table > 0.0
    denom = np.broadcast_to(pair[:, None, :], table.shape)
    return float(-(table[mask] * np.log2(table[mask] / denom[mask])).sum())


def slater_point(alpha, dims):
    """Strictly feasible product distribution alpha x uniform x uniform.

    Its constraint value is exactly -log2(n1), strictly negative whenever
    agent 1 has at least two actions; with n1 = 1 the point is feasible
    only with equality, and a warning is emitted.
    """
    if alpha.n0 != dims.n0:
        raise ValidationError(f"alpha has {alpha.n0} states, dims expect {dims.n0}")
    if dims.n1 == 1:
        warnings.warn(
            "n1 = 1 leaves no room for signaling: the product point satisfies "
            "the information constraint with equality, not strictly",
            stacklevel=2,
        )
    q = np.repeat(alpha.alpha / dims.block, dims.block)
    return JointDistribution(dims=dims, q=q)


def write_distribution(path, q):
    """Serialize to the plain text fixture format (header + one real per line)."""
    lines = [f"dims {q.dims.n0} {q.dims.n1} {q.dims.n2}"]
    lines.extend(f"{x:.17g}" for x in q.q)
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def read_distribution(path):
    """Parse the text fixture format written by :func:`write_distribution`."""
    with open(path, encoding="ascii") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("dims "):
        raise ValidationError(f"{path}: missing 'dims n0 n1 n2' header")
    parts = lines[0].split()
    if len(parts) != 4:
        raise ValidationError(f"{path}: malformed header {lines[0]!r}")
    dims = Dims(*(int(p) for p in parts[1:]))
    values = np.array([float(ln) for ln in lines[1:]])
    return JointDistribution(dims=dims, q=values)
