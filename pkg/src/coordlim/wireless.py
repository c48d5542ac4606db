"""Two-pair multi-band interference channel as a coordination problem.

Two transmitter-receiver pairs share M frequency bands.  Each transmitter
picks, per slot, one of the discrete power allocations that spread its
budget evenly over a nonempty subset of bands.  Channel gains are drawn
per link and band from two-point alphabets, receivers decode treating the
other pair's signal as noise, and the common payoff is the sum rate.

This module turns such a scenario into a :class:`~coordlim.solver.ProblemSpec`
(state = the global gain vector, actions = the allocation choices of the
informed and uninformed transmitters) and provides the reference policies:
the state-blind half-power split and the costless-coordination upper bound.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .distributions import Dims, StateMarginal, lex_index
from .errors import ValidationError
from .solver import ProblemSpec

# Link order used everywhere a per-band gain quadruple appears: entry (i, j)
# is the gain from transmitter i to receiver j.
LINKS = ((1, 1), (1, 2), (2, 1), (2, 2))


@dataclass(frozen=True, eq=False)
class PowerAction:
    """Even split of the power budget over a nonempty subset of bands."""

    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=np.float64)
        if p.ndim != 1 or p.size < 1:
            raise ValidationError("power vector must be a nonempty 1-d array")
        if np.any(p < 0.0):
            raise ValidationError("power levels must be nonnegative")
        nz = p[p > 0.0]
        if nz.size == 0:
            raise ValidationError("at least one band must carry power")
        if np.abs(nz - nz[0]).max() > 1e-9 * nz[0]:
            raise ValidationError("nonzero power levels must be equal")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def bands(self):
        """1-based indices of the bands in use."""
        return tuple(int(i) + 1 for i in np.nonzero(self.p)[0])


@dataclass(frozen=True, eq=False)
class ChannelState:
    """Per-band gain quadruples, one row per band, columns in LINKS order."""

    g: np.ndarray

    def __post_init__(self):
        g = np.array(self.g, dtype=np.float64)
        if g.ndim != 2 or g.shape[1] != 4:
            raise ValidationError("gains must be an (M, 4) array")
        if np.any(g < 0.0):
            raise ValidationError("gains must be nonnegative")
        g.setflags(write=False)
        object.__setattr__(self, "g", g)

    def gain(self, tx, rx, band):
        """Gain of the (tx -> rx) link on a 1-based band index."""
        return float(self.g[band - 1, LINKS.index((tx, rx))])


@dataclass(frozen=True, eq=False)
class ChannelScenario:
    """Full simulation setup for one operating point.

    ``gain_low``/``gain_high``/``gain_pi`` are (M, 4) arrays in LINKS
    order; ``pi`` is the probability of the LOW alphabet value.  Links in
    ``zero_mask`` are forced to zero gain (protected-band cross links) and
    excluded from the state enumeration.
    """

    m: int
    bandwidths: np.ndarray
    p_max: float
    sigma2: float
    gain_low: np.ndarray
    gain_high: np.ndarray
    gain_pi: np.ndarray
    zero_mask: np.ndarray
    label: str = "custom"

    def __post_init__(self):
        if self.m < 1:
            raise ValidationError("band count must be at least 1")
        bw = np.array(self.bandwidths, dtype=np.float64)
        if bw.shape != (self.m,) or np.any(bw <= 0.0):
            raise ValidationError("bandwidths must be M positive values")
        if self.p_max <= 0.0 or self.sigma2 <= 0.0:
            raise ValidationError("p_max and sigma2 must be positive")
        low = np.array(self.gain_low, dtype=np.float64)
        high = np.array(self.gain_high, dtype=np.float64)
        pi = np.array(self.gain_pi, dtype=np.float64)
        mask = np.array(self.zero_mask, dtype=bool)
        for name, arr in (("gain_low", low), ("gain_high", high), ("gain_pi", pi),
                          ("zero_mask", mask)):
            if arr.shape != (self.m, 4):
                raise ValidationError(f"{name} must have shape ({self.m}, 4)")
        if np.any(low < 0.0) or np.any(high < low):
            raise ValidationError("alphabets must satisfy 0 <= low <= high")
        if np.any((pi < 0.0) | (pi > 1.0)):
            raise ValidationError("Bernoulli parameters must lie in [0, 1]")
        for name, arr in (("bandwidths", bw), ("gain_low", low),
                          ("gain_high", high), ("gain_pi", pi), ("zero_mask", mask)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def snr_db(self):
        return 10.0 * math.log10(self.p_max / self.sigma2)


@dataclass(frozen=True)
class BaselineReport:
    """Side-by-side values of the three policies and the relative gains."""

    op_value: float
    bp_value: float
    costless_value: float
    gain_op_bp: float
    gain_costless_bp: float


def enumerate_power_actions(m, p_max):
    """All even-split allocations, ordered by band count then subset.

    There are 2^m - 1 of them; the all-bands split (the blind policy's
    action) is always last.
    """
    if m < 1:
        raise ValidationError("band count must be at least 1")
    if p_max <= 0.0:
        raise ValidationError("power budget must be positive")
    actions = []
    for count in range(1, m + 1):
        for subset in itertools.combinations(range(m), count):
            p = np.zeros(m)
            p[list(subset)] = p_max / count
            actions.append(PowerAction(p=p))
    return actions


def uniform_action_index(m):
    """1-based canonical index of the all-bands even split."""
    return 2**m - 1


def enumerate_channel_states(scenario):
    """All gain states with positive probability, with their masses.

    The Cartesian product runs over the non-masked links in band-major,
    LINKS-minor order, low value before high; zero-probability branches
    (pi equal to 0 or 1) are dropped so the returned marginal has full
    support.  Masses multiply to exactly 1.
    """
    positions = [
        (band, link)
        for band in range(scenario.m)
        for link in range(4)
        if not scenario.zero_mask[band, link]
    ]
    choices = []
    for band, link in positions:
        pi = float(scenario.gain_pi[band, link])
        branch = []
        if pi > 0.0:
            branch.append((float(scenario.gain_low[band, link]), pi))
        if pi < 1.0:
            branch.append((float(scenario.gain_high[band, link]), 1.0 - pi))
        choices.append(branch)
    states = []
    for combo in itertools.product(*choices):
        g = np.zeros((scenario.m, 4))
        prob = 1.0
        for (band, link), (value, mass) in zip(positions, combo):
            g[band, link] = value
            prob *= mass
        states.append((ChannelState(g=g), prob))
    return states


def sum_rate(state, p1, p2, scenario):
    """Common payoff: sum over pairs and bands of the single-user-decoding
    rate, weighted by bandwidth.  Interference into receiver i flows
    through the other transmitter's cross link on the same band."""
    g = state.g
    b = scenario.bandwidths
    s2 = scenario.sigma2
    total = 0.0
    for band in range(scenario.m):
        g11, g12, g21, g22 = g[band]
        total += b[band] * math.log2(1.0 + g11 * p1.p[band] / (s2 + g21 * p2.p[band]))
        total += b[band] * math.log2(1.0 + g22 * p2.p[band] / (s2 + g12 * p1.p[band]))
    return total


def build_problem(scenario):
    """Assemble the coordination instance for a scenario.

    State alphabet = enumerated gain states, both action alphabets = the
    power allocations, payoffs in lexicographic order.
    """
    states = enumerate_channel_states(scenario)
    actions = enumerate_power_actions(scenario.m, scenario.p_max)
    n0, na = len(states), len(actions)
    dims = Dims(n0=n0, n1=na, n2=na)
    w = np.empty(dims.n)
    alpha = np.empty(n0)
    pos = 0
    for s, (state, prob) in enumerate(states):
        alpha[s] = prob
        for a1 in actions:
            for a2 in actions:
                w[pos] = sum_rate(state, a1, a2, scenario)
                pos += 1
    return ProblemSpec(dims=dims, w=w, alpha=StateMarginal(alpha=alpha))


def evaluate_blind(spec, uniform_action_idx):
    """Expected payoff when both agents always play the given action.

    This deterministic state-independent pair induces a joint distribution
    with zero constraint value, so it lower-bounds the solver's optimum.
    """
    d = spec.dims
    if not 1 <= uniform_action_idx <= min(d.n1, d.n2):
        raise ValidationError(f"action index {uniform_action_idx} out of range")
    total = 0.0
    for j in range(1, d.n0 + 1):
        idx = lex_index(j, uniform_action_idx, uniform_action_idx, d)
        total += spec.alpha.alpha[j - 1] * spec.w[idx - 1]
    return total


def evaluate_costless(spec):
    """Upper bound: both agents see the state and pick the best pair."""
    blocks = spec.w.reshape(spec.dims.n0, spec.dims.block)
    return float(spec.alpha.alpha @ blocks.max(axis=1))


def relative_gain(a, b):
    """Percentage improvement of a over the positive reference b."""
    if b <= 0.0:
        raise ValidationError("reference value must be positive")
    return 100.0 * (a / b - 1.0)


def baseline_report(op_value, bp_value, costless_value):
    return BaselineReport(
        op_value=op_value,
        bp_value=bp_value,
        costless_value=costless_value,
        gain_op_bp=relative_gain(op_value, bp_value),
        gain_costless_bp=relative_gain(costless_value, bp_value),
    )


# ---------------------------------------------------------------------------
# Presets and scenario files
# ---------------------------------------------------------------------------

# Two-band reference setups: band 1 is protected (no cross gains), band 2
# is a shared interference band.  The regimes differ only in how likely
# the shared band's cross gains are to be high.
_PRESET_PI2 = {"hir": (0.5, 0.1, 0.1, 0.5), "lir": (0.5, 0.9, 0.9, 0.5)}


def preset_scenario(name, snr_db, b1=10.0, b2=10.0):
    """Built-in two-band scenarios 'hir' and 'lir' (bandwidths in MHz)."""
    key = name.lower()
    if key not in _PRESET_PI2:
        raise ValidationError(f"unknown preset {name!r}; choose 'hir' or 'lir'")
    pi2 = _PRESET_PI2[key]
    low = np.array([[0.1, 0.0, 0.0, 0.1], [0.15, 0.15, 0.15, 0.15]])
    high = np.array([[1.9, 0.0, 0.0, 1.9], [1.85, 1.85, 1.85, 1.85]])
    pi = np.array([[0.2, 0.0, 0.0, 0.2], list(pi2)])
    mask = np.array([[False, True, True, False], [False, False, False, False]])
    return ChannelScenario(
        m=2,
        bandwidths=np.array([b1, b2]),
        p_max=10.0 ** (snr_db / 10.0),
        sigma2=1.0,
        gain_low=low,
        gain_high=high,
        gain_pi=pi,
        zero_mask=mask,
        label=key,
    )


def hir_scenario(snr_db, b1=10.0, b2=10.0):
    return preset_scenario("hir", snr_db, b1, b2)


def lir_scenario(snr_db, b1=10.0, b2=10.0):
    return preset_scenario("lir", snr_db, b1, b2)


def with_parameters(scenario, snr_db=None, bandwidths=None):
    """Copy of a scenario with a new operating point."""
    p_max = scenario.p_max
    if snr_db is not None:
        p_max = scenario.sigma2 * 10.0 ** (snr_db / 10.0)
    bw = scenario.bandwidths if bandwidths is None else np.asarray(bandwidths, float)
    return ChannelScenario(
        m=scenario.m,
        bandwidths=bw,
        p_max=p_max,
        sigma2=scenario.sigma2,
        gain_low=scenario.gain_low,
        gain_high=scenario.gain_high,
        gain_pi=scenario.gain_pi,
        zero_mask=scenario.zero_mask,
        label=scenario.label,
    )


def save_scenario(path, scenario):
    """Write the flat key-value scenario format (see :func:`load_scenario`)."""
    lines = [f"m = {scenario.m}", f"p_max = {scenario.p_max:.17g}",
             f"sigma2 = {scenario.sigma2:.17g}"]
    for band in range(scenario.m):
        lines.append(f"b{band + 1} = {scenario.bandwidths[band]:.17g}")
    zeros = [
        f"g{i}{j}_{band + 1}"
        for band in range(scenario.m)
        for pos, (i, j) in enumerate(LINKS)
        if scenario.zero_mask[band, pos]
    ]
    if zeros:
        lines.append("zero = " + " ".join(zeros))
    for band in range(scenario.m):
        for pos, (i, j) in enumerate(LINKS):
            if scenario.zero_mask[band, pos]:
                continue
            lines.append(
                f"g{i}{j}_{band + 1} = {scenario.gain_low[band, pos]:.17g} "
                f"{scenario.gain_high[band, pos]:.17g} "
                f"{scenario.gain_pi[band, pos]:.17g}"
            )
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_scenario(path, snr_db=None):
    """Parse a scenario file.

    Format: one ``key = value`` pair per line, '#' comments.  Keys:
    ``m`` (bands), ``p_max`` or ``snr_db`` (exactly one unless the caller
    overrides), ``sigma2`` (optional, default 1), ``b1..bM`` (MHz),
    ``zero`` (space-separated link names like ``g12_1`` forced to zero),
    and per free link ``g<i><j>_<band> = low high pi`` with pi the
    probability of the low value.  The ``snr_db`` argument overrides the
    file's power setting.
    """
    entries = {}
    with open(path, encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            entries[key.lower()] = value
    if "m" not in entries:
        raise ValidationError(f"{path}: missing band count 'm'")
    m = int(entries.pop("m"))
    sigma2 = float(entries.pop("sigma2", "1"))
    has_pmax = "p_max" in entries
    has_snr = "snr_db" in entries
    if snr_db is not None:
        p_max = sigma2 * 10.0 ** (snr_db / 10.0)
        entries.pop("p_max", None)
        entries.pop("snr_db", None)
    elif has_pmax and has_snr:
        raise ValidationError(f"{path}: give either p_max or snr_db, not both")
    elif has_pmax:
        p_max = float(entries.pop("p_max"))
    elif has_snr:
        p_max = sigma2 * 10.0 ** (float(entries.pop("snr_db")) / 10.0)
    else:
        raise ValidationError(f"{path}: missing p_max or snr_db")
    bw = np.empty(m)
    for band in range(m):
        key = f"b{band + 1}"
        if key not in entries:
            raise ValidationError(f"{path}: missing bandwidth {key}")
        bw[band] = float(entries.pop(key))
    mask = np.zeros((m, 4), dtype=bool)
    for name in entries.pop("zero", "").split():
        band, pos = _parse_link(name, m, path)
        mask[band, pos] = True
    low = np.zeros((m, 4))
    high = np.zeros((m, 4))
    pi = np.zeros((m, 4))
    for key, value in entries.items():
        band, pos = _parse_link(key, m, path)
        parts = value.split()
        if len(parts) != 3:
            raise ValidationError(f"{path}: {key} needs 'low high pi'")
        low[band, pos], high[band, pos], pi[band, pos] = (float(p) for p in parts)
    for band in range(m):
        for pos in range(4):
            if not mask[band, pos] and high[band, pos] == 0.0 and low[band, pos] == 0.0:
                i, j = LINKS[pos]
                raise ValidationError(
                    f"{path}: link g{i}{j}_{band + 1} has no alphabet and is "
                    "not in the zero mask"
                )
    return ChannelScenario(
        m=m, bandwidths=bw, p_max=p_max, sigma2=sigma2,
        gain_low=low, gain_high=high, gain_pi=pi, zero_mask=mask,
        label=str(path),
    )


def _parse_link(name, m, path):
    token = name.strip().lower()
    shaped = (
        len(token) >= 5
        and token[0] == "g"
        and token[1].isdigit()
        and token[2].isdigit()
        and token[3] == "_"
        and token[4:].isdigit()
    )
    if shaped:
        i, j, band = int(token[1]), int(token[2]), int(token[4:])
        if (i, j) in LINKS and 1 <= band <= m:
            return band - 1, LINKS.index((i, j))
    raise ValidationError(f"{path}: malformed link name {name!r}")
