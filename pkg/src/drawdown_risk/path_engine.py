"""Enumeration of draw paths and count vectors, equity-curve log series.

A game path is an ordered tuple omega with entries in {1..N} (1-based row
indices of the trade matrix).  Paths are enumerated in lexicographic order
and count vectors (the order-free reduction of a path) in colexicographic
order, so that derived output files are byte stable.  Terminal log wealth is
accumulated as a sum of log1p terms rather than a product followed by a log;
a period with a nonpositive holding period return contributes -inf.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import BudgetExceededError
from .trade_core import TradeMatrix, as_portions

#: Default ceiling on the number of enumerated paths or count vectors per call.
DEFAULT_ENUMERATION_BUDGET = 2**24

#: Prefix log sums within this distance of the running maximum count as ties
#: when locating the first topping point of the compounded equity curve.
TOPPING_TIE_TOL = 1e-14

_BLOCK = 1 << 16


@dataclass(frozen=True)
class PathOutcome:
    """One ordered draw sequence with its probability."""

    omega: tuple[int, ...]
    prob: float


@dataclass(frozen=True)
class CountVector:
    """Occurrence counts of each row over a path, with multinomial weight."""

    x: tuple[int, ...]
    weight: float


def _check_budget(size: int, budget: int | None, what: str) -> None:
    limit = DEFAULT_ENUMERATION_BUDGET if budget is None else budget
    if size > limit:
        raise BudgetExceededError(
            f"{what} enumeration of size {size} exceeds budget {limit}"
        )


def enumerate_paths(probs, draws: int, budget: int | None = None) -> Iterator[PathOutcome]:
    """Yield every ordered path of the given length in lexicographic order."""
    p = np.asarray(probs, dtype=float)
    n = p.shape[0]
    _check_budget(n**draws, budget, "path")
    for omega in itertools.product(range(1, n + 1), repeat=draws):
        prob = 1.0
        for i in omega:
            prob *= p[i - 1]
        yield PathOutcome(omega, float(prob))


def multinomial_coefficient(x) -> int:
    """Number of orderings of a count vector, as an exact integer."""
    total = 0
    out = 1
    for v in x:
        total += int(v)
        out *= math.comb(total, int(v))
    return out


def _compositions_colex(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for last in range(total + 1):
        for head in _compositions_colex(total - last, parts - 1):
            yield head + (last,)


def enumerate_counts(probs, draws: int, budget: int | None = None) -> Iterator[CountVector]:
    """Yield every count vector summing to ``draws`` in colexicographic order."""
    p = np.asarray(probs, dtype=float)
    n = p.shape[0]
    _check_budget(math.comb(draws + n - 1, n - 1), budget, "count")
    for x in _compositions_colex(draws, n):
        weight = float(multinomial_coefficient(x))
        for pi, xi in zip(p, x):
            weight *= pi**xi
        yield CountVector(x, weight)


def iter_path_blocks(
    n: int, draws: int, budget: int | None = None, block: int = _BLOCK
) -> Iterator[np.ndarray]:
    """Yield 0-based path index arrays of shape (B, draws) in lexicographic order."""
    total = n**draws
    _check_budget(total, budget, "path")
    shape = (n,) * draws
    for start in range(0, total, block):
        stop = min(start + block, total)
        flat = np.arange(start, stop, dtype=np.int64)
        yield np.stack(np.unravel_index(flat, shape), axis=1)


def log_hpr_rows(matrix: TradeMatrix, phi) -> np.ndarray:
    """Per-row log holding period returns, with -inf for nonpositive HPRs."""
    dots = matrix.dots(phi)
    hprs = 1.0 + dots
    good = hprs > 0.0
    out = np.full(dots.shape, -np.inf)
    out[good] = np.log1p(dots[good])
    return out


def _omega_index(matrix: TradeMatrix, omega) -> np.ndarray:
    idx = np.asarray(omega, dtype=np.int64)
    if idx.ndim != 1 or idx.size < 1:
        raise ValueError("omega must be a nonempty index sequence")
    if idx.min() < 1 or idx.max() > matrix.n_periods:
        raise IndexError(f"omega entries must be in 1..{matrix.n_periods}")
    return idx - 1


def twr_segment(matrix: TradeMatrix, phi, omega, first: int, last: int) -> float:
    """Compounded growth factor over steps first..last of the path (1-based).

    The empty segment (first > last) has value 1.  Zero factors are allowed,
    so boundary portion vectors evaluate to 0 rather than raising.
    """
    idx = _omega_index(matrix, omega)
    if not 1 <= first <= len(idx) + 1 or not 0 <= last <= len(idx):
        raise IndexError("segment bounds out of range")
    if first > last:
        return 1.0
    dots = matrix.returns[idx[first - 1 : last]] @ as_portions(matrix, phi)
    out = 1.0
    for d in dots:
        out *= 1.0 + d
    return float(out)


def _path_prefix(matrix: TradeMatrix, phi, omega) -> np.ndarray:
    rows = log_hpr_rows(matrix, phi)
    return np.cumsum(rows[_omega_index(matrix, omega)])


def downtrade_log(matrix: TradeMatrix, phi, omega) -> float:
    """Terminal log wealth clipped above at 0 (nonpositive; -inf on a wipeout)."""
    return min(0.0, float(_path_prefix(matrix, phi, omega)[-1]))


def uptrade_log(matrix: TradeMatrix, phi, omega) -> float:
    """Terminal log wealth clipped below at 0 (nonnegative)."""
    return max(0.0, float(_path_prefix(matrix, phi, omega)[-1]))


def current_drawdown_log(matrix: TradeMatrix, phi, omega) -> float:
    """Log loss from the best suffix start to the end of the equity curve.

    This is log min over l of min(1, TWR over steps l..K): the drawdown still
    open at the final step, measured from the running peak.
    """
    prefix = _path_prefix(matrix, phi, omega)
    terminal = float(prefix[-1])
    if math.isinf(terminal):
        return -math.inf
    starts = np.concatenate(([0.0], prefix[:-1]))
    return min(0.0, float((terminal - starts).min()))


def runup_log(matrix: TradeMatrix, phi, omega) -> float:
    """Largest prefix gain of the equity curve, clipped below at 0."""
    prefix = _path_prefix(matrix, phi, omega)
    return max(0.0, float(prefix.max()))


def stable_cumsum(values: np.ndarray) -> np.ndarray:
    """Row-wise running sums with Neumaier compensation.

    Plain cumsum resolves exact-real ties between prefix values by stray
    rounding, which matters when locating minimal topping points on games
    with linearly dependent rows; compensated accumulation keeps such ties
    exact.
    """
    vals = np.atleast_2d(values)
    out = np.empty_like(vals, dtype=float)
    hi = np.zeros(vals.shape[0])
    lo = np.zeros(vals.shape[0])
    for j in range(vals.shape[1]):
        v = vals[:, j]
        s = hi + v
        big = s - hi
        lo = lo + ((hi - (s - big)) + (v - big))
        hi = s
        out[:, j] = hi + lo
    return out if values.ndim == 2 else out[0]


def topping_from_prefix(prefix: np.ndarray, tie_tol: float = 0.0) -> np.ndarray:
    """First topping points of prefix-sum rows.

    For each row: 0 when no prefix exceeds 0, otherwise the smallest 1-based
    index whose value is strictly positive and within ``tie_tol`` of the row
    maximum (first index wins on ties).
    """
    pre = np.atleast_2d(prefix)
    peak = pre.max(axis=1)
    cand = (pre >= (peak - tie_tol)[:, None]) & (pre > 0.0)
    first = np.argmax(cand, axis=1) + 1
    return np.where(peak > 0.0, first, 0)


def twr_topping_point(matrix: TradeMatrix, phi, omega) -> int:
    """First step index at which the compounded equity reaches its maximum above 1.

    Returns 0 when the curve never exceeds its starting value.  Prefix log
    sums within ``TOPPING_TIE_TOL`` of the maximum are treated as ties and
    the earliest index wins.
    """
    prefix = _path_prefix(matrix, phi, omega)
    return int(topping_from_prefix(prefix[None, :], TOPPING_TIE_TOL)[0])


def linear_prefix_blocks(returns: np.ndarray, digits: np.ndarray, theta) -> np.ndarray:
    """Linear-equity prefix sums for a block of paths, vector-first.

    Accumulates the row-vector prefix sum(t_{omega_j}) with compensation and
    projects onto theta once per prefix.  Evaluating the vectors first makes
    prefix values whose row combinations cancel exactly (games with linearly
    dependent rows) come out as exact float ties, which the minimal-index
    topping rule then resolves deterministically.
    """
    vecs = returns[digits]  # (B, K, M)
    pref = np.stack(
        [stable_cumsum(vecs[:, :, m]) for m in range(vecs.shape[2])], axis=2
    )
    return pref @ np.asarray(theta, dtype=float)


def linear_prefix_sums(matrix: TradeMatrix, theta, omega) -> np.ndarray:
    """Prefix sums of <t_j, theta> along one path (the linear equity curve)."""
    idx = _omega_index(matrix, omega)
    return linear_prefix_blocks(matrix.returns, idx[None, :], theta)[0]


def linear_topping_point(matrix: TradeMatrix, theta, omega) -> int:
    """First topping point of the linearized equity curve sum of <t_j, theta>.

    No tolerance band: the smallest index attaining the strictly positive
    maximum of the prefix sums, 0 when that maximum is nonpositive.
    Exact-real ties resolve to the earliest index.
    """
    prefix = linear_prefix_sums(matrix, theta, omega)
    return int(topping_from_prefix(prefix[None, :], 0.0)[0])
