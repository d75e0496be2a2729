"""Drawdown-related convex risk measures of the fractional trading game.

Four measures are exposed, all nonnegative and vanishing at the zero
allocation:

* ``rho_down``   - negative expected terminal log loss (losing outcomes only),
  computed exactly through the count-vector representation.
* ``rho_cur``    - negative expected current-drawdown log series, computed by
  full path enumeration.
* ``rho_down_x`` / ``rho_cur_x`` - their positively homogeneous
  linearizations, defined on all of R^M.

Alongside them live the coefficient families behind the small-scale closed
forms (``d_first_approx``, ``u_expect``, ``d_cur_first_approx``,
``u_run_expect``), path-enumeration expectations used as the second route in
verification, and diagnostics for the known discontinuity of the first
approximation.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceededError, DomainError, ValidationError
from .path_engine import (
    DEFAULT_ENUMERATION_BUDGET,
    TOPPING_TIE_TOL,
    _BLOCK,
    _compositions_colex,
    iter_path_blocks,
    linear_prefix_blocks,
    log_hpr_rows,
    multinomial_coefficient,
    topping_from_prefix,
)
from .trade_core import TradeMatrix, as_portions, matrix_rank, require_interior


class MeasureKind(enum.Enum):
    """Selectable risk measures and expectation formulas."""

    DOWN = "down"
    DOWN_X = "downX"
    DOWN_FIRST_APPROX = "downFirstApprox"
    CUR = "cur"
    CUR_X = "curX"
    CUR_FIRST_APPROX = "curFirstApprox"
    UP_EXPECT = "upExpect"
    RUNUP_EXPECT = "runupExpect"


#: Kinds whose values are nonnegative (inf sentinel on inadmissible points).
NONNEGATIVE_KINDS = frozenset(
    {
        MeasureKind.DOWN,
        MeasureKind.DOWN_X,
        MeasureKind.CUR,
        MeasureKind.CUR_X,
        MeasureKind.UP_EXPECT,
        MeasureKind.RUNUP_EXPECT,
    }
)

#: Kinds that are only exact in the small-scale regime and carry the
#: ``small_s_verified`` flag on structured evaluations.
SMALL_S_KINDS = frozenset(
    {
        MeasureKind.DOWN_FIRST_APPROX,
        MeasureKind.CUR_FIRST_APPROX,
        MeasureKind.UP_EXPECT,
        MeasureKind.RUNUP_EXPECT,
    }
)


@dataclass(frozen=True)
class CoefficientTable:
    """Coefficients of one log-term family at a fixed direction.

    ``values`` has shape (N,) for the terminal families (kinds "U" and "D")
    and shape (K+1, N) for the drawdown families ("Lambda", indexed by the
    topping point, with the last row identically zero, and "Upsilon", with
    the first row identically zero).
    """

    kind: str
    values: np.ndarray
    theta: np.ndarray
    draws: int

    def totals(self) -> np.ndarray:
        """Per-row coefficient sums (collapses the topping-point axis)."""
        if self.values.ndim == 1:
            return self.values
        return self.values.sum(axis=0)


@dataclass(frozen=True)
class MeasureEvaluation:
    """Structured result of a measure evaluation."""

    kind: MeasureKind
    value: float
    small_s_verified: bool | None = None


@functools.lru_cache(maxsize=32)
def _composition_table(n: int, draws: int):
    comps = np.array(list(_compositions_colex(draws, n)), dtype=np.int64)
    mults = np.array([multinomial_coefficient(x) for x in comps], dtype=float)
    comps.setflags(write=False)
    mults.setflags(write=False)
    return comps, mults


def _count_table(matrix: TradeMatrix, draws: int, budget: int | None):
    """Composition matrix (C, N) and multinomial weights for the game."""
    if draws < 1:
        raise ValidationError("draws must be >= 1")
    n = matrix.n_periods
    size = math.comb(draws + n - 1, n - 1)
    limit = DEFAULT_ENUMERATION_BUDGET if budget is None else budget
    if size > limit:
        raise BudgetExceededError(
            f"count enumeration of size {size} exceeds budget {limit}"
        )
    comps, mults = _composition_table(n, draws)
    weights = mults * np.prod(matrix.probs**comps, axis=1)
    return comps, weights


@functools.lru_cache(maxsize=8)
def _cached_digits(n: int, draws: int) -> np.ndarray:
    flat = np.arange(n**draws, dtype=np.int64)
    digits = np.stack(np.unravel_index(flat, (n,) * draws), axis=1)
    digits.setflags(write=False)
    return digits


def _path_digit_blocks(n: int, draws: int, budget: int | None):
    total = n**draws
    limit = DEFAULT_ENUMERATION_BUDGET if budget is None else budget
    if total > limit:
        raise BudgetExceededError(
            f"path enumeration of size {total} exceeds budget {limit}"
        )
    if total <= _BLOCK:
        yield _cached_digits(n, draws)
    else:
        yield from iter_path_blocks(n, draws, budget)


def _coefficient_log_form(coef, scaled_dots, *, allow_neg_inf: bool) -> float:
    """Sum of coef_n * log(1 + scaled_dots_n), skipping zero coefficients."""
    total = 0.0
    for c, d in zip(coef, scaled_dots):
        if c == 0.0:
            continue
        if d <= -1.0:
            if allow_neg_inf:
                return -math.inf
            raise DomainError(
                "log-term argument is nonpositive; point is not admissible"
            )
        total += c * math.log1p(d)
    return float(total)


def _unit_direction(matrix: TradeMatrix, theta) -> np.ndarray:
    arr = as_portions(matrix, theta)
    if not np.all(np.isfinite(arr)) or not arr.any():
        raise ValidationError("direction must be a nonzero finite vector")
    return arr


# ---------------------------------------------------------------------------
# Coefficient families


def updown_coefficients(
    matrix: TradeMatrix, theta, draws: int, budget: int | None = None
) -> tuple[CoefficientTable, CoefficientTable]:
    """Terminal win/loss coefficient families at a direction.

    Count vectors are split by the sign of the linearized terminal outcome
    sum(x_i * <t_i, theta>); the boundary (== 0) goes to the loss side.  The
    exact comparison is deliberate: it is the documented source of the first
    approximation's discontinuity.
    """
    theta = _unit_direction(matrix, theta)
    comps, weights = _count_table(matrix, draws, budget)
    # combine rows first: count vectors whose row combination cancels
    # exactly must land on the loss side, not drift on dot-product noise
    linear = (comps @ matrix.returns) @ theta
    down = linear <= 0.0
    dvals = (weights[down, None] * comps[down]).sum(axis=0)
    uvals = (weights[~down, None] * comps[~down]).sum(axis=0)
    return (
        CoefficientTable("U", np.asarray(uvals, dtype=float), theta, draws),
        CoefficientTable("D", np.asarray(dvals, dtype=float), theta, draws),
    )


def drawdown_coefficients(
    matrix: TradeMatrix, theta, draws: int, budget: int | None = None
) -> tuple[CoefficientTable, CoefficientTable]:
    """Drawdown/run-up coefficient families grouped by the linear topping point.

    Row l of the first table counts occurrences of each symbol strictly after
    step l on paths whose linearized equity tops first at l; row l of the
    second table counts occurrences up to and including step l.
    """
    theta = _unit_direction(matrix, theta)
    n = matrix.n_periods
    lam = np.zeros((draws + 1, n))
    ups = np.zeros((draws + 1, n))
    for digits in _path_digit_blocks(n, draws, budget):
        w = np.prod(matrix.probs[digits], axis=1)
        prefix = linear_prefix_blocks(matrix.returns, digits, theta)
        top = topping_from_prefix(prefix, 0.0)
        for level in range(draws + 1):
            mask = top == level
            if not mask.any():
                continue
            sub = digits[mask]
            wsub = w[mask]
            for pos in range(level, draws):
                np.add.at(lam[level], sub[:, pos], wsub)
            for pos in range(level):
                np.add.at(ups[level], sub[:, pos], wsub)
    return (
        CoefficientTable("Lambda", lam, theta, draws),
        CoefficientTable("Upsilon", ups, theta, draws),
    )


# ---------------------------------------------------------------------------
# Exact measures


def rho_down(matrix: TradeMatrix, phi, draws: int, budget: int | None = None) -> float:
    """Negative expected terminal log loss, by exact count-vector summation.

    Requires an interior portion vector; the value is nonnegative and zero
    exactly at the zero allocation.
    """
    arr = require_interior(matrix, phi)
    comps, weights = _count_table(matrix, draws, budget)
    steps = np.log1p(matrix.dots(arr))
    terminal = comps @ steps
    # + 0.0 normalizes the negative zero produced by negating an exact zero
    return float(-(weights @ np.minimum(terminal, 0.0))) + 0.0


def rho_cur(matrix: TradeMatrix, phi, draws: int, budget: int | None = None) -> float:
    """Negative expected current-drawdown log series, by full path enumeration."""
    arr = require_interior(matrix, phi)
    return -expected_current_drawdown(matrix, arr, draws, budget) + 0.0


def rho_down_x(matrix: TradeMatrix, phi, draws: int, budget: int | None = None) -> float:
    """Positively homogeneous linearization of ``rho_down``; defined on all of R^M."""
    arr = as_portions(matrix, phi)
    comps, weights = _count_table(matrix, draws, budget)
    linear = (comps @ matrix.returns) @ arr
    return float(-(weights @ np.minimum(linear, 0.0))) + 0.0


def rho_cur_x(matrix: TradeMatrix, phi, draws: int, budget: int | None = None) -> float:
    """Positively homogeneous linearization of ``rho_cur``; defined on all of R^M."""
    arr = as_portions(matrix, phi)
    return -_linear_drawdown_sum(matrix, arr, draws, budget) + 0.0


def _linear_drawdown_sum(
    matrix: TradeMatrix, phi: np.ndarray, draws: int, budget: int | None
) -> float:
    """Expected linearized equity change after the linear topping point (<= 0)."""
    if draws < 1:
        raise ValidationError("draws must be >= 1")
    n = matrix.n_periods
    acc = 0.0
    for digits in _path_digit_blocks(n, draws, budget):
        w = np.prod(matrix.probs[digits], axis=1)
        prefix = linear_prefix_blocks(matrix.returns, digits, phi)
        top = topping_from_prefix(prefix, 0.0)
        rows = np.arange(len(top))
        at_top = np.where(top > 0, prefix[rows, np.maximum(top - 1, 0)], 0.0)
        acc += float(w @ (prefix[:, -1] - at_top))
    return acc


# ---------------------------------------------------------------------------
# Coefficient-form approximations (exact in the small-scale regime)


def d_first_approx(
    matrix: TradeMatrix, s: float, theta, draws: int, budget: int | None = None
) -> float:
    """First approximation of the expected terminal log loss at scale s.

    Always an upper bound of the path expectation, nonpositive, and equal to
    it when the small-scale sign patterns hold.  Returns -inf when a needed
    log term is undefined (allocation beyond the admissible set).
    """
    if s < 0.0:
        raise ValidationError("scale s must be >= 0")
    theta = _unit_direction(matrix, theta)
    _, down = updown_coefficients(matrix, theta, draws, budget)
    return _coefficient_log_form(
        down.values, s * matrix.dots(theta), allow_neg_inf=True
    )


def u_expect(
    matrix: TradeMatrix, s: float, theta, draws: int, budget: int | None = None
) -> float:
    """Coefficient form of the expected terminal log gain at scale s."""
    if s < 0.0:
        raise ValidationError("scale s must be >= 0")
    theta = _unit_direction(matrix, theta)
    up, _ = updown_coefficients(matrix, theta, draws, budget)
    return _coefficient_log_form(
        up.values, s * matrix.dots(theta), allow_neg_inf=False
    )


def d_second_approx(
    matrix: TradeMatrix, s: float, theta, draws: int, budget: int | None = None
) -> float:
    """Linearized (second) approximation of the expected terminal log loss."""
    if s < 0.0:
        raise ValidationError("scale s must be >= 0")
    theta = _unit_direction(matrix, theta)
    return -rho_down_x(matrix, s * theta, draws, budget)


def d_cur_first_approx(
    matrix: TradeMatrix, s: float, theta, draws: int, budget: int | None = None
) -> float:
    """First approximation of the expected current-drawdown log series."""
    if s < 0.0:
        raise ValidationError("scale s must be >= 0")
    theta = _unit_direction(matrix, theta)
    lam, _ = drawdown_coefficients(matrix, theta, draws, budget)
    return _coefficient_log_form(
        lam.totals(), s * matrix.dots(theta), allow_neg_inf=True
    )


def u_run_expect(
    matrix: TradeMatrix, s: float, theta, draws: int, budget: int | None = None
) -> float:
    """Coefficient form of the expected run-up log series at scale s."""
    if s < 0.0:
        raise ValidationError("scale s must be >= 0")
    theta = _unit_direction(matrix, theta)
    _, ups = drawdown_coefficients(matrix, theta, draws, budget)
    return _coefficient_log_form(
        ups.totals(), s * matrix.dots(theta), allow_neg_inf=False
    )


def d_cur_second_approx(
    matrix: TradeMatrix, s: float, theta, draws: int, budget: int | None = None
) -> float:
    """Linearized (second) approximation of the expected current drawdown."""
    if s < 0.0:
        raise ValidationError("scale s must be >= 0")
    theta = _unit_direction(matrix, theta)
    return _linear_drawdown_sum(matrix, s * theta, draws, budget)


# ---------------------------------------------------------------------------
# Path-enumeration expectations (second route used by verification)


def expected_downtrade(
    matrix: TradeMatrix, phi, draws: int, budget: int | None = None
) -> float:
    """E of the terminal log loss by direct path enumeration (-inf allowed)."""
    arr = as_portions(matrix, phi)
    rows = log_hpr_rows(matrix, arr)

    def fold(prefix: np.ndarray) -> np.ndarray:
        return np.minimum(0.0, prefix[:, -1])

    return _path_expectation(matrix, rows, draws, budget, fold)


def expected_uptrade(
    matrix: TradeMatrix, phi, draws: int, budget: int | None = None
) -> float:
    """E of the terminal log gain by direct path enumeration."""
    arr = as_portions(matrix, phi)
    rows = log_hpr_rows(matrix, arr)

    def fold(prefix: np.ndarray) -> np.ndarray:
        return np.maximum(0.0, prefix[:, -1])

    return _path_expectation(matrix, rows, draws, budget, fold)


def expected_current_drawdown(
    matrix: TradeMatrix, phi, draws: int, budget: int | None = None
) -> float:
    """E of the current-drawdown log series by direct path enumeration."""
    arr = as_portions(matrix, phi)
    rows = log_hpr_rows(matrix, arr)

    def fold(prefix: np.ndarray) -> np.ndarray:
        terminal = prefix[:, -1]
        starts = np.concatenate(
            [np.zeros((prefix.shape[0], 1)), prefix[:, :-1]], axis=1
        )
        with np.errstate(invalid="ignore"):
            vals = np.minimum(0.0, (terminal[:, None] - starts).min(axis=1))
        vals[np.isneginf(terminal)] = -np.inf
        return vals

    return _path_expectation(matrix, rows, draws, budget, fold)


def expected_runup(
    matrix: TradeMatrix, phi, draws: int, budget: int | None = None
) -> float:
    """E of the run-up log series by direct path enumeration."""
    arr = as_portions(matrix, phi)
    rows = log_hpr_rows(matrix, arr)

    def fold(prefix: np.ndarray) -> np.ndarray:
        return np.maximum(0.0, prefix.max(axis=1))

    return _path_expectation(matrix, rows, draws, budget, fold)


def _path_expectation(matrix, rows, draws, budget, fold) -> float:
    if draws < 1:
        raise ValidationError("draws must be >= 1")
    acc = 0.0
    for digits in _path_digit_blocks(matrix.n_periods, draws, budget):
        w = np.prod(matrix.probs[digits], axis=1)
        prefix = np.cumsum(rows[digits], axis=1)
        acc += float(w @ fold(prefix))
    return acc


# ---------------------------------------------------------------------------
# Small-scale regime checks


def small_s_down_verified(
    matrix: TradeMatrix, s: float, theta, draws: int, budget: int | None = None
) -> bool:
    """True when terminal sign patterns match between linear and log form.

    Checks, for every count vector, that the linearized outcome is positive
    exactly when the compounded outcome exceeds 1 at scale s (boundary cases
    go to the loss side on both forms).  When this holds the coefficient
    forms reproduce the path expectations exactly.
    """
    theta = _unit_direction(matrix, theta)
    comps, _ = _count_table(matrix, draws, budget)
    scaled = s * matrix.dots(theta)
    if np.any(1.0 + scaled <= 0.0):
        return False
    linear = (comps @ matrix.returns) @ theta
    logged = comps @ np.log1p(scaled)
    return bool(np.all(np.where(linear > 0.0, logged > 0.0, logged < 0.0)))


def small_s_cur_verified(
    matrix: TradeMatrix, s: float, theta, draws: int, budget: int | None = None
) -> bool:
    """True when compounded and linear topping points agree on every path."""
    theta = _unit_direction(matrix, theta)
    rows = log_hpr_rows(matrix, s * theta)
    if np.any(np.isneginf(rows)):
        return False
    for digits in _path_digit_blocks(matrix.n_periods, draws, budget):
        log_top = topping_from_prefix(np.cumsum(rows[digits], axis=1), TOPPING_TIE_TOL)
        lin_top = topping_from_prefix(
            linear_prefix_blocks(matrix.returns, digits, theta), 0.0
        )
        if np.any(log_top != lin_top):
            return False
    return True


# ---------------------------------------------------------------------------
# Structured evaluation (CLI surface)


def evaluate_measure(
    matrix: TradeMatrix,
    kind: MeasureKind | str,
    phi,
    draws: int,
    budget: int | None = None,
    check_small_s: bool = False,
) -> MeasureEvaluation:
    """Evaluate one measure kind at a portion vector.

    Scale-and-direction kinds decompose phi = s * theta with theta the unit
    direction; at phi = 0 every kind evaluates to 0.  With ``check_small_s``
    the small-scale regime flag is computed for the kinds that are only exact
    in that regime.
    """
    kind = MeasureKind(kind)
    arr = as_portions(matrix, phi)
    scale = float(np.linalg.norm(arr))
    flag: bool | None = None
    if kind is MeasureKind.DOWN:
        value = rho_down(matrix, arr, draws, budget)
    elif kind is MeasureKind.DOWN_X:
        value = rho_down_x(matrix, arr, draws, budget)
    elif kind is MeasureKind.CUR:
        value = rho_cur(matrix, arr, draws, budget)
    elif kind is MeasureKind.CUR_X:
        value = rho_cur_x(matrix, arr, draws, budget)
    else:
        if scale == 0.0:
            return MeasureEvaluation(kind, 0.0, True if check_small_s else None)
        theta = arr / scale
        if kind is MeasureKind.DOWN_FIRST_APPROX:
            value = d_first_approx(matrix, scale, theta, draws, budget)
        elif kind is MeasureKind.CUR_FIRST_APPROX:
            value = d_cur_first_approx(matrix, scale, theta, draws, budget)
        elif kind is MeasureKind.UP_EXPECT:
            value = u_expect(matrix, scale, theta, draws, budget)
        else:
            value = u_run_expect(matrix, scale, theta, draws, budget)
        if check_small_s:
            if kind in (MeasureKind.DOWN_FIRST_APPROX, MeasureKind.UP_EXPECT):
                flag = small_s_down_verified(matrix, scale, theta, draws, budget)
            else:
                flag = small_s_cur_verified(matrix, scale, theta, draws, budget)
    return MeasureEvaluation(kind, float(value), flag)


# ---------------------------------------------------------------------------
# Diagnostics


@dataclass(frozen=True)
class SpanDiagnostic:
    """Result of the row-span diagnostic over a direction grid."""

    passed: bool
    checked: int
    failures: tuple[int, ...]


def span_diagnostic(matrix: TradeMatrix, grid: int = 360, seed: int = 0) -> SpanDiagnostic:
    """Check that rows with nonzero projection span R^M along many directions.

    For two trading systems the directions are an evenly spaced angle grid;
    otherwise ``grid`` seeded random unit directions are used.  Reported as a
    diagnostic only; it does not decide convexity properties by itself.
    """
    m = matrix.n_systems
    if m == 2:
        angles = 2.0 * math.pi * np.arange(grid) / grid
        thetas = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    else:
        rng = np.random.default_rng(seed)
        raw = rng.standard_normal((grid, m))
        thetas = raw / np.linalg.norm(raw, axis=1, keepdims=True)
    failures = []
    for j, theta in enumerate(thetas):
        active = matrix.returns[matrix.returns @ theta != 0.0]
        if active.shape[0] == 0 or matrix_rank(active) < m:
            failures.append(j)
    return SpanDiagnostic(not failures, len(thetas), tuple(failures))


def hyperplane_directions(
    matrix: TradeMatrix, draws: int, budget: int | None = None
) -> list[tuple[np.ndarray, tuple[int, ...]]]:
    """Unit directions where some count vector's linearized outcome vanishes.

    Only meaningful for two trading systems.  Returns (theta, x) pairs where
    the count vector x satisfies sum(x_i * <t_i, theta>) = 0 while its log
    terms do not vanish identically; across such directions the loss-side
    coefficient family jumps, which is the documented discontinuity of the
    first approximation.
    """
    if matrix.n_systems != 2:
        raise ValidationError("hyperplane scan is only available for M == 2")
    comps, _ = _count_table(matrix, draws, budget)
    seen: set[tuple[float, float]] = set()
    out: list[tuple[np.ndarray, tuple[int, ...]]] = []
    for x in comps:
        normal = x @ matrix.returns
        scale = float(np.linalg.norm(normal))
        if scale < 1e-12:
            continue
        theta = np.array([-normal[1], normal[0]]) / scale
        lead = theta[np.abs(theta) > 1e-12]
        if lead.size and lead[0] < 0.0:
            theta = -theta
        dots = matrix.dots(theta)
        if np.all(np.abs(dots[x > 0]) < 1e-14):
            continue
        key = (round(float(theta[0]), 12), round(float(theta[1]), 12))
        if key in seen:
            continue
        seen.add(key)
        out.append((theta, tuple(int(v) for v in x)))
    return out
