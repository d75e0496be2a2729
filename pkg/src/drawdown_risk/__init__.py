"""Drawdown-related convex risk measures for fractional trading games.

Exact, desk-scale computation of the expected terminal log loss and the
expected current drawdown of a finite trading game, their coefficient-form
approximations and positively homogeneous linearizations, plus the bridge
from one-period financial markets and a verification CLI.
"""

from .errors import BudgetExceededError, DomainError, ValidationError
from .market_bridge import (
    ArbitrageResult,
    OnePeriodMarket,
    Portfolio,
    build_trade_matrix,
    check_arbitrage,
    find_riskless_portfolio,
    load_market,
    log_utility,
    portfolio_to_portions,
    portions_to_portfolio,
)
from .path_engine import (
    DEFAULT_ENUMERATION_BUDGET,
    CountVector,
    PathOutcome,
    current_drawdown_log,
    downtrade_log,
    enumerate_counts,
    enumerate_paths,
    linear_topping_point,
    multinomial_coefficient,
    runup_log,
    twr_segment,
    twr_topping_point,
    uptrade_log,
)
from .risk_measures import (
    CoefficientTable,
    MeasureEvaluation,
    MeasureKind,
    d_cur_first_approx,
    d_cur_second_approx,
    d_first_approx,
    d_second_approx,
    drawdown_coefficients,
    evaluate_measure,
    expected_current_drawdown,
    expected_downtrade,
    expected_runup,
    expected_uptrade,
    hyperplane_directions,
    rho_cur,
    rho_cur_x,
    rho_down,
    rho_down_x,
    small_s_cur_verified,
    small_s_down_verified,
    span_diagnostic,
    u_expect,
    u_run_expect,
    updown_coefficients,
)
from .trade_core import (
    AdmissibleSet,
    Membership,
    NoRiskFreeResult,
    PortionVector,
    TradeMatrix,
    check_no_risk_free,
    expected_log_z,
    gamma_mean,
    hpr,
    load_trade_matrix,
    log_gamma_mean,
    membership,
)

__version__ = "0.1.0"

__all__ = [
    "AdmissibleSet",
    "ArbitrageResult",
    "BudgetExceededError",
    "CoefficientTable",
    "CountVector",
    "DEFAULT_ENUMERATION_BUDGET",
    "DomainError",
    "MeasureEvaluation",
    "MeasureKind",
    "Membership",
    "NoRiskFreeResult",
    "OnePeriodMarket",
    "PathOutcome",
    "Portfolio",
    "PortionVector",
    "TradeMatrix",
    "ValidationError",
    "build_trade_matrix",
    "check_arbitrage",
    "check_no_risk_free",
    "current_drawdown_log",
    "d_cur_first_approx",
    "d_cur_second_approx",
    "d_first_approx",
    "d_second_approx",
    "downtrade_log",
    "drawdown_coefficients",
    "enumerate_counts",
    "enumerate_paths",
    "evaluate_measure",
    "expected_current_drawdown",
    "expected_downtrade",
    "expected_log_z",
    "expected_runup",
    "expected_uptrade",
    "find_riskless_portfolio",
    "gamma_mean",
    "hpr",
    "hyperplane_directions",
    "linear_topping_point",
    "load_market",
    "load_trade_matrix",
    "log_gamma_mean",
    "log_utility",
    "membership",
    "multinomial_coefficient",
    "portfolio_to_portions",
    "portions_to_portfolio",
    "rho_cur",
    "rho_cur_x",
    "rho_down",
    "rho_down_x",
    "runup_log",
    "small_s_cur_verified",
    "small_s_down_verified",
    "span_diagnostic",
    "twr_segment",
    "twr_topping_point",
    "u_expect",
    "u_run_expect",
    "updown_coefficients",
    "uptrade_log",
]
