"""Shared fixtures: the reference game, markets, and interior samplers."""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from drawdown_risk import OnePeriodMarket, TradeMatrix

#: Reference game: two stochastically independent bets, N=4 joint outcomes.
EXAMPLE_RETURNS = [
    [1.0, 1.0],
    [-0.5, 1.0],
    [1.0, -2.0],
    [-0.5, -2.0],
]
EXAMPLE_PROBS = [0.375, 0.375, 0.125, 0.125]

#: Three-row game whose terminal-loss measure is flat along a segment at K=1.
FLAT_SEGMENT_RETURNS = [
    [1.0, 2.0],
    [2.0, 1.0],
    [-1.0, -1.0],
]


@pytest.fixture(scope="session")
def example_matrix() -> TradeMatrix:
    return TradeMatrix(EXAMPLE_RETURNS, EXAMPLE_PROBS)


@pytest.fixture(scope="session")
def flat_matrix() -> TradeMatrix:
    return TradeMatrix(FLAT_SEGMENT_RETURNS)


@pytest.fixture(scope="session")
def example_market() -> OnePeriodMarket:
    """Market whose derived trade matrix is exactly the reference game."""
    return OnePeriodMarket(
        bond_growth=1.0,
        initial_prices=[1.0, 1.0],
        scenario_prices=[[2.0, 2.0], [0.5, 2.0], [2.0, -1.0], [0.5, -1.0]],
        probs=EXAMPLE_PROBS,
        allow_negative_prices=True,
    )


def interior_points(matrix: TradeMatrix, seed: int, count: int) -> np.ndarray:
    """Seeded strictly interior allocations, well away from the boundary."""
    from drawdown_risk.verify import sample_interior

    return sample_interior(matrix, np.random.default_rng(seed), count)


def unit_directions(dim: int, seed: int, count: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((count, dim))
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)
