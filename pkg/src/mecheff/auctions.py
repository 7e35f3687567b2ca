"""Truthful sealed-bid mechanisms for t identical unit-demand items.

`ema` is the efficiency-maximizing (Vickrey) rule: the t highest bidders
win and each pays the (t+1)-th highest bid. `rma` is the revenue-maximizing
rule for regular value distributions: only bids at or above the reserve can
win, and each winner pays the larger of the reserve and the (t+1)-th
highest bid. Bidders bid their values, so efficiency is the winners' bid
sum and revenue the payment sum.

Ties are broken by lowest bidder index. Value draws are atomless for
continuous families, but the atom-bearing families make ties a real event,
and a total deterministic rule keeps runs reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence


@dataclass(frozen=True)
class AuctionOutcome:
    """Allocation and payments for one bid vector."""

    winners: tuple[int, ...]
    payments: Mapping[int, float]
    efficiency: float
    revenue: float

    @property
    def winner_set(self) -> frozenset[int]:
        return frozenset(self.winners)


def _validate_bids(bids: Sequence[float]) -> list[float]:
    out = [float(b) for b in bids]
    if not out:
        raise ValueError("bid vector must be nonempty")
    for b in out:
        if not math.isfinite(b) or b < 0.0:
            raise ValueError(f"bids must be finite and nonnegative, got {b}")
    return out


def _ranked(bids: list[float]) -> list[int]:
    # descending by bid, ascending by index on ties
    return sorted(range(len(bids)), key=lambda i: (-bids[i], i))


def ema(bids: Sequence[float], t: int = 1) -> AuctionOutcome:
    """Sell t items to the t highest bidders at the (t+1)-th highest bid.

    With t or fewer bidders everyone wins and pays 0 (no (t+1)-th bid
    exists).
    """
    if t < 1:
        raise ValueError("t must be at least 1")
    b = _validate_bids(bids)
    order = _ranked(b)
    winners = tuple(order[: min(t, len(b))])
    price = b[order[t]] if len(b) > t else 0.0
    payments = {i: price for i in winners}
    return AuctionOutcome(
        winners=winners,
        payments=payments,
        efficiency=sum(b[i] for i in winners),
        revenue=price * len(winners),
    )


def rma(bids: Sequence[float], t: int = 1, reserve: float = 1.0) -> AuctionOutcome:
    """Sell up to t items among bids >= reserve at max(reserve, (t+1)-th bid).

    The (t+1)-th highest bid is taken over all bids; when fewer than t+1
    bids exist the missing bid counts as 0 and the reserve floors the
    price. No eligible bids means no sale.
    """
    if t < 1:
        raise ValueError("t must be at least 1")
    if not (reserve > 0.0 and math.isfinite(reserve)):
        raise ValueError(f"reserve must be positive and finite, got {reserve}")
    b = _validate_bids(bids)
    order = _ranked(b)
    eligible = [i for i in order if b[i] >= reserve]
    winners = tuple(eligible[: min(t, len(eligible))])
    if not winners:
        return AuctionOutcome(winners=(), payments={}, efficiency=0.0, revenue=0.0)
    runner_up = b[order[t]] if len(b) > t else 0.0
    price = max(reserve, runner_up)
    payments = {i: price for i in winners}
    return AuctionOutcome(
        winners=winners,
        payments=payments,
        efficiency=sum(b[i] for i in winners),
        revenue=price * len(winners),
    )
