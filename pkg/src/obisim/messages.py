"""Message bodies exchanged between trading agents and the exchange."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum


class Side(IntEnum):
    BUY = 1
    SELL = -1

    @property
    def opposite(self) -> "Side":
        return Side.SELL if self is Side.BUY else Side.BUY

    @property
    def code(self) -> str:
        return "B" if self is Side.BUY else "S"


@dataclass(frozen=True, slots=True)
class LimitOrderMsg:
    order_id: int
    side: Side
    quantity: int
    price: int

    def summary(self) -> str:
        return f"limit {self.side.code} {self.quantity}@{self.price} id={self.order_id}"


@dataclass(frozen=True, slots=True)
class MarketOrderMsg:
    order_id: int
    side: Side
    quantity: int

    def summary(self) -> str:
        return f"market {self.side.code} {self.quantity} id={self.order_id}"


@dataclass(frozen=True, slots=True)
class CancelMsg:
    order_id: int

    def summary(self) -> str:
        return f"cancel id={self.order_id}"


@dataclass(frozen=True, slots=True)
class SubscribeMsg:
    depth: int

    def summary(self) -> str:
        return f"subscribe depth={self.depth}"


@dataclass(frozen=True, slots=True)
class QuoteRequestMsg:
    def summary(self) -> str:
        return "quote?"


@dataclass(frozen=True, slots=True)
class QuoteMsg:
    bid: int | None
    ask: int | None
    last_trade: int | None

    def summary(self) -> str:
        return f"quote {self.bid} {self.ask}"


@dataclass(frozen=True, slots=True)
class FillMsg:
    """Sent to the owner of a resting order when it trades."""

    order_id: int
    side: Side
    price: int
    quantity: int
    remaining: int

    def summary(self) -> str:
        return f"fill {self.side.code} {self.quantity}@{self.price} id={self.order_id} rem={self.remaining}"


@dataclass(frozen=True, slots=True)
class ExecutionReportMsg:
    """Sent to the submitter of an incoming order once matching completes."""

    order_id: int
    side: Side
    fills: tuple[tuple[int, int], ...]  # (price, quantity)
    resting: int
    cancelled: int
    rejected: str | None = None

    @property
    def filled(self) -> int:
        return sum(q for _, q in self.fills)

    def summary(self) -> str:
        if self.rejected:
            return f"reject id={self.order_id} {self.rejected}"
        fills = " ".join(f"{q}@{p}" for p, q in self.fills)
        return f"exec id={self.order_id} [{fills}] rest={self.resting} cxl={self.cancelled}"


@dataclass(frozen=True, slots=True)
class CancelReportMsg:
    order_id: int
    cancelled: int
    rejected: str | None = None

    def summary(self) -> str:
        return f"cancelled id={self.order_id} qty={self.cancelled}" + (f" {self.rejected}" if self.rejected else "")


@dataclass(frozen=True, slots=True)
class BookSnapshot:
    """Aggregate volume at the best ``depth`` levels of each side, best first."""

    time: int
    bids: tuple[tuple[int, int], ...]
    asks: tuple[tuple[int, int], ...]

    def summary(self) -> str:
        b = f"{self.bids[0][1]}@{self.bids[0][0]}" if self.bids else "-"
        a = f"{self.asks[0][1]}@{self.asks[0][0]}" if self.asks else "-"
        return f"book {b} | {a} lv={len(self.bids)}/{len(self.asks)}"

    def mirrored(self) -> "BookSnapshot":
        return BookSnapshot(self.time, self.asks, self.bids)
