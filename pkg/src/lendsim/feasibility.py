"""Static screen for which assets are worth squeezing.

A short squeeze through a lending pool only moves the market if the pool
lends out a large share of the asset's circulating value.  Given one snapshot
row per asset, :func:`feasibility` reports the deposited and available
liquidity as fractions of market cap and :func:`rank` orders assets by how
much of the market an attacker could borrow.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, DomainError
from .fixed import ZERO, FixedDec, dec, div

STATUSES = ("active", "frozen_pre_attack", "frozen_post_attack")
AVAILABLE_THRESHOLD = dec("0.15")
DEPOSIT_THRESHOLD = dec("0.30")
CSV_COLUMNS = ("asset", "deposited_value", "available_value", "market_cap", "status")


@dataclass(frozen=True)
class AssetSnapshot:
    asset: str
    deposited_value: FixedDec
    available_value: FixedDec
    market_cap: FixedDec
    status: str = "active"

    def __post_init__(self):
        for name in ("deposited_value", "available_value", "market_cap"):
            object.__setattr__(self, name, dec(getattr(self, name)))
        if self.status not in STATUSES:
            raise DomainError(f"{self.asset}: unknown status {self.status!r}")
        if self.deposited_value < ZERO or self.available_value < ZERO:
            raise DomainError(f"{self.asset}: liquidity must be non-negative")
        if self.available_value > self.deposited_value:
            raise DomainError(f"{self.asset}: available liquidity exceeds deposits")
        if self.market_cap < ZERO:
            raise DomainError(f"{self.asset}: market cap must be positive")


@dataclass(frozen=True)
class RankedAsset:
    snapshot: AssetSnapshot
    deposit_ratio: FixedDec
    available_ratio: FixedDec
    available_flag: bool
    deposit_flag: bool

    def to_dict(self) -> dict:
        return {
            "asset": self.snapshot.asset,
            "status": self.snapshot.status,
            "deposit_ratio": str(self.deposit_ratio),
            "available_ratio": str(self.available_ratio),
            "available_flag": self.available_flag,
            "deposit_flag": self.deposit_flag,
        }


def feasibility(snapshot: AssetSnapshot) -> tuple[FixedDec, FixedDec]:
    """Return ``(deposit_ratio, available_ratio)``."""
    if snapshot.market_cap == ZERO:
        raise DomainError(f"{snapshot.asset}: market cap is zero")
    return div(snapshot.deposited_value, snapshot.market_cap), div(snapshot.available_value, snapshot.market_cap)


def rank(
    snapshots,
    available_threshold: FixedDec = AVAILABLE_THRESHOLD,
    deposit_threshold: FixedDec = DEPOSIT_THRESHOLD,
) -> list[RankedAsset]:
    """Sort by available ratio, then deposit ratio (both descending), then asset id.

    Flags are strict: a ratio equal to its threshold is not flagged.
    """
    snapshots = list(snapshots)
    if not snapshots:
        raise DomainError("nothing to rank")
    available_threshold = dec(available_threshold)
    deposit_threshold = dec(deposit_threshold)
    rows = []
    for s in snapshots:
        dep, avail = feasibility(s)
        rows.append(RankedAsset(s, dep, avail, avail > available_threshold, dep > deposit_threshold))
    rows.sort(key=lambda r: (-r.available_ratio.raw, -r.deposit_ratio.raw, r.snapshot.asset))
    return rows


def read_snapshots(path) -> list[AssetSnapshot]:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in CSV_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ConfigError(str(path), f"missing columns {', '.join(missing)}")
        out = []
        for line, row in enumerate(reader, start=2):
            try:
                out.append(
                    AssetSnapshot(
                        row["asset"],
                        row["deposited_value"],
                        row["available_value"],
                        row["market_cap"],
                        row["status"] or "active",
                    )
                )
            except (DomainError, ValueError) as exc:
                raise ConfigError(f"{path}:{line}", str(exc)) from None
    return out


def format_table(ranked: list[RankedAsset]) -> str:
    header = ("rank", "asset", "status", "available_ratio", "deposit_ratio", "flags")
    body = []
    for i, r in enumerate(ranked, start=1):
        flags = ",".join(f for f, on in (("available", r.available_flag), ("deposit", r.deposit_flag)) if on)
        body.append((str(i), r.snapshot.asset, r.snapshot.status, f"{r.available_ratio.to_decimal():.4f}", f"{r.deposit_ratio.to_decimal():.4f}", flags or "-"))
    widths = [max(len(row[i]) for row in [header, *body]) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in [header, *body]]
    return "\n".join(lines) + "\n"


def to_json(ranked: list[RankedAsset], available_threshold=AVAILABLE_THRESHOLD, deposit_threshold=DEPOSIT_THRESHOLD) -> str:
    doc = {
        "available_threshold": str(dec(available_threshold)),
        "deposit_threshold": str(dec(deposit_threshold)),
        "ranking": [r.to_dict() for r in ranked],
    }
    return json.dumps(doc, indent=2) + "\n"
