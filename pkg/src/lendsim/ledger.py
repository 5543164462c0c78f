"""Token wallets.

Every token movement in a simulation is a :meth:`TokenLedger.transfer`
between two named accounts, so per-asset supply is conserved by
construction.  Tokens enter the simulated world from :data:`EXTERNAL`, the
only account allowed to go negative; it stands for the rest of the market
(initial endowments, arbitrageurs, infinitely deep venues).
"""

from __future__ import annotations

from collections import defaultdict

from .errors import AmountExceedsBalance, DomainError
from .fixed import ZERO, FixedDec

EXTERNAL = "@external"
POOL = "@pool"


class TokenLedger:
    def __init__(self):
        self._balances: dict[str, dict[str, FixedDec]] = defaultdict(dict)

    def balance(self, account: str, asset: str) -> FixedDec:
        return self._balances.get(account, {}).get(asset, ZERO)

    def balances(self, account: str) -> dict[str, FixedDec]:
        return dict(self._balances.get(account, {}))

    def accounts(self) -> list[str]:
        return sorted(self._balances)

    def transfer(self, asset: str, src: str, dst: str, amount: FixedDec) -> None:
        if amount < ZERO:
            raise DomainError("transfer amount must be non-negative")
        if amount == ZERO or src == dst:
            return
        have = self.balance(src, asset)
        if src != EXTERNAL and have < amount:
            raise AmountExceedsBalance(f"{src} holds {have} {asset}, needs {amount}")
        self._balances[src][asset] = have - amount
        self._balances[dst][asset] = self.balance(dst, asset) + amount

    def debit(self, account: str, asset: str, amount: FixedDec) -> None:
        """Remove tokens from ``account`` into a venue's reserves.

        Venue reserves are counted separately in conservation checks, so
        every debit must be matched by an equal reserve increase.
        """
        if amount < ZERO:
            raise DomainError("debit amount must be non-negative")
        have = self.balance(account, asset)
        if account != EXTERNAL and have < amount:
            raise AmountExceedsBalance(f"{account} holds {have} {asset}, needs {amount}")
        self._balances[account][asset] = have - amount

    def credit(self, account: str, asset: str, amount: FixedDec) -> None:
        """Counterpart of :meth:`debit`: tokens leaving a venue's reserves."""
        if amount < ZERO:
            raise DomainError("credit amount must be non-negative")
        self._balances[account][asset] = self.balance(account, asset) + amount

    def mint(self, account: str, asset: str, amount: FixedDec) -> None:
        """Bring tokens in from outside the simulated world."""
        self.transfer(asset, EXTERNAL, account, amount)

    def total(self, asset: str) -> FixedDec:
        """Sum over all accounts, EXTERNAL included; zero unless tokens leaked."""
        return sum((b.get(asset, ZERO) for b in self._balances.values()), ZERO)

    def to_dict(self) -> dict:
        return {
            acct: {a: str(v) for a, v in sorted(bals.items())}
            for acct, bals in sorted(self._balances.items())
        }

    @classmethod
    def from_dict(cls, d: dict) -> TokenLedger:
        ledger = cls()
        for acct, bals in d.items():
            for asset, v in bals.items():
                ledger._balances[acct][asset] = FixedDec.of(v)
        return ledger
