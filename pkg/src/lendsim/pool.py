"""Over-collateralized lending pool.

Reserves hold per-asset risk parameters and interest indices; positions hold
index-scaled balances so interest accrues to every account in O(1).  Token
custody goes through a :class:`~lendsim.ledger.TokenLedger`: the pool's cash
for an asset is the ledger balance of :data:`~lendsim.ledger.POOL`.

Valuations (health factor, borrow capacity, shortfall, seizure) are computed
as exact integer sums of ``amount.raw * price.raw [* weight.raw]`` and rounded
once at the end, so threshold comparisons never suffer intermediate rounding:

* the health factor rounds down, hence ``H < 1`` exactly when risk-adjusted
  collateral value is below debt value;
* shortfall rounds up, hence it is positive exactly when debt value exceeds
  collateral value.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Mapping

from .errors import (
    AmountExceedsBalance,
    BorrowingDisabled,
    CloseFactorExceeded,
    CollateralInsufficient,
    DomainError,
    InvalidTime,
    LiquidityExhausted,
    NotFound,
    NotLiquidatable,
    OracleMissing,
    ReserveFrozen,
    Unauthorized,
)
from .fixed import INF, ONE, SCALE, ZERO, FixedDec, Rounding, dec, div, fmax, mul, mul_div, round_div
from .ledger import POOL, TokenLedger
from .rates import RateParams, borrow_rate, utilization

YEAR = 31_536_000
SCALE2 = SCALE * SCALE


@dataclass(frozen=True)
class ReserveConfig:
    ltv: FixedDec
    liquidation_threshold: FixedDec
    rate_params: RateParams
    liquidation_bonus: FixedDec = dec("0.05")
    close_factor: FixedDec = dec("0.5")
    borrowing_enabled: bool = True
    frozen: bool = False

    def __post_init__(self):
        for name in ("ltv", "liquidation_threshold", "liquidation_bonus", "close_factor"):
            object.__setattr__(self, name, dec(getattr(self, name)))
        if not (ZERO <= self.ltv <= ONE and ZERO <= self.liquidation_threshold <= ONE):
            raise DomainError("ltv and liquidation_threshold must lie in [0, 1]")
        if self.ltv > self.liquidation_threshold:
            raise DomainError(f"ltv {self.ltv} exceeds liquidation_threshold {self.liquidation_threshold}")
        if self.liquidation_bonus < ZERO:
            raise DomainError("liquidation_bonus must be >= 0")
        if not (ZERO < self.close_factor <= ONE):
            raise DomainError("close_factor must lie in (0, 1]")

    @classmethod
    def from_dict(cls, d: dict) -> ReserveConfig:
        unknown = set(d) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise DomainError(f"unknown reserve field(s): {', '.join(sorted(unknown))}")
        kwargs = {
            "ltv": dec(d["ltv"]),
            "liquidation_threshold": dec(d["liquidation_threshold"]),
            "rate_params": RateParams.from_dict(d["rate_params"]),
        }
        for name in ("liquidation_bonus", "close_factor"):
            if name in d:
                kwargs[name] = dec(d[name])
        for name in ("borrowing_enabled", "frozen"):
            if name in d:
                kwargs[name] = bool(d[name])
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {
            "ltv": str(self.ltv),
            "liquidation_threshold": str(self.liquidation_threshold),
            "liquidation_bonus": str(self.liquidation_bonus),
            "close_factor": str(self.close_factor),
            "rate_params": self.rate_params.to_dict(),
            "borrowing_enabled": self.borrowing_enabled,
            "frozen": self.frozen,
        }


@dataclass(frozen=True)
class ReserveState:
    total_liquidity: FixedDec = ZERO
    total_debt: FixedDec = ZERO
    borrow_index: FixedDec = ONE
    liquidity_index: FixedDec = ONE
    last_accrual: int = 0
    scaled_liquidity: FixedDec = ZERO
    scaled_debt: FixedDec = ZERO
    # reserve-factor income, held as a scaled deposit inside scaled_liquidity
    treasury_scaled: FixedDec = ZERO

    @property
    def available_liquidity(self) -> FixedDec:
        return self.total_liquidity - self.total_debt

    @property
    def utilization(self) -> FixedDec:
        return utilization(min(self.total_debt, self.total_liquidity), self.total_liquidity)

    def to_dict(self) -> dict:
        return {
            f.name: (getattr(self, f.name) if f.name == "last_accrual" else str(getattr(self, f.name)))
            for f in dataclasses.fields(self)
        }

    @classmethod
    def from_dict(cls, d: dict) -> ReserveState:
        return cls(**{k: (int(v) if k == "last_accrual" else dec(v)) for k, v in d.items()})


@dataclass
class Position:
    account: str
    scaled_deposits: dict[str, FixedDec] = field(default_factory=dict)
    scaled_debts: dict[str, FixedDec] = field(default_factory=dict)

    def is_empty(self) -> bool:
        return not any(self.scaled_deposits.values()) and not any(self.scaled_debts.values())


@dataclass(frozen=True)
class Balances:
    """Current (index-applied) token amounts of one account."""

    collateral: Mapping[str, FixedDec]
    debt: Mapping[str, FixedDec]


@dataclass(frozen=True)
class BadDebtRecord:
    account: str
    shortfall_value: FixedDec
    timestamp: int


@dataclass(frozen=True)
class LiquidationResult:
    liquidator: str
    target: str
    debt_asset: str
    collateral_asset: str
    repaid: FixedDec
    seized: FixedDec
    received_as_deposit: bool


def accrue(reserve: ReserveState, now: int, p: RateParams, cash: FixedDec | None = None) -> ReserveState:
    """Advance a reserve's indices to ``now``.

    The borrow rate is taken at the utilization prevailing at the start of
    the interval and applied linearly: ``borrow_index *= 1 + r * dt / YEAR``.
    Lenders are credited the interest borrowers actually accrued, less the
    reserve factor, rounded down; the rest goes to the treasury.

    With ``cash`` (the pool's token balance) the treasury share is instead
    whatever makes ``total_liquidity - total_debt`` match the cash again,
    which also absorbs rounding left by earlier deposits and borrows.
    """
    dt = now - reserve.last_accrual
    if dt < 0:
        raise InvalidTime(f"clock went backwards: {reserve.last_accrual} -> {now}")
    if dt == 0:
        return reserve
    growth = mul_div(borrow_rate(reserve.utilization, p), FixedDec.from_integer(dt), FixedDec.from_integer(YEAR))
    borrow_index = mul(reserve.borrow_index, ONE + growth)
    total_debt = mul(reserve.scaled_debt, borrow_index)
    interest = total_debt - reserve.total_debt
    liquidity_index = reserve.liquidity_index
    scaled_liquidity = reserve.scaled_liquidity
    treasury_scaled = reserve.treasury_scaled
    if interest > ZERO and scaled_liquidity > ZERO:
        lenders = mul(interest, ONE - p.reserve_factor, Rounding.DOWN)
        target = div(reserve.total_liquidity + lenders, scaled_liquidity, Rounding.DOWN)
        liquidity_index = fmax(liquidity_index, target)
    if scaled_liquidity > ZERO:
        if cash is None:
            gain = interest - (mul(scaled_liquidity, liquidity_index) - reserve.total_liquidity)
        else:
            gain = cash + total_debt - mul(scaled_liquidity, liquidity_index)
        minted = div(gain, liquidity_index)
        if minted < ZERO:
            minted = fmax(minted, -treasury_scaled)
        scaled_liquidity = scaled_liquidity + minted
        treasury_scaled = treasury_scaled + minted
    return ReserveState(
        total_liquidity=mul(scaled_liquidity, liquidity_index),
        total_debt=total_debt,
        borrow_index=borrow_index,
        liquidity_index=liquidity_index,
        last_accrual=now,
        scaled_liquidity=scaled_liquidity,
        scaled_debt=reserve.scaled_debt,
        treasury_scaled=treasury_scaled,
    )


# exact valuation -----------------------------------------------------------


def _price(prices: Mapping[str, FixedDec], asset: str) -> FixedDec:
    try:
        return prices[asset]
    except KeyError:
        raise OracleMissing(f"no price for {asset}") from None


def _sums(balances: Balances, prices, configs):
    """Return (collateral, risk-adjusted collateral, borrow capacity, debt).

    Values are exact integers at scales 1e36, 1e54, 1e54 and 1e36.
    """
    coll = adj = cap = debt = 0
    for asset, amount in balances.collateral.items():
        if amount.raw == 0:
            continue
        v = amount.raw * _price(prices, asset).raw
        cfg = configs[asset]
        coll += v
        adj += v * cfg.liquidation_threshold.raw
        cap += v * cfg.ltv.raw
    for asset, amount in balances.debt.items():
        if amount.raw == 0:
            continue
        debt += amount.raw * _price(prices, asset).raw
    return coll, adj, cap, debt


def health_factor(balances: Balances, prices: Mapping[str, FixedDec], configs: Mapping[str, ReserveConfig]) -> FixedDec:
    """Risk-adjusted collateral value over debt value, rounded down.

    Debt-free positions get the ``INF`` sentinel.
    """
    _, adj, _, debt = _sums(balances, prices, configs)
    if debt == 0:
        return INF
    return FixedDec(adj // debt)


def collateral_value(balances: Balances, prices) -> FixedDec:
    return FixedDec(round_div(sum(a.raw * _price(prices, k).raw for k, a in balances.collateral.items()), SCALE))


def debt_value(balances: Balances, prices) -> FixedDec:
    return FixedDec(round_div(sum(a.raw * _price(prices, k).raw for k, a in balances.debt.items()), SCALE))


def shortfall(balances: Balances, prices: Mapping[str, FixedDec]) -> FixedDec:
    """Debt value not covered by collateral value (rounded up), or zero."""
    coll = sum(a.raw * _price(prices, k).raw for k, a in balances.collateral.items())
    debt = sum(a.raw * _price(prices, k).raw for k, a in balances.debt.items())
    if debt <= coll:
        return ZERO
    return FixedDec(round_div(debt - coll, SCALE, Rounding.UP))


def bad_debt(positions: Mapping[str, Balances], prices: Mapping[str, FixedDec], configs=None, timestamp: int = 0):
    """Scan positions for uncovered debt.

    Returns ``(records, total_shortfall)``; records are ordered by account.
    ``configs`` is accepted for signature symmetry with :func:`health_factor`
    but not needed: shortfall ignores risk weights.
    """
    records = []
    total = ZERO
    for account in sorted(positions):
        s = shortfall(positions[account], prices)
        if s > ZERO:
            records.append(BadDebtRecord(account, s, timestamp))
            total = total + s
    return records, total


# the pool -------------------------------------------------------------------


class LendingPool:
    """Protocol state machine.

    ``prices`` is the oracle view used for every valuation; the simulation
    engine refreshes it each tick.  ``governance`` names the only account
    allowed to change reserve flags (``None`` disables the check).
    """

    def __init__(self, ledger: TokenLedger | None = None, governance: str | None = None, now: int = 0):
        self.ledger = ledger if ledger is not None else TokenLedger()
        self.governance = governance
        self.now = now
        self.configs: dict[str, ReserveConfig] = {}
        self.reserves: dict[str, ReserveState] = {}
        self.positions: dict[str, Position] = {}
        self.prices: dict[str, FixedDec] = {}

    # setup ----------------------------------------------------------------

    def add_reserve(self, asset: str, config: ReserveConfig) -> None:
        if asset in self.configs:
            raise DomainError(f"reserve {asset} already exists")
        self.configs[asset] = config
        self.reserves[asset] = ReserveState(last_accrual=self.now)

    def set_prices(self, prices: Mapping[str, FixedDec]) -> None:
        self.prices.update(prices)

    def _config(self, asset: str) -> ReserveConfig:
        try:
            return self.configs[asset]
        except KeyError:
            raise NotFound(f"unknown asset {asset!r}") from None

    def _position(self, account: str) -> Position:
        pos = self.positions.get(account)
        if pos is None:
            pos = self.positions[account] = Position(account)
        return pos

    # accrual --------------------------------------------------------------

    def accrue(self, now: int | None = None, asset: str | None = None) -> None:
        """Bring reserves (all, or just ``asset``) up to ``now``."""
        if now is not None:
            if now < self.now:
                raise InvalidTime(f"clock went backwards: {self.now} -> {now}")
            self.now = now
        for a in [asset] if asset is not None else list(self.reserves):
            self.reserves[a] = accrue(self.reserves[a], self.now, self._config(a).rate_params, self.ledger.balance(POOL, a))

    # balances -------------------------------------------------------------

    def available_liquidity(self, asset: str) -> FixedDec:
        self._config(asset)
        return self.ledger.balance(POOL, asset)

    def current_deposit(self, account: str, asset: str) -> FixedDec:
        pos = self.positions.get(account)
        if pos is None:
            return ZERO
        scaled = pos.scaled_deposits.get(asset, ZERO)
        return mul(scaled, self.reserves[asset].liquidity_index) if scaled else ZERO

    def current_debt(self, account: str, asset: str) -> FixedDec:
        pos = self.positions.get(account)
        if pos is None:
            return ZERO
        scaled = pos.scaled_debts.get(asset, ZERO)
        return mul(scaled, self.reserves[asset].borrow_index) if scaled else ZERO

    def balances(self, account: str) -> Balances:
        pos = self.positions.get(account)
        if pos is None:
            return Balances({}, {})
        return Balances(
            {a: self.current_deposit(account, a) for a in sorted(pos.scaled_deposits) if pos.scaled_deposits[a]},
            {a: self.current_debt(account, a) for a in sorted(pos.scaled_debts) if pos.scaled_debts[a]},
        )

    def health_factor(self, account: str) -> FixedDec:
        return health_factor(self.balances(account), self.prices, self.configs)

    def shortfall(self, account: str) -> FixedDec:
        return shortfall(self.balances(account), self.prices)

    def max_borrowable(self, account: str, asset: str) -> FixedDec:
        """Largest amount of ``asset`` the LTV check would still accept
        (ignores pool liquidity and reserve flags)."""
        _, _, cap, debt = _sums(self.balances(account), self.prices, self.configs)
        room = cap - debt * SCALE
        if room <= 0:
            return ZERO
        return FixedDec(room // (_price(self.prices, asset).raw * SCALE))

    def bad_debt(self):
        positions = {acct: self.balances(acct) for acct in self.positions}
        return bad_debt(positions, self.prices, self.configs, self.now)

    # actions --------------------------------------------------------------

    def _restate(self, asset: str, rs: ReserveState) -> None:
        self.reserves[asset] = dataclasses.replace(
            rs,
            total_liquidity=mul(rs.scaled_liquidity, rs.liquidity_index),
            total_debt=mul(rs.scaled_debt, rs.borrow_index),
        )

    @staticmethod
    def _positive(amount: FixedDec) -> FixedDec:
        amount = dec(amount)
        if amount <= ZERO:
            raise DomainError(f"amount must be positive, got {amount}")
        return amount

    def deposit(self, account: str, asset: str, amount: FixedDec) -> None:
        amount = self._positive(amount)
        cfg = self._config(asset)
        if cfg.frozen:
            raise ReserveFrozen(f"{asset} reserve is frozen")
        self.accrue(asset=asset)
        self.ledger.transfer(asset, account, POOL, amount)
        rs = self.reserves[asset]
        scaled = div(amount, rs.liquidity_index)
        pos = self._position(account)
        pos.scaled_deposits[asset] = pos.scaled_deposits.get(asset, ZERO) + scaled
        self._restate(asset, dataclasses.replace(rs, scaled_liquidity=rs.scaled_liquidity + scaled))

    def borrow(self, account: str, asset: str, amount: FixedDec) -> None:
        amount = self._positive(amount)
        cfg = self._config(asset)
        if cfg.frozen:
            raise ReserveFrozen(f"{asset} reserve is frozen")
        if not cfg.borrowing_enabled:
            raise BorrowingDisabled(f"borrowing {asset} is disabled")
        self.accrue(asset=asset)
        cash = self.available_liquidity(asset)
        if amount > cash:
            raise LiquidityExhausted(f"requested {amount} {asset}, only {cash} available")
        _, _, cap, debt = _sums(self.balances(account), self.prices, self.configs)
        new_debt = debt + amount.raw * _price(self.prices, asset).raw
        if new_debt * SCALE > cap:
            raise CollateralInsufficient(f"borrowing {amount} {asset} breaches the LTV limit of {account}")
        rs = self.reserves[asset]
        scaled = div(amount, rs.borrow_index)
        pos = self._position(account)
        pos.scaled_debts[asset] = pos.scaled_debts.get(asset, ZERO) + scaled
        self._restate(asset, dataclasses.replace(rs, scaled_debt=rs.scaled_debt + scaled))
        self.ledger.transfer(asset, POOL, account, amount)

    def repay(self, account: str, asset: str, amount: FixedDec | None = None, payer: str | None = None) -> FixedDec:
        """Repay ``amount`` (all outstanding debt when ``None``); returns the amount paid."""
        self._config(asset)
        self.accrue(asset=asset)
        payer = account if payer is None else payer
        owed = self.current_debt(account, asset)
        amount = owed if amount is None else self._positive(amount)
        if amount > owed:
            raise AmountExceedsBalance(f"repay {amount} exceeds debt {owed} {asset}")
        if amount == ZERO:
            return ZERO
        self.ledger.transfer(asset, payer, POOL, amount)
        self._burn_debt(account, asset, amount, owed)
        return amount

    def _burn_debt(self, account, asset, amount, owed):
        rs = self.reserves[asset]
        pos = self.positions[account]
        have = pos.scaled_debts.get(asset, ZERO)
        burn = have if amount == owed else min(div(amount, rs.borrow_index), have)
        pos.scaled_debts[asset] = have - burn
        self._restate(asset, dataclasses.replace(rs, scaled_debt=rs.scaled_debt - burn))

    def _burn_deposit(self, account, asset, amount, held):
        rs = self.reserves[asset]
        pos = self.positions[account]
        have = pos.scaled_deposits.get(asset, ZERO)
        burn = have if amount == held else min(div(amount, rs.liquidity_index), have)
        pos.scaled_deposits[asset] = have - burn
        self._restate(asset, dataclasses.replace(rs, scaled_liquidity=rs.scaled_liquidity - burn))

    def withdraw(self, account: str, asset: str, amount: FixedDec | None = None) -> FixedDec:
        """Withdraw ``amount`` (the whole deposit when ``None``); returns the amount."""
        self._config(asset)
        self.accrue(asset=asset)
        held = self.current_deposit(account, asset)
        amount = held if amount is None else self._positive(amount)
        if amount > held:
            raise AmountExceedsBalance(f"withdraw {amount} exceeds deposit {held} {asset}")
        if amount == ZERO:
            return ZERO
        cash = self.available_liquidity(asset)
        if amount > cash:
            raise LiquidityExhausted(f"withdraw {amount} {asset}, only {cash} available")
        after = self.balances(account)
        coll = dict(after.collateral)
        coll[asset] = held - amount
        _, adj, cap, debt = _sums(Balances(coll, after.debt), self.prices, self.configs)
        if debt and (adj < debt * SCALE or cap < debt * SCALE):
            raise CollateralInsufficient(f"withdrawing {amount} {asset} would leave {account} undercollateralized")
        self._burn_deposit(account, asset, amount, held)
        self.ledger.transfer(asset, POOL, account, amount)
        return amount

    def liquidate(
        self,
        liquidator: str,
        target: str,
        debt_asset: str,
        collateral_asset: str,
        repay_amount: FixedDec,
    ) -> LiquidationResult:
        """Repay part of an unhealthy position's debt in exchange for collateral.

        The liquidator receives ``repay * p_debt / p_coll`` plus a bonus of
        ``liquidation_bonus`` (of the collateral reserve) on that value.  The
        bonus is limited to the position's equity (collateral value minus
        debt value, floored at zero), so a liquidation at unchanged prices
        never creates or enlarges a shortfall.  Seized tokens round down and
        are capped at the target's balance.  They are paid out as underlying
        when the pool holds enough cash, otherwise credited as a deposit.
        """
        repay_amount = self._positive(repay_amount)
        debt_cfg = self._config(debt_asset)
        self._config(collateral_asset)
        self.accrue(asset=debt_asset)
        self.accrue(asset=collateral_asset)
        bal = self.balances(target)
        coll, adj, _, debt = _sums(bal, self.prices, self.configs)
        if debt == 0 or adj >= debt * SCALE:
            raise NotLiquidatable(f"{target} has health factor >= 1")
        owed = bal.debt.get(debt_asset, ZERO)
        if repay_amount > mul(owed, debt_cfg.close_factor, Rounding.DOWN):
            raise CloseFactorExceeded(
                f"repay {repay_amount} exceeds close factor {debt_cfg.close_factor} of debt {owed} {debt_asset}"
            )
        held = bal.collateral.get(collateral_asset, ZERO)
        seized = self._seized(repay_amount, debt_asset, collateral_asset, coll - debt, held)

        self.ledger.transfer(debt_asset, liquidator, POOL, repay_amount)
        self._burn_debt(target, debt_asset, repay_amount, owed)
        as_deposit = False
        if seized > ZERO:
            self._burn_deposit(target, collateral_asset, seized, held)
            if self.available_liquidity(collateral_asset) >= seized:
                self.ledger.transfer(collateral_asset, POOL, liquidator, seized)
            else:
                as_deposit = True
                rs = self.reserves[collateral_asset]
                scaled = div(seized, rs.liquidity_index)
                pos = self._position(liquidator)
                pos.scaled_deposits[collateral_asset] = pos.scaled_deposits.get(collateral_asset, ZERO) + scaled
                self._restate(collateral_asset, dataclasses.replace(rs, scaled_liquidity=rs.scaled_liquidity + scaled))
        return LiquidationResult(liquidator, target, debt_asset, collateral_asset, repay_amount, seized, as_deposit)

    def _seized(self, repay, debt_asset, collateral_asset, equity36, held) -> FixedDec:
        p_debt = _price(self.prices, debt_asset)
        p_coll = _price(self.prices, collateral_asset)
        base = repay.raw * p_debt.raw * SCALE
        bonus = min(base // SCALE * self._config(collateral_asset).liquidation_bonus.raw, max(0, equity36) * SCALE)
        return FixedDec(min((base + bonus) // (p_coll.raw * SCALE), held.raw))

    def preview_seizure(self, target: str, debt_asset: str, collateral_asset: str, repay_amount: FixedDec) -> FixedDec:
        """Collateral a liquidation of ``repay_amount`` would seize right now (no checks, no accrual)."""
        bal = self.balances(target)
        coll, _, _, debt = _sums(bal, self.prices, self.configs)
        held = bal.collateral.get(collateral_asset, ZERO)
        return self._seized(dec(repay_amount), debt_asset, collateral_asset, coll - debt, held)

    def set_reserve_flags(
        self,
        asset: str,
        borrowing_enabled: bool | None = None,
        frozen: bool | None = None,
        caller: str | None = None,
    ) -> None:
        if self.governance is not None and caller != self.governance:
            raise Unauthorized(f"{caller!r} may not change reserve flags")
        cfg = self._config(asset)
        changes = {}
        if borrowing_enabled is not None:
            changes["borrowing_enabled"] = bool(borrowing_enabled)
        if frozen is not None:
            changes["frozen"] = bool(frozen)
        self.configs[asset] = dataclasses.replace(cfg, **changes)

    def inject_position(self, account: str, deposits: Mapping[str, FixedDec], debts: Mapping[str, FixedDec]) -> None:
        """Install pre-existing protocol state without LTV checks.

        Deposit tokens are minted into the account and deposited; debt tokens
        leave the pool's cash for the account's wallet.  Used to seed
        scenarios (including legacy positions that are already underwater).
        """
        for asset, amount in deposits.items():
            amount = dec(amount)
            self.ledger.mint(account, asset, amount)
            cfg = self._config(asset)
            if cfg.frozen:
                self.configs[asset] = dataclasses.replace(cfg, frozen=False)
                self.deposit(account, asset, amount)
                self.configs[asset] = cfg
            else:
                self.deposit(account, asset, amount)
        for asset, amount in debts.items():
            amount = self._positive(amount)
            self._config(asset)
            if amount > self.available_liquidity(asset):
                raise LiquidityExhausted(f"cannot seed {amount} {asset} debt, pool holds {self.available_liquidity(asset)}")
            rs = self.reserves[asset]
            scaled = div(amount, rs.borrow_index)
            pos = self._position(account)
            pos.scaled_debts[asset] = pos.scaled_debts.get(asset, ZERO) + scaled
            self._restate(asset, dataclasses.replace(rs, scaled_debt=rs.scaled_debt + scaled))
            self.ledger.transfer(asset, POOL, account, amount)

    # snapshots ------------------------------------------------------------

    def snapshot(self) -> dict:
        """Plain-data view of the whole pool, suitable for ``json.dumps``."""
        return {
            "now": self.now,
            "governance": self.governance,
            "prices": {a: str(p) for a, p in sorted(self.prices.items())},
            "reserves": {
                a: {"config": self.configs[a].to_dict(), "state": self.reserves[a].to_dict()} for a in self.configs
            },
            "positions": {
                acct: {
                    "scaled_deposits": {a: str(v) for a, v in sorted(p.scaled_deposits.items())},
                    "scaled_debts": {a: str(v) for a, v in sorted(p.scaled_debts.items())},
                }
                for acct, p in sorted(self.positions.items())
            },
            "wallets": self.ledger.to_dict(),
        }

    @classmethod
    def from_snapshot(cls, snap: dict) -> LendingPool:
        pool = cls(TokenLedger.from_dict(snap.get("wallets", {})), snap.get("governance"), snap["now"])
        pool.prices = {a: dec(p) for a, p in snap.get("prices", {}).items()}
        for asset, r in snap["reserves"].items():
            pool.configs[asset] = ReserveConfig.from_dict(r["config"])
            pool.reserves[asset] = ReserveState.from_dict(r["state"])
        for acct, p in snap.get("positions", {}).items():
            pool.positions[acct] = Position(
                acct,
                {a: dec(v) for a, v in p["scaled_deposits"].items()},
                {a: dec(v) for a, v in p["scaled_debts"].items()},
            )
        return pool
