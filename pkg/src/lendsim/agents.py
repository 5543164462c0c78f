"""Strategic actors.

Each agent reads the world once per tick and acts through the world's action
API (``world.deposit``, ``world.borrow``, ``world.swap`` ...), which applies
the action and records it.  ``step`` returns the actions taken during that
call.  Everything an agent remembers between ticks lives in ``memory``, a
plain dict of JSON-friendly values, so runs can be checkpointed and replayed.
"""

from __future__ import annotations

from .errors import (
    BorrowingDisabled,
    CloseFactorExceeded,
    CollateralInsufficient,
    LiquidityExhausted,
    NotLiquidatable,
    ReserveFrozen,
)
from .fixed import ONE, SCALE, ZERO, FixedDec, Rounding, dec, fmin, mul, round_div
from .pool import _sums
from .venues import BUY_BASE, SELL_BASE

_BORROW_STOPS = (LiquidityExhausted, CollateralInsufficient, ReserveFrozen, BorrowingDisabled)


class Agent:
    kind = ""

    def __init__(self, spec):
        self.spec = spec
        self.id = spec.id
        self.params = dict(spec.params)
        self.wallets = list(spec.wallets)
        self.memory: dict = {}

    @property
    def account(self) -> str:
        return self.wallets[0]

    def param(self, name, default=None):
        value = self.params.get(name, default)
        return value

    def num(self, name, default=None) -> FixedDec | None:
        value = self.params.get(name, default)
        return None if value is None else dec(value)

    def step(self, world) -> list:
        mark = len(world.actions)
        if self.spec.active(world.tick):
            self.act(world)
        return world.actions[mark:]

    def act(self, world) -> None:
        raise NotImplementedError


class ShortSqueezer(Agent):
    """Deposit stable collateral, borrow the target asset in tranches, dump
    each tranche on a venue, then optionally borrow a second stable against
    the cheapened debt.  Never repays.

    params: ``collateral_asset``, ``collateral_amount`` (default: whole
    wallet), ``target_asset``, ``venue`` (where to sell; none = hold),
    ``tranche`` or ``schedule`` (list of ``{start_tick, tranche}``),
    ``borrow_cap``, ``ltv_usage`` (share of LTV headroom to use, default 1),
    ``second_borrow_asset``, ``second_borrow_usage`` (default 1),
    ``second_borrow_delay_ticks`` (default 0).
    """

    kind = "short_squeezer"

    def __init__(self, spec):
        super().__init__(spec)
        self.memory.update(phase="deposit", borrowed="0", sold="0", proceeds="0", borrow_done_tick=None, second_borrowed="0")

    def _tranche(self, tick) -> FixedDec:
        schedule = self.param("schedule")
        if schedule is None:
            return self.num("tranche", "0")
        current = ZERO
        for entry in sorted(schedule, key=lambda e: int(e["start_tick"])):
            if tick >= int(entry["start_tick"]):
                current = dec(entry["tranche"])
        return current

    def act(self, world):
        m = self.memory
        pool = world.pool
        acct = self.account
        coll_asset = self.param("collateral_asset")
        target = self.param("target_asset")
        if m["phase"] == "deposit":
            amount = self.num("collateral_amount") or world.ledger.balance(acct, coll_asset)
            if amount > ZERO:
                world.deposit(self.id, acct, coll_asset, amount)
            m["phase"] = "borrow"
        if m["phase"] == "borrow":
            tranche = self._tranche(world.tick)
            if tranche > ZERO:
                room = mul(pool.max_borrowable(acct, target), self.num("ltv_usage", "1"), Rounding.DOWN)
                amount = fmin(fmin(tranche, pool.available_liquidity(target)), room)
                cap = self.num("borrow_cap")
                if cap is not None:
                    amount = fmin(amount, cap - dec(m["borrowed"]))
                if amount <= ZERO:
                    self._finish_borrow(world)
                else:
                    try:
                        world.borrow(self.id, acct, target, amount)
                    except _BORROW_STOPS:
                        self._finish_borrow(world)
                    else:
                        m["borrowed"] = str(dec(m["borrowed"]) + amount)
                        venue = self.param("venue")
                        if venue is not None:
                            out = world.swap(self.id, acct, venue, SELL_BASE, amount)
                            m["sold"] = str(dec(m["sold"]) + amount)
                            m["proceeds"] = str(dec(m["proceeds"]) + out)
        if m["phase"] == "second_borrow":
            second = self.param("second_borrow_asset")
            delay = int(self.param("second_borrow_delay_ticks", 0))
            if second is None:
                m["phase"] = "hold"
            elif world.tick - m["borrow_done_tick"] >= delay:
                room = mul(pool.max_borrowable(acct, second), self.num("second_borrow_usage", "1"), Rounding.DOWN)
                amount = fmin(room, pool.available_liquidity(second))
                if amount > ZERO:
                    try:
                        world.borrow(self.id, acct, second, amount)
                    except _BORROW_STOPS:
                        amount = ZERO
                m["second_borrowed"] = str(amount)
                m["phase"] = "hold"

    def _finish_borrow(self, world):
        self.memory["phase"] = "second_borrow"
        self.memory["borrow_done_tick"] = world.tick


class LoopAttacker(Agent):
    """Two-wallet leverage loop, one iteration per tick.

    Iteration 1: wallet A deposits all its stable and borrows the target asset
    at the stable LTV; the tokens move to wallet B, which deposits them and
    borrows stable.  Each later iteration: B buys the target with its stable,
    deposits the purchase and borrows up to its LTV headroom again.

    ``seed_borrow`` caps B's first borrow below its headroom; the gap is
    kept as constant slack on every later borrow, so the loop converges to
    ``seed / (1 - ltv_target)``.

    params: ``stable_asset``, ``target_asset``, ``venue`` (for buying),
    ``max_iterations`` (default 50), ``epsilon`` (default 0), ``seed_borrow``.
    """

    kind = "loop_attacker"

    def __init__(self, spec):
        super().__init__(spec)
        self.memory.update(iteration=0, cumulative="0", slack="0", done=False, increments=[])

    def act(self, world):
        m = self.memory
        if m["done"] or m["iteration"] >= int(self.param("max_iterations", 50)):
            return
        pool = world.pool
        a, b = self.wallets
        stable = self.param("stable_asset")
        target = self.param("target_asset")
        if m["iteration"] == 0:
            capital = world.ledger.balance(a, stable)
            if capital <= ZERO:
                m["done"] = True
                return
            world.deposit(self.id, a, stable, capital)
            got = fmin(pool.max_borrowable(a, target), pool.available_liquidity(target))
            if got <= ZERO:
                m["done"] = True
                return
            world.borrow(self.id, a, target, got)
            world.transfer(self.id, target, a, b, got)
            world.deposit(self.id, b, target, got)
            room = pool.max_borrowable(b, stable)
            seed = self.num("seed_borrow")
            seed = room if seed is None else fmin(seed, room)
            m["slack"] = str(room - seed)
            amount = fmin(seed, pool.available_liquidity(stable))
        else:
            cash = world.ledger.balance(b, stable)
            if cash <= ZERO:
                m["done"] = True
                return
            bought = world.swap(self.id, b, self.param("venue"), BUY_BASE, cash)
            world.deposit(self.id, b, target, bought)
            room = pool.max_borrowable(b, stable) - dec(m["slack"])
            amount = fmin(room, pool.available_liquidity(stable))
        m["iteration"] += 1
        if amount <= ZERO or amount < self.num("epsilon", "0"):
            m["done"] = True
            return
        try:
            world.borrow(self.id, b, stable, amount)
        except _BORROW_STOPS:
            m["done"] = True
            return
        m["cumulative"] = str(dec(m["cumulative"]) + amount)
        m["increments"].append(str(amount))


class Liquidator(Agent):
    """Liquidates every unhealthy position once per pass.

    Repays the largest debt it holds inventory for, up to the close factor,
    and never more than the seized collateral covers at par.  With
    ``sell_seized`` it dumps what it receives on ``sell_venues[asset]`` in the
    same tick.

    params: ``sell_seized`` (default false), ``sell_venues`` (asset -> venue),
    ``passes`` (default 1), ``require_profit`` (default true: skip
    liquidations whose seized collateral is worth less than the repaid debt
    at market prices).
    """

    kind = "liquidator"

    def __init__(self, spec):
        super().__init__(spec)
        self.memory.update(liquidations=0, repaid_value="0")

    def act(self, world):
        for _ in range(int(self.param("passes", 1))):
            if not self._pass(world):
                break

    def _pass(self, world) -> bool:
        pool = world.pool
        acct = self.account
        acted = False
        for target in sorted(pool.positions):
            if target in self.wallets:
                continue
            if pool.health_factor(target) >= ONE:
                continue
            bal = pool.balances(target)
            prices = pool.prices
            debts = [
                (d.raw * prices[a].raw, a)
                for a, d in bal.debt.items()
                if d > ZERO and world.ledger.balance(acct, a) > ZERO
            ]
            colls = [(c.raw * prices[a].raw, a) for a, c in bal.collateral.items() if c > ZERO]
            if not debts or not colls:
                continue
            debt_asset = max(debts)[1]
            coll_value, coll_asset = max(colls)
            cfg = pool.configs[debt_asset]
            owed = bal.debt[debt_asset]
            cover = FixedDec(coll_value // prices[debt_asset].raw)
            repay = fmin(fmin(mul(owed, cfg.close_factor, Rounding.DOWN), world.ledger.balance(acct, debt_asset)), cover)
            if repay <= ZERO:
                continue
            if self.param("require_profit", True) and not self._profitable(world, target, debt_asset, coll_asset, repay):
                continue
            try:
                result = world.liquidate(self.id, acct, target, debt_asset, coll_asset, repay)
            except (NotLiquidatable, CloseFactorExceeded):
                continue
            acted = True
            self.memory["liquidations"] += 1
            self.memory["repaid_value"] = str(
                dec(self.memory["repaid_value"]) + FixedDec(round_div(repay.raw * prices[debt_asset].raw, SCALE))
            )
            venue = (self.param("sell_venues") or {}).get(coll_asset)
            if self.param("sell_seized", False) and venue and not result.received_as_deposit and result.seized > ZERO:
                world.swap(self.id, acct, venue, SELL_BASE, result.seized)
        return acted

    @staticmethod
    def _profitable(world, target, debt_asset, coll_asset, repay) -> bool:
        # valued at market prices, which may differ from the oracle's
        seized = world.pool.preview_seizure(target, debt_asset, coll_asset, repay)
        market = world.source_prices
        return seized.raw * market[coll_asset].raw >= repay.raw * market[debt_asset].raw


class Defender(Agent):
    """Tops up collateral when the monitored position's health factor falls
    below ``trigger``, restoring it to ``target`` within ``budget``.

    params: ``collateral_asset``, ``trigger`` (default 1.5), ``target``
    (default 1.8), ``budget`` (default: whole wallet balance).
    """

    kind = "defender"

    def __init__(self, spec):
        super().__init__(spec)
        self.memory.update(spent="0", topups=0)

    def needed_topup(self, pool) -> FixedDec:
        """Collateral tokens that lift the health factor exactly to target (rounded up)."""
        asset = self.param("collateral_asset")
        target = self.num("target", "1.8")
        _, adj, _, debt = _sums(pool.balances(self.account), pool.prices, pool.configs)
        gap = target.raw * debt - adj
        if gap <= 0:
            return ZERO
        weight = pool.prices[asset].raw * pool.configs[asset].liquidation_threshold.raw
        return FixedDec(-((-gap) // weight))

    def act(self, world):
        pool = world.pool
        acct = self.account
        if pool.health_factor(acct) >= self.num("trigger", "1.5"):
            return
        asset = self.param("collateral_asset")
        budget = self.num("budget")
        available = world.ledger.balance(acct, asset)
        if budget is not None:
            available = fmin(available, budget - dec(self.memory["spent"]))
        amount = fmin(self.needed_topup(pool), available)
        if amount <= ZERO:
            return
        try:
            world.deposit(self.id, acct, asset, amount)
        except ReserveFrozen:
            return
        self.memory["spent"] = str(dec(self.memory["spent"]) + amount)
        self.memory["topups"] += 1


class Governance(Agent):
    """Threshold-triggered risk-parameter change that lands after a delay.

    params: ``asset`` (reserve to act on), ``trigger`` (either
    ``{utilization_above, ticks}`` or ``{at_tick}``), ``flags`` (default
    ``{frozen: true}``), ``delay`` seconds (default 3 days).
    """

    kind = "governance"

    def __init__(self, spec):
        super().__init__(spec)
        self.memory.update(streak=0, proposed_tick=None)

    def act(self, world):
        m = self.memory
        if m["proposed_tick"] is not None:
            return
        trigger = self.param("trigger") or {}
        asset = self.param("asset")
        fire = False
        if "at_tick" in trigger:
            fire = world.tick >= int(trigger["at_tick"])
        elif "utilization_above" in trigger:
            u = world.pool.reserves[asset].utilization
            m["streak"] = m["streak"] + 1 if u > dec(trigger["utilization_above"]) else 0
            fire = m["streak"] >= int(trigger.get("ticks", 1))
        if not fire:
            return
        flags = self.param("flags") or {"frozen": True}
        delay = int(self.param("delay", 3 * 86400))
        world.propose_flags(self.id, self.account, asset, flags, world.now + delay)
        m["proposed_tick"] = world.tick


class PassiveLP(Agent):
    """Deposits its wallet (or the ``deposits`` mapping) once at activation."""

    kind = "passive_lp"

    def __init__(self, spec):
        super().__init__(spec)
        self.memory.update(done=False)

    def act(self, world):
        if self.memory["done"]:
            return
        deposits = self.param("deposits") or {
            a: str(v) for a, v in sorted(world.ledger.balances(self.account).items()) if v > ZERO and a in world.pool.configs
        }
        for asset, amount in deposits.items():
            world.deposit(self.id, self.account, asset, dec(amount))
        self.memory["done"] = True


AGENT_TYPES = {cls.kind: cls for cls in (ShortSqueezer, LoopAttacker, Liquidator, Defender, Governance, PassiveLP)}


def make_agent(spec) -> Agent:
    return AGENT_TYPES[spec.kind](spec)
