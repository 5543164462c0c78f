"""Deterministic discrete-time driver.

Each tick runs, in this order:

1. reference prices: scripted prices, drift applied to reference venues by an
   arbitrageur, secondary venues synced to the reference market;
2. oracle observe/publish, then the pool adopts the published prices;
3. interest accrual on every reserve;
4. due governance changes, then every non-liquidator agent in config order;
5. liquidators in config order;
6. bad-debt scan;
7. one metrics row.

All arithmetic is integer fixed-point and iteration orders are fixed, so the
same scenario always produces a byte-identical :class:`MetricsLog`.
"""

from __future__ import annotations

import copy
import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .agents import make_agent
from .errors import ConfigError, ConservationError, DeterminismViolation, LendSimError, SimulationError
from .fixed import SCALE, ZERO, FixedDec, dec, div, mul, round_div
from .ledger import EXTERNAL, POOL, TokenLedger
from .oracle import PriceOracle
from .pool import LendingPool
from .rates import borrow_rate
from .scenario import Scenario, apply_override, load_scenario, resolve, validate
from .venues import SELL_BASE, InfiniteVenue, PriceScript, Venue, arbitrage_rebalance, exogenous_price_step


@dataclass
class Action:
    tick: int
    time: int
    agent: str
    kind: str
    account: str
    asset: str
    amount: FixedDec
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "tick": self.tick,
            "time": self.time,
            "agent": self.agent,
            "kind": self.kind,
            "account": self.account,
            "asset": self.asset,
            "amount": str(self.amount),
        }
        d.update({k: str(v) if isinstance(v, FixedDec) else v for k, v in self.detail.items()})
        return d


class World:
    """All mutable state of one simulation plus the action API agents use."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.tick = 0
        self.now = 0
        self.ledger = TokenLedger()
        gov = next((a for a in scenario.agents if a.kind == "governance"), None)
        self.pool = LendingPool(self.ledger, governance=gov.wallets[0] if gov else None)
        self.oracle = PriceOracle()
        self.actions: list[Action] = []
        self.pending_flags: list[tuple] = []
        self.scripts = {a.symbol: PriceScript(a.symbol, a.price, scenario.seed) for a in scenario.assets}
        self.reference_prices: dict[str, FixedDec] = {}
        self.source_prices: dict[str, FixedDec] = {}
        self.liquidated_value = ZERO

        self.venues: dict = {}
        for vs in scenario.venues:
            if vs.kind == "infinite":
                start = self.scripts[vs.base].price_at(0)
                self.venues[vs.id] = InfiniteVenue(vs.id, vs.base, vs.quote, div(start, self.scripts[vs.quote].price_at(0)), vs.fee)
            else:
                v = Venue(vs.id, vs.base, vs.quote, mul(vs.reserve_base, vs.depth_multiplier), mul(vs.reserve_quote, vs.depth_multiplier), vs.fee)
                self.ledger.debit(EXTERNAL, v.base, v.reserve_base)
                self.ledger.debit(EXTERNAL, v.quote, v.reserve_quote)
                self.venues[vs.id] = v

        self._update_reference_prices()
        for a in scenario.assets:
            self.oracle.add_asset(a.symbol, a.oracle, initial=self.source_prices[a.symbol], t=0)
            if a.reserve is not None:
                self.pool.add_reserve(a.symbol, a.reserve)
        self.pool.set_prices(self.oracle.prices())

        for acct, bals in scenario.wallets.items():
            for asset, amount in bals.items():
                self.ledger.mint(acct, asset, amount)
        for ps in scenario.positions:
            self.pool.inject_position(ps.account, ps.deposits, {})
        for ps in scenario.positions:
            self.pool.inject_position(ps.account, {}, ps.debts)

        self.agents = [make_agent(spec) for spec in scenario.agents]

    # prices ---------------------------------------------------------------

    def _update_reference_prices(self):
        """Step 1: scripted prices, reference-venue drift, secondary sync."""
        sc = self.scenario
        for a in sc.assets:
            self.reference_prices[a.symbol] = exogenous_price_step(self.scripts, a.symbol, self.tick)
        for a in sc.assets:
            if a.reference_venue is None:
                self.source_prices[a.symbol] = self.reference_prices[a.symbol]
        for a in sc.assets:
            if a.reference_venue is None:
                continue
            venue = self.venues[a.reference_venue]
            quote_price = self.source_prices[venue.quote]
            if isinstance(venue, InfiniteVenue):
                venue.price = div(self.reference_prices[a.symbol], quote_price)
            else:
                if self.tick == 0:
                    target = div(self.reference_prices[a.symbol], quote_price)
                else:
                    prev = self.scripts[a.symbol].price_at(self.tick - 1)
                    target = mul(venue.quote_spot(), div(self.reference_prices[a.symbol], prev))
                self._arbitrage(venue, target)
            self.source_prices[a.symbol] = mul(venue.quote_spot(), quote_price)
        refs = {a.reference_venue for a in sc.assets}
        for vid, venue in self.venues.items():
            if vid in refs:
                continue
            target = div(self.source_prices[venue.base], self.source_prices[venue.quote])
            if isinstance(venue, InfiniteVenue):
                venue.price = target
            else:
                self._arbitrage(venue, target)

    def _arbitrage(self, venue, target):
        trade = arbitrage_rebalance(venue, target)
        if trade is None:
            return
        direction, amount_in, out = trade
        asset_in, asset_out = (venue.base, venue.quote) if direction == SELL_BASE else (venue.quote, venue.base)
        self.ledger.debit(EXTERNAL, asset_in, amount_in)
        self.ledger.credit(EXTERNAL, asset_out, out)

    def _oracle_step(self):
        for a in self.scenario.assets:
            self.oracle.observe(a.symbol, self.source_prices[a.symbol], self.now)
            self.oracle.publish_if_due(a.symbol, self.now)
        self.pool.set_prices(self.oracle.prices())

    # action API -----------------------------------------------------------

    def _record(self, agent, kind, account, asset, amount, **detail) -> Action:
        action = Action(self.tick, self.now, agent, kind, account, asset, amount, detail)
        self.actions.append(action)
        return action

    def deposit(self, agent, account, asset, amount):
        self.pool.deposit(account, asset, amount)
        self._record(agent, "deposit", account, asset, amount)

    def borrow(self, agent, account, asset, amount):
        self.pool.borrow(account, asset, amount)
        self._record(agent, "borrow", account, asset, amount)

    def repay(self, agent, account, asset, amount=None):
        paid = self.pool.repay(account, asset, amount)
        self._record(agent, "repay", account, asset, paid)
        return paid

    def withdraw(self, agent, account, asset, amount=None):
        got = self.pool.withdraw(account, asset, amount)
        self._record(agent, "withdraw", account, asset, got)
        return got

    def transfer(self, agent, asset, src, dst, amount):
        self.ledger.transfer(asset, src, dst, amount)
        self._record(agent, "transfer", src, asset, amount, to=dst)

    def swap(self, agent, account, venue_id, direction, amount_in) -> FixedDec:
        venue = self.venues[venue_id]
        asset_in, asset_out = (venue.base, venue.quote) if direction == SELL_BASE else (venue.quote, venue.base)
        out = venue.preview(direction, amount_in)
        self.ledger.debit(account, asset_in, amount_in)
        venue.swap(direction, amount_in)
        self.ledger.credit(account, asset_out, out)
        if venue.external:
            self.ledger.credit(EXTERNAL, asset_in, amount_in)
            self.ledger.debit(EXTERNAL, asset_out, out)
        self._record(agent, "swap", account, asset_in, amount_in, venue=venue_id, asset_out=asset_out, amount_out=out)
        return out

    def liquidate(self, agent, liquidator, target, debt_asset, collateral_asset, repay):
        result = self.pool.liquidate(liquidator, target, debt_asset, collateral_asset, repay)
        value = FixedDec(round_div(result.repaid.raw * self.pool.prices[debt_asset].raw, SCALE))
        self.liquidated_value = self.liquidated_value + value
        self._record(
            agent,
            "liquidation",
            liquidator,
            debt_asset,
            result.repaid,
            target=target,
            collateral_asset=collateral_asset,
            seized=result.seized,
            repaid_value=value,
        )
        return result

    def propose_flags(self, agent, account, asset, flags, effective_time):
        self.pending_flags.append((effective_time, len(self.pending_flags), agent, account, asset, dict(flags)))
        self._record(agent, "governance_proposal", account, asset, ZERO, effective_time=effective_time, **flags)
        self.apply_due_governance()

    def apply_due_governance(self):
        due = sorted(p for p in self.pending_flags if p[0] <= self.now)
        for item in due:
            _, _, agent, account, asset, flags = item
            self.pool.set_reserve_flags(
                asset, borrowing_enabled=flags.get("borrowing_enabled"), frozen=flags.get("frozen"), caller=account
            )
            self.pending_flags.remove(item)
            self._record(agent, "reserve_flags", account, asset, ZERO, **flags)

    # accounting -----------------------------------------------------------

    def token_imbalance(self) -> dict[str, FixedDec]:
        """Per-asset sum of every wallet (EXTERNAL included) and venue reserve.

        Tokens only ever move, so every entry must be exactly zero.
        """
        out = {}
        for a in self.scenario.assets:
            total = self.ledger.total(a.symbol)
            for v in self.venues.values():
                if isinstance(v, Venue):
                    if v.base == a.symbol:
                        total = total + v.reserve_base
                    if v.quote == a.symbol:
                        total = total + v.reserve_quote
            out[a.symbol] = total
        return out

    def check_conservation(self):
        for asset, total in self.token_imbalance().items():
            if total != ZERO:
                raise ConservationError(f"{asset} supply drifted by {total} at tick {self.tick}")
            if self.ledger.balance(POOL, asset) < ZERO:
                raise ConservationError(f"pool holds negative {asset}")

    def snapshot(self) -> dict:
        return {
            "tick": self.tick,
            "pool": self.pool.snapshot(),
            "venues": {
                vid: (
                    {"price": str(v.price)}
                    if isinstance(v, InfiniteVenue)
                    else {"reserve_base": str(v.reserve_base), "reserve_quote": str(v.reserve_quote)}
                )
                for vid, v in self.venues.items()
            },
            "agents": {ag.id: copy.deepcopy(ag.memory) for ag in self.agents},
        }


@dataclass
class MetricsLog:
    name: str
    scenario_hash: str
    columns: list
    rows: list = field(default_factory=list)
    events: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [dec(r[i]) for r in self.rows]

    def value(self, tick: int, name: str) -> FixedDec:
        return dec(self.rows[tick][self.columns.index(name)])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        w.writerows(self.rows)
        return buf.getvalue()

    def write(self, out_dir) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = f"{self.name}-{self.scenario_hash[:12]}"
        csv_path = out / f"{stem}.csv"
        json_path = out / f"{stem}.summary.json"
        csv_path.write_text(self.to_csv())
        json_path.write_text(json.dumps({**self.summary, "events": self.events}, indent=2, sort_keys=True) + "\n")
        return csv_path, json_path


def _columns(world: World) -> list[str]:
    sc = world.scenario
    cols = ["tick", "time"]
    for a in sc.assets:
        cols += [f"price_{a.symbol}", f"oracle_{a.symbol}"]
    for vid, v in world.venues.items():
        cols.append(f"spot_{vid}")
    for a in sc.assets:
        if a.reserve is not None:
            s = a.symbol
            cols += [
                f"utilization_{s}",
                f"borrow_rate_{s}",
                f"available_{s}",
                f"total_debt_{s}",
                f"total_liquidity_{s}",
                f"frozen_{s}",
            ]
    cols += [f"hf_{acct}" for acct in sc.track]
    cols += ["total_debt_value", "bad_debt", "liquidated_value"]
    return cols


def _row(world: World, bad_debt_total: FixedDec) -> list[str]:
    sc = world.scenario
    pool = world.pool
    row = [str(world.tick), str(world.now)]
    for a in sc.assets:
        row += [str(world.source_prices[a.symbol]), str(world.oracle.price(a.symbol))]
    for v in world.venues.values():
        row.append(str(v.quote_spot()))
    debt_value = 0
    for a in sc.assets:
        if a.reserve is None:
            continue
        s = a.symbol
        rs = pool.reserves[s]
        cfg = pool.configs[s]
        u = rs.utilization
        row += [
            str(u),
            str(borrow_rate(u, cfg.rate_params)),
            str(pool.available_liquidity(s)),
            str(rs.total_debt),
            str(rs.total_liquidity),
            "1" if cfg.frozen else "0",
        ]
        debt_value += rs.total_debt.raw * pool.prices[s].raw
    row += [str(pool.health_factor(acct)) for acct in sc.track]
    row += [str(FixedDec(round_div(debt_value, SCALE))), str(bad_debt_total), str(world.liquidated_value)]
    return row


def _summary(log: MetricsLog, world: World) -> dict:
    sc = world.scenario
    bad = log.column("bad_debt")
    out = {
        "scenario": sc.name,
        "scenario_hash": sc.hash,
        "seed": sc.seed,
        "ticks": sc.horizon_ticks,
        "tick_seconds": sc.tick_seconds,
        "numeraire": sc.numeraire,
        "initial_bad_debt": str(bad[0]),
        "peak_bad_debt": str(max(bad)),
        "final_bad_debt": str(bad[-1]),
        "total_liquidated_value": str(world.liquidated_value),
        "liquidations": sum(1 for e in log.events if e["kind"] == "liquidation"),
        "min_health_factor": {acct: str(min(log.column(f"hf_{acct}"))) for acct in sc.track},
        "price_ratio": {},
        "peak_utilization": {},
        "peak_borrow_rate": {},
        "agents": {ag.id: copy.deepcopy(ag.memory) for ag in world.agents},
    }
    for a in sc.assets:
        series = log.column(f"price_{a.symbol}")
        out["price_ratio"][a.symbol] = {"min": str(div(min(series), series[0])), "max": str(div(max(series), series[0]))}
        if a.reserve is not None:
            out["peak_utilization"][a.symbol] = str(max(log.column(f"utilization_{a.symbol}")))
            out["peak_borrow_rate"][a.symbol] = str(max(log.column(f"borrow_rate_{a.symbol}")))
    return out


def run(scenario, *, check_conservation: bool = True, world_hook=None) -> MetricsLog:
    """Simulate ``scenario`` (a :class:`Scenario`, raw mapping, path or bundled name).

    ``world_hook(world)``, if given, is called after every tick; tests use
    it to inspect intermediate state.
    """
    if not isinstance(scenario, Scenario):
        scenario = validate(scenario) if isinstance(scenario, dict) else load_scenario(scenario)
    try:
        world = World(scenario)
    except ConfigError:
        raise
    except LendSimError as exc:
        raise SimulationError(-1, exc) from exc
    log = MetricsLog(scenario.name, scenario.hash, _columns(world))
    liquidators = [ag for ag in world.agents if ag.kind == "liquidator"]
    others = [ag for ag in world.agents if ag.kind != "liquidator"]
    for tick in range(scenario.horizon_ticks):
        world.tick = tick
        world.now = tick * scenario.tick_seconds
        mark = len(world.actions)
        try:
            world._update_reference_prices()
            world._oracle_step()
            world.pool.accrue(world.now)
            world.apply_due_governance()
            for ag in others:
                ag.step(world)
            for ag in liquidators:
                ag.step(world)
            _, bad_total = world.pool.bad_debt()
            log.rows.append(_row(world, bad_total))
            if check_conservation:
                world.check_conservation()
        except (ConservationError, SimulationError):
            raise
        except LendSimError as exc:
            raise SimulationError(tick, exc) from exc
        log.events.extend(a.to_dict() for a in world.actions[mark:])
        if world_hook is not None:
            world_hook(world)
    log.summary = _summary(log, world)
    return log


def first_divergence(a: MetricsLog, b: MetricsLog):
    """Return ``None`` if the logs are identical, else ``(tick, detail)``."""
    if a.columns != b.columns:
        return 0, "column sets differ"
    for i, (ra, rb) in enumerate(zip(a.rows, b.rows)):
        if ra != rb:
            col = next(a.columns[j] for j, (x, y) in enumerate(zip(ra, rb)) if x != y)
            return i, f"column {col}"
    if len(a.rows) != len(b.rows):
        return min(len(a.rows), len(b.rows)), "row counts differ"
    ea = {}
    for e in a.events:
        ea.setdefault(e["tick"], []).append(e)
    eb = {}
    for e in b.events:
        eb.setdefault(e["tick"], []).append(e)
    for t in sorted(set(ea) | set(eb)):
        if ea.get(t) != eb.get(t):
            return t, "event streams differ"
    return None


def compare_logs(a: MetricsLog, b: MetricsLog) -> None:
    diff = first_divergence(a, b)
    if diff is not None:
        raise DeterminismViolation(*diff)


def replay_check(scenario) -> bool:
    """Run ``scenario`` twice; raise :class:`DeterminismViolation` on any difference."""
    if not isinstance(scenario, Scenario):
        scenario = validate(scenario) if isinstance(scenario, dict) else load_scenario(scenario)
    compare_logs(run(scenario), run(scenario))
    return True


def _sweep_one(args):
    raw, path, value, out_dir = args
    log = run(validate(apply_override(raw, path, value)))
    if out_dir is not None:
        log.write(out_dir)
    return log.summary


def sweep(scenario, path: str, values, workers: int = 1, out_dir=None) -> list:
    """Run one independent simulation per value of the field at ``path``.

    Returns ``[(value, summary), ...]`` in input order.  With ``out_dir``
    each run's CSV and summary are written there as well.
    """
    if isinstance(scenario, Scenario):
        raw = scenario.raw
    elif isinstance(scenario, dict):
        raw = scenario
    else:
        raw = load_scenario(scenario).raw
    try:
        resolve(raw, path)
    except (KeyError, IndexError, TypeError) as exc:
        raise ConfigError(path, f"cannot resolve: {exc}") from None
    jobs = [(raw, path, v, out_dir) for v in values]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            summaries = list(ex.map(_sweep_one, jobs))
    else:
        summaries = [_sweep_one(j) for j in jobs]
    return list(zip(values, summaries))
