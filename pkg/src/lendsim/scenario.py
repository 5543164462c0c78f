"""Scenario documents: loading, validation, overrides, hashing.

A scenario is a YAML (or JSON) mapping.  All protocol quantities are decimal
strings so that files diff cleanly and parse exactly.  Validation errors
carry the dotted path of the offending field, e.g.
``agents[2].params.target_asset``.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

from .errors import ConfigError, LendSimError
from .fixed import ZERO, FixedDec, dec
from .oracle import OraclePolicy
from .pool import ReserveConfig
from .venues import PriceScript

AGENT_KINDS = ("short_squeezer", "loop_attacker", "liquidator", "defender", "governance", "passive_lp")
DEFAULT_TICK_SECONDS = 60


@dataclass(frozen=True)
class AssetSpec:
    symbol: str
    price: dict
    reference_venue: str | None
    oracle: OraclePolicy
    reserve: ReserveConfig | None


@dataclass(frozen=True)
class VenueSpec:
    id: str
    kind: str  # "constant_product" or "infinite"
    base: str
    quote: str
    reserve_base: FixedDec = ZERO
    reserve_quote: FixedDec = ZERO
    fee: FixedDec = ZERO
    depth_multiplier: FixedDec = dec(1)


@dataclass(frozen=True)
class PositionSpec:
    account: str
    deposits: dict
    debts: dict


@dataclass(frozen=True)
class AgentSpec:
    id: str
    kind: str
    wallets: tuple
    params: dict = field(default_factory=dict)
    start_tick: int = 0
    end_tick: int | None = None

    def active(self, tick: int) -> bool:
        return tick >= self.start_tick and (self.end_tick is None or tick <= self.end_tick)


@dataclass(frozen=True)
class Scenario:
    raw: dict
    name: str
    seed: int
    tick_seconds: int
    horizon_ticks: int
    numeraire: str
    assets: tuple
    venues: tuple
    wallets: dict
    positions: tuple
    agents: tuple
    track: tuple
    hash: str

    def asset(self, symbol: str) -> AssetSpec:
        for a in self.assets:
            if a.symbol == symbol:
                return a
        raise KeyError(symbol)

    @property
    def short_hash(self) -> str:
        return self.hash[:12]


def scenario_hash(raw: dict) -> str:
    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode()).hexdigest()


# loading --------------------------------------------------------------------


def bundled_names() -> list[str]:
    files = resources.files("lendsim").joinpath("scenarios")
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".yaml"))


def bundled_path(name: str):
    return resources.files("lendsim").joinpath("scenarios", f"{name}.yaml")


def load_raw(source) -> dict:
    """Read a scenario mapping from a path or a bundled scenario name."""
    if isinstance(source, dict):
        return copy.deepcopy(source)
    path = Path(source)
    if path.exists():
        text = path.read_text()
    elif str(source) in bundled_names():
        text = bundled_path(str(source)).read_text()
    else:
        raise ConfigError("", f"no scenario file or bundled scenario named {source!r}")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("", f"cannot parse scenario: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("", "scenario document must be a mapping")
    return data


def load_scenario(source, overrides=()) -> Scenario:
    raw = load_raw(source)
    for item in overrides:
        path, value = parse_override(item) if isinstance(item, str) else item
        raw = apply_override(raw, path, value)
    return validate(raw)


# overrides ------------------------------------------------------------------


def parse_override(text: str):
    if "=" not in text:
        raise ConfigError(text, "override must look like path=value")
    path, value = text.split("=", 1)
    return path.strip(), yaml.safe_load(value)


def _split(path: str) -> list[str]:
    parts = [p for p in path.replace("[", ".").replace("]", "").split(".") if p]
    if not parts:
        raise ConfigError(path, "empty override path")
    return parts


def _select(node, key, path):
    if isinstance(node, dict):
        if key not in node:
            raise ConfigError(path, f"no field {key!r}")
        return key
    if isinstance(node, list):
        if key.lstrip("-").isdigit():
            idx = int(key)
            if not -len(node) <= idx < len(node):
                raise ConfigError(path, f"index {idx} out of range")
            return idx
        for i, item in enumerate(node):
            if isinstance(item, dict) and key in (item.get("id"), item.get("symbol"), item.get("account")):
                return i
        raise ConfigError(path, f"no list element with id {key!r}")
    raise ConfigError(path, f"cannot descend into {type(node).__name__}")


def apply_override(raw: dict, path: str, value) -> dict:
    """Return a copy of ``raw`` with the field at ``path`` replaced.

    Path segments are dict keys, list indices, or the ``id`` / ``symbol`` /
    ``account`` of a list element: ``agents.gov.params.delay``.  The final
    segment may name a new key of an existing mapping.
    """
    out = copy.deepcopy(raw)
    parts = _split(path)
    node = out
    for i, part in enumerate(parts[:-1]):
        node = node[_select(node, part, ".".join(parts[: i + 1]))]
    last = parts[-1]
    if isinstance(node, dict):
        node[last] = value
    else:
        node[_select(node, last, path)] = value
    return out


def resolve(raw: dict, path: str):
    node = raw
    parts = _split(path)
    for i, part in enumerate(parts):
        node = node[_select(node, part, ".".join(parts[: i + 1]))]
    return node


# validation -----------------------------------------------------------------


def _req(d, key, path):
    if not isinstance(d, dict):
        raise ConfigError(path, "expected a mapping")
    if key not in d:
        raise ConfigError(f"{path}.{key}" if path else key, "required field missing")
    return d[key]


def _num(value, path) -> FixedDec:
    try:
        return dec(value)
    except (LendSimError, TypeError, ValueError) as exc:
        raise ConfigError(path, f"not a decimal: {value!r} ({exc})") from None


def _int(value, path, minimum=None) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    try:
        n = int(value)
    except ValueError:
        raise ConfigError(path, f"expected an integer, got {value!r}") from None
    if minimum is not None and n < minimum:
        raise ConfigError(path, f"must be >= {minimum}")
    return n


def _amounts(d, path, assets) -> dict:
    if d is None:
        return {}
    if not isinstance(d, dict):
        raise ConfigError(path, "expected a mapping of asset -> amount")
    out = {}
    for asset, v in d.items():
        if asset not in assets:
            raise ConfigError(f"{path}.{asset}", f"undefined asset {asset!r}")
        amount = _num(v, f"{path}.{asset}")
        if amount < ZERO:
            raise ConfigError(f"{path}.{asset}", "amount must be non-negative")
        out[asset] = amount
    return out


def _check_asset_refs(params: dict, path: str, assets, venues):
    for key, value in params.items():
        p = f"{path}.{key}"
        if key.endswith("asset") and value is not None:
            if value not in assets:
                raise ConfigError(p, f"undefined asset {value!r}")
        elif key == "venue" and value is not None:
            if value not in venues:
                raise ConfigError(p, f"undefined venue {value!r}")
        elif key == "sell_venues" and isinstance(value, dict):
            for a, v in value.items():
                if a not in assets:
                    raise ConfigError(f"{p}.{a}", f"undefined asset {a!r}")
                if v not in venues:
                    raise ConfigError(f"{p}.{a}", f"undefined venue {v!r}")
        elif isinstance(value, dict) and key in ("deposits", "trigger", "flags"):
            _check_asset_refs(value, p, assets, venues)


def validate(raw: dict) -> Scenario:
    """Check a raw scenario mapping and build the typed :class:`Scenario`."""
    if not isinstance(raw, dict):
        raise ConfigError("", "scenario must be a mapping")
    name = str(raw.get("name", "scenario"))
    seed = _int(raw.get("seed", 0), "seed")
    tick_seconds = _int(raw.get("tick_seconds", DEFAULT_TICK_SECONDS), "tick_seconds", 1)
    horizon = _int(_req(raw, "horizon_ticks", ""), "horizon_ticks", 1)

    asset_list = _req(raw, "assets", "")
    if not isinstance(asset_list, list) or not asset_list:
        raise ConfigError("assets", "need a non-empty list of assets")
    symbols = []
    for i, a in enumerate(asset_list):
        sym = _req(a, "symbol", f"assets[{i}]")
        if sym in symbols:
            raise ConfigError(f"assets[{i}].symbol", f"duplicate asset {sym!r}")
        symbols.append(sym)

    venue_ids = []
    venues = []
    for i, v in enumerate(raw.get("venues") or []):
        p = f"venues[{i}]"
        vid = str(_req(v, "id", p))
        if vid in venue_ids:
            raise ConfigError(f"{p}.id", f"duplicate venue {vid!r}")
        venue_ids.append(vid)
        for side in ("base", "quote"):
            if _req(v, side, p) not in symbols:
                raise ConfigError(f"{p}.{side}", f"undefined asset {v[side]!r}")
        kind = v.get("kind", "constant_product")
        if kind == "constant_product":
            rb = _num(_req(v, "reserve_base", p), f"{p}.reserve_base")
            rq = _num(_req(v, "reserve_quote", p), f"{p}.reserve_quote")
            if rb <= ZERO or rq <= ZERO:
                raise ConfigError(p, "reserves must be positive")
        elif kind == "infinite":
            rb = rq = ZERO
        else:
            raise ConfigError(f"{p}.kind", f"unknown venue kind {kind!r}")
        fee = _num(v.get("fee", 0), f"{p}.fee")
        if not (ZERO <= fee < dec(1)):
            raise ConfigError(f"{p}.fee", "fee must lie in [0, 1)")
        depth = _num(v.get("depth_multiplier", 1), f"{p}.depth_multiplier")
        if depth <= ZERO:
            raise ConfigError(f"{p}.depth_multiplier", "must be positive")
        venues.append(VenueSpec(vid, kind, v["base"], v["quote"], rb, rq, fee, depth))

    assets = []
    for i, a in enumerate(asset_list):
        p = f"assets[{i}]"
        price = _req(a, "price", p)
        try:
            PriceScript(a["symbol"], price, seed).price_at(0)
        except (LendSimError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{p}.price", str(exc)) from None
        ref = a.get("reference_venue")
        if ref is not None:
            if ref not in venue_ids:
                raise ConfigError(f"{p}.reference_venue", f"undefined venue {ref!r}")
            vs = venues[venue_ids.index(ref)]
            if vs.base != a["symbol"]:
                raise ConfigError(f"{p}.reference_venue", f"venue {ref!r} does not trade {a['symbol']} as base")
        try:
            oracle = OraclePolicy.from_dict(a.get("oracle") or {})
        except (LendSimError, TypeError, ValueError) as exc:
            raise ConfigError(f"{p}.oracle", str(exc)) from None
        reserve = None
        if a.get("reserve") is not None:
            try:
                reserve = ReserveConfig.from_dict(a["reserve"])
            except KeyError as exc:
                raise ConfigError(f"{p}.reserve.{exc.args[0]}", "required field missing") from None
            except (LendSimError, TypeError, ValueError) as exc:
                raise ConfigError(f"{p}.reserve", str(exc)) from None
        assets.append(AssetSpec(a["symbol"], price, ref, oracle, reserve))
    ref_assets = {a.symbol for a in assets if a.reference_venue}
    for a in assets:
        if a.reference_venue:
            quote = venues[venue_ids.index(a.reference_venue)].quote
            if quote in ref_assets:
                raise ConfigError(f"assets.{a.symbol}.reference_venue", "quote asset must be script-priced")
    reserve_assets = {a.symbol for a in assets if a.reserve is not None}

    wallets = {}
    for acct, bals in (raw.get("wallets") or {}).items():
        wallets[str(acct)] = _amounts(bals, f"wallets.{acct}", symbols)

    positions = []
    for i, pspec in enumerate(raw.get("positions") or []):
        p = f"positions[{i}]"
        acct = str(_req(pspec, "account", p))
        deps = _amounts(pspec.get("deposits"), f"{p}.deposits", symbols)
        debts = _amounts(pspec.get("debts"), f"{p}.debts", symbols)
        for k in list(deps) + list(debts):
            if k not in reserve_assets:
                raise ConfigError(p, f"asset {k!r} has no lending reserve")
        positions.append(PositionSpec(acct, deps, debts))

    agents = []
    agent_ids = []
    for i, ag in enumerate(raw.get("agents") or []):
        p = f"agents[{i}]"
        aid = str(_req(ag, "id", p))
        if aid in agent_ids:
            raise ConfigError(f"{p}.id", f"duplicate agent {aid!r}")
        agent_ids.append(aid)
        kind = _req(ag, "kind", p)
        if kind not in AGENT_KINDS:
            raise ConfigError(f"{p}.kind", f"unknown agent kind {kind!r}")
        wallets_ = ag.get("wallets") or [aid]
        if not isinstance(wallets_, list) or not wallets_:
            raise ConfigError(f"{p}.wallets", "wallets must be a non-empty list")
        if kind == "loop_attacker" and len(wallets_) != 2:
            raise ConfigError(f"{p}.wallets", "loop_attacker needs exactly two wallets (A and B)")
        params = ag.get("params") or {}
        if not isinstance(params, dict):
            raise ConfigError(f"{p}.params", "expected a mapping")
        _check_asset_refs(params, f"{p}.params", symbols, venue_ids)
        act = ag.get("activation") or {}
        start = _int(act.get("start_tick", 0), f"{p}.activation.start_tick", 0)
        end = act.get("end_tick")
        end = None if end is None else _int(end, f"{p}.activation.end_tick", start)
        agents.append(AgentSpec(aid, kind, tuple(str(w) for w in wallets_), params, start, end))
    if sum(a.kind == "governance" for a in agents) > 1:
        raise ConfigError("agents", "at most one governance agent")

    track = raw.get("track")
    if track is None:
        seen = []
        for ag in agents:
            if ag.kind in ("short_squeezer", "loop_attacker", "defender"):
                seen.extend(w for w in ag.wallets if w not in seen)
        track = seen
    return Scenario(
        raw=copy.deepcopy(raw),
        name=name,
        seed=seed,
        tick_seconds=tick_seconds,
        horizon_ticks=horizon,
        numeraire=str(raw.get("numeraire", "USD")),
        assets=tuple(assets),
        venues=tuple(venues),
        wallets=wallets,
        positions=tuple(positions),
        agents=tuple(agents),
        track=tuple(str(t) for t in track),
        hash=scenario_hash(raw),
    )
