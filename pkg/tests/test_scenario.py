import copy

import pytest

from lendsim.errors import ConfigError
from lendsim.scenario import (
    apply_override,
    bundled_names,
    load_scenario,
    parse_override,
    resolve,
    scenario_hash,
    validate,
)

BUNDLED = ["governance_sweep", "loop_attack_ren", "oracle_delay", "squeeze_nov22"]


def test_bundled_scenarios_validate():
    assert bundled_names() == BUNDLED
    for name in BUNDLED:
        sc = load_scenario(name)
        assert sc.name == name
        assert len(sc.hash) == 64


def test_hash_ignores_key_order(scenario_dict):
    reordered = dict(reversed(list(scenario_dict.items())))
    assert scenario_hash(reordered) == scenario_hash(scenario_dict)
    assert scenario_hash(apply_override(scenario_dict, "seed", 4)) != scenario_hash(scenario_dict)


@pytest.mark.parametrize(
    "mutate, where",
    [
        (lambda r: r.pop("horizon_ticks"), "horizon_ticks"),
        (lambda r: r.update(horizon_ticks=0), "horizon_ticks"),
        (lambda r: r.update(tick_seconds="soon"), "tick_seconds"),
        (lambda r: r["assets"].append(copy.deepcopy(r["assets"][0])), "assets[2].symbol"),
        (lambda r: r["assets"][0].pop("price"), "assets[0].price"),
        (lambda r: r["assets"][0]["price"].update(mode="psychic"), "assets[0].price"),
        (lambda r: r["assets"][1].update(reference_venue="nowhere"), "assets[1].reference_venue"),
        (lambda r: r["assets"][1]["reserve"].update(ltv="0.95"), "assets[1].reserve"),
        (lambda r: r["assets"][1]["reserve"].pop("ltv"), "assets[1].reserve.ltv"),
        (lambda r: r["assets"][1]["reserve"].update(lvt="0.5"), "assets[1].reserve"),
        (lambda r: r["assets"][1]["reserve"]["rate_params"].update(slope3="1"), "assets[1].reserve"),
        (lambda r: r["assets"][1].update(oracle={"deviation": "0.01"}), "assets[1].oracle"),
        (lambda r: r["positions"][0]["deposits"].update(DOGE="1"), "positions[0].deposits.DOGE"),
        (lambda r: r["positions"][0]["deposits"].update(USDC="-1"), "positions[0].deposits.USDC"),
        (lambda r: r.update(wallets={"a": {"USDC": "lots"}}), "wallets.a.USDC"),
        (lambda r: r.update(agents=[{"id": "x", "kind": "wizard"}]), "agents[0].kind"),
        (lambda r: r.update(agents=[{"id": "x", "kind": "liquidator"}, {"id": "x", "kind": "liquidator"}]), "agents[1].id"),
        (lambda r: r.update(agents=[{"id": "x", "kind": "loop_attacker", "wallets": ["a"]}]), "agents[0].wallets"),
        (
            lambda r: r.update(agents=[{"id": "x", "kind": "short_squeezer", "params": {"target_asset": "DOGE"}}]),
            "agents[0].params.target_asset",
        ),
        (lambda r: r.update(agents=[{"id": "x", "kind": "short_squeezer", "params": {"venue": "v"}}]), "agents[0].params.venue"),
        (
            lambda r: r.update(venues=[{"id": "v", "kind": "constant_product", "base": "CRV", "quote": "USDC", "reserve_base": "0", "reserve_quote": "1"}]),
            "venues[0]",
        ),
        (
            lambda r: r.update(venues=[{"id": "v", "kind": "infinite", "base": "CRV", "quote": "USDC", "fee": "1"}]),
            "venues[0].fee",
        ),
    ],
)
def test_validation_errors_name_the_field(scenario_dict, mutate, where):
    mutate(scenario_dict)
    with pytest.raises(ConfigError) as info:
        validate(scenario_dict)
    assert info.value.path == where


def test_override_by_id_and_index(scenario_dict):
    r = apply_override(scenario_dict, "assets.CRV.reserve.ltv", "0.5")
    assert r["assets"][1]["reserve"]["ltv"] == "0.5"
    assert scenario_dict["assets"][1]["reserve"]["ltv"] == "0.55"  # original untouched
    r = apply_override(scenario_dict, "assets[0].price.value", "2")
    assert resolve(r, "assets.USDC.price.value") == "2"
    r = apply_override(scenario_dict, "positions.lp.deposits.CRV", "5")
    assert resolve(r, "positions[0].deposits.CRV") == "5"


def test_override_may_add_a_key(scenario_dict):
    r = apply_override(scenario_dict, "assets.CRV.oracle", {"delay": 60})
    assert validate(r).asset("CRV").oracle.delay == 60


@pytest.mark.parametrize("path", ["assets.DOGE.price", "assets[9].price", "name.x", "", "nope.deeper"])
def test_override_bad_paths(scenario_dict, path):
    with pytest.raises(ConfigError):
        apply_override(scenario_dict, path, 1)


def test_parse_override_uses_yaml_scalars():
    assert parse_override("seed=7") == ("seed", 7)
    assert parse_override("a.b = 0.5") == ("a.b", 0.5)
    assert parse_override("flags={frozen: true}") == ("flags", {"frozen": True})
    with pytest.raises(ConfigError):
        parse_override("seed")


def test_load_with_overrides_equals_edited_file(tmp_path, scenario_dict):
    import yaml

    edited = apply_override(scenario_dict, "seed", 11)
    path = tmp_path / "s.yaml"
    path.write_text(yaml.safe_dump(scenario_dict))
    assert load_scenario(path, ["seed=11"]).hash == validate(edited).hash


def test_unknown_source():
    with pytest.raises(ConfigError):
        load_scenario("definitely_not_a_scenario")


def test_default_track_follows_attackers(scenario_dict):
    scenario_dict["agents"] = [
        {"id": "eve", "kind": "short_squeezer", "params": {"target_asset": "CRV"}},
        {"id": "l", "kind": "loop_attacker", "wallets": ["a", "b"]},
        {"id": "liq", "kind": "liquidator"},
    ]
    assert validate(scenario_dict).track == ("eve", "a", "b")
