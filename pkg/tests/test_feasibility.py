from importlib import resources

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lendsim.errors import ConfigError, DomainError
from lendsim.feasibility import AssetSnapshot, feasibility, format_table, rank, read_snapshots, to_json
from lendsim.fixed import dec, mul


def snap(asset, dep, avail, cap, status="active"):
    return AssetSnapshot(asset, dec(dep), dec(avail), dec(cap), status)


def test_ratios():
    assert feasibility(snap("CRV", 124, 62, 400)) == (dec("0.31"), dec("0.155"))


@pytest.mark.parametrize(
    "dep, avail, flags",
    [
        ("30", "15", (False, False)),  # exactly on both thresholds
        ("30.000001", "15.000001", (True, True)),
        ("31", "10", (False, True)),
        ("20", "16", (True, False)),
    ],
)
def test_flags_are_strict(dep, avail, flags):
    (r,) = rank([snap("X", dep, avail, 100)])
    assert (r.available_flag, r.deposit_flag) == flags


def test_tie_break_by_deposit_then_name():
    rows = rank([snap("B", 40, 10, 100), snap("A", 40, 10, 100), snap("C", 50, 10, 100), snap("D", 20, 20, 100)])
    assert [r.snapshot.asset for r in rows] == ["D", "C", "A", "B"]


def test_zero_market_cap_is_a_domain_error():
    with pytest.raises(DomainError):
        rank([snap("X", 1, 1, 0)])


def test_empty_and_invalid_input():
    with pytest.raises(DomainError):
        rank([])
    with pytest.raises(DomainError):
        snap("X", 1, 2, 10)
    with pytest.raises(DomainError):
        snap("X", 1, 1, 10, status="maybe")
    with pytest.raises(DomainError):
        snap("X", -1, 0, 10)


def test_bundled_snapshot_matches_hand_ranking():
    path = resources.files("lendsim").joinpath("scenarios", "snapshot_synthetic.csv")
    rows = rank(read_snapshots(path))
    assert [r.snapshot.asset for r in rows] == ["CRV", "REN", "LINK", "YFI", "ENJ"]
    crv = rows[0]
    assert (crv.deposit_ratio, crv.available_ratio) == (dec("0.31"), dec("0.155"))
    assert crv.available_flag and crv.deposit_flag


def test_reader_reports_line(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("asset,deposited_value,available_value,market_cap,status\nA,1,1,10,active\nB,1,5,10,active\n")
    with pytest.raises(ConfigError) as info:
        read_snapshots(p)
    assert info.value.path.endswith(":3")
    p.write_text("asset,deposited_value\nA,1\n")
    with pytest.raises(ConfigError, match="missing columns"):
        read_snapshots(p)


def test_reports():
    rows = rank([snap("CRV", 124, 62, 400), snap("ENJ", 36, "6.3", 420)])
    table = format_table(rows).splitlines()
    assert table[0].split() == ["rank", "asset", "status", "available_ratio", "deposit_ratio", "flags"]
    assert table[1].split() == ["1", "CRV", "active", "0.1550", "0.3100", "available,deposit"]
    assert table[2].split()[-1] == "-"
    assert '"asset": "CRV"' in to_json(rows)


amounts = st.integers(min_value=0, max_value=10**12)


@st.composite
def snapshots(draw):
    n = draw(st.integers(1, 8))
    out = []
    for i in range(n):
        dep = draw(amounts)
        avail = draw(st.integers(0, dep))
        cap = draw(st.integers(1, 10**13))
        out.append(snap(f"A{i}", dep, avail, cap))
    return out


@given(snapshots(), st.permutations(range(8)))
def test_ranking_ignores_input_order(snaps, perm):
    order = [i for i in perm if i < len(snaps)]
    assert [r.snapshot.asset for r in rank(snaps)] == [r.snapshot.asset for r in rank([snaps[i] for i in order])]


@given(snapshots(), st.integers(1, 1000))
def test_ratios_are_scale_invariant(snaps, k):
    scaled = [snap(s.asset, mul(s.deposited_value, dec(k)), mul(s.available_value, dec(k)), mul(s.market_cap, dec(k))) for s in snaps]
    a, b = rank(snaps), rank(scaled)
    assert [r.snapshot.asset for r in a] == [r.snapshot.asset for r in b]
    for x, y in zip(a, b):
        assert abs((x.deposit_ratio - y.deposit_ratio).raw) <= 1
        assert abs((x.available_ratio - y.available_ratio).raw) <= 1
