import json

import pytest

from pbnn.canonical import Permutation
from pbnn.core import BinaryState, Pbnn, trajectory
from pbnn.evolve import ArchiveEntry
from pbnn.report import (
    PeriodDistribution,
    SchemaError,
    cumulative_distribution,
    export_distribution_csv,
    load_ep,
    raster,
    raster_pbm,
    read_distribution_csv,
    read_pbm,
)

from conftest import GBPO50


def entry(period, ids=(1, 2, 3)):
    return ArchiveEntry(Permutation(ids), period, 6, 0, 1, 0)


def test_empty_distribution():
    d = cumulative_distribution([])
    assert d.points == () and d.p_max == 0 and d.total == 0


def test_small_distribution():
    d = cumulative_distribution([entry(100), entry(50), entry(100)])
    assert d.points == ((50, 1), (100, 3))
    assert d.p_max == 100 and d.total == 3


def test_distinct_periods_counts_each_value_once():
    d = cumulative_distribution([100, 50, 100], distinct_periods=True)
    assert d.points == ((50, 1), (100, 2))


def test_distribution_monotone():
    d = cumulative_distribution([7, 3, 3, 9, 21, 7, 7])
    xs = [p for p, _ in d.points]
    ys = [c for _, c in d.points]
    assert xs == sorted(set(xs)) and ys == sorted(ys)
    assert d.total == 7 and d.p_max == 21


def test_csv_header_only_for_empty(tmp_path):
    path = tmp_path / "d.csv"
    export_distribution_csv(cumulative_distribution([]), path)
    assert path.read_text() == "period,cumulative_count\n"


def test_csv_lines_and_round_trip(tmp_path):
    path = tmp_path / "d.csv"
    d = cumulative_distribution([100, 50, 100])
    export_distribution_csv(d, path)
    assert path.read_text().splitlines() == ["period,cumulative_count", "50,1", "100,3"]
    export_distribution_csv(d, path, meta={"seed": 3, "n": 17})
    lines = path.read_text().splitlines()
    assert lines[:2] == ["# seed: 3", "# n: 17"]
    assert read_distribution_csv(path) == d


def test_csv_rejects_wrong_header(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("x,y\n1,2\n")
    with pytest.raises(ValueError):
        read_distribution_csv(path)


def test_raster_shape_and_symbols():
    net = Pbnn(17, 1, GBPO50)
    x0 = BinaryState.from_values((1,) * 17)
    rows = raster(trajectory(x0, net, 3))
    assert len(rows) == 4 and all(len(r) == 17 for r in rows)
    assert rows[0] == "#" * 17
    assert rows[1] == "." * 17


def test_raster_periodic_on_orbit():
    from pbnn.attractor import analyze

    net = Pbnn(17, 1, GBPO50)
    x0 = BinaryState(17, analyze(net).gbpo.min_state)
    rows = raster(trajectory(x0, net, 120))
    assert all(rows[t] == rows[t + 50] for t in range(70))


def test_raster_empty():
    with pytest.raises(ValueError):
        raster([])


def test_pbm_round_trip():
    net = Pbnn(7, 1, Permutation.parse("1 5 2 6 3 7 4"))
    traj = trajectory(BinaryState(7, 0b1010011), net, 9)
    text = raster_pbm(traj, meta={"permutation": "P(1526374)"})
    assert text.startswith("P1\n# permutation: P(1526374)\n7 10\n")
    assert read_pbm(text) == raster(traj)


def test_pbm_rejects_bad_input():
    with pytest.raises(ValueError):
        read_pbm("P2\n1 1\n0\n")
    with pytest.raises(ValueError):
        read_pbm("P1\n2 2\n0 1 0\n")


def _ep_doc(**override):
    e = {"cpid": "1 2 3", "period": 6, "f1_num": 6, "generation": 0, "part": 1, "seed": 0}
    e.update(override)
    return {"manifest": {}, "entries": [e]}


def test_load_ep_accepts_object_and_list(tmp_path):
    path = tmp_path / "ep.json"
    path.write_text(json.dumps(_ep_doc()))
    assert load_ep(path)[0]["period"] == 6
    path.write_text(json.dumps(_ep_doc()["entries"]))
    assert len(load_ep(path)) == 1


@pytest.mark.parametrize("override, where", [
    ({"period": "x"}, r"\$\.entries\[0\]\.period"),
    ({"part": 3}, r"\$\.entries\[0\]\.part"),
])
def test_load_ep_errors_name_field(tmp_path, override, where):
    path = tmp_path / "ep.json"
    path.write_text(json.dumps(_ep_doc(**override)))
    with pytest.raises(SchemaError, match=where):
        load_ep(path)


def test_load_ep_missing_field(tmp_path):
    doc = _ep_doc()
    del doc["entries"][0]["cpid"]
    path = tmp_path / "ep.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(SchemaError, match="cpid"):
        load_ep(path)


def test_distribution_is_value_object():
    assert PeriodDistribution(((1, 1),), 1).total == 1
