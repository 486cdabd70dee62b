import csv
import io
import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from teichlimit.curves import (
    circle_in_simplex,
    curve_from_spec,
    l1,
    load_curve,
    polyline,
    segment,
)
from teichlimit.errors import CurveSpecError, DomainError, HorizonExceeded
from teichlimit.numerics import ctx, mpf
from teichlimit.trajectory import (
    CSV_COLUMNS,
    Timeline,
    checkpoint_series,
    checkpoint_table,
    checkpoints,
    horoball_distance_upper,
    horoball_ratio,
    normalize,
    phi,
    plot_data,
    simplex_xy,
)

from conftest import CURVES


@pytest.fixture(scope="module")
def seg(cert_factory):
    return cert_factory("segment", 8)


@pytest.fixture(scope="module")
def tl(seg):
    return Timeline(seg)


def test_distance_at_balance_times(tl):
    for i in range(3):
        for n in (1, 2, 5, 17, 40):
            assert tl.distance(i, tl.time(i, n)) == n
            assert tl.distance(i, tl.time(i, n) + mpf("1e-30")) == n + 1


def test_distance_before_first_time(tl):
    assert tl.distance(0, 0) == 1
    assert tl.distance(0, tl.time(0, 0)) == 1


def test_times_increase(tl):
    # depths are far too large to walk, so probe both sides of each block start
    for i in range(3):
        idx = sorted({m for s in tl.starts[i][1:-1] for m in (s - 2, s - 1, s, s + 1)})
        ts = [tl.time(i, n) for n in [0, 1, 2, *idx, tl.starts[i][-1] - 1]]
        assert all(a < b for a, b in zip(ts, ts[1:]))


def test_partition_property(tl):
    # every t lies in exactly one (T_{n-1}, T_n]
    for i in range(3):
        for n in (3, 11, 30):
            lo, hi = tl.time(i, n - 1), tl.time(i, n)
            for u in (0.001, 0.5, 1.0):
                t = lo + (hi - lo) * u
                assert tl.distance(i, t) == n


def test_horizon(tl):
    assert tl.distance(0, tl.horizon) == tl.starts[0][-1] - 1
    with pytest.raises(HorizonExceeded):
        tl.distance(0, tl.horizon + 1)
    with pytest.raises(HorizonExceeded):
        tl.time(0, tl.starts[0][-1])


def test_symmetric_distances_agree(cert_factory):
    tl = Timeline(cert_factory("constant", 8))
    for k in range(2, 9):
        for t in tl.grid(k, 5):
            d = tl.distances(t)
            assert abs(d[1] - d[2]) <= 1
            assert abs(d[0] - d[1]) <= 1


def test_phi_is_barycentric(seg):
    tl = Timeline(seg)
    for k in range(2, seg.K + 1):
        p = phi(tl, tl.window(k)[0])
        assert abs(sum(p) - 1) < mpf("1e-100")
        assert all(x > 0 for x in p)
    assert normalize((1, 1, 2)) == (mpf(1) / 4, mpf(1) / 4, mpf(1) / 2)


def test_windows_tile(tl, seg):
    for k in range(3, seg.K + 1):
        assert tl.window(k)[0] == tl.window(k - 1)[1]
    with pytest.raises(ValueError):
        tl.window(1)
    g = tl.grid(4, 10)
    assert len(g) == 10 and g[0] == tl.window(4)[0]


def test_horoball_estimate(seg):
    assert horoball_distance_upper(seg, 0, math.e) == pytest.approx(1)
    assert horoball_distance_upper(seg, 2, 1) == 0
    with pytest.raises(DomainError):
        horoball_distance_upper(seg, 0, 0.5)
    tl = Timeline(seg)
    t = tl.window(5)[0]
    assert horoball_ratio(tl, 1, t) == ctx.log(t) / tl.distance(1, t)


def test_checkpoints_track_targets(seg):
    for k in (2, 5, 8):
        cps = checkpoints(seg, k)
        assert len(cps) == 10
        for c in cps:
            assert c.passed
            assert c.target == seg.plan.target(k)
            assert all(b in ("m>=1", "m<=0") for b in c.branch)


def test_csv_table(seg):
    series = checkpoint_series(seg, density=4)
    text = checkpoint_table(series)
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == CSV_COLUMNS
    assert len(rows) == 1 + 4 * (seg.K - 1)
    assert {r[-1] for r in rows[1:]} == {"true"}


def test_simplex_coordinates():
    assert simplex_xy((1, 0, 0)) == (0, 0)
    assert simplex_xy((0, 1, 0)) == (1, 0)
    x, y = simplex_xy((0, 0, 1))
    assert x == 0.5 and y == pytest.approx(math.sqrt(3) / 2)
    x, y = simplex_xy((1 / 3, 1 / 3, 1 / 3))
    assert (x, y) == pytest.approx((0.5, math.sqrt(3) / 6))


def test_plot_data(seg):
    curve = curve_from_spec(seg.curve)
    data = plot_data(seg, checkpoint_series(seg, 2), curve, 0.1)
    json.dumps(data)
    assert len(data["plan"]) == seg.K
    assert len(data["trajectory"]) == 2 * (seg.K - 1)
    assert len(data["curve"]) == len(curve.samples(0.1))


# ---------------------------------------------------------------- curves


def test_curve_files_load():
    names = {p.stem for p in CURVES.glob("*.json")}
    assert {"constant", "segment", "triangle", "circle"} <= names
    for p in CURVES.glob("*.json"):
        c = load_curve(p)
        for pt in c.samples(0.1):
            assert sum(pt) == pytest.approx(1) and min(pt) >= -1e-12


def test_curve_spec_errors(tmp_path):
    with pytest.raises(CurveSpecError):
        polyline([(0.5, 0.6, 0.0)])
    with pytest.raises(CurveSpecError):
        curve_from_spec({"type": "spiral"})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(CurveSpecError):
        load_curve(bad)


def test_circle_stays_inside():
    c = circle_in_simplex(radius=0.2)
    assert c.periodic
    assert l1(c(0.0), c(1.0)) < 1e-12
    assert all(min(p) > 0 for p in c.samples(0.05))


@settings(max_examples=50, deadline=None)
@given(st.floats(0.001, 0.5))
def test_samples_are_dense(mesh):
    c = segment((1, 0, 0), (0, 0.5, 0.5))
    pts = c.samples(mesh)
    assert all(l1(a, b) <= mesh + 1e-12 for a, b in zip(pts, pts[1:]))
    assert pts[0] == (1, 0, 0) and l1(pts[-1], (0, 0.5, 0.5)) < 1e-12
